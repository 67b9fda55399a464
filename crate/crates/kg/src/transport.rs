use std::time::Duration;

use crate::error::KgError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Executes one SPARQL query against an endpoint. Implementations must be
/// safe to call from several threads.
pub trait Transport: Send + Sync {
    fn execute(&self, endpoint: &str, query: &str, timeout: Duration) -> Result<HttpResponse, KgError>;
}

/// SPARQL protocol over HTTP POST (form-encoded query).
pub struct HttpTransport {
    agent: ureq::Agent,
    user_agent: String,
}

impl HttpTransport {
    pub fn new() -> Self {
        HttpTransport {
            agent: ureq::AgentBuilder::new().build(),
            user_agent: format!("shexgen/{} (schema generation research tool)", env!("CARGO_PKG_VERSION")),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport::new()
    }
}

impl Transport for HttpTransport {
    fn execute(&self, endpoint: &str, query: &str, timeout: Duration) -> Result<HttpResponse, KgError> {
        let resp = self
            .agent
            .post(endpoint)
            .timeout(timeout)
            .set("Accept", "application/sparql-results+json")
            .set("User-Agent", &self.user_agent)
            .send_form(&[("query", query)]);
        match resp {
            Ok(r) => {
                let status = r.status();
                let body = r.into_string().map_err(|e| KgError::Transport(e.to_string()))?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Status(status, r)) => Ok(HttpResponse { status, body: r.into_string().unwrap_or_default() }),
            Err(ureq::Error::Transport(t)) => {
                let msg = t.to_string();
                if msg.contains("timed out") {
                    Err(KgError::Timeout)
                } else {
                    Err(KgError::Transport(msg))
                }
            }
        }
    }
}
