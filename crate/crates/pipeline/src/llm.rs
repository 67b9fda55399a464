//! Chat-completion clients: a live HTTP provider, a replaying stub, a
//! scripted queue for tests, and a recorder that writes stub fixtures.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::{messages_hash, Message};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("no recorded reply for prompt {hash}")]
    StubMiss { hash: String },
    #[error("provider error: {0}")]
    Provider(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("scripted client ran out of replies")]
    Exhausted,
    #[error("transcript I/O error: {0}")]
    Io(String),
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, messages: &[Message], format: ResponseFormat) -> Result<String, LlmError>;

    fn model_id(&self) -> String;
}

impl<T: LlmClient + ?Sized> LlmClient for Arc<T> {
    fn complete(&self, messages: &[Message], format: ResponseFormat) -> Result<String, LlmError> {
        (**self).complete(messages, format)
    }

    fn model_id(&self) -> String {
        (**self).model_id()
    }
}

/// One request/reply pair; also the on-disk stub fixture format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub hash: String,
    pub messages: Vec<Message>,
    pub reply: String,
}

impl Exchange {
    pub fn new(messages: &[Message], reply: impl Into<String>) -> Self {
        Exchange { hash: messages_hash(messages), messages: messages.to_vec(), reply: reply.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Base URL of an OpenAI-compatible API, e.g. `https://api.openai.com/v1`.
    pub url: String,
    pub model: String,
    pub temperature: f64,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            url: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            temperature: 0.0,
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120,
        }
    }
}

/// Live chat-completions client.
pub struct HttpChatClient {
    cfg: ProviderConfig,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpChatClient {
    /// Fails immediately when the credential variable is unset.
    pub fn new(cfg: ProviderConfig) -> Result<Self, LlmError> {
        let api_key = std::env::var(&cfg.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| LlmError::Config(format!("environment variable {} is not set", cfg.api_key_env)))?;
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(cfg.timeout_secs)).build();
        Ok(HttpChatClient { cfg, api_key, agent })
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl LlmClient for HttpChatClient {
    fn complete(&self, messages: &[Message], format: ResponseFormat) -> Result<String, LlmError> {
        let mut body = serde_json::json!({
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "messages": messages,
        });
        if format == ResponseFormat::Json {
            body["response_format"] = serde_json::json!({ "type": "json_object" });
        }
        let url = format!("{}/chat/completions", self.cfg.url.trim_end_matches('/'));
        let resp = self
            .agent
            .post(&url)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| LlmError::Provider(e.to_string()))?;
        let parsed: ChatResponse = resp.into_json().map_err(|e| LlmError::Provider(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| LlmError::Provider("response has no content".into()))
    }

    fn model_id(&self) -> String {
        self.cfg.model.clone()
    }
}

/// Replays recorded replies from `<dir>/<hash>.json`; never touches the network.
pub struct StubClient {
    dir: PathBuf,
    model: String,
}

impl StubClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        StubClient { dir: dir.into(), model: "stub".into() }
    }

    pub fn with_model_id(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }
}

impl LlmClient for StubClient {
    fn complete(&self, messages: &[Message], _format: ResponseFormat) -> Result<String, LlmError> {
        let hash = messages_hash(messages);
        let path = self.dir.join(format!("{hash}.json"));
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(LlmError::StubMiss { hash }),
            Err(e) => return Err(LlmError::Io(e.to_string())),
        };
        let ex: Exchange = serde_json::from_str(&text).map_err(|e| LlmError::Io(format!("{}: {e}", path.display())))?;
        Ok(ex.reply)
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}

/// Returns queued replies in order, logging every request.
pub struct ScriptedClient {
    replies: Mutex<VecDeque<String>>,
    seen: Mutex<Vec<Vec<Message>>>,
}

impl ScriptedClient {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedClient { replies: Mutex::new(replies.into_iter().map(Into::into).collect()), seen: Mutex::new(Vec::new()) }
    }

    pub fn requests(&self) -> Vec<Vec<Message>> {
        self.seen.lock().expect("scripted client poisoned").clone()
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().expect("scripted client poisoned").len()
    }
}

impl LlmClient for ScriptedClient {
    fn complete(&self, messages: &[Message], _format: ResponseFormat) -> Result<String, LlmError> {
        self.seen.lock().expect("scripted client poisoned").push(messages.to_vec());
        self.replies.lock().expect("scripted client poisoned").pop_front().ok_or(LlmError::Exhausted)
    }

    fn model_id(&self) -> String {
        "scripted".into()
    }
}

/// Any function from conversation to reply.
pub struct FnClient<F> {
    f: F,
    model: String,
}

impl<F> FnClient<F>
where
    F: Fn(&[Message]) -> String + Send + Sync,
{
    pub fn new(model: impl Into<String>, f: F) -> Self {
        FnClient { f, model: model.into() }
    }
}

impl<F> LlmClient for FnClient<F>
where
    F: Fn(&[Message]) -> String + Send + Sync,
{
    fn complete(&self, messages: &[Message], _format: ResponseFormat) -> Result<String, LlmError> {
        Ok((self.f)(messages))
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}

/// Wraps a client, keeping every exchange in memory and optionally writing
/// each one to a directory in the stub fixture format.
pub struct RecordingClient<C> {
    inner: C,
    dir: Option<PathBuf>,
    log: Mutex<Vec<Exchange>>,
}

impl<C: LlmClient> RecordingClient<C> {
    pub fn new(inner: C, dir: Option<PathBuf>) -> Self {
        RecordingClient { inner, dir, log: Mutex::new(Vec::new()) }
    }

    pub fn take_transcript(&self) -> Vec<Exchange> {
        std::mem::take(&mut *self.log.lock().expect("recording client poisoned"))
    }
}

impl<C: LlmClient> LlmClient for RecordingClient<C> {
    fn complete(&self, messages: &[Message], format: ResponseFormat) -> Result<String, LlmError> {
        let reply = self.inner.complete(messages, format)?;
        let ex = Exchange::new(messages, reply.clone());
        if let Some(dir) = &self.dir {
            write_exchange(dir, &ex)?;
        }
        self.log.lock().expect("recording client poisoned").push(ex);
        Ok(reply)
    }

    fn model_id(&self) -> String {
        self.inner.model_id()
    }
}

pub fn write_exchange(dir: &Path, ex: &Exchange) -> Result<(), LlmError> {
    let mut text = serde_json::to_string_pretty(ex).map_err(|e| LlmError::Io(e.to_string()))?;
    text.push('\n');
    shexgen_kg::cache::write_atomic(&dir.join(format!("{}.json", ex.hash)), text.as_bytes()).map_err(|e| LlmError::Io(e.to_string()))
}
