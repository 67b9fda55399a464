use std::sync::Arc;
use std::thread;
use std::time::Duration;

use shexgen_core::Iri;
use shexgen_kg::{build_global_record, cache_key, KgClient, KgError, KgKind, KgQuery, QueryCache};
use shexgen_testkit::{CountingTransport, SyntheticEndpoint, SyntheticKg};

const Y: &str = "http://yago-knowledge.org/resource/";

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn world() -> SyntheticKg {
    let mut kg = SyntheticKg::new(KgKind::Yago);
    for i in 0..10 {
        let s = format!("{Y}city_{i}");
        kg.add_instance(&s, &format!("{Y}City"));
        for j in 0..(i % 3) {
            kg.add_iri(&s, &format!("{Y}twin"), &format!("{Y}city_{j}"));
        }
    }
    kg
}

fn fast(kg: &SyntheticKg) -> shexgen_kg::EndpointConfig {
    let mut cfg = kg.cfg.clone();
    cfg.retry_backoff_ms = vec![0, 0, 0];
    cfg
}

#[test]
fn warm_cache_avoids_network() {
    let dir = tempfile::tempdir().unwrap();
    let kg = world();
    let cfg = fast(&kg);
    let endpoint = Arc::new(SyntheticEndpoint::new(kg));
    let class = iri(&format!("{Y}City"));
    let first = {
        let c = KgClient::new(cfg.clone(), endpoint.clone(), Some(QueryCache::new(dir.path())), false).unwrap();
        c.predicate_frequencies(&class).unwrap()
    };
    assert_eq!(endpoint.requests(), 1);
    let files_before: Vec<String> = QueryCache::new(dir.path()).keys().unwrap();
    let text_before = std::fs::read_to_string(dir.path().join(format!("{}.json", files_before[0]))).unwrap();

    let counting = Arc::new(CountingTransport::new());
    let replay = KgClient::new(cfg.clone(), counting.clone(), Some(QueryCache::new(dir.path())), false).unwrap();
    assert_eq!(replay.predicate_frequencies(&class).unwrap(), first);
    assert_eq!(replay.predicate_frequencies(&class).unwrap(), first);
    assert_eq!(counting.requests(), 0);
    let text_after = std::fs::read_to_string(dir.path().join(format!("{}.json", files_before[0]))).unwrap();
    assert_eq!(text_before, text_after);
}

#[test]
fn record_rebuilt_from_cache_is_equal() {
    let dir = tempfile::tempdir().unwrap();
    let kg = world();
    let cfg = fast(&kg);
    let (class, twin) = (iri(&format!("{Y}City")), iri(&format!("{Y}twin")));
    let live = KgClient::new(cfg.clone(), Arc::new(SyntheticEndpoint::new(kg)), Some(QueryCache::new(dir.path())), false).unwrap();
    let original = build_global_record(&live, &class, &twin).unwrap();
    let offline = KgClient::new(cfg, Arc::new(CountingTransport::new()), Some(QueryCache::new(dir.path())), true).unwrap();
    assert_eq!(build_global_record(&offline, &class, &twin).unwrap(), original);
}

#[test]
fn offline_cold_key_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let kg = world();
    let cfg = fast(&kg);
    let counting = Arc::new(CountingTransport::new());
    let c = KgClient::new(cfg.clone(), counting.clone(), Some(QueryCache::new(dir.path())), true).unwrap();
    let q = KgQuery::InstanceCount { class: iri(&format!("{Y}City")) };
    let expected = cache_key(&cfg.endpoint_url, &q.render(&cfg));
    assert_eq!(c.run(&q), Err(KgError::CacheMiss { key: expected.clone() }));
    assert_eq!(c.key_of(&q), expected);
    assert_eq!(counting.requests(), 0);
}

#[test]
fn concurrent_misses_share_one_request() {
    let dir = tempfile::tempdir().unwrap();
    let kg = world();
    let cfg = fast(&kg);
    let endpoint = Arc::new(SyntheticEndpoint::new(kg).with_delay(Duration::from_millis(50)));
    let c = Arc::new(KgClient::new(cfg, endpoint.clone(), Some(QueryCache::new(dir.path())), false).unwrap());
    let class = iri(&format!("{Y}City"));
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let (c, class) = (c.clone(), class.clone());
            thread::spawn(move || c.instance_count(&class).unwrap())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), 10);
    }
    assert_eq!(endpoint.requests(), 1);
}

#[test]
fn retries_transient_statuses_only() {
    let kg = world();
    let cfg = fast(&kg);
    let endpoint = Arc::new(SyntheticEndpoint::new(kg));
    let c = KgClient::new(cfg.clone(), endpoint.clone(), None, false).unwrap();
    endpoint.fail_next(&[429, 503]);
    assert_eq!(c.instance_count(&iri(&format!("{Y}City"))).unwrap(), 10);
    assert_eq!(endpoint.requests(), 3);

    endpoint.fail_next(&[404]);
    let err = c.instance_count(&iri(&format!("{Y}Town"))).unwrap_err();
    assert!(matches!(err, KgError::Http { status: 404, .. }));
    assert_eq!(endpoint.requests(), 4);

    endpoint.fail_next(&[500, 500, 500, 500]);
    let err = c.instance_count(&iri(&format!("{Y}Village"))).unwrap_err();
    assert!(matches!(err, KgError::Http { status: 500, .. }));
    assert_eq!(endpoint.requests(), 8);
}

#[test]
fn key_ignores_whitespace_but_not_endpoint() {
    let a = cache_key("http://e/sparql", "SELECT ?x\nWHERE { ?x ?p ?o }");
    let b = cache_key("http://e/sparql", "SELECT   ?x WHERE {\n  ?x ?p ?o\n}");
    let c = cache_key("http://f/sparql", "SELECT ?x WHERE { ?x ?p ?o }");
    assert_eq!(a, b);
    assert_ne!(a, c);
}
