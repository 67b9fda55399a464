use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use serde_json::Value;
use shexgen_cli::commands::report::{breakdown_percentages, markdown_report};
use shexgen_cli::{cmd_extract, CliError, Evaluation, ExtractOptions, Manifest, Method, Runtime};
use shexgen_core::ErrorBreakdown;
use shexgen_testkit::{fixture_schema, fixtures_dir, synthesize_world, SyntheticEndpoint, SyntheticKg, WorldParams};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shexgen"))
}

fn manifest_path() -> PathBuf {
    fixtures_dir().join("manifest.json")
}

fn offline(args: &[&str]) -> Output {
    let cache = fixtures_dir().join("sparql");
    bin().arg("--offline").arg("--cache-dir").arg(cache).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn generate_global(out: &Path) -> Output {
    let stubs = fixtures_dir().join("llm");
    let fewshot = fixtures_dir().join("../fewshot");
    offline(&["generate", "--manifest", s(&manifest_path()), "--setting", "global", "--stub-dir", s(&stubs), "--exemplars", s(&fewshot), "--out", s(out)])
}

#[test]
fn ground_truth_against_itself_is_perfect() {
    let out = offline(&["evaluate", "--manifest", s(&manifest_path()), "--generated", s(&fixtures_dir().join("schemas"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["aggregate"]["n"], 6);
    assert_eq!(v["aggregate"]["mean_nged"], 0.0);
    for c in v["aggregate"]["criteria"].as_array().unwrap() {
        assert_eq!(c["f1"], 1.0);
        assert_eq!(c["n"], 6);
    }
}

#[test]
fn missing_schemas_score_as_empty_and_invalid_ones_are_excluded() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("museum.shex"), "this is { not shex").unwrap();
    fs::copy(fixtures_dir().join("schemas/city.shex"), dir.path().join("city.shex")).unwrap();
    let out = offline(&["evaluate", "--manifest", s(&manifest_path()), "--generated", s(dir.path()), "--criteria", "node=exact,card=exact"]);
    assert_eq!(out.status.code(), Some(0));
    let e: Evaluation = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(e.invalid, vec!["museum".to_owned()]);
    assert_eq!(e.aggregate.n, 5);
    assert_eq!(e.aggregate.n_invalid, 1);
    assert_eq!(e.aggregate.n_missing, 4);
    for r in &e.records {
        match r.label.as_str() {
            "museum" => assert!(r.reports.is_empty() && r.nged.is_none()),
            "city" => assert_eq!(r.nged, Some(0.0)),
            _ => {
                assert_eq!(r.nged, Some(1.0), "{}", r.label);
                assert_eq!(r.reports[0].f1, 0.0);
            }
        }
    }
    let f1 = e.aggregate.criteria[0].f1;
    assert!((f1 - 0.2).abs() < 1e-12, "{f1}");
    let md = markdown_report(&[e]);
    assert!(md.contains("INVALID museum"), "{md}");
}

#[test]
fn stubbed_generation_and_evaluation_are_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = generate_global(d);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["run.json", "museum.shex", "museum.transcript.json", "book.shex", "city.shex", "human.shex"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let eval = |d: &Path, format: &str| offline(&["evaluate", "--manifest", s(&manifest_path()), "--generated", s(d), "--format", format]).stdout;
    for format in ["json", "csv", "md"] {
        assert_eq!(eval(&a, format), eval(&b, format), "{format}");
    }
    let run: Value = serde_json::from_slice(&fs::read(a.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["setting"], "global");
    assert_eq!(run["classes"].as_array().unwrap().len(), 6);
}

#[test]
fn report_percentages_and_column_order() {
    let dir = tempfile::tempdir().unwrap();
    let perfect = dir.path().join("perfect.json");
    let out = offline(&[
        "evaluate", "--manifest", s(&manifest_path()), "--class", "museum", "--generated", s(&fixtures_dir().join("schemas")), "--out", s(&perfect),
        "--setting", "reference", "--model", "none",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let gen = dir.path().join("gen");
    assert_eq!(generate_global(&gen).status.code(), Some(0));
    let mixed = dir.path().join("mixed.json");
    let out = offline(&["evaluate", "--manifest", s(&manifest_path()), "--generated", s(&gen), "--out", s(&mixed)]);
    assert_eq!(out.status.code(), Some(0));

    let out = bin().args(["report", s(&perfect), s(&mixed)]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let md = String::from_utf8(out.stdout).unwrap();
    assert!(md.contains("| model | setting | criteria | N | P | R | F1 | GED | NGED |"), "{md}");
    let outcomes = md.split("## Scores").next().unwrap();
    let rows: Vec<&str> = outcomes.lines().filter(|l| l.starts_with("| ") && !l.starts_with("| model") && !l.starts_with("| ---")).collect();
    assert_eq!(rows.len(), 2, "{md}");
    assert_eq!(rows[0], "| none | reference | 1 | 100.00 | 0.00 | 0.00 | 0.00 | 0.00 |");
    for row in rows {
        let pct: f64 = row.split('|').map(str::trim).filter(|c| !c.is_empty()).skip(3).map(|c| c.parse::<f64>().unwrap()).sum();
        assert!((pct - 100.0).abs() <= 0.05, "{row}");
    }

    let out = bin().args(["report", "--format", "csv", s(&mixed)]).output().unwrap();
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("model,setting,criteria,n,p,r,f1,ged,nged,correct_pct"), "{csv}");
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn breakdown_percentages_sum_to_one_hundred() {
    let b = ErrorBreakdown { correct: 7, missing_predicate: 2, wrong_cardinality: 1, wrong_node_constraint: 0, both_wrong: 1 };
    let p = breakdown_percentages(&b);
    assert!((p.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    assert_eq!(breakdown_percentages(&ErrorBreakdown::default()), [0.0; 5]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cold = bin()
        .args(["--offline", "--cache-dir", s(dir.path()), "extract", "--manifest", s(&manifest_path()), "--class", "city"])
        .output()
        .unwrap();
    assert_eq!(cold.status.code(), Some(CliError::CacheMiss(String::new()).exit_code()));
    assert_eq!(cold.status.code(), Some(6));

    let missing = bin().args(["extract", "--manifest", "/nonexistent/manifest.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let no_key = bin()
        .env_remove("SHEXGEN_TEST_NO_SUCH_KEY")
        .args(["generate", "--manifest", s(&manifest_path()), "--out", s(dir.path()), "--api-key-env", "SHEXGEN_TEST_NO_SUCH_KEY"])
        .output()
        .unwrap();
    assert_eq!(no_key.status.code(), Some(2), "{}", String::from_utf8_lossy(&no_key.stderr));

    let no_model = offline(&["generate", "--manifest", s(&manifest_path()), "--out", s(dir.path()), "--stub-dir", s(dir.path()), "--cardinality", "dt"]);
    assert_eq!(no_model.status.code(), Some(2));

    let bad = dir.path().join("bad.shex");
    fs::write(&bad, "<A> { <p> xsd:string }").unwrap();
    assert_eq!(bin().args(["convert", s(&bad)]).output().unwrap().status.code(), Some(4));
}

fn write_manifest(dir: &Path, entries: Value) -> PathBuf {
    let schemas = fixtures_dir().join("schemas");
    let mut entries = entries;
    for e in entries.as_array_mut().unwrap() {
        let file = e["ground_truth_path"].as_str().unwrap().to_owned();
        e["ground_truth_path"] = Value::String(schemas.join(file).to_string_lossy().into_owned());
    }
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::json!({ "dataset_name": "t", "entries": entries }).to_string()).unwrap();
    path
}

#[test]
fn one_failed_class_is_a_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(
        dir.path(),
        serde_json::json!([
            { "class_uri": "http://schema.org/City", "label": "city", "kg_kind": "yago",
              "endpoint_url": "http://synthetic.test/yago/sparql", "ground_truth_path": "city.shex" },
            { "class_uri": "http://schema.org/Book", "label": "book", "kg_kind": "yago",
              "endpoint_url": "http://elsewhere.test/sparql", "ground_truth_path": "book.shex" }
        ]),
    );
    let out = offline(&["extract", "--manifest", s(&path)]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["classes"][0]["ok"], true);
    assert_eq!(report["classes"][1]["ok"], false);
}

#[test]
fn manifest_validation() {
    let dir = tempfile::tempdir().unwrap();
    let entry = serde_json::json!({ "class_uri": "http://schema.org/City", "label": "city", "kg_kind": "yago",
        "endpoint_url": "http://synthetic.test/yago/sparql", "ground_truth_path": "city.shex" });
    let dup = write_manifest(dir.path(), serde_json::json!([entry.clone(), entry]));
    assert!(matches!(Manifest::load(&dup), Err(CliError::Config(m)) if m.contains("duplicate")));

    fs::write(dir.path().join("broken.shex"), "PREFIX : <urn:x:>\n:A {").unwrap();
    let path = dir.path().join("m2.json");
    fs::write(
        &path,
        serde_json::json!({ "dataset_name": "t", "entries": [{ "class_uri": "http://schema.org/City", "label": "City Hall!",
            "kg_kind": "yago", "endpoint_url": "http://x.test/", "ground_truth_path": "broken.shex" }] })
        .to_string(),
    )
    .unwrap();
    assert!(matches!(Manifest::load(&path), Err(CliError::Parse(_))));

    let m = Manifest::load(&manifest_path()).unwrap();
    let award = m.select(&["film award".into()]).unwrap();
    assert_eq!(award[0].slug(), "film_award");
    assert_eq!(m.select(&["http://schema.org/City".into()]).unwrap()[0].label, "city");
    assert!(m.select(&["nothing".into()]).is_err());
}

#[test]
fn extraction_fills_the_cache_then_replays_without_network() {
    let gt = fixture_schema("museum");
    let mut kg = SyntheticKg::new(shexgen_kg::KgKind::Wikidata);
    synthesize_world(&mut kg, &gt, &WorldParams::default());
    let endpoint = Arc::new(SyntheticEndpoint::new(kg));
    let cache = tempfile::tempdir().unwrap();
    let m = Manifest::load(&manifest_path()).unwrap();
    let rt = Runtime::with_transport(endpoint.clone(), Some(cache.path().to_path_buf()), false);
    let museum = ["museum".to_owned()];

    let first = cmd_extract(&m, &museum, Method::Global, &ExtractOptions::default(), &rt, None).unwrap();
    first.status().unwrap();
    let fetched = endpoint.requests();
    assert!(fetched > 0);
    assert_eq!(first.value.classes[0].network_requests, fetched);
    assert_eq!(first.value.cache_keys.len() as u64, fetched);
    assert!(first.value.classes[0].rows >= 4);

    let second = cmd_extract(&m, &museum, Method::Global, &ExtractOptions::default(), &rt, None).unwrap();
    second.status().unwrap();
    assert_eq!(endpoint.requests(), fetched);
    assert_eq!(second.value.classes[0].network_requests, 0);
    assert_eq!(second.value.cache_keys, first.value.cache_keys);
}

#[test]
fn endpoint_errors_exit_with_the_network_code() {
    let gt = fixture_schema("museum");
    let mut kg = SyntheticKg::new(shexgen_kg::KgKind::Wikidata);
    synthesize_world(&mut kg, &gt, &WorldParams::default());
    let endpoint = Arc::new(SyntheticEndpoint::new(kg));
    endpoint.fail_next(&[400]);
    let m = Manifest::load(&manifest_path()).unwrap();
    let rt = Runtime::with_transport(endpoint, None, false);
    let o = cmd_extract(&m, &["museum".into()], Method::Global, &ExtractOptions::default(), &rt, None).unwrap();
    let err = o.status().unwrap_err();
    assert!(matches!(err, CliError::Network(_)), "{err:?}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn training_and_the_hybrid_pipeline_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("gb.json");
    let features = dir.path().join("rows.csv");
    let out = offline(&[
        "train", "--manifest", s(&manifest_path()), "--cardinality", "gb", "--model-file", s(&model), "--features-out", s(&features), "--holdout", "0.3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out);
    assert_eq!(summary["kind"], "gb");
    let rows = summary["train_rows"].as_u64().unwrap() + summary["test_rows"].as_u64().unwrap();
    assert_eq!(fs::read_to_string(&features).unwrap().lines().count() as u64, rows + 1);

    let again = dir.path().join("gb2.json");
    let out = bin().args(["train", "--features-in", s(&features), "--cardinality", "gb", "--model-file", s(&again), "--holdout", "0.3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(&model).unwrap(), fs::read(&again).unwrap());

    let gen = dir.path().join("hybrid");
    let stubs = fixtures_dir().join("llm");
    let fewshot = fixtures_dir().join("../fewshot");
    let out = offline(&[
        "generate", "--manifest", s(&manifest_path()), "--stub-dir", s(&stubs), "--exemplars", s(&fewshot), "--out", s(&gen),
        "--cardinality", "gb", "--model-file", s(&model),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run: Value = serde_json::from_slice(&fs::read(gen.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["setting"], "global+gb");

    let wrong = offline(&[
        "generate", "--manifest", s(&manifest_path()), "--stub-dir", s(&stubs), "--out", s(&gen), "--cardinality", "dt", "--model-file", s(&model),
    ]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn mining_and_conversion() {
    let dir = tempfile::tempdir().unwrap();
    let out = offline(&["mine", "--manifest", s(&manifest_path()), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mined = dir.path().join("museum.shex");
    let text = fs::read_to_string(&mined).unwrap();
    assert!(text.contains("wdt:P17 @"), "{text}");

    let out = bin().args(["convert", s(&mined), "--to", "json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());
    let out = bin().args(["convert", s(&mined)]).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
}
