//! Regenerates the offline fixtures under `data/`: the SPARQL result cache,
//! recorded chat replies, few-shot exemplars and the manifest. Endpoints
//! and the chat model are synthetic, built from the bundled schemas.
//!
//!     cargo run -p shexgen-cli --example record_fixtures

use std::error::Error;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use shexgen_cli::commands::evaluate::cmd_evaluate;
use shexgen_cli::commands::extract::cmd_extract;
use shexgen_cli::commands::generate::cmd_generate;
use shexgen_cli::outcome::{to_json, write_file};
use shexgen_cli::{EvaluateOptions, ExtractOptions, GenerateOptions, Manifest, ManifestEntry, Method, Runtime};
use shexgen_core::{parse_shexc, serialize_shexc, NodeConstraint, PrefixMap, Schema};
use shexgen_kg::{EndpointConfig, KgClient, KgKind};
use shexgen_pipeline::extract::{class_info, global_records, local_samples, triples_examples};
use shexgen_pipeline::structured::{cardinality_prompt, node_prompt};
use shexgen_pipeline::{build_local_prompt, build_triples_prompt, Exemplar, RecordingClient, StructuredCardinality, StructuredNodeConstraint};
use shexgen_testkit::world::label_for;
use shexgen_testkit::{data_dir, fixture_schemas, kind_of, synthesize_world, synthesize_worlds, EndpointRouter, SyntheticEndpoint, SyntheticKg, SyntheticResponder, WorldParams};

fn endpoint_url(kind: KgKind) -> String {
    format!("http://synthetic.test/{kind}/sparql")
}

fn structured_node(nc: &NodeConstraint, schema: &Schema) -> StructuredNodeConstraint {
    match nc {
        NodeConstraint::Datatype(d) => StructuredNodeConstraint::Datatype(d.clone()),
        NodeConstraint::ShapeRef(l) => {
            StructuredNodeConstraint::ReferencedClasses(schema.shape(l).map(|s| s.typing_classes_ordered()).unwrap_or_default())
        }
        NodeConstraint::ValueSet(items) => StructuredNodeConstraint::ValueList(items.clone()),
        NodeConstraint::NodeKindIri => StructuredNodeConstraint::NodeKindIri,
    }
}

/// One exemplar per request kind, drawn from a schema outside the benchmark.
fn write_exemplars(dir: &Path, kind: KgKind, schema: &Schema) -> Result<(), Box<dyn Error>> {
    let mut kg = SyntheticKg::new(kind);
    synthesize_world(&mut kg, schema, &WorldParams::default());
    let client = KgClient::new(EndpointConfig::new(kind, "http://synthetic.test/exemplars"), Arc::new(SyntheticEndpoint::new(kg)), None, false)?;
    let class = schema.focus_class();
    let shex = serialize_shexc(schema)?;
    let info = class_info(&client, class)?;
    let local = build_local_prompt(&info, &local_samples(&client, class, 5)?, &[])?;
    let triples = build_triples_prompt(&info, &triples_examples(&client, class, 40)?, &[])?;
    let start = schema.start_shape();
    let tc = start
        .constraints
        .iter()
        .find(|tc| matches!(tc.node, NodeConstraint::ShapeRef(_)))
        .ok_or("exemplar schema needs a shape reference")?;
    let records = global_records(&client, class, 40)?;
    let record = records.iter().find(|r| r.predicate_uri == tc.predicate).ok_or("no record for the exemplar predicate")?;
    let pm = PrefixMap::well_known();
    let sets: [(&str, Exemplar); 4] = [
        ("local", Exemplar { user: local.user, assistant: shex.clone() }),
        ("triples", Exemplar { user: triples.user, assistant: shex }),
        (
            "global_cardinality",
            Exemplar { user: cardinality_prompt(record, &[])?.user, assistant: StructuredCardinality::included(tc.cardinality).to_json() },
        ),
        ("global_node", Exemplar { user: node_prompt(record, &[])?.user, assistant: structured_node(&tc.node, schema).to_json(&pm) }),
    ];
    for (name, ex) in sets {
        write_file(&dir.join(kind.to_string()).join(format!("{name}.json")), &to_json(&vec![ex]))?;
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let data = data_dir();
    let fixtures = data.join("fixtures");
    let fewshot = data.join("fewshot");
    let sparql = fixtures.join("sparql");
    let llm = fixtures.join("llm");
    for d in [&sparql, &llm] {
        if d.exists() {
            fs::remove_dir_all(d)?;
        }
    }

    for (kind, file) in [(KgKind::Wikidata, "painting.shex"), (KgKind::Yago, "movie.shex")] {
        let schema = parse_shexc(&fs::read_to_string(fewshot.join("exemplars").join(file))?)?;
        write_exemplars(&fewshot, kind, &schema)?;
    }

    let named = fixture_schemas();
    let entries = named
        .iter()
        .map(|(name, s)| ManifestEntry {
            class_uri: s.focus_class().clone(),
            label: label_for(s.focus_class()),
            kg_kind: kind_of(s),
            endpoint_url: endpoint_url(kind_of(s)),
            typing_predicate: None,
            ground_truth_path: format!("schemas/{name}.shex").into(),
        })
        .collect();
    let manifest_path = fixtures.join("manifest.json");
    write_file(&manifest_path, &to_json(&Manifest { dataset_name: "synthetic-fixtures".into(), entries, base_dir: Default::default() }))?;
    let manifest = Manifest::load(&manifest_path)?;

    let schemas: Vec<Schema> = named.into_iter().map(|(_, s)| s).collect();
    let mut router = EndpointRouter::new();
    for kg in synthesize_worlds(&schemas, &WorldParams::default()) {
        let url = endpoint_url(kg.kind());
        router = router.route(url, Arc::new(SyntheticEndpoint::new(kg)));
    }
    let rt = Runtime::with_transport(Arc::new(router), Some(sparql.clone()), false);

    for method in [Method::Local, Method::Triples, Method::Global] {
        let outcome = cmd_extract(&manifest, &[], method, &ExtractOptions::default(), &rt, None)?;
        outcome.status()?;
    }

    let responder = RecordingClient::new(SyntheticResponder::new(schemas), Some(llm.clone()));
    let scratch = tempfile::tempdir()?;
    for method in [Method::Local, Method::Triples, Method::Global, Method::Mined] {
        let out = scratch.path().join(method.to_string());
        let mut opts = GenerateOptions::new(method, &out);
        opts.exemplars_dir = Some(fewshot.clone());
        let generated = cmd_generate(&manifest, &[], &opts, &responder, &rt)?;
        generated.status()?;
        let evaluation = cmd_evaluate(&manifest, &[], &out, &EvaluateOptions { value_type_fallback: true, ..Default::default() }, &rt)?;
        evaluation.status()?;
        let a = &evaluation.value.aggregate;
        println!("{method}: n={} mean NGED {:.3}", a.n, a.mean_nged.unwrap_or(f64::NAN));
    }
    println!("cache entries: {}", fs::read_dir(&sparql)?.count());
    println!("recorded replies: {}", fs::read_dir(&llm)?.count());
    Ok(())
}
