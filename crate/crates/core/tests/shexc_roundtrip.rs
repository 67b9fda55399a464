use proptest::prelude::*;
use shexgen_core::shexc::{is_blank_shexc, DiagnosticKind};
use shexgen_core::{canonicalize, classes_of, parse_shexc, serialize_shexc, to_canonical_json, Iri, NodeConstraint};
use shexgen_testkit::{fixture_schema, fixture_schemas, fixture_texts};

#[test]
fn every_fixture_round_trips() {
    let fixtures = fixture_schemas();
    assert!(fixtures.len() >= 6);
    for (name, schema) in fixtures {
        let text = serialize_shexc(&schema).unwrap();
        let back = parse_shexc(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
        assert_eq!(canonicalize(&back), canonicalize(&schema), "{name}");
        assert_eq!(serialize_shexc(&back).unwrap(), text, "{name}: serialization is a fixed point");
    }
}

#[test]
fn canonicalize_is_idempotent_and_preserves_classes() {
    for (name, schema) in fixture_schemas() {
        let once = canonicalize(&schema);
        assert_eq!(canonicalize(&once), once, "{name}");
        let before: Vec<_> = schema.start_shape().constraints.iter().map(|c| classes_of(&c.node, &schema).unwrap()).collect();
        let mut after = Vec::new();
        for c in &schema.start_shape().constraints {
            let same = once.start_shape().constraint(&c.predicate).unwrap();
            after.push(classes_of(&same.node, &once).unwrap());
        }
        assert_eq!(before, after, "{name}");
    }
}

#[test]
fn museum_structure() {
    let s = fixture_schema("museum");
    let wdt = |p: &str| Iri::new(format!("http://www.wikidata.org/prop/direct/{p}")).unwrap();
    assert_eq!(s.constraint_count(), 4);
    let p17 = s.start_shape().constraint(&wdt("P17")).unwrap();
    assert!(matches!(&p17.node, NodeConstraint::ShapeRef(l) if l.as_str() == "Country"));
    assert_eq!(s.shape_count(), 2);
}

#[test]
fn canonical_json_is_stable_across_equivalent_sources() {
    let s = fixture_schema("museum");
    let reparsed = parse_shexc(&serialize_shexc(&s).unwrap()).unwrap();
    assert_eq!(to_canonical_json(&s), to_canonical_json(&reparsed));
}

#[test]
fn fixtures_are_not_blank() {
    for (name, text) in fixture_texts() {
        assert!(!is_blank_shexc(&text), "{name}");
    }
}

/// Byte offsets of every position in `text` that starts a line or follows
/// whitespace and is not inside a comment, string or IRI.
fn token_starts(text: &str) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut prev_ws = true;
    let mut in_comment = false;
    let mut in_iri = false;
    for (off, c) in text.char_indices() {
        if c == '#' && !in_iri {
            in_comment = true;
        }
        if c == '<' {
            in_iri = true;
        }
        if !in_comment && !in_iri && prev_ws && !c.is_whitespace() {
            out.push((off, line, col));
        }
        if c == '>' {
            in_iri = false;
        }
        prev_ws = c.is_whitespace();
        if c == '\n' {
            line += 1;
            col = 1;
            in_comment = false;
        } else {
            col += 1;
        }
    }
    out
}

proptest! {
    #[test]
    fn junk_token_reported_at_insertion_point(file in 0usize..6, pick in 0usize..10_000, junk in prop::sample::select(vec!["!junk", "§", "`x`", "\\\\"])) {
        let texts = fixture_texts();
        let (_, text) = &texts[file % texts.len()];
        let starts = token_starts(text);
        let (off, line, col) = starts[pick % starts.len()];
        let mut broken = String::with_capacity(text.len() + 8);
        broken.push_str(&text[..off]);
        broken.push_str(junk);
        broken.push(' ');
        broken.push_str(&text[off..]);
        let err = parse_shexc(&broken).expect_err("junk must be rejected");
        prop_assert!(
            err.diagnostics.iter().any(|d| d.line == line && d.column == col),
            "no diagnostic at {}:{} in {:?}", line, col, err.diagnostics
        );
    }

    #[test]
    fn parser_is_total(text in "\\PC{0,200}") {
        let _ = parse_shexc(&text);
    }

    #[test]
    fn parser_is_total_on_shex_like_noise(parts in prop::collection::vec(prop::sample::select(vec![
        "<S>", "{", "}", "[", "]", ";", "wdt:P31", "IRI", "*", "?", "+", "{1,", "2}", "@<S>", "PREFIX", "wdt:",
        "<http://www.wikidata.org/prop/direct/>", "\"x\"", "@en", "^^", "xsd:string", "start", "=", "EXTRA", "#c\n",
    ]), 0..40)) {
        let text = parts.join(" ");
        if let Ok(schema) = parse_shexc(&text) {
            let again = parse_shexc(&serialize_shexc(&schema).unwrap()).unwrap();
            prop_assert_eq!(canonicalize(&again), canonicalize(&schema));
        }
    }
}

#[test]
fn diagnostics_carry_kind_and_position() {
    let err = parse_shexc("PREFIX ex: <http://ex.org/>\n<S> {\n  ex:a IRI ;\n  ex:b ex:c AND ex:d\n}").unwrap_err();
    let d = &err.diagnostics[0];
    assert_eq!(d.kind, DiagnosticKind::UnsupportedFeature);
    assert_eq!((d.line, d.column), (4, 13));
}
