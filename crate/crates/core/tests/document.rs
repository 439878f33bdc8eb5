use ar_core::bundle::CheckKind;
use ar_core::document::{emit_scenario, parse_scenario, value_from_json, value_to_json, ParseErrorKind};
use ar_core::metric::Metric;
use ar_core::scenarios;
use ar_core::spaces::AbstractSpace;
use ar_core::value::Value;
use serde_json::json;

const LAMP: &str = r#"{
  "format_version": "1",
  "name": "lamp",
  "spaces": [
    { "kind": "finite-labeled", "id": "lamp", "domain": "physical", "labels": ["dark", "lit"] },
    { "kind": "bitstring", "id": "bit", "domain": "abstract", "width": 1 }
  ],
  "relations": [
    { "rule": "lookup-table", "id": "glow", "domain": "lamp", "codomain": "bit",
      "table": [["dark", "0"], ["lit", "1"]] }
  ],
  "dynamics": [
    { "rule": "builtin", "id": "not", "space": "bit", "builtin": "bit-not" },
    { "rule": "lookup-table", "id": "toggle", "domain": "physical", "space": "lamp",
      "table": [["dark", "lit"], ["lit", "dark"]] },
    { "rule": "lookup-table", "id": "flick", "domain": "physical", "space": "lamp",
      "table": [["dark", "dark"], ["lit", "lit"]] }
  ],
  "theories": [
    { "id": "lamp-theory", "representation": "glow",
      "instantiation": { "seeds": ["dark", "lit"], "engineering": "flick" },
      "domain": ["dark", "lit"],
      "predictions": [{ "program": "not", "device": "toggle" }] }
  ],
  "checks": [
    { "kind": "validate-theory", "name": "validate", "theory": "lamp-theory" },
    { "kind": "commutation", "name": "dark", "theory": "lamp-theory", "program": "not",
      "device": "toggle", "input": "dark", "metric": "hamming", "trials": 3 }
  ]
}
"#;

fn with(edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut doc: serde_json::Value = serde_json::from_str(LAMP).unwrap();
    edit(&mut doc);
    serde_json::to_string_pretty(&doc).unwrap()
}

#[test]
fn hand_written_document_parses() {
    let b = parse_scenario(LAMP).unwrap();
    assert_eq!(b.name, "lamp");
    assert_eq!(b.theories.len(), 1);
    assert_eq!(b.checks.len(), 2);
    assert!(b.theory("lamp-theory").unwrap().instantiation().is_some());
}

#[test]
fn omitted_check_parameters_take_defaults() {
    let b = parse_scenario(LAMP).unwrap();
    let CheckKind::ValidateTheory { params, .. } = &b.checks[0].kind else { panic!() };
    assert_eq!(params.epsilon, 0.0);
    assert_eq!(params.metric, Metric::discrete());
    assert_eq!(params.trials, 1);
    assert_eq!(params.required_success, 1.0);
    let CheckKind::Commutation { params, .. } = &b.checks[1].kind else { panic!() };
    assert_eq!(params.metric, Metric::hamming());
    assert_eq!(params.trials, 3);
}

#[test]
fn unknown_reference_is_located() {
    let text = LAMP.replace(r#""representation": "glow""#, r#""representation": "shine""#);
    let err = parse_scenario(&text).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::UnknownReference);
    assert_eq!(err.identifier.as_deref(), Some("shine"));
    let line = text.lines().position(|l| l.contains("\"shine\"")).unwrap() + 1;
    assert_eq!(err.line, line, "{err}");
    assert!(err.column > 0);
    assert!(err.to_string().starts_with(&format!("{line}:")));
}

#[test]
fn check_references_are_resolved_at_parse_time() {
    let text = with(|d| d["checks"][1]["device"] = json!("nowhere"));
    let err = parse_scenario(&text).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::UnknownReference);
    assert_eq!(err.identifier.as_deref(), Some("nowhere"));
}

#[test]
fn unknown_metric_and_builtin_are_unknown_references() {
    let text = with(|d| d["checks"][1]["metric"] = json!("taxicab"));
    assert_eq!(parse_scenario(&text).unwrap_err().kind, ParseErrorKind::UnknownReference);
    let text = with(|d| d["dynamics"][0]["builtin"] = json!("bit-flop"));
    assert_eq!(parse_scenario(&text).unwrap_err().kind, ParseErrorKind::UnknownReference);
}

#[test]
fn duplicate_identifiers_are_rejected() {
    let text = with(|d| {
        let spaces = d["spaces"].as_array_mut().unwrap();
        spaces.push(json!({ "kind": "bitstring", "id": "lamp", "domain": "abstract", "width": 2 }));
    });
    let err = parse_scenario(&text).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::DuplicateIdentifier);
    assert_eq!(err.identifier.as_deref(), Some("lamp"));
    let text = with(|d| {
        let checks = d["checks"].as_array_mut().unwrap();
        let again = checks[0].clone();
        checks.push(again);
    });
    assert_eq!(parse_scenario(&text).unwrap_err().kind, ParseErrorKind::DuplicateIdentifier);
}

#[test]
fn unsupported_version_is_rejected() {
    let text = with(|d| d["format_version"] = json!("7"));
    assert_eq!(parse_scenario(&text).unwrap_err().kind, ParseErrorKind::VersionUnsupported);
}

#[test]
fn syntax_errors_carry_a_position() {
    let text = LAMP.replacen("\"name\": \"lamp\",", "\"name\": \"lamp\"", 1);
    let err = parse_scenario(&text).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::SyntaxError);
    assert!(err.line >= 3, "{err}");
    let err = parse_scenario(&with(|d| d["surprise"] = json!(1))).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::SyntaxError);
}

#[test]
fn constructor_failures_are_invalid_declarations() {
    // a non-total device table
    let text = with(|d| d["dynamics"][1]["table"] = json!([["dark", "lit"]]));
    assert_eq!(parse_scenario(&text).unwrap_err().kind, ParseErrorKind::InvalidDeclaration);
    let text = with(|d| d["theories"][0]["domain"] = json!(["dim"]));
    assert_eq!(parse_scenario(&text).unwrap_err().kind, ParseErrorKind::InvalidDeclaration);
}

#[test]
fn forward_references_within_a_section_resolve() {
    let text = with(|d| {
        let spaces = d["spaces"].as_array_mut().unwrap();
        spaces.insert(
            0,
            json!({ "kind": "tuple", "id": "lamps", "domain": "physical", "components": ["lamp", "lamp"] }),
        );
    });
    let b = parse_scenario(&text).unwrap();
    assert!(b.physical_spaces.contains_key("lamps"));
}

#[test]
fn builtins_survive_emit_and_parse() {
    for builder in scenarios::registry() {
        let b = builder.build();
        let text = emit_scenario(&b);
        assert!(text.ends_with('\n'));
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back, b, "{}", builder.name());
    }
}

#[test]
fn values_round_trip_through_json() {
    let space = AbstractSpace::tuple(
        "mixed",
        vec![
            AbstractSpace::bitstring("b", 3).unwrap(),
            AbstractSpace::bounded_int("n", -2, 2).unwrap(),
        ],
    )
    .unwrap();
    for v in space.enumerate_values().unwrap() {
        assert_eq!(value_from_json(&space, &value_to_json(&v)).unwrap(), v);
    }
    assert!(value_from_json(&space, &json!(["101", 9])).is_err());
    assert!(value_from_json(&space, &json!(["12", 0])).is_err());
    assert_eq!(
        value_from_json(&space, &json!(["010", -1])).unwrap(),
        Value::Tuple(vec![Value::bits("010"), Value::Int(-1)])
    );
}
