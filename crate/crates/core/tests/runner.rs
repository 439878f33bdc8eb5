use ar_core::bundle::CheckKind;
use ar_core::dynamics::TrialSeed;
use ar_core::runner::{render_text, run_checks, run_checks_with, CheckDetail, RunOptions, RunReport, Status};
use ar_core::scenarios;
use ar_core::verification::CheckParams;
use serde_json::json;

fn adder() -> ar_core::bundle::ScenarioBundle {
    scenarios::builder("voltage-adder").unwrap().build()
}

#[test]
fn healthy_adder_passes_everything() {
    let r = run_checks(&adder(), TrialSeed(0), None).unwrap();
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.summary.overall, Status::Pass);
    assert_eq!(r.summary.passed, r.summary.total);
    let Some(CheckDetail::Compute(c)) = &r.check("compute-01-10").unwrap().detail else { panic!() };
    assert_eq!(c.output, c.expected.clone().unwrap());
}

#[test]
fn faulted_adder_exits_one() {
    let b = scenarios::builder("voltage-adder-stuck-at-zero").unwrap().build();
    let r = run_checks(&b, TrialSeed(0), None).unwrap();
    assert_eq!(r.exit_code(), 1);
    assert_eq!(r.summary.overall, Status::Fail);
    assert_eq!(r.summary.errored, 0);
    let Some(CheckDetail::Validation(v)) = &r.check("validate-adder").unwrap().detail else { panic!() };
    assert_eq!(v.validity, "invalid");
    assert_eq!(v.cells - v.passed_cells, 8);
}

#[test]
fn missing_objects_error_per_check() {
    let mut b = adder();
    b.add_check(
        "ghost",
        CheckKind::ValidateTheory {
            theory: "no-such-theory".into(),
            params: CheckParams::default(),
        },
    )
    .unwrap();
    let r = run_checks(&b, TrialSeed(0), None).unwrap();
    let ghost = r.check("ghost").unwrap();
    assert_eq!(ghost.status, Status::Error);
    assert!(ghost.error.as_deref().unwrap().contains("no-such-theory"));
    assert_eq!(r.summary.errored, 1);
    assert_eq!(r.exit_code(), 2);
}

#[test]
fn inputs_outside_the_space_error() {
    let mut b = adder();
    b.add_check(
        "bad-input",
        CheckKind::Commutation {
            theory: "adder-theory".into(),
            program: "add".into(),
            device: "adder-circuit".into(),
            input: json!([0, 9]),
            params: CheckParams::default(),
        },
    )
    .unwrap();
    let r = run_checks(&b, TrialSeed(0), Some("^bad-")).unwrap();
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].status, Status::Error);
}

#[test]
fn filter_selects_in_declaration_order() {
    let b = adder();
    let r = run_checks(&b, TrialSeed(0), Some("^compute-")).unwrap();
    let names: Vec<_> = r.checks.iter().map(|c| c.name.as_str()).collect();
    let expected: Vec<_> = b
        .checks
        .iter()
        .map(|c| c.name.as_str())
        .filter(|n| n.starts_with("compute-"))
        .collect();
    assert_eq!(names, expected);
    assert_eq!(r.filter.as_deref(), Some("^compute-"));
    assert!(run_checks(&b, TrialSeed(0), Some("(")).is_err());
}

#[test]
fn filtering_does_not_change_seeds() {
    let b = scenarios::builder("voltage-adder-noisy").unwrap().build();
    let all = run_checks(&b, TrialSeed(4), None).unwrap();
    let one = run_checks(&b, TrialSeed(4), Some("noisy-commute")).unwrap();
    assert_eq!(one.checks[0], *all.check("noisy-commute-01-10").unwrap());
}

#[test]
fn overrides_apply_to_selected_checks() {
    let b = scenarios::builder("voltage-adder-noisy").unwrap().build();
    let opts = RunOptions {
        seed: TrialSeed(0),
        filter: Some("noisy-commute".into()),
        epsilon: None,
        trials: Some(50),
    };
    let r = run_checks_with(&b, &opts).unwrap();
    let Some(CheckDetail::Commutation(d)) = &r.checks[0].detail else { panic!() };
    assert_eq!(d.trials, 50);
    assert_eq!(d.lower_paths.iter().map(|o| o.count).sum::<usize>(), 50);
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let b = scenarios::builder("social-machine").unwrap().build();
    let first = run_checks(&b, TrialSeed(1), None).unwrap();
    let again = run_checks(&b, TrialSeed(1), None).unwrap();
    assert_eq!(first.to_json(), again.to_json());
    let back = RunReport::from_json(&first.to_json()).unwrap();
    assert_eq!(back, first);
    assert_eq!(render_text(&back), render_text(&first));
}

#[test]
fn classification_reports_the_oracle() {
    let b = scenarios::builder("xor-joint").unwrap().build();
    let r = run_checks(&b, TrialSeed(0), Some("^classify-xor")).unwrap();
    let Some(CheckDetail::Classification(c)) = &r.checks[0].detail else { panic!() };
    assert_eq!(c.class, "heterotic");
    assert_eq!(c.label, "representational heterotic");
    assert_eq!(c.oracle_agrees, Some(true));
}

#[test]
fn text_report_has_one_line_per_check() {
    let b = adder();
    let r = run_checks(&b, TrialSeed(0), None).unwrap();
    let text = render_text(&r);
    for c in &b.checks {
        assert_eq!(text.lines().filter(|l| l.contains(&c.name)).count(), 1, "{}", c.name);
    }
}
