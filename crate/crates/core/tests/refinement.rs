use ar_core::dynamics::{AbstractDynamics, TrialSeed};
use ar_core::metric::Metric;
use ar_core::refinement::{
    check_layer, check_stack_to_device, predict_through_stack, RefinementLayer, RefinementStack, SimulationRelation,
    Strictness,
};
use ar_core::scenarios::{build_refinement_stack, build_refinement_stack_with};
use ar_core::spaces::{AbstractSpace, AbstractState};
use ar_core::table::Table;
use ar_core::value::Value;
use ar_core::verification::{validate_theory, CheckParams};
use ar_core::Error;

fn stack(misdeclared: bool) -> RefinementStack {
    build_refinement_stack_with(misdeclared).stack("adder-stack").unwrap().clone()
}

fn top(x: i64, y: i64) -> AbstractState {
    AbstractState::new("decimal-registers", Value::Tuple(vec![Value::Int(x), Value::Int(y), Value::Int(0)]))
}

#[test]
fn every_layer_of_the_adder_stack_simulates() {
    let s = stack(false);
    assert_eq!(s.layers().len(), 3);
    for sim in s.simulations() {
        let r = check_layer(sim, 0.0, Metric::discrete()).unwrap();
        assert!(r.passed, "{}", r.relation);
        assert_eq!(r.checked, sim.upper().space().cardinality().unwrap() as usize);
    }
}

#[test]
fn misdeclared_relation_reports_the_offending_inputs() {
    let s = stack(true);
    let r = check_layer(&s.simulations()[0], 0.0, Metric::discrete()).unwrap();
    assert!(!r.passed);
    for f in &r.failures {
        assert_ne!(f.via_upper, f.via_lower);
        assert!(f.distance > 0.0);
    }
    // only inputs whose first operand is 1 or 2 disagree
    assert!(r.failures.iter().all(|f| {
        let x = f.input.value().as_tuple().unwrap()[0].as_int().unwrap();
        x == 1 || x == 2
    }));
    assert!(r.failures.iter().any(|f| f.input == top(1, 2)));
}

#[test]
fn lowering_composes_the_simulations() {
    let s = stack(false);
    let bottom = s.lower_to_bottom(&top(3, 2)).unwrap();
    assert_eq!(
        bottom.value(),
        &Value::Tuple(vec![Value::bits("11"), Value::bits("10"), Value::bits("000")])
    );
    assert!(s.reachable_bottom_states().unwrap().contains(&bottom));
}

#[test]
fn strict_stack_check_requires_validation() {
    let s = stack(false);
    let err = check_stack_to_device(&s, &CheckParams::default(), TrialSeed(0), Strictness::RequireValidated).unwrap_err();
    assert!(matches!(err, Error::TheoryNotValidated { .. }));
    let (valid, _) = validate_theory(s.theory(), &CheckParams::default(), TrialSeed(0)).unwrap();
    let strict = s.with_theory(valid).unwrap();
    let r = check_stack_to_device(&strict, &CheckParams::default(), TrialSeed(0), Strictness::RequireValidated).unwrap();
    assert!(r.passed && r.layers_passed && r.device_passed);
}

#[test]
fn predictions_through_the_stack_add() {
    let s = stack(false);
    assert!(matches!(
        predict_through_stack(&s, &top(1, 1), TrialSeed(0)),
        Err(Error::TheoryNotValidated { .. })
    ));
    let (valid, _) = validate_theory(s.theory(), &CheckParams::default(), TrialSeed(0)).unwrap();
    let s = s.with_theory(valid).unwrap();
    for x in 0..4 {
        for y in 0..4 {
            let p = predict_through_stack(&s, &top(x, y), TrialSeed(0)).unwrap();
            let out = p.top_output.expect("device output lifts to the top layer");
            assert_eq!(out.value().as_tuple().unwrap()[2], Value::Int(x + y));
        }
    }
}

#[test]
fn stack_shapes_are_checked() {
    let built = build_refinement_stack();
    let s = built.stack("adder-stack").unwrap();
    // simulations out of order
    let mut sims = s.simulations().to_vec();
    sims.reverse();
    let r = RefinementStack::new("bad", s.layers().to_vec(), sims, s.theory().clone(), s.device().clone());
    assert!(r.is_err());
    // too few simulations
    let r = RefinementStack::new(
        "bad",
        s.layers().to_vec(),
        s.simulations()[..1].to_vec(),
        s.theory().clone(),
        s.device().clone(),
    );
    assert!(r.is_err());
}

#[test]
fn simulation_tables_must_be_total() {
    let n = AbstractSpace::bounded_int("n", 0, 2).unwrap();
    let m = AbstractSpace::bounded_int("m", 0, 2).unwrap();
    let upper = RefinementLayer::new("u", AbstractDynamics::builtin("u-id", n, "identity", None).unwrap());
    let lower = RefinementLayer::new("l", AbstractDynamics::builtin("l-id", m, "identity", None).unwrap());
    let partial = Table::new(vec![(Value::Int(0), Value::Int(0))]);
    assert!(SimulationRelation::new("s", upper.clone(), lower.clone(), partial).is_err());
    let full = Table::new((0..3).map(|i| (Value::Int(i), Value::Int(2 - i))).collect());
    let sim = SimulationRelation::new("s", upper, lower, full).unwrap();
    assert!(check_layer(&sim, 0.0, Metric::discrete()).unwrap().passed);
}

#[test]
fn layer_tolerance_uses_the_metric() {
    let n = AbstractSpace::bounded_int("n", 0, 3).unwrap();
    let up = AbstractDynamics::table("inc", n.clone(), |v| Value::Int((v.as_int().unwrap() + 1).min(3))).unwrap();
    let down = AbstractDynamics::builtin("hold", n.clone(), "identity", None).unwrap();
    let map = Table::tabulate(&n, |v| v.clone()).unwrap();
    let sim = SimulationRelation::new("s", RefinementLayer::new("u", up), RefinementLayer::new("l", down), map).unwrap();
    assert!(!check_layer(&sim, 0.5, Metric::absolute_difference()).unwrap().passed);
    assert!(check_layer(&sim, 1.0, Metric::absolute_difference()).unwrap().passed);
}
