use ar_core::dynamics::{AbstractDynamics, PhysicalDynamics, TrialSeed};
use ar_core::metric::Metric;
use ar_core::relations::{instantiate, represent, InstantiationProcedure, Prediction, RepresentationRelation, Theory};
use ar_core::scenarios;
use ar_core::spaces::{AbstractSpace, AbstractState, PhysicalSpace, PhysicalState};
use ar_core::table::Table;
use ar_core::value::Value;
use ar_core::verification::{
    check_commutation, check_history, embed_problem, run_compute_cycle, run_experiment, validate_theory, CheckParams,
    CycleStage, DiagramSpec, ProblemEmbedding,
};
use ar_core::Error;

/// A lamp with a switch. `toggle` is a faithful device for `bit-not`;
/// `stuck` never leaves `dark`.
fn lamp(device: &str) -> Theory {
    let p = PhysicalSpace::labels("lamp", ["dark", "lit"]).unwrap();
    let m = AbstractSpace::bitstring("bit", 1).unwrap();
    let r = RepresentationRelation::lookup("glow", p.clone(), m.clone(), |v| {
        Value::bits(if v == &Value::label("lit") { "1" } else { "0" })
    })
    .unwrap();
    let h = PhysicalDynamics::table(device, p.clone(), |v| match (device, v) {
        ("stuck", _) => Value::label("dark"),
        (_, v) if v == &Value::label("lit") => Value::label("dark"),
        _ => Value::label("lit"),
    })
    .unwrap();
    let states = p.enumerate().unwrap();
    Theory::new(
        "lamp-theory",
        r,
        Some(InstantiationProcedure {
            seeds: states.clone(),
            engineering: PhysicalDynamics::identity("flick", p).unwrap(),
        }),
        states,
        vec![Prediction {
            abstract_dynamics: AbstractDynamics::builtin("not", m, "bit-not", None).unwrap(),
            physical_dynamics: h,
        }],
    )
    .unwrap()
}

fn st(label: &str) -> PhysicalState {
    PhysicalState::new("lamp", Value::label(label))
}

fn bit(s: &str) -> AbstractState {
    AbstractState::new("bit", Value::bits(s))
}

#[test]
fn faithful_device_commutes() {
    let t = lamp("toggle");
    let spec = DiagramSpec::new(&t, &t.predictions()[0], CheckParams::default());
    for p in t.domain() {
        let r = check_commutation(&spec, p, TrialSeed(0)).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_distance(), 0.0);
        assert_eq!(r.trials(), 1);
    }
    let (valid, report) = validate_theory(&t, &CheckParams::default(), TrialSeed(0)).unwrap();
    assert!(valid.validity().is_valid());
    assert_eq!(report.coverage, 2);
    assert_eq!(report.failures().count(), 0);
}

#[test]
fn stuck_device_fails_only_where_it_differs() {
    let t = lamp("stuck");
    let spec = DiagramSpec::new(&t, &t.predictions()[0], CheckParams::default());
    // not(0) = 1 but the lamp stays dark; not(1) = 0 matches
    assert!(!check_commutation(&spec, &st("dark"), TrialSeed(0)).unwrap().passed);
    assert!(check_commutation(&spec, &st("lit"), TrialSeed(0)).unwrap().passed);
    let (invalid, report) = validate_theory(&t, &CheckParams::default(), TrialSeed(0)).unwrap();
    assert_eq!(invalid.validity().label(), "invalid");
    let failed: Vec<_> = report.failures().map(|c| c.state.clone()).collect();
    assert_eq!(failed, [st("dark")]);
}

#[test]
fn tolerance_absorbs_small_errors() {
    let t = lamp("stuck");
    let spec = DiagramSpec::new(&t, &t.predictions()[0], CheckParams::default().with_metric(Metric::hamming()));
    let r = check_commutation(&spec, &st("dark"), TrialSeed(0)).unwrap();
    assert_eq!(r.max_distance(), 1.0);
    assert!(!r.passes_at(0.5));
    assert!(r.passes_at(1.0));
}

#[test]
fn history_check_measures_physical_distance() {
    let t = lamp("toggle");
    let spec = DiagramSpec::new(&t, &t.predictions()[0], CheckParams::default());
    assert!(check_history(&spec, &bit("0"), Metric::discrete(), TrialSeed(0)).unwrap().passed);
    let stuck = lamp("stuck");
    let spec = DiagramSpec::new(&stuck, &stuck.predictions()[0], CheckParams::default());
    assert!(!check_history(&spec, &bit("0"), Metric::discrete(), TrialSeed(0)).unwrap().passed);
}

#[test]
fn invalid_parameters_are_rejected() {
    let t = lamp("toggle");
    for params in [
        CheckParams::default().with_epsilon(-1.0),
        CheckParams::default().with_trials(0, 1.0),
        CheckParams::default().with_trials(5, 0.0),
        CheckParams::default().with_trials(5, 1.5),
    ] {
        assert!(params.validate().is_err());
        let spec = DiagramSpec::new(&t, &t.predictions()[0], params);
        assert!(check_commutation(&spec, &st("lit"), TrialSeed(0)).is_err());
    }
}

#[test]
fn compute_needs_validation() {
    let t = lamp("toggle");
    let h = t.predictions()[0].physical_dynamics.clone();
    let err = run_compute_cycle(&t, &bit("0"), "not", &h, TrialSeed(0)).unwrap_err();
    assert!(matches!(err, Error::TheoryNotValidated { .. }));
    let (invalid, _) = validate_theory(&lamp("stuck"), &CheckParams::default(), TrialSeed(0)).unwrap();
    let h = invalid.predictions()[0].physical_dynamics.clone();
    assert!(matches!(
        run_compute_cycle(&invalid, &bit("0"), "not", &h, TrialSeed(0)),
        Err(Error::TheoryNotValidated { .. })
    ));
}

#[test]
fn compute_needs_a_declared_prediction() {
    let (valid, _) = validate_theory(&lamp("toggle"), &CheckParams::default(), TrialSeed(0)).unwrap();
    let h = valid.predictions()[0].physical_dynamics.clone();
    let err = run_compute_cycle(&valid, &bit("0"), "and", &h, TrialSeed(0)).unwrap_err();
    assert!(matches!(err, Error::UnknownPrediction { .. }), "{err}");
    let other = PhysicalDynamics::identity("flick", PhysicalSpace::labels("lamp", ["dark", "lit"]).unwrap()).unwrap();
    assert!(matches!(
        run_compute_cycle(&valid, &bit("0"), "not", &other, TrialSeed(0)),
        Err(Error::UnknownPrediction { .. })
    ));
}

#[test]
fn compute_cycle_traces_each_stage() {
    let (valid, _) = validate_theory(&lamp("toggle"), &CheckParams::default(), TrialSeed(0)).unwrap();
    let h = valid.predictions()[0].physical_dynamics.clone();
    let out = run_compute_cycle(&valid, &bit("0"), "not", &h, TrialSeed(0)).unwrap();
    assert_eq!(out.prepared, st("dark"));
    assert_eq!(out.final_physical, st("lit"));
    assert_eq!(out.output, bit("1"));
    assert_eq!(
        out.trace,
        [
            CycleStage::Input(bit("0")),
            CycleStage::Instantiated(st("dark")),
            CycleStage::Evolved(st("lit")),
            CycleStage::Represented(bit("1")),
        ]
    );
}

#[test]
fn instantiation_inverts_representation() {
    let t = lamp("toggle");
    for m in [bit("0"), bit("1")] {
        let p = instantiate(&t, &m).unwrap();
        assert_eq!(represent(t.representation(), &p).unwrap(), m);
    }
}

#[test]
fn unreachable_targets_are_not_instantiable() {
    let t = lamp("toggle");
    let only_dark = Theory::new(
        "dark-only",
        t.representation().clone(),
        Some(InstantiationProcedure {
            seeds: vec![st("dark")],
            engineering: PhysicalDynamics::identity("flick", t.representation().domain().clone()).unwrap(),
        }),
        t.domain().to_vec(),
        t.predictions().to_vec(),
    )
    .unwrap();
    assert!(matches!(instantiate(&only_dark, &bit("1")), Err(Error::NotInstantiable { .. })));
    let none = Theory::new(
        "no-procedure",
        t.representation().clone(),
        None,
        t.domain().to_vec(),
        t.predictions().to_vec(),
    )
    .unwrap();
    assert!(matches!(instantiate(&none, &bit("1")), Err(Error::MissingInstantiation { .. })));
}

#[test]
fn validation_needs_a_domain_and_predictions() {
    let t = lamp("toggle");
    let empty = Theory::new("e", t.representation().clone(), None, vec![], t.predictions().to_vec()).unwrap();
    let none = Theory::new("n", t.representation().clone(), None, t.domain().to_vec(), vec![]).unwrap();
    for theory in [empty, none] {
        let err = validate_theory(&theory, &CheckParams::default(), TrialSeed(0)).unwrap_err();
        assert!(matches!(err, Error::EmptyDomain { .. }), "{err}");
    }
}

#[test]
fn experiments_are_counted_without_changing_validity() {
    let t = lamp("toggle");
    let spec = DiagramSpec::new(&t, &t.predictions()[0], CheckParams::default());
    let (after, report) = run_experiment(&spec, &st("dark"), TrialSeed(0)).unwrap();
    assert!(report.passed);
    assert_eq!(after.experiments(), t.experiments() + 1);
    assert_eq!(after.validity().label(), "untested");
}

#[test]
fn noisy_success_fraction_is_reproducible() {
    let bundle = scenarios::build_voltage_adder(0.2).unwrap();
    let t = bundle.theory("adder-theory").unwrap();
    let spec = DiagramSpec::new(t, &t.predictions()[0], CheckParams::default().with_trials(500, 0.5));
    let p = &t.domain()[5];
    let a = check_commutation(&spec, p, TrialSeed(1)).unwrap();
    let b = check_commutation(&spec, p, TrialSeed(1)).unwrap();
    let c = check_commutation(&spec, p, TrialSeed(2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.distances, c.distances);
    // three independent output lines: 0.8^3
    assert!((a.success_fraction - 0.512).abs() < 0.07, "{}", a.success_fraction);
}

#[test]
fn embeddings_translate_problem_states() {
    let bundle = scenarios::build_voltage_adder(0.0).unwrap();
    let decimal = bundle.embedding("decimal-operands").unwrap();
    let load = bundle.embedding("load-operands").unwrap();
    let problem = decimal.problem_space().parse_state("(1, 2)").unwrap();
    let operands = embed_problem(decimal, &problem).unwrap();
    assert_eq!(operands.value(), &Value::Tuple(vec![Value::bits("01"), Value::bits("10")]));
    let regs = embed_problem(load, &operands).unwrap();
    assert_eq!(
        regs.value(),
        &Value::Tuple(vec![Value::bits("01"), Value::bits("10"), Value::bits("000")])
    );
    assert!(embed_problem(load, &problem).is_err());
}

#[test]
fn embeddings_must_be_total() {
    let n = AbstractSpace::bounded_int("n", 0, 2).unwrap();
    let b = AbstractSpace::bitstring("b", 2).unwrap();
    let partial = Table::new(vec![(Value::Int(0), Value::bits("00"))]);
    assert!(ProblemEmbedding::new("partial", n, b, partial).is_err());
}
