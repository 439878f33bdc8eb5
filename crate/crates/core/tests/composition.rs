mod common;

use ar_core::composition::{
    brute_force_classify, classify, compose_parallel, compose_sequential, factorize_dynamics, factorize_representation,
    Class, Component, JointSystem, Provenance,
};
use ar_core::dynamics::{AbstractDynamics, TrialSeed};
use ar_core::scenarios::{build_social_machine, build_xor_joint};
use ar_core::spaces::AbstractSpace;
use ar_core::table::Table;
use ar_core::value::Value;
use ar_core::verification::{validate_theory, CheckParams};
use ar_core::Error;

fn joint(id: &str) -> JointSystem {
    build_xor_joint().resolve_joint(id, &Default::default()).unwrap()
}

#[test]
fn xor_coupling_is_heterotic() {
    let j = joint("xor-joint");
    let c = classify(&j).unwrap();
    assert_eq!(c.class, Class::Heterotic);
    // the representation factors; the dynamics does not
    assert!(c.witness.representation.is_some());
    assert!(c.witness.dynamics.is_none());
}

#[test]
fn negating_one_side_is_hybrid_with_a_witness() {
    let j = joint("negate-first-joint");
    let c = classify(&j).unwrap();
    assert_eq!(c.class, Class::Hybrid);
    let (f, g) = c.witness.dynamics.unwrap();
    for (a, fa) in f.entries() {
        assert_ne!(a, fa, "first factor negates");
    }
    for (b, gb) in g.entries() {
        assert_eq!(b, gb, "second factor holds");
    }
    assert_eq!(brute_force_classify(&j).unwrap().class, Class::Hybrid);
}

#[test]
fn identity_joint_is_hybrid() {
    assert_eq!(classify(&joint("identity-joint")).unwrap().class, Class::Hybrid);
}

#[test]
fn composing_requires_validated_components() {
    let bundle = build_xor_joint();
    let t = bundle.theory("cell-theory").unwrap().clone();
    let hold = bundle.program("hold").unwrap().clone();
    let raw = Component::new(t.clone(), hold.clone()).unwrap();
    assert!(matches!(
        compose_parallel("p", raw.clone(), raw.clone()),
        Err(Error::TheoryNotValidated { .. })
    ));
    let (valid, _) = validate_theory(&t, &CheckParams::default(), TrialSeed(0)).unwrap();
    let ok = Component::new(valid, hold).unwrap();
    let p = compose_parallel("p", ok.clone(), ok.clone()).unwrap();
    let s = compose_sequential("s", ok.clone(), ok).unwrap();
    assert_eq!(p.provenance(), Provenance::ComposedParallel);
    assert_eq!(s.provenance(), Provenance::ComposedSequential);
    for j in [p, s] {
        assert_eq!(classify(&j).unwrap().class, Class::Hybrid);
    }
}

#[test]
fn galaxy_zoo_catalogue_does_not_factor() {
    let bundle = build_social_machine();
    let zoo = bundle.resolve_joint("galaxy-zoo", &Default::default()).unwrap();
    assert_eq!(zoo.provenance(), Provenance::Declared);
    assert!(factorize_representation(&zoo).unwrap().is_none());
    let c = classify(&zoo).unwrap();
    assert_eq!(c.class, Class::Heterotic);
    assert_eq!(brute_force_classify(&zoo).unwrap().class, Class::Heterotic);
}

#[test]
fn product_dynamics_factor_and_couplings_do_not() {
    let bit = AbstractSpace::bitstring("b", 1).unwrap();
    let pair = AbstractSpace::tuple("bb", vec![bit.clone(), bit]).unwrap();
    let swap = AbstractDynamics::builtin("swap", pair.clone(), "swap-pair", None).unwrap();
    let not = AbstractDynamics::builtin("not", pair.clone(), "bit-not", None).unwrap();
    assert!(factorize_dynamics(&swap).unwrap().is_none());
    let (f, g) = factorize_dynamics(&not).unwrap().unwrap();
    assert_eq!(f.get(&Value::bits("0")), Some(&Value::bits("1")));
    assert_eq!(g.get(&Value::bits("1")), Some(&Value::bits("0")));
    let single = AbstractDynamics::builtin("id", AbstractSpace::bitstring("w", 2).unwrap(), "identity", None).unwrap();
    assert!(matches!(factorize_dynamics(&single), Err(Error::NotProductSpace { .. })));
}

#[test]
fn oracle_refuses_large_spaces() {
    let mut r = common::rng(5);
    let big = common::component(common::random_theory(&mut r, "big", 8, 1));
    let mut big_theory = big.theory.clone();
    // widen the codomain past the oracle bound
    let wide = AbstractSpace::bounded_int("wide", 0, 9).unwrap();
    let rel = ar_core::relations::RepresentationRelation::lookup(
        "wide-r",
        big_theory.representation().domain().clone(),
        wide.clone(),
        |_| Value::Int(0),
    )
    .unwrap();
    let hold = AbstractDynamics::builtin("wide-hold", wide, "identity", None).unwrap();
    big_theory = ar_core::relations::Theory::new(
        "wide-theory",
        rel.clone(),
        None,
        big_theory.domain().to_vec(),
        vec![ar_core::relations::Prediction {
            abstract_dynamics: hold.clone(),
            physical_dynamics: big_theory.predictions()[0].physical_dynamics.clone(),
        }],
    )
    .unwrap();
    let c = Component::new(big_theory, hold).unwrap();
    let product = ar_core::relations::RepresentationRelation::tuple_wise("jr", "jp", "jm", vec![rel.clone(), rel]).unwrap();
    let dynamics = AbstractDynamics::builtin("jd", product.codomain().clone(), "identity", None).unwrap();
    let j = JointSystem::declared("wide-joint", c.clone(), c, product, dynamics).unwrap();
    assert!(matches!(brute_force_classify(&j), Err(Error::TooLarge { size: 10, .. })));
    assert_eq!(classify(&j).unwrap().class, Class::Hybrid);
}

#[test]
fn declared_joints_must_match_the_components() {
    let x = joint("xor-joint");
    let other = AbstractSpace::bitstring("w", 2).unwrap();
    let wrong = AbstractDynamics::builtin("d", other, "identity", None).unwrap();
    let r = JointSystem::declared(
        "bad",
        x.left().clone(),
        x.right().clone(),
        x.joint_representation().clone(),
        wrong,
    );
    assert!(r.is_err());
}

#[test]
fn representation_witness_reproduces_the_components() {
    let j = joint("identity-joint");
    let (f, g) = factorize_representation(&j).unwrap().unwrap();
    let own = |c: &Component| {
        Table::new(
            c.sample_states()
                .unwrap()
                .into_iter()
                .map(|p| {
                    let v = ar_core::relations::represent(c.theory.representation(), &p).unwrap();
                    (p.into_value(), v.into_value())
                })
                .collect(),
        )
    };
    assert_eq!(f, own(j.left()));
    assert_eq!(g, own(j.right()));
}
