mod common;

use ar_core::composition::{brute_force_classify, classify};
use ar_core::document::{value_from_json, value_to_json};
use ar_core::dynamics::{evolve_physical, TrialSeed};
use ar_core::metric::Metric;
use ar_core::relations::{instantiate, represent};
use ar_core::spaces::AbstractSpace;
use ar_core::value::{Bits, Value};
use ar_core::verification::{check_commutation, CheckParams, DiagramSpec};
use ar_core::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn passing_is_monotone_in_epsilon(seed in any::<u64>(), lo in 0.0f64..4.0, gap in 0.0f64..4.0) {
        let theory = common::random_theory(&mut common::rng(seed), "t", 5, 5);
        let prediction = &theory.predictions()[0];
        let base = CheckParams::default().with_metric(Metric::absolute_difference());
        for p in theory.domain() {
            let tight = DiagramSpec::new(&theory, prediction, base.with_epsilon(lo));
            let loose = DiagramSpec::new(&theory, prediction, base.with_epsilon(lo + gap));
            let a = check_commutation(&tight, p, TrialSeed(seed)).unwrap();
            let b = check_commutation(&loose, p, TrialSeed(seed)).unwrap();
            prop_assert!(!a.passed || b.passed);
            prop_assert_eq!(a.passes_at(lo + gap), b.passed);
        }
    }

    #[test]
    fn instantiation_round_trips(seed in any::<u64>()) {
        let theory = common::random_theory(&mut common::rng(seed), "t", 6, 4);
        for m in theory.representation().codomain().enumerate().unwrap() {
            match instantiate(&theory, &m) {
                Ok(p) => prop_assert_eq!(represent(theory.representation(), &p).unwrap(), m),
                Err(Error::NotInstantiable { .. }) => {
                    // no seed represents m; engineering is the identity
                    for s in &theory.instantiation().unwrap().seeds {
                        prop_assert_ne!(represent(theory.representation(), s).unwrap(), m.clone());
                    }
                }
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
    }

    #[test]
    fn classifier_agrees_with_oracle(seed in any::<u64>()) {
        let j = common::random_joint(&mut common::rng(seed), "j");
        prop_assert_eq!(classify(&j).unwrap().class, brute_force_classify(&j).unwrap().class);
    }

    #[test]
    fn deterministic_devices_ignore_the_seed(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let theory = common::random_theory(&mut common::rng(seed), "t", 6, 3);
        let h = &theory.predictions()[0].physical_dynamics;
        for p in theory.domain() {
            prop_assert_eq!(evolve_physical(h, p, TrialSeed(a)).unwrap(), evolve_physical(h, p, TrialSeed(b)).unwrap());
        }
    }

    #[test]
    fn values_round_trip_through_json(bits in prop::collection::vec(any::<bool>(), 1..8), n in -50i64..50) {
        let w = bits.len();
        let space = AbstractSpace::tuple(
            "v",
            vec![AbstractSpace::bitstring("b", w).unwrap(), AbstractSpace::bounded_int("n", -50, 49).unwrap()],
        )
        .unwrap();
        let v = Value::Tuple(vec![Value::Bits(Bits::new(bits)), Value::Int(n)]);
        prop_assert_eq!(value_from_json(&space, &value_to_json(&v)).unwrap(), v);
    }

    #[test]
    fn bits_round_trip_through_integers(n in any::<u16>()) {
        let b = Bits::from_u64(n as u64, 16);
        prop_assert_eq!(b.to_u64(), n as u64);
        prop_assert_eq!(Value::bits(&b.to_string()), Value::Bits(b));
    }
}
