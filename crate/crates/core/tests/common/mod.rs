#![allow(dead_code)]

use ar_core::composition::{Component, JointSystem};
use ar_core::dynamics::{AbstractDynamics, PhysicalDynamics};
use ar_core::relations::{InstantiationProcedure, Prediction, RepresentationRelation, Theory};
use ar_core::spaces::{AbstractSpace, PhysicalSpace};
use ar_core::table::Table;
use ar_core::value::Value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(id: &str, prefix: &str, n: usize) -> PhysicalSpace {
    PhysicalSpace::labels(id, (0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

fn pick<'a>(r: &mut ChaCha8Rng, xs: &'a [Value]) -> &'a Value {
    &xs[r.random_range(0..xs.len())]
}

/// A random finite device theory: labelled physical states, an integer
/// codomain and random tables for `R`, `C` and `H`. Every physical state is
/// a seed and a domain element.
pub fn random_theory(r: &mut ChaCha8Rng, tag: &str, max_physical: usize, max_abstract: usize) -> Theory {
    let n = r.random_range(1..=max_physical);
    let k = r.random_range(1..=max_abstract);
    let p = labels(&format!("{tag}-p"), "s", n);
    let m = AbstractSpace::bounded_int(format!("{tag}-m"), 0, k as i64 - 1).unwrap();
    let mvals = m.enumerate_values().unwrap();
    let pvals = p.enumerate_values().unwrap();
    let rel = RepresentationRelation::lookup(format!("{tag}-r"), p.clone(), m.clone(), |_| pick(r, &mvals).clone()).unwrap();
    let c = AbstractDynamics::table(format!("{tag}-c"), m, |_| pick(r, &mvals).clone()).unwrap();
    let h = PhysicalDynamics::table(format!("{tag}-h"), p.clone(), |_| pick(r, &pvals).clone()).unwrap();
    let states = p.enumerate().unwrap();
    Theory::new(
        format!("{tag}-theory"),
        rel,
        Some(InstantiationProcedure {
            seeds: states.clone(),
            engineering: PhysicalDynamics::identity(format!("{tag}-prep"), p).unwrap(),
        }),
        states,
        vec![Prediction {
            abstract_dynamics: c,
            physical_dynamics: h,
        }],
    )
    .unwrap()
}

/// A component whose program is the identity on its codomain.
pub fn component(theory: Theory) -> Component {
    let program = AbstractDynamics::builtin(
        format!("{}-hold", theory.id()),
        theory.representation().codomain().clone(),
        "identity",
        None,
    )
    .unwrap();
    Component::new(theory, program).unwrap()
}

/// A random joint system over two random components. Half the time the joint
/// representation is the product of the components' own, otherwise a random
/// table into the product codomain; likewise the dynamics is either a
/// product of random maps or an arbitrary random table.
pub fn random_joint(r: &mut ChaCha8Rng, tag: &str) -> JointSystem {
    let left = component(random_theory(r, &format!("{tag}-l"), 3, 4));
    let right = component(random_theory(r, &format!("{tag}-r"), 3, 4));
    let product = RepresentationRelation::tuple_wise(
        format!("{tag}-joint-r"),
        format!("{tag}-joint-p"),
        format!("{tag}-joint-m"),
        vec![
            left.theory.representation().clone(),
            right.theory.representation().clone(),
        ],
    )
    .unwrap();
    let codomain = product.codomain().clone();
    let mvals = codomain.enumerate_values().unwrap();
    let representation = if r.random_bool(0.5) {
        product
    } else {
        // perturb: random images for a random subset of joint states
        let rate = r.random_range(0.0..1.0);
        let base = product.clone();
        RepresentationRelation::lookup(format!("{tag}-joint-r"), base.domain().clone(), codomain.clone(), |v| {
            if r.random_bool(rate) {
                pick(r, &mvals).clone()
            } else {
                ar_core::relations::represent(&base, &ar_core::spaces::State::new(base.domain().id(), v.clone()))
                    .unwrap()
                    .into_value()
            }
        })
        .unwrap()
    };
    let [sa, sb] = codomain.components().unwrap() else { unreachable!() };
    let (avals, bvals) = (sa.enumerate_values().unwrap(), sb.enumerate_values().unwrap());
    let dynamics = if r.random_bool(0.5) {
        let f: Vec<Value> = avals.iter().map(|_| pick(r, &avals).clone()).collect();
        let g: Vec<Value> = bvals.iter().map(|_| pick(r, &bvals).clone()).collect();
        AbstractDynamics::table(format!("{tag}-joint-d"), codomain.clone(), |v| {
            let x = v.as_tuple().unwrap();
            let ia = avals.iter().position(|a| *a == x[0]).unwrap();
            let ib = bvals.iter().position(|b| *b == x[1]).unwrap();
            Value::Tuple(vec![f[ia].clone(), g[ib].clone()])
        })
        .unwrap()
    } else {
        AbstractDynamics::table(format!("{tag}-joint-d"), codomain.clone(), |_| pick(r, &mvals).clone()).unwrap()
    };
    JointSystem::declared(tag, left, right, representation, dynamics).unwrap()
}

/// Joint dynamics on a pair of 1-bit values given both output truth tables,
/// each indexed by `2a + b`.
pub fn bit_pair_table(space: &AbstractSpace, first: u8, second: u8) -> Table {
    Table::tabulate(space, |v| {
        let x = v.as_tuple().unwrap();
        let a = x[0].as_bits().unwrap().to_u64();
        let b = x[1].as_bits().unwrap().to_u64();
        let i = 2 * a + b;
        let bit = |t: u8| Value::bits(if t >> i & 1 == 1 { "1" } else { "0" });
        Value::Tuple(vec![bit(first), bit(second)])
    })
    .unwrap()
}
