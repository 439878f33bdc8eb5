//! Joint systems of two computing components and their classification as
//! hybrid or heterotic.
//!
//! Composition of triples is taken to be the product physical space with a
//! tuple-wise representation and componentwise dynamics. A joint system is
//! hybrid when its declared joint representation and joint dynamics factor
//! that way (and the representation factors are the components' own);
//! otherwise it is heterotic.

use std::fmt;

use crate::dynamics::{evolve_abstract, AbstractDynamics, AbstractRule};
use crate::error::{Error, Result};
use crate::relations::{represent, RepresentationRelation, Theory};
use crate::spaces::{AbstractSpace, AbstractState, PhysicalSpace, PhysicalState};
use crate::table::Table;
use crate::value::Value;

/// Largest component abstract space the brute-force oracle accepts.
pub const ORACLE_SIZE_BOUND: u128 = 6;

/// One side of a joint system: a device theory and the program it runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub theory: Theory,
    pub program: AbstractDynamics,
}

impl Component {
    pub fn new(theory: Theory, program: AbstractDynamics) -> Result<Self> {
        if program.space() != theory.representation().codomain() {
            return Err(Error::SpaceMismatch {
                expected: theory.representation().codomain().id().to_owned(),
                found: program.space().id().to_owned(),
            });
        }
        Ok(Component { theory, program })
    }

    pub fn physical_space(&self) -> &PhysicalSpace {
        self.theory.representation().domain()
    }

    pub fn abstract_space(&self) -> &AbstractSpace {
        self.theory.representation().codomain()
    }

    /// Device evolution paired with the program in the theory, if declared.
    pub fn device(&self) -> Option<&crate::dynamics::PhysicalDynamics> {
        self.theory.prediction(self.program.id()).map(|p| &p.physical_dynamics)
    }

    /// Physical states to quantify over: the whole space when finite,
    /// otherwise the theory's declared domain.
    pub fn sample_states(&self) -> Result<Vec<PhysicalState>> {
        let space = self.physical_space();
        if space.is_finite() {
            space.enumerate()
        } else if !self.theory.domain().is_empty() {
            Ok(self.theory.domain().to_vec())
        } else {
            Err(Error::NotEnumerable {
                space: space.id().to_owned(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ComposedParallel,
    ComposedSequential,
    Declared,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ComposedParallel => "composed-parallel",
            Provenance::ComposedSequential => "composed-sequential",
            Provenance::Declared => "declared",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSystem {
    id: String,
    left: Component,
    right: Component,
    joint_representation: RepresentationRelation,
    joint_dynamics: AbstractDynamics,
    provenance: Provenance,
}

impl JointSystem {
    /// A joint system with an explicitly declared `R_μ` and `D_μ`.
    pub fn declared(
        id: impl Into<String>,
        left: Component,
        right: Component,
        joint_representation: RepresentationRelation,
        joint_dynamics: AbstractDynamics,
    ) -> Result<Self> {
        Self::build(id.into(), left, right, joint_representation, joint_dynamics, Provenance::Declared)
    }

    fn build(
        id: String,
        left: Component,
        right: Component,
        joint_representation: RepresentationRelation,
        joint_dynamics: AbstractDynamics,
        provenance: Provenance,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidDeclaration { id: id.clone(), reason };
        match joint_representation.domain().components() {
            Some([l, r]) if l == left.physical_space() && r == right.physical_space() => {}
            Some([_, _]) => {
                return Err(invalid(format!(
                    "joint space `{}` is not the product of `{}` and `{}`",
                    joint_representation.domain().id(),
                    left.physical_space().id(),
                    right.physical_space().id()
                )))
            }
            _ => {
                return Err(Error::NotProductSpace {
                    space: joint_representation.domain().id().to_owned(),
                })
            }
        }
        if joint_dynamics.space() != joint_representation.codomain() {
            return Err(invalid(format!(
                "joint dynamics `{}` does not act on the joint codomain `{}`",
                joint_dynamics.id(),
                joint_representation.codomain().id()
            )));
        }
        Ok(JointSystem {
            id,
            left,
            right,
            joint_representation,
            joint_dynamics,
            provenance,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn left(&self) -> &Component {
        &self.left
    }

    pub fn right(&self) -> &Component {
        &self.right
    }

    pub fn joint_space(&self) -> &PhysicalSpace {
        self.joint_representation.domain()
    }

    pub fn joint_representation(&self) -> &RepresentationRelation {
        &self.joint_representation
    }

    pub fn joint_dynamics(&self) -> &AbstractDynamics {
        &self.joint_dynamics
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Joint physical states over the components' sample sets, row-major.
    pub fn sample_states(&self) -> Result<Vec<PhysicalState>> {
        let ls = self.left.sample_states()?;
        let rs = self.right.sample_states()?;
        let space = self.joint_space().id();
        Ok(ls
            .iter()
            .flat_map(|p| {
                rs.iter()
                    .map(move |q| PhysicalState::new(space, Value::Tuple(vec![p.value().clone(), q.value().clone()])))
            })
            .collect())
    }
}

fn compose(id: String, left: Component, right: Component, provenance: Provenance) -> Result<JointSystem> {
    for c in [&left, &right] {
        if !c.theory.validity().is_valid() {
            return Err(Error::TheoryNotValidated {
                theory: c.theory.id().to_owned(),
            });
        }
    }
    let lr = left.theory.representation();
    let rr = right.theory.representation();
    let representation = RepresentationRelation::tuple_wise(
        format!("{}*{}", lr.id(), rr.id()),
        format!("{}*{}", lr.domain().id(), rr.domain().id()),
        format!("{}*{}", lr.codomain().id(), rr.codomain().id()),
        vec![lr.clone(), rr.clone()],
    )?;
    let dynamics = AbstractDynamics::new(
        format!("{}*{}", left.program.id(), right.program.id()),
        representation.codomain().clone(),
        AbstractRule::Product(vec![left.program.clone(), right.program.clone()]),
    )?;
    JointSystem::build(id, left, right, representation, dynamics, provenance)
}

/// Both components run side by side on the composed input.
pub fn compose_parallel(id: impl Into<String>, left: Component, right: Component) -> Result<JointSystem> {
    compose(id.into(), left, right, Provenance::ComposedParallel)
}

/// Components run independently and their results are combined afterwards;
/// as a map on the product this is still componentwise.
pub fn compose_sequential(id: impl Into<String>, left: Component, right: Component) -> Result<JointSystem> {
    compose(id.into(), left, right, Provenance::ComposedSequential)
}

/// Component maps `(p ↦ a, q ↦ b)` with `R_μ(p, q) = (a, b)`, if they exist.
pub fn factorize_representation(j: &JointSystem) -> Result<Option<(Table, Table)>> {
    let left = j.left.sample_states()?;
    let right = j.right.sample_states()?;
    if j.joint_representation.codomain().components().map(<[_]>::len) != Some(2) {
        return Ok(None);
    }
    let mut left_map: Vec<Option<Value>> = vec![None; left.len()];
    let mut right_map: Vec<Option<Value>> = vec![None; right.len()];
    for (i, p) in left.iter().enumerate() {
        for (k, q) in right.iter().enumerate() {
            let joint = PhysicalState::new(
                j.joint_space().id(),
                Value::Tuple(vec![p.value().clone(), q.value().clone()]),
            );
            let image = represent(&j.joint_representation, &joint)?.into_value();
            let [a, b] = <[Value; 2]>::try_from(match image {
                Value::Tuple(items) => items,
                _ => unreachable!("two-component codomain"),
            })
            .expect("two components");
            for (slot, v) in [(&mut left_map[i], a), (&mut right_map[k], b)] {
                match slot {
                    Some(prev) if *prev != v => return Ok(None),
                    Some(_) => {}
                    None => *slot = Some(v),
                }
            }
        }
    }
    let table = |states: &[PhysicalState], images: Vec<Option<Value>>| {
        Table::new(
            states
                .iter()
                .zip(images)
                .map(|(s, v)| (s.value().clone(), v.expect("filled")))
                .collect(),
        )
    };
    Ok(Some((table(&left, left_map), table(&right, right_map))))
}

/// `(f, g)` with `D(a, b) = (f(a), g(b))`, if they exist.
pub fn factorize_dynamics(d: &AbstractDynamics) -> Result<Option<(Table, Table)>> {
    let [sa, sb] = d.space().components().unwrap_or(&[]) else {
        return Err(Error::NotProductSpace {
            space: d.space().id().to_owned(),
        });
    };
    let left = sa.enumerate()?;
    let right = sb.enumerate()?;
    let mut f: Vec<Option<Value>> = vec![None; left.len()];
    let mut g: Vec<Option<Value>> = vec![None; right.len()];
    for (i, a) in left.iter().enumerate() {
        for (k, b) in right.iter().enumerate() {
            let input = AbstractState::new(d.space().id(), Value::Tuple(vec![a.value().clone(), b.value().clone()]));
            let out = evolve_abstract(d, &input)?.into_value();
            let items = out.as_tuple().expect("product space");
            for (slot, v) in [(&mut f[i], &items[0]), (&mut g[k], &items[1])] {
                match slot {
                    Some(prev) if prev != v => return Ok(None),
                    Some(_) => {}
                    None => *slot = Some(v.clone()),
                }
            }
        }
    }
    let table = |states: &[AbstractState], images: Vec<Option<Value>>| {
        Table::new(
            states
                .iter()
                .zip(images)
                .map(|(s, v)| (s.value().clone(), v.expect("filled")))
                .collect(),
        )
    };
    Ok(Some((table(&left, f), table(&right, g))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Hybrid,
    Heterotic,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Hybrid => "hybrid",
            Class::Heterotic => "heterotic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactorizationWitness {
    pub representation: Option<(Table, Table)>,
    pub dynamics: Option<(Table, Table)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionClass {
    pub class: Class,
    pub witness: FactorizationWitness,
}

fn reproduces(component: &Component, map: &Table, codomain: &AbstractSpace) -> Result<bool> {
    if codomain != component.abstract_space() {
        return Ok(false);
    }
    for p in component.sample_states()? {
        let own = represent(component.theory.representation(), &p)?;
        if map.get(p.value()) != Some(own.value()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Hybrid iff `R_μ` and `D_μ` both factor and the representation factors
/// coincide with the components' own representations.
pub fn classify(j: &JointSystem) -> Result<CompositionClass> {
    let mut representation = factorize_representation(j)?;
    let dynamics = match factorize_dynamics(&j.joint_dynamics) {
        Err(Error::NotProductSpace { .. }) => None,
        other => other?,
    };
    if let (Some((lmap, rmap)), Some(codomains)) = (&representation, j.joint_representation.codomain().components()) {
        if !(reproduces(&j.left, lmap, &codomains[0])? && reproduces(&j.right, rmap, &codomains[1])?) {
            representation = None;
        }
    }
    let class = if representation.is_some() && dynamics.is_some() {
        Class::Hybrid
    } else {
        Class::Heterotic
    };
    Ok(CompositionClass {
        class,
        witness: FactorizationWitness {
            representation,
            dynamics,
        },
    })
}

/// All functions `S → S` on an `n`-element set, as image-index vectors in
/// lexicographic order.
fn all_functions(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(n as u32);
    (0..total).map(move |mut code| {
        let mut f = vec![0; n];
        for slot in f.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        f
    })
}

/// Exhaustive oracle for [`classify`]: searches every function pair `(f, g)`
/// on the component codomains and compares `R_μ` pointwise with the tuple
/// of the component representations.
pub fn brute_force_classify(j: &JointSystem) -> Result<CompositionClass> {
    let a_space = j.left.abstract_space();
    let b_space = j.right.abstract_space();
    for s in [a_space, b_space] {
        let size = s.cardinality().ok_or_else(|| Error::NotEnumerable { space: s.id().to_owned() })?;
        if size > ORACLE_SIZE_BOUND {
            return Err(Error::TooLarge {
                space: s.id().to_owned(),
                size,
                bound: ORACLE_SIZE_BOUND,
            });
        }
    }
    let heterotic = || CompositionClass {
        class: Class::Heterotic,
        witness: FactorizationWitness::default(),
    };
    let product_shape = |space: &AbstractSpace| matches!(space.components(), Some([x, y]) if x == a_space && y == b_space);
    if !product_shape(j.joint_representation.codomain()) || !product_shape(j.joint_dynamics.space()) {
        return Ok(heterotic());
    }

    let left = j.left.sample_states()?;
    let right = j.right.sample_states()?;
    for p in &left {
        let rp = represent(j.left.theory.representation(), p)?;
        for q in &right {
            let rq = represent(j.right.theory.representation(), q)?;
            let joint = PhysicalState::new(
                j.joint_space().id(),
                Value::Tuple(vec![p.value().clone(), q.value().clone()]),
            );
            let expected = Value::Tuple(vec![rp.value().clone(), rq.value().clone()]);
            if represent(&j.joint_representation, &joint)?.value() != &expected {
                return Ok(heterotic());
            }
        }
    }

    let a = a_space.enumerate_values()?;
    let b = b_space.enumerate_values()?;
    // outputs[ia][ib] = (index of first output, index of second output)
    let mut outputs = vec![vec![(0usize, 0usize); b.len()]; a.len()];
    for (ia, x) in a.iter().enumerate() {
        for (ib, y) in b.iter().enumerate() {
            let input = AbstractState::new(j.joint_dynamics.space().id(), Value::Tuple(vec![x.clone(), y.clone()]));
            let out = evolve_abstract(&j.joint_dynamics, &input)?.into_value();
            let items = out.as_tuple().expect("product");
            let pos = |vals: &[Value], v: &Value| vals.iter().position(|w| w == v).expect("in space");
            outputs[ia][ib] = (pos(&a, &items[0]), pos(&b, &items[1]));
        }
    }
    for f in all_functions(a.len()) {
        // every g is rejected together with an f that misses the first coordinate
        if !(0..a.len()).all(|ia| (0..b.len()).all(|ib| outputs[ia][ib].0 == f[ia])) {
            continue;
        }
        for g in all_functions(b.len()) {
            let pair_ok = (0..a.len()).all(|ia| (0..b.len()).all(|ib| outputs[ia][ib] == (f[ia], g[ib])));
            if pair_ok {
                let table = |vals: &[Value], h: &[usize]| {
                    Table::new(vals.iter().zip(h).map(|(v, &i)| (v.clone(), vals[i].clone())).collect())
                };
                let rep_table = |component: &Component, states: &[PhysicalState]| -> Result<Table> {
                    Ok(Table::new(
                        states
                            .iter()
                            .map(|s| Ok((s.value().clone(), represent(component.theory.representation(), s)?.into_value())))
                            .collect::<Result<_>>()?,
                    ))
                };
                return Ok(CompositionClass {
                    class: Class::Hybrid,
                    witness: FactorizationWitness {
                        representation: Some((rep_table(&j.left, &left)?, rep_table(&j.right, &right)?)),
                        dynamics: Some((table(&a, &f), table(&b, &g))),
                    },
                });
            }
        }
    }
    Ok(heterotic())
}
