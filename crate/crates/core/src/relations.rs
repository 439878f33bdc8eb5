//! Representation relations, representational triples, instantiation by
//! seeded search, and device theories.

use std::sync::Arc;

use crate::dynamics::{evolve_physical, AbstractDynamics, PhysicalDynamics, TrialSeed};
use crate::error::{Error, Result};
use crate::spaces::{contains, AbstractSpace, AbstractState, PhysicalSpace, PhysicalState, SpaceKind};
use crate::table::Table;
use crate::value::{Bits, Value};
use crate::verification::ValidityReport;

#[derive(Debug, Clone, PartialEq)]
pub enum RepresentationRule {
    LookupTable(Table),
    /// One bit per line (`x ≥ θ ↦ 1`), grouped left to right into
    /// registers of the given widths.
    Threshold {
        thresholds: Vec<f64>,
        groups: Vec<usize>,
    },
    TupleWise(Vec<RepresentationRelation>),
}

/// The directed map `R : P → M`, total on its physical domain.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationRelation {
    id: String,
    domain: PhysicalSpace,
    codomain: AbstractSpace,
    rule: RepresentationRule,
}

impl RepresentationRelation {
    pub fn new(
        id: impl Into<String>,
        domain: PhysicalSpace,
        codomain: AbstractSpace,
        rule: RepresentationRule,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidRelation {
            relation: id.clone(),
            reason,
        };
        match &rule {
            RepresentationRule::LookupTable(t) => t.check_total(&domain, &codomain).map_err(invalid)?,
            RepresentationRule::Threshold { thresholds, groups } => {
                let SpaceKind::Reals { bounds } = domain.kind() else {
                    return Err(invalid("threshold rules need a real-vector domain".into()));
                };
                if thresholds.len() != bounds.len() {
                    return Err(invalid(format!(
                        "{} thresholds for {} lines",
                        thresholds.len(),
                        bounds.len()
                    )));
                }
                if groups.iter().any(|&g| g == 0) || groups.iter().sum::<usize>() != bounds.len() {
                    return Err(invalid("register widths must be positive and cover every line".into()));
                }
                let widths_ok = match (codomain.kind(), groups.as_slice()) {
                    (SpaceKind::Bits { width }, [g]) => width == g,
                    (SpaceKind::Tuple(comps), gs) => {
                        comps.len() == gs.len()
                            && comps
                                .iter()
                                .zip(gs)
                                .all(|(c, g)| matches!(c.kind(), SpaceKind::Bits { width } if width == g))
                    }
                    _ => false,
                };
                if !widths_ok {
                    return Err(invalid(format!(
                        "codomain `{}` does not match register widths {groups:?}",
                        codomain.id()
                    )));
                }
            }
            RepresentationRule::TupleWise(parts) => {
                let (Some(dc), Some(cc)) = (domain.components(), codomain.components()) else {
                    return Err(invalid("tuple-wise rules need tuple domain and codomain".into()));
                };
                if dc.len() != parts.len() || cc.len() != parts.len() {
                    return Err(invalid("component count mismatch".into()));
                }
                for ((part, d), c) in parts.iter().zip(dc).zip(cc) {
                    if &part.domain != d || &part.codomain != c {
                        return Err(invalid(format!(
                            "component `{}` maps `{}` → `{}`, expected `{}` → `{}`",
                            part.id,
                            part.domain.id(),
                            part.codomain.id(),
                            d.id(),
                            c.id()
                        )));
                    }
                }
            }
        }
        Ok(RepresentationRelation {
            id,
            domain,
            codomain,
            rule,
        })
    }

    pub fn lookup(
        id: impl Into<String>,
        domain: PhysicalSpace,
        codomain: AbstractSpace,
        f: impl FnMut(&Value) -> Value,
    ) -> Result<Self> {
        let table = Table::tabulate(&domain, f)?;
        Self::new(id, domain, codomain, RepresentationRule::LookupTable(table))
    }

    /// Tuple-wise relation over the product of the components' spaces.
    pub fn tuple_wise(
        id: impl Into<String>,
        domain_id: impl Into<String>,
        codomain_id: impl Into<String>,
        parts: Vec<RepresentationRelation>,
    ) -> Result<Self> {
        let domain = PhysicalSpace::tuple(domain_id, parts.iter().map(|p| p.domain.clone()).collect())?;
        let codomain = AbstractSpace::tuple(codomain_id, parts.iter().map(|p| p.codomain.clone()).collect())?;
        Self::new(id, domain, codomain, RepresentationRule::TupleWise(parts))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> &PhysicalSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &AbstractSpace {
        &self.codomain
    }

    pub fn rule(&self) -> &RepresentationRule {
        &self.rule
    }

    pub(crate) fn apply(&self, value: &Value) -> Value {
        match &self.rule {
            RepresentationRule::LookupTable(t) => t.get(value).expect("total table").clone(),
            RepresentationRule::Threshold { thresholds, groups } => {
                let Value::Reals(xs) = value else { unreachable!("checked real vector") };
                let bits: Vec<bool> = xs.iter().zip(thresholds).map(|(x, t)| x >= t).collect();
                if let [_] = groups.as_slice() {
                    if !matches!(self.codomain.kind(), SpaceKind::Tuple(_)) {
                        return Value::Bits(Bits::new(bits));
                    }
                }
                let mut start = 0;
                Value::Tuple(
                    groups
                        .iter()
                        .map(|g| {
                            let reg = Bits::new(bits[start..start + g].to_vec());
                            start += g;
                            Value::Bits(reg)
                        })
                        .collect(),
                )
            }
            RepresentationRule::TupleWise(parts) => {
                let items = value.as_tuple().expect("tuple");
                Value::Tuple(parts.iter().zip(items).map(|(p, v)| p.apply(v)).collect())
            }
        }
    }
}

pub fn represent(relation: &RepresentationRelation, p: &PhysicalState) -> Result<AbstractState> {
    if !contains(&relation.domain, p) {
        return Err(Error::out_of_domain(relation.domain.id(), p));
    }
    Ok(AbstractState::new(relation.codomain.id(), relation.apply(p.value())))
}

/// `⟨p, R, m_p⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationalTriple {
    pub physical: PhysicalState,
    pub relation: Arc<RepresentationRelation>,
    pub abstract_state: AbstractState,
}

pub fn make_triple(relation: &RepresentationRelation, p: &PhysicalState) -> Result<RepresentationalTriple> {
    let abstract_state = represent(relation, p)?;
    Ok(RepresentationalTriple {
        physical: p.clone(),
        relation: Arc::new(relation.clone()),
        abstract_state,
    })
}

/// Prepares physical states from seeds; seeds are tried in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantiationProcedure {
    pub seeds: Vec<PhysicalState>,
    pub engineering: PhysicalDynamics,
}

/// An abstract program paired with the device evolution predicted to realise it.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub abstract_dynamics: AbstractDynamics,
    pub physical_dynamics: PhysicalDynamics,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Validity {
    #[default]
    Untested,
    Valid(Box<ValidityReport>),
    Invalid(Box<ValidityReport>),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Validity::Untested => "untested",
            Validity::Valid(_) => "valid",
            Validity::Invalid(_) => "invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    id: String,
    representation: RepresentationRelation,
    instantiation: Option<InstantiationProcedure>,
    domain: Vec<PhysicalState>,
    predictions: Vec<Prediction>,
    validity: Validity,
    experiments: usize,
}

impl Theory {
    /// Builds an untested theory. Validity can only change through
    /// [`crate::verification::validate_theory`].
    pub fn new(
        id: impl Into<String>,
        representation: RepresentationRelation,
        instantiation: Option<InstantiationProcedure>,
        domain: Vec<PhysicalState>,
        predictions: Vec<Prediction>,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidDeclaration {
            id: id.clone(),
            reason,
        };
        let pspace = &representation.domain;
        if let Some(inst) = &instantiation {
            if &inst.engineering.space() != &pspace {
                return Err(invalid(format!(
                    "engineering dynamics acts on `{}`, not `{}`",
                    inst.engineering.space().id(),
                    pspace.id()
                )));
            }
            if let Some(s) = inst.seeds.iter().find(|s| !contains(pspace, s)) {
                return Err(invalid(format!("seed {s} is outside `{}`", pspace.id())));
            }
        }
        if let Some(s) = domain.iter().find(|s| !contains(pspace, s)) {
            return Err(invalid(format!("domain state {s} is outside `{}`", pspace.id())));
        }
        for p in &predictions {
            if p.abstract_dynamics.space() != &representation.codomain {
                return Err(invalid(format!(
                    "program `{}` acts on `{}`, not on the codomain `{}`",
                    p.abstract_dynamics.id(),
                    p.abstract_dynamics.space().id(),
                    representation.codomain.id()
                )));
            }
            if p.physical_dynamics.space() != pspace {
                return Err(invalid(format!(
                    "device `{}` acts on `{}`, not `{}`",
                    p.physical_dynamics.id(),
                    p.physical_dynamics.space().id(),
                    pspace.id()
                )));
            }
        }
        Ok(Theory {
            id,
            representation,
            instantiation,
            domain,
            predictions,
            validity: Validity::Untested,
            experiments: 0,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn representation(&self) -> &RepresentationRelation {
        &self.representation
    }

    pub fn instantiation(&self) -> Option<&InstantiationProcedure> {
        self.instantiation.as_ref()
    }

    pub fn domain(&self) -> &[PhysicalState] {
        &self.domain
    }

    pub fn predictions(&self) -> &[Prediction] {
        &self.predictions
    }

    pub fn validity(&self) -> &Validity {
        &self.validity
    }

    /// Experiments recorded against this theory outside full validation runs.
    pub fn experiments(&self) -> usize {
        self.experiments
    }

    pub fn prediction(&self, program: &str) -> Option<&Prediction> {
        self.predictions.iter().find(|p| p.abstract_dynamics.id() == program)
    }

    pub(crate) fn with_validity(&self, validity: Validity) -> Theory {
        Theory {
            validity,
            ..self.clone()
        }
    }

    pub(crate) fn with_experiment(&self) -> Theory {
        Theory {
            experiments: self.experiments + 1,
            ..self.clone()
        }
    }
}

/// Finds the first seed whose prepared state represents `target`.
pub fn instantiate(theory: &Theory, target: &AbstractState) -> Result<PhysicalState> {
    let inst = theory.instantiation.as_ref().ok_or_else(|| Error::MissingInstantiation {
        theory: theory.id.clone(),
    })?;
    let codomain = &theory.representation.codomain;
    if !contains(codomain, target) {
        return Err(Error::out_of_domain(codomain.id(), target));
    }
    for seed in &inst.seeds {
        let prepared = evolve_physical(&inst.engineering, seed, TrialSeed::default())?;
        if &represent(&theory.representation, &prepared)? == target {
            return Ok(prepared);
        }
    }
    Err(Error::NotInstantiable {
        theory: theory.id.clone(),
        target: target.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::State;

    fn volts2() -> PhysicalSpace {
        PhysicalSpace::real_vector("v2", vec![(0.0, 5.0); 2]).unwrap()
    }

    fn threshold2() -> RepresentationRelation {
        RepresentationRelation::new(
            "thr",
            volts2(),
            AbstractSpace::bitstring("b2", 2).unwrap(),
            RepresentationRule::Threshold {
                thresholds: vec![2.5; 2],
                groups: vec![2],
            },
        )
        .unwrap()
    }

    #[test]
    fn threshold_encodes_high_voltage_as_one() {
        let r = threshold2();
        let p = State::new("v2", Value::Reals(vec![5.0, 0.0]));
        assert_eq!(represent(&r, &p).unwrap().value(), &Value::bits("10"));
        let t = make_triple(&r, &p).unwrap();
        assert_eq!(t.abstract_state.value(), &Value::bits("10"));
        let out = State::new("v2", Value::Reals(vec![7.0, 0.0]));
        assert!(matches!(make_triple(&r, &out), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn switch_lookup_table() {
        let sw = PhysicalSpace::labels("switch", ["switch-up", "switch-down"]).unwrap();
        let digit = AbstractSpace::bounded_int("digit", 0, 1).unwrap();
        let r = RepresentationRelation::lookup("R", sw, digit, |v| {
            Value::Int(i64::from(v == &Value::label("switch-up")))
        })
        .unwrap();
        let up = State::new("switch", Value::label("switch-up"));
        assert_eq!(represent(&r, &up).unwrap().value(), &Value::Int(1));

        let s0 = PhysicalSpace::labels("s", ["s0"]).unwrap();
        let idle = AbstractSpace::labels("m", ["idle"]).unwrap();
        let r = RepresentationRelation::lookup("R0", s0, idle, |_| Value::label("idle")).unwrap();
        let t = make_triple(&r, &State::new("s", Value::label("s0"))).unwrap();
        assert_eq!(t.abstract_state.value(), &Value::label("idle"));
    }

    #[test]
    fn partial_tables_are_rejected() {
        let sw = PhysicalSpace::labels("sw", ["a", "b"]).unwrap();
        let m = AbstractSpace::labels("m", ["x"]).unwrap();
        let t = Table::new(vec![(Value::label("a"), Value::label("x"))]);
        assert!(RepresentationRelation::new("R", sw, m, RepresentationRule::LookupTable(t)).is_err());
    }

    fn theory_with_seeds(seeds: Vec<PhysicalState>) -> Theory {
        let r = threshold2();
        let eng = PhysicalDynamics::identity("prep", volts2()).unwrap();
        Theory::new(
            "T",
            r,
            Some(InstantiationProcedure {
                seeds,
                engineering: eng,
            }),
            vec![],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn instantiation_search() {
        let seeds = [(0.0, 0.0), (0.0, 5.0), (5.0, 0.0), (5.0, 5.0)]
            .map(|(a, b)| State::new("v2", Value::Reals(vec![a, b])))
            .to_vec();
        let t = theory_with_seeds(seeds.clone());
        let target = State::new("b2", Value::bits("01"));
        let p = instantiate(&t, &target).unwrap();
        assert_eq!(p, seeds[1]);
        assert_eq!(make_triple(t.representation(), &p).unwrap().abstract_state, target);

        let empty = theory_with_seeds(vec![]);
        assert!(matches!(instantiate(&empty, &target), Err(Error::NotInstantiable { .. })));

        let none = Theory::new("U", threshold2(), None, vec![], vec![]).unwrap();
        assert!(matches!(instantiate(&none, &target), Err(Error::MissingInstantiation { .. })));
    }

    #[test]
    fn first_matching_seed_wins() {
        let seeds = [(4.0, 3.0), (5.0, 5.0)]
            .map(|(a, b)| State::new("v2", Value::Reals(vec![a, b])))
            .to_vec();
        let t = theory_with_seeds(seeds.clone());
        let p = instantiate(&t, &State::new("b2", Value::bits("11"))).unwrap();
        assert_eq!(p, seeds[0]);
    }
}
