//! Abstract programs `C : M → M` and device updates `H : P → P`.
//!
//! Physical updates are one discrete step. Noise, when declared, is applied
//! after the deterministic rule and draws from a stream keyed by the
//! [`TrialSeed`], so a trial can be replayed on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::builtin::Builtin;
use crate::error::{Error, Result};
use crate::spaces::{
    contains, AbstractSpace, AbstractState, Domain, PhysicalSpace, PhysicalState, Space, SpaceKind,
};
use crate::table::Table;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct TrialSeed(pub u64);

impl TrialSeed {
    /// Seed for the `k`-th trial (or cell) below this one.
    pub fn derive(self, k: u64) -> TrialSeed {
        // splitmix64 finalizer
        let mut z = self
            .0
            .wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        TrialSeed(z ^ (z >> 31))
    }

    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AbstractRule {
    Table(Table),
    Builtin(Builtin),
    Chain(Vec<AbstractDynamics>),
    /// Acts on each component of a tuple space independently.
    Product(Vec<AbstractDynamics>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbstractDynamics {
    id: String,
    space: AbstractSpace,
    rule: AbstractRule,
}

fn check_components<D: Domain, T>(
    id: &str,
    space: &Space<D>,
    parts: &[T],
    part_space: impl Fn(&T) -> &Space<D>,
    product: bool,
) -> Result<()> {
    let invalid = |reason: String| Error::InvalidDynamics {
        dynamics: id.to_owned(),
        reason,
    };
    if parts.is_empty() {
        return Err(invalid("needs at least one component".into()));
    }
    if product {
        let comps = space
            .components()
            .ok_or_else(|| invalid(format!("`{}` is not a tuple space", space.id())))?;
        if comps.len() != parts.len() {
            return Err(invalid(format!(
                "{} components for a {}-tuple",
                parts.len(),
                comps.len()
            )));
        }
        for (s, p) in comps.iter().zip(parts) {
            if part_space(p) != s {
                return Err(invalid(format!("component acts on `{}`, expected `{}`", part_space(p).id(), s.id())));
            }
        }
    } else if let Some(p) = parts.iter().find(|p| part_space(p) != space) {
        return Err(invalid(format!(
            "chain step acts on `{}`, expected `{}`",
            part_space(p).id(),
            space.id()
        )));
    }
    Ok(())
}

impl AbstractDynamics {
    pub fn new(id: impl Into<String>, space: AbstractSpace, rule: AbstractRule) -> Result<Self> {
        let id = id.into();
        match &rule {
            AbstractRule::Table(t) => t.check_total(&space, &space).map_err(|reason| Error::InvalidDynamics {
                dynamics: id.clone(),
                reason,
            })?,
            AbstractRule::Builtin(b) => b.rule().check_space(&space).map_err(|reason| Error::InvalidDynamics {
                dynamics: id.clone(),
                reason,
            })?,
            AbstractRule::Chain(steps) => check_components(&id, &space, steps, |d| &d.space, false)?,
            AbstractRule::Product(parts) => check_components(&id, &space, parts, |d| &d.space, true)?,
        }
        Ok(AbstractDynamics { id, space, rule })
    }

    pub fn builtin(id: impl Into<String>, space: AbstractSpace, name: &str, width: Option<usize>) -> Result<Self> {
        Self::new(id, space, AbstractRule::Builtin(Builtin::lookup(name, width)?))
    }

    pub fn table(id: impl Into<String>, space: AbstractSpace, f: impl FnMut(&Value) -> Value) -> Result<Self> {
        let table = Table::tabulate(&space, f)?;
        Self::new(id, space, AbstractRule::Table(table))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn space(&self) -> &AbstractSpace {
        &self.space
    }

    pub fn rule(&self) -> &AbstractRule {
        &self.rule
    }

    fn apply(&self, value: &Value) -> Value {
        match &self.rule {
            AbstractRule::Table(t) => t.get(value).expect("total table").clone(),
            AbstractRule::Builtin(b) => b.rule().apply(value),
            AbstractRule::Chain(steps) => steps.iter().fold(value.clone(), |v, s| s.apply(&v)),
            AbstractRule::Product(parts) => {
                let items = value.as_tuple().expect("tuple");
                Value::Tuple(parts.iter().zip(items).map(|(p, v)| p.apply(v)).collect())
            }
        }
    }
}

pub fn evolve_abstract(c: &AbstractDynamics, m: &AbstractState) -> Result<AbstractState> {
    if !contains(&c.space, m) {
        return Err(Error::out_of_domain(c.space.id(), m));
    }
    Ok(AbstractState::new(c.space.id(), c.apply(m.value())))
}

/// Chain whose action is `second ∘ first`.
pub fn compose_dynamics(first: &AbstractDynamics, second: &AbstractDynamics) -> Result<AbstractDynamics> {
    if first.space != second.space {
        return Err(Error::SpaceMismatch {
            expected: first.space.id().to_owned(),
            found: second.space.id().to_owned(),
        });
    }
    AbstractDynamics::new(
        format!("{};{}", first.id, second.id),
        first.space.clone(),
        AbstractRule::Chain(vec![first.clone(), second.clone()]),
    )
}

/// Threshold logic over the lines of a real-vector device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gate {
    Line(usize),
    Const(bool),
    Not(Box<Gate>),
    And(Vec<Gate>),
    Or(Vec<Gate>),
    Xor(Vec<Gate>),
}

impl Gate {
    pub fn not(g: Gate) -> Gate {
        Gate::Not(Box::new(g))
    }

    fn eval(&self, lines: &[bool]) -> bool {
        match self {
            Gate::Line(i) => lines[*i],
            Gate::Const(b) => *b,
            Gate::Not(g) => !g.eval(lines),
            Gate::And(gs) => gs.iter().all(|g| g.eval(lines)),
            Gate::Or(gs) => gs.iter().any(|g| g.eval(lines)),
            Gate::Xor(gs) => gs.iter().fold(false, |acc, g| acc ^ g.eval(lines)),
        }
    }

    fn max_line(&self) -> Option<usize> {
        match self {
            Gate::Line(i) => Some(*i),
            Gate::Const(_) => None,
            Gate::Not(g) => g.max_line(),
            Gate::And(gs) | Gate::Or(gs) | Gate::Xor(gs) => gs.iter().filter_map(Gate::max_line).max(),
        }
    }
}

/// Synchronous per-line update: every assigned line is driven to `high` or
/// `low` by a gate over the thresholded previous state; other lines hold.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateUpdate {
    pub threshold: f64,
    pub low: f64,
    pub high: f64,
    pub assignments: Vec<(usize, Gate)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Noise {
    /// Per-coordinate flip probability; a flipped line jumps to the opposite
    /// rail of its bounds relative to its threshold.
    Coordinates {
        flip_probability: Vec<f64>,
        thresholds: Vec<f64>,
    },
    /// Labels with a declared partner flip to it with the given probability.
    Labels {
        flip_probability: f64,
        partners: Vec<(String, String)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhysicalRule {
    Table(Table),
    CoordinateUpdate(CoordinateUpdate),
    Chain(Vec<PhysicalDynamics>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalDynamics {
    id: String,
    space: PhysicalSpace,
    rule: PhysicalRule,
    noise: Option<Noise>,
}

fn probability_ok(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

impl PhysicalDynamics {
    pub fn new(
        id: impl Into<String>,
        space: PhysicalSpace,
        rule: PhysicalRule,
        noise: Option<Noise>,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidDynamics {
            dynamics: id.clone(),
            reason,
        };
        match &rule {
            PhysicalRule::Table(t) => t.check_total(&space, &space).map_err(invalid)?,
            PhysicalRule::CoordinateUpdate(u) => {
                let SpaceKind::Reals { bounds } = space.kind() else {
                    return Err(invalid("coordinate updates need a real-vector space".into()));
                };
                let mut seen = vec![false; bounds.len()];
                for (line, gate) in &u.assignments {
                    let Some((lo, hi)) = bounds.get(*line) else {
                        return Err(invalid(format!("line {line} out of range")));
                    };
                    if std::mem::replace(&mut seen[*line], true) {
                        return Err(invalid(format!("line {line} assigned twice")));
                    }
                    if gate.max_line().is_some_and(|m| m >= bounds.len()) {
                        return Err(invalid(format!("gate for line {line} reads a missing line")));
                    }
                    for level in [u.low, u.high] {
                        if level < *lo || level > *hi {
                            return Err(invalid(format!("level {level} outside bounds of line {line}")));
                        }
                    }
                }
            }
            PhysicalRule::Chain(steps) => check_components(&id, &space, steps, |d| &d.space, false)?,
        }
        match (&noise, space.kind()) {
            (None, _) => {}
            (
                Some(Noise::Coordinates {
                    flip_probability,
                    thresholds,
                }),
                SpaceKind::Reals { bounds },
            ) => {
                if flip_probability.len() != bounds.len() || thresholds.len() != bounds.len() {
                    return Err(invalid("noise must give one probability and threshold per line".into()));
                }
                if !flip_probability.iter().copied().all(probability_ok) {
                    return Err(invalid("flip probabilities must lie in [0, 1]".into()));
                }
            }
            (
                Some(Noise::Labels {
                    flip_probability,
                    partners,
                }),
                SpaceKind::Labels(labels),
            ) => {
                if !probability_ok(*flip_probability) {
                    return Err(invalid("flip probability must lie in [0, 1]".into()));
                }
                if partners.is_empty() {
                    return Err(invalid("noisy labeled devices must declare noise partners".into()));
                }
                for (a, b) in partners {
                    if !labels.contains(a) || !labels.contains(b) {
                        return Err(invalid(format!("noise partner {a} -> {b} names an unknown label")));
                    }
                }
            }
            (Some(_), _) => return Err(invalid("noise kind does not fit the space".into())),
        }
        Ok(PhysicalDynamics { id, space, rule, noise })
    }

    pub fn table(id: impl Into<String>, space: PhysicalSpace, f: impl FnMut(&Value) -> Value) -> Result<Self> {
        let table = Table::tabulate(&space, f)?;
        Self::new(id, space, PhysicalRule::Table(table), None)
    }

    /// Identity device: an update with no assignments on real vectors, an
    /// identity table on finite spaces.
    pub fn identity(id: impl Into<String>, space: PhysicalSpace) -> Result<Self> {
        if let SpaceKind::Reals { .. } = space.kind() {
            let update = CoordinateUpdate {
                threshold: 0.0,
                low: 0.0,
                high: 0.0,
                assignments: Vec::new(),
            };
            Self::new(id, space, PhysicalRule::CoordinateUpdate(update), None)
        } else {
            Self::table(id, space, Value::clone)
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn space(&self) -> &PhysicalSpace {
        &self.space
    }

    pub fn rule(&self) -> &PhysicalRule {
        &self.rule
    }

    pub fn noise(&self) -> Option<&Noise> {
        self.noise.as_ref()
    }

    pub fn is_noisy(&self) -> bool {
        match &self.rule {
            PhysicalRule::Chain(steps) if steps.iter().any(PhysicalDynamics::is_noisy) => true,
            _ => self.noise.is_some(),
        }
    }

    fn apply(&self, value: &Value, rng: &mut ChaCha8Rng) -> Value {
        let mut out = match &self.rule {
            PhysicalRule::Table(t) => t.get(value).expect("total table").clone(),
            PhysicalRule::CoordinateUpdate(u) => {
                let Value::Reals(xs) = value else { unreachable!("checked real vector") };
                let lines: Vec<bool> = xs.iter().map(|x| *x >= u.threshold).collect();
                let mut next = xs.clone();
                for (line, gate) in &u.assignments {
                    next[*line] = if gate.eval(&lines) { u.high } else { u.low };
                }
                Value::Reals(next)
            }
            PhysicalRule::Chain(steps) => steps.iter().fold(value.clone(), |v, s| s.apply(&v, rng)),
        };
        if let Some(noise) = &self.noise {
            apply_noise(noise, &self.space, &mut out, rng);
        }
        out
    }
}

fn apply_noise(noise: &Noise, space: &PhysicalSpace, value: &mut Value, rng: &mut ChaCha8Rng) {
    match (noise, space.kind(), value) {
        (
            Noise::Coordinates {
                flip_probability,
                thresholds,
            },
            SpaceKind::Reals { bounds },
            Value::Reals(xs),
        ) => {
            for (i, x) in xs.iter_mut().enumerate() {
                // one draw per line keeps the stream aligned across inputs
                let u: f64 = rng.random();
                if u < flip_probability[i] {
                    let (lo, hi) = bounds[i];
                    *x = if *x >= thresholds[i] { lo } else { hi };
                }
            }
        }
        (
            Noise::Labels {
                flip_probability,
                partners,
            },
            _,
            Value::Label(l),
        ) => {
            let u: f64 = rng.random();
            if u < *flip_probability {
                if let Some((_, to)) = partners.iter().find(|(from, _)| from == l) {
                    *l = to.clone();
                }
            }
        }
        _ => unreachable!("noise checked against space at construction"),
    }
}

pub fn evolve_physical(h: &PhysicalDynamics, p: &PhysicalState, t: TrialSeed) -> Result<PhysicalState> {
    if !contains(&h.space, p) {
        return Err(Error::out_of_domain(h.space.id(), p));
    }
    let mut rng = t.rng();
    Ok(PhysicalState::new(h.space.id(), h.apply(p.value(), &mut rng)))
}
