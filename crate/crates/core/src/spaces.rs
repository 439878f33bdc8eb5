//! Abstract and physical state spaces.
//!
//! Both domains share one representation; the [`Domain`] marker keeps
//! abstract and physical states from being mixed up and restricts which
//! space kinds each domain may declare.

use std::collections::HashSet;
use std::fmt;
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::value::{Bits, Literal, Value};

pub trait Domain: fmt::Debug + Clone + Copy + PartialEq + Send + Sync + 'static {
    const NAME: &'static str;

    fn admits_kind(kind: &SpaceKind<Self>) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Abstract;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Physical;

impl Domain for Abstract {
    const NAME: &'static str = "abstract";

    fn admits_kind(kind: &SpaceKind<Self>) -> bool {
        !matches!(kind, SpaceKind::Reals { .. })
    }
}

impl Domain for Physical {
    const NAME: &'static str = "physical";

    fn admits_kind(kind: &SpaceKind<Self>) -> bool {
        matches!(
            kind,
            SpaceKind::Labels(_) | SpaceKind::Reals { .. } | SpaceKind::Tuple(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind<D: Domain> {
    Labels(Vec<String>),
    Bits { width: usize },
    IntRange { lo: i64, hi: i64 },
    Reals { bounds: Vec<(f64, f64)> },
    Tuple(Vec<Space<D>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Space<D: Domain> {
    id: String,
    kind: SpaceKind<D>,
    _domain: PhantomData<D>,
}

pub type AbstractSpace = Space<Abstract>;
pub type PhysicalSpace = Space<Physical>;

impl<D: Domain> Space<D> {
    pub fn new(id: impl Into<String>, kind: SpaceKind<D>) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidSpace {
            space: id.clone(),
            reason,
        };
        if !D::admits_kind(&kind) {
            return Err(invalid(format!(
                "{} spaces cannot be {}",
                D::NAME,
                kind_name(&kind)
            )));
        }
        match &kind {
            SpaceKind::Labels(labels) => {
                if labels.is_empty() {
                    return Err(invalid("label set is empty".into()));
                }
                let mut seen = HashSet::new();
                if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
                    return Err(invalid(format!("duplicate label `{dup}`")));
                }
            }
            SpaceKind::Bits { width } if *width == 0 => {
                return Err(invalid("bitstring width must be at least 1".into()));
            }
            SpaceKind::IntRange { lo, hi } if lo > hi => {
                return Err(invalid(format!("empty integer range {lo}..={hi}")));
            }
            SpaceKind::Reals { bounds } => {
                if bounds.is_empty() {
                    return Err(invalid("real vectors need dimension at least 1".into()));
                }
                for (i, (lo, hi)) in bounds.iter().enumerate() {
                    if !lo.is_finite() || !hi.is_finite() || lo > hi {
                        return Err(invalid(format!("coordinate {i} has bounds [{lo}, {hi}]")));
                    }
                }
            }
            SpaceKind::Tuple(components) if components.is_empty() => {
                return Err(invalid("tuple spaces need at least one component".into()));
            }
            _ => {}
        }
        Ok(Space {
            id,
            kind,
            _domain: PhantomData,
        })
    }

    pub fn labels<S: Into<String>>(
        id: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::new(
            id,
            SpaceKind::Labels(labels.into_iter().map(Into::into).collect()),
        )
    }

    pub fn tuple(id: impl Into<String>, components: Vec<Space<D>>) -> Result<Self> {
        Self::new(id, SpaceKind::Tuple(components))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &SpaceKind<D> {
        &self.kind
    }

    pub fn components(&self) -> Option<&[Space<D>]> {
        match &self.kind {
            SpaceKind::Tuple(c) => Some(c),
            _ => None,
        }
    }

    /// Membership of a raw value, ignoring space identity.
    pub fn admits(&self, value: &Value) -> bool {
        match (&self.kind, value) {
            (SpaceKind::Labels(labels), Value::Label(l)) => labels.contains(l),
            (SpaceKind::Bits { width }, Value::Bits(b)) => b.width() == *width,
            (SpaceKind::IntRange { lo, hi }, Value::Int(n)) => lo <= n && n <= hi,
            (SpaceKind::Reals { bounds }, Value::Reals(xs)) => {
                xs.len() == bounds.len()
                    && xs
                        .iter()
                        .zip(bounds)
                        .all(|(x, (lo, hi))| lo <= x && x <= hi)
            }
            (SpaceKind::Tuple(components), Value::Tuple(items)) => {
                components.len() == items.len()
                    && components.iter().zip(items).all(|(s, v)| s.admits(v))
            }
            _ => false,
        }
    }

    /// Wraps a value as a state of this space, checking membership.
    pub fn state(&self, value: Value) -> Result<State<D>> {
        if self.admits(&value) {
            Ok(State::new(self.id.clone(), value))
        } else {
            Err(Error::out_of_domain(&self.id, &value))
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.kind {
            SpaceKind::Reals { .. } => false,
            SpaceKind::Tuple(c) => c.iter().all(Space::is_finite),
            _ => true,
        }
    }

    /// Number of states, or `None` for continuous spaces. Saturates at `u128::MAX`.
    pub fn cardinality(&self) -> Option<u128> {
        match &self.kind {
            SpaceKind::Labels(l) => Some(l.len() as u128),
            SpaceKind::Bits { width } => Some(1u128.checked_shl(*width as u32).unwrap_or(u128::MAX)),
            SpaceKind::IntRange { lo, hi } => Some((*hi as i128 - *lo as i128 + 1) as u128),
            SpaceKind::Reals { .. } => None,
            SpaceKind::Tuple(c) => c.iter().try_fold(1u128, |acc, s| {
                s.cardinality().map(|n| acc.saturating_mul(n))
            }),
        }
    }

    /// Every value in canonical order: labels as declared, bitstrings
    /// lexicographically, integers ascending, tuples row-major.
    pub fn enumerate_values(&self) -> Result<Vec<Value>> {
        match &self.kind {
            SpaceKind::Labels(l) => Ok(l.iter().cloned().map(Value::Label).collect()),
            SpaceKind::Bits { width } => {
                if *width >= 32 {
                    return Err(Error::NotEnumerable {
                        space: self.id.clone(),
                    });
                }
                Ok((0..1u64 << width)
                    .map(|n| Value::Bits(Bits::from_u64(n, *width)))
                    .collect())
            }
            SpaceKind::IntRange { lo, hi } => Ok((*lo..=*hi).map(Value::Int).collect()),
            SpaceKind::Reals { .. } => Err(Error::NotEnumerable {
                space: self.id.clone(),
            }),
            SpaceKind::Tuple(components) => {
                let mut acc: Vec<Vec<Value>> = vec![Vec::new()];
                for component in components {
                    let values = component.enumerate_values().map_err(|_| Error::NotEnumerable {
                        space: self.id.clone(),
                    })?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            values.iter().map(move |v| {
                                let mut next = prefix.clone();
                                next.push(v.clone());
                                next
                            })
                        })
                        .collect();
                }
                Ok(acc.into_iter().map(Value::Tuple).collect())
            }
        }
    }

    pub fn enumerate(&self) -> Result<Vec<State<D>>> {
        Ok(self
            .enumerate_values()?
            .into_iter()
            .map(|v| State::new(self.id.clone(), v))
            .collect())
    }

    /// Reads an untyped literal against this space.
    pub fn read_literal(&self, lit: &Literal) -> Result<Value, String> {
        let value = match (&self.kind, lit) {
            (SpaceKind::Labels(_), Literal::Bare(s) | Literal::Quoted(s)) => {
                Value::Label(s.clone())
            }
            (SpaceKind::Bits { .. }, Literal::Quoted(s) | Literal::Bare(s)) => {
                Value::Bits(s.parse()?)
            }
            (SpaceKind::IntRange { .. }, Literal::Bare(s)) => {
                Value::Int(s.parse().map_err(|e| format!("`{s}`: {e}"))?)
            }
            (SpaceKind::Reals { .. }, Literal::Group(items)) => Value::Reals(
                items
                    .iter()
                    .map(|item| match item {
                        Literal::Bare(s) => s.parse::<f64>().map_err(|e| format!("`{s}`: {e}")),
                        other => Err(format!("expected a number, found {other:?}")),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            (SpaceKind::Tuple(components), Literal::Group(items)) => {
                if components.len() != items.len() {
                    return Err(format!(
                        "`{}` has {} components, literal has {}",
                        self.id,
                        components.len(),
                        items.len()
                    ));
                }
                Value::Tuple(
                    components
                        .iter()
                        .zip(items)
                        .map(|(s, l)| s.read_literal(l))
                        .collect::<Result<_, _>>()?,
                )
            }
            (_, other) => {
                return Err(format!(
                    "literal {other:?} does not fit {} space `{}`",
                    kind_name(&self.kind),
                    self.id
                ))
            }
        };
        if self.admits(&value) {
            Ok(value)
        } else {
            Err(format!("{value} is not a member of `{}`", self.id))
        }
    }

    pub fn parse_state(&self, text: &str) -> Result<State<D>, String> {
        let lit: Literal = text.parse()?;
        Ok(State::new(self.id.clone(), self.read_literal(&lit)?))
    }
}

pub(crate) fn kind_name<D: Domain>(kind: &SpaceKind<D>) -> &'static str {
    match kind {
        SpaceKind::Labels(_) => "finite-labeled",
        SpaceKind::Bits { .. } => "bitstring",
        SpaceKind::IntRange { .. } => "bounded-integer",
        SpaceKind::Reals { .. } => "real-vector",
        SpaceKind::Tuple(_) => "tuple",
    }
}

impl AbstractSpace {
    pub fn bitstring(id: impl Into<String>, width: usize) -> Result<Self> {
        Self::new(id, SpaceKind::Bits { width })
    }

    pub fn bounded_int(id: impl Into<String>, lo: i64, hi: i64) -> Result<Self> {
        Self::new(id, SpaceKind::IntRange { lo, hi })
    }
}

impl PhysicalSpace {
    pub fn real_vector(id: impl Into<String>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(id, SpaceKind::Reals { bounds })
    }
}

/// A value tagged with the id of the space it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct State<D: Domain> {
    space: String,
    value: Value,
    _domain: PhantomData<D>,
}

pub type AbstractState = State<Abstract>;
pub type PhysicalState = State<Physical>;

impl<D: Domain> State<D> {
    /// Unchecked; use [`Space::state`] to validate membership.
    pub fn new(space: impl Into<String>, value: Value) -> Self {
        State {
            space: space.into(),
            value,
            _domain: PhantomData,
        }
    }

    pub fn space_id(&self) -> &str {
        &self.space
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn into_value(self) -> Value {
        self.value
    }
}

impl<D: Domain> fmt::Display for State<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

/// True iff `state` names `space` and its value is a member.
pub fn contains<D: Domain>(space: &Space<D>, state: &State<D>) -> bool {
    state.space == space.id && space.admits(&state.value)
}

pub fn enumerate<D: Domain>(space: &Space<D>) -> Result<Vec<State<D>>> {
    space.enumerate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits2() -> AbstractSpace {
        AbstractSpace::bitstring("b2", 2).unwrap()
    }

    #[test]
    fn membership_examples() {
        let s = bits2();
        assert!(contains(&s, &State::new("b2", Value::bits("01"))));
        assert!(!contains(&s, &State::new("b2", Value::bits("011"))));
        assert!(!contains(&s, &State::new("other", Value::bits("01"))));
        let ud = AbstractSpace::labels("sw", ["up", "down"]).unwrap();
        assert!(contains(&ud, &State::new("sw", Value::label("up"))));
    }

    #[test]
    fn enumeration_examples() {
        let vals: Vec<String> = bits2()
            .enumerate()
            .unwrap()
            .iter()
            .map(|s| s.value().to_string())
            .collect();
        assert_eq!(vals, ["\"00\"", "\"01\"", "\"10\"", "\"11\""]);
        let ab = AbstractSpace::labels("ab", ["a", "b"]).unwrap();
        assert_eq!(
            ab.enumerate_values().unwrap(),
            vec![Value::label("a"), Value::label("b")]
        );
        let v = PhysicalSpace::real_vector("v", vec![(0.0, 5.0); 3]).unwrap();
        assert!(matches!(v.enumerate(), Err(Error::NotEnumerable { .. })));
    }

    #[test]
    fn tuple_enumeration_is_row_major() {
        let t = AbstractSpace::tuple(
            "t",
            vec![
                AbstractSpace::bounded_int("n", 0, 1).unwrap(),
                AbstractSpace::labels("l", ["x", "y"]).unwrap(),
            ],
        )
        .unwrap();
        let vals: Vec<String> = t
            .enumerate_values()
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(vals, ["(0,x)", "(0,y)", "(1,x)", "(1,y)"]);
        assert_eq!(t.cardinality(), Some(4));
    }

    #[test]
    fn rejects_malformed_spaces() {
        assert!(AbstractSpace::labels("e", Vec::<String>::new()).is_err());
        assert!(AbstractSpace::labels("d", ["a", "a"]).is_err());
        assert!(AbstractSpace::bitstring("z", 0).is_err());
        assert!(AbstractSpace::bounded_int("r", 3, 2).is_err());
        assert!(AbstractSpace::tuple("t", vec![]).is_err());
        assert!(PhysicalSpace::real_vector("v", vec![(1.0, 0.0)]).is_err());
        assert!(PhysicalSpace::real_vector("v", vec![(0.0, f64::INFINITY)]).is_err());
        // domain restrictions
        assert!(AbstractSpace::new("v", SpaceKind::Reals { bounds: vec![(0.0, 1.0)] }).is_err());
        assert!(PhysicalSpace::new("b", SpaceKind::Bits { width: 2 }).is_err());
    }

    #[test]
    fn reads_literals_against_spaces() {
        let t = AbstractSpace::tuple("t", vec![bits2(), bits2()]).unwrap();
        let s = t.parse_state(r#"("01","10")"#).unwrap();
        assert_eq!(
            s.value(),
            &Value::Tuple(vec![Value::bits("01"), Value::bits("10")])
        );
        assert!(t.parse_state(r#"("01","100")"#).is_err());
        let v = PhysicalSpace::real_vector("v", vec![(0.0, 5.0); 2]).unwrap();
        assert_eq!(
            v.parse_state("(5.0,0)").unwrap().value(),
            &Value::Reals(vec![5.0, 0.0])
        );
        assert!(v.parse_state("(6,0)").is_err());
    }
}
