//! Distance metrics for the ε-commutation condition.
//!
//! Each metric is a [`DistanceMetric`] strategy registered under a name;
//! scenario files and the CLI select one by that name through
//! [`Metric::by_name`].

use std::fmt;

use crate::error::{Error, Result};
use crate::spaces::{Domain, State};
use crate::value::Value;

pub trait DistanceMetric: Send + Sync {
    fn name(&self) -> &'static str;

    /// Distance between two raw values, or a reason the metric does not apply.
    fn value_distance(&self, a: &Value, b: &Value) -> Result<f64, String>;
}

struct Discrete;
struct Hamming;
struct AbsoluteDifference;
struct MaxCoordinate;

impl DistanceMetric for Discrete {
    fn name(&self) -> &'static str {
        "discrete"
    }

    fn value_distance(&self, a: &Value, b: &Value) -> Result<f64, String> {
        Ok(if a == b { 0.0 } else { 1.0 })
    }
}

impl DistanceMetric for Hamming {
    fn name(&self) -> &'static str {
        "hamming"
    }

    fn value_distance(&self, a: &Value, b: &Value) -> Result<f64, String> {
        match (a, b) {
            (Value::Bits(x), Value::Bits(y)) if x.width() == y.width() => Ok(x
                .as_slice()
                .iter()
                .zip(y.as_slice())
                .filter(|(p, q)| p != q)
                .count() as f64),
            _ => Err(format!("hamming needs equal-width bitstrings, got {a} and {b}")),
        }
    }
}

impl DistanceMetric for AbsoluteDifference {
    fn name(&self) -> &'static str {
        "absolute-difference"
    }

    fn value_distance(&self, a: &Value, b: &Value) -> Result<f64, String> {
        match (a, b) {
            (Value::Int(x), Value::Int(y)) => Ok((*x as f64 - *y as f64).abs()),
            _ => Err(format!("absolute-difference needs integers, got {a} and {b}")),
        }
    }
}

impl MaxCoordinate {
    fn coordinate(&self, a: &Value, b: &Value) -> Result<f64, String> {
        match (a, b) {
            (Value::Label(_), Value::Label(_)) => Discrete.value_distance(a, b),
            (Value::Bits(_), Value::Bits(_)) => Hamming.value_distance(a, b),
            (Value::Int(_), Value::Int(_)) => AbsoluteDifference.value_distance(a, b),
            _ => self.value_distance(a, b),
        }
    }
}

impl DistanceMetric for MaxCoordinate {
    fn name(&self) -> &'static str {
        "max-coordinate"
    }

    fn value_distance(&self, a: &Value, b: &Value) -> Result<f64, String> {
        match (a, b) {
            (Value::Reals(x), Value::Reals(y)) if x.len() == y.len() => Ok(x
                .iter()
                .zip(y)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max)),
            (Value::Tuple(x), Value::Tuple(y)) if x.len() == y.len() => x
                .iter()
                .zip(y)
                .map(|(p, q)| self.coordinate(p, q))
                .try_fold(0.0, |acc, d| d.map(|d| f64::max(acc, d))),
            _ => Err(format!(
                "max-coordinate needs tuples or vectors of equal shape, got {a} and {b}"
            )),
        }
    }
}

static REGISTRY: [&dyn DistanceMetric; 4] =
    [&Discrete, &Hamming, &AbsoluteDifference, &MaxCoordinate];

/// All registered metrics, in registration order.
pub fn registry() -> &'static [&'static dyn DistanceMetric] {
    &REGISTRY
}

/// A handle to a registered metric; compares by name.
#[derive(Clone, Copy)]
pub struct Metric(&'static dyn DistanceMetric);

impl Metric {
    pub fn by_name(name: &str) -> Result<Self> {
        registry()
            .iter()
            .find(|m| m.name() == name)
            .map(|m| Metric(*m))
            .ok_or_else(|| Error::UnknownMetric(name.to_owned()))
    }

    pub fn discrete() -> Self {
        Metric(&Discrete)
    }

    pub fn hamming() -> Self {
        Metric(&Hamming)
    }

    pub fn absolute_difference() -> Self {
        Metric(&AbsoluteDifference)
    }

    pub fn max_coordinate() -> Self {
        Metric(&MaxCoordinate)
    }

    pub fn name(&self) -> &'static str {
        self.0.name()
    }

    /// Distance between two states of the same space.
    pub fn distance<D: Domain>(&self, a: &State<D>, b: &State<D>) -> Result<f64> {
        if a.space_id() != b.space_id() {
            return Err(Error::MetricMismatch {
                metric: self.name().to_owned(),
                detail: format!(
                    "states belong to different spaces `{}` and `{}`",
                    a.space_id(),
                    b.space_id()
                ),
            });
        }
        self.0
            .value_distance(a.value(), b.value())
            .map_err(|detail| Error::MetricMismatch {
                metric: self.name().to_owned(),
                detail,
            })
    }
}

impl Default for Metric {
    fn default() -> Self {
        Metric::discrete()
    }
}

impl PartialEq for Metric {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metric({})", self.name())
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn distance<D: Domain>(metric: Metric, a: &State<D>, b: &State<D>) -> Result<f64> {
    metric.distance(a, b)
}
