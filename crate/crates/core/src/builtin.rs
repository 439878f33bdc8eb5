//! Builtin abstract programs, registered by name.
//!
//! The names double as reserved words in scenario files. Binary gates act
//! on a pair `(a, b)` of equal-width bitstrings and write the result into
//! the first register: `(a, b) ↦ (a op b, b)`. `ripple-add(w)` acts on
//! `(a, b, s)` with `a`, `b` of width `w` and writes `a + b` into `s`,
//! truncated to the width of `s`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spaces::{AbstractSpace, SpaceKind};
use crate::value::{Bits, Value};

pub trait BuiltinRule: Send + Sync {
    fn name(&self) -> &'static str;

    fn width(&self) -> Option<usize> {
        None
    }

    fn check_space(&self, space: &AbstractSpace) -> Result<(), String>;

    /// Applies the rule to a value already known to lie in a checked space.
    fn apply(&self, value: &Value) -> Value;
}

struct Identity;
struct BitNot;
struct BinaryGate {
    name: &'static str,
    op: fn(bool, bool) -> bool,
}
struct RippleAdd {
    width: usize,
}
struct SwapPair;

fn all_bits(space: &AbstractSpace) -> bool {
    match space.kind() {
        SpaceKind::Bits { .. } => true,
        SpaceKind::Tuple(c) => c.iter().all(all_bits),
        _ => false,
    }
}

fn pair_components(space: &AbstractSpace, n: usize) -> Result<&[AbstractSpace], String> {
    match space.components() {
        Some(c) if c.len() == n => Ok(c),
        _ => Err(format!("expects a {n}-component tuple space, got `{}`", space.id())),
    }
}

fn bits_width(space: &AbstractSpace) -> Option<usize> {
    match space.kind() {
        SpaceKind::Bits { width } => Some(*width),
        _ => None,
    }
}

impl BuiltinRule for Identity {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn check_space(&self, _space: &AbstractSpace) -> Result<(), String> {
        Ok(())
    }

    fn apply(&self, value: &Value) -> Value {
        value.clone()
    }
}

impl BuiltinRule for BitNot {
    fn name(&self) -> &'static str {
        "bit-not"
    }

    fn check_space(&self, space: &AbstractSpace) -> Result<(), String> {
        if all_bits(space) {
            Ok(())
        } else {
            Err(format!("`{}` is not built from bitstrings", space.id()))
        }
    }

    fn apply(&self, value: &Value) -> Value {
        match value {
            Value::Bits(b) => Value::Bits(Bits::new(b.as_slice().iter().map(|x| !x).collect())),
            Value::Tuple(items) => Value::Tuple(items.iter().map(|v| self.apply(v)).collect()),
            other => other.clone(),
        }
    }
}

impl BuiltinRule for BinaryGate {
    fn name(&self) -> &'static str {
        self.name
    }

    fn check_space(&self, space: &AbstractSpace) -> Result<(), String> {
        let c = pair_components(space, 2)?;
        match (bits_width(&c[0]), bits_width(&c[1])) {
            (Some(x), Some(y)) if x == y => Ok(()),
            _ => Err("operands must be bitstrings of equal width".into()),
        }
    }

    fn apply(&self, value: &Value) -> Value {
        let items = value.as_tuple().expect("pair");
        let (a, b) = (items[0].as_bits().expect("bits"), items[1].as_bits().expect("bits"));
        let out = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| (self.op)(x, y))
            .collect();
        Value::Tuple(vec![Value::Bits(Bits::new(out)), items[1].clone()])
    }
}

impl BuiltinRule for RippleAdd {
    fn name(&self) -> &'static str {
        "ripple-add"
    }

    fn width(&self) -> Option<usize> {
        Some(self.width)
    }

    fn check_space(&self, space: &AbstractSpace) -> Result<(), String> {
        let c = pair_components(space, 3)?;
        let w = Some(self.width);
        if bits_width(&c[0]) != w || bits_width(&c[1]) != w {
            return Err(format!("operands must be {}-bit bitstrings", self.width));
        }
        if bits_width(&c[2]).is_none() {
            return Err("sum register must be a bitstring".into());
        }
        Ok(())
    }

    fn apply(&self, value: &Value) -> Value {
        let items = value.as_tuple().expect("triple");
        let a = items[0].as_bits().expect("bits");
        let b = items[1].as_bits().expect("bits");
        let out_width = items[2].as_bits().expect("bits").width();
        // index 0 is the least significant bit
        let bit = |x: &Bits, i: usize| i < x.width() && x.as_slice()[x.width() - 1 - i];
        let mut carry = false;
        let mut sum = vec![false; out_width];
        for i in 0..out_width {
            let (x, y) = (bit(a, i), bit(b, i));
            sum[out_width - 1 - i] = x ^ y ^ carry;
            carry = (x && y) || (carry && (x ^ y));
        }
        Value::Tuple(vec![
            items[0].clone(),
            items[1].clone(),
            Value::Bits(Bits::new(sum)),
        ])
    }
}

impl BuiltinRule for SwapPair {
    fn name(&self) -> &'static str {
        "swap-pair"
    }

    fn check_space(&self, space: &AbstractSpace) -> Result<(), String> {
        let c = pair_components(space, 2)?;
        if c[0].kind() == c[1].kind() {
            Ok(())
        } else {
            Err("swapped components must have the same shape".into())
        }
    }

    fn apply(&self, value: &Value) -> Value {
        let items = value.as_tuple().expect("pair");
        Value::Tuple(vec![items[1].clone(), items[0].clone()])
    }
}

type Factory = fn(Option<usize>) -> Result<Arc<dyn BuiltinRule>, String>;

fn no_width(name: &str, width: Option<usize>) -> Result<(), String> {
    match width {
        None => Ok(()),
        Some(_) => Err(format!("`{name}` takes no width")),
    }
}

static FACTORIES: [(&str, Factory); 6] = [
    ("identity", |w| no_width("identity", w).map(|_| Arc::new(Identity) as _)),
    ("bit-not", |w| no_width("bit-not", w).map(|_| Arc::new(BitNot) as _)),
    ("and", |w| {
        no_width("and", w).map(|_| {
            Arc::new(BinaryGate {
                name: "and",
                op: |x, y| x && y,
            }) as _
        })
    }),
    ("xor", |w| {
        no_width("xor", w).map(|_| {
            Arc::new(BinaryGate {
                name: "xor",
                op: |x, y| x ^ y,
            }) as _
        })
    }),
    ("ripple-add", |w| match w {
        Some(width) if width >= 1 => Ok(Arc::new(RippleAdd { width }) as _),
        _ => Err("`ripple-add` needs a positive width".into()),
    }),
    ("swap-pair", |w| no_width("swap-pair", w).map(|_| Arc::new(SwapPair) as _)),
];

/// Names of all registered builtins.
pub fn names() -> impl Iterator<Item = &'static str> {
    FACTORIES.iter().map(|(n, _)| *n)
}

/// A handle to a registered builtin rule; compares by name and width.
#[derive(Clone)]
pub struct Builtin(Arc<dyn BuiltinRule>);

impl Builtin {
    pub fn lookup(name: &str, width: Option<usize>) -> Result<Self> {
        let (_, factory) = FACTORIES
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::UnknownBuiltin(name.to_owned()))?;
        factory(width).map(Builtin).map_err(|reason| Error::InvalidDynamics {
            dynamics: name.to_owned(),
            reason,
        })
    }

    pub fn identity() -> Self {
        Builtin(Arc::new(Identity))
    }

    pub fn name(&self) -> &'static str {
        self.0.name()
    }

    pub fn width(&self) -> Option<usize> {
        self.0.width()
    }

    pub fn rule(&self) -> &dyn BuiltinRule {
        self.0.as_ref()
    }
}

impl PartialEq for Builtin {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name() && self.width() == other.width()
    }
}

impl fmt::Debug for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.width() {
            Some(w) => write!(f, "{}({w})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_checks_parameters() {
        for name in names() {
            let w = (name == "ripple-add").then_some(2);
            assert_eq!(Builtin::lookup(name, w).unwrap().name(), name);
        }
        assert!(matches!(Builtin::lookup("nand", None), Err(Error::UnknownBuiltin(_))));
        assert!(Builtin::lookup("ripple-add", None).is_err());
        assert!(Builtin::lookup("identity", Some(3)).is_err());
    }

    #[test]
    fn ripple_add_matches_integer_addition() {
        // brute force for widths up to 4, sum registers of width w and w + 1
        for w in 1..=4usize {
            let add = Builtin::lookup("ripple-add", Some(w)).unwrap();
            for out in [w, w + 1] {
                for a in 0..(1u64 << w) {
                    for b in 0..(1u64 << w) {
                        let v = Value::Tuple(vec![
                            Value::Bits(Bits::from_u64(a, w)),
                            Value::Bits(Bits::from_u64(b, w)),
                            Value::Bits(Bits::from_u64(0, out)),
                        ]);
                        let r = add.rule().apply(&v);
                        let s = r.as_tuple().unwrap()[2].as_bits().unwrap().to_u64();
                        assert_eq!(s, (a + b) % (1 << out), "{a}+{b} in {out} bits");
                    }
                }
            }
        }
    }

    #[test]
    fn gates_write_the_first_register() {
        let xor = Builtin::lookup("xor", None).unwrap();
        let v = Value::Tuple(vec![Value::bits("1"), Value::bits("1")]);
        assert_eq!(xor.rule().apply(&v), Value::Tuple(vec![Value::bits("0"), Value::bits("1")]));
        let and = Builtin::lookup("and", None).unwrap();
        let v = Value::Tuple(vec![Value::bits("10"), Value::bits("11")]);
        assert_eq!(and.rule().apply(&v), Value::Tuple(vec![Value::bits("10"), Value::bits("11")]));
    }
}
