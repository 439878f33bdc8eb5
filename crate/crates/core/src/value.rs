//! Raw state values and the textual state-literal syntax.
//!
//! Literals: bitstrings are quoted (`"01"`), tuples and real vectors are
//! parenthesized (`("01","10")`, `(5,0)`), labels and integers are bare
//! (`up`, `7`). A literal is untyped until it is read against a space.

use std::fmt;
use std::str::FromStr;

/// A fixed-width bitstring, most significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    /// Encodes `n` in `width` bits, keeping only the low `width` bits.
    pub fn from_u64(n: u64, width: usize) -> Self {
        Bits((0..width).rev().map(|i| i < 64 && (n >> i) & 1 == 1).collect())
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn to_u64(&self) -> u64 {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("`{other}` is not a bit")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

/// The payload of an abstract or physical state.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Label(String),
    Bits(Bits),
    Int(i64),
    Reals(Vec<f64>),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn label(s: impl Into<String>) -> Self {
        Value::Label(s.into())
    }

    /// Parses a bitstring; panics on characters other than `0`/`1`.
    pub fn bits(s: &str) -> Self {
        Value::Bits(s.parse().expect("bitstring literal"))
    }

    pub fn as_bits(&self) -> Option<&Bits> {
        match self {
            Value::Bits(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(items) => Some(items),
            _ => None,
        }
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    write!(f, "{x}")
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Label(l) => f.write_str(l),
            Value::Bits(b) => write!(f, "\"{b}\""),
            Value::Int(n) => write!(f, "{n}"),
            Value::Reals(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write_real(f, *x)?;
                }
                f.write_str(")")
            }
            Value::Tuple(items) => {
                f.write_str("(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// An untyped state literal.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Quoted(String),
    Bare(String),
    Group(Vec<Literal>),
}

impl FromStr for Literal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = LiteralParser {
            chars: s.char_indices().peekable(),
            src: s,
        };
        let lit = parser.literal()?;
        parser.skip_ws();
        match parser.chars.peek() {
            None => Ok(lit),
            Some(&(pos, c)) => Err(format!("unexpected `{c}` at offset {pos}")),
        }
    }
}

struct LiteralParser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
}

impl LiteralParser<'_> {
    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn literal(&mut self) -> Result<Literal, String> {
        self.skip_ws();
        match self.chars.peek().copied() {
            None => Err("unexpected end of literal".into()),
            Some((_, '(')) => {
                self.chars.next();
                let mut items = Vec::new();
                loop {
                    items.push(self.literal()?);
                    self.skip_ws();
                    match self.chars.next() {
                        Some((_, ',')) => continue,
                        Some((_, ')')) => break,
                        Some((pos, c)) => return Err(format!("unexpected `{c}` at offset {pos}")),
                        None => return Err("unclosed `(`".into()),
                    }
                }
                Ok(Literal::Group(items))
            }
            Some((_, '"')) => {
                self.chars.next();
                let mut out = String::new();
                loop {
                    match self.chars.next() {
                        Some((_, '"')) => return Ok(Literal::Quoted(out)),
                        Some((_, c)) => out.push(c),
                        None => return Err("unterminated string".into()),
                    }
                }
            }
            Some((start, _)) => {
                let mut end = start;
                while let Some(&(pos, c)) = self.chars.peek() {
                    if c == ',' || c == ')' || c == '(' || c == '"' || c.is_whitespace() {
                        break;
                    }
                    end = pos + c.len_utf8();
                    self.chars.next();
                }
                if end == start {
                    return Err(format!("unexpected character at offset {start}"));
                }
                Ok(Literal::Bare(self.src[start..end].to_owned()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_roundtrip_through_integers() {
        for w in 1..=5 {
            for n in 0..(1u64 << w) {
                let b = Bits::from_u64(n, w);
                assert_eq!(b.width(), w);
                assert_eq!(b.to_u64(), n);
            }
        }
        assert_eq!(Bits::from_u64(2, 2).to_string(), "10");
    }

    #[test]
    fn parses_nested_literals() {
        let lit: Literal = r#"("01", (up,7))"#.parse().unwrap();
        assert_eq!(
            lit,
            Literal::Group(vec![
                Literal::Quoted("01".into()),
                Literal::Group(vec![Literal::Bare("up".into()), Literal::Bare("7".into())]),
            ])
        );
        assert!("(a,".parse::<Literal>().is_err());
        assert!("a b".parse::<Literal>().is_err());
    }

    #[test]
    fn displays_in_literal_syntax() {
        let v = Value::Tuple(vec![Value::bits("01"), Value::Int(7), Value::label("up")]);
        assert_eq!(v.to_string(), r#"("01",7,up)"#);
        assert_eq!(Value::Reals(vec![5.0, 0.0]).to_string(), "(5,0)");
    }
}
