//! JSON scenario files: parsing into a [`ScenarioBundle`] and emitting one.
//!
//! A document has a `format_version` and one array per section (`spaces`,
//! `relations`, `dynamics`, `theories`, `embeddings`, `stacks`,
//! `compositions`, `checks`). Identifiers may be referenced anywhere in the
//! document; they must be unique within their section. State values are
//! written as JSON: labels and bitstrings as strings, integers as numbers,
//! real vectors and tuples as arrays.

use std::collections::{HashMap, HashSet};
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::builtin::Builtin;
use crate::bundle::{CheckDecl, CheckKind, ComponentRef, ComposeMode, CompositionDecl, ScenarioBundle};
use crate::composition::Class;
use crate::dynamics::{
    AbstractDynamics, AbstractRule, CoordinateUpdate, Gate, Noise, PhysicalDynamics, PhysicalRule,
};
use crate::metric::Metric;
use crate::refinement::{RefinementLayer, RefinementStack, SimulationRelation};
use crate::relations::{InstantiationProcedure, Prediction, RepresentationRelation, RepresentationRule, Theory};
use crate::spaces::{Domain, Space, SpaceKind, State};
use crate::table::Table;
use crate::value::{Bits, Value};
use crate::verification::{CheckParams, ProblemEmbedding};

pub const FORMAT_VERSION: &str = "1";

// ---------------------------------------------------------------------------
// values

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Label(s) => Json::String(s.clone()),
        Value::Bits(b) => Json::String(b.to_string()),
        Value::Int(n) => Json::from(*n),
        Value::Reals(xs) => Json::Array(xs.iter().map(|&x| Json::from(x)).collect()),
        Value::Tuple(items) => Json::Array(items.iter().map(value_to_json).collect()),
    }
}

/// Reads a JSON value as a member of `space`.
pub fn value_from_json<D: Domain>(space: &Space<D>, json: &Json) -> Result<Value, String> {
    let mismatch = || format!("{json} is not a state of `{}`", space.id());
    let value = match (space.kind(), json) {
        (SpaceKind::Labels(_), Json::String(s)) => Value::Label(s.clone()),
        (SpaceKind::Bits { .. }, Json::String(s)) => Value::Bits(s.parse::<Bits>().map_err(|_| mismatch())?),
        (SpaceKind::IntRange { .. }, Json::Number(n)) => Value::Int(n.as_i64().ok_or_else(mismatch)?),
        (SpaceKind::Reals { .. }, Json::Array(xs)) => Value::Reals(
            xs.iter()
                .map(|x| x.as_f64().ok_or_else(mismatch))
                .collect::<Result<_, _>>()?,
        ),
        (SpaceKind::Tuple(comps), Json::Array(xs)) if comps.len() == xs.len() => Value::Tuple(
            comps
                .iter()
                .zip(xs)
                .map(|(c, x)| value_from_json(c, x))
                .collect::<Result<_, _>>()?,
        ),
        _ => return Err(mismatch()),
    };
    if space.admits(&value) {
        Ok(value)
    } else {
        Err(mismatch())
    }
}

pub fn state_from_json<D: Domain>(space: &Space<D>, json: &Json) -> Result<State<D>, String> {
    value_from_json(space, json).map(|v| State::new(space.id(), v))
}

// ---------------------------------------------------------------------------
// document schema

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Abstract,
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceDecl {
    FiniteLabeled {
        id: String,
        domain: DomainTag,
        labels: Vec<String>,
    },
    Bitstring {
        id: String,
        domain: DomainTag,
        width: usize,
    },
    BoundedInteger {
        id: String,
        domain: DomainTag,
        lo: i64,
        hi: i64,
    },
    RealVector {
        id: String,
        domain: DomainTag,
        bounds: Vec<(f64, f64)>,
    },
    Tuple {
        id: String,
        domain: DomainTag,
        components: Vec<String>,
    },
}

impl SpaceDecl {
    fn id(&self) -> &str {
        match self {
            SpaceDecl::FiniteLabeled { id, .. }
            | SpaceDecl::Bitstring { id, .. }
            | SpaceDecl::BoundedInteger { id, .. }
            | SpaceDecl::RealVector { id, .. }
            | SpaceDecl::Tuple { id, .. } => id,
        }
    }

    fn domain(&self) -> DomainTag {
        match self {
            SpaceDecl::FiniteLabeled { domain, .. }
            | SpaceDecl::Bitstring { domain, .. }
            | SpaceDecl::BoundedInteger { domain, .. }
            | SpaceDecl::RealVector { domain, .. }
            | SpaceDecl::Tuple { domain, .. } => *domain,
        }
    }

    fn deps(&self) -> Vec<&str> {
        match self {
            SpaceDecl::Tuple { components, .. } => components.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RelationDecl {
    LookupTable {
        id: String,
        domain: String,
        codomain: String,
        table: Vec<(Json, Json)>,
    },
    Threshold {
        id: String,
        domain: String,
        codomain: String,
        thresholds: Vec<f64>,
        groups: Vec<usize>,
    },
    TupleWise {
        id: String,
        domain: String,
        codomain: String,
        components: Vec<String>,
    },
}

impl RelationDecl {
    fn id(&self) -> &str {
        match self {
            RelationDecl::LookupTable { id, .. } | RelationDecl::Threshold { id, .. } | RelationDecl::TupleWise { id, .. } => id,
        }
    }

    fn deps(&self) -> Vec<&str> {
        match self {
            RelationDecl::TupleWise { components, .. } => components.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    pub line: usize,
    pub gate: Gate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DynamicsDecl {
    LookupTable {
        id: String,
        domain: DomainTag,
        space: String,
        table: Vec<(Json, Json)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise: Option<Noise>,
    },
    Builtin {
        id: String,
        space: String,
        builtin: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<usize>,
    },
    Chain {
        id: String,
        domain: DomainTag,
        space: String,
        steps: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise: Option<Noise>,
    },
    Product {
        id: String,
        space: String,
        components: Vec<String>,
    },
    CoordinateUpdate {
        id: String,
        space: String,
        threshold: f64,
        low: f64,
        high: f64,
        assign: Vec<Assignment>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise: Option<Noise>,
    },
}

impl DynamicsDecl {
    fn id(&self) -> &str {
        match self {
            DynamicsDecl::LookupTable { id, .. }
            | DynamicsDecl::Builtin { id, .. }
            | DynamicsDecl::Chain { id, .. }
            | DynamicsDecl::Product { id, .. }
            | DynamicsDecl::CoordinateUpdate { id, .. } => id,
        }
    }

    fn deps(&self) -> Vec<&str> {
        match self {
            DynamicsDecl::Chain { steps: ids, .. } | DynamicsDecl::Product { components: ids, .. } => {
                ids.iter().map(String::as_str).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstantiationDecl {
    pub seeds: Vec<Json>,
    pub engineering: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionDecl {
    pub program: String,
    pub device: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryDecl {
    pub id: String,
    pub representation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instantiation: Option<InstantiationDecl>,
    pub domain: Vec<Json>,
    pub predictions: Vec<PredictionDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDecl {
    pub id: String,
    pub problem_space: String,
    pub machine_space: String,
    pub table: Vec<(Json, Json)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDecl {
    pub id: String,
    pub dynamics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDecl {
    pub id: String,
    pub upper: String,
    pub lower: String,
    pub table: Vec<(Json, Json)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackDecl {
    pub id: String,
    pub layers: Vec<LayerDecl>,
    pub simulates: Vec<SimulationDecl>,
    pub theory: String,
    pub device: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDecl {
    pub theory: String,
    pub program: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComposeTag {
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDecl {
    pub representation: String,
    pub dynamics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionDoc {
    pub id: String,
    pub components: Vec<ComponentDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compose: Option<ComposeTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    Hybrid,
    Heterotic,
}

fn default_metric() -> String {
    "discrete".into()
}

fn default_trials() -> usize {
    1
}

fn default_required() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CheckDoc {
    Commutation {
        name: String,
        theory: String,
        program: String,
        device: String,
        input: Json,
        #[serde(default)]
        epsilon: f64,
        #[serde(default = "default_metric")]
        metric: String,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_required")]
        required_success: f64,
    },
    History {
        name: String,
        theory: String,
        program: String,
        device: String,
        input: Json,
        physical_metric: String,
        #[serde(default)]
        epsilon: f64,
        #[serde(default = "default_metric")]
        metric: String,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_required")]
        required_success: f64,
    },
    ValidateTheory {
        name: String,
        theory: String,
        #[serde(default)]
        epsilon: f64,
        #[serde(default = "default_metric")]
        metric: String,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_required")]
        required_success: f64,
    },
    Compute {
        name: String,
        theory: String,
        program: String,
        device: String,
        input: Json,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        embeddings: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected: Option<Json>,
    },
    Layer {
        name: String,
        stack: String,
        relation: String,
        #[serde(default)]
        epsilon: f64,
        #[serde(default = "default_metric")]
        metric: String,
    },
    Stack {
        name: String,
        stack: String,
        #[serde(default)]
        epsilon: f64,
        #[serde(default = "default_metric")]
        metric: String,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_required")]
        required_success: f64,
    },
    Classify {
        name: String,
        joint: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected: Option<ClassTag>,
        #[serde(default)]
        oracle: bool,
    },
}

impl CheckDoc {
    fn name(&self) -> &str {
        match self {
            CheckDoc::Commutation { name, .. }
            | CheckDoc::History { name, .. }
            | CheckDoc::ValidateTheory { name, .. }
            | CheckDoc::Compute { name, .. }
            | CheckDoc::Layer { name, .. }
            | CheckDoc::Stack { name, .. }
            | CheckDoc::Classify { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub format_version: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub spaces: Vec<SpaceDecl>,
    #[serde(default)]
    pub relations: Vec<RelationDecl>,
    #[serde(default)]
    pub dynamics: Vec<DynamicsDecl>,
    #[serde(default)]
    pub theories: Vec<TheoryDecl>,
    #[serde(default)]
    pub embeddings: Vec<EmbeddingDecl>,
    #[serde(default)]
    pub stacks: Vec<StackDecl>,
    #[serde(default)]
    pub compositions: Vec<CompositionDoc>,
    #[serde(default)]
    pub checks: Vec<CheckDoc>,
}

// ---------------------------------------------------------------------------
// diagnostics

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    SyntaxError,
    UnknownReference,
    DuplicateIdentifier,
    VersionUnsupported,
    /// Well-formed and resolvable, but rejected by a constructor.
    InvalidDeclaration,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::SyntaxError => "syntax error",
            ParseErrorKind::UnknownReference => "unknown reference",
            ParseErrorKind::DuplicateIdentifier => "duplicate identifier",
            ParseErrorKind::VersionUnsupported => "unsupported format version",
            ParseErrorKind::InvalidDeclaration => "invalid declaration",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub identifier: Option<String>,
    /// 1-based; 0 when the location is unknown.
    pub line: usize,
    pub column: usize,
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Finds declarations and references in the source text for diagnostics.
struct Locator<'t> {
    text: &'t str,
}

impl Locator<'_> {
    fn section_start(&self, section: &str) -> usize {
        let re = Regex::new(&format!(r#"{}\s*:\s*\["#, regex::escape(&quoted(section)))).expect("valid pattern");
        re.find(self.text).map_or(0, |m| m.start())
    }

    /// Offset of the `nth` declaration `"key": "<id>"` in `section`.
    fn declaration(&self, section: &str, key: &str, id: &str, nth: usize) -> Option<usize> {
        let re = Regex::new(&format!(
            r#"{}\s*:\s*{}"#,
            regex::escape(&quoted(key)),
            regex::escape(&quoted(id))
        ))
        .expect("valid pattern");
        let start = self.section_start(section);
        let found = re.find_iter(&self.text[start..]).nth(nth).map(|m| start + m.start());
        found
    }

    /// Offset of `"<reference>"` inside the declaration of `owner`.
    fn reference(&self, section: &str, key: &str, owner: &str, reference: &str) -> Option<usize> {
        let from = self.declaration(section, key, owner, 0).unwrap_or(0);
        let needle = quoted(reference);
        // skip the owner's own id when it equals the reference
        let skip = if owner == reference { from + 1 } else { from };
        self.text[skip..]
            .find(&needle)
            .map(|i| skip + i)
            .or_else(|| self.text.find(&needle))
    }

    fn error(&self, kind: ParseErrorKind, message: String, identifier: Option<&str>, offset: Option<usize>) -> ParseError {
        let (line, column) = offset.map_or((0, 0), |o| line_col(self.text, o));
        ParseError {
            kind,
            message,
            identifier: identifier.map(str::to_owned),
            line,
            column,
        }
    }
}

// ---------------------------------------------------------------------------
// parsing

/// Context for resolving one declaration: its section and id.
#[derive(Clone, Copy)]
struct At<'a> {
    section: &'static str,
    key: &'static str,
    id: &'a str,
}

struct Parser<'t> {
    loc: Locator<'t>,
    bundle: ScenarioBundle,
}

impl<'t> Parser<'t> {
    fn unknown(&self, at: At<'_>, what: &str, reference: &str) -> ParseError {
        self.loc.error(
            ParseErrorKind::UnknownReference,
            format!("`{}` refers to undeclared {what} `{reference}`", at.id),
            Some(reference),
            self.loc.reference(at.section, at.key, at.id, reference),
        )
    }

    fn invalid(&self, at: At<'_>, message: impl fmt::Display) -> ParseError {
        self.loc.error(
            ParseErrorKind::InvalidDeclaration,
            format!("`{}`: {message}", at.id),
            Some(at.id),
            self.loc.declaration(at.section, at.key, at.id, 0),
        )
    }

    fn duplicates<'a>(&self, section: &'static str, key: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<(), ParseError> {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id) {
                return Err(self.loc.error(
                    ParseErrorKind::DuplicateIdentifier,
                    format!("`{id}` is declared more than once in `{section}`"),
                    Some(id),
                    self.loc.declaration(section, key, id, 1),
                ));
            }
        }
        Ok(())
    }

    /// Orders declarations so every intra-section reference comes first.
    fn dependency_order<T>(
        &self,
        section: &'static str,
        items: &[T],
        id: impl Fn(&T) -> &str,
        deps: impl Fn(&T) -> Vec<&str>,
        external: impl Fn(&str) -> bool,
        what: &str,
    ) -> Result<Vec<usize>, ParseError> {
        let index: HashMap<&str, usize> = items.iter().enumerate().map(|(i, t)| (id(t), i)).collect();
        for t in items {
            for d in deps(t) {
                if !index.contains_key(d) && !external(d) {
                    return Err(self.unknown(At { section, key: "id", id: id(t) }, what, d));
                }
            }
        }
        let mut done = vec![false; items.len()];
        let mut order = Vec::with_capacity(items.len());
        while order.len() < items.len() {
            let before = order.len();
            for (i, t) in items.iter().enumerate() {
                if !done[i] && deps(t).iter().all(|d| index.get(d).is_none_or(|&k| done[k])) {
                    done[i] = true;
                    order.push(i);
                }
            }
            if order.len() == before {
                let stuck = items.iter().enumerate().find(|(i, _)| !done[*i]).expect("pending item").1;
                return Err(self.invalid(At { section, key: "id", id: id(stuck) }, "cyclic reference"));
            }
        }
        Ok(order)
    }

    fn table<A: Domain, B: Domain>(
        &self,
        at: At<'_>,
        from: &Space<A>,
        to: &Space<B>,
        rows: &[(Json, Json)],
    ) -> Result<Table, ParseError> {
        rows.iter()
            .map(|(k, v)| Ok((value_from_json(from, k)?, value_from_json(to, v)?)))
            .collect::<Result<Vec<_>, String>>()
            .map(Table::new)
            .map_err(|e| self.invalid(at, e))
    }

    fn spaces(&mut self, decls: &[SpaceDecl]) -> Result<(), ParseError> {
        self.duplicates("spaces", "id", decls.iter().map(SpaceDecl::id))?;
        let order = self.dependency_order("spaces", decls, SpaceDecl::id, SpaceDecl::deps, |_| false, "space")?;
        for i in order {
            let d = &decls[i];
            let at = At {
                section: "spaces",
                key: "id",
                id: d.id(),
            };
            match d.domain() {
                DomainTag::Abstract => {
                    let s = self.space_kind(at, d, |b, c| b.abstract_spaces.get(c).cloned())?;
                    self.bundle.add_abstract_space(&s).map_err(|e| self.invalid(at, e))?;
                }
                DomainTag::Physical => {
                    let s = self.space_kind(at, d, |b, c| b.physical_spaces.get(c).cloned())?;
                    self.bundle.add_physical_space(&s).map_err(|e| self.invalid(at, e))?;
                }
            }
        }
        Ok(())
    }

    fn space_kind<D: Domain>(
        &self,
        at: At<'_>,
        d: &SpaceDecl,
        lookup: impl Fn(&ScenarioBundle, &str) -> Option<Space<D>>,
    ) -> Result<Space<D>, ParseError> {
        let kind = match d {
            SpaceDecl::FiniteLabeled { labels, .. } => SpaceKind::Labels(labels.clone()),
            SpaceDecl::Bitstring { width, .. } => SpaceKind::Bits { width: *width },
            SpaceDecl::BoundedInteger { lo, hi, .. } => SpaceKind::IntRange { lo: *lo, hi: *hi },
            SpaceDecl::RealVector { bounds, .. } => SpaceKind::Reals { bounds: bounds.clone() },
            SpaceDecl::Tuple { components, .. } => SpaceKind::Tuple(
                components
                    .iter()
                    .map(|c| {
                        lookup(&self.bundle, c)
                            .ok_or_else(|| self.invalid(at, format!("component `{c}` is not a {} space", D::NAME)))
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        Space::new(d.id(), kind).map_err(|e| self.invalid(at, e))
    }

    fn abstract_space(&self, at: At<'_>, id: &str) -> Result<crate::spaces::AbstractSpace, ParseError> {
        match self.bundle.abstract_spaces.get(id) {
            Some(s) => Ok(s.clone()),
            None if self.bundle.physical_spaces.contains_key(id) => {
                Err(self.invalid(at, format!("`{id}` is a physical space, an abstract one is required")))
            }
            None => Err(self.unknown(at, "abstract space", id)),
        }
    }

    fn physical_space(&self, at: At<'_>, id: &str) -> Result<crate::spaces::PhysicalSpace, ParseError> {
        match self.bundle.physical_spaces.get(id) {
            Some(s) => Ok(s.clone()),
            None if self.bundle.abstract_spaces.contains_key(id) => {
                Err(self.invalid(at, format!("`{id}` is an abstract space, a physical one is required")))
            }
            None => Err(self.unknown(at, "physical space", id)),
        }
    }

    fn relations(&mut self, decls: &[RelationDecl]) -> Result<(), ParseError> {
        self.duplicates("relations", "id", decls.iter().map(RelationDecl::id))?;
        let order = self.dependency_order("relations", decls, RelationDecl::id, RelationDecl::deps, |_| false, "relation")?;
        for i in order {
            let d = &decls[i];
            let at = At {
                section: "relations",
                key: "id",
                id: d.id(),
            };
            let (domain, codomain) = match d {
                RelationDecl::LookupTable { domain, codomain, .. }
                | RelationDecl::Threshold { domain, codomain, .. }
                | RelationDecl::TupleWise { domain, codomain, .. } => {
                    (self.physical_space(at, domain)?, self.abstract_space(at, codomain)?)
                }
            };
            let rule = match d {
                RelationDecl::LookupTable { table, .. } => {
                    RepresentationRule::LookupTable(self.table(at, &domain, &codomain, table)?)
                }
                RelationDecl::Threshold { thresholds, groups, .. } => RepresentationRule::Threshold {
                    thresholds: thresholds.clone(),
                    groups: groups.clone(),
                },
                RelationDecl::TupleWise { components, .. } => RepresentationRule::TupleWise(
                    components
                        .iter()
                        .map(|c| self.bundle.relations[c.as_str()].clone())
                        .collect(),
                ),
            };
            let r = RepresentationRelation::new(d.id(), domain, codomain, rule).map_err(|e| self.invalid(at, e))?;
            self.bundle.add_relation(&r).map_err(|e| self.invalid(at, e))?;
        }
        Ok(())
    }

    fn dynamics(&mut self, decls: &[DynamicsDecl]) -> Result<(), ParseError> {
        self.duplicates("dynamics", "id", decls.iter().map(DynamicsDecl::id))?;
        let order = self.dependency_order("dynamics", decls, DynamicsDecl::id, DynamicsDecl::deps, |_| false, "dynamics")?;
        for i in order {
            let d = &decls[i];
            let at = At {
                section: "dynamics",
                key: "id",
                id: d.id(),
            };
            let abstract_step = |p: &Self, s: &String| {
                p.bundle
                    .abstract_dynamics
                    .get(s)
                    .cloned()
                    .ok_or_else(|| p.invalid(at, format!("step `{s}` is not abstract dynamics")))
            };
            let physical_step = |p: &Self, s: &String| {
                p.bundle
                    .physical_dynamics
                    .get(s)
                    .cloned()
                    .ok_or_else(|| p.invalid(at, format!("step `{s}` is not physical dynamics")))
            };
            let noise_on_abstract = |noise: &Option<Noise>| match noise {
                Some(_) => Err(self.invalid(at, "abstract dynamics cannot carry noise")),
                None => Ok(()),
            };
            match d {
                DynamicsDecl::LookupTable {
                    domain: DomainTag::Abstract,
                    space,
                    table,
                    noise,
                    ..
                } => {
                    noise_on_abstract(noise)?;
                    let s = self.abstract_space(at, space)?;
                    let t = self.table(at, &s, &s, table)?;
                    let a = AbstractDynamics::new(d.id(), s, AbstractRule::Table(t)).map_err(|e| self.invalid(at, e))?;
                    self.bundle.add_abstract_dynamics(&a).map_err(|e| self.invalid(at, e))?;
                }
                DynamicsDecl::LookupTable {
                    domain: DomainTag::Physical,
                    space,
                    table,
                    noise,
                    ..
                } => {
                    let s = self.physical_space(at, space)?;
                    let t = self.table(at, &s, &s, table)?;
                    let p = PhysicalDynamics::new(d.id(), s, PhysicalRule::Table(t), noise.clone())
                        .map_err(|e| self.invalid(at, e))?;
                    self.bundle.add_physical_dynamics(&p).map_err(|e| self.invalid(at, e))?;
                }
                DynamicsDecl::Builtin { space, builtin, width, .. } => {
                    let s = self.abstract_space(at, space)?;
                    let b = Builtin::lookup(builtin, *width).map_err(|e| match e {
                        crate::Error::UnknownBuiltin(_) => self.unknown(at, "builtin", builtin),
                        e => self.invalid(at, e),
                    })?;
                    let a = AbstractDynamics::new(d.id(), s, AbstractRule::Builtin(b)).map_err(|e| self.invalid(at, e))?;
                    self.bundle.add_abstract_dynamics(&a).map_err(|e| self.invalid(at, e))?;
                }
                DynamicsDecl::Chain {
                    domain: DomainTag::Abstract,
                    space,
                    steps,
                    noise,
                    ..
                } => {
                    noise_on_abstract(noise)?;
                    let s = self.abstract_space(at, space)?;
                    let steps = steps.iter().map(|x| abstract_step(self, x)).collect::<Result<_, _>>()?;
                    let a = AbstractDynamics::new(d.id(), s, AbstractRule::Chain(steps)).map_err(|e| self.invalid(at, e))?;
                    self.bundle.add_abstract_dynamics(&a).map_err(|e| self.invalid(at, e))?;
                }
                DynamicsDecl::Chain {
                    domain: DomainTag::Physical,
                    space,
                    steps,
                    noise,
                    ..
                } => {
                    let s = self.physical_space(at, space)?;
                    let steps = steps.iter().map(|x| physical_step(self, x)).collect::<Result<_, _>>()?;
                    let p = PhysicalDynamics::new(d.id(), s, PhysicalRule::Chain(steps), noise.clone())
                        .map_err(|e| self.invalid(at, e))?;
                    self.bundle.add_physical_dynamics(&p).map_err(|e| self.invalid(at, e))?;
                }
                DynamicsDecl::Product { space, components, .. } => {
                    let s = self.abstract_space(at, space)?;
                    let parts = components.iter().map(|x| abstract_step(self, x)).collect::<Result<_, _>>()?;
                    let a = AbstractDynamics::new(d.id(), s, AbstractRule::Product(parts)).map_err(|e| self.invalid(at, e))?;
                    self.bundle.add_abstract_dynamics(&a).map_err(|e| self.invalid(at, e))?;
                }
                DynamicsDecl::CoordinateUpdate {
                    space,
                    threshold,
                    low,
                    high,
                    assign,
                    noise,
                    ..
                } => {
                    let s = self.physical_space(at, space)?;
                    let update = CoordinateUpdate {
                        threshold: *threshold,
                        low: *low,
                        high: *high,
                        assignments: assign.iter().map(|a| (a.line, a.gate.clone())).collect(),
                    };
                    let p = PhysicalDynamics::new(d.id(), s, PhysicalRule::CoordinateUpdate(update), noise.clone())
                        .map_err(|e| self.invalid(at, e))?;
                    self.bundle.add_physical_dynamics(&p).map_err(|e| self.invalid(at, e))?;
                }
            }
        }
        Ok(())
    }

    fn program(&self, at: At<'_>, id: &str) -> Result<AbstractDynamics, ParseError> {
        match self.bundle.abstract_dynamics.get(id) {
            Some(d) => Ok(d.clone()),
            None if self.bundle.physical_dynamics.contains_key(id) => {
                Err(self.invalid(at, format!("`{id}` is physical dynamics, an abstract program is required")))
            }
            None => Err(self.unknown(at, "abstract dynamics", id)),
        }
    }

    fn device(&self, at: At<'_>, id: &str) -> Result<PhysicalDynamics, ParseError> {
        match self.bundle.physical_dynamics.get(id) {
            Some(d) => Ok(d.clone()),
            None if self.bundle.abstract_dynamics.contains_key(id) => {
                Err(self.invalid(at, format!("`{id}` is abstract dynamics, a device is required")))
            }
            None => Err(self.unknown(at, "physical dynamics", id)),
        }
    }

    fn theories(&mut self, decls: &[TheoryDecl]) -> Result<(), ParseError> {
        self.duplicates("theories", "id", decls.iter().map(|d| d.id.as_str()))?;
        for d in decls {
            let at = At {
                section: "theories",
                key: "id",
                id: &d.id,
            };
            let relation = self
                .bundle
                .relations
                .get(&d.representation)
                .cloned()
                .ok_or_else(|| self.unknown(at, "relation", &d.representation))?;
            let pspace = relation.domain().clone();
            let states = |p: &Self, vals: &[Json]| {
                vals.iter()
                    .map(|v| state_from_json(&pspace, v))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| p.invalid(at, e))
            };
            let instantiation = match &d.instantiation {
                Some(inst) => Some(InstantiationProcedure {
                    seeds: states(self, &inst.seeds)?,
                    engineering: self.device(at, &inst.engineering)?,
                }),
                None => None,
            };
            let domain = states(self, &d.domain)?;
            let predictions = d
                .predictions
                .iter()
                .map(|p| {
                    Ok(Prediction {
                        abstract_dynamics: self.program(at, &p.program)?,
                        physical_dynamics: self.device(at, &p.device)?,
                    })
                })
                .collect::<Result<_, ParseError>>()?;
            let t = Theory::new(&d.id, relation, instantiation, domain, predictions).map_err(|e| self.invalid(at, e))?;
            self.bundle.add_theory(&t).map_err(|e| self.invalid(at, e))?;
        }
        Ok(())
    }

    fn embeddings(&mut self, decls: &[EmbeddingDecl]) -> Result<(), ParseError> {
        self.duplicates("embeddings", "id", decls.iter().map(|d| d.id.as_str()))?;
        for d in decls {
            let at = At {
                section: "embeddings",
                key: "id",
                id: &d.id,
            };
            let problem = self.abstract_space(at, &d.problem_space)?;
            let machine = self.abstract_space(at, &d.machine_space)?;
            let table = self.table(at, &problem, &machine, &d.table)?;
            let e = ProblemEmbedding::new(&d.id, problem, machine, table).map_err(|e| self.invalid(at, e))?;
            self.bundle.add_embedding(&e).map_err(|e| self.invalid(at, e))?;
        }
        Ok(())
    }

    fn stacks(&mut self, decls: &[StackDecl]) -> Result<(), ParseError> {
        self.duplicates("stacks", "id", decls.iter().map(|d| d.id.as_str()))?;
        for d in decls {
            let at = At {
                section: "stacks",
                key: "id",
                id: &d.id,
            };
            let mut layers = Vec::new();
            for l in &d.layers {
                if layers.iter().any(|x: &RefinementLayer| x.id() == l.id) {
                    return Err(self.loc.error(
                        ParseErrorKind::DuplicateIdentifier,
                        format!("layer `{}` appears twice in stack `{}`", l.id, d.id),
                        Some(&l.id),
                        self.loc.reference("stacks", "id", &d.id, &l.id),
                    ));
                }
                layers.push(RefinementLayer::new(&l.id, self.program(at, &l.dynamics)?));
            }
            let layer = |id: &str| {
                layers
                    .iter()
                    .find(|x| x.id() == id)
                    .cloned()
                    .ok_or_else(|| self.unknown(at, "layer", id))
            };
            let mut sims = Vec::new();
            for s in &d.simulates {
                let upper = layer(&s.upper)?;
                let lower = layer(&s.lower)?;
                let table = self.table(at, upper.space(), lower.space(), &s.table)?;
                sims.push(SimulationRelation::new(&s.id, upper, lower, table).map_err(|e| self.invalid(at, e))?);
            }
            let theory = self
                .bundle
                .theories
                .get(&d.theory)
                .cloned()
                .ok_or_else(|| self.unknown(at, "theory", &d.theory))?;
            let device = self.device(at, &d.device)?;
            let stack = RefinementStack::new(&d.id, layers, sims, theory, device).map_err(|e| self.invalid(at, e))?;
            self.bundle.add_stack(&stack).map_err(|e| self.invalid(at, e))?;
        }
        Ok(())
    }

    fn component(&self, at: At<'_>, c: &ComponentDecl) -> Result<ComponentRef, ParseError> {
        if !self.bundle.theories.contains_key(&c.theory) {
            return Err(self.unknown(at, "theory", &c.theory));
        }
        self.program(at, &c.program)?;
        Ok(ComponentRef {
            theory: c.theory.clone(),
            program: c.program.clone(),
        })
    }

    fn compositions(&mut self, decls: &[CompositionDoc]) -> Result<(), ParseError> {
        self.duplicates("compositions", "id", decls.iter().map(|d| d.id.as_str()))?;
        for d in decls {
            let at = At {
                section: "compositions",
                key: "id",
                id: &d.id,
            };
            let [l, r] = d.components.as_slice() else {
                return Err(self.invalid(at, "a composition has exactly two components"));
            };
            let (left, right) = (self.component(at, l)?, self.component(at, r)?);
            let mode = match (&d.compose, &d.joint) {
                (Some(ComposeTag::Parallel), None) => ComposeMode::Parallel,
                (Some(ComposeTag::Sequential), None) => ComposeMode::Sequential,
                (None, Some(j)) => {
                    if !self.bundle.relations.contains_key(&j.representation) {
                        return Err(self.unknown(at, "relation", &j.representation));
                    }
                    self.program(at, &j.dynamics)?;
                    ComposeMode::Joint {
                        representation: j.representation.clone(),
                        dynamics: j.dynamics.clone(),
                    }
                }
                _ => return Err(self.invalid(at, "give exactly one of `compose` and `joint`")),
            };
            self.bundle
                .add_composition(CompositionDecl {
                    id: d.id.clone(),
                    left,
                    right,
                    mode,
                })
                .map_err(|e| self.invalid(at, e))?;
        }
        Ok(())
    }

    fn metric(&self, at: At<'_>, name: &str) -> Result<Metric, ParseError> {
        Metric::by_name(name).map_err(|_| self.unknown(at, "metric", name))
    }

    fn params(&self, at: At<'_>, epsilon: f64, metric: &str, trials: usize, required: f64) -> Result<CheckParams, ParseError> {
        let params = CheckParams {
            epsilon,
            metric: self.metric(at, metric)?,
            trials,
            required_success: required,
        };
        params.validate().map_err(|e| self.invalid(at, e))?;
        Ok(params)
    }

    fn require<T>(&self, at: At<'_>, map: &indexmap::IndexMap<String, T>, what: &str, id: &str) -> Result<(), ParseError> {
        if map.contains_key(id) {
            Ok(())
        } else {
            Err(self.unknown(at, what, id))
        }
    }

    fn diagram_refs(&self, at: At<'_>, theory: &str, program: &str, device: &str) -> Result<(), ParseError> {
        self.require(at, &self.bundle.theories, "theory", theory)?;
        self.program(at, program)?;
        self.device(at, device)?;
        Ok(())
    }

    fn checks(&mut self, decls: &[CheckDoc]) -> Result<(), ParseError> {
        self.duplicates("checks", "name", decls.iter().map(CheckDoc::name))?;
        for d in decls {
            let at = At {
                section: "checks",
                key: "name",
                id: d.name(),
            };
            let kind = match d {
                CheckDoc::Commutation {
                    theory,
                    program,
                    device,
                    input,
                    epsilon,
                    metric,
                    trials,
                    required_success,
                    ..
                } => {
                    self.diagram_refs(at, theory, program, device)?;
                    CheckKind::Commutation {
                        theory: theory.clone(),
                        program: program.clone(),
                        device: device.clone(),
                        input: input.clone(),
                        params: self.params(at, *epsilon, metric, *trials, *required_success)?,
                    }
                }
                CheckDoc::History {
                    theory,
                    program,
                    device,
                    input,
                    physical_metric,
                    epsilon,
                    metric,
                    trials,
                    required_success,
                    ..
                } => {
                    self.diagram_refs(at, theory, program, device)?;
                    CheckKind::History {
                        theory: theory.clone(),
                        program: program.clone(),
                        device: device.clone(),
                        input: input.clone(),
                        physical_metric: self.metric(at, physical_metric)?,
                        params: self.params(at, *epsilon, metric, *trials, *required_success)?,
                    }
                }
                CheckDoc::ValidateTheory {
                    theory,
                    epsilon,
                    metric,
                    trials,
                    required_success,
                    ..
                } => {
                    self.require(at, &self.bundle.theories, "theory", theory)?;
                    CheckKind::ValidateTheory {
                        theory: theory.clone(),
                        params: self.params(at, *epsilon, metric, *trials, *required_success)?,
                    }
                }
                CheckDoc::Compute {
                    theory,
                    program,
                    device,
                    input,
                    embeddings,
                    expected,
                    ..
                } => {
                    self.diagram_refs(at, theory, program, device)?;
                    for e in embeddings {
                        self.require(at, &self.bundle.embeddings, "embedding", e)?;
                    }
                    CheckKind::Compute {
                        theory: theory.clone(),
                        program: program.clone(),
                        device: device.clone(),
                        input: input.clone(),
                        embeddings: embeddings.clone(),
                        expected: expected.clone(),
                    }
                }
                CheckDoc::Layer {
                    stack,
                    relation,
                    epsilon,
                    metric,
                    ..
                } => {
                    self.require(at, &self.bundle.stacks, "stack", stack)?;
                    if !self.bundle.stacks[stack.as_str()].simulations().iter().any(|s| s.id() == relation) {
                        return Err(self.unknown(at, "simulation relation", relation));
                    }
                    let params = self.params(at, *epsilon, metric, 1, 1.0)?;
                    CheckKind::Layer {
                        stack: stack.clone(),
                        relation: relation.clone(),
                        epsilon: params.epsilon,
                        metric: params.metric,
                    }
                }
                CheckDoc::Stack {
                    stack,
                    epsilon,
                    metric,
                    trials,
                    required_success,
                    ..
                } => {
                    self.require(at, &self.bundle.stacks, "stack", stack)?;
                    CheckKind::Stack {
                        stack: stack.clone(),
                        params: self.params(at, *epsilon, metric, *trials, *required_success)?,
                    }
                }
                CheckDoc::Classify {
                    joint, expected, oracle, ..
                } => {
                    self.require(at, &self.bundle.compositions, "composition", joint)?;
                    CheckKind::Classify {
                        joint: joint.clone(),
                        expected: expected.map(|c| match c {
                            ClassTag::Hybrid => Class::Hybrid,
                            ClassTag::Heterotic => Class::Heterotic,
                        }),
                        oracle: *oracle,
                    }
                }
            };
            self.bundle.checks.push(CheckDecl {
                name: d.name().to_owned(),
                kind,
            });
        }
        Ok(())
    }
}

fn syntax(e: &serde_json::Error) -> ParseError {
    ParseError {
        kind: ParseErrorKind::SyntaxError,
        message: e.to_string(),
        identifier: None,
        line: e.line(),
        column: e.column(),
    }
}

/// Parses and fully resolves a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioBundle, ParseError> {
    let loc = Locator { text };
    let raw: Json = serde_json::from_str(text).map_err(|e| syntax(&e))?;
    match raw.get("format_version") {
        Some(Json::String(v)) if v == FORMAT_VERSION => {}
        Some(Json::String(v)) => {
            return Err(loc.error(
                ParseErrorKind::VersionUnsupported,
                format!("format version `{v}` is not supported (expected `{FORMAT_VERSION}`)"),
                Some(v),
                text.find("\"format_version\""),
            ))
        }
        _ => {
            return Err(loc.error(
                ParseErrorKind::SyntaxError,
                "missing string field `format_version`".into(),
                None,
                Some(0),
            ))
        }
    }
    let doc: ScenarioDocument = serde_json::from_str(text).map_err(|e| syntax(&e))?;
    let mut p = Parser {
        loc,
        bundle: ScenarioBundle::new(doc.name.clone()),
    };
    p.spaces(&doc.spaces)?;
    p.relations(&doc.relations)?;
    p.dynamics(&doc.dynamics)?;
    p.theories(&doc.theories)?;
    p.embeddings(&doc.embeddings)?;
    p.stacks(&doc.stacks)?;
    p.compositions(&doc.compositions)?;
    p.checks(&doc.checks)?;
    Ok(p.bundle)
}

// ---------------------------------------------------------------------------
// emitting

fn rows(t: &Table) -> Vec<(Json, Json)> {
    t.entries().iter().map(|(k, v)| (value_to_json(k), value_to_json(v))).collect()
}

fn space_decl<D: Domain>(s: &Space<D>, domain: DomainTag) -> SpaceDecl {
    let id = s.id().to_owned();
    match s.kind() {
        SpaceKind::Labels(labels) => SpaceDecl::FiniteLabeled {
            id,
            domain,
            labels: labels.clone(),
        },
        SpaceKind::Bits { width } => SpaceDecl::Bitstring {
            id,
            domain,
            width: *width,
        },
        SpaceKind::IntRange { lo, hi } => SpaceDecl::BoundedInteger {
            id,
            domain,
            lo: *lo,
            hi: *hi,
        },
        SpaceKind::Reals { bounds } => SpaceDecl::RealVector {
            id,
            domain,
            bounds: bounds.clone(),
        },
        SpaceKind::Tuple(comps) => SpaceDecl::Tuple {
            id,
            domain,
            components: comps.iter().map(|c| c.id().to_owned()).collect(),
        },
    }
}

/// Emits items after everything they refer to.
struct Emitter {
    seen: HashSet<String>,
}

impl Emitter {
    fn space<D: Domain>(&mut self, s: &Space<D>, domain: DomainTag, out: &mut Vec<SpaceDecl>) {
        if self.seen.contains(s.id()) {
            return;
        }
        for c in s.components().unwrap_or(&[]) {
            self.space(c, domain, out);
        }
        self.seen.insert(s.id().to_owned());
        out.push(space_decl(s, domain));
    }

    fn relation(&mut self, r: &RepresentationRelation, out: &mut Vec<RelationDecl>) {
        if !self.seen.insert(format!("relation:{}", r.id())) {
            return;
        }
        let (id, domain, codomain) = (r.id().to_owned(), r.domain().id().to_owned(), r.codomain().id().to_owned());
        let decl = match r.rule() {
            RepresentationRule::LookupTable(t) => RelationDecl::LookupTable {
                id,
                domain,
                codomain,
                table: rows(t),
            },
            RepresentationRule::Threshold { thresholds, groups } => RelationDecl::Threshold {
                id,
                domain,
                codomain,
                thresholds: thresholds.clone(),
                groups: groups.clone(),
            },
            RepresentationRule::TupleWise(parts) => {
                for p in parts {
                    self.relation(p, out);
                }
                RelationDecl::TupleWise {
                    id,
                    domain,
                    codomain,
                    components: parts.iter().map(|p| p.id().to_owned()).collect(),
                }
            }
        };
        out.push(decl);
    }

    fn abstract_dynamics(&mut self, d: &AbstractDynamics, out: &mut Vec<DynamicsDecl>) {
        if !self.seen.insert(format!("dynamics:{}", d.id())) {
            return;
        }
        let (id, space) = (d.id().to_owned(), d.space().id().to_owned());
        let decl = match d.rule() {
            AbstractRule::Table(t) => DynamicsDecl::LookupTable {
                id,
                domain: DomainTag::Abstract,
                space,
                table: rows(t),
                noise: None,
            },
            AbstractRule::Builtin(b) => DynamicsDecl::Builtin {
                id,
                space,
                builtin: b.name().to_owned(),
                width: b.width(),
            },
            AbstractRule::Chain(steps) | AbstractRule::Product(steps) => {
                for s in steps {
                    self.abstract_dynamics(s, out);
                }
                let ids = steps.iter().map(|s| s.id().to_owned()).collect();
                if matches!(d.rule(), AbstractRule::Chain(_)) {
                    DynamicsDecl::Chain {
                        id,
                        domain: DomainTag::Abstract,
                        space,
                        steps: ids,
                        noise: None,
                    }
                } else {
                    DynamicsDecl::Product {
                        id,
                        space,
                        components: ids,
                    }
                }
            }
        };
        out.push(decl);
    }

    fn physical_dynamics(&mut self, d: &PhysicalDynamics, out: &mut Vec<DynamicsDecl>) {
        if !self.seen.insert(format!("dynamics:{}", d.id())) {
            return;
        }
        let (id, space, noise) = (d.id().to_owned(), d.space().id().to_owned(), d.noise().cloned());
        let decl = match d.rule() {
            PhysicalRule::Table(t) => DynamicsDecl::LookupTable {
                id,
                domain: DomainTag::Physical,
                space,
                table: rows(t),
                noise,
            },
            PhysicalRule::CoordinateUpdate(u) => DynamicsDecl::CoordinateUpdate {
                id,
                space,
                threshold: u.threshold,
                low: u.low,
                high: u.high,
                assign: u
                    .assignments
                    .iter()
                    .map(|(line, gate)| Assignment {
                        line: *line,
                        gate: gate.clone(),
                    })
                    .collect(),
                noise,
            },
            PhysicalRule::Chain(steps) => {
                for s in steps {
                    self.physical_dynamics(s, out);
                }
                DynamicsDecl::Chain {
                    id,
                    domain: DomainTag::Physical,
                    space,
                    steps: steps.iter().map(|s| s.id().to_owned()).collect(),
                    noise,
                }
            }
        };
        out.push(decl);
    }
}

fn check_doc(c: &CheckDecl) -> CheckDoc {
    let name = c.name.clone();
    match &c.kind {
        CheckKind::Commutation {
            theory,
            program,
            device,
            input,
            params,
        } => CheckDoc::Commutation {
            name,
            theory: theory.clone(),
            program: program.clone(),
            device: device.clone(),
            input: input.clone(),
            epsilon: params.epsilon,
            metric: params.metric.name().into(),
            trials: params.trials,
            required_success: params.required_success,
        },
        CheckKind::History {
            theory,
            program,
            device,
            input,
            physical_metric,
            params,
        } => CheckDoc::History {
            name,
            theory: theory.clone(),
            program: program.clone(),
            device: device.clone(),
            input: input.clone(),
            physical_metric: physical_metric.name().into(),
            epsilon: params.epsilon,
            metric: params.metric.name().into(),
            trials: params.trials,
            required_success: params.required_success,
        },
        CheckKind::ValidateTheory { theory, params } => CheckDoc::ValidateTheory {
            name,
            theory: theory.clone(),
            epsilon: params.epsilon,
            metric: params.metric.name().into(),
            trials: params.trials,
            required_success: params.required_success,
        },
        CheckKind::Compute {
            theory,
            program,
            device,
            input,
            embeddings,
            expected,
        } => CheckDoc::Compute {
            name,
            theory: theory.clone(),
            program: program.clone(),
            device: device.clone(),
            input: input.clone(),
            embeddings: embeddings.clone(),
            expected: expected.clone(),
        },
        CheckKind::Layer {
            stack,
            relation,
            epsilon,
            metric,
        } => CheckDoc::Layer {
            name,
            stack: stack.clone(),
            relation: relation.clone(),
            epsilon: *epsilon,
            metric: metric.name().into(),
        },
        CheckKind::Stack { stack, params } => CheckDoc::Stack {
            name,
            stack: stack.clone(),
            epsilon: params.epsilon,
            metric: params.metric.name().into(),
            trials: params.trials,
            required_success: params.required_success,
        },
        CheckKind::Classify { joint, expected, oracle } => CheckDoc::Classify {
            name,
            joint: joint.clone(),
            expected: expected.map(|c| match c {
                Class::Hybrid => ClassTag::Hybrid,
                Class::Heterotic => ClassTag::Heterotic,
            }),
            oracle: *oracle,
        },
    }
}

/// The document form of a bundle, with every default written out.
pub fn to_document(bundle: &ScenarioBundle) -> ScenarioDocument {
    let mut e = Emitter { seen: HashSet::new() };
    let mut spaces = Vec::new();
    for s in bundle.physical_spaces.values() {
        e.space(s, DomainTag::Physical, &mut spaces);
    }
    for s in bundle.abstract_spaces.values() {
        e.space(s, DomainTag::Abstract, &mut spaces);
    }
    let mut relations = Vec::new();
    for r in bundle.relations.values() {
        e.relation(r, &mut relations);
    }
    let mut dynamics = Vec::new();
    for d in bundle.abstract_dynamics.values() {
        e.abstract_dynamics(d, &mut dynamics);
    }
    for d in bundle.physical_dynamics.values() {
        e.physical_dynamics(d, &mut dynamics);
    }
    let theories = bundle
        .theories
        .values()
        .map(|t| TheoryDecl {
            id: t.id().to_owned(),
            representation: t.representation().id().to_owned(),
            instantiation: t.instantiation().map(|i| InstantiationDecl {
                seeds: i.seeds.iter().map(|s| value_to_json(s.value())).collect(),
                engineering: i.engineering.id().to_owned(),
            }),
            domain: t.domain().iter().map(|s| value_to_json(s.value())).collect(),
            predictions: t
                .predictions()
                .iter()
                .map(|p| PredictionDecl {
                    program: p.abstract_dynamics.id().to_owned(),
                    device: p.physical_dynamics.id().to_owned(),
                })
                .collect(),
        })
        .collect();
    let embeddings = bundle
        .embeddings
        .values()
        .map(|x| EmbeddingDecl {
            id: x.id().to_owned(),
            problem_space: x.problem_space().id().to_owned(),
            machine_space: x.machine_space().id().to_owned(),
            table: rows(x.map()),
        })
        .collect();
    let stacks = bundle
        .stacks
        .values()
        .map(|s| StackDecl {
            id: s.id().to_owned(),
            layers: s
                .layers()
                .iter()
                .map(|l| LayerDecl {
                    id: l.id().to_owned(),
                    dynamics: l.dynamics().id().to_owned(),
                })
                .collect(),
            simulates: s
                .simulations()
                .iter()
                .map(|r| SimulationDecl {
                    id: r.id().to_owned(),
                    upper: r.upper().id().to_owned(),
                    lower: r.lower().id().to_owned(),
                    table: rows(r.map()),
                })
                .collect(),
            theory: s.theory().id().to_owned(),
            device: s.device().id().to_owned(),
        })
        .collect();
    let component = |c: &ComponentRef| ComponentDecl {
        theory: c.theory.clone(),
        program: c.program.clone(),
    };
    let compositions = bundle
        .compositions
        .values()
        .map(|c| {
            let (compose, joint) = match &c.mode {
                ComposeMode::Parallel => (Some(ComposeTag::Parallel), None),
                ComposeMode::Sequential => (Some(ComposeTag::Sequential), None),
                ComposeMode::Joint { representation, dynamics } => (
                    None,
                    Some(JointDecl {
                        representation: representation.clone(),
                        dynamics: dynamics.clone(),
                    }),
                ),
            };
            CompositionDoc {
                id: c.id.clone(),
                components: vec![component(&c.left), component(&c.right)],
                compose,
                joint,
            }
        })
        .collect();
    ScenarioDocument {
        format_version: FORMAT_VERSION.into(),
        name: bundle.name.clone(),
        spaces,
        relations,
        dynamics,
        theories,
        embeddings,
        stacks,
        compositions,
        checks: bundle.checks.iter().map(check_doc).collect(),
    }
}

/// Pretty-printed JSON scenario file for `bundle`.
pub fn emit_scenario(bundle: &ScenarioBundle) -> String {
    let mut text = serde_json::to_string_pretty(&to_document(bundle)).expect("document serializes");
    text.push('\n');
    text
}
