//! A self-contained collection of declarations plus the checks to run on them.

use indexmap::IndexMap;

use crate::composition::{compose_parallel, compose_sequential, Class, Component, JointSystem};
use crate::dynamics::{AbstractDynamics, AbstractRule, PhysicalDynamics, PhysicalRule};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::refinement::RefinementStack;
use crate::relations::{RepresentationRelation, RepresentationRule, Theory, Validity};
use crate::spaces::{AbstractSpace, PhysicalSpace};
use crate::verification::{CheckParams, ProblemEmbedding};

/// A component reference inside a composition declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRef {
    pub theory: String,
    pub program: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComposeMode {
    Parallel,
    Sequential,
    /// Explicit joint representation and joint dynamics, by id.
    Joint { representation: String, dynamics: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionDecl {
    pub id: String,
    pub left: ComponentRef,
    pub right: ComponentRef,
    pub mode: ComposeMode,
}

/// Check inputs stay as raw JSON values until the check runs, so a check
/// naming a missing object fails on its own without rejecting the file.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckKind {
    Commutation {
        theory: String,
        program: String,
        device: String,
        input: serde_json::Value,
        params: CheckParams,
    },
    History {
        theory: String,
        program: String,
        device: String,
        input: serde_json::Value,
        physical_metric: Metric,
        params: CheckParams,
    },
    ValidateTheory {
        theory: String,
        params: CheckParams,
    },
    Compute {
        theory: String,
        program: String,
        device: String,
        input: serde_json::Value,
        embeddings: Vec<String>,
        expected: Option<serde_json::Value>,
    },
    Layer {
        stack: String,
        relation: String,
        epsilon: f64,
        metric: Metric,
    },
    Stack {
        stack: String,
        params: CheckParams,
    },
    Classify {
        joint: String,
        expected: Option<Class>,
        oracle: bool,
    },
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Commutation { .. } => "commutation",
            CheckKind::History { .. } => "history",
            CheckKind::ValidateTheory { .. } => "validate-theory",
            CheckKind::Compute { .. } => "compute",
            CheckKind::Layer { .. } => "layer",
            CheckKind::Stack { .. } => "stack",
            CheckKind::Classify { .. } => "classify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckDecl {
    pub name: String,
    pub kind: CheckKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioBundle {
    pub name: String,
    pub abstract_spaces: IndexMap<String, AbstractSpace>,
    pub physical_spaces: IndexMap<String, PhysicalSpace>,
    pub relations: IndexMap<String, RepresentationRelation>,
    pub abstract_dynamics: IndexMap<String, AbstractDynamics>,
    pub physical_dynamics: IndexMap<String, PhysicalDynamics>,
    pub theories: IndexMap<String, Theory>,
    pub embeddings: IndexMap<String, ProblemEmbedding>,
    pub stacks: IndexMap<String, RefinementStack>,
    pub compositions: IndexMap<String, CompositionDecl>,
    pub checks: Vec<CheckDecl>,
}

fn insert<T: PartialEq + Clone>(map: &mut IndexMap<String, T>, id: &str, item: &T, section: &str) -> Result<()> {
    match map.get(id) {
        Some(existing) if existing == item => Ok(()),
        Some(_) => Err(Error::InvalidDeclaration {
            id: id.to_owned(),
            reason: format!("conflicting {section} declarations share this id"),
        }),
        None => {
            map.insert(id.to_owned(), item.clone());
            Ok(())
        }
    }
}

fn clash(id: &str, section: &str) -> Error {
    Error::InvalidDeclaration {
        id: id.to_owned(),
        reason: format!("id already used by another {section}"),
    }
}

impl ScenarioBundle {
    pub fn new(name: impl Into<String>) -> Self {
        ScenarioBundle {
            name: name.into(),
            ..Default::default()
        }
    }

    // Every `add_*` also registers the objects the item refers to, so a
    // bundle always carries the full dependency closure of its contents.

    pub fn add_abstract_space(&mut self, s: &AbstractSpace) -> Result<()> {
        if self.physical_spaces.contains_key(s.id()) {
            return Err(clash(s.id(), "space"));
        }
        for c in s.components().unwrap_or(&[]) {
            self.add_abstract_space(c)?;
        }
        insert(&mut self.abstract_spaces, s.id(), s, "space")
    }

    pub fn add_physical_space(&mut self, s: &PhysicalSpace) -> Result<()> {
        if self.abstract_spaces.contains_key(s.id()) {
            return Err(clash(s.id(), "space"));
        }
        for c in s.components().unwrap_or(&[]) {
            self.add_physical_space(c)?;
        }
        insert(&mut self.physical_spaces, s.id(), s, "space")
    }

    pub fn add_relation(&mut self, r: &RepresentationRelation) -> Result<()> {
        self.add_physical_space(r.domain())?;
        self.add_abstract_space(r.codomain())?;
        if let RepresentationRule::TupleWise(parts) = r.rule() {
            for p in parts {
                self.add_relation(p)?;
            }
        }
        insert(&mut self.relations, r.id(), r, "relation")
    }

    pub fn add_abstract_dynamics(&mut self, d: &AbstractDynamics) -> Result<()> {
        if self.physical_dynamics.contains_key(d.id()) {
            return Err(clash(d.id(), "dynamics"));
        }
        self.add_abstract_space(d.space())?;
        if let AbstractRule::Chain(steps) | AbstractRule::Product(steps) = d.rule() {
            for s in steps {
                self.add_abstract_dynamics(s)?;
            }
        }
        insert(&mut self.abstract_dynamics, d.id(), d, "dynamics")
    }

    pub fn add_physical_dynamics(&mut self, d: &PhysicalDynamics) -> Result<()> {
        if self.abstract_dynamics.contains_key(d.id()) {
            return Err(clash(d.id(), "dynamics"));
        }
        self.add_physical_space(d.space())?;
        if let PhysicalRule::Chain(steps) = d.rule() {
            for s in steps {
                self.add_physical_dynamics(s)?;
            }
        }
        insert(&mut self.physical_dynamics, d.id(), d, "dynamics")
    }

    /// Stored theories are always untested; validity belongs to a run.
    pub fn add_theory(&mut self, t: &Theory) -> Result<()> {
        let t = t.with_validity(Validity::Untested);
        self.add_relation(t.representation())?;
        if let Some(inst) = t.instantiation() {
            self.add_physical_dynamics(&inst.engineering)?;
        }
        for p in t.predictions() {
            self.add_abstract_dynamics(&p.abstract_dynamics)?;
            self.add_physical_dynamics(&p.physical_dynamics)?;
        }
        insert(&mut self.theories, t.id(), &t, "theory")
    }

    pub fn add_embedding(&mut self, e: &ProblemEmbedding) -> Result<()> {
        self.add_abstract_space(e.problem_space())?;
        self.add_abstract_space(e.machine_space())?;
        insert(&mut self.embeddings, e.id(), e, "embedding")
    }

    pub fn add_stack(&mut self, s: &RefinementStack) -> Result<()> {
        let s = s.with_theory(s.theory().with_validity(Validity::Untested))?;
        for layer in s.layers() {
            self.add_abstract_dynamics(layer.dynamics())?;
        }
        self.add_theory(s.theory())?;
        self.add_physical_dynamics(s.device())?;
        insert(&mut self.stacks, s.id(), &s, "stack")
    }

    pub fn add_composition(&mut self, c: CompositionDecl) -> Result<()> {
        let id = c.id.clone();
        insert(&mut self.compositions, &id, &c, "composition")
    }

    pub fn add_check(&mut self, name: impl Into<String>, kind: CheckKind) -> Result<()> {
        let name = name.into();
        if self.checks.iter().any(|c| c.name == name) {
            return Err(Error::InvalidDeclaration {
                id: name,
                reason: "duplicate check name".into(),
            });
        }
        self.checks.push(CheckDecl { name, kind });
        Ok(())
    }

    fn find<'a, T>(map: &'a IndexMap<String, T>, id: &str, what: &str) -> Result<&'a T> {
        map.get(id).ok_or_else(|| Error::InvalidDeclaration {
            id: id.to_owned(),
            reason: format!("no {what} with this id"),
        })
    }

    pub fn theory(&self, id: &str) -> Result<&Theory> {
        Self::find(&self.theories, id, "theory")
    }

    pub fn stack(&self, id: &str) -> Result<&RefinementStack> {
        Self::find(&self.stacks, id, "stack")
    }

    pub fn embedding(&self, id: &str) -> Result<&ProblemEmbedding> {
        Self::find(&self.embeddings, id, "embedding")
    }

    pub fn relation(&self, id: &str) -> Result<&RepresentationRelation> {
        Self::find(&self.relations, id, "relation")
    }

    pub fn program(&self, id: &str) -> Result<&AbstractDynamics> {
        Self::find(&self.abstract_dynamics, id, "abstract dynamics")
    }

    pub fn device(&self, id: &str) -> Result<&PhysicalDynamics> {
        Self::find(&self.physical_dynamics, id, "physical dynamics")
    }

    pub fn composition(&self, id: &str) -> Result<&CompositionDecl> {
        Self::find(&self.compositions, id, "composition")
    }

    /// Builds a joint system. Component theories are taken from `theories`
    /// when present there (e.g. validated copies), otherwise from the bundle.
    pub fn resolve_joint(&self, id: &str, theories: &IndexMap<String, Theory>) -> Result<JointSystem> {
        let decl = self.composition(id)?;
        let component = |r: &ComponentRef| -> Result<Component> {
            let theory = match theories.get(&r.theory) {
                Some(t) => t.clone(),
                None => self.theory(&r.theory)?.clone(),
            };
            Component::new(theory, self.program(&r.program)?.clone())
        };
        let (left, right) = (component(&decl.left)?, component(&decl.right)?);
        match &decl.mode {
            ComposeMode::Parallel => compose_parallel(id, left, right),
            ComposeMode::Sequential => compose_sequential(id, left, right),
            ComposeMode::Joint { representation, dynamics } => JointSystem::declared(
                id,
                left,
                right,
                self.relation(representation)?.clone(),
                self.program(dynamics)?.clone(),
            ),
        }
    }
}
