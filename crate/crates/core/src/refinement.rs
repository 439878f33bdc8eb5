//! Refinement stacks: abstract layers linked by downward simulation maps and
//! grounded in a device theory at the bottom.

use crate::dynamics::{evolve_abstract, AbstractDynamics, PhysicalDynamics, TrialSeed};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::relations::{instantiate, Theory};
use crate::spaces::{AbstractSpace, AbstractState};
use crate::table::Table;
use crate::verification::{check_commutation, run_compute_cycle, CheckParams, CommutationReport, ComputeResult, DiagramSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementLayer {
    id: String,
    dynamics: AbstractDynamics,
}

impl RefinementLayer {
    pub fn new(id: impl Into<String>, dynamics: AbstractDynamics) -> Self {
        RefinementLayer { id: id.into(), dynamics }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn space(&self) -> &AbstractSpace {
        self.dynamics.space()
    }

    pub fn dynamics(&self) -> &AbstractDynamics {
        &self.dynamics
    }
}

/// A total map from the upper layer's states to the lower layer's.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRelation {
    id: String,
    upper: RefinementLayer,
    lower: RefinementLayer,
    map: Table,
}

impl SimulationRelation {
    pub fn new(id: impl Into<String>, upper: RefinementLayer, lower: RefinementLayer, map: Table) -> Result<Self> {
        let id = id.into();
        map.check_total(upper.space(), lower.space())
            .map_err(|reason| Error::InvalidDeclaration { id: id.clone(), reason })?;
        Ok(SimulationRelation { id, upper, lower, map })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn upper(&self) -> &RefinementLayer {
        &self.upper
    }

    pub fn lower(&self) -> &RefinementLayer {
        &self.lower
    }

    pub fn map(&self) -> &Table {
        &self.map
    }

    pub fn apply(&self, u: &AbstractState) -> Result<AbstractState> {
        let upper = self.upper.space();
        let image = self
            .map
            .get(u.value())
            .filter(|_| u.space_id() == upper.id())
            .ok_or_else(|| Error::out_of_domain(upper.id(), u))?;
        Ok(AbstractState::new(self.lower.space().id(), image.clone()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerFailure {
    pub input: AbstractState,
    /// `S(C_upper(u))`
    pub via_upper: AbstractState,
    /// `C_lower(S(u))`
    pub via_lower: AbstractState,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerReport {
    pub relation: String,
    pub checked: usize,
    pub failures: Vec<LayerFailure>,
    pub passed: bool,
}

/// Downward simulation check over every state of the upper layer.
pub fn check_layer(s: &SimulationRelation, epsilon: f64, metric: Metric) -> Result<LayerReport> {
    let states = s.upper.space().enumerate()?;
    s.lower.space().enumerate()?;
    let mut failures = Vec::new();
    for u in &states {
        let via_upper = s.apply(&evolve_abstract(&s.upper.dynamics, u)?)?;
        let via_lower = evolve_abstract(&s.lower.dynamics, &s.apply(u)?)?;
        let distance = metric.distance(&via_upper, &via_lower)?;
        if distance > epsilon {
            failures.push(LayerFailure {
                input: u.clone(),
                via_upper,
                via_lower,
                distance,
            });
        }
    }
    Ok(LayerReport {
        relation: s.id.clone(),
        checked: states.len(),
        passed: failures.is_empty(),
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementStack {
    id: String,
    layers: Vec<RefinementLayer>,
    simulations: Vec<SimulationRelation>,
    theory: Theory,
    device: PhysicalDynamics,
}

impl RefinementStack {
    /// `layers` run top to bottom; `simulations[i]` maps layer `i` onto `i + 1`.
    pub fn new(
        id: impl Into<String>,
        layers: Vec<RefinementLayer>,
        simulations: Vec<SimulationRelation>,
        theory: Theory,
        device: PhysicalDynamics,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidDeclaration { id: id.clone(), reason };
        let Some(bottom) = layers.last() else {
            return Err(invalid("a stack needs at least one layer".into()));
        };
        if simulations.len() + 1 != layers.len() {
            return Err(invalid(format!(
                "{} layers need {} simulation relations, found {}",
                layers.len(),
                layers.len() - 1,
                simulations.len()
            )));
        }
        for (i, s) in simulations.iter().enumerate() {
            if s.upper != layers[i] || s.lower != layers[i + 1] {
                return Err(invalid(format!(
                    "`{}` must connect `{}` to `{}`",
                    s.id,
                    layers[i].id,
                    layers[i + 1].id
                )));
            }
        }
        if bottom.space() != theory.representation().codomain() {
            return Err(invalid(format!(
                "bottom layer `{}` does not live in the codomain of theory `{}`",
                bottom.id,
                theory.id()
            )));
        }
        if device.space() != theory.representation().domain() {
            return Err(invalid(format!("device `{}` does not act on the theory's domain", device.id())));
        }
        Ok(RefinementStack {
            id,
            layers,
            simulations,
            theory,
            device,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn layers(&self) -> &[RefinementLayer] {
        &self.layers
    }

    pub fn simulations(&self) -> &[SimulationRelation] {
        &self.simulations
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn device(&self) -> &PhysicalDynamics {
        &self.device
    }

    pub fn top(&self) -> &RefinementLayer {
        &self.layers[0]
    }

    pub fn bottom(&self) -> &RefinementLayer {
        self.layers.last().expect("non-empty")
    }

    /// Same stack grounded in another copy of its theory (e.g. after validation).
    pub fn with_theory(&self, theory: Theory) -> Result<Self> {
        Self::new(
            self.id.clone(),
            self.layers.clone(),
            self.simulations.clone(),
            theory,
            self.device.clone(),
        )
    }

    /// Composes every simulation map, top to bottom.
    pub fn lower_to_bottom(&self, u: &AbstractState) -> Result<AbstractState> {
        self.simulations.iter().try_fold(u.clone(), |s, rel| rel.apply(&s))
    }

    /// Bottom states reached from some top state, in top enumeration order.
    pub fn reachable_bottom_states(&self) -> Result<Vec<AbstractState>> {
        let mut out: Vec<AbstractState> = Vec::new();
        for u in self.top().space().enumerate()? {
            let b = self.lower_to_bottom(&u)?;
            if !out.contains(&b) {
                out.push(b);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// The device check itself is the evidence; validity is not consulted.
    #[default]
    Lenient,
    RequireValidated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceCheck {
    pub bottom_state: AbstractState,
    pub report: CommutationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackReport {
    pub stack: String,
    pub layer_reports: Vec<LayerReport>,
    pub device_checks: Vec<DeviceCheck>,
    pub layers_passed: bool,
    pub device_passed: bool,
    pub passed: bool,
}

/// Checks every adjacent layer pair, then the bottom layer against the
/// device on every reachable bottom state.
pub fn check_stack_to_device(
    stack: &RefinementStack,
    params: &CheckParams,
    base_seed: TrialSeed,
    strictness: Strictness,
) -> Result<StackReport> {
    if strictness == Strictness::RequireValidated && !stack.theory.validity().is_valid() {
        return Err(Error::TheoryNotValidated {
            theory: stack.theory.id().to_owned(),
        });
    }
    let layer_reports = stack
        .simulations
        .iter()
        .map(|s| check_layer(s, params.epsilon, params.metric))
        .collect::<Result<Vec<_>>>()?;
    let spec = DiagramSpec {
        theory: &stack.theory,
        abstract_dynamics: stack.bottom().dynamics(),
        physical_dynamics: &stack.device,
        params: *params,
    };
    let mut device_checks = Vec::new();
    for (i, b) in stack.reachable_bottom_states()?.into_iter().enumerate() {
        let p = instantiate(&stack.theory, &b)?;
        let report = check_commutation(&spec, &p, base_seed.derive(i as u64))?;
        device_checks.push(DeviceCheck { bottom_state: b, report });
    }
    let layers_passed = layer_reports.iter().all(|r| r.passed);
    let device_passed = device_checks.iter().all(|c| c.report.passed);
    Ok(StackReport {
        stack: stack.id.clone(),
        layer_reports,
        device_checks,
        layers_passed,
        device_passed,
        passed: layers_passed && device_passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackPrediction {
    pub top_input: AbstractState,
    pub bottom_input: AbstractState,
    pub cycle: ComputeResult,
    /// First top state (in enumeration order) whose image is the device output.
    pub top_output: Option<AbstractState>,
}

/// Runs a top-level input through the stack and the device's compute cycle.
pub fn predict_through_stack(stack: &RefinementStack, top_input: &AbstractState, seed: TrialSeed) -> Result<StackPrediction> {
    let bottom_input = stack.lower_to_bottom(top_input)?;
    let cycle = run_compute_cycle(
        &stack.theory,
        &bottom_input,
        stack.bottom().dynamics().id(),
        &stack.device,
        seed,
    )?;
    let mut top_output = None;
    for u in stack.top().space().enumerate()? {
        if stack.lower_to_bottom(&u)? == cycle.output {
            top_output = Some(u);
            break;
        }
    }
    Ok(StackPrediction {
        top_input: top_input.clone(),
        bottom_input,
        cycle,
        top_output,
    })
}
