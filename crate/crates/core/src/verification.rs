//! Commuting-diagram checks, theory validation, problem embedding and the
//! compute cycle.
//!
//! A diagram over a physical state `p` has an upper path
//! `C(R(p))` and a lower path `R(H(p))`; it commutes when the two abstract
//! endpoints lie within ε of each other under the chosen metric. For noisy
//! devices the lower path is sampled once per trial and the diagram passes
//! when the fraction of trials within ε reaches `required_success`.

use crate::dynamics::{evolve_abstract, evolve_physical, AbstractDynamics, PhysicalDynamics, TrialSeed};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::relations::{instantiate, represent, Prediction, Theory, Validity};
use crate::spaces::{contains, AbstractSpace, AbstractState, Domain, PhysicalState, State};
use crate::table::Table;

/// Tolerance and sampling parameters shared by every diagram check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckParams {
    pub epsilon: f64,
    pub metric: Metric,
    pub trials: usize,
    pub required_success: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            epsilon: 0.0,
            metric: Metric::discrete(),
            trials: 1,
            required_success: 1.0,
        }
    }
}

impl CheckParams {
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        CheckParams { epsilon, ..self }
    }

    pub fn with_metric(self, metric: Metric) -> Self {
        CheckParams { metric, ..self }
    }

    pub fn with_trials(self, trials: usize, required_success: f64) -> Self {
        CheckParams {
            trials,
            required_success,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidDeclaration {
            id: "check parameters".into(),
            reason: reason.into(),
        };
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon must be a finite non-negative number"));
        }
        if self.trials == 0 {
            return Err(invalid("at least one trial is required"));
        }
        if !(self.required_success > 0.0 && self.required_success <= 1.0) {
            return Err(invalid("required success must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// The four arrows of one commuting diagram plus its tolerance.
#[derive(Debug, Clone, Copy)]
pub struct DiagramSpec<'a> {
    pub theory: &'a Theory,
    pub abstract_dynamics: &'a AbstractDynamics,
    pub physical_dynamics: &'a PhysicalDynamics,
    pub params: CheckParams,
}

impl<'a> DiagramSpec<'a> {
    pub fn new(theory: &'a Theory, prediction: &'a Prediction, params: CheckParams) -> Self {
        DiagramSpec {
            theory,
            abstract_dynamics: &prediction.abstract_dynamics,
            physical_dynamics: &prediction.physical_dynamics,
            params,
        }
    }

    fn check_shapes(&self) -> Result<()> {
        self.params.validate()?;
        let r = self.theory.representation();
        if self.abstract_dynamics.space() != r.codomain() {
            return Err(Error::SpaceMismatch {
                expected: r.codomain().id().to_owned(),
                found: self.abstract_dynamics.space().id().to_owned(),
            });
        }
        if self.physical_dynamics.space() != r.domain() {
            return Err(Error::SpaceMismatch {
                expected: r.domain().id().to_owned(),
                found: self.physical_dynamics.space().id().to_owned(),
            });
        }
        Ok(())
    }
}

/// Both paths of a diagram and the per-trial comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationReport<Init = PhysicalState, Path = AbstractState> {
    pub initial: Init,
    pub upper_path_result: Path,
    pub lower_path_results: Vec<Path>,
    pub distances: Vec<f64>,
    pub successes: usize,
    pub success_fraction: f64,
    pub passed: bool,
    pub epsilon: f64,
    pub required_success: f64,
}

/// Downward (history) diagram: endpoints compared in the physical domain.
pub type HistoryReport = CommutationReport<crate::spaces::AbstractState, PhysicalState>;

impl<I, P> CommutationReport<I, P> {
    pub fn trials(&self) -> usize {
        self.distances.len()
    }

    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_distance(&self) -> f64 {
        self.distances.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pass verdict the same trials would get at another ε.
    pub fn passes_at(&self, epsilon: f64) -> bool {
        let ok = self.distances.iter().filter(|d| **d <= epsilon).count();
        ok as f64 / self.distances.len() as f64 >= self.required_success
    }
}

fn sample<I, D: Domain>(
    initial: I,
    upper: State<D>,
    params: &CheckParams,
    deterministic: bool,
    mut lower_for: impl FnMut(TrialSeed) -> Result<State<D>>,
    base_seed: TrialSeed,
) -> Result<CommutationReport<I, State<D>>> {
    let mut lower: Vec<State<D>> = Vec::with_capacity(params.trials);
    let mut distances = Vec::with_capacity(params.trials);
    for k in 0..params.trials {
        if deterministic && k > 0 {
            // noise-free devices ignore the seed
            lower.push(lower[0].clone());
            distances.push(distances[0]);
            continue;
        }
        let l = lower_for(base_seed.derive(k as u64))?;
        distances.push(params.metric.distance(&upper, &l)?);
        lower.push(l);
    }
    let successes = distances.iter().filter(|d| **d <= params.epsilon).count();
    let success_fraction = successes as f64 / params.trials as f64;
    Ok(CommutationReport {
        initial,
        upper_path_result: upper,
        lower_path_results: lower,
        distances,
        successes,
        success_fraction,
        passed: success_fraction >= params.required_success,
        epsilon: params.epsilon,
        required_success: params.required_success,
    })
}

/// Upward (prophecy) check: represent-then-evolve against evolve-then-represent.
pub fn check_commutation(spec: &DiagramSpec<'_>, p: &PhysicalState, base_seed: TrialSeed) -> Result<CommutationReport> {
    spec.check_shapes()?;
    let r = spec.theory.representation();
    let m = represent(r, p)?;
    let upper = evolve_abstract(spec.abstract_dynamics, &m)?;
    let h = spec.physical_dynamics;
    sample(
        p.clone(),
        upper,
        &spec.params,
        !h.is_noisy(),
        |seed| represent(r, &evolve_physical(h, p, seed)?),
        base_seed,
    )
}

/// Downward (history) check: instantiate-then-evolve against
/// evolve-then-instantiate, measured with `physical_metric`.
pub fn check_history(
    spec: &DiagramSpec<'_>,
    m: &AbstractState,
    physical_metric: Metric,
    base_seed: TrialSeed,
) -> Result<HistoryReport> {
    spec.check_shapes()?;
    let start = instantiate(spec.theory, m)?;
    let target = instantiate(spec.theory, &evolve_abstract(spec.abstract_dynamics, m)?)?;
    let params = CheckParams {
        metric: physical_metric,
        ..spec.params
    };
    let h = spec.physical_dynamics;
    sample(
        m.clone(),
        target,
        &params,
        !h.is_noisy(),
        |seed| evolve_physical(h, &start, seed),
        base_seed,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityCell {
    pub state: PhysicalState,
    pub program: String,
    pub device: String,
    pub report: CommutationReport,
}

/// Evidence for a theory over its declared domain × prediction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub theory: String,
    pub cells: Vec<ValidityCell>,
    pub all_passed: bool,
    pub coverage: usize,
}

impl ValidityReport {
    pub fn failures(&self) -> impl Iterator<Item = &ValidityCell> {
        self.cells.iter().filter(|c| !c.report.passed)
    }
}

/// Runs every (domain state, prediction) diagram. Cells are visited
/// state-major and cell `i` samples from `base_seed.derive(i)`.
pub fn validate_theory(theory: &Theory, params: &CheckParams, base_seed: TrialSeed) -> Result<(Theory, ValidityReport)> {
    if theory.domain().is_empty() || theory.predictions().is_empty() {
        return Err(Error::EmptyDomain {
            theory: theory.id().to_owned(),
        });
    }
    let mut cells = Vec::with_capacity(theory.domain().len() * theory.predictions().len());
    for state in theory.domain() {
        for prediction in theory.predictions() {
            let spec = DiagramSpec::new(theory, prediction, *params);
            let seed = base_seed.derive(cells.len() as u64);
            let report = check_commutation(&spec, state, seed)?;
            cells.push(ValidityCell {
                state: state.clone(),
                program: prediction.abstract_dynamics.id().to_owned(),
                device: prediction.physical_dynamics.id().to_owned(),
                report,
            });
        }
    }
    let all_passed = cells.iter().all(|c| c.report.passed);
    let report = ValidityReport {
        theory: theory.id().to_owned(),
        coverage: cells.len(),
        cells,
        all_passed,
    };
    let validity = if all_passed {
        Validity::Valid(Box::new(report.clone()))
    } else {
        Validity::Invalid(Box::new(report.clone()))
    };
    Ok((theory.with_validity(validity), report))
}

/// Same computation as [`check_commutation`]; the run is also recorded
/// against the theory as experimental coverage.
pub fn run_experiment(spec: &DiagramSpec<'_>, p0: &PhysicalState, base_seed: TrialSeed) -> Result<(Theory, CommutationReport)> {
    let report = check_commutation(spec, p0, base_seed)?;
    Ok((spec.theory.with_experiment(), report))
}

/// The map `Δ` from problem states to machine inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemEmbedding {
    id: String,
    problem_space: AbstractSpace,
    machine_space: AbstractSpace,
    map: Table,
}

impl ProblemEmbedding {
    pub fn new(id: impl Into<String>, problem_space: AbstractSpace, machine_space: AbstractSpace, map: Table) -> Result<Self> {
        let id = id.into();
        map.check_total(&problem_space, &machine_space)
            .map_err(|reason| Error::InvalidDeclaration { id: id.clone(), reason })?;
        Ok(ProblemEmbedding {
            id,
            problem_space,
            machine_space,
            map,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn problem_space(&self) -> &AbstractSpace {
        &self.problem_space
    }

    pub fn machine_space(&self) -> &AbstractSpace {
        &self.machine_space
    }

    pub fn map(&self) -> &Table {
        &self.map
    }
}

pub fn embed_problem(d: &ProblemEmbedding, m_s: &AbstractState) -> Result<AbstractState> {
    if !contains(&d.problem_space, m_s) {
        return Err(Error::out_of_domain(d.problem_space.id(), m_s));
    }
    let image = d.map.get(m_s.value()).expect("total embedding").clone();
    Ok(AbstractState::new(d.machine_space.id(), image))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CycleStage {
    Input(AbstractState),
    Instantiated(PhysicalState),
    Evolved(PhysicalState),
    Represented(AbstractState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputeResult {
    pub input: AbstractState,
    pub prepared: PhysicalState,
    pub final_physical: PhysicalState,
    pub output: AbstractState,
    pub trace: Vec<CycleStage>,
}

/// Encode, evolve physically, decode. The abstract program is never run;
/// the validated device predicts its result.
pub fn run_compute_cycle(
    theory: &Theory,
    input: &AbstractState,
    program: &str,
    h: &PhysicalDynamics,
    seed: TrialSeed,
) -> Result<ComputeResult> {
    if !theory.validity().is_valid() {
        return Err(Error::TheoryNotValidated {
            theory: theory.id().to_owned(),
        });
    }
    let paired = theory
        .predictions()
        .iter()
        .any(|p| p.abstract_dynamics.id() == program && p.physical_dynamics == *h);
    if !paired {
        return Err(Error::UnknownPrediction {
            theory: theory.id().to_owned(),
            program: program.to_owned(),
            device: h.id().to_owned(),
        });
    }
    let prepared = instantiate(theory, input)?;
    let final_physical = evolve_physical(h, &prepared, seed)?;
    let output = represent(theory.representation(), &final_physical)?;
    Ok(ComputeResult {
        trace: vec![
            CycleStage::Input(input.clone()),
            CycleStage::Instantiated(prepared.clone()),
            CycleStage::Evolved(final_physical.clone()),
            CycleStage::Represented(output.clone()),
        ],
        input: input.clone(),
        prepared,
        final_physical,
        output,
    })
}
