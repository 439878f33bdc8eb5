//! Runs a bundle's declared checks and assembles a [`RunReport`].

use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::bundle::{CheckDecl, CheckKind, ComposeMode, ScenarioBundle};
use crate::composition::{brute_force_classify, classify, FactorizationWitness};
use crate::document::state_from_json;
use crate::dynamics::TrialSeed;
use crate::error::{Error, Result};
use crate::refinement::{check_layer, check_stack_to_device, LayerReport, Strictness};
use crate::relations::Theory;
use crate::table::Table;
use crate::verification::{
    check_commutation, check_history, embed_problem, run_compute_cycle, validate_theory, CheckParams,
    CommutationReport, DiagramSpec,
};

pub const REPORT_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// One distinct lower-path outcome and how many trials produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub state: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDetail {
    pub input: String,
    pub upper_path: String,
    /// Lower-path results in order of first appearance.
    pub lower_paths: Vec<Outcome>,
    pub trials: usize,
    pub successes: usize,
    pub success_fraction: f64,
    pub max_distance: f64,
    pub min_distance: f64,
    pub epsilon: f64,
    pub required_success: f64,
    pub metric: String,
}

impl DiagramDetail {
    fn new<I: std::fmt::Display, P: std::fmt::Display + PartialEq>(r: &CommutationReport<I, P>, metric: &str) -> Self {
        let mut lower: Vec<Outcome> = Vec::new();
        for p in &r.lower_path_results {
            let s = p.to_string();
            match lower.iter_mut().find(|o| o.state == s) {
                Some(o) => o.count += 1,
                None => lower.push(Outcome { state: s, count: 1 }),
            }
        }
        DiagramDetail {
            input: r.initial.to_string(),
            upper_path: r.upper_path_result.to_string(),
            lower_paths: lower,
            trials: r.trials(),
            successes: r.successes,
            success_fraction: r.success_fraction,
            max_distance: r.max_distance(),
            min_distance: r.min_distance(),
            epsilon: r.epsilon,
            required_success: r.required_success,
            metric: metric.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub state: String,
    pub program: String,
    pub device: String,
    pub upper_path: String,
    pub success_fraction: f64,
    pub max_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationDetail {
    pub theory: String,
    pub validity: String,
    pub cells: usize,
    pub passed_cells: usize,
    pub coverage: usize,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeDetail {
    pub input: String,
    pub machine_input: String,
    pub prepared: String,
    pub final_physical: String,
    pub output: String,
    pub expected: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFailureDetail {
    pub input: String,
    pub via_upper: String,
    pub via_lower: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDetail {
    pub relation: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<LayerFailureDetail>,
}

impl From<&LayerReport> for LayerDetail {
    fn from(r: &LayerReport) -> Self {
        LayerDetail {
            relation: r.relation.clone(),
            passed: r.passed,
            checked: r.checked,
            failures: r
                .failures
                .iter()
                .map(|f| LayerFailureDetail {
                    input: f.input.to_string(),
                    via_upper: f.via_upper.to_string(),
                    via_lower: f.via_lower.to_string(),
                    distance: f.distance,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceFailure {
    pub bottom_state: String,
    pub success_fraction: f64,
    pub max_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackDetail {
    pub stack: String,
    pub layers: Vec<LayerDetail>,
    pub layers_passed: bool,
    pub device_checks: usize,
    pub device_failures: Vec<DeviceFailure>,
    pub device_passed: bool,
}

/// A map written as `(input, image)` pairs.
pub type Pairs = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub left_representation: Option<Pairs>,
    pub right_representation: Option<Pairs>,
    pub left_dynamics: Option<Pairs>,
    pub right_dynamics: Option<Pairs>,
}

fn pairs(t: &Table) -> Pairs {
    t.entries().iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

impl From<&FactorizationWitness> for Witness {
    fn from(w: &FactorizationWitness) -> Self {
        Witness {
            left_representation: w.representation.as_ref().map(|(l, _)| pairs(l)),
            right_representation: w.representation.as_ref().map(|(_, r)| pairs(r)),
            left_dynamics: w.dynamics.as_ref().map(|(l, _)| pairs(l)),
            right_dynamics: w.dynamics.as_ref().map(|(_, r)| pairs(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationDetail {
    pub joint: String,
    pub provenance: String,
    pub class: String,
    /// Human-facing label; the classification is of representational composition.
    pub label: String,
    pub representation_factors: bool,
    pub dynamics_factors: bool,
    pub witness: Witness,
    pub expected: Option<String>,
    pub oracle_class: Option<String>,
    pub oracle_agrees: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CheckDetail {
    Commutation(DiagramDetail),
    History(DiagramDetail),
    Validation(ValidationDetail),
    Compute(ComputeDetail),
    Layer(LayerDetail),
    Stack(StackDetail),
    Classification(ClassificationDetail),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: String,
    pub status: Status,
    pub error: Option<String>,
    pub detail: Option<CheckDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    pub overall: Status,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: String,
    pub scenario: String,
    pub seed: u64,
    pub filter: Option<String>,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Command-line style overrides applied to every selected check.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: TrialSeed,
    pub filter: Option<String>,
    pub epsilon: Option<f64>,
    pub trials: Option<usize>,
}

/// Runs the checks whose names match `filter` (a regular expression), in
/// declaration order. Check `i` draws from `seed.derive(i)` whatever the filter.
pub fn run_checks(bundle: &ScenarioBundle, seed: TrialSeed, filter: Option<&str>) -> Result<RunReport> {
    run_checks_with(
        bundle,
        &RunOptions {
            seed,
            filter: filter.map(str::to_owned),
            ..RunOptions::default()
        },
    )
}

pub fn run_checks_with(bundle: &ScenarioBundle, opts: &RunOptions) -> Result<RunReport> {
    let pattern = match &opts.filter {
        Some(f) => Some(Regex::new(f).map_err(|e| Error::InvalidDeclaration {
            id: f.clone(),
            reason: format!("bad filter pattern: {e}"),
        })?),
        None => None,
    };
    let mut checks = Vec::new();
    for (i, decl) in bundle.checks.iter().enumerate() {
        if pattern.as_ref().is_some_and(|p| !p.is_match(&decl.name)) {
            continue;
        }
        let seed = opts.seed.derive(i as u64);
        let result = match run_one(bundle, decl, opts, seed) {
            Ok((passed, detail)) => CheckResult {
                name: decl.name.clone(),
                kind: decl.kind.name().to_owned(),
                status: if passed { Status::Pass } else { Status::Fail },
                error: None,
                detail: Some(detail),
            },
            Err(e) => CheckResult {
                name: decl.name.clone(),
                kind: decl.kind.name().to_owned(),
                status: Status::Error,
                error: Some(e.to_string()),
                detail: None,
            },
        };
        checks.push(result);
    }
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let (passed, failed, errored) = (count(Status::Pass), count(Status::Fail), count(Status::Error));
    let (overall, exit_code) = if errored > 0 {
        (Status::Error, 2)
    } else if failed > 0 {
        (Status::Fail, 1)
    } else {
        (Status::Pass, 0)
    };
    Ok(RunReport {
        format_version: REPORT_FORMAT_VERSION.into(),
        scenario: bundle.name.clone(),
        seed: opts.seed.0,
        filter: opts.filter.clone(),
        summary: Summary {
            total: checks.len(),
            passed,
            failed,
            errored,
            overall,
            exit_code,
        },
        checks,
    })
}

fn adjust(params: &CheckParams, opts: &RunOptions) -> CheckParams {
    let mut p = *params;
    if let Some(e) = opts.epsilon {
        p.epsilon = e;
    }
    if let Some(t) = opts.trials {
        p.trials = t;
    }
    p
}

fn bad_input(id: &str, reason: String) -> Error {
    Error::InvalidDeclaration { id: id.to_owned(), reason }
}

fn validated(theory: &Theory, seed: TrialSeed) -> Result<Theory> {
    let (t, report) = validate_theory(theory, &CheckParams::default(), seed)?;
    if report.all_passed {
        Ok(t)
    } else {
        Err(Error::TheoryNotValidated {
            theory: theory.id().to_owned(),
        })
    }
}

fn diagram<'b>(
    bundle: &'b ScenarioBundle,
    theory: &str,
    program: &str,
    device: &str,
) -> Result<(&'b Theory, &'b crate::relations::Prediction)> {
    let t = bundle.theory(theory)?;
    let prediction = t
        .predictions()
        .iter()
        .find(|p| p.abstract_dynamics.id() == program && p.physical_dynamics.id() == device)
        .ok_or_else(|| Error::UnknownPrediction {
            theory: theory.to_owned(),
            program: program.to_owned(),
            device: device.to_owned(),
        })?;
    Ok((t, prediction))
}

fn run_one(bundle: &ScenarioBundle, decl: &CheckDecl, opts: &RunOptions, seed: TrialSeed) -> Result<(bool, CheckDetail)> {
    match &decl.kind {
        CheckKind::Commutation {
            theory,
            program,
            device,
            input,
            params,
        } => {
            let (t, prediction) = diagram(bundle, theory, program, device)?;
            let params = adjust(params, opts);
            let p = state_from_json(t.representation().domain(), input).map_err(|e| bad_input(&decl.name, e))?;
            let r = check_commutation(&DiagramSpec::new(t, prediction, params), &p, seed)?;
            Ok((r.passed, CheckDetail::Commutation(DiagramDetail::new(&r, params.metric.name()))))
        }
        CheckKind::History {
            theory,
            program,
            device,
            input,
            physical_metric,
            params,
        } => {
            let (t, prediction) = diagram(bundle, theory, program, device)?;
            let params = adjust(params, opts);
            let m = state_from_json(t.representation().codomain(), input).map_err(|e| bad_input(&decl.name, e))?;
            let r = check_history(&DiagramSpec::new(t, prediction, params), &m, *physical_metric, seed)?;
            Ok((r.passed, CheckDetail::History(DiagramDetail::new(&r, physical_metric.name()))))
        }
        CheckKind::ValidateTheory { theory, params } => {
            let t = bundle.theory(theory)?;
            let (validated, report) = validate_theory(t, &adjust(params, opts), seed)?;
            let failures: Vec<_> = report
                .failures()
                .map(|c| CellFailure {
                    state: c.state.to_string(),
                    program: c.program.clone(),
                    device: c.device.clone(),
                    upper_path: c.report.upper_path_result.to_string(),
                    success_fraction: c.report.success_fraction,
                    max_distance: c.report.max_distance(),
                })
                .collect();
            let detail = ValidationDetail {
                theory: theory.clone(),
                validity: validated.validity().label().to_owned(),
                cells: report.cells.len(),
                passed_cells: report.cells.len() - failures.len(),
                coverage: report.coverage,
                failures,
            };
            Ok((report.all_passed, CheckDetail::Validation(detail)))
        }
        CheckKind::Compute {
            theory,
            program,
            device,
            input,
            embeddings,
            expected,
        } => {
            let (t, prediction) = diagram(bundle, theory, program, device)?;
            let codomain = t.representation().codomain();
            let problem = match embeddings.first() {
                Some(e) => bundle.embedding(e)?.problem_space(),
                None => codomain,
            };
            let given = state_from_json(problem, input).map_err(|e| bad_input(&decl.name, e))?;
            let mut machine_input = given.clone();
            for e in embeddings {
                machine_input = embed_problem(bundle.embedding(e)?, &machine_input)?;
            }
            let expected = match expected {
                Some(x) => Some(state_from_json(codomain, x).map_err(|e| bad_input(&decl.name, e))?),
                None => None,
            };
            let t = validated(t, seed)?;
            let result = run_compute_cycle(&t, &machine_input, program, &prediction.physical_dynamics, seed.derive(u64::MAX))?;
            let passed = expected.as_ref().is_none_or(|x| *x == result.output);
            let detail = ComputeDetail {
                input: given.to_string(),
                machine_input: machine_input.to_string(),
                prepared: result.prepared.to_string(),
                final_physical: result.final_physical.to_string(),
                output: result.output.to_string(),
                expected: expected.map(|x| x.to_string()),
            };
            Ok((passed, CheckDetail::Compute(detail)))
        }
        CheckKind::Layer {
            stack,
            relation,
            epsilon,
            metric,
        } => {
            let s = bundle.stack(stack)?;
            let rel = s
                .simulations()
                .iter()
                .find(|r| r.id() == relation)
                .ok_or_else(|| bad_input(&decl.name, format!("stack `{stack}` has no relation `{relation}`")))?;
            let r = check_layer(rel, opts.epsilon.unwrap_or(*epsilon), *metric)?;
            Ok((r.passed, CheckDetail::Layer(LayerDetail::from(&r))))
        }
        CheckKind::Stack { stack, params } => {
            let s = bundle.stack(stack)?;
            let r = check_stack_to_device(s, &adjust(params, opts), seed, Strictness::Lenient)?;
            let detail = StackDetail {
                stack: stack.clone(),
                layers: r.layer_reports.iter().map(LayerDetail::from).collect(),
                layers_passed: r.layers_passed,
                device_checks: r.device_checks.len(),
                device_failures: r
                    .device_checks
                    .iter()
                    .filter(|c| !c.report.passed)
                    .map(|c| DeviceFailure {
                        bottom_state: c.bottom_state.to_string(),
                        success_fraction: c.report.success_fraction,
                        max_distance: c.report.max_distance(),
                    })
                    .collect(),
                device_passed: r.device_passed,
            };
            Ok((r.passed, CheckDetail::Stack(detail)))
        }
        CheckKind::Classify { joint, expected, oracle } => {
            let decl_j = bundle.composition(joint)?;
            let mut theories = IndexMap::new();
            if !matches!(decl_j.mode, ComposeMode::Joint { .. }) {
                for (k, c) in [&decl_j.left, &decl_j.right].into_iter().enumerate() {
                    if !theories.contains_key(&c.theory) {
                        let t = validated(bundle.theory(&c.theory)?, seed.derive(k as u64))?;
                        theories.insert(c.theory.clone(), t);
                    }
                }
            }
            let j = bundle.resolve_joint(joint, &theories)?;
            let c = classify(&j)?;
            let oracle_class = if *oracle { Some(brute_force_classify(&j)?.class) } else { None };
            let agrees = oracle_class.map(|o| o == c.class);
            let passed = expected.is_none_or(|x| x == c.class) && agrees != Some(false);
            let detail = ClassificationDetail {
                joint: joint.clone(),
                provenance: j.provenance().as_str().to_owned(),
                class: c.class.to_string(),
                label: format!("representational {}", c.class),
                representation_factors: c.witness.representation.is_some(),
                dynamics_factors: c.witness.dynamics.is_some(),
                witness: Witness::from(&c.witness),
                expected: expected.map(|x| x.to_string()),
                oracle_class: oracle_class.map(|x| x.to_string()),
                oracle_agrees: agrees,
            };
            Ok((passed, CheckDetail::Classification(detail)))
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl CheckDetail {
    /// One-line human summary.
    pub fn summary(&self) -> String {
        match self {
            CheckDetail::Commutation(d) | CheckDetail::History(d) => format!(
                "{}/{} trials within eps={} ({} metric), success {} (required {}), max distance {}; upper {}",
                d.successes,
                d.trials,
                fmt_num(d.epsilon),
                d.metric,
                fmt_num(d.success_fraction),
                fmt_num(d.required_success),
                fmt_num(d.max_distance),
                d.upper_path
            ),
            CheckDetail::Validation(d) => format!(
                "theory {} is {}: {}/{} diagrams commute",
                d.theory, d.validity, d.passed_cells, d.cells
            ),
            CheckDetail::Compute(d) => {
                let mut s = format!("{} -> {}", d.input, d.output);
                if d.machine_input != d.input {
                    s = format!("{} (machine input {}) -> {}", d.input, d.machine_input, d.output);
                }
                if let Some(x) = &d.expected {
                    s.push_str(&format!(", expected {x}"));
                }
                s
            }
            CheckDetail::Layer(d) => format!(
                "{}: {} of {} states fail to simulate",
                d.relation,
                d.failures.len(),
                d.checked
            ),
            CheckDetail::Stack(d) => format!(
                "{} layer relations ({} failing), {} device diagrams ({} failing)",
                d.layers.len(),
                d.layers.iter().filter(|l| !l.passed).count(),
                d.device_checks,
                d.device_failures.len()
            ),
            CheckDetail::Classification(d) => {
                let mut s = format!("{} ({})", d.label, d.provenance);
                if let Some(x) = &d.expected {
                    s.push_str(&format!(", expected {x}"));
                }
                if let Some(o) = &d.oracle_class {
                    s.push_str(&format!(", oracle {o}"));
                }
                s
            }
        }
    }
}

/// Plain-text rendering of a report, one line per check plus a summary.
pub fn render_text(report: &RunReport) -> String {
    let mut out = format!("scenario {} (seed {})\n", report.scenario, report.seed);
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &report.checks {
        let info = match (&c.detail, &c.error) {
            (Some(d), _) => d.summary(),
            (None, Some(e)) => e.clone(),
            (None, None) => String::new(),
        };
        out.push_str(&format!(
            "{:<5} {:<width$}  {:<15}  {}\n",
            c.status.as_str().to_uppercase(),
            c.name,
            c.kind,
            info
        ));
    }
    let s = &report.summary;
    out.push_str(&format!(
        "{} passed, {} failed, {} errored: {} (exit {})\n",
        s.passed,
        s.failed,
        s.errored,
        s.overall.as_str(),
        s.exit_code
    ));
    out
}
