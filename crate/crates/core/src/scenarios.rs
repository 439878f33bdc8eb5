//! Built-in example systems, each packaged as a [`ScenarioBundle`] with the
//! checks it is expected to pass.
//!
//! Builders are registered by name behind [`ScenarioBuilder`] so the CLI and
//! tests can list and select them at runtime.

use serde_json::json;

use crate::bundle::{CheckKind, ComponentRef, ComposeMode, CompositionDecl, ScenarioBundle};
use crate::composition::Class;
use crate::dynamics::{AbstractDynamics, CoordinateUpdate, Gate, Noise, PhysicalDynamics, PhysicalRule};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::refinement::{RefinementLayer, RefinementStack, SimulationRelation};
use crate::relations::{InstantiationProcedure, Prediction, RepresentationRelation, RepresentationRule, Theory};
use crate::spaces::{AbstractSpace, PhysicalSpace, PhysicalState};
use crate::table::Table;
use crate::value::{Bits, Value};
use crate::verification::{CheckParams, ProblemEmbedding};

pub trait ScenarioBuilder: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn build(&self) -> ScenarioBundle;
    /// Checks this bundle is documented to fail; empty for healthy systems.
    fn expected_failures(&self) -> &'static [&'static str] {
        &[]
    }
}

struct Adder;
struct NoisyAdder;
struct StuckAdder;
struct Stack;
struct MisdeclaredStack;
struct Swap;
struct Social;
struct Xor;

impl ScenarioBuilder for Adder {
    fn name(&self) -> &'static str {
        "voltage-adder"
    }
    fn summary(&self) -> &'static str {
        "2-bit ripple-carry adder on seven voltage lines"
    }
    fn build(&self) -> ScenarioBundle {
        build_voltage_adder(0.0).expect("valid flip probability")
    }
}

impl ScenarioBuilder for NoisyAdder {
    fn name(&self) -> &'static str {
        "voltage-adder-noisy"
    }
    fn summary(&self) -> &'static str {
        "voltage adder whose output lines flip with probability 0.1"
    }
    fn build(&self) -> ScenarioBundle {
        build_voltage_adder(0.1).expect("valid flip probability")
    }
    fn expected_failures(&self) -> &'static [&'static str] {
        &["validate-adder"]
    }
}

impl ScenarioBuilder for StuckAdder {
    fn name(&self) -> &'static str {
        "voltage-adder-stuck-at-zero"
    }
    fn summary(&self) -> &'static str {
        "voltage adder with its low output line stuck at 0 V"
    }
    fn build(&self) -> ScenarioBundle {
        build_voltage_adder_with(AdderOptions {
            flip_probability: 0.0,
            stuck_at_zero: true,
        })
        .expect("valid options")
    }
    fn expected_failures(&self) -> &'static [&'static str] {
        &["validate-adder", "commute-01-10", "history-01-10"]
    }
}

impl ScenarioBuilder for Stack {
    fn name(&self) -> &'static str {
        "refinement-stack"
    }
    fn summary(&self) -> &'static str {
        "decimal, binary and register layers refined down to the voltage adder"
    }
    fn build(&self) -> ScenarioBundle {
        build_refinement_stack()
    }
}

impl ScenarioBuilder for MisdeclaredStack {
    fn name(&self) -> &'static str {
        "refinement-stack-misdeclared"
    }
    fn summary(&self) -> &'static str {
        "refinement stack whose decimal-to-binary map swaps the codes of 1 and 2 in the first operand"
    }
    fn build(&self) -> ScenarioBundle {
        build_refinement_stack_with(true)
    }
    fn expected_failures(&self) -> &'static [&'static str] {
        &["layer-dec-bin", "stack-end-to-end"]
    }
}

impl ScenarioBuilder for Swap {
    fn name(&self) -> &'static str {
        "swap-device"
    }
    fn summary(&self) -> &'static str {
        "two labelled registers whose contents are exchanged"
    }
    fn build(&self) -> ScenarioBundle {
        build_swap_device()
    }
}

impl ScenarioBuilder for Social {
    fn name(&self) -> &'static str {
        "social-machine"
    }
    fn summary(&self) -> &'static str {
        "toy crowd-sourced galaxy classifier: a human tagger plus a vote counter"
    }
    fn build(&self) -> ScenarioBundle {
        build_social_machine()
    }
}

impl ScenarioBuilder for Xor {
    fn name(&self) -> &'static str {
        "xor-joint"
    }
    fn summary(&self) -> &'static str {
        "two 1-bit cells coupled by (a, b) -> (a xor b, b), with factorable variants"
    }
    fn build(&self) -> ScenarioBundle {
        build_xor_joint()
    }
}

static BUILDERS: [&dyn ScenarioBuilder; 8] = [
    &Adder,
    &NoisyAdder,
    &StuckAdder,
    &Stack,
    &MisdeclaredStack,
    &Swap,
    &Social,
    &Xor,
];

pub fn registry() -> &'static [&'static dyn ScenarioBuilder] {
    &BUILDERS
}

pub fn builder(name: &str) -> Option<&'static dyn ScenarioBuilder> {
    registry().iter().copied().find(|b| b.name() == name)
}

fn bits(n: u64, width: usize) -> Value {
    Value::Bits(Bits::from_u64(n, width))
}

fn tuple<const N: usize>(items: [Value; N]) -> Value {
    Value::Tuple(items.into())
}

fn items(v: &Value) -> &[Value] {
    v.as_tuple().expect("tuple value")
}

fn int(v: &Value) -> i64 {
    v.as_int().expect("integer value")
}

fn label(v: &Value) -> &str {
    match v {
        Value::Label(s) => s,
        _ => panic!("label value expected"),
    }
}

// ---------------------------------------------------------------------------
// voltage adder

const LOW: f64 = 0.0;
const HIGH: f64 = 5.0;
const THRESHOLD: f64 = 2.5;
const LINES: usize = 7;
/// Line index of the least significant output bit.
pub const LOW_OUTPUT_LINE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdderOptions {
    pub flip_probability: f64,
    /// Holds the least significant output line at 0 V after every update.
    pub stuck_at_zero: bool,
}

/// Rail voltages for a 7-bit line pattern, most significant line first.
fn rails(code: u64) -> Value {
    Value::Reals(
        (0..LINES)
            .map(|i| if code >> (LINES - 1 - i) & 1 == 1 { HIGH } else { LOW })
            .collect(),
    )
}

struct AdderParts {
    lines: PhysicalSpace,
    operand: AbstractSpace,
    registers: AbstractSpace,
    theory: Theory,
    program: AbstractDynamics,
    device: PhysicalDynamics,
}

fn adder_parts(opts: AdderOptions) -> Result<AdderParts> {
    let p = opts.flip_probability;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidDeclaration {
            id: "voltage-adder".into(),
            reason: format!("flip probability {p} is outside [0, 1]"),
        });
    }
    let lines = PhysicalSpace::real_vector("voltage-lines", vec![(LOW, HIGH); LINES])?;
    let operand = AbstractSpace::bitstring("operand", 2)?;
    let sum = AbstractSpace::bitstring("sum", 3)?;
    let registers = AbstractSpace::tuple("registers", vec![operand.clone(), operand.clone(), sum])?;
    let representation = RepresentationRelation::new(
        "voltage-threshold",
        lines.clone(),
        registers.clone(),
        RepresentationRule::Threshold {
            thresholds: vec![THRESHOLD; LINES],
            groups: vec![2, 2, 3],
        },
    )?;
    let program = AbstractDynamics::builtin("add", registers.clone(), "ripple-add", Some(2))?;

    // lines: a1 a0 b1 b0 s2 s1 s0
    let (a1, a0, b1, b0) = (Gate::Line(0), Gate::Line(1), Gate::Line(2), Gate::Line(3));
    let carry = Gate::And(vec![a0.clone(), b0.clone()]);
    let gates = CoordinateUpdate {
        threshold: THRESHOLD,
        low: LOW,
        high: HIGH,
        assignments: vec![
            (
                4,
                Gate::Or(vec![
                    Gate::And(vec![a1.clone(), b1.clone()]),
                    Gate::And(vec![carry.clone(), Gate::Xor(vec![a1.clone(), b1.clone()])]),
                ]),
            ),
            (5, Gate::Xor(vec![a1, b1, carry])),
            (6, Gate::Xor(vec![a0, b0])),
        ],
    };
    let noise = (p > 0.0).then(|| Noise::Coordinates {
        flip_probability: (0..LINES).map(|i| if i >= 4 { p } else { 0.0 }).collect(),
        thresholds: vec![THRESHOLD; LINES],
    });
    let device = if opts.stuck_at_zero {
        let circuit = PhysicalDynamics::new("adder-gates", lines.clone(), PhysicalRule::CoordinateUpdate(gates), None)?;
        let stuck = PhysicalDynamics::new(
            "stuck-low-output",
            lines.clone(),
            PhysicalRule::CoordinateUpdate(CoordinateUpdate {
                threshold: THRESHOLD,
                low: LOW,
                high: HIGH,
                assignments: vec![(LOW_OUTPUT_LINE, Gate::Const(false))],
            }),
            None,
        )?;
        PhysicalDynamics::new("adder-circuit", lines.clone(), PhysicalRule::Chain(vec![circuit, stuck]), noise)?
    } else {
        PhysicalDynamics::new("adder-circuit", lines.clone(), PhysicalRule::CoordinateUpdate(gates), noise)?
    };

    let engineering = PhysicalDynamics::identity("prepare-lines", lines.clone())?;
    let seeds = (0..1u64 << LINES)
        .map(|code| PhysicalState::new(lines.id(), rails(code)))
        .collect();
    let domain = (0..16u64)
        .map(|ab| PhysicalState::new(lines.id(), rails(ab << 3)))
        .collect();
    let theory = Theory::new(
        "adder-theory",
        representation,
        Some(InstantiationProcedure { seeds, engineering }),
        domain,
        vec![Prediction {
            abstract_dynamics: program.clone(),
            physical_dynamics: device.clone(),
        }],
    )?;
    Ok(AdderParts {
        lines,
        operand,
        registers,
        theory,
        program,
        device,
    })
}

/// Adds the adder declarations and its problem embeddings (no checks).
fn add_adder_declarations(bundle: &mut ScenarioBundle, parts: &AdderParts) -> Result<()> {
    bundle.add_physical_space(&parts.lines)?;
    bundle.add_theory(&parts.theory)?;
    let pair = AbstractSpace::tuple("operand-pair", vec![parts.operand.clone(), parts.operand.clone()])?;
    let load = ProblemEmbedding::new(
        "load-operands",
        pair.clone(),
        parts.registers.clone(),
        Table::tabulate(&pair, |v| {
            let x = items(v);
            tuple([x[0].clone(), x[1].clone(), bits(0, 3)])
        })?,
    )?;
    let digit = AbstractSpace::bounded_int("digit", 0, 3)?;
    let decimal = AbstractSpace::tuple("decimal-pair", vec![digit.clone(), digit])?;
    let encode = ProblemEmbedding::new(
        "decimal-operands",
        decimal.clone(),
        pair,
        Table::tabulate(&decimal, |v| {
            let x = items(v);
            tuple([bits(int(&x[0]) as u64, 2), bits(int(&x[1]) as u64, 2)])
        })?,
    )?;
    bundle.add_embedding(&encode)?;
    bundle.add_embedding(&load)
}

fn adder_check(parts: &AdderParts) -> (String, String, String) {
    (
        parts.theory.id().to_owned(),
        parts.program.id().to_owned(),
        parts.device.id().to_owned(),
    )
}

pub fn build_voltage_adder(flip_probability: f64) -> Result<ScenarioBundle> {
    build_voltage_adder_with(AdderOptions {
        flip_probability,
        stuck_at_zero: false,
    })
}

pub fn build_voltage_adder_with(opts: AdderOptions) -> Result<ScenarioBundle> {
    let name = match (opts.stuck_at_zero, opts.flip_probability > 0.0) {
        (true, _) => "voltage-adder-stuck-at-zero",
        (false, true) => "voltage-adder-noisy",
        (false, false) => "voltage-adder",
    };
    let parts = adder_parts(opts)?;
    let mut bundle = ScenarioBundle::new(name);
    add_adder_declarations(&mut bundle, &parts)?;
    let (theory, program, device) = adder_check(&parts);
    let commutation = |input: serde_json::Value, params: CheckParams| CheckKind::Commutation {
        theory: theory.clone(),
        program: program.clone(),
        device: device.clone(),
        input,
        params,
    };

    if opts.flip_probability > 0.0 {
        bundle.add_check(
            "validate-adder",
            CheckKind::ValidateTheory {
                theory: theory.clone(),
                params: CheckParams::default().with_trials(200, 1.0),
            },
        )?;
        bundle.add_check(
            "noisy-commute-01-10",
            commutation(json!([0.0, 5.0, 5.0, 0.0, 0.0, 0.0, 0.0]), CheckParams::default().with_trials(10_000, 0.65)),
        )?;
        return Ok(bundle);
    }

    bundle.add_check(
        "validate-adder",
        CheckKind::ValidateTheory {
            theory: theory.clone(),
            params: CheckParams::default(),
        },
    )?;
    bundle.add_check(
        "commute-01-10",
        commutation(json!([0.0, 5.0, 5.0, 0.0, 0.0, 0.0, 0.0]), CheckParams::default()),
    )?;
    bundle.add_check(
        "commute-11-11",
        commutation(json!([5.0, 5.0, 5.0, 5.0, 0.0, 0.0, 0.0]), CheckParams::default()),
    )?;
    bundle.add_check(
        "history-01-10",
        CheckKind::History {
            theory: theory.clone(),
            program: program.clone(),
            device: device.clone(),
            input: json!(["01", "10", "000"]),
            physical_metric: Metric::max_coordinate(),
            params: CheckParams::default(),
        },
    )?;
    if opts.stuck_at_zero {
        return Ok(bundle);
    }
    let compute = |input: serde_json::Value, embeddings: &[&str], expected: serde_json::Value| CheckKind::Compute {
        theory: theory.clone(),
        program: program.clone(),
        device: device.clone(),
        input,
        embeddings: embeddings.iter().map(|s| s.to_string()).collect(),
        expected: Some(expected),
    };
    bundle.add_check(
        "compute-01-10",
        compute(json!(["01", "10"]), &["load-operands"], json!(["01", "10", "011"])),
    )?;
    bundle.add_check(
        "compute-11-11",
        compute(json!(["11", "11", "000"]), &[], json!(["11", "11", "110"])),
    )?;
    bundle.add_check(
        "compute-decimal-1-2",
        compute(
            json!([1, 2]),
            &["decimal-operands", "load-operands"],
            json!(["01", "10", "011"]),
        ),
    )?;
    Ok(bundle)
}

// ---------------------------------------------------------------------------
// refinement stack

pub fn build_refinement_stack() -> ScenarioBundle {
    build_refinement_stack_with(false)
}

/// `misdeclared` swaps the binary codes of 1 and 2 in the first operand of
/// the decimal-to-binary map, which breaks that layer's simulation.
pub fn build_refinement_stack_with(misdeclared: bool) -> ScenarioBundle {
    refinement_stack(misdeclared).expect("built-in stack is well formed")
}

fn refinement_stack(misdeclared: bool) -> Result<ScenarioBundle> {
    let parts = adder_parts(AdderOptions::default())?;
    let name = if misdeclared {
        "refinement-stack-misdeclared"
    } else {
        "refinement-stack"
    };
    let mut bundle = ScenarioBundle::new(name);
    add_adder_declarations(&mut bundle, &parts)?;

    let digit = AbstractSpace::bounded_int("digit", 0, 3)?;
    let total = AbstractSpace::bounded_int("decimal-total", 0, 6)?;
    let decimal = AbstractSpace::tuple("decimal-registers", vec![digit.clone(), digit, total])?;
    let dec_add = AbstractDynamics::table("dec-add", decimal.clone(), |v| {
        let x = items(v);
        tuple([x[0].clone(), x[1].clone(), Value::Int(int(&x[0]) + int(&x[1]))])
    })?;
    let binary_space = AbstractSpace::tuple(
        "binary-registers",
        parts.registers.components().expect("tuple").to_vec(),
    )?;
    let bin_add = AbstractDynamics::builtin("binary-add", binary_space.clone(), "ripple-add", Some(2))?;

    let dec = RefinementLayer::new("dec", dec_add);
    let bin = RefinementLayer::new("bin", bin_add);
    let asm = RefinementLayer::new("asm", parts.program.clone());

    let first_code = |n: i64| -> u64 {
        match (misdeclared, n) {
            (true, 1) => 2,
            (true, 2) => 1,
            _ => n as u64,
        }
    };
    let s_ab = SimulationRelation::new(
        "dec-to-bin",
        dec.clone(),
        bin.clone(),
        Table::tabulate(&decimal, |v| {
            let x = items(v);
            tuple([
                bits(first_code(int(&x[0])), 2),
                bits(int(&x[1]) as u64, 2),
                bits(int(&x[2]) as u64, 3),
            ])
        })?,
    )?;
    let s_bc = SimulationRelation::new(
        "bin-to-asm",
        bin.clone(),
        asm.clone(),
        Table::tabulate(&binary_space, Value::clone)?,
    )?;
    let stack = RefinementStack::new(
        "adder-stack",
        vec![dec, bin, asm],
        vec![s_ab, s_bc],
        parts.theory.clone(),
        parts.device.clone(),
    )?;
    bundle.add_stack(&stack)?;

    bundle.add_check(
        "validate-adder",
        CheckKind::ValidateTheory {
            theory: parts.theory.id().to_owned(),
            params: CheckParams::default(),
        },
    )?;
    for (name, relation) in [("layer-dec-bin", "dec-to-bin"), ("layer-bin-asm", "bin-to-asm")] {
        bundle.add_check(
            name,
            CheckKind::Layer {
                stack: stack.id().to_owned(),
                relation: relation.to_owned(),
                epsilon: 0.0,
                metric: Metric::discrete(),
            },
        )?;
    }
    bundle.add_check(
        "stack-end-to-end",
        CheckKind::Stack {
            stack: stack.id().to_owned(),
            params: CheckParams::default(),
        },
    )?;
    Ok(bundle)
}

// ---------------------------------------------------------------------------
// swap device

pub fn build_swap_device() -> ScenarioBundle {
    swap_device().expect("built-in swap device is well formed")
}

fn swap_device() -> Result<ScenarioBundle> {
    let cell = PhysicalSpace::labels("charge-register", (0..10).map(|k| format!("q{k}")))?;
    let pair = PhysicalSpace::tuple("register-pair", vec![cell.clone(), cell.clone()])?;
    let digit = AbstractSpace::bounded_int("decimal-digit", 0, 9)?;
    let read = RepresentationRelation::lookup("read-register", cell, digit, |v| {
        Value::Int(label(v)[1..].parse().expect("q<digit>"))
    })?;
    let read_pair = RepresentationRelation::tuple_wise("read-pair", "register-pair", "digit-pair", vec![read.clone(), read])?;
    let program = AbstractDynamics::builtin("swap", read_pair.codomain().clone(), "swap-pair", None)?;
    let exchange = PhysicalDynamics::table("exchange", pair.clone(), |v| {
        let x = items(v);
        tuple([x[1].clone(), x[0].clone()])
    })?;
    let all = pair.enumerate()?;
    let theory = Theory::new(
        "swap-theory",
        read_pair,
        Some(InstantiationProcedure {
            seeds: all.clone(),
            engineering: PhysicalDynamics::identity("load-registers", pair)?,
        }),
        all,
        vec![Prediction {
            abstract_dynamics: program,
            physical_dynamics: exchange,
        }],
    )?;
    let mut bundle = ScenarioBundle::new("swap-device");
    bundle.add_theory(&theory)?;
    bundle.add_check(
        "validate-swap",
        CheckKind::ValidateTheory {
            theory: "swap-theory".into(),
            params: CheckParams::default(),
        },
    )?;
    for (name, input, expected) in [
        ("compute-7-9", json!([7, 9]), json!([9, 7])),
        ("compute-4-4", json!([4, 4]), json!([4, 4])),
    ] {
        bundle.add_check(
            name,
            CheckKind::Compute {
                theory: "swap-theory".into(),
                program: "swap".into(),
                device: "exchange".into(),
                input,
                embeddings: Vec::new(),
                expected: Some(expected),
            },
        )?;
    }
    Ok(bundle)
}

// ---------------------------------------------------------------------------
// social machine

/// Shape tag a toy human assigns to each of the six pictures.
pub const PICTURE_TAGS: [&str; 6] = ["round", "square", "irregular", "round", "irregular", "square"];

/// Galaxy class settled for each shape tag once enough votes are in.
pub fn galaxy_class(tag: &str) -> &'static str {
    if tag == "round" {
        "elliptical"
    } else {
        "spiral"
    }
}

/// Catalogue entries below this tally are still pending votes.
pub const VOTES_TO_SETTLE: i64 = 2;

fn finite_theory(
    id: &str,
    representation: RepresentationRelation,
    program: AbstractDynamics,
    device: PhysicalDynamics,
    engineering: &str,
) -> Result<Theory> {
    let states = representation.domain().enumerate()?;
    let engineering = PhysicalDynamics::identity(engineering, representation.domain().clone())?;
    Theory::new(
        id,
        representation,
        Some(InstantiationProcedure {
            seeds: states.clone(),
            engineering,
        }),
        states,
        vec![Prediction {
            abstract_dynamics: program,
            physical_dynamics: device,
        }],
    )
}

pub fn build_social_machine() -> ScenarioBundle {
    social_machine().expect("built-in social machine is well formed")
}

fn social_machine() -> Result<ScenarioBundle> {
    let percepts = PhysicalSpace::labels("percepts", (0..PICTURE_TAGS.len()).map(|k| format!("pic-{k}")))?;
    let tags = AbstractSpace::labels("shape-tags", ["round", "square", "irregular"])?;
    let human_reading = RepresentationRelation::lookup("human-reading", percepts.clone(), tags.clone(), |v| {
        let k: usize = label(v)["pic-".len()..].parse().expect("pic-<k>");
        Value::label(PICTURE_TAGS[k])
    })?;
    let glance = AbstractDynamics::builtin("human-glance", tags, "identity", None)?;
    let perceive = PhysicalDynamics::identity("human-perceive", percepts.clone())?;
    let human = finite_theory("human-theory", human_reading.clone(), glance, perceive, "show-picture")?;

    let memory = PhysicalSpace::labels("tally-memory", (0..4).map(|k| format!("tally-{k}")))?;
    let counts = AbstractSpace::bounded_int("vote-count", 0, 3)?;
    let tally_of = |v: &Value| -> i64 { label(v)["tally-".len()..].parse().expect("tally-<k>") };
    let machine_reading =
        RepresentationRelation::lookup("machine-reading", memory.clone(), counts.clone(), |v| Value::Int(tally_of(v)))?;
    let count = AbstractDynamics::table("count-vote", counts, |v| Value::Int((int(v) + 1).min(3)))?;
    let increment = PhysicalDynamics::table("increment-tally", memory.clone(), |v| {
        Value::label(format!("tally-{}", (tally_of(v) + 1).min(3)))
    })?;
    let machine = finite_theory("machine-theory", machine_reading, count, increment, "reset-tally")?;

    let zoo = PhysicalSpace::tuple("zoo-state", vec![percepts, memory])?;
    let catalogue = AbstractSpace::labels(
        "catalogue",
        ["round-pending", "square-pending", "irregular-pending", "elliptical", "spiral"],
    )?;
    let zoo_reading = RepresentationRelation::lookup("zoo-reading", zoo, catalogue.clone(), |v| {
        let x = items(v);
        let k: usize = label(&x[0])["pic-".len()..].parse().expect("pic-<k>");
        let tag = PICTURE_TAGS[k];
        if tally_of(&x[1]) < VOTES_TO_SETTLE {
            Value::label(format!("{tag}-pending"))
        } else {
            Value::label(galaxy_class(tag))
        }
    })?;
    let settle = AbstractDynamics::table("settle-class", catalogue, |v| {
        let l = label(v);
        match l.strip_suffix("-pending") {
            Some(tag) => Value::label(galaxy_class(tag)),
            None => v.clone(),
        }
    })?;

    let mut bundle = ScenarioBundle::new("social-machine");
    bundle.add_theory(&human)?;
    bundle.add_theory(&machine)?;
    bundle.add_relation(&zoo_reading)?;
    bundle.add_abstract_dynamics(&settle)?;
    let parts = || {
        (
            ComponentRef {
                theory: "human-theory".into(),
                program: "human-glance".into(),
            },
            ComponentRef {
                theory: "machine-theory".into(),
                program: "count-vote".into(),
            },
        )
    };
    for (id, mode) in [
        (
            "galaxy-zoo",
            ComposeMode::Joint {
                representation: "zoo-reading".into(),
                dynamics: "settle-class".into(),
            },
        ),
        ("glance-and-count", ComposeMode::Parallel),
        ("glance-then-count", ComposeMode::Sequential),
    ] {
        let (left, right) = parts();
        bundle.add_composition(CompositionDecl {
            id: id.into(),
            left,
            right,
            mode,
        })?;
    }
    for theory in ["human-theory", "machine-theory"] {
        bundle.add_check(
            format!("validate-{}", theory.trim_end_matches("-theory")),
            CheckKind::ValidateTheory {
                theory: theory.into(),
                params: CheckParams::default(),
            },
        )?;
    }
    for (joint, expected) in [
        ("galaxy-zoo", Class::Heterotic),
        ("glance-and-count", Class::Hybrid),
        ("glance-then-count", Class::Hybrid),
    ] {
        bundle.add_check(
            format!("classify-{joint}"),
            CheckKind::Classify {
                joint: joint.into(),
                expected: Some(expected),
                oracle: true,
            },
        )?;
    }
    Ok(bundle)
}

// ---------------------------------------------------------------------------
// xor joint

pub fn build_xor_joint() -> ScenarioBundle {
    xor_joint().expect("built-in xor joint is well formed")
}

fn xor_joint() -> Result<ScenarioBundle> {
    let cell = PhysicalSpace::labels("cell", ["low", "high"])?;
    let bit = AbstractSpace::bitstring("bit", 1)?;
    let read = RepresentationRelation::lookup("read-cell", cell.clone(), bit.clone(), |v| {
        bits(u64::from(label(v) == "high"), 1)
    })?;
    let hold = AbstractDynamics::builtin("hold", bit, "identity", None)?;
    let rest = PhysicalDynamics::identity("rest", cell)?;
    let theory = finite_theory("cell-theory", read.clone(), hold, rest, "set-cell")?;

    let joint = RepresentationRelation::tuple_wise("read-pair", "cell-pair", "bit-pair", vec![read.clone(), read])?;
    let pair = joint.codomain().clone();
    let xor = AbstractDynamics::builtin("xor-couple", pair.clone(), "xor", None)?;
    let negate = AbstractDynamics::table("negate-first", pair.clone(), |v| {
        let x = items(v);
        let a = x[0].as_bits().expect("bit").to_u64();
        tuple([bits(1 - a, 1), x[1].clone()])
    })?;
    let both = AbstractDynamics::builtin("hold-both", pair, "identity", None)?;

    let mut bundle = ScenarioBundle::new("xor-joint");
    bundle.add_theory(&theory)?;
    bundle.add_relation(&joint)?;
    let cell_ref = || ComponentRef {
        theory: "cell-theory".into(),
        program: "hold".into(),
    };
    let mut declared = Vec::new();
    for (id, d) in [("xor-joint", &xor), ("negate-first-joint", &negate), ("identity-joint", &both)] {
        bundle.add_abstract_dynamics(d)?;
        declared.push((
            id,
            ComposeMode::Joint {
                representation: "read-pair".into(),
                dynamics: d.id().into(),
            },
        ));
    }
    declared.push(("cell-pair-parallel", ComposeMode::Parallel));
    for (id, mode) in declared {
        bundle.add_composition(CompositionDecl {
            id: id.into(),
            left: cell_ref(),
            right: cell_ref(),
            mode,
        })?;
    }
    bundle.add_check(
        "validate-cell",
        CheckKind::ValidateTheory {
            theory: "cell-theory".into(),
            params: CheckParams::default(),
        },
    )?;
    for (joint, expected) in [
        ("xor-joint", Class::Heterotic),
        ("negate-first-joint", Class::Hybrid),
        ("identity-joint", Class::Hybrid),
        ("cell-pair-parallel", Class::Hybrid),
    ] {
        bundle.add_check(
            format!("classify-{joint}"),
            CheckKind::Classify {
                joint: joint.into(),
                expected: Some(expected),
                oracle: true,
            },
        )?;
    }
    Ok(bundle)
}
