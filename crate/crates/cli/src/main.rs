use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ar_core::bundle::{CheckDecl, CheckKind, ScenarioBundle};
use ar_core::document::{emit_scenario, parse_scenario, value_to_json};
use ar_core::dynamics::TrialSeed;
use ar_core::runner::{render_text, run_checks_with, RunOptions, RunReport};
use ar_core::scenarios;
use ar_core::verification::CheckParams;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ar", version, about = "Check representation theories of physical computing devices")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Base seed for every stochastic check.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Overrides the tolerance of every selected check.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Overrides the trial count of every selected check.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Regular expression on check names.
    #[arg(long, global = true)]
    filter: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check declared in a scenario file.
    Check { file: PathBuf },
    /// Validate one theory over its whole domain.
    ValidateTheory {
        file: PathBuf,
        #[arg(long)]
        theory: String,
    },
    /// Run one compute cycle: instantiate, evolve, represent.
    Compute {
        file: PathBuf,
        #[arg(long)]
        theory: String,
        /// State literal, e.g. '("01","10")'.
        #[arg(long)]
        input: String,
        /// Program to predict; defaults to the theory's first prediction.
        #[arg(long)]
        program: Option<String>,
        /// Problem embeddings applied to the input, in order.
        #[arg(long)]
        embedding: Vec<String>,
    },
    /// Check every layer of a refinement stack and its device.
    CheckStack {
        file: PathBuf,
        #[arg(long)]
        stack: String,
    },
    /// Classify a joint system as hybrid or heterotic.
    Classify {
        file: PathBuf,
        #[arg(long)]
        joint: String,
        /// Also run the exhaustive oracle and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// Built-in example scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Re-render a saved JSON report.
    Report { file: PathBuf },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// List built-in scenarios.
    List,
    /// Print a built-in scenario as a scenario file.
    Emit { name: String },
}

fn load(path: &Path) -> Result<ScenarioBundle, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_scenario(&text).map_err(|e| format!("{}:{e}", path.display()))
}

fn single(mut bundle: ScenarioBundle, name: &str, kind: CheckKind) -> ScenarioBundle {
    bundle.checks = vec![CheckDecl {
        name: name.to_owned(),
        kind,
    }];
    bundle
}

fn compute_check(
    bundle: &ScenarioBundle,
    theory: &str,
    input: &str,
    program: Option<String>,
    embeddings: Vec<String>,
) -> Result<CheckKind, String> {
    let t = bundle.theory(theory).map_err(|e| e.to_string())?;
    let prediction = match &program {
        Some(p) => t.prediction(p),
        None => t.predictions().first(),
    }
    .ok_or_else(|| format!("theory `{theory}` has no matching prediction"))?;
    let space = match embeddings.first() {
        Some(e) => bundle.embedding(e).map_err(|e| e.to_string())?.problem_space(),
        None => t.representation().codomain(),
    };
    let state = space.parse_state(input).map_err(|e| format!("--input: {e}"))?;
    Ok(CheckKind::Compute {
        theory: theory.to_owned(),
        program: prediction.abstract_dynamics.id().to_owned(),
        device: prediction.physical_dynamics.id().to_owned(),
        input: value_to_json(state.value()),
        embeddings,
        expected: None,
    })
}

fn emit(report: &RunReport, format: Format) {
    match format {
        Format::Text => print!("{}", render_text(report)),
        Format::Json => print!("{}", report.to_json()),
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    let opts = RunOptions {
        seed: TrialSeed(cli.seed),
        filter: cli.filter.clone(),
        epsilon: cli.epsilon,
        trials: cli.trials,
    };
    let params = CheckParams::default();
    let bundle = match cli.command {
        Command::Check { file } => load(&file)?,
        Command::ValidateTheory { file, theory } => {
            let name = format!("validate-{theory}");
            single(load(&file)?, &name, CheckKind::ValidateTheory { theory, params })
        }
        Command::Compute {
            file,
            theory,
            input,
            program,
            embedding,
        } => {
            let bundle = load(&file)?;
            let kind = compute_check(&bundle, &theory, &input, program, embedding)?;
            single(bundle, "compute", kind)
        }
        Command::CheckStack { file, stack } => {
            let name = format!("stack-{stack}");
            single(load(&file)?, &name, CheckKind::Stack { stack, params })
        }
        Command::Classify { file, joint, oracle } => {
            let name = format!("classify-{joint}");
            single(
                load(&file)?,
                &name,
                CheckKind::Classify {
                    joint,
                    expected: None,
                    oracle,
                },
            )
        }
        Command::Scenarios { action } => {
            match action {
                ScenarioAction::List => {
                    for b in scenarios::registry() {
                        println!("{:<30} {}", b.name(), b.summary());
                    }
                }
                ScenarioAction::Emit { name } => {
                    let b = scenarios::builder(&name).ok_or_else(|| format!("no built-in scenario `{name}`"))?;
                    print!("{}", emit_scenario(&b.build()));
                }
            }
            return Ok(0);
        }
        Command::Report { file } => {
            let text = fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let report = RunReport::from_json(&text).map_err(|e| format!("{}: {e}", file.display()))?;
            emit(&report, cli.format);
            return Ok(report.exit_code());
        }
    };
    let report = run_checks_with(&bundle, &opts).map_err(|e| e.to_string())?;
    emit(&report, cli.format);
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
