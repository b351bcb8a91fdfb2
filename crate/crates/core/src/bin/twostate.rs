use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use twostate::error::Error;
use twostate::experiments::{self, ChannelChoice, ExperimentOptions, CATALOG};
use twostate::measure::Observable;
use twostate::report::{Format, Mode, ResultDoc};
use twostate::scenario::{self, OpSpec, ScenarioError};
use twostate::states::BackwardState;
use twostate::timeline;

const EXIT_VALIDATION: u8 = 2;
const EXIT_EMPTY: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

/// Pre- and post-selected quantum systems: scenarios and built-in experiments.
#[derive(Parser)]
#[command(name = "twostate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a JSON scenario file.
    Run(RunArgs),
    /// Run a built-in experiment by name.
    Experiment(ExperimentArgs),
    /// List the built-in experiments.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Table,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Table => Format::Table,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Enumerate every branch (the default).
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    /// Monte Carlo with this many shots instead of exact enumeration.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long, env = "TWOSTATE_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Args)]
struct ExperimentArgs {
    name: String,
    /// Victor's observable (name or JSON matrix).
    #[arg(long = "A", default_value = "sigma_z")]
    a_observable: String,
    /// Victor's post-selected eigenvalue.
    #[arg(long = "a", default_value = "+1", allow_hyphen_values = true)]
    a_value: f64,
    /// Victoria's observable (name or JSON matrix).
    #[arg(long = "B", default_value = "sigma_z")]
    b_observable: String,
    /// Post-selected qubit state for `erase` and `flip` (name or JSON amplitudes).
    #[arg(long, default_value = "plus")]
    chi: String,
    /// Intermediate observable for `erase`.
    #[arg(long, default_value = "sigma_x")]
    observable: String,
    /// Candidate for `cloning-audit`: ideal-cloner, identity or random-cptp.
    #[arg(long, default_value = "ideal-cloner")]
    channel: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Kraus operators per random channel.
    #[arg(long, default_value_t = 3)]
    kraus: usize,
    #[arg(long, env = "TWOSTATE_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EmptyEnsemble { .. }
            | Error::InconsistentSelection { .. }
            | Error::NoAcceptedShots { .. } => EXIT_EMPTY,
            Error::BranchCapExceeded { .. } => EXIT_INTERNAL,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn observable(spec: &str) -> Result<Observable, Failure> {
    let parsed: OpSpec = if spec.trim_start().starts_with(['[', '{']) {
        serde_json::from_str(spec).map_err(|e| Failure::validation(format!("{spec}: {e}")))?
    } else {
        OpSpec::Named(spec.to_string())
    };
    let op = scenario::resolve_op(&parsed).map_err(Failure::validation)?;
    Ok(Observable::new(op)?)
}

fn backward(spec: &str) -> Result<BackwardState, Failure> {
    let parsed = if spec.trim_start().starts_with(['[', '{']) {
        serde_json::from_str(spec).map_err(|e| Failure::validation(format!("{spec}: {e}")))?
    } else {
        scenario::StateSpec::Named(spec.to_string())
    };
    let ket = scenario::resolve_state(&parsed).map_err(Failure::validation)?;
    Ok(BackwardState::normalize_outcome(ket)?)
}

fn run(args: RunArgs) -> Result<String, Failure> {
    let text = std::fs::read_to_string(&args.scenario).map_err(|e| {
        Failure::validation(format!("cannot read {}: {e}", args.scenario.display()))
    })?;
    let t = scenario::parse_scenario(&text).map_err(|e| match e {
        ScenarioError::Invalid(errors) => Failure::validation(
            errors
                .iter()
                .map(|e| format!("error: {e}"))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        other => Failure::validation(format!("error: {other}")),
    })?;
    let source = args.scenario.display().to_string();
    let (result, mode) = match args.shots {
        Some(shots) if !args.exact => (
            timeline::sample(&t, shots, args.seed)?,
            Mode::Sampled {
                shots,
                seed: args.seed,
            },
        ),
        _ => (timeline::enumerate(&t)?, Mode::Exact),
    };
    Ok(ResultDoc::from_run(&source, mode, result).render(args.format.into()))
}

fn experiment(args: ExperimentArgs) -> Result<String, Failure> {
    let a_observable = observable(&args.a_observable)?;
    let a_outcome = a_observable.outcome_index(args.a_value).ok_or_else(|| {
        Failure::validation(format!(
            "{} has no eigenvalue {}; eigenvalues are {:?}",
            args.a_observable,
            args.a_value,
            a_observable.eigenvalues()
        ))
    })?;
    let channel = ChannelChoice::parse(&args.channel).ok_or_else(|| {
        Failure::validation(format!(
            "unknown channel `{}`; expected ideal-cloner, identity or random-cptp",
            args.channel
        ))
    })?;
    let opts = ExperimentOptions {
        a_observable,
        a_outcome,
        b_observable: observable(&args.b_observable)?,
        chi: backward(&args.chi)?,
        intermediate: observable(&args.observable)?,
        channel,
        trials: args.trials,
        kraus_count: args.kraus,
        seed: args.seed,
    };
    let report = experiments::run_experiment(&args.name, &opts)?;
    Ok(ResultDoc::from_experiment(report).render(args.format.into()))
}

fn list() -> String {
    let width = CATALOG.iter().map(|e| e.name.len()).max().unwrap_or(0);
    CATALOG
        .iter()
        .map(|e| format!("{:<width$}  {}\n", e.name, e.summary))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Experiment(args) => experiment(args),
        Command::List => Ok(list()),
    };
    match outcome {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
