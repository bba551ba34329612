use barrier_sta::experiments::{self, CompareError, RunError};
use barrier_sta::scenario::{self, Scenario, ScenarioError, PRESETS};
use barrier_sta::sim::SimError;
use barrier_sta::ParamError;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: u8 = 1;
const BLOWUP: u8 = 2;
const IO: u8 = 3;

/// Simulate barrier-function super-twisting controllers from scenario files.
#[derive(Debug, Parser)]
#[command(name = "barrier-sta", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory and metrics CSVs.
    Run {
        /// Scenario file, or the name of a bundled preset.
        #[arg(long, value_name = "PATH|PRESET")]
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run several scenarios and print a summary table.
    Compare {
        /// Scenario files or preset names; give the flag once per scenario.
        #[arg(long, value_name = "PATH|PRESET", required = true)]
        scenario: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Bundled presets.
    Presets {
        #[command(subcommand)]
        command: PresetsCommand,
    },
}

#[derive(Debug, Subcommand)]
enum PresetsCommand {
    /// List preset names with their controller and disturbance.
    List,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the integration step.
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// Override the final time.
    #[arg(long = "t-end", allow_negative_numbers = true)]
    t_end: Option<f64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, err: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Io { .. } => IO,
            _ => USAGE,
        };
        Failure::new(code, e)
    }
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Self {
        Failure::new(USAGE, e)
    }
}

fn run_error_code(e: &RunError) -> u8 {
    match e {
        RunError::Sim(SimError::NumericalBlowup { .. }) => BLOWUP,
        RunError::Sim(SimError::InvalidScenario(_)) => USAGE,
        RunError::Io { .. } => IO,
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure::new(run_error_code(&e), e)
    }
}

impl From<CompareError> for Failure {
    fn from(e: CompareError) -> Self {
        let code = match e {
            CompareError::TooFewScenarios(_) => USAGE,
            CompareError::Io { .. } => IO,
        };
        Failure::new(code, e)
    }
}

fn load(spec: &str, common: &Common) -> Result<Scenario, Failure> {
    let sc = scenario::resolve_scenario(spec)?;
    Ok(sc.with_overrides(common.dt, common.t_end)?)
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { scenario, common } => {
            let sc = load(&scenario, &common)?;
            let out = experiments::run(&sc, &common.out)?;
            let m = &out.metrics;
            println!("{}", out.trajectory.display());
            println!("{}", out.metrics_path.display());
            println!(
                "{}: t_bar = {}, sup|s| after t_bar = {}, sat_count = {}, converged = {}",
                sc.name,
                m.t_bar.map_or("-".into(), |t| format!("{t:.5}")),
                m.sup_s_post.map_or("-".into(), |s| format!("{s:.4e}")),
                m.sat_count,
                m.converged
            );
            Ok(())
        }
        Command::Compare { scenario, common } => {
            if scenario.len() < 2 {
                return Err(CompareError::TooFewScenarios(scenario.len()).into());
            }
            let scenarios = scenario
                .iter()
                .map(|s| load(s, &common))
                .collect::<Result<Vec<_>, _>>()?;
            let cmp = experiments::compare(&scenarios, &common.out)?;
            print!("{}", cmp.table());
            println!("{}", cmp.csv_path.display());
            match cmp.first_error() {
                Some(e) => Err(Failure::new(run_error_code(e), "some scenarios failed")),
                None => Ok(()),
            }
        }
        Command::Presets {
            command: PresetsCommand::List,
        } => {
            for (name, _) in PRESETS {
                let sc = scenario::preset(name)?;
                println!("{name:<12} {:<9} {}", sc.controller.kind(), sc.disturbance.name());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
