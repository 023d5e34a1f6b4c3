//! `tbopt`: simulate and optimise tuberculosis control models from the
//! command line, writing CSV and JSON for external plotting.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tbopt::pmp::DEFAULT_SEED;

use crate::commands::{ControlMode, Overrides, VerifyOptions, SCENARIO_DIR_ENV};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "tbopt",
    version,
    about = "Optimal control of tuberculosis transmission models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file, name in the scenario directory, or built-in name.
    scenario: String,

    /// Directory for output files.
    #[arg(short, long, default_value = "out")]
    out_dir: PathBuf,

    /// Override the number of grid steps.
    #[arg(long)]
    n_steps: Option<usize>,

    /// Override the sweep convergence tolerance.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Directory searched for scenario names.
    #[arg(long, env = SCENARIO_DIR_ENV)]
    scenario_dir: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> CliResult<tbopt::ScenarioConfig> {
        commands::resolve_scenario(
            &self.scenario,
            self.scenario_dir.as_deref(),
            Overrides {
                n_steps: self.n_steps,
                tolerance: self.tolerance,
            },
        )
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the model catalog.
    ListModels,

    /// Integrate the state equations under a fixed control.
    Simulate {
        #[command(flatten)]
        run: RunArgs,

        /// `off`, `constant:<v>[,<v>...]` or `file:<csv>`.
        #[arg(long, default_value = "off")]
        control: ControlMode,
    },

    /// Solve for the optimal control by forward-backward sweep.
    Optimize {
        #[command(flatten)]
        run: RunArgs,
    },

    /// Optimise every point of the scenario's sweep.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },

    /// Check costate equations, control laws and reduction identities.
    Verify {
        /// Model slug or `all`.
        #[arg(default_value = "all")]
        model: String,

        /// Random points for the costate check.
        #[arg(long, default_value_t = 200)]
        samples: usize,

        /// Random points for the control-law check.
        #[arg(long, default_value_t = 20)]
        stationarity_samples: usize,

        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,

        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,

        /// Corrupt the costate flow to exercise the failure path.
        #[arg(long, hide = true)]
        perturb_adjoint: bool,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::ListModels => {
            print!("{}", commands::list_models());
            Ok(())
        }
        Command::Simulate { run, control } => {
            let s = run.load()?;
            commands::cmd_simulate(&s, &control, &run.out_dir)?;
            println!("wrote {}", run.out_dir.display());
            Ok(())
        }
        Command::Optimize { run } => {
            let s = run.load()?;
            let o = commands::cmd_optimize(&s, &run.out_dir)?;
            println!(
                "converged in {} iterations, cost {:.6}; wrote {}",
                o.solution.report.iterations,
                o.solution.cost,
                run.out_dir.display()
            );
            Ok(())
        }
        Command::Sweep { run } => {
            let s = run.load()?;
            let failures = commands::cmd_sweep(&s, &run.out_dir)?;
            println!("wrote {}", run.out_dir.join("sweep_summary.csv").display());
            if failures > 0 {
                return Err(CliError::NotConverged(format!(
                    "{failures} sweep point(s) failed"
                )));
            }
            Ok(())
        }
        Command::Verify {
            model,
            samples,
            stationarity_samples,
            seed,
            json,
            perturb_adjoint,
        } => {
            let opts = VerifyOptions {
                samples,
                stationarity_samples,
                reduction_points: 100,
                seed,
                perturb_adjoint,
            };
            let checks = commands::parse_model_selection(&model)?
                .into_iter()
                .map(|id| commands::verify_model(id, &opts))
                .collect::<CliResult<Vec<_>>>()?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&checks).expect("report serialises")
                );
            } else {
                for c in &checks {
                    println!("{}", commands::format_check(c));
                }
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::VerifyFailed(format!(
                    "{failed} model(s) failed verification"
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
