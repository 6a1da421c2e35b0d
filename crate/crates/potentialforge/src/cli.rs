use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use potentialforge_core::design::{SolverChoice, FEASIBILITY_TOL};
use potentialforge_core::game::POTENTIAL_TOL;
use potentialforge_core::grid::{Neighborhood, DEMO_STEPS};

use crate::commands::{
    self, CmdResult, DemoArgs, Exit, Failure, LearnerKind, SimulateArgs, SolveArgs, ZetaMode,
};
use crate::format::parse_beta;

#[derive(Debug, Parser)]
#[command(
    name = "potentialforge",
    version,
    about = "Design local utilities that make a networked game an exact potential game, then simulate learning on it"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ZetaArg {
    Zero,
    Ones,
    File,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Auto,
    Dense,
    MatrixFree,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NeighborhoodArg {
    VonNeumann,
    Chebyshev,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LearnerArg {
    Logit,
    Brl,
}

impl From<LearnerArg> for LearnerKind {
    fn from(l: LearnerArg) -> Self {
        match l {
            LearnerArg::Logit => LearnerKind::Logit,
            LearnerArg::Brl => LearnerKind::Brl,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether local utilities with the objective as potential exist.
    Check {
        game: PathBuf,
        #[arg(long, default_value_t = FEASIBILITY_TOL)]
        tol: f64,
    },
    /// Solve the design equations and write a solution file.
    Solve {
        game: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = FEASIBILITY_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "zero")]
        zeta_mode: ZetaArg,
        /// JSON array of per-player ζ vectors, for `--zeta-mode file`.
        #[arg(long)]
        zeta_file: Option<PathBuf>,
        /// Write the least-squares fit even when no exact solution exists.
        #[arg(long)]
        allow_infeasible: bool,
        #[arg(long, value_enum, default_value = "auto")]
        solver: SolverArg,
    },
    /// Check that the game file's objective is an exact potential for the utilities.
    Verify {
        game: PathBuf,
        utilities: PathBuf,
        #[arg(long, default_value_t = POTENTIAL_TOL)]
        tol: f64,
    },
    /// Run logit or binary restrictive logit learning and write a trajectory CSV.
    Simulate {
        game: PathBuf,
        /// Solution or utilities file; defaults to the game file's utilities.
        utilities: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "logit")]
        learner: LearnerArg,
        /// `const:<v>`, `linear:<c>` or `table:<path>`.
        #[arg(long, default_value = "const:1")]
        beta: String,
        #[arg(long, default_value_t = 1000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial profile as 1-based strategies, e.g. `1,3,7`.
        #[arg(long, value_delimiter = ',')]
        init: Option<Vec<usize>>,
        #[arg(long)]
        restriction: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Exact stationary distribution of the learning chain against Gibbs.
    Stationary {
        game: PathBuf,
        utilities: Option<PathBuf>,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value = "logit")]
        learner: LearnerArg,
        #[arg(long)]
        restriction: Option<PathBuf>,
        #[arg(long, default_value_t = potentialforge_core::Limits::DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Gridworld consensus example end to end.
    Demo {
        #[arg(short, long)]
        out: PathBuf,
        /// Grid spec file; the built-in 3×3 example when absent.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEMO_STEPS)]
        steps: u64,
        /// Number of consecutive seeds to run.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Final steps all agents must hold the target to count as converged.
        #[arg(long, default_value_t = 500)]
        hold: u64,
        #[arg(long, value_enum, default_value = "ones")]
        zeta_mode: ZetaArg,
        #[arg(long)]
        zeta_file: Option<PathBuf>,
        /// Move rule; overrides the grid file.
        #[arg(long, value_enum)]
        neighborhood: Option<NeighborhoodArg>,
    },
}

fn zeta(mode: ZetaArg, file: Option<PathBuf>) -> Result<ZetaMode, Failure> {
    match (mode, file) {
        (ZetaArg::Zero, None) => Ok(ZetaMode::Zero),
        (ZetaArg::Ones, None) => Ok(ZetaMode::Ones),
        (ZetaArg::File, Some(p)) => Ok(ZetaMode::File(p)),
        (ZetaArg::File, None) => Err(Failure::input(anyhow::anyhow!(
            "--zeta-mode file needs --zeta-file"
        ))),
        (_, Some(_)) => Err(Failure::input(anyhow::anyhow!(
            "--zeta-file is only used with --zeta-mode file"
        ))),
    }
}

pub fn execute(command: Command) -> CmdResult {
    let mut limits = commands::limits_from_env()?;
    match command {
        Command::Check { game, tol } => commands::check(&game, tol, &limits),
        Command::Solve {
            game,
            out,
            tol,
            zeta_mode,
            zeta_file,
            allow_infeasible,
            solver,
        } => {
            let args = SolveArgs {
                tol,
                zeta: zeta(zeta_mode, zeta_file)?,
                allow_infeasible,
                solver: match solver {
                    SolverArg::Auto => SolverChoice::Auto,
                    SolverArg::Dense => SolverChoice::Dense,
                    SolverArg::MatrixFree => SolverChoice::MatrixFree,
                },
            };
            commands::solve(&game, &out, &args, &limits)
        }
        Command::Verify {
            game,
            utilities,
            tol,
        } => commands::verify(&game, &utilities, tol, &limits),
        Command::Simulate {
            game,
            utilities,
            learner,
            beta,
            steps,
            seed,
            init,
            restriction,
            replicas,
            out,
        } => {
            let init = init
                .map(|v| {
                    v.iter()
                        .map(|&s| {
                            s.checked_sub(1).ok_or_else(|| {
                                Failure::input(anyhow::anyhow!(
                                    "field `init`: strategies are 1-based"
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            let args = SimulateArgs {
                learner: learner.into(),
                beta: parse_beta(&beta)?,
                steps,
                seed,
                init,
                restriction,
                replicas,
            };
            commands::simulate(&game, utilities.as_deref(), &out, &args, &limits)
        }
        Command::Stationary {
            game,
            utilities,
            beta,
            learner,
            restriction,
            max_states,
        } => {
            limits.max_states = max_states;
            commands::stationary(
                &game,
                utilities.as_deref(),
                beta,
                learner.into(),
                restriction.as_deref(),
                &limits,
            )
        }
        Command::Demo {
            out,
            grid,
            seed,
            steps,
            seeds,
            hold,
            zeta_mode,
            zeta_file,
            neighborhood,
        } => {
            let args = DemoArgs {
                grid,
                seed,
                steps,
                seeds,
                hold,
                zeta: zeta(zeta_mode, zeta_file)?,
                neighborhood: neighborhood.map(|n| match n {
                    NeighborhoodArg::VonNeumann => Neighborhood::VonNeumann,
                    NeighborhoodArg::Chebyshev => Neighborhood::Chebyshev,
                }),
            };
            commands::demo(&out, &args, &limits)
        }
    }
}

fn print_report(report: &serde_json::Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(report).expect("json");
    // a closed pipe is not an error of the command
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

/// Parses the process arguments, runs the command, prints its report and
/// returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::Input as i32
            } else {
                0
            };
        }
    };
    match execute(cli.command) {
        Ok(outcome) => {
            print_report(&outcome.report);
            outcome.exit as i32
        }
        Err(failure) => {
            if let Some(report) = &failure.report {
                print_report(report);
            }
            eprintln!("error: {:#}", failure.error);
            failure.exit as i32
        }
    }
}
