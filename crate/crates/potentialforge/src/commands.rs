//! The pipeline commands as library functions. Each returns a JSON report
//! and the exit status it maps to; the binary only parses flags and prints.

use std::path::{Path, PathBuf};

use anyhow::anyhow;
use serde_json::{json, Value};

use potentialforge_core::design::{
    null_space_basis, shift_solution, solve_min_norm, DesignOptions, DesignSolution, SolverChoice,
    FEASIBILITY_TOL,
};
use potentialforge_core::game::{is_potential_with, GameFunction, NetworkedGame, POTENTIAL_TOL};
use potentialforge_core::grid::{build_demo, GridSpec, Neighborhood, DEMO_STEPS};
use potentialforge_core::learning::{
    exact_stationary, gibbs, run, validate_restriction, BetaSchedule, Learner, RunConfig,
    Trajectory,
};
use potentialforge_core::stp::{Dims, Profile};
use potentialforge_core::{Error as CoreError, Limits};

use crate::format::{
    agent_series_csv, read_text, to_json, trajectory_csv, write_text, FormatError, GameFile,
    GameInput, GridFile, RestrictionFile, SolutionFile, UtilitiesFile,
};

pub const MAX_MATERIALIZE_ENV: &str = "POTENTIALFORGE_MAX_MATERIALIZE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Input = 1,
    Semantic = 2,
    Solver = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub error: anyhow::Error,
    /// Report to print even though the command failed.
    pub report: Option<Value>,
}

impl Failure {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            exit: Exit::Input,
            error: error.into(),
            report: None,
        }
    }

    pub fn semantic(error: impl Into<anyhow::Error>, report: Option<Value>) -> Self {
        Self {
            exit: Exit::Semantic,
            error: error.into(),
            report,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::input(e)
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let exit = match e {
            CoreError::SolverFailure { .. } => Exit::Solver,
            CoreError::CapExceeded { .. } => Exit::Semantic,
            _ => Exit::Input,
        };
        Self {
            exit,
            error: e.into(),
            report: None,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub exit: Exit,
}

impl Outcome {
    fn new(report: Value, ok: bool) -> Self {
        Self {
            report,
            exit: if ok { Exit::Success } else { Exit::Semantic },
        }
    }
}

pub type CmdResult = Result<Outcome, Failure>;

/// Default limits, with the materialization cap taken from the environment
/// when set.
pub fn limits_from_env() -> Result<Limits, Failure> {
    let mut limits = Limits::default();
    if let Ok(v) = std::env::var(MAX_MATERIALIZE_ENV) {
        limits.max_materialize = v
            .trim()
            .parse()
            .map_err(|_| Failure::input(anyhow!("{MAX_MATERIALIZE_ENV}={v:?} is not a count")))?;
    }
    Ok(limits)
}

fn load_game(path: &Path, limits: &Limits) -> Result<GameInput, Failure> {
    Ok(GameFile::read(path)?.parse(limits)?)
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

fn design_options(
    tol: f64,
    solver: SolverChoice,
    limits: Limits,
) -> Result<DesignOptions, Failure> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Failure::input(anyhow!("tolerance must be positive")));
    }
    Ok(DesignOptions {
        tolerance: tol,
        solver,
        limits,
        ..DesignOptions::default()
    })
}

fn feasibility_report(solution: &DesignSolution) -> Value {
    json!({
        "feasible": solution.feasible(),
        "tolerance": solution.tolerance,
        "objective_norm": solution.objective_norm,
        "players": solution.players.iter().map(|p| json!({
            "player": p.player + 1,
            "feasible": p.feasible,
            "residual": p.residual,
            "relative_residual": p.relative_residual,
        })).collect::<Vec<_>>(),
    })
}

/// Existence check: every player's design system must be solvable.
pub fn check(game: &Path, tol: f64, limits: &Limits) -> CmdResult {
    let input = load_game(game, limits)?;
    let opts = design_options(tol, SolverChoice::Auto, *limits)?;
    let solution = solve_min_norm(&input.game, input.objective()?, &opts)?;
    Ok(Outcome::new(
        feasibility_report(&solution),
        solution.feasible(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZetaMode {
    Zero,
    Ones,
    /// JSON array with one `ζ_i` per player.
    File(PathBuf),
}

impl ZetaMode {
    fn name(&self) -> &'static str {
        match self {
            ZetaMode::Zero => "zero",
            ZetaMode::Ones => "ones",
            ZetaMode::File(_) => "file",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveArgs {
    pub tol: f64,
    pub zeta: ZetaMode,
    pub allow_infeasible: bool,
    pub solver: SolverChoice,
}

impl Default for SolveArgs {
    fn default() -> Self {
        Self {
            tol: FEASIBILITY_TOL,
            zeta: ZetaMode::Zero,
            allow_infeasible: false,
            solver: SolverChoice::Auto,
        }
    }
}

/// Solves the design systems and picks a family member by `ζ`.
pub fn design(
    game: &NetworkedGame,
    objective: &[f64],
    args: &SolveArgs,
    limits: &Limits,
) -> Result<DesignSolution, Failure> {
    let opts = design_options(args.tol, args.solver, *limits)?;
    let solution = solve_min_norm(game, objective, &opts)?;
    let zetas: Vec<Vec<f64>> = match &args.zeta {
        ZetaMode::Zero => return Ok(solution),
        ZetaMode::Ones => (0..game.players())
            .map(|i| Ok(vec![1.0; null_space_basis(game, i)?.dim()]))
            .collect::<Result<_, CoreError>>()?,
        ZetaMode::File(path) => {
            let text = read_text(path)?;
            serde_json::from_str(&text).map_err(|source| FormatError::Json {
                path: path.display().to_string(),
                source,
            })?
        }
    };
    Ok(shift_solution(game, &solution, &zetas)?)
}

pub fn solve(game: &Path, out: &Path, args: &SolveArgs, limits: &Limits) -> CmdResult {
    let input = load_game(game, limits)?;
    let solution = design(&input.game, input.objective()?, args, limits)?;
    let mut report = feasibility_report(&solution);
    if !solution.feasible() && !args.allow_infeasible {
        return Err(Failure::semantic(
            anyhow!("design equations have no solution; rerun with --allow-infeasible for the least-squares fit"),
            Some(report),
        ));
    }
    let file = SolutionFile::from_solution(&solution, Some(args.zeta.name()));
    write_text(out, &to_json(&file))?;
    report["output"] = json!(out.display().to_string());
    report["zeta_mode"] = json!(args.zeta.name());
    Ok(Outcome {
        report,
        exit: Exit::Success,
    })
}

fn verify_game(
    designed: &NetworkedGame,
    objective: &[f64],
    tol: f64,
    limits: &Limits,
) -> Result<Outcome, Failure> {
    let potential = GameFunction::full(designed.dims(), objective.to_vec())?;
    let report = is_potential_with(designed, &potential, tol, limits)?;
    Ok(Outcome::new(
        json!({
            "potential": report.ok,
            "tolerance": tol,
            "max_deviation": report.max_deviation,
            "players": report.per_player.iter().enumerate().map(|(i, d)| json!({
                "player": i + 1,
                "max_deviation": d,
            })).collect::<Vec<_>>(),
        }),
        report.ok,
    ))
}

/// Checks that the file's objective is an exact potential of the game with
/// the given utilities.
pub fn verify(game: &Path, utilities: &Path, tol: f64, limits: &Limits) -> CmdResult {
    let input = load_game(game, limits)?;
    let designed = UtilitiesFile::read(utilities)?.attach(&input.game)?;
    verify_game(&designed, input.objective()?, tol, limits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Logit,
    Brl,
}

fn game_with_utilities(
    game: &Path,
    utilities: Option<&Path>,
    limits: &Limits,
) -> Result<(NetworkedGame, Vec<f64>), Failure> {
    let input = load_game(game, limits)?;
    let objective = input.objective()?.to_vec();
    let g = match utilities {
        Some(u) => UtilitiesFile::read(u)?.attach(&input.game)?,
        None if input.game.utilities().is_some() => input.game,
        None => {
            return Err(Failure::input(anyhow!(
                "field `utilities`: missing from the game file and no utilities file given"
            )))
        }
    };
    Ok((g, objective))
}

fn learner(kind: LearnerKind, dims: &Dims, restriction: Option<&Path>) -> Result<Learner, Failure> {
    match kind {
        LearnerKind::Logit => Ok(Learner::Logit),
        LearnerKind::Brl => {
            let path = restriction
                .ok_or_else(|| Failure::input(anyhow!("the brl learner needs --restriction")))?;
            let r = RestrictionFile::read(path)?.to_restriction(dims)?;
            let report = validate_restriction(&r);
            if !report.reversible() || !report.feasible() {
                let players: Vec<Value> = report
                    .players
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        json!({
                            "player": i + 1,
                            "reversible": p.reversible,
                            "reversibility_witness": p.reversibility_witness.map(|(x, y)| [x + 1, y + 1]),
                            "feasible": p.feasible,
                            "feasibility_witness": p.feasibility_witness.map(|(x, y)| [x + 1, y + 1]),
                        })
                    })
                    .collect();
                return Err(Failure::semantic(
                    anyhow!("restriction is not reversible and feasible"),
                    Some(json!({ "restriction": players })),
                ));
            }
            Ok(Learner::BinaryRestrictive(r))
        }
    }
}

/// Fraction of the last tenth of the steps spent at a maximizer of `φ`
/// (the initial record alone when there are no steps).
pub fn argmax_fraction(trajectory: &Trajectory, objective: &[f64]) -> f64 {
    let top = objective.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-9 * top.abs().max(1.0);
    let records = &trajectory.records;
    let steps = records.len() - 1;
    let tail = if steps == 0 { 1 } else { steps.div_ceil(10) };
    let hits = records[records.len() - tail..]
        .iter()
        .filter(|r| r.objective >= top - slack)
        .count();
    hits as f64 / tail as f64
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub learner: LearnerKind,
    pub beta: BetaSchedule,
    pub steps: u64,
    pub seed: u64,
    /// 0-based strategies; all-first when absent.
    pub init: Option<Vec<usize>>,
    pub restriction: Option<PathBuf>,
    pub replicas: u64,
}

/// Output path of one replica: `out` itself for a single replica, otherwise
/// `stem.r<replica>.ext`.
pub fn replica_path(out: &Path, replica: u64, replicas: u64) -> PathBuf {
    if replicas <= 1 {
        return out.to_path_buf();
    }
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.r{replica}.{}", ext.to_string_lossy()),
        None => format!("{stem}.r{replica}"),
    };
    out.with_file_name(name)
}

pub fn simulate(
    game: &Path,
    utilities: Option<&Path>,
    out: &Path,
    args: &SimulateArgs,
    limits: &Limits,
) -> CmdResult {
    let (g, objective) = game_with_utilities(game, utilities, limits)?;
    let dims = g.dims().clone();
    let learner = learner(args.learner, &dims, args.restriction.as_deref())?;
    let init = Profile::new(args.init.clone().unwrap_or_else(|| vec![0; dims.players()]));
    dims.check_profile(&init)
        .map_err(|e| Failure::input(anyhow!("field `init`: {e}")))?;
    let phi = GameFunction::full(&dims, objective.clone())?;
    let replicas = args.replicas.max(1);
    let runs: Vec<Result<Trajectory, CoreError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..replicas)
            .map(|replica| {
                let config = RunConfig {
                    learner: &learner,
                    schedule: &args.beta,
                    init: init.clone(),
                    steps: args.steps,
                    seed: args.seed,
                    replica,
                };
                let (g, phi) = (&g, &phi);
                s.spawn(move || run(g, phi, &config))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("replica thread panicked"))
            .collect()
    });
    let mut summaries = Vec::new();
    for (replica, traj) in (0..replicas).zip(runs) {
        let traj = traj?;
        let path = replica_path(out, replica, replicas);
        write_text(&path, &trajectory_csv(&dims, &traj))?;
        let last = traj.records.last().expect("initial record");
        summaries.push(json!({
            "replica": replica,
            "output": path.display().to_string(),
            "final_profile": last.profile.to_one_based(),
            "final_phi": last.objective,
            "argmax_fraction_last_tenth": argmax_fraction(&traj, &objective),
        }));
    }
    Ok(Outcome::new(
        json!({ "seed": args.seed, "steps": args.steps, "replicas": summaries }),
        true,
    ))
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Exact stationary distribution(s) against the Gibbs distribution of the
/// game file's objective (restricted to each closed class).
pub fn stationary(
    game: &Path,
    utilities: Option<&Path>,
    beta: f64,
    kind: LearnerKind,
    restriction: Option<&Path>,
    limits: &Limits,
) -> CmdResult {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Failure::input(anyhow!(
            "field `beta`: must be finite and non-negative"
        )));
    }
    let (g, objective) = game_with_utilities(game, utilities, limits)?;
    let learner = learner(kind, g.dims(), restriction)?;
    let st = exact_stationary(&g, beta, &learner, limits)?;
    let top = objective.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-9 * top.abs().max(1.0);
    let mut max_gap = 0.0f64;
    let mut argmax_mass = 0.0;
    let classes: Vec<Value> = st
        .classes
        .iter()
        .map(|c| {
            let reference = gibbs(&objective, beta, Some(&c.states));
            let gap = sup_gap(&c.distribution, &reference);
            max_gap = max_gap.max(gap);
            let mass: f64 = c
                .states
                .iter()
                .filter(|&&s| objective[s] >= top - slack)
                .map(|&s| c.distribution[s])
                .sum();
            if st.classes.len() == 1 {
                argmax_mass = mass;
            }
            json!({
                "states": one_based(&c.states),
                "mu": c.states.iter().map(|&s| c.distribution[s]).collect::<Vec<_>>(),
                "gibbs": c.states.iter().map(|&s| reference[s]).collect::<Vec<_>>(),
                "gap": gap,
                "argmax_mass": mass,
            })
        })
        .collect();
    let mut report = json!({
        "beta": beta,
        "states": g.dims().total(),
        "closed_classes": classes.len(),
        "transient": one_based(&st.transient),
        "max_gap": max_gap,
        "classes": classes,
    });
    if st.classes.len() == 1 {
        report["argmax_mass"] = json!(argmax_mass);
    }
    Ok(Outcome::new(report, true))
}

#[derive(Debug, Clone)]
pub struct DemoArgs {
    pub grid: Option<PathBuf>,
    pub seed: u64,
    pub steps: u64,
    /// Independent seeds `seed, seed + 1, …` for the convergence summary.
    pub seeds: u64,
    /// Final steps during which every agent must sit on the target.
    pub hold: u64,
    pub zeta: ZetaMode,
    /// Overrides the move rule of the grid spec.
    pub neighborhood: Option<Neighborhood>,
}

impl Default for DemoArgs {
    fn default() -> Self {
        Self {
            grid: None,
            seed: 0,
            steps: DEMO_STEPS,
            seeds: 1,
            hold: 500,
            zeta: ZetaMode::Ones,
            neighborhood: None,
        }
    }
}

/// Number of trailing records (excluding the initial one) at `target`.
pub fn hold_length(trajectory: &Trajectory, target: &Profile) -> u64 {
    trajectory.records[1..]
        .iter()
        .rev()
        .take_while(|r| &r.profile == target)
        .count() as u64
}

/// Result of the demo pipeline kept in memory.
#[derive(Debug, Clone)]
pub struct DemoRun {
    pub spec: GridSpec,
    pub game: NetworkedGame,
    pub objective: Vec<f64>,
    pub solution: DesignSolution,
    pub trajectories: Vec<Trajectory>,
    pub report: Value,
}

/// Builds the gridworld game, designs utilities, verifies them and runs
/// binary restrictive logit learning for every seed.
pub fn demo_pipeline(args: &DemoArgs, limits: &Limits) -> Result<DemoRun, Failure> {
    let mut spec = match &args.grid {
        Some(p) => GridFile::read(p)?.to_spec()?,
        None => GridSpec::default(),
    };
    if let Some(n) = args.neighborhood {
        spec.neighborhood = n;
    }
    let demo = build_demo(spec.clone(), limits)?;
    let objective = demo.objective.lift(demo.game.dims(), limits)?;
    let solve_args = SolveArgs {
        zeta: args.zeta.clone(),
        ..SolveArgs::default()
    };
    let solution = design(&demo.game, &objective, &solve_args, limits)?;
    let designed = solution.designed_game(&demo.game)?;
    let verdict = verify_game(&designed, &objective, POTENTIAL_TOL, limits)?;
    let learner = Learner::BinaryRestrictive(demo.restriction.clone());
    let phi = GameFunction::full(designed.dims(), objective.clone())?;
    let target = Profile::new(vec![spec.strategy(spec.target); spec.agents]);
    let mut trajectories = Vec::new();
    for seed in args.seed..args.seed + args.seeds.max(1) {
        let config = RunConfig {
            learner: &learner,
            schedule: &demo.schedule,
            init: spec.initial_profile(),
            steps: args.steps,
            seed,
            replica: 0,
        };
        trajectories.push(run(&designed, &phi, &config)?);
    }
    let runs: Vec<Value> = trajectories
        .iter()
        .map(|t| {
            let held = hold_length(t, &target);
            json!({
                "seed": t.seed,
                "final_cells": t.final_profile().strategies().iter().map(|&s| {
                    let c = spec.cell(s);
                    [c.a, c.b]
                }).collect::<Vec<_>>(),
                "steps_held_at_target": held,
                "converged": held >= args.hold.min(args.steps),
            })
        })
        .collect();
    let converged = runs
        .iter()
        .filter(|r| r["converged"] == json!(true))
        .count();
    let report = json!({
        "feasible": solution.feasible(),
        "max_relative_residual": solution.players.iter().map(|p| p.relative_residual).fold(0.0, f64::max),
        "zeta_mode": args.zeta.name(),
        "potential": verdict.report["potential"],
        "potential_max_deviation": verdict.report["max_deviation"],
        "steps": args.steps,
        "hold": args.hold,
        "runs": runs,
        "converged_fraction": converged as f64 / trajectories.len() as f64,
    });
    Ok(DemoRun {
        spec,
        game: demo.game,
        objective,
        solution,
        trajectories,
        report,
    })
}

/// Runs the pipeline and writes its artifacts to `out_dir`.
pub fn demo(out_dir: &Path, args: &DemoArgs, limits: &Limits) -> CmdResult {
    let run = demo_pipeline(args, limits)?;
    std::fs::create_dir_all(out_dir).map_err(|source| FormatError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let path = |name: &str| out_dir.join(name);
    let demo = build_demo(run.spec.clone(), limits)?;
    write_text(
        &path("grid.json"),
        &to_json(&GridFile::from_spec(&run.spec)),
    )?;
    write_text(
        &path("game.json"),
        &to_json(&GameFile::from_game(&run.game, Some(&run.objective))),
    )?;
    write_text(
        &path("solution.json"),
        &to_json(&SolutionFile::from_solution(
            &run.solution,
            Some(args.zeta.name()),
        )),
    )?;
    write_text(
        &path("restriction.json"),
        &to_json(&RestrictionFile::from_restriction(&demo.restriction)),
    )?;
    let dims = run.game.dims();
    let many = run.trajectories.len() > 1;
    for t in &run.trajectories {
        let suffix = if many {
            format!(".s{}", t.seed)
        } else {
            String::new()
        };
        write_text(
            &path(&format!("trajectory{suffix}.csv")),
            &trajectory_csv(dims, t),
        )?;
        for agent in 0..run.spec.agents {
            write_text(
                &path(&format!("agent_{}{suffix}.csv", agent + 1)),
                &agent_series_csv(&run.spec, t, agent),
            )?;
        }
    }
    write_text(&path("summary.json"), &to_json(&run.report))?;
    let ok = run.solution.feasible() && run.report["potential"] == json!(true);
    Ok(Outcome::new(run.report, ok))
}
