//! Logit learning and binary restrictive logit learning.
//!
//! Both learners are asynchronous: at every step one player, drawn uniformly,
//! revises its strategy while everybody else repeats.
//!
//! Random stream layout: a trajectory with seed `s` and replica `r` uses
//! `ChaCha8Rng::seed_from_u64(s)` with stream `r`. Every draw is one `u64`
//! mapped to `[0, 1)` by its top 53 bits. A logit step consumes two draws
//! (player, strategy); a binary restrictive step consumes three (player, trial,
//! acceptance), even when the trial equals the incumbent.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::game::{GameFunction, NetworkedGame};
use crate::markov::TransitionMatrix;
use crate::stp::{Dims, Profile};
use crate::{Error, Limits, Result};

/// Inverse temperature as a function of the step counter.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaSchedule {
    Constant(f64),
    /// `β(t) = c·t`
    Linear(f64),
    /// Step function through `(t, β)` knots sorted by `t`; before the first
    /// knot the first value applies.
    Table(Vec<(u64, f64)>),
}

impl BetaSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = |b: f64| b.is_finite() && b >= 0.0;
        match self {
            BetaSchedule::Constant(b) | BetaSchedule::Linear(b) if !ok(*b) => Err(
                Error::InvalidSchedule("beta must be finite and non-negative"),
            ),
            BetaSchedule::Table(knots) => {
                if knots.is_empty() {
                    return Err(Error::InvalidSchedule("table is empty"));
                }
                if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::InvalidSchedule("table times must increase"));
                }
                if knots.iter().any(|&(_, b)| !ok(b)) {
                    return Err(Error::InvalidSchedule(
                        "beta must be finite and non-negative",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn beta(&self, t: u64) -> f64 {
        match self {
            BetaSchedule::Constant(b) => *b,
            BetaSchedule::Linear(c) => c * t as f64,
            BetaSchedule::Table(knots) => {
                let idx = knots.partition_point(|&(k, _)| k <= t);
                knots[idx.saturating_sub(1)].1
            }
        }
    }
}

/// Restricted strategy sets `R_i(x_i)` for every player and strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    sets: Vec<Vec<Vec<usize>>>,
    w: Vec<usize>,
}

impl Restriction {
    /// `sets[i][x]` is `R_i(x)`. Every set must contain `x` itself.
    pub fn new(dims: &Dims, mut sets: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if sets.len() != dims.players() {
            return Err(Error::LengthMismatch {
                expected: dims.players(),
                found: sets.len(),
            });
        }
        for (i, player_sets) in sets.iter_mut().enumerate() {
            if player_sets.len() != dims.card(i) {
                return Err(Error::InvalidRestriction {
                    player: i,
                    strategy: player_sets.len().min(dims.card(i)),
                    reason: "one set per strategy is required",
                });
            }
            for (x, set) in player_sets.iter_mut().enumerate() {
                set.sort_unstable();
                set.dedup();
                if set.iter().any(|&y| y >= dims.card(i)) {
                    return Err(Error::InvalidRestriction {
                        player: i,
                        strategy: x,
                        reason: "strategy out of range",
                    });
                }
                if set.binary_search(&x).is_err() {
                    return Err(Error::InvalidRestriction {
                        player: i,
                        strategy: x,
                        reason: "a strategy must be available from itself",
                    });
                }
            }
        }
        let w = sets
            .iter()
            .map(|s| s.iter().map(Vec::len).max().unwrap_or(1))
            .collect();
        Ok(Self { sets, w })
    }

    /// No restriction: `R_i(x) = S_i`.
    pub fn unrestricted(dims: &Dims) -> Self {
        let sets = (0..dims.players())
            .map(|i| {
                let all: Vec<usize> = (0..dims.card(i)).collect();
                vec![all; dims.card(i)]
            })
            .collect();
        Self::new(dims, sets).expect("full sets are valid")
    }

    pub fn players(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, player: usize, strategy: usize) -> &[usize] {
        &self.sets[player][strategy]
    }

    pub fn sets(&self) -> &[Vec<Vec<usize>>] {
        &self.sets
    }

    /// `w_i = max_x |R_i(x)|`
    pub fn w(&self, player: usize) -> usize {
        self.w[player]
    }

    fn check_dims(&self, dims: &Dims) -> Result<()> {
        if self.players() != dims.players() {
            return Err(Error::LengthMismatch {
                expected: dims.players(),
                found: self.players(),
            });
        }
        for i in 0..dims.players() {
            if self.sets[i].len() != dims.card(i) {
                return Err(Error::InvalidRestriction {
                    player: i,
                    strategy: self.sets[i].len().min(dims.card(i)),
                    reason: "one set per strategy is required",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerRestrictionReport {
    pub reversible: bool,
    /// `(x, y)` with `y ∈ R(x)` but `x ∉ R(y)`.
    pub reversibility_witness: Option<(usize, usize)>,
    /// Strategies that are unreachable from and cannot reach any other.
    pub isolated: Vec<usize>,
    /// Every non-isolated strategy reaches every other by allowed moves.
    pub feasible: bool,
    /// `(x, y)` among non-isolated strategies with `y` unreachable from `x`.
    pub feasibility_witness: Option<(usize, usize)>,
    /// Feasibility over all of `S_i`, isolated strategies included.
    pub fully_connected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionReport {
    pub players: Vec<PlayerRestrictionReport>,
}

impl RestrictionReport {
    pub fn reversible(&self) -> bool {
        self.players.iter().all(|p| p.reversible)
    }

    pub fn feasible(&self) -> bool {
        self.players.iter().all(|p| p.feasible)
    }
}

fn reachable(sets: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; sets.len()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(x) = stack.pop() {
        for &y in &sets[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

pub fn validate_restriction(restriction: &Restriction) -> RestrictionReport {
    let players = restriction
        .sets
        .iter()
        .map(|sets| {
            let m = sets.len();
            let mut witness = None;
            'outer: for (x, set) in sets.iter().enumerate() {
                for &y in set {
                    if sets[y].binary_search(&x).is_err() {
                        witness = Some((x, y));
                        break 'outer;
                    }
                }
            }
            let mut entered = vec![false; m];
            for (x, set) in sets.iter().enumerate() {
                for &y in set {
                    if y != x {
                        entered[y] = true;
                    }
                }
            }
            let isolated: Vec<usize> = (0..m)
                .filter(|&x| sets[x].len() == 1 && !entered[x])
                .collect();
            let active: Vec<usize> = (0..m).filter(|x| !isolated.contains(x)).collect();
            let mut feasibility_witness = None;
            'reach: for &x in &active {
                let seen = reachable(sets, x);
                for &y in &active {
                    if !seen[y] {
                        feasibility_witness = Some((x, y));
                        break 'reach;
                    }
                }
            }
            let fully_connected = (0..m).all(|x| reachable(sets, x).iter().all(|&s| s));
            PlayerRestrictionReport {
                reversible: witness.is_none(),
                reversibility_witness: witness,
                isolated,
                feasible: feasibility_witness.is_none(),
                feasibility_witness,
                fully_connected,
            }
        })
        .collect();
    RestrictionReport { players }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Learner {
    Logit,
    BinaryRestrictive(Restriction),
}

/// Seeded random source for one trajectory replica.
#[derive(Debug, Clone)]
pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64, replica: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        Self(rng)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

/// Softmax of `beta · utilities`, shifted by the maximum.
pub fn softmax(utilities: &[f64], beta: f64) -> Vec<f64> {
    let top = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = utilities
        .iter()
        .map(|&u| {
            if beta == 0.0 {
                1.0
            } else {
                libm::exp(beta * (u - top))
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Probability that the trial wins the pairwise logit comparison:
/// `e^{β c_trial} / (e^{β c_trial} + e^{β c_stay})`.
pub fn acceptance_probability(trial: f64, stay: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.5;
    }
    let z = beta * (stay - trial);
    if z >= 0.0 {
        let e = libm::exp(-z);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + libm::exp(z))
    }
}

fn sample(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the cumulative sum: last positive entry
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn strategy_utilities(
    game: &NetworkedGame,
    utility: &GameFunction,
    profile: &Profile,
    player: usize,
) -> Vec<f64> {
    let mut s = profile.strategies().to_vec();
    (0..game.dims().card(player))
        .map(|y| {
            s[player] = y;
            utility.eval_unchecked(game.dims(), &s)
        })
        .collect()
}

/// Result of a single revision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub player: usize,
    pub profile: Profile,
}

pub fn step_logit(
    game: &NetworkedGame,
    current: &Profile,
    beta: f64,
    rng: &mut Stream,
) -> Result<Step> {
    let utilities = game.require_utilities()?;
    game.dims().check_profile(current)?;
    let i = rng.index(game.players());
    let probs = softmax(&strategy_utilities(game, &utilities[i], current, i), beta);
    let y = sample(&probs, rng.uniform());
    Ok(Step {
        player: i,
        profile: current.with(i, y),
    })
}

pub fn step_brl(
    game: &NetworkedGame,
    current: &Profile,
    beta: f64,
    restriction: &Restriction,
    rng: &mut Stream,
) -> Result<Step> {
    let utilities = game.require_utilities()?;
    game.dims().check_profile(current)?;
    restriction.check_dims(game.dims())?;
    let i = rng.index(game.players());
    let x = current.get(i);
    let slot = rng.index(restriction.w(i));
    let u = rng.uniform();
    let moves: Vec<usize> = restriction
        .set(i, x)
        .iter()
        .copied()
        .filter(|&y| y != x)
        .collect();
    let trial = moves.get(slot).copied().unwrap_or(x);
    if trial == x {
        return Ok(Step {
            player: i,
            profile: current.clone(),
        });
    }
    let candidate = current.with(i, trial);
    let c = &utilities[i];
    let p = acceptance_probability(
        c.eval_unchecked(game.dims(), candidate.strategies()),
        c.eval_unchecked(game.dims(), current.strategies()),
        beta,
    );
    Ok(Step {
        player: i,
        profile: if u < p { candidate } else { current.clone() },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: u64,
    pub beta: f64,
    /// `None` for the initial record.
    pub player: Option<usize>,
    pub profile: Profile,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub replica: u64,
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn final_profile(&self) -> &Profile {
        &self
            .records
            .last()
            .expect("trajectory has an initial record")
            .profile
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig<'a> {
    pub learner: &'a Learner,
    pub schedule: &'a BetaSchedule,
    pub init: Profile,
    pub steps: u64,
    pub seed: u64,
    pub replica: u64,
}

/// Runs `steps` revisions at `β = schedule(t)`, `t = 1..=steps`, recording
/// every step together with the objective value.
pub fn run(
    game: &NetworkedGame,
    objective: &GameFunction,
    config: &RunConfig<'_>,
) -> Result<Trajectory> {
    config.schedule.validate()?;
    game.require_utilities()?;
    let dims = game.dims();
    dims.check_profile(&config.init)?;
    if let Learner::BinaryRestrictive(r) = config.learner {
        r.check_dims(dims)?;
    }
    let mut rng = Stream::new(config.seed, config.replica);
    let mut records = Vec::with_capacity(config.steps as usize + 1);
    let mut current = config.init.clone();
    records.push(Record {
        t: 0,
        beta: config.schedule.beta(0),
        player: None,
        objective: objective.eval_unchecked(dims, current.strategies()),
        profile: current.clone(),
    });
    for t in 1..=config.steps {
        let beta = config.schedule.beta(t);
        let step = match config.learner {
            Learner::Logit => step_logit(game, &current, beta, &mut rng)?,
            Learner::BinaryRestrictive(r) => step_brl(game, &current, beta, r, &mut rng)?,
        };
        current = step.profile;
        records.push(Record {
            t,
            beta,
            player: Some(step.player),
            objective: objective.eval_unchecked(dims, current.strategies()),
            profile: current.clone(),
        });
    }
    Ok(Trajectory {
        seed: config.seed,
        replica: config.replica,
        records,
    })
}

/// Explicit one-step transition matrix of a learner at fixed `β`.
pub fn transition_matrix(
    game: &NetworkedGame,
    beta: f64,
    learner: &Learner,
    max_states: usize,
) -> Result<TransitionMatrix> {
    let utilities = game.require_utilities()?;
    let dims = game.dims();
    let k = dims.total();
    if k > max_states {
        return Err(Error::CapExceeded {
            what: "Markov chain states",
            requested: k as u128,
            cap: max_states,
        });
    }
    if let Learner::BinaryRestrictive(r) = learner {
        r.check_dims(dims)?;
    }
    let n = dims.players();
    let pick = 1.0 / n as f64;
    let mut rows = Vec::with_capacity(k);
    let mut s = vec![0; n];
    for x in 0..k {
        dims.decode_into(x, &mut s);
        let profile = Profile::new(s.clone());
        let mut row: Vec<(usize, f64)> = vec![(x, 0.0)];
        let mut stay = 0.0;
        for (i, c) in utilities.iter().enumerate() {
            let xi = s[i];
            let stride: usize = dims.cardinalities()[i + 1..].iter().product();
            let target = |y: usize| x - xi * stride + y * stride;
            match learner {
                Learner::Logit => {
                    let probs = softmax(&strategy_utilities(game, c, &profile, i), beta);
                    for (y, p) in probs.into_iter().enumerate() {
                        if y == xi {
                            stay += pick * p;
                        } else {
                            row.push((target(y), pick * p));
                        }
                    }
                }
                Learner::BinaryRestrictive(r) => {
                    let w = r.w(i) as f64;
                    let here = c.eval_unchecked(dims, &s);
                    let mut moved = 0.0;
                    for &y in r.set(i, xi) {
                        if y == xi {
                            continue;
                        }
                        let there = c.eval_unchecked(dims, profile.with(i, y).strategies());
                        let p = pick / w * acceptance_probability(there, here, beta);
                        moved += p;
                        row.push((target(y), p));
                    }
                    stay += pick - moved;
                }
            }
        }
        row[0].1 = stay;
        rows.push(row);
    }
    Ok(TransitionMatrix::from_rows(rows))
}

/// Stationary distribution of one closed communicating class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    pub states: Vec<usize>,
    /// Length-`k` vector, zero outside `states`.
    pub distribution: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub classes: Vec<ClassDistribution>,
    pub transient: Vec<usize>,
}

impl Stationary {
    /// The stationary distribution when the chain has a single closed class.
    pub fn unique(&self) -> Option<&[f64]> {
        match self.classes.as_slice() {
            [only] => Some(&only.distribution),
            _ => None,
        }
    }

    pub fn class_of(&self, state: usize) -> Option<&ClassDistribution> {
        self.classes
            .iter()
            .find(|c| c.states.binary_search(&state).is_ok())
    }
}

/// Exact stationary distribution(s) of a learner's chain. A reducible chain
/// yields one distribution per closed class.
pub fn exact_stationary(
    game: &NetworkedGame,
    beta: f64,
    learner: &Learner,
    limits: &Limits,
) -> Result<Stationary> {
    let p = transition_matrix(game, beta, learner, limits.max_states)?;
    let (closed, transient) = p.closed_classes();
    let k = p.states();
    let classes = closed
        .into_iter()
        .map(|states| {
            let local = p.class_stationary(&states);
            let mut distribution = vec![0.0; k];
            for (&s, v) in states.iter().zip(local) {
                distribution[s] = v;
            }
            ClassDistribution {
                states,
                distribution,
            }
        })
        .collect();
    Ok(Stationary { classes, transient })
}

/// `exp(β P(x)) / Σ_y exp(β P(y))`, optionally restricted to a state subset.
pub fn gibbs(potential: &[f64], beta: f64, support: Option<&[usize]>) -> Vec<f64> {
    let mut out = vec![0.0; potential.len()];
    let states: Vec<usize> = match support {
        Some(s) => s.to_vec(),
        None => (0..potential.len()).collect(),
    };
    let top = states
        .iter()
        .map(|&s| potential[s])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for &s in &states {
        let w = if beta == 0.0 {
            1.0
        } else {
            libm::exp(beta * (potential[s] - top))
        };
        out[s] = w;
        total += w;
    }
    for v in &mut out {
        *v /= total;
    }
    out
}
