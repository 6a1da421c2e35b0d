//! Gridworld consensus instances: agents on a rectangular grid with
//! obstacles, a common target cell, restricted moves and a fixed
//! communication graph.
//!
//! Cell `(a, b)` (1-based, `a ∈ 1..=width`, `b ∈ 1..=height`) is strategy
//! `(a − 1)·height + (b − 1)`, i.e. the lexicographic index over the per-agent
//! dims `(width, height)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::game::{GameFunction, NetworkedGame};
use crate::learning::{BetaSchedule, Restriction};
use crate::stp::{Dims, Profile};
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub a: usize,
    pub b: usize,
}

impl Cell {
    pub const fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Neighborhood {
    /// Cells at Euclidean distance at most 1: stay plus the four axis moves.
    #[default]
    VonNeumann,
    /// Cells at Chebyshev distance at most 1 (diagonals included).
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub obstacles: Vec<Cell>,
    pub target: Cell,
    pub agents: usize,
    /// Undirected communication edges between 0-based agents.
    pub comm_edges: Vec<(usize, usize)>,
    pub initial: Vec<Cell>,
    pub neighborhood: Neighborhood,
}

impl Default for GridSpec {
    /// Three agents on a 3×3 grid, obstacle at (2,2), target (3,3), line
    /// communication graph 1–2–3, starting at (1,1), (1,3), (3,1).
    fn default() -> Self {
        Self {
            width: 3,
            height: 3,
            obstacles: vec![Cell::new(2, 2)],
            target: Cell::new(3, 3),
            agents: 3,
            comm_edges: vec![(0, 1), (1, 2)],
            initial: vec![Cell::new(1, 1), Cell::new(1, 3), Cell::new(3, 1)],
            neighborhood: Neighborhood::VonNeumann,
        }
    }
}

impl GridSpec {
    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, c: Cell) -> bool {
        (1..=self.width).contains(&c.a) && (1..=self.height).contains(&c.b)
    }

    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.obstacles.contains(&c)
    }

    pub fn strategy(&self, c: Cell) -> usize {
        (c.a - 1) * self.height + (c.b - 1)
    }

    pub fn cell(&self, strategy: usize) -> Cell {
        Cell::new(strategy / self.height + 1, strategy % self.height + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.cells() < 2 {
            return Err(Error::InvalidGrid("grid needs at least two cells"));
        }
        if self.agents == 0 {
            return Err(Error::InvalidGrid("at least one agent is required"));
        }
        if self.obstacles.iter().any(|&c| !self.contains(c)) {
            return Err(Error::InvalidGrid("obstacle outside the grid"));
        }
        if !self.contains(self.target) || self.is_obstacle(self.target) {
            return Err(Error::InvalidGrid(
                "target must be a free cell inside the grid",
            ));
        }
        if self.initial.len() != self.agents {
            return Err(Error::InvalidGrid("one initial cell per agent is required"));
        }
        if self
            .initial
            .iter()
            .any(|&c| !self.contains(c) || self.is_obstacle(c))
        {
            return Err(Error::InvalidGrid(
                "initial cells must be free cells inside the grid",
            ));
        }
        for &(u, v) in &self.comm_edges {
            if u == v {
                return Err(Error::InvalidGrid("communication graph has a self-loop"));
            }
            if u >= self.agents || v >= self.agents {
                return Err(Error::InvalidGrid(
                    "communication edge names an unknown agent",
                ));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> Result<Dims> {
        Dims::new(vec![self.cells(); self.agents])
    }

    /// Neighbor sets `U(i)` from the undirected edge list.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut u = vec![Vec::new(); self.agents];
        for &(a, b) in &self.comm_edges {
            u[a].push(b);
            u[b].push(a);
        }
        for s in &mut u {
            s.sort_unstable();
            s.dedup();
        }
        u
    }

    pub fn initial_profile(&self) -> Profile {
        Profile::new(self.initial.iter().map(|&c| self.strategy(c)).collect())
    }
}

/// `φ(x) = |{i : x_i = target}|`, built as the sum of the lifted per-agent
/// target indicators.
pub fn build_objective(spec: &GridSpec, limits: &Limits) -> Result<GameFunction> {
    spec.validate()?;
    let dims = spec.dims()?;
    let mut indicator = vec![0.0; spec.cells()];
    indicator[spec.strategy(spec.target)] = 1.0;
    let mut total = vec![0.0; dims.total()];
    for i in 0..spec.agents {
        let lifted = GameFunction::new(&dims, vec![i], indicator.clone())?.lift(&dims, limits)?;
        for (t, v) in total.iter_mut().zip(lifted) {
            *t += v;
        }
    }
    GameFunction::full(&dims, total)
}

/// Radius-1 move sets. Obstacle cells keep only themselves and never appear
/// in another cell's set.
pub fn build_restriction(spec: &GridSpec) -> Result<Restriction> {
    spec.validate()?;
    let dims = spec.dims()?;
    let per_cell: Vec<Vec<usize>> = (0..spec.cells())
        .map(|s| {
            let here = spec.cell(s);
            if spec.is_obstacle(here) {
                return vec![s];
            }
            let mut set = vec![s];
            for da in -1i64..=1 {
                for db in -1i64..=1 {
                    if da == 0 && db == 0 {
                        continue;
                    }
                    if spec.neighborhood == Neighborhood::VonNeumann && da != 0 && db != 0 {
                        continue;
                    }
                    let a = here.a as i64 + da;
                    let b = here.b as i64 + db;
                    if a < 1 || b < 1 {
                        continue;
                    }
                    let c = Cell::new(a as usize, b as usize);
                    if spec.contains(c) && !spec.is_obstacle(c) {
                        set.push(spec.strategy(c));
                    }
                }
            }
            set.sort_unstable();
            set
        })
        .collect();
    Restriction::new(&dims, vec![per_cell; spec.agents])
}

/// Everything needed to run the design-then-simulate pipeline on a grid.
#[derive(Debug, Clone)]
pub struct Demo {
    pub spec: GridSpec,
    /// The networked game without utilities; design supplies them.
    pub game: NetworkedGame,
    pub objective: GameFunction,
    pub restriction: Restriction,
    pub schedule: BetaSchedule,
    pub steps: u64,
    pub seeds: Vec<u64>,
}

pub const DEMO_BETA_SLOPE: f64 = 0.02;
pub const DEMO_STEPS: u64 = 10_000;
pub const DEMO_SEEDS: u64 = 50;

pub fn build_demo(spec: GridSpec, limits: &Limits) -> Result<Demo> {
    spec.validate()?;
    let game = NetworkedGame::new(spec.dims()?, spec.neighbors())?;
    let objective = build_objective(&spec, limits)?;
    let restriction = build_restriction(&spec)?;
    Ok(Demo {
        spec,
        game,
        objective,
        restriction,
        schedule: BetaSchedule::Linear(DEMO_BETA_SLOPE),
        steps: DEMO_STEPS,
        seeds: (0..DEMO_SEEDS).collect(),
    })
}
