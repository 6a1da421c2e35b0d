//! JSON and CSV file formats.
//!
//! All files number players, strategies and profiles from 1. Profiles are
//! ordered lexicographically with player 1 most significant, so profile
//! `(s_1, …, s_n)` has index `1 + Σ_j (s_j − 1)·Π_{l>j} k_l`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use potentialforge_core::design::{DesignSolution, PlayerDesign, SolveMethod};
use potentialforge_core::game::{GameFunction, NetworkedGame};
use potentialforge_core::grid::{Cell, GridSpec, Neighborhood};
use potentialforge_core::learning::{BetaSchedule, Restriction, Trajectory};
use potentialforge_core::stp::Dims;
use potentialforge_core::Limits;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field(field: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        field: field.into(),
        message: message.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FormatError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// 1-based ids to 0-based, checking the range.
fn zero_based(ids: &[usize], bound: usize, name: &str) -> Result<Vec<usize>, FormatError> {
    ids.iter()
        .map(|&v| {
            if v == 0 || v > bound {
                Err(field(name, format!("{v} is outside 1..={bound}")))
            } else {
                Ok(v - 1)
            }
        })
        .collect()
}

fn one_based(ids: &[usize]) -> Vec<usize> {
    ids.iter().map(|v| v + 1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveFile {
    Dense(Vec<f64>),
    /// 1-based profile index (as a string key) to value; missing entries are 0.
    Sparse(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionFile {
    pub scope: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub players: usize,
    pub cardinalities: Vec<usize>,
    pub neighbors: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<FunctionFile>>,
}

/// A parsed game file.
#[derive(Debug, Clone)]
pub struct GameInput {
    /// With utilities attached when the file has them.
    pub game: NetworkedGame,
    pub objective: Option<Vec<f64>>,
}

impl GameInput {
    pub fn objective(&self) -> Result<&[f64], FormatError> {
        self.objective
            .as_deref()
            .ok_or_else(|| field("objective", "missing"))
    }
}

impl GameFile {
    pub fn read(path: &Path) -> Result<Self, FormatError> {
        read_json(path)
    }

    pub fn parse(&self, limits: &Limits) -> Result<GameInput, FormatError> {
        if self.cardinalities.len() != self.players {
            return Err(field(
                "cardinalities",
                format!(
                    "expected {} entries, found {}",
                    self.players,
                    self.cardinalities.len()
                ),
            ));
        }
        let dims = Dims::with_limits(self.cardinalities.clone(), limits)
            .map_err(|e| field("cardinalities", e.to_string()))?;
        if self.neighbors.len() != self.players {
            return Err(field(
                "neighbors",
                format!(
                    "expected {} lists, found {}",
                    self.players,
                    self.neighbors.len()
                ),
            ));
        }
        let neighbors = self
            .neighbors
            .iter()
            .enumerate()
            .map(|(i, u)| zero_based(u, self.players, &format!("neighbors[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut game = NetworkedGame::new(dims.clone(), neighbors)
            .map_err(|e| field("neighbors", e.to_string()))?;
        let objective = self
            .objective
            .as_ref()
            .map(|o| parse_objective(o, dims.total()))
            .transpose()?;
        if let Some(utilities) = &self.utilities {
            let fs = parse_functions(utilities, &dims, "utilities")?;
            game = game
                .with_utilities(fs)
                .map_err(|e| field("utilities", e.to_string()))?;
        }
        Ok(GameInput { game, objective })
    }

    pub fn from_game(game: &NetworkedGame, objective: Option<&[f64]>) -> Self {
        let dims = game.dims();
        Self {
            players: game.players(),
            cardinalities: dims.cardinalities().to_vec(),
            neighbors: (0..game.players())
                .map(|i| one_based(game.neighbors(i)))
                .collect(),
            objective: objective.map(|v| ObjectiveFile::Dense(v.to_vec())),
            utilities: game.utilities().map(|us| {
                us.iter()
                    .map(|u| FunctionFile {
                        scope: one_based(u.scope()),
                        values: u.values().to_vec(),
                    })
                    .collect()
            }),
        }
    }
}

fn parse_objective(o: &ObjectiveFile, k: usize) -> Result<Vec<f64>, FormatError> {
    match o {
        ObjectiveFile::Dense(v) => {
            if v.len() != k {
                return Err(field(
                    "objective.dense",
                    format!("expected {k} values, found {}", v.len()),
                ));
            }
            Ok(v.clone())
        }
        ObjectiveFile::Sparse(m) => {
            let mut v = vec![0.0; k];
            for (key, &value) in m {
                let idx: usize = key.parse().map_err(|_| {
                    field("objective.sparse", format!("key {key:?} is not an index"))
                })?;
                if idx == 0 || idx > k {
                    return Err(field(
                        "objective.sparse",
                        format!("index {idx} is outside 1..={k}"),
                    ));
                }
                v[idx - 1] = value;
            }
            Ok(v)
        }
    }
}

fn parse_functions(
    fs: &[FunctionFile],
    dims: &Dims,
    name: &str,
) -> Result<Vec<GameFunction>, FormatError> {
    fs.iter()
        .enumerate()
        .map(|(i, f)| {
            let scope = zero_based(&f.scope, dims.players(), &format!("{name}[{i}].scope"))?;
            GameFunction::new(dims, scope, f.values.clone())
                .map_err(|e| field(format!("{name}[{i}]"), e.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSolutionFile {
    pub player: usize,
    pub scope: Vec<usize>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub residual: f64,
    #[serde(default)]
    pub relative_residual: f64,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub tolerance: f64,
    pub objective_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_mode: Option<String>,
    pub players: Vec<PlayerSolutionFile>,
}

fn method_name(m: SolveMethod) -> String {
    match m {
        SolveMethod::DensePseudoInverse => "dense".to_string(),
        SolveMethod::Cgls { iterations } => format!("cgls ({iterations} iterations)"),
    }
}

impl SolutionFile {
    pub fn from_solution(s: &DesignSolution, zeta_mode: Option<&str>) -> Self {
        Self {
            tolerance: s.tolerance,
            objective_norm: s.objective_norm,
            zeta_mode: zeta_mode.map(str::to_string),
            players: s
                .players
                .iter()
                .map(|p: &PlayerDesign| PlayerSolutionFile {
                    player: p.player + 1,
                    scope: one_based(&p.scope),
                    xi1: p.xi1.clone(),
                    xi2: p.xi2.clone(),
                    residual: p.residual,
                    relative_residual: p.relative_residual,
                    feasible: p.feasible,
                    method: Some(method_name(p.method)),
                })
                .collect(),
        }
    }

    /// Utility `c_i` of every player, in player order.
    pub fn utilities(&self, dims: &Dims) -> Result<Vec<GameFunction>, FormatError> {
        let mut out: Vec<Option<GameFunction>> = vec![None; dims.players()];
        for (i, p) in self.players.iter().enumerate() {
            if p.player == 0 || p.player > dims.players() {
                return Err(field(
                    format!("players[{i}].player"),
                    format!("{} is outside 1..={}", p.player, dims.players()),
                ));
            }
            let scope = zero_based(&p.scope, dims.players(), &format!("players[{i}].scope"))?;
            let f = GameFunction::new(dims, scope, p.xi1.clone())
                .map_err(|e| field(format!("players[{i}].xi1"), e.to_string()))?;
            out[p.player - 1] = Some(f);
        }
        out.into_iter()
            .enumerate()
            .map(|(i, f)| {
                f.ok_or_else(|| field("players", format!("no entry for player {}", i + 1)))
            })
            .collect()
    }
}

/// A utilities file: either a design-solution file or `{"utilities": [...]}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum UtilitiesFile {
    Solution(SolutionFile),
    Plain { utilities: Vec<FunctionFile> },
}

impl UtilitiesFile {
    pub fn read(path: &Path) -> Result<Self, FormatError> {
        read_json(path)
    }

    pub fn utilities(&self, dims: &Dims) -> Result<Vec<GameFunction>, FormatError> {
        match self {
            UtilitiesFile::Solution(s) => s.utilities(dims),
            UtilitiesFile::Plain { utilities } => parse_functions(utilities, dims, "utilities"),
        }
    }

    /// Attaches the file's utilities to `game`, replacing any it had.
    pub fn attach(&self, game: &NetworkedGame) -> Result<NetworkedGame, FormatError> {
        let fs = self.utilities(game.dims())?;
        let bare = NetworkedGame::new(
            game.dims().clone(),
            (0..game.players())
                .map(|i| game.neighbors(i).to_vec())
                .collect(),
        )
        .expect("neighbors come from a valid game");
        bare.with_utilities(fs)
            .map_err(|e| field("utilities", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub obstacles: Vec<[usize; 2]>,
    pub target: [usize; 2],
    pub agents: usize,
    #[serde(default)]
    pub comm_edges: Vec<[usize; 2]>,
    pub initial: Vec<[usize; 2]>,
    /// `"von_neumann"` (default) or `"chebyshev"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighborhood: Option<String>,
}

impl GridFile {
    pub fn read(path: &Path) -> Result<Self, FormatError> {
        read_json(path)
    }

    pub fn from_spec(spec: &GridSpec) -> Self {
        let cell = |c: &Cell| [c.a, c.b];
        Self {
            width: spec.width,
            height: spec.height,
            obstacles: spec.obstacles.iter().map(cell).collect(),
            target: cell(&spec.target),
            agents: spec.agents,
            comm_edges: spec
                .comm_edges
                .iter()
                .map(|&(u, v)| [u + 1, v + 1])
                .collect(),
            initial: spec.initial.iter().map(cell).collect(),
            neighborhood: match spec.neighborhood {
                Neighborhood::VonNeumann => None,
                Neighborhood::Chebyshev => Some("chebyshev".into()),
            },
        }
    }

    pub fn to_spec(&self) -> Result<GridSpec, FormatError> {
        let neighborhood = match self.neighborhood.as_deref() {
            None | Some("von_neumann") => Neighborhood::VonNeumann,
            Some("chebyshev") => Neighborhood::Chebyshev,
            Some(other) => return Err(field("neighborhood", format!("unknown value {other:?}"))),
        };
        let comm_edges = self
            .comm_edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let v = zero_based(e, self.agents, &format!("comm_edges[{i}]"))?;
                Ok((v[0], v[1]))
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let cell = |c: &[usize; 2]| Cell::new(c[0], c[1]);
        let spec = GridSpec {
            width: self.width,
            height: self.height,
            obstacles: self.obstacles.iter().map(cell).collect(),
            target: cell(&self.target),
            agents: self.agents,
            comm_edges,
            initial: self.initial.iter().map(cell).collect(),
            neighborhood,
        };
        spec.validate().map_err(|e| field("grid", e.to_string()))?;
        Ok(spec)
    }
}

/// `{"sets": [[R_i(1), R_i(2), …] for each player]}`, all 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionFile {
    pub sets: Vec<Vec<Vec<usize>>>,
}

impl RestrictionFile {
    pub fn read(path: &Path) -> Result<Self, FormatError> {
        read_json(path)
    }

    pub fn from_restriction(r: &Restriction) -> Self {
        Self {
            sets: r
                .sets()
                .iter()
                .map(|p| p.iter().map(|s| one_based(s)).collect())
                .collect(),
        }
    }

    pub fn to_restriction(&self, dims: &Dims) -> Result<Restriction, FormatError> {
        let sets = self
            .sets
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let k = dims.cardinalities().get(i).copied().unwrap_or(0);
                p.iter()
                    .enumerate()
                    .map(|(x, s)| zero_based(s, k, &format!("sets[{i}][{x}]")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Restriction::new(dims, sets).map_err(|e| field("sets", e.to_string()))
    }
}

/// Parses `const:<v>`, `linear:<c>` or `table:<path>`. A table file holds
/// one `t,beta` pair per line (comma or whitespace separated); blank lines
/// and lines starting with `#` are skipped.
pub fn parse_beta(expr: &str) -> Result<BetaSchedule, FormatError> {
    let number = |s: &str| -> Result<f64, FormatError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| field("beta", format!("{s:?} is not a number")))
    };
    let schedule = if let Some(v) = expr.strip_prefix("const:") {
        BetaSchedule::Constant(number(v)?)
    } else if let Some(v) = expr.strip_prefix("linear:") {
        BetaSchedule::Linear(number(v)?)
    } else if let Some(path) = expr.strip_prefix("table:") {
        let text = read_text(Path::new(path))?;
        let mut knots = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let [t, b] = parts[..] else {
                return Err(field(
                    "beta",
                    format!("{path}:{}: expected `t,beta`", n + 1),
                ));
            };
            let t: u64 = t
                .parse()
                .map_err(|_| field("beta", format!("{path}:{}: bad step {t:?}", n + 1)))?;
            knots.push((t, number(b)?));
        }
        BetaSchedule::Table(knots)
    } else {
        return Err(field(
            "beta",
            format!("{expr:?} is not const:<v>, linear:<c> or table:<path>"),
        ));
    };
    schedule
        .validate()
        .map_err(|e| field("beta", e.to_string()))?;
    Ok(schedule)
}

/// Trajectory CSV: `t,beta,player,profile_index,x_1,…,x_n,phi`. The initial
/// row has player 0.
pub fn trajectory_csv(dims: &Dims, trajectory: &Trajectory) -> String {
    let n = dims.players();
    let mut out = String::from("t,beta,player,profile_index");
    for i in 1..=n {
        let _ = write!(out, ",x_{i}");
    }
    out.push_str(",phi\n");
    for r in &trajectory.records {
        let idx = dims
            .encode(&r.profile)
            .expect("recorded profiles are valid")
            + 1;
        let _ = write!(
            out,
            "{},{:.16e},{},{}",
            r.t,
            r.beta,
            r.player.map_or(0, |p| p + 1),
            idx
        );
        for &s in r.profile.strategies() {
            let _ = write!(out, ",{}", s + 1);
        }
        let _ = writeln!(out, ",{:.16e}", r.objective);
    }
    out
}

/// Per-agent coordinate series `t,a,b` of a gridworld trajectory.
pub fn agent_series_csv(spec: &GridSpec, trajectory: &Trajectory, agent: usize) -> String {
    let mut out = String::from("t,a,b\n");
    for r in &trajectory.records {
        let c = spec.cell(r.profile.get(agent));
        let _ = writeln!(out, "{},{},{}", r.t, c.a, c.b);
    }
    out
}
