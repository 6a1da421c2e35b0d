#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use potentialforge::format::{to_json, GameFile};
use potentialforge_core::game::{GameFunction, NetworkedGame};
use potentialforge_core::learning::Stream;
use potentialforge_core::stp::Dims;
use potentialforge_core::Limits;

pub fn pick(rng: &mut Stream, n: usize) -> usize {
    ((rng.uniform() * n as f64) as usize).min(n - 1)
}

pub fn random_values(rng: &mut Stream, len: usize) -> Vec<f64> {
    (0..len).map(|_| 4.0 * rng.uniform() - 2.0).collect()
}

/// Symmetric random graph, each pair linked with probability 1/2.
pub fn random_graph(rng: &mut Stream, n: usize) -> Vec<Vec<usize>> {
    let mut u = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.uniform() < 0.5 {
                u[i].push(j);
                u[j].push(i);
            }
        }
    }
    u
}

/// Full-information game with `c_i = P + d_i(x_{−i})`.
pub fn random_potential_game(rng: &mut Stream, dims: Dims) -> (NetworkedGame, Vec<f64>) {
    let p = random_values(rng, dims.total());
    let mut utilities = Vec::new();
    for i in 0..dims.players() {
        let others: Vec<usize> = (0..dims.players()).filter(|&j| j != i).collect();
        let len = dims.scoped_total(&others);
        let d = GameFunction::new(&dims, others, random_values(rng, len))
            .unwrap()
            .lift(&dims, &Limits::default())
            .unwrap();
        let c = p.iter().zip(d).map(|(a, b)| a + b).collect();
        utilities.push(GameFunction::full(&dims, c).unwrap());
    }
    let g = NetworkedGame::full_information(dims)
        .unwrap()
        .with_utilities(utilities)
        .unwrap();
    (g, p)
}

/// Three binary players on the line 1–2–3.
pub fn binary_line() -> NetworkedGame {
    NetworkedGame::new(
        Dims::new(vec![2, 2, 2]).unwrap(),
        vec![vec![1], vec![0, 2], vec![1]],
    )
    .unwrap()
}

/// `φ = 1{x_1 = x_3 = 2}` on the binary line, indexed 0-based.
pub fn corner_objective() -> Vec<f64> {
    let d = Dims::new(vec![2, 2, 2]).unwrap();
    d.profiles()
        .map(|p| {
            if p.get(0) == 1 && p.get(2) == 1 {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

pub fn write_game(
    dir: &Path,
    name: &str,
    game: &NetworkedGame,
    objective: Option<&[f64]>,
) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, to_json(&GameFile::from_game(game, objective))).unwrap();
    path
}

pub fn cli(args: &[&str]) -> Output {
    cli_env(args, &[])
}

pub fn cli_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_potentialforge"));
    cmd.args(args).env_remove("POTENTIALFORGE_MAX_MATERIALIZE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

pub fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
