#![allow(dead_code)]

use potentialforge_core::design::{solve_min_norm, DesignOptions};
use potentialforge_core::game::{GameFunction, NetworkedGame};
use potentialforge_core::learning::Stream;
use potentialforge_core::stp::Dims;
use potentialforge_core::Limits;

pub fn uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

pub fn pick(rng: &mut Stream, n: usize) -> usize {
    ((rng.uniform() * n as f64) as usize).min(n - 1)
}

/// Random dims with `players` players and at most `max_card` strategies each.
pub fn random_dims(rng: &mut Stream, players: usize, max_card: usize) -> Dims {
    Dims::new((0..players).map(|_| 2 + pick(rng, max_card - 1)).collect()).unwrap()
}

/// Random neighbor sets; each unordered pair is linked with probability 1/2.
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

pub fn random_game(rng: &mut Stream, max_players: usize, max_card: usize) -> NetworkedGame {
    let n = 1 + pick(rng, max_players);
    let dims = random_dims(rng, n, max_card);
    let g = random_graph(rng, n);
    NetworkedGame::new(dims, g).unwrap()
}

pub fn random_values(rng: &mut Stream, len: usize) -> Vec<f64> {
    (0..len).map(|_| uniform(rng, -2.0, 2.0)).collect()
}

/// A sum of random unary terms and random pairwise terms over the edges of a
/// symmetric graph. Each term involving `i` lies inside `N_i` and every other
/// term avoids `i`, so such objectives are always designable on that graph.
pub fn local_objective(rng: &mut Stream, game: &NetworkedGame) -> Vec<f64> {
    let dims = game.dims();
    let mut scopes: Vec<Vec<usize>> = (0..game.players()).map(|i| vec![i]).collect();
    for i in 0..game.players() {
        for &j in game.neighbors(i) {
            if j > i {
                scopes.push(vec![i, j]);
            }
        }
    }
    let mut phi = vec![0.0; dims.total()];
    for scope in scopes {
        let len = dims.scoped_total(&scope);
        let f = GameFunction::new(dims, scope, random_values(rng, len)).unwrap();
        for (a, b) in phi
            .iter_mut()
            .zip(f.lift(dims, &Limits::default()).unwrap())
        {
            *a += b;
        }
    }
    phi
}

/// A random exact potential game: full information, `c_i = P + d_i` with
/// `d_i` independent of `x_i`.
pub fn random_potential_game(rng: &mut Stream, dims: Dims) -> (NetworkedGame, Vec<f64>) {
    let k = dims.total();
    let p = random_values(rng, k);
    let mut utilities = Vec::new();
    for i in 0..dims.players() {
        let others: Vec<usize> = (0..dims.players()).filter(|&j| j != i).collect();
        let len = dims.scoped_total(&others);
        let d = GameFunction::new(&dims, others, random_values(rng, len))
            .unwrap()
            .lift(&dims, &Limits::default())
            .unwrap();
        let c: Vec<f64> = p.iter().zip(d).map(|(a, b)| a + b).collect();
        utilities.push(GameFunction::full(&dims, c).unwrap());
    }
    let g = NetworkedGame::full_information(dims)
        .unwrap()
        .with_utilities(utilities)
        .unwrap();
    (g, p)
}

/// A random local potential game obtained by designing utilities for a
/// random local objective.
pub fn random_designed_game(rng: &mut Stream, dims: Dims) -> (NetworkedGame, Vec<f64>) {
    let n = dims.players();
    let g = NetworkedGame::new(dims, random_graph(rng, n)).unwrap();
    let phi = local_objective(rng, &g);
    let sol = solve_min_norm(&g, &phi, &DesignOptions::default()).unwrap();
    assert!(sol.feasible());
    (sol.designed_game(&g).unwrap(), phi)
}
