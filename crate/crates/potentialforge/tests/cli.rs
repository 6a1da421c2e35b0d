mod common;

use common::{binary_line, cli, cli_env, corner_objective, p, stdout_json, write_game};
use potentialforge::format::{to_json, RestrictionFile, SolutionFile};
use potentialforge_core::game::{GameFunction, NetworkedGame};
use potentialforge_core::grid::{build_demo, GridSpec};
use potentialforge_core::stp::Dims;
use potentialforge_core::Limits;

fn demo_game(dir: &std::path::Path) -> std::path::PathBuf {
    let limits = Limits::default();
    let demo = build_demo(GridSpec::default(), &limits).unwrap();
    let phi = demo.objective.lift(demo.game.dims(), &limits).unwrap();
    write_game(dir, "demo.json", &demo.game, Some(&phi))
}

/// Two binary players with `c_1 = c_2 = P = (0, 1, 1, 2)`.
fn count_game(dir: &std::path::Path) -> std::path::PathBuf {
    let d = Dims::new(vec![2, 2]).unwrap();
    let p = vec![0., 1., 1., 2.];
    let f = GameFunction::full(&d, p.clone()).unwrap();
    let g = NetworkedGame::full_information(d)
        .unwrap()
        .with_utilities(vec![f.clone(), f])
        .unwrap();
    write_game(dir, "count.json", &g, Some(&p))
}

#[test]
fn check_reports_feasible_demo() {
    let dir = tempfile::tempdir().unwrap();
    let game = demo_game(dir.path());
    let out = cli(&["check", p(&game)]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["feasible"], true);
    for player in r["players"].as_array().unwrap() {
        assert!(player["relative_residual"].as_f64().unwrap() <= 1e-9);
    }
}

#[test]
fn check_reports_infeasible_line_graph() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(
        dir.path(),
        "line.json",
        &binary_line(),
        Some(&corner_objective()),
    );
    let out = cli(&["check", p(&game)]);
    assert_eq!(out.status.code(), Some(2));
    let r = stdout_json(&out);
    let players = r["players"].as_array().unwrap();
    assert!(players[0]["relative_residual"].as_f64().unwrap() > 1e-9);
    assert_eq!(players[1]["feasible"], true);
    assert!(players[2]["relative_residual"].as_f64().unwrap() > 1e-9);
}

#[test]
fn missing_objective_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path(), "bare.json", &binary_line(), None);
    let out = cli(&["check", p(&game)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("objective"));
}

#[test]
fn malformed_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"players":2,"cardinalities":[2,2],"neighbors":[[2],[3]],"objective":{"dense":[0,0,0,0]}}"#,
    )
    .unwrap();
    let out = cli(&["check", p(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("neighbors[1]"));
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(cli(&["check", p(&path)]).status.code(), Some(1));
    assert_eq!(
        cli(&["check", "/nonexistent/game.json"]).status.code(),
        Some(1)
    );
}

#[test]
fn solve_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let game = demo_game(dir.path());
    for mode in ["zero", "ones"] {
        let sol = dir.path().join(format!("sol-{mode}.json"));
        let out = cli(&["solve", p(&game), "-o", p(&sol), "--zeta-mode", mode]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v = cli(&["verify", p(&game), p(&sol)]);
        assert_eq!(v.status.code(), Some(0));
        assert!(stdout_json(&v)["max_deviation"].as_f64().unwrap() <= 1e-8);
    }
    let zero = std::fs::read_to_string(dir.path().join("sol-zero.json")).unwrap();
    let ones = std::fs::read_to_string(dir.path().join("sol-ones.json")).unwrap();
    assert_ne!(zero, ones);
}

#[test]
fn solve_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let game = demo_game(dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    cli(&["solve", p(&game), "-o", p(&a)]);
    cli(&["solve", p(&game), "-o", p(&b)]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn zeta_file_mode_reads_per_player_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(
        dir.path(),
        "line.json",
        &binary_line(),
        Some(&[0., 1., 2., 3., 0., 1., 2., 3.]),
    );
    let zeta = dir.path().join("zeta.json");
    // k_{U(i)} is 2, 4, 2 on the binary line
    std::fs::write(&zeta, "[[1, 2], [0.5, 0, 0, 1], [3, -1]]").unwrap();
    let sol = dir.path().join("sol.json");
    let out = cli(&[
        "solve",
        p(&game),
        "-o",
        p(&sol),
        "--zeta-mode",
        "file",
        "--zeta-file",
        p(&zeta),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(cli(&["verify", p(&game), p(&sol)]).status.code(), Some(0));
    std::fs::write(&zeta, "[[1, 2, 3], [0, 0, 0, 0], [0, 0]]").unwrap();
    let out = cli(&[
        "solve",
        p(&game),
        "-o",
        p(&sol),
        "--zeta-mode",
        "file",
        "--zeta-file",
        p(&zeta),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infeasible_solve_needs_explicit_flag() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(
        dir.path(),
        "line.json",
        &binary_line(),
        Some(&corner_objective()),
    );
    let sol = dir.path().join("sol.json");
    let out = cli(&["solve", p(&game), "-o", p(&sol)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!sol.exists());
    let out = cli(&["solve", p(&game), "-o", p(&sol), "--allow-infeasible"]);
    assert_eq!(out.status.code(), Some(0));
    let file: SolutionFile = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert!(!file.players[0].feasible && file.players[1].feasible);
    assert_eq!(cli(&["verify", p(&game), p(&sol)]).status.code(), Some(2));
}

#[test]
fn verify_rejects_own_action_noise() {
    let dir = tempfile::tempdir().unwrap();
    let game = demo_game(dir.path());
    let sol = dir.path().join("sol.json");
    cli(&["solve", p(&game), "-o", p(&sol)]);
    let mut file: SolutionFile =
        serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    // player 1's scope is (1, 2); bump entries with x_1 = 2 only
    for v in &mut file.players[0].xi1[9..18] {
        *v += 0.01;
    }
    std::fs::write(&sol, to_json(&file)).unwrap();
    let out = cli(&["verify", p(&game), p(&sol)]);
    assert_eq!(out.status.code(), Some(2));
    let dev = stdout_json(&out)["players"][0]["max_deviation"]
        .as_f64()
        .unwrap();
    assert!((dev - 0.01).abs() < 1e-12, "{dev}");
}

#[test]
fn verify_identical_interest_has_zero_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let game = count_game(dir.path());
    let out = cli(&["verify", p(&game), p(&game)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["max_deviation"].as_f64(), Some(0.0));
}

#[test]
fn verify_scope_mismatch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(
        dir.path(),
        "line.json",
        &binary_line(),
        Some(&corner_objective()),
    );
    let utilities = dir.path().join("u.json");
    std::fs::write(
        &utilities,
        r#"{"utilities":[{"scope":[1,2,3],"values":[0,0,0,0,0,0,0,0]},{"scope":[1,2,3],"values":[0,0,0,0,0,0,0,0]},{"scope":[2,3],"values":[0,0,0,0]}]}"#,
    )
    .unwrap();
    let out = cli(&["verify", p(&game), p(&utilities)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_zero_steps_writes_init_only() {
    let dir = tempfile::tempdir().unwrap();
    let game = count_game(dir.path());
    let csv = dir.path().join("t.csv");
    let out = cli(&[
        "simulate",
        p(&game),
        "--steps",
        "0",
        "--init",
        "2,1",
        "-o",
        p(&csv),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,beta,player,profile_index,x_1,x_2,phi");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,1.0000000000000000e0,0,3,2,1,1.0000000000000000e0"));
    let r = stdout_json(&out);
    assert_eq!(r["replicas"][0]["final_profile"], serde_json::json!([2, 1]));
    assert_eq!(r["replicas"][0]["argmax_fraction_last_tenth"], 0.0);
}

#[test]
fn simulate_is_deterministic_and_replicas_differ() {
    let dir = tempfile::tempdir().unwrap();
    let game = count_game(dir.path());
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |o: &str| {
        vec![
            "simulate".to_string(),
            p(&game).into(),
            "--steps".into(),
            "300".into(),
            "--seed".into(),
            "7".into(),
            "--beta".into(),
            "linear:0.01".into(),
            "-o".into(),
            o.into(),
            "--replicas".into(),
            "2".into(),
        ]
    };
    let run = |o: &std::path::Path| {
        let v = args(p(o));
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        cli(&refs)
    };
    assert_eq!(run(&a).status.code(), Some(0));
    assert_eq!(run(&b).status.code(), Some(0));
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("a.r0.csv"), read("b.r0.csv"));
    assert_eq!(read("a.r1.csv"), read("b.r1.csv"));
    assert_ne!(read("a.r0.csv"), read("a.r1.csv"));
    assert_eq!(
        String::from_utf8(read("a.r0.csv")).unwrap().lines().count(),
        302
    );
}

#[test]
fn brl_requires_valid_restriction() {
    let dir = tempfile::tempdir().unwrap();
    let game = count_game(dir.path());
    let csv = dir.path().join("t.csv");
    let out = cli(&["simulate", p(&game), "--learner", "brl", "-o", p(&csv)]);
    assert_eq!(out.status.code(), Some(1));
    let r = dir.path().join("r.json");
    std::fs::write(&r, r#"{"sets":[[[1,2],[2]],[[1,2],[1,2]]]}"#).unwrap();
    let out = cli(&[
        "simulate",
        p(&game),
        "--learner",
        "brl",
        "--restriction",
        p(&r),
        "-o",
        p(&csv),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let report = stdout_json(&out);
    assert_eq!(
        report["restriction"][0]["reversibility_witness"],
        serde_json::json!([1, 2])
    );
    std::fs::write(&r, r#"{"sets":[[[2],[1,2]],[[1,2],[1,2]]]}"#).unwrap();
    let out = cli(&[
        "simulate",
        p(&game),
        "--learner",
        "brl",
        "--restriction",
        p(&r),
        "-o",
        p(&csv),
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "a set must contain its own strategy"
    );
}

#[test]
fn bad_beta_expressions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let game = count_game(dir.path());
    let csv = dir.path().join("t.csv");
    for beta in ["fast", "const:-1", "linear:x", "table:/nonexistent"] {
        let out = cli(&["simulate", p(&game), "--beta", beta, "-o", p(&csv)]);
        assert_eq!(out.status.code(), Some(1), "{beta}");
    }
    let table = dir.path().join("beta.txt");
    std::fs::write(&table, "# t beta\n0,0\n5 2.5\n").unwrap();
    let expr = format!("table:{}", p(&table));
    let out = cli(&[
        "simulate",
        p(&game),
        "--beta",
        &expr,
        "--steps",
        "6",
        "-o",
        p(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let betas: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(betas[4], "0.0000000000000000e0");
    assert_eq!(betas[5], "2.5000000000000000e0");
}

#[test]
fn stationary_matches_known_chains() {
    let dir = tempfile::tempdir().unwrap();
    let game = count_game(dir.path());
    let out = cli(&[
        "stationary",
        p(&game),
        "--beta",
        &std::f64::consts::LN_2.to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    let mu: Vec<f64> = serde_json::from_value(r["classes"][0]["mu"].clone()).unwrap();
    for (a, b) in mu.iter().zip([1. / 9., 2. / 9., 2. / 9., 4. / 9.]) {
        assert!((a - b).abs() < 1e-12);
    }
    let out = cli(&["stationary", p(&game), "--beta", "0"]);
    let r = stdout_json(&out);
    assert!(r["max_gap"].as_f64().unwrap() <= 1e-12);
    let out = cli(&["stationary", p(&game), "--beta", "1", "--max-states", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demo_outputs_are_reverifiable() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("demo");
    let out = cli(&["demo", "-o", p(&out_dir), "--steps", "3000", "--seed", "4"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "grid.json",
        "game.json",
        "solution.json",
        "restriction.json",
        "trajectory.csv",
        "agent_1.csv",
        "agent_2.csv",
        "agent_3.csv",
        "summary.json",
    ] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let v = cli(&[
        "verify",
        p(&out_dir.join("game.json")),
        p(&out_dir.join("solution.json")),
    ]);
    assert_eq!(v.status.code(), Some(0));
    let series = std::fs::read_to_string(out_dir.join("agent_2.csv")).unwrap();
    assert_eq!(series.lines().next(), Some("t,a,b"));
    assert_eq!(series.lines().nth(1), Some("0,1,3"));
    assert_eq!(series.lines().count(), 3002);
    let r: RestrictionFile =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("restriction.json")).unwrap())
            .unwrap();
    assert_eq!(r.sets[0][4], vec![5]);
    // simulate from the written artifacts reproduces the demo trajectory
    let csv = dir.path().join("again.csv");
    let out = cli(&[
        "simulate",
        p(&out_dir.join("game.json")),
        p(&out_dir.join("solution.json")),
        "--learner",
        "brl",
        "--restriction",
        p(&out_dir.join("restriction.json")),
        "--beta",
        "linear:0.02",
        "--steps",
        "3000",
        "--seed",
        "4",
        "--init",
        "1,3,7",
        "-o",
        p(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(csv).unwrap(),
        std::fs::read(out_dir.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn grid_spec_file_drives_the_demo() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(
        &grid,
        r#"{"width":3,"height":2,"obstacles":[],"target":[3,2],"agents":2,"comm_edges":[[1,2]],"initial":[[1,1],[1,2]]}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("demo");
    let out = cli(&[
        "demo",
        "-o",
        p(&out_dir),
        "--grid",
        p(&grid),
        "--steps",
        "2000",
        "--seeds",
        "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = stdout_json(&out);
    assert_eq!(r["runs"].as_array().unwrap().len(), 3);
    assert!(out_dir.join("trajectory.s2.csv").exists());
    std::fs::write(
        &grid,
        r#"{"width":3,"height":2,"target":[4,2],"agents":1,"initial":[[1,1]]}"#,
    )
    .unwrap();
    let out = cli(&["demo", "-o", p(&out_dir), "--grid", p(&grid)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn demo_neighborhood_override() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("demo");
    let out = cli(&[
        "demo",
        "-o",
        p(&out_dir),
        "--steps",
        "100",
        "--neighborhood",
        "chebyshev",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: RestrictionFile =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("restriction.json")).unwrap())
            .unwrap();
    // cell (1,2) also reaches the diagonal cells (2,1) and (2,3)
    assert_eq!(r.sets[0][1], vec![1, 2, 3, 4, 6]);
    let grid = std::fs::read_to_string(out_dir.join("grid.json")).unwrap();
    assert!(grid.contains("chebyshev"));
}

#[test]
fn materialization_cap_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let game = demo_game(dir.path());
    let sol = dir.path().join("sol.json");
    let out = cli_env(
        &["solve", p(&game), "-o", p(&sol)],
        &[("POTENTIALFORGE_MAX_MATERIALIZE", "100")],
    );
    assert_eq!(out.status.code(), Some(0));
    let file: SolutionFile = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert!(file
        .players
        .iter()
        .all(|p| p.method.as_deref().unwrap().starts_with("cgls")));
    let out = cli_env(
        &["solve", p(&game), "-o", p(&sol), "--solver", "dense"],
        &[("POTENTIALFORGE_MAX_MATERIALIZE", "100")],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = cli_env(
        &["check", p(&game)],
        &[("POTENTIALFORGE_MAX_MATERIALIZE", "lots")],
    );
    assert_eq!(out.status.code(), Some(1));
}
