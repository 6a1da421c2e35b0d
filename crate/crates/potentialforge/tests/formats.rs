mod common;

use std::path::Path;

use common::{binary_line, corner_objective, random_potential_game};
use potentialforge::commands::replica_path;
use potentialforge::format::{
    parse_beta, trajectory_csv, FormatError, GameFile, GridFile, ObjectiveFile, RestrictionFile,
    UtilitiesFile,
};
use potentialforge_core::game::GameFunction;
use potentialforge_core::grid::{build_restriction, GridSpec};
use potentialforge_core::learning::{BetaSchedule, Record, Stream, Trajectory};
use potentialforge_core::stp::{Dims, Profile};
use potentialforge_core::Limits;

fn parse(json: &str) -> Result<potentialforge::format::GameInput, FormatError> {
    let file: GameFile = serde_json::from_str(json).unwrap();
    file.parse(&Limits::default())
}

fn field_of(e: FormatError) -> String {
    match e {
        FormatError::Field { field, .. } => field,
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn game_file_round_trip() {
    let (game, p) = random_potential_game(&mut Stream::new(1, 0), Dims::new(vec![2, 3]).unwrap());
    let file = GameFile::from_game(&game, Some(&p));
    let text = serde_json::to_string(&file).unwrap();
    let back: GameFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, file);
    let input = back.parse(&Limits::default()).unwrap();
    assert_eq!(input.game, game);
    assert_eq!(input.objective.unwrap(), p);
}

#[test]
fn sparse_objective_uses_one_based_indices() {
    let input = parse(
        r#"{"players":3,"cardinalities":[2,2,2],"neighbors":[[2],[1,3],[2]],"objective":{"sparse":{"6":1,"8":1.0}}}"#,
    )
    .unwrap();
    // profiles (2,1,2) and (2,2,2) have 1-based indices 6 and 8
    assert_eq!(input.objective.unwrap(), corner_objective());
    assert_eq!(input.game, binary_line());
}

#[test]
fn invalid_game_fields_are_named() {
    let cases = [
        (
            r#"{"players":2,"cardinalities":[2],"neighbors":[[],[]]}"#,
            "cardinalities",
        ),
        (
            r#"{"players":2,"cardinalities":[2,1],"neighbors":[[],[]]}"#,
            "cardinalities",
        ),
        (
            r#"{"players":2,"cardinalities":[2,2],"neighbors":[[]]}"#,
            "neighbors",
        ),
        (
            r#"{"players":2,"cardinalities":[2,2],"neighbors":[[0],[]]}"#,
            "neighbors[0]",
        ),
        (
            r#"{"players":2,"cardinalities":[2,2],"neighbors":[[1],[]]}"#,
            "neighbors",
        ),
        (
            r#"{"players":2,"cardinalities":[2,2],"neighbors":[[],[]],"objective":{"dense":[1]}}"#,
            "objective.dense",
        ),
        (
            r#"{"players":2,"cardinalities":[2,2],"neighbors":[[],[]],"objective":{"sparse":{"5":1}}}"#,
            "objective.sparse",
        ),
        (
            r#"{"players":2,"cardinalities":[2,2],"neighbors":[[],[]],"objective":{"sparse":{"a":1}}}"#,
            "objective.sparse",
        ),
        (
            r#"{"players":2,"cardinalities":[2,2],"neighbors":[[],[]],"utilities":[{"scope":[1],"values":[0,0]},{"scope":[1],"values":[0,0]}]}"#,
            "utilities",
        ),
        (
            r#"{"players":2,"cardinalities":[2,2],"neighbors":[[],[]],"utilities":[{"scope":[3],"values":[0,0]}]}"#,
            "utilities[0].scope",
        ),
    ];
    for (json, expected) in cases {
        assert_eq!(field_of(parse(json).unwrap_err()), expected, "{json}");
    }
    assert!(
        parse(r#"{"players":1,"cardinalities":[2],"neighbors":[[]]}"#)
            .unwrap()
            .objective()
            .is_err()
    );
}

#[test]
fn utilities_file_accepts_both_shapes() {
    let dims = Dims::new(vec![2, 2, 2]).unwrap();
    let plain: UtilitiesFile = serde_json::from_str(
        r#"{"utilities":[{"scope":[1,2],"values":[1,2,3,4]},{"scope":[1,2,3],"values":[0,0,0,0,0,0,0,0]},{"scope":[2,3],"values":[0,0,0,0]}]}"#,
    )
    .unwrap();
    let fs = plain.utilities(&dims).unwrap();
    assert_eq!(
        fs[0],
        GameFunction::new(&dims, vec![0, 1], vec![1., 2., 3., 4.]).unwrap()
    );
    let game = plain.attach(&binary_line()).unwrap();
    assert!(game.utilities().is_some());
    let solution: UtilitiesFile = serde_json::from_str(
        r#"{"tolerance":1e-9,"objective_norm":1,"players":[
            {"player":2,"scope":[1,2,3],"xi1":[0,0,0,0,0,0,0,0],"xi2":[0,0,0,0],"residual":0,"feasible":true},
            {"player":1,"scope":[1,2],"xi1":[1,2,3,4],"xi2":[0,0],"residual":0,"feasible":true},
            {"player":3,"scope":[2,3],"xi1":[0,0,0,0],"xi2":[0,0,0,0],"residual":0,"feasible":true}]}"#,
    )
    .unwrap();
    assert_eq!(solution.utilities(&dims).unwrap(), fs);
}

#[test]
fn grid_file_round_trip_and_validation() {
    let spec = GridSpec::default();
    let file = GridFile::from_spec(&spec);
    let text = serde_json::to_string(&file).unwrap();
    assert_eq!(
        text,
        r#"{"width":3,"height":3,"obstacles":[[2,2]],"target":[3,3],"agents":3,"comm_edges":[[1,2],[2,3]],"initial":[[1,1],[1,3],[3,1]]}"#
    );
    assert_eq!(
        serde_json::from_str::<GridFile>(&text)
            .unwrap()
            .to_spec()
            .unwrap(),
        spec
    );
    let mut bad = file.clone();
    bad.comm_edges.push([1, 4]);
    assert_eq!(field_of(bad.to_spec().unwrap_err()), "comm_edges[2]");
    let mut bad = file;
    bad.initial[0] = [2, 2];
    assert_eq!(field_of(bad.to_spec().unwrap_err()), "grid");
}

#[test]
fn restriction_file_round_trip() {
    let spec = GridSpec::default();
    let r = build_restriction(&spec).unwrap();
    let file = RestrictionFile::from_restriction(&r);
    assert_eq!(file.sets[0][0], vec![1, 2, 4]);
    assert_eq!(file.to_restriction(&spec.dims().unwrap()).unwrap(), r);
    let bad = RestrictionFile {
        sets: vec![vec![vec![1], vec![3]]],
    };
    assert_eq!(
        field_of(
            bad.to_restriction(&Dims::new(vec![2]).unwrap())
                .unwrap_err()
        ),
        "sets[0][1]"
    );
}

#[test]
fn beta_grammar() {
    assert_eq!(
        parse_beta("const:0.5").unwrap(),
        BetaSchedule::Constant(0.5)
    );
    assert_eq!(
        parse_beta("linear:0.02").unwrap(),
        BetaSchedule::Linear(0.02)
    );
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("b.csv");
    std::fs::write(&table, "10,1\n20 , 3\n").unwrap();
    let s = parse_beta(&format!("table:{}", table.display())).unwrap();
    assert_eq!(s, BetaSchedule::Table(vec![(10, 1.0), (20, 3.0)]));
    std::fs::write(&table, "20,1\n10,3\n").unwrap();
    assert!(parse_beta(&format!("table:{}", table.display())).is_err());
    std::fs::write(&table, "1,2,3\n").unwrap();
    assert!(parse_beta(&format!("table:{}", table.display())).is_err());
    assert!(parse_beta("const:inf").is_err());
    assert!(parse_beta("exp:1").is_err());
}

#[test]
fn trajectory_csv_layout() {
    let dims = Dims::new(vec![2, 3]).unwrap();
    let traj = Trajectory {
        seed: 0,
        replica: 0,
        records: vec![
            Record {
                t: 0,
                beta: 0.0,
                player: None,
                profile: Profile::new(vec![0, 0]),
                objective: 0.1,
            },
            Record {
                t: 1,
                beta: 0.02,
                player: Some(1),
                profile: Profile::new(vec![0, 2]),
                objective: -1.0 / 3.0,
            },
        ],
    };
    let csv = trajectory_csv(&dims, &traj);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,beta,player,profile_index,x_1,x_2,phi");
    assert_eq!(
        lines[1],
        "0,0.0000000000000000e0,0,1,1,1,1.0000000000000001e-1"
    );
    assert_eq!(
        lines[2],
        "1,2.0000000000000000e-2,2,3,1,3,-3.3333333333333331e-1"
    );
    // 17 significant digits round-trip every value
    let phi: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(phi, -1.0 / 3.0);
}

#[test]
fn replica_paths() {
    assert_eq!(
        replica_path(Path::new("out/t.csv"), 0, 1),
        Path::new("out/t.csv")
    );
    assert_eq!(
        replica_path(Path::new("out/t.csv"), 2, 3),
        Path::new("out/t.r2.csv")
    );
    assert_eq!(replica_path(Path::new("t"), 1, 2), Path::new("t.r1"));
}

#[test]
fn objective_serializes_as_tagged_object() {
    let o = ObjectiveFile::Dense(vec![1.0, 2.0]);
    assert_eq!(serde_json::to_string(&o).unwrap(), r#"{"dense":[1.0,2.0]}"#);
}
