mod common;

use common::{fixture_path, system};
use mset_core::io::{parse_estimate, parse_problem, problem_to_json, Problem};
use mset_core::*;

const FIXTURES: [&str; 9] = [
    "fig10_system.json",
    "fig14_system.json",
    "fig16_system.json",
    "fig19_system.json",
    "fig21_tree.json",
    "fig22_top.json",
    "table4_set.json",
    "table9_knapsack.json",
    "table10_knapsack.json",
];

#[test]
fn round_trip_is_idempotent() {
    for f in FIXTURES {
        let text = std::fs::read_to_string(fixture_path(f)).unwrap();
        let p1 = parse_problem(&text).unwrap();
        let j1 = problem_to_json(&p1);
        let p2 = parse_problem(&j1.to_string()).unwrap_or_else(|e| panic!("{f}: {e}\n{j1:#}"));
        assert_eq!(p1, p2, "{f}");
        assert_eq!(j1, problem_to_json(&p2), "{f}");
    }
}

#[test]
fn fixture_kinds() {
    let kinds: Vec<&str> = FIXTURES
        .iter()
        .map(|f| match parse_problem(&std::fs::read_to_string(fixture_path(f)).unwrap()).unwrap() {
            Problem::EstimateSet(_) => "set",
            Problem::System(..) => "system",
            Problem::Tree(_) => "tree",
            Problem::Knapsack(_) => "knapsack",
        })
        .collect();
    assert_eq!(kinds, ["system", "system", "system", "system", "tree", "system", "set", "knapsack", "knapsack"]);
}

#[test]
fn fig10_shape() {
    let (sys, opts) = system("fig10_system.json");
    assert_eq!(sys.components.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["X", "Y", "Z"]);
    assert_eq!(sys.components.iter().map(|c| c.alternatives.len()).sum::<usize>(), 10);
    assert_eq!(opts.mode, synthesis::SynthesisMode::BasicCounts);
    assert_eq!(opts.w_min, 1);
}

#[test]
fn weights_are_read_from_their_decimal_text() {
    let doc = r#"{"items":[{"id":"a","weight":0.3,"value":0.1}],"budget":0.3}"#;
    match parse_problem(doc).unwrap() {
        Problem::Knapsack(k) => {
            assert_eq!(k.items[0].weight, Tenths(3));
            assert_eq!(k.budget, Tenths(3));
        }
        other => panic!("{other:?}"),
    }
    let err = parse_problem(r#"{"items":[{"id":"a","weight":0.35,"value":1}],"budget":1}"#).unwrap_err();
    assert!(matches!(err, Error::Schema { ref pointer, .. } if pointer == "/items/0/weight"), "{err}");
}

#[test]
fn estimate_errors_carry_locations() {
    let err = parse_problem(r#"{"scale":{"levels":3,"cardinality":3},"estimates":[[1,1,1],[2,2,0]]}"#).unwrap_err();
    assert!(matches!(err, Error::InvalidEstimate(_) | Error::Domain(_)), "{err:?}");
    assert!(err.to_string().contains("/estimates/1"), "{err}");

    let err = parse_problem(r#"{"estimates":[[1,1]],"extra":1}"#).unwrap_err();
    assert!(matches!(err, Error::Schema { .. }), "{err:?}");

    let err = parse_problem(r#"{"estimates":[[1,"x"]]}"#).unwrap_err();
    assert!(matches!(err, Error::Schema { .. }), "{err:?}");
    assert!(err.is_input_error());

    assert!(matches!(parse_problem("[1,2]"), Err(Error::Schema { .. })));
    assert!(matches!(parse_problem("{"), Err(Error::Schema { .. })));
}

#[test]
fn single_estimates() {
    let s = ScaleSpec::new(3, 3).unwrap();
    assert_eq!(parse_estimate("[1,2,0]", Some(s), ValidationMode::Strict).unwrap().counts(), [1, 2, 0]);
    let e = parse_estimate(r#"{"elements":[1,1,3],"levels":3}"#, None, ValidationMode::Relaxed).unwrap();
    assert_eq!(e.counts(), [2, 0, 1]);
    assert!(parse_estimate("[2,0,1]", Some(s), ValidationMode::Strict).is_err());
    assert!(parse_estimate("[2,0,1]", Some(s), ValidationMode::Relaxed).is_ok());
    assert!(parse_estimate("[1,1]", Some(s), ValidationMode::Relaxed).is_err());
}

#[test]
fn compatibility_must_cross_components() {
    let doc = r#"{"components":[
        {"name":"X","alternatives":[{"id":"X1","priority":1},{"id":"X2","priority":2}]},
        {"name":"Y","alternatives":[{"id":"Y1","priority":1}]}],
        "compatibility":[{"a":"X1","b":"X2","w":2}]}"#;
    let err = parse_problem(doc).unwrap_err();
    assert!(!matches!(err, Error::Io(_)), "{err:?}");
    assert!(err.to_string().contains("/compatibility/0"), "{err}");
}
