#![allow(dead_code)]

use std::path::PathBuf;

use mset_core::io::{parse_problem, Problem};
use mset_core::knapsack::KnapsackInstance;
use mset_core::synthesis::{MorphSystem, SynthesisOptions, SystemTree};
use mset_core::{MultisetEstimate, ValidationMode};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> Problem {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    parse_problem(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn system(name: &str) -> (MorphSystem, SynthesisOptions) {
    match fixture(name) {
        Problem::System(s, o) => (s, o),
        other => panic!("{name} is not a system: {other:?}"),
    }
}

pub fn tree(name: &str) -> SystemTree {
    match fixture(name) {
        Problem::Tree(t) => t,
        other => panic!("{name} is not a tree: {other:?}"),
    }
}

pub fn knapsack(name: &str) -> KnapsackInstance {
    match fixture(name) {
        Problem::Knapsack(k) => k,
        other => panic!("{name} is not a knapsack instance: {other:?}"),
    }
}

pub fn est(c: &[u32]) -> MultisetEstimate {
    MultisetEstimate::new(c.to_vec(), ValidationMode::Relaxed).unwrap()
}

/// Selection indices from ids, one per component.
pub fn select(sys: &MorphSystem, ids: &[&str]) -> Vec<usize> {
    sys.components
        .iter()
        .zip(ids)
        .map(|(c, id)| {
            c.alternatives
                .iter()
                .position(|a| a.id == *id)
                .unwrap_or_else(|| panic!("no alternative {id} in {}", c.name))
        })
        .collect()
}
