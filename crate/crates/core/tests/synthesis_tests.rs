mod common;

use std::collections::BTreeSet;

use common::{est, select, system, tree};
use mset_core::synthesis::*;
use mset_core::*;

fn basic(sys: &MorphSystem, ids: &[&str]) -> CompositeSolution {
    system_estimate(sys, &select(sys, ids), SynthesisMode::BasicCounts, ValidationMode::Strict).unwrap()
}

#[test]
fn fig10_parse_and_admissible() {
    let (sys, _) = system("fig10_system.json");
    assert_eq!(sys.components.len(), 3);
    assert_eq!(sys.components.iter().map(|c| c.alternatives.len()).sum::<usize>(), 10);
    let table = sys.compatibility.as_ref().unwrap();
    assert_eq!((table.len(), table.nonzero()), (33, 17));
    let adm = admissible_compositions(&sys, 1).unwrap();
    assert_eq!(adm.len(), 8);
    for ids in [["X1", "Y1", "Z2"], ["X2", "Y1", "Z2"], ["X3", "Y2", "Z1"]] {
        assert!(adm.contains(&select(&sys, &ids)), "{ids:?}");
    }
    let mut sorted = adm.clone();
    sorted.sort();
    assert_eq!(adm, sorted, "deterministic lexicographic order");
    assert_eq!(basic(&sys, &["X1", "Y1", "Z2"]).n_value(), "(3;1,1,1)");
}

#[test]
fn unsatisfiable_threshold_is_empty() {
    for f in ["fig10_system.json", "fig14_system.json"] {
        let (sys, _) = system(f);
        assert!(admissible_compositions(&sys, sys.effective_nu() + 1).unwrap().is_empty());
    }
}

#[test]
fn single_component_takes_nu() {
    let sys = MorphSystem {
        components: vec![Component {
            name: "X".into(),
            alternatives: vec![DesignAlternative::with_priority("X1", 1), DesignAlternative::with_priority("X2", 3)],
        }],
        compatibility: Some(Compatibility::new()),
        nu: Some(4),
        scale: None,
    };
    let front = scored_compositions(&sys, &SynthesisOptions::default()).unwrap();
    assert_eq!(front.len(), 2);
    assert!(front.iter().all(|s| s.w == 4));
    let front = pareto_solutions(&sys, &SynthesisOptions::default()).unwrap();
    assert_eq!(front.iter().map(|s| s.label()).collect::<Vec<_>>(), vec!["X1"]);
}

#[test]
fn fig14_table_and_solutions() {
    let (sys, opts) = system("fig14_system.json");
    assert_eq!(sys.effective_nu(), 5);
    assert_eq!(admissible_compositions(&sys, 1).unwrap().len(), 126);
    assert_eq!(basic(&sys, &["X3", "Y5", "Z3", "V4"]).n_value(), "(4;1,3,0)");
    assert_eq!(basic(&sys, &["X3", "Y5", "Z2", "V4"]).n_value(), "(3;2,2,0)");
    assert_eq!(basic(&sys, &["X3", "Y3", "Z2", "V4"]).n_value(), "(2;3,1,0)");
    let front = pareto_solutions(&sys, &opts).unwrap();
    let labels: BTreeSet<String> = front.iter().map(|s| s.label()).collect();
    assert!(labels.contains("X3*Y5*Z3*V4"));
}

#[test]
fn fig16_integrated_and_medians() {
    let (sys, _) = system("fig16_system.json");
    let sel = select(&sys, &["X2", "Y1", "Z2"]);
    let s = system_estimate(&sys, &sel, SynthesisMode::Integrated, ValidationMode::Strict).unwrap();
    assert_eq!(s.n_value(), "(2;4,3,2)");
    assert_eq!(s.estimate.mode(), ValidationMode::Relaxed);
    assert!(s.medians.is_empty() && s.median_objective.is_none());

    let g = system_estimate(&sys, &sel, SynthesisMode::GeneralizedMedian, ValidationMode::Strict).unwrap();
    assert!(g.medians.contains(&g.estimate));
    assert_eq!(g.estimate.cardinality(), 3);
}

#[test]
fn fig19_set_median_tie() {
    let (sys, _) = system("fig19_system.json");
    let s = system_estimate(&sys, &select(&sys, &["X3", "Y3", "Z2", "V4"]), SynthesisMode::SetMedian, ValidationMode::Strict)
        .unwrap();
    assert_eq!(s.estimate, est(&[4, 0, 0]));
    let tie: BTreeSet<_> = s.medians.iter().cloned().collect();
    assert_eq!(tie, [est(&[3, 1, 0]), est(&[4, 0, 0])].into_iter().collect());
}

#[test]
fn quality_kind_mismatch_is_domain_error() {
    let (sys, _) = system("fig10_system.json");
    let sel = admissible_compositions(&sys, 1).unwrap()[0].clone();
    assert!(matches!(
        system_estimate(&sys, &sel, SynthesisMode::Integrated, ValidationMode::Strict),
        Err(Error::Domain(_))
    ));
    let (sys, _) = system("fig16_system.json");
    let sel = admissible_compositions(&sys, 1).unwrap()[0].clone();
    assert!(matches!(
        system_estimate(&sys, &sel, SynthesisMode::BasicCounts, ValidationMode::Strict),
        Err(Error::Domain(_))
    ));
}

#[test]
fn empty_component_is_structural() {
    let (mut sys, opts) = system("fig10_system.json");
    sys.components[1].alternatives.clear();
    assert!(matches!(pareto_solutions(&sys, &opts), Err(Error::Structural(_))));
}

/// Independent recomputation of w from the raw table.
fn recompute_w(sys: &MorphSystem, s: &CompositeSolution) -> u32 {
    let mut w = sys.effective_nu();
    for (i, a) in s.selection.iter().enumerate() {
        for b in &s.selection[i + 1..] {
            w = w.min(sys.compatibility.as_ref().map_or(w, |t| t.get(a, b)));
        }
    }
    w
}

#[test]
fn emitted_solutions_are_sound_and_complete() {
    for (f, modes) in [
        ("fig10_system.json", &[SynthesisMode::BasicCounts][..]),
        ("fig14_system.json", &[SynthesisMode::BasicCounts][..]),
        (
            "fig16_system.json",
            &[SynthesisMode::Integrated, SynthesisMode::SetMedian, SynthesisMode::GeneralizedMedian][..],
        ),
        (
            "fig19_system.json",
            &[SynthesisMode::Integrated, SynthesisMode::SetMedian, SynthesisMode::GeneralizedMedian][..],
        ),
    ] {
        let (sys, base) = system(f);
        for &mode in modes {
            let opts = SynthesisOptions { mode, ..base.clone() };
            let all = scored_compositions(&sys, &opts).unwrap();
            let front = pareto_solutions(&sys, &opts).unwrap();
            assert!(!front.is_empty());
            for s in &all {
                assert_eq!(s.w, recompute_w(&sys, s), "{f} {}", s.label());
                assert!(s.w >= 1);
                match mode {
                    SynthesisMode::BasicCounts => {
                        assert_eq!(s.estimate.cardinality() as usize, sys.components.len());
                    }
                    SynthesisMode::Integrated => {
                        let parts: Vec<MultisetEstimate> = s
                            .indices
                            .iter()
                            .enumerate()
                            .map(|(c, &i)| sys.components[c].alternatives[i].estimate().unwrap().clone())
                            .collect();
                        assert_eq!(s.estimate, integrate(&parts).unwrap());
                    }
                    _ => assert!(s.medians.contains(&s.estimate)),
                }
            }
            for s in &front {
                for o in &all {
                    assert_ne!(compare_solutions(o, s).unwrap(), Comparison::Greater, "{f}: {} beats {}", o.label(), s.label());
                }
            }
            for o in &all {
                if !front.contains(o) {
                    assert!(front.iter().any(|s| compare_solutions(s, o).unwrap() == Comparison::Greater));
                }
            }
        }
    }
}

#[test]
fn strict_tie_policy_keeps_a_superset() {
    for f in ["fig16_system.json", "fig19_system.json"] {
        let (sys, base) = system(f);
        for mode in [SynthesisMode::SetMedian, SynthesisMode::GeneralizedMedian] {
            let canonical = pareto_solutions(&sys, &SynthesisOptions { mode, ..base.clone() }).unwrap();
            let all = pareto_solutions(&sys, &SynthesisOptions { mode, tie_policy: TiePolicy::AllMedians, ..base.clone() }).unwrap();
            for s in &canonical {
                assert!(all.contains(s));
            }
        }
    }
}

#[test]
fn reference_points_filter_alternatives() {
    let (sys, base) = system("fig16_system.json");
    let refs = vec![est(&[0, 2, 1])];
    let opts = SynthesisOptions { mode: SynthesisMode::Integrated, reference_points: refs.clone(), ..base.clone() };
    let got = scored_compositions(&sys, &opts).unwrap();
    for s in &got {
        for (c, &i) in s.indices.iter().enumerate() {
            let e = sys.components[c].alternatives[i].estimate().unwrap();
            assert!(compare(e, &refs[0]).unwrap().is_at_least(), "{} kept", sys.components[c].alternatives[i].id);
        }
    }
    let unfiltered = scored_compositions(&sys, &SynthesisOptions { mode: SynthesisMode::Integrated, ..base }).unwrap();
    let expected: Vec<&CompositeSolution> = unfiltered
        .iter()
        .filter(|s| {
            s.indices.iter().enumerate().all(|(c, &i)| {
                compare(sys.components[c].alternatives[i].estimate().unwrap(), &refs[0]).unwrap().is_at_least()
            })
        })
        .collect();
    assert_eq!(got.iter().collect::<Vec<_>>(), expected);
}

#[test]
fn hierarchical_three_layer() {
    let t = tree("fig21_tree.json");
    let results = hierarchical_synthesize(&t).unwrap();
    let names: Vec<&str> = results.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names.last(), Some(&"S"));
    assert_eq!(names.len(), 4);
    for r in &results[..3] {
        assert!(!r.retained.is_empty(), "{}", r.name);
        assert_eq!(r.retained.len(), r.as_alternatives.len());
        for (k, a) in r.as_alternatives.iter().enumerate() {
            assert_eq!(a.id, format!("{}{}", r.name, k + 1));
            assert_eq!(a.inherited_w, Some(r.retained[k].w));
            assert_eq!(a.estimate(), Some(&r.retained[k].estimate));
        }
    }
    let top = results.last().unwrap();
    for s in &top.retained {
        let inherited = s
            .selection
            .iter()
            .map(|id| {
                let node = &id[..1];
                let r = results.iter().find(|r| r.name == node).unwrap();
                r.as_alternatives.iter().find(|a| &a.id == id).unwrap().inherited_w.unwrap()
            })
            .min()
            .unwrap();
        assert_eq!(s.w, inherited, "{}", s.label());
        assert_eq!(s.estimate.cardinality(), 10);
    }
}

#[test]
fn hierarchy_errors() {
    let mut t = tree("fig21_tree.json");
    let a = t.nodes.iter().position(|n| n.name == "A").unwrap();
    t.nodes[a].components.push(NodeComponent::Child("S".into()));
    assert!(matches!(hierarchical_synthesize(&t), Err(Error::Structural(_))));

    let mut t = tree("fig21_tree.json");
    t.root = "nope".into();
    assert!(matches!(hierarchical_synthesize(&t), Err(Error::Structural(_))));
}

#[test]
fn single_child_passes_through() {
    let mut t = tree("fig21_tree.json");
    let b = t.nodes.iter().find(|n| n.name == "B").unwrap().clone();
    t.nodes.push(SystemNode {
        name: "P".into(),
        components: vec![NodeComponent::Child("B".into())],
        compatibility: None,
        nu: None,
        scale: b.scale,
        options: b.options.clone(),
        retention: Retention::AllAdmissible,
    });
    t.root = "P".into();
    let out = hierarchical_synthesize(&t).unwrap();
    let child = out.iter().find(|r| r.name == "B").unwrap();
    let parent = out.last().unwrap();
    assert_eq!(parent.retained.len(), child.retained.len());
    for (p, c) in parent.retained.iter().zip(&child.retained) {
        assert_eq!((p.w, &p.estimate), (c.w, &c.estimate));
    }
}
