mod common;

use common::est;
use mset_core::aggregation::*;
use mset_core::*;
use proptest::prelude::*;

fn e17() -> Vec<MultisetEstimate> {
    [[3, 1, 0], [1, 3, 0], [0, 4, 0], [2, 1, 1], [1, 2, 1], [0, 2, 2], [0, 1, 3], [0, 0, 4]]
        .iter()
        .map(|c| est(c))
        .collect()
}

#[test]
fn upsilon_rows() {
    let e = e17();
    let want = [(0, 28), (3, 15), (7, 11), (4, 16), (6, 10), (15, 3), (21, 1), (28, 0)];
    for (m, (a, b)) in e.iter().zip(want) {
        assert_eq!(total_proximity(m, &e).unwrap(), Proximity::new(a, b), "row {m}");
    }
    assert_eq!(total_proximity(&e[0], &e[..1]).unwrap(), Proximity::ZERO);
}

#[test]
fn set_median_examples() {
    let r = set_median(&e17()).unwrap();
    assert_eq!(r.kind, MedianKind::Set);
    assert_eq!((r.canonical.clone(), r.objective), (est(&[1, 2, 1]), 16));
    assert_eq!(r.totals.len(), 8);

    let r = set_median(&[est(&[3, 0, 0]), est(&[0, 0, 3])]).unwrap();
    assert_eq!(r.objective, 6);
    assert_eq!(r.argmin, vec![est(&[3, 0, 0]), est(&[0, 0, 3])]);

    let r = set_median(&[est(&[1, 1, 1])]).unwrap();
    assert_eq!((r.canonical, r.objective), (est(&[1, 1, 1]), 0));
}

#[test]
fn generalized_median_examples() {
    let r = generalized_median(&e17(), ValidationMode::Strict).unwrap();
    assert_eq!(r.objective, 16);
    assert_eq!(r.totals.len(), 12);
    assert!(r.argmin.contains(&est(&[0, 3, 1])));
    assert!(r.argmin.contains(&est(&[1, 2, 1])));
    // (1,2,1) dominates (0,3,1), so the canonical pick is the former.
    assert_eq!(r.canonical, est(&[1, 2, 1]));

    let r = generalized_median(&[est(&[0, 2, 1])], ValidationMode::Strict).unwrap();
    assert_eq!((r.canonical, r.objective), (est(&[0, 2, 1]), 0));
}

#[test]
fn empty_and_mismatched_inputs() {
    assert!(matches!(set_median(&[]), Err(Error::Domain(_))));
    assert!(matches!(generalized_median(&[], ValidationMode::Strict), Err(Error::Domain(_))));
    assert!(matches!(set_median(&[est(&[1, 0]), est(&[1, 0, 0])]), Err(Error::ScaleMismatch(_))));
    assert!(matches!(total_proximity(&est(&[1, 0]), &[est(&[0, 2])]), Err(Error::ScaleMismatch(_))));
}

#[test]
fn deviation_examples() {
    let e = e17();
    let d = deviation(&est(&[0, 3, 1]), &e).unwrap();
    assert_eq!((d.to_worst, d.from_best, d.magnitude), (Proximity::new(0, 3), Proximity::new(0, 4), 4));
    assert!(d.unique_extremes);
    let d = deviation(&est(&[1, 2, 1]), &e).unwrap();
    assert_eq!((d.to_worst, d.from_best, d.magnitude), (Proximity::new(0, 4), Proximity::new(0, 3), 4));
    let d = deviation(&est(&[1, 1]), &[est(&[1, 1])]).unwrap();
    assert_eq!((d.to_worst, d.from_best, d.magnitude), (Proximity::ZERO, Proximity::ZERO, 0));
}

#[test]
fn deviation_flags_non_unique_extremes() {
    let e = [est(&[0, 3, 0]), est(&[1, 1, 1])];
    let d = deviation(&est(&[0, 3, 0]), &e).unwrap();
    assert!(!d.unique_extremes);
    assert_eq!(d.minimal.len(), 2);
    assert_eq!(d.maximal.len(), 2);
    assert_eq!(d.magnitude, 2);
}

#[test]
fn aggregate_alternative_examples() {
    let e = est(&[1, 2, 0]);
    let r = aggregate_alternative(&[e.clone(), e.clone(), e.clone()], MedianKind::Generalized, ValidationMode::Strict).unwrap();
    assert_eq!((r.canonical, r.objective), (e, 0));

    let row = e17();
    assert_eq!(
        aggregate_alternative(&row, MedianKind::Generalized, ValidationMode::Strict).unwrap(),
        generalized_median(&row, ValidationMode::Strict).unwrap()
    );

    let r = aggregate_alternative(&[est(&[3, 0, 0]), est(&[2, 1, 0])], MedianKind::Generalized, ValidationMode::Strict).unwrap();
    assert_eq!(r.objective, 1);
    assert_eq!(r.argmin, vec![est(&[3, 0, 0]), est(&[2, 1, 0])]);
    assert_eq!(r.canonical, est(&[3, 0, 0]));
}

#[test]
fn median_alternative_examples() {
    let m = vec![
        vec![est(&[3, 0, 0]), est(&[1, 1, 1])],
        vec![est(&[0, 3, 0]), est(&[1, 1, 1])],
        vec![est(&[0, 0, 3]), est(&[1, 1, 1])],
    ];
    let r = median_alternative(&m, MedianKind::Generalized, ValidationMode::Strict).unwrap();
    assert_eq!(r.len(), 2);
    assert!(r[0].argmin.contains(&est(&[0, 3, 0])));
    assert_eq!((r[1].canonical.clone(), r[1].objective), (est(&[1, 1, 1]), 0));

    let same = vec![vec![est(&[2, 1, 0]), est(&[0, 1])]; 4];
    let r = median_alternative(&same, MedianKind::Set, ValidationMode::Strict).unwrap();
    assert_eq!(r.iter().map(|x| x.canonical.clone()).collect::<Vec<_>>(), same[0]);
    assert!(r.iter().all(|x| x.objective == 0));

    let col = vec![vec![est(&[2, 1, 0])], vec![est(&[0, 2, 1])]];
    let r = median_alternative(&col, MedianKind::Generalized, ValidationMode::Strict).unwrap();
    let column: Vec<_> = col.iter().map(|r| r[0].clone()).collect();
    assert_eq!(r[0], aggregate_alternative(&column, MedianKind::Generalized, ValidationMode::Strict).unwrap());

    let ragged = vec![vec![est(&[1, 0])], vec![est(&[1, 0]), est(&[0, 1])]];
    assert!(matches!(
        median_alternative(&ragged, MedianKind::Set, ValidationMode::Strict),
        Err(Error::Structural(_))
    ));
}

fn strict_set(levels: usize, n: u32) -> impl Strategy<Value = Vec<MultisetEstimate>> {
    let all = enumerate(ScaleSpec::new(levels, n).unwrap(), ValidationMode::Strict).unwrap();
    proptest::collection::vec(proptest::sample::select(all), 1..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn median_result_is_sound(e in (2usize..=4, 1u32..=4).prop_flat_map(|(l, n)| strict_set(l, n))) {
        for r in [generalized_median(&e, ValidationMode::Strict).unwrap(), set_median(&e).unwrap()] {
            prop_assert!(r.argmin.contains(&r.canonical));
            for (c, p) in &r.totals {
                prop_assert_eq!(*p, total_proximity(c, &e).unwrap());
                prop_assert_eq!(r.argmin.contains(c), p.magnitude() == r.objective);
                prop_assert!(p.magnitude() >= r.objective);
            }
        }
    }

    #[test]
    fn domain_inclusion_bounds(e in (2usize..=4, 1u32..=4).prop_flat_map(|(l, n)| strict_set(l, n))) {
        let s = set_median(&e).unwrap().objective;
        let g = generalized_median(&e, ValidationMode::Strict).unwrap().objective;
        let r = generalized_median(&e, ValidationMode::Relaxed).unwrap().objective;
        prop_assert!(s >= g);
        prop_assert!(g >= r);
    }

    #[test]
    fn zero_deviation_only_for_constant_sets(e in (2usize..=4, 1u32..=4).prop_flat_map(|(l, n)| strict_set(l, n))) {
        for m in enumerate(e[0].scale(), ValidationMode::Strict).unwrap() {
            let d = deviation(&m, &e).unwrap();
            prop_assert_eq!(d.magnitude, d.to_worst.magnitude().max(d.from_best.magnitude()));
            prop_assert_eq!(d.magnitude == 0, e.iter().all(|x| *x == m));
        }
    }
}
