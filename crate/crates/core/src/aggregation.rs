//! Median aggregation of a set of estimates and its quality measure.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{enumerate, MultisetEstimate, ValidationMode};
use crate::order::{compare, maximal_indices, proximity, Comparison, Proximity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianKind {
    /// Minimiser over the whole estimate domain.
    Generalized,
    /// Minimiser restricted to the input set.
    Set,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MedianResult {
    pub kind: MedianKind,
    /// The single reported median (see [`canonical_median`]).
    pub canonical: MultisetEstimate,
    /// Every candidate attaining the minimum, in search order.
    pub argmin: Vec<MultisetEstimate>,
    /// `|Σ δ(M, e)|` at the minimum.
    pub objective: u64,
    /// Total proximity of every candidate searched, in search order.
    pub totals: Vec<(MultisetEstimate, Proximity)>,
}

impl MedianResult {
    pub fn is_unique(&self) -> bool {
        self.argmin.len() == 1
    }
}

fn common_scale(estimates: &[MultisetEstimate]) -> Result<()> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::domain("median of an empty set is undefined"))?;
    if let Some(e) = estimates.iter().find(|e| e.scale() != first.scale()) {
        return Err(Error::ScaleMismatch(format!(
            "{first} is on {} but {e} is on {}",
            first.scale(),
            e.scale()
        )));
    }
    Ok(())
}

/// `Σ_i δ(m, e_i)`.
pub fn total_proximity(m: &MultisetEstimate, estimates: &[MultisetEstimate]) -> Result<Proximity> {
    estimates.iter().map(|e| proximity(m, e)).sum()
}

/// Pick one median from a tie: keep the argmin members not dominated by
/// another member, then take the lexicographically greatest position form
/// (the one with the most elements on the best levels).
pub fn canonical_median(argmin: &[MultisetEstimate]) -> Result<MultisetEstimate> {
    let front = maximal_indices(argmin, compare)?;
    front
        .into_iter()
        .map(|i| &argmin[i])
        .max()
        .cloned()
        .ok_or_else(|| Error::domain("no median candidates"))
}

/// Median of `estimates` searched over an explicit candidate domain.
pub fn generalized_median_over(
    estimates: &[MultisetEstimate],
    domain: &[MultisetEstimate],
) -> Result<MedianResult> {
    median_over(estimates, domain, MedianKind::Generalized)
}

fn median_over(estimates: &[MultisetEstimate], domain: &[MultisetEstimate], kind: MedianKind) -> Result<MedianResult> {
    common_scale(estimates)?;
    if domain.is_empty() {
        return Err(Error::domain("median search domain is empty"));
    }
    let totals: Vec<(MultisetEstimate, Proximity)> = domain
        .par_iter()
        .map(|m| total_proximity(m, estimates).map(|p| (m.clone(), p)))
        .collect::<Result<_>>()?;
    let objective = totals.iter().map(|(_, p)| p.magnitude()).min().unwrap_or(0);
    let argmin: Vec<MultisetEstimate> = totals
        .iter()
        .filter(|(_, p)| p.magnitude() == objective)
        .map(|(m, _)| m.clone())
        .collect();
    let canonical = canonical_median(&argmin)?;
    Ok(MedianResult {
        kind,
        canonical,
        argmin,
        objective,
        totals,
    })
}

/// Generalized median over every estimate on the common scale of
/// `estimates` that satisfies `mode`.
pub fn generalized_median(estimates: &[MultisetEstimate], mode: ValidationMode) -> Result<MedianResult> {
    common_scale(estimates)?;
    let domain = enumerate(estimates[0].scale(), mode)?;
    median_over(estimates, &domain, MedianKind::Generalized)
}

/// Set median: the best member of `estimates` itself (duplicates searched once).
pub fn set_median(estimates: &[MultisetEstimate]) -> Result<MedianResult> {
    let mut domain: Vec<MultisetEstimate> = Vec::new();
    for e in estimates {
        if !domain.contains(e) {
            domain.push(e.clone());
        }
    }
    median_over(estimates, &domain, MedianKind::Set)
}

/// Distance from a median to the extremes of the set it summarises.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeviationReport {
    /// `δ(M, min E)`, worst case over the minimal elements of `E`.
    pub to_worst: Proximity,
    /// `δ(max E, M)`, worst case over the maximal elements of `E`.
    pub from_best: Proximity,
    /// `max(|Δ⁻|, |Δ⁺|)`.
    pub magnitude: u64,
    /// False when `E` has more than one minimal or maximal element.
    pub unique_extremes: bool,
    pub minimal: Vec<MultisetEstimate>,
    pub maximal: Vec<MultisetEstimate>,
}

pub fn deviation(m: &MultisetEstimate, estimates: &[MultisetEstimate]) -> Result<DeviationReport> {
    common_scale(estimates)?;
    let maximal: Vec<MultisetEstimate> = maximal_indices(estimates, compare)?
        .into_iter()
        .map(|i| estimates[i].clone())
        .collect();
    let minimal: Vec<MultisetEstimate> = maximal_indices(estimates, |a, b| compare(a, b).map(Comparison::reversed))?
        .into_iter()
        .map(|i| estimates[i].clone())
        .collect();
    let worst = |ps: Vec<Proximity>| {
        ps.into_iter()
            .fold(None, |acc: Option<Proximity>, p| match acc {
                Some(a) if a.magnitude() >= p.magnitude() => Some(a),
                _ => Some(p),
            })
            .unwrap_or_default()
    };
    let to_worst = worst(minimal.iter().map(|lo| proximity(m, lo)).collect::<Result<_>>()?);
    let from_best = worst(maximal.iter().map(|hi| proximity(hi, m)).collect::<Result<_>>()?);
    Ok(DeviationReport {
        to_worst,
        from_best,
        magnitude: to_worst.magnitude().max(from_best.magnitude()),
        unique_extremes: minimal.len() == 1 && maximal.len() == 1,
        minimal,
        maximal,
    })
}

/// Median of one design alternative's per-criterion estimates.
pub fn aggregate_alternative(
    row: &[MultisetEstimate],
    kind: MedianKind,
    mode: ValidationMode,
) -> Result<MedianResult> {
    match kind {
        MedianKind::Generalized => generalized_median(row, mode),
        MedianKind::Set => set_median(row),
    }
}

/// Median alternative of an alternatives × criteria matrix: one median per
/// criterion (column), taken over all alternatives.
pub fn median_alternative(
    matrix: &[Vec<MultisetEstimate>],
    kind: MedianKind,
    mode: ValidationMode,
) -> Result<Vec<MedianResult>> {
    let m = matrix
        .first()
        .map(|r| r.len())
        .ok_or_else(|| Error::domain("median alternative of an empty matrix is undefined"))?;
    if let Some(i) = matrix.iter().position(|r| r.len() != m) {
        return Err(Error::Structural(format!(
            "row {i} has {} criteria, expected {m}",
            matrix[i].len()
        )));
    }
    (0..m)
        .into_par_iter()
        .map(|j| {
            let column: Vec<MultisetEstimate> = matrix.iter().map(|r| r[j].clone()).collect();
            aggregate_alternative(&column, kind, mode)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(c: &[u32]) -> MultisetEstimate {
        MultisetEstimate::new(c.to_vec(), ValidationMode::Relaxed).unwrap()
    }

    #[test]
    fn singleton_median_is_itself() {
        let e = est(&[1, 2, 0]);
        let g = generalized_median(&[e.clone()], ValidationMode::Strict).unwrap();
        assert_eq!(g.canonical, e);
        assert_eq!(g.objective, 0);
        let d = deviation(&e, &[e.clone()]).unwrap();
        assert_eq!(d.magnitude, 0);
        assert!(d.unique_extremes);
    }

    #[test]
    fn canonical_prefers_best_tied_member() {
        let g = generalized_median(&[est(&[2, 0, 0]), est(&[0, 2, 0])], ValidationMode::Strict).unwrap();
        assert_eq!(g.argmin, vec![est(&[2, 0, 0]), est(&[1, 1, 0]), est(&[0, 2, 0])]);
        assert_eq!(g.canonical, est(&[2, 0, 0]));
    }

    #[test]
    fn empty_and_mismatched() {
        assert!(set_median(&[]).is_err());
        assert!(matches!(set_median(&[est(&[1, 0]), est(&[1, 1])]), Err(Error::ScaleMismatch(_))));
    }

    #[test]
    fn non_unique_extremes_flagged() {
        let e = vec![est(&[1, 1, 1]), est(&[0, 3, 0])];
        let d = deviation(&est(&[1, 1, 1]), &e).unwrap();
        assert!(!d.unique_extremes);
        assert_eq!(d.magnitude, 2);
    }
}
