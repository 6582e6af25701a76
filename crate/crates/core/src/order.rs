//! Proximity between estimates and the partial order it induces.

use std::fmt;
use std::ops::Add;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimate::{enumerate, MultisetEstimate, ScaleSpec, ValidationMode};

/// Vector proximity `(δ⁻, δ⁺)` from one estimate to another: the total
/// number of one-level improvements and degradations needed to turn the
/// first into the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Proximity {
    pub improvements: u64,
    pub degradations: u64,
}

impl Proximity {
    pub const ZERO: Proximity = Proximity {
        improvements: 0,
        degradations: 0,
    };

    pub fn new(improvements: u64, degradations: u64) -> Self {
        Proximity {
            improvements,
            degradations,
        }
    }

    pub fn magnitude(&self) -> u64 {
        self.improvements + self.degradations
    }

    /// The proximity in the opposite direction.
    pub fn reversed(&self) -> Proximity {
        Proximity::new(self.degradations, self.improvements)
    }
}

impl Add for Proximity {
    type Output = Proximity;
    fn add(self, rhs: Proximity) -> Proximity {
        Proximity::new(self.improvements + rhs.improvements, self.degradations + rhs.degradations)
    }
}

impl std::iter::Sum for Proximity {
    fn sum<I: Iterator<Item = Proximity>>(iter: I) -> Proximity {
        iter.fold(Proximity::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Proximity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.improvements, self.degradations)
    }
}

impl Serialize for Proximity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.improvements, self.degradations].serialize(s)
    }
}

pub fn magnitude(p: Proximity) -> u64 {
    p.magnitude()
}

/// Outcome of comparing `a` against `b`. `Greater` means `a` is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Greater,
    Less,
    Equal,
    Incomparable,
}

impl Comparison {
    pub fn reversed(self) -> Comparison {
        match self {
            Comparison::Greater => Comparison::Less,
            Comparison::Less => Comparison::Greater,
            c => c,
        }
    }

    /// `a ⪰ b`.
    pub fn is_at_least(self) -> bool {
        matches!(self, Comparison::Greater | Comparison::Equal)
    }

    fn from_flags(a_ahead: bool, b_ahead: bool) -> Comparison {
        match (a_ahead, b_ahead) {
            (false, false) => Comparison::Equal,
            (true, false) => Comparison::Greater,
            (false, true) => Comparison::Less,
            (true, true) => Comparison::Incomparable,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Greater => "greater",
            Comparison::Less => "less",
            Comparison::Equal => "equal",
            Comparison::Incomparable => "incomparable",
        })
    }
}

fn same_scale(a: &MultisetEstimate, b: &MultisetEstimate) -> Result<()> {
    if a.scale() != b.scale() {
        return Err(Error::ScaleMismatch(format!(
            "{a} is on {} but {b} is on {}",
            a.scale(),
            b.scale()
        )));
    }
    Ok(())
}

fn same_levels(a: &MultisetEstimate, b: &MultisetEstimate) -> Result<()> {
    if a.levels() != b.levels() {
        return Err(Error::ScaleMismatch(format!(
            "{a} has {} levels but {b} has {}",
            a.levels(),
            b.levels()
        )));
    }
    Ok(())
}

/// Proximity from `a` to `b` on a common scale.
///
/// Pairing the sorted element lists position by position, an element of `a`
/// that sits below its partner in `b` must be improved and one above it
/// degraded. Summed over positions this equals the positive and negative
/// parts of the difference of cumulative counts, which is what is computed
/// here.
pub fn proximity(a: &MultisetEstimate, b: &MultisetEstimate) -> Result<Proximity> {
    same_scale(a, b)?;
    let (mut pa, mut pb) = (0i64, 0i64);
    let mut p = Proximity::ZERO;
    for (&x, &y) in a.counts().iter().zip(b.counts()) {
        pa += x as i64;
        pb += y as i64;
        if pb > pa {
            p.improvements += (pb - pa) as u64;
        } else {
            p.degradations += (pa - pb) as u64;
        }
    }
    Ok(p)
}

/// Standard order on a common scale: `a ≻ b` iff turning `a` into `b` needs
/// degradations only.
pub fn compare(a: &MultisetEstimate, b: &MultisetEstimate) -> Result<Comparison> {
    let p = proximity(a, b)?;
    Ok(Comparison::from_flags(p.degradations > 0, p.improvements > 0))
}

/// Order across cardinalities: both estimates are replicated up to the least
/// common multiple of their cardinalities and then compared.
pub fn compare_mixed(a: &MultisetEstimate, b: &MultisetEstimate) -> Result<Comparison> {
    same_levels(a, b)?;
    Ok(mixed_counts(a.counts(), b.counts()))
}

// Replication to the LCM, done as cross-multiplied cumulative counts. An
// all-zero vector (the empty selection) sits below everything else.
pub(crate) fn mixed_counts(a: &[u32], b: &[u32]) -> Comparison {
    let na: u128 = a.iter().map(|&x| x as u128).sum();
    let nb: u128 = b.iter().map(|&x| x as u128).sum();
    match (na, nb) {
        (0, 0) => return Comparison::Equal,
        (0, _) => return Comparison::Less,
        (_, 0) => return Comparison::Greater,
        _ => {}
    }
    let l = na.lcm(&nb);
    let (ka, kb) = (l / na, l / nb);
    let (mut pa, mut pb) = (0u128, 0u128);
    let (mut a_ahead, mut b_ahead) = (false, false);
    for (&x, &y) in a.iter().zip(b) {
        pa += x as u128 * ka;
        pb += y as u128 * kb;
        a_ahead |= pa > pb;
        b_ahead |= pb > pa;
    }
    Comparison::from_flags(a_ahead, b_ahead)
}

/// Cumulative-count order over a common level set, any cardinalities:
/// `a ⪰ b` iff for every level `a` has at least as many elements at that
/// level or better. Coincides with [`compare`] when cardinalities agree, and
/// adding the same estimate to both sides never changes the outcome.
pub fn compare_cumulative(a: &MultisetEstimate, b: &MultisetEstimate) -> Result<Comparison> {
    same_levels(a, b)?;
    Ok(cumulative_counts(a.counts(), b.counts()))
}

pub(crate) fn cumulative_counts(a: &[u32], b: &[u32]) -> Comparison {
    let (mut pa, mut pb) = (0u64, 0u64);
    let (mut a_ahead, mut b_ahead) = (false, false);
    for (&x, &y) in a.iter().zip(b) {
        pa += x as u64;
        pb += y as u64;
        a_ahead |= pa > pb;
        b_ahead |= pb > pa;
    }
    Comparison::from_flags(a_ahead, b_ahead)
}

/// Indices of the maximal items under `cmp`, ignoring later duplicates
/// (items comparing `Equal` to an earlier one). Input order is preserved.
pub fn maximal_indices<T, F>(items: &[T], cmp: F) -> Result<Vec<usize>>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<Comparison> + Sync,
{
    let mut keep = Vec::new();
    'outer: for i in 0..items.len() {
        for &k in &keep {
            if cmp(&items[k], &items[i])? == Comparison::Equal {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    let flags: Vec<bool> = keep
        .par_iter()
        .map(|&i| -> Result<bool> {
            for &j in &keep {
                if j != i && cmp(&items[j], &items[i])? == Comparison::Greater {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<_>>()?;
    Ok(keep.into_iter().zip(flags).filter(|(_, f)| *f).map(|(i, _)| i).collect())
}

/// Undominated estimates, deduplicated, in input order.
pub fn pareto_front(estimates: &[MultisetEstimate]) -> Result<Vec<MultisetEstimate>> {
    let idx = maximal_indices(estimates, compare)?;
    Ok(idx.into_iter().map(|i| estimates[i].clone()).collect())
}

/// Repeated front peeling: layer 0 is the Pareto front, layer 1 the front of
/// what remains, and so on.
pub fn layered_order(estimates: &[MultisetEstimate]) -> Result<Vec<Vec<MultisetEstimate>>> {
    let mut rest: Vec<MultisetEstimate> = Vec::new();
    for e in estimates {
        if !rest.contains(e) {
            rest.push(e.clone());
        }
    }
    let mut layers = Vec::new();
    while !rest.is_empty() {
        let front = pareto_front(&rest)?;
        rest.retain(|e| !front.contains(e));
        layers.push(front);
    }
    Ok(layers)
}

/// Pairwise proximities `m[i][j] = δ(e_i, e_j)`.
pub fn proximity_matrix(estimates: &[MultisetEstimate]) -> Result<Vec<Vec<Proximity>>> {
    estimates
        .par_iter()
        .map(|a| estimates.iter().map(|b| proximity(a, b)).collect())
        .collect()
}

/// Hasse diagram of a finite set of estimates: edges point from the better
/// estimate to one it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetGraph {
    pub nodes: Vec<MultisetEstimate>,
    pub edges: Vec<(usize, usize)>,
}

impl PosetGraph {
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph poset {\n  rankdir=TB;\n  node [shape=box];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            s.push_str(&format!("  n{i} [label=\"{n}\"];\n"));
        }
        for (a, b) in &self.edges {
            s.push_str(&format!("  n{a} -> n{b};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Hasse diagram of a whole estimate space, nodes in canonical order.
pub fn hasse(scale: ScaleSpec, mode: ValidationMode) -> Result<PosetGraph> {
    hasse_of(&enumerate(scale, mode)?)
}

/// Transitive reduction of the standard order over `estimates`
/// (deduplicated, input order kept for node numbering).
pub fn hasse_of(estimates: &[MultisetEstimate]) -> Result<PosetGraph> {
    let mut nodes: Vec<MultisetEstimate> = Vec::new();
    for e in estimates {
        if !nodes.contains(e) {
            nodes.push(e.clone());
        }
    }
    let n = nodes.len();
    let better: Vec<Vec<bool>> = nodes
        .par_iter()
        .map(|a| {
            nodes
                .iter()
                .map(|b| compare(a, b).map(|c| c == Comparison::Greater))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<_>>()?;
    let edges: Vec<Vec<(usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| better[i][j] && !(0..n).any(|k| better[i][k] && better[k][j]))
                .map(|j| (i, j))
                .collect()
        })
        .collect();
    Ok(PosetGraph {
        nodes,
        edges: edges.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(c: &[u32]) -> MultisetEstimate {
        MultisetEstimate::new(c.to_vec(), ValidationMode::Relaxed).unwrap()
    }

    #[test]
    fn simple_proximities() {
        assert_eq!(proximity(&est(&[0, 3, 0]), &est(&[1, 1, 1])).unwrap(), Proximity::new(1, 1));
        assert_eq!(proximity(&est(&[0, 0, 3]), &est(&[0, 3, 0])).unwrap(), Proximity::new(3, 0));
        assert_eq!(compare(&est(&[0, 3, 0]), &est(&[0, 2, 1])).unwrap(), Comparison::Greater);
    }

    #[test]
    fn mismatched_scales() {
        assert!(matches!(proximity(&est(&[1, 0]), &est(&[1, 1])), Err(Error::ScaleMismatch(_))));
        assert!(matches!(compare_mixed(&est(&[1, 0]), &est(&[1, 0, 0])), Err(Error::ScaleMismatch(_))));
    }

    #[test]
    fn mixed_and_cumulative() {
        assert_eq!(compare_mixed(&est(&[1, 0, 0]), &est(&[0, 3, 0])).unwrap(), Comparison::Greater);
        assert_eq!(compare_mixed(&est(&[1, 2, 0]), &est(&[2, 4, 0])).unwrap(), Comparison::Equal);
        assert_eq!(compare_cumulative(&est(&[1, 2, 0]), &est(&[2, 4, 0])).unwrap(), Comparison::Less);
        assert_eq!(compare_cumulative(&est(&[1, 0, 0]), &est(&[0, 3, 0])).unwrap(), Comparison::Incomparable);
    }

    #[test]
    fn hasse_chain() {
        let g = hasse(ScaleSpec::new(2, 2).unwrap(), ValidationMode::Strict).unwrap();
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
        assert!(g.to_dot().contains("n0 -> n1;"));
    }
}
