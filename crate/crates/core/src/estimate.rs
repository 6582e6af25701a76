//! The estimate space: count vectors, validation, enumeration and the
//! small algebra (integration, alignment, replication) on top of it.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordinal scale 1..=`levels` (1 is best) carrying `cardinality` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub levels: usize,
    pub cardinality: u32,
}

impl ScaleSpec {
    pub fn new(levels: usize, cardinality: u32) -> Result<Self> {
        if levels == 0 {
            return Err(Error::domain("scale must have at least one level"));
        }
        if cardinality == 0 {
            return Err(Error::domain("scale cardinality must be at least 1"));
        }
        Ok(ScaleSpec { levels, cardinality })
    }

    /// Number of estimates on this scale when no interval constraint applies.
    pub fn domain_size(&self) -> Result<u64> {
        multiset_coefficient(self.levels as u64, self.cardinality as u64)
    }
}

impl fmt::Display for ScaleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P^{{{},{}}}", self.levels, self.cardinality)
    }
}

/// Whether estimates must occupy a contiguous run of levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    /// Occupied levels must form an interval (no empty level between two
    /// occupied ones).
    #[default]
    Strict,
    /// Any count vector with the right total.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    /// Condition 1: counts do not sum to the scale cardinality.
    Cardinality { expected: u32, found: u64 },
    /// Condition 2: `level` and `next` are occupied (1-based) with every level
    /// strictly between them empty.
    Gap { level: usize, next: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cardinality { expected, found } => {
                write!(f, "condition 1: counts sum to {found}, expected {expected}")
            }
            Violation::Gap { level, next } if next - level == 2 => write!(
                f,
                "condition 2 at level {level}: level {} is empty between occupied levels {level} and {next}",
                level + 1
            ),
            Violation::Gap { level, next } => write!(
                f,
                "condition 2 at level {level}: levels {}..={} are empty between occupied levels {level} and {next}",
                level + 1,
                next - 1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check a count vector against a scale.
///
/// A wrong length is a structural error (`Err`); everything else is reported
/// as a list of violations.
pub fn validate_estimate(counts: &[u32], scale: ScaleSpec, mode: ValidationMode) -> Result<Validation> {
    if counts.len() != scale.levels {
        return Err(Error::LengthMismatch {
            expected: scale.levels,
            found: counts.len(),
        });
    }
    let mut violations = Vec::new();
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    if total != scale.cardinality as u64 {
        violations.push(Violation::Cardinality {
            expected: scale.cardinality,
            found: total,
        });
    }
    if mode == ValidationMode::Strict {
        violations.extend(gaps(counts));
    }
    Ok(Validation { violations })
}

fn gaps(counts: &[u32]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut prev: Option<usize> = None;
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if let Some(p) = prev {
            if i > p + 1 {
                out.push(Violation::Gap { level: p + 1, next: i + 1 });
            }
        }
        prev = Some(i);
    }
    out
}

/// A multiset estimate in position form: `counts[i]` elements sit on level
/// `i + 1`.
///
/// The scale is implied by the counts (length = levels, sum = cardinality).
/// The `mode` tag records which validation the value is known to satisfy;
/// it is not part of equality, hashing or ordering.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct MultisetEstimate {
    counts: Vec<u32>,
    #[serde(skip)]
    mode: ValidationMode,
}

impl MultisetEstimate {
    /// Build and validate an estimate whose scale is implied by `counts`.
    pub fn new(counts: Vec<u32>, mode: ValidationMode) -> Result<Self> {
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        let cardinality = u32::try_from(total).map_err(|_| Error::Overflow("estimate cardinality".into()))?;
        let scale = ScaleSpec::new(counts.len(), cardinality)?;
        Self::with_scale(counts, scale, mode)
    }

    /// Build an estimate that must match `scale` exactly.
    pub fn with_scale(counts: Vec<u32>, scale: ScaleSpec, mode: ValidationMode) -> Result<Self> {
        let v = validate_estimate(&counts, scale, mode)?;
        if !v.is_ok() {
            let msg: Vec<String> = v.violations.iter().map(|x| x.to_string()).collect();
            return Err(Error::InvalidEstimate(format!(
                "{} in {scale}: {}",
                fmt_counts(&counts),
                msg.join("; ")
            )));
        }
        Ok(MultisetEstimate { counts, mode })
    }

    /// Element form: levels (1-based) listed in non-decreasing order.
    pub fn from_elements(elements: &[u32], levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::domain("scale must have at least one level"));
        }
        let mut counts = vec![0u32; levels];
        for &e in elements {
            if e == 0 || e as usize > levels {
                return Err(Error::InvalidEstimate(format!("element level {e} outside 1..={levels}")));
            }
            counts[e as usize - 1] += 1;
        }
        Self::new(counts, ValidationMode::Relaxed)
    }

    pub(crate) fn from_counts_unchecked(counts: Vec<u32>, mode: ValidationMode) -> Self {
        debug_assert!(counts.iter().any(|&c| c > 0));
        MultisetEstimate { counts, mode }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    pub fn cardinality(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn scale(&self) -> ScaleSpec {
        ScaleSpec {
            levels: self.levels(),
            cardinality: self.cardinality(),
        }
    }

    pub fn mode(&self) -> ValidationMode {
        self.mode
    }

    /// Occupied levels form a contiguous run.
    pub fn is_interval(&self) -> bool {
        gaps(&self.counts).is_empty()
    }

    /// The sorted element list, best level first.
    pub fn to_sorted_elements(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.cardinality() as usize);
        for (i, &c) in self.counts.iter().enumerate() {
            out.extend(std::iter::repeat_n(i as u32 + 1, c as usize));
        }
        out
    }

    /// Cumulative counts: `prefix[t]` = number of elements on levels 1..=t+1.
    pub fn prefix_counts(&self) -> Vec<u64> {
        let mut acc = 0u64;
        self.counts
            .iter()
            .map(|&c| {
                acc += c as u64;
                acc
            })
            .collect()
    }
}

impl PartialEq for MultisetEstimate {
    fn eq(&self, other: &Self) -> bool {
        self.counts == other.counts
    }
}

impl Eq for MultisetEstimate {}

impl Hash for MultisetEstimate {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.counts.hash(state);
    }
}

/// Lexicographic on position form. This is a total order used for
/// determinism and tie-breaking, not the quality order.
impl Ord for MultisetEstimate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.counts.cmp(&other.counts)
    }
}

impl PartialOrd for MultisetEstimate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultisetEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_counts(&self.counts))
    }
}

pub(crate) fn fmt_counts(counts: &[u32]) -> String {
    let parts: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(","))
}

/// `C(l + η - 1, η)`, the number of multisets of size `η` over `l` levels.
pub fn multiset_coefficient(levels: u64, cardinality: u64) -> Result<u64> {
    if levels == 0 {
        return Ok(if cardinality == 0 { 1 } else { 0 });
    }
    let n = levels
        .checked_add(cardinality)
        .and_then(|x| x.checked_sub(1))
        .ok_or_else(|| Error::Overflow(format!("multiset coefficient ({levels},{cardinality})")))?;
    // C(n, k) with the smaller k; partial products C(n-k+i, i) grow with i,
    // so an intermediate overflow implies the result overflows too.
    let k = cardinality.min(levels - 1);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::Overflow(format!("multiset coefficient ({levels},{cardinality})")));
        }
    }
    Ok(acc as u64)
}

/// All estimates on `scale` in canonical order (lexicographically descending
/// on position form, so `(η,0,…,0)` comes first).
pub fn enumerate(scale: ScaleSpec, mode: ValidationMode) -> Result<Vec<MultisetEstimate>> {
    let size = scale.domain_size()?;
    let size = usize::try_from(size).map_err(|_| Error::Overflow(format!("size of {scale}")))?;
    let mut out = Vec::with_capacity(size.min(1 << 20));
    let mut cur = vec![0u32; scale.levels];
    fill(0, scale.cardinality, &mut cur, mode, &mut out);
    Ok(out)
}

fn fill(pos: usize, remaining: u32, cur: &mut Vec<u32>, mode: ValidationMode, out: &mut Vec<MultisetEstimate>) {
    let last = cur.len() - 1;
    if pos == last {
        cur[pos] = remaining;
        if mode == ValidationMode::Relaxed || gaps(cur).is_empty() {
            out.push(MultisetEstimate::from_counts_unchecked(cur.clone(), mode));
        }
        return;
    }
    for c in (0..=remaining).rev() {
        cur[pos] = c;
        fill(pos + 1, remaining - c, cur, mode, out);
    }
    cur[pos] = 0;
}

/// Multiset union: counts add level by level. The result is tagged Relaxed
/// even when it happens to be an interval.
pub fn integrate(estimates: &[MultisetEstimate]) -> Result<MultisetEstimate> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::domain("cannot integrate an empty collection"))?;
    let levels = first.levels();
    let mut counts = vec![0u32; levels];
    for e in estimates {
        if e.levels() != levels {
            return Err(Error::ScaleMismatch(format!(
                "integration needs a common level count, got {} and {}",
                levels,
                e.levels()
            )));
        }
        for (acc, &c) in counts.iter_mut().zip(&e.counts) {
            *acc = acc
                .checked_add(c)
                .ok_or_else(|| Error::Overflow("integrated count".into()))?;
        }
    }
    MultisetEstimate::new(counts, ValidationMode::Relaxed)
}

/// Embed an estimate into a larger scale: new levels are appended as worst
/// levels and the extra elements are placed on the best level.
pub fn align(e: &MultisetEstimate, target: ScaleSpec) -> Result<MultisetEstimate> {
    if target.levels < e.levels() || target.cardinality < e.cardinality() {
        return Err(Error::Unsupported(format!(
            "cannot shrink {} onto {target}",
            e.scale()
        )));
    }
    let mut counts = e.counts.clone();
    counts.resize(target.levels, 0);
    counts[0] += target.cardinality - e.cardinality();
    let mode = if e.mode == ValidationMode::Strict && gaps(&counts).is_empty() {
        ValidationMode::Strict
    } else {
        ValidationMode::Relaxed
    };
    MultisetEstimate::with_scale(counts, target, mode)
}

/// Multiply every count by `k`.
pub fn replicate(e: &MultisetEstimate, k: u32) -> Result<MultisetEstimate> {
    if k == 0 {
        return Err(Error::domain("replication factor must be at least 1"));
    }
    let counts = e
        .counts
        .iter()
        .map(|&c| c.checked_mul(k).ok_or_else(|| Error::Overflow("replicated count".into())))
        .collect::<Result<Vec<_>>>()?;
    e.cardinality()
        .checked_mul(k)
        .ok_or_else(|| Error::Overflow("replicated cardinality".into()))?;
    Ok(MultisetEstimate { counts, mode: e.mode })
}
