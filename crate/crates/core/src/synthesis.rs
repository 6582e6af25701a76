//! Morphological synthesis: pick one design alternative per component,
//! score the composite by compatibility and an aggregated estimate, and keep
//! the Pareto-efficient composites. Trees of systems are solved bottom-up.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{generalized_median, set_median, MedianResult};
use crate::error::{Error, Result};
use crate::estimate::{integrate, MultisetEstimate, ScaleSpec, ValidationMode};
use crate::order::{compare, Comparison};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Quality {
    /// Ordinal priority, 1 is best.
    Priority(u32),
    Estimate(MultisetEstimate),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignAlternative {
    pub id: String,
    pub quality: Quality,
    /// Compatibility carried over from a lower-level composite, if any.
    pub inherited_w: Option<u32>,
    /// For composite alternatives: the ids it was built from.
    pub parts: Vec<String>,
}

impl DesignAlternative {
    pub fn with_priority(id: impl Into<String>, priority: u32) -> Self {
        DesignAlternative {
            id: id.into(),
            quality: Quality::Priority(priority),
            inherited_w: None,
            parts: Vec::new(),
        }
    }

    pub fn with_estimate(id: impl Into<String>, estimate: MultisetEstimate) -> Self {
        DesignAlternative {
            id: id.into(),
            quality: Quality::Estimate(estimate),
            inherited_w: None,
            parts: Vec::new(),
        }
    }

    pub fn estimate(&self) -> Option<&MultisetEstimate> {
        match &self.quality {
            Quality::Estimate(e) => Some(e),
            Quality::Priority(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub alternatives: Vec<DesignAlternative>,
}

/// Symmetric pairwise compatibility between alternatives of different
/// components. Pairs absent from a present table are incompatible (0).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Compatibility {
    entries: HashMap<(String, String), u32>,
}

impl Compatibility {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    /// Insert `w(a, b)`; returns the previous value if the pair was present.
    pub fn insert(&mut self, a: &str, b: &str, w: u32) -> Option<u32> {
        self.entries.insert(Self::key(a, b), w)
    }

    pub fn get(&self, a: &str, b: &str) -> u32 {
        self.entries.get(&Self::key(a, b)).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nonzero(&self) -> usize {
        self.entries.values().filter(|&&w| w > 0).count()
    }

    pub fn max_value(&self) -> Option<u32> {
        self.entries.values().copied().max()
    }

    /// Entries sorted by pair, for deterministic output.
    pub fn sorted_entries(&self) -> Vec<(&str, &str, u32)> {
        let mut v: Vec<_> = self.entries.iter().map(|((a, b), &w)| (a.as_str(), b.as_str(), w)).collect();
        v.sort();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphSystem {
    pub components: Vec<Component>,
    /// `None` means composites are not constrained pairwise (only by
    /// inherited compatibility).
    pub compatibility: Option<Compatibility>,
    /// Top of the compatibility scale; defaults to the largest value in use.
    pub nu: Option<u32>,
    pub scale: Option<ScaleSpec>,
}

impl MorphSystem {
    /// Compatibility of a composite with no constraining pair.
    pub fn effective_nu(&self) -> u32 {
        self.nu
            .or_else(|| self.compatibility.as_ref().and_then(|c| c.max_value()))
            .or_else(|| {
                self.components
                    .iter()
                    .flat_map(|c| c.alternatives.iter().filter_map(|a| a.inherited_w))
                    .max()
            })
            .unwrap_or(1)
    }

    /// Checks ids are unique and every component is non-empty.
    pub fn check(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Structural("system has no components".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.components {
            if c.alternatives.is_empty() {
                return Err(Error::Structural(format!("component '{}' has no alternatives", c.name)));
            }
            for a in &c.alternatives {
                if !seen.insert(a.id.as_str()) {
                    return Err(Error::Structural(format!("duplicate alternative id '{}'", a.id)));
                }
            }
        }
        Ok(())
    }

    fn alt(&self, comp: usize, idx: usize) -> &DesignAlternative {
        &self.components[comp].alternatives[idx]
    }

    /// `w(S)` for a full selection (one alternative index per component).
    pub fn compatibility_of(&self, selection: &[usize]) -> u32 {
        let mut w = self.effective_nu();
        for (c, &i) in selection.iter().enumerate() {
            w = w.min(self.pair_floor(selection, c, i));
        }
        w
    }

    // Smallest constraint introduced by placing `i` at component `c`, given
    // the choices for components before `c`.
    fn pair_floor(&self, selection: &[usize], c: usize, i: usize) -> u32 {
        let a = self.alt(c, i);
        let mut w = a.inherited_w.unwrap_or(u32::MAX);
        if let Some(table) = &self.compatibility {
            for (d, &j) in selection.iter().enumerate().take(c) {
                w = w.min(table.get(&a.id, &self.alt(d, j).id));
            }
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    /// Priorities counted per level.
    #[default]
    BasicCounts,
    /// Multiset union of the alternatives' estimates.
    Integrated,
    SetMedian,
    GeneralizedMedian,
}

/// How tied medians take part in dominance checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Compare canonical medians only.
    #[default]
    Canonical,
    /// A composite dominates another only if it dominates the other under
    /// every one of the other's tied medians.
    AllMedians,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub mode: SynthesisMode,
    pub w_min: u32,
    /// Alternatives whose estimate is not ⪰ every reference point are dropped.
    pub reference_points: Vec<MultisetEstimate>,
    /// Domain of the generalized median.
    pub median_domain: ValidationMode,
    pub tie_policy: TiePolicy,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            mode: SynthesisMode::BasicCounts,
            w_min: 1,
            reference_points: Vec::new(),
            median_domain: ValidationMode::Strict,
            tie_policy: TiePolicy::Canonical,
        }
    }
}

impl SynthesisOptions {
    pub fn with_mode(mode: SynthesisMode) -> Self {
        SynthesisOptions {
            mode,
            ..Default::default()
        }
    }
}

/// A scored composite `N(S) = (w; e)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompositeSolution {
    pub selection: Vec<String>,
    #[serde(skip)]
    pub indices: Vec<usize>,
    pub w: u32,
    /// The composite estimate (canonical median in median modes).
    pub estimate: MultisetEstimate,
    /// Tied medians (median modes only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub medians: Vec<MultisetEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_objective: Option<u64>,
}

impl CompositeSolution {
    pub fn label(&self) -> String {
        self.selection.join("*")
    }

    /// `N(S)` written as `(w;η1,…,ηl)`.
    pub fn n_value(&self) -> String {
        let e: Vec<String> = self.estimate.counts().iter().map(|c| c.to_string()).collect();
        format!("({};{})", self.w, e.join(","))
    }
}

/// Every selection with `w(S) ≥ w_min`, in lexicographic index order.
pub fn admissible_compositions(sys: &MorphSystem, w_min: u32) -> Result<Vec<Vec<usize>>> {
    let all: Vec<Vec<bool>> = sys
        .components
        .iter()
        .map(|c| vec![true; c.alternatives.len()])
        .collect();
    admissible_masked(sys, w_min, &all)
}

fn admissible_masked(sys: &MorphSystem, w_min: u32, allowed: &[Vec<bool>]) -> Result<Vec<Vec<usize>>> {
    sys.check()?;
    if sys.effective_nu() < w_min {
        return Ok(Vec::new());
    }
    let firsts: Vec<usize> = (0..sys.components[0].alternatives.len())
        .filter(|&i| allowed[0][i])
        .collect();
    let parts: Vec<Vec<Vec<usize>>> = firsts
        .par_iter()
        .map(|&i| {
            let mut out = Vec::new();
            let mut sel = vec![i];
            if sys.pair_floor(&sel, 0, i) >= w_min {
                extend(sys, w_min, allowed, &mut sel, &mut out);
            }
            out
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

fn extend(sys: &MorphSystem, w_min: u32, allowed: &[Vec<bool>], sel: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let c = sel.len();
    if c == sys.components.len() {
        out.push(sel.clone());
        return;
    }
    for i in 0..sys.components[c].alternatives.len() {
        if !allowed[c][i] {
            continue;
        }
        sel.push(i);
        if sys.pair_floor(sel, c, i) >= w_min {
            extend(sys, w_min, allowed, sel, out);
        }
        sel.pop();
    }
}

/// Score one selection.
pub fn system_estimate(
    sys: &MorphSystem,
    selection: &[usize],
    mode: SynthesisMode,
    median_domain: ValidationMode,
) -> Result<CompositeSolution> {
    if selection.len() != sys.components.len() {
        return Err(Error::Structural(format!(
            "selection has {} entries for {} components",
            selection.len(),
            sys.components.len()
        )));
    }
    let alts: Vec<&DesignAlternative> = selection
        .iter()
        .enumerate()
        .map(|(c, &i)| {
            sys.components[c].alternatives.get(i).ok_or_else(|| {
                Error::Structural(format!("component '{}' has no alternative {i}", sys.components[c].name))
            })
        })
        .collect::<Result<_>>()?;
    let mut medians = Vec::new();
    let mut median_objective = None;
    let estimate = match mode {
        SynthesisMode::BasicCounts => {
            let levels = sys.scale.map(|s| s.levels).unwrap_or(3);
            let mut counts = vec![0u32; levels];
            for a in &alts {
                match a.quality {
                    Quality::Priority(r) if r >= 1 && (r as usize) <= levels => counts[r as usize - 1] += 1,
                    Quality::Priority(r) => {
                        return Err(Error::domain(format!("priority {r} of '{}' outside 1..={levels}", a.id)))
                    }
                    Quality::Estimate(_) => {
                        return Err(Error::domain(format!("'{}' has an estimate, not a priority", a.id)))
                    }
                }
            }
            MultisetEstimate::new(counts, ValidationMode::Relaxed)?
        }
        _ => {
            let es: Vec<MultisetEstimate> = alts
                .iter()
                .map(|a| {
                    a.estimate()
                        .cloned()
                        .ok_or_else(|| Error::domain(format!("'{}' has a priority, not an estimate", a.id)))
                })
                .collect::<Result<_>>()?;
            match mode {
                SynthesisMode::Integrated => integrate(&es)?,
                _ => {
                    let m: MedianResult = if mode == SynthesisMode::SetMedian {
                        set_median(&es)?
                    } else {
                        generalized_median(&es, median_domain)?
                    };
                    medians = m.argmin;
                    median_objective = Some(m.objective);
                    m.canonical
                }
            }
        }
    };
    Ok(CompositeSolution {
        selection: alts.iter().map(|a| a.id.clone()).collect(),
        indices: selection.to_vec(),
        w: sys.compatibility_of(selection),
        estimate,
        medians,
        median_objective,
    })
}

/// Product-order comparison of `(w; e)` pairs under the canonical policy.
pub fn compare_solutions(a: &CompositeSolution, b: &CompositeSolution) -> Result<Comparison> {
    let e = compare(&a.estimate, &b.estimate)?;
    let w = a.w.cmp(&b.w);
    use std::cmp::Ordering::*;
    Ok(match (w, e) {
        (Equal, c) => c,
        (_, Comparison::Incomparable) => Comparison::Incomparable,
        (Greater, Comparison::Greater | Comparison::Equal) => Comparison::Greater,
        (Less, Comparison::Less | Comparison::Equal) => Comparison::Less,
        _ => Comparison::Incomparable,
    })
}

fn dominates(a: &CompositeSolution, b: &CompositeSolution, policy: TiePolicy) -> Result<bool> {
    match policy {
        TiePolicy::Canonical => Ok(compare_solutions(a, b)? == Comparison::Greater),
        TiePolicy::AllMedians => {
            if b.medians.is_empty() {
                return Ok(compare_solutions(a, b)? == Comparison::Greater);
            }
            for t in &b.medians {
                let tied = CompositeSolution {
                    estimate: t.clone(),
                    ..b.clone()
                };
                if compare_solutions(a, &tied)? != Comparison::Greater {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Mask of alternatives passing every reference point.
fn reference_mask(sys: &MorphSystem, refs: &[MultisetEstimate]) -> Result<Vec<Vec<bool>>> {
    sys.components
        .iter()
        .map(|c| {
            c.alternatives
                .iter()
                .map(|a| {
                    if refs.is_empty() {
                        return Ok(true);
                    }
                    let e = a.estimate().ok_or_else(|| {
                        Error::domain(format!("reference points need estimates, '{}' has a priority", a.id))
                    })?;
                    for r in refs {
                        if !compare(e, r)?.is_at_least() {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                })
                .collect()
        })
        .collect()
}

/// Every admissible composite, scored, in lexicographic selection order.
pub fn scored_compositions(sys: &MorphSystem, opts: &SynthesisOptions) -> Result<Vec<CompositeSolution>> {
    let mask = reference_mask(sys, &opts.reference_points)?;
    let sels = admissible_masked(sys, opts.w_min, &mask)?;
    sels.par_iter()
        .map(|s| system_estimate(sys, s, opts.mode, opts.median_domain))
        .collect()
}

/// Composites not strictly dominated by another admissible composite.
/// Composites with identical scores are all kept.
pub fn pareto_solutions(sys: &MorphSystem, opts: &SynthesisOptions) -> Result<Vec<CompositeSolution>> {
    let all = scored_compositions(sys, opts)?;
    pareto_filter(all, opts.tie_policy)
}

fn pareto_filter(all: Vec<CompositeSolution>, policy: TiePolicy) -> Result<Vec<CompositeSolution>> {
    let keep: Vec<bool> = all
        .par_iter()
        .map(|s| -> Result<bool> {
            for o in &all {
                if dominates(o, s, policy)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<_>>()?;
    Ok(all.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Retention {
    /// Pass only Pareto-efficient composites to the parent.
    #[default]
    Pareto,
    /// Pass every admissible composite.
    AllAdmissible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeComponent {
    Explicit(Component),
    /// The retained composites of another node become the alternatives.
    Child(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemNode {
    pub name: String,
    pub components: Vec<NodeComponent>,
    pub compatibility: Option<Compatibility>,
    pub nu: Option<u32>,
    pub scale: Option<ScaleSpec>,
    pub options: SynthesisOptions,
    pub retention: Retention,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemTree {
    pub root: String,
    pub nodes: Vec<SystemNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeResult {
    pub name: String,
    /// Composites kept according to the node's retention policy.
    pub retained: Vec<CompositeSolution>,
    /// The retained composites as alternatives for a parent (`A1`, `A2`, …).
    pub as_alternatives: Vec<DesignAlternative>,
}

/// Solve a tree of systems bottom-up. Results are returned children before
/// parents, the root last.
pub fn hierarchical_synthesize(tree: &SystemTree) -> Result<Vec<NodeResult>> {
    let by_name: BTreeMap<&str, &SystemNode> = tree.nodes.iter().map(|n| (n.name.as_str(), n)).collect();
    if by_name.len() != tree.nodes.len() {
        return Err(Error::Structural("duplicate node name".into()));
    }
    if !by_name.contains_key(tree.root.as_str()) {
        return Err(Error::Structural(format!("root node '{}' not defined", tree.root)));
    }
    let mut order = Vec::new();
    let mut state: HashMap<&str, u8> = HashMap::new();
    visit(&tree.root, &by_name, &mut state, &mut order, &mut Vec::new())?;

    let mut done: HashMap<String, NodeResult> = HashMap::new();
    let mut out = Vec::new();
    for name in order {
        let node = by_name[name.as_str()];
        let components = node
            .components
            .iter()
            .map(|c| match c {
                NodeComponent::Explicit(c) => c.clone(),
                NodeComponent::Child(child) => Component {
                    name: child.clone(),
                    alternatives: done[child].as_alternatives.clone(),
                },
            })
            .collect();
        let sys = MorphSystem {
            components,
            compatibility: node.compatibility.clone(),
            nu: node.nu,
            scale: node.scale,
        };
        let all = scored_compositions(&sys, &node.options)
            .map_err(|e| Error::domain(format!("node '{}': {e}", node.name)))?;
        let retained = match node.retention {
            Retention::Pareto => pareto_filter(all, node.options.tie_policy)?,
            Retention::AllAdmissible => all,
        };
        let as_alternatives = retained
            .iter()
            .enumerate()
            .map(|(k, s)| DesignAlternative {
                id: format!("{}{}", node.name, k + 1),
                quality: Quality::Estimate(s.estimate.clone()),
                inherited_w: Some(s.w),
                parts: s.selection.clone(),
            })
            .collect();
        let r = NodeResult {
            name: name.clone(),
            retained,
            as_alternatives,
        };
        out.push(r.clone());
        done.insert(name, r);
    }
    Ok(out)
}

fn visit<'a>(
    name: &'a str,
    nodes: &BTreeMap<&'a str, &'a SystemNode>,
    state: &mut HashMap<&'a str, u8>,
    order: &mut Vec<String>,
    path: &mut Vec<&'a str>,
) -> Result<()> {
    match state.get(name) {
        Some(2) => return Ok(()),
        Some(1) => {
            path.push(name);
            return Err(Error::Structural(format!("cycle in system tree: {}", path.join(" -> "))));
        }
        _ => {}
    }
    let node = nodes
        .get(name)
        .ok_or_else(|| Error::Structural(format!("node '{name}' is referenced but not defined")))?;
    state.insert(name, 1);
    path.push(name);
    for c in &node.components {
        if let NodeComponent::Child(child) = c {
            let child = nodes
                .get_key_value(child.as_str())
                .map(|(k, _)| *k)
                .ok_or_else(|| Error::Structural(format!("node '{child}' is referenced but not defined")))?;
            visit(child, nodes, state, order, path)?;
        }
    }
    path.pop();
    state.insert(name, 2);
    order.push(name.to_string());
    Ok(())
}
