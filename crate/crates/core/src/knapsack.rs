//! Knapsack selection with scalar or multiset objectives.
//!
//! Items may be partitioned into groups, with exactly one or at most one item
//! chosen per group. Multiset objectives are only partially ordered, so the
//! solvers return every feasible selection whose objective is not dominated.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{generalized_median, set_median, MedianKind, MedianResult};
use crate::decimal::Tenths;
use crate::error::{Error, Result};
use crate::estimate::{multiset_coefficient, MultisetEstimate, ScaleSpec, ValidationMode};
use crate::order::{compare, compare_cumulative, compare_mixed, cumulative_counts, mixed_counts, Comparison};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupMode {
    /// Plain 0/1 knapsack; groups are ignored.
    #[default]
    None,
    ExactlyOne,
    AtMostOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    #[default]
    Scalar,
    Integrated,
    GeneralizedMedian,
    SetMedian,
}

/// How integrated estimates of different cardinality are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardinalityOrder {
    /// Cumulative counts without normalisation: more elements at or above
    /// every level is better. Adding an item never makes a selection worse.
    #[default]
    Cumulative,
    /// Replicate to a common cardinality first ([`compare_mixed`]).
    Proportional,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackItem {
    pub id: String,
    pub group: Option<u32>,
    pub weight: Tenths,
    pub value: Option<Tenths>,
    pub estimate: Option<MultisetEstimate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackInstance {
    pub scale: Option<ScaleSpec>,
    pub items: Vec<KnapsackItem>,
    pub budget: Tenths,
    pub group_mode: GroupMode,
    pub objective: ObjectiveMode,
    pub order: CardinalityOrder,
    pub median_domain: ValidationMode,
}

impl KnapsackInstance {
    pub fn new(items: Vec<KnapsackItem>, budget: Tenths, group_mode: GroupMode, objective: ObjectiveMode) -> Self {
        KnapsackInstance {
            scale: None,
            items,
            budget,
            group_mode,
            objective,
            order: CardinalityOrder::Cumulative,
            median_domain: ValidationMode::Strict,
        }
    }

    pub fn with_budget(&self, budget: Tenths) -> Self {
        KnapsackInstance { budget, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MedianSummary {
    pub canonical: MultisetEstimate,
    pub argmin: Vec<MultisetEstimate>,
    pub objective: u64,
}

impl From<MedianResult> for MedianSummary {
    fn from(m: MedianResult) -> Self {
        MedianSummary {
            canonical: m.canonical,
            argmin: m.argmin,
            objective: m.objective,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Scalar(Tenths),
    /// Integrated estimate; `None` for the empty selection.
    Estimate(Option<MultisetEstimate>),
    Median(Option<MedianSummary>),
}

impl Serialize for Tenths {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n: serde_json::Number = self.to_string().parse().map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KnapsackSolution {
    /// Selected ids, in input order.
    pub selected: Vec<String>,
    #[serde(skip)]
    pub indices: Vec<usize>,
    pub weight: Tenths,
    pub objective: Objective,
}

impl KnapsackSolution {
    pub fn estimate(&self) -> Option<&MultisetEstimate> {
        match &self.objective {
            Objective::Estimate(e) => e.as_ref(),
            Objective::Median(m) => m.as_ref().map(|m| &m.canonical),
            Objective::Scalar(_) => None,
        }
    }

    pub fn value(&self) -> Option<Tenths> {
        match self.objective {
            Objective::Scalar(v) => Some(v),
            _ => None,
        }
    }

    fn sorted_ids(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.selected.iter().map(String::as_str).collect();
        v.sort();
        v
    }
}

/// Deterministic output order: weight, then sorted id list.
fn sort_solutions(v: &mut [KnapsackSolution]) {
    v.sort_by(|a, b| a.weight.cmp(&b.weight).then_with(|| a.sorted_ids().cmp(&b.sorted_ids())));
}

/// Observed DP sizes alongside the theoretical estimate-class bound.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DpStats {
    /// Live states after each stage.
    pub live_states: Vec<usize>,
    /// Distinct objective values among live states after each stage.
    pub live_classes: Vec<usize>,
    /// Upper bound on distinct classes after each stage (`None` = overflow).
    pub class_bound: Vec<Option<u64>>,
}

impl DpStats {
    pub fn within_bound(&self) -> bool {
        self.live_classes
            .iter()
            .zip(&self.class_bound)
            .all(|(&n, b)| b.is_none_or(|b| n as u64 <= b))
    }
}

struct Stage {
    items: Vec<usize>,
    mandatory: bool,
}

fn check_instance(inst: &KnapsackInstance, needs: ObjectiveMode) -> Result<()> {
    if inst.budget < Tenths::ZERO {
        return Err(Error::domain("budget must be non-negative"));
    }
    let mut levels = None;
    let mut card = None;
    for it in &inst.items {
        if it.weight < Tenths::ZERO {
            return Err(Error::domain(format!("item '{}' has a negative weight", it.id)));
        }
        if inst.group_mode != GroupMode::None && it.group.is_none() {
            return Err(Error::domain(format!("item '{}' has no group", it.id)));
        }
        match needs {
            ObjectiveMode::Scalar => {
                if it.value.is_none() {
                    return Err(Error::domain(format!("item '{}' has no value", it.id)));
                }
            }
            _ => {
                let e = it
                    .estimate
                    .as_ref()
                    .ok_or_else(|| Error::domain(format!("item '{}' has no estimate", it.id)))?;
                if *levels.get_or_insert(e.levels()) != e.levels() {
                    return Err(Error::ScaleMismatch(format!("item '{}' has {} levels", it.id, e.levels())));
                }
                if matches!(needs, ObjectiveMode::GeneralizedMedian | ObjectiveMode::SetMedian)
                    && *card.get_or_insert(e.cardinality()) != e.cardinality()
                {
                    return Err(Error::ScaleMismatch(format!(
                        "median objectives need one cardinality; item '{}' has {}",
                        it.id,
                        e.cardinality()
                    )));
                }
            }
        }
    }
    Ok(())
}

fn stages(inst: &KnapsackInstance) -> Vec<Stage> {
    match inst.group_mode {
        GroupMode::None => (0..inst.items.len())
            .map(|i| Stage {
                items: vec![i],
                mandatory: false,
            })
            .collect(),
        mode => {
            let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for (i, it) in inst.items.iter().enumerate() {
                groups.entry(it.group.unwrap_or(0)).or_default().push(i);
            }
            groups
                .into_values()
                .map(|items| Stage {
                    items,
                    mandatory: mode == GroupMode::ExactlyOne,
                })
                .collect()
        }
    }
}

#[derive(Clone)]
struct State<O> {
    weight: Tenths,
    obj: O,
    sel: Vec<usize>,
}

/// Stage-wise DP over `(weight, objective)` states. A state is dropped only
/// when another one weighs no more and has a strictly better objective, where
/// "better" must be preserved by adding the same items to both sides. Every
/// feasible completion of a dropped state is then strictly beaten by the same
/// completion of its dominator, so no optimal selection is lost.
fn pareto_dp<O, A, B>(inst: &KnapsackInstance, init: O, add: A, better: B, class_bound: impl Fn(usize) -> Option<u64>) -> (Vec<State<O>>, DpStats)
where
    O: Clone + PartialEq + Send + Sync,
    A: Fn(&O, usize) -> O + Sync,
    B: Fn(&O, &O) -> bool + Sync,
{
    let st = stages(inst);
    // Cheapest way to satisfy the remaining mandatory stages.
    let mut tail = vec![Tenths::ZERO; st.len() + 1];
    for k in (0..st.len()).rev() {
        let m = if st[k].mandatory {
            st[k].items.iter().map(|&i| inst.items[i].weight).min().unwrap_or(Tenths::ZERO)
        } else {
            Tenths::ZERO
        };
        tail[k] = tail[k + 1] + m;
    }
    let mut stats = DpStats::default();
    let mut states = if tail[0] <= inst.budget {
        vec![State {
            weight: Tenths::ZERO,
            obj: init,
            sel: Vec::new(),
        }]
    } else {
        Vec::new()
    };
    for (k, stage) in st.iter().enumerate() {
        let mut next: Vec<State<O>> = if stage.mandatory { Vec::new() } else { states.clone() };
        for s in &states {
            for &i in &stage.items {
                let w = s.weight + inst.items[i].weight;
                if w + tail[k + 1] > inst.budget {
                    continue;
                }
                let mut sel = s.sel.clone();
                sel.push(i);
                next.push(State {
                    weight: w,
                    obj: add(&s.obj, i),
                    sel,
                });
            }
        }
        let keep: Vec<bool> = next
            .par_iter()
            .map(|p| !next.iter().any(|q| q.weight <= p.weight && better(&q.obj, &p.obj)))
            .collect();
        states = next.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect();
        let mut classes: Vec<&O> = Vec::new();
        for s in &states {
            if !classes.contains(&&s.obj) {
                classes.push(&s.obj);
            }
        }
        stats.live_states.push(states.len());
        stats.live_classes.push(classes.len());
        stats.class_bound.push(class_bound(k + 1));
    }
    (states, stats)
}

fn id_solution(inst: &KnapsackInstance, mut sel: Vec<usize>, weight: Tenths, objective: Objective) -> KnapsackSolution {
    sel.sort_unstable();
    KnapsackSolution {
        selected: sel.iter().map(|&i| inst.items[i].id.clone()).collect(),
        indices: sel,
        weight,
        objective,
    }
}

/// Best total value with some items forced in (`Some(true)`) or out
/// (`Some(false)`). Only the `(weight, value)` frontier is kept per stage.
fn scalar_best(inst: &KnapsackInstance, st: &[Stage], fixed: &[Option<bool>]) -> Option<Tenths> {
    let value = |i: usize| inst.items[i].value.unwrap_or_default();
    let mut states = vec![(Tenths::ZERO, Tenths::ZERO)];
    for stage in st {
        let forced: Vec<usize> = stage.items.iter().copied().filter(|&i| fixed[i] == Some(true)).collect();
        let options: Vec<Option<usize>> = match forced.as_slice() {
            [] => {
                let mut o: Vec<Option<usize>> = stage.items.iter().copied().filter(|&i| fixed[i].is_none()).map(Some).collect();
                if !stage.mandatory {
                    o.push(None);
                }
                o
            }
            [i] => vec![Some(*i)],
            _ => return None,
        };
        let mut next: Vec<(Tenths, Tenths)> = states
            .iter()
            .flat_map(|&(w, v)| {
                options.iter().map(move |o| match *o {
                    Some(i) => (w + inst.items[i].weight, v + value(i)),
                    None => (w, v),
                })
            })
            .filter(|&(w, _)| w <= inst.budget)
            .collect();
        next.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        states.clear();
        for s in next {
            if states.last().is_none_or(|l: &(Tenths, Tenths)| s.1 > l.1) {
                states.push(s);
            }
        }
        if states.is_empty() {
            return None;
        }
    }
    states.iter().map(|s| s.1).max()
}

/// Best scalar selection; ties go to the lexicographically smallest sorted
/// id list. `None` when no selection satisfies the group constraints.
pub fn solve_scalar(inst: &KnapsackInstance) -> Result<Option<KnapsackSolution>> {
    check_instance(inst, ObjectiveMode::Scalar)?;
    let st = stages(inst);
    let n = inst.items.len();
    let mut fixed = vec![None; n];
    let Some(best) = scalar_best(inst, &st, &fixed) else {
        return Ok(None);
    };
    // Build the answer one id at a time, smallest first: stop as soon as the
    // ids taken so far already form an optimum, otherwise take the smallest
    // remaining id that still admits an optimal completion.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| inst.items[a].id.cmp(&inst.items[b].id).then(a.cmp(&b)));
    let mut chosen = Vec::new();
    let mut next = 0;
    loop {
        let alone: Vec<Option<bool>> = fixed.iter().map(|f| Some(*f == Some(true))).collect();
        if scalar_best(inst, &st, &alone) == Some(best) {
            break;
        }
        let mut found = false;
        while next < n {
            let c = order[next];
            next += 1;
            fixed[c] = Some(true);
            if scalar_best(inst, &st, &fixed) == Some(best) {
                chosen.push(c);
                found = true;
                break;
            }
            fixed[c] = Some(false);
        }
        if !found {
            return Err(Error::domain("scalar optimum could not be reconstructed"));
        }
    }
    let weight = chosen.iter().map(|&i| inst.items[i].weight).sum();
    Ok(Some(id_solution(inst, chosen, weight, Objective::Scalar(best))))
}

fn uniform_cardinality(inst: &KnapsackInstance) -> Option<u32> {
    let mut it = inst.items.iter().filter_map(|i| i.estimate.as_ref().map(|e| e.cardinality()));
    let first = it.next()?;
    it.all(|c| c == first).then_some(first)
}

fn class_bound_fn(inst: &KnapsackInstance) -> impl Fn(usize) -> Option<u64> {
    let levels = inst.items.iter().find_map(|i| i.estimate.as_ref().map(|e| e.levels())).unwrap_or(1) as u64;
    let uniform = uniform_cardinality(inst);
    let max_card = inst
        .items
        .iter()
        .filter_map(|i| i.estimate.as_ref().map(|e| e.cardinality()))
        .max()
        .unwrap_or(0) as u64;
    let exactly_one = inst.group_mode == GroupMode::ExactlyOne;
    move |i: usize| {
        let i = i as u64;
        match uniform {
            Some(eta) if exactly_one => multiset_coefficient(levels, i * eta as u64).ok(),
            Some(eta) => (1..=i).try_fold(1u64, |acc, k| {
                multiset_coefficient(levels, k * eta as u64).ok().and_then(|m| acc.checked_add(m))
            }),
            None => multiset_coefficient(levels + 1, i * max_card).ok(),
        }
    }
}

fn integrated_better(order: CardinalityOrder) -> impl Fn(&Vec<u32>, &Vec<u32>) -> bool + Sync {
    move |a, b| match order {
        CardinalityOrder::Cumulative => cumulative_counts(a, b) == Comparison::Greater,
        // Proportional dominance is not preserved under adding items across
        // cardinalities, so only same-cardinality states may prune.
        CardinalityOrder::Proportional => {
            a.iter().sum::<u32>() == b.iter().sum::<u32>() && cumulative_counts(a, b) == Comparison::Greater
        }
    }
}

fn counts_order(order: CardinalityOrder, a: &[u32], b: &[u32]) -> Comparison {
    match order {
        CardinalityOrder::Cumulative => cumulative_counts(a, b),
        CardinalityOrder::Proportional => mixed_counts(a, b),
    }
}

fn to_estimate(counts: Vec<u32>) -> Result<Option<MultisetEstimate>> {
    if counts.iter().all(|&c| c == 0) {
        Ok(None)
    } else {
        MultisetEstimate::new(counts, ValidationMode::Relaxed).map(Some)
    }
}

/// All feasible selections whose integrated estimate is maximal under
/// `inst.order`, plus DP statistics.
pub fn solve_multiset_integrated_with_stats(inst: &KnapsackInstance) -> Result<(Vec<KnapsackSolution>, DpStats)> {
    check_instance(inst, ObjectiveMode::Integrated)?;
    let levels = inst.items.iter().find_map(|i| i.estimate.as_ref().map(|e| e.levels())).unwrap_or(1);
    let add = |acc: &Vec<u32>, i: usize| -> Vec<u32> {
        let e = inst.items[i].estimate.as_ref().map(|e| e.counts()).unwrap_or(&[]);
        acc.iter().zip(e).map(|(a, b)| a + b).collect()
    };
    let (states, stats) = pareto_dp(inst, vec![0u32; levels], add, integrated_better(inst.order), class_bound_fn(inst));
    let keep: Vec<bool> = states
        .par_iter()
        .map(|p| !states.iter().any(|q| counts_order(inst.order, &q.obj, &p.obj) == Comparison::Greater))
        .collect();
    let mut out = Vec::new();
    for (s, k) in states.into_iter().zip(keep) {
        if k {
            let e = to_estimate(s.obj)?;
            out.push(id_solution(inst, s.sel, s.weight, Objective::Estimate(e)));
        }
    }
    sort_solutions(&mut out);
    Ok((out, stats))
}

pub fn solve_multiset_integrated(inst: &KnapsackInstance) -> Result<Vec<KnapsackSolution>> {
    solve_multiset_integrated_with_stats(inst).map(|(s, _)| s)
}

fn median_kind(inst: &KnapsackInstance) -> MedianKind {
    if inst.objective == ObjectiveMode::SetMedian {
        MedianKind::Set
    } else {
        MedianKind::Generalized
    }
}

fn median_of(inst: &KnapsackInstance, sel: &[usize], kind: MedianKind) -> Result<Option<MedianSummary>> {
    if sel.is_empty() {
        return Ok(None);
    }
    // Input order, so tied set medians are listed the same way whichever
    // order the selection was built in.
    let mut sel = sel.to_vec();
    sel.sort_unstable();
    let es: Vec<MultisetEstimate> = sel
        .iter()
        .map(|&i| inst.items[i].estimate.clone().expect("checked"))
        .collect();
    let m = match kind {
        MedianKind::Generalized => generalized_median(&es, inst.median_domain)?,
        MedianKind::Set => set_median(&es)?,
    };
    Ok(Some(m.into()))
}

fn median_cmp(a: &Option<MedianSummary>, b: &Option<MedianSummary>) -> Result<Comparison> {
    Ok(match (a, b) {
        (None, None) => Comparison::Equal,
        (None, Some(_)) => Comparison::Less,
        (Some(_), None) => Comparison::Greater,
        (Some(x), Some(y)) => compare(&x.canonical, &y.canonical)?,
    })
}

/// All feasible selections whose median (generalized unless the instance
/// objective is `SetMedian`) is maximal. The objective does not decompose
/// over items, so selections are enumerated stage by stage with budget
/// pruning.
pub fn solve_multiset_median(inst: &KnapsackInstance) -> Result<Vec<KnapsackSolution>> {
    let kind = median_kind(inst);
    median_group_mode(inst)?;
    check_instance(inst, ObjectiveMode::GeneralizedMedian)?;
    let st = stages(inst);
    let mut sels: Vec<(Vec<usize>, Tenths)> = Vec::new();
    walk(inst, &st, 0, &mut Vec::new(), Tenths::ZERO, &mut sels);
    let scored: Vec<(Vec<usize>, Tenths, Option<MedianSummary>)> = sels
        .into_par_iter()
        .map(|(s, w)| median_of(inst, &s, kind).map(|m| (s, w, m)))
        .collect::<Result<_>>()?;
    let keep: Vec<bool> = scored
        .par_iter()
        .map(|(_, _, m)| -> Result<bool> {
            for (_, _, o) in &scored {
                if median_cmp(o, m)? == Comparison::Greater {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<KnapsackSolution> = scored
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|((s, w, m), _)| id_solution(inst, s, w, Objective::Median(m)))
        .collect();
    sort_solutions(&mut out);
    Ok(out)
}

// Medians only live in a fixed P^{l,η} when every selection has the same
// size, which only exactly-one grouping guarantees.
fn median_group_mode(inst: &KnapsackInstance) -> Result<()> {
    if inst.group_mode != GroupMode::ExactlyOne {
        return Err(Error::Unsupported(
            "median objectives need group_mode exactly_one (selection sizes vary otherwise; use integrated)".into(),
        ));
    }
    Ok(())
}

fn walk(inst: &KnapsackInstance, st: &[Stage], k: usize, sel: &mut Vec<usize>, w: Tenths, out: &mut Vec<(Vec<usize>, Tenths)>) {
    if w > inst.budget {
        return;
    }
    if k == st.len() {
        out.push((sel.clone(), w));
        return;
    }
    if !st[k].mandatory {
        walk(inst, st, k + 1, sel, w, out);
    }
    for &i in &st[k].items {
        sel.push(i);
        walk(inst, st, k + 1, sel, w + inst.items[i].weight, out);
        sel.pop();
    }
}

/// Any solver dispatched on `inst.objective`.
pub fn solve(inst: &KnapsackInstance) -> Result<Vec<KnapsackSolution>> {
    match inst.objective {
        ObjectiveMode::Scalar => Ok(solve_scalar(inst)?.into_iter().collect()),
        ObjectiveMode::Integrated => solve_multiset_integrated(inst),
        ObjectiveMode::GeneralizedMedian | ObjectiveMode::SetMedian => solve_multiset_median(inst),
    }
}

pub const ORACLE_LIMIT: usize = 24;

/// Exhaustive reference solver over all item subsets. For the scalar
/// objective it returns every optimal selection; otherwise every selection
/// with a maximal objective. Refuses instances above [`ORACLE_LIMIT`] items.
pub fn brute_force_oracle(inst: &KnapsackInstance) -> Result<Vec<KnapsackSolution>> {
    let n = inst.items.len();
    if n > ORACLE_LIMIT {
        return Err(Error::TooLarge { items: n, limit: ORACLE_LIMIT });
    }
    if matches!(inst.objective, ObjectiveMode::GeneralizedMedian | ObjectiveMode::SetMedian) {
        median_group_mode(inst)?;
    }
    check_instance(inst, inst.objective)?;
    let feasible: Vec<u32> = (0u32..(1u32 << n))
        .into_par_iter()
        .filter(|&mask| {
            let sel: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let w: Tenths = sel.iter().map(|&i| inst.items[i].weight).sum();
            w <= inst.budget && groups_ok(inst, &sel)
        })
        .collect();
    let sols: Vec<KnapsackSolution> = feasible
        .par_iter()
        .map(|&mask| {
            let sel: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let w: Tenths = sel.iter().map(|&i| inst.items[i].weight).sum();
            let obj = match inst.objective {
                ObjectiveMode::Scalar => Objective::Scalar(sel.iter().map(|&i| inst.items[i].value.unwrap()).sum()),
                ObjectiveMode::Integrated => {
                    let es: Vec<MultisetEstimate> = sel.iter().map(|&i| inst.items[i].estimate.clone().unwrap()).collect();
                    Objective::Estimate(if es.is_empty() { None } else { Some(crate::estimate::integrate(&es)?) })
                }
                _ => Objective::Median(median_of(inst, &sel, median_kind(inst))?),
            };
            Ok(id_solution(inst, sel, w, obj))
        })
        .collect::<Result<_>>()?;
    let better = |a: &KnapsackSolution, b: &KnapsackSolution| -> Result<bool> {
        Ok(match (&a.objective, &b.objective) {
            (Objective::Scalar(x), Objective::Scalar(y)) => x > y,
            (Objective::Estimate(x), Objective::Estimate(y)) => match (x, y) {
                (Some(_), None) => true,
                (Some(x), Some(y)) => {
                    let c = match inst.order {
                        CardinalityOrder::Cumulative => compare_cumulative(x, y)?,
                        CardinalityOrder::Proportional => compare_mixed(x, y)?,
                    };
                    c == Comparison::Greater
                }
                _ => false,
            },
            (Objective::Median(x), Objective::Median(y)) => median_cmp(x, y)? == Comparison::Greater,
            _ => false,
        })
    };
    let keep: Vec<bool> = sols
        .par_iter()
        .map(|s| -> Result<bool> {
            for o in &sols {
                if better(o, s)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<KnapsackSolution> = sols.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect();
    sort_solutions(&mut out);
    Ok(out)
}

fn groups_ok(inst: &KnapsackInstance, sel: &[usize]) -> bool {
    if inst.group_mode == GroupMode::None {
        return true;
    }
    let mut count: BTreeMap<u32, usize> = inst.items.iter().filter_map(|i| i.group).map(|g| (g, 0)).collect();
    for &i in sel {
        *count.entry(inst.items[i].group.unwrap_or(0)).or_default() += 1;
    }
    match inst.group_mode {
        GroupMode::ExactlyOne => count.values().all(|&c| c == 1),
        GroupMode::AtMostOne => count.values().all(|&c| c <= 1),
        GroupMode::None => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(id: &str, g: u32, w: i64, v: i64, e: &[u32]) -> KnapsackItem {
        KnapsackItem {
            id: id.into(),
            group: Some(g),
            weight: Tenths(w),
            value: Some(Tenths(v)),
            estimate: Some(MultisetEstimate::new(e.to_vec(), ValidationMode::Relaxed).unwrap()),
        }
    }

    #[test]
    fn infeasible_exactly_one() {
        let inst = KnapsackInstance::new(vec![item("a", 1, 50, 1, &[1, 0])], Tenths(10), GroupMode::ExactlyOne, ObjectiveMode::Scalar);
        assert_eq!(solve_scalar(&inst).unwrap(), None);
        assert!(solve_multiset_integrated(&inst).unwrap().is_empty());
        assert!(brute_force_oracle(&inst).unwrap().is_empty());
    }

    #[test]
    fn empty_selection_when_nothing_fits() {
        let mut inst = KnapsackInstance::new(vec![item("a", 1, 50, 1, &[1, 0])], Tenths(10), GroupMode::None, ObjectiveMode::Integrated);
        let s = solve_multiset_integrated(&inst).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].objective, Objective::Estimate(None));
        inst.objective = ObjectiveMode::GeneralizedMedian;
        assert!(matches!(solve_multiset_median(&inst), Err(Error::Unsupported(_))));
    }

    #[test]
    fn missing_group_rejected() {
        let mut it = item("a", 1, 1, 1, &[1, 0]);
        it.group = None;
        let inst = KnapsackInstance::new(vec![it], Tenths(10), GroupMode::AtMostOne, ObjectiveMode::Scalar);
        assert!(matches!(solve_scalar(&inst), Err(Error::Domain(_))));
    }

    #[test]
    fn oracle_refuses_large() {
        let items = (0..25).map(|i| item(&i.to_string(), 1, 1, 1, &[1, 0])).collect();
        let inst = KnapsackInstance::new(items, Tenths(10), GroupMode::None, ObjectiveMode::Scalar);
        assert!(matches!(brute_force_oracle(&inst), Err(Error::TooLarge { items: 25, limit: 24 })));
    }
}
