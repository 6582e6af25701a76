//! JSON documents: estimate sets, morphological systems, system trees and
//! knapsack instances.
//!
//! Estimates are written either as a count vector `[2,1,0]` or in element
//! form `{"elements":[1,1,2],"levels":3}`. Errors name the offending location
//! as a JSON pointer.

use std::collections::HashMap;

use serde::Deserialize;
use serde_json::{json, Map, Number, Value};

use crate::decimal::Tenths;
use crate::error::{Error, Result};
use crate::estimate::{MultisetEstimate, ScaleSpec, ValidationMode};
use crate::knapsack::{CardinalityOrder, GroupMode, KnapsackInstance, KnapsackItem, ObjectiveMode};
use crate::synthesis::{
    Compatibility, Component, DesignAlternative, MorphSystem, NodeComponent, Quality, Retention, SynthesisMode,
    SynthesisOptions, SystemNode, SystemTree, TiePolicy,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimateSet {
    pub scale: Option<ScaleSpec>,
    pub mode: ValidationMode,
    pub estimates: Vec<MultisetEstimate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    EstimateSet(EstimateSet),
    System(MorphSystem, SynthesisOptions),
    Tree(SystemTree),
    Knapsack(KnapsackInstance),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEstimate {
    Counts(Vec<u32>),
    Elements { elements: Vec<u32>, levels: usize },
}

#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct RawScale {
    levels: usize,
    cardinality: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    scale: Option<RawScale>,
    mode: Option<ValidationMode>,
    estimates: Vec<RawEstimate>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlternative {
    id: String,
    priority: Option<u32>,
    estimate: Option<RawEstimate>,
    w: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    name: Option<String>,
    alternatives: Option<Vec<RawAlternative>>,
    child: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    a: String,
    b: String,
    w: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    name: Option<String>,
    components: Vec<RawComponent>,
    compatibility: Option<Vec<RawPair>>,
    nu: Option<u32>,
    scale: Option<RawScale>,
    validation: Option<ValidationMode>,
    mode: Option<SynthesisMode>,
    w_min: Option<u32>,
    reference_points: Option<Vec<RawEstimate>>,
    median_domain: Option<ValidationMode>,
    tie_policy: Option<TiePolicy>,
    retention: Option<Retention>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTree {
    root: String,
    nodes: Vec<RawSystem>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawItem {
    id: String,
    group: Option<u32>,
    weight: Number,
    value: Option<Number>,
    estimate: Option<RawEstimate>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKnapsack {
    scale: Option<RawScale>,
    validation: Option<ValidationMode>,
    items: Vec<RawItem>,
    budget: Number,
    group_mode: Option<GroupMode>,
    objective: Option<ObjectiveMode>,
    order: Option<CardinalityOrder>,
    median_domain: Option<ValidationMode>,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut s = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => s.push_str(&format!("/{index}")),
            Segment::Map { key } => s.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => s.push_str(&format!("/{variant}")),
            Segment::Unknown => s.push_str("/?"),
        }
    }
    s
}

fn from_value<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| Error::schema(pointer_of(e.path()), e.inner().to_string()))
}

fn at(pointer: &str, e: Error) -> Error {
    match e {
        Error::Schema { .. } => e,
        other => Error::Domain(format!("at {pointer}: {other}")),
    }
}

fn scale_of(raw: Option<RawScale>, pointer: &str) -> Result<Option<ScaleSpec>> {
    raw.map(|s| ScaleSpec::new(s.levels, s.cardinality).map_err(|e| at(&format!("{pointer}/scale"), e)))
        .transpose()
}

fn estimate_of(raw: &RawEstimate, scale: Option<ScaleSpec>, mode: ValidationMode, pointer: &str) -> Result<MultisetEstimate> {
    let counts = match raw {
        RawEstimate::Counts(c) => c.clone(),
        RawEstimate::Elements { elements, levels } => MultisetEstimate::from_elements(elements, *levels)
            .map_err(|e| at(pointer, e))?
            .counts()
            .to_vec(),
    };
    let r = match scale {
        Some(s) => MultisetEstimate::with_scale(counts, s, mode),
        None => MultisetEstimate::new(counts, mode),
    };
    r.map_err(|e| at(pointer, e))
}

fn tenths_of(n: &Number, pointer: &str) -> Result<Tenths> {
    n.to_string()
        .parse()
        .map_err(|e: Error| Error::schema(pointer, e.to_string()))
}

/// Read any supported document. The kind is recognised by its top-level keys.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::schema("", format!("invalid JSON: {e}")))?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::schema("", "expected a JSON object"))?;
    if obj.contains_key("items") {
        knapsack_of(from_value(&v)?).map(Problem::Knapsack)
    } else if obj.contains_key("nodes") {
        tree_of(from_value(&v)?).map(Problem::Tree)
    } else if obj.contains_key("components") {
        let raw: RawSystem = from_value(&v)?;
        let (sys, opts) = system_of(raw, "")?;
        Ok(Problem::System(sys, opts))
    } else if obj.contains_key("estimates") {
        set_of(from_value(&v)?).map(Problem::EstimateSet)
    } else {
        Err(Error::schema(
            "",
            "unrecognised document: expected one of 'estimates', 'components', 'nodes' or 'items'",
        ))
    }
}

/// Parse a single estimate literal (count vector or element form).
pub fn parse_estimate(text: &str, scale: Option<ScaleSpec>, mode: ValidationMode) -> Result<MultisetEstimate> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::schema("", format!("invalid estimate literal: {e}")))?;
    let raw: RawEstimate = from_value(&v)?;
    estimate_of(&raw, scale, mode, "")
}

fn set_of(raw: RawSet) -> Result<EstimateSet> {
    let scale = scale_of(raw.scale, "")?;
    let mode = raw.mode.unwrap_or_default();
    let estimates = raw
        .estimates
        .iter()
        .enumerate()
        .map(|(i, e)| estimate_of(e, scale, mode, &format!("/estimates/{i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateSet { scale, mode, estimates })
}

fn alternatives_of(
    raw: &[RawAlternative],
    scale: Option<ScaleSpec>,
    mode: ValidationMode,
    pointer: &str,
) -> Result<Vec<DesignAlternative>> {
    raw.iter()
        .enumerate()
        .map(|(i, a)| {
            let p = format!("{pointer}/{i}");
            let quality = match (&a.priority, &a.estimate) {
                (Some(r), None) => Quality::Priority(*r),
                (None, Some(e)) => Quality::Estimate(estimate_of(e, scale, mode, &format!("{p}/estimate"))?),
                _ => return Err(Error::schema(&p, "alternative needs exactly one of 'priority' or 'estimate'")),
            };
            Ok(DesignAlternative {
                id: a.id.clone(),
                quality,
                inherited_w: a.w,
                parts: Vec::new(),
            })
        })
        .collect()
}

fn compat_of(raw: &Option<Vec<RawPair>>, pointer: &str) -> Result<Option<Compatibility>> {
    let Some(pairs) = raw else { return Ok(None) };
    let mut t = Compatibility::new();
    for (i, p) in pairs.iter().enumerate() {
        if let Some(old) = t.insert(&p.a, &p.b, p.w) {
            if old != p.w {
                return Err(Error::Domain(format!(
                    "at {pointer}/compatibility/{i}: conflicting values {old} and {} for ({}, {})",
                    p.w, p.a, p.b
                )));
            }
        }
    }
    Ok(Some(t))
}

/// Every entry must join alternatives of two different components and stay
/// within `ν` when one is given.
fn check_pairs(components: &[Component], raw: &Option<Vec<RawPair>>, nu: Option<u32>, pointer: &str) -> Result<()> {
    let owner: HashMap<&str, usize> = components
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.alternatives.iter().map(move |a| (a.id.as_str(), k)))
        .collect();
    for (i, p) in raw.iter().flatten().enumerate() {
        let at = format!("{pointer}/compatibility/{i}");
        let side = |id: &str| {
            owner
                .get(id)
                .copied()
                .ok_or_else(|| Error::Domain(format!("at {at}: unknown alternative '{id}'")))
        };
        if side(&p.a)? == side(&p.b)? {
            return Err(Error::Domain(format!(
                "at {at}: '{}' and '{}' belong to the same component",
                p.a, p.b
            )));
        }
        if let Some(nu) = nu.filter(|&nu| p.w > nu) {
            return Err(Error::Domain(format!("at {at}: w = {} exceeds nu = {nu}", p.w)));
        }
    }
    Ok(())
}

fn options_of(raw: &RawSystem, scale: Option<ScaleSpec>, validation: ValidationMode, priorities_only: bool, pointer: &str) -> Result<SynthesisOptions> {
    let reference_points = raw
        .reference_points
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, e)| estimate_of(e, scale, validation, &format!("{pointer}/reference_points/{i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthesisOptions {
        mode: raw.mode.unwrap_or(if priorities_only {
            SynthesisMode::BasicCounts
        } else {
            SynthesisMode::Integrated
        }),
        w_min: raw.w_min.unwrap_or(1),
        reference_points,
        median_domain: raw.median_domain.unwrap_or_default(),
        tie_policy: raw.tie_policy.unwrap_or_default(),
    })
}

fn system_of(raw: RawSystem, pointer: &str) -> Result<(MorphSystem, SynthesisOptions)> {
    let scale = scale_of(raw.scale, pointer)?;
    let validation = raw.validation.unwrap_or_default();
    let mut components = Vec::new();
    for (i, c) in raw.components.iter().enumerate() {
        let p = format!("{pointer}/components/{i}");
        match (&c.name, &c.alternatives, &c.child) {
            (Some(name), Some(alts), None) => components.push(Component {
                name: name.clone(),
                alternatives: alternatives_of(alts, scale, validation, &format!("{p}/alternatives"))?,
            }),
            (_, _, Some(_)) => return Err(Error::schema(&p, "child references are only allowed inside 'nodes'")),
            _ => return Err(Error::schema(&p, "component needs 'name' and 'alternatives'")),
        }
    }
    let priorities_only = components
        .iter()
        .all(|c| c.alternatives.iter().all(|a| matches!(a.quality, Quality::Priority(_))));
    let opts = options_of(&raw, scale, validation, priorities_only, pointer)?;
    check_pairs(&components, &raw.compatibility, raw.nu, pointer)?;
    let sys = MorphSystem {
        components,
        compatibility: compat_of(&raw.compatibility, pointer)?,
        nu: raw.nu,
        scale,
    };
    sys.check().map_err(|e| at(pointer, e))?;
    Ok((sys, opts))
}

fn tree_of(raw: RawTree) -> Result<SystemTree> {
    let mut nodes = Vec::new();
    for (n, node) in raw.nodes.iter().enumerate() {
        let pointer = format!("/nodes/{n}");
        let name = node
            .name
            .clone()
            .ok_or_else(|| Error::schema(&pointer, "node needs a 'name'"))?;
        let scale = scale_of(node.scale, &pointer)?;
        let validation = node.validation.unwrap_or_default();
        let mut components = Vec::new();
        let mut priorities_only = true;
        for (i, c) in node.components.iter().enumerate() {
            let p = format!("{pointer}/components/{i}");
            match (&c.name, &c.alternatives, &c.child) {
                (None, None, Some(child)) => {
                    priorities_only = false;
                    components.push(NodeComponent::Child(child.clone()))
                }
                (Some(cname), Some(alts), None) => {
                    let alternatives = alternatives_of(alts, scale, validation, &format!("{p}/alternatives"))?;
                    priorities_only &= alternatives.iter().all(|a| matches!(a.quality, Quality::Priority(_)));
                    components.push(NodeComponent::Explicit(Component {
                        name: cname.clone(),
                        alternatives,
                    }))
                }
                _ => return Err(Error::schema(&p, "component needs either 'child' or 'name' and 'alternatives'")),
            }
        }
        nodes.push(SystemNode {
            options: options_of(node, scale, validation, priorities_only, &pointer)?,
            name,
            components,
            compatibility: compat_of(&node.compatibility, &pointer)?,
            nu: node.nu,
            scale,
            retention: node.retention.unwrap_or_default(),
        });
    }
    Ok(SystemTree { root: raw.root, nodes })
}

fn knapsack_of(raw: RawKnapsack) -> Result<KnapsackInstance> {
    let scale = scale_of(raw.scale, "")?;
    let validation = raw.validation.unwrap_or_default();
    let items = raw
        .items
        .iter()
        .enumerate()
        .map(|(i, it)| {
            let p = format!("/items/{i}");
            Ok(KnapsackItem {
                id: it.id.clone(),
                group: it.group,
                weight: tenths_of(&it.weight, &format!("{p}/weight"))?,
                value: it.value.as_ref().map(|v| tenths_of(v, &format!("{p}/value"))).transpose()?,
                estimate: it
                    .estimate
                    .as_ref()
                    .map(|e| estimate_of(e, scale, validation, &format!("{p}/estimate")))
                    .transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KnapsackInstance {
        scale,
        items,
        budget: tenths_of(&raw.budget, "/budget")?,
        group_mode: raw.group_mode.unwrap_or_default(),
        objective: raw.objective.unwrap_or_default(),
        order: raw.order.unwrap_or_default(),
        median_domain: raw.median_domain.unwrap_or_default(),
    })
}

// ---- normalised output ----------------------------------------------------

fn name_of<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn tenths_value(t: Tenths) -> Value {
    Value::Number(t.to_string().parse().expect("decimal literal"))
}

fn scale_value(s: &Option<ScaleSpec>, obj: &mut Map<String, Value>) {
    if let Some(s) = s {
        obj.insert("scale".into(), json!({"levels": s.levels, "cardinality": s.cardinality}));
    }
}

fn estimate_value(e: &MultisetEstimate) -> Value {
    json!(e.counts())
}

fn alternative_value(a: &DesignAlternative) -> Value {
    let mut o = Map::new();
    o.insert("id".into(), json!(a.id));
    match &a.quality {
        Quality::Priority(r) => o.insert("priority".into(), json!(r)),
        Quality::Estimate(e) => o.insert("estimate".into(), estimate_value(e)),
    };
    if let Some(w) = a.inherited_w {
        o.insert("w".into(), json!(w));
    }
    Value::Object(o)
}

fn component_value(c: &Component) -> Value {
    json!({"name": c.name, "alternatives": c.alternatives.iter().map(alternative_value).collect::<Vec<_>>()})
}

fn common_fields(
    o: &mut Map<String, Value>,
    compat: &Option<Compatibility>,
    nu: Option<u32>,
    scale: &Option<ScaleSpec>,
    opts: &SynthesisOptions,
) {
    if let Some(t) = compat {
        let pairs: Vec<Value> = t.sorted_entries().into_iter().map(|(a, b, w)| json!({"a": a, "b": b, "w": w})).collect();
        o.insert("compatibility".into(), Value::Array(pairs));
    }
    if let Some(nu) = nu {
        o.insert("nu".into(), json!(nu));
    }
    scale_value(scale, o);
    o.insert("mode".into(), name_of(&opts.mode));
    o.insert("w_min".into(), json!(opts.w_min));
    if !opts.reference_points.is_empty() {
        o.insert(
            "reference_points".into(),
            Value::Array(opts.reference_points.iter().map(estimate_value).collect()),
        );
    }
    o.insert("median_domain".into(), name_of(&opts.median_domain));
    o.insert("tie_policy".into(), name_of(&opts.tie_policy));
    o.insert("validation".into(), json!("relaxed"));
}

/// Canonical JSON for a parsed document. Alternatives and items are written
/// in count-vector form, defaults are spelled out, and estimates are marked
/// relaxed since they were already checked on input; parsing the output
/// again yields the same document.
pub fn problem_to_json(p: &Problem) -> Value {
    match p {
        Problem::EstimateSet(s) => {
            let mut o = Map::new();
            scale_value(&s.scale, &mut o);
            o.insert("mode".into(), name_of(&s.mode));
            o.insert("estimates".into(), Value::Array(s.estimates.iter().map(estimate_value).collect()));
            Value::Object(o)
        }
        Problem::System(sys, opts) => {
            let mut o = Map::new();
            o.insert("components".into(), Value::Array(sys.components.iter().map(component_value).collect()));
            common_fields(&mut o, &sys.compatibility, sys.nu, &sys.scale, opts);
            Value::Object(o)
        }
        Problem::Tree(t) => {
            let nodes: Vec<Value> = t
                .nodes
                .iter()
                .map(|n| {
                    let mut o = Map::new();
                    o.insert("name".into(), json!(n.name));
                    let comps: Vec<Value> = n
                        .components
                        .iter()
                        .map(|c| match c {
                            NodeComponent::Explicit(c) => component_value(c),
                            NodeComponent::Child(name) => json!({"child": name}),
                        })
                        .collect();
                    o.insert("components".into(), Value::Array(comps));
                    common_fields(&mut o, &n.compatibility, n.nu, &n.scale, &n.options);
                    o.insert("retention".into(), name_of(&n.retention));
                    Value::Object(o)
                })
                .collect();
            json!({"root": t.root, "nodes": nodes})
        }
        Problem::Knapsack(k) => {
            let mut o = Map::new();
            scale_value(&k.scale, &mut o);
            let items: Vec<Value> = k
                .items
                .iter()
                .map(|it| {
                    let mut m = Map::new();
                    m.insert("id".into(), json!(it.id));
                    if let Some(g) = it.group {
                        m.insert("group".into(), json!(g));
                    }
                    m.insert("weight".into(), tenths_value(it.weight));
                    if let Some(v) = it.value {
                        m.insert("value".into(), tenths_value(v));
                    }
                    if let Some(e) = &it.estimate {
                        m.insert("estimate".into(), estimate_value(e));
                    }
                    Value::Object(m)
                })
                .collect();
            o.insert("items".into(), Value::Array(items));
            o.insert("budget".into(), tenths_value(k.budget));
            o.insert("group_mode".into(), name_of(&k.group_mode));
            o.insert("objective".into(), name_of(&k.objective));
            o.insert("order".into(), name_of(&k.order));
            o.insert("median_domain".into(), name_of(&k.median_domain));
            o.insert("validation".into(), json!("relaxed"));
            Value::Object(o)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointer_locations() {
        let doc = r#"{"items":[{"id":"a","weight":1.0,"value":2.0},{"id":"b","weight":"x"}],"budget":3}"#;
        match parse_problem(doc) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/items/1/weight"),
            other => panic!("{other:?}"),
        }
        let doc = r#"{"items":[{"id":"a","weight":1.25}],"budget":3}"#;
        match parse_problem(doc) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/items/0/weight"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn domain_errors_name_location() {
        let doc = r#"{"scale":{"levels":3,"cardinality":3},"estimates":[[1,1,1],[2,0,1]]}"#;
        let err = parse_problem(doc).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("/estimates/1")), "{err}");
    }

    #[test]
    fn element_form() {
        let e = parse_estimate(r#"{"elements":[1,1,2],"levels":3}"#, None, ValidationMode::Strict).unwrap();
        assert_eq!(e.counts(), &[2, 1, 0]);
    }

    #[test]
    fn unknown_document() {
        assert!(matches!(parse_problem("{}"), Err(Error::Schema { .. })));
        assert!(matches!(parse_problem("[1]"), Err(Error::Schema { .. })));
        assert!(matches!(parse_problem("{"), Err(Error::Schema { .. })));
    }
}
