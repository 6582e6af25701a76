//! Text, JSON, CSV and DOT renderings. Every function returns the complete
//! output with LF line endings; nothing here depends on thread scheduling.

use std::fmt::Write as _;

use mset_core::io::Problem;
use mset_core::knapsack::{KnapsackInstance, KnapsackSolution, Objective};
use mset_core::synthesis::{compare_solutions, CompositeSolution, NodeResult, SynthesisOptions, SystemTree};
use mset_core::*;
use serde_json::{json, Value};

use crate::Format;

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Overflow(_) => "overflow",
        Error::LengthMismatch { .. } => "length_mismatch",
        Error::ScaleMismatch(_) => "scale_mismatch",
        Error::InvalidEstimate(_) => "invalid_estimate",
        Error::Domain(_) => "domain",
        Error::Structural(_) => "structural",
        Error::Unsupported(_) => "unsupported",
        Error::TooLarge { .. } => "too_large",
        Error::Schema { .. } => "schema",
        Error::Io(_) => "io",
    }
}

/// The error text without the kind prefix already shown by [`error_kind`].
pub fn error_message(e: &Error) -> String {
    match e {
        Error::Overflow(m) => format!("overflow computing {m}"),
        Error::ScaleMismatch(m) | Error::InvalidEstimate(m) | Error::Structural(m) | Error::Unsupported(m) | Error::Io(m) => {
            m.clone()
        }
        Error::Schema { pointer, message } if pointer.is_empty() => message.clone(),
        Error::Schema { pointer, message } => format!("at {pointer}: {message}"),
        other => other.to_string(),
    }
}

pub fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn label(v: &Value) -> String {
    v.as_str().map(str::to_owned).unwrap_or_else(|| v.to_string())
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn problem_summary(p: &Problem, as_json: bool) -> String {
    let (kind, detail) = match p {
        Problem::EstimateSet(s) => ("estimate_set", json!({ "estimates": s.estimates.len(), "mode": s.mode })),
        Problem::System(sys, opts) => (
            "system",
            json!({
                "components": sys.components.len(),
                "alternatives": sys.components.iter().map(|c| c.alternatives.len()).sum::<usize>(),
                "compatibility_entries": sys.compatibility.as_ref().map_or(0, |t| t.len()),
                "nu": sys.effective_nu(),
                "mode": opts.mode,
            }),
        ),
        Problem::Tree(t) => ("tree", json!({ "root": t.root, "nodes": t.nodes.len() })),
        Problem::Knapsack(k) => (
            "knapsack",
            json!({ "items": k.items.len(), "budget": k.budget, "group_mode": k.group_mode, "objective": k.objective }),
        ),
    };
    if as_json {
        return json_line(&json!({ "valid": true, "kind": kind, "summary": detail }));
    }
    let mut parts = Vec::new();
    if let Value::Object(m) = &detail {
        for (k, v) in m {
            parts.push(format!("{k}={}", label(v)));
        }
    }
    format!("valid {kind}: {}\n", parts.join(" "))
}

pub fn validation(e: &MultisetEstimate, scale: ScaleSpec, mode: ValidationMode, v: &Validation, as_json: bool) -> String {
    if as_json {
        return json_line(&json!({
            "estimate": e,
            "scale": scale,
            "mode": mode,
            "valid": v.is_ok(),
            "violations": v.violations,
        }));
    }
    let mode = label(&json!(mode));
    if v.is_ok() {
        return format!("valid {e} on {scale} ({mode})\n");
    }
    let mut s = format!("invalid {e} on {scale} ({mode})\n");
    for x in &v.violations {
        let _ = writeln!(s, "  {x}");
    }
    s
}

pub fn estimate_list(all: &[MultisetEstimate], levels: usize, format: Format) -> String {
    match format {
        Format::Json => json_line(&json!(all)),
        Format::Csv => {
            let mut s: String = (1..=levels).map(|l| format!("level{l}")).collect::<Vec<_>>().join(",");
            s.push('\n');
            for e in all {
                let row: Vec<String> = e.counts().iter().map(|c| c.to_string()).collect();
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
        _ => all.iter().map(|e| format!("{e}\n")).collect(),
    }
}

pub fn poset(g: &PosetGraph, format: Format) -> String {
    match format {
        Format::Dot => g.to_dot(),
        Format::Json => json_line(&json!({ "nodes": g.nodes, "edges": g.edges })),
        _ => {
            let mut s = format!("{} nodes, {} edges\n", g.nodes.len(), g.edges.len());
            for &(a, b) in &g.edges {
                let _ = writeln!(s, "{} > {}", g.nodes[a], g.nodes[b]);
            }
            s
        }
    }
}

/// Rows are searched candidates, one column per set member, and the total
/// proximity in the last column.
pub fn upsilon_csv(r: &MedianResult, set: &[MultisetEstimate]) -> Result<String> {
    let mut rows = Vec::new();
    let mut header = vec!["candidate".to_string()];
    header.extend(set.iter().map(|e| e.to_string()));
    header.push("upsilon".into());
    rows.push(header);
    for (m, total) in &r.totals {
        let mut row = vec![m.to_string()];
        for e in set {
            row.push(proximity(m, e)?.to_string());
        }
        row.push(total.to_string());
        rows.push(row);
    }
    csv_string(rows)
}

fn join_estimates(v: &[MultisetEstimate]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn median_text(r: &MedianResult, d: &DeviationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind: {}", label(&json!(r.kind)));
    let _ = writeln!(s, "median: {}", r.canonical);
    let _ = writeln!(s, "objective: {}", r.objective);
    let _ = writeln!(s, "argmin: {}", join_estimates(&r.argmin));
    let _ = writeln!(
        s,
        "deviation: to_worst={} from_best={} magnitude={}{}",
        d.to_worst,
        d.from_best,
        d.magnitude,
        if d.unique_extremes { "" } else { " (non-unique extremes)" }
    );
    s
}

fn solution_line(s: &CompositeSolution) -> String {
    let mut line = format!("{} {}", s.label(), s.n_value());
    if let Some(obj) = s.median_objective {
        let _ = write!(line, " medians {{{}}} objective {obj}", join_estimates(&s.medians));
    }
    line
}

fn solutions_dot(name: &str, shown: &[CompositeSolution]) -> Result<String> {
    let mut s = format!("digraph {name} {{\n  rankdir=TB;\n  node [shape=box];\n");
    for (i, x) in shown.iter().enumerate() {
        let _ = writeln!(s, "  n{i} [label=\"{}\\n{}\"];", x.label(), x.n_value());
    }
    let mut ws: Vec<u32> = shown.iter().map(|x| x.w).collect();
    ws.sort_unstable_by(|a, b| b.cmp(a));
    ws.dedup();
    for w in ws {
        let ids: Vec<String> = (0..shown.len()).filter(|&i| shown[i].w == w).map(|i| format!("n{i};")).collect();
        let _ = writeln!(s, "  {{ rank=same; {} }}", ids.join(" "));
    }
    let n = shown.len();
    let mut better = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            better[a][b] = compare_solutions(&shown[a], &shown[b])? == Comparison::Greater;
        }
    }
    for a in 0..n {
        for b in 0..n {
            if better[a][b] && !(0..n).any(|m| better[a][m] && better[m][b]) {
                let _ = writeln!(s, "  n{a} -> n{b};");
            }
        }
    }
    s.push_str("}\n");
    Ok(s)
}

pub fn system(opts: &SynthesisOptions, admissible: usize, shown: &[CompositeSolution], all: bool, format: Format) -> Result<String> {
    let set = if all { "admissible" } else { "pareto" };
    Ok(match format {
        Format::Dot => solutions_dot("synthesis", shown)?,
        Format::Json => json_line(&json!({
            "mode": opts.mode,
            "w_min": opts.w_min,
            "admissible": admissible,
            "set": set,
            "solutions": shown,
        })),
        _ => {
            let mut s = format!("mode: {}\nadmissible: {admissible}\n", label(&json!(opts.mode)));
            if !all {
                let _ = writeln!(s, "pareto: {}", shown.len());
            }
            for x in shown {
                s.push_str(&solution_line(x));
                s.push('\n');
            }
            s
        }
    })
}

pub fn tree(t: &SystemTree, results: &[NodeResult], format: Format) -> Result<String> {
    let root = results.last().expect("hierarchical synthesis always returns the root");
    Ok(match format {
        Format::Dot => solutions_dot("synthesis", &root.retained)?,
        Format::Json => {
            let nodes: Vec<Value> = results
                .iter()
                .map(|r| {
                    let node = t.nodes.iter().find(|n| n.name == r.name);
                    json!({
                        "name": r.name,
                        "mode": node.map(|n| n.options.mode),
                        "retention": node.map(|n| n.retention),
                        "solutions": r.retained.iter().zip(&r.as_alternatives).map(|(s, a)| {
                            let mut v = json!(s);
                            v["alias"] = json!(a.id);
                            v
                        }).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_line(&json!({ "root": t.root, "nodes": nodes }))
        }
        _ => {
            let mut s = String::new();
            for r in results {
                let node = t.nodes.iter().find(|n| n.name == r.name);
                let _ = writeln!(
                    s,
                    "[{}] mode: {} retention: {} solutions: {}",
                    r.name,
                    node.map_or_else(String::new, |n| label(&json!(n.options.mode))),
                    node.map_or_else(String::new, |n| label(&json!(n.retention))),
                    r.retained.len()
                );
                for (x, a) in r.retained.iter().zip(&r.as_alternatives) {
                    let _ = writeln!(s, "  {} = {}", a.id, solution_line(x));
                }
            }
            s
        }
    })
}

fn objective_cells(s: &KnapsackSolution) -> (String, String, String, String) {
    match &s.objective {
        Objective::Scalar(v) => (v.to_string(), String::new(), String::new(), String::new()),
        Objective::Estimate(e) => (String::new(), e.as_ref().map_or_else(|| "()".into(), |e| e.to_string()), String::new(), String::new()),
        Objective::Median(None) => (String::new(), "()".into(), String::new(), String::new()),
        Objective::Median(Some(m)) => (
            String::new(),
            m.canonical.to_string(),
            join_estimates(&m.argmin),
            m.objective.to_string(),
        ),
    }
}

pub fn knapsack(inst: &KnapsackInstance, sols: &[KnapsackSolution], format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(json_line(&json!({
            "budget": inst.budget,
            "group_mode": inst.group_mode,
            "objective": inst.objective,
            "order": inst.order,
            "solutions": sols,
        }))),
        Format::Csv => {
            let mut rows = vec![["selected", "weight", "value", "estimate", "argmin", "median_objective"]
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()];
            for s in sols {
                let (v, e, a, o) = objective_cells(s);
                rows.push(vec![s.selected.join(" "), s.weight.to_string(), v, e, a, o]);
            }
            csv_string(rows)
        }
        _ => {
            let mut out = format!(
                "objective: {}\ngroup_mode: {}\nbudget: {}\nsolutions: {}\n",
                label(&json!(inst.objective)),
                label(&json!(inst.group_mode)),
                inst.budget,
                sols.len()
            );
            for s in sols {
                let (v, e, a, o) = objective_cells(s);
                let _ = write!(out, "{{{}}} weight {}", s.selected.join(", "), s.weight);
                if !v.is_empty() {
                    let _ = write!(out, " value {v}");
                }
                if !e.is_empty() {
                    let _ = write!(out, " e {e}");
                }
                if !a.is_empty() {
                    let _ = write!(out, " argmin {{{a}}} objective {o}");
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}
