//! JSON documents for graphs, flows, coherent systems, measures, links and
//! sampled paths.
//!
//! A flow document looks like
//!
//! ```json
//! {"levels": [["1"], ["a", "b"]],
//!  "edges": [{"from": [0, "1"], "to": [1, "a"], "m": 1, "spectrum": [0.0]},
//!            {"from": [0, "1"], "to": [1, "b"], "m": 2, "Z": "inf"}],
//!  "beta": 1.0}
//! ```
//!
//! Per-edge thermal data is one of `spectrum` (eigenvalues of `H_e`), `rho`
//! (eigenvalues of `exp(-beta H_e)`) or `Z` (partition value only, possibly
//! `"inf"`); an edge with none of them gets the zero spectrum. Prescribed
//! links use `kappa`. Exact values are written as `"p/q"` strings, floats as
//! JSON numbers. Vertex-keyed maps use keys `"[n,label]"`.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::flow::{EdgeThermal, FlowSpec, PartitionTable};
use crate::graph::{Edge, EdgeId, GradedGraph, VertexId, VertexMap};
use crate::harmonic::{CoherentSystem, LevelMeasure};
use crate::link::LinkMatrix;
use crate::path_space::{ErgodicTable, SampledPath};
use crate::realize::AbstractLink;
use crate::scalar::{Extended, Scalar};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| perr(e.to_string()))
}

pub fn scalar_from_json<S: Scalar>(v: &Value) -> Result<S> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(perr(format!("expected a number, got {other}"))),
    };
    S::parse_text(&text).ok_or_else(|| perr(format!("not a number: {text}")))
}

pub fn extended_from_json<S: Scalar>(v: &Value) -> Result<Extended<S>> {
    if let Value::String(s) = v {
        if matches!(s.trim(), "inf" | "+inf" | "infinity" | "Infinity") {
            return Ok(Extended::Infinite);
        }
    }
    scalar_from_json(v).map(Extended::Finite)
}

pub fn scalar_to_json<S: Scalar>(x: &S) -> Value {
    if S::EXACT {
        return Value::String(x.to_text());
    }
    let f = x.as_f64();
    serde_json::Number::from_f64(f).map_or_else(|| Value::String(x.to_text()), Value::Number)
}

pub fn extended_to_json<S: Scalar>(x: &Extended<S>) -> Value {
    match x {
        Extended::Finite(v) => scalar_to_json(v),
        Extended::Infinite => Value::String("inf".into()),
    }
}

/// `"[n,label]"` to `(n, label)`; the label may itself contain commas.
pub fn split_vertex_key(key: &str) -> Result<(usize, &str)> {
    let inner = key
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| perr(format!("bad vertex key {key:?}")))?;
    let (level, label) = inner
        .split_once(',')
        .ok_or_else(|| perr(format!("bad vertex key {key:?}")))?;
    let level = level
        .trim()
        .parse()
        .map_err(|_| perr(format!("bad level in {key:?}")))?;
    Ok((level, label))
}

pub fn vertex_from_key(g: &GradedGraph, key: &str) -> Result<VertexId> {
    let (level, label) = split_vertex_key(key)?;
    if level > g.depth() {
        return Err(Error::VertexNotFound(key.to_string()));
    }
    g.vertex(level, label)
}

fn vertex_ref(v: &Value) -> Result<(usize, String)> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| perr(format!("expected [level, label], got {v}")))?;
    let level = arr[0]
        .as_u64()
        .ok_or_else(|| perr(format!("bad level {}", arr[0])))? as usize;
    let label = match &arr[1] {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(perr(format!("bad label {other}"))),
    };
    Ok((level, label))
}

/// A parsed graph document: the graph plus the raw edge objects, aligned
/// with [`EdgeId`]s.
struct GraphDoc {
    graph: GradedGraph,
    edge_objects: Vec<Vec<Map<String, Value>>>,
    root: Map<String, Value>,
}

fn read_graph_doc(v: &Value) -> Result<GraphDoc> {
    let root = v
        .as_object()
        .ok_or_else(|| perr("document must be an object"))?
        .clone();
    let levels_v = root
        .get("levels")
        .and_then(Value::as_array)
        .ok_or_else(|| perr("missing \"levels\""))?;
    let mut levels = Vec::with_capacity(levels_v.len());
    for (n, l) in levels_v.iter().enumerate() {
        let labels = l
            .as_array()
            .ok_or_else(|| perr(format!("level {n} must be an array")))?
            .iter()
            .map(|x| match x {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                other => Err(perr(format!("bad label {other}"))),
            })
            .collect::<Result<Vec<String>>>()?;
        levels.push(labels);
    }
    if levels.is_empty() {
        return Err(perr("no levels"));
    }
    let depth = levels.len() - 1;
    let lookup = |n: usize, label: &str| -> Result<usize> {
        levels
            .get(n)
            .and_then(|l| l.iter().position(|x| x == label))
            .ok_or_else(|| Error::VertexNotFound(format!("[{n},{label}]")))
    };
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new(); depth];
    let mut objects: Vec<Vec<Map<String, Value>>> = vec![Vec::new(); depth];
    let empty = Vec::new();
    let edges_v = match root.get("edges") {
        Some(e) => e
            .as_array()
            .ok_or_else(|| perr("\"edges\" must be an array"))?,
        None => &empty,
    };
    for e in edges_v {
        let obj = e
            .as_object()
            .ok_or_else(|| perr("edge must be an object"))?;
        let (fl, fs) = vertex_ref(
            obj.get("from")
                .ok_or_else(|| perr("edge without \"from\""))?,
        )?;
        let (tl, ts) = vertex_ref(obj.get("to").ok_or_else(|| perr("edge without \"to\""))?)?;
        if tl != fl + 1 || tl > depth {
            return Err(Error::MalformedGraph(format!(
                "edge [{fl},{fs}] -> [{tl},{ts}] does not go up one level"
            )));
        }
        let m = match obj.get("m") {
            None => 1,
            Some(v) => {
                v.as_u64()
                    .filter(|&m| m <= u32::MAX as u64)
                    .ok_or_else(|| perr(format!("bad multiplicity {v}")))? as u32
            }
        };
        edges[tl - 1].push(Edge {
            source: lookup(fl, &fs)?,
            target: lookup(tl, &ts)?,
            multiplicity: m,
        });
        objects[tl - 1].push(obj.clone());
    }
    Ok(GraphDoc {
        graph: GradedGraph::new(levels, edges)?,
        edge_objects: objects,
        root,
    })
}

pub fn graph_from_json(v: &Value) -> Result<GradedGraph> {
    Ok(read_graph_doc(v)?.graph)
}

fn edge_json(g: &GradedGraph, e: EdgeId) -> Map<String, Value> {
    let s = g.source(e);
    let t = g.target(e);
    let mut obj = Map::new();
    obj.insert("from".into(), json!([s.level, g.label(s)]));
    obj.insert("to".into(), json!([t.level, g.label(t)]));
    obj.insert("m".into(), json!(g.edge(e).multiplicity));
    obj
}

pub fn graph_to_json(g: &GradedGraph) -> Value {
    let levels: Vec<Vec<&str>> = (0..=g.depth())
        .map(|n| g.labels(n).iter().map(String::as_str).collect())
        .collect();
    let edges: Vec<Value> = g
        .all_edge_ids()
        .map(|e| Value::Object(edge_json(g, e)))
        .collect();
    json!({"levels": levels, "edges": edges})
}

/// Parses a flow document. `beta` overrides the document's value; if
/// neither is given, beta is zero.
pub fn flow_from_json<S: Scalar>(v: &Value, beta: Option<S>) -> Result<FlowSpec<S>> {
    let doc = read_graph_doc(v)?;
    let beta = match (beta, doc.root.get("beta")) {
        (Some(b), _) => b,
        (None, Some(b)) => scalar_from_json(b)?,
        (None, None) => S::zero(),
    };
    let g = Arc::new(doc.graph);
    let mut thermal = g.edge_map(EdgeThermal::PartitionOnly(Extended::Infinite));
    for e in g.all_edge_ids() {
        let obj = &doc.edge_objects[e.level - 1][e.index];
        let m = g.edge(e).multiplicity as usize;
        let list = |key: &str| -> Result<Option<Vec<S>>> {
            match obj.get(key) {
                None => Ok(None),
                Some(Value::Array(xs)) => xs
                    .iter()
                    .map(scalar_from_json)
                    .collect::<Result<_>>()
                    .map(Some),
                Some(other) => Err(perr(format!("\"{key}\" must be an array, got {other}"))),
            }
        };
        thermal[e] = if let Some(s) = list("spectrum")? {
            EdgeThermal::Spectrum(s)
        } else if let Some(w) = list("rho")? {
            EdgeThermal::Boltzmann(w)
        } else if let Some(z) = obj.get("Z") {
            EdgeThermal::PartitionOnly(extended_from_json(z)?)
        } else {
            EdgeThermal::Spectrum(vec![S::zero(); m])
        };
    }
    FlowSpec::new(g, beta, thermal)
}

pub fn flow_to_json<S: Scalar>(f: &FlowSpec<S>) -> Value {
    let g = f.graph();
    let edges: Vec<Value> = g
        .all_edge_ids()
        .map(|e| {
            let mut obj = edge_json(g, e);
            match f.thermal(e) {
                EdgeThermal::Spectrum(v) => {
                    obj.insert("spectrum".into(), v.iter().map(scalar_to_json).collect());
                }
                EdgeThermal::Boltzmann(v) => {
                    obj.insert("rho".into(), v.iter().map(scalar_to_json).collect());
                }
                EdgeThermal::PartitionOnly(z) => {
                    obj.insert("Z".into(), extended_to_json(z));
                }
            }
            Value::Object(obj)
        })
        .collect();
    let mut out = graph_to_json(g);
    out["edges"] = Value::Array(edges);
    out["beta"] = scalar_to_json(f.beta());
    out
}

/// Reads a prescribed link: every edge carries `kappa`.
pub fn link_spec_from_json<S: Scalar>(v: &Value) -> Result<AbstractLink<S>> {
    let doc = read_graph_doc(v)?;
    let g = Arc::new(doc.graph);
    let mut weights = g.edge_map(S::zero());
    for e in g.all_edge_ids() {
        let obj = &doc.edge_objects[e.level - 1][e.index];
        let k = obj.get("kappa").ok_or_else(|| {
            perr(format!(
                "edge {} has no \"kappa\"",
                crate::flow::edge_key(&g, e)
            ))
        })?;
        weights[e] = scalar_from_json(k)?;
    }
    AbstractLink::new(g, weights)
}

pub fn link_spec_to_json<S: Scalar>(k: &AbstractLink<S>) -> Value {
    let g = k.graph();
    let edges: Vec<Value> = g
        .all_edge_ids()
        .map(|e| {
            let mut obj = edge_json(g, e);
            obj.insert("kappa".into(), scalar_to_json(k.weight(e)));
            Value::Object(obj)
        })
        .collect();
    let mut out = graph_to_json(g);
    out["edges"] = Value::Array(edges);
    out
}

fn vertex_values<S: Scalar>(v: &Value, g: &GradedGraph) -> Result<Vec<(VertexId, S)>> {
    let obj = v
        .as_object()
        .ok_or_else(|| perr("expected an object keyed by \"[n,label]\""))?;
    obj.iter()
        .map(|(k, x)| Ok((vertex_from_key(g, k)?, scalar_from_json(x)?)))
        .collect()
}

/// A coherent system as `{"[n,label]": value}`. Its depth is the highest
/// level present; absent vertices below it are zero.
pub fn system_from_json<S: Scalar>(v: &Value, g: &GradedGraph) -> Result<CoherentSystem<S>> {
    let entries = vertex_values::<S>(v, g)?;
    let depth = entries.iter().map(|(z, _)| z.level).max().unwrap_or(0);
    let mut values = VertexMap(
        (0..=depth)
            .map(|n| vec![S::zero(); g.level_size(n)])
            .collect(),
    );
    for (z, x) in entries {
        values[z] = x;
    }
    Ok(CoherentSystem::new(values))
}

fn vertex_map_json(g: &GradedGraph, levels: usize, f: impl Fn(VertexId) -> Value) -> Value {
    let mut obj = Map::new();
    for n in 0..levels {
        for z in g.vertices(n) {
            obj.insert(g.vertex_key(z), f(z));
        }
    }
    Value::Object(obj)
}

pub fn system_to_json<S: Scalar>(nu: &CoherentSystem<S>, g: &GradedGraph) -> Value {
    vertex_map_json(g, nu.depth() + 1, |z| scalar_to_json(nu.get(z)))
}

/// A level measure as `{"[n,label]": weight}`, all keys on one level.
pub fn measure_from_json<S: Scalar>(v: &Value, g: &GradedGraph) -> Result<LevelMeasure<S>> {
    let entries = vertex_values::<S>(v, g)?;
    let level = entries
        .first()
        .map(|(z, _)| z.level)
        .ok_or_else(|| perr("empty measure"))?;
    if entries.iter().any(|(z, _)| z.level != level) {
        return Err(Error::InvalidMeasure("keys span several levels".into()));
    }
    let mut weights = vec![S::zero(); g.level_size(level)];
    for (z, x) in entries {
        weights[z.index] = x;
    }
    LevelMeasure::new(level, weights)
}

pub fn measure_to_json<S: Scalar>(mu: &LevelMeasure<S>, g: &GradedGraph) -> Value {
    let mut obj = Map::new();
    for z in g.vertices(mu.level) {
        obj.insert(g.vertex_key(z), scalar_to_json(&mu.weights[z.index]));
    }
    Value::Object(obj)
}

pub fn partition_to_json<S: Scalar>(t: &PartitionTable<S>, g: &GradedGraph) -> Value {
    let vertex = vertex_map_json(g, g.depth() + 1, |z| extended_to_json(t.vertex_z(z)));
    let edges: Vec<Value> = g
        .all_edge_ids()
        .map(|e| {
            let mut obj = edge_json(g, e);
            obj.insert("Z".into(), extended_to_json(t.edge_z(e)));
            Value::Object(obj)
        })
        .collect();
    let finite: Vec<Value> = (0..=g.depth())
        .map(|n| {
            let c = t.classify(n);
            json!({
                "level": n,
                "finite": c.finite.iter().map(|&i| g.vertex_key(VertexId::new(n, i))).collect::<Vec<_>>(),
                "infinite": c.infinite.iter().map(|&i| g.vertex_key(VertexId::new(n, i))).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"vertex": vertex, "edges": edges, "classes": finite})
}

pub fn link_to_json<S: Scalar>(k: &LinkMatrix<S>, g: &GradedGraph) -> Value {
    let rows: Vec<String> = g.vertices(k.upper).map(|z| g.vertex_key(z)).collect();
    let cols: Vec<String> = g.vertices(k.lower).map(|z| g.vertex_key(z)).collect();
    let entries: Vec<Vec<Value>> = k
        .entries
        .iter()
        .map(|r| r.iter().map(scalar_to_json).collect())
        .collect();
    json!({
        "upper": k.upper,
        "lower": k.lower,
        "rows": rows,
        "columns": cols,
        "entries": entries,
    })
}

pub fn link_from_json<S: Scalar>(v: &Value, g: &GradedGraph) -> Result<LinkMatrix<S>> {
    let upper = v["upper"]
        .as_u64()
        .ok_or_else(|| perr("missing \"upper\""))? as usize;
    let lower = v["lower"]
        .as_u64()
        .ok_or_else(|| perr("missing \"lower\""))? as usize;
    let rows = v["entries"]
        .as_array()
        .ok_or_else(|| perr("missing \"entries\""))?;
    let entries = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| perr("row must be an array"))?
                .iter()
                .map(scalar_from_json)
                .collect::<Result<Vec<S>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if upper > g.depth() || entries.len() != g.level_size(upper) {
        return Err(perr("row count does not match the graph"));
    }
    let table_rows = entries
        .iter()
        .map(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    Ok(LinkMatrix {
        upper,
        lower,
        entries,
        finite_rows: table_rows,
    })
}

/// Header and rows of the link matrix as CSV cells.
pub fn link_to_table<S: Scalar>(
    k: &LinkMatrix<S>,
    g: &GradedGraph,
) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["vertex".to_string()];
    header.extend(g.vertices(k.lower).map(|z| g.vertex_key(z)));
    let rows = g
        .vertices(k.upper)
        .map(|z| {
            let mut row = vec![g.vertex_key(z)];
            row.extend(k.entries[z.index].iter().map(|x| x.to_text()));
            row
        })
        .collect();
    (header, rows)
}

pub fn ergodic_to_table<S: Scalar>(
    t: &ErgodicTable<S>,
    g: &GradedGraph,
) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["m".to_string()];
    header.extend(t.targets.iter().map(|&z| g.vertex_key(z)));
    if t.deviation.is_some() {
        header.push("deviation".into());
    }
    let rows = t
        .levels
        .iter()
        .enumerate()
        .map(|(r, m)| {
            let mut row = vec![m.to_string()];
            row.extend(t.values[r].iter().map(|x| x.to_text()));
            if let Some(d) = &t.deviation {
                row.push(d[r].to_text());
            }
            row
        })
        .collect();
    (header, rows)
}

pub fn path_to_json(p: &SampledPath, g: &GradedGraph) -> Value {
    json!({
        "seed": p.seed,
        "draw": p.draw,
        "path": p.vertices.iter().map(|&z| g.vertex_key(z)).collect::<Vec<_>>(),
    })
}

/// Accepts a bare array of vertex keys or an object with a `path` array.
pub fn path_from_json(v: &Value, g: &GradedGraph) -> Result<Vec<VertexId>> {
    let arr = match v {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("path")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("missing \"path\""))?,
        _ => return Err(perr("expected a path")),
    };
    arr.iter()
        .map(|k| {
            k.as_str()
                .ok_or_else(|| perr(format!("bad vertex key {k}")))
                .and_then(|k| vertex_from_key(g, k))
        })
        .collect()
}
