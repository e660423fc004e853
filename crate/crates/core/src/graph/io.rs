//! Text format: `V <count>`, then `E <u> <v> [J=..|t=..|p=..|x=..]` per edge.
//! `#` starts a comment. Edges without a key get J = 1.

use super::{Coupling, EdgeParams, Graph};
use crate::error::{Error, Result};
use std::path::Path;

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut vertex_count = None;
    let mut edges = Vec::new();
    let mut params = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "V" => {
                if vertex_count.is_some() {
                    return Err(err("duplicate V line".into()));
                }
                let n = fields.get(1).and_then(|s| s.parse::<usize>().ok());
                vertex_count = Some(n.filter(|&n| n > 0).ok_or_else(|| err("expected `V <positive count>`".into()))?);
            }
            "E" => {
                if vertex_count.is_none() {
                    return Err(err("E line before V line".into()));
                }
                if !(3..=4).contains(&fields.len()) {
                    return Err(err("expected `E <u> <v> [key=value]`".into()));
                }
                let u = fields[1].parse::<usize>().map_err(|e| err(e.to_string()))?;
                let v = fields[2].parse::<usize>().map_err(|e| err(e.to_string()))?;
                let p = match fields.get(3) {
                    None => EdgeParams::default(),
                    Some(kv) => {
                        let (key, value) = kv.split_once('=').ok_or_else(|| err(format!("bad parameter `{kv}`")))?;
                        let value = value.parse::<f64>().map_err(|e| err(e.to_string()))?;
                        let c = match key {
                            "J" => Coupling::J(value),
                            "t" => Coupling::T(value),
                            "p" => Coupling::P(value),
                            "x" => Coupling::X(value),
                            other => return Err(err(format!("unknown parameter key `{other}`"))),
                        };
                        EdgeParams::from_coupling(c).map_err(|e| err(e.to_string()))?
                    }
                };
                edges.push((u, v));
                params.push(p);
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    let n = vertex_count.ok_or(Error::Parse { line: 0, msg: "missing V line".into() })?;
    Graph::with_params(n, edges, params)
}

pub fn read_graph_file(path: impl AsRef<Path>) -> Result<Graph> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Parse { line: 0, msg: format!("{}: {e}", path.as_ref().display()) })?;
    parse_graph(&text)
}

/// Serializes with the J key (or x for antiferromagnetic weights).
pub fn write_graph(graph: &Graph) -> String {
    let mut out = format!("V {}\n", graph.vertex_count());
    for (&(u, v), p) in graph.edges().iter().zip(graph.params()) {
        if p.j.is_nan() {
            out.push_str(&format!("E {u} {v} x={:.17e}\n", p.x));
        } else {
            out.push_str(&format!("E {u} {v} J={:.17e}\n", p.j));
        }
    }
    out
}
