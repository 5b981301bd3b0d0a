//! JSON Lines instance files plus the matching and coloring output formats.
//!
//! An instance file is a header line
//! `{"n":8,"delta":2,"bipartite_sides":[1,2,...]}` (or `null` sides)
//! followed by exactly `n` arrival lines `{"v":0,"edges":[[u,x],...]}` in
//! arrival order. An edge may be written `[u]` without a value when the
//! caller asks for the uniform fractional matching `x = 1/delta`.
//!
//! [`write_instance`] emits the canonical form; parsing a canonical file and
//! writing it again reproduces it byte for byte.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::graph::{
    ArrivalEvent, Coloring, Edge, GraphInstance, Matching, RevealedEdge, Side, VertexId,
};

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("empty input: missing header line")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: expected arrival of vertex {expected}, found {found}")]
    OutOfOrder {
        line: usize,
        expected: u64,
        found: u64,
    },
    #[error("declared {declared} vertices but found {found} arrival lines")]
    ArrivalCount { declared: usize, found: usize },
    #[error("line {line}: edge without a value and uniform values were not requested")]
    MissingValue { line: usize },
    #[error("uniform values requested but delta is 0")]
    ZeroDelta,
}

/// How to treat edges written without an explicit `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingValues {
    #[default]
    Reject,
    Uniform,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    n: u64,
    delta: u64,
    #[serde(default)]
    bipartite_sides: Option<Vec<u64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrivalLine {
    v: u64,
    edges: Vec<Vec<Value>>,
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

fn vertex_id(line: usize, value: u64) -> Result<VertexId, FormatError> {
    u32::try_from(value)
        .map(VertexId)
        .map_err(|_| syntax(line, format!("vertex id {value} out of range")))
}

/// Parses an instance file. Blank lines are ignored.
pub fn parse_instance(text: &str, missing: MissingValues) -> Result<GraphInstance, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, htext) = lines.next().ok_or(FormatError::MissingHeader)?;
    let header: Header =
        serde_json::from_str(htext).map_err(|e| syntax(hline, format!("bad header: {e}")))?;
    let n = usize::try_from(header.n)
        .ok()
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| syntax(hline, format!("vertex count {} out of range", header.n)))?;
    let delta = usize::try_from(header.delta)
        .map_err(|_| syntax(hline, format!("delta {} out of range", header.delta)))?;
    let sides = match header.bipartite_sides {
        None => None,
        Some(codes) => Some(
            codes
                .into_iter()
                .map(|c| {
                    Side::from_code(c).ok_or_else(|| syntax(hline, format!("bad side label {c}")))
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    let uniform = match missing {
        MissingValues::Uniform if delta == 0 => None,
        MissingValues::Uniform => Some(1.0 / delta as f64),
        MissingValues::Reject => None,
    };

    let mut arrivals = Vec::new();
    for (line, text) in lines {
        let raw: ArrivalLine =
            serde_json::from_str(text).map_err(|e| syntax(line, format!("bad arrival: {e}")))?;
        let expected = arrivals.len() as u64;
        if raw.v != expected {
            return Err(FormatError::OutOfOrder {
                line,
                expected,
                found: raw.v,
            });
        }
        if arrivals.len() >= n {
            return Err(FormatError::ArrivalCount {
                declared: n,
                found: arrivals.len() + 1,
            });
        }
        let vertex = vertex_id(line, raw.v)?;
        let mut edges = Vec::with_capacity(raw.edges.len());
        for item in raw.edges {
            let neighbor = item.first().and_then(Value::as_u64).ok_or_else(|| {
                syntax(line, "edge must start with a non-negative integer neighbor")
            })?;
            let neighbor = vertex_id(line, neighbor)?;
            let x = match item.len() {
                1 => match (missing, uniform) {
                    (MissingValues::Reject, _) => return Err(FormatError::MissingValue { line }),
                    (MissingValues::Uniform, None) => return Err(FormatError::ZeroDelta),
                    (MissingValues::Uniform, Some(x)) => x,
                },
                2 => item[1]
                    .as_f64()
                    .ok_or_else(|| syntax(line, "edge value must be a number"))?,
                k => {
                    return Err(syntax(
                        line,
                        format!("edge has {k} fields, expected 1 or 2"),
                    ))
                }
            };
            edges.push(RevealedEdge { neighbor, x });
        }
        arrivals.push(ArrivalEvent::with_edges(vertex, edges));
    }
    if arrivals.len() != n {
        return Err(FormatError::ArrivalCount {
            declared: n,
            found: arrivals.len(),
        });
    }
    Ok(GraphInstance {
        n,
        delta,
        arrivals,
        sides,
    })
}

/// Canonical serialization: one header line, one line per arrival, each
/// terminated by `\n`.
pub fn write_instance(inst: &GraphInstance) -> String {
    let header = Header {
        n: inst.n as u64,
        delta: inst.delta as u64,
        bipartite_sides: inst
            .sides
            .as_ref()
            .map(|s| s.iter().map(|side| side.code() as u64).collect()),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for a in &inst.arrivals {
        let line = CanonicalArrival {
            v: a.vertex.0,
            edges: a.edges.iter().map(|e| (e.neighbor.0, e.x)).collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("arrival serializes"));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct CanonicalArrival {
    v: u32,
    edges: Vec<(u32, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatchingFile {
    edges: Vec<(u32, u32)>,
}

pub fn write_matching(m: &Matching) -> String {
    let file = MatchingFile {
        edges: m.edges().iter().map(|e| (e.u.0, e.v.0)).collect(),
    };
    serde_json::to_string(&file).expect("matching serializes") + "\n"
}

pub fn parse_matching(text: &str) -> Result<Matching, FormatError> {
    let file: MatchingFile =
        serde_json::from_str(text).map_err(|e| syntax(1, format!("bad matching: {e}")))?;
    Ok(Matching::from_edges(
        file.edges
            .into_iter()
            .map(|(a, b)| Edge::new(VertexId(a), VertexId(b)))
            .collect(),
    ))
}

/// Coloring as CSV rows `u,v,color` in global edge order.
pub fn write_coloring(inst: &GraphInstance, coloring: &Coloring) -> String {
    let mut out = String::from("u,v,color\n");
    for (e, c) in inst.edges().zip(&coloring.colors) {
        writeln!(out, "{},{},{}", e.edge.u, e.edge.v, c).expect("write to string");
    }
    out
}

/// Parses a coloring file and aligns it with the instance's edge order.
/// Every instance edge must be listed exactly once.
pub fn parse_coloring(inst: &GraphInstance, text: &str) -> Result<Coloring, FormatError> {
    let index: std::collections::HashMap<Edge, usize> =
        inst.edges().map(|e| (e.edge, e.index)).collect();
    let mut colors: Vec<Option<u32>> = vec![None; index.len()];
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == "u,v,color") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(syntax(line_no, "expected u,v,color"));
        }
        let num = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| syntax(line_no, format!("bad integer {s:?}")))
        };
        let edge = Edge::new(VertexId(num(fields[0])?), VertexId(num(fields[1])?));
        let color = num(fields[2])?;
        let slot = index
            .get(&edge)
            .ok_or_else(|| syntax(line_no, format!("edge {edge} is not in the instance")))?;
        if colors[*slot].replace(color).is_some() {
            return Err(syntax(line_no, format!("edge {edge} colored twice")));
        }
    }
    let colors = colors
        .into_iter()
        .zip(inst.edges())
        .map(|(c, e)| c.ok_or_else(|| syntax(0, format!("edge {} has no color", e.edge))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Coloring::new(colors))
}
