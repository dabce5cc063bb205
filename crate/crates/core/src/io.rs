//! File formats.
//!
//! Graphs are plain text: a header line `n L`, then one line `u v c` per
//! colored pair with `u < v`; unlisted pairs are gamma and lines starting with
//! `#` are comments. Clusterings, cluster distributions and standard-LP points
//! are JSON documents.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{CccError, Result};
use crate::model::{cost, pair_count, ChromaticClustering, EdgeColoring};
use crate::relax::{ClusterDistribution, ClusterEntry, StandardSolution};

fn parse_err(line: usize, msg: impl Into<String>) -> CccError {
    CccError::Parse {
        line,
        msg: msg.into(),
    }
}

fn fields(line: &str, lineno: usize, expect: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != expect {
        return Err(parse_err(
            lineno,
            format!("expected {expect} integers, found {} fields", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("`{p}` is not a nonnegative integer")))
        })
        .collect()
}

pub fn parse_graph(text: &str) -> Result<EdgeColoring> {
    let mut phi: Option<EdgeColoring> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match phi.as_mut() {
            None => {
                let f = fields(line, lineno, 2)?;
                phi = Some(EdgeColoring::new(f[0], f[1]));
            }
            Some(phi) => {
                let f = fields(line, lineno, 3)?;
                let (u, v, c) = (f[0], f[1], f[2]);
                if u >= v {
                    return Err(parse_err(lineno, format!("expected u < v, got {u} {v}")));
                }
                if v >= phi.n() {
                    return Err(parse_err(
                        lineno,
                        format!("vertex {v} out of range for n = {}", phi.n()),
                    ));
                }
                if c >= phi.num_colors() {
                    return Err(parse_err(
                        lineno,
                        format!("color {c} out of range for L = {}", phi.num_colors()),
                    ));
                }
                if phi.color(u, v).is_some() {
                    return Err(parse_err(lineno, format!("pair {u} {v} listed twice")));
                }
                phi.set(u, v, Some(c))
                    .map_err(|e| parse_err(lineno, e.to_string()))?;
            }
        }
    }
    phi.ok_or_else(|| parse_err(0, "missing `n L` header"))
}

pub fn write_graph(phi: &EdgeColoring) -> String {
    let mut out = format!("{} {}\n", phi.n(), phi.num_colors());
    for (u, v, c) in phi.positive_pairs() {
        let _ = writeln!(out, "{u} {v} {c}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub color: usize,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringDoc {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<usize>,
    pub clusters: Vec<ClusterRecord>,
}

impl ClusteringDoc {
    pub fn from_clustering(clustering: &ChromaticClustering, cost: Option<usize>) -> Self {
        Self {
            n: clustering.n(),
            cost,
            clusters: clustering
                .iter()
                .map(|(b, c)| ClusterRecord {
                    color: c,
                    vertices: b.to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_clustering(&self, num_colors: usize) -> Result<ChromaticClustering> {
        let (blocks, colors) = self
            .clusters
            .iter()
            .map(|r| (r.vertices.clone(), r.color))
            .unzip();
        ChromaticClustering::new(self.n, num_colors, blocks, colors)
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))
}

/// Clustering as JSON, with its cost under `phi`.
pub fn write_clustering(phi: &EdgeColoring, clustering: &ChromaticClustering) -> Result<String> {
    let c = cost(phi, clustering)?;
    Ok(to_json(&ClusteringDoc::from_clustering(
        clustering,
        Some(c),
    )))
}

pub fn parse_clustering(text: &str, num_colors: usize) -> Result<ChromaticClustering> {
    from_json::<ClusteringDoc>(text)?.to_clustering(num_colors)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub mask: u64,
    pub color: usize,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionDoc {
    pub n: usize,
    pub num_colors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub entries: Vec<EntryRecord>,
}

pub fn write_distribution(dist: &ClusterDistribution, value: Option<f64>) -> String {
    to_json(&DistributionDoc {
        n: dist.n(),
        num_colors: dist.num_colors(),
        value,
        entries: dist
            .entries()
            .iter()
            .map(|e| EntryRecord {
                mask: e.mask,
                color: e.color,
                z: e.weight,
            })
            .collect(),
    })
}

pub fn parse_distribution(text: &str) -> Result<ClusterDistribution> {
    let doc: DistributionDoc = from_json(text)?;
    let entries = doc
        .entries
        .iter()
        .map(|r| ClusterEntry {
            mask: r.mask,
            color: r.color,
            weight: r.z,
        })
        .collect();
    ClusterDistribution::new(doc.n, doc.num_colors, entries)
}

/// `x_vertex[u][c]` per vertex and `x_edge[p][c]` per pair in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardDoc {
    pub n: usize,
    pub num_colors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub x_vertex: Vec<Vec<f64>>,
    pub x_edge: Vec<Vec<f64>>,
}

pub fn write_standard(sol: &StandardSolution, value: Option<f64>) -> String {
    let l = sol.num_colors().max(1);
    to_json(&StandardDoc {
        n: sol.n(),
        num_colors: sol.num_colors(),
        value,
        x_vertex: sol.x_vertex().chunks(l).map(<[f64]>::to_vec).collect(),
        x_edge: sol.x_edge().chunks(l).map(<[f64]>::to_vec).collect(),
    })
}

pub fn parse_standard(text: &str) -> Result<StandardSolution> {
    let doc: StandardDoc = from_json(text)?;
    let (n, l) = (doc.n, doc.num_colors);
    if doc.x_vertex.len() != n || doc.x_edge.len() != pair_count(n) {
        return Err(CccError::Format(format!(
            "expected {n} vertex rows and {} pair rows",
            pair_count(n)
        )));
    }
    if doc.x_vertex.iter().chain(&doc.x_edge).any(|r| r.len() != l) {
        return Err(CccError::Format(format!("every row must hold {l} values")));
    }
    StandardSolution::new(n, l, doc.x_vertex.concat(), doc.x_edge.concat())
}
