//! Finite directed graphs and their text format.
//!
//! ```text
//! # comment
//! vertex u
//! vertex v
//! edge e u v    # source u, range v
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub label: String,
    pub source: usize,
    pub range: usize,
}

/// Directed graph `(E, V, s, r)` with labelled vertices and edges.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// One vertex with `d` loops labelled `1..=d`.
    pub fn bouquet(d: usize) -> Self {
        let mut g = Self::new();
        g.add_vertex("o").expect("fresh label");
        for k in 1..=d {
            g.add_edge(&k.to_string(), "o", "o").expect("fresh label");
        }
        g
    }

    pub fn add_vertex(&mut self, label: &str) -> Result<usize> {
        if self.vertex_index(label).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate vertex '{label}'")));
        }
        self.vertices.push(label.to_string());
        Ok(self.vertices.len() - 1)
    }

    pub fn add_edge(&mut self, label: &str, source: &str, range: &str) -> Result<usize> {
        if self.edges.iter().any(|e| e.label == label) {
            return Err(Error::InvalidGraph(format!("duplicate edge '{label}'")));
        }
        let lookup = |v: &str| {
            self.vertex_index(v)
                .ok_or_else(|| Error::InvalidGraph(format!("edge '{label}' refers to unknown vertex '{v}'")))
        };
        let (source, range) = (lookup(source)?, lookup(range)?);
        self.edges.push(Edge {
            label: label.to_string(),
            source,
            range,
        });
        Ok(self.edges.len() - 1)
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == label)
    }

    pub fn edge_index(&self, label: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.label == label)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Parses the line-oriented text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut g = Self::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| Error::InvalidGraph(format!("line {}: {msg}", k + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["vertex", label] => {
                    g.add_vertex(label).map_err(|e| at(e.to_string()))?;
                }
                ["edge", label, source, range] => {
                    g.add_edge(label, source, range).map_err(|e| at(e.to_string()))?;
                }
                _ => {
                    return Err(at(format!(
                        "expected 'vertex <label>' or 'edge <label> <source> <range>', got '{line}'"
                    )))
                }
            }
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("vertex {v}\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {}\n",
                e.label, self.vertices[e.source], self.vertices[e.range]
            ));
        }
        out
    }

    /// Resolves vertex labels to a sorted, duplicate-free index set.
    pub fn vertex_set(&self, labels: &[String]) -> Result<Vec<usize>> {
        if labels.is_empty() {
            return Err(Error::BadVertexSet("vertex set is empty".into()));
        }
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let v = self
                .vertex_index(l)
                .ok_or_else(|| Error::BadVertexSet(format!("unknown vertex '{l}'")))?;
            if out.contains(&v) {
                return Err(Error::BadVertexSet(format!("vertex '{l}' listed twice")));
            }
            out.push(v);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Subgraph on `F` with edge set `E_F = {e : s(e), r(e) ∈ F}`, plus the index maps
    /// from the subgraph's vertices and edges back into this graph.
    pub fn induced(&self, f: &[usize]) -> (Graph, Vec<usize>, Vec<usize>) {
        let mut h = Graph::new();
        let mut vmap = Vec::new();
        let mut local = HashMap::new();
        for &v in f {
            local.insert(v, h.add_vertex(&self.vertices[v]).expect("distinct labels"));
            vmap.push(v);
        }
        let mut emap = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if let (Some(&s), Some(&r)) = (local.get(&e.source), local.get(&e.range)) {
                h.edges.push(Edge {
                    label: e.label.clone(),
                    source: s,
                    range: r,
                });
                emap.push(k);
            }
        }
        (h, vmap, emap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let g = Graph::parse("# two vertices\nvertex u\nvertex v\n\nedge e u v # arrow\nedge f v v\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges()[0].source, 0);
        assert_eq!(g.edges()[0].range, 1);
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Graph::parse("vertex u\nedge e u w\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(Graph::parse("vertex u\nvertex u\n").is_err());
        assert!(Graph::parse("node u\n").is_err());
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        let g = Graph::parse("vertex u\nvertex v\nedge a u u\nedge b u v\nedge c v v\n").unwrap();
        let f = g.vertex_set(&["u".to_string()]).unwrap();
        let (h, vmap, emap) = g.induced(&f);
        assert_eq!(h.vertex_count(), 1);
        assert_eq!(vmap, vec![0]);
        assert_eq!(emap, vec![0]);
        assert!(matches!(g.vertex_set(&[]), Err(Error::BadVertexSet(_))));
        assert!(matches!(g.vertex_set(&["w".to_string()]), Err(Error::BadVertexSet(_))));
    }
}
