//! Undirected simple graphs, generators and the edge-list file format.
//!
//! Nodes are dense indices `0..n`. The indices exist for storage and for the
//! experimenter; node logic never sees them (see [`crate::engine`]).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("{kind} needs at least {min} nodes, got {n}")]
    TooFewNodes {
        kind: &'static str,
        min: usize,
        n: usize,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge iterator. Duplicate edges collapse; self-loops
    /// and out-of-range endpoints panic, since every caller validates first.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for n = {n}");
            assert_ne!(u, v, "self-loop at {u}");
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self { adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Δ, or 0 for the empty graph.
    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Full scan of the structural invariants: symmetric, sorted, loop-free,
    /// duplicate-free adjacency.
    pub fn check_invariants(&self) -> bool {
        let n = self.node_count();
        self.adjacency.iter().enumerate().all(|(u, list)| {
            list.windows(2).all(|w| w[0] < w[1])
                && list
                    .iter()
                    .all(|&v| v < n && v != u && self.adjacency[v].binary_search(&u).is_ok())
        })
    }
}

/// Erdős–Rényi G(n, p). Pairs are visited in lexicographic order with one
/// uniform draw each, so the output depends only on `(n, p, seed)`.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::TooFewNodes {
            kind: "gnp",
            min: 1,
            n,
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_edges(n, edges))
}

pub fn gen_complete(n: usize) -> Result<Graph, GraphError> {
    check_min("complete", n, 1)?;
    Ok(Graph::from_edges(
        n,
        (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))),
    ))
}

pub fn gen_ring(n: usize) -> Result<Graph, GraphError> {
    check_min("ring", n, 3)?;
    Ok(Graph::from_edges(n, (0..n).map(|u| (u, (u + 1) % n))))
}

pub fn gen_path(n: usize) -> Result<Graph, GraphError> {
    check_min("path", n, 1)?;
    Ok(Graph::from_edges(n, (1..n).map(|u| (u - 1, u))))
}

pub fn gen_empty(n: usize) -> Result<Graph, GraphError> {
    check_min("empty", n, 1)?;
    Ok(Graph::from_edges(n, std::iter::empty()))
}

/// Star with node 0 as centre and `leaves` further nodes.
pub fn gen_star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v)))
}

/// Disjoint union of `m` copies of `K_d` for every `d` in `1..=m`.
///
/// Cliques are laid out in order of increasing `d`, copies of the same size
/// adjacent. The result has `m²(m+1)/2` nodes.
pub fn gen_clique_family(m: usize) -> Result<Graph, GraphError> {
    check_min("clique family", m, 1)?;
    let n = m * m * (m + 1) / 2;
    let mut edges = Vec::new();
    let mut base = 0;
    for d in 1..=m {
        for _ in 0..m {
            for u in 0..d {
                for v in (u + 1)..d {
                    edges.push((base + u, base + v));
                }
            }
            base += d;
        }
    }
    debug_assert_eq!(base, n);
    Ok(Graph::from_edges(n, edges))
}

fn check_min(kind: &'static str, n: usize, min: usize) -> Result<(), GraphError> {
    if n < min {
        Err(GraphError::TooFewNodes { kind, min, n })
    } else {
        Ok(())
    }
}

/// Canonical edge-list text: `n` on the first line, then `u v` per edge with
/// `u < v`, sorted.
pub fn save_edge_list(graph: &Graph) -> String {
    let mut out = format!("{}\n", graph.node_count());
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}").expect("writing to a String cannot fail");
    }
    out
}

/// Parses the edge-list format. Blank lines are ignored. Each edge line must
/// hold exactly two indices `u < v < n`; a repeated edge is an error.
pub fn load_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (header_line, header) =
        lines
            .by_ref()
            .find(|(_, l)| !l.is_empty())
            .ok_or(GraphError::Parse {
                line: 1,
                msg: "missing node-count header".into(),
            })?;
    let n: usize = header.parse().map_err(|_| GraphError::Parse {
        line: header_line,
        msg: format!("expected node count, found {header:?}"),
    })?;
    if n == 0 {
        return Err(GraphError::Parse {
            line: header_line,
            msg: "node count must be at least 1".into(),
        });
    }

    let mut edges = Vec::new();
    for (line, text) in lines {
        if text.is_empty() {
            continue;
        }
        let err = |msg: String| GraphError::Parse { line, msg };
        let mut fields = text.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(format!("expected \"u v\", found {text:?}")));
        };
        let u: usize = a
            .parse()
            .map_err(|_| err(format!("bad node index {a:?}")))?;
        let v: usize = b
            .parse()
            .map_err(|_| err(format!("bad node index {b:?}")))?;
        if u == v {
            return Err(err(format!("self-loop at node {u}")));
        }
        if u >= n || v >= n {
            return Err(err(format!("node index out of range for n = {n}")));
        }
        if u > v {
            return Err(err(format!(
                "edge must be written with u < v, found {u} {v}"
            )));
        }
        edges.push((u, v));
    }
    let count = edges.len();
    let graph = Graph::from_edges(n, edges);
    if graph.edge_count() != count {
        return Err(GraphError::Parse {
            line: 0,
            msg: "duplicate edge".into(),
        });
    }
    Ok(graph)
}
