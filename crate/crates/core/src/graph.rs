//! Weighted undirected graphs, their Laplacians and the edge-list file format.
//!
//! The on-disk format is line oriented: the first non-comment line holds the
//! vertex count `n`, every following non-comment line is `u v w`. Lines that
//! begin with `#` are comments.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Undirected graph with positive edge weights.
///
/// Edges are stored with `u < v`, sorted lexicographically and free of
/// duplicates; every constructor enforces this.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Canonicalizes `edges`: orients each pair as `u < v` and merges
    /// duplicates by summing their weights.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (k, (a, b, w)) in edges.into_iter().enumerate() {
            check_edge(n, a, b, w).map_err(|message| Error::Parse { line: k + 1, message })?;
            *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
        Ok(Self::from_canonical(n, merged))
    }

    fn from_canonical(n: usize, merged: BTreeMap<(usize, usize), f64>) -> Self {
        Self {
            n,
            edges: merged.into_iter().map(|((u, v), w)| Edge { u, v, w }).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Position of edge `{a, b}` in canonical order.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&key))
            .ok()
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_index(a, b).map(|k| self.edges[k].w)
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(Self {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| Edge { w: e.w * factor, ..*e })
                .collect(),
        })
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        adj
    }

    /// Combinatorial degree of every vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    /// `Σ w_uv (x_u − x_v)²`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        self.edges
            .iter()
            .map(|e| {
                let d = x[e.u] - x[e.v];
                e.w * d * d
            })
            .sum()
    }

    /// Every pair present with the same weight; returns that weight.
    pub fn uniform_complete_weight(&self) -> Option<f64> {
        if self.n < 2 || self.m() != self.n * (self.n - 1) / 2 {
            return None;
        }
        let w = self.edges[0].w;
        self.edges.iter().all(|e| e.w == w).then_some(w)
    }

    pub fn incidence(&self) -> IncidenceSystem {
        IncidenceSystem {
            n: self.n,
            rows: self.edges.iter().map(|e| (e.u, e.v)).collect(),
            weights: self.edges.iter().map(|e| e.w).collect(),
        }
    }

    pub fn laplacian(&self) -> SymmetricMatrix {
        let mut l = SymmetricMatrix::zeros(self.n.max(1));
        for e in &self.edges {
            l.add(e.u, e.u, e.w);
            l.add(e.u, e.v, -e.w);
            l.add(e.v, e.v, e.w);
        }
        l
    }

    /// Connected components, each sorted ascending, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Breadth-first reachability from vertex 0.
    pub fn is_connected(&self) -> bool {
        self.n >= 1 && self.components().len() == 1
    }

    /// Induced subgraph on `vertices` (sorted), relabelled `0..vertices.len()`.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; self.n];
        for (k, &x) in vertices.iter().enumerate() {
            local[x] = k;
        }
        Self::new(
            vertices.len(),
            self.edges
                .iter()
                .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
                .map(|e| (local[e.u], local[e.v], e.w)),
        )
    }

    /// Canonical edge-list text; weights in shortest round-trip decimal.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w);
        }
        out
    }
}

fn check_edge(n: usize, a: usize, b: usize, w: f64) -> std::result::Result<(), String> {
    if a == b {
        return Err(format!("self-loop at vertex {a}"));
    }
    if a >= n || b >= n {
        return Err(format!("vertex id {} out of range for n = {n}", a.max(b)));
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(format!("edge weight must be positive and finite, got {w}"));
    }
    Ok(())
}

/// Parses the edge-list format. Duplicate edges are merged by summing weights.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut n: Option<usize> = None;
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match n {
            None => {
                if fields.len() != 1 {
                    return Err(err(format!("expected vertex count, found `{line}`")));
                }
                let count: usize = fields[0]
                    .parse()
                    .map_err(|_| err(format!("invalid vertex count `{}`", fields[0])))?;
                if count == 0 {
                    return Err(err("vertex count must be at least 1".into()));
                }
                n = Some(count);
            }
            Some(count) => {
                if fields.len() != 3 {
                    return Err(err(format!("expected `u v w`, found `{line}`")));
                }
                let a: usize = fields[0]
                    .parse()
                    .map_err(|_| err(format!("invalid vertex id `{}`", fields[0])))?;
                let b: usize = fields[1]
                    .parse()
                    .map_err(|_| err(format!("invalid vertex id `{}`", fields[1])))?;
                let w: f64 = fields[2]
                    .parse()
                    .map_err(|_| err(format!("invalid weight `{}`", fields[2])))?;
                check_edge(count, a, b, w).map_err(err)?;
                *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
            }
        }
    }
    let n = n.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing vertex count".into(),
    })?;
    Ok(WeightedGraph::from_canonical(n, merged))
}

/// Signed edge-vertex incidence matrix `B` (row `e` is `χ_u − χ_v` for the
/// canonical `u < v`) and the diagonal edge weights `W`.
#[derive(Clone, Debug)]
pub struct IncidenceSystem {
    n: usize,
    rows: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl IncidenceSystem {
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `B[e][x]`.
    pub fn entry(&self, e: usize, x: usize) -> f64 {
        let (u, v) = self.rows[e];
        if x == u {
            1.0
        } else if x == v {
            -1.0
        } else {
            0.0
        }
    }

    /// `Bᵀ W B`.
    pub fn laplacian(&self) -> SymmetricMatrix {
        let mut l = SymmetricMatrix::zeros(self.n.max(1));
        for (e, &(u, v)) in self.rows.iter().enumerate() {
            let w = self.weights[e];
            let (bu, bv) = (self.entry(e, u), self.entry(e, v));
            l.add(u, u, bu * w * bu);
            l.add(u, v, bu * w * bv);
            l.add(v, v, bv * w * bv);
        }
        l
    }
}

pub mod generators {
    //! Deterministic graph families.

    use super::*;

    pub fn complete(n: usize) -> WeightedGraph {
        let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v, 1.0)));
        WeightedGraph::new(n, edges).expect("complete graph is valid")
    }

    pub fn path(n: usize) -> WeightedGraph {
        WeightedGraph::new(n, (1..n).map(|v| (v - 1, v, 1.0))).expect("path is valid")
    }

    pub fn star(n: usize) -> WeightedGraph {
        WeightedGraph::new(n, (1..n).map(|v| (0, v, 1.0))).expect("star is valid")
    }

    /// Erdős–Rényi `G(n, p)`. With `weights = Some((lo, hi))` every edge gets a
    /// uniform weight in `[lo, hi)`, otherwise unit weight.
    pub fn random_gnp(
        n: usize,
        p: f64,
        weights: Option<(f64, f64)>,
        seed: u64,
    ) -> Result<WeightedGraph> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (0, 1], got {p}")));
        }
        if let Some((lo, hi)) = weights {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::InvalidParameter(format!(
                    "weight range must satisfy 0 < lo < hi, got [{lo}, {hi})"
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen::<f64>() < p {
                    let w = match weights {
                        Some((lo, hi)) => rng.gen_range(lo..hi),
                        None => 1.0,
                    };
                    edges.push((u, v, w));
                }
            }
        }
        WeightedGraph::new(n, edges)
    }
}
