//! Graph-level sparsification.
//!
//! Each edge `e = (u, v)` becomes the vector `√w_e · Λ^{-1/2} Uᵀ (χ_u − χ_v)`,
//! where `U Λ Uᵀ` is the eigendecomposition of `L_G` restricted to its
//! `(n−1)`-dimensional range. These vectors sum to the identity, so the
//! barrier selection applies directly, and the chosen weights transfer back
//! to edges as `w̃_e = w_e · s_e`.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::matrix::{eigh, DEFAULT_RANK_TOL};
use crate::select::{sparsify_vectors, BarrierParams, Preset, SelectionOptions, SelectionTrace, VectorFamily};
use crate::verify::approximation_ratio;

/// Scaled weights below this are treated as zero and the edge is dropped.
pub const DROP_TOL: f64 = 1e-12;

/// Isotropic edge vectors of a connected graph.
#[derive(Clone, Debug)]
pub struct EdgeVectorFamily {
    pub family: VectorFamily,
    /// Vector `i` belongs to edge `edge_of[i]` (canonical edge order).
    pub edge_of: Vec<usize>,
    /// Nonzero Laplacian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// `basis[x][k]`: component `x` of the `k`-th range eigenvector.
    pub basis: Vec<Vec<f64>>,
}

/// Builds the columns of `(L_G⁺)^{1/2} Bᵀ W^{1/2}` in the eigenbasis of `im(L_G)`.
pub fn edge_vectors(g: &WeightedGraph) -> Result<EdgeVectorFamily> {
    if g.n() < 2 {
        return Err(Error::InvalidParameter("graph needs at least 2 vertices".into()));
    }
    let components = g.components().len();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    let spec = eigh(&g.laplacian())?;
    let range = spec.range_indices(DEFAULT_RANK_TOL);
    if range.len() != g.n() - 1 {
        return Err(Error::Degenerate(format!(
            "Laplacian of a connected graph has numerical rank {} instead of {}",
            range.len(),
            g.n() - 1
        )));
    }
    let eigenvalues: Vec<f64> = range.iter().map(|&k| spec.eigenvalues()[k]).collect();
    let basis: Vec<Vec<f64>> = (0..g.n())
        .map(|x| range.iter().map(|&k| spec.component(x, k)).collect())
        .collect();
    let inv_sqrt: Vec<f64> = eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
    let vectors = g
        .edges()
        .iter()
        .map(|e| {
            let sw = e.w.sqrt();
            (0..range.len())
                .map(|k| sw * (basis[e.u][k] - basis[e.v][k]) * inv_sqrt[k])
                .collect()
        })
        .collect();
    Ok(EdgeVectorFamily {
        family: VectorFamily::new(g.n() - 1, vectors)?,
        edge_of: (0..g.m()).collect(),
        eigenvalues,
        basis,
    })
}

/// Reweighted subgraph together with its measured quality.
#[derive(Clone, Debug)]
pub struct SparsifierResult {
    pub graph: WeightedGraph,
    pub kept_edges: usize,
    /// `⌈d(n−1)⌉`, summed over components for per-component runs.
    pub edge_budget: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa_measured: f64,
    pub kappa_bound: f64,
    pub d: f64,
    pub preset: Preset,
    /// Selected edges whose scaled weight fell below [`DROP_TOL`].
    pub dropped: usize,
    pub trace: SelectionTrace,
}

impl SparsifierResult {
    /// Stable `key: value` record describing the run.
    pub fn metadata(&self, original: &WeightedGraph) -> Vec<(&'static str, String)> {
        vec![
            ("n", original.n().to_string()),
            ("m", original.m().to_string()),
            ("kept_edges", self.kept_edges.to_string()),
            ("d", self.d.to_string()),
            ("preset", self.preset.to_string()),
            ("kappa_bound", self.kappa_bound.to_string()),
            ("kappa_measured", self.kappa_measured.to_string()),
            ("lambda_min", self.lambda_min.to_string()),
            ("lambda_max", self.lambda_max.to_string()),
            ("dropped", self.dropped.to_string()),
        ]
    }
}

/// Sparsifies a connected graph to at most `⌈d(n−1)⌉` reweighted edges.
pub fn sparsify_graph(
    g: &WeightedGraph,
    d: f64,
    preset: Preset,
    options: SelectionOptions,
) -> Result<SparsifierResult> {
    let evf = edge_vectors(g)?;
    let params = BarrierParams::new(preset, d, g.n() - 1)?;
    let selection = sparsify_vectors(&evf.family, &params, options)?;

    let mut dropped = 0;
    let mut kept = Vec::new();
    for (i, &s) in selection.weights.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        if s < DROP_TOL {
            dropped += 1;
            continue;
        }
        let e = g.edges()[evf.edge_of[i]];
        kept.push((e.u, e.v, e.w * s));
    }
    let h = WeightedGraph::new(g.n(), kept)?;
    let report = approximation_ratio(&g.laplacian(), &h.laplacian())?;
    Ok(SparsifierResult {
        kept_edges: h.m(),
        edge_budget: params.steps(g.n() - 1),
        graph: h,
        lambda_min: report.lambda_min,
        lambda_max: report.lambda_max,
        kappa_measured: report.kappa,
        kappa_bound: selection.kappa_bound,
        d,
        preset,
        dropped,
        trace: selection.trace,
    })
}

/// Runs [`sparsify_graph`] on every connected component with at least two
/// vertices and takes the union. The reported `λ_min`/`λ_max` are the
/// extremes over components.
pub fn sparsify_per_component(
    g: &WeightedGraph,
    d: f64,
    preset: Preset,
    options: SelectionOptions,
) -> Result<SparsifierResult> {
    let mut edges = Vec::new();
    let mut budget = 0;
    let mut dropped = 0;
    let mut trace = SelectionTrace::default();
    let (mut lambda_min, mut lambda_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for comp in g.components() {
        if comp.len() < 2 {
            continue;
        }
        let sub = g.induced(&comp)?;
        let part = sparsify_graph(&sub, d, preset, options)?;
        budget += part.edge_budget;
        dropped += part.dropped;
        lambda_min = lambda_min.min(part.lambda_min);
        lambda_max = lambda_max.max(part.lambda_max);
        trace.records.extend(part.trace.records);
        edges.extend(part.graph.edges().iter().map(|e| (comp[e.u], comp[e.v], e.w)));
    }
    if edges.is_empty() {
        return Err(Error::InvalidParameter("graph has no edges to sparsify".into()));
    }
    let h = WeightedGraph::new(g.n(), edges)?;
    let kappa_measured = if lambda_min > 0.0 {
        lambda_max / lambda_min
    } else {
        f64::INFINITY
    };
    Ok(SparsifierResult {
        kept_edges: h.m(),
        edge_budget: budget,
        graph: h,
        lambda_min,
        lambda_max,
        kappa_measured,
        kappa_bound: preset.kappa_bound(d),
        d,
        preset,
        dropped,
        trace,
    })
}
