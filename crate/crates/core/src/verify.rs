//! Independent checks on a sparsifier: the generalized spectrum of
//! `(L_H, L_G)`, the expander mixing bound for sparsifiers of complete
//! graphs, a degree-based lower bound on the achievable `κ`, and effective
//! resistances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::matrix::{eigh, pseudo_inverse_power, SymmetricMatrix, DEFAULT_RANK_TOL};

pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq)]
pub struct ApproximationReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `λ_max / λ_min`; infinite when `L_H` is singular on `1⊥`.
    pub kappa: f64,
    pub kernel_mismatch: bool,
    pub sampled_min: f64,
    pub sampled_max: f64,
    pub samples: usize,
    pub seed: u64,
}

impl ApproximationReport {
    pub fn records(&self) -> Vec<(&'static str, String)> {
        vec![
            ("lambda_min", self.lambda_min.to_string()),
            ("lambda_max", self.lambda_max.to_string()),
            ("kappa", self.kappa.to_string()),
            ("kernel_mismatch", self.kernel_mismatch.to_string()),
            ("sampled_min", self.sampled_min.to_string()),
            ("sampled_max", self.sampled_max.to_string()),
            ("samples", self.samples.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}

/// Extreme eigenvalues of `(L_G⁺)^{1/2} L_H (L_G⁺)^{1/2}` on `im(L_G)`.
pub fn approximation_ratio(l_g: &SymmetricMatrix, l_h: &SymmetricMatrix) -> Result<ApproximationReport> {
    approximation_ratio_sampled(l_g, l_h, DEFAULT_SAMPLES, DEFAULT_SEED)
}

/// [`approximation_ratio`] plus `samples` seeded random Rayleigh quotients
/// `xᵀL_H x / xᵀL_G x` over `x ⊥ 1`.
pub fn approximation_ratio_sampled(
    l_g: &SymmetricMatrix,
    l_h: &SymmetricMatrix,
    samples: usize,
    seed: u64,
) -> Result<ApproximationReport> {
    let n = l_g.order();
    if l_h.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: l_h.order(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 vertices".into()));
    }
    let spec = eigh(l_g)?;
    let range = spec.range_indices(DEFAULT_RANK_TOL);
    if range.len() != n - 1 {
        return Err(Error::ContractViolation(format!(
            "reference Laplacian has rank {} instead of {}",
            range.len(),
            n - 1
        )));
    }
    let r = range.len();
    // y[x][k] = U[x][k] / √λ_k, the columns of (L_G⁺)^{1/2} in the range basis.
    let y: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            range
                .iter()
                .map(|&k| spec.component(x, k) / spec.eigenvalues()[k].sqrt())
                .collect()
        })
        .collect();
    // z = L_H · y
    let z: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            (0..r)
                .map(|k| (0..n).map(|j| l_h.get(x, j) * y[j][k]).sum())
                .collect()
        })
        .collect();
    let reduced = SymmetricMatrix::from_fn(r, |a, b| (0..n).map(|x| y[x][a] * z[x][b]).sum());
    let inner = eigh(&reduced)?;
    let (lambda_min, lambda_max) = (inner.min(), inner.max());
    let kernel_mismatch = !(lambda_min > DEFAULT_RANK_TOL * lambda_max.abs());
    let kappa = if kernel_mismatch {
        f64::INFINITY
    } else {
        lambda_max / lambda_min
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sampled_min, mut sampled_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..samples {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let q = l_h.quadratic_form(&x) / l_g.quadratic_form(&x);
        sampled_min = sampled_min.min(q);
        sampled_max = sampled_max.max(q);
    }
    Ok(ApproximationReport {
        lambda_min,
        lambda_max,
        kappa,
        kernel_mismatch,
        sampled_min,
        sampled_max,
        samples,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixingReport {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub w_st: f64,
    /// `(1 + ε/2)|S||T|`.
    pub expected: f64,
    /// `n (ε/2) √(|S||T|)`.
    pub bound: f64,
    pub ok: bool,
}

impl MixingReport {
    pub fn discrepancy(&self) -> f64 {
        (self.w_st - self.expected).abs()
    }
}

/// Cross weight between disjoint `s` and `t` against the mixing bound for a
/// `(1+eps)`-approximation of the complete graph on `h.n()` vertices.
pub fn mixing_check(h: &WeightedGraph, s: &[usize], t: &[usize], eps: f64) -> Result<MixingReport> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::InvalidParameter("vertex sets must be nonempty".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    let n = h.n();
    // 1 = in S, 2 = in T
    let mut side = vec![0u8; n];
    for (set, tag) in [(s, 1u8), (t, 2u8)] {
        for &x in set {
            if x >= n {
                return Err(Error::InvalidParameter(format!("vertex {x} out of range")));
            }
            if side[x] != 0 && side[x] != tag {
                return Err(Error::OverlappingSets(x));
            }
            side[x] = tag;
        }
    }
    let mut s_sorted = s.to_vec();
    s_sorted.sort_unstable();
    s_sorted.dedup();
    let mut t_sorted = t.to_vec();
    t_sorted.sort_unstable();
    t_sorted.dedup();

    let w_st: f64 = h
        .edges()
        .iter()
        .filter(|e| side[e.u] | side[e.v] == 3)
        .map(|e| e.w)
        .sum();
    let st = (s_sorted.len() * t_sorted.len()) as f64;
    let expected = (1.0 + eps / 2.0) * st;
    let bound = n as f64 * (eps / 2.0) * st.sqrt();
    // Slack absorbs the last-bit rounding in the summation of w_st only.
    let ok = (w_st - expected).abs() <= bound + 1e-12 * expected.max(1.0);
    Ok(MixingReport {
        s: s_sorted,
        t: t_sorted,
        w_st,
        expected,
        bound,
        ok,
    })
}

/// Random disjoint nonempty `(S, T)` with `|S| + |T| ≤ n`.
pub fn random_disjoint_sets(n: usize, rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
    assert!(n >= 2, "need at least two vertices");
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let s_len = rng.gen_range(1..n);
    let t_len = rng.gen_range(1..=n - s_len);
    let mut s = perm[..s_len].to_vec();
    let mut t = perm[s_len..s_len + t_len].to_vec();
    s.sort_unstable();
    t.sort_unstable();
    (s, t)
}

/// [`mixing_check`] on `pairs` seeded random disjoint `(S, T)`.
pub fn mixing_sample(h: &WeightedGraph, eps: f64, pairs: usize, seed: u64) -> Result<Vec<MixingReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| {
            let (s, t) = random_disjoint_sets(h.n(), &mut rng);
            mixing_check(h, &s, &t, eps)
        })
        .collect()
}

/// `(‖x*‖², ‖y*‖²) = (2 − (1+√d)²/n, 2 − (1−√d)²/n)`, the squared norms of the
/// degree test vectors after projection onto `1⊥`.
pub fn projected_test_norms(degree: usize, n: usize) -> (f64, f64) {
    let sd = (degree as f64).sqrt();
    let n = n as f64;
    (2.0 - (1.0 + sd).powi(2) / n, 2.0 - (1.0 - sd).powi(2) / n)
}

/// Certified lower bound on any `κ` for which `h` κ-approximates the
/// complete graph, from the test vectors centred at `v0`:
/// `x = χ_{v0} + Σ_{nbrs} χ_u/√d`, `y = χ_{v0} − Σ_{nbrs} χ_u/√d`,
/// returning `(yᵀL_H y / xᵀL_H x) · (‖x*‖² / ‖y*‖²)`.
pub fn degree_lower_bound(h: &WeightedGraph, v0: usize) -> Result<f64> {
    let n = h.n();
    if v0 >= n {
        return Err(Error::InvalidParameter(format!("vertex {v0} out of range")));
    }
    let adj = h.adjacency();
    let degree = adj[v0].len();
    if degree == 0 {
        return Err(Error::IsolatedVertex(v0));
    }
    let inv_sd = 1.0 / (degree as f64).sqrt();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    x[v0] = 1.0;
    y[v0] = 1.0;
    for &(u, _) in &adj[v0] {
        x[u] = inv_sd;
        y[u] = -inv_sd;
    }
    // L_H 1 = 0, so projecting onto 1⊥ leaves the quadratic forms unchanged.
    let xlx = h.quadratic_form(&x);
    let yly = h.quadratic_form(&y);
    let projected_norm = |v: &[f64]| {
        let s: f64 = v.iter().sum();
        v.iter().map(|a| a * a).sum::<f64>() - s * s / n as f64
    };
    Ok((yly / xlx) * (projected_norm(&x) / projected_norm(&y)))
}

/// Effective resistances from one pseudoinverse of `L_G`.
#[derive(Clone, Debug)]
pub struct ResistanceOracle {
    pinv: SymmetricMatrix,
}

impl ResistanceOracle {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        let components = g.components().len();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        if g.n() < 2 {
            return Err(Error::InvalidParameter("need at least 2 vertices".into()));
        }
        let spec = eigh(&g.laplacian())?;
        Ok(Self {
            pinv: pseudo_inverse_power(&spec, -1.0, DEFAULT_RANK_TOL)?,
        })
    }

    /// `(χ_u − χ_v)ᵀ L_G⁺ (χ_u − χ_v)`.
    pub fn pair(&self, u: usize, v: usize) -> Result<f64> {
        let n = self.pinv.order();
        if u >= n || v >= n {
            return Err(Error::InvalidParameter(format!("vertex pair ({u}, {v}) out of range")));
        }
        Ok(self.pinv.get(u, u) + self.pinv.get(v, v) - 2.0 * self.pinv.get(u, v))
    }
}

pub fn effective_resistance(g: &WeightedGraph, u: usize, v: usize) -> Result<f64> {
    ResistanceOracle::new(g)?.pair(u, v)
}

/// `R_eff(e)` for every edge in canonical order.
pub fn edge_resistances(g: &WeightedGraph) -> Result<Vec<f64>> {
    let oracle = ResistanceOracle::new(g)?;
    g.edges().iter().map(|e| oracle.pair(e.u, e.v)).collect()
}
