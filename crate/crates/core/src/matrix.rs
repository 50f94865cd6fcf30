//! Dense symmetric linear algebra.
//!
//! Everything in the selection loop is a small dense symmetric matrix: the
//! Laplacians, the accumulated sum of rank-one terms and the barrier
//! resolvents `(uI - A)^{-1}` and `(A - lI)^{-1}`. This module provides the
//! storage type, a cyclic Jacobi eigensolver, Cholesky inversion, pseudoinverse
//! powers and the two rank-one identities the barrier analysis relies on.

use std::fmt;

use crate::error::{Error, Result};

/// Maximum number of cyclic Jacobi sweeps before giving up.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Off-diagonal Frobenius mass, relative to `‖S‖_F`, at which Jacobi stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Default relative cutoff separating the range from the kernel.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// `|1 + t vᵀA⁻¹v|` below this is treated as a singular update.
pub const SM_DENOMINATOR_TOL: f64 = 1e-12;

const POLE_TOL: f64 = 1e-12;

/// Dense real symmetric matrix stored in full row-major form.
///
/// Every mutator writes `(i, j)` and `(j, i)` together so the two triangles
/// are always bit-identical.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        assert!(order >= 1, "matrix order must be at least 1");
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::scaled_identity(order, 1.0)
    }

    pub fn scaled_identity(order: usize, scale: f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.data[i * order + i] = scale;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// Builds the matrix from the upper triangle of `f(i, j)`, `i <= j`.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in i..order {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds the matrix from full rows, rejecting anything that is not square
    /// and exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("matrix order must be at least 1".into()));
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(Self {
            order: n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.order + j] = value;
        self.data[j * self.order + i] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let v = self.get(i, j) + value;
        self.set(i, j, v);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> f64 {
        assert_eq!(self.order, other.order);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|x| *x *= factor);
    }

    /// `self += t · v vᵀ`.
    pub fn add_rank_one(&mut self, t: f64, v: &[f64]) {
        assert_eq!(v.len(), self.order);
        let n = self.order;
        for i in 0..n {
            let tv = t * v[i];
            for j in i..n {
                let value = self.data[i * n + j] + tv * v[j];
                self.set(i, j, value);
            }
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.order);
        (0..self.order).map(|i| dot(self.row(i), v)).collect()
    }

    /// `vᵀ S v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    /// `S²`, assembled from the upper triangle.
    pub fn square(&self) -> SymmetricMatrix {
        let n = self.order;
        SymmetricMatrix::from_fn(n, |i, j| dot(self.row(i), self.row(j)))
    }

    /// `P S P` for symmetric `P`; symmetric by construction.
    pub fn congruence(&self, p: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.order, p.order);
        let n = self.order;
        // sp[i][j] = (S P)[i][j]
        let mut sp = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                sp[i * n + j] = (0..n).map(|k| self.get(i, k) * p.get(k, j)).sum();
            }
        }
        SymmetricMatrix::from_fn(n, |i, j| (0..n).map(|k| p.get(i, k) * sp[k * n + j]).sum())
    }

    /// Lower Cholesky factor, row-major `n × n`.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.order;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = self.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: diag,
                });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(l)
    }

    /// Inverse of a symmetric positive definite matrix via Cholesky.
    pub fn inverse_spd(&self) -> Result<SymmetricMatrix> {
        let n = self.order;
        let l = self.cholesky()?;
        // Columns of L⁻¹ by forward substitution; stored row-major as linv[i][j].
        let mut linv = vec![0.0; n * n];
        for j in 0..n {
            linv[j * n + j] = 1.0 / l[j * n + j];
            for i in (j + 1)..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= l[i * n + k] * linv[k * n + j];
                }
                linv[i * n + j] = s / l[i * n + i];
            }
        }
        // A⁻¹ = L⁻ᵀ L⁻¹, entry (i, j) = Σ_{k ≥ max(i,j)} linv[k][i] linv[k][j].
        Ok(SymmetricMatrix::from_fn(n, |i, j| {
            (j..n).map(|k| linv[k * n + i] * linv[k * n + j]).sum()
        }))
    }
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricMatrix")
            .field("order", &self.order)
            .field("rows", &self.to_rows())
            .finish()
    }
}

/// Eigendecomposition `S = U diag(λ) Uᵀ` with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    /// Row-major `n × n`; column `j` is the eigenvector of `eigenvalues[j]`.
    vectors: Vec<f64>,
    sweeps: usize,
}

impl Spectrum {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn component(&self, i: usize, j: usize) -> f64 {
        self.vectors[i * self.order() + j]
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        (0..self.order()).map(|i| self.component(i, j)).collect()
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.spectral_function(|l| l)
    }

    /// `Σ f(λ_j) u_j u_jᵀ`.
    pub fn spectral_function(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let n = self.order();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        SymmetricMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.component(i, k) * fl[k] * self.component(j, k))
                .sum()
        })
    }

    /// `max |UᵀU − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.order();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let g: f64 = (0..n).map(|i| self.component(i, a) * self.component(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Indices of eigenvalues above `rank_tol · λ_max`.
    pub fn range_indices(&self, rank_tol: f64) -> Vec<usize> {
        let top = self.max();
        if !(top > 0.0) {
            return Vec::new();
        }
        let cutoff = rank_tol * top;
        (0..self.order())
            .filter(|&j| self.eigenvalues[j] > cutoff)
            .collect()
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eigh(s: &SymmetricMatrix) -> Result<Spectrum> {
    let n = s.order();
    let mut a = s.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = JACOBI_TOLERANCE * s.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                order: n,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + tau.hypot(1.0))
                } else {
                    -1.0 / (-tau + tau.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let sn = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - sn * arq;
                    let new_rq = sn * arp + c * arq;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - sn * vrq;
                    v[r * n + q] = sn * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        vectors,
        sweeps,
    })
}

/// `Σ_{λ_i > rank_tol·λ_max} λ_i^exponent u_i u_iᵀ`; kernel directions map to zero.
pub fn pseudo_inverse_power(
    spec: &Spectrum,
    exponent: f64,
    rank_tol: f64,
) -> Result<SymmetricMatrix> {
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidParameter("rank_tol must be positive".into()));
    }
    let kept = spec.range_indices(rank_tol);
    if kept.is_empty() {
        return Err(Error::ZeroPseudoInverse);
    }
    let n = spec.order();
    let powered: Vec<(usize, f64)> = kept
        .iter()
        .map(|&k| (k, spec.eigenvalues[k].powf(exponent)))
        .collect();
    Ok(SymmetricMatrix::from_fn(n, |i, j| {
        powered
            .iter()
            .map(|&(k, p)| spec.component(i, k) * p * spec.component(j, k))
            .sum()
    }))
}

/// `(A + t vvᵀ)⁻¹` from `A⁻¹`.
pub fn sherman_morrison(a_inv: &SymmetricMatrix, v: &[f64], t: f64) -> Result<SymmetricMatrix> {
    if v.len() != a_inv.order() {
        return Err(Error::DimensionMismatch {
            expected: a_inv.order(),
            found: v.len(),
        });
    }
    let w = a_inv.mul_vec(v);
    let denominator = 1.0 + t * dot(v, &w);
    if denominator.abs() < SM_DENOMINATOR_TOL {
        return Err(Error::SingularUpdate { denominator });
    }
    let mut out = a_inv.clone();
    out.add_rank_one(-t / denominator, &w);
    Ok(out)
}

/// `1 − Σ_j projections[j] / (x − eigs[j])`, the factor `p_{A+vvᵀ}(x) / p_A(x)`
/// when `projections[j] = (u_jᵀ v)²`.
pub fn charpoly_ratio(eigs: &[f64], projections: &[f64], x: f64) -> Result<f64> {
    if eigs.len() != projections.len() {
        return Err(Error::DimensionMismatch {
            expected: eigs.len(),
            found: projections.len(),
        });
    }
    let mut acc = 1.0;
    for (&lambda, &p) in eigs.iter().zip(projections) {
        let gap = x - lambda;
        if gap.abs() <= POLE_TOL * lambda.abs().max(1.0) {
            return Err(Error::Pole {
                x,
                eigenvalue: lambda,
            });
        }
        acc -= p / gap;
    }
    Ok(acc)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
