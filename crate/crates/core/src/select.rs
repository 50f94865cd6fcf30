//! Barrier-potential selection of a sparse weighted subfamily.
//!
//! Given vectors `v_1..v_m ∈ ℝ^r` with `Σ v_i v_iᵀ = I`, the loop builds
//! `A = Σ s_i v_i v_iᵀ` one rank-one term at a time while two barriers
//! `l < λ_min(A) ≤ λ_max(A) < u` advance by fixed amounts each step. The
//! potentials
//!
//! ```text
//! Φ^u(A) = Tr (uI − A)⁻¹        Φ_l(A) = Tr (A − lI)⁻¹
//! ```
//!
//! never increase, which keeps the eigenvalues away from both barriers. After
//! `⌈d·r⌉` steps the ratio of the barriers bounds the condition number of `A`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matrix::{dot, eigh, SymmetricMatrix};

/// `‖Σ v_i v_iᵀ − I‖_max` allowed for an input family.
pub const ISOTROPY_TOL: f64 = 1e-8;

/// Cached barrier resolvents are rebuilt from scratch every this many steps.
pub const REFRESH_INTERVAL: usize = 25;

/// Smallest accepted `d − 1`.
pub const MIN_D_EXCESS: f64 = 1e-6;

/// Finite collection of vectors in `ℝ^r` resolving the identity.
#[derive(Clone, Debug)]
pub struct VectorFamily {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl VectorFamily {
    /// Validates `Σ v_i v_iᵀ = I_r` within [`ISOTROPY_TOL`].
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("family dimension must be positive".into()));
        }
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let family = Self { dim, vectors };
        let deviation = family.isotropy_deviation();
        let trace: f64 = family.vectors.iter().map(|v| dot(v, v)).sum();
        if !(deviation <= ISOTROPY_TOL) || !((trace - dim as f64).abs() <= 1e-6) {
            return Err(Error::NotIsotropic { deviation });
        }
        Ok(family)
    }

    pub fn standard_basis(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { dim, vectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// `Σ s_i v_i v_iᵀ`.
    pub fn weighted_sum(&self, weights: &[f64]) -> SymmetricMatrix {
        assert_eq!(weights.len(), self.len());
        let mut a = SymmetricMatrix::zeros(self.dim);
        for (v, &s) in self.vectors.iter().zip(weights) {
            if s != 0.0 {
                a.add_rank_one(s, v);
            }
        }
        a
    }

    pub fn isotropy_deviation(&self) -> f64 {
        let sum = self.weighted_sum(&vec![1.0; self.len()]);
        sum.max_abs_diff(&SymmetricMatrix::identity(self.dim))
    }
}

/// Named parameter assignments for the barrier schedule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Preset {
    /// Tuned schedule with condition bound `(d+1+2√d)/(d+1−2√d)`.
    #[default]
    Standard,
    /// `ε_U = ε_L = 1`, `u0 = r`, `l0 = −r`, `δ_U = 2`, `δ_L = 1/3`.
    Simple,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Standard => "standard",
            Preset::Simple => "simple",
        }
    }

    /// Advertised bound on `λ_max / λ_min` of the output.
    pub fn kappa_bound(self, d: f64) -> f64 {
        match self {
            Preset::Standard => {
                let sd = d.sqrt();
                (d + 1.0 + 2.0 * sd) / (d + 1.0 - 2.0 * sd)
            }
            Preset::Simple => (6.0 * d + 1.0) / (d - 1.0),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Preset::Standard),
            "simple" => Ok(Preset::Simple),
            other => Err(Error::InvalidParameter(format!(
                "unknown preset `{other}` (expected standard or simple)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierParams {
    pub preset: Preset,
    pub d: f64,
    pub delta_upper: f64,
    pub delta_lower: f64,
    pub eps_upper: f64,
    pub eps_lower: f64,
    pub u0: f64,
    pub l0: f64,
}

impl BarrierParams {
    pub fn new(preset: Preset, d: f64, dim: usize) -> Result<Self> {
        if !(d >= 1.0 + MIN_D_EXCESS) || !d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "d must exceed 1 (by at least {MIN_D_EXCESS}), got {d}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let r = dim as f64;
        let params = match preset {
            Preset::Standard => {
                let sd = d.sqrt();
                let eps_lower = 1.0 / sd;
                let eps_upper = (sd - 1.0) / (d + sd);
                Self {
                    preset,
                    d,
                    delta_lower: 1.0,
                    delta_upper: (sd + 1.0) / (sd - 1.0),
                    eps_lower,
                    eps_upper,
                    l0: -r / eps_lower,
                    u0: r / eps_upper,
                }
            }
            Preset::Simple => Self {
                preset,
                d,
                delta_lower: 1.0 / 3.0,
                delta_upper: 2.0,
                eps_lower: 1.0,
                eps_upper: 1.0,
                l0: -r,
                u0: r,
            },
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks `l0 < 0 < u0`, positivity and `1/δ_U + ε_U ≤ 1/δ_L − ε_L`.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.delta_upper,
            self.delta_lower,
            self.eps_upper,
            self.eps_lower,
        ];
        if positive.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "barrier shifts and potential caps must be positive".into(),
            ));
        }
        if !(self.l0 < 0.0 && 0.0 < self.u0) {
            return Err(Error::InvalidParameter(format!(
                "initial barriers must satisfy l0 < 0 < u0, got l0 = {}, u0 = {}",
                self.l0, self.u0
            )));
        }
        let lhs = self.upper_budget();
        let rhs = self.lower_budget();
        if lhs > rhs + 1e-12 * rhs.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "infeasible schedule: 1/δ_U + ε_U = {lhs} exceeds 1/δ_L − ε_L = {rhs}"
            )));
        }
        Ok(())
    }

    /// `1/δ_U + ε_U`, the cap on `Σ_i U_A(v_i)`.
    pub fn upper_budget(&self) -> f64 {
        1.0 / self.delta_upper + self.eps_upper
    }

    /// `1/δ_L − ε_L`, the floor on `Σ_i L_A(v_i)`.
    pub fn lower_budget(&self) -> f64 {
        1.0 / self.delta_lower - self.eps_lower
    }

    /// Number of rank-one steps, `⌈d·r⌉`.
    pub fn steps(&self, dim: usize) -> usize {
        // Shave rounding noise so that e.g. 2.1 * 10 gives 21, not 22.
        let raw = self.d * dim as f64;
        (raw - 1e-9 * raw.max(1.0)).ceil().max(1.0) as usize
    }

    pub fn kappa_bound(&self) -> f64 {
        self.preset.kappa_bound(self.d)
    }

    pub fn upper_at(&self, step: usize) -> f64 {
        self.u0 + step as f64 * self.delta_upper
    }

    pub fn lower_at(&self, step: usize) -> f64 {
        self.l0 + step as f64 * self.delta_lower
    }
}

/// `Σ 1/(u − λ_i)`, from the eigenvalues of `a`.
pub fn upper_potential(a: &SymmetricMatrix, u: f64) -> Result<f64> {
    let spec = eigh(a)?;
    if !(spec.max() < u) {
        return Err(Error::BarrierViolation(format!(
            "upper barrier {u} is not above λ_max = {}",
            spec.max()
        )));
    }
    Ok(spec.eigenvalues().iter().map(|&l| 1.0 / (u - l)).sum())
}

/// `Σ 1/(λ_i − l)`, from the eigenvalues of `a`.
pub fn lower_potential(a: &SymmetricMatrix, l: f64) -> Result<f64> {
    let spec = eigh(a)?;
    if !(spec.min() > l) {
        return Err(Error::BarrierViolation(format!(
            "lower barrier {l} is not below λ_min = {}",
            spec.min()
        )));
    }
    Ok(spec.eigenvalues().iter().map(|&x| 1.0 / (x - l)).sum())
}

/// One completed step of the selection loop.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// Step number after the update, starting at 1.
    pub q: usize,
    pub index: usize,
    pub t: f64,
    /// `Φ^{u_q}(A^(q))`.
    pub phi_upper: f64,
    /// `Φ_{l_q}(A^(q))`.
    pub phi_lower: f64,
    pub upper: f64,
    pub lower: f64,
    /// `Σ_i U_A(v_i)` and `Σ_i L_A(v_i)` at `A^(q−1)`.
    pub sum_upper: f64,
    pub sum_lower: f64,
    /// Extreme eigenvalues of `A^(q)`; only filled when spectra are observed.
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelectionTrace {
    pub records: Vec<StepRecord>,
}

impl SelectionTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One line per step: `q index t phi_u phi_l lambda_min lambda_max`,
    /// reals with 12 significant digits.
    pub fn write_records(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "# q index t phi_u phi_l lambda_min lambda_max")?;
        for r in &self.records {
            let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), |x| format_significant(x, 12));
            writeln!(
                out,
                "{} {} {} {} {} {} {}",
                r.q,
                r.index,
                format_significant(r.t, 12),
                format_significant(r.phi_upper, 12),
                format_significant(r.phi_lower, 12),
                opt(r.lambda_min),
                opt(r.lambda_max),
            )?;
        }
        Ok(())
    }
}

/// `printf("%.{digits}g")`-style formatting.
pub fn format_significant(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_fraction(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Per-vector thresholds on `1/t` at the current state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftBounds {
    pub upper: f64,
    pub lower: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepChoice {
    pub index: usize,
    pub t: f64,
    pub bounds: ShiftBounds,
    pub sum_upper: f64,
    pub sum_lower: f64,
}

/// State of the selection loop after `q` steps.
///
/// Besides `A` it caches four resolvents: `(uI − A)⁻¹` and `(A − lI)⁻¹` at the
/// current barriers, kept current by Sherman–Morrison updates, and the same
/// two at the shifted barriers `u + δ_U`, `l + δ_L`, rebuilt by Cholesky
/// inversion every step since a barrier shift is not a low-rank change.
#[derive(Clone, Debug)]
pub struct BarrierState {
    params: BarrierParams,
    a: SymmetricMatrix,
    q: usize,
    weights: Vec<f64>,
    upper_inv: SymmetricMatrix,
    lower_inv: SymmetricMatrix,
    shifted_upper_inv: SymmetricMatrix,
    shifted_lower_inv: SymmetricMatrix,
}

impl BarrierState {
    /// Starts from `A = 0` with barriers at `u0`, `l0`.
    pub fn new(params: BarrierParams, dim: usize, count: usize) -> Result<Self> {
        if !(params.l0 < 0.0 && 0.0 < params.u0) {
            return Err(Error::InvalidParameter(
                "initial barriers must satisfy l0 < 0 < u0".into(),
            ));
        }
        let a = SymmetricMatrix::zeros(dim);
        let mut state = Self {
            params,
            upper_inv: SymmetricMatrix::scaled_identity(dim, 1.0 / params.u0),
            lower_inv: SymmetricMatrix::scaled_identity(dim, -1.0 / params.l0),
            shifted_upper_inv: a.clone(),
            shifted_lower_inv: a.clone(),
            a,
            q: 0,
            weights: vec![0.0; count],
        };
        state.refresh_shifted()?;
        Ok(state)
    }

    pub fn params(&self) -> &BarrierParams {
        &self.params
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.a
    }

    pub fn step(&self) -> usize {
        self.q
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn upper(&self) -> f64 {
        self.params.upper_at(self.q)
    }

    pub fn lower(&self) -> f64 {
        self.params.lower_at(self.q)
    }

    /// `Φ^u(A)` from the cached resolvent.
    pub fn phi_upper(&self) -> f64 {
        self.upper_inv.trace()
    }

    /// `Φ_l(A)` from the cached resolvent.
    pub fn phi_lower(&self) -> f64 {
        self.lower_inv.trace()
    }

    /// `Φ^{u+δ_U}(A)`.
    pub fn phi_upper_shifted(&self) -> f64 {
        self.shifted_upper_inv.trace()
    }

    /// `Φ_{l+δ_L}(A)`.
    pub fn phi_lower_shifted(&self) -> f64 {
        self.shifted_lower_inv.trace()
    }

    /// Cached `(uI − A)⁻¹` and `(A − lI)⁻¹`.
    pub fn cached_inverses(&self) -> (&SymmetricMatrix, &SymmetricMatrix) {
        (&self.upper_inv, &self.lower_inv)
    }

    /// `(uI − A)⁻¹` and `(A − lI)⁻¹` recomputed from `A`.
    pub fn fresh_inverses(&self) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
        Ok((
            self.upper_resolvent(self.upper())?,
            self.lower_resolvent(self.lower())?,
        ))
    }

    fn upper_resolvent(&self, u: f64) -> Result<SymmetricMatrix> {
        let mut m = self.a.clone();
        m.scale(-1.0);
        for i in 0..m.order() {
            m.add(i, i, u);
        }
        m.inverse_spd().map_err(|_| {
            Error::BarrierViolation(format!("λ_max(A) reached the upper barrier {u} at step {}", self.q))
        })
    }

    fn lower_resolvent(&self, l: f64) -> Result<SymmetricMatrix> {
        let mut m = self.a.clone();
        for i in 0..m.order() {
            m.add(i, i, -l);
        }
        m.inverse_spd().map_err(|_| {
            Error::BarrierViolation(format!("λ_min(A) reached the lower barrier {l} at step {}", self.q))
        })
    }

    fn refresh_shifted(&mut self) -> Result<()> {
        self.shifted_upper_inv = self.upper_resolvent(self.upper() + self.params.delta_upper)?;
        self.shifted_lower_inv = self.lower_resolvent(self.lower() + self.params.delta_lower)?;
        Ok(())
    }

    /// `U_A(v) = vᵀ M² v / (Φ^u(A) − Φ^{u+δ_U}(A)) + vᵀ M v` with
    /// `M = ((u+δ_U)I − A)⁻¹`. Any `1/t ≥ U_A(v)` keeps the upper potential
    /// from increasing when the barrier moves to `u + δ_U`.
    pub fn upper_shift_bound(&self, v: &[f64]) -> Result<f64> {
        let gap = self.phi_upper() - self.phi_upper_shifted();
        if !(gap > 1e-14 * self.phi_upper()) {
            return Err(Error::Degenerate(format!(
                "upper potential difference {gap:e} is not positive at step {}",
                self.q
            )));
        }
        let mv = self.shifted_upper_inv.mul_vec(v);
        Ok(dot(&mv, &mv) / gap + dot(v, &mv))
    }

    /// `L_A(v) = vᵀ N² v / (Φ_{l+δ_L}(A) − Φ_l(A)) − vᵀ N v` with
    /// `N = (A − (l+δ_L)I)⁻¹`. Any `0 < 1/t ≤ L_A(v)` keeps the lower potential
    /// from increasing when the barrier moves to `l + δ_L`. May be negative.
    pub fn lower_shift_bound(&self, v: &[f64]) -> Result<f64> {
        let gap = self.lower_gap()?;
        let nv = self.shifted_lower_inv.mul_vec(v);
        Ok(dot(&nv, &nv) / gap - dot(v, &nv))
    }

    fn lower_gap(&self) -> Result<f64> {
        let phi = self.phi_lower();
        let cap = 1.0 / self.params.delta_lower;
        if phi > cap * (1.0 + 1e-12) {
            return Err(Error::ContractViolation(format!(
                "lower potential {phi} exceeds 1/δ_L = {cap}"
            )));
        }
        let gap = self.phi_lower_shifted() - phi;
        if !(gap > 1e-14 * phi) {
            return Err(Error::Degenerate(format!(
                "lower potential difference {gap:e} is not positive at step {}",
                self.q
            )));
        }
        Ok(gap)
    }

    /// `(U_A(v_i), L_A(v_i))` for every vector of the family.
    pub fn shift_bounds(&self, family: &VectorFamily, exec: Execution) -> Result<Vec<ShiftBounds>> {
        if family.dim() != self.a.order() {
            return Err(Error::DimensionMismatch {
                expected: self.a.order(),
                found: family.dim(),
            });
        }
        let upper_gap = self.phi_upper() - self.phi_upper_shifted();
        if !(upper_gap > 1e-14 * self.phi_upper()) {
            return Err(Error::Degenerate(format!(
                "upper potential difference {upper_gap:e} is not positive at step {}",
                self.q
            )));
        }
        let lower_gap = self.lower_gap()?;
        let mu = &self.shifted_upper_inv;
        let ml = &self.shifted_lower_inv;
        Ok(exec.map(family.len(), |i| {
            let v = family.vector(i);
            let mv = mu.mul_vec(v);
            let nv = ml.mul_vec(v);
            ShiftBounds {
                upper: dot(&mv, &mv) / upper_gap + dot(v, &mv),
                lower: dot(&nv, &nv) / lower_gap - dot(v, &nv),
            }
        }))
    }

    /// Picks the index maximizing `L_A − U_A` among those with
    /// `L_A ≥ U_A > 0` (smallest index on ties) and `t = 2/(U_A + L_A)`.
    pub fn choose_step(&self, family: &VectorFamily, exec: Execution) -> Result<StepChoice> {
        self.params.validate()?;
        let bounds = self.shift_bounds(family, exec)?;
        let mut best: Option<(usize, f64)> = None;
        let (mut sum_upper, mut sum_lower) = (0.0, 0.0);
        for (i, b) in bounds.iter().enumerate() {
            sum_upper += b.upper;
            sum_lower += b.lower;
            if b.upper > 0.0 && b.lower >= b.upper {
                let gap = b.lower - b.upper;
                if best.is_none_or(|(_, g)| gap > g) {
                    best = Some((i, gap));
                }
            }
        }
        let (index, _) = best.ok_or_else(|| Error::Infeasible {
            step: self.q + 1,
            trace: Box::default(),
        })?;
        let b = bounds[index];
        Ok(StepChoice {
            index,
            t: 2.0 / (b.upper + b.lower),
            bounds: b,
            sum_upper,
            sum_lower,
        })
    }

    /// Adds `t·v_i v_iᵀ`, advances both barriers and updates the caches.
    pub fn apply(&mut self, family: &VectorFamily, index: usize, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("step weight must be positive, got {t}")));
        }
        let v = family.vector(index);
        self.a.add_rank_one(t, v);
        self.weights[index] += t;
        self.q += 1;
        if self.q.is_multiple_of(REFRESH_INTERVAL) {
            let (upper, lower) = self.fresh_inverses()?;
            self.upper_inv = upper;
            self.lower_inv = lower;
        } else {
            // ((u+δ_U)I − A − t vvᵀ)⁻¹ and (A + t vvᵀ − (l+δ_L)I)⁻¹.
            self.upper_inv = crate::matrix::sherman_morrison(&self.shifted_upper_inv, v, -t)?;
            self.lower_inv = crate::matrix::sherman_morrison(&self.shifted_lower_inv, v, t)?;
        }
        self.refresh_shifted()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SelectionOptions {
    pub execution: Execution,
    /// Record `λ_min`/`λ_max` of `A` after every step (one eigensolve per step).
    pub observe_spectrum: bool,
}

/// Output of [`sparsify_vectors`].
#[derive(Clone, Debug)]
pub struct Selection {
    /// `s_i`, scaled so that `λ_min(Σ s_i v_i v_iᵀ) = 1`.
    pub weights: Vec<f64>,
    pub trace: SelectionTrace,
    pub steps: usize,
    /// Extreme eigenvalues of the unscaled `A^(Q)`.
    pub raw_lambda_min: f64,
    pub raw_lambda_max: f64,
    pub kappa: f64,
    pub kappa_bound: f64,
}

impl Selection {
    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&s| s != 0.0).count()
    }
}

/// Runs `⌈d·r⌉` barrier steps from `A = 0` and rescales the accumulated
/// weights by `1/λ_min` so that `I ⪯ Σ s_i v_i v_iᵀ ⪯ κ I`.
pub fn sparsify_vectors(
    family: &VectorFamily,
    params: &BarrierParams,
    options: SelectionOptions,
) -> Result<Selection> {
    params.validate()?;
    let dim = family.dim();
    let steps = params.steps(dim);
    let mut state = BarrierState::new(*params, dim, family.len())?;
    let mut trace = SelectionTrace::default();

    for _ in 0..steps {
        let choice = match state.choose_step(family, options.execution) {
            Ok(c) => c,
            Err(Error::Infeasible { step, .. }) => {
                return Err(Error::Infeasible {
                    step,
                    trace: Box::new(trace),
                })
            }
            Err(e) => return Err(e),
        };
        state.apply(family, choice.index, choice.t)?;
        let (lambda_min, lambda_max) = if options.observe_spectrum {
            let spec = eigh(state.matrix())?;
            (Some(spec.min()), Some(spec.max()))
        } else {
            (None, None)
        };
        trace.records.push(StepRecord {
            q: state.step(),
            index: choice.index,
            t: choice.t,
            phi_upper: state.phi_upper(),
            phi_lower: state.phi_lower(),
            upper: state.upper(),
            lower: state.lower(),
            sum_upper: choice.sum_upper,
            sum_lower: choice.sum_lower,
            lambda_min,
            lambda_max,
        });
    }

    let spec = eigh(state.matrix())?;
    let (raw_min, raw_max) = (spec.min(), spec.max());
    if !(raw_min > 1e-12 * raw_max.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate(format!(
            "accumulated matrix is singular after {steps} steps (λ_min = {raw_min:e})"
        )));
    }
    let weights = state.weights.iter().map(|s| s / raw_min).collect();
    Ok(Selection {
        weights,
        trace,
        steps,
        raw_lambda_min: raw_min,
        raw_lambda_max: raw_max,
        kappa: raw_max / raw_min,
        kappa_bound: params.kappa_bound(),
    })
}
