//! Density families in the `V^{-d}` convention, samplers, 1D distribution
//! functions, and moment estimators.
//!
//! # The `V^{-d}` convention
//!
//! Densities are written as `ρ(x) = V(x)^{-d}`, and every structural
//! constant a bound consumes refers to `V`, not to `ρ`:
//!
//! * `A` — log-gradient decay: `|∇ log V(x)| ≤ A·(1+|x|)^{-1}`;
//! * `(L, q)` — polynomial growth: `V(x) ≤ L·(1+|x|)^q`;
//! * `(M, p)` — polynomial floor driving tail bounds: `V(x) ≥ M·|x|^p`;
//! * `V(0)` — the value at the origin.
//!
//! The model stores the log *density* and derives `log V = −(log ρ)/d`
//! internally, so a forgotten factor of `d` cannot silently corrupt the
//! constants.
//!
//! # Families
//!
//! * `Gaussian(mean, var)` — diagonal covariance; a zero variance makes that
//!   coordinate a point mass (samplable, but density-based operations are
//!   unavailable).
//! * `PolyV(κ, q)` — density ∝ `(κ·(1+|x|²)^{q/2})^{-d}`, the canonical
//!   heavy-tailed family (q = 2, d = 1 is the standard Cauchy law). Requires
//!   q > 1 for integrability. Since the family is defined up to
//!   proportionality, the declared κ does not affect the normalized density;
//!   the *effective* κ (the one making `V^{-d}` a probability density) is
//!   `Z^{1/d}` for the closed-form normalization `Z`, and the auto-derived
//!   structural constants use it.
//! * `Uniform(box)` — product of intervals.
//! * `Custom` — user log-density (unnormalized allowed), sampled by
//!   random-walk Metropolis; 1D custom models are normalized by quadrature
//!   at construction.
//!
//! Sampling is deterministic given a seed and split into fixed chunks (see
//! [`crate::rng`]), so estimates are reproducible under any scheduling.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::math;
use crate::quad;
use crate::rng::{chunk_rng, CHUNK_LEN};

/// Absolute tolerance for 1D CDF quadrature.
pub const CDF_ABS_TOL: f64 = 1e-10;
/// Abscissa tolerance for quantile root-finding.
pub const QUANTILE_X_TOL: f64 = 1e-9;
/// Per-step quadrature tolerance inside CDF/quantile sweeps. Quantile error
/// propagates as Δx ≈ Δp/ρ(x), and transport grids reach the 1e-6 quantile
/// where ρ ~ 1e-6, so probability increments must stay accurate to ~1e-13
/// even after thousands of accumulation steps.
const SWEEP_STEP_TOL: f64 = 1e-14;
/// Probability tolerance at which a quantile sweep stops refining.
const SWEEP_P_TOL: f64 = 1e-13;
/// One-sided tail mass allowed outside the 1D integration domain.
const TRUNCATION_MASS: f64 = 1e-9;
/// Density-to-peak ratio below which the domain is truncated.
const TRUNCATION_DENSITY_RATIO: f64 = 1e-16;
/// Quadrature work limits for CDF integrals. Densities are integrated
/// piecewise with splits at [`FEATURE_SPLIT`] so that every piece has its
/// interesting region either inside a forced-subdivision panel or anchored
/// at an endpoint; the split budget then comfortably covers the
/// O(log2(width/feature)) cascade plus core resolution even on heavy-tail
/// domains spanning ~18 orders of magnitude.
const CDF_MIN_DEPTH: u32 = 8;
const CDF_MAX_SPLITS: u32 = 50_000;
/// Densities handled here concentrate their mass and curvature around the
/// origin; splitting CDF integrals at this radius keeps each piece's
/// features visible to the adaptive quadrature.
const FEATURE_SPLIT: f64 = 100.0;

/// Random-walk Metropolis defaults (recorded in every estimate that used
/// them).
pub const RWM_BURN_IN: usize = 10_000;
/// Chain thinning: one retained draw per this many steps.
pub const RWM_THINNING: usize = 10;

/// Errors from model construction, evaluation, and sampling.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MeasureError {
    /// A constructor or operation received a structurally invalid argument.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    /// A point's coordinate count does not match the model dimension.
    #[error("dimension mismatch: model is {expected}-dimensional, point has {got} coordinates")]
    DimensionMismatch { expected: usize, got: usize },
    /// A 1D-only operation was called on a higher-dimensional model.
    #[error("operation requires a 1-dimensional model; this model has dimension {dim}")]
    NotOneDimensional { dim: usize },
    /// Probability argument outside the open unit interval.
    #[error("probability {p} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange { p: f64 },
    /// Custom models cannot be sampled without a declared proposal scale.
    #[error("custom model has no declared random-walk proposal scale")]
    MissingProposalScale,
    /// The density's integral did not converge over the searched domain.
    #[error("density is not normalizable over the searched domain")]
    NonNormalizable,
    /// Density values are unavailable (degenerate covariance, or an
    /// unnormalized custom model in dimension > 1).
    #[error("density unavailable: {0}")]
    DensityUnavailable(&'static str),
    /// The log-density gradient is undefined at the queried point (uniform
    /// boundary / exterior).
    #[error("log-density gradient undefined at the queried point")]
    GradientUndefined,
    /// Adaptive quadrature could not reach the contracted tolerance.
    #[error("quadrature reached error {achieved:e}, above the requested {requested:e}")]
    QuadratureTolerance { requested: f64, achieved: f64 },
}

type Result<T> = core::result::Result<T, MeasureError>;

/// User-supplied log-density for the custom family.
pub type DynLogDensity = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Optional analytic gradient for the custom family.
pub type DynGradient = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Declared structural constants in the `V^{-d}` convention. Closed-form
/// families fill the entries they satisfy; callers may declare or override
/// the rest (declarations are *hypotheses* — the verification gates check
/// them against the model, see [`verify_log_grad_decay`]).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StructuralParams {
    /// `A` in `|∇ log V(x)| ≤ A·(1+|x|)^{-1}`.
    pub log_grad_decay_a: Option<f64>,
    /// `(L, q)` in `V(x) ≤ L·(1+|x|)^q`.
    pub poly_growth_lq: Option<(f64, f64)>,
    /// `(M, p)` in `V(x) ≥ M·|x|^p`.
    pub poly_tail_mp: Option<(f64, f64)>,
    /// Declared subgaussian concentration variance proxy σ².
    pub subgaussian_sigma2: Option<f64>,
    /// Declared exponential concentration parameters (c, σ).
    pub exponential_c_sigma: Option<(f64, f64)>,
    /// `V(0)`.
    pub v0: Option<f64>,
    /// Random-walk proposal scale for custom-model sampling.
    pub proposal_scale: Option<f64>,
}

/// Lightweight family descriptor for reports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyTag {
    /// Diagonal-covariance Gaussian.
    Gaussian,
    /// Density ∝ `(κ(1+|x|²)^{q/2})^{-d}`.
    PolyV {
        /// Declared (not effective) κ.
        kappa: f64,
        /// Tail exponent parameter of `V`.
        q: f64,
    },
    /// Uniform law on a box.
    Uniform,
    /// User-supplied log-density.
    Custom,
}

enum Family {
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    PolyV { kappa: f64, q: f64 },
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    Custom { log_density: DynLogDensity, gradient: Option<DynGradient> },
}

/// A probability density on `R^d` in the `V^{-d}` convention, with
/// evaluators, gradient, sampler, and declared structural parameters.
pub struct DensityModel {
    dim: usize,
    family: Family,
    params: StructuralParams,
    /// ln ∫ exp(raw log density); `None` when unknown (degenerate Gaussian,
    /// custom model in dimension > 1).
    log_z: Option<f64>,
    /// 1D integration domain (support truncated where the density is below
    /// [`TRUNCATION_DENSITY_RATIO`] × peak *and* the remaining tail mass is
    /// below [`TRUNCATION_MASS`]).
    trunc: Option<(f64, f64)>,
}

impl core::fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DensityModel")
            .field("dim", &self.dim)
            .field("family", &self.family_tag())
            .field("params", &self.params)
            .finish()
    }
}

/// Normalization constant `Z` of `(1+|x|²)^{-qd/2}` over `R^d`:
/// `Z = π^{d/2}·Γ(d(q−1)/2)/Γ(qd/2)`.
fn poly_v_log_z(q: f64, d: usize) -> f64 {
    let d = d as f64;
    0.5 * d * math::ln(core::f64::consts::PI) + math::ln_gamma(0.5 * d * (q - 1.0))
        - math::ln_gamma(0.5 * q * d)
}

impl DensityModel {
    /// Gaussian with the given mean and per-coordinate variances (diagonal
    /// covariance). Variances must be ≥ 0; a zero variance makes the model
    /// degenerate in that coordinate (point mass: samplable, no density).
    pub fn gaussian(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() != var.len() {
            return Err(MeasureError::InvalidParameter(
                "gaussian mean and variance vectors must be nonempty and of equal length",
            ));
        }
        if var.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(MeasureError::InvalidParameter(
                "gaussian variances must be finite and nonnegative",
            ));
        }
        let dim = mean.len();
        let degenerate = var.contains(&0.0);
        let log_z = if degenerate {
            None
        } else {
            let two_pi = 2.0 * core::f64::consts::PI;
            Some(var.iter().map(|&v| 0.5 * math::ln(two_pi * v)).sum())
        };
        let trunc = if dim == 1 && !degenerate {
            // Density falls to 1e-16 of peak at |x−m| = σ√(2 ln 1e16); the
            // mass beyond is ≲1e-17, so the density threshold alone suffices.
            let r = math::sqrt(var[0]) * math::sqrt(-2.0 * math::ln(TRUNCATION_DENSITY_RATIO));
            Some((mean[0] - r, mean[0] + r))
        } else {
            None
        };
        let mut model = Self {
            dim,
            family: Family::Gaussian { mean, var },
            params: StructuralParams::default(),
            log_z,
            trunc,
        };
        if !degenerate {
            let max_var = model.gaussian_var().iter().cloned().fold(0.0, f64::max);
            model.params.subgaussian_sigma2 = Some(max_var);
            model.params.v0 = model.v0_from_density();
        }
        Ok(model)
    }

    /// Standard Gaussian `N(0, I_d)`.
    pub fn standard_gaussian(dim: usize) -> Self {
        Self::gaussian(vec![0.0; dim], vec![1.0; dim]).expect("standard gaussian is valid")
    }

    /// Heavy-tailed family with density ∝ `(κ(1+|x|²)^{q/2})^{-d}`.
    /// Integrability requires `q > 1`. Auto-derives the structural constants
    /// `A = 2q`, `L = M = V(0) = Z^{1/d}` (effective κ), `p = q`.
    pub fn poly_v(kappa: f64, q: f64, dim: usize) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(MeasureError::InvalidParameter("poly_v requires κ > 0"));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(MeasureError::InvalidParameter(
                "poly_v requires q > 1 (density (1+|x|²)^{-qd/2} is not integrable otherwise)",
            ));
        }
        if dim == 0 {
            return Err(MeasureError::InvalidParameter("dimension must be ≥ 1"));
        }
        let log_z = poly_v_log_z(q, dim);
        let kappa_eff = math::exp(log_z / dim as f64);
        let trunc = if dim == 1 {
            // Density threshold: (1+x²)^{-q/2} ≤ 1e-16 at x ≈ 1e^{16/q}.
            let r_density = math::sqrt((math::pow(1e16, 2.0 / q) - 1.0).max(0.0));
            // Tail-mass threshold: ∫_{|x|≥R} ≤ ω_d R^{-d(q-1)} / (Z (q-1)).
            let r_mass = math::pow(
                2.0 / (math::exp(log_z) * (q - 1.0) * TRUNCATION_MASS),
                1.0 / (q - 1.0),
            );
            let r = r_density.max(r_mass).min(1e250);
            Some((-r, r))
        } else {
            None
        };
        let params = StructuralParams {
            log_grad_decay_a: Some(2.0 * q),
            poly_growth_lq: Some((kappa_eff, q)),
            poly_tail_mp: Some((kappa_eff, q)),
            subgaussian_sigma2: None,
            exponential_c_sigma: None,
            v0: Some(kappa_eff),
            proposal_scale: None,
        };
        Ok(Self { dim, family: Family::PolyV { kappa, q }, params, log_z: Some(log_z), trunc })
    }

    /// Uniform law on the box `∏ [lo_i, hi_i]`.
    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(MeasureError::InvalidParameter(
                "uniform box bounds must be nonempty and of equal length",
            ));
        }
        if lo.iter().zip(&hi).any(|(&l, &h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(MeasureError::InvalidParameter(
                "uniform box requires finite lo < hi in every coordinate",
            ));
        }
        let dim = lo.len();
        let log_z: f64 = lo.iter().zip(&hi).map(|(&l, &h)| math::ln(h - l)).sum();
        let trunc = if dim == 1 { Some((lo[0], hi[0])) } else { None };
        let inside_zero = lo.iter().zip(&hi).all(|(&l, &h)| l <= 0.0 && 0.0 <= h);
        let mut model = Self {
            dim,
            family: Family::Uniform { lo, hi },
            params: StructuralParams::default(),
            log_z: Some(log_z),
            trunc,
        };
        if inside_zero {
            model.params.v0 = model.v0_from_density();
        }
        Ok(model)
    }

    /// Model from a user log-density (unnormalized allowed). 1D models are
    /// normalized by quadrature at construction (so CDF/quantile work);
    /// higher-dimensional ones are sampling-only. Sampling requires a
    /// declared `proposal_scale` (here or later via [`Self::params_mut`]).
    pub fn custom(
        dim: usize,
        log_density: DynLogDensity,
        gradient: Option<DynGradient>,
        proposal_scale: Option<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(MeasureError::InvalidParameter("dimension must be ≥ 1"));
        }
        if let Some(s) = proposal_scale {
            if !(s > 0.0) || !s.is_finite() {
                return Err(MeasureError::InvalidParameter("proposal scale must be positive"));
            }
        }
        let mut model = Self {
            dim,
            family: Family::Custom { log_density, gradient },
            params: StructuralParams { proposal_scale, ..StructuralParams::default() },
            log_z: None,
            trunc: None,
        };
        if dim == 1 {
            let scale = proposal_scale.unwrap_or(1.0);
            let (lo, hi, peak) = model.search_truncation_1d(scale)?;
            // Normalize relative to the scanned peak so the integrand stays
            // in exp's comfortable range whatever offset the user baked in.
            let raw = |x: f64| math::exp(model.raw_log_density(&[x]) - peak);
            let z = piecewise_1d(&raw, lo, hi, 1e-12);
            if !z.value.is_finite() || z.value <= 0.0 {
                return Err(MeasureError::NonNormalizable);
            }
            model.log_z = Some(math::ln(z.value) + peak);
            model.trunc = Some((lo, hi));
            model.params.v0 = model.v0_from_density();
        }
        Ok(model)
    }

    /// Doubling search for a 1D domain `[-R, R]` on which the raw density has
    /// decayed below 1e-16 of its (scanned) peak and the residual tail is
    /// negligible for a density with at-least-quadratic decay.
    fn search_truncation_1d(&self, scale: f64) -> Result<(f64, f64, f64)> {
        let raw = |x: f64| self.raw_log_density(&[x]);
        // Scan for the peak on a widening grid around the origin.
        let mut peak = f64::NEG_INFINITY;
        let mut half_width = 8.0 * scale;
        loop {
            let mut edge_max = f64::NEG_INFINITY;
            for i in 0..=512usize {
                let x = -half_width + (i as f64 / 512.0) * 2.0 * half_width;
                let v = raw(x);
                peak = peak.max(v);
                if i == 0 || i == 512 {
                    edge_max = edge_max.max(v);
                }
            }
            if peak.is_finite() && edge_max < peak - 3.0 {
                break;
            }
            half_width *= 2.0;
            if half_width > 1e9 * scale {
                return Err(MeasureError::NonNormalizable);
            }
        }
        // Double the radius until both the density threshold and a crude
        // tail-mass proxy (density × radius) are satisfied.
        let log_thresh = peak + math::ln(TRUNCATION_DENSITY_RATIO);
        let mut r = half_width;
        for _ in 0..200 {
            let lv = raw(-r).max(raw(r));
            if lv < log_thresh && lv + math::ln(r.max(1.0)) < peak + math::ln(1e-10) {
                return Ok((-r, r, peak));
            }
            r *= 2.0;
            if !r.is_finite() {
                break;
            }
        }
        Err(MeasureError::NonNormalizable)
    }

    fn v0_from_density(&self) -> Option<f64> {
        let zero = vec![0.0; self.dim];
        match self.log_density(&zero) {
            Ok(ld) if ld.is_finite() => Some(math::exp(-ld / self.dim as f64)),
            _ => None,
        }
    }

    /// Model dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Family descriptor for reports.
    pub fn family_tag(&self) -> FamilyTag {
        match &self.family {
            Family::Gaussian { .. } => FamilyTag::Gaussian,
            Family::PolyV { kappa, q } => FamilyTag::PolyV { kappa: *kappa, q: *q },
            Family::Uniform { .. } => FamilyTag::Uniform,
            Family::Custom { .. } => FamilyTag::Custom,
        }
    }

    /// Declared structural constants.
    pub fn params(&self) -> &StructuralParams {
        &self.params
    }

    /// Mutable access to the declared structural constants (declarations are
    /// hypotheses; the verification gates check them).
    pub fn params_mut(&mut self) -> &mut StructuralParams {
        &mut self.params
    }

    /// ln of the normalization constant of the raw log-density, when known.
    pub fn log_norm(&self) -> Option<f64> {
        self.log_z
    }

    fn gaussian_var(&self) -> &[f64] {
        match &self.family {
            Family::Gaussian { var, .. } => var,
            _ => unreachable!("gaussian_var on non-gaussian family"),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(MeasureError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Raw (possibly unnormalized) log density. −∞ outside the support.
    fn raw_log_density(&self, x: &[f64]) -> f64 {
        match &self.family {
            Family::Gaussian { mean, var } => {
                let mut s = 0.0;
                for i in 0..x.len() {
                    let t = x[i] - mean[i];
                    s -= 0.5 * t * t / var[i];
                }
                s
            }
            Family::PolyV { q, .. } => {
                let r2 = math::dot(x, x);
                -0.5 * q * self.dim as f64 * math::ln_1p(r2)
            }
            Family::Uniform { lo, hi } => {
                let inside = x.iter().zip(lo).zip(hi).all(|((&v, &l), &h)| l <= v && v <= h);
                if inside {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::Custom { log_density, .. } => log_density(x),
        }
    }

    /// Normalized log density `log ρ(x)`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let log_z = self.log_z.ok_or(MeasureError::DensityUnavailable(
            "model has no computed normalization (degenerate covariance or unnormalized custom)",
        ))?;
        Ok(self.raw_log_density(x) - log_z)
    }

    /// Normalized density `ρ(x)`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        Ok(math::exp(self.log_density(x)?))
    }

    /// `∇ log ρ(x)`: analytic for the closed-form families and for custom
    /// models that declared a gradient; centered finite differences with
    /// step `h_i = cbrt(ε)·max(1, |x_i|)` otherwise.
    pub fn grad_log_density(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        match &self.family {
            Family::Gaussian { mean, var } => {
                if var.contains(&0.0) {
                    return Err(MeasureError::DensityUnavailable("degenerate covariance"));
                }
                Ok(x.iter()
                    .zip(mean)
                    .zip(var)
                    .map(|((&v, &m), &s2)| -(v - m) / s2)
                    .collect())
            }
            Family::PolyV { q, .. } => {
                let r2 = math::dot(x, x);
                let c = -q * self.dim as f64 / (1.0 + r2);
                Ok(x.iter().map(|&v| c * v).collect())
            }
            Family::Uniform { lo, hi } => {
                // Zero strictly inside; undefined on the boundary / outside.
                let margin = 1e-12;
                for ((&v, &l), &h) in x.iter().zip(lo).zip(hi) {
                    let tol = margin * (h - l);
                    if v <= l + tol || v >= h - tol {
                        return Err(MeasureError::GradientUndefined);
                    }
                }
                Ok(vec![0.0; self.dim])
            }
            Family::Custom { log_density, gradient } => {
                if let Some(g) = gradient {
                    return Ok(g(x));
                }
                let h0 = math::cbrt(f64::EPSILON);
                let mut g = Vec::with_capacity(self.dim);
                let mut xp = x.to_vec();
                for i in 0..self.dim {
                    let h = h0 * x[i].abs().max(1.0);
                    xp[i] = x[i] + h;
                    let fp = log_density(&xp);
                    xp[i] = x[i] - h;
                    let fm = log_density(&xp);
                    xp[i] = x[i];
                    if !fp.is_finite() || !fm.is_finite() {
                        return Err(MeasureError::GradientUndefined);
                    }
                    g.push((fp - fm) / (2.0 * h));
                }
                Ok(g)
            }
        }
    }

    /// `log V(x) = −(log ρ(x))/d`.
    pub fn log_v(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.log_density(x)? / self.dim as f64)
    }

    /// `∇ log V(x) = −(∇ log ρ(x))/d`.
    pub fn grad_log_v(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim as f64;
        Ok(self.grad_log_density(x)?.into_iter().map(|g| -g / d).collect())
    }

    /// The 1D integration domain (truncated support).
    pub fn support_1d(&self) -> Result<(f64, f64)> {
        if self.dim != 1 {
            return Err(MeasureError::NotOneDimensional { dim: self.dim });
        }
        self.trunc.ok_or(MeasureError::DensityUnavailable(
            "no integrable 1D density (degenerate covariance?)",
        ))
    }

    /// Normalized-density integral over `[a, b]` (within the truncated
    /// support), split at ±[`FEATURE_SPLIT`] so each piece's mass is either
    /// inside the forced panels or anchored at an endpoint.
    pub(crate) fn integrate_density_1d(&self, a: f64, b: f64, abs_tol: f64) -> quad::QuadResult {
        let f = |t: f64| math::exp(self.raw_log_density(&[t]) - self.log_z.unwrap_or(0.0));
        piecewise_1d(&f, a, b, abs_tol)
    }

    /// CDF of a 1D model by adaptive quadrature (absolute tolerance
    /// [`CDF_ABS_TOL`]).
    pub fn cdf_1d(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support_1d()?;
        if x <= lo {
            return Ok(0.0);
        }
        let r = self.integrate_density_1d(lo, x.min(hi), CDF_ABS_TOL);
        if r.error_estimate > 100.0 * CDF_ABS_TOL {
            return Err(MeasureError::QuadratureTolerance {
                requested: CDF_ABS_TOL,
                achieved: r.error_estimate,
            });
        }
        Ok(r.value.clamp(0.0, 1.0))
    }

    /// Quantile of a 1D model by safeguarded Newton (bisection fallback) on
    /// the CDF, to abscissa tolerance [`QUANTILE_X_TOL`] (relative for large
    /// quantiles).
    pub fn quantile_1d(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(MeasureError::ProbabilityOutOfRange { p });
        }
        let mut sweep = QuantileSweep::new(self)?;
        sweep.advance(p)
    }
}

/// Integrate `f` over `[a, b]` piecewise, splitting at ±[`FEATURE_SPLIT`].
///
/// Densities here have their core near the origin: after the split, every
/// piece either holds the core inside its forced-subdivision panels or is a
/// monotone tail whose largest values sit at an endpoint. Both shapes are
/// visible to error-driven refinement no matter how wide the piece, whereas
/// a single panel spanning ~10^18 with a unit-scale interior core would look
/// identically zero at every initial node.
pub(crate) fn piecewise_1d<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> quad::QuadResult {
    let mut pts = alloc::vec![a];
    for c in [-FEATURE_SPLIT, FEATURE_SPLIT] {
        if a < c && c < b {
            pts.push(c);
        }
    }
    pts.push(b);
    let tol = abs_tol / (pts.len() - 1) as f64;
    let mut value = 0.0;
    let mut error_estimate = 0.0;
    for w in pts.windows(2) {
        let r = quad::integrate_with(f, w[0], w[1], tol, CDF_MIN_DEPTH, CDF_MAX_SPLITS);
        value += r.value;
        error_estimate += r.error_estimate;
    }
    quad::QuadResult { value, error_estimate }
}

/// Incremental quantile evaluation for a fixed 1D model.
///
/// Holds the last `(x, F(x))` pair and advances to any larger probability by
/// integrating only over `[x, x']`. Walking an increasing probability grid
/// costs one pass over the support instead of one full CDF per grid point.
pub(crate) struct QuantileSweep<'a> {
    model: &'a DensityModel,
    hi: f64,
    x: f64,
    p: f64,
}

impl<'a> QuantileSweep<'a> {
    pub(crate) fn new(model: &'a DensityModel) -> Result<Self> {
        let (lo, hi) = model.support_1d()?;
        Ok(Self { model, hi, x: lo, p: 0.0 })
    }

    fn density(&self, x: f64) -> f64 {
        math::exp(self.model.raw_log_density(&[x]) - self.model.log_z.unwrap_or(0.0))
    }

    fn increment(&self, a: f64, b: f64) -> f64 {
        self.model.integrate_density_1d(a, b, SWEEP_STEP_TOL).value
    }

    /// `F(x)` for nondecreasing abscissae: accumulates the density integral
    /// from the previous call's position, so walking an increasing grid
    /// costs one pass over the support.
    pub(crate) fn cdf_to(&mut self, x: f64) -> Result<f64> {
        if x < self.x {
            if self.p == 0.0 {
                return Ok(0.0); // still below the support
            }
            return Err(MeasureError::InvalidParameter(
                "cdf sweep abscissae must be nondecreasing",
            ));
        }
        let upper = x.min(self.hi);
        if upper > self.x {
            self.p += self.model.integrate_density_1d(self.x, upper, SWEEP_STEP_TOL).value;
            self.x = upper;
        }
        Ok(self.p.clamp(0.0, 1.0))
    }

    /// Smallest `x` with `F(x) = target`. Targets must be nondecreasing
    /// across calls on the same sweep.
    pub(crate) fn advance(&mut self, target: f64) -> Result<f64> {
        if !(target > 0.0 && target < 1.0) {
            return Err(MeasureError::ProbabilityOutOfRange { p: target });
        }
        if target < self.p {
            return Err(MeasureError::InvalidParameter(
                "quantile sweep targets must be nondecreasing",
            ));
        }
        let mut b_lo = self.x;
        let mut p_lo = self.p;
        let mut b_hi = self.hi;
        for _ in 0..200 {
            if (target - p_lo).abs() <= SWEEP_P_TOL {
                break;
            }
            // Newton step from the left bracket end, clipped into the
            // bracket; midpoint bisection when Newton is unusable.
            let fx = self.density(b_lo);
            let newton = if fx > 1e-300 { b_lo + (target - p_lo) / fx } else { f64::INFINITY };
            let inside = newton > b_lo && newton < b_hi;
            let x_next = if inside { newton } else { b_lo + 0.5 * (b_hi - b_lo) };
            let p_next = p_lo + self.increment(b_lo, x_next);
            if p_next <= target {
                b_lo = x_next;
                p_lo = p_next;
            } else {
                b_hi = x_next;
            }
            if b_hi - b_lo <= QUANTILE_X_TOL * b_lo.abs().max(1.0) {
                break;
            }
        }
        self.x = b_lo;
        self.p = p_lo;
        Ok(b_lo)
    }
}

/// A Monte Carlo estimate with its statistical uncertainty and full
/// reproducibility record.
#[derive(Clone, Debug, PartialEq)]
pub struct MCEstimate {
    /// Point estimate.
    pub value: f64,
    /// Standard error of the estimate (≥ 0).
    pub stderr: f64,
    /// Number of samples used.
    pub n: usize,
    /// Seed that reproduces the estimate exactly.
    pub seed: u64,
    /// Present when the samples came from the Metropolis chain; records the
    /// sampler settings and realized acceptance rate.
    pub sampler: Option<RwmDiagnostics>,
}

/// Random-walk Metropolis settings and diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwmDiagnostics {
    /// Per-coordinate proposal standard deviation (2.4·scale/√d).
    pub step: f64,
    /// Discarded initial steps.
    pub burn_in: usize,
    /// Steps per retained draw.
    pub thinning: usize,
    /// Fraction of accepted proposals after burn-in.
    pub acceptance_rate: f64,
}

impl DensityModel {
    /// Draw `n` points: i.i.d. for the closed-form families, random-walk
    /// Metropolis for custom models. Deterministic given `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        Ok(self.sample_with_diagnostics(n, seed)?.0)
    }

    /// [`Self::sample`], also returning Metropolis diagnostics when the
    /// custom path ran.
    pub fn sample_with_diagnostics(
        &self,
        n: usize,
        seed: u64,
    ) -> Result<(Vec<Vec<f64>>, Option<RwmDiagnostics>)> {
        let mut out = Vec::with_capacity(n);
        let diag = self.sample_for_each(n, seed, |x| out.push(x.to_vec()))?;
        Ok((out, diag))
    }

    /// Streaming sampler: calls `visit` once per draw with a borrowed point.
    /// The backbone of every Monte Carlo estimator in the crate (no per-point
    /// allocation). Returns Metropolis diagnostics for custom models.
    pub fn sample_for_each(
        &self,
        n: usize,
        seed: u64,
        mut visit: impl FnMut(&[f64]),
    ) -> Result<Option<RwmDiagnostics>> {
        if n == 0 {
            return Err(MeasureError::InvalidParameter("sample count must be ≥ 1"));
        }
        match &self.family {
            Family::Custom { log_density, .. } => {
                let scale =
                    self.params.proposal_scale.ok_or(MeasureError::MissingProposalScale)?;
                Ok(Some(self.rwm_chain(log_density, scale, n, seed, &mut visit)))
            }
            _ => {
                let chunks = n.div_ceil(CHUNK_LEN);
                let mut x = vec![0.0; self.dim];
                for c in 0..chunks {
                    let mut rng = chunk_rng(seed, c as u64);
                    let len = CHUNK_LEN.min(n - c * CHUNK_LEN);
                    for _ in 0..len {
                        self.draw_direct(&mut rng, &mut x);
                        visit(&x);
                    }
                }
                Ok(None)
            }
        }
    }

    fn draw_direct(&self, rng: &mut rand_chacha::ChaCha8Rng, x: &mut [f64]) {
        match &self.family {
            Family::Gaussian { mean, var } => {
                for i in 0..x.len() {
                    let z: f64 = StandardNormal.sample(rng);
                    x[i] = mean[i] + math::sqrt(var[i]) * z;
                }
            }
            Family::PolyV { q, .. } => {
                // If Z ~ N(0, I_d) and S ~ χ²_{d(q−1)} then Z/√S has density
                // ∝ (1+|x|²)^{-qd/2} (scaled multivariate Student law).
                let dof = self.dim as f64 * (q - 1.0);
                let chi2 = ChiSquared::new(dof).expect("dof > 0 by construction");
                for v in x.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *v = z;
                }
                let s: f64 = chi2.sample(rng);
                let inv = 1.0 / math::sqrt(s);
                for v in x.iter_mut() {
                    *v *= inv;
                }
            }
            Family::Uniform { lo, hi } => {
                for i in 0..x.len() {
                    let u: f64 = rng.random();
                    x[i] = lo[i] + (hi[i] - lo[i]) * u;
                }
            }
            Family::Custom { .. } => unreachable!("custom models sample via the Metropolis path"),
        }
    }

    fn rwm_chain(
        &self,
        log_density: &DynLogDensity,
        scale: f64,
        n: usize,
        seed: u64,
        visit: &mut impl FnMut(&[f64]),
    ) -> RwmDiagnostics {
        let d = self.dim;
        let step = 2.4 * scale / math::sqrt(d as f64);
        let mut rng = chunk_rng(seed, 0);
        let mut x = vec![0.0; d];
        let mut lp = log_density(&x);
        let mut proposal = vec![0.0; d];
        let mut accepted = 0usize;
        let mut counted = 0usize;
        let total_steps = RWM_BURN_IN + n * RWM_THINNING;
        for t in 0..total_steps {
            for i in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                proposal[i] = x[i] + step * z;
            }
            let lp_new = log_density(&proposal);
            let u: f64 = rng.random();
            let accept = math::ln(u.max(f64::MIN_POSITIVE)) < lp_new - lp;
            if accept {
                core::mem::swap(&mut x, &mut proposal);
                lp = lp_new;
            }
            if t >= RWM_BURN_IN {
                counted += 1;
                accepted += usize::from(accept);
                if (t - RWM_BURN_IN + 1).is_multiple_of(RWM_THINNING) {
                    visit(&x);
                }
            }
        }
        RwmDiagnostics {
            step,
            burn_in: RWM_BURN_IN,
            thinning: RWM_THINNING,
            acceptance_rate: accepted as f64 / counted.max(1) as f64,
        }
    }
}

/// Monte Carlo estimate of `∫ |z| dν` (the moment constant `M` in the
/// concentration growth bound).
pub fn mean_abs_moment(model: &DensityModel, n: usize, seed: u64) -> Result<MCEstimate> {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let diag = model.sample_for_each(n, seed, |x| {
        let r = math::norm(x);
        sum += r;
        sum_sq += r * r;
    })?;
    let mean = sum / n as f64;
    let var = if n > 1 { ((sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0) } else { 0.0 };
    Ok(MCEstimate { value: mean, stderr: math::sqrt(var / n as f64), n, seed, sampler: diag })
}

/// Report from [`verify_log_grad_decay`].
#[derive(Clone, Debug)]
pub struct DecayReport {
    /// The declared decay constant being tested.
    pub declared_a: f64,
    /// max over the grid of `|∇ log V(x)|·(1+|x|)`.
    pub worst_ratio: f64,
    /// Grid point achieving the worst ratio.
    pub worst_point: Option<Vec<f64>>,
    /// Points where the gradient is undefined (support boundary etc.).
    pub domain_violations: Vec<Vec<f64>>,
    /// `worst_ratio ≤ declared_a` and no domain violations.
    pub pass: bool,
}

/// Check the hypothesis `|∇ log V(x)| ≤ A·(1+|x|)^{-1}` on a grid: returns
/// the worst observed ratio `|∇ log V(x)|·(1+|x|)` and pass/fail against `a`.
pub fn verify_log_grad_decay(
    model: &DensityModel,
    a: f64,
    grid: &[Vec<f64>],
) -> Result<DecayReport> {
    if grid.is_empty() {
        return Err(MeasureError::InvalidParameter("decay-check grid must be nonempty"));
    }
    let mut worst_ratio = 0.0;
    let mut worst_point = None;
    let mut domain_violations = Vec::new();
    for x in grid {
        match model.grad_log_v(x) {
            Ok(g) => {
                let ratio = math::norm(&g) * (1.0 + math::norm(x));
                if ratio > worst_ratio {
                    worst_ratio = ratio;
                    worst_point = Some(x.clone());
                }
            }
            Err(MeasureError::GradientUndefined) => domain_violations.push(x.clone()),
            Err(e) => return Err(e),
        }
    }
    let pass = worst_ratio <= a && domain_violations.is_empty();
    Ok(DecayReport { declared_a: a, worst_ratio, worst_point, domain_violations, pass })
}

/// Log-spaced radial grid out to `r_max`: every signed axis direction plus
/// the two diagonal directions, at `per_direction` radii from 1e-3 to
/// `r_max`. The standard input for hypothesis checks like
/// [`verify_log_grad_decay`].
pub fn standard_radial_grid(dim: usize, r_max: f64, per_direction: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && per_direction >= 2 && r_max > 1e-3);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        dirs.push(e.clone());
        e[i] = -1.0;
        dirs.push(e);
    }
    let diag = 1.0 / math::sqrt(dim as f64);
    dirs.push(vec![diag; dim]);
    dirs.push(vec![-diag; dim]);
    let (log_lo, log_hi) = (math::ln(1e-3), math::ln(r_max));
    let mut grid = Vec::with_capacity(dirs.len() * per_direction);
    for dir in &dirs {
        for k in 0..per_direction {
            let t = k as f64 / (per_direction - 1) as f64;
            let r = math::exp(log_lo + t * (log_hi - log_lo));
            grid.push(dir.iter().map(|&c| c * r).collect());
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use core::f64::consts::PI;

    fn laplace_model() -> DensityModel {
        DensityModel::custom(
            1,
            Box::new(|x: &[f64]| -x[0].abs() - math::ln(2.0)),
            None,
            Some(2.0),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_sample_mean_obeys_the_law_of_large_numbers() {
        let model = DensityModel::standard_gaussian(3);
        let n = 100_000;
        let pts = model.sample(n, 11).unwrap();
        let tol = 4.0 / math::sqrt(n as f64);
        for k in 0..3 {
            let mean: f64 = pts.iter().map(|p| p[k]).sum::<f64>() / n as f64;
            assert!(mean.abs() < tol, "coordinate {k} mean {mean} exceeds {tol}");
        }
    }

    #[test]
    fn uniform_sample_median_is_centered() {
        let model = DensityModel::uniform_box(vec![0.0], vec![1.0]).unwrap();
        let n = 10_000;
        let pts = model.sample(n, 5).unwrap();
        let frac = pts.iter().filter(|p| p[0] <= 0.5).count() as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "empirical CDF at 0.5 was {frac}");
    }

    #[test]
    fn poly_v_sampler_tail_matches_quadrature() {
        // P(|X| > 2) for density (1+x²)^{-3/2}/2: closed form 1 − 2/√5.
        let model = DensityModel::poly_v(1.0, 3.0, 1).unwrap();
        let oracle = 1.0 - 2.0 / math::sqrt(5.0);
        let by_quadrature = 1.0 - (model.cdf_1d(2.0).unwrap() - model.cdf_1d(-2.0).unwrap());
        assert_abs_diff_eq!(by_quadrature, oracle, epsilon = 1e-9);
        let n = 100_000;
        let pts = model.sample(n, 99).unwrap();
        let p_hat = pts.iter().filter(|p| p[0].abs() > 2.0).count() as f64 / n as f64;
        let stderr = math::sqrt(p_hat * (1.0 - p_hat) / n as f64);
        assert!(
            (p_hat - oracle).abs() <= 3.0 * stderr,
            "sampler tail {p_hat} vs quadrature {oracle} (3σ = {})",
            3.0 * stderr
        );
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let model = DensityModel::poly_v(1.0, 2.0, 2).unwrap();
        let a = model.sample(100, 7).unwrap();
        let b = model.sample(100, 7).unwrap();
        let c = model.sample(100, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_cdf_at_the_mean_is_one_half() {
        let model = DensityModel::standard_gaussian(1);
        assert_abs_diff_eq!(model.cdf_1d(0.0).unwrap(), 0.5, epsilon = 1e-9);
        // And against the closed form elsewhere.
        assert_abs_diff_eq!(model.cdf_1d(1.0).unwrap(), math::normal_cdf(1.0), epsilon = 1e-9);
    }

    #[test]
    fn uniform_quantile_is_the_identity_on_probabilities() {
        let model = DensityModel::uniform_box(vec![0.0], vec![1.0]).unwrap();
        assert_abs_diff_eq!(model.quantile_1d(0.25).unwrap(), 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(model.quantile_1d(0.5).unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn cauchy_cdf_matches_the_arctangent_oracle() {
        // PolyV(·, q=2, d=1) is the standard Cauchy law: F(1) = 3/4.
        let model = DensityModel::poly_v(1.0, 2.0, 1).unwrap();
        let f1 = model.cdf_1d(1.0).unwrap();
        assert_abs_diff_eq!(f1, 0.75, epsilon = 1e-9);
        assert_abs_diff_eq!(
            model.cdf_1d(-3.0).unwrap(),
            libm::atan(-3.0) / PI + 0.5,
            epsilon = 1e-9
        );
    }

    #[test]
    fn quantile_cdf_round_trip_within_contract() {
        let models = [
            DensityModel::standard_gaussian(1),
            DensityModel::poly_v(1.0, 2.0, 1).unwrap(),
            DensityModel::poly_v(1.0, 1.5, 1).unwrap(),
            DensityModel::uniform_box(vec![-1.0], vec![2.0]).unwrap(),
        ];
        for model in &models {
            for k in 0..=20 {
                let x = -3.0 + 0.3 * k as f64;
                let p = model.cdf_1d(x).unwrap();
                if p <= 1e-9 || p >= 1.0 - 1e-9 {
                    continue; // outside the quantile's resolvable range
                }
                let back = model.quantile_1d(p).unwrap();
                // Uniform support is [-1, 2]: x outside maps to the edge.
                let x_eff = match model.family_tag() {
                    FamilyTag::Uniform => x.clamp(-1.0, 2.0),
                    _ => x,
                };
                assert!(
                    (back - x_eff).abs() <= 1e-6,
                    "round trip {back} vs {x_eff} for {:?}",
                    model.family_tag()
                );
            }
        }
    }

    #[test]
    fn quantile_rejects_probabilities_outside_the_open_interval() {
        let model = DensityModel::standard_gaussian(1);
        assert!(matches!(
            model.quantile_1d(0.0),
            Err(MeasureError::ProbabilityOutOfRange { .. })
        ));
        assert!(matches!(
            model.quantile_1d(1.0),
            Err(MeasureError::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn density_normalizes_to_one_over_the_truncated_support() {
        for q in [1.5, 2.0, 3.0] {
            let model = DensityModel::poly_v(1.0, q, 1).unwrap();
            let (_, hi) = model.support_1d().unwrap();
            let total = model.cdf_1d(hi).unwrap();
            assert!(
                (total - 1.0).abs() <= 1e-6,
                "PolyV(q={q}) total mass {total} off by {:+e}",
                total - 1.0
            );
        }
    }

    #[test]
    fn poly_v_rejects_non_integrable_exponents() {
        assert!(matches!(
            DensityModel::poly_v(1.0, 1.0, 1),
            Err(MeasureError::InvalidParameter(_))
        ));
        assert!(matches!(
            DensityModel::poly_v(1.0, 0.5, 2),
            Err(MeasureError::InvalidParameter(_))
        ));
    }

    #[test]
    fn degenerate_gaussian_is_a_samplable_point_mass() {
        let model = DensityModel::gaussian(vec![1.5, -2.0], vec![0.0, 0.0]).unwrap();
        let pts = model.sample(10, 3).unwrap();
        assert!(pts.iter().all(|p| p == &vec![1.5, -2.0]));
        assert!(matches!(
            model.log_density(&[0.0, 0.0]),
            Err(MeasureError::DensityUnavailable(_))
        ));
        let m = mean_abs_moment(&model, 100, 4).unwrap();
        assert_eq!(m.value, math::norm(&[1.5, -2.0]));
        assert_eq!(m.stderr, 0.0);
    }

    #[test]
    fn mean_abs_moment_matches_half_normal_and_chi_means() {
        // d=1: E|Z| = √(2/π); d=2: E|Z| = √(π/2).
        let n = 200_000;
        let m1 = mean_abs_moment(&DensityModel::standard_gaussian(1), n, 21).unwrap();
        let oracle1 = math::sqrt(2.0 / PI);
        assert!(
            (m1.value - oracle1).abs() <= 3.0 * m1.stderr,
            "d=1 moment {} vs {oracle1} (stderr {})",
            m1.value,
            m1.stderr
        );
        let m2 = mean_abs_moment(&DensityModel::standard_gaussian(2), n, 22).unwrap();
        let oracle2 = math::sqrt(PI / 2.0);
        assert!(
            (m2.value - oracle2).abs() <= 3.0 * m2.stderr,
            "d=2 moment {} vs {oracle2} (stderr {})",
            m2.value,
            m2.stderr
        );
    }

    #[test]
    fn analytic_gradients_agree_with_finite_differences() {
        // The custom family's finite-difference path is the reference.
        let polyv = DensityModel::poly_v(1.0, 2.5, 2).unwrap();
        let fd_twin = DensityModel::custom(
            2,
            Box::new(|x: &[f64]| -2.5 * math::ln_1p(math::dot(x, x))),
            None,
            Some(1.0),
        )
        .unwrap();
        let gauss = DensityModel::gaussian(vec![0.5, -1.0], vec![2.0, 0.5]).unwrap();
        let fd_gauss = DensityModel::custom(
            2,
            Box::new(|x: &[f64]| {
                -0.5 * ((x[0] - 0.5) * (x[0] - 0.5) / 2.0 + (x[1] + 1.0) * (x[1] + 1.0) / 0.5)
            }),
            None,
            Some(1.0),
        )
        .unwrap();
        for (exact, fd) in [(&polyv, &fd_twin), (&gauss, &fd_gauss)] {
            for pt in standard_radial_grid(2, 10.0, 8) {
                let g = exact.grad_log_density(&pt).unwrap();
                if math::norm(&g) < 1e-3 {
                    continue; // relative comparison meaningless near zero
                }
                let g_fd = fd.grad_log_density(&pt).unwrap();
                let rel = math::dist(&g, &g_fd) / math::norm(&g);
                assert!(rel <= 1e-5, "gradient mismatch {rel} at {pt:?}");
            }
        }
    }

    #[test]
    fn log_grad_decay_certifies_poly_v_and_rejects_gaussian() {
        let grid = standard_radial_grid(1, 100.0, 48);
        let polyv = DensityModel::poly_v(1.0, 2.0, 1).unwrap();
        let report = verify_log_grad_decay(&polyv, 4.0, &grid).unwrap();
        assert!(report.pass, "PolyV(q=2) must satisfy A = 2q = 4, got {}", report.worst_ratio);
        // |∇log V|(1+|x|) = q|x|(1+|x|)/(1+|x|²) peaks at q(1+√2)/2 ≈ 1.21q
        // (at |x| = 1+√2), so A = q must fail while A = 2q holds with slack.
        let tight = verify_log_grad_decay(&polyv, 2.0, &grid).unwrap();
        assert!(!tight.pass);

        let gauss = DensityModel::standard_gaussian(1);
        let report = verify_log_grad_decay(&gauss, 1000.0, &grid).unwrap();
        assert!(!report.pass, "gaussian ratio grows like |x|², any finite A must fail");
    }

    #[test]
    fn uniform_boundary_is_a_domain_violation() {
        let model = DensityModel::uniform_box(vec![0.0], vec![1.0]).unwrap();
        let grid = vec![vec![0.5], vec![1.0]];
        let report = verify_log_grad_decay(&model, 1.0, &grid).unwrap();
        assert!(!report.pass);
        assert_eq!(report.domain_violations, vec![vec![1.0]]);
    }

    #[test]
    fn custom_model_without_proposal_scale_cannot_sample() {
        let model =
            DensityModel::custom(1, Box::new(|x: &[f64]| -x[0] * x[0]), None, None).unwrap();
        assert!(matches!(model.sample(10, 0), Err(MeasureError::MissingProposalScale)));
    }

    #[test]
    fn laplace_custom_model_normalizes_and_samples() {
        let model = laplace_model();
        // The declared log-density is already normalized, so log Z ≈ 0.
        assert_abs_diff_eq!(model.log_norm().unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(model.cdf_1d(0.0).unwrap(), 0.5, epsilon = 1e-9);
        // F(1) = 1 − e^{-1}/2 for the standard Laplace law.
        assert_abs_diff_eq!(model.cdf_1d(1.0).unwrap(), 1.0 - 0.5 * math::exp(-1.0), epsilon = 1e-9);

        let (pts, diag) = model.sample_with_diagnostics(20_000, 17).unwrap();
        let diag = diag.expect("custom sampling must record Metropolis diagnostics");
        assert!(
            diag.acceptance_rate > 0.15 && diag.acceptance_rate < 0.85,
            "acceptance rate {} outside sane band",
            diag.acceptance_rate
        );
        assert_eq!(diag.burn_in, RWM_BURN_IN);
        let mean: f64 = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        // Var = 2, chain is autocorrelated: allow a generous band.
        assert!(mean.abs() < 0.1, "Laplace chain mean {mean} far from 0");
    }

    #[test]
    fn structural_params_are_auto_derived() {
        let model = DensityModel::poly_v(1.0, 2.0, 1).unwrap();
        let p = model.params();
        assert_eq!(p.log_grad_decay_a, Some(4.0));
        // Effective κ for q=2, d=1 is Z = π (Cauchy normalization).
        let (l, q) = p.poly_growth_lq.unwrap();
        assert_relative_eq!(l, PI, max_relative = 1e-12);
        assert_eq!(q, 2.0);
        assert_relative_eq!(p.v0.unwrap(), PI, max_relative = 1e-12);

        let gauss = DensityModel::standard_gaussian(3);
        assert_eq!(gauss.params().subgaussian_sigma2, Some(1.0));
        assert_relative_eq!(
            gauss.params().v0.unwrap(),
            math::sqrt(2.0 * PI),
            max_relative = 1e-12
        );
    }

    #[test]
    fn quantile_sweep_handles_heavy_tails() {
        // Cauchy quantiles: F^{-1}(p) = tan(π(p − 1/2)). Quantile error
        // propagates as Δx ≈ Δp/ρ(x), so the acceptable abscissa error
        // scales with the inverse density: deep in the tail (p = 0.9999,
        // x ≈ 3183, ρ ≈ 3e-8) a CDF drift of 1e-9 is worth Δx ≈ 0.03.
        let model = DensityModel::poly_v(1.0, 2.0, 1).unwrap();
        for p in [0.2, 0.75, 0.99, 0.9999] {
            let x = model.quantile_1d(p).unwrap();
            let oracle = libm::tan(PI * (p - 0.5));
            let density = 1.0 / (PI * (1.0 + oracle * oracle));
            let eps = 2e-9 / density + 1e-6 * oracle.abs();
            assert_abs_diff_eq!(x, oracle, epsilon = eps);
        }
    }
}
