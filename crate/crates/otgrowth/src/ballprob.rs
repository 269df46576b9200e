//! Analytic lower bounds on source-measure ball probabilities — the
//! quantity `μ(B(x + 2λu, λ))` that the growth theorems feed through a tail
//! inverse — plus Monte Carlo and quadrature estimators used to validate
//! the bounds.
//!
//! Two regimes are covered:
//!
//! * **Polynomial growth** (`V ≤ L(1+|x|)^q`): the ball `B(x+4|x|u, 2|x|)`
//!   scales with `|x|` and its measure decays polynomially —
//!   [`ball_lower_poly`].
//! * **Log-gradient decay** (`|∇ log V| ≤ A(1+|x|)^{-1}`): the fixed ball
//!   `B(x, 1/2)` compares to the ball at the origin —
//!   [`ball_lower_loggrad`], seeded by [`mu_b0_lower`].
//!
//! All bounds here are deliberately conservative: their role is to be
//! *certified* lower bounds, and every one is checked against an estimator
//! (`bound ≤ estimate + 3·stderr`) before use.

use alloc::vec::Vec;

use crate::math;
use crate::measures::{DensityModel, MCEstimate, MeasureError};
use crate::quad;

/// Tolerance on `|u| − 1` for declared unit vectors.
const UNIT_NORM_TOL: f64 = 1e-9;

/// Errors from ball-probability bounds and estimators.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BallProbError {
    /// A bound or estimator received a structurally invalid argument.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    /// A declared unit vector is not unit within 1e-9.
    #[error("direction must be a unit vector: |u| = {norm} differs from 1 beyond 1e-9")]
    NonUnitDirection { norm: f64 },
    /// `μ(B(0,1/2))` lower bounds must be probabilities.
    #[error("muB0 = {value} outside (0, 1]")]
    MuB0OutOfRange { value: f64 },
    /// Quadrature ball probabilities are implemented for d ≤ 3 only.
    #[error("quadrature ball probability supports d <= 3, got d = {dim}")]
    DimensionTooHigh { dim: usize },
    /// Point/direction dimensions disagree with the declared d.
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Sampler or density evaluation failed underneath an estimator.
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

type Result<T> = core::result::Result<T, BallProbError>;

/// A Euclidean ball `B(center, radius)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSpec {
    /// Ball center.
    pub center: Vec<f64>,
    /// Ball radius (> 0).
    pub radius: f64,
}

impl BallSpec {
    /// Validated constructor: radius must be strictly positive.
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(BallProbError::InvalidParameter("ball center must be nonempty"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(BallProbError::InvalidParameter("ball radius must be positive"));
        }
        Ok(Self { center, radius })
    }

    /// Closed-ball membership.
    pub fn contains(&self, z: &[f64]) -> bool {
        math::dist(z, &self.center) <= self.radius
    }
}

fn check_unit(u: &[f64]) -> Result<()> {
    let n = math::norm(u);
    if (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(BallProbError::NonUnitDirection { norm: n });
    }
    Ok(())
}

/// Lower bound on `μ(B(x + 4|x|u, 2|x|))` for sources with polynomial
/// growth `V(z) ≤ L(1+|z|)^q`:
///
/// * `|x| ≥ 1`: `α·(1+|x|)^{−(q−1)d}` with
///   `α = L^{−d}·7^{−qd}·2^{−(q−1)d}·ω_d`. After rescaling by `|x|` the
///   ball lands in the annulus `B(0,7)∖B(0,1)`, where `1+|z| ≤ 7(1+|x|)/…`
///   bookkeeping yields the stated constant.
/// * `|x| < 1`: the scaling argument degenerates, so the bound falls back
///   to (inf density over `B(0,7)`) × (ball volume):
///   `v_inf_b07·ω_d·(2|x|)^d` — zero at `x = 0`, where the ball vanishes
///   and callers must switch to a fixed-radius policy.
///
/// `v_inf_b07` must be a certified positive lower bound on the *density*
/// `V^{−d}` over `B(0,7)`, supplied from the model (for radially decreasing
/// families it is the density at radius 7).
pub fn ball_lower_poly(
    l: f64,
    q: f64,
    d: usize,
    x: &[f64],
    u: &[f64],
    v_inf_b07: f64,
) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(BallProbError::InvalidParameter("polynomial growth requires L > 0"));
    }
    if !(q > 1.0) || !q.is_finite() {
        return Err(BallProbError::InvalidParameter("polynomial growth requires q > 1"));
    }
    if d == 0 || x.len() != d {
        return Err(BallProbError::DimensionMismatch { expected: d, got: x.len() });
    }
    if u.len() != d {
        return Err(BallProbError::DimensionMismatch { expected: d, got: u.len() });
    }
    check_unit(u)?;
    if !(v_inf_b07 > 0.0) {
        return Err(BallProbError::InvalidParameter(
            "density lower bound over B(0,7) must be positive",
        ));
    }
    let df = d as f64;
    let r = math::norm(x);
    let omega_d = math::exp(math::ln_unit_ball_volume(d));
    if r < 1.0 {
        return Ok(v_inf_b07 * omega_d * math::pow(2.0 * r, df));
    }
    let ln_alpha = -df * math::ln(l) - q * df * math::ln(7.0)
        - (q - 1.0) * df * math::ln(2.0)
        + math::ln_unit_ball_volume(d);
    Ok(math::exp(ln_alpha - (q - 1.0) * df * math::ln_1p(r)))
}

/// Lower bound on `μ(B(x, 1/2))` for sources with log-gradient decay
/// `|∇ log V(z)| ≤ A(1+|z|)^{−1}`:
///
/// `exp(−3Ad/2)·(1+2|x|)^{−2Ad}·muB0`,
///
/// where `muB0` is a certified lower bound on `μ(B(0, 1/2))` (from
/// [`mu_b0_lower`] or a Monte Carlo estimate). `A = 0` returns `muB0`
/// exactly: with no gradient the density ratio between the two balls is 1.
pub fn ball_lower_loggrad(a: f64, d: usize, x: &[f64], mu_b0: f64) -> Result<f64> {
    if !(mu_b0 > 0.0 && mu_b0 <= 1.0) {
        return Err(BallProbError::MuB0OutOfRange { value: mu_b0 });
    }
    Ok(math::exp(ball_lower_loggrad_ln(a, d, x, 0.0)?) * mu_b0)
}

/// Log of [`ball_lower_loggrad`]: `−3Ad/2 − 2Ad·log(1+2|x|) + ln muB0`,
/// with the ball mass supplied as `ln muB0 ≤ 0`. For bound assemblies at
/// large `A·d·log|x|` the probability itself underflows `f64`; its
/// logarithm stays an ordinary number.
pub fn ball_lower_loggrad_ln(a: f64, d: usize, x: &[f64], ln_mu_b0: f64) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(BallProbError::InvalidParameter("log-gradient decay requires A >= 0"));
    }
    if d == 0 || x.len() != d {
        return Err(BallProbError::DimensionMismatch { expected: d, got: x.len() });
    }
    if !(ln_mu_b0 <= 0.0) || !ln_mu_b0.is_finite() {
        return Err(BallProbError::InvalidParameter(
            "log ball mass must satisfy ln muB0 <= 0 and finite",
        ));
    }
    let df = d as f64;
    let r = math::norm(x);
    Ok(-1.5 * a * df - 2.0 * a * df * math::ln_1p(2.0 * r) + ln_mu_b0)
}

/// Which [`mu_b0_lower`] variant a formula assembly uses.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum MuB0Variant {
    /// The constant exactly as printed in the growth theorem's proof.
    #[default]
    Published,
    /// The direct assembly (strictly larger, i.e. a better lower bound).
    Sharp,
}

/// Both lower-bound variants for `μ(B(0, 1/2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuB0Bounds {
    /// `exp(−d·log V(0) − d(A + 1/2 + log 2))·ω_d` — the constant the
    /// printed theorem uses.
    pub published: f64,
    /// `exp(−d·log V(0) − d(A/2 + log 2))·ω_d` — from
    /// `density ≥ V(0)^{−d}·e^{−Ad/2}` on `B(0,1/2)` (since `log V` is
    /// A-Lipschitz there) times the volume `ω_d·2^{−d}`. Always ≥ the
    /// published variant.
    pub sharp: f64,
}

impl MuB0Bounds {
    /// Select a variant.
    pub fn select(&self, variant: MuB0Variant) -> f64 {
        match variant {
            MuB0Variant::Published => self.published,
            MuB0Variant::Sharp => self.sharp,
        }
    }
}

/// Analytic lower bounds on `μ(B(0, 1/2))` from `V(0)` and the log-gradient
/// decay constant `A`, both clamped to 1 (they bound a probability).
pub fn mu_b0_lower(a: f64, v0: f64, d: usize) -> Result<MuB0Bounds> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(BallProbError::InvalidParameter("log-gradient decay requires A >= 0"));
    }
    if !(v0 > 0.0) || !v0.is_finite() {
        return Err(BallProbError::InvalidParameter("muB0 lower bound requires V(0) > 0"));
    }
    if d == 0 {
        return Err(BallProbError::InvalidParameter("dimension must be >= 1"));
    }
    let df = d as f64;
    let ln_omega = math::ln_unit_ball_volume(d);
    let ln2 = math::ln(2.0);
    let published = math::exp(-df * math::ln(v0) - df * (a + 0.5 + ln2) + ln_omega).min(1.0);
    let sharp = math::exp(-df * math::ln(v0) - df * (0.5 * a + ln2) + ln_omega).min(1.0);
    Ok(MuB0Bounds { published, sharp })
}

/// Monte Carlo estimate of `μ(ball)`: the fraction of `n` samples inside,
/// with binomial standard error. Deterministic given the seed.
pub fn ball_prob_mc(
    model: &DensityModel,
    ball: &BallSpec,
    n: usize,
    seed: u64,
) -> Result<MCEstimate> {
    if ball.center.len() != model.dim() {
        return Err(BallProbError::DimensionMismatch {
            expected: model.dim(),
            got: ball.center.len(),
        });
    }
    let mut hits = 0usize;
    let sampler = model.sample_for_each(n, seed, |z| {
        if ball.contains(z) {
            hits += 1;
        }
    })?;
    let p = hits as f64 / n as f64;
    let stderr = math::sqrt(p * (1.0 - p) / n as f64);
    Ok(MCEstimate { value: p, stderr, n, seed, sampler })
}

/// Deterministic `μ(ball)` by adaptive quadrature in ball-adapted
/// coordinates (interval / polar / spherical), for models with an available
/// density and `d ≤ 3`. Preferred over Monte Carlo when the density is
/// cheap: no statistical error term in downstream assertions.
pub fn ball_prob_quadrature(model: &DensityModel, ball: &BallSpec) -> Result<f64> {
    let d = model.dim();
    if ball.center.len() != d {
        return Err(BallProbError::DimensionMismatch { expected: d, got: ball.center.len() });
    }
    // Ball-adapted integrands are smooth and single-scale, so a shallow
    // forced depth suffices and keeps the nested d=3 quadrature affordable.
    fn q<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        quad::integrate_with(f, a, b, tol, 4, 20_000).value
    }
    let value = match d {
        1 => {
            let (lo, hi) = model.support_1d()?;
            let a = (ball.center[0] - ball.radius).max(lo);
            let b = (ball.center[0] + ball.radius).min(hi);
            if a >= b {
                return Ok(0.0);
            }
            let f = |t: f64| model.density(&[t]).unwrap_or(0.0);
            q(&f, a, b, 1e-10)
        }
        2 => {
            // Polar around the center: ∫_0^{2π} ∫_0^R ρ(c + s·e_θ)·s ds dθ.
            let radial = |theta: f64| {
                let (ct, st) = (libm::cos(theta), libm::sin(theta));
                let f = |s: f64| {
                    let z = [ball.center[0] + s * ct, ball.center[1] + s * st];
                    model.density(&z).unwrap_or(0.0) * s
                };
                q(&f, 0.0, ball.radius, 1e-10)
            };
            q(&radial, 0.0, 2.0 * core::f64::consts::PI, 1e-8)
        }
        3 => {
            // Spherical: ∫_0^π sinφ ∫_0^{2π} ∫_0^R ρ(c + s·ω)·s² ds dθ dφ.
            let polar = |phi: f64| {
                let (sp, cp) = (libm::sin(phi), libm::cos(phi));
                let azimuthal = |theta: f64| {
                    let dir = [sp * libm::cos(theta), sp * libm::sin(theta), cp];
                    let f = |s: f64| {
                        let z = [
                            ball.center[0] + s * dir[0],
                            ball.center[1] + s * dir[1],
                            ball.center[2] + s * dir[2],
                        ];
                        model.density(&z).unwrap_or(0.0) * s * s
                    };
                    q(&f, 0.0, ball.radius, 1e-10)
                };
                sp * q(&azimuthal, 0.0, 2.0 * core::f64::consts::PI, 1e-9)
            };
            q(&polar, 0.0, core::f64::consts::PI, 1e-7)
        }
        dim => return Err(BallProbError::DimensionTooHigh { dim }),
    };
    // Density evaluation failures surface as zeros inside the integrand;
    // reject models without densities up front instead.
    model.log_density(&ball.center).map_err(BallProbError::from)?;
    Ok(value.clamp(0.0, 1.0))
}
