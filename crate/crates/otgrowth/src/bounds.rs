//! Evaluable growth bounds `|T(x)| ≤ B(|x|)` for monotone transport maps.
//!
//! This module is the assembly point of the crate: it combines tail
//! functions ([`crate::concentration`]) with small-ball probability lower
//! bounds ([`crate::ballprob`]) into explicit, pointwise-evaluable bounds on
//! how far a monotone map can send a point. Two abstract estimates do all
//! the work:
//!
//! * [`generic_bound`] — from a target tail function `ψ` and one source
//!   ball probability: `max(3r₀, 3ψ⁻¹(μ(B)))`.
//! * [`concentration_bound`] — from a target concentration profile `φ`, a
//!   first-moment bound `M`, and one source ball probability:
//!   `max(M + 3r₀, M + 3φ⁻¹(μ(B)))`.
//!
//! Four concrete bounds instantiate them for standard source/target
//! families: [`subgaussian_growth`], [`exponential_growth`],
//! [`logconcave_growth`], and [`polynomial_growth`]. Each comes in two
//! [`Flavor`]s:
//!
//! * [`Flavor::Published`] evaluates the pre-simplified closed form, with
//!   every constant folded into one display expression. It is the citable
//!   number, but its simplifications are one-directional and can degenerate
//!   (negative radicand, negative log factor) for benign parameters.
//! * [`Flavor::Assembled`] re-derives the bound at evaluation time by
//!   composing [`concentration_bound`] with the ball-probability lower
//!   bounds. Every step is a checked inequality, so this flavor is defined
//!   whenever the hypotheses hold and is what the verification harness
//!   compares against reference transport maps.
//!
//! The two flavors track each other up to bounded constant drift; the tests
//! pin that ratio over `|x| ∈ [1, 10⁶]`.
//!
//! # Ball radius policy
//!
//! The abstract estimates hold for every radius `λ > 0` of the probed ball
//! `B(x + 2λu, λ)`, `u = T(x)/|T(x)|`. The concrete bounds fix:
//!
//! * `λ = 1/2` for subgaussian / exponential / log-concave targets (the
//!   log-gradient ball bound [`ball_lower_loggrad`] is radius-1/2);
//! * `λ = 2|x|` for polynomial densities at `|x| ≥ 1` (the scaling ball
//!   bound [`ball_lower_poly`]), falling back to `λ = 1` for `|x| < 1`
//!   where the scaling ball vanishes.
//!
//! [`GrowthBound::lambda_policy`] reports the policy as metadata.

use thiserror::Error;

use crate::ballprob::{ball_lower_loggrad_ln, mu_b0_lower, BallProbError, MuB0Variant};
use crate::concentration::{
    exponential_profile, polytail_psi, subgaussian_profile, ConcError, ConcentrationProfile,
    TailFunction, TailKind,
};
use crate::math;

/// Errors from bound assembly and evaluation.
#[derive(Debug, Error)]
pub enum BoundsError {
    /// A parameter fails its domain requirement.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    /// A ball probability outside `(0, 1]` cannot be inverted.
    #[error("ball probability {value} is outside (0, 1]")]
    MuBallOutOfRange {
        /// The offending value.
        value: f64,
    },
    /// The pre-simplified closed form is undefined here: its radicand is
    /// negative. The assembled flavor remains available.
    #[error("pre-simplified formula degenerates: radicand {radicand} < 0")]
    FormulaDegenerate {
        /// The negative radicand.
        radicand: f64,
    },
    /// The bound requires a higher dimension (the log-concave bound's
    /// `√(log d)` concentration parameter vanishes at `d = 1`).
    #[error("dimension {d} is below the minimum {min} for this bound")]
    DimensionTooSmall {
        /// Requested dimension.
        d: usize,
        /// Smallest admissible dimension.
        min: usize,
    },
    /// A tail-function or profile operation failed.
    #[error(transparent)]
    Concentration(#[from] ConcError),
    /// A ball-probability operation failed.
    #[error(transparent)]
    BallProb(#[from] BallProbError),
}

type Result<T> = core::result::Result<T, BoundsError>;

/// Volume `ω_d = π^{d/2} / Γ(d/2 + 1)` of the unit ball in dimension `d`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(BoundsError::InvalidParameter("dimension must be >= 1"));
    }
    Ok(math::exp(math::ln_unit_ball_volume(d)))
}

/// `mu_ball ≤ 0` is uninvertible; values slightly above 1 (float drift in
/// compositions, Monte Carlo estimates) clamp to 1.
fn validate_mu_ball(mu_ball: f64) -> Result<f64> {
    if !(mu_ball > 0.0) || !mu_ball.is_finite() {
        return Err(BoundsError::MuBallOutOfRange { value: mu_ball });
    }
    Ok(mu_ball.min(1.0))
}

fn validate_x_norm(x_norm: f64) -> Result<f64> {
    if !(x_norm >= 0.0) || !x_norm.is_finite() {
        return Err(BoundsError::InvalidParameter("|x| must be finite and >= 0"));
    }
    Ok(x_norm)
}

fn validate_source(a: f64, v0: f64, d: usize) -> Result<()> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(BoundsError::InvalidParameter("log-gradient decay requires A >= 0"));
    }
    if !(v0 > 0.0) || !v0.is_finite() {
        return Err(BoundsError::InvalidParameter("source requires V(0) > 0"));
    }
    if d == 0 {
        return Err(BoundsError::InvalidParameter("dimension must be >= 1"));
    }
    Ok(())
}

/// Growth bound from a tail function and one ball probability:
///
/// `max(3r₀, 3ψ⁻¹(mu_ball))`.
///
/// `ψ` bounds the target's norm tail, `mu_ball` lower-bounds the source
/// mass of the probed ball `B(x + 2λu, λ)`; any `λ > 0` is admissible as
/// long as `mu_ball` matches it. `mu_ball` must lie in `(0, 1]`; values
/// above 1 are clamped.
pub fn generic_bound(psi: &TailFunction, mu_ball: f64) -> Result<f64> {
    let s = validate_mu_ball(mu_ball)?;
    let r = psi.invert(s)?;
    Ok((3.0 * psi.r0()).max(3.0 * r))
}

/// Growth bound from a concentration profile, a first-moment bound, and one
/// ball probability:
///
/// `max(M + 3r₀, M + 3φ⁻¹(mu_ball))`.
///
/// Equivalent to [`generic_bound`] with `ψ(r) = φ(r − M)`, written out so
/// the moment bound `M` stays visible in the result's structure.
pub fn concentration_bound(
    profile: &ConcentrationProfile,
    m_moment: f64,
    mu_ball: f64,
) -> Result<f64> {
    if !(m_moment >= 0.0) || !m_moment.is_finite() {
        return Err(BoundsError::InvalidParameter("moment bound must satisfy M >= 0"));
    }
    let s = validate_mu_ball(mu_ball)?;
    let r = profile.invert(s)?;
    Ok((m_moment + 3.0 * profile.r0()).max(m_moment + 3.0 * r))
}

/// [`concentration_bound`] with the ball probability given as `ln mu_ball`,
/// for compositions whose probability underflows `f64` (the bound itself
/// stays ordinary: it depends on the probability only through its
/// logarithm). Values above 0 (probability above 1) are clamped to 0.
pub fn concentration_bound_ln(
    profile: &ConcentrationProfile,
    m_moment: f64,
    ln_mu_ball: f64,
) -> Result<f64> {
    if !(m_moment >= 0.0) || !m_moment.is_finite() {
        return Err(BoundsError::InvalidParameter("moment bound must satisfy M >= 0"));
    }
    if !ln_mu_ball.is_finite() {
        return Err(BoundsError::InvalidParameter(
            "log ball probability must be finite",
        ));
    }
    let r = profile.invert_ln(ln_mu_ball.min(0.0))?;
    Ok((m_moment + 3.0 * profile.r0()).max(m_moment + 3.0 * r))
}

/// Log of the source-side ball probability shared by the `λ = 1/2` bounds:
/// the probed ball is `B(x + u, 1/2)` with `|u| = 1`, so its center norm is
/// at most `|x| + 1`; [`ball_lower_loggrad_ln`] at that worst-case center
/// and the analytic `μ(B(0,1/2))` bound give
///
/// `ln(exp(−3Ad/2)·(3 + 2|x|)^{−2Ad}·muB0)`,
///
/// kept in log form because the probability underflows `f64` once
/// `A·d·log|x|` is a few hundred while the growth bound built from it is
/// still a small number.
fn assembled_mu_ball_ln(a: f64, v0: f64, d: usize, x_norm: f64) -> Result<f64> {
    let mu_b0 = mu_b0_lower(a, v0, d)?.select(MuB0Variant::Published);
    let mut center = alloc::vec![0.0; d];
    center[0] = x_norm + 1.0;
    let ln_s = ball_lower_loggrad_ln(a, d, &center, math::ln(mu_b0))?;
    Ok(ln_s.min(0.0))
}

/// Growth bound for a source with `|∇log V| ≤ A(1+|x|)⁻¹` and a centered
/// `σ²`-subgaussian target.
///
/// * [`Flavor::Published`]:
///   `√d·σ·(3 + 3·√(2A·log2 + 5A − d⁻¹·log ω_d + log V(0) + 2A·log(1+|x|)))`,
///   failing with [`BoundsError::FormulaDegenerate`] when the radicand is
///   negative (e.g. `A = 0`, `V(0) = 1`, `d = 1`, where it is `−log 2`).
/// * [`Flavor::Assembled`]: [`concentration_bound_ln`] with the subgaussian
///   profile, moment bound `M = √d·σ` (coordinate-wise second moments
///   `≤ σ²` summed under Jensen), and the `λ = 1/2` ball probability in
///   log form (the probability underflows `f64` at large `A·d·log|x|`).
pub fn subgaussian_growth(
    a: f64,
    v0: f64,
    sigma2: f64,
    d: usize,
    x_norm: f64,
    flavor: Flavor,
) -> Result<f64> {
    validate_source(a, v0, d)?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(BoundsError::InvalidParameter("subgaussian target requires sigma2 > 0"));
    }
    let x = validate_x_norm(x_norm)?;
    let df = d as f64;
    let sigma = math::sqrt(sigma2);
    match flavor {
        Flavor::Published => {
            let radicand = 2.0 * a * math::ln(2.0) + 5.0 * a - math::ln_unit_ball_volume(d) / df
                + math::ln(v0)
                + 2.0 * a * math::ln_1p(x);
            if radicand < 0.0 {
                return Err(BoundsError::FormulaDegenerate { radicand });
            }
            Ok(math::sqrt(df) * sigma * (3.0 + 3.0 * math::sqrt(radicand)))
        }
        Flavor::Assembled => {
            let profile = subgaussian_profile(sigma2)?;
            let m = math::sqrt(df) * sigma;
            let ln_mu = assembled_mu_ball_ln(a, v0, d, x)?;
            concentration_bound_ln(&profile, m, ln_mu)
        }
    }
}

/// The sharper mid-derivation form of the published subgaussian bound,
/// retained for diagnostics:
///
/// `√d·σ·(1 + 3·√(2A·log2 + 3A − d⁻¹·log muB0 + 2A·log(1+|x|)))`,
///
/// taking the ball mass `muB0 = μ(B(0,1/2))` explicitly instead of folding
/// the analytic lower bound into the constants. The published form inserts
/// [`mu_b0_lower`] (published variant) and then absorbs `+1/2 + log 2` and
/// the leading `1` upward into `5A` and `3`; the two forms bracket the same
/// quantity but are not algebraically equal.
pub fn subgaussian_growth_proof_variant(
    a: f64,
    sigma2: f64,
    d: usize,
    x_norm: f64,
    mu_b0: f64,
) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(BoundsError::InvalidParameter("log-gradient decay requires A >= 0"));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(BoundsError::InvalidParameter("subgaussian target requires sigma2 > 0"));
    }
    if d == 0 {
        return Err(BoundsError::InvalidParameter("dimension must be >= 1"));
    }
    let x = validate_x_norm(x_norm)?;
    let mu = validate_mu_ball(mu_b0)?;
    let df = d as f64;
    let radicand =
        2.0 * a * math::ln(2.0) + 3.0 * a - math::ln(mu) / df + 2.0 * a * math::ln_1p(x);
    if radicand < 0.0 {
        return Err(BoundsError::FormulaDegenerate { radicand });
    }
    Ok(math::sqrt(df) * math::sqrt(sigma2) * (1.0 + 3.0 * math::sqrt(radicand)))
}

/// Published exponential bound split into value and clamp flag.
fn exponential_published_parts(
    a: f64,
    v0: f64,
    c: f64,
    sigma: f64,
    d: usize,
    x: f64,
) -> (f64, bool) {
    let df = d as f64;
    let paren = math::ln(c) / df + math::ln(v0) + 2.0 * a * math::ln(2.0) + 3.0 * a + 2.0
        - math::ln_unit_ball_volume(d) / df
        + 2.0 * a * math::ln_1p(x);
    let clamped = paren < 0.0;
    let value = 2.0 * math::sqrt(c * df) * sigma + 3.0 * sigma * df * paren.max(0.0);
    (value, clamped)
}

fn validate_exponential_target(c: f64, sigma: f64) -> Result<()> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(BoundsError::InvalidParameter(
            "exponential concentration requires c >= 1 (phi(0) = c must cover probability 1)",
        ));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(BoundsError::InvalidParameter("exponential concentration requires sigma > 0"));
    }
    Ok(())
}

/// Growth bound for a source with `|∇log V| ≤ A(1+|x|)⁻¹` and a centered
/// target with exponential concentration `φ(r) = c·exp(−r/σ)`, `c ≥ 1`.
///
/// * [`Flavor::Published`]:
///   `2√(cd)·σ + 3σd·(d⁻¹·log c + log V(0) + 2A·log2 + 3A + 2 − d⁻¹·log ω_d + 2A·log(1+|x|))`.
///   A negative parenthesized factor is clamped to 0 (the bound saturates at
///   its moment term `2√(cd)·σ`); [`GrowthBound::evaluate`] reports the
///   clamp.
/// * [`Flavor::Assembled`]: [`concentration_bound_ln`] with the exponential
///   profile, moment bound `M = 2√(cd)·σ` (integrated coordinate-wise
///   second moments), and the `λ = 1/2` ball probability in log form.
pub fn exponential_growth(
    a: f64,
    v0: f64,
    c: f64,
    sigma: f64,
    d: usize,
    x_norm: f64,
    flavor: Flavor,
) -> Result<f64> {
    validate_source(a, v0, d)?;
    validate_exponential_target(c, sigma)?;
    let x = validate_x_norm(x_norm)?;
    match flavor {
        Flavor::Published => Ok(exponential_published_parts(a, v0, c, sigma, d, x).0),
        Flavor::Assembled => {
            let profile = exponential_profile(c, sigma)?;
            let m = 2.0 * math::sqrt(c * d as f64) * sigma;
            let ln_mu = assembled_mu_ball_ln(a, v0, d, x)?;
            concentration_bound_ln(&profile, m, ln_mu)
        }
    }
}

/// Growth bound for a source with `|∇log V| ≤ A(1+|x|)⁻¹` and an isotropic
/// log-concave target: [`exponential_growth`] with the generic log-concave
/// concentration parameters `(c₁, c₂·√(log d))`.
///
/// `c₁, c₂` are universal constants whose best currently certified values
/// the caller must supply (they are inputs, not outputs, of this bound);
/// `c₁ ≥ 1` is required, as for any exponential profile. Requires `d ≥ 2`:
/// `√(log d)` vanishes at `d = 1` and the parametrization collapses.
pub fn logconcave_growth(
    a: f64,
    v0: f64,
    c1: f64,
    c2: f64,
    d: usize,
    x_norm: f64,
    flavor: Flavor,
) -> Result<f64> {
    if d < 2 {
        return Err(BoundsError::DimensionTooSmall { d, min: 2 });
    }
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(BoundsError::InvalidParameter("log-concave bound requires c2 > 0"));
    }
    let sigma = c2 * math::sqrt(math::ln(d as f64));
    exponential_growth(a, v0, c1, sigma, d, x_norm, flavor)
}

/// Where the polynomial bound's ball constant `α` comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSource {
    /// Derive both constants from the growth envelope `V ≤ L(1+|x|)^q`:
    /// `α = L^{−d}·7^{−qd}·2^{−(q−1)d}·ω_d` for the `λ = 2|x|` ball, and
    /// the density floor `v_inf = L^{−d}·5^{−qd}` over `B(0,4)` for the
    /// `λ = 1` fallback ball.
    Assembled,
    /// Caller-certified constants, e.g. from sharper knowledge of the
    /// density. `alpha` must satisfy `μ(B(x+4|x|u, 2|x|)) ≥
    /// α(1+|x|)^{−(q−1)d}` and `v_inf` must lower-bound the density on
    /// `B(0,4)`. The seam monotonicity guaranteed for [`Self::Assembled`]
    /// (fallback constant ≤ bound at `|x| = 1`) is then the caller's
    /// responsibility.
    User {
        /// Scaling-ball constant `α`.
        alpha: f64,
        /// Density lower bound over `B(0,4)`.
        v_inf: f64,
    },
}

/// Evaluated polynomial-densities bound with its curve parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolynomialBound {
    /// The bound at the requested `|x|`.
    pub value: f64,
    /// Coefficient `C = 3(C_tail/α)^{1/(d(p−1))}` of the `|x| ≥ 1` branch.
    pub coefficient: f64,
    /// Tail exponent `(q−1)/(p−1)`.
    pub exponent: f64,
    /// True when `|x| < 1` used the fixed-radius fallback ball.
    pub fallback: bool,
}

/// Growth bound between polynomially controlled densities: source
/// `V ≤ L(1+|x|)^q`, target `W ≥ M_tail·|y|^p`, `p, q > 1`.
///
/// * `|x| ≥ 1`: `3(C_tail/α)^{1/(d(p−1))}·(1+|x|)^{(q−1)/(p−1)}` — the
///   generic bound with the polynomial tail function and the `λ = 2|x|`
///   scaling ball ([`crate::ballprob::ball_lower_poly`]).
/// * `|x| < 1`: the scaling ball vanishes with `|x|`, so the bound switches
///   to the fixed ball `B(x + 2u, 1) ⊂ B(0, 4)` whose mass is at least
///   `v_inf·ω_d`, giving the constant `3(C_tail/(v_inf·ω_d))^{1/(d(p−1))}`.
///   With [`AlphaSource::Assembled`] constants this fallback never exceeds
///   the `|x| = 1` value (`5^q ≤ 7^q·4^{q−1}` for `q ≥ 1`), so the bound
///   stays monotone across the seam.
///
/// Both flavors of [`GrowthBound`] evaluate this same assembly: the
/// pre-simplified statement for this bound keeps its constant symbolic, so
/// there is no separate published arithmetic to reproduce.
pub fn polynomial_growth(
    l: f64,
    q: f64,
    m_tail: f64,
    p: f64,
    d: usize,
    x_norm: f64,
    alpha_source: AlphaSource,
) -> Result<PolynomialBound> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(BoundsError::InvalidParameter("polynomial source requires L > 0"));
    }
    if !(q > 1.0) || !q.is_finite() {
        return Err(BoundsError::InvalidParameter("polynomial source requires q > 1"));
    }
    if d == 0 {
        return Err(BoundsError::InvalidParameter("dimension must be >= 1"));
    }
    let x = validate_x_norm(x_norm)?;
    // Validates m_tail > 0, p > 1; C_tail = M^{−d}·ω_d/(p−1).
    let psi = polytail_psi(m_tail, p, d)?;
    let TailKind::PolyTail { c_tail, .. } = psi.kind() else {
        unreachable!("polytail_psi returns a polynomial tail");
    };
    let df = d as f64;
    let ln_omega = math::ln_unit_ball_volume(d);
    let (ln_alpha, v_inf) = match alpha_source {
        AlphaSource::Assembled => (
            -df * math::ln(l) - q * df * math::ln(7.0) - (q - 1.0) * df * math::ln(2.0) + ln_omega,
            math::exp(-df * (math::ln(l) + q * math::ln(5.0))),
        ),
        AlphaSource::User { alpha, v_inf } => {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(BoundsError::InvalidParameter("user alpha must be positive"));
            }
            if !(v_inf > 0.0) || !v_inf.is_finite() {
                return Err(BoundsError::InvalidParameter("user v_inf must be positive"));
            }
            (math::ln(alpha), v_inf)
        }
    };
    let inv_exp = 1.0 / (df * (p - 1.0));
    let coefficient = 3.0 * math::exp((math::ln(c_tail) - ln_alpha) * inv_exp);
    let exponent = (q - 1.0) / (p - 1.0);
    let (value, fallback) = if x >= 1.0 {
        (coefficient * math::exp(exponent * math::ln_1p(x)), false)
    } else {
        let mu = validate_mu_ball(v_inf * math::exp(ln_omega))?;
        (generic_bound(&psi, mu)?, true)
    };
    Ok(PolynomialBound { value, coefficient, exponent, fallback })
}

/// Which growth estimate a [`GrowthBound`] instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    /// The abstract tail-function estimate ([`generic_bound`]).
    Generic,
    /// The abstract concentration estimate ([`concentration_bound`]).
    Concentration,
    /// Subgaussian target ([`subgaussian_growth`]).
    SubgaussianTarget,
    /// Exponential-concentration target ([`exponential_growth`]).
    ExponentialTarget,
    /// Isotropic log-concave target ([`logconcave_growth`]).
    LogConcaveTarget,
    /// Polynomially controlled densities ([`polynomial_growth`]).
    PolynomialDensities,
}

impl Theorem {
    /// The ball-radius policy the bound's assembly fixes.
    pub fn lambda_policy(&self) -> &'static str {
        match self {
            Theorem::Generic | Theorem::Concentration => "lambda free (caller supplies mu_ball)",
            Theorem::SubgaussianTarget | Theorem::ExponentialTarget | Theorem::LogConcaveTarget => {
                "lambda = 1/2"
            }
            Theorem::PolynomialDensities => "lambda = 2|x| for |x| >= 1, lambda = 1 for |x| < 1",
        }
    }
}

/// Which form of a concrete bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// The pre-simplified closed form with folded constants.
    Published,
    /// The runtime composition of the component inequalities.
    Assembled,
}

/// Parameters of a concrete growth bound.
#[derive(Clone, Copy, Debug, PartialEq)]
enum BoundSpec {
    Subgaussian { a: f64, v0: f64, sigma2: f64 },
    Exponential { a: f64, v0: f64, c: f64, sigma: f64 },
    LogConcave { a: f64, v0: f64, c1: f64, c2: f64 },
    Polynomial { l: f64, q: f64, m_tail: f64, p: f64 },
}

/// One evaluation of a [`GrowthBound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundEval {
    /// The bound at the requested `|x|`.
    pub value: f64,
    /// True when a negative log factor in the published exponential /
    /// log-concave form was clamped to 0 (the bound saturated at its
    /// moment term).
    pub clamped: bool,
}

/// A concrete growth bound: theorem, flavor, and validated parameters,
/// evaluable at any `|x|`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthBound {
    spec: BoundSpec,
    d: usize,
    flavor: Flavor,
}

impl GrowthBound {
    /// Bound for a `σ²`-subgaussian target (see [`subgaussian_growth`]).
    pub fn subgaussian(a: f64, v0: f64, sigma2: f64, d: usize, flavor: Flavor) -> Result<Self> {
        validate_source(a, v0, d)?;
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(BoundsError::InvalidParameter("subgaussian target requires sigma2 > 0"));
        }
        Ok(Self { spec: BoundSpec::Subgaussian { a, v0, sigma2 }, d, flavor })
    }

    /// Bound for an exponential-concentration target (see
    /// [`exponential_growth`]).
    pub fn exponential(
        a: f64,
        v0: f64,
        c: f64,
        sigma: f64,
        d: usize,
        flavor: Flavor,
    ) -> Result<Self> {
        validate_source(a, v0, d)?;
        validate_exponential_target(c, sigma)?;
        Ok(Self { spec: BoundSpec::Exponential { a, v0, c, sigma }, d, flavor })
    }

    /// Bound for an isotropic log-concave target (see
    /// [`logconcave_growth`]). `c1, c2` are caller-supplied universal
    /// constants.
    pub fn logconcave(a: f64, v0: f64, c1: f64, c2: f64, d: usize, flavor: Flavor) -> Result<Self> {
        if d < 2 {
            return Err(BoundsError::DimensionTooSmall { d, min: 2 });
        }
        validate_source(a, v0, d)?;
        validate_exponential_target(c1, c2)?;
        Ok(Self { spec: BoundSpec::LogConcave { a, v0, c1, c2 }, d, flavor })
    }

    /// Bound between polynomially controlled densities (see
    /// [`polynomial_growth`]; flavors coincide for this bound).
    pub fn polynomial(
        l: f64,
        q: f64,
        m_tail: f64,
        p: f64,
        d: usize,
        flavor: Flavor,
    ) -> Result<Self> {
        // Dry-run the assembly at |x| = 1 so constructor-time validation
        // covers every parameter (including m_tail, p via the tail
        // function).
        polynomial_growth(l, q, m_tail, p, d, 1.0, AlphaSource::Assembled)?;
        Ok(Self { spec: BoundSpec::Polynomial { l, q, m_tail, p }, d, flavor })
    }

    /// Which growth estimate this bound instantiates.
    pub fn theorem(&self) -> Theorem {
        match self.spec {
            BoundSpec::Subgaussian { .. } => Theorem::SubgaussianTarget,
            BoundSpec::Exponential { .. } => Theorem::ExponentialTarget,
            BoundSpec::LogConcave { .. } => Theorem::LogConcaveTarget,
            BoundSpec::Polynomial { .. } => Theorem::PolynomialDensities,
        }
    }

    /// The evaluated flavor.
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Ambient dimension.
    pub fn dimension(&self) -> usize {
        self.d
    }

    /// The ball-radius policy behind this bound (metadata).
    pub fn lambda_policy(&self) -> &'static str {
        self.theorem().lambda_policy()
    }

    /// Evaluate the bound at `|x| = x_norm`.
    pub fn evaluate(&self, x_norm: f64) -> Result<BoundEval> {
        let x = validate_x_norm(x_norm)?;
        match self.spec {
            BoundSpec::Subgaussian { a, v0, sigma2 } => {
                let value = subgaussian_growth(a, v0, sigma2, self.d, x, self.flavor)?;
                Ok(BoundEval { value, clamped: false })
            }
            BoundSpec::Exponential { a, v0, c, sigma } => match self.flavor {
                Flavor::Published => {
                    let (value, clamped) = exponential_published_parts(a, v0, c, sigma, self.d, x);
                    Ok(BoundEval { value, clamped })
                }
                Flavor::Assembled => {
                    let value = exponential_growth(a, v0, c, sigma, self.d, x, self.flavor)?;
                    Ok(BoundEval { value, clamped: false })
                }
            },
            BoundSpec::LogConcave { a, v0, c1, c2 } => {
                let sigma = c2 * math::sqrt(math::ln(self.d as f64));
                match self.flavor {
                    Flavor::Published => {
                        let (value, clamped) =
                            exponential_published_parts(a, v0, c1, sigma, self.d, x);
                        Ok(BoundEval { value, clamped })
                    }
                    Flavor::Assembled => {
                        let value = logconcave_growth(a, v0, c1, c2, self.d, x, self.flavor)?;
                        Ok(BoundEval { value, clamped: false })
                    }
                }
            }
            BoundSpec::Polynomial { l, q, m_tail, p } => {
                let b = polynomial_growth(l, q, m_tail, p, self.d, x, AlphaSource::Assembled)?;
                Ok(BoundEval { value: b.value, clamped: false })
            }
        }
    }

    /// Curve parameters of the polynomial bound (`None` for other
    /// theorems): the `|x| ≥ 1` coefficient and exponent.
    pub fn polynomial_curve(&self) -> Option<(f64, f64)> {
        match self.spec {
            BoundSpec::Polynomial { l, q, m_tail, p } => {
                let b = polynomial_growth(l, q, m_tail, p, self.d, 1.0, AlphaSource::Assembled)
                    .expect("parameters validated at construction");
                Some((b.coefficient, b.exponent))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballprob::{ball_lower_loggrad, ball_lower_poly};
    use crate::concentration::TailFunction;
    use crate::measures::DensityModel;
    use crate::transport::quantile_map_default;
    use alloc::vec::Vec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use core::f64::consts::{LN_2, PI};

    #[test]
    fn unit_ball_volume_matches_the_closed_forms() {
        assert_relative_eq!(unit_ball_volume(1).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(2).unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-14);
        // ω_10 = π^5/Γ(6) = π^5/120.
        assert_relative_eq!(
            unit_ball_volume(10).unwrap(),
            PI.powi(5) / 120.0,
            max_relative = 1e-13
        );
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn generic_bound_inverts_the_polynomial_tail() {
        // M = 1, p = 3, d = 1: C_tail = ω₁/2 = 1, exponent 2, so
        // ψ(r) = r⁻² and ψ⁻¹(0.04) = 5.
        let psi = polytail_psi(1.0, 3.0, 1).unwrap();
        assert_relative_eq!(generic_bound(&psi, 0.04).unwrap(), 15.0, max_relative = 1e-12);
        // Closed form 3(C_tail/s)^{1/(d(p−1))} across scales.
        let TailKind::PolyTail { c_tail, exponent } = psi.kind() else {
            panic!("polytail expected");
        };
        for &s in &[1e-9, 1e-4, 0.3, 1.0] {
            assert_relative_eq!(
                generic_bound(&psi, s).unwrap(),
                3.0 * math::pow(c_tail / s, 1.0 / exponent),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn generic_bound_saturates_at_the_tail_domain_edge() {
        // ψ from a subgaussian profile with moment bound 2 has r₀ = 2; a
        // ball mass of 1 inverts to r₀, so the bound is 3r₀ = 6.
        let psi =
            TailFunction::from_profile(subgaussian_profile(1.0).unwrap(), 2.0).unwrap();
        assert_relative_eq!(generic_bound(&psi, 1.0).unwrap(), 6.0, max_relative = 1e-12);
    }

    #[test]
    fn generic_bound_rejects_nonpositive_ball_mass_and_clamps_above_one() {
        let psi = polytail_psi(1.0, 3.0, 1).unwrap();
        assert!(matches!(
            generic_bound(&psi, 0.0),
            Err(BoundsError::MuBallOutOfRange { .. })
        ));
        assert!(matches!(
            generic_bound(&psi, -0.1),
            Err(BoundsError::MuBallOutOfRange { .. })
        ));
        assert!(matches!(
            generic_bound(&psi, f64::NAN),
            Err(BoundsError::MuBallOutOfRange { .. })
        ));
        // Drift above 1 clamps to the mu_ball = 1 value.
        assert_relative_eq!(
            generic_bound(&psi, 1.0 + 1e-12).unwrap(),
            generic_bound(&psi, 1.0).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn concentration_bound_matches_hand_values() {
        // Subgaussian σ² = 1, M = 0, mu_ball = e⁻²: φ⁻¹ = √(2·2) = 2 → 6.
        let sub = subgaussian_profile(1.0).unwrap();
        assert_relative_eq!(
            concentration_bound(&sub, 0.0, math::exp(-2.0)).unwrap(),
            6.0,
            max_relative = 1e-12
        );
        // mu_ball = 1 inverts to r₀ = 0: the bound collapses to M.
        assert_relative_eq!(
            concentration_bound(&sub, 0.7, 1.0).unwrap(),
            0.7,
            max_relative = 1e-12
        );
        // Exponential c = 1, σ = 1, M = 1, mu_ball = e⁻³: φ⁻¹ = 3 → 10.
        let exp = exponential_profile(1.0, 1.0).unwrap();
        assert_relative_eq!(
            concentration_bound(&exp, 1.0, math::exp(-3.0)).unwrap(),
            10.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn log_space_concentration_bound_extends_the_probability_form() {
        let sub = subgaussian_profile(1.0).unwrap();
        // Representable masses: both forms agree.
        for &mu in &[0.9, 1e-2, 1e-200] {
            assert_relative_eq!(
                concentration_bound_ln(&sub, 0.4, math::ln(mu)).unwrap(),
                concentration_bound(&sub, 0.4, mu).unwrap(),
                max_relative = 1e-12
            );
        }
        // Below the f64 floor: ln mu = −2000 gives φ⁻¹ = √4000 directly.
        assert_relative_eq!(
            concentration_bound_ln(&sub, 1.0, -2000.0).unwrap(),
            1.0 + 3.0 * math::sqrt(4000.0),
            max_relative = 1e-12
        );
        // Positive log-mass clamps to probability 1 (bound collapses to M).
        assert_relative_eq!(
            concentration_bound_ln(&sub, 0.7, 1e-13).unwrap(),
            0.7,
            max_relative = 1e-12
        );
        // Non-finite log-mass is rejected.
        assert!(concentration_bound_ln(&sub, 0.0, f64::NEG_INFINITY).is_err());
        assert!(concentration_bound_ln(&sub, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn assembled_flavors_survive_probability_underflow() {
        // A = 4, V0 = 1, σ² = 1, d = 8, |x| = 10⁶: the λ = 1/2 ball mass is
        // ≈ exp(−990), far below the smallest positive f64, yet the bound is
        // a small number. Hand assembly of the same quantity:
        // ln μ = −3Ad/2 − 2Ad·ln(3+2|x|) + ln muB0, bound = M + 3√(−2σ²·ln μ).
        let (a, v0, d, x) = (4.0, 1.0, 8usize, 1e6);
        let df = d as f64;
        let ln_mu_b0 = math::ln(
            mu_b0_lower(a, v0, d).unwrap().select(MuB0Variant::Published),
        );
        let ln_mu = -1.5 * a * df - 2.0 * a * df * math::ln(3.0 + 2.0 * x) + ln_mu_b0;
        let expected = df.sqrt() + 3.0 * math::sqrt(-2.0 * ln_mu);
        let b = subgaussian_growth(a, v0, 1.0, d, x, Flavor::Assembled).unwrap();
        assert_relative_eq!(b, expected, max_relative = 1e-12);
        // The exponential assembly survives the same regime.
        let be = exponential_growth(a, v0, 1.0, 1.0, d, x, Flavor::Assembled).unwrap();
        let m = 2.0 * math::sqrt(df);
        assert_relative_eq!(be, m + 3.0 * (0.0 - ln_mu), max_relative = 1e-12);
    }

    #[test]
    fn subgaussian_published_matches_the_hand_computed_constant() {
        // A = 1, V0 = 1, σ² = 1, d = 1, |x| = 0:
        // radicand = 2log2 + 5 − log2 = 5 + log2, bound = 3 + 3√(5+log2)
        // ≈ 10.158.
        let b = subgaussian_growth(1.0, 1.0, 1.0, 1, 0.0, Flavor::Published).unwrap();
        assert_relative_eq!(b, 3.0 + 3.0 * (5.0 + LN_2).sqrt(), max_relative = 1e-12);
        assert_abs_diff_eq!(b, 10.158, epsilon = 5e-4);
    }

    #[test]
    fn subgaussian_published_degenerates_when_the_radicand_is_negative() {
        // A = 0, V0 = 1, d = 1: radicand = −log ω₁ = −log 2 < 0.
        let err = subgaussian_growth(0.0, 1.0, 1.0, 1, 0.0, Flavor::Published).unwrap_err();
        match err {
            BoundsError::FormulaDegenerate { radicand } => {
                assert_relative_eq!(radicand, -LN_2, max_relative = 1e-12);
            }
            other => panic!("expected FormulaDegenerate, got {other:?}"),
        }
        // The assembled flavor has no radicand and stays defined.
        let b = subgaussian_growth(0.0, 1.0, 1.0, 1, 0.0, Flavor::Assembled).unwrap();
        assert!(b.is_finite() && b >= 1.0, "assembled bound {b} below its moment term");
    }

    #[test]
    fn subgaussian_assembled_equals_the_ball_probability_composition() {
        let (a, v0, sigma2) = (1.3, 0.8, 1.7);
        for &d in &[1usize, 3] {
            let bound = GrowthBound::subgaussian(a, v0, sigma2, d, Flavor::Assembled).unwrap();
            let profile = subgaussian_profile(sigma2).unwrap();
            let m = (d as f64).sqrt() * sigma2.sqrt();
            let mu_b0 = mu_b0_lower(a, v0, d).unwrap().select(MuB0Variant::Published);
            for &x in &[0.0, 0.3, 1.0, 5.0, 100.0, 1e4] {
                let mut center = alloc::vec![0.0; d];
                center[0] = x + 1.0;
                let mu = ball_lower_loggrad(a, d, &center, mu_b0).unwrap();
                let expected = concentration_bound(&profile, m, mu).unwrap();
                assert_relative_eq!(
                    bound.evaluate(x).unwrap().value,
                    expected,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn exponential_published_matches_the_hand_computed_constant() {
        // c = 1, σ = 1, A = 1, V0 = 1, d = 1, |x| = 0:
        // 2 + 3(2log2 + 3 + 2 − log2) = 17 + 3log2 ≈ 19.079.
        let b = exponential_growth(1.0, 1.0, 1.0, 1.0, 1, 0.0, Flavor::Published).unwrap();
        assert_relative_eq!(b, 17.0 + 3.0 * LN_2, max_relative = 1e-12);
        assert_abs_diff_eq!(b, 19.079, epsilon = 5e-4);
    }

    #[test]
    fn exponential_published_doubling_increment_is_exact() {
        // B(2x) − B(x) = 3σd·2A·log((1+2x)/(1+x)); every other term cancels.
        let (a, v0, c, sigma, d, x) = (1.3, 0.9, 2.0, 0.7, 2usize, 3.0);
        let b1 = exponential_growth(a, v0, c, sigma, d, x, Flavor::Published).unwrap();
        let b2 = exponential_growth(a, v0, c, sigma, d, 2.0 * x, Flavor::Published).unwrap();
        let expected = 3.0 * sigma * d as f64 * 2.0 * a * ((1.0 + 2.0 * x) / (1.0 + x)).ln();
        assert_relative_eq!(b2 - b1, expected, max_relative = 1e-12);
    }

    #[test]
    fn exponential_rejects_c_below_one() {
        for flavor in [Flavor::Published, Flavor::Assembled] {
            assert!(matches!(
                exponential_growth(1.0, 1.0, 0.5, 1.0, 1, 0.0, flavor),
                Err(BoundsError::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn exponential_published_clamps_a_negative_log_factor() {
        // A = 0, V0 = e⁻¹⁰: the parenthesis is −10 + 2 − log2 < 0, so the
        // published bound saturates at its moment term 2√(cd)σ = 2.
        let v0 = math::exp(-10.0);
        let b = exponential_growth(0.0, v0, 1.0, 1.0, 1, 0.0, Flavor::Published).unwrap();
        assert_relative_eq!(b, 2.0, max_relative = 1e-12);
        let gb = GrowthBound::exponential(0.0, v0, 1.0, 1.0, 1, Flavor::Published).unwrap();
        let eval = gb.evaluate(0.0).unwrap();
        assert!(eval.clamped, "clamp not reported");
        // Far enough out the 2A·log(1+|x|) term would rescue the sign, but
        // with A = 0 it never does; the clamp persists.
        assert!(gb.evaluate(1e6).unwrap().clamped);
    }

    #[test]
    fn logconcave_delegates_to_the_exponential_bound() {
        let (a, v0, c1, c2, d) = (1.1, 1.4, 1.5, 0.8, 4usize);
        let sigma = c2 * (4.0f64).ln().sqrt();
        for flavor in [Flavor::Published, Flavor::Assembled] {
            for &x in &[0.0, 1.0, 50.0] {
                assert_relative_eq!(
                    logconcave_growth(a, v0, c1, c2, d, x, flavor).unwrap(),
                    exponential_growth(a, v0, c1, sigma, d, x, flavor).unwrap(),
                    max_relative = 1e-15
                );
            }
        }
    }

    #[test]
    fn logconcave_rejects_dimension_one() {
        assert!(matches!(
            logconcave_growth(1.0, 1.0, 1.0, 1.0, 1, 0.0, Flavor::Published),
            Err(BoundsError::DimensionTooSmall { d: 1, min: 2 })
        ));
        assert!(GrowthBound::logconcave(1.0, 1.0, 1.0, 1.0, 1, Flavor::Published).is_err());
    }

    #[test]
    fn logconcave_shape_tracks_the_dimension_model() {
        // The bound should scale like d·√(log d)·(1 + log d + log(1+|x|)):
        // the ratio stays within a fixed window across dimensions (the
        // −d⁻¹·log ω_d term contributes the 1 + log d part).
        for &x in &[0.0, 1.0, 100.0] {
            for d in [2usize, 4, 8, 16, 32, 64] {
                let b = logconcave_growth(1.0, 1.0, 1.0, 1.0, d, x, Flavor::Published).unwrap();
                let df = d as f64;
                let model = df * df.ln().sqrt() * (1.0 + df.ln() + (1.0 + x).ln());
                let ratio = b / model;
                assert!(
                    (0.5..=30.0).contains(&ratio),
                    "shape ratio {ratio} at d = {d}, |x| = {x}"
                );
            }
        }
    }

    #[test]
    fn polynomial_exponent_arithmetic_is_exact() {
        // q = p → exponent 1; q = 3, p = 2, d = 1 → exponent 2.
        let b = polynomial_growth(1.0, 2.0, 1.0, 2.0, 1, 1.0, AlphaSource::Assembled).unwrap();
        assert_relative_eq!(b.exponent, 1.0, max_relative = 1e-15);
        let b = polynomial_growth(1.0, 3.0, 1.0, 2.0, 1, 1.0, AlphaSource::Assembled).unwrap();
        assert_relative_eq!(b.exponent, 2.0, max_relative = 1e-15);
        // The curve scales exactly as ((1+x₂)/(1+x₁))^exponent.
        let b1 = polynomial_growth(2.0, 3.0, 1.5, 2.0, 2, 4.0, AlphaSource::Assembled).unwrap();
        let b2 = polynomial_growth(2.0, 3.0, 1.5, 2.0, 2, 19.0, AlphaSource::Assembled).unwrap();
        assert_relative_eq!(
            b2.value / b1.value,
            math::pow(20.0 / 5.0, b1.exponent),
            max_relative = 1e-12
        );
    }

    #[test]
    fn polynomial_matches_the_generic_composition() {
        // |x| ≥ 1 is generic_bound(polytail, ball_lower_poly) by
        // definition; check the plumbing end to end.
        let (l, q, m_tail, p) = (PI, 2.0, 2.0, 3.0);
        let psi = polytail_psi(m_tail, p, 1).unwrap();
        for &x in &[1.0, 2.0, 8.0, 1e3] {
            let mu = ball_lower_poly(l, q, 1, &[x], &[1.0], 1e-3).unwrap();
            let expected = generic_bound(&psi, mu).unwrap();
            let got =
                polynomial_growth(l, q, m_tail, p, 1, x, AlphaSource::Assembled).unwrap().value;
            assert_relative_eq!(got, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn polynomial_small_ball_fallback_is_constant_and_monotone_at_the_seam() {
        for &(q, p) in &[(2.0, 3.0), (1.05, 1.1)] {
            let at = |x: f64| {
                polynomial_growth(1.3, q, 0.9, p, 1, x, AlphaSource::Assembled).unwrap()
            };
            let inner = at(0.0);
            assert!(inner.fallback);
            for &x in &[0.25, 0.5, 0.99] {
                assert_relative_eq!(at(x).value, inner.value, max_relative = 1e-15);
            }
            let seam = at(1.0);
            assert!(!seam.fallback);
            assert!(
                inner.value <= seam.value * (1.0 + 1e-12),
                "fallback {} exceeds the |x| = 1 value {} at q = {q}, p = {p}",
                inner.value,
                seam.value
            );
        }
    }

    #[test]
    fn polynomial_rejects_exponents_at_or_below_one() {
        for bad in [
            polynomial_growth(1.0, 1.0, 1.0, 2.0, 1, 1.0, AlphaSource::Assembled),
            polynomial_growth(1.0, 2.0, 1.0, 1.0, 1, 1.0, AlphaSource::Assembled),
            polynomial_growth(0.0, 2.0, 1.0, 2.0, 1, 1.0, AlphaSource::Assembled),
            polynomial_growth(1.0, 2.0, 0.0, 2.0, 1, 1.0, AlphaSource::Assembled),
        ] {
            assert!(bad.is_err());
        }
    }

    /// All four concrete bounds in both flavors, on parameters where the
    /// published forms are defined everywhere.
    fn bound_catalog() -> Vec<GrowthBound> {
        let mut out = Vec::new();
        for flavor in [Flavor::Published, Flavor::Assembled] {
            out.push(GrowthBound::subgaussian(1.0, 1.0, 1.0, 1, flavor).unwrap());
            out.push(GrowthBound::exponential(1.0, 1.0, 1.2, 1.0, 1, flavor).unwrap());
            out.push(GrowthBound::logconcave(1.0, 1.0, 1.5, 0.8, 3, flavor).unwrap());
            out.push(GrowthBound::polynomial(PI, 2.0, 2.0, 3.0, 1, flavor).unwrap());
            out.push(GrowthBound::polynomial(1.0, 1.3, 1.0, 2.5, 2, flavor).unwrap());
        }
        out
    }

    #[test]
    fn every_bound_is_nondecreasing_in_the_input_norm() {
        // 0 plus a 1000-point geometric grid spanning [1e-3, 1e6].
        let mut grid = alloc::vec![0.0];
        let n = 1000;
        for i in 0..n {
            grid.push(1e-3 * math::pow(1e9, i as f64 / (n - 1) as f64));
        }
        for bound in bound_catalog() {
            let mut prev = f64::NEG_INFINITY;
            for &x in &grid {
                let v = bound.evaluate(x).unwrap().value;
                assert!(
                    v >= prev * (1.0 - 1e-12),
                    "{:?}/{:?} decreases at |x| = {x}: {v} < {prev}",
                    bound.theorem(),
                    bound.flavor()
                );
                prev = v;
            }
        }
    }

    #[test]
    fn flavor_ratio_stays_bounded_on_the_reference_window() {
        // Published and assembled flavors track each other over
        // |x| ∈ [1, 10⁶]: their ratio stays within a fixed window.
        let pairs = [
            (
                GrowthBound::subgaussian(1.0, 1.0, 1.0, 1, Flavor::Published).unwrap(),
                GrowthBound::subgaussian(1.0, 1.0, 1.0, 1, Flavor::Assembled).unwrap(),
            ),
            (
                GrowthBound::subgaussian(4.0, PI, 1.0, 1, Flavor::Published).unwrap(),
                GrowthBound::subgaussian(4.0, PI, 1.0, 1, Flavor::Assembled).unwrap(),
            ),
            (
                GrowthBound::exponential(1.0, 1.0, 1.2, 1.0, 1, Flavor::Published).unwrap(),
                GrowthBound::exponential(1.0, 1.0, 1.2, 1.0, 1, Flavor::Assembled).unwrap(),
            ),
        ];
        for (published, assembled) in pairs {
            for i in 0..200 {
                let x = math::pow(10.0, 6.0 * i as f64 / 199.0);
                let ratio = published.evaluate(x).unwrap().value
                    / assembled.evaluate(x).unwrap().value;
                assert!(
                    (0.1..=10.0).contains(&ratio),
                    "flavor ratio {ratio} at |x| = {x} for {:?}",
                    published.theorem()
                );
            }
        }
    }

    #[test]
    fn proof_variant_is_sharper_than_the_published_form_here() {
        // At the reference parameters the mid-derivation form (explicit
        // muB0, leading 1) sits below the folded-constant form.
        let mu_b0 = mu_b0_lower(1.0, 1.0, 1).unwrap().select(MuB0Variant::Published);
        for &x in &[0.0, 1.0, 100.0] {
            let proof = subgaussian_growth_proof_variant(1.0, 1.0, 1, x, mu_b0).unwrap();
            let published = subgaussian_growth(1.0, 1.0, 1.0, 1, x, Flavor::Published).unwrap();
            assert!(
                proof < published,
                "proof variant {proof} not below published {published} at |x| = {x}"
            );
        }
    }

    // ---- End-to-end domination against 1D reference maps -------------

    /// Collect |x| ↦ |T(x)| pairs from the default 1D quantile map.
    fn map_graph(mu: &DensityModel, nu: &DensityModel) -> Vec<(f64, f64)> {
        let map = quantile_map_default(mu, nu).unwrap();
        map.grid().iter().zip(map.values()).map(|(&x, &t)| (x.abs(), t.abs())).collect()
    }

    #[test]
    fn subgaussian_assembled_dominates_the_quantile_map() {
        // Source: the κ = 1, q = 2 polynomial family (Cauchy. V(x) =
        // π(1+x²); declared A = 2q = 4, V(0) = π). Target: N(0,1), 1-subgaussian.
        let mu = DensityModel::poly_v(1.0, 2.0, 1).unwrap();
        let nu = DensityModel::standard_gaussian(1);
        let bound = GrowthBound::subgaussian(4.0, PI, 1.0, 1, Flavor::Assembled).unwrap();
        for (x, t) in map_graph(&mu, &nu) {
            let b = bound.evaluate(x).unwrap().value;
            assert!(b >= t, "bound {b} below |T| = {t} at |x| = {x}");
        }
    }

    #[test]
    fn exponential_assembled_dominates_the_quantile_map() {
        // Same source; target Laplace(1) with its declared exponential
        // concentration parameters (c, σ) = (2, 2).
        let mu = DensityModel::poly_v(1.0, 2.0, 1).unwrap();
        let nu = DensityModel::custom(
            1,
            alloc::boxed::Box::new(|x: &[f64]| -x[0].abs() - math::ln(2.0)),
            None,
            Some(2.0),
        )
        .unwrap();
        let bound = GrowthBound::exponential(4.0, PI, 2.0, 2.0, 1, Flavor::Assembled).unwrap();
        for (x, t) in map_graph(&mu, &nu) {
            let b = bound.evaluate(x).unwrap().value;
            assert!(b >= t, "bound {b} below |T| = {t} at |x| = {x}");
        }
    }

    #[test]
    fn polynomial_bound_dominates_and_the_map_slope_matches() {
        // Source in the q = 2 class (Cauchy: V = π(1+x²) ≤ π(1+|x|)²),
        // target in the p = 3 class (V_ν = 2(1+y²)^{3/2} ≥ 2|y|³). The map
        // grows like |x|^{(q−1)/(p−1)} = |x|^{1/2}.
        let mu = DensityModel::poly_v(1.0, 2.0, 1).unwrap();
        let nu = DensityModel::poly_v(1.0, 3.0, 1).unwrap();
        let graph = map_graph(&mu, &nu);
        let bound = GrowthBound::polynomial(PI, 2.0, 2.0, 3.0, 1, Flavor::Assembled).unwrap();
        for &(x, t) in &graph {
            let b = bound.evaluate(x).unwrap().value;
            assert!(b >= t, "bound {b} below |T| = {t} at |x| = {x}");
        }
        // Least-squares slope of log|T| against log(1+|x|) over the tail.
        // The quantile-spaced grid thins out fast (Δp is uniform), so the
        // window starts at |x| = 10 to keep enough points; the exact slope
        // there is already within a few percent of the limit.
        let pts: Vec<(f64, f64)> = graph
            .iter()
            .filter(|(x, t)| *x >= 10.0 && *t > 0.0)
            .map(|&(x, t)| (math::ln_1p(x), math::ln(t)))
            .collect();
        assert!(pts.len() > 60, "too few tail points: {}", pts.len());
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (u, v)| (a + u, b + v));
        let (mx, my) = (sx / n, sy / n);
        let (mut num, mut den) = (0.0, 0.0);
        for (u, v) in &pts {
            num += (u - mx) * (v - my);
            den += (u - mx) * (u - mx);
        }
        let slope = num / den;
        let expected = 0.5;
        assert!(
            (slope - expected).abs() <= 0.15 * expected,
            "tail slope {slope} differs from {expected} by more than 15%"
        );
    }
}
