//! Elementary real functions and small vector helpers.
//!
//! Everything transcendental is routed through [`libm`] so the crate stays
//! `no_std` and produces bit-identical results on every platform (`std`
//! float methods may differ across libc implementations; `libm` is pure
//! Rust). Callers inside the crate use these wrappers instead of the `std`
//! inherent methods, which do not exist under `no_std` anyway.

use alloc::vec::Vec;

/// e^x.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// ln(1 + x), accurate near zero.
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Cube root (used for finite-difference step sizing).
#[inline]
pub fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}

/// x^y for real y.
#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// x^n for integer n by repeated squaring (exact operation count,
/// deterministic, no special-case surprises for negative bases).
pub fn powi(x: f64, n: i32) -> f64 {
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut k = n.unsigned_abs();
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// Largest integer ≤ x.
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Error function.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function (accurate for large positive x).
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// ln Γ(x). Uses the reentrant form of `lgamma` (no global sign state).
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// Standard normal CDF Φ(x) = erfc(−x/√2)/2, accurate in both tails.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / core::f64::consts::SQRT_2)
}

/// ln of the volume of the Euclidean unit ball in dimension d:
/// ln ω_d = (d/2)·ln π − ln Γ(d/2 + 1).
pub fn ln_unit_ball_volume(d: usize) -> f64 {
    let half_d = d as f64 / 2.0;
    half_d * ln(core::f64::consts::PI) - ln_gamma(half_d + 1.0)
}

/// Euclidean inner product. Panics if the slices have different lengths.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: dimension mismatch");
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Euclidean norm |a|.
#[inline]
pub fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// Euclidean distance |a − b|.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dist: dimension mismatch");
    let mut s = 0.0;
    for i in 0..a.len() {
        let t = a[i] - b[i];
        s += t * t;
    }
    sqrt(s)
}

/// a − b as a new vector.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "sub: dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// ln Σ e^{v_i} with the usual max-shift stabilization.
/// Returns −∞ for an empty slice.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in v {
        if x > m {
            m = x;
        }
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut s = 0.0;
    for &x in v {
        s += exp(x - m);
    }
    m + ln(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    #[test]
    fn unit_ball_volumes_match_closed_forms() {
        // ω_1 = 2, ω_2 = π, ω_3 = 4π/3, ω_10 = π^5/5!.
        assert_relative_eq!(exp(ln_unit_ball_volume(1)), 2.0, max_relative = 1e-14);
        assert_relative_eq!(exp(ln_unit_ball_volume(2)), PI, max_relative = 1e-14);
        assert_relative_eq!(exp(ln_unit_ball_volume(3)), 4.0 * PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(
            exp(ln_unit_ball_volume(10)),
            powi(PI, 5) / 120.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn erf_and_normal_cdf_reference_values() {
        // Φ(0) = 1/2 exactly; erf(1) and Φ(1) against tabulated values.
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_relative_eq!(erf(1.0), 0.842_700_792_949_714_9, max_relative = 1e-14);
        assert_relative_eq!(normal_cdf(1.0), 0.841_344_746_068_542_9, max_relative = 1e-14);
        // Deep-tail accuracy matters for truncation-radius logic.
        assert_relative_eq!(normal_cdf(-8.0), 6.220_960_574_271_786e-16, max_relative = 1e-12);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        assert_relative_eq!(ln_gamma(5.0), ln(24.0), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(0.5), 0.5 * ln(PI), max_relative = 1e-14);
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        assert_eq!(powi(2.0, 10), 1024.0);
        assert_eq!(powi(-3.0, 3), -27.0);
        assert_relative_eq!(powi(1.5, -2), 1.0 / 2.25, max_relative = 1e-15);
        assert_eq!(powi(7.25, 0), 1.0);
    }

    #[test]
    fn log_sum_exp_is_shift_stable() {
        assert_relative_eq!(log_sum_exp(&[0.0, 0.0]), ln(2.0), max_relative = 1e-15);
        // Huge offsets must not overflow.
        assert_relative_eq!(
            log_sum_exp(&[1000.0, 1000.0 + ln(3.0)]),
            1000.0 + ln(4.0),
            max_relative = 1e-15
        );
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn vector_helpers() {
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]), 11.0);
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
        assert_eq!(dist(&[1.0, 1.0], &[4.0, 5.0]), 5.0);
        assert_eq!(sub(&[1.0, 2.0], &[3.0, 1.0]), alloc::vec![-2.0, 1.0]);
    }
}
