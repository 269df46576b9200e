//! Growth bounds for optimal-transport maps, with the numerical machinery to
//! verify them at desk scale.
//!
//! The crate is organized around one chain of reasoning:
//!
//! 1. [`measures`] declares probability densities in the `V^{-d}` convention
//!    (the density is written as the `-d`-th power of a function `V`, so the
//!    structural constants `A, L, q, M, p` always refer to `V`), with
//!    samplers, 1D distribution functions, and hypothesis checkers.
//! 2. [`concentration`] provides concentration profiles `φ` and tail
//!    functions `ψ` with generalized inverses, empirical tail verification,
//!    and the Lyapunov drift inequality behind polynomial concentration.
//! 3. [`ballprob`] gives analytic lower bounds on small-ball probabilities of
//!    the source measure, plus Monte Carlo / quadrature estimators to
//!    validate them.
//! 4. [`transport`] computes reference transport maps (exact 1D quantile
//!    composition, exact discrete LP, entropic/Sinkhorn) and checks the
//!    geometric invariants every optimal map must satisfy (pairwise
//!    monotonicity, cone inclusion).
//! 5. [`bounds`] assembles the growth-bound evaluators `|x| ↦ bound on
//!    |T(x)|` in two flavors: `Published` (verbatim stated constants) and
//!    `Assembled` (explicit composition of the generic bound with the
//!    ball-probability lemmas, always well-defined).
//!
//! The crate is `no_std` (with `alloc`): all transcendental math goes through
//! [`libm`], which also keeps results bit-identical across platforms — the
//! companion CLI relies on that for reproducible CSV output.

#![no_std]
#![forbid(unsafe_code)]
// Validation guards are written as `!(x > 0.0)` on purpose: the negated
// comparison is false for NaN, so the guard rejects NaN along with the
// out-of-range values, which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ballprob;
pub mod bounds;
pub mod concentration;
pub mod math;
pub mod measures;
pub mod quad;
pub mod rng;
pub mod transport;
