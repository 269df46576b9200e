//! Scenario-driven verification harness for optimal-transport growth bounds.
//!
//! The companion binary (`otgrowth`) reads a JSON scenario, verifies the
//! declared structural hypotheses against the actual measures (the *gate*),
//! runs one of five verification pipelines, and emits a per-point CSV table
//! plus a summary JSON. Everything is deterministic given the scenario and
//! its seeds: repeated runs produce byte-identical CSV files.
//!
//! Pipelines (one subcommand each):
//!
//! * `verify-1d` — exact quantile transport map vs growth bound, pointwise.
//! * `verify-nd` — discrete LP / Sinkhorn maps vs monotonicity, cone
//!   inclusion, and statistical ball-probability bound diagnostics.
//! * `bound-curve` — bound values over a log-spaced |x| grid, with curve
//!   fits and flavor-ratio summaries.
//! * `concentration-check` — declared profiles / tail functions vs
//!   empirical deviation tails.
//! * `ballprob-check` — analytic small-ball lower bounds vs Monte Carlo and
//!   quadrature probabilities.
//!
//! Exit codes: 0 all checks passed, 2 a verified invariant was violated,
//! 3 a hypothesis gate failed, 4 the scenario is unusable (bad config,
//! unreadable files, unsatisfiable construction).

// Validation guards are written as `!(x > 0.0)` on purpose: the negated
// comparison is false for NaN, so the guard rejects NaN along with the
// out-of-range values, which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emit;
pub mod gate;
pub mod run;
pub mod scenario;

use thiserror::Error;

/// All checks passed.
pub const EXIT_OK: i32 = 0;
/// A verified invariant was violated (bound domination, monotonicity, …).
pub const EXIT_VIOLATION: i32 = 2;
/// A hypothesis gate failed: the scenario's declared constants do not hold.
pub const EXIT_GATE: i32 = 3;
/// The scenario could not be run at all.
pub const EXIT_CONFIG: i32 = 4;

/// Harness-level failures (violations are reported via [`run::Outcome`],
/// not as errors).
#[derive(Debug, Error)]
pub enum CliError {
    /// The scenario is malformed or asks for something unsupported.
    #[error("configuration error: {0}")]
    Config(String),
    /// Declared hypotheses failed verification; no bounds were reported.
    #[error("hypothesis gate failure: {0}")]
    Gate(String),
    /// Output files could not be written.
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Gate(_) => EXIT_GATE,
            CliError::Io(_) => EXIT_CONFIG,
        }
    }
}
