//! The hypothesis gate: declared structural constants are verified against
//! the actual measures before any bound is reported.
//!
//! Every runner calls [`run_gate`] first. A failing gate aborts the scenario
//! with a structured reason (exit code 3) and no bound rows are emitted —
//! a bound certificate is only as good as its hypotheses.
//!
//! Checks are exact where the family permits (log-gradient decay and
//! envelope inequalities on a deterministic radial grid, closed-form
//! centers/variances) and statistical where they must be (profile and tail
//! domination against seeded Monte Carlo samples, with `stat_sigmas`
//! standard errors of slack).

use otgrowth::concentration::{
    empirical_tail, exponential_profile, polytail_psi, subgaussian_profile,
    ConcentrationProfile, TestFunction,
};
use otgrowth::math;
use otgrowth::measures::{standard_radial_grid, verify_log_grad_decay, DensityModel};
use serde::Serialize;

use crate::scenario::{ConcSpec, MeasureSpec, NdParams, ResolvedParams, TolSpec};
use crate::CliError;

/// Radial extent and resolution of the deterministic hypothesis grids.
const GATE_R_MAX: f64 = 1e6;
const GATE_PER_DIRECTION: usize = 60;
/// Deviation radii for profile-domination checks, as multiples of σ.
const GATE_PROFILE_MULTIPLIERS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
/// Absolute radii for polynomial tail-domination checks.
const GATE_TAIL_RADII: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// One verified (or failed) hypothesis.
#[derive(Debug, Clone, Serialize)]
pub struct GateCheck {
    /// What was checked.
    pub name: String,
    /// Numbers backing the verdict.
    pub detail: String,
    /// Whether the hypothesis held.
    pub passed: bool,
}

/// Outcome of the full gate.
#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    /// Every check performed, in order.
    pub checks: Vec<GateCheck>,
    /// Checks that could not run (e.g. no measure declared), with reasons.
    pub skipped: Vec<String>,
    /// True when every performed check passed.
    pub passed: bool,
}

impl GateReport {
    fn new() -> Self {
        GateReport { checks: Vec::new(), skipped: Vec::new(), passed: true }
    }

    fn push(&mut self, name: impl Into<String>, detail: impl Into<String>, passed: bool) {
        self.checks.push(GateCheck { name: name.into(), detail: detail.into(), passed });
        self.passed &= passed;
    }

    fn skip(&mut self, reason: impl Into<String>) {
        self.skipped.push(reason.into());
    }

    /// Joined failure reasons (for the abort message).
    pub fn failure_summary(&self) -> String {
        let mut parts: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        if parts.is_empty() {
            parts.push("gate failed with no recorded check".into());
        }
        parts.join("; ")
    }
}

/// Which hypotheses a pipeline actually relies on.
#[derive(Clone, Copy)]
pub enum GateParams<'a> {
    /// The full theorem: source structural constants and target
    /// concentration both enter the bound.
    Full(&'a ResolvedParams),
    /// Only the target-side constants enter (nd pipeline: ball
    /// probabilities are estimated directly, never assembled from source
    /// constants).
    TargetOnly(&'a NdParams),
}

/// Everything the gate needs to know about a scenario.
pub struct GateInputs<'a> {
    /// Source spec and built model, when declared.
    pub source: Option<(&'a MeasureSpec, &'a DensityModel)>,
    /// Target spec, built model, and declared concentration, when declared.
    pub target: Option<(&'a MeasureSpec, &'a DensityModel, Option<&'a ConcSpec>)>,
    /// Resolved structural constants under test.
    pub params: GateParams<'a>,
    /// Monte Carlo sample count for statistical checks.
    pub mc_n: usize,
    /// Seed for statistical checks.
    pub seed: u64,
    /// Tolerances.
    pub tol: &'a TolSpec,
}

/// Run every applicable hypothesis check.
pub fn run_gate(inputs: &GateInputs) -> Result<GateReport, CliError> {
    let mut report = GateReport::new();
    match inputs.params {
        GateParams::Full(params) => match *params {
            ResolvedParams::Subgaussian { a, v0, sigma2 } => {
                gate_loggrad_source(inputs, a, v0, &mut report)?;
                let profile = subgaussian_profile(sigma2)
                    .map_err(|e| CliError::Config(format!("invalid sigma2: {e}")))?;
                gate_target_profile(inputs, &profile, "subgaussian", sigma2.sqrt(), &mut report)?;
            }
            ResolvedParams::Exponential { a, v0, c, sigma } => {
                gate_loggrad_source(inputs, a, v0, &mut report)?;
                let profile = exponential_profile(c, sigma)
                    .map_err(|e| CliError::Config(format!("invalid (c, sigma): {e}")))?;
                gate_target_profile(inputs, &profile, "exponential", sigma, &mut report)?;
            }
            ResolvedParams::LogConcave { a, v0, .. } => {
                gate_loggrad_source(inputs, a, v0, &mut report)?;
                gate_target_isotropic_logconcave(inputs, &mut report);
            }
            ResolvedParams::Polynomial { l, q, m_tail, p } => {
                gate_poly_source(inputs, l, q, &mut report)?;
                gate_poly_target(inputs, m_tail, p, &mut report)?;
            }
        },
        GateParams::TargetOnly(params) => {
            report.skip(
                "source structural checks skipped: this pipeline estimates ball \
                 probabilities directly and never uses source constants",
            );
            match *params {
                NdParams::Subgaussian { sigma2 } => {
                    let profile = subgaussian_profile(sigma2)
                        .map_err(|e| CliError::Config(format!("invalid sigma2: {e}")))?;
                    gate_target_profile(inputs, &profile, "subgaussian", sigma2.sqrt(), &mut report)?;
                }
                NdParams::Exponential { c, sigma } => {
                    let profile = exponential_profile(c, sigma)
                        .map_err(|e| CliError::Config(format!("invalid (c, sigma): {e}")))?;
                    gate_target_profile(inputs, &profile, "exponential", sigma, &mut report)?;
                }
                NdParams::LogConcave { .. } => {
                    gate_target_isotropic_logconcave(inputs, &mut report);
                }
                NdParams::Polynomial { m_tail, p } => {
                    gate_poly_target(inputs, m_tail, p, &mut report)?;
                }
            }
        }
    }
    Ok(report)
}

/// Source checks for the log-gradient theorems: `|∇ log V|·(1+|x|) ≤ A` on
/// a radial grid, and declared `v0 ≥ V(0)`.
fn gate_loggrad_source(
    inputs: &GateInputs,
    a: f64,
    v0: f64,
    report: &mut GateReport,
) -> Result<(), CliError> {
    let Some((_, model)) = inputs.source else {
        report.skip("source checks skipped: no source measure declared (parametric run)");
        return Ok(());
    };
    let grid = standard_radial_grid(model.dim(), GATE_R_MAX, GATE_PER_DIRECTION);
    let decay = verify_log_grad_decay(model, a, &grid)
        .map_err(|e| CliError::Config(format!("log-gradient check failed to run: {e}")))?;
    let worst_at = decay
        .worst_point
        .as_ref()
        .map(|x| format!(" at |x| = {:.3e}", math::norm(x)))
        .unwrap_or_default();
    report.push(
        "source log-gradient decay",
        format!(
            "declared A = {a}, worst |∇log V|·(1+|x|) = {:.6}{worst_at}, {} domain violations over {} grid points",
            decay.worst_ratio,
            decay.domain_violations.len(),
            grid.len()
        ),
        decay.pass,
    );
    gate_v0(model, v0, inputs.tol, report);
    Ok(())
}

/// Declared `v0` must upper-bound the actual `V(0)` (it enters the bounds
/// as `log v0`, so understating it would understate the bound).
fn gate_v0(model: &DensityModel, v0: f64, tol: &TolSpec, report: &mut GateReport) {
    let origin = vec![0.0; model.dim()];
    match model.log_density(&origin) {
        Ok(ld) => {
            let actual = math::exp(-ld / model.dim() as f64);
            let ok = v0 * (1.0 + tol.numeric) + tol.numeric >= actual;
            report.push(
                "source V(0) declaration",
                format!("declared v0 = {v0}, actual V(0) = {actual:.12}"),
                ok,
            );
        }
        Err(e) => report.push(
            "source V(0) declaration",
            format!("cannot evaluate the density at the origin: {e}"),
            false,
        ),
    }
}

/// Target check for the concentration theorems: the declared profile must
/// dominate empirical deviation tails of 1-Lipschitz test functions
/// (norm, signed axis directions, diagonal), with `stat_sigmas·stderr`
/// slack.
fn gate_target_profile(
    inputs: &GateInputs,
    profile: &ConcentrationProfile,
    kind: &str,
    sigma_scale: f64,
    report: &mut GateReport,
) -> Result<(), CliError> {
    let Some((_, model, _)) = inputs.target else {
        report.skip("target checks skipped: no target measure declared (parametric run)");
        return Ok(());
    };
    let samples = model
        .sample(inputs.mc_n, inputs.seed)
        .map_err(|e| CliError::Config(format!("target sampling failed: {e}")))?;
    let d = model.dim();
    let mut tests: Vec<(String, TestFunction)> = vec![("norm".into(), TestFunction::Norm)];
    for i in 0..d.min(2) {
        for sign in [1.0, -1.0] {
            let mut theta = vec![0.0; d];
            theta[i] = sign;
            let label = format!("{}e{}", if sign > 0.0 { "+" } else { "-" }, i + 1);
            tests.push((
                label,
                TestFunction::linear(theta)
                    .map_err(|e| CliError::Config(format!("test direction failed: {e}")))?,
            ));
        }
    }
    if d >= 2 {
        tests.push((
            "diagonal".into(),
            TestFunction::linear(vec![1.0; d])
                .map_err(|e| CliError::Config(format!("test direction failed: {e}")))?,
        ));
    }
    let r_grid: Vec<f64> = GATE_PROFILE_MULTIPLIERS.iter().map(|m| m * sigma_scale).collect();
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_desc = String::new();
    let mut all_ok = true;
    for (label, f) in &tests {
        let rows = empirical_tail(&samples, f, &r_grid)
            .map_err(|e| CliError::Config(format!("empirical tail failed: {e}")))?;
        for row in rows {
            let bound = profile.eval(row.r);
            let slack = inputs.tol.stat_sigmas * row.stderr;
            let margin = row.estimate - bound - slack;
            if margin > worst_margin {
                worst_margin = margin;
                worst_desc = format!(
                    "f = {label}, r = {:.3}: tail = {:.5} vs profile = {:.5} (+{:.1}σ = {:.5})",
                    row.r,
                    row.estimate,
                    bound,
                    inputs.tol.stat_sigmas,
                    bound + slack
                );
            }
            all_ok &= margin <= 0.0;
        }
    }
    report.push(
        format!("target {kind} profile domination (statistical)"),
        format!("{} test functions × {} radii, n = {}; worst: {worst_desc}", tests.len(), r_grid.len(), inputs.mc_n),
        all_ok,
    );
    Ok(())
}

/// Target check for the log-concave theorem: the family must be certifiably
/// log-concave with zero mean and identity covariance (all closed-form).
fn gate_target_isotropic_logconcave(inputs: &GateInputs, report: &mut GateReport) {
    let Some((spec, _, _)) = inputs.target else {
        report.skip("target checks skipped: no target measure declared (parametric run)");
        return;
    };
    let tol = inputs.tol.numeric;
    let (logconcave, iso_detail, isotropic) = match spec {
        MeasureSpec::Gaussian { mean, var } => {
            let centered = mean.iter().all(|&m| m.abs() <= tol);
            let unit = var.iter().all(|&v| (v - 1.0).abs() <= tol);
            (true, format!("mean = {mean:?}, var = {var:?}"), centered && unit)
        }
        MeasureSpec::UniformBox { lo, hi } => {
            let h = 3f64.sqrt();
            let centered = lo.iter().zip(hi).all(|(a, b)| (a + b).abs() <= tol);
            let unit = lo.iter().zip(hi).all(|(a, b)| ((b - a) / 2.0 - h).abs() <= 1e-6);
            (true, format!("box [{lo:?}, {hi:?}] (unit variance needs half-width √3)"), centered && unit)
        }
        MeasureSpec::Laplace { .. } => {
            (true, "laplace has variance 2, not 1".into(), false)
        }
        MeasureSpec::PolyV { .. } => {
            (false, "polynomial-envelope densities are not log-concave".into(), false)
        }
    };
    report.push(
        "target log-concavity certificate",
        format!("family = {}: {}", spec.family_name(), if logconcave { "log-concave" } else { "not log-concave" }),
        logconcave,
    );
    report.push("target isotropy (closed form)", iso_detail, isotropic);
}

/// Source checks for the polynomial theorem: `V(x) ≤ L·(1+|x|)^q` on a
/// radial grid (exact, via the model's log-density).
fn gate_poly_source(
    inputs: &GateInputs,
    l: f64,
    q: f64,
    report: &mut GateReport,
) -> Result<(), CliError> {
    let Some((_, model)) = inputs.source else {
        report.skip("source checks skipped: no source measure declared (parametric run)");
        return Ok(());
    };
    let d = model.dim() as f64;
    let grid = standard_radial_grid(model.dim(), GATE_R_MAX, GATE_PER_DIRECTION);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_r = 0.0;
    let mut bad_points = 0usize;
    for x in &grid {
        let ld = model
            .log_density(x)
            .map_err(|e| CliError::Config(format!("density evaluation failed: {e}")))?;
        let log_v = -ld / d;
        let envelope = l.ln() + q * math::ln_1p(math::norm(x));
        let margin = log_v - envelope;
        if !margin.is_finite() || margin > inputs.tol.numeric {
            bad_points += 1;
        }
        if margin > worst_margin {
            worst_margin = margin;
            worst_r = math::norm(x);
        }
    }
    report.push(
        "source polynomial growth envelope",
        format!(
            "declared (L, q) = ({l}, {q}); worst log V − log envelope = {worst_margin:.3e} at |x| = {worst_r:.3e}; {bad_points} violations over {} grid points",
            grid.len()
        ),
        bad_points == 0,
    );
    Ok(())
}

/// Target checks for the polynomial theorem: `W(y) ≥ M·|y|^p` for |y| ≥ 1
/// on a radial grid (exact), and the induced tail function must dominate
/// empirical raw-norm tails (statistical).
fn gate_poly_target(
    inputs: &GateInputs,
    m_tail: f64,
    p: f64,
    report: &mut GateReport,
) -> Result<(), CliError> {
    let Some((_, model, _)) = inputs.target else {
        report.skip("target checks skipped: no target measure declared (parametric run)");
        return Ok(());
    };
    let d = model.dim();
    let df = d as f64;
    let grid = standard_radial_grid(d, GATE_R_MAX, GATE_PER_DIRECTION);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_r = 0.0;
    let mut bad_points = 0usize;
    let mut tested = 0usize;
    for y in &grid {
        let r = math::norm(y);
        if r < 1.0 {
            continue;
        }
        tested += 1;
        let ld = model
            .log_density(y)
            .map_err(|e| CliError::Config(format!("density evaluation failed: {e}")))?;
        let log_w = -ld / df;
        let floor = m_tail.ln() + p * r.ln();
        let margin = floor - log_w; // > 0 means the floor is violated
        if !margin.is_finite() || margin > inputs.tol.numeric {
            bad_points += 1;
        }
        if margin > worst_margin {
            worst_margin = margin;
            worst_r = r;
        }
    }
    report.push(
        "target polynomial tail envelope",
        format!(
            "declared (M, p) = ({m_tail}, {p}); worst log floor − log W = {worst_margin:.3e} at |y| = {worst_r:.3e}; {bad_points} violations over {tested} grid points with |y| ≥ 1"
        ),
        bad_points == 0,
    );

    let psi = polytail_psi(m_tail, p, d)
        .map_err(|e| CliError::Config(format!("invalid (M, p): {e}")))?;
    let samples = model
        .sample(inputs.mc_n, inputs.seed)
        .map_err(|e| CliError::Config(format!("target sampling failed: {e}")))?;
    let n = samples.len() as f64;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_desc = String::new();
    let mut all_ok = true;
    for &r in &GATE_TAIL_RADII {
        let hits = samples.iter().filter(|z| math::norm(z) >= r).count() as f64;
        let estimate = hits / n;
        let stderr = (estimate * (1.0 - estimate) / n).sqrt();
        let bound = psi.eval(r);
        let slack = inputs.tol.stat_sigmas * stderr;
        let margin = estimate - bound - slack;
        if margin > worst_margin {
            worst_margin = margin;
            worst_desc = format!(
                "r = {r}: tail = {estimate:.5} vs ψ = {bound:.5} (+{:.1}σ = {:.5})",
                inputs.tol.stat_sigmas,
                bound + slack
            );
        }
        all_ok &= margin <= 0.0;
    }
    report.push(
        "target tail-function domination (statistical)",
        format!("{} radii, n = {}; worst: {worst_desc}", GATE_TAIL_RADII.len(), inputs.mc_n),
        all_ok,
    );
    Ok(())
}
