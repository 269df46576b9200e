//! Scenario schema: the JSON contract every harness run is driven by.
//!
//! A scenario declares the measures, the theorem under test with its
//! structural constants, the evaluation grids, the Monte Carlo budget, and
//! the output paths. Unknown fields are rejected (`deny_unknown_fields`)
//! so typos fail loudly as configuration errors, and `schema: 1` is
//! mandatory so future revisions can change defaults without silently
//! reinterpreting old files.
//!
//! Structural constants (`a`, `v0`, `sigma2`, …) may be given explicitly
//! under `theorem`; omitted ones are resolved from the declared measure
//! families. Either way the resolved values face the hypothesis gate before
//! any bound is reported.

use std::fs;
use std::path::Path;

use otgrowth::bounds::{Flavor, GrowthBound};
use otgrowth::measures::DensityModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Top-level scenario document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Schema version; must be `1`.
    pub schema: u32,
    /// Scenario name, echoed into reports.
    pub name: String,
    /// Source measure μ (optional for parametric bound curves).
    #[serde(default)]
    pub source: Option<MeasureSpec>,
    /// Target measure ν with its declared concentration (optional for
    /// parametric bound curves).
    #[serde(default)]
    pub target: Option<TargetSpec>,
    /// Which growth theorem to evaluate, with parameter overrides.
    pub theorem: TheoremSpec,
    /// Evaluation grids.
    #[serde(default)]
    pub grid: GridSpec,
    /// Monte Carlo budget and seeds.
    #[serde(default)]
    pub mc: McSpec,
    /// Statistical and numeric tolerances.
    #[serde(default)]
    pub tolerances: TolSpec,
    /// Output file names (resolved relative to the run's output directory).
    pub outputs: OutputSpec,
}

/// A measure family with its parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Diagonal Gaussian.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    /// Polynomial-envelope family with density ∝ (κ(1+|x|²)^{q/2})^{-d}.
    PolyV { kappa: f64, q: f64, dim: usize },
    /// Uniform distribution on an axis-aligned box.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Standard Laplace (density e^{-|x|}/2), 1D only.
    Laplace { dim: usize },
}

impl MeasureSpec {
    /// Instantiate the density model.
    pub fn build(&self) -> Result<DensityModel, CliError> {
        let model = match self {
            MeasureSpec::Gaussian { mean, var } => {
                DensityModel::gaussian(mean.clone(), var.clone())
            }
            MeasureSpec::PolyV { kappa, q, dim } => DensityModel::poly_v(*kappa, *q, *dim),
            MeasureSpec::UniformBox { lo, hi } => {
                DensityModel::uniform_box(lo.clone(), hi.clone())
            }
            MeasureSpec::Laplace { dim } => {
                if *dim != 1 {
                    return Err(CliError::Config(
                        "laplace family is 1D only (set dim = 1)".into(),
                    ));
                }
                let mut model = DensityModel::custom(
                    1,
                    Box::new(|x: &[f64]| -x[0].abs() - core::f64::consts::LN_2),
                    None,
                    Some(2.0),
                )
                .map_err(|e| CliError::Config(format!("laplace construction failed: {e}")))?;
                // Tail P(X - m ≥ r) = e^{-r}/2 ≤ 2 e^{-r/2}: declare (c, σ) = (2, 2).
                model.params_mut().exponential_c_sigma = Some((2.0, 2.0));
                return Ok(model);
            }
        };
        model.map_err(|e| CliError::Config(format!("measure construction failed: {e}")))
    }

    /// Exact center (mean vector) of the family. All supported families have
    /// closed-form centers, so centering introduces no statistical noise.
    pub fn center(&self) -> Vec<f64> {
        match self {
            MeasureSpec::Gaussian { mean, .. } => mean.clone(),
            MeasureSpec::PolyV { dim, .. } => vec![0.0; *dim],
            MeasureSpec::UniformBox { lo, hi } => {
                lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect()
            }
            MeasureSpec::Laplace { dim } => vec![0.0; *dim],
        }
    }

    /// Family tag for reports.
    pub fn family_name(&self) -> &'static str {
        match self {
            MeasureSpec::Gaussian { .. } => "gaussian",
            MeasureSpec::PolyV { .. } => "poly_v",
            MeasureSpec::UniformBox { .. } => "uniform_box",
            MeasureSpec::Laplace { .. } => "laplace",
        }
    }

    /// Whether the density is radially decreasing about the origin — the
    /// precondition for using the density at radius 7 as the infimum over
    /// `B(0,7)` in the polynomial ball bound.
    pub fn radially_decreasing_at_origin(&self) -> bool {
        match self {
            MeasureSpec::Gaussian { mean, .. } => mean.iter().all(|&m| m == 0.0),
            MeasureSpec::PolyV { .. } => true,
            MeasureSpec::UniformBox { .. } => false,
            MeasureSpec::Laplace { .. } => true,
        }
    }
}

/// Target measure plus its declared concentration behavior.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    /// The measure itself.
    pub measure: MeasureSpec,
    /// Declared concentration profile (verified by the gate before use).
    #[serde(default)]
    pub concentration: Option<ConcSpec>,
}

/// A declared concentration profile.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConcSpec {
    /// φ(r) = exp(−r²/(2σ²)).
    Subgaussian { sigma2: f64 },
    /// φ(r) = c·exp(−r/σ).
    Exponential { c: f64, sigma: f64 },
}

/// Theorem selector with optional explicit structural constants.
///
/// Every `Option` field defaults to the corresponding constant declared by
/// the measure family; explicit values win. `c1`/`c2` (the universal
/// log-concave constants) have no family default and must be explicit.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremSpec {
    /// Which growth theorem.
    pub name: TheoremName,
    /// Bound flavor(s) to judge against.
    #[serde(default)]
    pub flavor: FlavorSel,
    /// Ambient dimension (defaults to the source/target dimension).
    #[serde(default)]
    pub d: Option<usize>,
    /// Source log-gradient decay constant A.
    #[serde(default)]
    pub a: Option<f64>,
    /// Upper bound on V(0) of the source.
    #[serde(default)]
    pub v0: Option<f64>,
    /// Target subgaussian variance proxy σ².
    #[serde(default)]
    pub sigma2: Option<f64>,
    /// Target exponential-concentration constant c.
    #[serde(default)]
    pub c: Option<f64>,
    /// Target exponential-concentration scale σ.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Universal log-concave constant c₁ (profile constant).
    #[serde(default)]
    pub c1: Option<f64>,
    /// Universal log-concave constant c₂ (scale multiplier).
    #[serde(default)]
    pub c2: Option<f64>,
    /// Source polynomial growth coefficient L.
    #[serde(default)]
    pub l: Option<f64>,
    /// Source polynomial growth exponent q.
    #[serde(default)]
    pub q: Option<f64>,
    /// Target polynomial tail coefficient M.
    #[serde(default)]
    pub m_tail: Option<f64>,
    /// Target polynomial tail exponent p.
    #[serde(default)]
    pub p: Option<f64>,
}

/// The four assembled growth theorems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremName {
    Subgaussian,
    Exponential,
    LogConcave,
    Polynomial,
}

impl TheoremName {
    /// Tag for reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremName::Subgaussian => "subgaussian",
            TheoremName::Exponential => "exponential",
            TheoremName::LogConcave => "log_concave",
            TheoremName::Polynomial => "polynomial",
        }
    }
}

/// Which bound flavor(s) a run judges against.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum FlavorSel {
    /// Verbatim stated constants (may degenerate at small |x|).
    Published,
    /// Explicit ball-probability composition (always defined).
    Assembled,
    /// Judge both flavors.
    #[default]
    Both,
}

impl FlavorSel {
    /// The concrete flavors selected.
    pub fn flavors(&self) -> Vec<Flavor> {
        match self {
            FlavorSel::Published => vec![Flavor::Published],
            FlavorSel::Assembled => vec![Flavor::Assembled],
            FlavorSel::Both => vec![Flavor::Published, Flavor::Assembled],
        }
    }

    /// Tag for reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            FlavorSel::Published => "published",
            FlavorSel::Assembled => "assembled",
            FlavorSel::Both => "both",
        }
    }
}

/// Evaluation grids. Every field has a sensible default so scenarios only
/// spell out what they change.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// 1D quantile-grid size (`verify-1d`).
    pub points: usize,
    /// Quantile range `[p_lo, p_hi]` for the 1D grid.
    pub p_range: [f64; 2],
    /// Cloud size per seed (`verify-nd`).
    pub n_samples: usize,
    /// Largest cloud the exact LP path accepts.
    pub lp_cap: usize,
    /// Entropic mode: final ε of the Sinkhorn ladder (None → exact LP).
    pub sinkhorn_epsilon: Option<f64>,
    /// Sinkhorn stopping criterion on the worst marginal residual
    /// (mass units). Looser than the generic numeric tolerance on purpose:
    /// the geometric checks tolerate ε-scale map error, so iterating the
    /// marginals to 1e-9 buys nothing.
    pub sinkhorn_tol: f64,
    /// Cone-inclusion ball parameters λ.
    pub lambdas: Vec<f64>,
    /// Smallest |x| of the bound-curve grid.
    pub x_min: f64,
    /// Largest |x| of the bound-curve grid.
    pub x_max: f64,
    /// Number of bound-curve grid points.
    pub curve_points: usize,
    /// Extra dimensions to sweep in `bound-curve` (empty → theorem d only).
    pub d_sweep: Vec<usize>,
    /// Radii for concentration / ball-probability checks.
    pub radii: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 2001,
            p_range: [1e-6, 1.0 - 1e-6],
            n_samples: 100,
            lp_cap: 512,
            sinkhorn_epsilon: None,
            sinkhorn_tol: 1e-7,
            lambdas: vec![0.5, 1.0, 2.0],
            x_min: 1e-2,
            x_max: 1e6,
            curve_points: 200,
            d_sweep: Vec::new(),
            radii: vec![0.5, 1.0, 2.0, 4.0, 8.0],
        }
    }
}

/// Monte Carlo budget.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSpec {
    /// Samples per estimate.
    pub n: usize,
    /// Seeds; `verify-nd` runs the full pipeline once per seed.
    pub seeds: Vec<u64>,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec { n: 100_000, seeds: vec![1] }
    }
}

/// Tolerances: statistical comparisons get `stat_sigmas` standard errors of
/// slack; exact comparisons use the `numeric` tolerance.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolSpec {
    /// Standard-error multiplier for Monte Carlo comparisons.
    pub stat_sigmas: f64,
    /// Absolute tolerance for exact/arithmetic comparisons.
    pub numeric: f64,
}

impl Default for TolSpec {
    fn default() -> Self {
        TolSpec { stat_sigmas: 3.0, numeric: 1e-9 }
    }
}

/// Output file names, resolved against the run's `--out-dir`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Per-point CSV table.
    pub csv: String,
    /// Summary JSON.
    pub json: String,
}

impl Scenario {
    /// Structural sanity checks that do not need the measures built.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != 1 {
            return Err(CliError::Config(format!(
                "unsupported schema version {} (this harness reads schema 1)",
                self.schema
            )));
        }
        if self.name.is_empty() {
            return Err(CliError::Config("scenario name must be nonempty".into()));
        }
        let [p_lo, p_hi] = self.grid.p_range;
        if !(p_lo > 0.0 && p_lo <= p_hi && p_hi < 1.0) {
            return Err(CliError::Config(format!(
                "grid.p_range must satisfy 0 < p_lo <= p_hi < 1, got [{p_lo}, {p_hi}]"
            )));
        }
        if self.grid.points == 0 {
            return Err(CliError::Config("grid.points must be >= 1".into()));
        }
        if self.grid.n_samples < 2 {
            return Err(CliError::Config("grid.n_samples must be >= 2".into()));
        }
        if self.grid.curve_points < 2 {
            return Err(CliError::Config("grid.curve_points must be >= 2".into()));
        }
        if !(self.grid.x_min > 0.0 && self.grid.x_min < self.grid.x_max) {
            return Err(CliError::Config(
                "bound-curve grid needs 0 < x_min < x_max".into(),
            ));
        }
        if self.grid.lambdas.is_empty() || self.grid.lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(CliError::Config("grid.lambdas must be positive".into()));
        }
        if self.grid.radii.is_empty() || self.grid.radii.iter().any(|&r| !(r > 0.0)) {
            return Err(CliError::Config("grid.radii must be positive".into()));
        }
        if let Some(eps) = self.grid.sinkhorn_epsilon {
            if !(eps > 0.0) {
                return Err(CliError::Config("grid.sinkhorn_epsilon must be positive".into()));
            }
        }
        if !(self.grid.sinkhorn_tol > 0.0) {
            return Err(CliError::Config("grid.sinkhorn_tol must be positive".into()));
        }
        if self.mc.n < 100 {
            return Err(CliError::Config("mc.n must be >= 100".into()));
        }
        if self.mc.seeds.is_empty() {
            return Err(CliError::Config("mc.seeds must be nonempty".into()));
        }
        if !(self.tolerances.stat_sigmas > 0.0) || !(self.tolerances.numeric > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        if self.outputs.csv.is_empty() || self.outputs.json.is_empty() {
            return Err(CliError::Config("outputs.csv and outputs.json must be set".into()));
        }
        Ok(())
    }

    /// Build the source model, or a configuration error naming what's
    /// missing.
    pub fn require_source(&self) -> Result<(&MeasureSpec, DensityModel), CliError> {
        let spec = self.source.as_ref().ok_or_else(|| {
            CliError::Config("this subcommand requires a source measure".into())
        })?;
        Ok((spec, spec.build()?))
    }

    /// Build the target model, or a configuration error naming what's
    /// missing.
    pub fn require_target(&self) -> Result<(&TargetSpec, DensityModel), CliError> {
        let spec = self.target.as_ref().ok_or_else(|| {
            CliError::Config("this subcommand requires a target measure".into())
        })?;
        Ok((spec, spec.measure.build()?))
    }
}

/// Load and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read scenario {}: {e}", path.display()))
    })?;
    let scenario: Scenario = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("invalid scenario JSON in {}: {e}", path.display()))
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// The structural constants a run actually uses, after merging explicit
/// overrides with family-declared defaults. Serialized into every report so
/// the JSON is self-describing.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ResolvedParams {
    Subgaussian { a: f64, v0: f64, sigma2: f64 },
    Exponential { a: f64, v0: f64, c: f64, sigma: f64 },
    LogConcave { a: f64, v0: f64, c1: f64, c2: f64 },
    Polynomial { l: f64, q: f64, m_tail: f64, p: f64 },
}

impl ResolvedParams {
    /// Construct the bound evaluator for one flavor.
    pub fn growth_bound(&self, d: usize, flavor: Flavor) -> Result<GrowthBound, CliError> {
        let built = match *self {
            ResolvedParams::Subgaussian { a, v0, sigma2 } => {
                GrowthBound::subgaussian(a, v0, sigma2, d, flavor)
            }
            ResolvedParams::Exponential { a, v0, c, sigma } => {
                GrowthBound::exponential(a, v0, c, sigma, d, flavor)
            }
            ResolvedParams::LogConcave { a, v0, c1, c2 } => {
                GrowthBound::logconcave(a, v0, c1, c2, d, flavor)
            }
            ResolvedParams::Polynomial { l, q, m_tail, p } => {
                GrowthBound::polynomial(l, q, m_tail, p, d, flavor)
            }
        };
        built.map_err(|e| CliError::Config(format!("bound construction failed: {e}")))
    }
}

fn resolve(
    explicit: Option<f64>,
    family: Option<f64>,
    what: &str,
    hint: &str,
) -> Result<f64, CliError> {
    explicit.or(family).ok_or_else(|| {
        CliError::Config(format!("missing {what}: set theorem.{hint} or use a family that declares it"))
    })
}

/// Merge explicit theorem constants with family defaults.
///
/// `source`/`target` are the built models (when the scenario declares them);
/// `conc` is the target's declared concentration profile.
pub fn resolve_params(
    theorem: &TheoremSpec,
    source: Option<&DensityModel>,
    target: Option<&DensityModel>,
    conc: Option<&ConcSpec>,
) -> Result<ResolvedParams, CliError> {
    let sp = source.map(|m| m.params());
    let tp = target.map(|m| m.params());
    let a = || resolve(theorem.a, sp.and_then(|p| p.log_grad_decay_a), "log-gradient decay constant A", "a");
    let v0 = || resolve(theorem.v0, sp.and_then(|p| p.v0), "V(0) upper bound", "v0");
    match theorem.name {
        TheoremName::Subgaussian => {
            let conc_sigma2 = match conc {
                Some(ConcSpec::Subgaussian { sigma2 }) => Some(*sigma2),
                _ => None,
            };
            let sigma2 = resolve(
                theorem.sigma2,
                conc_sigma2.or(tp.and_then(|p| p.subgaussian_sigma2)),
                "subgaussian variance proxy sigma2",
                "sigma2",
            )?;
            Ok(ResolvedParams::Subgaussian { a: a()?, v0: v0()?, sigma2 })
        }
        TheoremName::Exponential => {
            let conc_cs = match conc {
                Some(ConcSpec::Exponential { c, sigma }) => Some((*c, *sigma)),
                _ => None,
            };
            let family_cs = conc_cs.or(tp.and_then(|p| p.exponential_c_sigma));
            let c = resolve(theorem.c, family_cs.map(|cs| cs.0), "exponential constant c", "c")?;
            let sigma =
                resolve(theorem.sigma, family_cs.map(|cs| cs.1), "exponential scale sigma", "sigma")?;
            Ok(ResolvedParams::Exponential { a: a()?, v0: v0()?, c, sigma })
        }
        TheoremName::LogConcave => {
            let c1 = resolve(theorem.c1, None, "universal log-concave constant c1", "c1")?;
            let c2 = resolve(theorem.c2, None, "universal log-concave constant c2", "c2")?;
            Ok(ResolvedParams::LogConcave { a: a()?, v0: v0()?, c1, c2 })
        }
        TheoremName::Polynomial => {
            let lq = sp.and_then(|p| p.poly_growth_lq);
            let mp = tp.and_then(|p| p.poly_tail_mp);
            let l = resolve(theorem.l, lq.map(|v| v.0), "polynomial growth coefficient L", "l")?;
            let q = resolve(theorem.q, lq.map(|v| v.1), "polynomial growth exponent q", "q")?;
            let m_tail =
                resolve(theorem.m_tail, mp.map(|v| v.0), "polynomial tail coefficient M", "m_tail")?;
            let p = resolve(theorem.p, mp.map(|v| v.1), "polynomial tail exponent p", "p")?;
            Ok(ResolvedParams::Polynomial { l, q, m_tail, p })
        }
    }
}

/// Target-side constants for the nd pipeline. The nd invariant checks
/// (monotonicity, cone inclusion) are unconditional properties of optimal
/// couplings, and the statistical bound diagnostics estimate their ball
/// probabilities directly by Monte Carlo — so source structural constants
/// never enter and are not required (nor verified) there.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NdParams {
    Subgaussian { sigma2: f64 },
    Exponential { c: f64, sigma: f64 },
    LogConcave { c1: f64, c2: f64 },
    Polynomial { m_tail: f64, p: f64 },
}

/// Merge explicit theorem constants with target-family defaults for the nd
/// pipeline.
pub fn resolve_nd_params(
    theorem: &TheoremSpec,
    target: Option<&DensityModel>,
    conc: Option<&ConcSpec>,
) -> Result<NdParams, CliError> {
    let tp = target.map(|m| m.params());
    match theorem.name {
        TheoremName::Subgaussian => {
            let conc_sigma2 = match conc {
                Some(ConcSpec::Subgaussian { sigma2 }) => Some(*sigma2),
                _ => None,
            };
            let sigma2 = resolve(
                theorem.sigma2,
                conc_sigma2.or(tp.and_then(|p| p.subgaussian_sigma2)),
                "subgaussian variance proxy sigma2",
                "sigma2",
            )?;
            Ok(NdParams::Subgaussian { sigma2 })
        }
        TheoremName::Exponential => {
            let conc_cs = match conc {
                Some(ConcSpec::Exponential { c, sigma }) => Some((*c, *sigma)),
                _ => None,
            };
            let family_cs = conc_cs.or(tp.and_then(|p| p.exponential_c_sigma));
            let c = resolve(theorem.c, family_cs.map(|cs| cs.0), "exponential constant c", "c")?;
            let sigma =
                resolve(theorem.sigma, family_cs.map(|cs| cs.1), "exponential scale sigma", "sigma")?;
            Ok(NdParams::Exponential { c, sigma })
        }
        TheoremName::LogConcave => {
            let c1 = resolve(theorem.c1, None, "universal log-concave constant c1", "c1")?;
            let c2 = resolve(theorem.c2, None, "universal log-concave constant c2", "c2")?;
            Ok(NdParams::LogConcave { c1, c2 })
        }
        TheoremName::Polynomial => {
            let mp = tp.and_then(|p| p.poly_tail_mp);
            let m_tail =
                resolve(theorem.m_tail, mp.map(|v| v.0), "polynomial tail coefficient M", "m_tail")?;
            let p = resolve(theorem.p, mp.map(|v| v.1), "polynomial tail exponent p", "p")?;
            Ok(NdParams::Polynomial { m_tail, p })
        }
    }
}

/// Resolve the ambient dimension: explicit `theorem.d` (checked against the
/// measures when present) or the measures' dimension.
pub fn resolve_dimension(
    theorem: &TheoremSpec,
    source: Option<&DensityModel>,
    target: Option<&DensityModel>,
) -> Result<usize, CliError> {
    if let (Some(s), Some(t)) = (source, target) {
        if s.dim() != t.dim() {
            return Err(CliError::Config(format!(
                "source dimension {} and target dimension {} disagree",
                s.dim(),
                t.dim()
            )));
        }
    }
    let measure_d = source.map(|m| m.dim()).or(target.map(|m| m.dim()));
    match (theorem.d, measure_d) {
        (Some(d), Some(md)) if d != md => Err(CliError::Config(format!(
            "theorem.d = {d} disagrees with the declared measures (dimension {md})"
        ))),
        (Some(d), _) if d == 0 => Err(CliError::Config("theorem.d must be >= 1".into())),
        (Some(d), _) => Ok(d),
        (None, Some(md)) => Ok(md),
        (None, None) => Err(CliError::Config(
            "no dimension available: declare measures or set theorem.d".into(),
        )),
    }
}
