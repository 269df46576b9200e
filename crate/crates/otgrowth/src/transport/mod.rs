//! Reference transport maps and their geometric invariants.
//!
//! Three map constructions at desk scale:
//!
//! * exact 1D maps as the monotone rearrangement `T = Q_ν ∘ F_μ` (the
//!   gradient of a convex function in one dimension),
//! * exact discrete couplings for the squared-Euclidean cost via a
//!   successive-shortest-path min-cost flow with a dual optimality
//!   certificate (uniform equal-count instances reduce to an O(n³)
//!   assignment), and
//! * entropic (Sinkhorn) couplings in log-domain with ε-ladder warm starts,
//!   turned into maps by barycentric projection.
//!
//! Two checks mirror the geometry that growth bounds lean on: pairwise
//! monotonicity `⟨T(x_j) − T(x_i), x_j − x_i⟩ ≥ 0`, and inclusion of mapped
//! points in the cone `{z : 2⟨z − T(x), u⟩ + |z − T(x)| ≥ 0}` for sources
//! near `x + 2λu`, `u = T(x)/|T(x)|`. Both hold exactly (up to arithmetic)
//! for optimal couplings, whose supports are cyclically monotone.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::measures::{DensityModel, MeasureError, QuantileSweep};

/// Probabilities closer than this to {0, 1} are outside the quantile-safe
/// range: the CDF is numerically saturated there.
const P_SATURATION: f64 = 1e-9;
/// Mass below which a coupling row cannot define a barycentric image.
const ROW_MASS_FLOOR: f64 = 1e-300;
/// Duplicate source points are separated by this relative jitter to keep
/// the optimal coupling a map (distinct sources ⇒ permutation support).
const DUPLICATE_JITTER: f64 = 1e-12;
/// Default pairwise tolerance for exact-LP geometry checks.
pub const LP_GEOMETRY_TOL: f64 = 1e-9;

/// Errors from map construction and invariant checking.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TransportError {
    /// A structurally invalid argument.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    /// Marginal weights do not sum to 1.
    #[error("weights must sum to 1 (off by {off_by:e} on the {side} side)")]
    WeightMismatch { side: &'static str, off_by: f64 },
    /// A grid point lies where the source CDF is numerically 0 or 1; the
    /// map is not resolvable there. Shrink the grid to the quantile range
    /// [1e-6, 1 − 1e-6] of the source measure.
    #[error("grid point {index} has source CDF {p:e}, outside the quantile-safe range; \
             restrict the grid to source quantiles in [1e-6, 1-1e-6]")]
    GridTruncation { index: usize, p: f64 },
    /// The flow solver did not terminate within its augmentation budget.
    #[error("min-cost flow stalled after {iterations} augmentations \
             (remaining mass {remaining:e})")]
    SolverStalled { iterations: usize, remaining: f64 },
    /// The entropic kernel degenerated despite log-domain stabilization.
    #[error("epsilon {epsilon:e} too small: log-domain potentials overflowed")]
    EpsilonTooSmall { epsilon: f64 },
    /// A coupling row carries no mass, so it has no barycentric image.
    #[error("coupling row {row} has zero mass; no barycentric image exists")]
    DegenerateRow { row: usize },
    /// The cone direction `u = T(x)/|T(x)|` is undefined at this anchor.
    #[error("anchor {index} has |T(x)| = 0; cone direction undefined")]
    DirectionUndefined { index: usize },
    /// An underlying measure operation failed.
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

type Result<T> = core::result::Result<T, TransportError>;

// ---------------------------------------------------------------------------
// Exact 1D maps
// ---------------------------------------------------------------------------

/// A 1D monotone transport map sampled on a grid, interpolated monotone
/// piecewise-linearly.
///
/// Both the grid and the values are strictly increasing; monotonicity is
/// what makes the map the derivative of a convex potential in 1D.
#[derive(Clone, Debug, PartialEq)]
pub struct Map1D {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Map1D {
    /// Build a map from parallel strictly-increasing abscissae and values.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(TransportError::InvalidParameter(
                "grid and values must have equal length",
            ));
        }
        if grid.len() < 2 {
            return Err(TransportError::InvalidParameter("a 1D map needs at least 2 grid points"));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0] && w[0].is_finite());
        if !increasing(&grid) || !grid[grid.len() - 1].is_finite() {
            return Err(TransportError::InvalidParameter("grid must be strictly increasing"));
        }
        if !increasing(&values) || !values[values.len() - 1].is_finite() {
            return Err(TransportError::InvalidParameter(
                "map values must be strictly increasing (monotone map)",
            ));
        }
        Ok(Self { grid, values })
    }

    /// Grid abscissae.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Map values at the grid abscissae.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Evaluate by monotone piecewise-linear interpolation; outside the grid
    /// the end segments extend linearly (still monotone).
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        // Index of the segment [grid[k], grid[k+1]] to use.
        let k = match self.grid.binary_search_by(|g| g.total_cmp(&x)) {
            Ok(i) => return self.values[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.grid[k], self.grid[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    }

    /// Pairwise monotonicity report over the grid samples (trivially clean
    /// for a valid map; useful for maps loaded from elsewhere).
    pub fn check_monotone(&self, tol: f64) -> MonotoneReport {
        let xs: Vec<Vec<f64>> = self.grid.iter().map(|&x| vec![x]).collect();
        let ys: Vec<Vec<f64>> = self.values.iter().map(|&y| vec![y]).collect();
        check_monotone(&xs, &ys, tol)
    }
}

/// The monotone rearrangement `T(x) = Q_ν(F_μ(x))` sampled at `grid`.
///
/// Grid points must be strictly increasing and stay inside the source's
/// quantile-safe range (CDF in `[1e-9, 1 − 1e-9]`).
pub fn quantile_map_1d(mu: &DensityModel, nu: &DensityModel, grid: &[f64]) -> Result<Map1D> {
    if grid.len() < 2 {
        return Err(TransportError::InvalidParameter("a 1D map needs at least 2 grid points"));
    }
    if !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(TransportError::InvalidParameter("grid must be strictly increasing"));
    }
    let mut cdf_sweep = QuantileSweep::new(mu)?;
    let mut quantile_sweep = QuantileSweep::new(nu)?;
    let mut values = Vec::with_capacity(grid.len());
    for (index, &x) in grid.iter().enumerate() {
        let p = cdf_sweep.cdf_to(x)?;
        if !(P_SATURATION..=1.0 - P_SATURATION).contains(&p) {
            return Err(TransportError::GridTruncation { index, p });
        }
        values.push(quantile_sweep.advance(p)?);
    }
    Map1D::new(grid.to_vec(), values)
}

/// Number of points in the default 1D transport grid.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Quantile range covered by the default 1D transport grid.
pub const DEFAULT_GRID_P_RANGE: (f64, f64) = (1e-6, 1.0 - 1e-6);

/// Graph of the 1D monotone map sampled at `n` equispaced probability
/// levels spanning `[p_lo, p_hi]`: pairs `(Q_μ(p), Q_ν(p))`.
///
/// Sampling both measures at the *same* probability levels avoids composing
/// two numerical inversions, so quantile drift largely cancels. `n = 1`
/// evaluates the single midpoint level `(p_lo + p_hi)/2` (a degenerate but
/// valid graph; [`Map1D`] itself needs at least two points).
pub fn quantile_graph(
    mu: &DensityModel,
    nu: &DensityModel,
    p_lo: f64,
    p_hi: f64,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0 < p_lo && p_lo <= p_hi && p_hi < 1.0) {
        return Err(TransportError::InvalidParameter(
            "probability levels must satisfy 0 < p_lo <= p_hi < 1",
        ));
    }
    if n == 0 {
        return Err(TransportError::InvalidParameter("a map graph needs at least 1 level"));
    }
    let mut mu_sweep = QuantileSweep::new(mu)?;
    let mut nu_sweep = QuantileSweep::new(nu)?;
    let mut grid = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let p = if n == 1 {
            0.5 * (p_lo + p_hi)
        } else {
            p_lo + (p_hi - p_lo) * k as f64 / (n - 1) as f64
        };
        grid.push(mu_sweep.advance(p)?);
        values.push(nu_sweep.advance(p)?);
    }
    Ok((grid, values))
}

/// The default map: [`quantile_graph`] at [`DEFAULT_GRID_POINTS`] levels
/// spanning [`DEFAULT_GRID_P_RANGE`], packaged as a [`Map1D`].
pub fn quantile_map_default(mu: &DensityModel, nu: &DensityModel) -> Result<Map1D> {
    let (p_lo, p_hi) = DEFAULT_GRID_P_RANGE;
    let (grid, values) = quantile_graph(mu, nu, p_lo, p_hi, DEFAULT_GRID_POINTS)?;
    Map1D::new(grid, values)
}

/// Sup-norm of `F_ν(T(x)) − F_μ(x)` over the map's grid points — the
/// pushforward defect of the sampled map.
pub fn pushforward_residual_1d(map: &Map1D, mu: &DensityModel, nu: &DensityModel) -> Result<f64> {
    let mut mu_sweep = QuantileSweep::new(mu)?;
    let mut nu_sweep = QuantileSweep::new(nu)?;
    let mut worst = 0.0f64;
    for (&x, &y) in map.grid.iter().zip(&map.values) {
        let p_mu = mu_sweep.cdf_to(x)?;
        let p_nu = nu_sweep.cdf_to(y)?;
        worst = worst.max((p_nu - p_mu).abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Discrete couplings
// ---------------------------------------------------------------------------

/// How a coupling was produced, with solver-specific evidence.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingKind {
    /// Exact LP optimum with dual certificate.
    ExactLp {
        /// Source-side duals `u` (reduced cost `c_ij − u_i − v_j ≥ 0`).
        duals_u: Vec<f64>,
        /// Target-side duals `v`.
        duals_v: Vec<f64>,
        /// Augmentation count of the flow solver.
        augmentations: usize,
        /// Whether duplicate sources were jittered (by [`DUPLICATE_JITTER`]).
        jitter_applied: bool,
    },
    /// Entropic approximation.
    Sinkhorn {
        /// Regularization strength.
        epsilon: f64,
        /// Iterations actually run.
        iterations: usize,
        /// Whether the marginal residual met the requested tolerance.
        converged: bool,
        /// Source-side log-domain potentials `f`.
        potentials_f: Vec<f64>,
        /// Target-side log-domain potentials `g`.
        potentials_g: Vec<f64>,
    },
}

/// A discrete coupling between weighted point clouds, with its transport
/// cost for `c(x, y) = |x − y|²` and marginal bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    sources: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    source_weights: Vec<f64>,
    target_weights: Vec<f64>,
    /// Row-major `n × m` plan.
    plan: Vec<f64>,
    cost: f64,
    marginal_residual: f64,
    kind: CouplingKind,
}

impl Coupling {
    /// Number of source points.
    pub fn n(&self) -> usize {
        self.sources.len()
    }

    /// Number of target points.
    pub fn m(&self) -> usize {
        self.targets.len()
    }

    /// Plan mass on the pair `(i, j)`.
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.targets.len() + j]
    }

    /// Transport cost `Σ π_ij |x_i − y_j|²`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// L1 marginal residual `Σ_i |row_i − a_i| + Σ_j |col_j − b_j|`.
    pub fn marginal_residual(&self) -> f64 {
        self.marginal_residual
    }

    /// Solver provenance and evidence.
    pub fn kind(&self) -> &CouplingKind {
        &self.kind
    }

    /// Source points (jittered copies if duplicates were present).
    pub fn sources(&self) -> &[Vec<f64>] {
        &self.sources
    }

    /// Target points.
    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    /// Worst violation of the dual optimality certificate, as
    /// `(min reduced cost, max |reduced cost| on the support)`; `None` for
    /// entropic couplings. An exact optimum has both within ~1e-9 of zero:
    /// feasibility `c_ij − u_i − v_j ≥ 0` everywhere and complementary
    /// slackness on arcs carrying mass.
    pub fn dual_certificate(&self) -> Option<(f64, f64)> {
        let CouplingKind::ExactLp { duals_u, duals_v, .. } = &self.kind else {
            return None;
        };
        let m = self.targets.len();
        let mut min_rc = f64::INFINITY;
        let mut worst_slack = 0.0f64;
        for (i, x) in self.sources.iter().enumerate() {
            for (j, y) in self.targets.iter().enumerate() {
                let rc = sq_dist(x, y) - duals_u[i] - duals_v[j];
                min_rc = min_rc.min(rc);
                if self.plan[i * m + j] > 0.0 {
                    worst_slack = worst_slack.max(rc.abs());
                }
            }
        }
        Some((min_rc, worst_slack))
    }

    fn compute_cost_and_residual(&mut self) {
        let (n, m) = (self.sources.len(), self.targets.len());
        let mut cost = 0.0;
        let mut row = vec![0.0f64; n];
        let mut col = vec![0.0f64; m];
        for (i, plan_row) in self.plan.chunks_exact(m).enumerate() {
            for (j, &mass) in plan_row.iter().enumerate() {
                if mass > 0.0 {
                    cost += mass * sq_dist(&self.sources[i], &self.targets[j]);
                    row[i] += mass;
                    col[j] += mass;
                }
            }
        }
        self.cost = cost;
        self.marginal_residual = row
            .iter()
            .zip(&self.source_weights)
            .map(|(r, a)| (r - a).abs())
            .chain(col.iter().zip(&self.target_weights).map(|(c, b)| (c - b).abs()))
            .sum();
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate_cloud(
    points: &[Vec<f64>],
    weights: &[f64],
    side: &'static str,
) -> Result<()> {
    if points.is_empty() {
        return Err(TransportError::InvalidParameter("point clouds must be nonempty"));
    }
    if points.len() != weights.len() {
        return Err(TransportError::InvalidParameter("one weight per point required"));
    }
    let d = points[0].len();
    if d == 0 || points.iter().any(|p| p.len() != d) {
        return Err(TransportError::InvalidParameter(
            "all points must share one positive dimension",
        ));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(TransportError::InvalidParameter("weights must be finite and ≥ 0"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(TransportError::WeightMismatch { side, off_by: sum - 1.0 });
    }
    Ok(())
}

/// Uniform weights `1/n` summing to 1 exactly enough for validation.
pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Exact optimal coupling for the squared-Euclidean cost.
///
/// Solves the transportation LP by successive shortest paths with node
/// potentials (uniform equal-count instances reduce to the O(n³) assignment
/// problem, one unit augmentation per source). Returns the optimal plan
/// together with LP duals certifying optimality: every reduced cost
/// `c_ij − u_i − v_j ≥ −1e-9` and complementary slackness on the support.
///
/// Exactly duplicated source points are jittered by [`DUPLICATE_JITTER`]
/// (recorded in the provenance) so the uniform-weight optimum stays a
/// permutation map.
pub fn discrete_ot_exact(
    x: &[Vec<f64>],
    wx: &[f64],
    y: &[Vec<f64>],
    wy: &[f64],
) -> Result<Coupling> {
    validate_cloud(x, wx, "source")?;
    validate_cloud(y, wy, "target")?;
    if x[0].len() != y[0].len() {
        return Err(TransportError::InvalidParameter(
            "source and target dimensions must match",
        ));
    }
    let (sources, jitter_applied) = jitter_duplicates(x);
    let (n, m) = (sources.len(), y.len());

    // Dense cost matrix.
    let mut cost = vec![0.0f64; n * m];
    for i in 0..n {
        for j in 0..m {
            cost[i * m + j] = sq_dist(&sources[i], &y[j]);
        }
    }

    let flow = solve_min_cost_flow(&cost, wx, wy)?;
    let mut coupling = Coupling {
        sources,
        targets: y.to_vec(),
        source_weights: wx.to_vec(),
        target_weights: wy.to_vec(),
        plan: flow.plan,
        cost: 0.0,
        marginal_residual: 0.0,
        kind: CouplingKind::ExactLp {
            duals_u: flow.duals_u,
            duals_v: flow.duals_v,
            augmentations: flow.augmentations,
            jitter_applied,
        },
    };
    coupling.compute_cost_and_residual();
    Ok(coupling)
}

/// Deterministically separate exact duplicates: the k-th repeat of a point
/// moves by `k·JITTER` in every coordinate.
fn jitter_duplicates(x: &[Vec<f64>]) -> (Vec<Vec<f64>>, bool) {
    let mut out = x.to_vec();
    let mut jittered = false;
    for i in 0..out.len() {
        let mut repeat = 0usize;
        for j in 0..i {
            if out[j] == x[i] {
                repeat += 1;
            }
        }
        if repeat > 0 {
            jittered = true;
            let shift = DUPLICATE_JITTER * repeat as f64;
            for c in out[i].iter_mut() {
                *c += shift;
            }
        }
    }
    (out, jittered)
}

struct FlowSolution {
    plan: Vec<f64>,
    duals_u: Vec<f64>,
    duals_v: Vec<f64>,
    augmentations: usize,
}

/// Successive shortest paths with Johnson potentials on the dense bipartite
/// transportation graph. Maintains `c_ij + π_i − π_j ≥ 0` with flow only on
/// tight arcs, so the final potentials are optimal LP duals
/// (`u = −π_source`, `v = π_target`).
fn solve_min_cost_flow(cost: &[f64], supply: &[f64], demand: &[f64]) -> Result<FlowSolution> {
    let (n, m) = (supply.len(), demand.len());
    let mut flow = vec![0.0f64; n * m];
    let mut pi_s = vec![0.0f64; n]; // source potentials
    let mut pi_t = vec![0.0f64; m]; // sink potentials
    let mut rem_s = supply.to_vec();
    let mut rem_t = demand.to_vec();
    let mut augmentations = 0usize;
    let max_augmentations = 4 * (n + m) + 16;

    loop {
        let remaining: f64 = rem_s.iter().sum();
        if remaining <= 1e-15 {
            break;
        }
        if augmentations >= max_augmentations {
            return Err(TransportError::SolverStalled { iterations: augmentations, remaining });
        }

        // Multi-source Dijkstra over the residual graph with reduced costs:
        // forward arcs i→j cost c_ij + π_i − π_j, backward arcs j→i cost 0
        // (flow arcs are tight by the invariant).
        let mut dist_s = vec![f64::INFINITY; n];
        let mut dist_t = vec![f64::INFINITY; m];
        let mut done_s = vec![false; n];
        let mut done_t = vec![false; m];
        let mut parent_t = vec![usize::MAX; m]; // source feeding this sink
        let mut parent_s = vec![usize::MAX; n]; // sink feeding this source (backward)
        for i in 0..n {
            if rem_s[i] > 0.0 {
                dist_s[i] = 0.0;
            }
        }
        let target = loop {
            // Pick the unfinished node with the smallest tentative distance.
            let mut best = f64::INFINITY;
            let mut node = None;
            for i in 0..n {
                if !done_s[i] && dist_s[i] < best {
                    best = dist_s[i];
                    node = Some((true, i));
                }
            }
            for j in 0..m {
                if !done_t[j] && dist_t[j] < best {
                    best = dist_t[j];
                    node = Some((false, j));
                }
            }
            let Some((is_source, k)) = node else { break None };
            if !is_source && rem_t[k] > 0.0 {
                break Some(k); // nearest sink with unmet demand
            }
            if is_source {
                done_s[k] = true;
                for j in 0..m {
                    if !done_t[j] {
                        let rc = cost[k * m + j] + pi_s[k] - pi_t[j];
                        let nd = dist_s[k] + rc.max(0.0);
                        if nd < dist_t[j] {
                            dist_t[j] = nd;
                            parent_t[j] = k;
                        }
                    }
                }
            } else {
                done_t[k] = true;
                for i in 0..n {
                    if !done_s[i] && flow[i * m + k] > 0.0 && dist_t[k] < dist_s[i] {
                        dist_s[i] = dist_t[k];
                        parent_s[i] = k;
                    }
                }
            }
        };
        let Some(t) = target else {
            let remaining: f64 = rem_s.iter().sum();
            return Err(TransportError::SolverStalled { iterations: augmentations, remaining });
        };

        // Johnson potential update π_v += min(d_v, d_t): keeps all reduced
        // costs nonnegative, existing flow arcs tight, and makes the new
        // shortest path tight so it can carry flow.
        let dt = dist_t[t];
        for i in 0..n {
            pi_s[i] += dist_s[i].min(dt);
        }
        for j in 0..m {
            pi_t[j] += dist_t[j].min(dt);
        }

        // Bottleneck along the alternating path t ← i ← t' ← i' ← … : the
        // target's unmet demand, the origin's remaining supply, and every
        // backward (flow-reducing) arc on the way. Intermediate sources pass
        // mass through without consuming their own supply.
        let mut bottleneck = rem_t[t];
        let mut j = t;
        loop {
            let i = parent_t[j];
            if parent_s[i] == usize::MAX {
                bottleneck = bottleneck.min(rem_s[i]);
                break;
            }
            let back = parent_s[i];
            bottleneck = bottleneck.min(flow[i * m + back]);
            j = back;
        }

        // Augment; snap quantities that the bottleneck (nearly) zeroed to
        // exact zero so the loop terminates despite float subtraction.
        let snap = |v: f64| if v <= bottleneck * 1e-12 { 0.0 } else { v };
        let mut j = t;
        rem_t[t] = snap(rem_t[t] - bottleneck);
        loop {
            let i = parent_t[j];
            flow[i * m + j] += bottleneck;
            if parent_s[i] == usize::MAX {
                rem_s[i] = snap(rem_s[i] - bottleneck);
                break;
            }
            let back = parent_s[i];
            flow[i * m + back] = snap(flow[i * m + back] - bottleneck);
            j = back;
        }
        augmentations += 1;
    }

    let duals_u: Vec<f64> = pi_s.iter().map(|&p| -p).collect();
    let duals_v = pi_t;
    Ok(FlowSolution { plan: flow, duals_u, duals_v, augmentations })
}

/// Log-domain Sinkhorn for the squared-Euclidean cost.
///
/// Alternating potential updates via max-subtracted log-sum-exp; stops when
/// the L1 marginal residual is ≤ `tol` or after `max_iter` sweeps (both
/// recorded — hitting `max_iter` is reported, not an error).
pub fn sinkhorn(
    x: &[Vec<f64>],
    wx: &[f64],
    y: &[Vec<f64>],
    wy: &[f64],
    epsilon: f64,
    max_iter: usize,
    tol: f64,
) -> Result<Coupling> {
    sinkhorn_warm(x, wx, y, wy, epsilon, max_iter, tol, None)
}

/// [`sinkhorn`] over a decreasing ε-ladder, warm-starting each stage with
/// the previous potentials; returns the final (smallest-ε) coupling.
pub fn sinkhorn_ladder(
    x: &[Vec<f64>],
    wx: &[f64],
    y: &[Vec<f64>],
    wy: &[f64],
    epsilons: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<Coupling> {
    if epsilons.is_empty() {
        return Err(TransportError::InvalidParameter("epsilon ladder must be nonempty"));
    }
    let mut warm: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut result = None;
    for &eps in epsilons {
        let coupling = sinkhorn_warm(x, wx, y, wy, eps, max_iter, tol, warm.take())?;
        if let CouplingKind::Sinkhorn { potentials_f, potentials_g, .. } = &coupling.kind {
            warm = Some((potentials_f.clone(), potentials_g.clone()));
        }
        result = Some(coupling);
    }
    Ok(result.expect("ladder is nonempty"))
}

#[allow(clippy::too_many_arguments)]
fn sinkhorn_warm(
    x: &[Vec<f64>],
    wx: &[f64],
    y: &[Vec<f64>],
    wy: &[f64],
    epsilon: f64,
    max_iter: usize,
    tol: f64,
    warm: Option<(Vec<f64>, Vec<f64>)>,
) -> Result<Coupling> {
    validate_cloud(x, wx, "source")?;
    validate_cloud(y, wy, "target")?;
    if x[0].len() != y[0].len() {
        return Err(TransportError::InvalidParameter(
            "source and target dimensions must match",
        ));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(TransportError::InvalidParameter("epsilon must be positive and finite"));
    }
    if wx.contains(&0.0) || wy.contains(&0.0) {
        return Err(TransportError::InvalidParameter(
            "entropic coupling requires strictly positive weights",
        ));
    }
    let (n, m) = (x.len(), y.len());
    let mut cost = vec![0.0f64; n * m];
    for i in 0..n {
        for j in 0..m {
            cost[i * m + j] = sq_dist(&x[i], &y[j]);
        }
    }
    let ln_wx: Vec<f64> = wx.iter().map(|&w| math::ln(w)).collect();
    let ln_wy: Vec<f64> = wy.iter().map(|&w| math::ln(w)).collect();
    let (mut f, mut g) = warm.unwrap_or_else(|| (vec![0.0; n], vec![0.0; m]));
    if f.len() != n || g.len() != m {
        return Err(TransportError::InvalidParameter("warm-start potential sizes mismatch"));
    }

    let mut scratch = vec![0.0f64; n.max(m)];
    let mut iterations = 0usize;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iter {
        // f_i ← −ε·LSE_j[ln b_j + (g_j − c_ij)/ε],  then symmetrically g.
        for i in 0..n {
            for j in 0..m {
                scratch[j] = ln_wy[j] + (g[j] - cost[i * m + j]) / epsilon;
            }
            f[i] = -epsilon * math::log_sum_exp(&scratch[..m]);
        }
        for j in 0..m {
            for i in 0..n {
                scratch[i] = ln_wx[i] + (f[i] - cost[i * m + j]) / epsilon;
            }
            g[j] = -epsilon * math::log_sum_exp(&scratch[..n]);
        }
        iterations += 1;
        if f.iter().chain(g.iter()).any(|v| !v.is_finite()) {
            return Err(TransportError::EpsilonTooSmall { epsilon });
        }
        residual = marginal_residual_log(&cost, &f, &g, &ln_wx, &ln_wy, wx, wy, epsilon);
        if residual <= tol {
            converged = true;
            break;
        }
    }

    let mut plan = vec![0.0f64; n * m];
    for i in 0..n {
        for j in 0..m {
            plan[i * m + j] =
                math::exp(ln_wx[i] + ln_wy[j] + (f[i] + g[j] - cost[i * m + j]) / epsilon);
        }
    }
    let mut coupling = Coupling {
        sources: x.to_vec(),
        targets: y.to_vec(),
        source_weights: wx.to_vec(),
        target_weights: wy.to_vec(),
        plan,
        cost: 0.0,
        marginal_residual: 0.0,
        kind: CouplingKind::Sinkhorn {
            epsilon,
            iterations,
            converged,
            potentials_f: f,
            potentials_g: g,
        },
    };
    coupling.compute_cost_and_residual();
    // The plan-space residual is the same quantity the iteration tracked;
    // keep the directly measured value.
    debug_assert!((coupling.marginal_residual - residual).abs() <= 1e-9 || !converged);
    Ok(coupling)
}

#[allow(clippy::too_many_arguments)]
fn marginal_residual_log(
    cost: &[f64],
    f: &[f64],
    g: &[f64],
    ln_wx: &[f64],
    ln_wy: &[f64],
    wx: &[f64],
    wy: &[f64],
    epsilon: f64,
) -> f64 {
    let (n, m) = (f.len(), g.len());
    let mut residual = 0.0;
    let mut col = vec![0.0f64; m];
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..m {
            let mass = math::exp(ln_wx[i] + ln_wy[j] + (f[i] + g[j] - cost[i * m + j]) / epsilon);
            row += mass;
            col[j] += mass;
        }
        residual += (row - wx[i]).abs();
    }
    residual + col.iter().zip(wy).map(|(c, b)| (c - b).abs()).sum::<f64>()
}

// ---------------------------------------------------------------------------
// Discrete maps
// ---------------------------------------------------------------------------

/// Where a discrete map's images came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// Images are the matched points of an exact LP permutation/flow.
    ExactLp,
    /// Images are barycentric projections of an entropic coupling.
    SinkhornBarycentric {
        /// Regularization of the underlying coupling.
        epsilon: f64,
        /// Iterations the solver ran.
        iterations: usize,
        /// L1 marginal residual of the underlying coupling.
        marginal_residual: f64,
    },
}

/// A sampled map `x_i ↦ T(x_i)` with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMap {
    sources: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
    provenance: Provenance,
}

impl DiscreteMap {
    /// Source points.
    pub fn sources(&self) -> &[Vec<f64>] {
        &self.sources
    }

    /// Image points `T(x_i)`.
    pub fn images(&self) -> &[Vec<f64>] {
        &self.images
    }

    /// How the images were produced.
    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Tolerance appropriate for geometry checks on this map: arithmetic
    /// noise (1e-9) for exact LP maps, `ε · diam(images)` for entropic maps
    /// (barycentric blur scales with the kernel width).
    pub fn suggested_tolerance(&self) -> f64 {
        match &self.provenance {
            Provenance::ExactLp => LP_GEOMETRY_TOL,
            Provenance::SinkhornBarycentric { epsilon, .. } => {
                let mut diam = 0.0f64;
                for (a, p) in self.images.iter().enumerate() {
                    for q in &self.images[a + 1..] {
                        diam = diam.max(math::dist(p, q));
                    }
                }
                epsilon * diam.max(1.0)
            }
        }
    }

    /// Pairwise monotonicity over all source pairs.
    pub fn check_monotone(&self, tol: f64) -> MonotoneReport {
        check_monotone(&self.sources, &self.images, tol)
    }

    /// Cone inclusion around the anchor `x_index`; see [`check_cone_inclusion`].
    pub fn check_cone_inclusion(
        &self,
        x_index: usize,
        lambda: f64,
        tol: f64,
    ) -> Result<ConeReport> {
        check_cone_inclusion(&self.sources, &self.images, x_index, lambda, tol)
    }
}

/// Barycentric projection `T̂(x_i) = Σ_j π_ij y_j / Σ_j π_ij` of a coupling.
///
/// Exact permutation couplings project to their matched targets; entropic
/// couplings carry `(ε, iterations, residual)` into the provenance.
pub fn barycentric_map(coupling: &Coupling) -> Result<DiscreteMap> {
    let (n, m) = (coupling.n(), coupling.m());
    let d = coupling.targets[0].len();
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        let mut row_mass = 0.0;
        let mut image = vec![0.0f64; d];
        for j in 0..m {
            let mass = coupling.plan[i * m + j];
            if mass > 0.0 {
                row_mass += mass;
                for (k, c) in coupling.targets[j].iter().enumerate() {
                    image[k] += mass * c;
                }
            }
        }
        if row_mass < ROW_MASS_FLOOR {
            return Err(TransportError::DegenerateRow { row: i });
        }
        for c in image.iter_mut() {
            *c /= row_mass;
        }
        images.push(image);
    }
    let provenance = match &coupling.kind {
        CouplingKind::ExactLp { .. } => Provenance::ExactLp,
        CouplingKind::Sinkhorn { epsilon, iterations, .. } => Provenance::SinkhornBarycentric {
            epsilon: *epsilon,
            iterations: *iterations,
            marginal_residual: coupling.marginal_residual,
        },
    };
    Ok(DiscreteMap { sources: coupling.sources.clone(), images, provenance })
}

// ---------------------------------------------------------------------------
// Geometric invariant checks
// ---------------------------------------------------------------------------

/// One failed monotonicity pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneViolation {
    /// First index of the pair.
    pub i: usize,
    /// Second index of the pair.
    pub j: usize,
    /// The inner product `⟨T(x_j) − T(x_i), x_j − x_i⟩` (< −tol).
    pub inner: f64,
}

/// Outcome of a pairwise monotonicity scan.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneReport {
    /// Ordered pairs tested: `k(k−1)/2` for `k` points.
    pub pairs_checked: usize,
    /// All pairs with inner product below `−tol`, in index order.
    pub violations: Vec<MonotoneViolation>,
    /// Smallest inner product seen over all pairs (`None` with < 2 points).
    pub worst: Option<f64>,
}

impl MonotoneReport {
    /// True when no pair violated the tolerance.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Test `⟨T(x_j) − T(x_i), x_j − x_i⟩ ≥ −tol` over all pairs of the sampled
/// map `(sources[i] ↦ images[i])`. Optimal couplings must pass with
/// `tol = 1e-9`: their supports are cyclically monotone.
pub fn check_monotone(sources: &[Vec<f64>], images: &[Vec<f64>], tol: f64) -> MonotoneReport {
    let k = sources.len().min(images.len());
    let mut report =
        MonotoneReport { pairs_checked: 0, violations: Vec::new(), worst: None };
    for i in 0..k {
        for j in (i + 1)..k {
            let inner: f64 = sources[j]
                .iter()
                .zip(&sources[i])
                .zip(images[j].iter().zip(&images[i]))
                .map(|((xj, xi), (yj, yi))| (yj - yi) * (xj - xi))
                .sum();
            report.pairs_checked += 1;
            report.worst = Some(report.worst.map_or(inner, |w: f64| w.min(inner)));
            if inner < -tol {
                report.violations.push(MonotoneViolation { i, j, inner });
            }
        }
    }
    report
}

/// One failed cone-inclusion point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeViolation {
    /// Index of the offending map point.
    pub index: usize,
    /// The cone functional value (< −tol).
    pub f_value: f64,
}

/// Outcome of a cone-inclusion scan around one anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeReport {
    /// Anchor index checked.
    pub anchor: usize,
    /// Ball offset parameter λ.
    pub lambda: f64,
    /// Map points whose sources fell in `B(x + 2λu, λ)`.
    pub points_in_ball: usize,
    /// Points with cone functional below `−tol`.
    pub violations: Vec<ConeViolation>,
    /// Smallest functional value seen inside the ball (`None` if empty).
    pub worst: Option<f64>,
}

impl ConeReport {
    /// True when every in-ball point satisfied the cone inequality.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify the cone inclusion at anchor `x = sources[x_index]`.
///
/// With `u = T(x)/|T(x)|`, every map point whose source lies in
/// `B(x + 2λu, λ)` must have its image in the cone
/// `T(x) + {v : ⟨v, u⟩ ≥ −|v|/2}`, i.e.
/// `f(z) = (2/3)⟨z − T(x), u⟩ + |z − T(x)|/3 ≥ 0`. Monotonicity of optimal
/// couplings forces this; violations beyond `−tol` are reported.
pub fn check_cone_inclusion(
    sources: &[Vec<f64>],
    images: &[Vec<f64>],
    x_index: usize,
    lambda: f64,
    tol: f64,
) -> Result<ConeReport> {
    if sources.len() != images.len() {
        return Err(TransportError::InvalidParameter(
            "sources and images must have equal length",
        ));
    }
    if x_index >= sources.len() {
        return Err(TransportError::InvalidParameter("anchor index out of range"));
    }
    if !(lambda > 0.0) {
        return Err(TransportError::InvalidParameter("lambda must be positive"));
    }
    let x = &sources[x_index];
    let tx = &images[x_index];
    let tx_norm = math::norm(tx);
    if tx_norm == 0.0 {
        return Err(TransportError::DirectionUndefined { index: x_index });
    }
    let u: Vec<f64> = tx.iter().map(|c| c / tx_norm).collect();
    let ball_center: Vec<f64> =
        x.iter().zip(&u).map(|(xc, uc)| xc + 2.0 * lambda * uc).collect();

    let mut report = ConeReport {
        anchor: x_index,
        lambda,
        points_in_ball: 0,
        violations: Vec::new(),
        worst: None,
    };
    for (index, (src, img)) in sources.iter().zip(images).enumerate() {
        if math::dist(src, &ball_center) > lambda {
            continue;
        }
        report.points_in_ball += 1;
        let v = math::sub(img, tx);
        let f_value = (2.0 / 3.0) * math::dot(&v, &u) + math::norm(&v) / 3.0;
        report.worst = Some(report.worst.map_or(f_value, |w: f64| w.min(f_value)));
        if f_value < -tol {
            report.violations.push(ConeViolation { index, f_value });
        }
    }
    Ok(report)
}
