//! Path simulation and statistical verification of hedging robustness.
//!
//! Paths of the traded asset S and the non-traded index L are simulated
//! under a chosen valuation measure: a prior fixes the variance density `a`
//! and the drift perturbation `theta`, an optional pricing kernel `lambda`
//! tilts the drift further. The tracking error of a hedging strategy —
//! bound variation minus trading gains — must have nonpositive expected
//! increments under every feasible (prior, kernel) pair; this module
//! estimates those increments with standard errors and renders a verdict.
//!
//! Sampling uses exact lognormal stepping (constant coefficients), so S and
//! L carry no discretization bias; only the gains integral is discretized
//! (left point). Blocks of paths draw from per-block counter-based RNG
//! streams, making every run bitwise reproducible for a given seed and
//! independent of thread scheduling, and the same seed is reused across
//! (prior, kernel) cells so cross-cell comparisons share path noise.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{SpdMatrix, Vector};
use crate::market::{market_price_of_risk, shifted_price_of_risk, NgdKernel, PriorSpec};
use crate::markovian::{closed_form_bound, closed_form_hedge, PutScenario, REGIME_TOL};

/// Default number of simulated paths.
pub const DEFAULT_PATHS: usize = 100_000;

/// Default number of time steps per path.
pub const DEFAULT_STEPS: usize = 64;

/// Pass threshold in standard errors for drift estimates.
pub const SE_FACTOR: f64 = 3.0;

/// Number of quantile buckets in the conditional regressogram.
pub const REGRESSION_BUCKETS: usize = 5;

/// Paths per RNG substream; each block owns the stream indexed by its
/// position, so the draw sequence is independent of the thread schedule.
const BLOCK_PATHS: usize = 4096;

// ---------------------------------------------------------------------------
// Path bundles
// ---------------------------------------------------------------------------

/// Simulated paths of (S, L) under one valuation measure, together with the
/// physical-measure Brownian increments that generated them.
///
/// Increments are stored under the reference measure of the prior: each step
/// draw is a standard normal under the simulating measure plus the
/// deterministic shift `(lambda + theta) * dt`, so their *centered* per-step
/// covariance is `dt * I` regardless of the measure tilt.
#[derive(Debug, Clone)]
pub struct PathBundle {
    dt: f64,
    horizon: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    /// Layout: `[path][step][component]`, flattened.
    increments: Vec<f64>,
    /// Layout: `[path][0..=n_steps]`, flattened.
    s_paths: Vec<f64>,
    l_paths: Vec<f64>,
    a: SpdMatrix,
    theta: Vector,
    lambda: Option<Vector>,
}

impl PathBundle {
    /// Step length.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Terminal time of every path.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of paths.
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    /// Number of steps per path.
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Seed the bundle was generated from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Variance density of the simulating prior.
    pub fn a(&self) -> &SpdMatrix {
        &self.a
    }

    /// Drift perturbation of the simulating prior.
    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    /// Valuation-measure kernel, if one was applied.
    pub fn lambda(&self) -> Option<&Vector> {
        self.lambda.as_ref()
    }

    /// Time of step-grid node `k` (exact at both endpoints).
    pub fn time_at(&self, k: usize) -> f64 {
        if k >= self.n_steps {
            self.horizon
        } else {
            self.dt * k as f64
        }
    }

    /// Traded-asset trajectory of one path (`n_steps + 1` values).
    pub fn s_path(&self, path: usize) -> &[f64] {
        let w = self.n_steps + 1;
        &self.s_paths[path * w..(path + 1) * w]
    }

    /// Index trajectory of one path (`n_steps + 1` values).
    pub fn l_path(&self, path: usize) -> &[f64] {
        let w = self.n_steps + 1;
        &self.l_paths[path * w..(path + 1) * w]
    }

    /// Brownian increments of one path (`2 * n_steps` values, step-major).
    pub fn increments_of(&self, path: usize) -> &[f64] {
        let w = 2 * self.n_steps;
        &self.increments[path * w..(path + 1) * w]
    }
}

/// Simulates `n_paths` trajectories of (S, L) under the valuation measure
/// determined by `prior` and the optional pricing kernel.
///
/// Lognormal stepping is exact for the constant coefficients: with
/// `B = a^{1/2} W` the log-increments are
/// `dln S = (b - a^11 sigma_S^2 / 2) dt + sigma_S dB_1` and
/// `dln L = (gamma - w^tr a w beta^2 / 2) dt + beta (rho dB_1 + sqrt(1-rho^2) dB_2)`
/// with `w = (rho, sqrt(1-rho^2))`, and the measure change adds
/// `(lambda + theta) dt` to the standard draws of W.
///
/// # Errors
/// [`Error::InvalidInput`] for empty grids or a prior/scenario mismatch,
/// [`Error::InfeasibleKernel`] when `|lambda|` exceeds the scenario's Sharpe
/// cap, and validation errors from the scenario itself.
pub fn simulate(
    s: &PutScenario,
    prior: &PriorSpec,
    kernel: Option<&NgdKernel>,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<PathBundle> {
    s.validate()?;
    if n_paths == 0 || n_steps == 0 {
        return Err(Error::InvalidInput(format!(
            "need at least one path and one step, got {n_paths} paths x {n_steps} steps"
        )));
    }
    let market = s.to_market_spec()?;
    // Re-anchor the prior and kernel to this scenario's uncertainty set; the
    // arguments may have been built against a different one.
    let prior = PriorSpec::new(&market, prior.a().clone(), prior.theta().clone())?;
    let lambda = match kernel {
        Some(k) => Some(NgdKernel::new(s.h, k.lambda().clone())?.lambda().clone()),
        None => None,
    };

    let dt = s.maturity / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let a = prior.a().clone();
    let rt = a.sqrt().clone();
    let (rt11, rt12, rt21, rt22) = (rt[(0, 0)], rt[(0, 1)], rt[(1, 0)], rt[(1, 1)]);
    let shift = match &lambda {
        Some(l) => l + prior.theta(),
        None => prior.theta().clone(),
    };
    let (shift1, shift2) = (shift[0] * dt, shift[1] * dt);
    let root = (1.0 - s.rho * s.rho).sqrt();
    let w_var = s.rho * s.rho * a.entry(0, 0)
        + 2.0 * s.rho * root * a.entry(0, 1)
        + root * root * a.entry(1, 1);
    let s_drift = (s.b - 0.5 * s.sigma_s * s.sigma_s * a.entry(0, 0)) * dt;
    let l_drift = (s.gamma - 0.5 * s.beta * s.beta * w_var) * dt;
    let (ln_s0, ln_l0) = (s.s0.ln(), s.l0.ln());

    let mut increments = vec![0.0; n_paths * 2 * n_steps];
    let mut s_paths = vec![0.0; n_paths * (n_steps + 1)];
    let mut l_paths = vec![0.0; n_paths * (n_steps + 1)];
    let inc_chunk = BLOCK_PATHS * 2 * n_steps;
    let path_chunk = BLOCK_PATHS * (n_steps + 1);

    increments
        .par_chunks_mut(inc_chunk)
        .zip(s_paths.par_chunks_mut(path_chunk))
        .zip(l_paths.par_chunks_mut(path_chunk))
        .enumerate()
        .for_each(|(block, ((inc_b, s_b), l_b))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            let paths_here = s_b.len() / (n_steps + 1);
            for p in 0..paths_here {
                let (mut ln_s, mut ln_l) = (ln_s0, ln_l0);
                let row = p * (n_steps + 1);
                s_b[row] = s.s0;
                l_b[row] = s.l0;
                for j in 0..n_steps {
                    let z1: f64 = rng.sample(StandardNormal);
                    let z2: f64 = rng.sample(StandardNormal);
                    let w1 = z1 * sqrt_dt + shift1;
                    let w2 = z2 * sqrt_dt + shift2;
                    let cell = p * 2 * n_steps + 2 * j;
                    inc_b[cell] = w1;
                    inc_b[cell + 1] = w2;
                    let b1 = rt11 * w1 + rt12 * w2;
                    let b2 = rt21 * w1 + rt22 * w2;
                    ln_s += s_drift + s.sigma_s * b1;
                    ln_l += l_drift + s.beta * (s.rho * b1 + root * b2);
                    s_b[row + j + 1] = ln_s.exp();
                    l_b[row + j + 1] = ln_l.exp();
                }
            }
        });

    Ok(PathBundle {
        dt,
        horizon: s.maturity,
        n_paths,
        n_steps,
        seed,
        increments,
        s_paths,
        l_paths,
        a,
        theta: prior.theta().clone(),
        lambda,
    })
}

// ---------------------------------------------------------------------------
// Tracking errors
// ---------------------------------------------------------------------------

/// Tracking-error trajectories of a hedging strategy along a path bundle.
///
/// For each path, `R_t = bound(t, L_t) - bound(0, L_0) - G_t` where `G` is
/// the left-point Riemann sum of the trading gains
/// `phi(t, L, a)^tr (a^{1/2} xi dt + dB)` with `xi` the market price of risk
/// of the bundle's variance density and `dB = a^{1/2} dW`. `R_0 = 0`
/// exactly; the bound difference itself carries no discretization error.
///
/// Returns one trajectory per path with `n_steps + 1` entries.
///
/// # Errors
/// [`Error::InvalidInput`] if the bundle does not start at the scenario's
/// spot levels or the hedge is not two-dimensional; errors from the bound
/// and hedge callbacks propagate.
pub fn tracking_error<B, H>(
    s: &PutScenario,
    bundle: &PathBundle,
    bound: B,
    hedge: H,
) -> Result<Vec<Vec<f64>>>
where
    B: Fn(f64, f64) -> Result<f64> + Sync,
    H: Fn(f64, f64, &SpdMatrix) -> Result<Vector> + Sync,
{
    s.validate()?;
    let consistent = (bundle.horizon - s.maturity).abs() <= REGIME_TOL * s.maturity
        && bundle.n_paths > 0
        && bundle.s_path(0)[0] == s.s0
        && bundle.l_path(0)[0] == s.l0;
    if !consistent {
        return Err(Error::InvalidInput(
            "path bundle was not simulated from this scenario".into(),
        ));
    }
    let market = s.to_market_spec()?;
    let xi = market_price_of_risk(&market, bundle.a())?;
    let rt = bundle.a().sqrt();
    let drift = rt * &xi * bundle.dt;
    let (rt11, rt12, rt21, rt22) = (rt[(0, 0)], rt[(0, 1)], rt[(1, 0)], rt[(1, 1)]);
    let b0 = bound(0.0, s.l0)?;
    let n_steps = bundle.n_steps;

    (0..bundle.n_paths)
        .into_par_iter()
        .map(|p| {
            let lp = bundle.l_path(p);
            let inc = bundle.increments_of(p);
            let mut out = vec![0.0; n_steps + 1];
            let mut gains = 0.0;
            for k in 1..=n_steps {
                let j = k - 1;
                let phi = hedge(bundle.time_at(j), lp[j], bundle.a())?;
                if phi.len() != 2 {
                    return Err(Error::InvalidInput(format!(
                        "hedge must be a 2-vector, got length {}",
                        phi.len()
                    )));
                }
                let db1 = rt11 * inc[2 * j] + rt12 * inc[2 * j + 1];
                let db2 = rt21 * inc[2 * j] + rt22 * inc[2 * j + 1];
                gains += phi[0] * (drift[0] + db1) + phi[1] * (drift[1] + db2);
                out[k] = bound(bundle.time_at(k), lp[k])? - b0 - gains;
            }
            Ok(out)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Supermartingale verdicts
// ---------------------------------------------------------------------------

/// Drift statistics of the tracking error over one (prior, kernel, pair)
/// cell.
#[derive(Debug, Clone)]
pub struct TrackingCell {
    /// Index into the tested prior list.
    pub prior_index: usize,
    /// Index into the tested kernel list.
    pub kernel_index: usize,
    /// Time pair (both endpoints snapped to the step grid).
    pub pair: (f64, f64),
    /// Path average of `R_t - R_s`.
    pub mean_increment: f64,
    /// Standard error of the average.
    pub std_error: f64,
    /// `mean_increment <= SE_FACTOR * std_error`.
    pub pass: bool,
    /// Increment means over quantile buckets of `L_s`.
    pub bucket_means: Vec<f64>,
    /// Standard errors of the bucket means.
    pub bucket_std_errors: Vec<f64>,
    /// Every bucket mean within its own threshold.
    pub conditional_pass: bool,
}

/// Result of the supermartingale battery: one [`TrackingCell`] per
/// (prior, kernel, pair) combination, with the sampling parameters echoed
/// for reproducibility.
#[derive(Debug, Clone)]
pub struct TrackingReport {
    /// Tested time pairs after snapping to the step grid.
    pub pairs: Vec<(f64, f64)>,
    /// Paths per cell.
    pub n_paths: usize,
    /// Steps per path.
    pub n_steps: usize,
    /// Common seed shared by all cells (common random numbers).
    pub seed: u64,
    /// Multiplier applied to the hedge (1 = the actual strategy).
    pub hedge_multiplier: f64,
    /// Per-cell statistics in (prior, kernel, pair) iteration order.
    pub cells: Vec<TrackingCell>,
}

impl TrackingReport {
    /// True when every cell passes the unconditional drift rule.
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    /// True when every cell also passes the bucketed conditional check.
    pub fn all_conditional_pass(&self) -> bool {
        self.cells.iter().all(|c| c.conditional_pass)
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimates the expected tracking-error increments of the closed-form
/// strategy over every (prior, kernel, pair) cell and applies the
/// `SE_FACTOR` rule.
///
/// All cells reuse `seed`, so differences across cells are not path noise.
/// Pair endpoints snap to the nearest step-grid node. `hedge_multiplier`
/// scales the strategy; 1 is the strategy itself, anything else is a
/// deliberate perturbation used to confirm the test has power. Alongside the
/// unconditional mean, each cell reports a regressogram of increments on
/// `L_s` over [`REGRESSION_BUCKETS`] quantile buckets; `pass` reflects only
/// the unconditional rule, `conditional_pass` is reported separately.
///
/// # Errors
/// [`Error::InvalidInput`] for empty inputs, a non-finite or non-positive
/// multiplier, out-of-range pairs, pairs that collapse on the step grid, or
/// too few paths for the bucket statistics; simulation and closed-form
/// errors propagate.
#[allow(clippy::too_many_arguments)]
pub fn supermartingale_test(
    s: &PutScenario,
    priors: &[PriorSpec],
    kernels: &[NgdKernel],
    pairs: &[(f64, f64)],
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    hedge_multiplier: f64,
) -> Result<TrackingReport> {
    s.validate()?;
    if priors.is_empty() || kernels.is_empty() || pairs.is_empty() {
        return Err(Error::InvalidInput(
            "need at least one prior, one kernel, and one time pair".into(),
        ));
    }
    if !hedge_multiplier.is_finite() || hedge_multiplier <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "hedge multiplier must be finite and positive, got {hedge_multiplier}"
        )));
    }
    if n_paths < 2 * REGRESSION_BUCKETS {
        return Err(Error::InvalidInput(format!(
            "need at least {} paths for {REGRESSION_BUCKETS}-bucket statistics, got {n_paths}",
            2 * REGRESSION_BUCKETS
        )));
    }
    let snap = |t: f64| -> usize { ((t / s.maturity) * n_steps as f64).round() as usize };
    let mut snapped = Vec::with_capacity(pairs.len());
    for &(u, v) in pairs {
        if !(0.0..=s.maturity).contains(&u) || !(0.0..=s.maturity).contains(&v) || u >= v {
            return Err(Error::InvalidInput(format!(
                "time pair ({u}, {v}) is not an increasing pair inside [0, {}]",
                s.maturity
            )));
        }
        let (iu, iv) = (snap(u), snap(v));
        if iu == iv {
            return Err(Error::InvalidInput(format!(
                "time pair ({u}, {v}) collapses on a grid of {n_steps} steps"
            )));
        }
        snapped.push((iu, iv));
    }

    let mut cells = Vec::with_capacity(priors.len() * kernels.len() * pairs.len());
    let mut echoed_pairs = Vec::new();
    for (prior_index, prior) in priors.iter().enumerate() {
        for (kernel_index, kernel) in kernels.iter().enumerate() {
            let bundle = simulate(s, prior, Some(kernel), n_paths, n_steps, seed)?;
            let r = tracking_error(
                s,
                &bundle,
                |t, l| closed_form_bound(s, t, l),
                |t, l, a| closed_form_hedge(s, t, l, a).map(|phi| phi * hedge_multiplier),
            )?;
            for &(iu, iv) in &snapped {
                let pair = (bundle.time_at(iu), bundle.time_at(iv));
                if prior_index == 0 && kernel_index == 0 {
                    echoed_pairs.push(pair);
                }
                let increments: Vec<f64> = r.iter().map(|path| path[iv] - path[iu]).collect();
                let (mean_increment, std_error) = mean_and_se(&increments);

                // Conditional check: quantile regressogram of increments on L_s.
                let mut order: Vec<usize> = (0..n_paths).collect();
                order.sort_by(|&i, &j| {
                    bundle.l_path(i)[iu].total_cmp(&bundle.l_path(j)[iu])
                });
                let mut bucket_means = Vec::with_capacity(REGRESSION_BUCKETS);
                let mut bucket_std_errors = Vec::with_capacity(REGRESSION_BUCKETS);
                for q in 0..REGRESSION_BUCKETS {
                    let lo = q * n_paths / REGRESSION_BUCKETS;
                    let hi = (q + 1) * n_paths / REGRESSION_BUCKETS;
                    let vals: Vec<f64> = order[lo..hi].iter().map(|&p| increments[p]).collect();
                    let (m, se) = mean_and_se(&vals);
                    bucket_means.push(m);
                    bucket_std_errors.push(se);
                }
                let conditional_pass = bucket_means
                    .iter()
                    .zip(&bucket_std_errors)
                    .all(|(m, se)| *m <= SE_FACTOR * se);
                cells.push(TrackingCell {
                    prior_index,
                    kernel_index,
                    pair,
                    mean_increment,
                    std_error,
                    pass: mean_increment <= SE_FACTOR * std_error,
                    bucket_means,
                    bucket_std_errors,
                    conditional_pass,
                });
            }
        }
    }
    Ok(TrackingReport {
        pairs: echoed_pairs,
        n_paths,
        n_steps,
        seed,
        hedge_multiplier,
        cells,
    })
}

/// Five consecutive quarter-translated time pairs spanning `[0, horizon]`,
/// the default battery for [`supermartingale_test`].
pub fn default_pairs(horizon: f64) -> Vec<(f64, f64)> {
    let q = horizon / 4.0;
    vec![
        (0.0, q),
        (q, 2.0 * q),
        (2.0 * q, 3.0 * q),
        (3.0 * q, horizon),
        (0.0, horizon),
    ]
}

// ---------------------------------------------------------------------------
// Kernel families
// ---------------------------------------------------------------------------

/// Martingale-measure kernel `lambda = -xi^theta + scale * r * u` where `u`
/// spans the kernel of `sigma a^{1/2}`, `r = sqrt(h^2 - |xi^theta|^2)` is
/// the feasible radius, and `scale` in [-1, 1] selects a point of the
/// family; `scale = 0` is the minimal martingale kernel. The orientation of
/// `u` is deterministic but arbitrary — use both signs of `scale` to cover
/// both extremes.
///
/// # Errors
/// Feasibility errors from the price-of-risk shift, and
/// [`Error::InfeasibleKernel`] when `|scale| > 1` pushes the kernel outside
/// the Sharpe ball.
pub fn martingale_kernel(s: &PutScenario, prior: &PriorSpec, scale: f64) -> Result<NgdKernel> {
    let market = s.to_market_spec()?;
    let xi_theta = shifted_price_of_risk(&market, prior.a(), prior.theta())?;
    let projector = market.projector(prior.a())?;
    let p_ker = projector.p_ker();
    let mut direction = Vector::zeros(p_ker.nrows());
    let mut best = 0.0;
    for c in 0..p_ker.ncols() {
        let col = p_ker.column(c);
        if col.norm() > best {
            best = col.norm();
            direction = col.into_owned();
        }
    }
    if best < REGIME_TOL {
        return Err(Error::DegenerateVolatility(
            "kernel of the traded loading is trivial; no martingale family exists".into(),
        ));
    }
    direction /= direction.norm();
    let radius = (s.h * s.h - xi_theta.norm_squared()).max(0.0).sqrt();
    NgdKernel::new(s.h, direction * (scale * radius) - xi_theta)
}

/// Worst-case kernel for the tracking error of `hedge_multiplier` times the
/// closed-form strategy: the Sharpe-cap kernel aligned with
/// `a^{1/2}(Z - multiplier * phi)`, the direction that maximizes the
/// kernel's contribution to the tracking-error drift.
///
/// The control `Z` and the hedge `phi` share one negative state-dependent
/// scalar factor, so the residual direction — unlike the residual itself —
/// is constant in time and state and the maximizing kernel is a constant
/// vector. With multiplier 1 this is the adversary the robustness theorem
/// must survive; with any other multiplier it exposes the broken strategy.
///
/// # Errors
/// [`Error::Regime`] outside the closed-form regime (nonzero traded drift
/// or drift uncertainty), [`Error::InvalidInput`] when the residual
/// direction vanishes.
pub fn adversarial_kernel(
    s: &PutScenario,
    prior: &PriorSpec,
    hedge_multiplier: f64,
) -> Result<NgdKernel> {
    if s.b.abs() > REGIME_TOL || s.delta.abs() > REGIME_TOL {
        return Err(Error::Regime(
            "the aligned worst-case kernel uses the closed-form control; it needs \
             zero traded drift and zero drift-uncertainty radius"
                .into(),
        ));
    }
    let a = prior.a();
    let (a11, a12) = (a.entry(0, 0), a.entry(0, 1));
    let root = (1.0 - s.rho * s.rho).sqrt();
    let direction = DVector::from_vec(vec![
        hedge_multiplier * (s.rho + (a12 / a11) * root) - s.rho,
        -root,
    ]);
    let aligned = a.sqrt() * direction;
    let norm = aligned.norm();
    if norm < REGIME_TOL {
        return Err(Error::InvalidInput(
            "hedge residual direction vanishes; no adversarial kernel exists".into(),
        ));
    }
    NgdKernel::new(s.h, aligned * (s.h / norm))
}
