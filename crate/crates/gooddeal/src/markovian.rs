//! Closed forms and PDE machinery for the benchmark claim: a put on a
//! non-traded index L correlated with a single traded asset S.
//!
//! Model (two Brownian drivers):
//!
//!   dS_t / S_t = b dt + sigma_s dB^1_t,
//!   dL_t / L_t = gamma dt + beta (rho dB^1_t + sqrt(1 - rho^2) dB^2_t),
//!
//! with a diagonal variance interval [diag(a1_lo, a2_lo), diag(a1_hi, a2_hi)]
//! scaling the quadratic variation of (B^1, B^2), a Sharpe cap h, and a
//! drift-uncertainty radius delta. The claim is (strike - L_T)^+.
//!
//! In the regime b = 0, delta = 0 the robust upper valuation bound is an
//! exact lognormal put value with worst-case volatility
//! beta_bar = beta sqrt(rho^2 a1_hi + (1 - rho^2) a2_hi) and penalized drift
//! m = gamma - h beta sqrt(1 - rho^2) sqrt(a2_hi); its diffusion loading,
//! hedge, and drift sensitivity follow by differentiation. Outside that
//! regime a control-representation grid search and a semilinear PDE solver
//! provide the values, and every closed form is cross-checked against them.

use crate::error::{Error, Result};
use crate::generator::GenPoint;
use crate::linalg::{loewner_leq, Matrix, SpdMatrix, Vector};
use crate::market::{MarketSpec, LOEWNER_TOL};
use crate::stats::{lognormal_put_value, norm_cdf, norm_pdf};

/// Tolerance for the exact-regime checks (b = 0, delta = 0, and the
/// control-domain normalizations).
pub const REGIME_TOL: f64 = 1e-12;
/// Number of fully implicit startup steps of the PDE scheme, damping the
/// odd-even oscillation seeded by the payoff kink.
pub const IMPLICIT_STARTUP_STEPS: usize = 2;
/// Blow-up guard: a PDE iterate beyond this multiple of the strike aborts.
pub const STABILITY_FACTOR: f64 = 10.0;

/// Scenario for the correlated-put case study.
///
/// Fields are public data; go through [`PutScenario::new`] so the derived
/// market description is validated once.
#[derive(Debug, Clone, PartialEq)]
pub struct PutScenario {
    /// Traded asset spot at time zero.
    pub s0: f64,
    /// Non-traded index level at time zero.
    pub l0: f64,
    /// Traded asset volatility loading.
    pub sigma_s: f64,
    /// Index volatility loading.
    pub beta: f64,
    /// Instantaneous correlation between index and traded asset drivers.
    pub rho: f64,
    /// Index drift.
    pub gamma: f64,
    /// Traded asset drift.
    pub b: f64,
    /// Put strike on the index.
    pub strike: f64,
    /// Maturity T.
    pub maturity: f64,
    /// Lower variance bound, first driver.
    pub a1_lo: f64,
    /// Lower variance bound, second driver.
    pub a2_lo: f64,
    /// Upper variance bound, first driver.
    pub a1_hi: f64,
    /// Upper variance bound, second driver.
    pub a2_hi: f64,
    /// Sharpe-ratio cap on pricing kernels.
    pub h: f64,
    /// Drift-uncertainty radius.
    pub delta: f64,
}

impl PutScenario {
    /// Validates the scenario and its derived market description.
    ///
    /// # Errors
    /// [`Error::InvalidInput`] when a positivity/range check fails or the
    /// derived market violates ordering, ellipticity, or Sharpe feasibility.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s0: f64,
        l0: f64,
        sigma_s: f64,
        beta: f64,
        rho: f64,
        gamma: f64,
        b: f64,
        strike: f64,
        maturity: f64,
        (a1_lo, a2_lo): (f64, f64),
        (a1_hi, a2_hi): (f64, f64),
        h: f64,
        delta: f64,
    ) -> Result<Self> {
        let scenario = Self {
            s0,
            l0,
            sigma_s,
            beta,
            rho,
            gamma,
            b,
            strike,
            maturity,
            a1_lo,
            a2_lo,
            a1_hi,
            a2_hi,
            h,
            delta,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Re-runs all validity checks on the current field values.
    ///
    /// # Errors
    /// As for [`PutScenario::new`].
    pub fn validate(&self) -> Result<()> {
        for (name, v, ok) in [
            ("s0", self.s0, self.s0 > 0.0),
            ("l0", self.l0, self.l0 > 0.0),
            ("sigma_s", self.sigma_s, self.sigma_s > 0.0),
            ("beta", self.beta, self.beta > 0.0),
            ("strike", self.strike, self.strike > 0.0),
            ("maturity", self.maturity, self.maturity > 0.0),
            ("a1_lo", self.a1_lo, self.a1_lo > 0.0),
            ("a2_lo", self.a2_lo, self.a2_lo > 0.0),
            ("h", self.h, self.h >= 0.0),
            ("delta", self.delta, self.delta >= 0.0),
            ("rho", self.rho, self.rho.abs() <= 1.0),
        ] {
            if !ok || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "scenario field {name} = {v} is out of range"
                )));
            }
        }
        if self.a1_hi < self.a1_lo || self.a2_hi < self.a2_lo {
            return Err(Error::InvalidInput(format!(
                "variance bounds are not ordered: [{}, {}] x [{}, {}]",
                self.a1_lo, self.a1_hi, self.a2_lo, self.a2_hi
            )));
        }
        let market = self.to_market_spec()?;
        let violations = market.validate(crate::market::DEFAULT_GRID_POINTS);
        if !violations.is_empty() {
            let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidInput(format!(
                "derived market is invalid: {}",
                text.join("; ")
            )));
        }
        Ok(())
    }

    /// Market description implied by the scenario: loading (sigma_s, 0),
    /// drift (b), diagonal variance bounds.
    ///
    /// # Errors
    /// Propagates SPD construction failures for the bounds.
    pub fn to_market_spec(&self) -> Result<MarketSpec> {
        MarketSpec::new(
            Matrix::from_row_slice(1, 2, &[self.sigma_s, 0.0]),
            Vector::from_row_slice(&[self.b]),
            self.h,
            self.delta,
            SpdMatrix::from_diagonal(&[self.a1_lo, self.a2_lo])?,
            SpdMatrix::from_diagonal(&[self.a1_hi, self.a2_hi])?,
            self.maturity,
        )
    }

    /// Upper variance bound diag(a1_hi, a2_hi).
    pub fn a_bar(&self) -> SpdMatrix {
        SpdMatrix::from_diagonal(&[self.a1_hi, self.a2_hi]).expect("validated positive")
    }

    /// Lower variance bound diag(a1_lo, a2_lo).
    pub fn a_floor(&self) -> SpdMatrix {
        SpdMatrix::from_diagonal(&[self.a1_lo, self.a2_lo]).expect("validated positive")
    }

    /// Worst-case index volatility beta_bar =
    /// beta sqrt(rho^2 a1_hi + (1 - rho^2) a2_hi).
    pub fn beta_bar(&self) -> f64 {
        self.beta
            * (self.rho * self.rho * self.a1_hi + (1.0 - self.rho * self.rho) * self.a2_hi).sqrt()
    }

    /// Worst-case correlation rho_bar = rho sqrt(a1_hi) beta / beta_bar.
    pub fn rho_bar(&self) -> f64 {
        self.rho * self.a1_hi.sqrt() * self.beta / self.beta_bar()
    }

    /// Penalized drift m = gamma - h beta sqrt(1 - rho^2) sqrt(a2_hi).
    pub fn penalized_drift(&self) -> f64 {
        self.gamma
            - self.h * self.beta * (1.0 - self.rho * self.rho).sqrt() * self.a2_hi.sqrt()
    }

    fn require_closed_form_regime(&self) -> Result<()> {
        if self.b.abs() > REGIME_TOL || self.delta.abs() > REGIME_TOL {
            return Err(Error::Regime(format!(
                "closed forms require b = 0 and delta = 0, got b = {}, delta = {}",
                self.b, self.delta
            )));
        }
        Ok(())
    }

    fn require_time_and_level(&self, t: f64, l: f64) -> Result<f64> {
        if !(0.0..=self.maturity).contains(&t) {
            return Err(Error::InvalidInput(format!(
                "time {t} outside [0, {}]",
                self.maturity
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidInput(format!("index level {l} must be positive")));
        }
        Ok(self.maturity - t)
    }
}

impl Default for PutScenario {
    /// Benchmark parameters: at-the-money unit-maturity put, beta = 0.2,
    /// rho = 0.5, h = 0.3, variance interval [0.8, 1.2] per driver, no
    /// traded drift, no drift uncertainty.
    fn default() -> Self {
        Self::new(
            100.0,
            100.0,
            0.2,
            0.2,
            0.5,
            0.0,
            0.0,
            100.0,
            1.0,
            (0.8, 0.8),
            (1.2, 1.2),
            0.3,
            0.0,
        )
        .expect("benchmark parameters are valid")
    }
}

/// Derived closed-form quantities at a query point (t, l), t < T.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormPut {
    /// Penalized drift m.
    pub m: f64,
    /// Worst-case volatility beta_bar.
    pub beta_bar: f64,
    /// Worst-case correlation rho_bar.
    pub rho_bar: f64,
    /// d_+ = (ln(l/strike) + (m + beta_bar^2/2) tau) / (beta_bar sqrt(tau)).
    pub d_plus: f64,
    /// d_- = (ln(l/strike) + (m - beta_bar^2/2) tau) / (beta_bar sqrt(tau)).
    pub d_minus: f64,
    /// Time to maturity tau = T - t.
    pub tau: f64,
}

impl ClosedFormPut {
    /// Evaluates the derived constants; requires t strictly before maturity.
    ///
    /// # Errors
    /// [`Error::Regime`] outside b = 0, delta = 0; [`Error::InvalidInput`]
    /// for t >= T or non-positive l.
    pub fn at(s: &PutScenario, t: f64, l: f64) -> Result<Self> {
        s.require_closed_form_regime()?;
        let tau = s.require_time_and_level(t, l)?;
        if tau <= 0.0 {
            return Err(Error::InvalidInput(
                "derived constants need strictly positive time to maturity".into(),
            ));
        }
        let m = s.penalized_drift();
        let beta_bar = s.beta_bar();
        let stdev = beta_bar * tau.sqrt();
        let log_moneyness = (l / s.strike).ln();
        Ok(Self {
            m,
            beta_bar,
            rho_bar: s.rho_bar(),
            d_plus: (log_moneyness + (m + 0.5 * beta_bar * beta_bar) * tau) / stdev,
            d_minus: (log_moneyness + (m - 0.5 * beta_bar * beta_bar) * tau) / stdev,
            tau,
        })
    }
}

/// Digital factor lim N(-d_plus) as tau -> 0: payoff-region indicator with
/// the boundary value 1/2 by symmetry.
fn expiry_tail_factor(l: f64, strike: f64) -> f64 {
    if l < strike {
        1.0
    } else if l > strike {
        0.0
    } else {
        0.5
    }
}

/// Robust upper valuation bound of the put in the b = 0, delta = 0 regime:
/// strike * N(-d_-) - l e^{m tau} N(-d_+); the payoff at t = T.
///
/// # Errors
/// [`Error::Regime`] outside the regime; [`Error::InvalidInput`] for bad
/// (t, l).
pub fn closed_form_bound(s: &PutScenario, t: f64, l: f64) -> Result<f64> {
    s.require_closed_form_regime()?;
    let tau = s.require_time_and_level(t, l)?;
    if tau == 0.0 {
        return Ok((s.strike - l).max(0.0));
    }
    Ok(lognormal_put_value(l, s.strike, s.penalized_drift(), s.beta_bar(), tau))
}

/// Diffusion loading (control component) of the bound process:
/// Z = -beta e^{m tau} N(-d_+) l (rho, sqrt(1 - rho^2))^tr.
///
/// # Errors
/// As for [`closed_form_bound`].
pub fn closed_form_control(s: &PutScenario, t: f64, l: f64) -> Result<Vector> {
    s.require_closed_form_regime()?;
    let tau = s.require_time_and_level(t, l)?;
    let factor = if tau == 0.0 {
        expiry_tail_factor(l, s.strike)
    } else {
        let cf = ClosedFormPut::at(s, t, l)?;
        (cf.m * tau).exp() * norm_cdf(-cf.d_plus)
    };
    let scale = -s.beta * factor * l;
    Ok(Vector::from_row_slice(&[
        scale * s.rho,
        scale * (1.0 - s.rho * s.rho).sqrt(),
    ]))
}

/// Optimal hedge under variance density `a`: monetary position
/// phi = -beta e^{m tau} N(-d_+) l (rho + (a12/a11) sqrt(1 - rho^2), 0)^tr.
/// Only the first (traded) component is nonzero.
///
/// # Errors
/// As for [`closed_form_bound`], plus [`Error::NotSpd`] when `a` leaves the
/// variance interval.
pub fn closed_form_hedge(s: &PutScenario, t: f64, l: f64, a: &SpdMatrix) -> Result<Vector> {
    s.require_closed_form_regime()?;
    require_variance_in_bounds(s, a)?;
    let tau = s.require_time_and_level(t, l)?;
    let factor = if tau == 0.0 {
        expiry_tail_factor(l, s.strike)
    } else {
        let cf = ClosedFormPut::at(s, t, l)?;
        (cf.m * tau).exp() * norm_cdf(-cf.d_plus)
    };
    let slope = a.entry(0, 1) / a.entry(0, 0);
    let first = -s.beta * factor * l * (s.rho + slope * (1.0 - s.rho * s.rho).sqrt());
    Ok(Vector::from_row_slice(&[first, 0.0]))
}

fn require_variance_in_bounds(s: &PutScenario, a: &SpdMatrix) -> Result<()> {
    if a.dim() != 2 {
        return Err(Error::InvalidInput(format!("variance density must be 2x2, got {}", a.dim())));
    }
    let lo = s.a_floor();
    let hi = s.a_bar();
    if !loewner_leq(lo.entries(), a.entries(), LOEWNER_TOL)
        || !loewner_leq(a.entries(), hi.entries(), LOEWNER_TOL)
    {
        return Err(Error::NotSpd("variance density is outside [a_lo, a_hi]".into()));
    }
    Ok(())
}

/// First space derivative of the bound, dv/dl = -e^{m tau} N(-d_+).
///
/// # Errors
/// As for [`ClosedFormPut::at`].
pub fn bound_delta(s: &PutScenario, t: f64, l: f64) -> Result<f64> {
    let cf = ClosedFormPut::at(s, t, l)?;
    Ok(-(cf.m * cf.tau).exp() * norm_cdf(-cf.d_plus))
}

/// Second space derivative of the bound,
/// d2v/dl2 = e^{m tau} n(d_+) / (l beta_bar sqrt(tau)).
///
/// # Errors
/// As for [`ClosedFormPut::at`].
pub fn bound_gamma(s: &PutScenario, t: f64, l: f64) -> Result<f64> {
    let cf = ClosedFormPut::at(s, t, l)?;
    Ok((cf.m * cf.tau).exp() * norm_pdf(cf.d_plus) / (l * cf.beta_bar * cf.tau.sqrt()))
}

/// Instantaneous compensator rate of the tracking argument under variance
/// density `a`: the drift surplus that makes the hedged bound a
/// supermartingale under every feasible model. Nonnegative on the variance
/// interval and zero at the upper bound.
///
/// With w = (rho, sqrt(1 - rho^2)):
///
///   k = h beta sqrt(1 - rho^2) l v_l [sqrt(det a / a11) - sqrt(a2_hi)]
///       + 1/2 beta^2 l^2 v_ll [w^tr (a_bar - a) w].
///
/// # Errors
/// As for [`closed_form_bound`] with the additional requirement t < T (the
/// second derivative degenerates at maturity), plus the bounds check on `a`.
pub fn compensator_rate(s: &PutScenario, t: f64, l: f64, a: &SpdMatrix) -> Result<f64> {
    s.require_closed_form_regime()?;
    require_variance_in_bounds(s, a)?;
    let tau = s.require_time_and_level(t, l)?;
    if tau <= 0.0 {
        return Err(Error::InvalidInput(
            "compensator rate requires strictly positive time to maturity".into(),
        ));
    }
    let v_l = bound_delta(s, t, l)?;
    let v_ll = bound_gamma(s, t, l)?;
    let (a11, a12, a22) = (a.entry(0, 0), a.entry(0, 1), a.entry(1, 1));
    let det = a11 * a22 - a12 * a12;
    let one_m_rho2 = 1.0 - s.rho * s.rho;
    let first_bracket = (det / a11).sqrt() - s.a2_hi.sqrt();
    let quad_form = s.rho * s.rho * (s.a1_hi - a11) - 2.0 * s.rho * one_m_rho2.sqrt() * a12
        + one_m_rho2 * (s.a2_hi - a22);
    Ok(s.h * s.beta * one_m_rho2.sqrt() * l * v_l * first_bracket
        + 0.5 * s.beta * s.beta * l * l * v_ll * quad_form)
}

/// Cheapest riskless superreplication price of the put: the full strike
/// before maturity (the index is not traded and |rho| < 1 leaves its tail
/// unhedgeable), the payoff at maturity.
///
/// # Errors
/// [`Error::Regime`] when |rho| = 1 (the index becomes perfectly hedgeable
/// and the formula no longer applies); [`Error::InvalidInput`] for bad
/// (t, l).
pub fn superreplication_price(s: &PutScenario, t: f64, l: f64) -> Result<f64> {
    if s.rho.abs() >= 1.0 - REGIME_TOL {
        return Err(Error::Regime(
            "superreplication formula requires |rho| strictly below 1".into(),
        ));
    }
    let tau = s.require_time_and_level(t, l)?;
    if tau == 0.0 {
        Ok((s.strike - l).max(0.0))
    } else {
        Ok(s.strike)
    }
}

/// Sensitivity of the bound to the index drift gamma:
/// d pi / d gamma = -tau e^{m tau} l N(-d_+), nonpositive everywhere.
///
/// Differentiating strike * N(-d_-) - l e^{m tau} N(-d_+) in gamma (which
/// enters only through m) gives this expression after the identity
/// l e^{m tau} n(d_+) = strike * n(d_-) cancels the density terms; the
/// centered finite-difference oracle in the tests pins the N(-d_+) factor
/// (a plausible N(-d_-) variant fails it).
///
/// # Errors
/// As for [`closed_form_bound`].
pub fn gamma_sensitivity(s: &PutScenario, t: f64, l: f64) -> Result<f64> {
    s.require_closed_form_regime()?;
    let tau = s.require_time_and_level(t, l)?;
    if tau == 0.0 {
        return Ok(0.0);
    }
    let cf = ClosedFormPut::at(s, t, l)?;
    Ok(-tau * (cf.m * tau).exp() * l * norm_cdf(-cf.d_plus))
}

// --- semilinear PDE solver ---

/// Grid parameters of the PDE solver.
#[derive(Debug, Clone, Copy)]
pub struct PdeParams {
    /// Number of spatial nodes (log-spot).
    pub space_nodes: usize,
    /// Number of time nodes (including both endpoints).
    pub time_nodes: usize,
    /// Half-width of the log-spot window in units of beta_bar sqrt(T).
    pub width_stds: f64,
}

impl Default for PdeParams {
    fn default() -> Self {
        Self { space_nodes: 400, time_nodes: 400, width_stds: 8.0 }
    }
}

/// Solution of the backward semilinear PDE on a rectangular grid.
#[derive(Debug, Clone)]
pub struct PdeGrid {
    t_nodes: Vec<f64>,
    x_nodes: Vec<f64>,
    y_nodes: Vec<f64>,
    /// values[j][i] is the solution at time t_nodes[j], spot x_nodes[i].
    values: Vec<Vec<f64>>,
}

impl PdeGrid {
    /// Time nodes, ascending, t_0 = 0 through T.
    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    /// Spot nodes, ascending (uniform in log-spot).
    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    /// Solution values indexed [time][space].
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Terminal slice (equals the payoff exactly).
    pub fn terminal_slice(&self) -> &[f64] {
        self.values.last().expect("grid has at least one time node")
    }

    /// Bilinear interpolation in (t, log x).
    ///
    /// # Errors
    /// [`Error::InvalidInput`] when (t, x) is outside the grid rectangle.
    pub fn value_at(&self, t: f64, x: f64) -> Result<f64> {
        let y = x.ln();
        let (t0, t1) = (self.t_nodes[0], *self.t_nodes.last().unwrap());
        let (y0, y1) = (self.y_nodes[0], *self.y_nodes.last().unwrap());
        if !(t0..=t1).contains(&t) || !(y0..=y1).contains(&y) {
            return Err(Error::InvalidInput(format!(
                "query (t = {t}, x = {x}) outside the grid [{t0}, {t1}] x [{:.4}, {:.4}]",
                y0.exp(),
                y1.exp()
            )));
        }
        let locate = |nodes: &[f64], v: f64| -> (usize, f64) {
            let step = nodes[1] - nodes[0];
            let idx = (((v - nodes[0]) / step).floor() as usize).min(nodes.len() - 2);
            let w = ((v - nodes[idx]) / step).clamp(0.0, 1.0);
            (idx, w)
        };
        let (j, wt) = locate(&self.t_nodes, t);
        let (i, wy) = locate(&self.y_nodes, y);
        Ok((1.0 - wt) * ((1.0 - wy) * self.values[j][i] + wy * self.values[j][i + 1])
            + wt * ((1.0 - wy) * self.values[j + 1][i] + wy * self.values[j + 1][i + 1]))
    }
}

/// Driver of the robust good-deal PDE:
/// gamma x p + h beta sqrt(1 - rho^2) sqrt(a2_hi) x |p|.
pub fn good_deal_driver(s: &PutScenario) -> impl Fn(f64, f64) -> f64 {
    let gamma = s.gamma;
    let penalty = s.h * s.beta * (1.0 - s.rho * s.rho).sqrt() * s.a2_hi.sqrt();
    move |x, p| gamma * x * p + penalty * x * p.abs()
}

/// Driver of the coarser risk-measure bound:
/// gamma x p + (h + delta) beta_bar x |p|. Penalizes the full diffusion
/// loading, so its solution dominates the good-deal solution nodewise.
pub fn risk_measure_driver(s: &PutScenario) -> impl Fn(f64, f64) -> f64 {
    let gamma = s.gamma;
    let penalty = (s.h + s.delta) * s.beta_bar();
    move |x, p| gamma * x * p + penalty * x * p.abs()
}

/// Solves the backward semilinear PDE
///
///   v_t + driver(x, v_x) + 1/2 beta_bar^2 x^2 v_xx = 0,
///   v(T, x) = (strike - x)^+,
///
/// in log-spot coordinates on x in [strike e^{-W}, strike e^{+W}] with
/// W = width_stds * beta_bar sqrt(T), Dirichlet boundaries v = strike below
/// and v = 0 above. Time stepping averages the implicit and explicit
/// spatial operators with weight 1/2 (after two fully implicit startup
/// steps); the nonlinear driver is handled by a predictor step at the
/// previous time level followed by one corrector re-solve with the
/// time-averaged driver, keeping the overall scheme second order in time.
///
/// In space, the substitution v = e^{y/2} g removes the first-derivative
/// (convection) term of the log-coordinate diffusion, and the remaining
/// self-adjoint operator g_yy - g/4 is discretized with a fourth-order
/// compact (Numerov) stencil; the system stays tridiagonal. A plain
/// second-order stencil leaves a dispersive kink remnant of several 1e-3
/// relative in the far out-of-the-money tail at the default 400-node grid,
/// which the compact scheme removes. The grid is shifted by at most half a
/// cell so ln(strike) is a node, and iterates are projected onto the
/// provable solution bounds [0, strike].
///
/// # Errors
/// [`Error::Grid`] for degenerate grid parameters;
/// [`Error::Stability`] if an iterate exceeds 10x strike before projection.
pub fn solve_semilinear_pde<D: Fn(f64, f64) -> f64>(
    s: &PutScenario,
    driver: D,
    params: &PdeParams,
) -> Result<PdeGrid> {
    let n = params.space_nodes;
    let m = params.time_nodes;
    if n < 3 || m < 2 || !(params.width_stds > 0.0) {
        return Err(Error::Grid(format!(
            "need at least 3 space and 2 time nodes and positive width, got {n}, {m}, {}",
            params.width_stds
        )));
    }
    let beta_bar = s.beta_bar();
    let half_var = 0.5 * beta_bar * beta_bar;
    let width = params.width_stds * beta_bar * s.maturity.sqrt();
    let dy = 2.0 * width / (n - 1) as f64;
    // Anchor the grid so that ln(strike) lands exactly on a node.
    let k_log = s.strike.ln();
    let y_min = k_log - dy * (width / dy).round();
    let y_nodes: Vec<f64> = (0..n).map(|i| y_min + dy * i as f64).collect();
    let x_nodes: Vec<f64> = y_nodes.iter().map(|y| y.exp()).collect();
    let dt = s.maturity / (m - 1) as f64;
    let t_nodes: Vec<f64> = (0..m).map(|j| dt * j as f64).collect();

    let mut values = vec![vec![0.0; n]; m];
    for (i, x) in x_nodes.iter().enumerate() {
        values[m - 1][i] = (s.strike - x).max(0.0);
    }

    // In-place Thomas solve of the constant-coefficient tridiagonal system
    // (a_l, a_d, a_u) rhs; `sweep` is scratch for the forward elimination.
    fn thomas_solve(a_l: f64, a_d: f64, a_u: f64, rhs: &mut [f64], sweep: &mut [f64]) {
        let k = rhs.len();
        sweep[0] = a_u / a_d;
        rhs[0] /= a_d;
        for i in 1..k {
            let denom = a_d - a_l * sweep[i - 1];
            sweep[i] = a_u / denom;
            rhs[i] = (rhs[i] - a_l * rhs[i - 1]) / denom;
        }
        for i in (0..k - 1).rev() {
            let correction = sweep[i] * rhs[i + 1];
            rhs[i] -= correction;
        }
    }

    // Symmetrized coordinates: v = e^{y/2} g turns nu (v_yy - v_y) into
    // nu (g_yy - g/4). Numerov's identity M g'' = (delta^2/dy^2) g + O(dy^4)
    // with the mass stencil M = (1, 10, 1)/12 gives the semi-discrete system
    //   M dg/dtau = nu S g - (nu/4) M g + M D~,   S = (1, -2, 1)/dy^2,
    // where D~ is the driver mapped by e^{-y/2} and tau runs forward from
    // maturity.
    let nu = half_var;
    let to_g: Vec<f64> = y_nodes.iter().map(|y| (-0.5 * y).exp()).collect();
    let to_u: Vec<f64> = y_nodes.iter().map(|y| (0.5 * y).exp()).collect();
    let blowup = STABILITY_FACTOR * s.strike;
    let interior = n - 2;

    // Driver in g-coordinates from a full u-slice. The driver sits on the
    // explicit side, so a wide fourth-order slope stencil costs nothing;
    // second-order central and one-sided slopes cover the edge nodes (their
    // mass weight is 1/12 and the edge values are pinned).
    let d_tilde = |u: &[f64], out: &mut [f64]| {
        out[0] = to_g[0] * driver(x_nodes[0], (u[1] - u[0]) / (dy * x_nodes[0]));
        for i in 1..n - 1 {
            let p = if (2..n - 2).contains(&i) {
                (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2])
                    / (12.0 * dy * x_nodes[i])
            } else {
                (u[i + 1] - u[i - 1]) / (2.0 * dy * x_nodes[i])
            };
            out[i] = to_g[i] * driver(x_nodes[i], p);
        }
        out[n - 1] =
            to_g[n - 1] * driver(x_nodes[n - 1], (u[n - 1] - u[n - 2]) / (dy * x_nodes[n - 1]));
    };

    // Dirichlet values in g-coordinates, constant over the backward sweep.
    let g_lo = to_g[0] * s.strike;
    let g_hi = 0.0;

    // Time stepping starts from the pointwise payoff with a single
    // moment-matching correction at the strike node: sampling a hinge with
    // slope jump J on a uniform grid under-represents its integral against
    // smooth test functions by J dy^2 / 12, so adding J dy / 12 at the kink
    // node (J = strike, the slope jump of (strike - e^y)^+ in y) restores
    // clean high-order convergence of the diffused kink. The reported
    // terminal slice stays the exact payoff.
    let mut u_prev = values[m - 1].clone();
    let k_node = ((k_log - y_min) / dy).round() as usize;
    u_prev[k_node] += s.strike * dy / 12.0;
    let mut g_prev: Vec<f64> = u_prev.iter().zip(&to_g).map(|(u, w)| u * w).collect();
    let mut d_prev = vec![0.0; n];
    let mut d_star = vec![0.0; n];
    let mut u_star = vec![0.0; n];
    let mut g_star = vec![0.0; n];
    let mut rhs = vec![0.0; interior];
    let mut sweep = vec![0.0; interior];

    for step in 0..(m - 1) {
        let j = m - 2 - step; // filling values[j] from the level above
        let w = if step < IMPLICIT_STARTUP_STEPS { 1.0 } else { 0.5 };
        let c_im = w * dt * nu;
        let c_ex = (1.0 - w) * dt * nu;
        let off_l = (1.0 + 0.25 * c_im) / 12.0 - c_im / (dy * dy);
        let diag_l = (10.0 / 12.0) * (1.0 + 0.25 * c_im) + 2.0 * c_im / (dy * dy);
        let off_r = (1.0 - 0.25 * c_ex) / 12.0 + c_ex / (dy * dy);
        let diag_r = (10.0 / 12.0) * (1.0 - 0.25 * c_ex) - 2.0 * c_ex / (dy * dy);

        let sweep_stage =
            |d: &[f64], g_from: &[f64], rhs: &mut [f64], sweep: &mut [f64]| {
                for i in 1..=interior {
                    let mass_d = (d[i - 1] + 10.0 * d[i] + d[i + 1]) / 12.0;
                    rhs[i - 1] = off_r * g_from[i - 1]
                        + diag_r * g_from[i]
                        + off_r * g_from[i + 1]
                        + dt * mass_d;
                }
                rhs[0] -= off_l * g_lo;
                rhs[interior - 1] -= off_l * g_hi;
                thomas_solve(off_l, diag_l, off_l, rhs, sweep);
            };

        // Predictor: driver frozen at the previous time level.
        d_tilde(&u_prev, &mut d_prev);
        sweep_stage(&d_prev, &g_prev, &mut rhs, &mut sweep);
        g_star[0] = g_lo;
        g_star[n - 1] = g_hi;
        u_star[0] = s.strike;
        u_star[n - 1] = 0.0;
        for i in 0..interior {
            let u = rhs[i] * to_u[i + 1];
            if !u.is_finite() || u.abs() > blowup {
                return Err(Error::Stability(format!(
                    "PDE predictor {u:.3e} at t = {:.4}, x = {:.4} left the stable range",
                    t_nodes[j],
                    x_nodes[i + 1]
                )));
            }
            g_star[i + 1] = rhs[i];
            u_star[i + 1] = u;
        }

        // Corrector: re-solve with the time-averaged driver.
        d_tilde(&u_star, &mut d_star);
        for i in 0..n {
            d_star[i] = (1.0 - w) * d_prev[i] + w * d_star[i];
        }
        sweep_stage(&d_star, &g_prev, &mut rhs, &mut sweep);

        values[j][0] = s.strike;
        values[j][n - 1] = 0.0;
        for i in 0..interior {
            let v = rhs[i] * to_u[i + 1];
            if !v.is_finite() || v.abs() > blowup {
                return Err(Error::Stability(format!(
                    "PDE iterate {v:.3e} at t = {:.4}, x = {:.4} left the stable range",
                    t_nodes[j],
                    x_nodes[i + 1]
                )));
            }
            // Projection onto the provable bounds of the true solution.
            values[j][i + 1] = v.clamp(0.0, s.strike);
        }
        u_prev.copy_from_slice(&values[j]);
        for i in 0..n {
            g_prev[i] = u_prev[i] * to_g[i];
        }
    }

    Ok(PdeGrid { t_nodes, x_nodes, y_nodes, values })
}

// --- control representation of the bound for the normalized regime ---

/// Drift/variance pair (beta(a), gamma(a)) of the controlled index under
/// variance density `a` in the normalized regime sigma_s = 1, gamma = 0,
/// beta = 1, rho = 0, delta = 0:
///
///   beta(a)  = a22  (variance rate of the index),
///   gamma(a) = -b a12/a11 - sqrt(h^2 - b^2/a11) sqrt(det a / a11).
///
/// # Errors
/// [`Error::Regime`] outside the normalized regime;
/// [`Error::InfeasibleTheta`] when h^2 <= b^2 / a11 (the Sharpe cap binds);
/// [`Error::NotSpd`]/[`Error::InvalidInput`] for densities outside bounds.
pub fn control_domain_point(s: &PutScenario, a: &SpdMatrix) -> Result<(f64, f64)> {
    require_control_regime(s)?;
    require_variance_in_bounds(s, a)?;
    let (a11, a12, a22) = (a.entry(0, 0), a.entry(0, 1), a.entry(1, 1));
    let slack = s.h * s.h - s.b * s.b / a11;
    if slack <= 0.0 {
        return Err(Error::InfeasibleTheta(format!(
            "h^2 = {:.6} does not exceed b^2/a11 = {:.6}",
            s.h * s.h,
            s.b * s.b / a11
        )));
    }
    let det = a11 * a22 - a12 * a12;
    let drift = -s.b * a12 / a11 - slack.sqrt() * (det / a11).sqrt();
    Ok((a22, drift))
}

fn require_control_regime(s: &PutScenario) -> Result<()> {
    let checks = [
        ("sigma_s", s.sigma_s - 1.0),
        ("gamma", s.gamma),
        ("beta", s.beta - 1.0),
        ("rho", s.rho),
        ("delta", s.delta),
    ];
    for (name, dev) in checks {
        if dev.abs() > REGIME_TOL {
            return Err(Error::Regime(format!(
                "control representation requires sigma_s = 1, gamma = 0, beta = 1, \
                 rho = 0, delta = 0; {name} deviates by {dev:.3e}"
            )));
        }
    }
    Ok(())
}

/// Result of the control-representation grid search.
#[derive(Debug, Clone)]
pub struct ControlSearch {
    /// Maximal lognormal put value over the sampled densities.
    pub value: f64,
    /// Maximizing density (ties resolved toward the larger trace, then
    /// lexicographically by (a11, a22, -|a12|)).
    pub argmax: SpdMatrix,
    /// Number of densities evaluated.
    pub evaluated: usize,
}

/// Grid search for the valuation bound in the normalized regime: maximizes
/// the exact lognormal put value with drift gamma(a) and volatility
/// sqrt(beta(a)) over a grid of admissible densities.
///
/// The grid takes `points` values per diagonal coordinate; the off-diagonal
/// axis uses an odd refinement of `points` (zero always included) over the
/// interval allowed by the two-sided positive-semidefinite constraints
/// |a12| <= min over the bound gaps of the geometric means. With b = 0 the
/// value does not depend on a11 at a12 = 0, so the trace tie-break selects
/// the upper bound diag(a1_hi, a2_hi).
///
/// # Errors
/// Regime and feasibility errors as in [`control_domain_point`];
/// [`Error::Grid`] for fewer than 2 points per axis.
pub fn robust_control_bound(s: &PutScenario, points: usize) -> Result<ControlSearch> {
    require_control_regime(s)?;
    if points < 2 {
        return Err(Error::Grid(format!("need at least 2 points per axis, got {points}")));
    }
    if s.h * s.h <= s.b * s.b / s.a1_lo {
        return Err(Error::InfeasibleTheta(format!(
            "h^2 = {:.6} does not exceed the worst-case b^2/a11 = {:.6}",
            s.h * s.h,
            s.b * s.b / s.a1_lo
        )));
    }
    // Endpoint-exact linspace: rounding like lo + (hi - lo) * 1.0 can
    // overshoot hi by an ulp, which would poison the band formula below.
    let lin = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
        (0..k)
            .map(|i| if i + 1 == k { hi } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 })
            .collect()
    };
    let off_points = if points % 2 == 1 { points } else { points + 1 };

    let tie_tol = |best: f64| 1e-12 * (1.0 + best.abs());
    let mut best: Option<(f64, SpdMatrix)> = None;
    let mut evaluated = 0usize;

    for &a11 in &lin(s.a1_lo, s.a1_hi, points) {
        for &a22 in &lin(s.a2_lo, s.a2_hi, points) {
            let band = (((a11 - s.a1_lo) * (a22 - s.a2_lo)).max(0.0))
                .sqrt()
                .min((((s.a1_hi - a11) * (s.a2_hi - a22)).max(0.0)).sqrt());
            let offs = if band > 0.0 { lin(-band, band, off_points) } else { vec![0.0] };
            for &a12 in &offs {
                let a = SpdMatrix::new(Matrix::from_row_slice(2, 2, &[a11, a12, a12, a22]))?;
                let (var_rate, drift) = control_domain_point(s, &a)?;
                let value =
                    lognormal_put_value(s.l0, s.strike, drift, var_rate.sqrt(), s.maturity);
                evaluated += 1;
                let replace = match &best {
                    None => true,
                    Some((bv, ba)) => {
                        if value > bv + tie_tol(*bv) {
                            true
                        } else if value < bv - tie_tol(*bv) {
                            false
                        } else {
                            let (ct, bt) = (a11 + a22, ba.entry(0, 0) + ba.entry(1, 1));
                            if ct != bt {
                                ct > bt
                            } else if a11 != ba.entry(0, 0) {
                                a11 > ba.entry(0, 0)
                            } else if a22 != ba.entry(1, 1) {
                                a22 > ba.entry(1, 1)
                            } else {
                                a12.abs() < ba.entry(0, 1).abs()
                            }
                        }
                    }
                };
                if replace {
                    best = Some((value, a));
                }
            }
        }
    }
    let (value, argmax) = best.expect("grid is nonempty for points >= 2");
    Ok(ControlSearch { value, argmax, evaluated })
}

/// Optimal hedge recovered through the saddle-point driver: builds the
/// driver point with z = a^{1/2} Z from the closed-form diffusion loading
/// and maps the maximizer back through a^{-1/2}. Used by tests and examples
/// to cross-check [`closed_form_hedge`].
///
/// # Errors
/// Propagates closed-form and driver construction failures.
pub fn hedge_via_driver(s: &PutScenario, t: f64, l: f64, a: &SpdMatrix) -> Result<Vector> {
    let market = s.to_market_spec()?;
    let z_control = closed_form_control(s, t, l)?;
    let point = GenPoint::from_market(&market, a, a.sqrt() * &z_control)?;
    let phi_scaled = point.optimal_hedge(&Vector::zeros(2))?;
    a.sqrt()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotSpd("variance square root lost positivity".into()))
        .map(|ch| ch.solve(&phi_scaled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::norm_pdf;

    fn base() -> PutScenario {
        PutScenario::default()
    }

    /// Scenario in the normalized control regime with adjustable drift b.
    fn control_scenario(b: f64, h: f64) -> PutScenario {
        PutScenario::new(
            100.0,
            100.0,
            1.0,
            1.0,
            0.0,
            0.0,
            b,
            100.0,
            1.0,
            (0.8, 0.8),
            (1.2, 1.2),
            h,
            0.0,
        )
        .unwrap()
    }

    // --- derived constants ---

    #[test]
    fn derived_constants_satisfy_their_definitions() {
        let s = base();
        let bb = s.beta_bar();
        let expect_bb2 = s.beta * s.beta
            * (s.rho * s.rho * s.a1_hi + (1.0 - s.rho * s.rho) * s.a2_hi);
        assert!((bb * bb - expect_bb2).abs() < 1e-12);
        // rho_bar beta_bar = rho sqrt(a1_hi) beta.
        assert!((s.rho_bar() * bb - s.rho * s.a1_hi.sqrt() * s.beta).abs() < 1e-12);
        let m = s.penalized_drift();
        assert!(
            (m - (0.0 - 0.3 * 0.2 * 0.75f64.sqrt() * 1.2f64.sqrt())).abs() < 1e-12,
            "m = {m}"
        );
    }

    // --- bound ---

    #[test]
    fn bound_equals_payoff_at_maturity() {
        let s = base();
        assert_eq!(closed_form_bound(&s, 1.0, 120.0).unwrap(), 0.0);
        assert_eq!(closed_form_bound(&s, 1.0, 80.0).unwrap(), 20.0);
    }

    #[test]
    fn bound_matches_quadrature_oracle() {
        // Independent oracle: integrate the payoff against the lognormal
        // density with drift m and volatility beta_bar.
        let s = base();
        let (t, l) = (0.25, 95.0);
        let tau = s.maturity - t;
        let m = s.penalized_drift();
        let bb = s.beta_bar();
        let sd = bb * tau.sqrt();
        let mean = (m - 0.5 * bb * bb) * tau;
        let steps = 200_000;
        let (lo, hi) = (mean - 10.0 * sd, mean + 10.0 * sd);
        let dx = (hi - lo) / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let x = lo + (i as f64 + 0.5) * dx;
            acc += (s.strike - l * x.exp()).max(0.0) * norm_pdf((x - mean) / sd) / sd * dx;
        }
        let bound = closed_form_bound(&s, t, l).unwrap();
        assert!((bound - acc).abs() < 1e-6 * s.strike, "bound {bound} vs quadrature {acc}");
    }

    #[test]
    fn bound_sits_between_zero_and_superreplication() {
        let s = base();
        for l in [40.0, 80.0, 100.0, 150.0, 240.0] {
            let bound = closed_form_bound(&s, 0.0, l).unwrap();
            let cap = superreplication_price(&s, 0.0, l).unwrap();
            assert!(bound > 0.0 && bound < cap, "l = {l}: {bound} vs cap {cap}");
        }
    }

    #[test]
    fn bound_increases_with_sharpe_cap() {
        let mut values = Vec::new();
        for h in [0.0, 0.3, 1.0, 3.0] {
            let mut s = base();
            s.h = h;
            s.validate().unwrap();
            values.push(closed_form_bound(&s, 0.0, 100.0).unwrap());
        }
        for w in values.windows(2) {
            assert!(w[0] < w[1] + 1e-12, "bound not monotone in h: {values:?}");
        }
    }

    #[test]
    fn bound_rejects_wrong_regime() {
        let mut s = base();
        s.b = 0.05;
        assert!(matches!(closed_form_bound(&s, 0.0, 100.0), Err(Error::Regime(_))));
        let mut s2 = base();
        s2.delta = 0.01;
        assert!(matches!(closed_form_bound(&s2, 0.0, 100.0), Err(Error::Regime(_))));
    }

    // --- control and hedge ---

    #[test]
    fn control_matches_finite_difference_of_bound() {
        let s = base();
        for (t, l) in [(0.0, 100.0), (0.3, 80.0), (0.7, 130.0)] {
            let z = closed_form_control(&s, t, l).unwrap();
            let step = 1e-5 * l;
            let up = closed_form_bound(&s, t, l + step).unwrap();
            let down = closed_form_bound(&s, t, l - step).unwrap();
            let v_l = (up - down) / (2.0 * step);
            let oracle_scale = s.beta * l * v_l;
            assert!(
                (z[0] - oracle_scale * s.rho).abs() < 1e-6 * (1.0 + z[0].abs()),
                "first control component"
            );
            assert!(
                (z[1] - oracle_scale * (1.0 - s.rho * s.rho).sqrt()).abs()
                    < 1e-6 * (1.0 + z[1].abs()),
                "second control component"
            );
        }
    }

    #[test]
    fn control_at_maturity_uses_payoff_indicator() {
        let s = base();
        let deep = closed_form_control(&s, 1.0, 60.0).unwrap();
        assert!((deep[0] - (-s.beta * 60.0 * s.rho)).abs() < 1e-12);
        let dead = closed_form_control(&s, 1.0, 160.0).unwrap();
        assert_eq!(dead.norm(), 0.0);
    }

    #[test]
    fn hedge_second_component_vanishes_and_slope_enters_first() {
        let s = base();
        // |a12| must stay within the Loewner band min(sqrt(0.2*0.2), ...).
        let a = SpdMatrix::new(Matrix::from_row_slice(2, 2, &[1.0, 0.15, 0.15, 1.0])).unwrap();
        let phi = closed_form_hedge(&s, 0.2, 90.0, &a).unwrap();
        assert_eq!(phi[1], 0.0);
        // Against the diagonal case the slope term a12/a11 shifts the load.
        let diag = SpdMatrix::from_diagonal(&[1.0, 1.0]).unwrap();
        let phi_diag = closed_form_hedge(&s, 0.2, 90.0, &diag).unwrap();
        let cf = ClosedFormPut::at(&s, 0.2, 90.0).unwrap();
        let factor = -s.beta * (cf.m * cf.tau).exp() * norm_cdf(-cf.d_plus) * 90.0;
        assert!((phi_diag[0] - factor * s.rho).abs() < 1e-12);
        assert!(
            (phi[0] - factor * (s.rho + 0.15 * (1.0 - s.rho * s.rho).sqrt())).abs() < 1e-12
        );
    }

    #[test]
    fn hedge_agrees_with_saddle_point_driver() {
        let s = base();
        let densities = [
            SpdMatrix::from_diagonal(&[0.8, 0.8]).unwrap(),
            SpdMatrix::from_diagonal(&[1.0, 1.0]).unwrap(),
            SpdMatrix::from_diagonal(&[1.2, 1.2]).unwrap(),
            SpdMatrix::new(Matrix::from_row_slice(2, 2, &[1.0, 0.12, 0.12, 1.1])).unwrap(),
        ];
        for a in &densities {
            for (t, l) in [(0.0, 100.0), (0.4, 75.0), (0.9, 125.0)] {
                let direct = closed_form_hedge(&s, t, l, a).unwrap();
                let via_driver = hedge_via_driver(&s, t, l, a).unwrap();
                assert!(
                    (&direct - &via_driver).norm() <= 1e-10 * (1.0 + direct.norm()),
                    "hedges disagree at (t={t}, l={l}): {direct} vs {via_driver}"
                );
            }
        }
    }

    #[test]
    fn hedge_rejects_density_outside_bounds() {
        let s = base();
        let a = SpdMatrix::from_diagonal(&[1.4, 1.0]).unwrap();
        assert!(matches!(
            closed_form_hedge(&s, 0.0, 100.0, &a),
            Err(Error::NotSpd(_))
        ));
    }

    // --- compensator rate ---

    #[test]
    fn compensator_vanishes_at_upper_bound() {
        let s = base();
        let k = compensator_rate(&s, 0.3, 100.0, &s.a_bar()).unwrap();
        assert!(k.abs() < 1e-12, "k(a_bar) = {k}");
    }

    #[test]
    fn compensator_strictly_positive_below_upper_bound() {
        let s = base();
        let k = compensator_rate(&s, 0.3, 100.0, &s.a_floor()).unwrap();
        assert!(k > 1e-4, "k(a_lo) = {k} should be strictly positive at the money");
    }

    #[test]
    fn compensator_nonnegative_on_sampled_densities() {
        let s = base();
        for i in 0..5 {
            for j in 0..5 {
                let a11 = 0.8 + 0.1 * i as f64;
                let a22 = 0.8 + 0.1 * j as f64;
                let band = (((a11 - 0.8) * (a22 - 0.8)).max(0.0))
                    .sqrt()
                    .min((((1.2 - a11) * (1.2 - a22)).max(0.0)).sqrt());
                for frac in [-0.9, -0.4, 0.0, 0.4, 0.9] {
                    let a12 = band * frac;
                    let a = SpdMatrix::new(Matrix::from_row_slice(
                        2,
                        2,
                        &[a11, a12, a12, a22],
                    ))
                    .unwrap();
                    for (t, l) in [(0.1, 80.0), (0.5, 100.0), (0.9, 120.0)] {
                        let k = compensator_rate(&s, t, l, &a).unwrap();
                        assert!(
                            k >= -1e-10,
                            "k = {k} negative at a = ({a11}, {a12}, {a22}), t = {t}, l = {l}"
                        );
                    }
                }
            }
        }
    }

    // --- superreplication ---

    #[test]
    fn superreplication_is_strike_before_maturity() {
        let s = base();
        assert_eq!(superreplication_price(&s, 0.5, 150.0).unwrap(), 100.0);
        assert_eq!(superreplication_price(&s, 1.0, 120.0).unwrap(), 0.0);
        assert_eq!(superreplication_price(&s, 1.0, 70.0).unwrap(), 30.0);
        let mut complete = base();
        complete.rho = 1.0;
        assert!(matches!(
            superreplication_price(&complete, 0.0, 100.0),
            Err(Error::Regime(_))
        ));
    }

    // --- gamma sensitivity ---

    #[test]
    fn gamma_sensitivity_matches_finite_difference() {
        let s = base();
        let step = 1e-5;
        for gamma in [-0.1, 0.0, 0.15] {
            for l in [50.0, 80.0, 100.0, 130.0, 200.0] {
                for t in [0.0, 0.5] {
                    let mut sc = s.clone();
                    sc.gamma = gamma;
                    let analytic = gamma_sensitivity(&sc, t, l).unwrap();
                    let mut up = sc.clone();
                    up.gamma = gamma + step;
                    let mut down = sc.clone();
                    down.gamma = gamma - step;
                    let fd = (closed_form_bound(&up, t, l).unwrap()
                        - closed_form_bound(&down, t, l).unwrap())
                        / (2.0 * step);
                    assert!(
                        (analytic - fd).abs() <= 1e-6 * (1.0 + analytic.abs()),
                        "gamma = {gamma}, l = {l}, t = {t}: analytic {analytic} vs FD {fd}"
                    );
                    assert!(analytic <= 0.0, "sensitivity must be nonpositive");
                }
            }
        }
    }

    #[test]
    fn gamma_sensitivity_rejects_the_plausible_variant() {
        // The same expression with N(-d_-) in place of N(-d_+) fails the
        // finite-difference check; this pins the resolution.
        let s = base();
        let (t, l) = (0.0, 100.0);
        let cf = ClosedFormPut::at(&s, t, l).unwrap();
        let variant = -cf.tau * (cf.m * cf.tau).exp() * l * norm_cdf(-cf.d_minus);
        let step = 1e-5;
        let mut up = s.clone();
        up.gamma += step;
        let mut down = s.clone();
        down.gamma -= step;
        let fd = (closed_form_bound(&up, t, l).unwrap()
            - closed_form_bound(&down, t, l).unwrap())
            / (2.0 * step);
        assert!(
            (variant - fd).abs() > 100.0 * (1e-6 * (1.0 + fd.abs())),
            "the variant should be clearly distinguishable: {variant} vs {fd}"
        );
    }

    #[test]
    fn gamma_sensitivity_is_zero_at_maturity() {
        assert_eq!(gamma_sensitivity(&base(), 1.0, 100.0).unwrap(), 0.0);
    }

    // --- PDE ---

    #[test]
    fn pde_terminal_slice_is_exact_payoff() {
        let s = base();
        let grid = solve_semilinear_pde(&s, good_deal_driver(&s), &PdeParams {
            space_nodes: 101,
            time_nodes: 51,
            width_stds: 8.0,
        })
        .unwrap();
        for (i, &x) in grid.x_nodes().iter().enumerate() {
            assert_eq!(grid.terminal_slice()[i], (s.strike - x).max(0.0));
        }
        // Strike lies exactly on a node.
        assert!(grid
            .x_nodes()
            .iter()
            .any(|&x| (x - s.strike).abs() < 1e-9 * s.strike));
    }

    #[test]
    fn pde_matches_closed_form_on_interior() {
        let s = base();
        let grid =
            solve_semilinear_pde(&s, good_deal_driver(&s), &PdeParams::default()).unwrap();
        let mut worst: f64 = 0.0;
        for (i, &x) in grid.x_nodes().iter().enumerate() {
            if x < 0.5 * s.strike || x > 2.0 * s.strike {
                continue;
            }
            let exact = closed_form_bound(&s, 0.0, x).unwrap();
            let rel = (grid.values()[0][i] - exact).abs() / exact;
            worst = worst.max(rel);
        }
        assert!(worst <= 1e-3, "max interior relative error {worst:.3e} exceeds 1e-3");
    }

    #[test]
    fn pde_with_zero_driver_prices_driftless_put() {
        let s = base();
        let grid = solve_semilinear_pde(&s, |_, _| 0.0, &PdeParams::default()).unwrap();
        let bb = s.beta_bar();
        let mut worst: f64 = 0.0;
        for (i, &x) in grid.x_nodes().iter().enumerate() {
            if x < 0.5 * s.strike || x > 2.0 * s.strike {
                continue;
            }
            let exact = lognormal_put_value(x, s.strike, 0.0, bb, s.maturity);
            let rel = (grid.values()[0][i] - exact).abs() / exact;
            worst = worst.max(rel);
        }
        assert!(worst <= 1e-3, "zero-driver solution off by {worst:.3e}");
    }

    #[test]
    fn risk_measure_solution_dominates_good_deal_solution() {
        let mut s = base();
        s.delta = 0.02;
        // The good-deal driver ignores delta; compare at the same scenario.
        let params = PdeParams { space_nodes: 201, time_nodes: 201, width_stds: 8.0 };
        let gd = solve_semilinear_pde(&s, good_deal_driver(&s), &params).unwrap();
        let risk = solve_semilinear_pde(&s, risk_measure_driver(&s), &params).unwrap();
        for j in 0..gd.values().len() {
            for i in 0..gd.x_nodes().len() {
                assert!(
                    risk.values()[j][i] >= gd.values()[j][i] - 1e-6 * s.strike,
                    "dominance failed at node ({j}, {i})"
                );
            }
        }
        // The risk-measure solution itself matches its linear closed form.
        let m_risk = s.gamma - (s.h + s.delta) * s.beta_bar();
        let at_money = risk.value_at(0.0, 100.0).unwrap();
        let exact = lognormal_put_value(100.0, s.strike, m_risk, s.beta_bar(), s.maturity);
        assert!(
            (at_money - exact).abs() / exact <= 1e-3,
            "risk-measure PDE {at_money} vs closed form {exact}"
        );
    }

    #[test]
    fn pde_values_stay_within_payoff_bounds() {
        let s = base();
        let grid =
            solve_semilinear_pde(&s, good_deal_driver(&s), &PdeParams::default()).unwrap();
        for row in grid.values() {
            for &v in row {
                assert!((0.0..=s.strike).contains(&v), "value {v} escaped [0, strike]");
            }
        }
    }

    #[test]
    fn pde_interpolation_reproduces_nodes_and_midpoints() {
        let s = base();
        let grid =
            solve_semilinear_pde(&s, good_deal_driver(&s), &PdeParams::default()).unwrap();
        let x = grid.x_nodes()[200];
        let t = grid.t_nodes()[100];
        assert_eq!(grid.value_at(t, x).unwrap(), grid.values()[100][200]);
        // Midpoint value interpolates between neighbors and stays close to
        // the closed form.
        let xm = (grid.x_nodes()[200] * grid.x_nodes()[201]).sqrt();
        let interp = grid.value_at(0.0, xm).unwrap();
        let exact = closed_form_bound(&s, 0.0, xm).unwrap();
        assert!((interp - exact).abs() / exact < 2e-3, "{interp} vs {exact}");
        assert!(grid.value_at(0.0, 1e9).is_err());
    }

    #[test]
    fn pde_rejects_degenerate_grids() {
        let s = base();
        let params = PdeParams { space_nodes: 2, time_nodes: 10, width_stds: 8.0 };
        assert!(matches!(
            solve_semilinear_pde(&s, good_deal_driver(&s), &params),
            Err(Error::Grid(_))
        ));
    }

    // --- control representation ---

    #[test]
    fn control_domain_point_matches_square_root_entry_path() {
        // Independent oracle: sqrt(det a / a11) = (c11 c22 - c12^2)/sqrt(a11)
        // through the entries c of the matrix square root.
        let s = control_scenario(0.1, 0.4);
        let a12 = 0.12;
        let a = SpdMatrix::new(Matrix::from_row_slice(2, 2, &[1.0, a12, a12, 1.1])).unwrap();
        let (var_rate, drift) = control_domain_point(&s, &a).unwrap();
        assert_eq!(var_rate, 1.1);
        let c = a.sqrt();
        let det_root = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(0, 1)];
        let expected = -0.1 * a12 / 1.0
            - (0.4f64 * 0.4 - 0.1 * 0.1 / 1.0).sqrt() * det_root / 1.0f64.sqrt();
        assert!((drift - expected).abs() < 1e-10, "{drift} vs {expected}");
    }

    #[test]
    fn control_domain_rejects_wrong_regime_and_binding_cap() {
        let s = base(); // rho = 0.5, beta = 0.2: outside the normalized regime
        assert!(matches!(
            control_domain_point(&s, &s.a_bar()),
            Err(Error::Regime(_))
        ));
        // A Sharpe-infeasible scenario never passes construction (the
        // feasibility margin is the same h^2 > b^2/a1_lo condition) ...
        let err = PutScenario::new(
            100.0,
            100.0,
            1.0,
            1.0,
            0.0,
            0.0,
            0.5,
            100.0,
            1.0,
            (0.8, 0.8),
            (1.2, 1.2),
            0.4,
            0.0,
        );
        assert!(err.is_err(), "Sharpe-infeasible scenario must not validate");
        // ... so the point-level guard is probed by mutating a valid one.
        let mut tight = control_scenario(0.1, 0.4);
        tight.h = 0.05;
        assert!(matches!(
            control_domain_point(&tight, &tight.a_floor()),
            Err(Error::InfeasibleTheta(_))
        ));
        assert!(matches!(
            robust_control_bound(&tight, 5),
            Err(Error::InfeasibleTheta(_))
        ));
    }

    #[test]
    fn robust_control_bound_attains_upper_bound_without_drift() {
        let s = control_scenario(0.0, 0.3);
        let search = robust_control_bound(&s, 20).unwrap();
        assert!(
            (search.argmax.entries() - s.a_bar().entries()).norm() < 1e-12,
            "argmax {:?} is not a_bar",
            search.argmax
        );
        let exact = lognormal_put_value(
            s.l0,
            s.strike,
            -s.h * s.a2_hi.sqrt(),
            s.a2_hi.sqrt(),
            s.maturity,
        );
        assert!((search.value - exact).abs() < 1e-12, "{} vs {exact}", search.value);
    }

    #[test]
    fn robust_control_bound_is_stable_under_refinement() {
        let s = control_scenario(0.1, 0.4);
        let coarse = robust_control_bound(&s, 20).unwrap();
        let fine = robust_control_bound(&s, 40).unwrap();
        assert!(
            (coarse.value - fine.value).abs() <= 1e-3 * s.strike,
            "refinement moved the bound: {} -> {}",
            coarse.value,
            fine.value
        );
        // The sup dominates the value at the upper bound density.
        let (var_rate, drift) = control_domain_point(&s, &s.a_bar()).unwrap();
        let at_bar = lognormal_put_value(s.l0, s.strike, drift, var_rate.sqrt(), s.maturity);
        assert!(fine.value >= at_bar - 1e-12);
    }

}
