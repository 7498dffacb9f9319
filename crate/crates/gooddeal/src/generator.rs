//! Saddle-point driver of the robust valuation equation.
//!
//! For a fixed variance density a (through its projection pair), a traded
//! price of risk xi, a Sharpe cap h, and a drift-uncertainty radius delta,
//! the driver evaluated at z (already premultiplied by a^{1/2}) is
//!
//!   F(z) = inf_{|theta| <= delta} F_theta(z),
//!   F_theta(z) = -ker(theta)^tr ker(z) + xi^tr im(z)
//!                - sqrt(h^2 - |xi + im(theta)|^2) * |ker(z)|,
//!
//! where `im`/`ker` project onto the traded and unhedgeable subspaces. Each
//! F_theta(z) is itself the value of the concave maximization over hedges
//!
//!   F(phi, theta) = xi^tr phi - theta^tr (z - phi) - h |z - phi|,
//!     phi in the traded subspace,
//!
//! whose unique maximizer is
//!
//!   phi(theta) = im(z) + |ker(z)| (h^2 - |xi + im(theta)|^2)^{-1/2}
//!                (xi + im(theta)).
//!
//! The robust search returns the minimizing drift, the corresponding hedge,
//! and a saddle diagnostic: at an exact saddle the value coincides with
//! inf over theta of F(phi, .), which has the closed form
//! xi^tr phi - (h + delta) |z - phi|; the absolute difference is reported
//! as `minmax_gap` and vanishes quadratically in the optimizer error.
//!
//! Everything here requires the strict standing hypothesis
//! |xi| + delta < h, which makes the square root uniformly positive over
//! the whole drift ball.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Projector, SpdMatrix, Vector};
use crate::market::{market_price_of_risk, MarketSpec, NORM_SLACK};
use crate::stats::ball_sample;

/// Convergence tolerance of the local refinement of the worst-case drift
/// (step size relative to max(delta, 1)).
pub const REFINEMENT_TOL: f64 = 1e-10;
/// Number of ray directions of the coarse drift grid in dimension 2.
pub const GRID_DIRECTIONS_2D: usize = 32;
/// Number of radii of the coarse drift grid in dimension 2.
pub const GRID_RADII_2D: usize = 8;
/// Size of the low-discrepancy drift sample above dimension 2.
pub const GRID_SAMPLE_ND: usize = 4096;
/// Factor in the hedge truncation radius of the brute-force oracle.
pub const TRUNCATION_FACTOR: f64 = 10.0;

/// A point at which the driver is evaluated: direction z, projection pair,
/// traded price of risk, Sharpe cap, and drift radius.
#[derive(Debug, Clone)]
pub struct GenPoint {
    /// Driver argument. Convention: z already carries the a^{1/2} factor,
    /// i.e. callers premultiply their valuation-equation control by a^{1/2}.
    z: Vector,
    projector: Projector,
    xi: Vector,
    h: f64,
    delta: f64,
}

/// Outcome of the robust driver evaluation.
#[derive(Debug, Clone)]
pub struct SaddleResult {
    /// inf over the drift ball of F_theta(z).
    pub value: f64,
    /// Minimizing drift perturbation.
    pub worst_drift: Vector,
    /// Traded-subspace component of the minimizing drift (only this part
    /// moves the price of risk; reported alongside the full vector).
    pub worst_drift_traded: Vector,
    /// Optimal hedge at the worst-case drift.
    pub hedge: Vector,
    /// |value - inf_theta F(hedge, theta)|; zero at an exact saddle.
    pub minmax_gap: f64,
}

/// Brute-force minmax evaluation on nested grids.
#[derive(Debug, Clone)]
pub struct MinmaxReport {
    /// min over the drift grid of max over the hedge grid of F(phi, theta).
    pub inf_sup: f64,
    /// max over the hedge grid of min over the drift grid of F(phi, theta).
    pub sup_inf: f64,
    /// |inf_sup - sup_inf|.
    pub gap: f64,
    /// Conservative bound on the gap from Lipschitz constants times grid
    /// covering radii; the true (zero) gap is certified up to this amount.
    pub resolution_bound: f64,
}

impl GenPoint {
    /// Builds an evaluation point after checking the standing hypothesis.
    ///
    /// # Errors
    /// - [`Error::InvalidInput`] on dimension mismatches or when `xi` has a
    ///   component outside the traded subspace;
    /// - [`Error::InfeasibleTheta`] when |xi| + delta >= h (the strict
    ///   hypothesis fails and the square root can vanish).
    pub fn new(z: Vector, projector: Projector, xi: Vector, h: f64, delta: f64) -> Result<Self> {
        let n = projector.dim();
        if z.len() != n || xi.len() != n {
            return Err(Error::InvalidInput(format!(
                "z and xi must have length {n}, got {} and {}",
                z.len(),
                xi.len()
            )));
        }
        if delta < 0.0 || !h.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "need finite h and delta >= 0, got h = {h}, delta = {delta}"
            )));
        }
        let stray = projector.ker(&xi).norm();
        if stray > 1e-9 * (1.0 + xi.norm()) {
            return Err(Error::InvalidInput(format!(
                "xi has an unhedgeable component of norm {stray:.3e}"
            )));
        }
        if !(xi.norm() + delta < h) {
            return Err(Error::InfeasibleTheta(format!(
                "|xi| + delta = {:.6} must be strictly below h = {:.6}",
                xi.norm() + delta,
                h
            )));
        }
        Ok(Self { z, projector, xi, h, delta })
    }

    /// Builds the point from a market description: the projection pair and
    /// price of risk come from the variance density `a`.
    ///
    /// # Errors
    /// Propagates projection and feasibility failures.
    pub fn from_market(spec: &MarketSpec, a: &SpdMatrix, z: Vector) -> Result<Self> {
        let projector = spec.projector(a)?;
        let xi = market_price_of_risk(spec, a)?;
        Self::new(z, projector, xi, spec.h(), spec.delta())
    }

    /// Driver argument z (a^{1/2}-premultiplied convention).
    pub fn z(&self) -> &Vector {
        &self.z
    }

    /// Projection pair in use.
    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    /// Traded price of risk.
    pub fn xi(&self) -> &Vector {
        &self.xi
    }

    /// Sharpe cap h.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Drift-uncertainty radius delta.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same evaluation data at a different argument z.
    ///
    /// # Errors
    /// [`Error::InvalidInput`] if the length of `z` changes.
    pub fn with_z(&self, z: Vector) -> Result<Self> {
        Self::new(z, self.projector.clone(), self.xi.clone(), self.h, self.delta)
    }

    fn sqrt_term(&self, theta: &Vector) -> Result<f64> {
        if theta.len() != self.z.len() {
            return Err(Error::InvalidInput(format!(
                "theta must have length {}, got {}",
                self.z.len(),
                theta.len()
            )));
        }
        if theta.norm() > self.delta + NORM_SLACK {
            return Err(Error::InfeasibleTheta(format!(
                "|theta| = {:.6e} exceeds delta = {:.6e}",
                theta.norm(),
                self.delta
            )));
        }
        let shifted = &self.xi + self.projector.im(theta);
        let s2 = self.h * self.h - shifted.norm_squared();
        if s2 <= 0.0 {
            return Err(Error::InfeasibleTheta(format!(
                "|xi + im(theta)| = {:.6} reaches the Sharpe cap h = {:.6}",
                shifted.norm(),
                self.h
            )));
        }
        Ok(s2)
    }

    /// Driver at a fixed drift perturbation: F_theta(z).
    ///
    /// # Errors
    /// [`Error::InfeasibleTheta`] when theta leaves the delta-ball or the
    /// square-root argument is not strictly positive.
    pub fn driver(&self, theta: &Vector) -> Result<f64> {
        let s2 = self.sqrt_term(theta)?;
        let ker_z = self.projector.ker(&self.z);
        let im_z = self.projector.im(&self.z);
        Ok(-self.projector.ker(theta).dot(&ker_z) + self.xi.dot(&im_z) - s2.sqrt() * ker_z.norm())
    }

    /// Value of the inner maximization at a fixed drift, G(theta).
    ///
    /// Coincides with [`GenPoint::driver`]; exposed separately because it is
    /// the function the robust search minimizes, and tests verify it equals
    /// the bilinear form at the optimal hedge.
    ///
    /// # Errors
    /// As for [`GenPoint::driver`].
    pub fn saddle_value(&self, theta: &Vector) -> Result<f64> {
        self.driver(theta)
    }

    /// Unique maximizer of phi -> F(phi, theta) over the traded subspace.
    ///
    /// # Errors
    /// As for [`GenPoint::driver`].
    pub fn optimal_hedge(&self, theta: &Vector) -> Result<Vector> {
        let s2 = self.sqrt_term(theta)?;
        let shifted = &self.xi + self.projector.im(theta);
        let tilt = self.projector.ker(&self.z).norm() / s2.sqrt();
        Ok(self.projector.im(&self.z) + shifted * tilt)
    }

    /// Bilinear saddle objective F(phi, theta) =
    /// xi^tr phi - theta^tr (z - phi) - h |z - phi|.
    ///
    /// No feasibility checks: this is the raw objective used by the
    /// brute-force oracles; `phi` is expected to lie in the traded subspace.
    pub fn saddle_objective(&self, phi: &Vector, theta: &Vector) -> f64 {
        let residual = &self.z - phi;
        self.xi.dot(phi) - theta.dot(&residual) - self.h * residual.norm()
    }

    /// Driver of the coarser risk-measure bound: -(h + delta) |z|.
    pub fn risk_driver(&self) -> f64 {
        -(self.h + self.delta) * self.z.norm()
    }

    /// Closed-form inf over the drift ball of theta -> F(phi, theta):
    /// xi^tr phi - (h + delta) |z - phi|.
    pub fn hedge_floor(&self, phi: &Vector) -> f64 {
        let residual = &self.z - phi;
        self.xi.dot(phi) - (self.h + self.delta) * residual.norm()
    }

    /// Robust driver: minimizes G over the drift ball by a coarse grid
    /// (32 directions x 8 radii in dimension 2, a 4096-point
    /// low-discrepancy ball sample above) followed by projected coordinate
    /// descent with shrinking steps. Grid value ties are broken toward the
    /// smaller drift norm, then lexicographically.
    pub fn robust_driver(&self) -> SaddleResult {
        let n = self.z.len();
        if self.z.norm() == 0.0 {
            return SaddleResult {
                value: 0.0,
                worst_drift: Vector::zeros(n),
                worst_drift_traded: Vector::zeros(n),
                hedge: Vector::zeros(n),
                minmax_gap: 0.0,
            };
        }
        let eval = |theta: &Vector| -> f64 {
            self.driver(theta).expect("ball interior is feasible under the standing hypothesis")
        };

        let zero = Vector::zeros(n);
        let mut best_theta = zero.clone();
        let mut best_value = eval(&zero);

        if self.delta > 0.0 && self.projector.ker(&self.z).norm() > 1e-14 * self.z.norm() {
            let mut consider = |theta: Vector| {
                let v = eval(&theta);
                if better(v, &theta, best_value, &best_theta) {
                    best_value = v;
                    best_theta = theta;
                }
            };
            if n == 2 {
                for i in 0..GRID_DIRECTIONS_2D {
                    let angle = 2.0 * std::f64::consts::PI * i as f64 / GRID_DIRECTIONS_2D as f64;
                    for j in 1..=GRID_RADII_2D {
                        let r = self.delta * j as f64 / GRID_RADII_2D as f64;
                        consider(Vector::from_row_slice(&[r * angle.cos(), r * angle.sin()]));
                    }
                }
            } else {
                for p in ball_sample(n, self.delta, GRID_SAMPLE_ND) {
                    consider(Vector::from_row_slice(&p));
                }
            }
            // Analytic boundary candidates: aligned with the unhedgeable
            // part of z and against the price of risk.
            let ker_z = self.projector.ker(&self.z);
            if ker_z.norm() > 0.0 {
                consider(&ker_z * (self.delta / ker_z.norm()));
                consider(&ker_z * (-self.delta / ker_z.norm()));
            }
            if self.xi.norm() > 0.0 {
                consider(&self.xi * (-self.delta / self.xi.norm()));
            }

            // Projected coordinate descent with shrinking steps.
            let mut step = self.delta / GRID_RADII_2D as f64;
            let floor = REFINEMENT_TOL * self.delta.max(1.0);
            while step > floor {
                let mut improved = false;
                for i in 0..n {
                    for sign in [1.0f64, -1.0] {
                        let mut cand = best_theta.clone();
                        cand[i] += sign * step;
                        let norm = cand.norm();
                        if norm > self.delta {
                            cand *= self.delta / norm;
                        }
                        let v = eval(&cand);
                        if v < best_value {
                            best_value = v;
                            best_theta = cand;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
        }

        let hedge = self
            .optimal_hedge(&best_theta)
            .expect("ball interior is feasible under the standing hypothesis");
        let minmax_gap = (best_value - self.hedge_floor(&hedge)).abs();
        SaddleResult {
            value: best_value,
            worst_drift_traded: self.projector.im(&best_theta),
            worst_drift: best_theta,
            hedge,
            minmax_gap,
        }
    }

    /// Brute-force nested-grid minmax evaluation of the saddle problem.
    ///
    /// `level` controls resolution; grids at `level + 1` contain the grids
    /// at `level`, so gaps are comparable across levels. The hedge subspace
    /// is truncated at radius 10 (1 + |z|) h / (h - |xi| - delta), which
    /// majorizes the coercivity bound on the maximizer. The dense part of
    /// the grid covers the smaller provable core that contains every
    /// maximizer (inner and outer); sparse geometric tail probes reach out
    /// to the truncation radius.
    ///
    /// # Errors
    /// [`Error::Grid`] if `level` exceeds 6 (grid sizes explode beyond use).
    pub fn minmax_report(&self, level: usize) -> Result<MinmaxReport> {
        if level > 6 {
            return Err(Error::Grid(format!("refinement level {level} exceeds 6")));
        }
        let n = self.z.len();
        let d = self.projector.traded_dim();
        let radius =
            TRUNCATION_FACTOR * (1.0 + self.z.norm()) * self.h / (self.h - self.xi.norm() - self.delta);
        // Provable maximizer bounds: the inner maximizer phi(theta) has norm
        // at most |z| (1 + h / s_min) with s_min^2 = h^2 - (|xi| + delta)^2,
        // and the outer maximizer of xi^tr phi - (h + delta)|z - phi| has
        // norm at most |z| (2(h + delta) + |xi|) / (h + delta - |xi|).
        let s_min = (self.h * self.h - (self.xi.norm() + self.delta).powi(2)).sqrt();
        let inner_bound = (1.0 + self.z.norm()) * (1.0 + self.h / s_min);
        let outer_bound = self.z.norm() * (2.0 * (self.h + self.delta) + self.xi.norm())
            / (self.h + self.delta - self.xi.norm());
        let core = (inner_bound + outer_bound).min(radius);

        // Drift grid (always includes 0; nested across levels).
        let mut thetas: Vec<Vector> = vec![Vector::zeros(n)];
        let mut theta_cover = 0.0f64;
        if self.delta > 0.0 {
            if n == 2 {
                let dirs = 16 << level;
                let radii = 4 << level;
                for i in 0..dirs {
                    let angle = 2.0 * std::f64::consts::PI * i as f64 / dirs as f64;
                    for j in 1..=radii {
                        let r = self.delta * j as f64 / radii as f64;
                        thetas.push(Vector::from_row_slice(&[r * angle.cos(), r * angle.sin()]));
                    }
                }
                theta_cover = self.delta
                    * (std::f64::consts::PI / dirs as f64 + 1.0 / radii as f64);
            } else {
                let count = 512 << (2 * level);
                for p in ball_sample(n, self.delta, count) {
                    thetas.push(Vector::from_row_slice(&p));
                }
                // Crude covering estimate for a low-discrepancy ball sample.
                theta_cover = 3.0 * self.delta * (1.0 / count as f64).powf(1.0 / n as f64);
            }
        }

        // Hedge grid: orthonormal-coordinate product grid on the traded
        // subspace, cube [-core, core]^d, plus fixed tail probes on each
        // axis doubling out to the truncation radius (identical across
        // levels, preserving grid nesting; by the coercivity bounds above
        // they can never attain either maximum).
        let basis = self.projector.range_basis();
        let per_axis = (64 << level) + 1;
        let spacing = 2.0 * core / (per_axis - 1) as f64;
        let phi_cover = 0.5 * spacing * (d as f64).sqrt();
        let mut phis: Vec<Vector> = Vec::new();
        let mut index = vec![0usize; d];
        'outer: loop {
            let mut coeffs = Vector::zeros(d);
            for k in 0..d {
                coeffs[k] = -core + spacing * index[k] as f64;
            }
            phis.push(&basis * coeffs);
            let mut k = 0;
            loop {
                index[k] += 1;
                if index[k] < per_axis {
                    break;
                }
                index[k] = 0;
                k += 1;
                if k == d {
                    break 'outer;
                }
            }
        }
        for k in 0..d {
            let mut tail = 2.0 * core;
            while tail <= radius {
                for sign in [1.0f64, -1.0] {
                    phis.push(basis.column(k) * (sign * tail));
                }
                tail *= 2.0;
            }
        }

        let inf_sup = thetas
            .iter()
            .map(|t| {
                phis.iter()
                    .map(|p| self.saddle_objective(p, t))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        let sup_inf = phis
            .iter()
            .map(|p| {
                thetas
                    .iter()
                    .map(|t| self.saddle_objective(p, t))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max);

        let lip_phi = self.xi.norm() + self.delta + self.h;
        let lip_theta = self.z.norm() + core * (d as f64).sqrt();
        let resolution_bound = 2.0 * (lip_phi * phi_cover + lip_theta * theta_cover);
        Ok(MinmaxReport {
            inf_sup,
            sup_inf,
            gap: (inf_sup - sup_inf).abs(),
            resolution_bound,
        })
    }

    /// Lipschitz probe: returns (|F(z1) - F(z2)|, (delta + |xi| + h) |z1 - z2|)
    /// using the robust driver at both arguments.
    ///
    /// # Errors
    /// Propagates construction failures for the probe arguments.
    pub fn lipschitz_probe(&self, z1: &Vector, z2: &Vector) -> Result<(f64, f64)> {
        let f1 = self.with_z(z1.clone())?.robust_driver().value;
        let f2 = self.with_z(z2.clone())?.robust_driver().value;
        let bound = (self.delta + self.xi.norm() + self.h) * (z1 - z2).norm();
        Ok(((f1 - f2).abs(), bound))
    }
}

/// Grid-candidate comparison: smaller value wins; near-ties (relative
/// 1e-14) prefer the smaller drift norm, then lexicographic order.
fn better(cand_value: f64, cand: &Vector, best_value: f64, best: &Vector) -> bool {
    let tol = 1e-14 * (1.0 + best_value.abs());
    if cand_value < best_value - tol {
        return true;
    }
    if cand_value > best_value + tol {
        return false;
    }
    let (cn, bn) = (cand.norm(), best.norm());
    if cn + 1e-15 < bn {
        return true;
    }
    if cn > bn + 1e-15 {
        return false;
    }
    for i in 0..cand.len() {
        if cand[i] + 1e-15 < best[i] {
            return true;
        }
        if cand[i] > best[i] + 1e-15 {
            return false;
        }
    }
    false
}

/// A matrix-form evaluation of the driver used by tests and examples as an
/// independent oracle: with P the traded projection matrix,
///
///   F_theta(z) = -theta^tr z + theta^tr P z + xi^tr P z
///                - sqrt(h^2 - |xi + P theta|^2) sqrt(|z|^2 - z^tr P z).
///
/// # Errors
/// [`Error::InfeasibleTheta`] when the square-root argument is not strictly
/// positive.
pub fn driver_matrix_form(
    p_im: &Matrix,
    z: &Vector,
    xi: &Vector,
    theta: &Vector,
    h: f64,
) -> Result<f64> {
    let pz = p_im * z;
    let shifted = xi + p_im * theta;
    let s2 = h * h - shifted.norm_squared();
    if s2 <= 0.0 {
        return Err(Error::InfeasibleTheta(
            "square-root argument vanished in the matrix form".into(),
        ));
    }
    let ker_sq = (z.norm_squared() - z.dot(&pz)).max(0.0);
    Ok(-theta.dot(z) + theta.dot(&pz) + xi.dot(&pz) - s2.sqrt() * ker_sq.sqrt())
}
