//! Market primitives: the asset model and its uncertainty set.
//!
//! A market of d traded assets on an n-dimensional Brownian driver is
//! described by a volatility loading sigma (d x n), a drift vector b, a
//! Sharpe-ratio cap h on pricing-kernel loadings, a drift-uncertainty radius
//! delta, and a positive-semidefinite interval [a_lo, a_hi] of candidate
//! quadratic-variation densities.
//!
//! The central quantity is the market price of risk under density a,
//!
//!   xi(a) = a^{1/2} sigma^tr (sigma a sigma^tr)^{-1} b,
//!
//! which lies in the traded subspace Im((sigma a^{1/2})^tr). A drift
//! perturbation theta (|theta| <= delta) shifts it to xi(a) + P_a(theta)
//! where P_a projects onto the traded subspace. The model is usable when
//! the shifted price of risk stays strictly inside the Sharpe ball of
//! radius h for every candidate a; because the projection maps the
//! delta-ball onto the delta-ball of the traded subspace, the worst case is
//! exactly |xi(a)| + delta.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{loewner_leq, make_projector, Matrix, Projector, SpdMatrix, Vector};

/// Strict feasibility margin: sup_a (|xi(a)| + delta) must not exceed
/// h - FEASIBILITY_MARGIN (except in the exactly risk-neutral case, see
/// [`MarketSpec::validate`]).
pub const FEASIBILITY_MARGIN: f64 = 1e-9;
/// Tolerance used for positive-semidefinite order comparisons.
pub const LOEWNER_TOL: f64 = 1e-12;
/// Slack allowed on the kernel and drift-perturbation norm bounds.
pub const NORM_SLACK: f64 = 1e-14;
/// Default number of sample points per coordinate of the variance grid.
pub const DEFAULT_GRID_POINTS: usize = 5;

/// Immutable description of the traded market and its uncertainty set.
#[derive(Debug, Clone)]
pub struct MarketSpec {
    sigma: Matrix,
    b: Vector,
    h: f64,
    delta: f64,
    a_lo: SpdMatrix,
    a_hi: SpdMatrix,
    horizon: f64,
}

/// A structural defect found by [`MarketSpec::validate`].
#[derive(Debug, Clone, Serialize)]
pub enum Violation {
    /// A scalar parameter is outside its admissible range.
    Parameter { name: String, value: f64, requirement: String },
    /// a_lo does not precede a_hi in the positive-semidefinite order.
    LoewnerOrder { min_eigenvalue_of_gap: f64 },
    /// sigma * sigma^tr (or sigma * a * sigma^tr for a sampled a) is
    /// singular or too ill-conditioned.
    Ellipticity { detail: String },
    /// The worst-case shifted price of risk reaches the Sharpe cap.
    Feasibility { sup_price_of_risk_plus_delta: f64, cap: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Parameter { name, value, requirement } => {
                write!(f, "parameter {name} = {value} violates: {requirement}")
            }
            Violation::LoewnerOrder { min_eigenvalue_of_gap } => write!(
                f,
                "variance bounds are not ordered: min eigenvalue of (a_hi - a_lo) is {min_eigenvalue_of_gap:.3e}"
            ),
            Violation::Ellipticity { detail } => write!(f, "ellipticity failure: {detail}"),
            Violation::Feasibility { sup_price_of_risk_plus_delta, cap } => write!(
                f,
                "worst-case price of risk plus drift radius {sup_price_of_risk_plus_delta:.6} \
                 reaches the Sharpe cap {cap:.6} (strict margin {FEASIBILITY_MARGIN:e} required)"
            ),
        }
    }
}

impl MarketSpec {
    /// Assembles a market description, checking dimensional consistency only;
    /// semantic checks live in [`MarketSpec::validate`].
    ///
    /// # Errors
    /// [`Error::InvalidInput`] on dimension mismatches or non-finite scalars.
    pub fn new(
        sigma: Matrix,
        b: Vector,
        h: f64,
        delta: f64,
        a_lo: SpdMatrix,
        a_hi: SpdMatrix,
        horizon: f64,
    ) -> Result<Self> {
        let (d, n) = (sigma.nrows(), sigma.ncols());
        if d == 0 || n == 0 || d > n {
            return Err(Error::InvalidInput(format!(
                "volatility loading must be d x n with 1 <= d <= n, got {d}x{n}"
            )));
        }
        if b.len() != d {
            return Err(Error::InvalidInput(format!(
                "drift has length {} but there are {d} traded assets",
                b.len()
            )));
        }
        if a_lo.dim() != n || a_hi.dim() != n {
            return Err(Error::InvalidInput(format!(
                "variance bounds must be {n}x{n}, got {}x{} and {}x{}",
                a_lo.dim(),
                a_lo.dim(),
                a_hi.dim(),
                a_hi.dim()
            )));
        }
        for (name, v) in [("h", h), ("delta", delta), ("horizon", horizon)] {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(Self { sigma, b, h, delta, a_lo, a_hi, horizon })
    }

    /// Number of Brownian drivers n.
    pub fn n(&self) -> usize {
        self.sigma.ncols()
    }

    /// Number of traded assets d.
    pub fn d(&self) -> usize {
        self.sigma.nrows()
    }

    /// Volatility loading sigma (d x n).
    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    /// Traded drift vector b.
    pub fn b(&self) -> &Vector {
        &self.b
    }

    /// Sharpe-ratio cap h on pricing-kernel loadings.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Drift-uncertainty radius delta.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Lower variance bound.
    pub fn a_lo(&self) -> &SpdMatrix {
        &self.a_lo
    }

    /// Upper variance bound.
    pub fn a_hi(&self) -> &SpdMatrix {
        &self.a_hi
    }

    /// Terminal time T.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Projection pair for a candidate variance `a`.
    ///
    /// # Errors
    /// See [`make_projector`].
    pub fn projector(&self, a: &SpdMatrix) -> Result<Projector> {
        make_projector(&self.sigma, a)
    }

    /// Deterministic sample of the variance interval.
    ///
    /// When both bounds are diagonal (the case exercised by the scenarios)
    /// and n <= 4, this is a product grid over the diagonal coordinates with
    /// `points` values each; otherwise it is the segment
    /// a_lo + t (a_hi - a_lo) with `points` values of t in [0, 1].
    /// Endpoints are always included, and refining `points` to 2*points - 1
    /// yields a superset (so grid suprema are monotone under refinement).
    ///
    /// # Errors
    /// [`Error::Grid`] if `points` < 2, or [`Error::NotSpd`] if a sampled
    /// combination fails SPD validation (possible only for unordered bounds).
    pub fn variance_grid(&self, points: usize) -> Result<Vec<SpdMatrix>> {
        if points < 2 {
            return Err(Error::Grid(format!("need at least 2 points per axis, got {points}")));
        }
        let n = self.n();
        let is_diag = |m: &Matrix| {
            m.iter()
                .enumerate()
                .all(|(k, &v)| (k / n == k % n) || v.abs() < 1e-14)
        };
        let mut grid = Vec::new();
        if is_diag(self.a_lo.entries()) && is_diag(self.a_hi.entries()) && n <= 4 {
            let axes: Vec<Vec<f64>> = (0..n)
                .map(|i| linspace(self.a_lo.entry(i, i), self.a_hi.entry(i, i), points))
                .collect();
            let mut index = vec![0usize; n];
            loop {
                let diag: Vec<f64> = (0..n).map(|i| axes[i][index[i]]).collect();
                grid.push(SpdMatrix::from_diagonal(&diag)?);
                // Odometer increment over the product grid.
                let mut k = 0;
                loop {
                    index[k] += 1;
                    if index[k] < points {
                        break;
                    }
                    index[k] = 0;
                    k += 1;
                    if k == n {
                        return Ok(grid);
                    }
                }
            }
        }
        for t in linspace(0.0, 1.0, points) {
            let m = self.a_lo.entries() * (1.0 - t) + self.a_hi.entries() * t;
            grid.push(SpdMatrix::new(m)?);
        }
        Ok(grid)
    }

    /// Semantic validation; returns all violations found (empty = usable).
    ///
    /// Checks, in order: scalar ranges, the positive-semidefinite order of
    /// the bounds, ellipticity of sigma * sigma^tr, and strict Sharpe
    /// feasibility sup_a (|xi(a)| + delta) <= h - margin over the variance
    /// grid (`points` per coordinate). The exact identity
    /// sup_{|theta| <= delta} |xi + P(theta)| = |xi| + delta replaces any
    /// theta sampling. When the supremum is exactly zero (no traded drift
    /// and no drift uncertainty) the kernel set degenerates to the
    /// risk-neutral kernel and any h >= 0 is accepted.
    pub fn validate(&self, points: usize) -> Vec<Violation> {
        let mut violations = Vec::new();
        for (name, value, ok, req) in [
            ("h", self.h, self.h >= 0.0, ">= 0"),
            ("delta", self.delta, self.delta >= 0.0, ">= 0"),
            ("horizon", self.horizon, self.horizon > 0.0, "> 0"),
        ] {
            if !ok {
                violations.push(Violation::Parameter {
                    name: name.into(),
                    value,
                    requirement: req.into(),
                });
            }
        }

        let gap = self.a_hi.entries() - self.a_lo.entries();
        if !loewner_leq(self.a_lo.entries(), self.a_hi.entries(), LOEWNER_TOL) {
            let sym = (&gap + gap.transpose()) * 0.5;
            let min_eig = sym
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            violations.push(Violation::LoewnerOrder { min_eigenvalue_of_gap: min_eig });
        }

        let ssig = &self.sigma * self.sigma.transpose();
        let eig = ssig.symmetric_eigen();
        let lam_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lam_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lam_min > 0.0) || lam_max / lam_min >= crate::linalg::CONDITION_LIMIT {
            violations.push(Violation::Ellipticity {
                detail: format!(
                    "sigma sigma^tr eigenvalues in [{lam_min:.3e}, {lam_max:.3e}]"
                ),
            });
        }

        if violations.is_empty() {
            match self.sup_price_of_risk(points) {
                Ok(sup_xi) => {
                    let sup = sup_xi + self.delta;
                    let risk_neutral_only = sup == 0.0;
                    if !risk_neutral_only && sup > self.h - FEASIBILITY_MARGIN {
                        violations.push(Violation::Feasibility {
                            sup_price_of_risk_plus_delta: sup,
                            cap: self.h,
                        });
                    }
                }
                Err(e) => violations.push(Violation::Ellipticity { detail: e.to_string() }),
            }
        }
        violations
    }

    /// Supremum of |xi(a)| over the variance grid with `points` per
    /// coordinate.
    ///
    /// # Errors
    /// Propagates grid or projection failures.
    pub fn sup_price_of_risk(&self, points: usize) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for a in self.variance_grid(points)? {
            sup = sup.max(market_price_of_risk(self, &a)?.norm());
        }
        Ok(sup)
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Market price of risk xi(a) = a^{1/2} sigma^tr (sigma a sigma^tr)^{-1} b.
///
/// Lies in the traded subspace and satisfies sigma a^{1/2} xi(a) = b.
///
/// # Errors
/// [`Error::DegenerateVolatility`] when the traded covariance under `a` is
/// singular or too ill-conditioned.
pub fn market_price_of_risk(spec: &MarketSpec, a: &SpdMatrix) -> Result<Vector> {
    let p = spec.projector(a)?;
    let y = p.solve_traded_cov(spec.b());
    Ok((spec.sigma() * a.sqrt()).transpose() * y)
}

/// Shifted price of risk xi(a) + P_a(theta) for a drift perturbation theta.
///
/// # Errors
/// [`Error::InfeasibleTheta`] if |theta| exceeds delta (with slack) or the
/// shifted vector leaves the open Sharpe ball of radius h.
pub fn shifted_price_of_risk(spec: &MarketSpec, a: &SpdMatrix, theta: &Vector) -> Result<Vector> {
    if theta.len() != spec.n() {
        return Err(Error::InvalidInput(format!(
            "theta has length {} but the driver dimension is {}",
            theta.len(),
            spec.n()
        )));
    }
    if theta.norm() > spec.delta() + NORM_SLACK {
        return Err(Error::InfeasibleTheta(format!(
            "|theta| = {:.6e} exceeds the radius delta = {:.6e}",
            theta.norm(),
            spec.delta()
        )));
    }
    let p = spec.projector(a)?;
    let shifted = market_price_of_risk(spec, a)? + p.im(theta);
    if shifted.norm() >= spec.h() {
        return Err(Error::InfeasibleTheta(format!(
            "|xi + P(theta)| = {:.6} reaches the Sharpe cap h = {:.6}",
            shifted.norm(),
            spec.h()
        )));
    }
    Ok(shifted)
}

/// A single reference model: a variance density a inside the bounds and a
/// drift perturbation theta inside the delta-ball.
#[derive(Debug, Clone)]
pub struct PriorSpec {
    a: SpdMatrix,
    theta: Vector,
}

impl PriorSpec {
    /// Validates membership of (a, theta) in the uncertainty set of `spec`.
    ///
    /// # Errors
    /// [`Error::InvalidInput`] for dimension mismatches, [`Error::NotSpd`]
    /// via the bounds check, or [`Error::InfeasibleTheta`] when theta leaves
    /// the delta-ball.
    pub fn new(spec: &MarketSpec, a: SpdMatrix, theta: Vector) -> Result<Self> {
        if a.dim() != spec.n() || theta.len() != spec.n() {
            return Err(Error::InvalidInput(format!(
                "prior dimensions ({}, {}) do not match the driver dimension {}",
                a.dim(),
                theta.len(),
                spec.n()
            )));
        }
        if !loewner_leq(spec.a_lo().entries(), a.entries(), LOEWNER_TOL)
            || !loewner_leq(a.entries(), spec.a_hi().entries(), LOEWNER_TOL)
        {
            return Err(Error::NotSpd(
                "prior variance is outside the [a_lo, a_hi] interval".into(),
            ));
        }
        if theta.norm() > spec.delta() + NORM_SLACK {
            return Err(Error::InfeasibleTheta(format!(
                "|theta| = {:.6e} exceeds delta = {:.6e}",
                theta.norm(),
                spec.delta()
            )));
        }
        Ok(Self { a, theta })
    }

    /// Variance density of the prior.
    pub fn a(&self) -> &SpdMatrix {
        &self.a
    }

    /// Drift perturbation of the prior.
    pub fn theta(&self) -> &Vector {
        &self.theta
    }
}

/// Pricing-kernel loading lambda with |lambda| <= h.
#[derive(Debug, Clone)]
pub struct NgdKernel {
    lambda: Vector,
}

impl NgdKernel {
    /// Validates the Sharpe bound |lambda| <= h (with slack for kernels
    /// constructed exactly on the boundary).
    ///
    /// # Errors
    /// [`Error::InfeasibleKernel`] when the bound fails.
    pub fn new(h: f64, lambda: Vector) -> Result<Self> {
        if lambda.norm() > h + NORM_SLACK {
            return Err(Error::InfeasibleKernel(format!(
                "|lambda| = {:.6} exceeds the Sharpe cap h = {:.6}",
                lambda.norm(),
                h
            )));
        }
        Ok(Self { lambda })
    }

    /// Kernel loading vector.
    pub fn lambda(&self) -> &Vector {
        &self.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn single_asset_spec(b: f64, h: f64, delta: f64, lo: [f64; 2], hi: [f64; 2]) -> MarketSpec {
        MarketSpec::new(
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::from_row_slice(&[b]),
            h,
            delta,
            SpdMatrix::from_diagonal(&lo).unwrap(),
            SpdMatrix::from_diagonal(&hi).unwrap(),
            1.0,
        )
        .unwrap()
    }

    // --- price of risk ---

    #[test]
    fn price_of_risk_satisfies_defining_identities() {
        let spec = single_asset_spec(0.1, 0.3, 0.0, [0.8, 0.8], [1.2, 1.2]);
        let a = SpdMatrix::new(Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        let xi = market_price_of_risk(&spec, &a).unwrap();
        // sigma a^{1/2} xi = b.
        let recovered = spec.sigma() * a.sqrt() * &xi;
        assert!((recovered[0] - 0.1).abs() < 1e-12, "sigma a^(1/2) xi = {recovered}");
        // xi lies in the traded subspace.
        let p = spec.projector(&a).unwrap();
        assert!(p.ker(&xi).norm() < 1e-12, "xi has an unhedgeable component");
    }

    #[test]
    fn price_of_risk_norm_matches_single_asset_closed_form() {
        // Oracle: with loading (s, 0) and drift b, |xi(a)| = |b| / (s sqrt(a11)).
        let spec = single_asset_spec(0.12, 0.5, 0.0, [0.8, 0.7], [1.3, 1.1]);
        for a11 in [0.8, 1.0, 1.3] {
            let a = SpdMatrix::new(Matrix::from_row_slice(
                2,
                2,
                &[a11, 0.2, 0.2, 0.9],
            ))
            .unwrap();
            let xi = market_price_of_risk(&spec, &a).unwrap();
            let oracle = 0.12 / a11.sqrt();
            assert!(
                (xi.norm() - oracle).abs() < 1e-12,
                "a11={a11}: |xi| = {} vs oracle {oracle}",
                xi.norm()
            );
        }
    }

    #[test]
    fn zero_drift_gives_zero_price_of_risk() {
        let spec = single_asset_spec(0.0, 0.3, 0.0, [0.8, 0.8], [1.2, 1.2]);
        for a in spec.variance_grid(3).unwrap() {
            let xi = market_price_of_risk(&spec, &a).unwrap();
            assert_eq!(xi.norm(), 0.0, "b = 0 must give exactly xi = 0");
        }
    }

    #[test]
    fn shifted_price_of_risk_enforces_feasibility() {
        let spec = single_asset_spec(0.1, 0.3, 0.1, [1.0, 1.0], [1.2, 1.2]);
        let a = SpdMatrix::identity(2);
        let theta = DVector::from_row_slice(&[0.05, 0.05]);
        let shifted = shifted_price_of_risk(&spec, &a, &theta).unwrap();
        // Only the traded component of theta shifts xi.
        let p = spec.projector(&a).unwrap();
        let expected = market_price_of_risk(&spec, &a).unwrap() + p.im(&theta);
        assert!((shifted - expected).norm() < 1e-13);

        let too_big = DVector::from_row_slice(&[0.3, 0.0]);
        assert!(matches!(
            shifted_price_of_risk(&spec, &a, &too_big),
            Err(Error::InfeasibleTheta(_))
        ));
    }

    // --- validation ---

    #[test]
    fn validate_accepts_default_style_market() {
        let spec = single_asset_spec(0.0, 0.3, 0.0, [0.8, 0.8], [1.2, 1.2]);
        assert!(spec.validate(DEFAULT_GRID_POINTS).is_empty());
    }

    #[test]
    fn validate_accepts_risk_neutral_only_market() {
        // h = 0, b = 0, delta = 0: the kernel set is exactly {0}.
        let spec = single_asset_spec(0.0, 0.0, 0.0, [0.8, 0.8], [1.2, 1.2]);
        assert!(spec.validate(DEFAULT_GRID_POINTS).is_empty());
    }

    #[test]
    fn validate_flags_swapped_bounds() {
        let spec = single_asset_spec(0.0, 0.3, 0.0, [1.2, 1.2], [0.8, 0.8]);
        let violations = spec.validate(DEFAULT_GRID_POINTS);
        assert!(
            violations.iter().any(|v| matches!(v, Violation::LoewnerOrder { .. })),
            "got {violations:?}"
        );
    }

    #[test]
    fn validate_flags_sharpe_infeasibility() {
        // sup |xi| = 0.25 at a11 = a_lo = 1 and delta = 0.1 exceed h = 0.3.
        let spec = single_asset_spec(0.25, 0.3, 0.1, [1.0, 1.0], [1.2, 1.2]);
        let violations = spec.validate(DEFAULT_GRID_POINTS);
        match violations.as_slice() {
            [Violation::Feasibility { sup_price_of_risk_plus_delta, cap }] => {
                assert!((sup_price_of_risk_plus_delta - 0.35).abs() < 1e-12);
                assert_eq!(*cap, 0.3);
            }
            other => panic!("expected exactly one feasibility violation, got {other:?}"),
        }
    }

    #[test]
    fn grid_supremum_is_monotone_under_refinement() {
        let spec = single_asset_spec(0.1, 0.5, 0.0, [0.8, 0.7], [1.3, 1.2]);
        let coarse = spec.sup_price_of_risk(DEFAULT_GRID_POINTS).unwrap();
        let fine = spec.sup_price_of_risk(2 * DEFAULT_GRID_POINTS - 1).unwrap();
        assert!(coarse <= fine + 1e-12, "coarse {coarse} > fine {fine}");
        // For the single-asset loading the sup is attained at a11 = a_lo.
        assert!((coarse - 0.1 / 0.8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn variance_grid_nests_and_stays_in_bounds() {
        let spec = single_asset_spec(0.0, 0.3, 0.0, [0.8, 0.7], [1.3, 1.2]);
        let coarse = spec.variance_grid(3).unwrap();
        let fine = spec.variance_grid(5).unwrap();
        assert_eq!(coarse.len(), 9);
        assert_eq!(fine.len(), 25);
        for a in coarse.iter().chain(fine.iter()) {
            assert!(loewner_leq(spec.a_lo().entries(), a.entries(), LOEWNER_TOL));
            assert!(loewner_leq(a.entries(), spec.a_hi().entries(), LOEWNER_TOL));
        }
        // Every coarse point appears in the fine grid (nesting).
        for c in &coarse {
            assert!(
                fine.iter().any(|f| (f.entries() - c.entries()).norm() < 1e-14),
                "coarse point missing from refined grid"
            );
        }
    }

    #[test]
    fn variance_grid_handles_non_diagonal_bounds() {
        let lo = SpdMatrix::new(Matrix::from_row_slice(2, 2, &[0.8, 0.1, 0.1, 0.8])).unwrap();
        let hi = SpdMatrix::new(Matrix::from_row_slice(2, 2, &[1.2, 0.2, 0.2, 1.3])).unwrap();
        let spec = MarketSpec::new(
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::from_row_slice(&[0.0]),
            0.3,
            0.0,
            lo.clone(),
            hi.clone(),
            1.0,
        )
        .unwrap();
        let grid = spec.variance_grid(5).unwrap();
        assert_eq!(grid.len(), 5, "non-diagonal bounds sample the segment");
        assert!((grid[0].entries() - lo.entries()).norm() < 1e-14);
        assert!((grid[4].entries() - hi.entries()).norm() < 1e-14);
    }

    // --- priors and kernels ---

    #[test]
    fn prior_spec_checks_membership() {
        let spec = single_asset_spec(0.0, 0.3, 0.05, [0.8, 0.8], [1.2, 1.2]);
        let ok = PriorSpec::new(
            &spec,
            SpdMatrix::identity(2),
            DVector::from_row_slice(&[0.03, 0.0]),
        );
        assert!(ok.is_ok());

        let outside_a = PriorSpec::new(
            &spec,
            SpdMatrix::from_diagonal(&[1.4, 1.0]).unwrap(),
            DVector::zeros(2),
        );
        assert!(matches!(outside_a, Err(Error::NotSpd(_))));

        let outside_theta = PriorSpec::new(
            &spec,
            SpdMatrix::identity(2),
            DVector::from_row_slice(&[0.06, 0.0]),
        );
        assert!(matches!(outside_theta, Err(Error::InfeasibleTheta(_))));
    }

    #[test]
    fn kernel_enforces_sharpe_bound() {
        assert!(NgdKernel::new(0.3, DVector::from_row_slice(&[0.3, 0.0])).is_ok());
        assert!(matches!(
            NgdKernel::new(0.3, DVector::from_row_slice(&[0.300001, 0.0])),
            Err(Error::InfeasibleKernel(_))
        ));
    }
}
