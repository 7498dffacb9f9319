//! Dense symmetric-positive-definite matrices and orthogonal projections.
//!
//! Everything downstream (price-of-risk computations, saddle-point drivers,
//! Monte Carlo kernels) is phrased in terms of two primitives:
//!
//! - the principal square root a^{1/2} of an SPD matrix a, and
//! - the orthogonal projection onto Im((sigma a^{1/2})^tr) together with its
//!   complement onto Ker(sigma a^{1/2}),
//!
//! where sigma is the d x n volatility loading of the traded assets and a is
//! a candidate quadratic-variation density. Dimensions are desk-scale
//! (n <= 8), so dense eigendecompositions are used throughout.
//!
//! Construction validates; accessors never fail. All values are immutable
//! after construction and safe to share across threads.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense column vector of f64 entries.
pub type Vector = DVector<f64>;
/// Dense matrix of f64 entries.
pub type Matrix = DMatrix<f64>;

/// Relative asymmetry tolerance: |a - a^tr|_max <= SYMMETRY_RTOL * (1 + |a|_max).
pub const SYMMETRY_RTOL: f64 = 1e-12;
/// Eigenvalue floor factor: eigenvalues must exceed EIG_FLOOR_FACTOR * lambda_max.
pub const EIG_FLOOR_FACTOR: f64 = 1e-12;
/// Max abs entry tolerance for sqrt * sqrt to reproduce the input (unit scale).
pub const SQRT_RECONSTRUCT_TOL: f64 = 1e-10;
/// Projector idempotency and symmetry tolerance (max abs entry).
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Tolerance for p_im + p_ker = I (max abs entry).
pub const PROJECTOR_SUM_TOL: f64 = 1e-12;
/// Condition-number threshold above which sigma * a * sigma^tr is treated as
/// degenerate.
pub const CONDITION_LIMIT: f64 = 1e12;

fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Symmetric positive definite matrix with its principal square root.
///
/// The square root is computed once at construction from the same symmetric
/// eigendecomposition that certifies positive definiteness, and cached for
/// the lifetime of the value.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    entries: Matrix,
    sqrt: Matrix,
    min_eig: f64,
    max_eig: f64,
}

impl SpdMatrix {
    /// Validates and wraps a symmetric positive definite matrix.
    ///
    /// The input is checked for squareness and symmetry (relative tolerance
    /// [`SYMMETRY_RTOL`]), symmetrized, and eigendecomposed. The smallest
    /// eigenvalue must exceed [`EIG_FLOOR_FACTOR`] times the largest.
    ///
    /// # Errors
    /// [`Error::NotSpd`] if the matrix is not square, not symmetric within
    /// tolerance, or has an eigenvalue at or below the floor.
    pub fn new(entries: Matrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::NotSpd(format!(
                "expected a nonempty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let asym = max_abs(&(&entries - entries.transpose()));
        let scale = 1.0 + max_abs(&entries);
        if asym > SYMMETRY_RTOL * scale {
            return Err(Error::NotSpd(format!(
                "asymmetry {asym:.3e} exceeds tolerance {:.3e}",
                SYMMETRY_RTOL * scale
            )));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let floor = EIG_FLOOR_FACTOR * max_eig.max(0.0);
        if !(min_eig > floor) {
            return Err(Error::NotSpd(format!(
                "smallest eigenvalue {min_eig:.3e} is at or below the floor {floor:.3e}"
            )));
        }
        let sqrt_vals = eig.eigenvalues.map(f64::sqrt);
        let sqrt = &eig.eigenvectors
            * Matrix::from_diagonal(&sqrt_vals)
            * eig.eigenvectors.transpose();
        let sqrt = (&sqrt + sqrt.transpose()) * 0.5;
        let recon_err = max_abs(&(&sqrt * &sqrt - &sym));
        if recon_err > SQRT_RECONSTRUCT_TOL * scale.max(1.0) {
            return Err(Error::NotSpd(format!(
                "square root failed to reproduce the matrix (error {recon_err:.3e})"
            )));
        }
        Ok(Self { entries: sym, sqrt, min_eig, max_eig })
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n, n)).expect("identity is SPD")
    }

    /// Diagonal matrix with the given strictly positive diagonal.
    ///
    /// # Errors
    /// [`Error::NotSpd`] if any entry is non-positive.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diagonal(&Vector::from_row_slice(diag)))
    }

    /// Dimension n of the n x n matrix.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Symmetrized entries.
    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Cached principal square root.
    pub fn sqrt(&self) -> &Matrix {
        &self.sqrt
    }

    /// Smallest eigenvalue (strictly positive by construction).
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    /// Largest eigenvalue.
    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eig
    }

    /// Entry accessor (row, column).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

/// Principal square root of an SPD matrix, returned as an SPD matrix.
///
/// # Errors
/// [`Error::NotSpd`] propagated from re-validating the cached root (cannot
/// trigger for well-scaled inputs; kept for a fully checked construction).
pub fn spd_sqrt(a: &SpdMatrix) -> Result<SpdMatrix> {
    SpdMatrix::new(a.sqrt().clone())
}

/// True when `a <= b` in the positive-semidefinite order within `tol`:
/// the smallest eigenvalue of b - a is at least -tol.
pub fn loewner_leq(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() || a.nrows() != a.ncols() {
        return false;
    }
    let diff = b - a;
    let sym = (&diff + diff.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .all(|&l| l >= -tol)
}

/// Orthogonal projection pair attached to a volatility loading and a
/// quadratic-variation density.
///
/// For s = sigma a^{1/2}, `im` projects onto Im(s^tr) (the traded
/// directions) and `ker` onto Ker(s) (the unhedgeable directions). Both are
/// symmetric idempotent and sum to the identity.
#[derive(Debug, Clone)]
pub struct Projector {
    sigma: Matrix,
    a: SpdMatrix,
    p_im: Matrix,
    p_ker: Matrix,
    traded_cov: Matrix,
}

/// Builds the projection pair for `sigma` (d x n, d <= n) and SPD `a`.
///
/// # Errors
/// - [`Error::DegenerateVolatility`] if sigma has more rows than columns, if
///   sigma * a * sigma^tr is singular or has condition number at or above
///   [`CONDITION_LIMIT`], or if the computed projectors miss their
///   idempotency/symmetry tolerances.
pub fn make_projector(sigma: &Matrix, a: &SpdMatrix) -> Result<Projector> {
    let (d, n) = (sigma.nrows(), sigma.ncols());
    if d == 0 || n == 0 || d > n {
        return Err(Error::DegenerateVolatility(format!(
            "volatility loading must be d x n with 1 <= d <= n, got {d}x{n}"
        )));
    }
    if n != a.dim() {
        return Err(Error::DegenerateVolatility(format!(
            "loading has {n} columns but the variance matrix is {}x{}",
            a.dim(),
            a.dim()
        )));
    }
    let s = sigma * a.sqrt();
    let m = sigma * a.entries() * sigma.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lam_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(lam_min > 0.0) || lam_max / lam_min >= CONDITION_LIMIT {
        return Err(Error::DegenerateVolatility(format!(
            "traded covariance eigenvalues in [{lam_min:.3e}, {lam_max:.3e}] \
             are singular or worse-conditioned than {CONDITION_LIMIT:.0e}"
        )));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::DegenerateVolatility("traded covariance is not SPD".into()))?;
    // p_im = s^tr (s s^tr)^{-1} s, symmetrized against roundoff.
    let x = chol.solve(&s);
    let p_im = s.transpose() * x;
    let p_im = (&p_im + p_im.transpose()) * 0.5;
    let p_ker = Matrix::identity(n, n) - &p_im;

    let idem = max_abs(&(&p_im * &p_im - &p_im));
    if idem > PROJECTOR_TOL {
        return Err(Error::DegenerateVolatility(format!(
            "projector idempotency error {idem:.3e} exceeds {PROJECTOR_TOL:.0e}"
        )));
    }
    Ok(Projector { sigma: sigma.clone(), a: a.clone(), p_im, p_ker, traded_cov: m })
}

impl Projector {
    /// Ambient dimension n.
    pub fn dim(&self) -> usize {
        self.p_im.nrows()
    }

    /// Number of traded directions d.
    pub fn traded_dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// Volatility loading sigma (d x n).
    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    /// Quadratic-variation density a.
    pub fn variance(&self) -> &SpdMatrix {
        &self.a
    }

    /// Projection of `z` onto the traded subspace Im((sigma a^{1/2})^tr).
    pub fn im(&self, z: &Vector) -> Vector {
        &self.p_im * z
    }

    /// Projection of `z` onto the unhedgeable subspace Ker(sigma a^{1/2}).
    pub fn ker(&self, z: &Vector) -> Vector {
        &self.p_ker * z
    }

    /// Projection matrix onto the traded subspace.
    pub fn p_im(&self) -> &Matrix {
        &self.p_im
    }

    /// Projection matrix onto the unhedgeable subspace.
    pub fn p_ker(&self) -> &Matrix {
        &self.p_ker
    }

    /// Traded covariance sigma * a * sigma^tr (d x d).
    pub fn traded_cov(&self) -> &Matrix {
        &self.traded_cov
    }

    /// Solves (sigma * a * sigma^tr) y = rhs.
    pub fn solve_traded_cov(&self, rhs: &Vector) -> Vector {
        self.traded_cov
            .clone()
            .cholesky()
            .expect("validated SPD at construction")
            .solve(rhs)
    }

    /// Orthonormal basis of the traded subspace (n x d matrix of columns).
    pub fn range_basis(&self) -> Matrix {
        self.eigen_basis(true)
    }

    /// Orthonormal basis of the unhedgeable subspace (n x (n-d) columns).
    pub fn kernel_basis(&self) -> Matrix {
        self.eigen_basis(false)
    }

    fn eigen_basis(&self, range: bool) -> Matrix {
        let eig = self.p_im.clone().symmetric_eigen();
        let mut cols: Vec<Vector> = Vec::new();
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            // Eigenvalues of a projector cluster at 0 and 1; 1/2 separates.
            if (l > 0.5) == range {
                cols.push(eig.eigenvectors.column(i).into_owned());
            }
        }
        Matrix::from_columns(&cols)
    }
}
