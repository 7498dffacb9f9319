//! Small numerical helpers: normal distribution functions, a Halton
//! low-discrepancy sequence, and the exact lognormal put expectation that
//! the closed forms, the PDE cross-checks, and the control-domain search
//! all share.

use statrs::distribution::{ContinuousCDF, Normal};

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal parameters are valid")
}

/// Standard normal cumulative distribution function.
///
/// Computed through `erfc` at machine precision: finite-difference oracles
/// against the closed forms divide CDF errors by the bump size, so the
/// ~1e-9 accuracy of typical rational approximations is not enough here.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile function.
pub fn norm_inv_cdf(p: f64) -> f64 {
    standard_normal().inverse_cdf(p)
}

/// Exact expectation E[(strike - X)^+] for lognormal X with
/// X = spot * exp((drift - vol^2/2) tau + vol sqrt(tau) N(0,1)).
///
/// Conventions: `spot`, `strike` > 0, `vol` >= 0, `tau` >= 0. At tau = 0 or
/// vol = 0 the deterministic limit (strike - spot e^{drift tau})^+ is
/// returned, with the at-the-boundary case resolved by continuity from
/// inside the domain.
pub fn lognormal_put_value(spot: f64, strike: f64, drift: f64, vol: f64, tau: f64) -> f64 {
    debug_assert!(spot > 0.0 && strike > 0.0 && vol >= 0.0 && tau >= 0.0);
    let stdev = vol * tau.sqrt();
    if stdev == 0.0 {
        return (strike - spot * (drift * tau).exp()).max(0.0);
    }
    let log_moneyness = (spot / strike).ln();
    let d_plus = (log_moneyness + (drift + 0.5 * vol * vol) * tau) / stdev;
    let d_minus = (log_moneyness + (drift - 0.5 * vol * vol) * tau) / stdev;
    strike * norm_cdf(-d_minus) - spot * (drift * tau).exp() * norm_cdf(-d_plus)
}

/// Deterministic Halton low-discrepancy sequence in (0, 1)^dim.
///
/// Supports up to eight dimensions (first eight prime bases), enough for the
/// desk-scale ambient dimensions used here.
pub struct Halton {
    bases: Vec<u64>,
    index: u64,
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

impl Halton {
    /// Sequence over `dim` coordinates, skipping the degenerate index 0.
    ///
    /// # Panics
    /// If `dim` is 0 or exceeds the eight supported dimensions.
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= PRIMES.len(), "dim {dim} out of supported range");
        Self { bases: PRIMES[..dim].to_vec(), index: 0 }
    }

    fn radical_inverse(mut i: u64, base: u64) -> f64 {
        let mut inv = 0.0;
        let mut frac = 1.0 / base as f64;
        while i > 0 {
            inv += (i % base) as f64 * frac;
            i /= base;
            frac /= base as f64;
        }
        inv
    }

    /// Next point of the sequence.
    pub fn next_point(&mut self) -> Vec<f64> {
        self.index += 1;
        let idx = self.index;
        self.bases.iter().map(|&b| Self::radical_inverse(idx, b)).collect()
    }
}

/// Deterministic low-discrepancy sample of `count` points in the closed
/// ball of the given `radius` in `dim` dimensions, centered at the origin.
///
/// Directions come from normal quantiles of a Halton point; the radius uses
/// an extra Halton coordinate through the volume map u^(1/dim).
pub fn ball_sample(dim: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    let mut seq = Halton::new(dim + 1);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let u = seq.next_point();
        let mut dir: Vec<f64> = u[..dim].iter().map(|&c| norm_inv_cdf(c)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let r = radius * u[dim].powf(1.0 / dim as f64);
        for c in dir.iter_mut() {
            *c *= r / norm;
        }
        points.push(dir);
    }
    points
}
