//! Minimax polynomial fitting and evaluation.
//!
//! A minimax approximant minimizes the *maximum* absolute error over an
//! interval rather than the average error, which makes its certified worst
//! case `eps` a hard guarantee for downstream numeric code. This module
//! provides Horner-scheme evaluators for polynomial and rational forms, a
//! dense-grid error certifier, the Remez exchange fitter ([`remez_fit`]),
//! and a plain-text coefficient table format.

mod remez;
mod table;

pub use remez::{remez_fit, remez_fit_detailed, RemezResult, DEFAULT_MAX_ITERS, DEFAULT_TOL};
pub use table::{
    read_table, read_table_str, write_table, write_table_string, TableEntry, TableRecord,
};

use rayon::prelude::*;
use thiserror::Error;

/// Minimum number of grid points [`certify_error`] accepts.
pub const MIN_CERTIFY_GRID: usize = 10_000;

#[derive(Debug, Error)]
pub enum MinimaxError {
    #[error("invalid interval [{a}, {b}]: bounds must be finite with a < b")]
    BadInterval { a: f64, b: f64 },
    #[error("certification grid too coarse: {got} points (minimum {min})")]
    GridTooCoarse { got: usize, min: usize },
    #[error("denominator vanishes on the interval near z = {z}")]
    DenominatorZero { z: f64 },
    #[error("interpolation system is singular at iteration {iter}")]
    Singular { iter: usize },
    #[error(
        "exchange did not converge in {iters} iterations (levelness {levelness:.3e}); \
         last iterate has certified error {eps:.6e}"
    )]
    NoConvergence {
        iters: usize,
        levelness: f64,
        eps: f64,
        last: Box<PolyApprox>,
    },
    #[error("coefficient table parse error at line {line}: {msg}")]
    TableParse { line: usize, msg: String },
    #[error("coefficient table i/o error: {0}")]
    TableIo(#[from] std::io::Error),
}

/// Evaluates `a_0 + a_1 z + ... + a_n z^n` by nested multiplication.
///
/// The empty coefficient list evaluates to 0.
#[inline]
pub fn eval_poly(coeffs: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Evaluates the ratio of two polynomials, each by nested multiplication.
#[inline]
pub fn eval_rational(num: &[f64], den: &[f64], z: f64) -> f64 {
    eval_poly(num, z) / eval_poly(den, z)
}

fn check_interval(a: f64, b: f64) -> Result<(), MinimaxError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(MinimaxError::BadInterval { a, b });
    }
    Ok(())
}

/// A polynomial approximant with a certified worst-case error on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyApprox {
    coeffs: Vec<f64>,
    interval: (f64, f64),
    eps: f64,
}

impl PolyApprox {
    /// Builds an approximant from ascending-order coefficients. `eps` is the
    /// certified max absolute error (0 if not yet certified).
    pub fn new(coeffs: Vec<f64>, interval: (f64, f64), eps: f64) -> Result<Self, MinimaxError> {
        check_interval(interval.0, interval.1)?;
        Ok(Self {
            coeffs,
            interval,
            eps,
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// A rational approximant `p(z)/q(z)` with a certified worst-case error.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalApprox {
    num: Vec<f64>,
    den: Vec<f64>,
    interval: (f64, f64),
    eps: f64,
}

impl RationalApprox {
    /// Builds a rational approximant from ascending-order numerator and
    /// denominator coefficients. The denominator's freedom from zeros on the
    /// interval is verified by [`certify_error`], not here.
    pub fn new(
        num: Vec<f64>,
        den: Vec<f64>,
        interval: (f64, f64),
        eps: f64,
    ) -> Result<Self, MinimaxError> {
        check_interval(interval.0, interval.1)?;
        Ok(Self {
            num,
            den,
            interval,
            eps,
        })
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// Evaluation that reports a vanishing denominator instead of returning
    /// a non-finite value. Cannot fail on the certified interval.
    pub fn try_eval(&self, z: f64) -> Result<f64, MinimaxError> {
        let v = eval_rational(&self.num, &self.den, z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(MinimaxError::DenominatorZero { z })
        }
    }
}

/// Common interface over polynomial and rational approximants.
pub trait Approx: Sync {
    /// Evaluates the approximant. Outside [`Approx::interval`] the result is
    /// uncertified.
    fn eval(&self, z: f64) -> f64;
    /// The certified interval `[a, b]`.
    fn interval(&self) -> (f64, f64);
    /// Certified max absolute error over the interval.
    fn eps(&self) -> f64;
    fn set_eps(&mut self, eps: f64);
    /// Denominator value at `z`; `None` for polynomial approximants.
    fn denominator(&self, _z: f64) -> Option<f64> {
        None
    }
}

impl Approx for PolyApprox {
    #[inline]
    fn eval(&self, z: f64) -> f64 {
        eval_poly(&self.coeffs, z)
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn set_eps(&mut self, eps: f64) {
        self.eps = eps;
    }
}

impl Approx for RationalApprox {
    #[inline]
    fn eval(&self, z: f64) -> f64 {
        eval_rational(&self.num, &self.den, z)
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn set_eps(&mut self, eps: f64) {
        self.eps = eps;
    }

    fn denominator(&self, z: f64) -> Option<f64> {
        Some(eval_poly(&self.den, z))
    }
}

/// Measures `max |f(z) - approx(z)|` over a uniform grid of `grid_points`
/// samples of the approximant's interval (endpoints included), stores the
/// result as the approximant's `eps`, and returns it.
///
/// For rational approximants the denominator is simultaneously checked for
/// zeros and sign changes on the grid. Requires `grid_points >= 10_000`;
/// the grid is evaluated in parallel with a deterministic reduction.
pub fn certify_error<A, F>(approx: &mut A, f: F, grid_points: usize) -> Result<f64, MinimaxError>
where
    A: Approx + ?Sized,
    F: Fn(f64) -> f64 + Sync,
{
    if grid_points < MIN_CERTIFY_GRID {
        return Err(MinimaxError::GridTooCoarse {
            got: grid_points,
            min: MIN_CERTIFY_GRID,
        });
    }
    let (a, b) = approx.interval();
    let step = (b - a) / (grid_points - 1) as f64;
    let grid_z = |i: usize| a + step * i as f64;

    // (max error, leftmost z where the denominator vanishes or crosses zero)
    let (max_err, bad_den) = (0..grid_points)
        .into_par_iter()
        .map(|i| {
            let z = grid_z(i);
            let err = (f(z) - approx.eval(z)).abs();
            let bad = match approx.denominator(z) {
                Some(d) => {
                    let crosses = i + 1 < grid_points
                        && approx
                            .denominator(grid_z(i + 1))
                            .is_some_and(|d2| d.signum() != d2.signum());
                    if d == 0.0 || crosses {
                        Some(z)
                    } else {
                        None
                    }
                }
                None => None,
            };
            (err, bad)
        })
        .reduce(
            || (0.0f64, None),
            |(e1, b1), (e2, b2)| {
                let bad = match (b1, b2) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                (e1.max(e2), bad)
            },
        );

    if let Some(z) = bad_den {
        return Err(MinimaxError::DenominatorZero { z });
    }
    approx.set_eps(max_err);
    Ok(max_err)
}
