//! Remez exchange: iterative construction of the best (minimax) polynomial
//! approximation to a continuous function on an interval.
//!
//! Each round solves the levelled-error system on the current reference
//! points, locates the extrema of the resulting error curve on a dense grid
//! (refining each by a local parabola fit), and exchanges all references for
//! those extrema. At the optimum the error equioscillates: it attains its
//! maximum magnitude on `degree + 2` points with alternating signs.

use super::{certify_error, eval_poly, Approx, MinimaxError, PolyApprox};

/// Default relative equioscillation tolerance: iteration stops when the
/// reference extrema satisfy `(max|e| - min|e|) / max|e| <= tol`.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 50;

/// Grid density used to hunt error extrema during exchange rounds.
const EXCHANGE_GRID: usize = 4096;

/// Grid density for the final error certification.
const FINAL_CERTIFY_GRID: usize = 200_001;

/// A converged fit along with the equioscillation evidence.
#[derive(Debug, Clone)]
pub struct RemezResult {
    pub approx: PolyApprox,
    /// Final reference abscissae, ascending.
    pub refs: Vec<f64>,
    /// Signed errors `f - P` at the final references; alternating in sign
    /// and level in magnitude within the tolerance.
    pub ref_errors: Vec<f64>,
    /// Exchange rounds performed.
    pub iterations: usize,
}

/// Fits the minimax polynomial of the given degree to `f` on `[a, b]`.
///
/// `tol` is the relative equioscillation tolerance and `max_iters` caps the
/// exchange rounds (see [`DEFAULT_TOL`], [`DEFAULT_MAX_ITERS`]). The
/// returned approximant's `eps` is measured on a dense certification grid.
/// If `f` is itself a polynomial of degree <= `degree`, it is recovered
/// directly with `eps` at rounding level.
pub fn remez_fit<F>(
    f: F,
    degree: usize,
    interval: (f64, f64),
    tol: f64,
    max_iters: usize,
) -> Result<PolyApprox, MinimaxError>
where
    F: Fn(f64) -> f64 + Sync,
{
    remez_fit_detailed(f, degree, interval, tol, max_iters).map(|r| r.approx)
}

/// [`remez_fit`] variant that also returns the final reference set, for
/// callers that want to inspect the equioscillation directly.
pub fn remez_fit_detailed<F>(
    f: F,
    degree: usize,
    interval: (f64, f64),
    tol: f64,
    max_iters: usize,
) -> Result<RemezResult, MinimaxError>
where
    F: Fn(f64) -> f64 + Sync,
{
    let (a, b) = interval;
    super::check_interval(a, b)?;
    let max_iters = max_iters.max(1);
    let m = degree + 2;

    // Initial references: Chebyshev points of the second kind mapped to
    // [a, b] — near-optimal starting extrema for smooth functions.
    let mut refs: Vec<f64> = (0..m)
        .map(|i| {
            let t = (std::f64::consts::PI * i as f64 / (m - 1) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect();
    refs.sort_by(f64::total_cmp);

    let n_grid = EXCHANGE_GRID.max(64 * m);
    let step = (b - a) / (n_grid - 1) as f64;
    let grid: Vec<f64> = (0..n_grid).map(|i| a + step * i as f64).collect();
    let fvals: Vec<f64> = grid.iter().map(|&z| f(z)).collect();
    let scale = fvals.iter().fold(0.0f64, |mx, &v| mx.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let mut last: Option<(Vec<f64>, f64)> = None; // (coeffs, levelness)

    for iter in 0..max_iters {
        let coeffs = solve_levelled_system(&f, &refs, degree, iter)?;

        let errs: Vec<f64> = grid
            .iter()
            .zip(&fvals)
            .map(|(&z, &fv)| fv - eval_poly(&coeffs, z))
            .collect();
        let grid_max = errs.iter().fold(0.0f64, |mx, &e| mx.max(e.abs()));

        if grid_max <= 1e-12 * scale {
            // The error is at rounding level everywhere: f is already a
            // polynomial of this degree, and exchange has nothing to level.
            let mut approx = PolyApprox::new(coeffs, interval, 0.0)?;
            certify_error(&mut approx, &f, FINAL_CERTIFY_GRID)?;
            let ref_errors = refs.iter().map(|&x| f(x) - approx.eval(x)).collect();
            return Ok(RemezResult {
                approx,
                refs,
                ref_errors,
                iterations: iter + 1,
            });
        }

        let cands = extrema_candidates(&grid, &errs, &coeffs, &f);
        let mut sel = alternating_maxima(&cands);
        while sel.len() > m {
            // Drop the weaker end candidate; interior drops could break the
            // sign alternation.
            if sel.first().expect("nonempty").1.abs() <= sel.last().expect("nonempty").1.abs()
            {
                sel.remove(0);
            } else {
                sel.pop();
            }
        }
        if sel.len() < m {
            // Fewer alternations than references need: the grid cannot
            // resolve the error's oscillation. Report the current iterate.
            let mut approx = PolyApprox::new(coeffs, interval, 0.0)?;
            let eps = certify_error(&mut approx, &f, FINAL_CERTIFY_GRID)?;
            return Err(MinimaxError::NoConvergence {
                iters: iter + 1,
                levelness: f64::INFINITY,
                eps,
                last: Box::new(approx),
            });
        }

        let emax = sel.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let emin = sel.iter().map(|p| p.1.abs()).fold(f64::INFINITY, f64::min);
        let levelness = (emax - emin) / emax;

        if levelness <= tol {
            let mut approx = PolyApprox::new(coeffs, interval, 0.0)?;
            certify_error(&mut approx, &f, FINAL_CERTIFY_GRID)?;
            let (refs, ref_errors) = sel.into_iter().unzip();
            return Ok(RemezResult {
                approx,
                refs,
                ref_errors,
                iterations: iter + 1,
            });
        }

        refs = sel.iter().map(|p| p.0).collect();
        last = Some((coeffs, levelness));
    }

    let (coeffs, levelness) = last.expect("at least one iteration ran");
    let mut approx = PolyApprox::new(coeffs, interval, 0.0)?;
    let eps = certify_error(&mut approx, &f, FINAL_CERTIFY_GRID)?;
    Err(MinimaxError::NoConvergence {
        iters: max_iters,
        levelness,
        eps,
        last: Box::new(approx),
    })
}

/// Solves for the polynomial that interpolates `f` on the references with a
/// levelled, sign-alternating error: `sum_j a_j x_i^j + (-1)^i E = f(x_i)`.
/// Returns the polynomial coefficients (the levelled error `E` is implied by
/// the next exchange round's error measurement).
fn solve_levelled_system<F>(
    f: &F,
    refs: &[f64],
    degree: usize,
    iter: usize,
) -> Result<Vec<f64>, MinimaxError>
where
    F: Fn(f64) -> f64,
{
    let m = refs.len();
    let mut mat = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut sign = 1.0;
    for &x in refs {
        let mut row = Vec::with_capacity(m);
        let mut pw = 1.0;
        for _ in 0..=degree {
            row.push(pw);
            pw *= x;
        }
        row.push(sign);
        sign = -sign;
        mat.push(row);
        rhs.push(f(x));
    }

    let (sol, pivot_ratio) =
        solve_dense(mat, rhs).ok_or(MinimaxError::Singular { iter })?;
    if pivot_ratio < 1e-10 {
        log::warn!(
            "levelled-error system is poorly conditioned at iteration {iter} \
             (pivot ratio {pivot_ratio:.2e}); coefficients may be inaccurate"
        );
    }
    Ok(sol[..=degree].to_vec())
}

/// Gaussian elimination with partial pivoting. Returns the solution and the
/// smallest pivot magnitude relative to the matrix scale, or `None` if a
/// pivot underflows the singularity threshold.
fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let n = rhs.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |mx, &v| mx.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut min_ratio = f64::INFINITY;

    for col in 0..n {
        let (piv_row, piv) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if piv <= 1e-14 * scale {
            return None;
        }
        min_ratio = min_ratio.min(piv / scale);
        a.swap(col, piv_row);
        rhs.swap(col, piv_row);
        for r in (col + 1)..n {
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for c in (row + 1)..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some((x, min_ratio))
}

/// Finds local extrema of the signed error on the grid (endpoints included)
/// and sharpens each interior one with the vertex of the parabola through
/// its three surrounding samples.
fn extrema_candidates<F>(
    grid: &[f64],
    errs: &[f64],
    coeffs: &[f64],
    f: &F,
) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let n = grid.len();
    let mut out = Vec::new();
    out.push((grid[0], errs[0]));
    for i in 1..n - 1 {
        let (e0, e1, e2) = (errs[i - 1], errs[i], errs[i + 1]);
        let is_max = e1 >= e0 && e1 >= e2;
        let is_min = e1 <= e0 && e1 <= e2;
        if !(is_max || is_min) {
            continue;
        }
        let mut x = grid[i];
        let mut e = e1;
        let denom = e0 - 2.0 * e1 + e2;
        if denom.abs() > 1e-12 * (e0.abs() + e1.abs() + e2.abs()) {
            let h = grid[i] - grid[i - 1];
            let xv = (grid[i] + 0.5 * h * (e0 - e2) / denom).clamp(grid[i - 1], grid[i + 1]);
            let ev = f(xv) - eval_poly(coeffs, xv);
            if ev.is_finite() && ev.abs() >= e.abs() {
                x = xv;
                e = ev;
            }
        }
        out.push((x, e));
    }
    out.push((grid[n - 1], errs[n - 1]));
    out
}

/// Collapses each run of same-signed candidates to its largest-magnitude
/// member, leaving a strictly sign-alternating sequence.
fn alternating_maxima(cands: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &(x, e) in cands {
        if e == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(prev) if prev.1.signum() == e.signum() => {
                if e.abs() > prev.1.abs() {
                    *prev = (x, e);
                }
            }
            _ => out.push((x, e)),
        }
    }
    out
}
