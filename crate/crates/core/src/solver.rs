//! Total-odds equation and its root.
//!
//! For a likelihood-ratio sample `(lambda_i, w_i)` under the target
//! distribution, define
//!
//! ```text
//! F(p) = sum_i w_i / (p + (1 - p) lambda_i),   p in [0, 1].
//! ```
//!
//! `F(1) = 1`, `F(0) = E[1/lambda]`, `F'(1) = E[lambda] - 1`, and `F` is
//! strictly convex unless `lambda == 1` on the support. Hence `F(p) = 1` has
//! an interior root iff `E[lambda] > 1` and `E[1/lambda] > 1`, and that root
//! is unique. `F - 1` is positive to its left and negative to its right on
//! `(0, 1)`, which is what the bisection relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SUM_TOL;

/// Default tolerance on `|F(p) - 1|`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap for bisection.
pub const DEFAULT_MAX_ITER: usize = 200;
/// `|E[1/lambda] - 1|` at or below this is classified as the `p = 0` boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Likelihood-ratio values with their target probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSample {
    lambdas: Vec<f64>,
    weights: Vec<f64>,
}

impl LambdaSample {
    pub fn new(lambdas: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if lambdas.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: lambdas.len(),
                found: weights.len(),
            });
        }
        if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::invalid("likelihood ratios must be positive and finite"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::invalid("no positive weight"));
        }
        Ok(Self { lambdas, weights })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lambdas
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .filter(|&(_, w)| w > 0.0)
    }

    pub fn mean_lambda(&self) -> f64 {
        self.support().map(|(l, w)| w * l).sum()
    }

    pub fn mean_inv_lambda(&self) -> f64 {
        self.support().map(|(l, w)| w / l).sum()
    }
}

/// Shape of `F`, which decides where the total-odds root lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionCase {
    /// Unique root strictly inside `(0, 1)`.
    Interior,
    /// `E[1/lambda] = 1`: the root is `p = 0`.
    BoundaryZero,
    /// Only the trivial root `p = 1`; training and target look incompatible.
    BoundaryOne,
    /// `lambda == 1` on the target support; the score carries no class information.
    Degenerate,
}

impl SolutionCase {
    pub fn as_str(self) -> &'static str {
        match self {
            SolutionCase::Interior => "interior",
            SolutionCase::BoundaryZero => "boundary_zero",
            SolutionCase::BoundaryOne => "boundary_one",
            SolutionCase::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceDiagnostics {
    pub mean_lambda: f64,
    pub mean_inv_lambda: f64,
    pub degenerate: bool,
    pub case: SolutionCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddsEstimate {
    /// Estimated prior; NaN when `status` is `Degenerate`.
    pub p1: f64,
    pub status: SolutionCase,
    pub residual: f64,
    pub iterations: usize,
    pub diagnostics: ExistenceDiagnostics,
}

/// `F(p) = E[1 / (p + (1 - p) lambda)]`.
pub fn f_eval(p: f64, s: &LambdaSample) -> f64 {
    let q = 1.0 - p;
    s.support().map(|(l, w)| w / (p + q * l)).sum()
}

/// Derivative `F'(p) = E[(lambda - 1) / (p + (1 - p) lambda)^2]`.
pub fn f_derivative(p: f64, s: &LambdaSample) -> f64 {
    let q = 1.0 - p;
    s.support()
        .map(|(l, w)| {
            let d = p + q * l;
            w * (l - 1.0) / (d * d)
        })
        .sum()
}

/// `sum_i w_i (1 - lambda_i) / (p + (1 - p) lambda_i)`: the derivative of the
/// mixture log-likelihood in `p`. Strictly decreasing for non-degenerate samples.
pub fn score(p: f64, s: &LambdaSample) -> f64 {
    let q = 1.0 - p;
    s.support().map(|(l, w)| w * (1.0 - l) / (p + q * l)).sum()
}

/// Classifies the shape of `F`. `tol` is used both for the degeneracy test
/// `|lambda_i - 1| <= tol` and for the `E[1/lambda] = 1` boundary.
pub fn diagnose(s: &LambdaSample, tol: f64) -> ExistenceDiagnostics {
    let mean_lambda = s.mean_lambda();
    let mean_inv_lambda = s.mean_inv_lambda();
    let degenerate = s.support().all(|(l, _)| (l - 1.0).abs() <= tol);
    let case = if degenerate {
        SolutionCase::Degenerate
    } else if (mean_inv_lambda - 1.0).abs() <= tol {
        SolutionCase::BoundaryZero
    } else if mean_lambda > 1.0 && mean_inv_lambda > 1.0 {
        SolutionCase::Interior
    } else {
        // E[lambda] <= 1, or E[1/lambda] < 1: F = 1 only at p = 1
        SolutionCase::BoundaryOne
    };
    ExistenceDiagnostics {
        mean_lambda,
        mean_inv_lambda,
        degenerate,
        case,
    }
}

/// Solves `F(p) = 1` for the target prior.
///
/// Interior roots are found by bisection on the sign of `F - 1`, run until
/// the bracket shrinks to adjacent floating-point numbers. The sign is taken
/// from [`score`], which shares the interior root. Boundary and
/// degenerate cases are reported through `status` rather than as errors.
pub fn solve_total_odds(s: &LambdaSample, tol: f64, max_iter: usize) -> Result<OddsEstimate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let diagnostics = diagnose(s, tol.max(BOUNDARY_TOL));
    let boundary = |p1: f64| OddsEstimate {
        p1,
        status: diagnostics.case,
        residual: if p1.is_nan() { f64::NAN } else { (f_eval(p1, s) - 1.0).abs() },
        iterations: 0,
        diagnostics,
    };
    match diagnostics.case {
        SolutionCase::Degenerate => return Ok(boundary(f64::NAN)),
        SolutionCase::BoundaryZero => return Ok(boundary(0.0)),
        SolutionCase::BoundaryOne => return Ok(boundary(1.0)),
        SolutionCase::Interior => {}
    }

    // F(p) - 1 = (1 - p) score(p); bisecting the score avoids the flat
    // stretch of F - 1 between a root close to 1 and the trivial root at 1
    let (root, iterations) = bisect_decreasing(|p| score(p, s), 0.0, 1.0, max_iter)?;
    let residual = (f_eval(root, s) - 1.0).abs();
    if residual > tol {
        return Err(Error::NoConvergence {
            iterations,
            residual,
        });
    }
    Ok(OddsEstimate {
        p1: root,
        status: SolutionCase::Interior,
        residual,
        iterations,
        diagnostics,
    })
}

/// Newton iteration on `F(p) = 1` from `start`, safeguarded to stay in
/// `(0, 1)`. An independent route to the interior root.
pub fn newton_total_odds(s: &LambdaSample, start: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let mut p = start;
    for _ in 0..max_iter {
        let g = f_eval(p, s) - 1.0;
        let dg = f_derivative(p, s);
        if g.abs() <= tol * 1e-3 || dg == 0.0 {
            return Ok(p);
        }
        let mut next = p - g / dg;
        if !(next > 0.0 && next < 1.0) {
            // stay inside the domain, halving toward the violated side
            next = if next <= 0.0 { 0.5 * p } else { 0.5 * (p + 1.0) };
        }
        if (next - p).abs() <= f64::EPSILON * p.max(1e-300) {
            return Ok(next);
        }
        p = next;
    }
    let residual = (f_eval(p, s) - 1.0).abs();
    if residual <= tol {
        Ok(p)
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual,
        })
    }
}

/// Scale factor `c > 0` with `E[1 / (p1 + (1 - p1) c lambda)] = 1`.
///
/// The root lies in `(1 / E[lambda], E[1/lambda])`; the scaled ratio
/// `c lambda` makes `p1_target` the total-odds prior of the target.
pub fn solve_scale(s: &LambdaSample, p1_target: f64, tol: f64, max_iter: usize) -> Result<f64> {
    if !(p1_target > 0.0 && p1_target < 1.0) {
        return Err(Error::invalid(format!("target prior {p1_target} outside (0,1)")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let first = s.support().next().map(|(l, _)| l).unwrap_or(1.0);
    if s
        .support()
        .all(|(l, _)| (l - first).abs() <= tol * first.max(1.0))
    {
        return Err(Error::DegenerateLambda);
    }
    let p = p1_target;
    let h = |c: f64| -> f64 {
        s.support()
            .map(|(l, w)| w / (p + (1.0 - p) * c * l))
            .sum::<f64>()
            - 1.0
    };
    let mut lo = 1.0 / s.mean_lambda();
    let mut hi = s.mean_inv_lambda();
    // h is decreasing in c; widen if rounding puts a bound on the wrong side
    while h(lo) <= 0.0 {
        lo *= 0.5;
    }
    while h(hi) >= 0.0 {
        hi *= 2.0;
    }
    let (c, iterations) = bisect_decreasing(h, lo, hi, max_iter)?;
    let residual = h(c).abs();
    if residual > tol {
        return Err(Error::NoConvergence {
            iterations,
            residual,
        });
    }
    Ok(c)
}

/// Bisection for a decreasing function that is positive near `lo` and
/// negative near `hi`. Endpoints themselves are never evaluated, so `hi` may
/// be a trivial root. Returns the better endpoint of the final bracket.
fn bisect_decreasing<G: Fn(f64) -> f64>(
    g: G,
    mut lo: f64,
    mut hi: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let mut best = (0.5 * (lo + hi), f64::INFINITY);
    for iter in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok((best.0, iter - 1));
        }
        let v = g(mid);
        if v.abs() < best.1 {
            best = (mid, v.abs());
        }
        if v > 0.0 {
            lo = mid;
        } else if v < 0.0 {
            hi = mid;
        } else {
            return Ok((mid, iter));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: best.1,
    })
}
