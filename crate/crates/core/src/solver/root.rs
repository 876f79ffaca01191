//! Safeguarded Newton iteration for monotone scalar equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Absolute tolerance on the residual.
    pub tol: f64,
    pub max_iter: usize,
}

/// Finds `x` in `[lo, hi]` with `|g(x)| <= tol` for a nondecreasing `g` with
/// `g(lo) <= 0`. `g` returns the residual and its slope.
///
/// Newton steps are taken while they stay inside the shrinking bracket;
/// otherwise the bracket is bisected. An `OutOfValidityRange` evaluation is
/// taken to mean the trial point lies beyond the root (validity is lost only
/// towards large `|x|`), so it replaces `hi`. If no valid point above the root
/// is ever found the last validity error is returned.
pub fn newton_bisect<G>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    opts: RootOptions,
) -> Result<f64>
where
    G: FnMut(f64) -> Result<(f64, f64)>,
{
    debug_assert!(lo <= hi);
    let mut x = if x0 > lo && x0 < hi {
        x0
    } else {
        0.5 * (lo + hi)
    };
    let mut hi_bracketed = false;
    let mut validity_err = None;
    let mut best = f64::INFINITY;

    for _ in 0..opts.max_iter {
        match g(x) {
            Ok((gx, slope)) => {
                if gx.abs() <= opts.tol {
                    return Ok(x);
                }
                best = best.min(gx.abs());
                if gx < 0.0 {
                    lo = x;
                } else {
                    hi = x;
                    hi_bracketed = true;
                }
                let step = x - gx / slope;
                x = if slope > 0.0 && step.is_finite() && step > lo && step < hi {
                    step
                } else {
                    0.5 * (lo + hi)
                };
            }
            Err(e @ Error::OutOfValidityRange(_)) => {
                hi = x;
                validity_err = Some(e);
                x = 0.5 * (lo + hi);
            }
            Err(e) => return Err(e),
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    match validity_err {
        Some(e) if !hi_bracketed => Err(e),
        _ => Err(Error::NoConvergence {
            iterations: opts.max_iter,
            residual: best,
        }),
    }
}
