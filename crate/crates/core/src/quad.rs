//! Adaptive Simpson quadrature with a bounded evaluation budget.

use crate::error::{Error, Result};

/// Default evaluation budget per integration call.
pub const DEFAULT_BUDGET: usize = 4096;

/// Integrates `f` over `[a, b]` to the requested relative tolerance.
///
/// Uses adaptive Simpson bisection with the classical 1/15 error estimate.
/// Fails with [`Error::QuadratureBudget`] if more than `budget` integrand
/// evaluations would be needed.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    budget: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let evals = std::cell::Cell::new(0usize);
    let eval = |t: f64| -> f64 {
        evals.set(evals.get() + 1);
        f(t)
    };
    let fa = eval(a);
    let fb = eval(b);
    let m = 0.5 * (a + b);
    let fm = eval(m);
    let whole = simpson(a, b, fa, fm, fb);
    // Absolute tolerance anchored on a first coarse pass; the floor keeps the
    // criterion meaningful when the integral is close to zero.
    let tol = rel_tol * whole.abs().max(1e-300) + f64::EPSILON;
    let mut out = 0.0;
    // Manual stack instead of recursion: (a, fa, m, fm, b, fb, whole, tol).
    let mut stack = vec![(a, fa, m, fm, b, fb, whole, tol)];
    while let Some((a, fa, m, fm, b, fb, whole, tol)) = stack.pop() {
        if evals.get() + 2 > budget {
            return Err(Error::QuadratureBudget);
        }
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = eval(lm);
        let frm = eval(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            out += left + right + delta / 15.0;
        } else {
            stack.push((a, fa, lm, flm, m, fm, left, 0.5 * tol));
            stack.push((m, fm, rm, frm, b, fb, right, 0.5 * tol));
        }
    }
    Ok(out)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}
