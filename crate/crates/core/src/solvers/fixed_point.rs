//! Normalized fixed-point iteration `w <- f(w) / g(f(w))`.
//!
//! For a standard interference function and a monotone, degree-one
//! homogeneous `g`, the iteration converges to the unique max-min
//! allocation, and `min_s w_s / f_s(w)` never decreases along the way.

use serde::{Deserialize, Serialize};

use super::mapping::{utility, FrozenMap, LoadConstraint};

/// One iterate of a fixed-point loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Outer (coupling-update) step this iterate belongs to.
    pub outer: usize,
    pub rho: f64,
    /// Infinity-norm step from the previous iterate; 0 for a starting point.
    pub delta: f64,
    /// Constraint value `g(w)` of the iterate.
    pub load: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub w: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn normalize(w: &mut [f64], g: &LoadConstraint) {
    let scale = g.eval(w);
    if scale > 0.0 {
        w.iter_mut().for_each(|x| *x /= scale);
    }
}

/// Iterates from `w_init` (rescaled onto `g = 1`) until the next update
/// would move the current iterate by less than `epsilon` in the infinity
/// norm, or `iter_cap` updates have been made. The iterate returned is the
/// one whose residual passed the test.
///
/// Every iterate, the start included, is appended to `trace` when given.
pub fn fixed_point_solve(
    f: &FrozenMap,
    g: &LoadConstraint,
    epsilon: f64,
    iter_cap: usize,
    w_init: &[f64],
    outer: usize,
    mut trace: Option<&mut Vec<TraceRecord>>,
) -> FixedPoint {
    let mut w = w_init.to_vec();
    normalize(&mut w, g);
    let mut fw = f.eval(&w);
    if let Some(t) = trace.as_deref_mut() {
        t.push(TraceRecord {
            outer,
            rho: utility(&w, &fw),
            delta: 0.0,
            load: g.eval(&w),
        });
    }

    let mut next = vec![0.0; w.len()];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        // `delta` is the residual `||w - f(w)/g(f(w))||` of the current iterate
        let norm = g.eval(&fw);
        let mut delta = 0.0_f64;
        for ((n, fs), old) in next.iter_mut().zip(&fw).zip(&w) {
            *n = fs / norm;
            delta = delta.max((*n - old).abs());
        }
        if delta < epsilon {
            converged = true;
            break;
        }
        if iterations == iter_cap {
            break;
        }
        std::mem::swap(&mut w, &mut next);
        f.eval_into(&w, &mut fw);
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRecord {
                outer,
                rho: utility(&w, &fw),
                delta,
                load: g.eval(&w),
            });
        }
    }
    let rho = utility(&w, &fw);
    FixedPoint {
        w,
        rho,
        iterations,
        converged,
    }
}
