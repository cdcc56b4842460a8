use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::tableau::{check_feasible, Allocation};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of `f` on `[lo, hi]` until the bracket is
/// narrower than `width`. Returns the bracket midpoint.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > width {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// `cost(lambda * x_k + (1 - lambda) * y_k) - cost(x_k)`, accumulated from
/// per-cell increments.
pub(crate) fn segment_change(problem: &Problem, x_k: &Allocation, y_k: &Allocation, lambda: f64) -> f64 {
    x_k.cells()
        .filter(|&c| x_k[c] != y_k[c])
        .map(|(i, j)| {
            let from = x_k[(i, j)].max(0.0);
            let delta = ((1.0 - lambda) * (y_k[(i, j)] - x_k[(i, j)])).max(-from);
            problem.costs[i][j].cost_change_unchecked(from, delta)
        })
        .sum()
}

/// Minimises `phi(lambda) = cost(lambda * x_k + (1 - lambda) * y_k)` over
/// `[0, 1]` by golden-section search.
///
/// `lambda = 0` lands on `y_k`. The endpoints are always compared against the
/// interior minimiser, with the full step preferred on ties, so the result is
/// never worse than either end.
pub fn line_search(
    problem: &Problem,
    x_k: &Allocation,
    y_k: &Allocation,
    tol: f64,
) -> Result<(f64, Allocation)> {
    for end in [x_k, y_k] {
        check_feasible(problem, end).map_err(|e| Error::InfeasibleEndpoint(e.to_string()))?;
    }
    // phi is searched relative to phi(1) = cost(x_k), summing only the
    // cells that move, so the comparisons resolve steps far below the
    // rounding noise of the full objective
    let phi = |lambda: f64| segment_change(problem, x_k, y_k, lambda);
    let interior = golden_section(phi, 0.0, 1.0, tol);

    let mut best = (0.0, phi(0.0));
    for lambda in [interior, 1.0] {
        let value = phi(lambda);
        if value < best.1 {
            best = (lambda, value);
        }
    }
    let lambda = best.0;
    let x_next = if lambda == 0.0 {
        y_k.clone()
    } else if lambda == 1.0 {
        x_k.clone()
    } else {
        x_k.blend(y_k, lambda)
    };
    Ok((lambda, x_next))
}
