//! First-order optimality certificates.
//!
//! At a feasible allocation with a spanning-tree basis, the reduced
//! derivative of cell `(i, j)` is `w_ij = f'_ij(x_ij) - u_i - v_j`. The point
//! is a KKT point when every `w_ij >= 0` and every `x_ij * w_ij = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Problem, DEFAULT_DERIVATIVE_CAP};
use crate::tableau::{check_feasible, find_loop, Allocation, Basis, Duals, Matrix};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Reduced derivatives.
    pub w: Matrix,
    /// Complementary-slackness products `x_ij * w_ij`.
    pub cs: Matrix,
    pub max_stationarity_violation: f64,
    pub max_nonneg_violation: f64,
    pub max_cs_violation: f64,
    pub satisfied: bool,
}

pub fn reduced_derivatives(problem: &Problem, x: &Allocation, duals: &Duals) -> Result<Matrix> {
    let (m, n) = (problem.rows(), problem.cols());
    if x.rows() != m || x.cols() != n || duals.u.len() != m || duals.v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "problem is {m}x{n}, allocation {}x{}, duals {}+{}",
            x.rows(),
            x.cols(),
            duals.u.len(),
            duals.v.len()
        )));
    }
    Ok(Matrix::from_fn(m, n, |i, j| {
        let slope = problem.costs[i][j].derivative_unchecked(x[(i, j)].max(0.0), DEFAULT_DERIVATIVE_CAP);
        slope - duals.u[i] - duals.v[j]
    }))
}

/// `w` from the stepping-stone loop of each nonbasic cell: the alternating sum
/// of slopes around the loop, which equals `f'_ij - u_i - v_j` without forming
/// the duals. Basic cells are exactly zero.
///
/// A degenerate basic power cell at zero carries the derivative cap (about
/// 1e12) into every dual, and `f' - u - v` then loses everything below one
/// ulp of 1e12. Summing the loop in double-double keeps the cancellation exact
/// up to the final rounding.
fn loop_reduced_derivatives(problem: &Problem, x: &Allocation, basis: &Basis) -> Result<Matrix> {
    let (m, n) = (problem.rows(), problem.cols());
    let slope = |(i, j): (usize, usize)| {
        problem.costs[i][j].derivative_unchecked(x[(i, j)].max(0.0), DEFAULT_DERIVATIVE_CAP)
    };
    let mut w = Matrix::from_fn(m, n, |_, _| 0.0);
    for cell in x.cells().filter(|&c| !basis.contains(c)) {
        let cycle = find_loop(m, n, basis, cell)?;
        let (mut hi, mut lo) = (0.0, 0.0);
        for (k, &c) in cycle.iter().enumerate() {
            let term = if k % 2 == 0 { slope(c) } else { -slope(c) };
            let (s, e) = two_sum(hi, term);
            hi = s;
            lo += e;
        }
        w[cell] = hi + lo;
    }
    Ok(w)
}

/// Knuth's error-free sum: `a + b == s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Builds the certificate for `x` under `basis`.
///
/// Complementary slackness is judged against `tol * max(1, |total cost|)`;
/// the sign condition uses `tol` directly.
pub fn check_kkt(problem: &Problem, x: &Allocation, basis: &Basis, tol: f64) -> Result<KktReport> {
    check_feasible(problem, x)?;
    let w = loop_reduced_derivatives(problem, x, basis)?;
    let cs = Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] * w[(i, j)]);

    let mut report = KktReport {
        max_stationarity_violation: basis
            .cells()
            .iter()
            .map(|&c| w[c].abs())
            .fold(0.0, f64::max),
        max_nonneg_violation: w.as_slice().iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max),
        max_cs_violation: x
            .cells()
            .filter(|&c| !basis.contains(c))
            .map(|c| cs[c].abs())
            .fold(0.0, f64::max),
        w,
        cs,
        satisfied: false,
    };
    let scale = problem.total_cost(x)?.abs().max(1.0);
    report.satisfied = report.max_stationarity_violation <= tol
        && report.max_nonneg_violation <= tol
        && report.max_cs_violation <= tol * scale;
    Ok(report)
}
