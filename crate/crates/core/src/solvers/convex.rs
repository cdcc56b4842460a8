use crate::error::Result;
use crate::ibfs::initial_solution;
use crate::kkt::reduced_derivatives;
use crate::problem::{CostClass, Problem};
use crate::tableau::{apply_theta, compute_duals, find_loop, max_theta, Allocation, Cell, Matrix};

use super::line_search::segment_change;
use super::{
    finish, first_negative, line_search, objective, scale, smallest_blocking, Solution,
    SolverOptions, Trace, TraceRecord,
};
use crate::tableau::Basis;

/// Which nonbasic cell moves, and in which direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    /// Case 1: a nonbasic cell holding flow at a positive reduced derivative
    /// gives it back.
    Decrease(Cell),
    /// Case 2: the most negative reduced derivative takes on flow.
    Increase(Cell),
}

/// Transportation convex simplex.
///
/// Nonbasic cells may carry flow. Each iteration prices the cells with the
/// duals of the current basis and stops once every nonbasic reduced
/// derivative is nonnegative and every nonbasic cell with flow has a zero
/// reduced derivative. Otherwise it picks one nonbasic cell to increase
/// (case 2) or decrease (case 1), or the better of the two when both are
/// possible (case 3), pivots it fully around its loop to get `y`, and then
/// searches the segment between `x` and `y` for the best point. The basis
/// changes only when the search lands on `y` and a basic cell reached zero.
///
/// Runs on any cost class; only linear and convex problems may come back
/// `Optimal`.
pub fn solve_convex(problem: &Problem, options: &SolverOptions) -> Result<(Solution, Trace)> {
    options.check()?;
    let class = problem.classify();
    let (m, n) = (problem.rows(), problem.cols());
    let (mut x, mut basis) = initial_solution(problem, options.ibfs_rule)?;
    let feas = problem.feasibility_tol();
    let stall_limit = m + n;
    let mut trace = Trace::new();
    let mut iterations = 0;
    let mut stalls = 0;
    let mut degenerate = false;
    let mut hit_limit = false;

    loop {
        let current = objective(problem, &x);
        let duals = compute_duals(problem, &x, &basis)?;
        let w = reduced_derivatives(problem, &x, &duals)?;
        let Some(mv) = choose_move(&x, &w, &basis, options.tol, scale(current), degenerate, m, n, feas)?
        else {
            break;
        };
        if iterations >= options.max_iterations {
            hit_limit = true;
            break;
        }

        let (entering, cycle, case) = match mv {
            (Move::Increase(c), case) => (c, find_loop(m, n, &basis, c)?, case),
            (Move::Decrease(c), case) => {
                // rotating the loop by one flips every sign, so the cell
                // itself becomes a decreasing position
                let mut cycle = find_loop(m, n, &basis, c)?;
                cycle.rotate_left(1);
                (c, cycle, case)
            }
        };
        let (theta, mut blocking) = max_theta(&x, &cycle)?;
        if degenerate {
            blocking = smallest_blocking(&x, &cycle, theta, feas);
        }
        let y = apply_theta(&x, &cycle, theta)?;
        let (lambda, mut next) = line_search(problem, &x, &y, options.line_search_tol)?;
        let change = segment_change(problem, &x, &y, lambda);

        let reached_y = next.max_abs_diff(&y) <= 1e-9 * theta.max(1.0);
        let mut basis_changed = false;
        if reached_y {
            next = y;
            next[blocking] = 0.0;
            if blocking != entering {
                basis.exchange(blocking, entering);
                basis_changed = true;
            }
        }
        let after = objective(problem, &next);
        x = next;
        iterations += 1;

        degenerate = basis_changed && theta <= feas;
        // slow but real progress is not a stall; only steps that neither
        // lower the cost nor change the basis can repeat forever
        if !basis_changed && change >= 0.0 {
            stalls += 1;
        } else {
            stalls = 0;
        }

        if options.trace {
            trace.push(TraceRecord {
                iteration: iterations,
                entering,
                case: Some(case),
                theta,
                lambda: Some(lambda),
                objective_before: current,
                objective_after: after,
                basis_changed,
            });
        }
        if stalls >= stall_limit {
            break;
        }
    }
    let may_be_optimal = matches!(class, CostClass::Linear | CostClass::Convex) && stalls < stall_limit;
    let solution = finish(problem, x, basis, iterations, hit_limit, may_be_optimal, options)?;
    Ok((solution, trace))
}

/// Applies the stopping test and the case table. Returns the move and its
/// case number, or `None` at a KKT point.
#[allow(clippy::too_many_arguments)]
fn choose_move(
    x: &Allocation,
    w: &Matrix,
    basis: &Basis,
    tol: f64,
    scale: f64,
    degenerate: bool,
    m: usize,
    n: usize,
    feas: f64,
) -> Result<Option<(Move, u8)>> {
    // most negative reduced derivative, and largest x * w, over nonbasic cells
    let mut rl: Option<(f64, Cell)> = None;
    let mut st: Option<(f64, Cell)> = None;
    for cell in x.cells().filter(|&c| !basis.contains(c)) {
        if rl.map_or(true, |(v, _)| w[cell] < v) {
            rl = Some((w[cell], cell));
        }
        let g = x[cell] * w[cell];
        if st.map_or(true, |(v, _)| g > v) {
            st = Some((g, cell));
        }
    }
    let (Some((d_rl, mut rl)), Some((g_st, st))) = (rl, st) else {
        // every cell is basic (a single row or column): nothing can move
        return Ok(None);
    };
    if degenerate {
        if let Some(first) = first_negative(w, basis, tol) {
            rl = first;
        }
    }
    let increase = d_rl < -tol;
    let decrease = g_st > tol * scale;
    Ok(match (increase, decrease) {
        (false, false) => None,
        (false, true) => Some((Move::Decrease(st), 1)),
        (true, false) => Some((Move::Increase(rl), 2)),
        (true, true) => {
            // compare first-order gains of the two full moves
            let cycle = find_loop(m, n, basis, rl)?;
            let (theta_rl, _) = max_theta(x, &cycle)?;
            let gain_increase = d_rl.abs() * theta_rl.max(feas);
            if gain_increase >= g_st {
                Some((Move::Increase(rl), 3))
            } else {
                Some((Move::Decrease(st), 3))
            }
        }
    })
}
