use crate::error::{Error, Result};
use crate::ibfs::initial_solution;
use crate::kkt::reduced_derivatives;
use crate::problem::{CostClass, Problem};
use crate::tableau::{apply_theta, compute_duals, find_loop, max_theta, Cell};

use super::{
    finish, objective, scale, smallest_blocking, Solution, SolverOptions, Trace, TraceRecord,
};

/// Extreme-point descent for concave (and linear) costs.
///
/// Every iterate is a basic solution. Each round prices the nonbasic cells
/// with the gradient at the current vertex, then tries the cells with
/// negative price from most to least negative, taking the first full pivot
/// that lowers the total cost by more than `tol * scale`.
///
/// The price of a cell is its reduced derivative, corrected for discount
/// breakpoints: a cell that would lose flow from a breakpoint is charged its
/// left-hand slope, which is the rate the move actually saves.
///
/// When no candidate improves, all remaining candidates have a zero step.
/// Such a pivot leaves the vertex and the gradient unchanged, so the solver
/// performs it with smallest-index entering and leaving rules (which cannot
/// cycle on a fixed cost vector) and keeps looking for a basis that either
/// certifies the vertex or exposes an improving edge.
pub fn solve_concave(problem: &Problem, options: &SolverOptions) -> Result<(Solution, Trace)> {
    options.check()?;
    let class = problem.classify();
    if !matches!(class, CostClass::Linear | CostClass::Concave) {
        return Err(Error::UnsupportedClass {
            algorithm: "concave",
            class,
        });
    }
    let (m, n) = (problem.rows(), problem.cols());
    let (mut x, mut basis) = initial_solution(problem, options.ibfs_rule)?;
    let feas = problem.feasibility_tol();
    let mut trace = Trace::new();
    let mut iterations = 0;
    let mut hit_limit = false;

    loop {
        let duals = compute_duals(problem, &x, &basis)?;
        let w = reduced_derivatives(problem, &x, &duals)?;
        let mut candidates = Vec::new();
        for cell in w.cells().filter(|&c| !basis.contains(c)) {
            let cycle = find_loop(m, n, &basis, cell)?;
            let price = w[cell] - kink_correction(problem, &x, &cycle);
            if price < -options.tol {
                candidates.push((price, cell));
            }
        }
        if candidates.is_empty() {
            break;
        }
        if iterations >= options.max_iterations {
            hit_limit = true;
            break;
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let before = objective(problem, &x);
        let threshold = options.tol * scale(before);
        let mut accepted = None;
        for &(_, entering) in &candidates {
            let cycle = find_loop(m, n, &basis, entering)?;
            let (theta, leaving) = max_theta(&x, &cycle)?;
            if theta <= feas {
                continue;
            }
            let y = apply_theta(&x, &cycle, theta)?;
            let after = objective(problem, &y);
            if before - after > threshold {
                accepted = Some((entering, leaving, theta, y, after));
                break;
            }
        }

        let (entering, leaving, theta, y, after) = match accepted {
            Some(step) => step,
            None => {
                // degenerate move: the smallest candidate cell enters
                let entering = candidates.iter().map(|&(_, c)| c).min().unwrap();
                let cycle = find_loop(m, n, &basis, entering)?;
                let (theta, _) = max_theta(&x, &cycle)?;
                if theta > feas {
                    // a real step that does not pay off: nothing left to try
                    break;
                }
                let leaving = smallest_blocking(&x, &cycle, theta, feas);
                (entering, leaving, 0.0, x.clone(), before)
            }
        };
        x = y;
        x[leaving] = 0.0;
        basis.exchange(leaving, entering);
        iterations += 1;
        if options.trace {
            trace.push(TraceRecord {
                iteration: iterations,
                entering,
                case: None,
                theta,
                lambda: None,
                objective_before: before,
                objective_after: after,
                basis_changed: true,
            });
        }
    }
    let may_be_optimal = class == CostClass::Linear;
    let solution = finish(problem, x, basis, iterations, hit_limit, may_be_optimal, options)?;
    Ok((solution, trace))
}

/// Sum of left-minus-right slope jumps over the cells a pivot would decrease.
fn kink_correction(problem: &Problem, x: &crate::tableau::Allocation, cycle: &[Cell]) -> f64 {
    cycle
        .iter()
        .skip(1)
        .step_by(2)
        .map(|&(i, j)| problem.costs[i][j].kink_jump(x[(i, j)]))
        .sum()
}
