use crate::error::{Error, Result};
use crate::ibfs::initial_solution;
use crate::kkt::reduced_derivatives;
use crate::problem::{CostClass, Problem};
use crate::tableau::{apply_theta, compute_duals, find_loop, max_theta};

use super::{
    finish, first_negative, most_negative, objective, scale, smallest_blocking, Solution,
    SolverOptions, Trace, TraceRecord,
};

/// Transportation simplex for linear costs.
///
/// Enters the most negative reduced cost. After a pivot that fails to lower
/// the objective, switches to smallest-index entering and leaving choices
/// until progress resumes, which rules out cycling on degenerate vertices.
pub fn solve_linear(problem: &Problem, options: &SolverOptions) -> Result<(Solution, Trace)> {
    options.check()?;
    let class = problem.classify();
    if class != CostClass::Linear {
        return Err(Error::UnsupportedClass {
            algorithm: "linear",
            class,
        });
    }
    let (m, n) = (problem.rows(), problem.cols());
    let (mut x, mut basis) = initial_solution(problem, options.ibfs_rule)?;
    let feas = problem.feasibility_tol();
    let mut trace = Trace::new();
    let mut iterations = 0;
    let mut stalled = false;
    let mut hit_limit = false;

    loop {
        let duals = compute_duals(problem, &x, &basis)?;
        let w = reduced_derivatives(problem, &x, &duals)?;
        let entering = if stalled {
            first_negative(&w, &basis, options.tol)
        } else {
            most_negative(&w, &basis)
                .filter(|&(v, _)| v < -options.tol)
                .map(|(_, c)| c)
        };
        let Some(entering) = entering else { break };
        if iterations >= options.max_iterations {
            hit_limit = true;
            break;
        }

        let cycle = find_loop(m, n, &basis, entering)?;
        let (theta, mut leaving) = max_theta(&x, &cycle)?;
        if stalled {
            leaving = smallest_blocking(&x, &cycle, theta, feas);
        }
        let before = objective(problem, &x);
        x = apply_theta(&x, &cycle, theta)?;
        x[leaving] = 0.0;
        basis.exchange(leaving, entering);
        iterations += 1;
        let after = objective(problem, &x);
        stalled = before - after < options.tol * scale(before);

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
    debug_assert!(basis.len() == m + n - 1);
    let solution = finish(problem, x, basis, iterations, hit_limit, true, options)?;
    Ok((solution, trace))
}
