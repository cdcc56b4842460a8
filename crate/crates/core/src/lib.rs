//! Transportation problems with nonlinear, separable shipping costs.
//!
//! Costs per cell may be linear, convex quadratic, concave power laws or
//! incremental volume-discount schedules. The crate provides:
//!
//! * [`problem`]: problem data, cost models and their derivatives;
//! * [`tableau`]: allocations, spanning-tree bases, duals and theta-loops;
//! * [`ibfs`]: northwest corner, Vogel, row minima and least cost starts;
//! * [`kkt`]: reduced derivatives and KKT certificates;
//! * [`solvers`]: transportation simplex, concave extreme-point descent and
//!   the transportation convex simplex;
//! * [`oracle`]: vertex enumeration and a Frank-Wolfe reference for tests;
//! * [`render`]: fixed-width tableau rendering.
//!
//! ```
//! use nltrans::{solve, CostModel, Problem, SolverOptions, Status};
//!
//! let sq = CostModel::quadratic(0.0, 1.0);
//! let lin = CostModel::linear(1.0);
//! let problem = Problem::new(
//!     vec![2.0, 2.0],
//!     vec![2.0, 2.0],
//!     vec![vec![sq.clone(), lin.clone()], vec![lin, sq]],
//! );
//! let (solution, _) = solve(&problem, &SolverOptions::default()).unwrap();
//! assert!((solution.objective - 3.5).abs() < 1e-6);
//! assert_eq!(solution.status, Status::Optimal);
//! ```

pub mod error;
pub mod ibfs;
pub mod kkt;
pub mod oracle;
pub mod problem;
pub mod render;
pub mod solvers;
pub mod tableau;

pub use error::{Error, Result};
pub use ibfs::{initial_solution, IbfsRule};
pub use kkt::{check_kkt, reduced_derivatives, KktReport};
pub use problem::{cell_cost, cell_derivative, CostClass, CostModel, Problem};
pub use render::render_tableau;
pub use solvers::{
    line_search, solve, solve_concave, solve_convex, solve_linear, solve_with, Algorithm,
    Solution, SolverOptions, Status, Trace, TraceRecord,
};
pub use tableau::{
    apply_theta, check_feasible, compute_duals, find_loop, is_spanning_tree, max_theta,
    Allocation, Basis, Cell, Duals, Matrix,
};
