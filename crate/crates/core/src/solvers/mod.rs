//! Solution algorithms and the class-based dispatcher.
//!
//! * [`solve_linear`]: the classical transportation simplex.
//! * [`solve_concave`]: descent over extreme points for concave costs.
//! * [`solve_convex`]: the transportation convex simplex, which lets
//!   nonbasic cells carry flow and line-searches every move.

mod concave;
mod convex;
mod line_search;
mod linear;

use serde::{Deserialize, Serialize};

pub use concave::solve_concave;
pub use convex::solve_convex;
pub use line_search::{line_search, golden_section};
pub use linear::solve_linear;

use crate::error::{Error, Result};
use crate::ibfs::IbfsRule;
use crate::kkt::{check_kkt, KktReport, DEFAULT_TOL};
use crate::problem::{CostClass, Problem};
use crate::tableau::{Allocation, Basis, Cell, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub ibfs_rule: IbfsRule,
    /// Final bracket width for the step-length search.
    pub line_search_tol: f64,
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iterations: 10_000,
            ibfs_rule: IbfsRule::NorthwestCorner,
            line_search_tol: 1e-10,
            trace: false,
        }
    }
}

impl SolverOptions {
    pub fn with_trace(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn with_rule(mut self, rule: IbfsRule) -> Self {
        self.ibfs_rule = rule;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidOptions(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOptions("max_iterations must be at least 1".into()));
        }
        if !(self.line_search_tol > 0.0) {
            return Err(Error::InvalidOptions(format!(
                "line_search_tol must be positive, got {}",
                self.line_search_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// KKT certificate holds and the cost class makes it global.
    Optimal,
    /// Stopped at a point with no improving move found.
    KktPoint,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Auto,
    Linear,
    Concave,
    Convex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Allocation,
    pub basis: Basis,
    pub objective: f64,
    pub kkt: KktReport,
    pub status: Status,
    pub iterations: usize,
}

/// One improving move.
///
/// `lambda` follows the convex-combination convention
/// `x_next = lambda * x + (1 - lambda) * y`, so `lambda = 0` is the full
/// step to the pivoted point `y` and `lambda = 1` means no move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub entering: Cell,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub objective_before: f64,
    pub objective_after: f64,
    pub basis_changed: bool,
}

pub type Trace = Vec<TraceRecord>;

/// Classifies the problem and runs the matching algorithm. Mixed problems
/// run the convex simplex but never report `Optimal`.
pub fn solve(problem: &Problem, options: &SolverOptions) -> Result<(Solution, Trace)> {
    solve_with(problem, Algorithm::Auto, options)
}

pub fn solve_with(
    problem: &Problem,
    algorithm: Algorithm,
    options: &SolverOptions,
) -> Result<(Solution, Trace)> {
    problem.validate()?;
    match algorithm {
        Algorithm::Linear => solve_linear(problem, options),
        Algorithm::Concave => solve_concave(problem, options),
        Algorithm::Convex => solve_convex(problem, options),
        Algorithm::Auto => match problem.classify() {
            CostClass::Linear => solve_linear(problem, options),
            CostClass::Concave => solve_concave(problem, options),
            CostClass::Convex | CostClass::Mixed => solve_convex(problem, options),
        },
    }
}

fn objective(problem: &Problem, x: &Allocation) -> f64 {
    let mut total = 0.0;
    for (i, row) in problem.costs.iter().enumerate() {
        for (j, model) in row.iter().enumerate() {
            total += model.cost_unchecked(x[(i, j)].max(0.0));
        }
    }
    total
}

fn scale(value: f64) -> f64 {
    value.abs().max(1.0)
}

/// Nonbasic cell with the most negative reduced derivative, ties broken by
/// row-major order.
fn most_negative(w: &Matrix, basis: &Basis) -> Option<(f64, Cell)> {
    let mut best: Option<(f64, Cell)> = None;
    for cell in w.cells().filter(|&c| !basis.contains(c)) {
        if best.map_or(true, |(b, _)| w[cell] < b) {
            best = Some((w[cell], cell));
        }
    }
    best
}

/// First nonbasic cell in row-major order whose reduced derivative is below
/// `-tol`.
fn first_negative(w: &Matrix, basis: &Basis, tol: f64) -> Option<Cell> {
    w.cells().find(|&c| !basis.contains(c) && w[c] < -tol)
}

/// Smallest decreasing cell whose value ties the step length.
fn smallest_blocking(x: &Allocation, cycle: &[Cell], theta: f64, tol: f64) -> Cell {
    cycle
        .iter()
        .skip(1)
        .step_by(2)
        .copied()
        .filter(|&c| x[c] <= theta + tol)
        .min()
        .expect("cycles always contain a decreasing cell")
}

fn finish(
    problem: &Problem,
    x: Allocation,
    basis: Basis,
    iterations: usize,
    hit_limit: bool,
    may_be_optimal: bool,
    options: &SolverOptions,
) -> Result<Solution> {
    let kkt = check_kkt(problem, &x, &basis, options.tol)?;
    let status = if hit_limit {
        Status::IterationLimit
    } else if kkt.satisfied && may_be_optimal {
        Status::Optimal
    } else {
        Status::KktPoint
    };
    Ok(Solution {
        objective: problem.total_cost(&x)?,
        x,
        basis,
        kkt,
        status,
        iterations,
    })
}
