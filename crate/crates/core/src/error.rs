use thiserror::Error;

use crate::tableau::Cell;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("negative quantity {value} in {what}[{index}]")]
    NegativeQuantity {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("problem is unbalanced: total supply minus total demand is {gap}")]
    Unbalanced { gap: f64 },
    #[error("invalid cost model at cell ({row}, {col}): {reason}")]
    InvalidCostModel {
        row: usize,
        col: usize,
        reason: String,
    },
    #[error("cost functions are defined for x >= 0, got {0}")]
    NegativeArgument(f64),
    #[error("row {row} sum differs from its supply by {gap}")]
    RowSumViolation { row: usize, gap: f64 },
    #[error("column {col} sum differs from its demand by {gap}")]
    ColSumViolation { col: usize, gap: f64 },
    #[error("negative allocation at cell ({row}, {col})")]
    NegativeCell { row: usize, col: usize },
    #[error("cell ({}, {}) is outside a {rows}x{cols} tableau", .cell.0, .cell.1)]
    OutOfRangeCell { cell: Cell, rows: usize, cols: usize },
    #[error("basis is not a spanning tree of the row/column graph")]
    NotATree,
    #[error("entering cell ({}, {}) is already basic", .0.0, .0.1)]
    EnteringIsBasic(Cell),
    #[error("loop has no cells to decrease")]
    EmptyLoop,
    #[error("theta {theta} exceeds the largest feasible step {max}")]
    ThetaTooLarge { theta: f64, max: f64 },
    #[error("line search endpoint is infeasible: {0}")]
    InfeasibleEndpoint(String),
    #[error("vertex enumeration would visit {count} spanning trees (cap {cap})")]
    TooLarge { count: u128, cap: u128 },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("problem is not convex")]
    NotConvex,
    #[error("the {algorithm} solver does not accept {class:?} problems")]
    UnsupportedClass {
        algorithm: &'static str,
        class: crate::problem::CostClass,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
