//! Initial basic feasible solutions.
//!
//! All four rules share one greedy engine: pick a cell among the rows and
//! columns still open, ship as much as possible through it, then close
//! exactly one line. Closing one line per step yields `m + n - 1` cells that
//! form a spanning tree. When the row and column run out together the column
//! is closed and the row stays open, leaving a zero-valued basic cell later.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::Problem;
use crate::tableau::{Allocation, Basis, Cell, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IbfsRule {
    #[default]
    #[serde(rename = "northwest")]
    NorthwestCorner,
    Vogel,
    #[serde(rename = "rowmin")]
    RowMinima,
    LeastCost,
}

impl IbfsRule {
    pub const ALL: [IbfsRule; 4] = [
        IbfsRule::NorthwestCorner,
        IbfsRule::Vogel,
        IbfsRule::RowMinima,
        IbfsRule::LeastCost,
    ];
}

struct Open {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

pub fn initial_solution(problem: &Problem, rule: IbfsRule) -> Result<(Allocation, Basis)> {
    problem.validate()?;
    let (m, n) = (problem.rows(), problem.cols());
    // marginal cost at zero flow ranks cells for the cost-aware rules
    let rank = problem.gradient(&Matrix::zeros(m, n));
    let tol = problem.feasibility_tol();

    let mut supply = problem.supply.clone();
    let mut demand = problem.demand.clone();
    let mut open = Open {
        rows: (0..m).collect(),
        cols: (0..n).collect(),
    };
    let mut x = Allocation::zeros(m, n);
    let mut cells = Vec::with_capacity(m + n - 1);

    loop {
        let (i, j) = match rule {
            IbfsRule::NorthwestCorner => (open.rows[0], open.cols[0]),
            IbfsRule::LeastCost => least_cost(&rank, &open),
            IbfsRule::RowMinima => {
                let i = open.rows[0];
                (i, cheapest_in_row(&rank, i, &open.cols))
            }
            IbfsRule::Vogel => vogel(&rank, &open),
        };
        let q = supply[i].min(demand[j]).max(0.0);
        x[(i, j)] = q;
        cells.push((i, j));

        let close_column = if open.rows.len() == 1 && open.cols.len() == 1 {
            break;
        } else if open.rows.len() == 1 {
            true
        } else if open.cols.len() == 1 {
            false
        } else {
            demand[j] <= supply[i] + tol
        };
        supply[i] = (supply[i] - q).max(0.0);
        demand[j] = (demand[j] - q).max(0.0);
        if close_column {
            open.cols.retain(|&c| c != j);
        } else {
            open.rows.retain(|&r| r != i);
        }
    }
    Ok((x, Basis::new(cells)))
}

fn least_cost(rank: &Matrix, open: &Open) -> Cell {
    let mut best = (open.rows[0], open.cols[0]);
    for &i in &open.rows {
        for &j in &open.cols {
            if rank[(i, j)] < rank[best] {
                best = (i, j);
            }
        }
    }
    best
}

fn cheapest_in_row(rank: &Matrix, i: usize, cols: &[usize]) -> usize {
    let mut best = cols[0];
    for &j in cols {
        if rank[(i, j)] < rank[(i, best)] {
            best = j;
        }
    }
    best
}

fn cheapest_in_col(rank: &Matrix, j: usize, rows: &[usize]) -> usize {
    let mut best = rows[0];
    for &i in rows {
        if rank[(i, j)] < rank[(best, j)] {
            best = i;
        }
    }
    best
}

/// Difference between the two smallest costs; a lone cost is its own penalty.
fn penalty(mut costs: impl Iterator<Item = f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut next = f64::INFINITY;
    let first = costs.next().unwrap_or(0.0);
    for c in std::iter::once(first).chain(costs) {
        if c < lo {
            next = lo;
            lo = c;
        } else if c < next {
            next = c;
        }
    }
    if next.is_finite() {
        next - lo
    } else {
        lo
    }
}

/// Line with the largest penalty wins; rows beat columns on ties, then lower
/// index.
fn vogel(rank: &Matrix, open: &Open) -> Cell {
    let mut best_penalty = f64::NEG_INFINITY;
    let mut best = (open.rows[0], open.cols[0]);
    for &i in &open.rows {
        let p = penalty(open.cols.iter().map(|&j| rank[(i, j)]));
        if p > best_penalty {
            best_penalty = p;
            best = (i, cheapest_in_row(rank, i, &open.cols));
        }
    }
    for &j in &open.cols {
        let p = penalty(open.rows.iter().map(|&i| rank[(i, j)]));
        if p > best_penalty {
            best_penalty = p;
            best = (cheapest_in_col(rank, j, &open.rows), j);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::tableau::{check_feasible, is_spanning_tree};

    fn assert_valid(p: &Problem, x: &Allocation, b: &Basis) {
        check_feasible(p, x).unwrap();
        assert!(is_spanning_tree(p.rows(), p.cols(), b).unwrap());
        for c in x.cells() {
            if x[c] > 0.0 {
                assert!(b.contains(c), "positive cell {c:?} outside basis");
            }
        }
    }

    #[test]
    fn northwest_2x3() {
        let p = Problem::linear(
            vec![3.0, 4.0],
            vec![2.0, 3.0, 2.0],
            &[vec![1.0; 3], vec![1.0; 3]],
        );
        let (x, b) = initial_solution(&p, IbfsRule::NorthwestCorner).unwrap();
        assert_eq!(x, Allocation::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.0, 2.0, 2.0]]));
        assert_eq!(b.cells(), &[(0, 0), (0, 1), (1, 1), (1, 2)]);
    }

    #[test]
    fn northwest_degenerate_keeps_zero_basic() {
        let p = Problem::linear(vec![1.0, 1.0], vec![1.0, 1.0], &[vec![1.0; 2], vec![1.0; 2]]);
        let (x, b) = initial_solution(&p, IbfsRule::NorthwestCorner).unwrap();
        assert_eq!(x, Allocation::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]));
        assert_eq!(b.cells(), &[(0, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn single_cell() {
        let p = Problem::linear(vec![5.0], vec![5.0], &[vec![3.0]]);
        for rule in IbfsRule::ALL {
            let (x, b) = initial_solution(&p, rule).unwrap();
            assert_eq!(x[(0, 0)], 5.0);
            assert_eq!(b.cells(), &[(0, 0)]);
        }
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        let p = Problem::linear(vec![2.0], vec![1.0], &[vec![1.0]]);
        assert!(matches!(
            initial_solution(&p, IbfsRule::Vogel),
            Err(Error::Unbalanced { .. })
        ));
    }

    // Classic 3x4 instance; expected allocations were traced by hand with
    // the tie rules above.
    fn classic() -> Problem {
        Problem::linear(
            vec![7.0, 9.0, 18.0],
            vec![5.0, 8.0, 7.0, 14.0],
            &[
                vec![19.0, 30.0, 50.0, 10.0],
                vec![70.0, 30.0, 40.0, 60.0],
                vec![40.0, 8.0, 70.0, 20.0],
            ],
        )
    }

    #[test]
    fn classic_least_cost() {
        let p = classic();
        let (x, b) = initial_solution(&p, IbfsRule::LeastCost).unwrap();
        assert_valid(&p, &x, &b);
        assert_eq!(
            x,
            Allocation::from_rows(&[
                vec![0.0, 0.0, 0.0, 7.0],
                vec![2.0, 0.0, 7.0, 0.0],
                vec![3.0, 8.0, 0.0, 7.0],
            ])
        );
        assert_eq!(p.total_cost(&x).unwrap(), 814.0);
    }

    #[test]
    fn classic_row_minima() {
        let p = classic();
        let (x, b) = initial_solution(&p, IbfsRule::RowMinima).unwrap();
        assert_valid(&p, &x, &b);
        assert_eq!(
            x,
            Allocation::from_rows(&[
                vec![0.0, 0.0, 0.0, 7.0],
                vec![0.0, 8.0, 1.0, 0.0],
                vec![5.0, 0.0, 6.0, 7.0],
            ])
        );
        assert_eq!(p.total_cost(&x).unwrap(), 1110.0);
    }

    #[test]
    fn classic_vogel() {
        let p = classic();
        let (x, b) = initial_solution(&p, IbfsRule::Vogel).unwrap();
        assert_valid(&p, &x, &b);
        assert_eq!(
            x,
            Allocation::from_rows(&[
                vec![5.0, 0.0, 0.0, 2.0],
                vec![0.0, 0.0, 7.0, 2.0],
                vec![0.0, 8.0, 0.0, 10.0],
            ])
        );
        assert_eq!(p.total_cost(&x).unwrap(), 779.0);
    }

    #[test]
    fn classic_northwest() {
        let p = classic();
        let (x, b) = initial_solution(&p, IbfsRule::NorthwestCorner).unwrap();
        assert_valid(&p, &x, &b);
        assert_eq!(p.total_cost(&x).unwrap(), 1015.0);
    }
}
