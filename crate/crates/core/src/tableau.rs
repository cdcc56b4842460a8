//! The transportation tableau: allocations, spanning-tree bases, dual
//! potentials and theta-loops.
//!
//! Rows and columns of the tableau are the two sides of a bipartite graph.
//! Row `i` is node `i` and column `j` is node `m + j`; a basic cell `(i, j)`
//! is the edge between them. A valid basis is a spanning tree of that graph.

use std::collections::VecDeque;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::problem::{Problem, DEFAULT_DERIVATIVE_CAP};

/// A tableau cell as `(row, column)`.
pub type Cell = (usize, usize);

/// Dense row-major matrix of quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Flow shipped through every cell.
pub type Allocation = Matrix;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if `rows` is ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == cols),
            "ragged matrix rows"
        );
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        let cols = self.cols;
        (0..self.rows).flat_map(move |i| (0..cols).map(move |j| (i, j)))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self[(i, j)]).sum()
    }

    /// `self * a + other * (1 - a)`
    pub fn blend(&self, other: &Matrix, a: f64) -> Matrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + (1.0 - a) * y)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<Cell> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): Cell) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<Cell> for Matrix {
    fn index_mut(&mut self, (i, j): Cell) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(Matrix::from_rows(&rows))
    }
}

/// The basic cells, kept sorted by `(row, column)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Basis(Vec<Cell>);

impl Basis {
    pub fn new(mut cells: Vec<Cell>) -> Self {
        cells.sort_unstable();
        Self(cells)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.0.binary_search(&cell).is_ok()
    }

    /// Swaps `leaving` out and `entering` in.
    pub fn exchange(&mut self, leaving: Cell, entering: Cell) {
        if let Ok(pos) = self.0.binary_search(&leaving) {
            self.0.remove(pos);
        }
        let pos = self.0.binary_search(&entering).unwrap_or_else(|p| p);
        self.0.insert(pos, entering);
    }
}

/// Row potentials `u` and column potentials `v`, anchored at `u[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

fn check_range(m: usize, n: usize, basis: &Basis) -> Result<()> {
    match basis.cells().iter().find(|&&(i, j)| i >= m || j >= n) {
        Some(&cell) => Err(Error::OutOfRangeCell {
            cell,
            rows: m,
            cols: n,
        }),
        None => Ok(()),
    }
}

/// Adjacency lists of the basis graph; each entry is `(neighbour, cell)`.
fn adjacency(m: usize, n: usize, basis: &Basis) -> Vec<Vec<(usize, Cell)>> {
    let mut adj = vec![Vec::new(); m + n];
    for &(i, j) in basis.cells() {
        adj[i].push((m + j, (i, j)));
        adj[m + j].push((i, (i, j)));
    }
    adj
}

/// Breadth-first traversal from `root`; returns the parent edge of every
/// reached node (the root maps to itself with no cell).
fn bfs_tree(adj: &[Vec<(usize, Cell)>], root: usize) -> Vec<Option<(usize, Option<Cell>)>> {
    let mut parent = vec![None; adj.len()];
    parent[root] = Some((root, None));
    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        for &(next, cell) in &adj[node] {
            if parent[next].is_none() {
                parent[next] = Some((node, Some(cell)));
                queue.push_back(next);
            }
        }
    }
    parent
}

pub fn is_spanning_tree(m: usize, n: usize, basis: &Basis) -> Result<bool> {
    check_range(m, n, basis)?;
    if basis.len() + 1 != m + n {
        return Ok(false);
    }
    // With exactly nodes - 1 edges, connected is equivalent to acyclic.
    let parent = bfs_tree(&adjacency(m, n, basis), 0);
    Ok(parent.iter().all(Option::is_some))
}

fn require_tree(m: usize, n: usize, basis: &Basis) -> Result<()> {
    if is_spanning_tree(m, n, basis)? {
        Ok(())
    } else {
        Err(Error::NotATree)
    }
}

pub fn check_feasible(problem: &Problem, x: &Allocation) -> Result<()> {
    let (m, n) = (problem.rows(), problem.cols());
    if x.rows() != m || x.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "allocation is {}x{}, problem is {m}x{n}",
            x.rows(),
            x.cols()
        )));
    }
    let tol = problem.feasibility_tol();
    if let Some((row, col)) = x.cells().find(|&c| x[c] < -tol || x[c].is_nan()) {
        return Err(Error::NegativeCell { row, col });
    }
    for (row, &s) in problem.supply.iter().enumerate() {
        let gap = x.row_sum(row) - s;
        if gap.abs() > tol {
            return Err(Error::RowSumViolation { row, gap });
        }
    }
    for (col, &d) in problem.demand.iter().enumerate() {
        let gap = x.col_sum(col) - d;
        if gap.abs() > tol {
            return Err(Error::ColSumViolation { col, gap });
        }
    }
    Ok(())
}

/// Solves `f'_ij(x_ij) - u_i - v_j = 0` on every basic cell by walking the
/// tree outward from row 0.
pub fn compute_duals(problem: &Problem, x: &Allocation, basis: &Basis) -> Result<Duals> {
    compute_duals_with_cap(problem, x, basis, DEFAULT_DERIVATIVE_CAP)
}

pub fn compute_duals_with_cap(
    problem: &Problem,
    x: &Allocation,
    basis: &Basis,
    cap: f64,
) -> Result<Duals> {
    let (m, n) = (problem.rows(), problem.cols());
    require_tree(m, n, basis)?;
    let adj = adjacency(m, n, basis);
    let mut pot: Vec<Option<f64>> = vec![None; m + n];
    pot[0] = Some(0.0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        let known = pot[node].expect("queued nodes carry a potential");
        for &(next, (i, j)) in &adj[node] {
            if pot[next].is_some() {
                continue;
            }
            let slope = problem.costs[i][j].derivative_unchecked(x[(i, j)].max(0.0), cap);
            pot[next] = Some(slope - known);
            queue.push_back(next);
        }
    }
    let pot: Vec<f64> = pot.into_iter().map(|p| p.unwrap_or(0.0)).collect();
    Ok(Duals {
        u: pot[..m].to_vec(),
        v: pot[m..].to_vec(),
    })
}

/// The cycle closed by adding `entering` to the basis tree.
///
/// Position 0 is the entering cell; the walk leaves it along its column, so
/// even positions gain theta and odd positions lose it.
pub fn find_loop(m: usize, n: usize, basis: &Basis, entering: Cell) -> Result<Vec<Cell>> {
    if entering.0 >= m || entering.1 >= n {
        return Err(Error::OutOfRangeCell {
            cell: entering,
            rows: m,
            cols: n,
        });
    }
    if basis.contains(entering) {
        return Err(Error::EnteringIsBasic(entering));
    }
    require_tree(m, n, basis)?;
    let (row, col) = entering;
    let parent = bfs_tree(&adjacency(m, n, basis), m + col);
    let mut cycle = vec![entering];
    let mut node = row;
    // walking parents from the row back to the column gives the path in
    // reverse; collect and flip it
    let mut path = Vec::new();
    while let Some((prev, Some(cell))) = parent[node] {
        path.push(cell);
        node = prev;
    }
    path.reverse();
    cycle.extend(path);
    Ok(cycle)
}

/// Largest step around `cycle` that keeps every decreasing cell nonnegative,
/// and the first decreasing cell that reaches zero.
pub fn max_theta(x: &Allocation, cycle: &[Cell]) -> Result<(f64, Cell)> {
    let mut best: Option<(f64, Cell)> = None;
    for &cell in cycle.iter().skip(1).step_by(2) {
        let value = x[cell].max(0.0);
        if best.map_or(true, |(b, _)| value < b) {
            best = Some((value, cell));
        }
    }
    best.ok_or(Error::EmptyLoop)
}

/// Moves `theta` units around the cycle: even positions gain, odd lose.
pub fn apply_theta(x: &Allocation, cycle: &[Cell], theta: f64) -> Result<Allocation> {
    let (limit, _) = max_theta(x, cycle)?;
    if theta < 0.0 {
        return Err(Error::NegativeArgument(theta));
    }
    if theta > limit {
        return Err(Error::ThetaTooLarge { theta, max: limit });
    }
    let mut y = x.clone();
    for (k, &cell) in cycle.iter().enumerate() {
        if k % 2 == 0 {
            y[cell] += theta;
        } else {
            y[cell] = (y[cell] - theta).max(0.0);
        }
    }
    Ok(y)
}
