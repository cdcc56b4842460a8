//! Brute-force references for checking the solvers.
//!
//! [`enumerate_vertices`] lists every spanning tree of the complete bipartite
//! row/column graph and solves each one for its basic flows; the feasible
//! ones are exactly the vertices of the transportation polytope, where
//! linear and concave objectives attain their minimum.
//! [`convex_reference`] minimises convex objectives with pairwise
//! Frank-Wolfe steps, using the linear simplex only as its direction oracle.
//!
//! Neither reference uses the tableau's dual or loop machinery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ibfs::{initial_solution, IbfsRule};
use crate::problem::{CostClass, CostModel, Problem, DEFAULT_DERIVATIVE_CAP};
use crate::solvers::{solve_linear, SolverOptions};
use crate::tableau::{Allocation, Basis, Cell};

pub const DEFAULT_TREE_CAP: u128 = 100_000;

/// Values at or above this are clamped to zero instead of discarding the tree.
const CLAMP: f64 = -1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub basis: Basis,
    pub x: Allocation,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexCatalog {
    /// Spanning trees visited, feasible or not.
    pub trees: usize,
    pub vertices: Vec<Vertex>,
}

/// Number of spanning trees of `K_{m,n}`: `m^(n-1) * n^(m-1)`.
pub fn spanning_tree_count(m: usize, n: usize) -> u128 {
    (m as u128).pow(n as u32 - 1) * (n as u128).pow(m as u32 - 1)
}

#[derive(Clone)]
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

struct Enumerator<'a> {
    m: usize,
    n: usize,
    edges: Vec<Cell>,
    visit: &'a mut dyn FnMut(&[Cell]),
}

impl Enumerator<'_> {
    fn run(&mut self, k: usize, chosen: &mut Vec<Cell>, uf: &UnionFind) {
        let need = self.m + self.n - 1;
        if chosen.len() == need {
            (self.visit)(chosen);
            return;
        }
        if chosen.len() + (self.edges.len() - k) < need {
            return;
        }
        let (i, j) = self.edges[k];

        let mut with = uf.clone();
        if with.union(i, self.m + j) {
            chosen.push((i, j));
            self.run(k + 1, chosen, &with);
            chosen.pop();
        }

        // skipping edge k must still leave a connected graph
        let mut rest = uf.clone();
        for &(a, b) in &self.edges[k + 1..] {
            rest.union(a, self.m + b);
        }
        let root = rest.find(0);
        if (1..self.m + self.n).all(|v| rest.find(v) == root) {
            self.run(k + 1, chosen, uf);
        }
    }
}

/// Calls `visit` once per spanning tree, in lexicographic include-first
/// order over the cells taken row-major.
pub fn for_each_spanning_tree(m: usize, n: usize, mut visit: impl FnMut(&[Cell])) {
    let edges = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut e = Enumerator {
        m,
        n,
        edges,
        visit: &mut visit,
    };
    e.run(0, &mut Vec::new(), &UnionFind::new(m + n));
}

/// Basic flows of a tree by repeatedly peeling leaves: a leaf row (or
/// column) must send its whole remaining supply (or demand) through its only
/// edge.
fn tree_flows(problem: &Problem, tree: &[Cell]) -> Allocation {
    let (m, n) = (problem.rows(), problem.cols());
    let mut remaining: Vec<f64> = problem.supply.iter().chain(&problem.demand).copied().collect();
    let mut degree = vec![0usize; m + n];
    for &(i, j) in tree {
        degree[i] += 1;
        degree[m + j] += 1;
    }
    let mut done = vec![false; tree.len()];
    let mut x = Allocation::zeros(m, n);
    for _ in 0..tree.len() {
        let k = (0..tree.len())
            .find(|&k| {
                let (i, j) = tree[k];
                !done[k] && (degree[i] == 1 || degree[m + j] == 1)
            })
            .expect("a forest always has a leaf");
        let (i, j) = tree[k];
        let value = if degree[i] == 1 {
            remaining[i]
        } else {
            remaining[m + j]
        };
        x[(i, j)] = value;
        remaining[i] -= value;
        remaining[m + j] -= value;
        degree[i] -= 1;
        degree[m + j] -= 1;
        done[k] = true;
    }
    x
}

pub fn enumerate_vertices(problem: &Problem) -> Result<VertexCatalog> {
    enumerate_vertices_with_cap(problem, DEFAULT_TREE_CAP)
}

pub fn enumerate_vertices_with_cap(problem: &Problem, cap: u128) -> Result<VertexCatalog> {
    problem.validate()?;
    let (m, n) = (problem.rows(), problem.cols());
    let count = spanning_tree_count(m, n);
    if count > cap {
        return Err(Error::TooLarge { count, cap });
    }
    let mut trees = 0;
    let mut vertices = Vec::new();
    for_each_spanning_tree(m, n, |tree| {
        trees += 1;
        let mut x = tree_flows(problem, tree);
        if tree.iter().any(|&c| x[c] < CLAMP) {
            return;
        }
        for &c in tree {
            x[c] = x[c].max(0.0);
        }
        let objective = problem
            .total_cost(&x)
            .expect("clamped flows are nonnegative");
        vertices.push(Vertex {
            basis: Basis::new(tree.to_vec()),
            x,
            objective,
        });
    });
    Ok(VertexCatalog { trees, vertices })
}

/// Cheapest vertex, first in enumeration order on ties.
pub fn global_min_vertex(problem: &Problem) -> Result<(Allocation, f64)> {
    global_min_vertex_with_cap(problem, DEFAULT_TREE_CAP)
}

pub fn global_min_vertex_with_cap(problem: &Problem, cap: u128) -> Result<(Allocation, f64)> {
    let catalog = enumerate_vertices_with_cap(problem, cap)?;
    let mut best: Option<&Vertex> = None;
    for v in &catalog.vertices {
        if best.map_or(true, |b| v.objective < b.objective) {
            best = Some(v);
        }
    }
    // balanced problems always have at least one feasible tree
    let best = best.expect("a balanced problem has a vertex");
    Ok((best.x.clone(), best.objective))
}

fn cost(problem: &Problem, x: &Allocation) -> f64 {
    x.cells()
        .map(|(i, j)| problem.costs[i][j].cost(x[(i, j)].max(0.0)).unwrap_or(f64::NAN))
        .sum()
}

fn gradient(problem: &Problem, x: &Allocation) -> Vec<f64> {
    x.cells()
        .map(|(i, j)| {
            problem.costs[i][j]
                .derivative_with_cap(x[(i, j)].max(0.0), DEFAULT_DERIVATIVE_CAP)
                .unwrap_or(f64::NAN)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimises a convex `phi` on `[0, hi]` by bisection on the sign of its
/// derivative.
fn bisect_step(problem: &Problem, x: &Allocation, dir: &[f64], hi: f64) -> f64 {
    let slope = |t: f64| {
        let p = Allocation::from_fn(x.rows(), x.cols(), |i, j| {
            (x[(i, j)] + t * dir[i * x.cols() + j]).max(0.0)
        });
        dot(&gradient(problem, &p), dir)
    };
    if slope(hi) <= 0.0 {
        return hi;
    }
    let (mut lo, mut up) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if slope(mid) > 0.0 {
            up = mid;
        } else {
            lo = mid;
        }
        if up - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + up)
}

/// Optimal cost of a convex (or linear) problem.
///
/// Starts from `start`'s initial solution and runs pairwise Frank-Wolfe:
/// each step solves the linearised problem with the linear simplex, then
/// shifts weight from the worst active vertex to the new one with an exact
/// line search. Stops once the Frank-Wolfe gap is within
/// `tol * max(1, |f|)`.
pub fn convex_reference(problem: &Problem, tol: f64) -> Result<f64> {
    convex_reference_from(problem, tol, IbfsRule::NorthwestCorner)
}

pub fn convex_reference_from(problem: &Problem, tol: f64, start: IbfsRule) -> Result<f64> {
    problem.validate()?;
    if !matches!(problem.classify(), CostClass::Linear | CostClass::Convex) {
        return Err(Error::NotConvex);
    }
    let (m, n) = (problem.rows(), problem.cols());
    let (x0, _) = initial_solution(problem, start)?;
    // active vertices and their convex weights
    let mut active: Vec<(Vec<f64>, f64)> = vec![(x0.as_slice().to_vec(), 1.0)];
    let mut x = x0;
    let lp_options = SolverOptions::default();

    for _ in 0..100_000 {
        let g = gradient(problem, &x);
        let rates: Vec<Vec<f64>> = g.chunks(n).map(<[f64]>::to_vec).collect();
        let linearised = Problem {
            costs: rates
                .iter()
                .map(|row| row.iter().map(|&c| CostModel::linear(c)).collect())
                .collect(),
            ..problem.clone()
        };
        let (lp, _) = solve_linear(&linearised, &lp_options)?;
        let s = lp.x.as_slice().to_vec();
        let gap = dot(&g, x.as_slice()) - dot(&g, &s);
        if gap <= tol * cost(problem, &x).abs().max(1.0) {
            break;
        }

        // away vertex: the active one the gradient likes least
        let away = (0..active.len())
            .max_by(|&a, &b| dot(&g, &active[a].0).total_cmp(&dot(&g, &active[b].0)))
            .expect("active set is never empty");
        let dir: Vec<f64> = s.iter().zip(&active[away].0).map(|(a, b)| a - b).collect();
        let max_step = active[away].1;
        let step = bisect_step(problem, &x, &dir, max_step);

        x = Allocation::from_fn(m, n, |i, j| (x[(i, j)] + step * dir[i * n + j]).max(0.0));
        active[away].1 -= step;
        match active.iter_mut().find(|(v, _)| same_point(v, &s)) {
            Some(entry) => entry.1 += step,
            None => active.push((s, step)),
        }
        active.retain(|(_, w)| *w > 1e-15);
    }
    Ok(cost(problem, &x))
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0))
}
