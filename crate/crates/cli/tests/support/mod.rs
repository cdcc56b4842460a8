//! Instance generators and independent checks for the acceptance suite.

#![allow(dead_code)]

use nltrans::{Allocation, Basis, CostModel, Problem};
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::Rng;

/// Integer supplies and demands, each in `1..=max`, with equal totals.
///
/// Draws every margin uniformly, then walks the larger side down and the
/// smaller side up one unit at a time until the totals meet.
pub fn margins(rng: &mut StdRng, m: usize, n: usize, max: u32) -> (Vec<f64>, Vec<f64>) {
    let mut s: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=max)).collect();
    let mut d: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=max)).collect();
    loop {
        let (ts, td): (u32, u32) = (s.iter().sum(), d.iter().sum());
        if ts == td {
            break;
        }
        let (big, small) = if ts > td { (&mut s, &mut d) } else { (&mut d, &mut s) };
        if rng.gen_bool(0.5) {
            let k = rng.gen_range(0..big.len());
            if big[k] > 1 {
                big[k] -= 1;
            }
        } else {
            let k = rng.gen_range(0..small.len());
            if small[k] < max {
                small[k] += 1;
            }
        }
    }
    let f = |v: Vec<u32>| v.into_iter().map(f64::from).collect();
    (f(s), f(d))
}

fn grid(m: usize, n: usize, mut cell: impl FnMut() -> CostModel) -> Vec<Vec<CostModel>> {
    (0..m).map(|_| (0..n).map(|_| cell()).collect()).collect()
}

/// Integer rates in `0..=9`.
pub fn linear(rng: &mut StdRng, m: usize, n: usize) -> Problem {
    let (s, d) = margins(rng, m, n, 20);
    let costs = grid(m, n, || CostModel::linear(f64::from(rng.gen_range(0..=9u32))));
    Problem::new(s, d, costs)
}

/// `c x + q x^2` with integer `c` in `0..=9` and `q` in `(0, 2]`.
pub fn quadratic(rng: &mut StdRng, m: usize, n: usize) -> Problem {
    let (s, d) = margins(rng, m, n, 20);
    let costs = grid(m, n, || {
        let c = f64::from(rng.gen_range(0..=9u32));
        CostModel::quadratic(c, 2.0 * (1.0 - rng.gen::<f64>()))
    });
    Problem::new(s, d, costs)
}

pub fn power_cell(rng: &mut StdRng) -> CostModel {
    CostModel::power(rng.gen_range(1.0..9.0), rng.gen_range(0.2..0.95))
}

/// Three segments with breakpoints inside the range of typical flows and
/// each rate 30-90% of the one before.
pub fn discount_cell(rng: &mut StdRng) -> CostModel {
    let b1 = rng.gen_range(1.0..8.0);
    let b2 = b1 + rng.gen_range(1.0..8.0);
    let r0 = rng.gen_range(4.0..9.0);
    let r1 = r0 * rng.gen_range(0.3..0.9);
    let r2 = r1 * rng.gen_range(0.3..0.9);
    CostModel::discount(vec![0.0, b1, b2], vec![r0, r1, r2])
}

/// Every cell independently a power law or a discount schedule.
pub fn concave(rng: &mut StdRng, m: usize, n: usize) -> Problem {
    let (s, d) = margins(rng, m, n, 20);
    let costs = grid(m, n, || {
        if rng.gen_bool(0.5) {
            power_cell(rng)
        } else {
            discount_cell(rng)
        }
    });
    Problem::new(s, d, costs)
}

/// Any of the four cost families, one family per cell.
pub fn mixed(rng: &mut StdRng, m: usize, n: usize) -> Problem {
    let (s, d) = margins(rng, m, n, 20);
    let costs = grid(m, n, || match rng.gen_range(0..4) {
        0 => CostModel::linear(f64::from(rng.gen_range(0..=9u32))),
        1 => CostModel::quadratic(rng.gen_range(0.0..9.0), rng.gen_range(0.01..2.0)),
        2 => power_cell(rng),
        _ => discount_cell(rng),
    });
    Problem::new(s, d, costs)
}

pub fn scale(v: f64) -> f64 {
    v.abs().max(1.0)
}

/// Reduced derivatives `d_ij - u_i - v_j` where `u_i + v_j = d_ij` on the
/// basic cells and `u_0 = 0`, by Gaussian elimination over exact rationals.
/// Only the final `w` is rounded to `f64`.
pub fn reduced_by_elimination(m: usize, n: usize, basis: &Basis, d: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let q = |v: f64| BigRational::from_float(v).expect("finite slope");
    let k = m + n;
    let mut a = vec![vec![BigRational::zero(); k + 1]; k];
    a[0][0] = BigRational::one();
    for (row, &(i, j)) in basis.cells().iter().enumerate() {
        a[row + 1][i] = BigRational::one();
        a[row + 1][m + j] = BigRational::one();
        a[row + 1][k] = q(d(i, j));
    }
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero()).expect("basis is not a spanning tree");
        a.swap(col, pivot);
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..=k {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    let sol: Vec<BigRational> = (0..k).map(|r| &a[r][k] / &a[r][r]).collect();
    (0..m)
        .map(|i| {
            (0..n)
                .map(|j| (q(d(i, j)) - &sol[i] - &sol[m + j]).to_f64().unwrap())
                .collect()
        })
        .collect()
}

pub struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn find(&mut self, a: usize) -> usize {
        if self.0[a] != a {
            let r = self.find(self.0[a]);
            self.0[a] = r;
        }
        self.0[a]
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

/// `m + n - 1` distinct cells with no cycle.
pub fn is_tree(m: usize, n: usize, basis: &Basis) -> bool {
    let mut uf = UnionFind::new(m + n);
    basis.len() == m + n - 1 && basis.cells().iter().all(|&(i, j)| i < m && j < n && uf.union(i, m + j))
}

/// Nonnegative with margins matching to `1e-9 * max(1, total supply)`.
pub fn is_feasible(p: &Problem, x: &Allocation) -> bool {
    let tol = 1e-9 * p.supply.iter().sum::<f64>().max(1.0);
    let rows_ok = (0..p.rows()).all(|i| (x.row(i).iter().sum::<f64>() - p.supply[i]).abs() <= tol);
    let cols_ok = (0..p.cols()).all(|j| ((0..p.rows()).map(|i| x[(i, j)]).sum::<f64>() - p.demand[j]).abs() <= tol);
    rows_ok && cols_ok && x.as_slice().iter().all(|&v| v >= 0.0)
}
