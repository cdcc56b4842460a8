#![allow(dead_code)]

use nltrans::{Basis, CostModel, Problem};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

/// Integer supplies in `1..=max` and demands that split the same total,
/// zero demands included.
pub fn balanced(rng: &mut StdRng, m: usize, n: usize, max: u32) -> (Vec<f64>, Vec<f64>) {
    let supply: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=max)).collect();
    let total: u32 = supply.iter().sum();
    let mut cuts: Vec<u32> = (0..n - 1).map(|_| rng.gen_range(0..=total)).collect();
    cuts.sort_unstable();
    let mut demand = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts.into_iter().chain([total]) {
        demand.push(c - prev);
        prev = c;
    }
    (
        supply.into_iter().map(f64::from).collect(),
        demand.into_iter().map(f64::from).collect(),
    )
}

pub fn linear_problem(rng: &mut StdRng, m: usize, n: usize) -> Problem {
    let (s, d) = balanced(rng, m, n, 20);
    let rates: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| f64::from(rng.gen_range(0..=9u32))).collect())
        .collect();
    Problem::linear(s, d, &rates)
}

pub fn quadratic_problem(rng: &mut StdRng, m: usize, n: usize) -> Problem {
    let (s, d) = balanced(rng, m, n, 20);
    let costs = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let c = f64::from(rng.gen_range(0..=9u32));
                    let q = 2.0 * (1.0 - rng.gen::<f64>()); // (0, 2]
                    CostModel::quadratic(c, q)
                })
                .collect()
        })
        .collect();
    Problem::new(s, d, costs)
}

pub fn concave_cell(rng: &mut StdRng) -> CostModel {
    if rng.gen_bool(0.5) {
        CostModel::power(rng.gen_range(1.0..9.0), rng.gen_range(0.2..0.95))
    } else {
        let b1 = rng.gen_range(1.0..8.0);
        let b2 = b1 + rng.gen_range(1.0..8.0);
        let r0 = rng.gen_range(4.0..9.0);
        let r1 = r0 * rng.gen_range(0.3..0.9);
        let r2 = r1 * rng.gen_range(0.3..0.9);
        CostModel::discount(vec![0.0, b1, b2], vec![r0, r1, r2])
    }
}

pub fn concave_problem(rng: &mut StdRng, m: usize, n: usize) -> Problem {
    let (s, d) = balanced(rng, m, n, 20);
    let costs = (0..m)
        .map(|_| (0..n).map(|_| concave_cell(rng)).collect())
        .collect();
    Problem::new(s, d, costs)
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

    /// False when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

/// Random spanning tree of the row/column graph via Kruskal on shuffled cells.
pub fn random_tree(rng: &mut StdRng, m: usize, n: usize) -> Basis {
    let mut cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    cells.shuffle(rng);
    let mut uf = UnionFind::new(m + n);
    let tree = cells
        .into_iter()
        .filter(|&(i, j)| uf.union(i, m + j))
        .collect();
    Basis::new(tree)
}

pub fn scale(v: f64) -> f64 {
    v.abs().max(1.0)
}
