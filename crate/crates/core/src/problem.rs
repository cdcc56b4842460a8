//! Problem definition and separable per-cell cost functions.
//!
//! A [`Problem`] ships goods from `m` sources to `n` destinations. Every cell
//! `(i, j)` of the tableau carries its own [`CostModel`], so the objective is
//! the sum of independent one-dimensional functions of the cell flows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tableau::Allocation;

/// Derivative value used where a cost function is infinitely steep (the
/// power model at zero flow).
pub const DEFAULT_DERIVATIVE_CAP: f64 = 1e12;

/// Absolute feasibility tolerance before scaling by total supply.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CostModel {
    /// `f(x) = c x`
    Linear { c: f64 },
    /// `f(x) = c x + q x^2`
    Quadratic { c: f64, q: f64 },
    /// `f(x) = c x^p` with `c >= 0` and `0 < p <= 1`.
    #[serde(rename = "power")]
    PowerConcave { c: f64, p: f64 },
    /// Incremental volume discount: flow in `[breaks[k], breaks[k+1])` is
    /// charged `rates[k]` per unit, the last segment extends to infinity.
    #[serde(rename = "discount")]
    PiecewiseLinearDiscount { breaks: Vec<f64>, rates: Vec<f64> },
}

/// Curvature of a single cell or of a whole problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostClass {
    Linear,
    Convex,
    Concave,
    Mixed,
}

impl CostModel {
    pub fn linear(c: f64) -> Self {
        CostModel::Linear { c }
    }

    pub fn quadratic(c: f64, q: f64) -> Self {
        CostModel::Quadratic { c, q }
    }

    pub fn power(c: f64, p: f64) -> Self {
        CostModel::PowerConcave { c, p }
    }

    pub fn discount(breaks: Vec<f64>, rates: Vec<f64>) -> Self {
        CostModel::PiecewiseLinearDiscount { breaks, rates }
    }

    /// Checks the variant's parameter rules, returning a description of the
    /// first one that fails.
    pub fn check(&self) -> std::result::Result<(), String> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be finite, got {v}"))
            }
        };
        match self {
            CostModel::Linear { c } => finite("c", *c),
            CostModel::Quadratic { c, q } => {
                finite("c", *c)?;
                finite("q", *q)
            }
            CostModel::PowerConcave { c, p } => {
                finite("c", *c)?;
                finite("p", *p)?;
                if *c < 0.0 {
                    return Err(format!("power coefficient must be >= 0, got {c}"));
                }
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(format!("power exponent must lie in (0, 1], got {p}"));
                }
                Ok(())
            }
            CostModel::PiecewiseLinearDiscount { breaks, rates } => {
                if breaks.is_empty() {
                    return Err("discount schedule needs at least one segment".into());
                }
                if breaks.len() != rates.len() {
                    return Err(format!(
                        "discount schedule has {} breakpoints but {} rates",
                        breaks.len(),
                        rates.len()
                    ));
                }
                if breaks[0] != 0.0 {
                    return Err(format!("first breakpoint must be 0, got {}", breaks[0]));
                }
                for (k, (&b, &r)) in breaks.iter().zip(rates).enumerate() {
                    finite("breakpoint", b)?;
                    finite("rate", r)?;
                    if r <= 0.0 {
                        return Err(format!("rate {k} must be positive, got {r}"));
                    }
                }
                if breaks.windows(2).any(|w| w[1] <= w[0]) {
                    return Err("breakpoints must be strictly increasing".into());
                }
                if rates.windows(2).any(|w| w[1] >= w[0]) {
                    return Err("rates must be strictly decreasing".into());
                }
                Ok(())
            }
        }
    }

    pub fn class(&self) -> CostClass {
        match self {
            CostModel::Linear { .. } => CostClass::Linear,
            CostModel::Quadratic { q, .. } => {
                if *q == 0.0 {
                    CostClass::Linear
                } else if *q > 0.0 {
                    CostClass::Convex
                } else {
                    CostClass::Concave
                }
            }
            CostModel::PowerConcave { c, p } => {
                if *p == 1.0 || *c == 0.0 {
                    CostClass::Linear
                } else {
                    CostClass::Concave
                }
            }
            CostModel::PiecewiseLinearDiscount { rates, .. } => {
                if rates.len() == 1 {
                    CostClass::Linear
                } else {
                    CostClass::Concave
                }
            }
        }
    }

    /// Cost of shipping `x` units through this cell.
    pub fn cost(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::NegativeArgument(x));
        }
        Ok(self.cost_unchecked(x))
    }

    /// Marginal cost at `x`, with infinite slopes capped at
    /// [`DEFAULT_DERIVATIVE_CAP`].
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.derivative_with_cap(x, DEFAULT_DERIVATIVE_CAP)
    }

    /// Marginal cost at `x`. Breakpoints of a discount schedule report the
    /// right-hand slope.
    pub fn derivative_with_cap(&self, x: f64, cap: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::NegativeArgument(x));
        }
        Ok(self.derivative_unchecked(x, cap))
    }

    /// Left-hand slope minus right-hand slope at `x`; nonzero only at the
    /// interior breakpoints of a discount schedule.
    pub fn kink_jump(&self, x: f64) -> f64 {
        match self {
            CostModel::PiecewiseLinearDiscount { breaks, rates } => {
                match breaks.iter().position(|&b| b == x) {
                    Some(k) if k > 0 => rates[k - 1] - rates[k],
                    _ => 0.0,
                }
            }
            _ => 0.0,
        }
    }

    /// `cost(x + delta) - cost(x)`, computed without subtracting two large
    /// totals so that small moves keep full relative precision.
    pub fn cost_change(&self, x: f64, delta: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::NegativeArgument(x));
        }
        if x + delta < 0.0 {
            return Err(Error::NegativeArgument(x + delta));
        }
        Ok(self.cost_change_unchecked(x, delta))
    }

    pub(crate) fn cost_change_unchecked(&self, x: f64, delta: f64) -> f64 {
        match self {
            CostModel::Linear { c } => c * delta,
            CostModel::Quadratic { c, q } => delta * (c + q * (2.0 * x + delta)),
            CostModel::PowerConcave { c, p } => {
                if x == 0.0 {
                    self.cost_unchecked(delta.max(0.0))
                } else {
                    c * x.powf(*p) * (p * (delta / x).ln_1p()).exp_m1()
                }
            }
            CostModel::PiecewiseLinearDiscount { breaks, rates } => {
                let (lo, hi) = if delta >= 0.0 { (x, x + delta) } else { (x + delta, x) };
                let mut total = 0.0;
                for (k, &rate) in rates.iter().enumerate() {
                    let seg_lo = breaks[k];
                    let seg_hi = breaks.get(k + 1).copied().unwrap_or(f64::INFINITY);
                    let overlap = hi.min(seg_hi) - lo.max(seg_lo);
                    if overlap > 0.0 {
                        total += rate * overlap;
                    }
                }
                total.copysign(delta)
            }
        }
    }

    pub(crate) fn cost_unchecked(&self, x: f64) -> f64 {
        match self {
            CostModel::Linear { c } => c * x,
            CostModel::Quadratic { c, q } => c * x + q * x * x,
            CostModel::PowerConcave { c, p } => {
                if x == 0.0 {
                    0.0
                } else {
                    c * x.powf(*p)
                }
            }
            CostModel::PiecewiseLinearDiscount { breaks, rates } => {
                let mut total = 0.0;
                for (k, &rate) in rates.iter().enumerate() {
                    let lo = breaks[k];
                    if x <= lo {
                        break;
                    }
                    let hi = breaks.get(k + 1).copied().unwrap_or(f64::INFINITY);
                    total += rate * (x.min(hi) - lo);
                }
                total
            }
        }
    }

    pub(crate) fn derivative_unchecked(&self, x: f64, cap: f64) -> f64 {
        match self {
            CostModel::Linear { c } => *c,
            CostModel::Quadratic { c, q } => c + 2.0 * q * x,
            CostModel::PowerConcave { c, p } => {
                if *c == 0.0 {
                    0.0
                } else if *p == 1.0 {
                    *c
                } else if x == 0.0 {
                    cap
                } else {
                    (c * p * x.powf(p - 1.0)).min(cap)
                }
            }
            CostModel::PiecewiseLinearDiscount { breaks, rates } => {
                // partition_point gives the number of breakpoints <= x
                let seg = breaks.partition_point(|&b| b <= x);
                rates[seg.saturating_sub(1)]
            }
        }
    }
}

/// Convenience wrapper over [`CostModel::cost`].
pub fn cell_cost(model: &CostModel, x: f64) -> Result<f64> {
    model.cost(x)
}

/// Convenience wrapper over [`CostModel::derivative`].
pub fn cell_derivative(model: &CostModel, x: f64) -> Result<f64> {
    model.derivative(x)
}

/// Supplies, demands and the `m x n` grid of cell cost models.
///
/// The JSON form is `{"supply": [...], "demand": [...], "costs": [[...], ...]}`
/// with one cost object per cell in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub supply: Vec<f64>,
    pub demand: Vec<f64>,
    pub costs: Vec<Vec<CostModel>>,
}

impl Problem {
    pub fn new(supply: Vec<f64>, demand: Vec<f64>, costs: Vec<Vec<CostModel>>) -> Self {
        Self {
            supply,
            demand,
            costs,
        }
    }

    /// Builds a problem whose every cell is `Linear` with the given rates.
    pub fn linear(supply: Vec<f64>, demand: Vec<f64>, rates: &[Vec<f64>]) -> Self {
        let costs = rates
            .iter()
            .map(|row| row.iter().map(|&c| CostModel::linear(c)).collect())
            .collect();
        Self::new(supply, demand, costs)
    }

    pub fn rows(&self) -> usize {
        self.supply.len()
    }

    pub fn cols(&self) -> usize {
        self.demand.len()
    }

    pub fn cost_model(&self, row: usize, col: usize) -> &CostModel {
        &self.costs[row][col]
    }

    pub fn total_supply(&self) -> f64 {
        self.supply.iter().sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }

    /// Absolute tolerance for feasibility comparisons.
    pub fn feasibility_tol(&self) -> f64 {
        FEASIBILITY_TOL * self.total_supply().max(1.0)
    }

    /// Everything `validate` checks except the balance condition.
    pub fn validate_structure(&self) -> Result<()> {
        let m = self.rows();
        let n = self.cols();
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "need at least one source and one destination, got {m}x{n}"
            )));
        }
        if self.costs.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} cost rows for {m} sources",
                self.costs.len()
            )));
        }
        if let Some((i, row)) = self.costs.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "cost row {i} has {} cells for {n} destinations",
                row.len()
            )));
        }
        for (what, values) in [("supply", &self.supply), ("demand", &self.demand)] {
            for (index, &value) in values.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::NegativeQuantity { what, index, value });
                }
            }
        }
        for (row, cells) in self.costs.iter().enumerate() {
            for (col, model) in cells.iter().enumerate() {
                model
                    .check()
                    .map_err(|reason| Error::InvalidCostModel { row, col, reason })?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        let gap = self.total_supply() - self.total_demand();
        if gap.abs() > self.feasibility_tol() {
            return Err(Error::Unbalanced { gap });
        }
        Ok(())
    }

    /// Adds a zero-cost dummy destination (or source) absorbing any excess
    /// supply (or demand). Balanced problems are returned unchanged.
    pub fn balance(&self) -> Result<Problem> {
        self.validate_structure()?;
        let gap = self.total_supply() - self.total_demand();
        let mut out = self.clone();
        if gap.abs() <= self.feasibility_tol() {
            return Ok(out);
        }
        if gap > 0.0 {
            out.demand.push(gap);
            for row in &mut out.costs {
                row.push(CostModel::linear(0.0));
            }
        } else {
            out.supply.push(-gap);
            out.costs.push(vec![CostModel::linear(0.0); self.cols()]);
        }
        Ok(out)
    }

    pub fn total_cost(&self, x: &Allocation) -> Result<f64> {
        if x.rows() != self.rows() || x.cols() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "allocation is {}x{}, problem is {}x{}",
                x.rows(),
                x.cols(),
                self.rows(),
                self.cols()
            )));
        }
        let mut total = 0.0;
        for (i, row) in self.costs.iter().enumerate() {
            for (j, model) in row.iter().enumerate() {
                total += model.cost(x[(i, j)])?;
            }
        }
        Ok(total)
    }

    /// Marginal cost of every cell at `x`.
    pub fn gradient(&self, x: &Allocation) -> Allocation {
        Allocation::from_fn(self.rows(), self.cols(), |i, j| {
            self.costs[i][j].derivative_unchecked(x[(i, j)].max(0.0), DEFAULT_DERIVATIVE_CAP)
        })
    }

    pub fn classify(&self) -> CostClass {
        let mut convex = true;
        let mut concave = true;
        let mut linear = true;
        for model in self.costs.iter().flatten() {
            match model.class() {
                CostClass::Linear => {}
                CostClass::Convex => {
                    linear = false;
                    concave = false;
                }
                CostClass::Concave => {
                    linear = false;
                    convex = false;
                }
                CostClass::Mixed => unreachable!("a single cell is never mixed"),
            }
        }
        match (linear, convex, concave) {
            (true, _, _) => CostClass::Linear,
            (_, true, _) => CostClass::Convex,
            (_, _, true) => CostClass::Concave,
            _ => CostClass::Mixed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_change_matches_difference() {
        let models = [
            CostModel::linear(3.0),
            CostModel::quadratic(1.0, 0.5),
            CostModel::power(2.0, 0.5),
            CostModel::discount(vec![0.0, 2.0, 5.0], vec![4.0, 2.0, 1.0]),
        ];
        for m in &models {
            for (x, d) in [(0.0, 3.0), (1.0, 3.0), (4.0, -3.0), (6.0, -6.0), (2.0, 0.0)] {
                let direct = m.cost(x + d).unwrap() - m.cost(x).unwrap();
                let change = m.cost_change(x, d).unwrap();
                assert!((direct - change).abs() < 1e-12, "{m:?} {x} {d}: {direct} vs {change}");
            }
        }
        assert!(CostModel::linear(1.0).cost_change(1.0, -2.0).is_err());
    }

    #[test]
    fn cost_change_keeps_precision_for_tiny_moves() {
        let m = CostModel::quadratic(5.0, 1.0);
        assert_eq!(m.cost_change(1e6, 1e-9).unwrap(), 1e-9 * (5.0 + 2e6 + 1e-9));
    }

    fn two_by_two_linear() -> Problem {
        Problem::linear(
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            &[vec![1.0, 2.0], vec![2.0, 1.0]],
        )
    }

    #[test]
    fn validate_accepts_balanced_identity() {
        two_by_two_linear().validate().unwrap();
    }

    #[test]
    fn validate_reports_gap() {
        let p = Problem::linear(vec![2.0], vec![1.0, 2.0], &[vec![1.0, 1.0]]);
        assert_eq!(p.validate(), Err(Error::Unbalanced { gap: -1.0 }));
    }

    #[test]
    fn validate_rejects_increasing_rates() {
        let mut p = two_by_two_linear();
        p.costs[1][0] = CostModel::discount(vec![0.0, 2.0], vec![1.0, 1.5]);
        match p.validate() {
            Err(Error::InvalidCostModel { row: 1, col: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_bad_shapes_and_quantities() {
        let mut p = two_by_two_linear();
        p.costs[0].pop();
        assert!(matches!(p.validate(), Err(Error::DimensionMismatch(_))));

        let mut p = two_by_two_linear();
        p.supply[1] = -1.0;
        assert!(matches!(
            p.validate(),
            Err(Error::NegativeQuantity {
                what: "supply",
                index: 1,
                ..
            })
        ));

        let mut p = two_by_two_linear();
        p.costs[0][0] = CostModel::power(1.0, 1.5);
        assert!(matches!(p.validate(), Err(Error::InvalidCostModel { .. })));
    }

    #[test]
    fn balance_adds_dummy_column() {
        let p = Problem::linear(vec![3.0], vec![1.0, 1.0], &[vec![4.0, 5.0]]);
        let b = p.balance().unwrap();
        assert_eq!(b.demand, vec![1.0, 1.0, 1.0]);
        assert_eq!(b.costs[0][2], CostModel::linear(0.0));
        b.validate().unwrap();
    }

    #[test]
    fn balance_adds_dummy_row() {
        let p = Problem::linear(vec![1.0, 1.0], vec![3.0], &[vec![4.0], vec![5.0]]);
        let b = p.balance().unwrap();
        assert_eq!(b.supply, vec![1.0, 1.0, 1.0]);
        assert_eq!(b.costs[2], vec![CostModel::linear(0.0)]);
        assert_eq!(b.balance().unwrap(), b);
    }

    #[test]
    fn balance_leaves_balanced_problem_alone() {
        let p = two_by_two_linear();
        assert_eq!(p.balance().unwrap(), p);
    }

    #[test]
    fn cell_costs() {
        assert_eq!(cell_cost(&CostModel::linear(2.0), 3.0).unwrap(), 6.0);
        assert_eq!(cell_cost(&CostModel::quadratic(0.0, 1.0), 2.0).unwrap(), 4.0);
        let d = CostModel::discount(vec![0.0, 2.0], vec![3.0, 1.0]);
        assert_eq!(cell_cost(&d, 3.0).unwrap(), 7.0);
        assert_eq!(cell_cost(&d, 1.0).unwrap(), 3.0);
        assert_eq!(
            cell_cost(&d, -1.0),
            Err(Error::NegativeArgument(-1.0))
        );
        for m in [
            CostModel::linear(2.0),
            CostModel::quadratic(1.0, -0.5),
            CostModel::power(3.0, 0.4),
            d,
        ] {
            assert_eq!(m.cost(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn cell_derivatives() {
        assert_eq!(cell_derivative(&CostModel::linear(2.0), 7.5).unwrap(), 2.0);
        assert_eq!(cell_derivative(&CostModel::quadratic(1.0, 1.0), 2.0).unwrap(), 5.0);
        let p = CostModel::power(1.0, 0.5);
        assert!((cell_derivative(&p, 4.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(cell_derivative(&p, 0.0).unwrap(), DEFAULT_DERIVATIVE_CAP);
        assert_eq!(p.derivative_with_cap(0.0, 50.0).unwrap(), 50.0);
        let d = CostModel::discount(vec![0.0, 2.0], vec![3.0, 1.0]);
        assert_eq!(cell_derivative(&d, 0.0).unwrap(), 3.0);
        assert_eq!(cell_derivative(&d, 1.999).unwrap(), 3.0);
        assert_eq!(cell_derivative(&d, 2.0).unwrap(), 1.0);
        assert!(cell_derivative(&d, -0.5).is_err());
        assert_eq!(d.kink_jump(2.0), 2.0);
        assert_eq!(d.kink_jump(0.0), 0.0);
        assert_eq!(d.kink_jump(1.0), 0.0);
    }

    #[test]
    fn total_cost_of_small_allocations() {
        let p = two_by_two_linear();
        assert_eq!(p.total_cost(&Allocation::zeros(2, 2)).unwrap(), 0.0);
        let x = Allocation::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(p.total_cost(&x).unwrap(), 2.0);
        assert!(matches!(
            p.total_cost(&Allocation::zeros(1, 2)),
            Err(Error::DimensionMismatch(_))
        ));

        let sq = CostModel::quadratic(0.0, 1.0);
        let lin = CostModel::linear(1.0);
        let q = Problem::new(
            vec![2.0, 2.0],
            vec![2.0, 2.0],
            vec![vec![sq.clone(), lin.clone()], vec![lin, sq]],
        );
        let x = Allocation::from_rows(&[vec![0.5, 1.5], vec![1.5, 0.5]]);
        assert_eq!(q.total_cost(&x).unwrap(), 3.5);
    }

    #[test]
    fn classification() {
        assert_eq!(two_by_two_linear().classify(), CostClass::Linear);
        let grid = |a: CostModel, b: CostModel| {
            Problem::new(
                vec![1.0, 1.0],
                vec![1.0, 1.0],
                vec![vec![a.clone(), b.clone()], vec![b, a]],
            )
        };
        let pow = CostModel::power(1.0, 0.5);
        assert_eq!(grid(pow.clone(), pow.clone()).classify(), CostClass::Concave);
        let quad = CostModel::quadratic(1.0, 0.5);
        assert_eq!(grid(quad.clone(), pow).classify(), CostClass::Mixed);
        assert_eq!(
            grid(quad, CostModel::linear(1.0)).classify(),
            CostClass::Convex
        );
        assert_eq!(
            grid(CostModel::quadratic(2.0, 0.0), CostModel::linear(1.0)).classify(),
            CostClass::Linear
        );
    }

    #[test]
    fn json_schema_matches_documented_form() {
        let doc = r#"{"supply":[3,1],"demand":[2,2],"costs":[
            [{"kind":"linear","c":1.0},{"kind":"quadratic","c":0.0,"q":1.0}],
            [{"kind":"power","c":1.0,"p":0.5},{"kind":"discount","breaks":[0,2],"rates":[3,1]}]]}"#;
        let p: Problem = serde_json::from_str(doc).unwrap();
        assert_eq!(p.costs[1][0], CostModel::power(1.0, 0.5));
        assert_eq!(
            p.costs[1][1],
            CostModel::discount(vec![0.0, 2.0], vec![3.0, 1.0])
        );
        let back: Problem = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
