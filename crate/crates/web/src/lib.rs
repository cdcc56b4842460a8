//! Browser bindings for the solver demo in `www/index.html`.
//!
//! Each operation takes and returns JSON strings. The plain functions carry
//! the logic so they can be tested natively; the `wasm` module only wraps
//! them for JavaScript.

use nltrans::oracle::enumerate_vertices_with_cap;
use nltrans::{render_tableau, solve_with, Algorithm, CostModel, IbfsRule, Problem, SolverOptions};
use serde::Serialize;
use serde_json::Value;

/// Vertex enumeration is exhaustive, so keep the page responsive.
pub const LANDSCAPE_TREE_CAP: u128 = 200_000;

#[derive(Serialize)]
struct Curve {
    class: nltrans::CostClass,
    xs: Vec<f64>,
    cost: Vec<f64>,
    derivative: Vec<f64>,
}

/// Samples one cell's cost and slope on `[0, x_max]`.
pub fn cost_curve(model_json: &str, x_max: f64, samples: usize) -> Result<String, String> {
    let model: CostModel = serde_json::from_str(model_json).map_err(|e| e.to_string())?;
    model.check()?;
    if !(x_max > 0.0 && x_max.is_finite()) || samples < 2 {
        return Err("need x_max > 0 and at least 2 samples".into());
    }
    let xs: Vec<f64> = (0..samples).map(|k| x_max * k as f64 / (samples - 1) as f64).collect();
    let mut cost = Vec::with_capacity(samples);
    let mut derivative = Vec::with_capacity(samples);
    for &x in &xs {
        cost.push(model.cost(x).map_err(|e| e.to_string())?);
        // the power slope at zero is the huge cap; plotting it is useless
        let d = if x == 0.0 && matches!(model, CostModel::PowerConcave { .. }) {
            f64::NAN
        } else {
            model.derivative(x).map_err(|e| e.to_string())?
        };
        derivative.push(d);
    }
    let curve = Curve {
        class: model.class(),
        xs,
        cost,
        derivative,
    };
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, name: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(name.into())).map_err(|_| format!("unknown {what} `{name}`"))
}

fn parse_problem(problem_json: &str) -> Result<Problem, String> {
    let problem: Problem = serde_json::from_str(problem_json).map_err(|e| e.to_string())?;
    problem.balance().map_err(|e| e.to_string())
}

/// Solves with the chosen algorithm and starting rule. The reply carries the
/// solution, the trace and the text tableau.
pub fn solve_problem(problem_json: &str, algorithm: &str, rule: &str) -> Result<String, String> {
    let problem = parse_problem(problem_json)?;
    let algorithm: Algorithm = parse_enum("algorithm", algorithm)?;
    let options = SolverOptions::default().with_rule(parse_enum::<IbfsRule>("rule", rule)?).with_trace();
    let (solution, trace) = solve_with(&problem, algorithm, &options).map_err(|e| e.to_string())?;
    let tableau = render_tableau(&problem, &solution.x, &solution.basis);
    let reply = serde_json::json!({
        "class": problem.classify(),
        "supply": problem.supply,
        "demand": problem.demand,
        "solution": solution,
        "trace": trace,
        "tableau": tableau,
    });
    Ok(reply.to_string())
}

/// Every vertex objective, ascending, plus where the chosen solver stops.
pub fn vertex_landscape(problem_json: &str, algorithm: &str) -> Result<String, String> {
    let problem = parse_problem(problem_json)?;
    let catalog = enumerate_vertices_with_cap(&problem, LANDSCAPE_TREE_CAP).map_err(|e| e.to_string())?;
    let mut objectives: Vec<f64> = catalog.vertices.iter().map(|v| v.objective).collect();
    objectives.sort_by(f64::total_cmp);
    let algorithm: Algorithm = parse_enum("algorithm", algorithm)?;
    let (solution, _) = solve_with(&problem, algorithm, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let reply = serde_json::json!({
        "trees": catalog.trees,
        "objectives": objectives,
        "solver": solution.objective,
        "status": solution.status,
    });
    Ok(reply.to_string())
}

#[cfg(target_arch = "wasm32")]
mod wasm {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen(js_name = costCurve)]
    pub fn cost_curve(model_json: &str, x_max: f64, samples: usize) -> Result<String, JsValue> {
        super::cost_curve(model_json, x_max, samples).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen(js_name = solveProblem)]
    pub fn solve_problem(problem_json: &str, algorithm: &str, rule: &str) -> Result<String, JsValue> {
        super::solve_problem(problem_json, algorithm, rule).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen(js_name = vertexLandscape)]
    pub fn vertex_landscape(problem_json: &str, algorithm: &str) -> Result<String, JsValue> {
        super::vertex_landscape(problem_json, algorithm).map_err(|e| JsValue::from_str(&e))
    }
}
