//! `nltrans solve`: read a problem file, run a solver, print the result.
//!
//! Exit codes: 0 when the solver stops at an optimal or KKT point, 2 when it
//! hits the iteration limit, 1 for unreadable or invalid input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nltrans::oracle::{self, DEFAULT_TREE_CAP};
use nltrans::render::fmt_num;
use nltrans::{
    render_tableau, solve_with, Algorithm, CostClass, IbfsRule, KktReport, Problem, Solution,
    SolverOptions, Status, TraceRecord,
};
use serde::Serialize;
use serde_json::Value;

pub const ORACLE_CAP_VAR: &str = "NLTRANS_ORACLE_CAP";

#[derive(Debug, Parser)]
#[command(name = "nltrans", version, about = "Transportation problems with nonlinear shipping costs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// JSON problem file
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Auto)]
    pub algorithm: AlgorithmArg,
    /// Rule for the initial basic feasible solution
    #[arg(long, value_enum, default_value_t = IbfsArg::Northwest)]
    pub ibfs: IbfsArg,
    /// KKT tolerance
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol: f64,
    #[arg(long = "max-iters", default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
    /// Include per-iteration records
    #[arg(long)]
    pub trace: bool,
    /// Include the reduced-derivative matrix and KKT figures
    #[arg(long)]
    pub emit_kkt: bool,
    /// Compare against a brute-force reference (small problems only)
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Auto,
    Linear,
    Concave,
    Convex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IbfsArg {
    Northwest,
    Vogel,
    Rowmin,
    Leastcost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Auto => Algorithm::Auto,
            AlgorithmArg::Linear => Algorithm::Linear,
            AlgorithmArg::Concave => Algorithm::Concave,
            AlgorithmArg::Convex => Algorithm::Convex,
        }
    }
}

impl From<IbfsArg> for IbfsRule {
    fn from(r: IbfsArg) -> Self {
        match r {
            IbfsArg::Northwest => IbfsRule::NorthwestCorner,
            IbfsArg::Vogel => IbfsRule::Vogel,
            IbfsArg::Rowmin => IbfsRule::RowMinima,
            IbfsArg::Leastcost => IbfsRule::LeastCost,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive number, got {s}"))
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub algorithm: Algorithm,
    pub class: CostClass,
    pub status: Status,
    pub objective: f64,
    pub iterations: usize,
    pub allocation: Vec<Vec<f64>>,
    pub basis: Vec<(usize, usize)>,
    /// `"row"` or `"column"` when a dummy was added to balance the input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dummy: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt: Option<KktReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
}

#[derive(Debug, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OracleReport {
    VertexEnumeration {
        trees: usize,
        vertices: usize,
        optimum: f64,
    },
    ConvexReference {
        optimum: f64,
    },
    Unavailable {
        reason: String,
    },
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    let Command::Solve(args) = cli.command;
    let oracle_cap = match std::env::var(ORACLE_CAP_VAR) {
        Ok(v) => match v.trim().parse::<u128>() {
            Ok(cap) => cap,
            Err(_) => {
                let _ = writeln!(err, "error: {ORACLE_CAP_VAR} must be a positive integer, got {v:?}");
                return 1;
            }
        },
        Err(_) => DEFAULT_TREE_CAP,
    };
    let (problem, report) = match solve(&args, oracle_cap) {
        Ok(done) => done,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return 1;
        }
    };
    if let Some(OracleReport::Unavailable { reason }) = &report.oracle {
        let _ = writeln!(err, "warning: no oracle comparison: {reason}");
    }
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Text => to_text(&problem, &report),
    };
    let _ = out.write_all(text.as_bytes());
    match report.status {
        Status::Optimal | Status::KktPoint => 0,
        Status::IterationLimit => 2,
    }
}

pub fn load_problem(path: &Path) -> Result<Problem, String> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => format!("file not found: {}", path.display()),
        _ => format!("cannot read {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Loads, balances and solves. Returns the balanced problem with the report.
pub fn solve(args: &SolveArgs, oracle_cap: u128) -> Result<(Problem, Report), String> {
    let raw = load_problem(&args.input)?;
    let problem = raw.balance().map_err(|e| e.to_string())?;
    let dummy = if problem.cols() > raw.cols() {
        Some("column")
    } else if problem.rows() > raw.rows() {
        Some("row")
    } else {
        None
    };
    let options = SolverOptions {
        tol: args.tol,
        max_iterations: args.max_iters as usize,
        ibfs_rule: args.ibfs.into(),
        trace: args.trace,
        ..SolverOptions::default()
    };
    let class = problem.classify();
    let algorithm = match Algorithm::from(args.algorithm) {
        Algorithm::Auto => match class {
            CostClass::Linear => Algorithm::Linear,
            CostClass::Concave => Algorithm::Concave,
            CostClass::Convex | CostClass::Mixed => Algorithm::Convex,
        },
        chosen => chosen,
    };
    let (solution, trace) = solve_with(&problem, algorithm, &options).map_err(|e| e.to_string())?;

    let oracle = args.oracle.then(|| run_oracle(&problem, oracle_cap));
    let oracle_gap = match &oracle {
        Some(OracleReport::VertexEnumeration { optimum, .. } | OracleReport::ConvexReference { optimum }) => {
            Some(solution.objective - optimum)
        }
        _ => None,
    };
    let Solution {
        x,
        basis,
        objective,
        kkt,
        status,
        iterations,
    } = solution;
    let report = Report {
        algorithm,
        class,
        status,
        objective,
        iterations,
        allocation: x.to_rows(),
        basis: basis.cells().to_vec(),
        dummy,
        kkt: args.emit_kkt.then_some(kkt),
        trace: args.trace.then_some(trace),
        oracle,
        oracle_gap,
    };
    Ok((problem, report))
}

fn run_oracle(problem: &Problem, cap: u128) -> OracleReport {
    match problem.classify() {
        CostClass::Linear | CostClass::Concave => match oracle::enumerate_vertices_with_cap(problem, cap) {
            Ok(catalog) => OracleReport::VertexEnumeration {
                trees: catalog.trees,
                vertices: catalog.vertices.len(),
                optimum: catalog
                    .vertices
                    .iter()
                    .map(|v| v.objective)
                    .fold(f64::INFINITY, f64::min),
            },
            Err(e) => OracleReport::Unavailable {
                reason: format!("{e}; raise {ORACLE_CAP_VAR} to force it"),
            },
        },
        CostClass::Convex => match oracle::convex_reference(problem, 1e-10) {
            Ok(optimum) => OracleReport::ConvexReference { optimum },
            Err(e) => OracleReport::Unavailable { reason: e.to_string() },
        },
        CostClass::Mixed => OracleReport::Unavailable {
            reason: "mixed convex and concave costs have no reference solver".into(),
        },
    }
}

/// Rounds to 12 significant digits and folds `-0` into `0`.
pub fn round12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v.abs();
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round12(n.as_f64().expect("f64 number"));
            *v = Value::from(r);
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

pub fn to_json(report: &Report) -> String {
    let mut value = serde_json::to_value(report).expect("report serializes");
    round_numbers(&mut value);
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    text
}

fn name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

pub fn to_text(problem: &Problem, report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status:     {}", name(&report.status));
    let _ = writeln!(s, "objective:  {}", fmt_num(report.objective));
    let _ = writeln!(s, "iterations: {}", report.iterations);
    let _ = writeln!(
        s,
        "algorithm:  {} ({} costs)",
        name(&report.algorithm),
        name(&report.class)
    );
    if let Some(d) = report.dummy {
        let _ = writeln!(s, "balanced with a dummy {d}");
    }
    let x = nltrans::Matrix::from_rows(&report.allocation);
    let basis = nltrans::Basis::new(report.basis.clone());
    s.push('\n');
    s.push_str(&render_tableau(problem, &x, &basis));

    if let Some(k) = &report.kkt {
        let _ = writeln!(
            s,
            "\nkkt: {} (stationarity {}, sign {}, slackness {})",
            if k.satisfied { "satisfied" } else { "violated" },
            fmt_num(k.max_stationarity_violation),
            fmt_num(k.max_nonneg_violation),
            fmt_num(k.max_cs_violation)
        );
        for i in 0..k.w.rows() {
            let row: Vec<String> = k.w.row(i).iter().map(|&v| format!("{:>12}", fmt_num(v))).collect();
            let _ = writeln!(s, "  w {}", row.join(" "));
        }
    }
    if let Some(trace) = &report.trace {
        let _ = writeln!(s, "\ntrace:");
        if trace.is_empty() {
            let _ = writeln!(s, "  (no moves)");
        }
        for r in trace {
            let mut line = format!(
                "  {:>4}  enter ({},{})  theta {}",
                r.iteration,
                r.entering.0,
                r.entering.1,
                fmt_num(r.theta)
            );
            if let Some(case) = r.case {
                let _ = write!(line, "  case {case}");
            }
            if let Some(lambda) = r.lambda {
                let _ = write!(line, "  lambda {}", fmt_num(lambda));
            }
            let _ = write!(
                line,
                "  cost {} -> {}",
                fmt_num(r.objective_before),
                fmt_num(r.objective_after)
            );
            if !r.basis_changed {
                line.push_str("  (basis kept)");
            }
            let _ = writeln!(s, "{line}");
        }
    }
    match &report.oracle {
        Some(OracleReport::VertexEnumeration { trees, vertices, optimum }) => {
            let _ = writeln!(
                s,
                "\noracle: best of {vertices} vertices ({trees} trees) = {}, gap {}",
                fmt_num(*optimum),
                fmt_num(report.oracle_gap.unwrap_or(f64::NAN))
            );
        }
        Some(OracleReport::ConvexReference { optimum }) => {
            let _ = writeln!(
                s,
                "\noracle: Frank-Wolfe reference = {}, gap {}",
                fmt_num(*optimum),
                fmt_num(report.oracle_gap.unwrap_or(f64::NAN))
            );
        }
        Some(OracleReport::Unavailable { reason }) => {
            let _ = writeln!(s, "\noracle: unavailable ({reason})");
        }
        None => {}
    }
    s
}
