//! Plain-text solution tableau.

use crate::problem::{Problem, DEFAULT_DERIVATIVE_CAP};
use crate::tableau::{Allocation, Basis};

/// Formats a number with at most six decimals, dropping trailing zeros.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        // also folds -0.0
        return "0".to_string();
    }
    if v.abs() >= 1e9 {
        return format!("{v:.3e}");
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Renders the tableau as a fixed-width grid.
///
/// Each cell shows `allocation @ marginal cost`. Basic cells are wrapped in
/// brackets whatever their value, so degenerate zero basics stay visible.
/// The last column holds supplies and the last row demands.
pub fn render_tableau(problem: &Problem, x: &Allocation, basis: &Basis) -> String {
    let (m, n) = (problem.rows(), problem.cols());
    let mut grid: Vec<Vec<String>> = Vec::with_capacity(m + 2);

    let mut header = vec![String::new()];
    header.extend((0..n).map(|j| format!("D{}", j + 1)));
    header.push("supply".to_string());
    grid.push(header);

    for i in 0..m {
        let mut row = vec![format!("S{}", i + 1)];
        for j in 0..n {
            let marginal = problem.costs[i][j]
                .derivative_with_cap(x[(i, j)].max(0.0), DEFAULT_DERIVATIVE_CAP)
                .unwrap_or(f64::NAN);
            let value = fmt_num(x[(i, j)]);
            let value = if basis.contains((i, j)) {
                format!("[{value}]")
            } else {
                format!(" {value} ")
            };
            row.push(format!("{value} @{}", fmt_num(marginal)));
        }
        row.push(fmt_num(problem.supply[i]));
        grid.push(row);
    }

    let mut footer = vec!["demand".to_string()];
    footer.extend(problem.demand.iter().map(|&d| fmt_num(d)));
    footer.push(String::new());
    grid.push(footer);

    let widths: Vec<usize> = (0..n + 2)
        .map(|k| grid.iter().map(|r| r[k].len()).max().unwrap_or(0))
        .collect();
    let rule: String = widths
        .iter()
        .map(|w| "-".repeat(w + 2))
        .collect::<Vec<_>>()
        .join("+");

    let mut out = String::new();
    for (r, row) in grid.iter().enumerate() {
        if r == 1 || r == m + 1 {
            out.push_str(&rule);
            out.push('\n');
        }
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(k, (cell, &w))| {
                if k == 0 {
                    format!(" {cell:<w$} ")
                } else {
                    format!(" {cell:>w$} ")
                }
            })
            .collect();
        out.push_str(line.join("|").trim_end());
        out.push('\n');
    }
    out
}
