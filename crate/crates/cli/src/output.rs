//! CSV tables with fixed column order and 12-significant-digit numbers.

use std::path::Path;

use aptdefense::dynamics::ModelParams;
use aptdefense::experiments::{CompareRow, SweepPoint, SweepRow};
use aptdefense::fbsm::SolveReport;
use aptdefense::metrics::DiagnosticCurves;

use crate::error::{CliError, CliResult};

const SIGNIFICANT: usize = 12;

/// Formats like C's `%.12g`: fixed notation for decimal exponents in
/// `[-4, 12)`, scientific otherwise, trailing zeros removed.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT as i32).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// `t, c_0…, x_0…, y_0…, lambda_0…`.
pub fn write_solution(
    path: &Path,
    r: &SolveReport<f64>,
    params: &ModelParams<f64>,
) -> CliResult<()> {
    let n = r.c_star.nodes();
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    for q in ["c", "x", "y", "lambda"] {
        header.extend((0..n).map(|i| format!("{q}_{i}")));
    }
    w.write_record(&header)?;
    for k in 0..r.c_star.len() {
        let mut rec = vec![fmt_num(params.time(k))];
        for row in [
            r.c_star.row(k),
            r.u_star.x().row(k),
            r.u_star.y().row(k),
            r.lambda_star.row(k),
        ] {
            rec.extend(row.iter().map(|&v| fmt_num(v)));
        }
        w.write_record(&rec)?;
    }
    finish(w, path)
}

/// `t, ce, sc`.
pub fn write_curves(
    path: &Path,
    curves: &DiagnosticCurves<f64>,
    params: &ModelParams<f64>,
) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "ce", "sc"])?;
    for (k, (ce, sc)) in curves.ce.iter().zip(&curves.sc).enumerate() {
        w.write_record([fmt_num(params.time(k)), fmt_num(*ce), fmt_num(*sc)])?;
    }
    finish(w, path)
}

/// `j, loss, cost, iterations, converged`.
pub fn write_summary(path: &Path, r: &SolveReport<f64>) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(["j", "loss", "cost", "iterations", "converged"])?;
    w.write_record([
        fmt_num(r.j_star),
        fmt_num(r.loss_star),
        fmt_num(r.cost_star),
        r.iterations.to_string(),
        r.converged.to_string(),
    ])?;
    finish(w, path)
}

/// `strategy, j, loss, cost, converged, iterations`; `converged` is empty
/// for static strategies.
pub fn write_compare(path: &Path, rows: &[CompareRow<f64>]) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(["strategy", "j", "loss", "cost", "converged", "iterations"])?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            fmt_num(r.objective.j),
            fmt_num(r.objective.loss),
            fmt_num(r.objective.cost),
            r.converged.map(|c| c.to_string()).unwrap_or_default(),
            r.iterations.to_string(),
        ])?;
    }
    finish(w, path)
}

/// `t`, then `ce_<strategy>, sc_<strategy>` for every row in table order.
pub fn write_compare_curves(
    path: &Path,
    rows: &[CompareRow<f64>],
    params: &ModelParams<f64>,
) -> CliResult<()> {
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    for r in rows {
        header.push(format!("ce_{}", r.label));
        header.push(format!("sc_{}", r.label));
    }
    w.write_record(&header)?;
    for k in 0..=params.steps {
        let mut rec = vec![fmt_num(params.time(k))];
        for r in rows {
            rec.push(fmt_num(r.curves.ce[k]));
            rec.push(fmt_num(r.curves.sc[k]));
        }
        w.write_record(&rec)?;
    }
    finish(w, path)
}

/// `scenario, lower, upper, value, ol, oc, oj, converged_fraction,
/// replicates, seeds, skipped`. Bound sweeps fill `lower`/`upper`, topology
/// sweeps fill `value`; lists are `;`-separated.
pub fn write_sweep(path: &Path, scenario: &str, rows: &[SweepRow<f64>]) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record([
        "scenario",
        "lower",
        "upper",
        "value",
        "ol",
        "oc",
        "oj",
        "converged_fraction",
        "replicates",
        "seeds",
        "skipped",
    ])?;
    for r in rows {
        let (lo, hi, val) = match r.point {
            SweepPoint::Bounds(lo, hi) => (fmt_num(lo), fmt_num(hi), String::new()),
            SweepPoint::Value(v) => (String::new(), String::new(), fmt_num(v)),
        };
        let seeds: Vec<String> = r.seeds.iter().map(u64::to_string).collect();
        w.write_record([
            scenario.to_string(),
            lo,
            hi,
            val,
            fmt_num(r.ol),
            fmt_num(r.oc),
            fmt_num(r.oj),
            fmt_num(r.converged_fraction),
            r.replicates().to_string(),
            seeds.join(";"),
            r.skipped.join(";"),
        ])?;
    }
    finish(w, path)
}
