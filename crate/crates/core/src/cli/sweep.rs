use std::fmt::Write as _;

use rayon::prelude::*;

use super::SweepConfig;
use crate::red::{fidelity_grid, theorem1_report, BoundReport, Mode};
use crate::Result;

pub const CSV_HEADER: &str = "d,F0,F1,Fprime,lhs,rhs,gap,saturated";

const SIGNIFICANT: i32 = 12;

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// below `1e-4` and from `1e12` up.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT).contains(&exp) {
        let decimals = (SIGNIFICANT - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn row(r: &BoundReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.d,
        format_sig(r.f0),
        format_sig(r.f1),
        format_sig(r.fprime),
        format_sig(r.lhs),
        format_sig(r.rhs),
        format_sig(r.gap),
        r.saturated
    )
}

/// Full CSV text and the number of rows with `gap < -tol`.
///
/// In slow mode every row within the dense limit is cross-checked against
/// the four-qudit simulation.
pub fn sweep_csv(config: &SweepConfig) -> Result<(String, usize)> {
    let mut tasks = Vec::new();
    for &d in &config.dims {
        let grid = fidelity_grid(config.grid, d);
        let dense = config.mode == Mode::Slow && config.mode.runs_dense(d);
        for &f0 in &grid {
            for &f1 in &grid {
                tasks.push((d, f0, f1, dense));
            }
        }
    }
    let reports: Vec<BoundReport> = tasks
        .par_iter()
        .map(|&(d, f0, f1, dense)| theorem1_report(f0, f1, d, dense))
        .collect::<Result<_>>()?;
    let mut csv = String::with_capacity(64 * (reports.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    let mut violations = 0;
    for r in &reports {
        if r.gap < -config.tol {
            violations += 1;
        }
        let _ = writeln!(csv, "{}", row(r));
    }
    Ok((csv, violations))
}
