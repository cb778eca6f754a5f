use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::SweepConfig;
use crate::channel::{DepolarizingChannel, Side};
use crate::measures::{cren_isotropic, negativity, BipartiteCut};
use crate::qudit::{
    bell_state, clock, isotropic_state, pauli, phi_plus, shift, IsotropicParams, PauliLabel,
    QuditDim,
};
use crate::random;
use crate::red::{
    corollary2_report, dense_outcome_average, expected_saturation, fidelity_grid, theorem1_report,
    verify_lemma1,
};
use crate::tensor::{identity, max_abs_diff, unitarity_deviation, ComplexMatrix, SubsystemShape};
use crate::Result;

const COVARIANCE_TRIALS: usize = 100;

/// One line of `verify` output.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub d: usize,
    pub passed: bool,
    /// Worst deviation, or the smallest gap for the strict interior check.
    pub value: f64,
    pub error: Option<String>,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} d={} {:<22}", self.d, self.name)?;
        match &self.error {
            Some(e) => write!(f, " error: {e}"),
            None if self.name == "interior-strict" => write!(f, " min gap {:.3e}", self.value),
            None => write!(f, " worst deviation {:.3e}", self.value),
        }
    }
}

fn deviation(name: &'static str, d: QuditDim, tol: f64, value: Result<f64>) -> CheckResult {
    match value {
        Ok(v) => {
            let v = if v == 0.0 { 0.0 } else { v };
            CheckResult {
                name,
                d: d.get(),
                passed: v <= tol,
                value: v,
                error: None,
            }
        }
        Err(e) => CheckResult {
            name,
            d: d.get(),
            passed: false,
            value: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

fn worst(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values
        .into_iter()
        .try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

fn pairs(grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter()
        .flat_map(|&a| grid.iter().map(move |&b| (a, b)))
        .collect()
}

/// `Z^l X^k = ω^{kl} X^k Z^l` and unitarity for every label.
fn pauli_algebra(d: QuditDim) -> Result<f64> {
    worst(d.labels().map(|label| {
        let (k, l) = (label.k(), label.l());
        let zx = clock(d, l) * shift(d, k);
        let xz = (shift(d, k) * clock(d, l)) * d.omega_pow((k * l) as i64);
        Ok(max_abs_diff(&zx, &xz).max(unitarity_deviation(&pauli(label))))
    }))
}

fn bell_basis(d: QuditDim) -> Result<f64> {
    let n = d.get();
    let states: Vec<_> = d.labels().map(bell_state).collect();
    let mut gram = 0.0f64;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            gram = gram.max((a.inner(b) - crate::tensor::c64(expected, 0.0)).norm());
        }
    }
    let sum = states
        .iter()
        .fold(ComplexMatrix::zeros(n * n, n * n), |acc, s| {
            acc + s.projector()
        });
    Ok(gram.max(max_abs_diff(&sum, &identity(n * n))))
}

fn choi_identity(d: QuditDim, grid: &[f64]) -> Result<f64> {
    let n = d.get();
    let shape = SubsystemShape::bipartite(n, n)?;
    let phi = phi_plus(d).projector();
    worst(grid.iter().map(|&f| {
        let channel = DepolarizingChannel::new(d, f)?;
        let iso = isotropic_state(IsotropicParams::new(d, f)?);
        let left = channel.apply_one_sided(Side::Left, &phi, &shape)?;
        let right = channel.apply_one_sided(Side::Right, &phi, &shape)?;
        Ok(max_abs_diff(&left, &iso).max(max_abs_diff(&right, &iso)))
    }))
}

fn pauli_covariance(d: QuditDim, grid: &[f64], seed: u64) -> Result<f64> {
    let n = d.get();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    let mut out = 0.0f64;
    for _ in 0..COVARIANCE_TRIALS {
        let rho = random::density_matrix(n, &mut rng);
        let label = PauliLabel::new(rng.random_range(0..n), rng.random_range(0..n), d)?;
        let f = grid[rng.random_range(0..grid.len())];
        out = out.max(DepolarizingChannel::new(d, f)?.pauli_covariance_deviation(&rho, label)?);
    }
    Ok(out)
}

fn closed_form_cren(d: QuditDim, grid: &[f64]) -> Result<f64> {
    let cut = BipartiteCut::square(d.get())?;
    worst(grid.iter().map(|&f| {
        let p = IsotropicParams::new(d, f)?;
        Ok((negativity(&isotropic_state(p), cut)? - cren_isotropic(p)).abs())
    }))
}

/// Every check for one dimension, in output order.
fn checks_for(d: QuditDim, config: &SweepConfig) -> Vec<CheckResult> {
    let tol = config.tol;
    let grid = fidelity_grid(config.grid, d);
    let points = pairs(&grid);
    let dense = config.mode.runs_dense(d);
    let mut results = vec![
        deviation("pauli-algebra", d, tol, pauli_algebra(d)),
        deviation("bell-basis", d, tol, bell_basis(d)),
        deviation("choi-identity", d, tol, choi_identity(d, &grid)),
        deviation(
            "pauli-covariance",
            d,
            tol,
            pauli_covariance(d, &grid, config.seed),
        ),
        deviation("closed-form-cren", d, tol, closed_form_cren(d, &grid)),
    ];
    if dense {
        let lemma = points
            .par_iter()
            .map(|&(f0, f1)| verify_lemma1(f0, f1, d, tol).map(|c| c.max_deviation))
            .collect::<Vec<_>>();
        results.push(deviation("swapping-dense", d, tol, worst(lemma)));
    }

    let reports: Result<Vec<_>> = points
        .par_iter()
        .map(|&(f0, f1)| theorem1_report(f0, f1, d, false))
        .collect();
    let reports = match reports {
        Ok(r) => r,
        Err(e) => {
            results.push(deviation("bound-inequality", d, tol, Err(e)));
            return results;
        }
    };
    let violation = reports.iter().fold(0.0f64, |acc, r| acc.max(-r.gap));
    results.push(deviation("bound-inequality", d, tol, Ok(violation)));

    if dense {
        let agreement = reports
            .par_iter()
            .map(|r| dense_outcome_average(r.f0, r.f1, d).map(|v| (v - r.lhs).abs()))
            .collect::<Vec<_>>();
        results.push(deviation("route-agreement", d, tol, worst(agreement)));
    }

    let boundary = reports
        .iter()
        .filter(|r| expected_saturation(r.f0, r.f1, d))
        .fold(0.0f64, |acc, r| acc.max(r.gap.abs()));
    results.push(deviation("saturation-boundary", d, tol, Ok(boundary)));

    let min_interior = reports
        .iter()
        .filter(|r| !expected_saturation(r.f0, r.f1, d))
        .map(|r| r.gap)
        .fold(f64::INFINITY, f64::min);
    results.push(CheckResult {
        name: "interior-strict",
        d: d.get(),
        passed: min_interior.is_infinite() || min_interior > tol,
        value: min_interior,
        error: None,
    });

    let corollary = reports
        .par_iter()
        .map(|r| corollary2_report(r.f0, r.f1, d).map(|c| c.max_field_deviation(r)))
        .collect::<Vec<_>>();
    results.push(deviation("channel-equivalence", d, tol, worst(corollary)));
    results
}

/// Runs the property suite for every dimension in `config`.
pub fn run_checks(config: &SweepConfig) -> Vec<CheckResult> {
    config
        .dims
        .iter()
        .flat_map(|&d| checks_for(d, config))
        .collect()
}
