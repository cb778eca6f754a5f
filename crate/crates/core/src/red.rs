//! Remote entanglement distribution by a generalized Bell measurement.
//!
//! Two pairs `ρ₁₂ ⊗ ρ₃₄` are prepared and the middle qudits `2, 3` are
//! projected onto `|Ψ_{k,l}⟩`. For isotropic pairs every outcome leaves
//! `1, 4` in an isotropic state of fidelity
//! `F' = (d²F₀F₁ - F₀ - F₁ + 1)/(d² - 1)` up to a local Pauli on qudit 4,
//! which gives the distribution bound `Σ Q N(σ) ≤ N(ρ_{F₀}) N(ρ_{F₁})`. The
//! same number arises as the entanglement left after sending one half of
//! `ρ_{F₀}` through `$_{F₁}`, which [`corollary2_report`] computes through the
//! channel instead of the measurement.

use log::debug;

use crate::channel::{DepolarizingChannel, Side};
use crate::error::{Error, Result};
use crate::measures::{cren_isotropic, negativity, BipartiteCut};
use crate::qudit::{
    self, bell_state, isotropic_state, pauli, IsotropicParams, PauliLabel, QuditDim,
};
use crate::tensor::{
    identity, kron, max_abs_diff, permute_subsystems, ComplexMatrix, SubsystemShape, C64,
};

/// Outcomes with probability below this carry no conditional state.
pub const ZERO_PROBABILITY: f64 = 1e-14;
/// Gap at or below which the bound counts as saturated.
pub const SATURATION_TOL: f64 = 1e-9;
/// Required agreement between the analytic and dense left-hand sides.
pub const ROUTE_TOL: f64 = 1e-9;
/// Largest `d` simulated densely by default, and behind slow mode.
pub const FAST_DENSE_MAX_D: usize = 4;
pub const SLOW_DENSE_MAX_D: usize = 6;

/// One branch `(k, l)` of the Bell measurement on qudits 2 and 3.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub label: PauliLabel,
    pub probability: f64,
    /// `σ_{k,l}` on qudits `1, 4`; `None` when the outcome has zero probability.
    pub state: Option<ComplexMatrix>,
}

/// Both sides of the distribution bound at one `(d, F₀, F₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub d: usize,
    pub f0: f64,
    pub f1: f64,
    pub fprime: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub saturated: bool,
    /// Left-hand side from the dense four-qudit simulation, when it was run.
    pub dense_lhs: Option<f64>,
}

impl BoundReport {
    fn new(d: usize, f0: f64, f1: f64, fprime: f64, lhs: f64, rhs: f64) -> Self {
        let gap = rhs - lhs;
        Self {
            d,
            f0,
            f1,
            fprime,
            lhs,
            rhs,
            gap,
            saturated: gap <= SATURATION_TOL,
            dense_lhs: None,
        }
    }

    /// Largest difference over the numeric fields `fprime, lhs, rhs, gap`,
    /// infinite if `d`, the inputs or the saturation flag differ.
    pub fn max_field_deviation(&self, other: &BoundReport) -> f64 {
        if self.d != other.d
            || self.f0 != other.f0
            || self.f1 != other.f1
            || self.saturated != other.saturated
        {
            return f64::INFINITY;
        }
        [
            self.fprime - other.fprime,
            self.lhs - other.lhs,
            self.rhs - other.rhs,
            self.gap - other.gap,
        ]
        .iter()
        .fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }
}

/// Which routes [`theorem1_report`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Dense simulation up to `d = 4`.
    #[default]
    Fast,
    /// Dense simulation up to `d = 6`.
    Slow,
}

impl Mode {
    pub fn dense_max_d(self) -> usize {
        match self {
            Mode::Fast => FAST_DENSE_MAX_D,
            Mode::Slow => SLOW_DENSE_MAX_D,
        }
    }

    pub fn runs_dense(self, d: QuditDim) -> bool {
        d.get() <= self.dense_max_d()
    }
}

fn iso(d: QuditDim, f: f64) -> Result<ComplexMatrix> {
    Ok(isotropic_state(IsotropicParams::new(d, f)?))
}

/// Projects qudits 2, 3 of `ρ₁₂ ⊗ ρ₃₄` onto every generalized Bell state.
pub fn bell_measure_23(
    rho12: &ComplexMatrix,
    rho34: &ComplexMatrix,
    d: QuditDim,
) -> Result<Vec<Outcome>> {
    let n = d.get();
    let pair = n * n;
    for (name, rho) in [("rho12", rho12), ("rho34", rho34)] {
        if rho.shape() != (pair, pair) {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {pair}x{pair} for d={n}",
                rho.nrows(),
                rho.ncols()
            )));
        }
    }
    let shape = SubsystemShape::new(vec![n; 4])?;
    // reorder 1,2,3,4 -> 1,4,2,3 so the measured pair is the trailing factor
    let joint = permute_subsystems(&kron(rho12, rho34), &shape, &[0, 3, 1, 2])?;

    let outcomes = d
        .labels()
        .map(|label| {
            // tr₂₃[(I ⊗ |Ψ⟩⟨Ψ|) ρ] = (I ⊗ ⟨Ψ|) ρ (I ⊗ |Ψ⟩), summed over the
            // d non-zero amplitudes of |Ψ⟩ on each side
            let psi = bell_state(label);
            let support: Vec<(usize, C64)> = psi
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > 0.0)
                .map(|(x, a)| (x, *a))
                .collect();
            let unnormalized = ComplexMatrix::from_fn(pair, pair, |r, c| {
                let mut acc = C64::new(0.0, 0.0);
                for &(x, ax) in &support {
                    for &(y, ay) in &support {
                        acc += ax.conj() * joint[(r * pair + x, c * pair + y)] * ay;
                    }
                }
                acc
            });
            let probability = unnormalized.trace().re;
            let state =
                (probability >= ZERO_PROBABILITY).then(|| unnormalized.unscale(probability));
            Outcome {
                label,
                probability,
                state,
            }
        })
        .collect();
    Ok(outcomes)
}

/// Local unitary relating outcome `(k, l)` to outcome `(0, 0)`:
/// `σ_{k,l} = U σ_{0,0} U†` with `U = I ⊗ conj(X^k Z^l) = I ⊗ X^k Z^{-l}`.
///
/// Projecting qudit 3 of `|Φ+⟩₃₄` with `X^k Z^l` moves the operator onto
/// qudit 4 as its transpose-adjoint, which is the complex conjugate. For
/// `d = 2` this coincides with `I ⊗ X^k Z^l`.
pub fn outcome_rotation(label: PauliLabel) -> ComplexMatrix {
    let n = label.dim().get();
    kron(&identity(n), &pauli(label).map(|z| z.conj()))
}

/// `F' = (d²F₀F₁ - F₀ - F₁ + 1)/(d² - 1)`.
pub fn lemma1_fidelity(f0: f64, f1: f64, d: QuditDim) -> Result<f64> {
    for f in [f0, f1] {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::FidelityOutOfRange(f));
        }
    }
    let n = (d.get() * d.get()) as f64;
    Ok(((n * f0 * f1 - f0 - f1 + 1.0) / (n - 1.0)).clamp(0.0, 1.0))
}

/// Result of [`verify_lemma1`].
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Check {
    /// `|⟨Φ+|σ₀₀|Φ+⟩ - F'|`
    pub fidelity_deviation: f64,
    /// Worst entrywise distance of any un-rotated `σ_{k,l}` from `ρ_{F'}`.
    pub state_deviation: f64,
    /// Worst `|Q_{k,l} - 1/d²|`.
    pub probability_deviation: f64,
    pub max_deviation: f64,
    pub within_tolerance: bool,
}

/// Checks that every Bell outcome on isotropic inputs is `ρ_{F'}` rotated by
/// [`outcome_rotation`].
pub fn verify_lemma1(f0: f64, f1: f64, d: QuditDim, tol: f64) -> Result<Lemma1Check> {
    let fprime = lemma1_fidelity(f0, f1, d)?;
    let expected = iso(d, fprime)?;
    let outcomes = bell_measure_23(&iso(d, f0)?, &iso(d, f1)?, d)?;
    let n = d.get();
    let uniform = 1.0 / (n * n) as f64;
    let phi = qudit::phi_plus(d);

    let mut fidelity_deviation = 0.0f64;
    let mut state_deviation = 0.0f64;
    let mut probability_deviation = 0.0f64;
    for outcome in &outcomes {
        probability_deviation = probability_deviation.max((outcome.probability - uniform).abs());
        let sigma = outcome.state.as_ref().ok_or_else(|| {
            Error::DimensionMismatch("isotropic outcome with zero probability".into())
        })?;
        let local = outcome_rotation(outcome.label);
        let unrotated = local.adjoint() * sigma * &local;
        state_deviation = state_deviation.max(max_abs_diff(&unrotated, &expected));
        if outcome.label.is_identity() {
            let v = phi.amplitudes();
            let overlap = (v.adjoint() * sigma * v)[(0, 0)].re;
            fidelity_deviation = (overlap - fprime).abs();
        }
    }
    let max_deviation = fidelity_deviation
        .max(state_deviation)
        .max(probability_deviation);
    Ok(Lemma1Check {
        fidelity_deviation,
        state_deviation,
        probability_deviation,
        max_deviation,
        within_tolerance: max_deviation <= tol,
    })
}

/// `Σ Q_{k,l} N(σ_{k,l})` from the dense simulation, negativity standing in for
/// CREN on the (locally isotropic) outcomes.
pub fn dense_outcome_average(f0: f64, f1: f64, d: QuditDim) -> Result<f64> {
    let outcomes = bell_measure_23(&iso(d, f0)?, &iso(d, f1)?, d)?;
    let cut = BipartiteCut::square(d.get())?;
    let mut total = 0.0;
    let mut skipped = 0usize;
    for outcome in &outcomes {
        match &outcome.state {
            Some(sigma) => total += outcome.probability * negativity(sigma, cut)?,
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        debug!("d={d} F0={f0} F1={f1}: {skipped} zero-probability outcomes left out");
    }
    Ok(total)
}

/// Both sides of the distribution bound through the measurement.
///
/// `lhs` is the closed-form `N(ρ_{F'})`. With `dense` set the four-qudit
/// simulation is run as well and must agree within [`ROUTE_TOL`].
pub fn theorem1_report(f0: f64, f1: f64, d: QuditDim, dense: bool) -> Result<BoundReport> {
    let fprime = lemma1_fidelity(f0, f1, d)?;
    let lhs = cren_isotropic(IsotropicParams::new(d, fprime)?);
    let rhs =
        cren_isotropic(IsotropicParams::new(d, f0)?) * cren_isotropic(IsotropicParams::new(d, f1)?);
    let mut report = BoundReport::new(d.get(), f0, f1, fprime, lhs, rhs);
    if dense {
        let numeric = dense_outcome_average(f0, f1, d)?;
        let disagreement = (numeric - lhs).abs();
        if disagreement > ROUTE_TOL {
            return Err(Error::RouteDisagreement(disagreement));
        }
        report.dense_lhs = Some(numeric);
    }
    Ok(report)
}

/// The same bound through the channel: `N[(I ⊗ $_{F₁})(ρ_{F₀})]` against
/// `N[(I ⊗ $_{F₁})(Φ+)] · N(ρ_{F₀})`.
pub fn corollary2_report(f0: f64, f1: f64, d: QuditDim) -> Result<BoundReport> {
    let n = d.get();
    let shape = SubsystemShape::bipartite(n, n)?;
    let cut = BipartiteCut::square(n)?;
    let channel = DepolarizingChannel::new(d, f1)?;
    let evolved = channel.apply_one_sided(Side::Right, &iso(d, f0)?, &shape)?;
    let phi = qudit::phi_plus(d);
    let v = phi.amplitudes();
    let fprime = (v.adjoint() * &evolved * v)[(0, 0)].re;
    let lhs = negativity(&evolved, cut)?;
    let rhs =
        negativity(&channel.choi_state(), cut)? * cren_isotropic(IsotropicParams::new(d, f0)?);
    Ok(BoundReport::new(n, f0, f1, fprime, lhs, rhs))
}

/// Uniform grid on `[0, 1]` with both endpoints, plus `1/d` when it is not already on it.
pub fn fidelity_grid(points: usize, d: QuditDim) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..points)
        .map(|i| {
            if points == 1 {
                0.0
            } else {
                i as f64 / (points - 1) as f64
            }
        })
        .collect();
    let probe = 1.0 / d.get() as f64;
    if !grid.iter().any(|&f| (f - probe).abs() < 1e-12) {
        grid.push(probe);
        grid.sort_by(f64::total_cmp);
    }
    grid
}

/// Whether the bound is expected to be tight: an input is maximally
/// entangled or an input is PPT.
pub fn expected_saturation(f0: f64, f1: f64, d: QuditDim) -> bool {
    const EDGE: f64 = 1e-12;
    let ppt = 1.0 / d.get() as f64 + EDGE;
    f0 >= 1.0 - EDGE || f1 >= 1.0 - EDGE || f0 <= ppt || f1 <= ppt
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub f0: f64,
    pub f1: f64,
    pub gap: f64,
}

/// Gap of the bound over [`fidelity_grid`]², analytic route.
pub fn saturation_boundary_scan(d: QuditDim, resolution: usize) -> Result<Vec<ScanPoint>> {
    const MIN_RESOLUTION: usize = 11;
    if resolution < MIN_RESOLUTION {
        return Err(Error::GridTooCoarse {
            min: MIN_RESOLUTION,
            got: resolution,
        });
    }
    let grid = fidelity_grid(resolution, d);
    let mut out = Vec::with_capacity(grid.len() * grid.len());
    for &f0 in &grid {
        for &f1 in &grid {
            let report = theorem1_report(f0, f1, d, false)?;
            out.push(ScanPoint {
                f0,
                f1,
                gap: report.gap,
            });
        }
    }
    Ok(out)
}
