//! Convex-roof extended negativity (CREN) and negativity.
//!
//! On a pure state `|φ⟩` in `dA ⊗ dB` with `d = min(dA, dB)`,
//! `N(φ) = ((tr √ρ_A)² - 1) / (d - 1)`. On mixed states the measure is the
//! convex roof of that function, i.e. the minimum of `Σ p_k N(φ_k)` over all
//! pure-state ensembles of `ρ`. Negativity `(‖ρ^{T_B}‖₁ - 1) / (d - 1)` is a
//! lower bound that coincides with CREN on pure and isotropic states.
//! [`convex_roof_upper_bound`] searches ensembles numerically and so only
//! ever returns an upper bound.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qudit::IsotropicParams;
use crate::random;
use crate::tensor::{
    self, hermitian_eigh, max_abs_diff, partial_trace, partial_transpose, trace_norm, trace_sqrt,
    ComplexMatrix, Eigh, StateVector, SubsystemShape, C64, PSD_TOL,
};

/// Eigenvalues below this are treated as zero when forming the support of a state.
pub const RANK_CUTOFF: f64 = 1e-10;
const ISOMETRY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;

/// A split of a state space into `dA ⊗ dB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteCut {
    da: usize,
    db: usize,
}

impl BipartiteCut {
    pub fn new(da: usize, db: usize) -> Result<Self> {
        for d in [da, db] {
            if d < 2 {
                return Err(Error::InvalidDimension(d));
            }
        }
        Ok(Self { da, db })
    }

    pub fn square(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    pub fn total(&self) -> usize {
        self.da * self.db
    }

    /// The smaller local dimension, which normalizes CREN.
    pub fn local_dim(&self) -> usize {
        self.da.min(self.db)
    }

    pub fn shape(&self) -> SubsystemShape {
        SubsystemShape::bipartite(self.da, self.db).expect("validated dimensions")
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "dimension {n} does not split as {}x{}",
                self.da, self.db
            )));
        }
        Ok(())
    }
}

/// CREN of a pure state.
pub fn cren_pure(phi: &StateVector, cut: BipartiteCut) -> Result<f64> {
    cut.check(phi.dim())?;
    let keep = if cut.da <= cut.db { 0 } else { 1 };
    let marginal = partial_trace(&phi.projector(), &cut.shape(), &[keep])?;
    let ts = trace_sqrt(&marginal)?;
    let d = cut.local_dim() as f64;
    Ok(((ts * ts - 1.0) / (d - 1.0)).clamp(0.0, 1.0))
}

/// Normalized negativity, `(‖ρ^{T_B}‖₁ - 1)/(d - 1)` clipped at zero.
pub fn negativity(rho: &ComplexMatrix, cut: BipartiteCut) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} density matrix",
            rho.nrows(),
            rho.ncols()
        )));
    }
    cut.check(rho.nrows())?;
    let pt = partial_transpose(rho, &cut.shape(), 1)?;
    let d = cut.local_dim() as f64;
    Ok(((trace_norm(&pt)? - 1.0) / (d - 1.0)).max(0.0))
}

/// Closed-form CREN of an isotropic state, `max{(dF - 1)/(d - 1), 0}`.
pub fn cren_isotropic(p: IsotropicParams) -> f64 {
    let d = p.dim().get() as f64;
    ((d * p.fidelity() - 1.0) / (d - 1.0)).max(0.0)
}

/// A pure-state ensemble `{p_k, |φ_k⟩}` together with the isometry that produced it.
#[derive(Debug, Clone)]
pub struct EnsembleDecomposition {
    pub weights: Vec<f64>,
    pub states: Vec<StateVector>,
    pub isometry: ComplexMatrix,
}

impl EnsembleDecomposition {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ p_k |φ_k⟩⟨φ_k|`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.states.first().map_or(0, StateVector::dim);
        self.weights
            .iter()
            .zip(&self.states)
            .fold(ComplexMatrix::zeros(n, n), |acc, (&p, s)| {
                acc + s.projector().scale(p)
            })
    }

    /// `Σ p_k N(φ_k)`
    pub fn average_cren(&self, cut: BipartiteCut) -> Result<f64> {
        let mut total = 0.0;
        for (&p, s) in self.weights.iter().zip(&self.states) {
            if p > 0.0 {
                total += p * cren_pure(s, cut)?;
            }
        }
        Ok(total)
    }
}

/// Eigenvectors scaled by `√λ` for the eigenvalues above [`RANK_CUTOFF`], one per column.
fn scaled_support(eig: &Eigh) -> ComplexMatrix {
    let r = eig.rank(RANK_CUTOFF);
    let n = eig.vectors.nrows();
    ComplexMatrix::from_fn(n, r, |i, j| eig.vectors[(i, j)] * eig.values[j].sqrt())
}

fn isometry_deviation(v: &ComplexMatrix) -> f64 {
    max_abs_diff(&(v.adjoint() * v), &tensor::identity(v.ncols()))
}

/// Ensemble `√p_k |φ_k⟩ = Σ_j V[k][j] √λ_j |e_j⟩` from an `m×r` isometry.
pub fn realize_ensemble(eig: &Eigh, v: &ComplexMatrix) -> Result<EnsembleDecomposition> {
    let support = scaled_support(eig);
    let r = support.ncols();
    if v.ncols() != r {
        return Err(Error::DimensionMismatch(format!(
            "isometry has {} columns but the state has rank {r}",
            v.ncols()
        )));
    }
    let dev = isometry_deviation(v);
    if dev > ISOMETRY_TOL {
        return Err(Error::NotIsometry(dev));
    }
    // row k of V·Sᵀ holds the unnormalized member √p_k φ_k
    let members = v * support.transpose();
    let n = support.nrows();
    let mut weights = Vec::with_capacity(v.nrows());
    let mut states = Vec::with_capacity(v.nrows());
    for k in 0..members.nrows() {
        let psi = DVector::from_iterator(n, members.row(k).iter().copied());
        let p = psi.norm_squared();
        let state = StateVector::normalized(psi).unwrap_or_else(|_| {
            StateVector::normalized(eig.vectors.column(0).into_owned()).expect("unit eigenvector")
        });
        weights.push(p);
        states.push(state);
    }
    Ok(EnsembleDecomposition {
        weights,
        states,
        isometry: v.clone(),
    })
}

/// Search settings for [`convex_roof_upper_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexRoofOptions {
    /// Ensemble size `m`; `None` selects `rank²`.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    /// Iteration cap per restart.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ConvexRoofOptions {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 20,
            max_iterations: 3000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvexRoofResult {
    /// Best ensemble average found. Always an upper bound on CREN.
    pub value: f64,
    pub ensemble: EnsembleDecomposition,
    pub ensemble_size: usize,
    pub rank: usize,
    pub restarts: usize,
    /// Index of the restart that produced `value`.
    pub best_restart: usize,
    /// True when the winning restart stopped at the iteration cap.
    pub budget_exhausted: bool,
}

/// `V ↦ Σ_k p_k N(φ_k)` for ensembles generated from a fixed state.
///
/// Writing `ψ_k = √p_k φ_k` as a `dA×dB` matrix `M_k`, `p_k (tr √ρ_A(φ_k))²`
/// equals `‖M_k‖_*²` (nuclear norm), so the objective is
/// `(Σ_k ‖M_k‖_*² - 1)/(d - 1)` and its gradient follows from the polar factors
/// of the `M_k`.
pub(crate) struct RoofObjective {
    support: ComplexMatrix,
    support_conj: ComplexMatrix,
    da: usize,
    db: usize,
    scale: f64,
    /// `ε` in the smoothed nuclear norm `Σ √(σ² + ε²)`; 0 is exact.
    smoothing: f64,
}

impl RoofObjective {
    pub(crate) fn new(eig: &Eigh, cut: BipartiteCut) -> Self {
        let support = scaled_support(eig);
        let support_conj = support.conjugate();
        Self {
            support,
            support_conj,
            da: cut.da,
            db: cut.db,
            scale: 1.0 / (cut.local_dim() as f64 - 1.0),
            smoothing: 0.0,
        }
    }

    fn with_smoothing(&self, smoothing: f64) -> Self {
        Self {
            support: self.support.clone(),
            support_conj: self.support_conj.clone(),
            smoothing,
            ..*self
        }
    }

    fn nuclear(&self, singular_values: &nalgebra::DVector<f64>) -> f64 {
        if self.smoothing == 0.0 {
            return singular_values.iter().sum();
        }
        let e2 = self.smoothing * self.smoothing;
        singular_values.iter().map(|s| (s * s + e2).sqrt()).sum()
    }

    pub(crate) fn rank(&self) -> usize {
        self.support.ncols()
    }

    fn member_matrix(&self, members: &ComplexMatrix, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.da, self.db, |a, b| members[(k, a * self.db + b)])
    }

    pub(crate) fn value(&self, v: &ComplexMatrix) -> f64 {
        let members = v * self.support.transpose();
        let mut sum = 0.0;
        for k in 0..members.nrows() {
            let nuclear = self.nuclear(&self.member_matrix(&members, k).singular_values());
            sum += nuclear * nuclear;
        }
        (sum - 1.0) * self.scale
    }

    /// Value and Euclidean gradient `G` with `df = Re tr(G† dV)`.
    pub(crate) fn value_and_gradient(&self, v: &ComplexMatrix) -> (f64, ComplexMatrix) {
        let members = v * self.support.transpose();
        let (m, n) = members.shape();
        let mut sum = 0.0;
        let mut member_grad = ComplexMatrix::zeros(m, n);
        for k in 0..m {
            let svd = self.member_matrix(&members, k).svd(true, true);
            let nuclear = self.nuclear(&svd.singular_values);
            sum += nuclear * nuclear;
            let mut u = svd.u.expect("u requested");
            if self.smoothing > 0.0 {
                let e2 = self.smoothing * self.smoothing;
                for (j, s) in svd.singular_values.iter().enumerate() {
                    let mut col = u.column_mut(j);
                    col *= C64::from(s / (s * s + e2).sqrt());
                }
            }
            let polar = u * svd.v_t.expect("v_t requested");
            let factor = 2.0 * nuclear * self.scale;
            for a in 0..self.da {
                for b in 0..self.db {
                    member_grad[(k, a * self.db + b)] = polar[(a, b)] * factor;
                }
            }
        }
        ((sum - 1.0) * self.scale, member_grad * &self.support_conj)
    }
}

struct RestartOutcome {
    isometry: ComplexMatrix,
    budget_exhausted: bool,
}

const ARMIJO: f64 = 1e-4;
const GRAD_TOL: f64 = 1e-10;
const REORTHONORMALIZE_EVERY: usize = 50;

fn orthonormalize(v: &ComplexMatrix) -> ComplexMatrix {
    let r = v.ncols();
    let q = v.clone().qr().q();
    // restore the column phases QR may flip so the iterate stays continuous
    let mut out = q.columns(0, r).into_owned();
    for j in 0..r {
        let overlap = out.column(j).dotc(&v.column(j));
        if overlap.norm() > 0.0 {
            let phase = overlap / overlap.norm();
            let mut col = out.column_mut(j);
            col *= phase;
        }
    }
    out
}

/// Riemannian descent on the unitary group: `V ← exp(-t B) V` with
/// `B = (G V† - V G†)/2` the anti-Hermitian part of the gradient, step by
/// Armijo backtracking.
fn descend_counted(
    objective: &RoofObjective,
    start: ComplexMatrix,
    max_iterations: usize,
) -> (RestartOutcome, usize) {
    let mut v = start;
    let (mut value, mut grad) = objective.value_and_gradient(&v);
    let mut step: f64 = 1.0;
    for iter in 0..max_iterations {
        let w = &v * grad.adjoint();
        let direction = (w.adjoint() - &w).unscale(2.0);
        let slope = direction.norm_squared();
        if slope.sqrt() < GRAD_TOL {
            return (
                RestartOutcome {
                    isometry: v,
                    budget_exhausted: false,
                },
                iter,
            );
        }
        // B = -iH with H Hermitian, so exp(-tB) = Q exp(itΛ) Q†
        let generator = direction.map(|z| z * C64::i());
        let eig = match hermitian_eigh(&generator) {
            Ok(eig) => eig,
            Err(_) => {
                return (
                    RestartOutcome {
                        isometry: v,
                        budget_exhausted: false,
                    },
                    iter,
                )
            }
        };
        let projected = eig.vectors.adjoint() * &v;

        let mut accepted = None;
        let mut t = (step * 2.0).min(1e3);
        for _ in 0..60 {
            let rotated = ComplexMatrix::from_fn(projected.nrows(), projected.ncols(), |i, j| {
                projected[(i, j)] * C64::from_polar(1.0, t * eig.values[i])
            });
            let candidate = &eig.vectors * rotated;
            let candidate_value = objective.value(&candidate);
            if candidate_value <= value - ARMIJO * t * slope {
                accepted = Some((candidate, candidate_value));
                break;
            }
            t *= 0.5;
        }
        let Some((mut next, _)) = accepted else {
            return (
                RestartOutcome {
                    isometry: v,
                    budget_exhausted: false,
                },
                iter,
            );
        };
        step = t;
        if (iter + 1) % REORTHONORMALIZE_EVERY == 0 {
            next = orthonormalize(&next);
        }
        v = next;
        (value, grad) = objective.value_and_gradient(&v);
    }
    (
        RestartOutcome {
            isometry: v,
            budget_exhausted: true,
        },
        max_iterations,
    )
}

/// Smoothing levels run before the exact objective, each with up to a
/// eighth of the iteration budget.
const SMOOTHING: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

fn smoothed_descent(
    objective: &RoofObjective,
    start: ComplexMatrix,
    max_iterations: usize,
) -> RestartOutcome {
    let phase = max_iterations / 8;
    let mut v = start;
    let mut spent = 0;
    for eps in SMOOTHING {
        let smoothed = objective.with_smoothing(eps);
        let (next, used) = descend_counted(&smoothed, v, phase);
        v = next.isometry;
        spent += used;
    }
    let (outcome, _) = descend_counted(objective, v, max_iterations - spent);
    outcome
}

fn validate_density(rho: &ComplexMatrix, cut: BipartiteCut) -> Result<Eigh> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} density matrix",
            rho.nrows(),
            rho.ncols()
        )));
    }
    cut.check(rho.nrows())?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::DimensionMismatch(format!("trace {tr} is not 1")));
    }
    let eig = hermitian_eigh(rho)?;
    if let Some(&min) = eig.values.last() {
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
    }
    Ok(eig)
}

/// Best ensemble average of pure-state CREN found by multi-start descent
/// over `m×r` isometries.
///
/// Restart `i` draws its Haar-random starting isometry from stream `i` of a
/// ChaCha generator keyed by `seed`, so results do not depend on how the
/// restarts are scheduled and `restarts = n` explores a superset of
/// `restarts = n - 1`.
pub fn convex_roof_upper_bound(
    rho: &ComplexMatrix,
    cut: BipartiteCut,
    options: &ConvexRoofOptions,
) -> Result<ConvexRoofResult> {
    let eig = validate_density(rho, cut)?;
    let objective = RoofObjective::new(&eig, cut);
    let rank = objective.rank();
    let m = options.ensemble_size.unwrap_or(rank * rank);
    if m < rank {
        return Err(Error::EnsembleTooSmall { m, rank });
    }
    let restarts = options.restarts.max(1);

    // each restart reports the ensemble average of its own re-orthonormalized
    // isometry, so selection and the returned value use the same number
    let outcomes: Vec<(f64, EnsembleDecomposition, bool)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(i as u64);
            let start = random::unitary(m, &mut rng).columns(0, rank).into_owned();
            let outcome = smoothed_descent(&objective, start, options.max_iterations);
            let ensemble = realize_ensemble(&eig, &orthonormalize(&outcome.isometry))?;
            let value = ensemble.average_cren(cut)?;
            Ok((value, ensemble, outcome.budget_exhausted))
        })
        .collect::<Result<_>>()?;

    let (best_restart, (value, ensemble, budget_exhausted)) = outcomes
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1 .0 < a.1 .0 { b } else { a })
        .expect("at least one restart");

    Ok(ConvexRoofResult {
        value,
        ensemble,
        ensemble_size: m,
        rank,
        restarts,
        best_restart,
        budget_exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{isotropic_state, phi_plus, QuditDim};
    use crate::tensor::{c64, kron};

    fn cut(d: usize) -> BipartiteCut {
        BipartiteCut::square(d).unwrap()
    }

    fn iso(d: usize, f: f64) -> IsotropicParams {
        IsotropicParams::new(QuditDim::new(d).unwrap(), f).unwrap()
    }

    #[test]
    fn cren_pure_extremes() {
        for d in 2..=6 {
            let phi = phi_plus(QuditDim::new(d).unwrap());
            assert!((cren_pure(&phi, cut(d)).unwrap() - 1.0).abs() < 1e-12);
            let product = StateVector::basis(d * d, 0);
            assert!(cren_pure(&product, cut(d)).unwrap().abs() < 1e-15);
        }
        let bad = StateVector::basis(5, 0);
        assert!(matches!(
            cren_pure(&bad, cut(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cren_pure_is_qubit_concurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let phi = random::pure_state(4, &mut rng);
            let a = phi.amplitudes();
            // Schmidt spectrum from the 2x2 coefficient matrix
            let m = ComplexMatrix::from_fn(2, 2, |i, j| a[i * 2 + j]);
            let s = m.singular_values();
            let concurrence = 2.0 * (s[0] * s[0] * s[1] * s[1]).sqrt();
            let wootters = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
            assert!((cren_pure(&phi, cut(2)).unwrap() - concurrence).abs() < 1e-12);
            assert!((concurrence - wootters).abs() < 1e-12);
        }
    }

    #[test]
    fn cren_pure_rectangular_cut() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let phi = random::pure_state(6, &mut rng);
        let ab = cren_pure(&phi, BipartiteCut::new(2, 3).unwrap()).unwrap();
        let m = ComplexMatrix::from_fn(2, 3, |i, j| phi.amplitudes()[i * 3 + j]);
        let s: f64 = m.singular_values().iter().sum();
        assert!((ab - (s * s - 1.0)).abs() < 1e-12);
        // same value whichever factor is listed first
        let swapped = DVector::from_fn(6, |idx, _| {
            let (j, i) = (idx / 2, idx % 2);
            phi.amplitudes()[i * 3 + j]
        });
        let ba = cren_pure(
            &StateVector::new(swapped).unwrap(),
            BipartiteCut::new(3, 2).unwrap(),
        )
        .unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn negativity_matches_cren_on_pure_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for d in 2..=6 {
            for _ in 0..5 {
                let phi = random::pure_state(d * d, &mut rng);
                let n = negativity(&phi.projector(), cut(d)).unwrap();
                let c = cren_pure(&phi, cut(d)).unwrap();
                assert!((n - c).abs() < 1e-10, "d={d}: {n} vs {c}");
            }
        }
    }

    #[test]
    fn negativity_of_product_and_isotropic() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let prod = kron(
            &random::density_matrix(3, &mut rng),
            &random::density_matrix(3, &mut rng),
        );
        assert!(negativity(&prod, cut(3)).unwrap() < 1e-12);
        for d in 2..=6 {
            for i in 0..=20 {
                let f = i as f64 / 20.0;
                let p = iso(d, f);
                let n = negativity(&isotropic_state(p), cut(d)).unwrap();
                assert!((n - cren_isotropic(p)).abs() <= 1e-10, "d={d} F={f}");
            }
        }
        assert!(matches!(
            negativity(&tensor::identity(6), cut(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(cren_isotropic(iso(3, 1.0)), 1.0);
        assert_eq!(cren_isotropic(iso(4, 0.25)), 0.0);
        assert!((cren_isotropic(iso(2, 0.9)) - 0.8).abs() < 1e-15);
        assert_eq!(cren_isotropic(iso(2, 0.1)), 0.0);
    }

    #[test]
    fn realize_with_identity_is_eigen_ensemble() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let rho = random::density_matrix(4, &mut rng);
        let eig = hermitian_eigh(&rho).unwrap();
        let ens = realize_ensemble(&eig, &tensor::identity(4)).unwrap();
        for (i, &p) in ens.weights.iter().enumerate() {
            assert!((p - eig.values[i]).abs() < 1e-14);
            let overlap = ens.states[i].amplitudes().dotc(&eig.vectors.column(i));
            assert!((overlap.norm() - 1.0).abs() < 1e-12);
        }
        assert!(max_abs_diff(&ens.reconstruct(), &rho) < 1e-12);
    }

    #[test]
    fn realize_with_rotation_and_random_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let rho = random::density_matrix_of_rank(4, 2, &mut rng);
        let eig = hermitian_eigh(&rho).unwrap();
        assert_eq!(eig.rank(RANK_CUTOFF), 2);
        let th: f64 = 0.7;
        let rot = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c64(th.cos(), 0.0),
                c64(-th.sin(), 0.0),
                c64(th.sin(), 0.0),
                c64(th.cos(), 0.0),
            ],
        );
        let ens = realize_ensemble(&eig, &rot).unwrap();
        assert_eq!(ens.len(), 2);
        assert!(max_abs_diff(&ens.reconstruct(), &rho) < 1e-10);

        let v = random::unitary(7, &mut rng).columns(0, 2).into_owned();
        let ens = realize_ensemble(&eig, &v).unwrap();
        assert!((ens.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(max_abs_diff(&ens.reconstruct(), &rho) < 1e-9);

        let not_iso = rot.scale(1.1);
        assert!(matches!(
            realize_ensemble(&eig, &not_iso),
            Err(Error::NotIsometry(_))
        ));
        assert!(matches!(
            realize_ensemble(&eig, &tensor::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn objective_matches_ensemble_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let rho = random::density_matrix(9, &mut rng);
        let eig = hermitian_eigh(&rho).unwrap();
        let obj = RoofObjective::new(&eig, cut(3));
        let v = random::unitary(12, &mut rng).columns(0, 9).into_owned();
        let ens = realize_ensemble(&eig, &v).unwrap();
        assert!((obj.value(&v) - ens.average_cren(cut(3)).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let rho = random::density_matrix(6, &mut rng);
        let eig = hermitian_eigh(&rho).unwrap();
        let obj = RoofObjective::new(&eig, BipartiteCut::new(2, 3).unwrap());
        let v = random::unitary(8, &mut rng).columns(0, 6).into_owned();
        let (_, grad) = obj.value_and_gradient(&v);
        let h = 1e-6;
        for _ in 0..5 {
            let dir = random::ginibre(8, 6, &mut rng);
            let fd =
                (obj.value(&(&v + dir.scale(h))) - obj.value(&(&v - dir.scale(h)))) / (2.0 * h);
            let analytic = (grad.adjoint() * &dir).trace().re;
            assert!(
                (fd - analytic).abs() < 1e-6 * analytic.abs().max(1.0),
                "{fd} vs {analytic}"
            );
        }
    }

    #[test]
    fn convex_roof_on_pure_state_is_cren_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let phi = random::pure_state(9, &mut rng);
        let expected = cren_pure(&phi, cut(3)).unwrap();
        for m in [None, Some(3)] {
            let opts = ConvexRoofOptions {
                ensemble_size: m,
                restarts: 2,
                ..Default::default()
            };
            let res = convex_roof_upper_bound(&phi.projector(), cut(3), &opts).unwrap();
            assert_eq!(res.rank, 1);
            assert!((res.value - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn convex_roof_on_maximally_mixed_qubits_is_zero() {
        let rho = tensor::identity(4).unscale(4.0);
        let opts = ConvexRoofOptions {
            restarts: 4,
            ..Default::default()
        };
        let res = convex_roof_upper_bound(&rho, cut(2), &opts).unwrap();
        assert!(res.value < 1e-6, "value {}", res.value);
        assert!(max_abs_diff(&res.ensemble.reconstruct(), &rho) < 1e-9);
    }

    #[test]
    fn convex_roof_isotropic_qubits() {
        let rho = isotropic_state(iso(2, 0.9));
        let opts = ConvexRoofOptions {
            ensemble_size: Some(4),
            restarts: 20,
            ..Default::default()
        };
        let res = convex_roof_upper_bound(&rho, cut(2), &opts).unwrap();
        assert!((res.value - 0.8).abs() < 1e-4, "value {}", res.value);
        assert!(res.value >= negativity(&rho, cut(2)).unwrap() - 1e-8);
        assert_eq!(res.ensemble.len(), 4);
    }

    #[test]
    fn convex_roof_is_deterministic_and_monotone_in_restarts() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let rho = random::density_matrix_of_rank(4, 2, &mut rng);
        let run = |restarts| {
            let opts = ConvexRoofOptions {
                restarts,
                max_iterations: 200,
                seed: 5,
                ..Default::default()
            };
            convex_roof_upper_bound(&rho, cut(2), &opts).unwrap().value
        };
        let a = run(3);
        assert_eq!(a, run(3));
        let b = run(6);
        assert!(b <= a);
        assert!(b >= negativity(&rho, cut(2)).unwrap() - 1e-8);
    }

    #[test]
    fn convex_roof_errors() {
        let rho = isotropic_state(iso(2, 0.7));
        let opts = ConvexRoofOptions {
            ensemble_size: Some(3),
            ..Default::default()
        };
        assert_eq!(
            convex_roof_upper_bound(&rho, cut(2), &opts).unwrap_err(),
            Error::EnsembleTooSmall { m: 3, rank: 4 }
        );
        let mut non_psd = tensor::identity(4).unscale(4.0);
        non_psd[(0, 0)] = c64(-0.25, 0.0);
        non_psd[(1, 1)] = c64(0.75, 0.0);
        assert!(matches!(
            convex_roof_upper_bound(&non_psd, cut(2), &ConvexRoofOptions::default()),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        for d in 2..=4 {
            let phi = random::pure_state(d * d, &mut rng);
            let u = kron(&random::unitary(d, &mut rng), &random::unitary(d, &mut rng));
            let rotated = StateVector::normalized(&u * phi.amplitudes()).unwrap();
            let diff = cren_pure(&rotated, cut(d)).unwrap() - cren_pure(&phi, cut(d)).unwrap();
            assert!(diff.abs() < 1e-10);
        }
    }
}
