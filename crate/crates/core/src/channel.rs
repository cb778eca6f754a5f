//! The generalized depolarizing channel and its Choi state.

use crate::error::{Error, Result};
use crate::qudit::{self, pauli, validate_fidelity, PauliLabel, QuditDim};
use crate::tensor::{identity, kron, max_abs_diff, ComplexMatrix, SubsystemShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `$_F`: keeps the input with weight `F` and spreads `1-F` evenly over
/// the `d²-1` non-identity Pauli conjugations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizingChannel {
    d: QuditDim,
    fidelity: f64,
}

impl DepolarizingChannel {
    pub fn new(d: QuditDim, fidelity: f64) -> Result<Self> {
        Ok(Self {
            d,
            fidelity: validate_fidelity(fidelity)?,
        })
    }

    pub fn dim(&self) -> QuditDim {
        self.d
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    /// Probability attached to the conjugation by `label`.
    pub fn weight(&self, label: PauliLabel) -> f64 {
        if label.is_identity() {
            self.fidelity
        } else {
            let n = self.d.get() * self.d.get();
            (1.0 - self.fidelity) / (n as f64 - 1.0)
        }
    }

    /// `(w, P)` for every Pauli in `k`-major order; the Kraus operators are `√w P`.
    fn terms(&self) -> impl Iterator<Item = (f64, ComplexMatrix)> + '_ {
        self.d
            .labels()
            .map(|label| (self.weight(label), pauli(label)))
    }

    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        self.terms().map(|(w, p)| p.scale(w.sqrt())).collect()
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.d.get();
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "channel on d={d} applied to {}x{} matrix",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(conjugation_sum(self.terms(), rho, d))
    }

    /// `(I ⊗ $_F)(ρ)` for [`Side::Right`], `($_F ⊗ I)(ρ)` for [`Side::Left`].
    pub fn apply_one_sided(
        &self,
        side: Side,
        rho: &ComplexMatrix,
        shape: &SubsystemShape,
    ) -> Result<ComplexMatrix> {
        if shape.len() != 2 {
            return Err(Error::NotBipartite(shape.len()));
        }
        let (da, db) = (shape.dims()[0], shape.dims()[1]);
        let acted = match side {
            Side::Left => da,
            Side::Right => db,
        };
        if acted != self.d.get() {
            return Err(Error::DimensionMismatch(format!(
                "channel on d={} acting on a factor of dimension {acted}",
                self.d
            )));
        }
        let n = da * db;
        if rho.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix paired with shape {:?}",
                rho.nrows(),
                rho.ncols(),
                shape.dims()
            )));
        }
        let terms = self.terms().map(|(w, p)| {
            let k = match side {
                Side::Left => kron(&p, &identity(db)),
                Side::Right => kron(&identity(da), &p),
            };
            (w, k)
        });
        Ok(conjugation_sum(terms, rho, n))
    }

    /// `(I ⊗ $_F)(|Φ+⟩⟨Φ+|)`
    pub fn choi_state(&self) -> ComplexMatrix {
        let d = self.d.get();
        let shape = SubsystemShape::bipartite(d, d).expect("d >= 2");
        self.apply_one_sided(Side::Right, &qudit::phi_plus(self.d).projector(), &shape)
            .expect("Choi input matches the channel dimension")
    }

    /// `max |$(PρP†) - P$(ρ)P†|` entrywise.
    pub fn pauli_covariance_deviation(
        &self,
        rho: &ComplexMatrix,
        label: PauliLabel,
    ) -> Result<f64> {
        if label.dim() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "label for d={} on channel with d={}",
                label.dim(),
                self.d
            )));
        }
        let p = pauli(label);
        let lhs = self.apply(&(&p * rho * p.adjoint()))?;
        let rhs = &p * self.apply(rho)? * p.adjoint();
        Ok(max_abs_diff(&lhs, &rhs))
    }
}

/// `Σ w K ρ K†` in the iterator's order.
fn conjugation_sum(
    terms: impl Iterator<Item = (f64, ComplexMatrix)>,
    rho: &ComplexMatrix,
    n: usize,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n, n);
    for (w, k) in terms {
        if w == 0.0 {
            continue;
        }
        out += (&k * rho * k.adjoint()).scale(w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{isotropic_state, IsotropicParams};
    use crate::random;
    use crate::tensor::{hermitian_eigenvalues, trace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(d: usize) -> QuditDim {
        QuditDim::new(d).unwrap()
    }

    #[test]
    fn identity_at_unit_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = DepolarizingChannel::new(dim(3), 1.0).unwrap();
        let rho = random::density_matrix(3, &mut rng);
        assert!(max_abs_diff(&ch.apply(&rho).unwrap(), &rho) < 1e-15);
        let shape = SubsystemShape::bipartite(3, 3).unwrap();
        let big = random::density_matrix(9, &mut rng);
        for side in [Side::Left, Side::Right] {
            assert!(max_abs_diff(&ch.apply_one_sided(side, &big, &shape).unwrap(), &big) < 1e-15);
        }
    }

    #[test]
    fn trace_preserving_and_unital() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 2..=5 {
            for f in [0.0, 0.3, 0.77, 1.0] {
                let ch = DepolarizingChannel::new(dim(d), f).unwrap();
                let rho = random::density_matrix(d, &mut rng);
                let out = ch.apply(&rho).unwrap();
                assert!((trace(&out) - trace(&rho)).norm() <= 1e-12);
                let mixed = identity(d).unscale(d as f64);
                // oracle: explicit double loop over all d² shifts and phases
                let mut direct = ComplexMatrix::zeros(d, d);
                for j in 0..d {
                    for k in 0..d {
                        let p = qudit::shift(dim(d), j) * qudit::clock(dim(d), k);
                        let w = if j == 0 && k == 0 {
                            f
                        } else {
                            (1.0 - f) / (d * d - 1) as f64
                        };
                        direct += (&p * &mixed * p.adjoint()).scale(w);
                    }
                }
                assert!(max_abs_diff(&direct, &mixed) < 1e-14);
                assert!(max_abs_diff(&ch.apply(&mixed).unwrap(), &mixed) < 1e-14);
            }
        }
    }

    #[test]
    fn kraus_completeness() {
        for d in 2..=4 {
            let ch = DepolarizingChannel::new(dim(d), 0.42).unwrap();
            let sum = ch
                .kraus_operators()
                .iter()
                .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
            assert!(max_abs_diff(&sum, &identity(d)) < 1e-14);
        }
    }

    #[test]
    fn dimension_errors() {
        let ch = DepolarizingChannel::new(dim(3), 0.5).unwrap();
        assert!(matches!(
            ch.apply(&identity(2)),
            Err(Error::DimensionMismatch(_))
        ));
        let shape = SubsystemShape::bipartite(2, 3).unwrap();
        assert!(ch
            .apply_one_sided(Side::Right, &identity(6), &shape)
            .is_ok());
        assert!(matches!(
            ch.apply_one_sided(Side::Left, &identity(6), &shape),
            Err(Error::DimensionMismatch(_))
        ));
        let tri = SubsystemShape::new(vec![3, 3, 3]).unwrap();
        assert_eq!(
            ch.apply_one_sided(Side::Left, &identity(27), &tri),
            Err(Error::NotBipartite(3))
        );
        assert!(DepolarizingChannel::new(dim(3), 1.01).is_err());
    }

    #[test]
    fn choi_states_are_isotropic() {
        for d in 2..=6 {
            let q = dim(d);
            let shape = SubsystemShape::bipartite(d, d).unwrap();
            let phi = qudit::phi_plus(q).projector();
            for i in 0..=10 {
                let f = i as f64 / 10.0;
                let ch = DepolarizingChannel::new(q, f).unwrap();
                let iso = isotropic_state(IsotropicParams::new(q, f).unwrap());
                let left = ch.apply_one_sided(Side::Left, &phi, &shape).unwrap();
                let right = ch.apply_one_sided(Side::Right, &phi, &shape).unwrap();
                assert!(max_abs_diff(&left, &iso) <= 1e-12);
                assert!(max_abs_diff(&right, &iso) <= 1e-12);
                let min = *hermitian_eigenvalues(&ch.choi_state())
                    .unwrap()
                    .last()
                    .unwrap();
                assert!(min >= -1e-10);
            }
        }
        let ch = DepolarizingChannel::new(dim(3), 0.7).unwrap();
        let iso = isotropic_state(IsotropicParams::new(dim(3), 0.7).unwrap());
        assert!(max_abs_diff(&ch.choi_state(), &iso) <= 1e-12);
    }

    #[test]
    fn one_sided_on_isotropic_mixes_with_identity() {
        for d in 2..=4 {
            let q = dim(d);
            let n = (d * d) as f64;
            let shape = SubsystemShape::bipartite(d, d).unwrap();
            for (f0, f1) in [(0.9, 0.8), (0.3, 0.6), (1.0, 0.25)] {
                let rho = isotropic_state(IsotropicParams::new(q, f0).unwrap());
                let ch = DepolarizingChannel::new(q, f1).unwrap();
                let got = ch.apply_one_sided(Side::Right, &rho, &shape).unwrap();
                let expected =
                    (rho.scale(n * f1 - 1.0) + identity(d * d).scale(1.0 - f1)).unscale(n - 1.0);
                assert!(max_abs_diff(&got, &expected) < 1e-13);
            }
        }
    }

    #[test]
    fn covariance_with_paulis() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d2 = dim(2);
        let ch = DepolarizingChannel::new(d2, 0.83).unwrap();
        let rho = random::density_matrix(2, &mut rng);
        assert_eq!(
            ch.pauli_covariance_deviation(&rho, PauliLabel::identity(d2))
                .unwrap(),
            0.0
        );
        let xz = PauliLabel::new(1, 1, d2).unwrap();
        assert!(ch.pauli_covariance_deviation(&rho, xz).unwrap() <= 1e-12);

        let d5 = dim(5);
        use rand::Rng;
        for _ in 0..100 {
            let ch = DepolarizingChannel::new(d5, rng.random::<f64>()).unwrap();
            let rho = random::hermitian(5, &mut rng);
            let label =
                PauliLabel::new(rng.random_range(0..5), rng.random_range(0..5), d5).unwrap();
            assert!(ch.pauli_covariance_deviation(&rho, label).unwrap() <= 1e-10);
        }
    }
}
