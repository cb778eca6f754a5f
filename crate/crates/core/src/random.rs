//! Random states and unitaries for optimizer starts and randomized checks.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::tensor::{c64, ComplexMatrix, StateVector, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of `R` removed).
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            c64(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    let v = DVector::from_fn(n, |_, _| gaussian(rng));
    StateVector::normalized(v).expect("gaussian vector is non-zero")
}

/// Full-rank density matrix `G G^† / tr(G G^†)`.
pub fn density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// Density matrix of rank `rank`.
pub fn density_matrix_of_rank<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    rng: &mut R,
) -> ComplexMatrix {
    let g = ginibre(n, rank, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()).unscale(2.0)
}
