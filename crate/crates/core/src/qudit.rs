//! Generalized Pauli operators, the generalized Bell basis and isotropic states.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::tensor::{c64, identity, ComplexMatrix, StateVector, C64};

/// Local dimension `d ≥ 2` of a qudit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuditDim(usize);

impl QuditDim {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self(d))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `ω = e^{2πi/d}`
    pub fn omega(self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI / self.0 as f64)
    }

    /// Table of `ω^0, ..., ω^{d-1}` built by repeated multiplication of `ω`.
    pub fn roots(self) -> Vec<C64> {
        let omega = self.omega();
        let mut out = Vec::with_capacity(self.0);
        let mut acc = c64(1.0, 0.0);
        for _ in 0..self.0 {
            out.push(acc);
            acc *= omega;
        }
        out
    }

    /// `ω^e` with the exponent reduced mod `d`.
    pub fn omega_pow(self, e: i64) -> C64 {
        self.roots()[e.rem_euclid(self.0 as i64) as usize]
    }

    /// Every label `(k, l)` in `k`-major order.
    pub fn labels(self) -> impl Iterator<Item = PauliLabel> {
        let d = self.0;
        (0..d).flat_map(move |k| {
            (0..d).map(move |l| PauliLabel {
                k,
                l,
                d: QuditDim(d),
            })
        })
    }
}

impl TryFrom<usize> for QuditDim {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Self::new(d)
    }
}

impl std::fmt::Display for QuditDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// The label of `X^k Z^l`: `k` is the shift, `l` the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliLabel {
    k: usize,
    l: usize,
    d: QuditDim,
}

impl PauliLabel {
    pub fn new(k: usize, l: usize, d: QuditDim) -> Result<Self> {
        if k >= d.get() || l >= d.get() {
            return Err(Error::LabelOutOfRange { k, l, d: d.get() });
        }
        Ok(Self { k, l, d })
    }

    pub fn identity(d: QuditDim) -> Self {
        Self { k: 0, l: 0, d }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> QuditDim {
        self.d
    }

    pub fn is_identity(&self) -> bool {
        self.k == 0 && self.l == 0
    }
}

impl std::fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

/// Cyclic shift `X^power`, `X|j⟩ = |j+1 mod d⟩`.
pub fn shift(d: QuditDim, power: usize) -> ComplexMatrix {
    let n = d.get();
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        m[((j + power) % n, j)] = c64(1.0, 0.0);
    }
    m
}

/// Clock `Z^power`, `Z|j⟩ = ω^j |j⟩`.
pub fn clock(d: QuditDim, power: usize) -> ComplexMatrix {
    let n = d.get();
    let roots = d.roots();
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = roots[(j * power) % n];
    }
    m
}

/// `X^k Z^l`, mapping `|j⟩ ↦ ω^{jl} |j+k⟩`.
pub fn pauli(label: PauliLabel) -> ComplexMatrix {
    let n = label.d.get();
    let roots = label.d.roots();
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        m[((j + label.k) % n, j)] = roots[(j * label.l) % n];
    }
    m
}

/// `|Ψ_{k,l}⟩ = d^{-1/2} Σ_j ω^{jl} |j, j+k⟩`.
pub fn bell_state(label: PauliLabel) -> StateVector {
    let n = label.d.get();
    let roots = label.d.roots();
    let amp = 1.0 / (n as f64).sqrt();
    let mut v = DVector::zeros(n * n);
    for j in 0..n {
        v[j * n + (j + label.k) % n] = roots[(j * label.l) % n] * amp;
    }
    StateVector::new(v).expect("Bell state has unit norm")
}

/// `|Φ+⟩ = |Ψ_{0,0}⟩`
pub fn phi_plus(d: QuditDim) -> StateVector {
    bell_state(PauliLabel::identity(d))
}

fn check_fidelity(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::FidelityOutOfRange(f));
    }
    Ok(())
}

/// `(d, F)` for an isotropic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicParams {
    d: QuditDim,
    fidelity: f64,
}

impl IsotropicParams {
    pub fn new(d: QuditDim, fidelity: f64) -> Result<Self> {
        check_fidelity(fidelity)?;
        Ok(Self { d, fidelity })
    }

    pub fn dim(&self) -> QuditDim {
        self.d
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }
}

pub(crate) fn validate_fidelity(f: f64) -> Result<f64> {
    check_fidelity(f).map(|_| f)
}

/// `ρ_F = F |Φ+⟩⟨Φ+| + (1-F)/(d²-1) (I - |Φ+⟩⟨Φ+|)`.
pub fn isotropic_state(p: IsotropicParams) -> ComplexMatrix {
    let d = p.d.get();
    let n = d * d;
    let f = p.fidelity;
    let noise = (1.0 - f) / (n as f64 - 1.0);
    let proj = phi_plus(p.d).projector();
    let complement = identity(n) - &proj;
    proj.scale(f) + complement.scale(noise)
}
