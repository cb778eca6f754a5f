//! Dense complex linear algebra and multipartite index bookkeeping.
//!
//! Every matrix in the crate is a [`ComplexMatrix`] indexed `(row, col)`.
//! Composite indices are big-endian: for a shape `[d0, d1, ..., dn]` the
//! factor 0 digit is the most significant, so `|i0 i1 ... in⟩` sits at
//! `((i0 * d1 + i1) * d2 + i2) ...`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_TOL, 0)` are clipped to zero, anything lower is rejected.
pub const PSD_TOL: f64 = 1e-8;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Ordered local dimensions of a multipartite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::DimensionMismatch("empty subsystem shape".into()));
        }
        if let Some(&bad) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(bad));
        }
        Ok(Self { dims })
    }

    pub fn bipartite(da: usize, db: usize) -> Result<Self> {
        Self::new(vec![da, db])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Shape obtained by reordering factors so that new factor `q` is old factor `perm[q]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Ok(Self {
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
        })
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.nrows() != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix paired with shape {:?}",
                m.nrows(),
                m.ncols(),
                self.dims
            )));
        }
        Ok(())
    }
}

/// Offsets of every multi-index over the factors `factors`, enumerated big-endian.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &base in &out {
            for digit in 0..dims[f] {
                next.push(base + digit * strides[f]);
            }
        }
        out = next;
    }
    out
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub const NORM_TOL: f64 = 1e-12;

    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || (norm * norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = c64(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(&self) -> ComplexMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// `(op)|ψ⟩`, which must again be normalized (e.g. `op` unitary).
    pub fn apply(&self, op: &ComplexMatrix) -> Result<StateVector> {
        if op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a {}-dim state",
                op.nrows(),
                op.ncols(),
                self.dim()
            )));
        }
        Self::new(op * &self.amplitudes)
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn max_abs_entry(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff on mismatched shapes");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |A[i][j] - conj(A[j][i])|`, or infinity for non-square input.
pub fn hermitian_deviation(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(a: &ComplexMatrix) -> bool {
    hermitian_deviation(a) <= HERMITIAN_TOL * max_abs_entry(a).max(1.0)
}

/// `|U^† U - I|_max`
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.ncols()))
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.trace()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// Number of eigenvalues strictly above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> usize {
        self.values.iter().take_while(|&&v| v > cutoff).count()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.vectors.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (i, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(i);
            out += (v * v.adjoint()).scale(lam);
        }
        out
    }
}

fn ensure_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolve on {}x{} matrix",
            h.nrows(),
            h.ncols()
        )));
    }
    let dev = hermitian_deviation(h);
    if dev > HERMITIAN_TOL * max_abs_entry(h).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok((h + h.adjoint()).unscale(2.0))
}

pub fn hermitian_eigh(h: &ComplexMatrix) -> Result<Eigh> {
    let sym = ensure_hermitian(h)?;
    let eig = SymmetricEigen::try_new(sym, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(Eigh { values, vectors })
}

/// Real eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let sym = ensure_hermitian(h)?;
    let values = SymmetricEigen::try_new(sym, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure)?
        .eigenvalues;
    let mut values: Vec<f64> = values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `tr √ρ` for a positive semidefinite `ρ`.
pub fn trace_sqrt(rho: &ComplexMatrix) -> Result<f64> {
    let values = hermitian_eigenvalues(rho)?;
    if let Some(&min) = values.last() {
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
    }
    Ok(values.iter().map(|&v| v.max(0.0).sqrt()).sum())
}

/// Schatten 1-norm of a Hermitian matrix.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.iter().map(|v| v.abs()).sum())
}

/// Reduced matrix on the factors in `keep`, ordered as listed.
pub fn partial_trace(
    rho: &ComplexMatrix,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    shape.check_square(rho)?;
    let n = shape.len();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            count: n,
        });
    }
    let mut seen = vec![false; n];
    for &k in keep {
        if seen[k] {
            return Err(Error::InvalidSelection(keep.to_vec()));
        }
        seen[k] = true;
    }
    let traced: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();

    let dims = shape.dims();
    let strides = shape.strides();
    let kept_off = offsets(dims, &strides, keep);
    let traced_off = offsets(dims, &strides, &traced);

    let m = kept_off.len();
    Ok(ComplexMatrix::from_fn(m, m, |a, b| {
        let (ra, cb) = (kept_off[a], kept_off[b]);
        traced_off
            .iter()
            .map(|&t| rho[(ra + t, cb + t)])
            .sum::<C64>()
    }))
}

/// Transposes the indices of one factor of a bipartite operator.
pub fn partial_transpose(
    rho: &ComplexMatrix,
    shape: &SubsystemShape,
    subsystem: usize,
) -> Result<ComplexMatrix> {
    if shape.len() != 2 {
        return Err(Error::NotBipartite(shape.len()));
    }
    shape.check_square(rho)?;
    if subsystem >= 2 {
        return Err(Error::IndexOutOfRange {
            index: subsystem,
            count: 2,
        });
    }
    let (da, db) = (shape.dims()[0], shape.dims()[1]);
    let n = da * db;
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        if subsystem == 1 {
            rho[(i * db + l, k * db + j)]
        } else {
            rho[(k * db + j, i * db + l)]
        }
    }))
}

/// Reorders tensor factors: factor `q` of the result is factor `perm[q]` of the input.
pub fn permute_subsystems(
    rho: &ComplexMatrix,
    shape: &SubsystemShape,
    perm: &[usize],
) -> Result<ComplexMatrix> {
    shape.check_square(rho)?;
    check_permutation(perm, shape.len())?;
    // enumerating the permuted factors big-endian with the old strides yields,
    // in new-index order, the old index of every basis element
    let old_index = offsets(shape.dims(), &shape.strides(), perm);
    let n = old_index.len();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        rho[(old_index[r], old_index[c])]
    }))
}
