//! Dense complex linear algebra for a single `d`-level system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical_types::{entropy_bits, Distribution};
use crate::error::{Error, Result};

/// Carrier for every operator in the crate.
pub type ComplexMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix, and the clamp applied
/// to spectra before taking logarithms.
pub const PSD_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const EIGEN_CLUSTER_GAP: f64 = 1e-10;
/// Largest single-system dimension handled densely.
pub const MAX_SYSTEM_DIM: usize = 64;

pub(crate) fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

fn check_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    let (r, c) = m.shape();
    if r == 0 || r != c {
        return Err(Error::validation(format!("{what} must be square and non-empty, got {r}x{c}")));
    }
    if r > MAX_SYSTEM_DIM {
        return Err(Error::validation(format!("{what} has dimension {r}, above the dense limit {MAX_SYSTEM_DIM}")));
    }
    Ok(r)
}

/// A Hermitian, positive semidefinite, unit-trace `d x d` operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix, "density matrix")?;
        let asym = max_abs(&(&matrix - matrix.adjoint()));
        if asym > HERMITIAN_TOL {
            return Err(Error::validation(format!(
                "density matrix is not Hermitian: max|M - M^dagger| = {asym:e} exceeds {HERMITIAN_TOL:e}"
            )));
        }
        let tr = matrix.trace();
        let tr_err = (tr - Complex64::new(1.0, 0.0)).norm();
        if tr_err > TRACE_TOL {
            return Err(Error::validation(format!(
                "density matrix trace is {}, |tr - 1| = {tr_err:.3e} exceeds {TRACE_TOL:e}",
                tr.re
            )));
        }
        let hermitian = hermitize(&matrix);
        let smallest = hermitian.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if !smallest.is_finite() {
            return Err(Error::Numeric("eigenvalues of density matrix are not finite".into()));
        }
        if smallest < -PSD_TOL {
            return Err(Error::validation(format!(
                "density matrix is not positive semidefinite: smallest eigenvalue {smallest:e} is below -{PSD_TOL:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let dist = Distribution::new(probs.to_vec())?;
        check_dim(dist.len())?;
        let diag = DVector::from_iterator(dist.len(), dist.probs().iter().map(|&p| Complex64::new(p, 0.0)));
        Ok(Self { matrix: ComplexMatrix::from_diagonal(&diag) })
    }

    /// `|e_k><e_k|` for the 0-based standard basis index `k`.
    pub fn pure(d: usize, k: usize) -> Result<Self> {
        check_dim(d)?;
        if k >= d {
            return Err(Error::validation(format!("basis index {k} out of range for d = {d}")));
        }
        let mut matrix = ComplexMatrix::zeros(d, d);
        matrix[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(Self { matrix })
    }

    /// `|psi><psi|` for a non-zero state vector (normalised here).
    pub fn from_pure_state(psi: &DVector<Complex64>) -> Result<Self> {
        check_dim(psi.len())?;
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validation("state vector must be non-zero and finite"));
        }
        let v = psi.unscale(norm);
        Ok(Self { matrix: &v * v.adjoint() })
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self { matrix: identity(d).unscale(d as f64) })
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `V rho V^dagger`.
    pub fn conjugated(&self, v: &ComplexMatrix) -> Result<Self> {
        if v.shape() != self.matrix.shape() {
            return Err(Error::validation("conjugating unitary has the wrong shape"));
        }
        Ok(Self { matrix: hermitize(&(v * &self.matrix * v.adjoint())) })
    }

    /// Parses the `{"d": .., "re": [[..]], "im": [[..]]}` interchange format.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: DensityMatrixJson =
            serde_json::from_str(text).map_err(|e| Error::validation(format!("invalid density-matrix JSON: {e}")))?;
        raw.try_into()
    }

    pub fn to_json(&self) -> DensityMatrixJson {
        let d = self.d();
        DensityMatrixJson {
            d,
            re: (0..d).map(|i| (0..d).map(|j| self.matrix[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| self.matrix[(i, j)].im).collect()).collect(),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_SYSTEM_DIM {
        return Err(Error::validation(format!("dimension {d} outside 1..={MAX_SYSTEM_DIM}")));
    }
    Ok(())
}

pub(crate) fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).unscale(2.0)
}

/// Row-major JSON form of a density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityMatrixJson {
    pub d: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(raw: DensityMatrixJson) -> Result<Self> {
        let d = raw.d;
        check_dim(d)?;
        for (name, rows) in [("re", &raw.re), ("im", &raw.im)] {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::validation(format!("field \"{name}\" must be a {d}x{d} array")));
            }
            if rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::validation(format!("field \"{name}\" has non-finite entries")));
            }
        }
        let matrix = ComplexMatrix::from_fn(d, d, |i, j| Complex64::new(raw.re[i][j], raw.im[i][j]));
        DensityMatrix::new(matrix)
    }
}

/// A unitary whose columns are the basis vectors `|e_1>, .., |e_d>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    matrix: ComplexMatrix,
}

impl OrthonormalBasis {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = check_square(&matrix, "basis")?;
        let err = unitarity_error(&matrix);
        if err > UNITARY_TOL {
            return Err(Error::validation(format!(
                "basis is not orthonormal: max|U^dagger U - I| = {err:e} exceeds {UNITARY_TOL:e} (d = {d})"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn standard(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self { matrix: identity(d) })
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The `i`-th basis vector (0-based).
    pub fn vector(&self, i: usize) -> DVector<Complex64> {
        self.matrix.column(i).into_owned()
    }

    /// The basis `{V |e_i>}`.
    pub fn transformed(&self, v: &ComplexMatrix) -> Result<Self> {
        if v.shape() != self.matrix.shape() {
            return Err(Error::validation("transforming unitary has the wrong shape"));
        }
        Ok(Self { matrix: v * &self.matrix })
    }
}

/// `max|U^dagger U - I|`.
pub fn unitarity_error(u: &ComplexMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.ncols())))
}

/// Eigenvalues (descending) and an eigenbasis of a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenbasis: OrthonormalBasis,
}

impl SpectralDecomposition {
    /// `sum_k lambda_k |e_k><e_k|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.eigenbasis.matrix();
        let diag =
            DVector::from_iterator(self.eigenvalues.len(), self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)));
        v * ComplexMatrix::from_diagonal(&diag) * v.adjoint()
    }
}

/// Hermitian eigendecomposition with a deterministic eigenvector convention:
/// eigenvalues sorted descending, vectors inside a degenerate cluster
/// re-orthonormalised in order, and each vector's first component of largest
/// magnitude made real and positive.
pub fn spectral_decomposition(rho: &DensityMatrix) -> Result<SpectralDecomposition> {
    hermitian_eigen(rho.matrix())
}

pub(crate) fn hermitian_eigen(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let d = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) || eig.eigenvectors.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numeric("Hermitian eigensolver returned non-finite values".into()));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors: Vec<DVector<Complex64>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && eigenvalues[end - 1] - eigenvalues[end] < EIGEN_CLUSTER_GAP {
            end += 1;
        }
        gram_schmidt(&mut vectors, start, end)?;
        start = end;
    }
    for v in vectors.iter_mut() {
        fix_phase(v);
    }
    let matrix = ComplexMatrix::from_columns(&vectors);
    Ok(SpectralDecomposition { eigenvalues, eigenbasis: OrthonormalBasis::from_matrix_unchecked(matrix) })
}

/// Modified Gram-Schmidt on `vectors[start..end]` against all earlier ones.
fn gram_schmidt(vectors: &mut [DVector<Complex64>], start: usize, end: usize) -> Result<()> {
    for i in start..end {
        let (done, rest) = vectors.split_at_mut(i);
        let v = &mut rest[0];
        for u in &done[start..] {
            let proj = u.dotc(v);
            v.axpy(-proj, u, Complex64::new(1.0, 0.0));
        }
        let norm = v.norm();
        if norm < 0.5 {
            return Err(Error::Numeric("eigenvectors are numerically dependent".into()));
        }
        v.unscale_mut(norm);
    }
    Ok(())
}

/// Rotates `v` so its first component of (near-)largest magnitude is real
/// and positive.
pub(crate) fn fix_phase(v: &mut DVector<Complex64>) {
    let largest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if largest == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= largest - 1e-12).expect("some entry attains the maximum");
    let phase = v[pivot] / v[pivot].norm();
    v.apply(|z| *z /= phase);
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
}

/// `S(rho)` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let spectrum = spectral_decomposition(rho)?;
    let dist = Distribution::from_rounded(spectrum.eigenvalues, PSD_TOL)?;
    Ok(entropy_bits(dist.probs()))
}

fn check_same_dim(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<()> {
    if rho.d() != basis.d() {
        return Err(Error::validation(format!("density matrix has d = {} but basis has d = {}", rho.d(), basis.d())));
    }
    Ok(())
}

/// Raw diagonal `<e_i| rho |e_i>` without clamping or renormalisation.
pub(crate) fn raw_diagonal(rho: &ComplexMatrix, basis: &ComplexMatrix) -> Vec<f64> {
    (0..basis.ncols())
        .map(|i| {
            let e = basis.column(i);
            e.dotc(&(rho * e)).re
        })
        .collect()
}

/// Outcome distribution of measuring `rho` in `basis`.
pub fn measurement_diagonal(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<Distribution> {
    check_same_dim(rho, basis)?;
    Distribution::from_rounded(raw_diagonal(rho.matrix(), basis.matrix()), PSD_TOL)
}

/// `sum_i <e_i| rho |e_i> |e_i><e_i|`.
pub fn dephase(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<DensityMatrix> {
    let q = measurement_diagonal(rho, basis)?;
    let b = basis.matrix();
    let diag = DVector::from_iterator(q.len(), q.probs().iter().map(|&p| Complex64::new(p, 0.0)));
    let m = b * ComplexMatrix::from_diagonal(&diag) * b.adjoint();
    Ok(DensityMatrix::from_matrix_unchecked(hermitize(&m)))
}
