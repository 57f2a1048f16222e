//! Constructive search for a measurement basis whose dephased entropy hits a
//! prescribed target.
//!
//! Starting from the eigenbasis `B0` of `rho` (dephased entropy `S(rho)`), the
//! discrete Fourier rotation of `B0` gives a basis in which every outcome is
//! equally likely (entropy `log2 d`). The transition unitary `W` between the
//! two is interpolated along its eigenphases,
//! `U(t) = sum_s exp(i t theta_s) |w_s><w_s|`, so `U(0) = I` and `U(1) = W`.
//! The dephased entropy is continuous in `t`, so bisection on the sign change
//! of `S(t) - h` finds a basis with entropy `h` for any `h` in between.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::classical_types::{entropy_bits, Distribution};
use crate::error::{Error, Result};
use crate::quantum_state::{
    max_abs, raw_diagonal, spectral_decomposition, unitarity_error, ComplexMatrix, DensityMatrix, OrthonormalBasis,
    PSD_TOL,
};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_BISECTION_STEPS: usize = 200;
/// Eigenphases this close to `2 pi` are folded onto `0`.
const PHASE_WRAP_TOL: f64 = 1e-9;
/// Required agreement between `U(1)` and `W`.
const ENDPOINT_TOL: f64 = 1e-10;

/// `|e_l^1> = d^{-1/2} sum_k exp(2 pi i k l / d) |e_k^0>` with `k, l = 1..d`.
pub fn fourier_basis(b0: &OrthonormalBasis) -> OrthonormalBasis {
    let d = b0.d();
    let f = ComplexMatrix::from_fn(d, d, |k, l| {
        // reduce k*l mod d before forming the angle
        let kl = ((k + 1) * (l + 1)) % d;
        Complex64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * PI * kl as f64 / d as f64)
    });
    OrthonormalBasis::from_matrix_unchecked(b0.matrix() * f)
}

/// `W = sum_i |e_i^1><e_i^0|`.
pub fn transition_unitary(b0: &OrthonormalBasis, b1: &OrthonormalBasis) -> Result<ComplexMatrix> {
    if b0.d() != b1.d() {
        return Err(Error::validation(format!("bases have different dimensions ({} and {})", b0.d(), b1.d())));
    }
    Ok(b1.matrix() * b0.matrix().adjoint())
}

/// The one-parameter family `U(t)` from `I` to `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryPath {
    phase_axes: OrthonormalBasis,
    phases: Vec<f64>,
    base_basis: OrthonormalBasis,
    transition: ComplexMatrix,
}

impl UnitaryPath {
    /// Eigenvectors `|w_s>` of `W`.
    pub fn phase_axes(&self) -> &OrthonormalBasis {
        &self.phase_axes
    }

    /// Eigenphases `theta_s` of `W`, in `[0, 2 pi)`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The eigenbasis `B0` the path starts from.
    pub fn base_basis(&self) -> &OrthonormalBasis {
        &self.base_basis
    }

    pub fn transition(&self) -> &ComplexMatrix {
        &self.transition
    }

    pub fn d(&self) -> usize {
        self.phases.len()
    }

    fn unitary_unchecked(&self, t: f64) -> ComplexMatrix {
        let q = self.phase_axes.matrix();
        let diag = DVector::from_iterator(self.d(), self.phases.iter().map(|&th| Complex64::from_polar(1.0, t * th)));
        q * ComplexMatrix::from_diagonal(&diag) * q.adjoint()
    }

    /// The basis `U(t) B0`.
    pub fn basis_at(&self, t: f64) -> Result<OrthonormalBasis> {
        check_parameter(t)?;
        Ok(OrthonormalBasis::from_matrix_unchecked(self.unitary_unchecked(t) * self.base_basis.matrix()))
    }
}

fn check_parameter(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::validation(format!("path parameter t = {t} outside [0, 1]")));
    }
    Ok(())
}

fn check_dims(rho: &DensityMatrix, path: &UnitaryPath) -> Result<()> {
    if rho.d() != path.d() {
        return Err(Error::validation(format!("density matrix has d = {} but path has d = {}", rho.d(), path.d())));
    }
    Ok(())
}

fn principal_phase(z: Complex64) -> f64 {
    let mut theta = z.arg();
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    if 2.0 * PI - theta < PHASE_WRAP_TOL || theta >= 2.0 * PI {
        theta = 0.0;
    }
    theta
}

/// Eigendecomposition of a unitary through its Schur form, which is diagonal
/// for normal matrices.
fn unitary_eigen(w: &ComplexMatrix) -> Result<(OrthonormalBasis, Vec<f64>)> {
    let d = w.nrows();
    let (q, t) = w.clone().schur().unpack();
    let off_diag = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|ij| t[ij].norm())
        .fold(0.0, f64::max);
    if off_diag > ENDPOINT_TOL || unitarity_error(&q) > 1e-12 {
        return Err(Error::Numeric(format!(
            "Schur form of the transition unitary is not diagonal (off-diagonal {off_diag:e})"
        )));
    }
    let phases = (0..d).map(|s| principal_phase(t[(s, s)])).collect();
    Ok((OrthonormalBasis::from_matrix_unchecked(q), phases))
}

/// Builds `B0`, its Fourier rotation, `W`, and the eigenphase path of `W`.
pub fn build_path(rho: &DensityMatrix) -> Result<UnitaryPath> {
    let b0 = spectral_decomposition(rho)?.eigenbasis;
    let b1 = fourier_basis(&b0);
    let w = transition_unitary(&b0, &b1)?;
    let (phase_axes, phases) = unitary_eigen(&w)?;
    let path = UnitaryPath { phase_axes, phases, base_basis: b0, transition: w };
    let end_err = max_abs(&(path.unitary_unchecked(1.0) - &path.transition));
    if end_err > ENDPOINT_TOL {
        return Err(Error::Numeric(format!("path does not reach W at t = 1 (error {end_err:e})")));
    }
    Ok(path)
}

/// `U(t) = sum_s exp(i t theta_s) |w_s><w_s|`.
pub fn path_unitary(path: &UnitaryPath, t: f64) -> Result<ComplexMatrix> {
    check_parameter(t)?;
    Ok(path.unitary_unchecked(t))
}

/// Dephased entropy `S(t)` of `rho` measured in `U(t) B0`, in bits.
pub fn entropy_along_path(rho: &DensityMatrix, path: &UnitaryPath, t: f64) -> Result<f64> {
    check_dims(rho, path)?;
    let basis = path.basis_at(t)?;
    let q = Distribution::from_rounded(raw_diagonal(rho.matrix(), basis.matrix()), PSD_TOL)?;
    Ok(entropy_bits(q.probs()))
}

/// Outcome probabilities along the path from the explicit expansion
/// `p_i(t) = sum_k p_k |sum_s exp(i t theta_s) <e_k^0|w_s><w_s|e_i^0>|^2`,
/// without forming `U(t)`.
pub fn diagonal_probabilities_formula(rho: &DensityMatrix, path: &UnitaryPath, t: f64) -> Result<Distribution> {
    check_dims(rho, path)?;
    check_parameter(t)?;
    let d = path.d();
    let b0 = path.base_basis.matrix();
    // overlaps[(k, s)] = <e_k^0 | w_s>
    let overlaps = b0.adjoint() * path.phase_axes.matrix();
    let spectrum = raw_diagonal(rho.matrix(), b0);
    let phasors: Vec<Complex64> = path.phases.iter().map(|&th| Complex64::from_polar(1.0, t * th)).collect();
    let probs = (0..d)
        .map(|i| {
            (0..d)
                .map(|k| {
                    let amp: Complex64 = (0..d).map(|s| phasors[s] * overlaps[(k, s)] * overlaps[(i, s)].conj()).sum();
                    spectrum[k] * amp.norm_sqr()
                })
                .sum()
        })
        .collect();
    Distribution::from_rounded(probs, PSD_TOL)
}

/// A basis reached by the search.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSearchResult {
    pub basis: OrthonormalBasis,
    /// Path parameter `t*` in `[0, 1]`.
    pub parameter: f64,
    pub achieved_entropy: f64,
    pub iterations: usize,
}

/// Finds `B'` with `|S(dephase(rho, B')) - h| <= tol`.
pub fn find_target_basis(rho: &DensityMatrix, h: f64, tol: f64) -> Result<BasisSearchResult> {
    let path = build_path(rho)?;
    find_target_basis_on(rho, &path, h, tol)
}

/// As [`find_target_basis`], reusing a prebuilt path for `rho`.
pub fn find_target_basis_on(rho: &DensityMatrix, path: &UnitaryPath, h: f64, tol: f64) -> Result<BasisSearchResult> {
    check_dims(rho, path)?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::validation(format!("tolerance {tol} must be > 0")));
    }
    if !h.is_finite() {
        return Err(Error::validation("target entropy must be finite"));
    }
    let entropy = |t: f64| entropy_along_path(rho, path, t);
    let s_start = entropy(0.0)?;
    let s_end = entropy(1.0)?;
    let max_entropy = (rho.d() as f64).log2();
    if h < s_start - tol || h > max_entropy + tol {
        return Err(Error::domain(format!("target entropy {h} outside [S(rho), log2 d] = [{s_start}, {max_entropy}]")));
    }
    let done = |t: f64, s: f64, iterations: usize| -> Result<BasisSearchResult> {
        Ok(BasisSearchResult { basis: path.basis_at(t)?, parameter: t, achieved_entropy: s, iterations })
    };
    if (s_start - h).abs() <= tol {
        return done(0.0, s_start, 0);
    }
    if (s_end - h).abs() <= tol {
        return done(1.0, s_end, 0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut f_lo, mut f_hi) = (s_start - h, s_end - h);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Numeric(format!(
            "entropy residuals at the path endpoints do not bracket the target ({f_lo:e}, {f_hi:e})"
        )));
    }
    for iteration in 1..=MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = entropy(mid)?;
        let f = s - h;
        if f.abs() <= tol {
            return done(mid, s, iteration);
        }
        if f < 0.0 {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    Err(Error::Convergence { iterations: MAX_BISECTION_STEPS, lo, hi, f_lo, f_hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_types::shannon_entropy;
    use crate::quantum_state::{dephase, identity, measurement_diagonal, von_neumann_entropy};
    use crate::sampling::{haar_unitary, random_density_matrix, rng_for};

    fn binary_entropy(p: f64) -> f64 {
        entropy_bits(&[p, 1.0 - p])
    }

    /// Inverts the binary entropy on `[0, 1/2]` by plain bisection.
    fn inverse_binary_entropy(h: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if binary_entropy(mid) < h {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn fourier_examples() {
        let b = OrthonormalBasis::standard(1).unwrap();
        assert!(max_abs(&(fourier_basis(&b).matrix() - b.matrix())) < 1e-15);

        let f = fourier_basis(&OrthonormalBasis::standard(2).unwrap());
        let s = 0.5f64.sqrt();
        let expected = ComplexMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(-s, 0.0), Complex64::new(s, 0.0), Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        );
        assert!(max_abs(&(f.matrix() - expected)) < 1e-15);

        for d in [2, 3, 4, 5, 8] {
            let b0 = OrthonormalBasis::new(haar_unitary(d, &mut rng_for(d as u64, 0))).unwrap();
            let b1 = fourier_basis(&b0);
            assert!(unitarity_error(b1.matrix()) < 1e-12);
            let overlaps = b0.matrix().adjoint() * b1.matrix();
            assert!(overlaps.iter().all(|z| (z.norm_sqr() - 1.0 / d as f64).abs() < 1e-12));
            // any state diagonal in b0 looks uniform in b1
            let rho = random_density_matrix(d, &mut rng_for(d as u64, 1));
            let diag = dephase(&rho, &b0).unwrap();
            let q = measurement_diagonal(&diag, &b1).unwrap();
            assert!(q.probs().iter().all(|&p| (p - 1.0 / d as f64).abs() < 1e-12));
        }
    }

    #[test]
    fn transition_examples() {
        let b0 = OrthonormalBasis::new(haar_unitary(3, &mut rng_for(1, 1))).unwrap();
        let w = transition_unitary(&b0, &b0).unwrap();
        assert!(max_abs(&(w - identity(3))) < 1e-12);

        let std2 = OrthonormalBasis::standard(2).unwrap();
        let f = fourier_basis(&std2);
        let w = transition_unitary(&std2, &f).unwrap();
        assert!(max_abs(&(&w - f.matrix())) < 1e-15);

        let b1 = fourier_basis(&b0);
        let w = transition_unitary(&b0, &b1).unwrap();
        assert!(unitarity_error(&w) <= 1e-12);
        assert!(max_abs(&(&w * b0.matrix() - b1.matrix())) < 1e-12);
        assert!(transition_unitary(&b0, &std2).is_err());
    }

    #[test]
    fn path_endpoints_and_unitarity() {
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let path = build_path(&mixed).unwrap();
        assert!(max_abs(&(path_unitary(&path, 0.0).unwrap() - identity(3))) <= 1e-12);

        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let path = build_path(&rho).unwrap();
        assert!(max_abs(&(path_unitary(&path, 0.0).unwrap() - identity(2))) <= 1e-12);
        assert!(max_abs(&(path_unitary(&path, 1.0).unwrap() - path.transition())) <= 1e-10);
        assert!(path.phases().iter().all(|&th| (0.0..2.0 * PI).contains(&th)));

        for seed in 0..10 {
            let d = 2 + seed as usize % 4;
            let rho = random_density_matrix(d, &mut rng_for(seed, 3));
            let path = build_path(&rho).unwrap();
            for k in 0..20 {
                let t = k as f64 / 19.0;
                assert!(unitarity_error(&path_unitary(&path, t).unwrap()) <= 1e-12);
            }
            assert!(max_abs(&(path_unitary(&path, 1.0).unwrap() - path.transition())) <= 1e-10);
        }
        assert!(path_unitary(&path, 1.5).is_err());
        assert!(path_unitary(&path, -0.1).is_err());
    }

    #[test]
    fn path_is_a_one_parameter_group() {
        let rho = random_density_matrix(2, &mut rng_for(4, 4));
        let path = build_path(&rho).unwrap();
        let half = path_unitary(&path, 0.5).unwrap();
        // d = 2 Fourier transition has two distinct eigenphases; the square
        // root still squares back to W
        assert!(max_abs(&(&half * &half - path.transition())) < 1e-10);
        for (s, t) in [(0.1, 0.2), (0.37, 0.5), (0.25, 0.75)] {
            let lhs = path_unitary(&path, s).unwrap() * path_unitary(&path, t).unwrap();
            let rhs = path_unitary(&path, s + t).unwrap();
            assert!(max_abs(&(lhs - rhs)) < 1e-10);
        }
    }

    #[test]
    fn entropy_endpoints() {
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let path = build_path(&rho).unwrap();
        assert!((entropy_along_path(&rho, &path, 0.0).unwrap() - 0.468_995_593_589_281_2).abs() < 1e-9);
        assert!((entropy_along_path(&rho, &path, 1.0).unwrap() - 1.0).abs() < 1e-9);
        let pure = DensityMatrix::pure(2, 0).unwrap();
        let path = build_path(&pure).unwrap();
        assert!(entropy_along_path(&pure, &path, 0.0).unwrap().abs() < 1e-9);
        assert!(entropy_along_path(&pure, &path, 2.0).is_err());
    }

    #[test]
    fn grid_stays_in_range_and_matches_formula() {
        for seed in 0..6 {
            let d = 2 + seed as usize % 3;
            let rho = random_density_matrix(d, &mut rng_for(seed, 17));
            let path = build_path(&rho).unwrap();
            for k in 0..=100 {
                let t = k as f64 / 100.0;
                let s = entropy_along_path(&rho, &path, t).unwrap();
                assert!((0.0..=(d as f64).log2() + 1e-12).contains(&s));
                let formula = shannon_entropy(&diagonal_probabilities_formula(&rho, &path, t).unwrap());
                assert!((s - formula).abs() < 1e-12);
                let deph = dephase(&rho, &path.basis_at(t).unwrap()).unwrap();
                assert!((von_neumann_entropy(&deph).unwrap() - s).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn formula_examples() {
        let rho = random_density_matrix(2, &mut rng_for(8, 8));
        let path = build_path(&rho).unwrap();
        let spectrum = spectral_decomposition(&rho).unwrap().eigenvalues;
        let p0 = diagonal_probabilities_formula(&rho, &path, 0.0).unwrap();
        for (a, b) in p0.probs().iter().zip(&spectrum) {
            assert!((a - b).abs() < 1e-12);
        }
        let p1 = diagonal_probabilities_formula(&rho, &path, 1.0).unwrap();
        assert!(p1.probs().iter().all(|&p| (p - 0.5).abs() < 1e-12));
        let direct = measurement_diagonal(&rho, &path.basis_at(0.37).unwrap()).unwrap();
        let formula = diagonal_probabilities_formula(&rho, &path, 0.37).unwrap();
        for (a, b) in direct.probs().iter().zip(formula.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn search_endpoints() {
        let rho = random_density_matrix(3, &mut rng_for(2, 2));
        let s = von_neumann_entropy(&rho).unwrap();
        let r = find_target_basis(&rho, s, DEFAULT_TOL).unwrap();
        assert_eq!(r.parameter, 0.0);
        let eig = spectral_decomposition(&rho).unwrap().eigenbasis;
        assert!(max_abs(&(r.basis.matrix() - eig.matrix())) < 1e-12);

        let r = find_target_basis(&rho, 3f64.log2(), DEFAULT_TOL).unwrap();
        assert_eq!(r.parameter, 1.0);
        assert!(max_abs(&(r.basis.matrix() - fourier_basis(&eig).matrix())) < 1e-10);
    }

    #[test]
    fn search_inverts_binary_entropy_for_pure_state() {
        let pure = DensityMatrix::pure(2, 0).unwrap();
        let r = find_target_basis(&pure, 0.5, 1e-9).unwrap();
        assert!((r.achieved_entropy - 0.5).abs() <= 1e-9);
        assert!(r.iterations <= MAX_BISECTION_STEPS);
        let p = inverse_binary_entropy(0.5);
        assert!((p - 0.110_028).abs() < 1e-6);
        let q = measurement_diagonal(&pure, &r.basis).unwrap();
        let q_min = q.probs()[0].min(q.probs()[1]);
        assert!((q_min - p).abs() < 1e-8, "{q_min} vs {p}");
        let deph = dephase(&pure, &r.basis).unwrap();
        assert!((von_neumann_entropy(&deph).unwrap() - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn search_domain_errors() {
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        assert!(matches!(find_target_basis(&rho, 0.3, 1e-9), Err(Error::Domain(_))));
        assert!(matches!(find_target_basis(&rho, 1.2, 1e-9), Err(Error::Domain(_))));
        assert!(matches!(find_target_basis(&rho, 0.7, 0.0), Err(Error::Validation(_))));
    }

    #[test]
    fn search_is_conjugation_invariant() {
        let rho = DensityMatrix::from_diagonal(&[0.7, 0.2, 0.1]).unwrap();
        let v = haar_unitary(3, &mut rng_for(12, 0));
        let rotated = rho.conjugated(&v).unwrap();
        let a = find_target_basis(&rho, 1.3, 1e-11).unwrap();
        let b = find_target_basis(&rotated, 1.3, 1e-11).unwrap();
        assert!((a.parameter - b.parameter).abs() < 1e-8);
    }
}
