//! Projective compression channel on the block space `(C^d)^{(x)n}`.
//!
//! `C(sigma) = Pi sigma Pi + sum_u E_u sigma E_u^dagger` with
//! `E_u = |0><u|`: the typical component is kept, and every complement
//! direction `|u>` is collapsed onto a fixed standard state `|0>` inside the
//! subspace. Decoding is the identity.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::classical_types::TypicalSetSpec;
use crate::error::{Error, Result};
use crate::quantum_state::{max_abs, ComplexMatrix, DensityMatrix, OrthonormalBasis};
use crate::typical_projector::{
    dense_dimension, dense_projector, kron_power, product_index, product_vector, typical_members,
};

/// Tolerance for projector and completeness checks on block-space operators.
pub const CHANNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionChannel {
    projector: ComplexMatrix,
    standard_state: DVector<Complex64>,
    standard_state_index: usize,
    /// Orthonormal basis of the orthocomplement, one vector per column.
    complement: ComplexMatrix,
}

impl CompressionChannel {
    /// Assembles a channel from an arbitrary projector, checking that it is an
    /// orthogonal projector, that `|0>` lies in its range, and that
    /// `Pi + sum_u |u><u| = I`.
    pub fn from_parts(
        projector: ComplexMatrix,
        standard_state: DVector<Complex64>,
        standard_state_index: usize,
        complement: ComplexMatrix,
    ) -> Result<Self> {
        let dim = projector.nrows();
        if projector.ncols() != dim || standard_state.len() != dim || complement.nrows() != dim {
            return Err(Error::validation("channel parts have inconsistent dimensions"));
        }
        let idem = max_abs(&(&projector * &projector - &projector));
        let herm = max_abs(&(&projector - projector.adjoint()));
        if idem > CHANNEL_TOL || herm > CHANNEL_TOL {
            return Err(Error::validation(format!(
                "not an orthogonal projector: |P^2 - P| = {idem:e}, |P - P^dagger| = {herm:e}"
            )));
        }
        let leak = (&projector * &standard_state - &standard_state).norm();
        if leak > CHANNEL_TOL || (standard_state.norm() - 1.0).abs() > CHANNEL_TOL {
            return Err(Error::validation(format!(
                "standard state is not a unit vector in the projector's range (residual {leak:e})"
            )));
        }
        let completeness =
            max_abs(&(&projector + &complement * complement.adjoint() - ComplexMatrix::identity(dim, dim)));
        if completeness > CHANNEL_TOL {
            return Err(Error::validation(format!(
                "projector and complement do not resolve the identity (error {completeness:e})"
            )));
        }
        Ok(Self { projector, standard_state, standard_state_index, complement })
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    pub fn standard_state(&self) -> &DVector<Complex64> {
        &self.standard_state
    }

    /// Block-space index of `|0>` among the product vectors.
    pub fn standard_state_index(&self) -> usize {
        self.standard_state_index
    }

    pub fn complement(&self) -> &ComplexMatrix {
        &self.complement
    }

    pub fn dim(&self) -> usize {
        self.projector.nrows()
    }

    /// Kraus operators `Pi, E_1, E_2, ..`.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        let mut ops = vec![self.projector.clone()];
        for u in self.complement.column_iter() {
            ops.push(&self.standard_state * u.adjoint());
        }
        ops
    }
}

/// Channel over `Pi(h, B)` with `|0>` the first typical product vector in
/// lexicographic order and the atypical product vectors as complement.
pub fn build_channel(basis: &OrthonormalBasis, spec: &TypicalSetSpec) -> Result<CompressionChannel> {
    if basis.d() != spec.d() {
        return Err(Error::validation(format!("basis has d = {} but spec has d = {}", basis.d(), spec.d())));
    }
    let (d, n) = (spec.d(), spec.n());
    let dim = dense_dimension(d, n)?;
    let members: Vec<Vec<usize>> = typical_members(spec)?.collect();
    let Some(first) = members.first() else {
        return Err(Error::validation("typical set is empty: no standard state exists for the channel"));
    };
    let mut is_member = vec![false; dim];
    for x in &members {
        is_member[product_index(x, d)] = true;
    }
    let complement_cols: Vec<DVector<Complex64>> =
        (0..dim).filter(|&idx| !is_member[idx]).map(|idx| product_vector(basis.matrix(), &digits(idx, d, n))).collect();
    let complement = if complement_cols.is_empty() {
        ComplexMatrix::zeros(dim, 0)
    } else {
        ComplexMatrix::from_columns(&complement_cols)
    };
    // product vectors of an orthonormal basis: the invariants checked by
    // `from_parts` hold by construction
    Ok(CompressionChannel {
        projector: dense_projector(basis, spec)?,
        standard_state: product_vector(basis.matrix(), first),
        standard_state_index: product_index(first, d),
        complement,
    })
}

/// `tr(A B)` without forming the product.
fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.row_iter()
        .enumerate()
        .map(|(i, row)| row.iter().zip(b.column(i).iter()).map(|(x, y)| x * y).sum::<Complex64>())
        .sum()
}

fn digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut seq = vec![0; n];
    for pos in (0..n).rev() {
        seq[pos] = idx % d;
        idx /= d;
    }
    seq
}

/// `Pi sigma Pi + sum_u <u|sigma|u> |0><0|`.
pub fn apply_channel(channel: &CompressionChannel, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = channel.dim();
    if sigma.shape() != (dim, dim) {
        return Err(Error::validation(format!(
            "input is {}x{} but the channel acts on dimension {dim}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let asym = max_abs(&(sigma - sigma.adjoint()));
    if asym > CHANNEL_TOL {
        return Err(Error::validation(format!("input is not Hermitian (|S - S^dagger| = {asym:e})")));
    }
    let p = &channel.projector;
    let c = &channel.complement;
    let discarded = (c.adjoint() * sigma * c).trace();
    let zero = &channel.standard_state;
    Ok(p * sigma * p + (zero * zero.adjoint()) * discarded)
}

/// Terms of `F = |tr(Pi rho_n)|^2 + sum_u |tr(E_u rho_n)|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub projected_term: f64,
    pub residual_term: f64,
    /// `1 - 2 delta` with `delta = 1 - tr(Pi rho_n)`; may be negative.
    pub lower_bound: f64,
    pub overlap: f64,
}

/// Fidelity of `rho^{(x)n}` through the channel and the identity decoder.
pub fn channel_fidelity(channel: &CompressionChannel, rho: &DensityMatrix, n: usize) -> Result<FidelityReport> {
    let block = kron_power(rho.matrix(), n)?;
    if block.nrows() != channel.dim() {
        return Err(Error::validation(format!(
            "rho^(x){n} has dimension {} but the channel acts on {}",
            block.nrows(),
            channel.dim()
        )));
    }
    let overlap_c = trace_of_product(channel.projector(), &block);
    let overlap = overlap_c.re;
    let projected_term = overlap_c.norm_sqr();
    // tr(E_u rho_n) = <u| rho_n |0>
    let amplitudes = channel.complement().adjoint() * (&block * channel.standard_state());
    let residual_term = amplitudes.norm_squared();
    let fidelity = projected_term + residual_term;
    let delta = 1.0 - overlap;
    let lower_bound = 1.0 - 2.0 * delta;
    if fidelity < lower_bound.max(0.0) - 1e-12 {
        return Err(Error::Numeric(format!("fidelity {fidelity} below its lower bound {lower_bound}")));
    }
    Ok(FidelityReport { fidelity, projected_term, residual_term, lower_bound, overlap })
}

/// Finite-`n` rate bound `(d^2 + d) log2(n + 1) / n + h + eps` and its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub rate: f64,
    pub limit: f64,
}

pub fn compression_rate(n: usize, d: usize, h: f64, epsilon: f64) -> Result<RateReport> {
    let spec = TypicalSetSpec::new(n, d, h, epsilon)?;
    let limit = spec.h() + spec.epsilon();
    let overhead = (d * d + d) as f64 * ((n as f64) + 1.0).log2() / n as f64;
    Ok(RateReport { rate: overhead + limit, limit })
}
