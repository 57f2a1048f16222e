//! Entropy-typical subspaces of `(C^d)^{(x)n}`.
//!
//! The overlap `tr(Pi(h, B) rho^{(x)n})` factorises over sequence positions:
//! it equals the classical mass of the typical set under the distribution
//! `q_a = <e_a| rho |e_a>`. [`trace_overlap_product`] uses that identity and
//! never forms a `d^n`-dimensional operator; the dense routines here exist as
//! oracles and for the compression channel, and are capped by
//! [`DENSE_DIM_CAP`].

use nalgebra::{DVector, SVD};
use num_bigint::BigUint;
use num_complex::Complex64;

use crate::basis_search::{find_target_basis, BasisSearchResult};
use crate::classical_types::{
    cardinality_bound, entropy_typical_cardinality, for_each_composition, type_class_mass, TypeEntropyTable,
    TypicalSetSpec,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quantum_state::{
    identity, measurement_diagonal, von_neumann_entropy, ComplexMatrix, DensityMatrix, OrthonormalBasis,
};
use crate::sampling::{haar_unitary, rng_for};

/// Largest `d^n` for which operators on the block space are built densely.
pub const DENSE_DIM_CAP: usize = 4096;
/// Most members [`typical_members`] will stream.
pub const MEMBER_CAP: u64 = 1_000_000;
/// Singular values above this fraction of the largest count towards rank.
pub const RANK_RELATIVE_THRESHOLD: f64 = 1e-8;

/// `Xi(h, B)`: the span of product vectors `|e_{x_1} .. e_{x_n}>` over the
/// entropy-typical sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalSubspace {
    pub spec: TypicalSetSpec,
    pub basis: OrthonormalBasis,
}

impl TypicalSubspace {
    pub fn new(spec: TypicalSetSpec, basis: OrthonormalBasis) -> Result<Self> {
        if spec.d() != basis.d() {
            return Err(Error::validation(format!("spec has d = {} but basis has d = {}", spec.d(), basis.d())));
        }
        Ok(Self { spec, basis })
    }

    pub fn dimension(&self) -> Result<BigUint> {
        entropy_typical_cardinality(&self.spec)
    }

    pub fn projector(&self) -> Result<ComplexMatrix> {
        dense_projector(&self.basis, &self.spec)
    }

    pub fn overlap(&self, rho: &DensityMatrix) -> Result<TraceOverlapReport> {
        trace_overlap_product(rho, &self.basis, &self.spec)
    }
}

/// `tr(Pi rho^{(x)n})` together with `delta = 1 - overlap` and the fidelity
/// bound `1 - 2 delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOverlapReport {
    pub overlap: f64,
    pub delta: f64,
    pub fidelity_lower_bound: f64,
}

impl TraceOverlapReport {
    pub fn from_overlap(overlap: f64) -> Self {
        let delta = 1.0 - overlap;
        Self { overlap, delta, fidelity_lower_bound: (1.0 - 2.0 * delta).max(0.0) }
    }
}

/// Lexicographic stream over the members of `T_eps(h)`.
///
/// Only prefixes that extend to some admitted type class are ever visited,
/// so the cost is proportional to the output rather than to `d^n`.
#[derive(Debug, Clone)]
pub struct TypicalMembers {
    n: usize,
    d: usize,
    classes: Vec<Vec<u64>>,
    current: Option<Vec<usize>>,
    started: bool,
}

impl TypicalMembers {
    fn compatible(&self, prefix_counts: &[u64]) -> bool {
        self.classes.iter().any(|c| c.iter().zip(prefix_counts).all(|(&cap, &have)| have <= cap))
    }

    /// Fills positions `from..n` with the smallest admissible symbols.
    fn complete(&self, seq: &mut Vec<usize>, counts: &mut [u64], from: usize) -> bool {
        seq.truncate(from);
        for _ in from..self.n {
            let mut placed = false;
            for a in 0..self.d {
                counts[a] += 1;
                if self.compatible(counts) {
                    seq.push(a);
                    placed = true;
                    break;
                }
                counts[a] -= 1;
            }
            if !placed {
                return false;
            }
        }
        true
    }

    fn first(&self) -> Option<Vec<usize>> {
        if self.classes.is_empty() {
            return None;
        }
        let mut seq = Vec::with_capacity(self.n);
        let mut counts = vec![0u64; self.d];
        self.complete(&mut seq, &mut counts, 0).then_some(seq)
    }

    fn successor(&self, seq: &[usize]) -> Option<Vec<usize>> {
        let mut counts = vec![0u64; self.d];
        for &a in seq {
            counts[a] += 1;
        }
        for i in (0..self.n).rev() {
            counts[seq[i]] -= 1;
            for b in seq[i] + 1..self.d {
                counts[b] += 1;
                if self.compatible(&counts) {
                    let mut next = seq[..i].to_vec();
                    next.push(b);
                    let mut tail_counts = counts.clone();
                    if self.complete(&mut next, &mut tail_counts, i + 1) {
                        return Some(next);
                    }
                }
                counts[b] -= 1;
            }
        }
        None
    }
}

impl Iterator for TypicalMembers {
    /// 0-based symbol indices; add one for the alphabet `{1, .., d}`.
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let next = if self.started {
            let cur = self.current.as_ref()?;
            self.successor(cur)
        } else {
            self.started = true;
            self.first()
        };
        self.current = next.clone();
        next
    }
}

/// Streams the members of `T_eps(h)` in lexicographic order.
pub fn typical_members(spec: &TypicalSetSpec) -> Result<TypicalMembers> {
    let count = entropy_typical_cardinality(spec)?;
    if count > BigUint::from(MEMBER_CAP) {
        return Err(Error::Resource {
            what: "typical-set member stream",
            required: biguint_to_f64(&count),
            cap: MEMBER_CAP as f64,
        });
    }
    let mut classes = Vec::new();
    for_each_composition(spec.n(), spec.d(), |counts| {
        if spec.admits_counts(counts) {
            classes.push(counts.to_vec());
        }
    });
    Ok(TypicalMembers { n: spec.n(), d: spec.d(), classes, current: None, started: false })
}

pub(crate) fn biguint_to_f64(x: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Exact `dim Xi(h, B)` and the type-method bound it must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceDimension {
    pub dimension: BigUint,
    pub bound: f64,
}

pub fn subspace_dimension(spec: &TypicalSetSpec) -> Result<SubspaceDimension> {
    Ok(SubspaceDimension { dimension: entropy_typical_cardinality(spec)?, bound: cardinality_bound(spec) })
}

fn check_basis(basis: &OrthonormalBasis, spec: &TypicalSetSpec) -> Result<()> {
    if basis.d() != spec.d() {
        return Err(Error::validation(format!("basis has d = {} but spec has d = {}", basis.d(), spec.d())));
    }
    Ok(())
}

/// `tr(Pi(h, B) rho^{(x)n})` through the type-class product formula.
pub fn trace_overlap_product(
    rho: &DensityMatrix,
    basis: &OrthonormalBasis,
    spec: &TypicalSetSpec,
) -> Result<TraceOverlapReport> {
    trace_overlap_product_with(rho, basis, spec, Execution::default())
}

pub fn trace_overlap_product_with(
    rho: &DensityMatrix,
    basis: &OrthonormalBasis,
    spec: &TypicalSetSpec,
    exec: Execution,
) -> Result<TraceOverlapReport> {
    check_basis(basis, spec)?;
    let q = measurement_diagonal(rho, basis)?;
    let table = TypeEntropyTable::new(spec.n());
    let overlap = type_class_mass(spec.n(), q.probs(), |counts| spec.admits_entropy(table.entropy(counts)), exec);
    Ok(TraceOverlapReport::from_overlap(overlap))
}

/// `d^n`, or a resource error when it exceeds [`DENSE_DIM_CAP`].
pub fn dense_dimension(d: usize, n: usize) -> Result<usize> {
    let dim = (d as f64).powi(n as i32);
    if dim > DENSE_DIM_CAP as f64 {
        return Err(Error::Resource {
            what: "dense block-space operator dimension",
            required: dim,
            cap: DENSE_DIM_CAP as f64,
        });
    }
    Ok(d.pow(n as u32))
}

/// `A (x) A (x) .. (x) A` (`n` factors), capped at [`DENSE_DIM_CAP`] rows.
pub fn kron_power(a: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::validation("tensor power needs n >= 1"));
    }
    dense_dimension(a.nrows().max(a.ncols()), n)?;
    let mut acc = a.clone();
    for _ in 1..n {
        acc = acc.kronecker(a);
    }
    Ok(acc)
}

/// Row-major index of a 0-based symbol sequence (first symbol most
/// significant), matching [`kron_power`] ordering.
pub fn product_index(seq: &[usize], d: usize) -> usize {
    seq.iter().fold(0, |acc, &a| acc * d + a)
}

/// `|e_{x_1}> (x) .. (x) |e_{x_n}>` for columns of `basis` (0-based `seq`).
pub fn product_vector(basis: &ComplexMatrix, seq: &[usize]) -> DVector<Complex64> {
    let mut v = basis.column(seq[0]).into_owned();
    for &a in &seq[1..] {
        v = v.kronecker(&basis.column(a));
    }
    v
}

/// Dense `Pi(h, B) = sum_{x in T} |e_x><e_x|`.
pub fn dense_projector(basis: &OrthonormalBasis, spec: &TypicalSetSpec) -> Result<ComplexMatrix> {
    check_basis(basis, spec)?;
    let dim = dense_dimension(spec.d(), spec.n())?;
    let members: Vec<Vec<usize>> = typical_members(spec)?.collect();
    if members.is_empty() {
        return Ok(ComplexMatrix::zeros(dim, dim));
    }
    let columns: Vec<DVector<Complex64>> = members.iter().map(|x| product_vector(basis.matrix(), x)).collect();
    let m = ComplexMatrix::from_columns(&columns);
    Ok(&m * m.adjoint())
}

/// Preserved weight together with the basis that certifies it.
#[derive(Debug, Clone, PartialEq)]
pub struct PreservedWeight {
    pub search: BasisSearchResult,
    pub report: TraceOverlapReport,
}

/// Lower bound on `tr(Pi_Upsilon(h) rho^{(x)n})`: the overlap with
/// `Pi(h, B')` for a basis `B'` in which `rho` dephases to entropy exactly
/// `h`. Since `Xi(h, B')` lies inside the universal subspace, this value is a
/// certified lower bound.
pub fn preserved_weight(rho: &DensityMatrix, h: f64, epsilon: f64, n: usize, tol: f64) -> Result<TraceOverlapReport> {
    Ok(preserved_weight_detailed(rho, h, epsilon, n, tol)?.report)
}

pub fn preserved_weight_detailed(
    rho: &DensityMatrix,
    h: f64,
    epsilon: f64,
    n: usize,
    tol: f64,
) -> Result<PreservedWeight> {
    let max_entropy = (rho.d() as f64).log2();
    if h.is_finite() && h > max_entropy + crate::classical_types::MEMBERSHIP_SLACK {
        return Err(Error::domain(format!("target entropy {h} exceeds log2 d = {max_entropy}")));
    }
    let s = von_neumann_entropy(rho)?;
    if h.is_finite() && h < s - tol {
        return Err(Error::domain(format!("target entropy {h} is below S(rho) = {s}; the source is not covered")));
    }
    let spec = TypicalSetSpec::new(n, rho.d(), h.min(max_entropy), epsilon)?;
    let search = find_target_basis(rho, h, tol)?;
    let report = trace_overlap_product(rho, &search.basis, &spec)?;
    Ok(PreservedWeight { search, report })
}

/// `log2` of `(n+1)^{d^2 + d} 2^{n(h+eps)}`.
pub fn log2_upsilon_dimension_bound(n: usize, d: usize, h: f64, epsilon: f64) -> Result<f64> {
    let spec = TypicalSetSpec::new(n, d, h, epsilon)?;
    let dd = (d * d + d) as f64;
    Ok(dd * ((n + 1) as f64).log2() + n as f64 * (spec.h() + spec.epsilon()))
}

/// Upper bound `(n+1)^{d^2 + d} 2^{n(h+eps)}` on the universal subspace.
pub fn upsilon_dimension_bound(n: usize, d: usize, h: f64, epsilon: f64) -> Result<f64> {
    Ok(log2_upsilon_dimension_bound(n, d, h, epsilon)?.exp2())
}

/// Settings for [`estimate_upsilon_dimension_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpsilonConfig {
    pub samples: usize,
    pub seed: u64,
    /// Use `U = I` for the first sample, so one sample reproduces `Xi`.
    pub identity_first: bool,
    pub exec: Execution,
}

impl UpsilonConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, identity_first: false, exec: Execution::default() }
    }
}

/// Monte Carlo estimate of `dim Upsilon(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpsilonEstimate {
    pub estimated_dimension: usize,
    pub samples_used: usize,
    pub seed: u64,
    pub bound: f64,
    pub xi_dimension: usize,
    /// Numerical rank after each sample.
    pub rank_history: Vec<usize>,
}

pub fn estimate_upsilon_dimension(spec: &TypicalSetSpec, samples: usize, seed: u64) -> Result<UpsilonEstimate> {
    estimate_upsilon_dimension_with(spec, &UpsilonConfig::new(samples, seed))
}

/// Draws Haar unitaries `U`, collects `U^{(x)n} |e_x>` for every typical
/// `x`, and tracks the numerical rank of everything collected so far.
///
/// Sample `i` uses stream `i` of `seed`, so the estimate is independent of
/// thread count and a run with fewer samples is a prefix of a longer one.
pub fn estimate_upsilon_dimension_with(spec: &TypicalSetSpec, config: &UpsilonConfig) -> Result<UpsilonEstimate> {
    if config.samples == 0 {
        return Err(Error::validation("at least one sample is required"));
    }
    let (n, d) = (spec.n(), spec.d());
    let dim = dense_dimension(d, n)?;
    let members: Vec<Vec<usize>> = typical_members(spec)?.collect();
    let bound = upsilon_dimension_bound(n, d, spec.h(), spec.epsilon())?;
    if members.is_empty() {
        return Ok(UpsilonEstimate {
            estimated_dimension: 0,
            samples_used: config.samples,
            seed: config.seed,
            bound,
            xi_dimension: 0,
            rank_history: vec![0; config.samples],
        });
    }
    let images = config.exec.map_indexed(config.samples, |i| {
        let u = if config.identity_first && i == 0 {
            identity(d)
        } else {
            haar_unitary(d, &mut rng_for(config.seed, i as u64))
        };
        let cols: Vec<DVector<Complex64>> = members.iter().map(|x| product_vector(&u, x)).collect();
        ComplexMatrix::from_columns(&cols)
    });

    // `acc` holds U_r diag(sigma_r) of everything seen so far; it has the same
    // Gram operator as the raw collection but never more than `dim` columns.
    let mut acc = ComplexMatrix::zeros(dim, 0);
    let mut rank_history = Vec::with_capacity(config.samples);
    for block in images {
        let stacked = concat_columns(&acc, &block);
        let (compressed, rank) = compress(stacked)?;
        acc = compressed;
        rank_history.push(rank);
    }
    Ok(UpsilonEstimate {
        estimated_dimension: *rank_history.last().expect("samples >= 1"),
        samples_used: config.samples,
        seed: config.seed,
        bound,
        xi_dimension: members.len(),
        rank_history,
    })
}

fn concat_columns(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

fn compress(m: ComplexMatrix) -> Result<(ComplexMatrix, usize)> {
    let svd = SVD::new(m, true, false);
    let u = svd.u.as_ref().ok_or_else(|| Error::Numeric("SVD did not return left vectors".into()))?;
    let sv = &svd.singular_values;
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("SVD produced non-finite singular values".into()));
    }
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > RANK_RELATIVE_THRESHOLD * largest).count();
    let mut order: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > 1e-15 * largest).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let cols: Vec<DVector<Complex64>> = order.iter().map(|&i| u.column(i) * Complex64::new(sv[i], 0.0)).collect();
    let out = if cols.is_empty() { ComplexMatrix::zeros(u.nrows(), 0) } else { ComplexMatrix::from_columns(&cols) };
    Ok((out, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_types::{set_probability, shannon_entropy, Distribution};
    use crate::quantum_state::{max_abs, spectral_decomposition};
    use crate::sampling::random_density_matrix;

    fn spec(n: usize, d: usize, h: f64, e: f64) -> TypicalSetSpec {
        TypicalSetSpec::new(n, d, h, e).unwrap()
    }

    fn one_based(members: TypicalMembers) -> Vec<String> {
        members.map(|x| x.iter().map(|a| char::from_digit(*a as u32 + 1, 10).unwrap()).collect()).collect()
    }

    #[test]
    fn member_examples() {
        let got = one_based(typical_members(&spec(4, 2, 1.0, 0.1)).unwrap());
        assert_eq!(got, ["1122", "1212", "1221", "2112", "2121", "2211"]);
        assert_eq!(one_based(typical_members(&spec(1, 2, 0.0, 0.1)).unwrap()), ["1", "2"]);
        assert_eq!(one_based(typical_members(&spec(4, 2, 0.0, 0.1)).unwrap()), ["1111", "2222"]);
        assert!(typical_members(&spec(1, 2, 1.0, 0.1)).unwrap().next().is_none());
    }

    #[test]
    fn members_match_brute_force() {
        for (n, d) in [(5, 3), (6, 2), (4, 4)] {
            for h in [0.3, 0.9, 1.4] {
                if h > (d as f64).log2() {
                    continue;
                }
                let s = spec(n, d, h, 0.2);
                let got: Vec<Vec<usize>> = typical_members(&s).unwrap().collect();
                let mut expected = Vec::new();
                for idx in 0..d.pow(n as u32) {
                    let mut seq = vec![0usize; n];
                    let mut r = idx;
                    for pos in (0..n).rev() {
                        seq[pos] = r % d;
                        r /= d;
                    }
                    let mut counts = vec![0u64; d];
                    seq.iter().for_each(|&a| counts[a] += 1);
                    if s.admits_counts(&counts) {
                        expected.push(seq);
                    }
                }
                assert_eq!(got, expected, "n={n} d={d} h={h}");
            }
        }
    }

    #[test]
    fn member_cap() {
        assert!(matches!(typical_members(&spec(30, 2, 1.0, 0.1)), Err(Error::Resource { .. })));
    }

    #[test]
    fn dimension_examples() {
        let s = subspace_dimension(&spec(4, 2, 1.0, 0.1)).unwrap();
        assert_eq!(s.dimension, BigUint::from(6u32));
        assert!(6.0 <= s.bound);
        assert_eq!(subspace_dimension(&spec(1, 2, 1.0, 0.1)).unwrap().dimension, BigUint::from(0u32));
    }

    #[test]
    fn overlap_examples() {
        let std2 = OrthonormalBasis::standard(2).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let r = trace_overlap_product(&mixed, &std2, &spec(4, 2, 1.0, 0.1)).unwrap();
        assert!((r.overlap - 0.375).abs() < 1e-15);
        assert!((r.delta - 0.625).abs() < 1e-15);
        assert_eq!(r.fidelity_lower_bound, 0.0);

        let pure = DensityMatrix::pure(2, 0).unwrap();
        let r = trace_overlap_product(&pure, &std2, &spec(4, 2, 1.0, 0.1)).unwrap();
        assert_eq!(r.overlap, 0.0);

        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let h = shannon_entropy(&Distribution::new(vec![0.9, 0.1]).unwrap());
        for n in [8, 40, 200] {
            let s = spec(n, 2, h, 0.2);
            let a = trace_overlap_product(&rho, &std2, &s).unwrap().overlap;
            let b = set_probability(&Distribution::new(vec![0.9, 0.1]).unwrap(), &s).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_scales_to_long_blocks() {
        let rho = random_density_matrix(4, &mut rng_for(0, 0));
        let basis = spectral_decomposition(&rho).unwrap().eigenbasis;
        let s = von_neumann_entropy(&rho).unwrap();
        let r = trace_overlap_product(&rho, &basis, &spec(1024, 4, s, 0.2)).unwrap();
        assert!(r.overlap > 0.99);
    }

    #[test]
    fn overlap_is_execution_independent() {
        let rho = random_density_matrix(3, &mut rng_for(1, 0));
        let basis = OrthonormalBasis::new(haar_unitary(3, &mut rng_for(1, 1))).unwrap();
        let s = spec(120, 3, 1.2, 0.1);
        let a = trace_overlap_product_with(&rho, &basis, &s, Execution::Sequential).unwrap();
        let b = trace_overlap_product_with(&rho, &basis, &s, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dense_projector_examples() {
        let std2 = OrthonormalBasis::standard(2).unwrap();
        let p = dense_projector(&std2, &spec(1, 2, 1.0, 0.1)).unwrap();
        assert_eq!(p, ComplexMatrix::zeros(2, 2));
        let p = dense_projector(&std2, &spec(1, 2, 0.0, 0.1)).unwrap();
        assert_eq!(p, identity(2));
        let p = dense_projector(&std2, &spec(4, 2, 1.0, 0.1)).unwrap();
        let diag: Vec<f64> = (0..16).map(|i| p[(i, i)].re).collect();
        assert_eq!(diag.iter().sum::<f64>(), 6.0);
        assert!(diag.iter().all(|&x| x == 0.0 || x == 1.0));
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert_eq!(p[(i, j)].norm(), 0.0);
                }
            }
        }
        assert!(p[(product_index(&[0, 0, 1, 1], 2), product_index(&[0, 0, 1, 1], 2))].re == 1.0);
        assert!(matches!(dense_projector(&std2, &spec(13, 2, 1.0, 0.1)), Err(Error::Resource { .. })));
    }

    #[test]
    fn dense_projector_is_an_orthogonal_projector() {
        let basis = OrthonormalBasis::new(haar_unitary(3, &mut rng_for(2, 0))).unwrap();
        let s = spec(4, 3, 1.3, 0.2);
        let p = dense_projector(&basis, &s).unwrap();
        assert!(max_abs(&(&p * &p - &p)) <= 1e-10);
        assert!(max_abs(&(&p - p.adjoint())) <= 1e-12);
        let dim = subspace_dimension(&s).unwrap().dimension;
        assert!((p.trace().re - biguint_to_f64(&dim)).abs() < 1e-10);
    }

    #[test]
    fn preserved_weight_examples() {
        let rho = DensityMatrix::from_diagonal(&[0.8, 0.2]).unwrap();
        let h = von_neumann_entropy(&rho).unwrap();
        let a = preserved_weight(&rho, h, 0.2, 64, 1e-9).unwrap();
        let eig = spectral_decomposition(&rho).unwrap().eigenbasis;
        let b = trace_overlap_product(&rho, &eig, &spec(64, 2, h, 0.2)).unwrap();
        assert_eq!(a, b);

        let pure = DensityMatrix::pure(2, 0).unwrap();
        let std2 = OrthonormalBasis::standard(2).unwrap();
        assert_eq!(trace_overlap_product(&pure, &std2, &spec(256, 2, 1.0, 0.1)).unwrap().overlap, 0.0);

        assert!(matches!(preserved_weight(&rho, 0.5, 0.1, 16, 1e-9), Err(Error::Domain(_))));
        assert!(matches!(preserved_weight(&rho, 1.5, 0.1, 16, 1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn upsilon_bound_examples() {
        let b = upsilon_dimension_bound(4, 2, 1.0, 0.1).unwrap();
        assert!((b - 15625.0 * 4.4f64.exp2()).abs() < 1e-6);
        let ratio = b / cardinality_bound(&spec(4, 2, 1.0, 0.1));
        assert!((ratio - 625.0).abs() < 1e-9);
        assert!(upsilon_dimension_bound(0, 2, 1.0, 0.1).is_err());
    }

    #[test]
    fn upsilon_identity_first_reproduces_xi() {
        let s = spec(4, 2, 1.0, 0.1);
        let config = UpsilonConfig { samples: 1, seed: 0, identity_first: true, exec: Execution::Sequential };
        let est = estimate_upsilon_dimension_with(&s, &config).unwrap();
        assert_eq!(est.estimated_dimension, 6);
        assert_eq!(est.xi_dimension, 6);
    }

    #[test]
    fn upsilon_estimate_is_seeded_and_monotone() {
        let s = spec(4, 2, 1.0, 0.1);
        let a = estimate_upsilon_dimension(&s, 16, 3).unwrap();
        let b = estimate_upsilon_dimension(&s, 16, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.rank_history.windows(2).all(|w| w[0] <= w[1]));
        let short = estimate_upsilon_dimension(&s, 5, 3).unwrap();
        assert_eq!(short.rank_history[..], a.rank_history[..5]);
        let seq = estimate_upsilon_dimension_with(
            &s,
            &UpsilonConfig { exec: Execution::Sequential, ..UpsilonConfig::new(16, 3) },
        )
        .unwrap();
        assert_eq!(seq, a);
        assert!(estimate_upsilon_dimension(&s, 0, 3).is_err());
    }
}
