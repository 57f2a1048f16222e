//! Method of types over a finite alphabet `{1, .., d}`.
//!
//! Sets of sequences are never materialised: every count, probability and
//! membership question is answered per type class (composition of `n` into
//! `d` parts), of which there are only `binom(n + d - 1, d - 1)`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exec::{CompensatedSum, Execution};

/// Tolerance on `sum(p) == 1` for a [`Distribution`].
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// Absolute slack in `|H - h| <= eps` and `|p_x(a) - p(a)| <= eps / d`.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Default cap on the number of type classes an exact enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// A probability vector over `d` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::validation("distribution must have at least one entry"));
        }
        if let Some((a, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0 || **p > 1.0) {
            return Err(Error::validation(format!("probability of symbol {} is {p}, outside [0, 1]", a + 1)));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::validation(format!(
                "probabilities sum to {total}, |sum - 1| = {:e} exceeds {PROBABILITY_SUM_TOL:e}",
                (total - 1.0).abs()
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::validation("alphabet size must be positive"));
        }
        Ok(Self { probs: vec![1.0 / d as f64; d] })
    }

    /// Clamps entries in `[-clamp, 0)` to zero and rescales to unit sum.
    ///
    /// Used for diagonals and spectra coming out of floating-point linear
    /// algebra, which are only stochastic up to round-off.
    pub(crate) fn from_rounded(mut probs: Vec<f64>, clamp: f64) -> Result<Self> {
        for (a, p) in probs.iter_mut().enumerate() {
            if *p < -clamp || !p.is_finite() {
                return Err(Error::validation(format!("entry {} is {p}, below the clamp tolerance -{clamp:e}", a + 1)));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::validation(format!("entries sum to {total}, not 1")));
        }
        for p in probs.iter_mut() {
            *p = (*p / total).min(1.0);
        }
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Alphabet size `d`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// A sequence `x_1 .. x_n` of 1-based symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSequence {
    symbols: Vec<usize>,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::validation("sequence must be non-empty"));
        }
        if symbols.contains(&0) {
            return Err(Error::validation("symbols are 1-based; found 0"));
        }
        Ok(Self { symbols })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Occurrence counts `N(a | x^n)` over an alphabet of size `d`.
    pub fn counts(&self, d: usize) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; d];
        for (i, &s) in self.symbols.iter().enumerate() {
            if s > d {
                return Err(Error::validation(format!(
                    "symbol {s} at position {} is outside the alphabet 1..={d}",
                    i + 1
                )));
            }
            counts[s - 1] += 1;
        }
        Ok(counts)
    }
}

/// A type class: all sequences sharing one count vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeClass {
    counts: Vec<u64>,
    multiplicity: BigUint,
}

impl TypeClass {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of sequences in the class, `n! / prod(counts_a!)`.
    pub fn multiplicity(&self) -> &BigUint {
        &self.multiplicity
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Shannon entropy (bits) of the class's empirical type.
    pub fn entropy(&self) -> f64 {
        type_entropy(&self.counts)
    }
}

/// Parameters `(n, d, h, eps)` of the entropy-typical set `T_eps(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalSetSpec {
    n: usize,
    d: usize,
    h: f64,
    epsilon: f64,
}

impl TypicalSetSpec {
    pub fn new(n: usize, d: usize, h: f64, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("block length n must be at least 1"));
        }
        if d == 0 {
            return Err(Error::validation("alphabet size d must be at least 1"));
        }
        if !h.is_finite() || h < 0.0 {
            return Err(Error::validation(format!("target entropy h = {h} must be >= 0")));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::validation(format!("epsilon = {epsilon} must be > 0")));
        }
        let max_entropy = (d as f64).log2();
        if h > max_entropy + MEMBERSHIP_SLACK {
            return Err(Error::validation(format!("target entropy h = {h} exceeds log2(d) = {max_entropy}")));
        }
        Ok(Self { n, d, h, epsilon })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same `(d, h, eps)` at another block length.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.d, self.h, self.epsilon)
    }

    /// `|entropy - h| <= eps` with the fixed slack.
    pub fn admits_entropy(&self, entropy: f64) -> bool {
        (entropy - self.h).abs() <= self.epsilon + MEMBERSHIP_SLACK
    }

    /// Membership of a whole type class, given its count vector.
    pub fn admits_counts(&self, counts: &[u64]) -> bool {
        self.admits_entropy(type_entropy(counts))
    }
}

/// Entropy kernel shared by every entropy computation in the crate.
pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    entropy_of(probs.iter().copied())
}

fn entropy_of(probs: impl Iterator<Item = f64>) -> f64 {
    probs.filter(|&p| p > 0.0).fold(0.0, |acc, p| acc - p * p.log2()).max(0.0)
}

fn type_probs(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Entropy of the type with the given counts; bit-identical to
/// `shannon_entropy(empirical_type(..))` for any sequence of that type.
pub(crate) fn type_entropy(counts: &[u64]) -> f64 {
    let n = counts.iter().sum::<u64>() as f64;
    entropy_of(counts.iter().map(|&c| c as f64 / n))
}

/// Precomputed `p log2 p` for `p = c / n`, `c = 0..=n`.
///
/// [`TypeEntropyTable::entropy`] performs the same floating-point operations
/// in the same order as [`type_entropy`], so both classify boundary types
/// identically.
pub(crate) struct TypeEntropyTable {
    plogp: Vec<f64>,
}

impl TypeEntropyTable {
    pub(crate) fn new(n: usize) -> Self {
        let plogp = (0..=n)
            .map(|c| {
                let p = c as f64 / n as f64;
                if p > 0.0 {
                    p * p.log2()
                } else {
                    0.0
                }
            })
            .collect();
        Self { plogp }
    }

    pub(crate) fn entropy(&self, counts: &[u64]) -> f64 {
        counts.iter().filter(|&&c| c > 0).fold(0.0, |acc, &c| acc - self.plogp[c as usize]).max(0.0)
    }
}

/// `-sum p log2 p` in bits, with `0 log 0 = 0`.
pub fn shannon_entropy(dist: &Distribution) -> f64 {
    entropy_bits(dist.probs())
}

/// The empirical distribution `p_x(a) = N(a | x^n) / n`.
pub fn empirical_type(seq: &SymbolSequence, d: usize) -> Result<Distribution> {
    if d == 0 {
        return Err(Error::validation("alphabet size d must be at least 1"));
    }
    let counts = seq.counts(d)?;
    Distribution::new(type_probs(&counts))
}

pub(crate) fn strongly_typical_counts(counts: &[u64], p: &[f64], epsilon: f64) -> bool {
    let n: u64 = counts.iter().sum();
    let slack = epsilon / p.len() as f64 + MEMBERSHIP_SLACK;
    counts.iter().zip(p).all(|(&c, &pa)| (c as f64 / n as f64 - pa).abs() <= slack)
}

/// Membership in the strongly typical set: every symbol frequency within
/// `eps / d` of `p`.
pub fn is_strongly_typical(seq: &SymbolSequence, p: &Distribution, epsilon: f64) -> Result<bool> {
    check_epsilon(epsilon)?;
    let counts = seq.counts(p.len())?;
    Ok(strongly_typical_counts(&counts, p.probs(), epsilon))
}

/// Membership in the entropy-typical set `T_eps(h)`.
pub fn is_entropy_typical(seq: &SymbolSequence, spec: &TypicalSetSpec) -> Result<bool> {
    if seq.len() != spec.n() {
        return Err(Error::validation(format!("sequence length {} does not match n = {}", seq.len(), spec.n())));
    }
    let ty = empirical_type(seq, spec.d())?;
    Ok(spec.admits_entropy(shannon_entropy(&ty)))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::validation(format!("epsilon = {epsilon} must be > 0")));
    }
    Ok(())
}

/// `binom(n + d - 1, d - 1)`, saturating at `u128::MAX`.
pub fn type_class_count(n: usize, d: usize) -> u128 {
    if d == 0 {
        return 0;
    }
    let k = (d - 1) as u128;
    let top = (n + d - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // binom(top, i) * (top - i) is divisible by i + 1
        acc = match acc.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn check_cap(n: usize, d: usize, cap: u64) -> Result<()> {
    let classes = type_class_count(n, d);
    if classes > cap as u128 {
        return Err(Error::Resource { what: "type-class enumeration", required: classes as f64, cap: cap as f64 });
    }
    Ok(())
}

/// Advances `counts` to the next composition of the same total in ascending
/// lexicographic order. Returns false after the last one.
fn next_composition(counts: &mut [u64]) -> bool {
    let d = counts.len();
    if d < 2 {
        return false;
    }
    let mut tail = counts[d - 1];
    for i in (0..d - 1).rev() {
        if tail > 0 {
            counts[i] += 1;
            for c in &mut counts[i + 1..d - 1] {
                *c = 0;
            }
            counts[d - 1] = tail - 1;
            return true;
        }
        tail += counts[i];
    }
    false
}

/// Visits every composition of `n` into `d` parts in ascending lexicographic
/// order.
pub(crate) fn for_each_composition(n: usize, d: usize, mut f: impl FnMut(&[u64])) {
    if d == 0 {
        return;
    }
    let mut counts = vec![0u64; d];
    counts[d - 1] = n as u64;
    loop {
        f(&counts);
        if !next_composition(&mut counts) {
            break;
        }
    }
}

/// Visits the compositions whose first part equals `first`, in order.
fn for_each_composition_with_first(n: usize, d: usize, first: usize, mut f: impl FnMut(&[u64])) {
    if d == 1 {
        if first == n {
            f(&[n as u64]);
        }
        return;
    }
    let mut counts = vec![0u64; d];
    counts[0] = first as u64;
    counts[d - 1] = (n - first) as u64;
    loop {
        f(&counts);
        if !next_composition(&mut counts[1..]) {
            break;
        }
    }
}

pub(crate) struct FactorialTable {
    exact: Vec<BigUint>,
}

impl FactorialTable {
    pub(crate) fn new(n: usize) -> Self {
        let mut exact = Vec::with_capacity(n + 1);
        exact.push(BigUint::one());
        for k in 1..=n {
            let next = &exact[k - 1] * BigUint::from(k);
            exact.push(next);
        }
        Self { exact }
    }

    pub(crate) fn multinomial(&self, counts: &[u64]) -> BigUint {
        let n: u64 = counts.iter().sum();
        let denom = counts.iter().fold(BigUint::one(), |acc, &c| acc * &self.exact[c as usize]);
        &self.exact[n as usize] / denom
    }
}

/// `ln k!` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::default();
    table.push(0.0);
    for k in 1..=n {
        acc.add((k as f64).ln());
        table.push(acc.value());
    }
    table
}

/// All type classes of length-`n` sequences over `d` symbols, with exact
/// multiplicities, in ascending lexicographic order of count vectors.
pub fn enumerate_type_classes(n: usize, d: usize) -> Result<Vec<TypeClass>> {
    enumerate_type_classes_capped(n, d, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_type_classes_capped(n: usize, d: usize, cap: u64) -> Result<Vec<TypeClass>> {
    if n == 0 || d == 0 {
        return Err(Error::validation("n and d must both be at least 1"));
    }
    check_cap(n, d, cap)?;
    let table = FactorialTable::new(n);
    let mut classes = Vec::new();
    for_each_composition(n, d, |counts| {
        classes.push(TypeClass { counts: counts.to_vec(), multiplicity: table.multinomial(counts) })
    });
    Ok(classes)
}

/// `|T_eps(h)|`, exactly.
pub fn entropy_typical_cardinality(spec: &TypicalSetSpec) -> Result<BigUint> {
    entropy_typical_cardinality_capped(spec, DEFAULT_ENUMERATION_CAP)
}

pub fn entropy_typical_cardinality_capped(spec: &TypicalSetSpec, cap: u64) -> Result<BigUint> {
    check_cap(spec.n(), spec.d(), cap)?;
    let table = FactorialTable::new(spec.n());
    let mut total = BigUint::zero();
    for_each_composition(spec.n(), spec.d(), |counts| {
        if spec.admits_counts(counts) {
            total += table.multinomial(counts);
        }
    });
    Ok(total)
}

/// `log2` of the type-method bound `(n+1)^d 2^{n(h+eps)}`.
pub fn log2_cardinality_bound(spec: &TypicalSetSpec) -> f64 {
    spec.d() as f64 * ((spec.n() + 1) as f64).log2() + spec.n() as f64 * (spec.h() + spec.epsilon())
}

/// `(n+1)^d 2^{n(h+eps)}`, evaluated through its logarithm.
pub fn cardinality_bound(spec: &TypicalSetSpec) -> f64 {
    log2_cardinality_bound(spec).exp2()
}

/// Probability mass `sum multiplicity * prod_a p_a^{count_a}` over the type
/// classes accepted by `admit`.
///
/// Each term is formed in the log domain. Work is split by the first count
/// and every partition is summed with compensation; partial sums are then
/// combined in a fixed order.
pub(crate) fn type_class_mass<F>(n: usize, probs: &[f64], admit: F, exec: Execution) -> f64
where
    F: Fn(&[u64]) -> bool + Sync + Send,
{
    let d = probs.len();
    let ln_fact = ln_factorials(n);
    // log_weight[a][c] = c ln p_a - ln c!
    let log_weight: Vec<Vec<f64>> = probs
        .iter()
        .map(|&p| {
            (0..=n)
                .map(|c| match (c, p > 0.0) {
                    (0, _) => 0.0,
                    (_, true) => c as f64 * p.ln() - ln_fact[c],
                    (_, false) => f64::NEG_INFINITY,
                })
                .collect()
        })
        .collect();
    let term = |counts: &[u64]| -> f64 {
        let log_term = counts.iter().zip(&log_weight).fold(ln_fact[n], |acc, (&c, w)| acc + w[c as usize]);
        log_term.exp()
    };
    let partials = exec.map_indexed(n + 1, |first| {
        let mut acc = CompensatedSum::default();
        for_each_composition_with_first(n, d, first, |counts| {
            if admit(counts) {
                acc.add(term(counts));
            }
        });
        acc.value()
    });
    let total: CompensatedSum = partials.into_iter().collect();
    total.value().clamp(0.0, 1.0)
}

fn check_matching(p: &Distribution, spec: &TypicalSetSpec) -> Result<()> {
    if p.len() != spec.d() {
        return Err(Error::validation(format!("distribution has {} symbols but d = {}", p.len(), spec.d())));
    }
    Ok(())
}

/// `P(x^n in T_eps(h))` for an i.i.d. source `p`.
pub fn set_probability(p: &Distribution, spec: &TypicalSetSpec) -> Result<f64> {
    set_probability_with(p, spec, Execution::default())
}

pub fn set_probability_with(p: &Distribution, spec: &TypicalSetSpec, exec: Execution) -> Result<f64> {
    check_matching(p, spec)?;
    let table = TypeEntropyTable::new(spec.n());
    Ok(type_class_mass(spec.n(), p.probs(), |counts| spec.admits_entropy(table.entropy(counts)), exec))
}

/// `P(x^n in A_eps(p))` for an i.i.d. source `p`.
pub fn strong_set_probability(p: &Distribution, n: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if n == 0 {
        return Err(Error::validation("block length n must be at least 1"));
    }
    let probs = p.probs();
    Ok(type_class_mass(n, probs, |counts| strongly_typical_counts(counts, probs, epsilon), Execution::default()))
}

/// Whether every type class of `A_{eps'}(p)` at length `spec.n` lies inside
/// `T_eps(h)`.
pub fn strong_set_included(p: &Distribution, epsilon_prime: f64, spec: &TypicalSetSpec) -> Result<bool> {
    check_epsilon(epsilon_prime)?;
    check_matching(p, spec)?;
    check_cap(spec.n(), spec.d(), DEFAULT_ENUMERATION_CAP)?;
    let mut included = true;
    for_each_composition(spec.n(), spec.d(), |counts| {
        if included && strongly_typical_counts(counts, p.probs(), epsilon_prime) {
            included = spec.admits_counts(counts);
        }
    });
    Ok(included)
}
