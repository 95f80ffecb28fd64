//! Asymptotic limit moments and the exact moments of the centered CLT
//! averages.
//!
//! With `c = lim p/D`, the limit of `(E⊗tr)(W^{ε_1}⋯W^{ε_m})` is a sum of
//! free-cumulant products over non-crossing partitions below the kernel of
//! the word. The centered averages
//! `s_d = |B|^{-1/2} Σ_{x∈B} (W^x − c·Id)` converge in moments to a
//! semicircular element of variance `c`; their exact finite-dimensional
//! moments are computed here by inclusion–exclusion over sub-words.

use std::collections::HashMap;

use num::bigint::BigInt;
use num::rational::BigRational;

use crate::combinat::{
    build_delta, build_eps_perm, build_gamma, catalan, embed_unsigned, factorial, join_count,
    nc_partitions, EnumGuard, Pairing, Perm,
};

use super::report::word_kernel;
use super::{engine, DimSpec, EpsilonMatrix, ExactValue, MomentError};

fn exact_from_u128(v: u128) -> ExactValue {
    ExactValue::from_big(BigRational::from_integer(BigInt::from(v)))
}

/// The limit of `(E⊗tr)(W^{ε_1}⋯W^{ε_m})` as every `dⱼ → ∞` with
/// `p/D → c`: a free-cumulant sum over the non-crossing partitions that
/// refine the kernel of the word.
///
/// Each block contributes the free cumulant of its common transpose
/// pattern `z`: `c` for blocks of size ≤ 2, and for larger blocks `c`
/// exactly when `z` is unmixed (all legs transposed or none — exactly one
/// cyclic orientation of the block survives) and `0` when `z` mixes
/// transposed and plain legs (no orientation is compatible with every
/// leg, which is why a lone partial transpose has a semicircular-type
/// limit while `W` itself is free Poisson).
pub fn limit_mixed_moment(
    word: &EpsilonMatrix,
    c: &ExactValue,
    guard: &EnumGuard,
) -> Result<ExactValue, MomentError> {
    let m = word.word_len();
    let kernel = word_kernel(word);
    let mut total = ExactValue::zero();
    'partitions: for pi in nc_partitions(m, guard)? {
        if !pi.leq(&kernel)? {
            continue;
        }
        let mut term = ExactValue::one();
        for block in pi.blocks() {
            if block.len() >= 3 {
                let row = word.row(block[0]);
                if row.iter().any(|&b| b != row[0]) {
                    continue 'partitions;
                }
            }
            term = &term * c;
        }
        total += &term;
    }
    Ok(total)
}

/// The limit of the centered moment `(E⊗tr)(a_{ε_1}⋯a_{ε_m})` with
/// `a_ε = W^ε − c·Id`, by inclusion–exclusion over sub-words of the limit
/// mixed moments. Zero exactly when the word alternates over distinct rows
/// with pairing kernel.
pub fn limit_centered_moment(
    word: &EpsilonMatrix,
    c: &ExactValue,
    guard: &EnumGuard,
) -> Result<ExactValue, MomentError> {
    inclusion_exclusion(word, c, |sub| limit_mixed_moment(sub, c, guard))
}

fn inclusion_exclusion(
    word: &EpsilonMatrix,
    c: &ExactValue,
    mut sub_moment: impl FnMut(&EpsilonMatrix) -> Result<ExactValue, MomentError>,
) -> Result<ExactValue, MomentError> {
    let m = word.word_len();
    assert!(m < 32, "word too long for subset masks");
    let minus_c = -c;
    let mut total = ExactValue::zero();
    for mask in 0u32..(1 << m) {
        let keep: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        let moment = if keep.is_empty() {
            ExactValue::one()
        } else {
            sub_moment(&word.restrict(&keep)?)?
        };
        let coeff = minus_c.pow((m - keep.len()) as u32);
        total += &(&coeff * &moment);
    }
    Ok(total)
}

/// Memo table for exact sub-word moments, keyed by the flattened bits of
/// the word. Sub-words repeat heavily across the centered and `s_d` sums.
#[derive(Default)]
pub struct WordCache {
    map: HashMap<Vec<u8>, ExactValue>,
}

impl WordCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn moment(
        &mut self,
        word: &EpsilonMatrix,
        dims: &DimSpec,
        guard: &EnumGuard,
    ) -> Result<ExactValue, MomentError> {
        let mut key = Vec::with_capacity(word.word_len() * word.legs());
        for row in word.rows() {
            key.extend_from_slice(row);
        }
        if let Some(v) = self.map.get(&key) {
            return Ok(v.clone());
        }
        let v = engine::exact_moment(word, 1, dims, guard)?;
        self.map.insert(key, v.clone());
        Ok(v)
    }
}

fn centered_cached(
    word: &EpsilonMatrix,
    dims: &DimSpec,
    c: &ExactValue,
    guard: &EnumGuard,
    cache: &mut WordCache,
) -> Result<ExactValue, MomentError> {
    inclusion_exclusion(word, c, |sub| cache.moment(sub, dims, guard))
}

/// The exact centered moment `(E⊗tr)(a_{ε_1}⋯a_{ε_m})` at finite
/// dimensions, expanding `∏(W^{ε_i} − c·Id)` over sub-words.
pub fn centered_exact_moment(
    word: &EpsilonMatrix,
    dims: &DimSpec,
    c: &ExactValue,
    guard: &EnumGuard,
) -> Result<ExactValue, MomentError> {
    dims_warn_mu(dims);
    let mut cache = WordCache::new();
    centered_cached(word, dims, c, guard, &mut cache)
}

fn dims_warn_mu(dims: &DimSpec) {
    if dims.mu() < 2 {
        log::warn!(
            "CLT quantities assume μ(d) ≥ 2, got μ = {}; values are exact but the asymptotics do not apply",
            dims.mu()
        );
    }
}

/// The exact `m`-th moment of `s_d = |B|^{-1/2} Σ_{x∈B} (W^x − c·Id)`.
///
/// The value is `|B|^{-m/2} Σ_{x:[m]→B} (E⊗tr)(a_{x(1)}⋯a_{x(m)})`; the sum
/// is an exact rational, and the `|B|^{-m/2}` scaling is kept symbolic so
/// the value stays exact for odd `m` as well (where it is a rational
/// multiple of `√|B|`).
#[derive(Debug, Clone)]
pub struct SMoment {
    sum: ExactValue,
    b_size: usize,
    power: usize,
}

impl SMoment {
    /// The unscaled sum `Σ_{x:[m]→B}` of centered moments.
    pub fn raw_sum(&self) -> &ExactValue {
        &self.sum
    }

    pub fn b_size(&self) -> usize {
        self.b_size
    }

    pub fn power(&self) -> usize {
        self.power
    }

    /// The moment as an exact rational, when it is one: always for even
    /// `m`, and for odd `m` when `|B|` is a perfect square or the sum
    /// vanishes.
    pub fn exact(&self) -> Option<ExactValue> {
        if self.power % 2 == 0 {
            let scale = exact_from_u128((self.b_size as u128).pow((self.power / 2) as u32));
            return Some(&self.sum / &scale);
        }
        if self.sum.is_zero() {
            return Some(ExactValue::zero());
        }
        let root = (self.b_size as f64).sqrt().round() as usize;
        if root * root == self.b_size {
            let scale = exact_from_u128((root as u128).pow(self.power as u32));
            return Some(&self.sum / &scale);
        }
        None
    }

    /// The exact square of the moment (rational for every parity); useful
    /// for comparing magnitudes exactly.
    pub fn abs_squared(&self) -> ExactValue {
        let scale = exact_from_u128((self.b_size as u128).pow(self.power as u32));
        &(&self.sum * &self.sum) / &scale
    }

    pub fn to_f64(&self) -> f64 {
        self.sum.to_f64() / (self.b_size as f64).powf(self.power as f64 / 2.0)
    }
}

/// Exact `m`-th moment of the centered average over the transpose subset
/// `B` (a list of distinct ε-rows).
pub fn exact_s_moment(
    b: &[Vec<u8>],
    m: usize,
    dims: &DimSpec,
    c: &ExactValue,
    guard: &EnumGuard,
) -> Result<SMoment, MomentError> {
    if b.is_empty() {
        return Err(MomentError::InvalidEpsilon("empty transpose subset".into()));
    }
    for (i, row) in b.iter().enumerate() {
        if row.len() != dims.legs() {
            return Err(MomentError::InvalidEpsilon(format!(
                "row {i} has {} legs, dims has {}",
                row.len(),
                dims.legs()
            )));
        }
        if b[..i].contains(row) {
            return Err(MomentError::InvalidEpsilon(format!(
                "duplicate row at index {i}"
            )));
        }
    }
    assert!(m >= 1, "moment order must be positive");
    dims_warn_mu(dims);
    let subset_work: u128 = (0..=m).map(factorial).sum();
    let work = (b.len() as u128)
        .pow(m as u32)
        .saturating_mul(1 << m)
        .saturating_mul(subset_work);
    guard.check_work("s-moment word sum", work)?;
    guard.check_degree("s-moment sub-word length", m)?;

    let mut cache = WordCache::new();
    let mut sum = ExactValue::zero();
    let mut odometer = vec![0usize; m];
    loop {
        let rows: Vec<Vec<u8>> = odometer.iter().map(|&i| b[i].clone()).collect();
        let word = EpsilonMatrix::from_rows(rows)?;
        let centered = centered_cached(&word, dims, c, guard, &mut cache)?;
        sum += &centered;
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(SMoment {
                    sum,
                    b_size: b.len(),
                    power: m,
                });
            }
            pos -= 1;
            if odometer[pos] + 1 < b.len() {
                odometer[pos] += 1;
                for x in odometer[pos + 1..].iter_mut() {
                    *x = 0;
                }
                break;
            }
        }
    }
}

/// The limit moment of the semicircular element of mean 0 and variance
/// `c`: zero for odd `m`, and `c^{m/2}·Catalan(m/2)` (the number of
/// non-crossing pairings) for even `m`.
pub fn clt_limit_moment(m: usize, c: &ExactValue) -> ExactValue {
    if m % 2 != 0 {
        return ExactValue::zero();
    }
    &c.pow((m / 2) as u32) * &exact_from_u128(catalan(m / 2))
}

/// Which extension of `τ ∈ S_l` the identity concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityVariant {
    /// `τ₁ = τ∘(l+1)`: appending a fixed point leaves the join count
    /// unchanged.
    FixedPoint,
    /// `τ₂ = τ∘(l+1,l+2)`: appending a transposition raises the join count
    /// by one, provided the column bits at the two new slots agree.
    Transposition,
}

/// Join count `#(E Γ Δ Γ⁻¹ E ∨ σΔσ⁻¹)` for a single ε-column.
fn column_join(column: &[u8], sigma: &Perm) -> usize {
    let l = column.len();
    debug_assert_eq!(sigma.size(), l);
    let gamma = build_gamma(1, l);
    let delta = build_delta(1, l);
    let gdg = gamma
        .compose(delta.perm())
        .and_then(|p| p.compose(&gamma.inverse()))
        .expect("sizes agree");
    let e = build_eps_perm(column, 1);
    let left = Pairing::new(
        e.compose(&gdg)
            .and_then(|p| p.compose(&e))
            .expect("sizes agree"),
    )
    .expect("conjugate of a pairing");
    let s = embed_unsigned(sigma);
    let right = Pairing::new(
        s.compose(delta.perm())
            .and_then(|p| p.compose(&s.inverse()))
            .expect("sizes agree"),
    )
    .expect("conjugate of a pairing");
    join_count(&left, &right).expect("pairings of equal size")
}

/// Verifies the join-count identity for extending a permutation by a fixed
/// point or by a transposition.
///
/// `column` carries the single ε-column over the extended domain: length
/// `l+1` for [`IdentityVariant::FixedPoint`], `l+2` for
/// [`IdentityVariant::Transposition`] (where the last two bits must agree —
/// the sign condition of the identity). The first `l` bits drive the
/// unextended side.
pub fn technical_identity_check(
    tau: &Perm,
    column: &[u8],
    variant: IdentityVariant,
) -> bool {
    let l = tau.size();
    assert!(l >= 1, "the identity concerns non-empty words");
    match variant {
        IdentityVariant::FixedPoint => {
            assert_eq!(column.len(), l + 1, "column must cover l+1 slots");
            let lhs = column_join(&column[..l], tau);
            let mut map: Vec<usize> = tau.one_line().iter().map(|&x| x as usize).collect();
            map.push(l);
            let tau1 = Perm::from_one_line(map).expect("extension is a bijection");
            let rhs = column_join(column, &tau1);
            lhs == rhs
        }
        IdentityVariant::Transposition => {
            assert_eq!(column.len(), l + 2, "column must cover l+2 slots");
            assert_eq!(
                column[l],
                column[l + 1],
                "sign condition: the two appended slots must carry equal bits"
            );
            let lhs = column_join(&column[..l], tau);
            let mut map: Vec<usize> = tau.one_line().iter().map(|&x| x as usize).collect();
            map.push(l + 1);
            map.push(l);
            let tau2 = Perm::from_one_line(map).expect("extension is a bijection");
            let rhs = column_join(column, &tau2);
            lhs + 1 == rhs
        }
    }
}

/// The exact absolute difference of the centered moments of two words with
/// equal kernels. The difference is bounded by [`kernel_gap_bound`].
pub fn kernel_invariance_gap(
    word: &EpsilonMatrix,
    other: &EpsilonMatrix,
    dims: &DimSpec,
    c: &ExactValue,
    guard: &EnumGuard,
) -> Result<ExactValue, MomentError> {
    if word.word_len() != other.word_len() || word_kernel(word) != word_kernel(other) {
        return Err(MomentError::KernelMismatch);
    }
    dims_warn_mu(dims);
    let a = centered_exact_moment(word, dims, c, guard)?;
    let b = centered_exact_moment(other, dims, c, guard)?;
    Ok((&a - &b).abs())
}

/// The kernel-invariance bound
/// `(2^{m+1}·m!·(1+c)^m/μ(d))·Σ_{s=0}^m (p/D)^s`.
pub fn kernel_gap_bound(m: usize, c: &ExactValue, dims: &DimSpec) -> ExactValue {
    let ratio = dims.ratio();
    let mut geom = ExactValue::zero();
    for s in 0..=m as u32 {
        geom += &ratio.pow(s);
    }
    let one_plus_c = &ExactValue::one() + c;
    let front = &(&exact_from_u128(1 << (m + 1)) * &exact_from_u128(factorial(m)))
        * &one_plus_c.pow(m as u32);
    &(&front / &ExactValue::from_int(dims.mu() as i64)) * &geom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(rows: &[&str]) -> EpsilonMatrix {
        EpsilonMatrix::from_row_strs(rows).unwrap()
    }

    fn dims(d: &[u64], p: u64) -> DimSpec {
        DimSpec::new(d.to_vec(), p).unwrap()
    }

    #[test]
    fn limit_moments_are_free_poisson() {
        let guard = EnumGuard::default();
        let c = ExactValue::from_ratio(3, 2);
        assert_eq!(limit_mixed_moment(&eps(&["01"]), &c, &guard).unwrap(), c);
        // equal rows: c + c²
        assert_eq!(
            limit_mixed_moment(&eps(&["01", "01"]), &c, &guard).unwrap(),
            &c + &c.pow(2)
        );
        // distinct rows: only the singleton partition survives
        assert_eq!(
            limit_mixed_moment(&eps(&["01", "10"]), &c, &guard).unwrap(),
            c.pow(2)
        );
        // unmixed rows are free Poisson: third moment c³ + 3c² + c
        let poisson3 = &(&c.pow(3) + &(&ExactValue::from_int(3) * &c.pow(2))) + &c;
        for row in ["11", "00"] {
            let three = limit_mixed_moment(&eps(&[row, row, row]), &c, &guard).unwrap();
            assert_eq!(three, poisson3);
        }
        // a mixed transpose pattern has vanishing higher free cumulants:
        // third moment c³ + 3c² only
        let semi3 = &c.pow(3) + &(&ExactValue::from_int(3) * &c.pow(2));
        for row in ["01", "10"] {
            let three = limit_mixed_moment(&eps(&[row, row, row]), &c, &guard).unwrap();
            assert_eq!(three, semi3);
        }
        // fourth moments: free Poisson c⁴+6c³+6c²+c vs. mixed 2c²+... with
        // κ₂ = c only: Σ over NC(4) with blocks ≤ 2 plus singleton terms
        let four_poisson = limit_mixed_moment(&eps(&["00", "00", "00", "00"]), &c, &guard).unwrap();
        let expected = &(&(&c.pow(4) + &(&ExactValue::from_int(6) * &c.pow(3)))
            + &(&ExactValue::from_int(6) * &c.pow(2)))
            + &c;
        assert_eq!(four_poisson, expected);
        let four_mixed = limit_mixed_moment(&eps(&["01", "01", "01", "01"]), &c, &guard).unwrap();
        // NC(4) terms with no mixed block of size ≥ 3: c⁴ (singletons),
        // 6·c³ (one pair), 2·c² (two non-crossing pairs)
        let expected = &(&c.pow(4) + &(&ExactValue::from_int(6) * &c.pow(3)))
            + &(&ExactValue::from_int(2) * &c.pow(2));
        assert_eq!(four_mixed, expected);
    }

    #[test]
    fn centered_moment_cases() {
        let guard = EnumGuard::default();
        let dm = dims(&[2, 3], 5);
        let c = dm.ratio();
        // m=1 with c = p/D vanishes
        assert_eq!(
            centered_exact_moment(&eps(&["00"]), &dm, &c, &guard).unwrap(),
            ExactValue::zero()
        );
        // m=1 with another c
        let c2 = ExactValue::from_int(1);
        assert_eq!(
            centered_exact_moment(&eps(&["00"]), &dm, &c2, &guard).unwrap(),
            &dm.ratio() - &c2
        );
        // m=2 equal rows, c=p/D: E tr W² − c² = p/D
        assert_eq!(
            centered_exact_moment(&eps(&["00", "00"]), &dm, &c, &guard).unwrap(),
            dm.ratio()
        );
        // m=2 distinct rows, c=p/D: exact_moment − c²
        let word = eps(&["00", "11"]);
        let expected = &engine::exact_moment(&word, 1, &dm, &guard).unwrap() - &c.pow(2);
        assert_eq!(
            centered_exact_moment(&word, &dm, &c, &guard).unwrap(),
            expected
        );
    }

    #[test]
    fn s_moment_singleton_subset() {
        let guard = EnumGuard::default();
        let dm = dims(&[2, 2], 4);
        let c = dm.ratio();
        let s = exact_s_moment(&[vec![0, 0]], 2, &dm, &c, &guard).unwrap();
        assert_eq!(s.exact().unwrap(), dm.ratio());
    }

    #[test]
    fn s_moment_scaling_is_exact() {
        let guard = EnumGuard::default();
        let dm = dims(&[2, 2], 4);
        let c = dm.ratio();
        let b: Vec<Vec<u8>> = vec![vec![0, 0], vec![1, 1], vec![0, 1], vec![1, 0]];
        let s2 = exact_s_moment(&b, 2, &dm, &c, &guard).unwrap();
        // even power: exact rational is available and matches the float
        let exact = s2.exact().unwrap();
        assert!((exact.to_f64() - s2.to_f64()).abs() < 1e-12);
        // |B| = 4 is a perfect square, so odd powers are exact too
        let s3 = exact_s_moment(&b, 3, &dm, &c, &guard).unwrap();
        let cubed = s3.exact().unwrap();
        assert!((cubed.to_f64() - s3.to_f64()).abs() < 1e-12);
        assert_eq!(s3.abs_squared(), &cubed * &cubed);
    }

    #[test]
    fn s_moment_rejects_bad_subsets() {
        let guard = EnumGuard::default();
        let dm = dims(&[2, 2], 4);
        let c = dm.ratio();
        assert!(exact_s_moment(&[], 2, &dm, &c, &guard).is_err());
        assert!(exact_s_moment(&[vec![0, 0], vec![0, 0]], 2, &dm, &c, &guard).is_err());
        assert!(exact_s_moment(&[vec![0]], 2, &dm, &c, &guard).is_err());
    }

    #[test]
    fn clt_limit_values() {
        let c = ExactValue::from_int(1);
        assert_eq!(clt_limit_moment(2, &c), c);
        assert_eq!(clt_limit_moment(3, &c), ExactValue::zero());
        assert_eq!(clt_limit_moment(4, &c), ExactValue::from_int(2));
        let c2 = ExactValue::from_ratio(1, 2);
        assert_eq!(clt_limit_moment(4, &c2), ExactValue::from_ratio(1, 2));
        assert_eq!(clt_limit_moment(6, &c2), ExactValue::from_ratio(5, 8));
    }

    #[test]
    fn technical_identities_small_cases() {
        // l=1, τ=id, fixed point: both joins have one block.
        let tau = Perm::identity(1);
        for bits in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            assert!(technical_identity_check(
                &tau,
                &bits,
                IdentityVariant::FixedPoint
            ));
        }
        // l=2, τ=(12), transposition with zero column: rhs = lhs + 1.
        let swap = Perm::from_cycles(2, &[&[0, 1]]).unwrap();
        assert!(technical_identity_check(
            &swap,
            &[0, 0, 0, 0],
            IdentityVariant::Transposition
        ));
    }

    #[test]
    fn kernel_gap_cases() {
        let guard = EnumGuard::default();
        let dm = dims(&[2, 2], 4);
        let c = dm.ratio();
        let w = eps(&["00", "11"]);
        assert_eq!(
            kernel_invariance_gap(&w, &w, &dm, &c, &guard).unwrap(),
            ExactValue::zero()
        );
        let w2 = eps(&["01", "10"]);
        let gap = kernel_invariance_gap(&w, &w2, &dm, &c, &guard).unwrap();
        let bound = kernel_gap_bound(2, &c, &dm);
        assert!(gap.rational() <= bound.rational());
        // kernel mismatch is rejected
        let w3 = eps(&["00", "00"]);
        assert!(matches!(
            kernel_invariance_gap(&w, &w3, &dm, &c, &guard),
            Err(MomentError::KernelMismatch)
        ));
    }
}
