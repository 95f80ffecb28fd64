//! The exact joint-moment engine.
//!
//! `E(X_ε^k)` is a sum over all of `S_{km}`; the per-permutation work is a
//! handful of cycle counts on `[±km]`, so the sum is evaluated as a
//! parallel map over lexicographic rank ranges. Terms are first bucketed
//! by their exponent signature `(#σ, f_{k,1},…,f_{k,n})` with plain
//! integer counters; exact rational arithmetic happens once per distinct
//! signature.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use crate::combinat::{
    build_delta, build_eps_perm, build_gamma, factorial, EnumGuard, Perm,
};

use super::{DimSpec, EpsilonMatrix, ExactValue, MomentError};

/// Exponent signature of one term: `[#σ, f_1, …, f_n]`.
type Signature = SmallVec<[i32; 9]>;

/// Precomputed data for evaluating `f_{k,j}(ε,·)` over `S_{km}`.
pub(crate) struct FContext {
    k: usize,
    m: usize,
    km: usize,
    /// Dense form of the pairing `E_j^{(k)} Γ^{(k)} Δ^{(k)} (Γ^{(k)})^{-1} E_j^{(k)}`, per leg.
    eps_pairings: Vec<Vec<u32>>,
}

impl FContext {
    pub(crate) fn new(eps: &EpsilonMatrix, k: usize) -> Self {
        assert!(k >= 1, "power k must be positive");
        let m = eps.word_len();
        let km = k * m;
        assert!(2 * km <= 128, "signed domain exceeds bitmask width");
        let gamma = build_gamma(k, m);
        let delta = build_delta(k, m);
        let gdg = gamma
            .compose(delta.perm())
            .and_then(|p| p.compose(&gamma.inverse()))
            .expect("same size by construction");
        let eps_pairings = (0..eps.legs())
            .map(|j| {
                let e = build_eps_perm(&eps.col(j), k);
                let p = e
                    .compose(&gdg)
                    .and_then(|q| q.compose(&e))
                    .expect("same size by construction");
                debug_assert!(p.is_pairing());
                p.dense().to_vec()
            })
            .collect();
        FContext {
            k,
            m,
            km,
            eps_pairings,
        }
    }

    fn legs(&self) -> usize {
        self.eps_pairings.len()
    }

    /// `#σ` together with `f_{k,j}(ε,σ)` for every leg. `scratch` must have
    /// length `2km` and is overwritten with the pairing `σΔ^{(k)}σ^{-1}`.
    fn signature(&self, sigma: &Perm, scratch: &mut [u32]) -> Signature {
        let km = self.km;
        let map = sigma.one_line();
        debug_assert_eq!(map.len(), km);
        // σΔσ⁻¹ pairs σ(i) with −i for each positive i.
        for i in 0..km {
            let x = map[i] as usize;
            scratch[x] = (km + i) as u32;
            scratch[km + i] = x as u32;
        }
        let cycles = cycle_count_fn(km, |x| map[x] as usize);
        let mut sig: Signature = SmallVec::with_capacity(self.legs() + 1);
        sig.push(cycles as i32);
        let base = cycles as i64 - (self.k * (self.m + 1)) as i64;
        for pairing in &self.eps_pairings {
            let product_cycles =
                cycle_count_fn(2 * km, |x| pairing[scratch[x] as usize] as usize);
            debug_assert_eq!(product_cycles % 2, 0);
            let join = product_cycles / 2;
            sig.push((join as i64 + base) as i32);
        }
        sig
    }
}

#[inline]
fn cycle_count_fn(len: usize, map: impl Fn(usize) -> usize) -> usize {
    let mut visited: u128 = 0;
    let mut count = 0;
    for start in 0..len {
        if visited & (1u128 << start) != 0 {
            continue;
        }
        count += 1;
        let mut x = start;
        while visited & (1u128 << x) == 0 {
            visited |= 1u128 << x;
            x = map(x);
        }
    }
    count
}

fn for_each_perm_in_range(n: usize, start: u128, len: u128, mut f: impl FnMut(&Perm)) {
    if len == 0 {
        return;
    }
    let mut perm = Perm::from_lex_rank(n, start);
    let mut left = len;
    loop {
        f(&perm);
        left -= 1;
        if left == 0 || !perm.next_lex() {
            break;
        }
    }
}

/// The exponent `f_{k,j}(ε,σ)` for `σ ∈ S_{km}` and leg `j` (0-based):
/// the number of blocks of the join of the two structural pairings of
/// `[±km]`, plus `#σ`, minus `k(m+1)`.
pub fn f_exponent(
    eps: &EpsilonMatrix,
    sigma: &Perm,
    j: usize,
    k: usize,
) -> Result<i64, MomentError> {
    if j >= eps.legs() {
        return Err(MomentError::IndexOutOfRange(format!(
            "leg {j} of {}",
            eps.legs()
        )));
    }
    if sigma.size() != k * eps.word_len() {
        return Err(MomentError::IndexOutOfRange(format!(
            "sigma acts on {} points, expected km = {}",
            sigma.size(),
            k * eps.word_len()
        )));
    }
    let ctx = FContext::new(eps, k);
    let mut scratch = vec![0u32; 2 * ctx.km];
    let sig = ctx.signature(sigma, &mut scratch);
    Ok(sig[j + 1] as i64)
}

fn evaluate_signatures(
    buckets: &HashMap<Signature, u64>,
    dims: &DimSpec,
) -> ExactValue {
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use num::One;

    let mut total = BigRational::from_integer(BigInt::from(0));
    for (sig, &count) in buckets {
        let cycles = sig[0] as i64;
        let mut num = BigInt::from(count) * BigInt::from(dims.p()).pow(cycles as u32);
        let mut den = BigInt::one();
        for (j, &f) in sig[1..].iter().enumerate() {
            let e = f as i64 - cycles;
            let d = BigInt::from(dims.dim(j));
            if e >= 0 {
                num *= d.pow(e as u32);
            } else {
                den *= d.pow((-e) as u32);
            }
        }
        total += BigRational::new(num, den);
    }
    ExactValue::from_big(total)
}

fn moment_buckets(
    eps: &EpsilonMatrix,
    k: usize,
    guard: &EnumGuard,
    filter: Option<&(dyn Fn(&Perm) -> bool + Sync)>,
) -> Result<HashMap<Signature, u64>, MomentError> {
    let km = k * eps.word_len();
    guard.check_degree("exact moment sum over S_km", km)?;
    let ctx = FContext::new(eps, k);
    let total = factorial(km);
    let chunk: u128 = 100_000;
    let n_chunks = total.div_ceil(chunk);
    let buckets = (0..n_chunks as u64)
        .into_par_iter()
        .map(|ci| {
            let start = ci as u128 * chunk;
            let mut local: HashMap<Signature, u64> = HashMap::new();
            let mut scratch = vec![0u32; 2 * km];
            for_each_perm_in_range(km, start, chunk.min(total - start), |perm| {
                if let Some(f) = filter {
                    if !f(perm) {
                        return;
                    }
                }
                let sig = ctx.signature(perm, &mut scratch);
                *local.entry(sig).or_insert(0) += 1;
            });
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (sig, count) in b {
                *a.entry(sig).or_insert(0) += count;
            }
            a
        });
    Ok(buckets)
}

/// The exact `k`-th moment `E(X_ε^k)` of `X_ε = tr(W^{ε_1} ⋯ W^{ε_m})`.
pub fn exact_moment(
    eps: &EpsilonMatrix,
    k: usize,
    dims: &DimSpec,
    guard: &EnumGuard,
) -> Result<ExactValue, MomentError> {
    dims.check_legs(eps)?;
    let buckets = moment_buckets(eps, k, guard, None)?;
    Ok(evaluate_signatures(&buckets, dims))
}

/// One summand of the moment formula, for debugging dumps.
#[derive(Debug, Clone, Serialize)]
pub struct TermRecord {
    /// `σ` in cycle notation over `1..=km`.
    pub sigma: String,
    pub cycles: usize,
    pub f: Vec<i64>,
    pub term: ExactValue,
    pub float: f64,
}

/// As [`exact_moment`], additionally writing one JSON line per `σ` (in
/// lexicographic one-line order) to `sink`.
pub fn exact_moment_with_dump(
    eps: &EpsilonMatrix,
    k: usize,
    dims: &DimSpec,
    guard: &EnumGuard,
    sink: &mut dyn Write,
) -> Result<ExactValue, MomentError> {
    dims.check_legs(eps)?;
    let km = k * eps.word_len();
    guard.check_degree("exact moment sum over S_km", km)?;
    let ctx = FContext::new(eps, k);
    let mut scratch = vec![0u32; 2 * km];
    let mut total = ExactValue::zero();
    let mut io_err: Option<std::io::Error> = None;
    for_each_perm_in_range(km, 0, factorial(km), |perm| {
        if io_err.is_some() {
            return;
        }
        let sig = ctx.signature(perm, &mut scratch);
        let mut bucket = HashMap::new();
        bucket.insert(sig.clone(), 1u64);
        let term = evaluate_signatures(&bucket, dims);
        total += &term;
        let record = TermRecord {
            sigma: perm.cycle_string(),
            cycles: sig[0] as usize,
            f: sig[1..].iter().map(|&f| f as i64).collect(),
            float: term.to_f64(),
            term,
        };
        let line = serde_json::to_string(&record).expect("record serializes");
        if let Err(e) = writeln!(sink, "{line}") {
            io_err = Some(e);
        }
    });
    if let Some(e) = io_err {
        return Err(MomentError::Io(e));
    }
    Ok(total)
}

/// The exact variance `Var(X_ε) = E(X_ε²) − E(X_ε)²`.
///
/// Internally also evaluates the restricted sum over `σ ∈ S_{2m}` with
/// `σ([m]) ≠ [m]`, which equals the variance term by term; the two routes
/// are compared exactly and a mismatch is reported as an internal
/// inconsistency.
pub fn variance_exact(
    eps: &EpsilonMatrix,
    dims: &DimSpec,
    guard: &EnumGuard,
) -> Result<ExactValue, MomentError> {
    dims.check_legs(eps)?;
    let m = eps.word_len();
    let second = exact_moment(eps, 2, dims, guard)?;
    let first = exact_moment(eps, 1, dims, guard)?;
    let variance = &second - &(&first * &first);

    let moves_first_block = move |sigma: &Perm| -> bool {
        (0..m).any(|i| sigma.apply(i) >= m)
    };
    let buckets = moment_buckets(eps, 2, guard, Some(&moves_first_block))?;
    let restricted = evaluate_signatures(&buckets, dims);
    if restricted != variance {
        return Err(MomentError::Inconsistency(format!(
            "variance routes disagree: subtraction gives {variance}, restricted sum gives {restricted}"
        )));
    }
    Ok(variance)
}
