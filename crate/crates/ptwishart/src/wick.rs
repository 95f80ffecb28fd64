//! Brute-force oracle for `E(X_ε^k)` via the raw Gaussian expansion.
//!
//! `(d₁⋯dₙ)^{(m+1)k}·X_ε^k` is a polynomial in the Ginibre entries,
//! indexed by triples of functions: a multi-index `I` on `[k]×[±m]` over
//! the first `n−1` legs, a row index `Q` over the last leg, and a column
//! index `T` on `[k]×[m]`. `I` and `Q` range over the sets `A(ε,k)` and
//! `B(ε,k)` cut out by composition identities with the structural pairing
//! `E_j^{(k)} Γ^{(k)} Δ^{(k)} (Γ^{(k)})^{-1} E_j^{(k)}`. The expectation of
//! each monomial is, by the Wick formula, the number of `σ ∈ S_{km}`
//! matching the conjugated labels to the unconjugated ones.
//!
//! The oracle enumerates these raw index assignments directly — it never
//! touches the join-count exponent machinery of the moment engine, which
//! is exactly what makes it an independent check. It is usable only at
//! tiny sizes and rejects anything else with a cost estimate.

use rayon::prelude::*;

use num::bigint::BigInt;
use num::rational::BigRational;
use thiserror::Error;

use crate::combinat::{build_delta, build_eps_perm, build_gamma, factorial, Perm, SignedPerm};
use crate::moments::{DimSpec, EpsilonMatrix, ExactValue};

/// Errors from the Wick oracle.
#[derive(Debug, Error)]
pub enum WickError {
    #[error("oracle cost {cost} exceeds the hard guard {limit} (D^(2km)·p^(km)·(km)!)")]
    GuardExceeded { cost: u128, limit: u128 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Hard default for the brute-force cost estimate `D^{2km}·p^{km}·(km)!`.
pub const DEFAULT_ORACLE_GUARD: u128 = 100_000_000;

/// One choice of the index functions `(I, Q, T)`.
///
/// `I` assigns to each point of `[k]×[±m]` a multi-index over
/// `[d₁]×⋯×[d_{n−1}]`, `Q` a row in `[dₙ]`, and `T` (on the positive part
/// only) a sample column in `[p]`. Membership in `A(ε,k)`/`B(ε,k)` is a
/// checkable predicate, not a construction invariant.
#[derive(Debug, Clone)]
pub struct IndexAssignment {
    /// `i_table[j][x]` is the `j`-th component of the multi-index at dense
    /// point `x` of `[±km]`, for legs `j = 0..n−1`.
    pub i_table: Vec<Vec<u32>>,
    /// `q_table[x]` is the last-leg row at dense point `x`.
    pub q_table: Vec<u32>,
    /// `t_table[x]` for the `km` positive points.
    pub t_table: Vec<u32>,
}

fn structural_pairing(eps: &EpsilonMatrix, k: usize, j: usize) -> SignedPerm {
    let m = eps.word_len();
    let gamma = build_gamma(k, m);
    let delta = build_delta(k, m);
    let gdg = gamma
        .compose(delta.perm())
        .and_then(|p| p.compose(&gamma.inverse()))
        .expect("sizes agree");
    let e = build_eps_perm(&eps.col(j), k);
    e.compose(&gdg).and_then(|p| p.compose(&e)).expect("sizes agree")
}

/// Checks the two membership predicates: `I ∈ A(ε,k)` (each component
/// constant along the structural pairing of its leg) and `Q ∈ B(ε,k)`.
pub fn membership_predicates(
    assignment: &IndexAssignment,
    eps: &EpsilonMatrix,
    k: usize,
) -> (bool, bool) {
    let n = eps.legs();
    let in_a = (0..n.saturating_sub(1)).all(|j| {
        let pairing = structural_pairing(eps, k, j);
        let table = &assignment.i_table[j];
        pairing
            .dense()
            .iter()
            .enumerate()
            .all(|(x, &px)| table[x] == table[px as usize])
    });
    let pairing_n = structural_pairing(eps, k, n - 1);
    let in_b = pairing_n
        .dense()
        .iter()
        .enumerate()
        .all(|(x, &px)| assignment.q_table[x] == assignment.q_table[px as usize]);
    (in_a, in_b)
}

/// All functions from `points` slots into `{0,…,base−1}`, filtered by a
/// predicate.
fn enumerate_tables(points: usize, base: u32, keep: impl Fn(&[u32]) -> bool) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut table = vec![0u32; points];
    loop {
        if keep(&table) {
            out.push(table.clone());
        }
        let mut pos = points;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if table[pos] + 1 < base {
                table[pos] += 1;
                for t in table[pos + 1..].iter_mut() {
                    *t = 0;
                }
                break;
            }
        }
    }
}

fn respects(pairing: &SignedPerm, table: &[u32]) -> bool {
    pairing
        .dense()
        .iter()
        .enumerate()
        .all(|(x, &px)| table[x] == table[px as usize])
}

/// Cost estimate `D^{2km}·p^{km}·(km)!` used by the hard guard, saturating
/// at `u128::MAX`.
pub fn oracle_cost(eps: &EpsilonMatrix, k: usize, dims: &DimSpec) -> u128 {
    let km = (k * eps.word_len()) as u32;
    let d_total = dims.total_dim();
    d_total
        .checked_pow(2 * km)
        .and_then(|a| (dims.p() as u128).checked_pow(km).map(|b| (a, b)))
        .and_then(|(a, b)| a.checked_mul(b))
        .and_then(|ab| ab.checked_mul(factorial(km as usize)))
        .unwrap_or(u128::MAX)
}

/// The `k`-th moment `E(X_ε^k)` as the Wick-formula count over all raw
/// index assignments, divided by `D^{(m+1)k}`. Exact, and by the moment
/// theorem equal to the engine's `exact_moment`; intended only for tiny
/// sizes.
pub fn wick_exact_moment(
    eps: &EpsilonMatrix,
    k: usize,
    dims: &DimSpec,
) -> Result<ExactValue, WickError> {
    wick_exact_moment_guarded(eps, k, dims, DEFAULT_ORACLE_GUARD, false)
}

/// As [`wick_exact_moment`], with the conjugated and unconjugated label
/// roles swapped. Exact equality of the two routes is the numerical form
/// of `X_ε` being real-valued.
pub fn wick_exact_moment_conjugate(
    eps: &EpsilonMatrix,
    k: usize,
    dims: &DimSpec,
) -> Result<ExactValue, WickError> {
    wick_exact_moment_guarded(eps, k, dims, DEFAULT_ORACLE_GUARD, true)
}

/// Full-control variant: explicit guard limit and label-role swap.
pub fn wick_exact_moment_guarded(
    eps: &EpsilonMatrix,
    k: usize,
    dims: &DimSpec,
    guard_limit: u128,
    conjugate: bool,
) -> Result<ExactValue, WickError> {
    if k == 0 {
        return Err(WickError::InvalidInput("power k must be positive".into()));
    }
    if eps.legs() != dims.legs() {
        return Err(WickError::InvalidInput(format!(
            "epsilon has {} legs, dims has {}",
            eps.legs(),
            dims.legs()
        )));
    }
    let cost = oracle_cost(eps, k, dims);
    if cost > guard_limit {
        return Err(WickError::GuardExceeded {
            cost,
            limit: guard_limit,
        });
    }

    let m = eps.word_len();
    let n = eps.legs();
    let km = k * m;
    let points = 2 * km;

    // Per-leg candidate component tables for I, already filtered to A(ε,k).
    let mut i_candidates: Vec<Vec<Vec<u32>>> = Vec::new();
    for j in 0..n - 1 {
        let pairing = structural_pairing(eps, k, j);
        i_candidates.push(enumerate_tables(points, dims.dim(j) as u32, |t| {
            respects(&pairing, t)
        }));
    }
    let pairing_n = structural_pairing(eps, k, n - 1);
    let q_candidates = enumerate_tables(points, dims.dim(n - 1) as u32, |t| {
        respects(&pairing_n, t)
    });
    let t_candidates = enumerate_tables(km, dims.p() as u32, |_| true);

    // All permutations of S_{km}, reused across every triple.
    let mut sigmas: Vec<Perm> = Vec::with_capacity(factorial(km) as usize);
    let mut sigma = Perm::identity(km);
    loop {
        sigmas.push(sigma.clone());
        if !sigma.next_lex() {
            break;
        }
    }

    // Walk the cartesian product of the per-leg I choices.
    let i_shape: Vec<usize> = i_candidates.iter().map(|c| c.len()).collect();
    let i_combos: usize = i_shape.iter().product();

    let total: u128 = (0..i_combos)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let choice: Vec<&Vec<u32>> = i_shape
                .iter()
                .enumerate()
                .map(|(j, &len)| {
                    let idx = rest % len;
                    rest /= len;
                    &i_candidates[j][idx]
                })
                .collect();
            let mut count: u128 = 0;
            // α(x) and β(x) agree on T and differ by the sign of the
            // [±km] point fed to I and Q.
            for q in &q_candidates {
                for t in &t_candidates {
                    for sigma in &sigmas {
                        let matches = (0..km).all(|x| {
                            let s = sigma.apply(x);
                            // plain roles: β(x) = α(σ(x)), i.e. the labels at
                            // the negative point x match those at the positive
                            // point σ(x); conjugate roles: α(x) = β(σ(x)).
                            let (from, to) = if conjugate { (x, km + s) } else { (km + x, s) };
                            t[x] == t[s]
                                && q[from] == q[to]
                                && choice.iter().all(|table| table[from] == table[to])
                        });
                        if matches {
                            count += 1;
                        }
                    }
                }
            }
            count
        })
        .sum();

    let d_total = BigInt::from(dims.total_dim());
    let denom = d_total.pow(((m + 1) * k) as u32);
    Ok(ExactValue::from_big(BigRational::new(
        BigInt::from(total),
        denom,
    )))
}
