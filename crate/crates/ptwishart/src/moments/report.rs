//! Structural analysis of a single permutation term of the moment sum.
//!
//! For `k = 1` the exponent `f_{1,j}(ε,σ)` is negative unless the column
//! `ε′_j` is constant on the cycles of `σ`, and vanishes exactly when, in
//! addition, the cycle partition of `σ` is non-crossing and every cycle of
//! length ≥ 3 runs in the orientation selected by the column bit
//! (increasing through its support for an untransposed leg, decreasing
//! for a transposed one). For `k ≥ 2` the exponent either splits
//! additively along a `σ`-invariant union of the blocks
//! `A_i = [im]\[(i−1)m]`, or is bounded above by `2−2k`. These facts are
//! re-verified on every call; a violation is a bug and panics.

use crate::combinat::{partition_of, Perm, SetPartition};

use super::{engine::f_exponent, EpsilonMatrix, MomentError};

/// An invariant split `[km] = C₁ ∪ C₂` into unions of the blocks `A_i`,
/// with the exponents of the two restricted permutations.
#[derive(Debug, Clone)]
pub struct SplitReport {
    /// Block indices (0-based `i` with `A_{i+1} = {im+1,…,(i+1)m}`) forming `C₁`.
    pub c1_blocks: Vec<usize>,
    pub c2_blocks: Vec<usize>,
    /// `f_{k₁,j}(ε, c₁⁻¹σc₁)` per leg.
    pub f1: Vec<i64>,
    /// `f_{k₂,j}(ε, c₂⁻¹σc₂)` per leg.
    pub f2: Vec<i64>,
}

/// Per-permutation report: the exponents `f_{k,j}(ε,σ)` for every leg and
/// the structural flags that explain their signs.
#[derive(Debug, Clone)]
pub struct SigmaReport {
    pub sigma: Perm,
    pub k: usize,
    /// `f_{k,j}(ε,σ)` per leg.
    pub f: Vec<i64>,
    /// Per leg: is `ε′_j` constant on the cycles of `σ`? (`k = 1` only.)
    pub constant_on_cycles: Option<Vec<bool>>,
    /// Is the cycle partition of `σ` non-crossing? (`k = 1` only.)
    pub noncrossing: Option<bool>,
    /// Per leg: is the column constant on every cycle with every cycle of
    /// length ≥ 3 run in the orientation its bit selects? Together with
    /// `noncrossing` this characterizes `f_{1,j} = 0`. (`k = 1` only.)
    pub oriented: Option<Vec<bool>>,
    /// The invariant split, when `k ≥ 2` and one exists.
    pub split: Option<SplitReport>,
}

/// Does every cycle of `sigma` run compatibly with the column: constant
/// bits, and for cycles of length ≥ 3 increasing through the sorted
/// support when the bit is 0, decreasing when it is 1.
fn column_oriented(sigma: &Perm, col: &[u8]) -> bool {
    sigma.cycles().iter().all(|cycle| {
        let mut support = cycle.clone();
        support.sort_unstable();
        let bit = col[support[0]];
        if support.iter().any(|&i| col[i] != bit) {
            return false;
        }
        let r = support.len();
        if r < 3 {
            return true;
        }
        if bit == 0 {
            (0..r).all(|i| sigma.apply(support[i]) == support[(i + 1) % r])
        } else {
            (0..r).all(|i| sigma.apply(support[i]) == support[(i + r - 1) % r])
        }
    })
}

/// Analyzes a `k = 1` term: computes `f_{1,j}` for every leg together with
/// the constancy, non-crossing and orientation flags, and asserts the
/// sign pattern: `f < 0` unless the column is constant on the cycles,
/// `f ≤ 0` always, and `f = 0` exactly when the partition is non-crossing
/// and the column orients every cycle.
pub fn classify_sigma(eps: &EpsilonMatrix, sigma: &Perm) -> Result<SigmaReport, MomentError> {
    let m = eps.word_len();
    if sigma.size() != m {
        return Err(MomentError::IndexOutOfRange(format!(
            "sigma acts on {} points, expected m = {m}",
            sigma.size()
        )));
    }
    let cycles = sigma.cycles();
    let pi = partition_of(sigma);
    let noncrossing = pi.is_noncrossing();
    let mut f = Vec::with_capacity(eps.legs());
    let mut constant = Vec::with_capacity(eps.legs());
    let mut oriented = Vec::with_capacity(eps.legs());
    for j in 0..eps.legs() {
        let col = eps.col(j);
        let const_j = cycles
            .iter()
            .all(|cycle| cycle.iter().all(|&i| col[i] == col[cycle[0]]));
        let oriented_j = column_oriented(sigma, &col);
        let fj = f_exponent(eps, sigma, j, 1)?;
        if !const_j {
            assert!(
                fj < 0,
                "sign law violated: f={fj} with non-constant column {j} on {sigma:?}"
            );
        } else {
            assert!(
                fj <= 0,
                "sign law violated: f={fj} > 0 with constant column {j} on {sigma:?}"
            );
        }
        assert_eq!(
            fj == 0,
            noncrossing && oriented_j,
            "sign law violated: f={fj}, noncrossing={noncrossing}, oriented={oriented_j} on {sigma:?}"
        );
        f.push(fj);
        constant.push(const_j);
        oriented.push(oriented_j);
    }
    Ok(SigmaReport {
        sigma: sigma.clone(),
        k: 1,
        f,
        constant_on_cycles: Some(constant),
        noncrossing: Some(noncrossing),
        oriented: Some(oriented),
        split: None,
    })
}

/// The finest decomposition of the block set `{A_1,…,A_k}` into
/// `σ`-invariant unions, as groups of block indices.
fn invariant_block_components(sigma: &Perm, k: usize, m: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..k * m {
        let (a, b) = (i / m, sigma.apply(i) / m);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..k {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

fn restrict_to_blocks(sigma: &Perm, blocks: &[usize], m: usize) -> Perm {
    let points: Vec<usize> = blocks.iter().flat_map(|&b| b * m..(b + 1) * m).collect();
    let index_of: std::collections::HashMap<usize, usize> = points
        .iter()
        .enumerate()
        .map(|(pos, &x)| (x, pos))
        .collect();
    let map: Vec<usize> = points.iter().map(|&x| index_of[&sigma.apply(x)]).collect();
    Perm::from_one_line(map).expect("restriction of a bijection is a bijection")
}

/// Analyzes a `k ≥ 2` term: searches for a `σ`-invariant split of `[km]`
/// into unions of the blocks `A_i`. If one exists, verifies the exact
/// additivity `f_{k,j}(ε,σ) = f_{k₁,j}(ε,c₁⁻¹σc₁) + f_{k₂,j}(ε,c₂⁻¹σc₂)`;
/// otherwise verifies the bound `f_{k,j}(ε,σ) ≤ 2−2k`. The report carries
/// the outcome.
pub fn split_check(
    eps: &EpsilonMatrix,
    sigma: &Perm,
    k: usize,
) -> Result<SigmaReport, MomentError> {
    let m = eps.word_len();
    if k < 2 {
        return Err(MomentError::IndexOutOfRange(
            "split_check requires k ≥ 2".into(),
        ));
    }
    if sigma.size() != k * m {
        return Err(MomentError::IndexOutOfRange(format!(
            "sigma acts on {} points, expected km = {}",
            sigma.size(),
            k * m
        )));
    }
    let f: Vec<i64> = (0..eps.legs())
        .map(|j| f_exponent(eps, sigma, j, k))
        .collect::<Result<_, _>>()?;
    let components = invariant_block_components(sigma, k, m);
    let split = if components.len() >= 2 {
        let c1_blocks = components[0].clone();
        let c2_blocks: Vec<usize> = components[1..].iter().flatten().copied().collect();
        let sigma1 = restrict_to_blocks(sigma, &c1_blocks, m);
        let sigma2 = restrict_to_blocks(sigma, &c2_blocks, m);
        let f1: Vec<i64> = (0..eps.legs())
            .map(|j| f_exponent(eps, &sigma1, j, c1_blocks.len()))
            .collect::<Result<_, _>>()?;
        let f2: Vec<i64> = (0..eps.legs())
            .map(|j| f_exponent(eps, &sigma2, j, c2_blocks.len()))
            .collect::<Result<_, _>>()?;
        for j in 0..eps.legs() {
            assert_eq!(
                f[j],
                f1[j] + f2[j],
                "split additivity violated at leg {j} on {sigma:?}"
            );
        }
        Some(SplitReport {
            c1_blocks,
            c2_blocks,
            f1,
            f2,
        })
    } else {
        let bound = 2 - 2 * k as i64;
        for (j, &fj) in f.iter().enumerate() {
            assert!(
                fj <= bound,
                "split bound violated at leg {j}: f={fj} > {bound} on {sigma:?}"
            );
        }
        None
    };
    Ok(SigmaReport {
        sigma: sigma.clone(),
        k,
        f,
        constant_on_cycles: None,
        noncrossing: None,
        oriented: None,
        split,
    })
}

/// Kernel of the word map `i ↦ ε_i` as a partition of the row set.
pub fn word_kernel(eps: &EpsilonMatrix) -> SetPartition {
    let rows: Vec<&[u8]> = eps.rows().collect();
    crate::combinat::ker(&rows)
}
