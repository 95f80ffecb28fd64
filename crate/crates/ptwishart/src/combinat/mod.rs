//! Permutation and set-partition algebra on the signed index set `[±N]`.
//!
//! `[±N]` denotes `{1,…,N} ∪ {−1,…,−N}`. Signed points are stored in a
//! dense encoding so that applying a permutation is a single array lookup:
//! `index(v) = v−1` for `v > 0` and `index(v) = N + |v| − 1` for `v < 0`.
//!
//! The module provides the structural permutations used by the moment
//! formulas — the sign-flip pairing `Δ`, the block-cycle `Γ`, the
//! column-controlled sign flips `E_j` — together with joins of pairings,
//! orbit partitions, non-crossing tests, and guarded enumeration streams.

mod enumerate;
mod partition;

pub use enumerate::{
    catalan, factorial, nc_partitions, pairings, permutations, permutations_with_partition,
    set_partitions, signed_pairings, EnumGuard, PermStream,
};
pub use partition::{ker, partition_of, SetPartition};

use std::fmt;

use thiserror::Error;

/// Errors from signed-permutation and partition operations.
#[derive(Debug, Error)]
pub enum CombinatError {
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("not a valid permutation: {0}")]
    NotAPermutation(String),
    #[error("not a pairing: {0}")]
    NotAPairing(String),
    #[error("composition of pairings has odd cycle count {0} (internal corruption)")]
    OddCycleCount(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("enumeration guard exceeded for {what}: requested {requested}, limit {limit}")]
    GuardExceeded {
        what: String,
        requested: u128,
        limit: u128,
    },
}

#[inline]
fn encode(n: usize, v: i64) -> usize {
    debug_assert!(v != 0 && v.unsigned_abs() as usize <= n);
    if v > 0 {
        (v - 1) as usize
    } else {
        n + (-v - 1) as usize
    }
}

#[inline]
fn decode(n: usize, idx: usize) -> i64 {
    if idx < n {
        idx as i64 + 1
    } else {
        -((idx - n) as i64 + 1)
    }
}

/// A bijection of the signed index set `[±N]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    n: usize,
    dense: Vec<u32>,
}

impl SignedPerm {
    /// Identity on `[±n]`.
    pub fn identity(n: usize) -> Self {
        SignedPerm {
            n,
            dense: (0..2 * n as u32).collect(),
        }
    }

    /// Builds a permutation from its action on signed values, checking
    /// bijectivity.
    pub fn from_fn(n: usize, f: impl Fn(i64) -> i64) -> Result<Self, CombinatError> {
        let mut dense = vec![u32::MAX; 2 * n];
        let mut seen = vec![false; 2 * n];
        for idx in 0..2 * n {
            let v = decode(n, idx);
            let w = f(v);
            if w == 0 || w.unsigned_abs() as usize > n {
                return Err(CombinatError::NotAPermutation(format!(
                    "image {w} of {v} outside [±{n}]"
                )));
            }
            let widx = encode(n, w);
            if seen[widx] {
                return Err(CombinatError::NotAPermutation(format!(
                    "value {w} hit twice"
                )));
            }
            seen[widx] = true;
            dense[idx] = widx as u32;
        }
        Ok(SignedPerm { n, dense })
    }

    /// Builds an involution from a list of disjoint transpositions; points
    /// not mentioned are fixed.
    pub fn from_pairs(n: usize, pairs: &[(i64, i64)]) -> Result<Self, CombinatError> {
        let mut dense: Vec<u32> = (0..2 * n as u32).collect();
        let mut touched = vec![false; 2 * n];
        for &(a, b) in pairs {
            for v in [a, b] {
                if v == 0 || v.unsigned_abs() as usize > n {
                    return Err(CombinatError::NotAPermutation(format!(
                        "point {v} outside [±{n}]"
                    )));
                }
            }
            let ia = encode(n, a);
            let ib = encode(n, b);
            if touched[ia] || touched[ib] || ia == ib {
                return Err(CombinatError::NotAPermutation(format!(
                    "pair ({a},{b}) overlaps a previous pair"
                )));
            }
            touched[ia] = true;
            touched[ib] = true;
            dense[ia] = ib as u32;
            dense[ib] = ia as u32;
        }
        Ok(SignedPerm { n, dense })
    }

    /// Size `N` of the positive part of the domain.
    pub fn size(&self) -> usize {
        self.n
    }

    /// Applies the permutation to a signed value.
    pub fn apply(&self, v: i64) -> i64 {
        decode(self.n, self.dense[encode(self.n, v)] as usize)
    }

    /// Raw dense mapping (index space of length `2N`).
    pub fn dense(&self) -> &[u32] {
        &self.dense
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SignedPerm) -> Result<SignedPerm, CombinatError> {
        if self.n != other.n {
            return Err(CombinatError::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let dense = other
            .dense
            .iter()
            .map(|&i| self.dense[i as usize])
            .collect();
        Ok(SignedPerm { n: self.n, dense })
    }

    pub fn inverse(&self) -> SignedPerm {
        let mut dense = vec![0u32; 2 * self.n];
        for (i, &j) in self.dense.iter().enumerate() {
            dense[j as usize] = i as u32;
        }
        SignedPerm { n: self.n, dense }
    }

    pub fn is_identity(&self) -> bool {
        self.dense.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    pub fn is_involution(&self) -> bool {
        self.dense
            .iter()
            .enumerate()
            .all(|(i, &j)| self.dense[j as usize] as usize == i)
    }

    /// Fixed-point-free involution test.
    pub fn is_pairing(&self) -> bool {
        self.is_involution() && self.dense.iter().enumerate().all(|(i, &j)| i as u32 != j)
    }

    /// Number of disjoint cycles on the full `2N`-point domain; fixed
    /// points count as cycles.
    pub fn cycle_count(&self) -> usize {
        cycle_count_dense(&self.dense)
    }

    /// Cycle decomposition as signed values; each cycle starts at its
    /// minimal dense index, fixed points included.
    pub fn cycles(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut visited = vec![false; 2 * self.n];
        for start in 0..2 * self.n {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !visited[x] {
                visited[x] = true;
                cycle.push(decode(self.n, x));
                x = self.dense[x] as usize;
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Debug for SignedPerm {
    /// Cycle notation over signed values, fixed points omitted, e.g.
    /// `(1 -2)(2 -1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for cycle in self.cycles() {
            if cycle.len() < 2 {
                continue;
            }
            wrote = true;
            write!(f, "(")?;
            for (i, v) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ")")?;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

fn cycle_count_dense(map: &[u32]) -> usize {
    let mut visited = vec![false; map.len()];
    let mut count = 0;
    for start in 0..map.len() {
        if visited[start] {
            continue;
        }
        count += 1;
        let mut x = start;
        while !visited[x] {
            visited[x] = true;
            x = map[x] as usize;
        }
    }
    count
}

/// A fixed-point-free involution of `[±N]`; every cycle has length two.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Pairing(SignedPerm);

impl Pairing {
    pub fn new(p: SignedPerm) -> Result<Self, CombinatError> {
        if !p.is_pairing() {
            return Err(CombinatError::NotAPairing(format!("{p:?}")));
        }
        Ok(Pairing(p))
    }

    pub fn perm(&self) -> &SignedPerm {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn apply(&self, v: i64) -> i64 {
        self.0.apply(v)
    }
}

/// `Δ^{(k)}` on `[±km]`: the sign flip `x ↦ −x`, a product of the `km`
/// transpositions `(1,−1)(2,−2)⋯(km,−km)`.
pub fn build_delta(k: usize, m: usize) -> Pairing {
    let n = k * m;
    let mut dense = vec![0u32; 2 * n];
    for i in 0..n {
        dense[i] = (n + i) as u32;
        dense[n + i] = i as u32;
    }
    Pairing(SignedPerm { n, dense })
}

/// `Γ^{(k)}` on `[±km]`: the cycles `(1,…,m)(m+1,…,2m)⋯((k−1)m+1,…,km)` on
/// the positive part, identity on the negative part.
pub fn build_gamma(k: usize, m: usize) -> SignedPerm {
    let n = k * m;
    let mut dense: Vec<u32> = (0..2 * n as u32).collect();
    for block in 0..k {
        for pos in 0..m {
            let src = block * m + pos;
            let dst = block * m + (pos + 1) % m;
            dense[src] = dst as u32;
        }
    }
    SignedPerm { n, dense }
}

/// `E_j^{(k)}` on `[±km] ≅ [k]×[±m]`: the involution that flips the sign of
/// `x` exactly when the column bit at row `((|x|−1) mod m) + 1` is one,
/// replicated across the `k` blocks.
pub fn build_eps_perm(column: &[u8], k: usize) -> SignedPerm {
    let m = column.len();
    assert!(m >= 1, "column must be non-empty");
    let n = k * m;
    let mut dense: Vec<u32> = (0..2 * n as u32).collect();
    for idx in 0..n {
        if column[idx % m] != 0 {
            dense[idx] = (n + idx) as u32;
            dense[n + idx] = idx as u32;
        }
    }
    SignedPerm { n, dense }
}

/// Embeds `σ ∈ S_N` into `[±N]`, acting as `σ` on positives and as the
/// identity on negatives.
pub fn embed_unsigned(sigma: &Perm) -> SignedPerm {
    let n = sigma.size();
    let mut dense: Vec<u32> = (0..2 * n as u32).collect();
    for i in 0..n {
        dense[i] = sigma.apply(i) as u32;
    }
    SignedPerm { n, dense }
}

/// Number of blocks of the join `π₁ ∨ π₂` of two pair partitions, computed
/// as half the cycle count of the composition `π₁ ∘ π₂`.
pub fn join_count(p1: &Pairing, p2: &Pairing) -> Result<usize, CombinatError> {
    if p1.size() != p2.size() {
        return Err(CombinatError::SizeMismatch {
            left: p1.size(),
            right: p2.size(),
        });
    }
    let composed = p1.perm().compose(p2.perm())?;
    let cycles = composed.cycle_count();
    if cycles % 2 != 0 {
        return Err(CombinatError::OddCycleCount(cycles));
    }
    Ok(cycles / 2)
}

/// Orbits of the group generated by `generators` acting on the dense-encoded
/// domain of `2N` points, as a set partition of `{0,…,2N−1}`.
pub fn orbit_partition(generators: &[&SignedPerm]) -> Result<SetPartition, CombinatError> {
    let n = match generators.first() {
        Some(g) => g.size(),
        None => return Err(CombinatError::InvalidPartition("no generators".into())),
    };
    for g in generators {
        if g.size() != n {
            return Err(CombinatError::SizeMismatch {
                left: n,
                right: g.size(),
            });
        }
    }
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for g in generators {
        for (i, &j) in g.dense.iter().enumerate() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j as usize));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..2 * n {
        let root = find(&mut parent, i);
        blocks.entry(root).or_default().push(i);
    }
    SetPartition::from_blocks(2 * n, blocks.into_values().collect())
}

/// A permutation of `{0,…,N−1}` in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Perm {
    map: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            map: (0..n as u32).collect(),
        }
    }

    pub fn from_one_line(map: Vec<usize>) -> Result<Self, CombinatError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(CombinatError::NotAPermutation(format!("one-line {map:?}")));
            }
            seen[v] = true;
        }
        Ok(Perm {
            map: map.into_iter().map(|v| v as u32).collect(),
        })
    }

    /// Builds a permutation of `{0,…,n−1}` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self, CombinatError> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= n || touched[x] {
                    return Err(CombinatError::NotAPermutation(format!("cycles {cycles:?}")));
                }
                touched[x] = true;
                map[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Perm::from_one_line(map)
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x] as usize
    }

    pub fn one_line(&self) -> &[u32] {
        &self.map
    }

    pub fn compose(&self, other: &Perm) -> Result<Perm, CombinatError> {
        if self.size() != other.size() {
            return Err(CombinatError::SizeMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(Perm {
            map: other.map.iter().map(|&i| self.map[i as usize]).collect(),
        })
    }

    pub fn inverse(&self) -> Perm {
        let mut map = vec![0u32; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            map[j as usize] = i as u32;
        }
        Perm { map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    pub fn cycle_count(&self) -> usize {
        let mut visited = vec![false; self.map.len()];
        let mut count = 0;
        for start in 0..self.map.len() {
            if visited[start] {
                continue;
            }
            count += 1;
            let mut x = start;
            while !visited[x] {
                visited[x] = true;
                x = self.map[x] as usize;
            }
        }
        count
    }

    /// Disjoint cycles, each starting at its minimal element, in order of
    /// those minima. Fixed points are included as singleton cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut visited = vec![false; self.map.len()];
        let mut out = Vec::new();
        for start in 0..self.map.len() {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !visited[x] {
                visited[x] = true;
                cycle.push(x);
                x = self.map[x] as usize;
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle notation over `1,…,N` with fixed points omitted, e.g. `(1 2)`.
    pub fn cycle_string(&self) -> String {
        let mut s = String::new();
        for cycle in self.cycles() {
            if cycle.len() < 2 {
                continue;
            }
            s.push('(');
            for (i, x) in cycle.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                s.push_str(&(x + 1).to_string());
            }
            s.push(')');
        }
        if s.is_empty() {
            s.push_str("()");
        }
        s
    }

    /// Advances to the lexicographic successor in one-line order; returns
    /// `false` (leaving the maximum in place) when none exists.
    pub fn next_lex(&mut self) -> bool {
        let m = &mut self.map;
        let n = m.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && m[i - 1] >= m[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while m[j] <= m[i - 1] {
            j -= 1;
        }
        m.swap(i - 1, j);
        m[i..].reverse();
        true
    }

    /// Lexicographic rank within `S_n`, as a factorial-base expansion.
    pub fn lex_rank(&self) -> u128 {
        let n = self.map.len();
        let mut rank: u128 = 0;
        for i in 0..n {
            let smaller = self.map[i + 1..].iter().filter(|&&x| x < self.map[i]).count();
            rank = rank * (n - i) as u128 + smaller as u128;
        }
        rank
    }

    /// Permutation of `{0,…,n−1}` at the given lexicographic rank.
    pub fn from_lex_rank(n: usize, mut rank: u128) -> Perm {
        let mut digits = vec![0usize; n];
        for i in (0..n).rev() {
            let base = (n - i) as u128;
            digits[i] = (rank % base) as usize;
            rank /= base;
        }
        let mut pool: Vec<u32> = (0..n as u32).collect();
        let mut map = Vec::with_capacity(n);
        for d in digits {
            map.push(pool.remove(d));
        }
        Perm { map }
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cycle_string())
    }
}
