//! Guarded exhaustive enumeration of permutations, pairings and set
//! partitions.
//!
//! Every enumeration checks its cost against an [`EnumGuard`] and fails
//! with an explicit resource error instead of truncating silently. Streams
//! are restartable, and permutation streams can be range-partitioned by
//! lexicographic rank for parallel consumption.

use super::{CombinatError, Pairing, Perm, SetPartition, SignedPerm};

/// Resource limits for exhaustive enumeration.
///
/// `max_degree` bounds the symmetric-group degree (default 10, about 3.6M
/// permutations); `max_work` bounds coarse operation-count estimates for
/// the bulk summations that walk these streams.
#[derive(Clone, Debug)]
pub struct EnumGuard {
    pub max_degree: usize,
    pub max_work: u128,
}

impl Default for EnumGuard {
    fn default() -> Self {
        EnumGuard {
            max_degree: 10,
            max_work: 200_000_000,
        }
    }
}

impl EnumGuard {
    pub fn with_max_degree(max_degree: usize) -> Self {
        EnumGuard {
            max_degree,
            ..EnumGuard::default()
        }
    }

    pub fn check_degree(&self, what: &str, degree: usize) -> Result<(), CombinatError> {
        if degree > self.max_degree {
            return Err(CombinatError::GuardExceeded {
                what: what.to_string(),
                requested: degree as u128,
                limit: self.max_degree as u128,
            });
        }
        Ok(())
    }

    pub fn check_work(&self, what: &str, work: u128) -> Result<(), CombinatError> {
        if work > self.max_work {
            return Err(CombinatError::GuardExceeded {
                what: what.to_string(),
                requested: work,
                limit: self.max_work,
            });
        }
        Ok(())
    }
}

/// `n!` as `u128`; degrees beyond 33 overflow and are rejected by every
/// guard long before that.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// The Catalan number `C_n = binom(2n, n) / (n + 1)`.
pub fn catalan(n: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * (2 * (2 * i + 1)) / (i + 2);
    }
    c
}

/// Lexicographic stream of all permutations of `{0,…,n−1}`, optionally
/// restricted to a rank range for parallel consumption.
pub struct PermStream {
    next: Option<Perm>,
    remaining: u128,
}

impl PermStream {
    fn all(n: usize) -> Self {
        PermStream {
            next: Some(Perm::identity(n)),
            remaining: factorial(n),
        }
    }

    /// Stream of `len` permutations of `{0,…,n−1}` starting at
    /// lexicographic rank `start`.
    pub fn range(n: usize, start: u128, len: u128) -> Self {
        let total = factorial(n);
        let start = start.min(total);
        let len = len.min(total - start);
        PermStream {
            next: (len > 0).then(|| Perm::from_lex_rank(n, start)),
            remaining: len,
        }
    }
}

impl Iterator for PermStream {
    type Item = Perm;

    fn next(&mut self) -> Option<Perm> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let current = self.next.take()?;
        if self.remaining > 0 {
            let mut succ = current.clone();
            succ.next_lex();
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// All permutations of `{0,…,n−1}` in lexicographic one-line order.
pub fn permutations(n: usize, guard: &EnumGuard) -> Result<PermStream, CombinatError> {
    guard.check_degree("permutations", n)?;
    Ok(PermStream::all(n))
}

/// All perfect matchings of `{0,…,m−1}` as pair partitions; empty for odd
/// `m`.
pub fn pairings(m: usize, guard: &EnumGuard) -> Result<Vec<SetPartition>, CombinatError> {
    guard.check_degree("pairings", m)?;
    let mut out = Vec::new();
    if m % 2 != 0 {
        return Ok(out);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(m / 2);
    let free: Vec<usize> = (0..m).collect();
    fn recurse(
        free: &[usize],
        pairs: &mut Vec<(usize, usize)>,
        out: &mut Vec<SetPartition>,
        m: usize,
    ) {
        if free.is_empty() {
            let blocks = pairs.iter().map(|&(a, b)| vec![a, b]).collect();
            out.push(SetPartition::from_blocks(m, blocks).expect("pairs partition the set"));
            return;
        }
        let a = free[0];
        for i in 1..free.len() {
            let b = free[i];
            let mut rest: Vec<usize> = free[1..].to_vec();
            rest.remove(i - 1);
            pairs.push((a, b));
            recurse(&rest, pairs, out, m);
            pairs.pop();
        }
    }
    recurse(&free, &mut pairs, &mut out, m);
    Ok(out)
}

/// All fixed-point-free involutions of `[±n]`, via the matchings of the
/// dense-encoded `2n`-point domain.
pub fn signed_pairings(n: usize, guard: &EnumGuard) -> Result<Vec<Pairing>, CombinatError> {
    let matchings = pairings(2 * n, guard)?;
    matchings
        .into_iter()
        .map(|p| {
            let pairs: Vec<(i64, i64)> = p
                .blocks()
                .iter()
                .map(|b| (super::decode(n, b[0]), super::decode(n, b[1])))
                .collect();
            Pairing::new(SignedPerm::from_pairs(n, &pairs)?)
        })
        .collect()
}

/// All set partitions of `{0,…,m−1}`, enumerated via restricted growth
/// strings.
pub fn set_partitions(m: usize, guard: &EnumGuard) -> Result<Vec<SetPartition>, CombinatError> {
    guard.check_degree("set_partitions", m)?;
    let mut out = Vec::new();
    if m == 0 {
        out.push(SetPartition::from_blocks(0, Vec::new()).unwrap());
        return Ok(out);
    }
    let mut rgs = vec![0usize; m];
    loop {
        let blocks_n = rgs.iter().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); blocks_n];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        out.push(SetPartition::from_blocks(m, blocks).unwrap());
        // next restricted growth string
        let mut i = m;
        loop {
            if i == 1 {
                return Ok(out);
            }
            i -= 1;
            let cap = 1 + rgs[..i].iter().copied().max().unwrap();
            if rgs[i] < cap {
                rgs[i] += 1;
                for r in rgs[i + 1..].iter_mut() {
                    *r = 0;
                }
                break;
            }
        }
    }
}

/// All non-crossing partitions of `{0,…,m−1}`.
pub fn nc_partitions(m: usize, guard: &EnumGuard) -> Result<Vec<SetPartition>, CombinatError> {
    Ok(set_partitions(m, guard)?
        .into_iter()
        .filter(|p| p.is_noncrossing())
        .collect())
}

/// All permutations of `{0,…,m−1}` whose cycle partition equals `pi`; there
/// are `∏ (|V_i| − 1)!` of them.
pub fn permutations_with_partition(
    pi: &SetPartition,
    guard: &EnumGuard,
) -> Result<Vec<Perm>, CombinatError> {
    guard.check_degree("permutations_with_partition", pi.size())?;
    // For each block, the distinct cycles on it: fix the minimum and take
    // every arrangement of the remaining elements.
    let mut per_block: Vec<Vec<Vec<usize>>> = Vec::new();
    for block in pi.blocks() {
        let mut cycles = Vec::new();
        let rest: Vec<usize> = block[1..].to_vec();
        let mut idx = Perm::identity(rest.len());
        loop {
            let mut cycle = vec![block[0]];
            cycle.extend(rest.iter().enumerate().map(|(i, _)| rest[idx.apply(i)]));
            cycles.push(cycle);
            if !idx.next_lex() {
                break;
            }
        }
        per_block.push(cycles);
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_block.len()];
    loop {
        let cycles: Vec<&[usize]> = per_block
            .iter()
            .zip(&choice)
            .map(|(c, &i)| c[i].as_slice())
            .collect();
        out.push(Perm::from_cycles(pi.size(), &cycles).expect("disjoint cycles"));
        let mut b = per_block.len();
        loop {
            if b == 0 {
                return Ok(out);
            }
            b -= 1;
            if choice[b] + 1 < per_block[b].len() {
                choice[b] += 1;
                for c in choice[b + 1..].iter_mut() {
                    *c = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::partition_of;
    use super::*;

    #[test]
    fn permutation_stream_counts_and_order() {
        let guard = EnumGuard::default();
        let all: Vec<Perm> = permutations(3, &guard).unwrap().collect();
        assert_eq!(all.len(), 6);
        assert!(all[0].is_identity());
        assert_eq!(all[5].one_line(), &[2, 1, 0]);
        assert!(permutations(11, &guard).is_err());
    }

    #[test]
    fn stream_ranges_partition_the_whole() {
        let whole: Vec<Perm> = PermStream::range(4, 0, 24).collect();
        let mut glued = Vec::new();
        for start in [0u128, 7, 14, 21] {
            glued.extend(PermStream::range(4, start, 7));
        }
        assert_eq!(whole, glued);
    }

    #[test]
    fn pairing_counts() {
        let guard = EnumGuard::default();
        assert_eq!(pairings(4, &guard).unwrap().len(), 3);
        assert_eq!(pairings(6, &guard).unwrap().len(), 15);
        assert_eq!(pairings(3, &guard).unwrap().len(), 0);
        assert_eq!(signed_pairings(3, &guard).unwrap().len(), 15);
    }

    #[test]
    fn catalan_counts_by_brute_force() {
        let guard = EnumGuard::default();
        // |NC(m)| = Catalan(m)
        for m in 1..=6usize {
            assert_eq!(nc_partitions(m, &guard).unwrap().len() as u128, catalan(m));
        }
        assert_eq!(nc_partitions(4, &guard).unwrap().len(), 14);
        // non-crossing pairings of [2r]: Catalan(r)
        for r in 1..=4usize {
            let nc_pairings = pairings(2 * r, &guard)
                .unwrap()
                .into_iter()
                .filter(|p| p.is_noncrossing())
                .count();
            assert_eq!(nc_pairings as u128, catalan(r));
        }
        // count of non-crossing pairings of [6] → 5 out of 15
        assert_eq!(
            pairings(6, &guard)
                .unwrap()
                .iter()
                .filter(|p| p.is_noncrossing())
                .count(),
            5
        );
    }

    #[test]
    fn set_partition_counts_are_bell() {
        let guard = EnumGuard::default();
        let bell = [1usize, 1, 2, 5, 15, 52, 203];
        for (m, &b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(m, &guard).unwrap().len(), b);
        }
    }

    #[test]
    fn permutations_with_partition_matches_cycles() {
        let guard = EnumGuard::default();
        let full3 = SetPartition::full(3);
        let perms = permutations_with_partition(&full3, &guard).unwrap();
        assert_eq!(perms.len(), 2); // (123) and (132)
        for p in &perms {
            assert_eq!(partition_of(p), full3);
        }
        // consistency: every σ ∈ S_4 appears under exactly its partition,
        // and the count is ∏(|V|−1)!.
        for pi in set_partitions(4, &guard).unwrap() {
            let with = permutations_with_partition(&pi, &guard).unwrap();
            let expected: u128 = pi
                .blocks()
                .iter()
                .map(|b| factorial(b.len() - 1))
                .product();
            assert_eq!(with.len() as u128, expected);
            for p in &with {
                assert_eq!(partition_of(p), pi);
            }
        }
        let total: usize = set_partitions(4, &guard)
            .unwrap()
            .iter()
            .map(|pi| permutations_with_partition(pi, &guard).unwrap().len())
            .sum();
        assert_eq!(total, 24);
    }

    #[test]
    fn partition_order_is_a_partial_order() {
        let guard = EnumGuard::default();
        for m in 1..=4usize {
            let all = set_partitions(m, &guard).unwrap();
            for a in &all {
                assert!(a.leq(a).unwrap());
                for b in &all {
                    if a.leq(b).unwrap() && b.leq(a).unwrap() {
                        assert_eq!(a, b);
                    }
                    for c in &all {
                        if a.leq(b).unwrap() && b.leq(c).unwrap() {
                            assert!(a.leq(c).unwrap());
                        }
                    }
                }
            }
        }
    }
}
