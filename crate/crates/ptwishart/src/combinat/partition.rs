//! Set partitions of `{0,…,m−1}` in canonical form.

use std::collections::HashMap;
use std::hash::Hash;

use super::{CombinatError, Perm};

/// A partition of `{0,…,size−1}` into disjoint non-empty blocks. Blocks are
/// stored sorted by their minimum element (and sorted internally), which
/// makes equality canonical.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SetPartition {
    size: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn from_blocks(size: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self, CombinatError> {
        let mut seen = vec![false; size];
        let mut covered = 0usize;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(CombinatError::InvalidPartition("empty block".into()));
            }
            block.sort_unstable();
            for &x in block.iter() {
                if x >= size {
                    return Err(CombinatError::InvalidPartition(format!(
                        "element {x} outside ground set of size {size}"
                    )));
                }
                if seen[x] {
                    return Err(CombinatError::InvalidPartition(format!(
                        "element {x} appears twice"
                    )));
                }
                seen[x] = true;
                covered += 1;
            }
        }
        if covered != size {
            return Err(CombinatError::InvalidPartition(format!(
                "blocks cover {covered} of {size} elements"
            )));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(SetPartition { size, blocks })
    }

    pub fn singletons(size: usize) -> Self {
        SetPartition {
            size,
            blocks: (0..size).map(|i| vec![i]).collect(),
        }
    }

    pub fn full(size: usize) -> Self {
        let blocks = if size == 0 {
            Vec::new()
        } else {
            vec![(0..size).collect()]
        };
        SetPartition { size, blocks }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Index of the block containing each element.
    pub fn block_ids(&self) -> Vec<usize> {
        let mut ids = vec![0usize; self.size];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                ids[x] = b;
            }
        }
        ids
    }

    /// Every block consists of two elements.
    pub fn is_pair_partition(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    /// True iff there is no crossing `a < b < c < d` with `a,c` in one
    /// block and `b,d` in another.
    pub fn is_noncrossing(&self) -> bool {
        let ids = self.block_ids();
        // Scan with a stack of open blocks; a block must be closable only
        // when it is on top.
        let mut stack: Vec<usize> = Vec::new();
        let mut remaining: Vec<usize> = self.blocks.iter().map(|b| b.len()).collect();
        for x in 0..self.size {
            let b = ids[x];
            match stack.last() {
                Some(&top) if top == b => {}
                _ => {
                    if stack.contains(&b) {
                        return false; // reopened below the top: crossing
                    }
                    stack.push(b);
                }
            }
            remaining[b] -= 1;
            while let Some(&top) = stack.last() {
                if remaining[top] == 0 {
                    stack.pop();
                } else {
                    break;
                }
            }
        }
        true
    }

    /// Refinement order: true iff every block of `self` is contained in a
    /// block of `other`.
    pub fn leq(&self, other: &SetPartition) -> Result<bool, CombinatError> {
        if self.size != other.size {
            return Err(CombinatError::SizeMismatch {
                left: self.size,
                right: other.size,
            });
        }
        let ids = other.block_ids();
        Ok(self
            .blocks
            .iter()
            .all(|block| block.iter().all(|&x| ids[x] == ids[block[0]])))
    }
}

/// Kernel of a function given by its values: the partition of the domain
/// into fibers.
pub fn ker<L: Eq + Hash>(values: &[L]) -> SetPartition {
    let mut groups: HashMap<&L, Vec<usize>> = HashMap::new();
    for (i, v) in values.iter().enumerate() {
        groups.entry(v).or_default().push(i);
    }
    SetPartition::from_blocks(values.len(), groups.into_values().collect())
        .expect("fibers always partition the domain")
}

/// Partition of `{0,…,N−1}` associated to a permutation via its cycle
/// decomposition.
pub fn partition_of(sigma: &Perm) -> SetPartition {
    SetPartition::from_blocks(sigma.size(), sigma.cycles())
        .expect("cycles always partition the domain")
}
