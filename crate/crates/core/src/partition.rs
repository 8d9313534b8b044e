//! The model state: an ordered sequence of disjoint, non-empty blocks of
//! objects. Block 0 is ranked highest.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// An ordered set partition of the objects `0..n_objects`.
///
/// Members of each block are kept sorted, so two partitions that differ only
/// in how a block was listed compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedPartition {
    blocks: Vec<Vec<usize>>,
    n_objects: usize,
}

impl OrderedPartition {
    /// Builds a partition whose objects are `0..k` for `k` the total number of
    /// listed objects.
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = blocks.iter().map(Vec::len).sum();
        Self::with_objects(blocks, n)
    }

    pub fn with_objects(mut blocks: Vec<Vec<usize>>, n_objects: usize) -> Result<Self> {
        let mut seen = vec![false; n_objects];
        let mut count = 0;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            block.sort_unstable();
            for &o in block.iter() {
                if o >= n_objects {
                    return Err(Error::InvalidPartition(format!(
                        "object {o} outside 0..{n_objects}"
                    )));
                }
                if seen[o] {
                    return Err(Error::InvalidPartition(format!("object {o} listed twice")));
                }
                seen[o] = true;
                count += 1;
            }
        }
        if count != n_objects {
            return Err(Error::InvalidPartition(format!(
                "{} of {n_objects} objects missing",
                n_objects - count
            )));
        }
        Ok(Self { blocks, n_objects })
    }

    /// Every object in its own block, in index order (a complete ranking).
    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|o| vec![o]).collect(),
            n_objects: n,
        }
    }

    /// All objects tied in one block.
    pub fn single_block(n: usize) -> Self {
        let blocks = if n == 0 { Vec::new() } else { vec![(0..n).collect()] };
        Self { blocks, n_objects: n }
    }

    /// Inverse of [`block_assignment`](Self::block_assignment): `assignment[o]`
    /// is the block holding object `o`. Block indices must cover `0..T`.
    pub fn from_block_assignment(assignment: &[usize]) -> Result<Self> {
        let n_blocks = assignment.iter().map(|b| b + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); n_blocks];
        for (o, &b) in assignment.iter().enumerate() {
            blocks[b].push(o);
        }
        Self::with_objects(blocks, assignment.len())
    }

    pub fn block_assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_objects];
        for (t, block) in self.blocks.iter().enumerate() {
            for &o in block {
                out[o] = t;
            }
        }
        out
    }

    pub(crate) fn from_parts_unchecked(blocks: Vec<Vec<usize>>, n_objects: usize) -> Self {
        debug_assert!(Self::with_objects(blocks.clone(), n_objects).is_ok());
        Self { blocks, n_objects }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, t: usize) -> Result<&[usize]> {
        self.blocks
            .get(t)
            .map(Vec::as_slice)
            .ok_or(Error::NoSuchBlock {
                index: t,
                n_blocks: self.blocks.len(),
            })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    /// Number of blocks with at least two members.
    pub fn n_splittable(&self) -> usize {
        self.blocks.iter().filter(|b| b.len() >= 2).count()
    }

    /// Number of within-block (tied) object pairs.
    pub fn n_tied_pairs(&self) -> usize {
        self.blocks.iter().map(|b| b.len() * (b.len() - 1) / 2).sum()
    }

    /// Replaces block `t` by the two adjacent blocks `upper` then `lower`.
    pub fn split(&self, t: usize, upper: &[usize], lower: &[usize]) -> Result<Self> {
        validate_bipartition(self.block(t)?, t, upper, lower)?;
        let mut out = self.clone();
        out.split_in_place(t, upper.to_vec(), lower.to_vec());
        Ok(out)
    }

    /// Merges block `t` with block `t + 1`.
    pub fn merge(&self, t: usize) -> Result<Self> {
        if t + 1 >= self.blocks.len() {
            return Err(Error::NoSuchBlock {
                index: t + 1,
                n_blocks: self.blocks.len(),
            });
        }
        let mut out = self.clone();
        out.merge_in_place(t);
        Ok(out)
    }

    pub(crate) fn split_in_place(&mut self, t: usize, mut upper: Vec<usize>, mut lower: Vec<usize>) {
        upper.sort_unstable();
        lower.sort_unstable();
        self.blocks[t] = upper;
        self.blocks.insert(t + 1, lower);
    }

    pub(crate) fn merge_in_place(&mut self, t: usize) {
        let lower = self.blocks.remove(t + 1);
        let block = &mut self.blocks[t];
        block.extend(lower);
        block.sort_unstable();
    }

    pub(crate) fn push_block_unchecked(&mut self, block: Vec<usize>) {
        self.blocks.push(block);
    }

    pub(crate) fn pop_block_unchecked(&mut self) -> Option<Vec<usize>> {
        self.blocks.pop()
    }

    pub(crate) fn empty_unchecked(n_objects: usize) -> Self {
        Self {
            blocks: Vec::new(),
            n_objects,
        }
    }

    /// Relative rank of two objects: `Greater` if `i` is ranked above `j`,
    /// `Equal` if tied.
    pub fn relation(assignment: &[usize], i: usize, j: usize) -> Ordering {
        assignment[j].cmp(&assignment[i])
    }

    /// Objects listed from the top block downwards.
    pub fn objects_in_rank_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().flatten().copied()
    }

    pub(crate) fn ensure_objects(&self, expected: usize) -> Result<()> {
        if self.n_objects != expected {
            return Err(Error::ObjectCountMismatch {
                expected,
                found: self.n_objects,
            });
        }
        Ok(())
    }
}

pub(crate) fn validate_bipartition(
    block: &[usize],
    t: usize,
    upper: &[usize],
    lower: &[usize],
) -> Result<()> {
    let bad = Error::InvalidBipartition { block: t };
    if upper.is_empty() || lower.is_empty() || upper.len() + lower.len() != block.len() {
        return Err(bad);
    }
    let mut all: Vec<usize> = upper.iter().chain(lower).copied().collect();
    all.sort_unstable();
    if all.as_slice() != block {
        return Err(bad);
    }
    Ok(())
}

/// Fraction of object pairs whose relation (above, tied, below) differs
/// between two partitions of the same objects.
pub fn pairwise_disagreement(a: &OrderedPartition, b: &OrderedPartition) -> f64 {
    let n = a.n_objects();
    if n < 2 {
        return 0.0;
    }
    let (ra, rb) = (a.block_assignment(), b.block_assignment());
    let mut wrong = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if OrderedPartition::relation(&ra, i, j) != OrderedPartition::relation(&rb, i, j) {
                wrong += 1;
            }
        }
    }
    wrong as f64 / (n * (n - 1) / 2) as f64
}

/// Writes `2,0>1` style text: blocks from the top, separated by `>`,
/// members separated by `,`.
impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, block) in self.blocks.iter().enumerate() {
            if t > 0 {
                f.write_str(">")?;
            }
            for (k, o) in block.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{o}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for OrderedPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::single_block(0));
        }
        let mut blocks = Vec::new();
        for part in s.split('>') {
            let block = part
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<usize>().map_err(|_| {
                        Error::InvalidPartition(format!("bad object token {:?}", String::from(tok)))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
        }
        Self::new(blocks)
    }
}
