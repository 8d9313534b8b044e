//! Exact one-step transition probabilities of the split-and-merge kernel.
//!
//! Enumerates every random draw the sampler can make (move kind, block,
//! ordered seed pair, coin flips for the remaining members) with its
//! probability, so the resulting kernel can be checked against detailed
//! balance on small state spaces.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{feasible_moves, merge_proposal_unchecked, split_proposal_unchecked};
use crate::error::Result;
use crate::model::PairPotentials;
use crate::partition::OrderedPartition;

/// `K(x → ·)` as `(state, probability)` pairs in state order, rejected mass
/// included in the entry for `x` itself.
pub fn transition_distribution<P: PairPotentials + ?Sized>(
    x: &OrderedPartition,
    m: &P,
) -> Result<Vec<(OrderedPartition, f64)>> {
    x.ensure_objects(m.n_objects())?;
    let mut out: BTreeMap<OrderedPartition, f64> = BTreeMap::new();
    let mut stay = 0.0;
    let (can_split, can_merge) = feasible_moves(x);
    let kind_prob = if can_split && can_merge { 0.5 } else { 1.0 };

    if can_split {
        let splittable: Vec<usize> = (0..x.n_blocks()).filter(|&t| x.blocks()[t].len() >= 2).collect();
        let block_prob = kind_prob / splittable.len() as f64;
        for &t in &splittable {
            let block = &x.blocks()[t];
            let size = block.len();
            let rest_count = size - 2;
            let draw_prob = block_prob / (size * (size - 1)) as f64 / (1u64 << rest_count) as f64;
            for first in 0..size {
                for second in 0..size {
                    if first == second {
                        continue;
                    }
                    let others: Vec<usize> = (0..size).filter(|&i| i != first && i != second).collect();
                    for mask in 0..(1u64 << rest_count) {
                        let mut upper = vec![block[first]];
                        let mut lower = vec![block[second]];
                        for (bit, &i) in others.iter().enumerate() {
                            if mask >> bit & 1 == 1 {
                                upper.push(block[i]);
                            } else {
                                lower.push(block[i]);
                            }
                        }
                        upper.sort_unstable();
                        lower.sort_unstable();
                        let p = split_proposal_unchecked(x, t, upper, lower, m);
                        let accept = p.acceptance_probability();
                        *out.entry(p.apply(x)).or_default() += draw_prob * accept;
                        stay += draw_prob * (1.0 - accept);
                    }
                }
            }
        }
    }
    if can_merge {
        let pair_prob = kind_prob / (x.n_blocks() - 1) as f64;
        for t in 0..x.n_blocks() - 1 {
            let p = merge_proposal_unchecked(x, t, m);
            let accept = p.acceptance_probability();
            *out.entry(p.apply(x)).or_default() += pair_prob * accept;
            stay += pair_prob * (1.0 - accept);
        }
    }
    if !can_split && !can_merge {
        stay = 1.0;
    }
    if stay > 0.0 {
        *out.entry(x.clone()).or_default() += stay;
    }
    Ok(out.into_iter().collect())
}

/// Dense row-stochastic matrix over `states`; every reachable state must be
/// listed.
pub fn transition_matrix<P: PairPotentials + ?Sized>(states: &[OrderedPartition], m: &P) -> Result<Vec<Vec<f64>>> {
    let index: BTreeMap<&OrderedPartition, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut matrix = vec![vec![0.0; states.len()]; states.len()];
    for (row, x) in states.iter().enumerate() {
        for (y, p) in transition_distribution(x, m)? {
            let col = *index
                .get(&y)
                .ok_or_else(|| crate::Error::InvalidConfig("state list is not closed under moves".into()))?;
            matrix[row][col] += p;
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_ordered_partitions;
    use crate::model::PairModel;

    #[test]
    fn rows_are_stochastic() {
        let m = PairModel::random_loglinear(4, 2.0, &mut crate::rng::stream_rng(5, 0));
        let states = enumerate_ordered_partitions(4).unwrap();
        for row in transition_matrix(&states, &m).unwrap() {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn two_object_uniform_kernel_by_hand() {
        let m = PairModel::uniform(2);
        let x: OrderedPartition = "0>1".parse().unwrap();
        let row = transition_distribution(&x, &m).unwrap();
        // merge forced, accepted with probability 1/2
        let tied: OrderedPartition = "0,1".parse().unwrap();
        let get = |s: &OrderedPartition| row.iter().find(|(y, _)| y == s).map(|(_, p)| *p).unwrap_or(0.0);
        assert!((get(&tied) - 0.5).abs() < 1e-15);
        assert!((get(&x) - 0.5).abs() < 1e-15);
        let row = transition_distribution(&tied, &m).unwrap();
        assert_eq!(row.len(), 2);
        assert!(row.iter().all(|(_, p)| (*p - 0.5).abs() < 1e-15));
    }
}
