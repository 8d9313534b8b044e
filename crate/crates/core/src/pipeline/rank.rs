use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::latent::LatentModel;
use crate::learning::CfParams;
use crate::model::{log_weight_unchecked, PairPotentials, Restricted};
use crate::numeric::logistic;
use crate::partition::OrderedPartition;

/// Items in decreasing predicted preference.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub items: Vec<usize>,
    pub scores: Vec<f64>,
}

impl RankedList {
    /// Sorts by score, highest first, equal scores by ascending item.
    pub fn from_scores(mut scored: Vec<(usize, f64)>) -> Self {
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let (items, scores) = scored.into_iter().unzip();
        Self { items, scores }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Position of each listed item.
    pub fn positions(&self) -> BTreeMap<usize, usize> {
        self.items.iter().enumerate().map(|(p, &i)| (i, p)).collect()
    }
}

fn check_items(n: usize, items: &[usize]) -> Result<()> {
    match items.iter().find(|&&i| i >= n) {
        Some(&bad) => Err(Error::OutOfRange {
            value: bad as f64,
            min: 0.0,
            max: n as f64 - 1.0,
        }),
        None => Ok(()),
    }
}

/// `P(h_k = 1 | seen)` where local object `o` of `seen` is `seen_items[o]`.
pub fn seen_posterior<P: PairPotentials>(
    m: &LatentModel<P>,
    seen_items: &[usize],
    seen: &OrderedPartition,
) -> Result<Vec<f64>> {
    if seen_items.is_empty() {
        return Err(Error::EmptyInput("seen items"));
    }
    seen.ensure_objects(seen_items.len())?;
    check_items(m.n_objects(), seen_items)?;
    Ok(m
        .hidden
        .iter()
        .map(|h| {
            logistic(log_weight_unchecked(
                seen,
                &Restricted {
                    inner: h,
                    items: seen_items,
                },
            ))
        })
        .collect())
}

/// Mean-field completion: each unseen item `j` is scored by
/// `Σ_{i seen} [log ψ(j≻i) + Σ_k P(h_k=1 | seen) log ψ_k(j≻i)]`.
pub fn complete_rank<P: PairPotentials>(
    m: &LatentModel<P>,
    seen_items: &[usize],
    seen: &OrderedPartition,
    unseen: &[usize],
) -> Result<RankedList> {
    let post = seen_posterior(m, seen_items, seen)?;
    check_items(m.n_objects(), unseen)?;
    if unseen.iter().any(|j| seen_items.contains(j)) {
        return Err(Error::InvalidConfig("unseen items overlap the seen items".into()));
    }
    let scored = unseen
        .iter()
        .map(|&j| {
            let s = seen_items
                .iter()
                .map(|&i| {
                    m.base.log_order(j, i)
                        + m.hidden
                            .iter()
                            .zip(&post)
                            .map(|(h, p)| p * h.log_order(j, i))
                            .sum::<f64>()
                })
                .sum();
            (j, s)
        })
        .collect();
    Ok(RankedList::from_scores(scored))
}

/// Ranks `items` by `u_j + Σ_k posterior_k W_jk`.
pub fn reconstruct_rank(posterior: &[f64], items: &[usize], params: &CfParams) -> Result<RankedList> {
    if posterior.len() != params.n_hidden() {
        return Err(Error::DimensionMismatch {
            what: "posterior",
            expected: params.n_hidden(),
            found: posterior.len(),
        });
    }
    check_items(params.n_items(), items)?;
    let scored = items
        .iter()
        .map(|&j| {
            let s = params.u[j] + posterior.iter().enumerate().map(|(k, p)| p * params.w_at(j, k)).sum::<f64>();
            (j, s)
        })
        .collect();
    Ok(RankedList::from_scores(scored))
}

/// Fraction of strictly ordered pairs of `truth` (local object `o` being
/// `items[o]`) that `ranked` puts in the same order; `None` without such
/// pairs. Items missing from `ranked` are an error.
pub fn pair_order_accuracy(ranked: &RankedList, items: &[usize], truth: &OrderedPartition) -> Result<Option<f64>> {
    truth.ensure_objects(items.len())?;
    let pos = ranked.positions();
    let mut where_ = Vec::with_capacity(items.len());
    for i in items {
        where_.push(*pos.get(i).ok_or(Error::InvalidConfig("ranked list misses a truth item".into()))?);
    }
    let a = truth.block_assignment();
    let (mut right, mut total) = (0usize, 0usize);
    for x in 0..items.len() {
        for y in 0..items.len() {
            if a[x] < a[y] {
                total += 1;
                right += usize::from(where_[x] < where_[y]);
            }
        }
    }
    Ok((total > 0).then(|| right as f64 / total as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use alloc::vec;
    use rand::seq::SliceRandom;

    fn part(s: &str) -> OrderedPartition {
        s.parse().unwrap()
    }

    #[test]
    fn zero_model_ranks_by_index() {
        let m = CfParams::zeros(6, 2).latent_model();
        let r = complete_rank(&m, &[4, 1], &part("0>1"), &[5, 0, 3]).unwrap();
        assert_eq!(r.items, vec![0, 3, 5]);
        assert!(complete_rank(&m, &[], &OrderedPartition::singletons(0), &[1]).is_err());
        assert!(complete_rank(&m, &[4, 1], &part("0>1"), &[1]).is_err());
    }

    #[test]
    fn no_hidden_units_ranks_by_worth() {
        let mut p = CfParams::zeros(5, 0);
        p.u = vec![0.3, -1.0, 2.0, 0.1, 0.3];
        let m = p.latent_model();
        let r = complete_rank(&m, &[3], &part("0"), &[0, 1, 2, 4]).unwrap();
        assert_eq!(r.items, vec![2, 0, 4, 1]);
        let rr = reconstruct_rank(&[], &[0, 1, 2, 4], &p).unwrap();
        assert_eq!(r.items, rr.items);
    }

    #[test]
    fn completion_scores_are_seen_size_times_reconstruction() {
        let p = CfParams::random(8, 3, 1.0, &mut stream_rng(3, 0));
        let m = p.latent_model();
        let seen_items = [6, 2, 0];
        let seen = part("1>0,2");
        let post = seen_posterior(&m, &seen_items, &seen).unwrap();
        let c = complete_rank(&m, &seen_items, &seen, &[1, 3, 4, 5, 7]).unwrap();
        let r = reconstruct_rank(&post, &[1, 3, 4, 5, 7], &p).unwrap();
        assert_eq!(c.items, r.items);
        for (a, b) in c.scores.iter().zip(&r.scores) {
            assert!((a - 3.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn completion_ignores_listing_order_within_blocks() {
        let p = CfParams::random(7, 2, 1.0, &mut stream_rng(4, 0));
        let m = p.latent_model();
        let mut rng = stream_rng(5, 0);
        let seen_items = [0, 1, 2, 3];
        let blocks = vec![vec![0, 2], vec![1, 3]];
        let base = complete_rank(&m, &seen_items, &OrderedPartition::new(blocks.clone()).unwrap(), &[4, 5, 6]).unwrap();
        for _ in 0..5 {
            let mut b = blocks.clone();
            b.iter_mut().for_each(|blk| blk.shuffle(&mut rng));
            let x = OrderedPartition::new(b).unwrap();
            assert_eq!(complete_rank(&m, &seen_items, &x, &[4, 5, 6]).unwrap().items, base.items);
        }
    }

    #[test]
    fn pair_accuracy_examples() {
        let r = RankedList::from_scores(vec![(10, 3.0), (11, 2.0), (12, 1.0)]);
        assert_eq!(pair_order_accuracy(&r, &[10, 11, 12], &part("0>1>2")).unwrap(), Some(1.0));
        assert_eq!(pair_order_accuracy(&r, &[12, 11, 10], &part("0>1>2")).unwrap(), Some(0.0));
        assert_eq!(pair_order_accuracy(&r, &[10, 11], &part("0,1")).unwrap(), None);
        assert_eq!(pair_order_accuracy(&r, &[10, 12, 11], &part("0>1,2")).unwrap(), Some(1.0));
        assert!(pair_order_accuracy(&r, &[13], &part("0")).is_err());
    }
}
