//! Collaborative ranking: ratings ingestion, grading and item filtering,
//! per-user train/test splits, rank completion and ranking metrics.

mod dataset;
mod grading;
mod metrics;
mod rank;
mod split;

use alloc::vec::Vec;

pub use dataset::{Rating, RatingScale, RatingsBuilder, RatingsDataset};
pub use grading::{
    entropy_filter, entropy_order, grade_rating, grade_ratings, item_entropies, GradedDataset, GradedRating,
    DEFAULT_GRADES,
};
pub use metrics::{err, err_stop_probability, ndcg_at, MetricKind, Summary};
pub use rank::{complete_rank, pair_order_accuracy, reconstruct_rank, seen_posterior, RankedList};
pub use split::{train_test_split, Split, SplitSpec, UserSplit, MIN_TEST_ITEMS};

use crate::error::Result;
use crate::latent::LatentModel;
use crate::model::PairPotentials;

/// Ranks a user's test items from their training items and scores the
/// ranking with each metric.
pub fn evaluate_user<P: PairPotentials>(m: &LatentModel<P>, user: &UserSplit, metrics: &[MetricKind]) -> Result<Vec<f64>> {
    let seen = user.train_data()?;
    let ranked = complete_rank(m, &seen.items, &seen.observed, &user.test_items())?;
    grade_and_score(&ranked, user, metrics)
}

/// Scores an explicit ranking of the user's test items.
pub fn grade_and_score(ranked: &RankedList, user: &UserSplit, metrics: &[MetricKind]) -> Result<Vec<f64>> {
    let grade_of: alloc::collections::BTreeMap<usize, u8> = user.test.iter().copied().collect();
    let grades: Vec<u8> = ranked.items.iter().filter_map(|i| grade_of.get(i).copied()).collect();
    metrics.iter().map(|k| k.evaluate(&grades)).collect()
}

/// The same metrics for the ranking by ascending item index.
pub fn baseline_user(user: &UserSplit, metrics: &[MetricKind]) -> Result<Vec<f64>> {
    let mut items = user.test_items();
    items.sort_unstable();
    let ranked = RankedList::from_scores(items.into_iter().map(|i| (i, 0.0)).collect());
    grade_and_score(&ranked, user, metrics)
}

/// Per-metric summaries over users; `rows[u][m]` is user `u`'s value of
/// metric `m`.
pub fn summarize(rows: &[Vec<f64>], n_metrics: usize) -> Vec<Summary> {
    (0..n_metrics)
        .map(|m| Summary::of(&rows.iter().map(|r| r[m]).collect::<Vec<_>>()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::CfParams;
    use alloc::vec;

    #[test]
    fn zero_model_matches_ascending_baseline() {
        let user = UserSplit {
            user: 0,
            train: vec![(0, 5), (3, 2)],
            test: vec![(5, 1), (1, 4), (2, 5), (4, 3)],
        };
        let m = CfParams::zeros(6, 2).latent_model();
        let metrics = MetricKind::standard();
        assert_eq!(evaluate_user(&m, &user, &metrics).unwrap(), baseline_user(&user, &metrics).unwrap());
        let rows = vec![vec![1.0, 0.5], vec![0.0, 0.5]];
        let s = summarize(&rows, 2);
        assert_eq!((s[0].mean, s[1].mean, s[1].std_error), (0.5, 0.5, 0.0));
    }
}
