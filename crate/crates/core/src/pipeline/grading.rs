use alloc::vec;
use alloc::vec::Vec;

use libm::{floor, log};

use crate::error::{Error, Result};
use crate::pipeline::{RatingScale, RatingsDataset};

pub const DEFAULT_GRADES: u8 = 5;

/// Segment index (from 1) of `v` when the scale is cut into `n_grades`
/// equal-length segments; the maximum belongs to the top segment.
pub fn grade_rating(v: f64, scale: RatingScale, n_grades: u8) -> Result<u8> {
    if n_grades == 0 {
        return Err(Error::InvalidConfig("at least one grade is needed".into()));
    }
    if !scale.contains(v) {
        return Err(Error::OutOfRange {
            value: v,
            min: scale.min,
            max: scale.max,
        });
    }
    let width = (scale.max - scale.min) / f64::from(n_grades);
    let g = floor((v - scale.min) / width) as i64 + 1;
    Ok(g.clamp(1, i64::from(n_grades)) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradedRating {
    pub user: usize,
    pub item: usize,
    pub grade: u8,
}

/// Ratings replaced by grades `1..=n_grades`, dense indices as in the
/// source dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedDataset {
    pub records: Vec<GradedRating>,
    pub user_ids: Vec<u64>,
    pub item_ids: Vec<u64>,
    pub n_grades: u8,
}

impl GradedDataset {
    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    /// `(item, grade)` lists per user, in input order.
    pub fn by_user(&self) -> Vec<Vec<(usize, u8)>> {
        let mut out = vec![Vec::new(); self.n_users()];
        for r in &self.records {
            out[r.user].push((r.item, r.grade));
        }
        out
    }

    /// Ratings per user.
    pub fn user_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_users()];
        for r in &self.records {
            out[r.user] += 1;
        }
        out
    }
}

pub fn grade_ratings(d: &RatingsDataset, n_grades: u8) -> Result<GradedDataset> {
    let records = d
        .records()
        .iter()
        .map(|r| {
            Ok(GradedRating {
                user: r.user,
                item: r.item,
                grade: grade_rating(r.rating, d.scale(), n_grades)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GradedDataset {
        records,
        user_ids: d.user_ids().to_vec(),
        item_ids: d.item_ids().to_vec(),
        n_grades,
    })
}

/// `H_i = −Σ_r P_i(r) ln P_i(r)` over the grades given to each item; items
/// without ratings get 0.
pub fn item_entropies(d: &GradedDataset) -> Vec<f64> {
    let g = usize::from(d.n_grades);
    let mut counts = vec![0u64; d.n_items() * g];
    for r in &d.records {
        counts[r.item * g + usize::from(r.grade) - 1] += 1;
    }
    counts
        .chunks(g.max(1))
        .map(|c| {
            let total: u64 = c.iter().sum();
            if total == 0 {
                return 0.0;
            }
            -c.iter()
                .filter(|&&n| n > 0)
                .map(|&n| {
                    let p = n as f64 / total as f64;
                    p * log(p)
                })
                .sum::<f64>()
        })
        .take(d.n_items())
        .collect()
}

/// Items sorted by increasing entropy, ties by index.
pub fn entropy_order(d: &GradedDataset) -> Vec<usize> {
    let h = item_entropies(d);
    let mut order: Vec<usize> = (0..d.n_items()).collect();
    order.sort_by(|&a, &b| h[a].total_cmp(&h[b]).then(a.cmp(&b)));
    order
}

/// Removes the `floor(n_items / 2)` lowest-entropy items and their ratings;
/// surviving items are reindexed in their original relative order, users
/// keep their indices.
pub fn entropy_filter(d: &GradedDataset) -> GradedDataset {
    let n = d.n_items();
    let mut keep = vec![true; n];
    for &i in entropy_order(d).iter().take(n / 2) {
        keep[i] = false;
    }
    let mut new_index = vec![usize::MAX; n];
    let mut item_ids = Vec::with_capacity(n - n / 2);
    for i in 0..n {
        if keep[i] {
            new_index[i] = item_ids.len();
            item_ids.push(d.item_ids[i]);
        }
    }
    let records = d
        .records
        .iter()
        .filter(|r| keep[r.item])
        .map(|r| GradedRating {
            item: new_index[r.item],
            ..*r
        })
        .collect();
    GradedDataset {
        records,
        user_ids: d.user_ids.clone(),
        item_ids,
        n_grades: d.n_grades,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn movielens_segment_table() {
        let expected = [1, 1, 2, 2, 3, 3, 4, 4, 5, 5];
        for (s, &g) in expected.iter().enumerate() {
            let v = 0.5 + 0.5 * s as f64;
            assert_eq!(grade_rating(v, RatingScale::MOVIELENS, 5).unwrap(), g, "rating {v}");
        }
        assert!(grade_rating(0.0, RatingScale::MOVIELENS, 5).is_err());
        for v in 1..=5u8 {
            assert_eq!(grade_rating(f64::from(v), RatingScale::FIVE_STAR, 5).unwrap(), v);
        }
    }

    proptest! {
        #[test]
        fn grading_is_monotone(a in 0.5f64..=5.0, b in 0.5f64..=5.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(grade_rating(lo, RatingScale::MOVIELENS, 5).unwrap() <= grade_rating(hi, RatingScale::MOVIELENS, 5).unwrap());
        }
    }

    fn graded(records: &[(usize, usize, u8)], n_users: usize, n_items: usize) -> GradedDataset {
        GradedDataset {
            records: records.iter().map(|&(user, item, grade)| GradedRating { user, item, grade }).collect(),
            user_ids: (0..n_users as u64).collect(),
            item_ids: (100..100 + n_items as u64).collect(),
            n_grades: 5,
        }
    }

    #[test]
    fn entropy_examples() {
        let mut recs = Vec::new();
        for u in 0..5 {
            recs.push((u, 0, 3));
            recs.push((u, 1, u as u8 + 1));
        }
        let d = graded(&recs, 5, 3);
        let h = item_entropies(&d);
        assert_eq!(h[0], 0.0);
        assert!((h[1] - log(5.0)).abs() < 1e-12);
        assert_eq!(h[2], 0.0);
        let f = entropy_filter(&d);
        assert_eq!(f.item_ids, vec![101, 102]);
        assert!(f.records.iter().all(|r| r.item == 0));
    }

    #[test]
    fn half_of_four_items_removed() {
        let recs = [(0, 0, 1), (1, 0, 2), (0, 1, 1), (1, 1, 1), (0, 2, 1), (1, 2, 5), (2, 2, 3), (0, 3, 2)];
        let d = graded(&recs, 3, 4);
        let f = entropy_filter(&d);
        assert_eq!(f.n_items(), 2);
        assert_eq!(f.item_ids, vec![100, 102]);
    }

    proptest! {
        #[test]
        fn filter_removes_lowest_half(recs in proptest::collection::vec((0usize..6, 0usize..9, 1u8..=5), 0..80)) {
            let d = graded(&recs, 6, 9);
            let h = item_entropies(&d);
            let f = entropy_filter(&d);
            prop_assert_eq!(f.n_items(), 9 - 4);
            let kept: Vec<usize> = f.item_ids.iter().map(|id| (*id - 100) as usize).collect();
            let removed: Vec<usize> = (0..9).filter(|i| !kept.contains(i)).collect();
            for &r in &removed {
                for &k in &kept {
                    prop_assert!(h[r] <= h[k]);
                }
            }
        }
    }
}
