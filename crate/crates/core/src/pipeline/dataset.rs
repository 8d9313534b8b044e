use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Closed range of admissible ratings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl RatingScale {
    /// Half stars from 0.5 to 5.
    pub const MOVIELENS: Self = Self { min: 0.5, max: 5.0 };
    /// Whole stars from 1 to 5.
    pub const FIVE_STAR: Self = Self { min: 1.0, max: 5.0 };

    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidConfig("rating scale needs finite min < max".into()));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

/// One rating with dense user and item indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
    pub timestamp: Option<i64>,
}

/// Ratings keyed by dense indices, with the external ids they came from.
///
/// Indices are assigned in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsDataset {
    records: Vec<Rating>,
    user_ids: Vec<u64>,
    item_ids: Vec<u64>,
    user_index: BTreeMap<u64, usize>,
    item_index: BTreeMap<u64, usize>,
    scale: RatingScale,
    duplicates: usize,
}

impl RatingsDataset {
    pub fn builder(scale: RatingScale) -> RatingsBuilder {
        RatingsBuilder::new(scale)
    }

    pub fn records(&self) -> &[Rating] {
        &self.records
    }

    pub fn n_ratings(&self) -> usize {
        self.records.len()
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn user_ids(&self) -> &[u64] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[u64] {
        &self.item_ids
    }

    pub fn user_index(&self, id: u64) -> Option<usize> {
        self.user_index.get(&id).copied()
    }

    pub fn item_index(&self, id: u64) -> Option<usize> {
        self.item_index.get(&id).copied()
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    /// Repeated `(user, item)` pairs replaced while building.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    /// `(item, rating)` lists per dense user index, in input order.
    pub fn by_user(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.n_users()];
        for r in &self.records {
            out[r.user].push((r.item, r.rating));
        }
        out
    }

    /// Keeps the first `n` users (by dense index) and the items they rated.
    pub fn take_users(&self, n: usize) -> Self {
        let mut b = RatingsBuilder::new(self.scale);
        for r in self.records.iter().filter(|r| r.user < n) {
            b.push(self.user_ids[r.user], self.item_ids[r.item], r.rating, r.timestamp)
                .expect("already validated");
        }
        b.build()
    }
}

/// Collects ratings; a repeated `(user, item)` pair overwrites the earlier
/// rating and is counted.
#[derive(Debug, Clone)]
pub struct RatingsBuilder {
    scale: RatingScale,
    records: Vec<Rating>,
    seen: BTreeMap<(usize, usize), usize>,
    user_ids: Vec<u64>,
    item_ids: Vec<u64>,
    user_index: BTreeMap<u64, usize>,
    item_index: BTreeMap<u64, usize>,
    duplicates: usize,
}

impl RatingsBuilder {
    pub fn new(scale: RatingScale) -> Self {
        Self {
            scale,
            records: Vec::new(),
            seen: BTreeMap::new(),
            user_ids: Vec::new(),
            item_ids: Vec::new(),
            user_index: BTreeMap::new(),
            item_index: BTreeMap::new(),
            duplicates: 0,
        }
    }

    pub fn push(&mut self, user_id: u64, item_id: u64, rating: f64, timestamp: Option<i64>) -> Result<()> {
        if !self.scale.contains(rating) {
            return Err(Error::OutOfRange {
                value: rating,
                min: self.scale.min,
                max: self.scale.max,
            });
        }
        let user = dense(&mut self.user_index, &mut self.user_ids, user_id);
        let item = dense(&mut self.item_index, &mut self.item_ids, item_id);
        let r = Rating {
            user,
            item,
            rating,
            timestamp,
        };
        match self.seen.get(&(user, item)) {
            Some(&at) => {
                self.records[at] = r;
                self.duplicates += 1;
            }
            None => {
                self.seen.insert((user, item), self.records.len());
                self.records.push(r);
            }
        }
        Ok(())
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn build(self) -> RatingsDataset {
        RatingsDataset {
            records: self.records,
            user_ids: self.user_ids,
            item_ids: self.item_ids,
            user_index: self.user_index,
            item_index: self.item_index,
            scale: self.scale,
            duplicates: self.duplicates,
        }
    }
}

fn dense(index: &mut BTreeMap<u64, usize>, ids: &mut Vec<u64>, id: u64) -> usize {
    *index.entry(id).or_insert_with(|| {
        ids.push(id);
        ids.len() - 1
    })
}
