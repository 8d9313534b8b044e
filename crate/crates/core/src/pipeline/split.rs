use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::learning::UserData;
use crate::model::from_graded_ratings;
use crate::pipeline::GradedDataset;
use crate::rng::stream_rng;

/// Test items every retained user must keep beyond the training items.
pub const MIN_TEST_ITEMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    /// Training items per user.
    pub n_train: usize,
    /// Users with fewer ratings are dropped.
    pub min_ratings: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(n_train: usize, min_ratings: usize, seed: u64) -> Result<Self> {
        let s = Self {
            n_train,
            min_ratings,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    /// The standard pairings 10/20, 20/30 and 50/60; any other `n_train`
    /// gets `min_ratings = n_train + 10`.
    pub fn standard(n_train: usize, seed: u64) -> Self {
        let min_ratings = match n_train {
            10 => 20,
            20 => 30,
            50 => 60,
            n => n + MIN_TEST_ITEMS,
        };
        Self {
            n_train,
            min_ratings,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 {
            return Err(Error::InvalidConfig("n_train must be positive".into()));
        }
        if self.min_ratings < self.n_train + MIN_TEST_ITEMS {
            return Err(Error::InvalidConfig(format!(
                "min_ratings {} leaves fewer than {MIN_TEST_ITEMS} test items for n_train {}",
                self.min_ratings, self.n_train
            )));
        }
        Ok(())
    }
}

/// One retained user's items, as `(item, grade)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserSplit {
    pub user: usize,
    pub train: Vec<(usize, u8)>,
    pub test: Vec<(usize, u8)>,
}

impl UserSplit {
    pub fn train_items(&self) -> Vec<usize> {
        self.train.iter().map(|&(i, _)| i).collect()
    }

    pub fn test_items(&self) -> Vec<usize> {
        self.test.iter().map(|&(i, _)| i).collect()
    }

    /// Training items grouped by grade, best first.
    pub fn train_data(&self) -> Result<UserData> {
        let grades: Vec<u8> = self.train.iter().map(|&(_, g)| g).collect();
        UserData::new(self.train_items(), from_graded_ratings(&grades)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub users: Vec<UserSplit>,
    pub dropped_users: usize,
    pub n_items: usize,
}

impl Split {
    pub fn train_data(&self) -> Result<Vec<UserData>> {
        self.users.iter().map(UserSplit::train_data).collect()
    }
}

/// Drops users below `spec.min_ratings`; each remaining user gets a uniformly
/// random `n_train` items for training (drawn from that user's own stream of
/// `spec.seed`) and the rest for testing.
pub fn train_test_split(d: &GradedDataset, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let mut users = Vec::new();
    let mut dropped = 0;
    for (user, mut items) in d.by_user().into_iter().enumerate() {
        if items.len() < spec.min_ratings {
            dropped += 1;
            continue;
        }
        items.shuffle(&mut stream_rng(spec.seed, user as u64));
        let test = items.split_off(spec.n_train);
        users.push(UserSplit {
            user,
            train: items,
            test,
        });
    }
    Ok(Split {
        users,
        dropped_users: dropped,
        n_items: d.n_items(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use crate::pipeline::GradedRating;
    use alloc::vec;

    fn dataset(counts: &[usize]) -> GradedDataset {
        let mut records = Vec::new();
        for (user, &c) in counts.iter().enumerate() {
            for item in 0..c {
                records.push(GradedRating {
                    user,
                    item,
                    grade: (item % 5) as u8 + 1,
                });
            }
        }
        GradedDataset {
            records,
            user_ids: (0..counts.len() as u64).collect(),
            item_ids: (0..*counts.iter().max().unwrap() as u64).collect(),
            n_grades: 5,
        }
    }

    #[test]
    fn protocol_examples() {
        let d = dataset(&[19, 25, 20]);
        let spec = SplitSpec::standard(10, 4);
        assert_eq!(spec.min_ratings, 20);
        let s = train_test_split(&d, &spec).unwrap();
        assert_eq!(s.dropped_users, 1);
        assert_eq!(s.users.len(), 2);
        assert_eq!((s.users[0].user, s.users[0].train.len(), s.users[0].test.len()), (1, 10, 15));
        assert_eq!(s.users[1].test.len(), 10);
        assert_eq!(s, train_test_split(&d, &spec).unwrap());
        assert_ne!(s, train_test_split(&d, &SplitSpec::standard(10, 5)).unwrap());
        let mut all = s.users[0].train_items();
        all.extend(s.users[0].test_items());
        all.sort_unstable();
        assert_eq!(all, (0..25).collect::<Vec<_>>());
    }

    #[test]
    fn spec_validation() {
        assert!(SplitSpec::new(10, 19, 0).is_err());
        assert!(SplitSpec::new(0, 19, 0).is_err());
        assert_eq!(SplitSpec::standard(20, 0).min_ratings, 30);
        assert_eq!(SplitSpec::standard(50, 0).min_ratings, 60);
        assert!(SplitSpec::standard(50, 0).validate().is_ok());
    }

    #[test]
    fn train_partition_groups_by_grade() {
        let u = UserSplit {
            user: 0,
            train: vec![(7, 3), (2, 5), (9, 3)],
            test: vec![],
        };
        let data = u.train_data().unwrap();
        assert_eq!(data.items, vec![7, 2, 9]);
        assert_eq!(data.observed.to_string(), "1>0,2");
    }
}
