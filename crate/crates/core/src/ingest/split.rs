use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ratings_to_observations, ObservationSet, RatingRecord};
use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};

/// Parameters of the per-user train/test split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    /// Ratings sampled into train for each retained user.
    pub train_per_user: usize,
    /// Minimum ratings each retained user must keep in test.
    pub min_test_items: usize,
    pub variants: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_per_user: usize, seed: u64) -> Self {
        SplitSpec {
            train_per_user,
            min_test_items: 10,
            variants: 5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_per_user == 0 || self.min_test_items == 0 || self.variants == 0 {
            return Err(Error::InvalidParameter(format!(
                "split needs train_per_user, min_test_items and variants >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Rating count below which a user is dropped.
    pub fn required_ratings(&self) -> usize {
        self.train_per_user + self.min_test_items
    }
}

/// One train/test variant. Both partitions are sorted by `(user, item)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub num_users: usize,
    pub num_items: usize,
    pub train_per_user: usize,
    pub variant: usize,
    pub train: Vec<RatingRecord>,
    pub test: Vec<RatingRecord>,
}

fn user_slice(records: &[RatingRecord], user: UserId) -> &[RatingRecord] {
    let lo = records.partition_point(|r| r.user < user);
    let hi = records.partition_point(|r| r.user <= user);
    &records[lo..hi]
}

impl Dataset {
    pub fn train_of(&self, user: UserId) -> &[RatingRecord] {
        user_slice(&self.train, user)
    }

    pub fn test_of(&self, user: UserId) -> &[RatingRecord] {
        user_slice(&self.test, user)
    }

    /// Items the user rated in train, ascending.
    pub fn train_profile(&self, user: UserId) -> Vec<ItemId> {
        self.train_of(user).iter().map(|r| r.item).collect()
    }

    /// Users with at least one test rating, ascending.
    pub fn test_users(&self) -> Vec<UserId> {
        let mut users: Vec<UserId> = self.test.iter().map(|r| r.user).collect();
        users.dedup();
        users
    }

    /// Observations derived from the train partition only.
    pub fn train_observations(&self) -> ObservationSet {
        ratings_to_observations(&self.train)
    }
}

/// Per-(seed, variant, user) random stream.
pub(crate) fn stream_rng(seed: u64, variant: usize, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((variant as u64) << 40) ^ key);
    rng
}

/// Samples `train_per_user` ratings per user into train and the rest into
/// test, once per variant. Users short of `train_per_user + min_test_items`
/// ratings are dropped from both partitions.
pub fn split(records: &[RatingRecord], spec: &SplitSpec) -> Result<Vec<Dataset>> {
    spec.validate()?;
    let num_users = records.iter().map(|r| r.user.index() + 1).max().unwrap_or(0);
    let num_items = records.iter().map(|r| r.item.index() + 1).max().unwrap_or(0);

    let mut sorted = records.to_vec();
    sorted.sort_unstable_by_key(|r| (r.user, r.item));
    let groups: Vec<&[RatingRecord]> = sorted
        .chunk_by(|a, b| a.user == b.user)
        .filter(|g| g.len() >= spec.required_ratings())
        .collect();
    if groups.is_empty() {
        return Err(Error::EmptyDataset {
            required: spec.required_ratings(),
        });
    }

    let datasets = (0..spec.variants)
        .into_par_iter()
        .map(|variant| {
            let mut train = Vec::with_capacity(groups.len() * spec.train_per_user);
            let mut test = Vec::new();
            for group in &groups {
                let mut rng = stream_rng(spec.seed, variant, group[0].user.0 as u64);
                let mut picked = rand::seq::index::sample(&mut rng, group.len(), spec.train_per_user).into_vec();
                picked.sort_unstable();
                let mut next = picked.iter().peekable();
                for (k, r) in group.iter().enumerate() {
                    if next.peek() == Some(&&k) {
                        next.next();
                        train.push(*r);
                    } else {
                        test.push(*r);
                    }
                }
            }
            Dataset {
                num_users,
                num_items,
                train_per_user: spec.train_per_user,
                variant,
                train,
                test,
            }
        })
        .collect();
    Ok(datasets)
}
