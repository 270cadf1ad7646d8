//! Raw feedback ingestion: rating files, the three observation rules, and the
//! train/test split protocol.

mod parse;
mod rules;
mod split;

pub use parse::{
    parse_ratings, parse_ratings_str, read_id_map, read_observations, write_id_map,
    write_observations, DatasetFormat, IdMap, RatingData,
};
pub use rules::{feedback_to_observations, ratings_to_observations, sessions_to_observations};
pub use split::{split, Dataset, SplitSpec};
pub(crate) use split::stream_rng;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};

/// One explicit rating.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatingRecord {
    pub user: UserId,
    pub item: ItemId,
    pub rating: u8,
    /// Seconds since the epoch; parsed but not used by the protocol.
    pub timestamp: Option<u64>,
}

impl RatingRecord {
    pub fn new(user: UserId, item: ItemId, rating: u8) -> Self {
        RatingRecord {
            user,
            item,
            rating,
            timestamp: None,
        }
    }
}

/// `user` preferred `desirable` over `undesirable`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observation {
    pub user: UserId,
    pub desirable: ItemId,
    pub undesirable: ItemId,
}

impl Observation {
    pub fn new(user: UserId, desirable: ItemId, undesirable: ItemId) -> Result<Self> {
        if desirable == undesirable {
            return Err(Error::SameItemPair(desirable));
        }
        Ok(Observation {
            user,
            desirable,
            undesirable,
        })
    }
}

/// A set of observations kept sorted by `(user, desirable, undesirable)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObservationSet {
    items: Vec<Observation>,
}

impl ObservationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Observation> {
        self.items.iter()
    }

    pub fn as_slice(&self) -> &[Observation] {
        &self.items
    }

    pub fn contains(&self, o: &Observation) -> bool {
        self.items.binary_search(o).is_ok()
    }

    /// Observations of one user, in sorted order.
    pub fn of_user(&self, user: UserId) -> &[Observation] {
        let lo = self.items.partition_point(|o| o.user < user);
        let hi = self.items.partition_point(|o| o.user <= user);
        &self.items[lo..hi]
    }
}

impl FromIterator<Observation> for ObservationSet {
    fn from_iter<I: IntoIterator<Item = Observation>>(iter: I) -> Self {
        let mut items: Vec<Observation> = iter.into_iter().collect();
        items.sort_unstable();
        items.dedup();
        ObservationSet { items }
    }
}

impl<'a> IntoIterator for &'a ObservationSet {
    type Item = &'a Observation;
    type IntoIter = std::slice::Iter<'a, Observation>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// One browsing session: items bought versus items clicked but not bought.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    user: UserId,
    bought: BTreeSet<ItemId>,
    clicked_not_bought: BTreeSet<ItemId>,
}

impl Session {
    pub fn new(
        user: UserId,
        bought: impl IntoIterator<Item = ItemId>,
        clicked_not_bought: impl IntoIterator<Item = ItemId>,
    ) -> Result<Self> {
        let bought: BTreeSet<ItemId> = bought.into_iter().collect();
        let clicked_not_bought: BTreeSet<ItemId> = clicked_not_bought.into_iter().collect();
        if let Some(item) = bought.intersection(&clicked_not_bought).next() {
            return Err(Error::Validation(format!(
                "session of user {user}: item {item} is both bought and clicked-not-bought"
            )));
        }
        Ok(Session {
            user,
            bought,
            clicked_not_bought,
        })
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn bought(&self) -> &BTreeSet<ItemId> {
        &self.bought
    }

    pub fn clicked_not_bought(&self) -> &BTreeSet<ItemId> {
        &self.clicked_not_bought
    }
}
