//! Item orderings shared by GRank and the baselines.

use std::cmp::Ordering;
use std::io::Write;

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};

/// One ranked item. `score` is `None` when the algorithm cannot score it;
/// such items sort after every scored one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankedItem {
    pub item: ItemId,
    pub score: Option<f64>,
}

/// Descending score, unscored last, ties by ascending item id.
pub fn compare_ranked(a: &RankedItem, b: &RankedItem) -> Ordering {
    match (a.score, b.score) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
    .then(a.item.cmp(&b.item))
}

/// Ordered recommendations for one user.
#[derive(Clone, Debug, PartialEq)]
pub struct RecommendationList {
    pub user: UserId,
    /// Requested length; `entries` may be shorter.
    pub k: usize,
    pub entries: Vec<RankedItem>,
}

impl RecommendationList {
    /// Sorts every item not in `excluded` and keeps the first `k`.
    pub fn from_scores(user: UserId, k: usize, scores: &[Option<f64>], excluded: &[ItemId]) -> Self {
        let mut skip = vec![false; scores.len()];
        for i in excluded {
            if let Some(s) = skip.get_mut(i.index()) {
                *s = true;
            }
        }
        let mut entries: Vec<RankedItem> = scores
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip[*i])
            .map(|(i, &score)| RankedItem {
                item: ItemId::from(i),
                score,
            })
            .collect();
        entries.sort_by(compare_ranked);
        entries.truncate(k);
        RecommendationList { user, k, entries }
    }

    pub fn items(&self) -> Vec<ItemId> {
        self.entries.iter().map(|e| e.item).collect()
    }

    /// Writes `user,rank,item,gr` rows (rank from 1, reals with 17 significant
    /// digits, empty score when undefined). `raw_user`/`raw_item` translate
    /// dense ids for output.
    pub fn write_csv(
        &self,
        mut out: impl Write,
        raw_user: impl Fn(UserId) -> String,
        raw_item: impl Fn(ItemId) -> String,
    ) -> std::io::Result<()> {
        for (rank, e) in self.entries.iter().enumerate() {
            let score = e.score.map(|s| format!("{s:.16e}")).unwrap_or_default();
            writeln!(out, "{},{},{},{}", raw_user(self.user), rank + 1, raw_item(e.item), score)?;
        }
        Ok(())
    }
}

/// Anything that can score every item for a user.
pub trait Ranker: Send + Sync {
    fn name(&self) -> &str;

    /// One entry per item of the training universe.
    fn item_scores(&self, user: UserId) -> Result<Vec<Option<f64>>>;

    /// Orders `candidates` by this ranker's scores.
    fn rank_candidates(&self, user: UserId, candidates: &[ItemId]) -> Result<Vec<ItemId>> {
        let scores = self.item_scores(user)?;
        let mut ranked = Vec::with_capacity(candidates.len());
        for &item in candidates {
            let score = *scores.get(item.index()).ok_or_else(|| {
                Error::InvalidParameter(format!("item {item} outside the scored universe"))
            })?;
            ranked.push(RankedItem { item, score });
        }
        ranked.sort_by(compare_ranked);
        Ok(ranked.into_iter().map(|r| r.item).collect())
    }

    fn recommend(&self, user: UserId, k: usize, train_profile: &[ItemId]) -> Result<RecommendationList> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let scores = self.item_scores(user)?;
        Ok(RecommendationList::from_scores(user, k, &scores, train_profile))
    }

    fn rank_all(&self, user: UserId, train_profile: &[ItemId]) -> Result<RecommendationList> {
        let scores = self.item_scores(user)?;
        Ok(RecommendationList::from_scores(user, scores.len(), &scores, train_profile))
    }
}
