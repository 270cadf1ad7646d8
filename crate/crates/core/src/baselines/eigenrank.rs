//! Random-walk EigenRank.
//!
//! 1. Neighbors: the `neighborhood_size` users with the highest Kendall
//!    similarity to the target (undefined similarities are skipped, negative
//!    ones kept).
//! 2. Preference matrix: for every item pair rated by at least one neighbor,
//!    `psi(i, j) = Σ s_v (r_vi - r_vj) / Σ |s_v|` over the neighbors `v` who
//!    rated both.
//! 3. Ranking: items are states of a Markov chain moving from `i` to `j != i`
//!    with probability proportional to `exp(psi(j, i))`, damped by `epsilon`
//!    with uniform teleportation. Items are ranked by stationary probability.

use std::collections::HashMap;

use rayon::prelude::*;

use super::kendall::kendall_similarity;
use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::ingest::RatingRecord;
use crate::ranking::{Ranker, RecommendationList};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenRankConfig {
    pub neighborhood_size: usize,
    /// Probability of following the preference chain instead of teleporting.
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EigenRankConfig {
    fn default() -> Self {
        EigenRankConfig {
            neighborhood_size: 100,
            epsilon: 0.85,
            tolerance: 1e-10,
            max_iterations: 1000,
        }
    }
}

/// Skew-symmetric pairwise preference scores of one target user. Pairs no
/// neighbor compared are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PreferenceMatrix {
    /// Keyed by `(i, j)` with `i < j`, value `psi(i, j)`.
    entries: HashMap<(u32, u32), f64>,
}

impl PreferenceMatrix {
    pub fn get(&self, i: ItemId, j: ItemId) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.entries.get(&(i.0, j.0)).copied().unwrap_or(0.0),
            std::cmp::Ordering::Greater => -self.entries.get(&(j.0, i.0)).copied().unwrap_or(0.0),
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Pairs `(i, j, psi(i, j))` with `i < j`, sorted.
    pub fn pairs(&self) -> Vec<(ItemId, ItemId, f64)> {
        let mut v: Vec<_> = self
            .entries
            .iter()
            .map(|(&(i, j), &p)| (ItemId(i), ItemId(j), p))
            .collect();
        v.sort_by_key(|&(i, j, _)| (i, j));
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// EigenRank over fixed training ratings.
pub struct EigenRank {
    profiles: Vec<Vec<(ItemId, u8)>>,
    items: usize,
    cfg: EigenRankConfig,
}

impl EigenRank {
    pub fn new(users: usize, items: usize, train: &[RatingRecord], cfg: EigenRankConfig) -> Result<Self> {
        if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {}", cfg.epsilon)));
        }
        let mut profiles = vec![Vec::new(); users];
        for r in train {
            if r.user.index() >= users || r.item.index() >= items {
                return Err(Error::Build(format!("rating {r:?} out of range")));
            }
            profiles[r.user.index()].push((r.item, r.rating));
        }
        for p in &mut profiles {
            p.sort_unstable();
        }
        Ok(EigenRank { profiles, items, cfg })
    }

    pub fn profile(&self, user: UserId) -> &[(ItemId, u8)] {
        &self.profiles[user.index()]
    }

    /// Most similar users with their Kendall tau, best first, ties by id.
    pub fn neighbors(&self, user: UserId) -> Vec<(UserId, f64)> {
        let target = &self.profiles[user.index()];
        let mut sims: Vec<(UserId, f64)> = (0..self.profiles.len())
            .into_par_iter()
            .filter(|&v| v != user.index())
            .filter_map(|v| {
                kendall_similarity(target, &self.profiles[v])
                    .tau
                    .map(|t| (UserId::from(v), t))
            })
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        sims.truncate(self.cfg.neighborhood_size);
        sims
    }

    pub fn preference_matrix(&self, neighbors: &[(UserId, f64)]) -> PreferenceMatrix {
        let mut acc: HashMap<(u32, u32), (f64, f64)> = HashMap::new();
        for &(v, s) in neighbors {
            let p = &self.profiles[v.index()];
            for x in 0..p.len() {
                for y in (x + 1)..p.len() {
                    let (i, ri) = p[x];
                    let (j, rj) = p[y];
                    let e = acc.entry((i.0, j.0)).or_insert((0.0, 0.0));
                    e.0 += s * (ri as f64 - rj as f64);
                    e.1 += s.abs();
                }
            }
        }
        let entries = acc
            .into_iter()
            .map(|(k, (num, den))| (k, if den > 0.0 { num / den } else { 0.0 }))
            .collect();
        PreferenceMatrix { entries }
    }

    /// Stationary distribution of the damped preference chain.
    pub fn stationary(&self, prefs: &PreferenceMatrix) -> Vec<f64> {
        let n = self.items;
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![1.0];
        }
        // covered[i]: (j, exp(psi(j, i)) - 1) for every pair with a nonzero entry
        let mut covered: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &p) in &prefs.entries {
            if p != 0.0 {
                covered[i as usize].push((j, (-p).exp() - 1.0));
                covered[j as usize].push((i, p.exp() - 1.0));
            }
        }
        for c in &mut covered {
            c.sort_unstable_by_key(|e| e.0);
        }
        let norm: Vec<f64> = covered
            .iter()
            .map(|c| (n - 1) as f64 + c.iter().map(|e| e.1).sum::<f64>())
            .collect();

        let eps = self.cfg.epsilon;
        let teleport = (1.0 - eps) / n as f64;
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..self.cfg.max_iterations {
            let q: Vec<f64> = pi.iter().zip(&norm).map(|(p, z)| p / z).collect();
            let total: f64 = q.iter().sum();
            // into j: Σ_{i != j} q_i + Σ_{i covered with j} (w(j,i) - 1) q_i
            let mut next: Vec<f64> = q.iter().map(|&qj| total - qj).collect();
            for (i, c) in covered.iter().enumerate() {
                for &(j, extra) in c {
                    next[j as usize] += extra * q[i];
                }
            }
            next.iter_mut().for_each(|v| *v = eps * *v + teleport);
            let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if delta < self.cfg.tolerance {
                break;
            }
        }
        pi
    }
}

impl Ranker for EigenRank {
    fn name(&self) -> &str {
        "eigenrank"
    }

    fn item_scores(&self, user: UserId) -> Result<Vec<Option<f64>>> {
        if user.index() >= self.profiles.len() {
            return Err(Error::InvalidParameter(format!("user {user} out of range")));
        }
        let neighbors = self.neighbors(user);
        if neighbors.is_empty() {
            return Err(Error::ColdStart(user));
        }
        let prefs = self.preference_matrix(&neighbors);
        Ok(self.stationary(&prefs).into_iter().map(Some).collect())
    }
}

/// Top-`k` items the user has not rated in `train`.
pub fn eigenrank_recommend(
    users: usize,
    items: usize,
    train: &[RatingRecord],
    user: UserId,
    k: usize,
    cfg: &EigenRankConfig,
) -> Result<RecommendationList> {
    let er = EigenRank::new(users, items, train, *cfg)?;
    if user.index() >= users {
        return Err(Error::InvalidParameter(format!("user {user} out of range")));
    }
    let profile: Vec<ItemId> = er.profile(user).iter().map(|p| p.0).collect();
    er.recommend(user, k, &profile)
}
