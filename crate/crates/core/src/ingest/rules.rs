use std::collections::{BTreeMap, BTreeSet};

use super::{Observation, ObservationSet, RatingRecord, Session};
use crate::ids::{ItemId, UserId};

/// Strictly-greater rating pairs of the same user become observations; ties
/// produce none.
pub fn ratings_to_observations(records: &[RatingRecord]) -> ObservationSet {
    let mut sorted: Vec<&RatingRecord> = records.iter().collect();
    sorted.sort_unstable_by_key(|r| (r.user, r.item));
    let mut out = Vec::new();
    for group in sorted.chunk_by(|a, b| a.user == b.user) {
        for a in group {
            for b in group {
                if a.rating > b.rating {
                    out.push(Observation {
                        user: a.user,
                        desirable: a.item,
                        undesirable: b.item,
                    });
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Every liked item of a user is preferred over every disliked item of the
/// same user.
///
/// An item both liked and disliked by one user yields both orientations, and
/// a warning is logged.
pub fn feedback_to_observations(likes: &[(UserId, ItemId)], dislikes: &[(UserId, ItemId)]) -> ObservationSet {
    let mut liked: BTreeMap<UserId, BTreeSet<ItemId>> = BTreeMap::new();
    for &(u, i) in likes {
        liked.entry(u).or_default().insert(i);
    }
    let mut disliked: BTreeMap<UserId, BTreeSet<ItemId>> = BTreeMap::new();
    for &(u, i) in dislikes {
        disliked.entry(u).or_default().insert(i);
    }
    let mut out = Vec::new();
    for (user, pos) in &liked {
        let Some(neg) = disliked.get(user) else {
            continue;
        };
        for item in pos.intersection(neg) {
            log::warn!("user {user} both likes and dislikes item {item}");
        }
        for &i in pos {
            for &j in neg {
                if i != j {
                    out.push(Observation {
                        user: *user,
                        desirable: i,
                        undesirable: j,
                    });
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Items bought in a session are preferred over items clicked but not bought
/// in that session. Repeats across sessions collapse.
pub fn sessions_to_observations(sessions: &[Session]) -> ObservationSet {
    sessions
        .iter()
        .flat_map(|s| {
            s.bought().iter().flat_map(move |&i| {
                s.clicked_not_bought().iter().map(move |&j| Observation {
                    user: s.user(),
                    desirable: i,
                    undesirable: j,
                })
            })
        })
        .collect()
}
