#![allow(dead_code)]

use std::path::PathBuf;

use grank::ingest::{Observation, ObservationSet, RatingRecord};
use grank::{ItemId, UserId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn obs(u: u32, d: u32, n: u32) -> Observation {
    Observation::new(UserId(u), ItemId(d), ItemId(n)).unwrap()
}

/// Five users, items A..D as 0..3, nine stated preferences. Users 0, 1 and 4
/// state one preference each.
pub fn toy() -> (usize, usize, ObservationSet) {
    let set = [
        obs(0, 0, 1),
        obs(1, 3, 1),
        obs(4, 3, 2),
        obs(2, 0, 1),
        obs(2, 3, 2),
        obs(2, 0, 2),
        obs(3, 0, 1),
        obs(3, 3, 2),
        obs(3, 1, 2),
    ]
    .into_iter()
    .collect();
    (5, 4, set)
}

/// `GRANK_ML100K` or `<workspace>/data/ml-100k/u.data`, if the file exists.
pub fn ml100k_path() -> Option<PathBuf> {
    let path = std::env::var_os("GRANK_ML100K")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ml-100k/u.data"));
    path.is_file().then_some(path)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random observations over `m` users and `n` items.
pub fn random_observations(rng: &mut ChaCha8Rng, m: usize, n: usize, count: usize) -> ObservationSet {
    (0..count)
        .filter_map(|_| {
            let u = rng.random_range(0..m as u32);
            let d = rng.random_range(0..n as u32);
            let e = rng.random_range(0..n as u32);
            (d != e).then(|| obs(u, d, e))
        })
        .collect()
}

/// Every user rates `per_user` distinct random items on a 1..=5 scale.
pub fn random_ratings(rng: &mut ChaCha8Rng, m: usize, n: usize, per_user: usize) -> Vec<RatingRecord> {
    let mut out = Vec::new();
    for u in 0..m {
        let items = rand::seq::index::sample(rng, n, per_user.min(n));
        for i in items {
            out.push(RatingRecord::new(UserId::from(u), ItemId::from(i), rng.random_range(1..=5)));
        }
    }
    out
}

/// Ratings in MovieLens 100K text form, raw ids starting at 1.
pub fn to_u_data(records: &[RatingRecord]) -> String {
    records
        .iter()
        .enumerate()
        .map(|(k, r)| format!("{}\t{}\t{}\t{}\n", r.user.0 + 1, r.item.0 + 1, r.rating, 880000000 + k))
        .collect()
}
