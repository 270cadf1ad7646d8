use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NdcgResult {
    pub user: UserId,
    pub k: usize,
    pub value: f64,
}

fn gain(rating: u8) -> f64 {
    (2f64).powi(rating as i32) - 1.0
}

/// DCG of the first `k` ratings: gain `2^r - 1`, discount `log2(i + 1)` at
/// 1-based position `i`.
pub fn dcg(ratings: &[u8], k: usize) -> f64 {
    ratings
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &r)| gain(r) / ((i + 2) as f64).log2())
        .sum()
}

/// NDCG@k of a predicted order of the user's test items.
///
/// `test` holds the user's test ratings; `predicted` must be a permutation of
/// its items. An ideal DCG of zero (every rating gives no gain) counts as 1.
pub fn ndcg_at_k(user: UserId, predicted: &[ItemId], test: &[(ItemId, u8)], k: usize) -> Result<NdcgResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("NDCG cutoff must be >= 1".into()));
    }
    if predicted.len() != test.len() {
        return Err(Error::Validation(format!(
            "user {user}: predicted {} items but has {} test ratings",
            predicted.len(),
            test.len()
        )));
    }
    let mut lookup: Vec<(ItemId, u8)> = test.to_vec();
    lookup.sort_unstable();
    let mut seen = vec![false; lookup.len()];
    let mut ordered = Vec::with_capacity(predicted.len());
    for item in predicted {
        let pos = lookup
            .binary_search_by_key(item, |e| e.0)
            .map_err(|_| Error::Validation(format!("user {user}: item {item} is not a test item")))?;
        if std::mem::replace(&mut seen[pos], true) {
            return Err(Error::Validation(format!("user {user}: item {item} predicted twice")));
        }
        ordered.push(lookup[pos].1);
    }
    let mut ideal: Vec<u8> = test.iter().map(|e| e.1).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg(&ideal, k);
    let value = if idcg == 0.0 { 1.0 } else { dcg(&ordered, k) / idcg };
    Ok(NdcgResult { user, k, value })
}
