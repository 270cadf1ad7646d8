use std::cmp::Ordering;

use crate::ids::ItemId;

/// Rank agreement of two users over the item pairs both rated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KendallSimilarity {
    /// `(concordant - discordant) / (concordant + discordant)`; `None` when
    /// the users share no strictly ordered pair.
    pub tau: Option<f64>,
    pub concordant: usize,
    pub discordant: usize,
}

impl KendallSimilarity {
    pub fn common_pairs(&self) -> usize {
        self.concordant + self.discordant
    }
}

/// Kendall correlation between two rating profiles sorted by item.
///
/// Only pairs strictly ordered by both users count.
pub fn kendall_similarity(u: &[(ItemId, u8)], v: &[(ItemId, u8)]) -> KendallSimilarity {
    let mut common = Vec::new();
    let (mut a, mut b) = (0, 0);
    while a < u.len() && b < v.len() {
        match u[a].0.cmp(&v[b].0) {
            Ordering::Less => a += 1,
            Ordering::Greater => b += 1,
            Ordering::Equal => {
                common.push((u[a].1, v[b].1));
                a += 1;
                b += 1;
            }
        }
    }
    let (mut concordant, mut discordant) = (0, 0);
    for x in 0..common.len() {
        for y in (x + 1)..common.len() {
            let su = common[x].0.cmp(&common[y].0);
            let sv = common[x].1.cmp(&common[y].1);
            if su == Ordering::Equal || sv == Ordering::Equal {
                continue;
            }
            if su == sv {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let total = concordant + discordant;
    KendallSimilarity {
        tau: (total > 0).then(|| (concordant as f64 - discordant as f64) / total as f64),
        concordant,
        discordant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(list: &[(u32, u8)]) -> Vec<(ItemId, u8)> {
        list.iter().map(|&(i, r)| (ItemId(i), r)).collect()
    }

    #[test]
    fn identical_and_reversed() {
        let a = p(&[(0, 5), (1, 3), (2, 1)]);
        assert_eq!(kendall_similarity(&a, &a).tau, Some(1.0));
        let b = p(&[(0, 1), (1, 3), (2, 5)]);
        assert_eq!(kendall_similarity(&a, &b).tau, Some(-1.0));
    }

    #[test]
    fn single_discordant_pair() {
        let s = kendall_similarity(&p(&[(0, 5), (1, 3)]), &p(&[(0, 2), (1, 4)]));
        assert_eq!((s.concordant, s.discordant, s.tau), (0, 1, Some(-1.0)));
    }

    #[test]
    fn no_common_pairs_is_undefined() {
        let s = kendall_similarity(&p(&[(0, 5), (1, 3)]), &p(&[(2, 2), (3, 4)]));
        assert_eq!(s.tau, None);
        let ties = kendall_similarity(&p(&[(0, 4), (1, 4)]), &p(&[(0, 2), (1, 5)]));
        assert_eq!(ties.common_pairs(), 0);
    }

    proptest! {
        #[test]
        fn symmetric(a in proptest::collection::btree_map(0u32..12, 1u8..=5, 0..10),
                     b in proptest::collection::btree_map(0u32..12, 1u8..=5, 0..10)) {
            let a: Vec<(ItemId, u8)> = a.into_iter().map(|(i, r)| (ItemId(i), r)).collect();
            let b: Vec<(ItemId, u8)> = b.into_iter().map(|(i, r)| (ItemId(i), r)).collect();
            let ab = kendall_similarity(&a, &b);
            let ba = kendall_similarity(&b, &a);
            prop_assert_eq!(ab, ba);
            if let Some(t) = ab.tau {
                prop_assert!((-1.0..=1.0).contains(&t));
            }
        }
    }
}
