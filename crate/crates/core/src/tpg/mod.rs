//! The tripartite preference graph: users, pairwise preferences, and the
//! desirable/undesirable representative of every item.
//!
//! Global node ids are laid out as
//!
//! ```text
//! [0, M)                    users
//! [M, M + |P|)              preference nodes, row-major by (desirable, undesirable)
//! [M + |P|, M + |P| + 2N)   representatives: item i desirable at even offset 2i,
//!                           undesirable at odd offset 2i + 1
//! ```
//!
//! so every lookup is arithmetic. In full mode `|P| = N(N-1)`; in pruned mode
//! only the pairs that some user stated are materialized.

mod snapshot;

pub use snapshot::{read_snapshot, write_debug_dump, write_snapshot};

use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::ids::{ItemId, UserId};
use crate::ingest::ObservationSet;

/// `desirable` is preferred over `undesirable`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreferencePair {
    desirable: ItemId,
    undesirable: ItemId,
}

impl PreferencePair {
    pub fn new(desirable: ItemId, undesirable: ItemId) -> Result<Self> {
        if desirable == undesirable {
            return Err(Error::SameItemPair(desirable));
        }
        Ok(PreferencePair {
            desirable,
            undesirable,
        })
    }

    pub fn desirable(self) -> ItemId {
        self.desirable
    }

    pub fn undesirable(self) -> ItemId {
        self.undesirable
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Desirable,
    Undesirable,
}

/// One side of an item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Representative {
    pub item: ItemId,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    User,
    Preference,
    Representative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeIndex {
    pub layer: Layer,
    /// Position within the layer.
    pub ordinal: usize,
    pub global: usize,
}

/// Row-major ordinal of the ordered pair `(desirable, undesirable)` among all
/// `n(n-1)` ordered pairs of distinct items.
pub fn preference_index(desirable: ItemId, undesirable: ItemId, n: usize) -> Result<usize> {
    if desirable == undesirable {
        return Err(Error::SameItemPair(desirable));
    }
    let (d, u) = (desirable.index(), undesirable.index());
    if d >= n || u >= n {
        return Err(Error::InvalidParameter(format!(
            "pair ({d}, {u}) out of range for {n} items"
        )));
    }
    Ok(d * (n - 1) + if u < d { u } else { u - 1 })
}

/// Inverse of [`preference_index`].
pub fn preference_pair(ordinal: usize, n: usize) -> PreferencePair {
    debug_assert!(n >= 2 && ordinal < n * (n - 1));
    let d = ordinal / (n - 1);
    let r = ordinal % (n - 1);
    let u = if r < d { r } else { r + 1 };
    PreferencePair {
        desirable: ItemId::from(d),
        undesirable: ItemId::from(u),
    }
}

/// 1 when `user` stated `pair`.
pub fn agreement(user: UserId, pair: PreferencePair, observations: &ObservationSet) -> bool {
    let o = crate::ingest::Observation {
        user,
        desirable: pair.desirable,
        undesirable: pair.undesirable,
    };
    observations.contains(&o)
}

/// 1 when the preference supports the representative: the winner's desirable
/// side or the loser's undesirable side.
pub fn support(pair: PreferencePair, rep: Representative) -> bool {
    match rep.side {
        Side::Desirable => rep.item == pair.desirable,
        Side::Undesirable => rep.item == pair.undesirable,
    }
}

#[derive(Clone, Debug, PartialEq)]
enum PreferenceLayer {
    Full,
    /// Sorted full-layout ordinals of the materialized pairs.
    Pruned(Vec<u64>),
}

/// Immutable tripartite preference graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Tpg {
    users: usize,
    items: usize,
    layer: PreferenceLayer,
    graph: CsrGraph,
}

/// Builds the graph. `pruned` keeps only preference pairs that appear in at
/// least one observation.
pub fn build_tpg(users: usize, items: usize, observations: &ObservationSet, pruned: bool) -> Result<Tpg> {
    for o in observations {
        if o.user.index() >= users || o.desirable.index() >= items || o.undesirable.index() >= items {
            return Err(Error::Build(format!(
                "observation {o:?} out of range for {users} users and {items} items"
            )));
        }
    }
    let full_pairs = items * items.saturating_sub(1);
    let ordinal_of = |o: &crate::ingest::Observation| {
        o.desirable.index() * (items - 1)
            + if o.undesirable < o.desirable {
                o.undesirable.index()
            } else {
                o.undesirable.index() - 1
            }
    };

    let layer = if pruned {
        let mut ords: Vec<u64> = observations.iter().map(|o| ordinal_of(o) as u64).collect();
        ords.sort_unstable();
        ords.dedup();
        PreferenceLayer::Pruned(ords)
    } else {
        PreferenceLayer::Full
    };
    let pref_count = match &layer {
        PreferenceLayer::Full => full_pairs,
        PreferenceLayer::Pruned(o) => o.len(),
    };
    let node_count = users + pref_count + 2 * items;
    if node_count > u32::MAX as usize {
        return Err(Error::Build(format!("{node_count} nodes exceed the u32 id space")));
    }
    let rep_base = users + pref_count;

    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(observations.len() + 2 * pref_count);
    for o in observations {
        let full = ordinal_of(o);
        let local = match &layer {
            PreferenceLayer::Full => full,
            PreferenceLayer::Pruned(ords) => ords.binary_search(&(full as u64)).unwrap(),
        };
        edges.push((o.user.0, (users + local) as u32));
    }
    for local in 0..pref_count {
        let full = match &layer {
            PreferenceLayer::Full => local,
            PreferenceLayer::Pruned(ords) => ords[local] as usize,
        };
        let pair = preference_pair(full, items);
        let p = (users + local) as u32;
        edges.push((p, (rep_base + 2 * pair.desirable.index()) as u32));
        edges.push((p, (rep_base + 2 * pair.undesirable.index() + 1) as u32));
    }
    let graph = CsrGraph::from_edges(node_count, &edges)?;
    Ok(Tpg {
        users,
        items,
        layer,
        graph,
    })
}

impl Tpg {
    pub(crate) fn from_graph(users: usize, items: usize, pruned: bool, graph: CsrGraph) -> Result<Self> {
        let full_pairs = items * items.saturating_sub(1);
        let pref_count = graph
            .node_count()
            .checked_sub(users + 2 * items)
            .ok_or_else(|| Error::Snapshot("node count smaller than users + 2N".into()))?;
        let rep_base = users + pref_count;
        let layer = if pruned {
            let mut ords = Vec::with_capacity(pref_count);
            for local in 0..pref_count {
                let reps: Vec<u32> = graph
                    .neighbors(users + local)
                    .iter()
                    .copied()
                    .filter(|&v| v as usize >= rep_base)
                    .collect();
                let [d, u] = reps[..] else {
                    return Err(Error::Snapshot(format!(
                        "preference node {local} has {} representative neighbors",
                        reps.len()
                    )));
                };
                let (d, u) = (d as usize - rep_base, u as usize - rep_base);
                let (d, u) = if d % 2 == 1 { (u, d) } else { (d, u) };
                if d % 2 != 0 || u % 2 != 1 {
                    return Err(Error::Snapshot(format!("preference node {local} has malformed sides")));
                }
                ords.push(preference_index(ItemId::from(d / 2), ItemId::from(u / 2), items)? as u64);
            }
            if ords.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Snapshot("pruned preference layer not sorted".into()));
            }
            PreferenceLayer::Pruned(ords)
        } else {
            if pref_count != full_pairs {
                return Err(Error::Snapshot(format!(
                    "full graph should have {full_pairs} preference nodes, found {pref_count}"
                )));
            }
            PreferenceLayer::Full
        };
        Ok(Tpg {
            users,
            items,
            layer,
            graph,
        })
    }

    pub fn num_users(&self) -> usize {
        self.users
    }

    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn is_pruned(&self) -> bool {
        matches!(self.layer, PreferenceLayer::Pruned(_))
    }

    pub fn preference_count(&self) -> usize {
        match &self.layer {
            PreferenceLayer::Full => self.items * self.items.saturating_sub(1),
            PreferenceLayer::Pruned(o) => o.len(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Number of user–preference edges.
    pub fn user_edge_count(&self) -> usize {
        self.edge_count() - 2 * self.preference_count()
    }

    pub fn graph(&self) -> &CsrGraph {
        &self.graph
    }

    #[inline]
    pub fn user_node(&self, user: UserId) -> usize {
        user.index()
    }

    /// Global node of a pair, or `None` when pruned away.
    pub fn preference_node(&self, pair: PreferencePair) -> Option<usize> {
        let full = preference_index(pair.desirable, pair.undesirable, self.items).ok()?;
        let local = match &self.layer {
            PreferenceLayer::Full => full,
            PreferenceLayer::Pruned(o) => o.binary_search(&(full as u64)).ok()?,
        };
        Some(self.users + local)
    }

    /// Pair represented by the `ordinal`-th preference node.
    pub fn preference_at(&self, ordinal: usize) -> PreferencePair {
        let full = match &self.layer {
            PreferenceLayer::Full => ordinal,
            PreferenceLayer::Pruned(o) => o[ordinal] as usize,
        };
        preference_pair(full, self.items)
    }

    #[inline]
    fn rep_base(&self) -> usize {
        self.users + self.preference_count()
    }

    #[inline]
    pub fn desirable_node(&self, item: ItemId) -> usize {
        self.rep_base() + 2 * item.index()
    }

    #[inline]
    pub fn undesirable_node(&self, item: ItemId) -> usize {
        self.rep_base() + 2 * item.index() + 1
    }

    pub fn representative_node(&self, rep: Representative) -> usize {
        match rep.side {
            Side::Desirable => self.desirable_node(rep.item),
            Side::Undesirable => self.undesirable_node(rep.item),
        }
    }

    /// Layer-aware view of a global id.
    pub fn node_index(&self, global: usize) -> Option<NodeIndex> {
        let p = self.preference_count();
        let (layer, ordinal) = if global < self.users {
            (Layer::User, global)
        } else if global < self.users + p {
            (Layer::Preference, global - self.users)
        } else if global < self.vertex_count() {
            (Layer::Representative, global - self.users - p)
        } else {
            return None;
        };
        Some(NodeIndex {
            layer,
            ordinal,
            global,
        })
    }

    /// Representative at a representative-layer ordinal.
    pub fn representative_at(&self, ordinal: usize) -> Representative {
        Representative {
            item: ItemId::from(ordinal / 2),
            side: if ordinal.is_multiple_of(2) {
                Side::Desirable
            } else {
                Side::Undesirable
            },
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.graph.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// Degree of the user node; zero means no training observations.
    pub fn user_degree(&self, user: UserId) -> usize {
        self.graph.degree(user.index())
    }
}
