use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::ids::{ItemId, UserId};
use crate::ingest::RatingRecord;
use crate::ppr::{personalized_pagerank, PprConfig, TransitionModel};
use crate::ranking::{Ranker, RecommendationList};

/// Users `[0, M)` linked to the items `[M, M + N)` they rated.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteGraph {
    users: usize,
    items: usize,
    graph: CsrGraph,
}

impl BipartiteGraph {
    /// With `weighted`, each edge weight is the rating.
    pub fn from_ratings(users: usize, items: usize, records: &[RatingRecord], weighted: bool) -> Result<Self> {
        for r in records {
            if r.user.index() >= users || r.item.index() >= items {
                return Err(Error::Build(format!("rating {r:?} out of range")));
            }
        }
        let node_count = users + items;
        let graph = if weighted {
            let edges: Vec<(u32, u32, f64)> = records
                .iter()
                .map(|r| (r.user.0, (users + r.item.index()) as u32, r.rating as f64))
                .collect();
            CsrGraph::from_weighted_edges(node_count, &edges)?
        } else {
            let edges: Vec<(u32, u32)> = records
                .iter()
                .map(|r| (r.user.0, (users + r.item.index()) as u32))
                .collect();
            CsrGraph::from_edges(node_count, &edges)?
        };
        Ok(BipartiteGraph { users, items, graph })
    }

    pub fn num_users(&self) -> usize {
        self.users
    }

    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn is_weighted(&self) -> bool {
        self.graph.is_weighted()
    }

    pub fn graph(&self) -> &CsrGraph {
        &self.graph
    }

    pub fn item_node(&self, item: ItemId) -> usize {
        self.users + item.index()
    }

    /// Items linked to `user`, ascending.
    pub fn rated_items(&self, user: UserId) -> Vec<ItemId> {
        self.graph
            .neighbors(user.index())
            .iter()
            .map(|&v| ItemId::from(v as usize - self.users))
            .collect()
    }
}

/// Ranks items by their own personalized PageRank mass.
pub struct Bgr<'g> {
    graph: &'g BipartiteGraph,
    model: TransitionModel<'g>,
    cfg: PprConfig,
}

impl<'g> Bgr<'g> {
    pub fn new(graph: &'g BipartiteGraph, cfg: PprConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Bgr {
            graph,
            model: TransitionModel::new(&graph.graph),
            cfg,
        })
    }
}

impl Ranker for Bgr<'_> {
    fn name(&self) -> &str {
        if self.graph.is_weighted() {
            "wbgr"
        } else {
            "bgr"
        }
    }

    fn item_scores(&self, user: UserId) -> Result<Vec<Option<f64>>> {
        if user.index() >= self.graph.users {
            return Err(Error::InvalidParameter(format!("user {user} out of range")));
        }
        if self.graph.graph.degree(user.index()) == 0 {
            return Err(Error::ColdStart(user));
        }
        let v = personalized_pagerank(&self.model, user.index(), &self.cfg)?;
        Ok(v.values[self.graph.users..].iter().map(|&x| Some(x)).collect())
    }
}

/// Top-`k` items the user has not rated, by bipartite walk mass.
pub fn bgr_recommend(graph: &BipartiteGraph, user: UserId, k: usize, cfg: &PprConfig) -> Result<RecommendationList> {
    let profile = if user.index() < graph.users {
        graph.rated_items(user)
    } else {
        Vec::new()
    };
    Bgr::new(graph, *cfg)?.recommend(user, k, &profile)
}
