//! Item goodness from the desirable and undesirable representatives, and the
//! top-k recommender built on it.

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::ppr::{personalized_pagerank, FullTpgSolver, PprConfig, PprVector, TransitionModel};
use crate::ranking::{Ranker, RecommendationList};
use crate::tpg::Tpg;

/// Goodness of one item for the target user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrScore {
    pub item: ItemId,
    /// `ppr_desirable / (ppr_desirable + ppr_undesirable)`, `None` when both
    /// sides received no mass.
    pub gr: Option<f64>,
    pub ppr_desirable: f64,
    pub ppr_undesirable: f64,
}

impl GrScore {
    pub fn new(item: ItemId, ppr_desirable: f64, ppr_undesirable: f64) -> Self {
        let total = ppr_desirable + ppr_undesirable;
        GrScore {
            item,
            gr: (total > 0.0).then(|| ppr_desirable / total),
            ppr_desirable,
            ppr_undesirable,
        }
    }
}

/// Reads the two representative entries of every item.
pub fn gr_scores(tpg: &Tpg, ppr: &PprVector) -> Vec<GrScore> {
    (0..tpg.num_items())
        .map(|i| {
            let item = ItemId::from(i);
            GrScore::new(
                item,
                ppr.values[tpg.desirable_node(item)],
                ppr.values[tpg.undesirable_node(item)],
            )
        })
        .collect()
}

/// Which power-iteration implementation to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    /// Factored solver on full-mode graphs, materialized graph otherwise.
    #[default]
    Auto,
    /// Always iterate over the materialized adjacency.
    Csr,
}

enum Solver<'g> {
    Csr(TransitionModel<'g>),
    Factored(FullTpgSolver<'g>),
}

/// GRank recommender over one graph.
pub struct GRank<'g> {
    tpg: &'g Tpg,
    cfg: PprConfig,
    solver: Solver<'g>,
}

/// Scores of all items plus solver diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredUser {
    pub scores: Vec<GrScore>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl<'g> GRank<'g> {
    pub fn new(tpg: &'g Tpg, cfg: PprConfig, engine: Engine) -> Result<Self> {
        cfg.validate()?;
        let solver = match engine {
            Engine::Auto if !tpg.is_pruned() && tpg.num_items() >= 2 => Solver::Factored(FullTpgSolver::new(tpg)?),
            _ => Solver::Csr(TransitionModel::new(tpg.graph())),
        };
        Ok(GRank { tpg, cfg, solver })
    }

    pub fn tpg(&self) -> &'g Tpg {
        self.tpg
    }

    pub fn config(&self) -> &PprConfig {
        &self.cfg
    }

    fn check_user(&self, user: UserId) -> Result<()> {
        if user.index() >= self.tpg.num_users() {
            return Err(Error::InvalidParameter(format!("user {user} out of range")));
        }
        if self.tpg.user_degree(user) == 0 {
            return Err(Error::ColdStart(user));
        }
        Ok(())
    }

    /// Full personalized PageRank vector restarted at `user`.
    pub fn ppr(&self, user: UserId) -> Result<PprVector> {
        self.check_user(user)?;
        match &self.solver {
            Solver::Csr(model) => personalized_pagerank(model, self.tpg.user_node(user), &self.cfg),
            Solver::Factored(f) => f.solve(user, &self.cfg),
        }
    }

    /// GR score of every item.
    pub fn score(&self, user: UserId) -> Result<ScoredUser> {
        self.check_user(user)?;
        match &self.solver {
            Solver::Csr(model) => {
                let v = personalized_pagerank(model, self.tpg.user_node(user), &self.cfg)?;
                Ok(ScoredUser {
                    scores: gr_scores(self.tpg, &v),
                    iterations_used: v.iterations_used,
                    converged: v.converged,
                })
            }
            Solver::Factored(f) => {
                let mut it = f.start(user, self.cfg)?;
                let converged = it.run();
                let scores = (0..self.tpg.num_items())
                    .map(|i| {
                        let item = ItemId::from(i);
                        GrScore::new(item, it.desirable(item), it.undesirable(item))
                    })
                    .collect();
                Ok(ScoredUser {
                    scores,
                    iterations_used: it.iterations(),
                    converged,
                })
            }
        }
    }
}

impl Ranker for GRank<'_> {
    fn name(&self) -> &str {
        "grank"
    }

    fn item_scores(&self, user: UserId) -> Result<Vec<Option<f64>>> {
        Ok(self.score(user)?.scores.into_iter().map(|s| s.gr).collect())
    }
}

/// Top-`k` unseen items for `user` by GR score.
pub fn recommend(tpg: &Tpg, user: UserId, k: usize, cfg: &PprConfig, train_profile: &[ItemId]) -> Result<RecommendationList> {
    GRank::new(tpg, *cfg, Engine::Auto)?.recommend(user, k, train_profile)
}

/// Every unseen item for `user`, best first.
pub fn rank_all(tpg: &Tpg, user: UserId, cfg: &PprConfig, train_profile: &[ItemId]) -> Result<RecommendationList> {
    GRank::new(tpg, *cfg, Engine::Auto)?.rank_all(user, train_profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Observation, ObservationSet};
    use crate::tpg::build_tpg;

    fn obs(list: &[(u32, u32, u32)]) -> ObservationSet {
        list.iter()
            .map(|&(u, d, n)| Observation::new(UserId(u), ItemId(d), ItemId(n)).unwrap())
            .collect()
    }

    #[test]
    fn gr_formula_edges() {
        assert_eq!(GrScore::new(ItemId(0), 0.2, 0.2).gr, Some(0.5));
        assert_eq!(GrScore::new(ItemId(0), 0.3, 0.0).gr, Some(1.0));
        assert_eq!(GrScore::new(ItemId(0), 0.0, 0.0).gr, None);
    }

    #[test]
    fn gr_is_scale_invariant() {
        let a = GrScore::new(ItemId(0), 0.013, 0.007).gr.unwrap();
        let b = GrScore::new(ItemId(0), 0.013 * 37.0, 0.007 * 37.0).gr.unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn cold_start_user() {
        let tpg = build_tpg(2, 3, &obs(&[(0, 0, 1)]), false).unwrap();
        let err = recommend(&tpg, UserId(1), 2, &PprConfig::default(), &[]).unwrap_err();
        assert!(matches!(err, Error::ColdStart(UserId(1))));
        assert!(recommend(&tpg, UserId(0), 0, &PprConfig::default(), &[]).is_err());
    }

    #[test]
    fn preferred_item_ranks_first() {
        let tpg = build_tpg(1, 2, &obs(&[(0, 0, 1)]), false).unwrap();
        let list = rank_all(&tpg, UserId(0), &PprConfig::default(), &[]).unwrap();
        assert_eq!(list.items(), vec![ItemId(0), ItemId(1)]);
        let top = list.entries[0].score.unwrap();
        assert!(top > 0.5 && list.entries[1].score.unwrap() < 0.5);
    }

    #[test]
    fn k_beyond_eligible_items() {
        let tpg = build_tpg(1, 4, &obs(&[(0, 0, 1), (0, 2, 3)]), false).unwrap();
        let profile = [ItemId(0), ItemId(1)];
        let list = recommend(&tpg, UserId(0), 10, &PprConfig::default(), &profile).unwrap();
        assert_eq!(list.entries.len(), 2);
        assert!(list.items().iter().all(|i| !profile.contains(i)));
    }

    #[test]
    fn engines_agree() {
        let o = obs(&[(0, 0, 1), (0, 2, 1), (1, 0, 1), (1, 3, 2), (2, 1, 3)]);
        let tpg = build_tpg(3, 4, &o, false).unwrap();
        let cfg = PprConfig { tolerance: 1e-12, max_iterations: 500, ..Default::default() };
        let a = GRank::new(&tpg, cfg, Engine::Auto).unwrap().score(UserId(0)).unwrap();
        let b = GRank::new(&tpg, cfg, Engine::Csr).unwrap().score(UserId(0)).unwrap();
        for (x, y) in a.scores.iter().zip(&b.scores) {
            assert!((x.gr.unwrap() - y.gr.unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn pruned_graph_leaves_unreached_items_unscored() {
        let tpg = build_tpg(1, 3, &obs(&[(0, 0, 1)]), true).unwrap();
        let s = GRank::new(&tpg, PprConfig::default(), Engine::Auto).unwrap().score(UserId(0)).unwrap();
        assert_eq!(s.scores[2].gr, None);
        let list = rank_all(&tpg, UserId(0), &PprConfig::default(), &[]).unwrap();
        assert_eq!(list.items().last(), Some(&ItemId(2)));
    }
}
