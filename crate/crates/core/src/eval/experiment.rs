use std::fmt;
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;

use super::ndcg::ndcg_at_k;
use crate::baselines::{Bgr, BipartiteGraph, EigenRank, EigenRankConfig};
use crate::error::{Error, Result};
use crate::grank::{Engine, GRank};
use crate::ids::{ItemId, UserId};
use crate::ingest::Dataset;
use crate::ppr::PprConfig;
use crate::ranking::Ranker;
use crate::tpg::build_tpg;

/// Cutoffs reported by default.
pub const DEFAULT_KS: [usize; 4] = [1, 3, 5, 10];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    GRank,
    Bgr,
    Wbgr,
    EigenRank,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::GRank, Algorithm::Bgr, Algorithm::Wbgr, Algorithm::EigenRank];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GRank => "grank",
            Algorithm::Bgr => "bgr",
            Algorithm::Wbgr => "wbgr",
            Algorithm::EigenRank => "eigenrank",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?} (grank, bgr, wbgr, eigenrank)")))
    }
}

/// Settings shared by every algorithm in a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlgorithmConfig {
    pub ppr: PprConfig,
    pub pruned: bool,
    pub engine: Engine,
    pub eigenrank: EigenRankConfig,
}

/// NDCG values of one algorithm on one split variant.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub algorithm: String,
    pub variant: usize,
    pub train_per_user: usize,
    pub ks: Vec<usize>,
    /// Evaluated users, ascending.
    pub users: Vec<UserId>,
    /// `values[u][k]` is the NDCG of `users[u]` at cutoff `ks[k]`.
    pub values: Vec<Vec<f64>>,
    /// Users the algorithm could not score.
    pub skipped: Vec<UserId>,
}

impl EvalReport {
    pub fn k_index(&self, k: usize) -> Option<usize> {
        self.ks.iter().position(|&x| x == k)
    }

    /// Per-user values at cutoff `k`, in `users` order.
    pub fn column(&self, k: usize) -> Option<Vec<f64>> {
        let i = self.k_index(k)?;
        Some(self.values.iter().map(|v| v[i]).collect())
    }

    pub fn mean_ndcg(&self, k: usize) -> Option<f64> {
        let col = self.column(k)?;
        if col.is_empty() {
            return None;
        }
        Some(col.iter().sum::<f64>() / col.len() as f64)
    }
}

/// Ranks every test user's test items with `ranker` and computes NDCG at each
/// cutoff. Cold-start users are skipped.
pub fn evaluate_ranker(ranker: &dyn Ranker, dataset: &Dataset, ks: &[usize]) -> Result<EvalReport> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::InvalidParameter(format!("cutoffs must be non-empty and >= 1, got {ks:?}")));
    }
    let users = dataset.test_users();
    let outcomes: Vec<Result<Option<Vec<f64>>>> = users
        .par_iter()
        .map(|&user| {
            let test: Vec<(ItemId, u8)> = dataset.test_of(user).iter().map(|r| (r.item, r.rating)).collect();
            let candidates: Vec<ItemId> = test.iter().map(|e| e.0).collect();
            let order = match ranker.rank_candidates(user, &candidates) {
                Ok(order) => order,
                Err(Error::ColdStart(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            ks.iter()
                .map(|&k| ndcg_at_k(user, &order, &test, k).map(|r| r.value))
                .collect::<Result<Vec<f64>>>()
                .map(Some)
        })
        .collect();

    let mut report = EvalReport {
        algorithm: ranker.name().to_string(),
        variant: dataset.variant,
        train_per_user: dataset.train_per_user,
        ks: ks.to_vec(),
        users: Vec::new(),
        values: Vec::new(),
        skipped: Vec::new(),
    };
    for (user, outcome) in users.into_iter().zip(outcomes) {
        match outcome? {
            Some(v) => {
                report.users.push(user);
                report.values.push(v);
            }
            None => report.skipped.push(user),
        }
    }
    if !report.skipped.is_empty() {
        warn!(
            "{} variant {}: skipped {} cold-start users",
            report.algorithm,
            report.variant,
            report.skipped.len()
        );
    }
    Ok(report)
}

/// Builds `algorithm`'s model from the variant's train partition and
/// evaluates it.
pub fn evaluate_algorithm(algorithm: Algorithm, dataset: &Dataset, cfg: &AlgorithmConfig, ks: &[usize]) -> Result<EvalReport> {
    let (m, n) = (dataset.num_users, dataset.num_items);
    match algorithm {
        Algorithm::GRank => {
            let tpg = build_tpg(m, n, &dataset.train_observations(), cfg.pruned)?;
            evaluate_ranker(&GRank::new(&tpg, cfg.ppr, cfg.engine)?, dataset, ks)
        }
        Algorithm::Bgr | Algorithm::Wbgr => {
            let graph = BipartiteGraph::from_ratings(m, n, &dataset.train, algorithm == Algorithm::Wbgr)?;
            evaluate_ranker(&Bgr::new(&graph, cfg.ppr)?, dataset, ks)
        }
        Algorithm::EigenRank => evaluate_ranker(&EigenRank::new(m, n, &dataset.train, cfg.eigenrank)?, dataset, ks),
    }
}

/// One report per variant.
pub fn run_experiment(datasets: &[Dataset], algorithm: Algorithm, cfg: &AlgorithmConfig, ks: &[usize]) -> Result<Vec<EvalReport>> {
    datasets
        .iter()
        .map(|d| {
            let r = evaluate_algorithm(algorithm, d, cfg, ks)?;
            info!(
                "{algorithm} T={} variant {}: {} users, NDCG@{} = {:.4}",
                d.train_per_user,
                d.variant,
                r.users.len(),
                ks[ks.len() - 1],
                r.mean_ndcg(ks[ks.len() - 1]).unwrap_or(f64::NAN)
            );
            Ok(r)
        })
        .collect()
}

/// Mean of per-user values pooled over every variant.
pub fn pooled_mean(reports: &[EvalReport], k: usize) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in reports {
        let col = r.column(k)?;
        sum += col.iter().sum::<f64>();
        count += col.len();
    }
    (count > 0).then(|| sum / count as f64)
}

/// Per-user values at cutoff `k` for the `(variant, user)` keys both report
/// lists evaluated, ordered by variant then user.
pub fn paired_values(a: &[EvalReport], b: &[EvalReport], k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for ra in a {
        let Some(rb) = b.iter().find(|r| r.variant == ra.variant) else {
            continue;
        };
        let (ia, ib) = match (ra.k_index(k), rb.k_index(k)) {
            (Some(ia), Some(ib)) => (ia, ib),
            _ => return Err(Error::InvalidParameter(format!("cutoff {k} missing from a report"))),
        };
        let (mut i, mut j) = (0, 0);
        while i < ra.users.len() && j < rb.users.len() {
            match ra.users[i].cmp(&rb.users[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    xs.push(ra.values[i][ia]);
                    ys.push(rb.values[j][ib]);
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    Ok((xs, ys))
}
