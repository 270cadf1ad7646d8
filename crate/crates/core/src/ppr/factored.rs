//! Exact power iteration on a full-mode [`Tpg`] without touching every
//! preference node.
//!
//! A preference node that no user stated has exactly two neighbors, the
//! winner's desirable side `d` and the loser's undesirable side `u`. After one
//! step its value is `alpha * (x[d] / deg(d) + x[u] / deg(u))`, so the whole
//! unstated part of the preference layer is the outer sum of two length-N
//! vectors. Keeping those two vectors instead of the `N(N-1)` entries makes an
//! iteration cost `O(M + N log N + S)` while producing the same iterates as
//! [`super::PowerIteration`] on the materialized graph.

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::tpg::Tpg;

use super::{PprConfig, PprVector};

/// Precomputed structure of a full-mode graph.
#[derive(Clone, Debug)]
pub struct FullTpgSolver<'g> {
    tpg: &'g Tpg,
    n: usize,
    /// Stated preference nodes by compact index: (full ordinal, desirable, undesirable).
    stated: Vec<(usize, u32, u32)>,
    /// Undesirable item of each stated preference.
    stated_loser: Vec<u32>,
    /// Stated preferences are ordered desirable-item-major; group of item `i`
    /// is `winner_off[i]..winner_off[i + 1]`.
    winner_off: Vec<usize>,
    /// User edges of stated preferences as `(stated index, user)`, ordered by
    /// stated index.
    edges: Vec<(u32, u32)>,
    stated_inv_degree: Vec<f64>,
    user_inv_degree: Vec<f64>,
    dangling_users: Vec<u32>,
    /// Unstated preferences per item as winner / as loser.
    unstated_as_winner: Vec<f64>,
    unstated_as_loser: Vec<f64>,
}

impl<'g> FullTpgSolver<'g> {
    /// Fails on pruned graphs and on graphs with fewer than two items.
    pub fn new(tpg: &'g Tpg) -> Result<Self> {
        if tpg.is_pruned() {
            return Err(Error::InvalidParameter("factored solver needs a full-mode graph".into()));
        }
        let (m, n) = (tpg.num_users(), tpg.num_items());
        if n < 2 {
            return Err(Error::InvalidParameter("factored solver needs at least two items".into()));
        }
        let g = tpg.graph();

        let mut ordinals: Vec<usize> = (0..m)
            .flat_map(|u| g.neighbors(u).iter().map(move |&p| p as usize - m))
            .collect();
        ordinals.sort_unstable();
        ordinals.dedup();
        let stated: Vec<(usize, u32, u32)> = ordinals
            .iter()
            .map(|&o| {
                let p = tpg.preference_at(o);
                (o, p.desirable().0, p.undesirable().0)
            })
            .collect();

        let mut edges = Vec::new();
        let mut stated_inv_degree = Vec::with_capacity(stated.len());
        for (k, &(o, _, _)) in stated.iter().enumerate() {
            let nbrs = g.neighbors(m + o);
            edges.extend(nbrs.iter().filter(|&&v| (v as usize) < m).map(|&v| (k as u32, v)));
            stated_inv_degree.push(1.0 / nbrs.len() as f64);
        }

        let mut user_inv_degree = vec![0.0; m];
        let mut dangling_users = Vec::new();
        for u in 0..m {
            match g.degree(u) {
                0 => dangling_users.push(u as u32),
                d => user_inv_degree[u] = 1.0 / d as f64,
            }
        }

        let stated_loser = stated.iter().map(|s| s.2).collect();
        let mut winner_off = vec![0usize; n + 1];
        for &(_, d, _) in &stated {
            winner_off[d as usize + 1] += 1;
        }
        for i in 0..n {
            winner_off[i + 1] += winner_off[i];
        }

        let mut unstated_as_winner = vec![(n - 1) as f64; n];
        let mut unstated_as_loser = vec![(n - 1) as f64; n];
        for &(_, d, u) in &stated {
            unstated_as_winner[d as usize] -= 1.0;
            unstated_as_loser[u as usize] -= 1.0;
        }

        Ok(FullTpgSolver {
            tpg,
            n,
            stated,
            stated_loser,
            winner_off,
            edges,
            stated_inv_degree,
            user_inv_degree,
            dangling_users,
            unstated_as_winner,
            unstated_as_loser,
        })
    }

    pub fn tpg(&self) -> &'g Tpg {
        self.tpg
    }

    /// Number of preference nodes with at least one user edge.
    pub fn stated_count(&self) -> usize {
        self.stated.len()
    }

    pub fn start(&self, target: UserId, cfg: PprConfig) -> Result<FactoredIteration<'_, 'g>> {
        cfg.validate()?;
        let m = self.tpg.num_users();
        if target.index() >= m {
            return Err(Error::InvalidParameter(format!("user {target} out of range")));
        }
        let mut users = vec![0.0; m];
        users[target.index()] = 1.0;
        Ok(FactoredIteration {
            solver: self,
            target: target.index(),
            cfg,
            state: State {
                users,
                stated: vec![0.0; self.stated.len()],
                winner_part: vec![0.0; self.n],
                loser_part: vec![0.0; self.n],
                desirable: vec![0.0; self.n],
                undesirable: vec![0.0; self.n],
            },
            residuals: Vec::new(),
        })
    }

    /// Solves and materializes the full vector over all graph nodes.
    pub fn solve(&self, target: UserId, cfg: &PprConfig) -> Result<PprVector> {
        let mut it = self.start(target, *cfg)?;
        let converged = it.run();
        Ok(it.into_vector(converged))
    }
}

#[derive(Clone, Debug)]
struct State {
    users: Vec<f64>,
    stated: Vec<f64>,
    /// Unstated preference (i > j) holds `winner_part[i] + loser_part[j]`.
    winner_part: Vec<f64>,
    loser_part: Vec<f64>,
    desirable: Vec<f64>,
    undesirable: Vec<f64>,
}

/// Iterate of the factored power iteration.
pub struct FactoredIteration<'s, 'g> {
    solver: &'s FullTpgSolver<'g>,
    target: usize,
    cfg: PprConfig,
    state: State,
    residuals: Vec<f64>,
}

/// `Σ_i Σ_j |x_i + y_j|` in `O(N log N)`.
fn outer_sum_abs(x: &[f64], y: &[f64]) -> f64 {
    let mut sorted = y.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in &sorted {
        acc += v;
        prefix.push(acc);
    }
    let total = acc;
    let len = sorted.len() as f64;
    x.iter()
        .map(|&xi| {
            let k = sorted.partition_point(|&v| v < -xi);
            let below = k as f64 * xi + prefix[k];
            let above = (len - k as f64) * xi + (total - prefix[k]);
            above - below
        })
        .sum()
}

impl<'s, 'g> FactoredIteration<'s, 'g> {
    pub fn step(&mut self) -> f64 {
        let s = self.solver;
        let alpha = self.cfg.alpha;
        let old = &self.state;
        let n = s.n;
        let inv_rep = 1.0 / (n - 1) as f64;

        // representatives spread evenly over their n - 1 preference nodes
        let from_desirable: Vec<f64> = old.desirable.iter().map(|v| v * inv_rep).collect();
        let from_undesirable: Vec<f64> = old.undesirable.iter().map(|v| v * inv_rep).collect();
        let user_out: Vec<f64> = old.users.iter().zip(&s.user_inv_degree).map(|(x, d)| x * d).collect();
        let winner_part: Vec<f64> = from_desirable.iter().map(|v| alpha * v).collect();
        let loser_part: Vec<f64> = from_undesirable.iter().map(|v| alpha * v).collect();
        let dw: Vec<f64> = winner_part.iter().zip(&old.winner_part).map(|(a, b)| a - b).collect();
        let dl: Vec<f64> = loser_part.iter().zip(&old.loser_part).map(|(a, b)| a - b).collect();

        let out: Vec<f64> = old.stated.iter().zip(&s.stated_inv_degree).map(|(x, d)| x * d).collect();
        let mut users_in = vec![0.0; old.users.len()];
        let mut from_users = vec![0.0; s.stated.len()];
        for &(k, v) in &s.edges {
            from_users[k as usize] += user_out[v as usize];
            users_in[v as usize] += out[k as usize];
        }

        // stated preferences one desirable-item group at a time
        let mut stated = vec![0.0; s.stated.len()];
        let mut desirable_in = vec![0.0; n];
        let mut undesirable_in = vec![0.0; n];
        let mut stated_losers = vec![0.0; n];
        let mut stated_winners = vec![0.0; n];
        let mut stated_change = 0.0;
        let mut stated_as_unstated = 0.0;
        for d in 0..n {
            let range = s.winner_off[d]..s.winner_off[d + 1];
            let (wp, fd, dwd) = (old.winner_part[d], from_desirable[d], dw[d]);
            let (mut acc_out, mut acc_losers) = (0.0, 0.0);
            for k in range {
                let u = s.stated_loser[k] as usize;
                let o = out[k];
                acc_out += o;
                acc_losers += old.loser_part[u];
                undesirable_in[u] += o;
                stated_winners[u] += wp;
                let value = alpha * (from_users[k] + fd + from_undesirable[u]);
                stated_change += (value - old.stated[k]).abs();
                stated[k] = value;
                stated_as_unstated += (dwd + dl[u]).abs();
            }
            desirable_in[d] = acc_out;
            stated_losers[d] = acc_losers;
        }

        let mut users: Vec<f64> = users_in.iter().map(|v| alpha * v).collect();
        let dangling: f64 = s.dangling_users.iter().map(|&u| old.users[u as usize]).sum();
        users[self.target] += alpha * dangling + (1.0 - alpha);

        // unstated preference nodes have degree 2
        let winner_total: f64 = old.winner_part.iter().sum();
        let loser_total: f64 = old.loser_part.iter().sum();
        let desirable: Vec<f64> = (0..n)
            .map(|i| {
                let unstated = s.unstated_as_winner[i] * old.winner_part[i] + loser_total - old.loser_part[i] - stated_losers[i];
                alpha * (desirable_in[i] + 0.5 * unstated)
            })
            .collect();
        let undesirable: Vec<f64> = (0..n)
            .map(|j| {
                let unstated = s.unstated_as_loser[j] * old.loser_part[j] + winner_total - old.winner_part[j] - stated_winners[j];
                alpha * (undesirable_in[j] + 0.5 * unstated)
            })
            .collect();

        let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        let unstated_change = outer_sum_abs(&dw, &dl) - dw.iter().zip(&dl).map(|(a, b)| (a + b).abs()).sum::<f64>() - stated_as_unstated;
        let delta = l1(&users, &old.users)
            + stated_change
            + l1(&desirable, &old.desirable)
            + l1(&undesirable, &old.undesirable)
            + unstated_change.max(0.0);

        self.state = State {
            users,
            stated,
            winner_part,
            loser_part,
            desirable,
            undesirable,
        };
        self.residuals.push(delta);
        delta
    }

    /// Runs to convergence or the iteration budget; returns whether it converged.
    pub fn run(&mut self) -> bool {
        while self.residuals.len() < self.cfg.max_iterations {
            if self.step() < self.cfg.tolerance {
                return true;
            }
        }
        false
    }

    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Total probability mass of the current iterate.
    pub fn mass(&self) -> f64 {
        let s = self.solver;
        let st = &self.state;
        let unstated: f64 = (0..s.n)
            .map(|i| s.unstated_as_winner[i] * st.winner_part[i] + s.unstated_as_loser[i] * st.loser_part[i])
            .sum();
        st.users.iter().sum::<f64>()
            + st.stated.iter().sum::<f64>()
            + st.desirable.iter().sum::<f64>()
            + st.undesirable.iter().sum::<f64>()
            + unstated
    }

    pub fn desirable(&self, item: ItemId) -> f64 {
        self.state.desirable[item.index()]
    }

    pub fn undesirable(&self, item: ItemId) -> f64 {
        self.state.undesirable[item.index()]
    }

    /// Expands the current iterate to one value per graph node.
    pub fn materialize(&self) -> Vec<f64> {
        let s = self.solver;
        let tpg = s.tpg;
        let (m, n) = (tpg.num_users(), s.n);
        let mut values = vec![0.0; tpg.vertex_count()];
        values[..m].copy_from_slice(&self.state.users);
        let prefs = &mut values[m..m + n * (n - 1)];
        for d in 0..n {
            let row = &mut prefs[d * (n - 1)..(d + 1) * (n - 1)];
            let w = self.state.winner_part[d];
            for (r, slot) in row.iter_mut().enumerate() {
                let u = if r < d { r } else { r + 1 };
                *slot = w + self.state.loser_part[u];
            }
        }
        for (k, &(o, _, _)) in s.stated.iter().enumerate() {
            prefs[o] = self.state.stated[k];
        }
        for i in 0..n {
            values[tpg.desirable_node(ItemId::from(i))] = self.state.desirable[i];
            values[tpg.undesirable_node(ItemId::from(i))] = self.state.undesirable[i];
        }
        values
    }

    pub fn into_vector(self, converged: bool) -> PprVector {
        PprVector {
            values: self.materialize(),
            iterations_used: self.residuals.len(),
            converged,
            residuals: self.residuals,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Observation, ObservationSet};
    use crate::ppr::{Init, PowerIteration, TransitionModel};
    use crate::tpg::build_tpg;
    use proptest::prelude::*;

    #[test]
    fn outer_sum_matches_brute_force() {
        let x: [f64; 4] = [0.3, -0.2, 0.0, -1.5];
        let y: [f64; 3] = [-0.1, 0.25, -0.3];
        let brute: f64 = x.iter().flat_map(|a| y.iter().map(move |b| (a + b).abs())).sum();
        assert!((outer_sum_abs(&x, &y) - brute).abs() < 1e-14);
    }

    #[test]
    fn rejects_pruned_and_tiny_graphs() {
        let o = ObservationSet::new();
        assert!(FullTpgSolver::new(&build_tpg(1, 3, &o, true).unwrap()).is_err());
        assert!(FullTpgSolver::new(&build_tpg(1, 1, &o, false).unwrap()).is_err());
    }

    fn arb_instance() -> impl Strategy<Value = (usize, usize, Vec<(u32, u32, u32)>)> {
        (1usize..8, 2usize..7).prop_flat_map(|(m, n)| {
            let triple = (0..m as u32, 0..n as u32, 0..n as u32);
            (Just(m), Just(n), proptest::collection::vec(triple, 1..30))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn same_iterates_as_materialized_graph((m, n, raw) in arb_instance(), target in 0u32..8) {
            let obs: ObservationSet = raw
                .iter()
                .filter(|t| t.1 != t.2)
                .map(|&(u, d, j)| Observation::new(UserId(u), ItemId(d), ItemId(j)).unwrap())
                .collect();
            let tpg = build_tpg(m, n, &obs, false).unwrap();
            let target = UserId(target % m as u32);
            let cfg = PprConfig::default();

            let model = TransitionModel::new(tpg.graph());
            let mut dense = PowerIteration::new(&model, target.index(), cfg, Init::Personalization).unwrap();
            let solver = FullTpgSolver::new(&tpg).unwrap();
            let mut fact = solver.start(target, cfg).unwrap();
            for _ in 0..25 {
                let a = dense.step();
                let b = fact.step();
                prop_assert!((a - b).abs() < 1e-12, "residual {} vs {}", a, b);
                let diff: f64 = dense.current().iter().zip(fact.materialize()).map(|(x, y)| (x - y).abs()).sum();
                prop_assert!(diff < 1e-13);
                prop_assert!((fact.mass() - 1.0).abs() < 1e-12);
            }
        }
    }
}
