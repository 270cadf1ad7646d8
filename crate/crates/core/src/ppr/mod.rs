//! Personalized PageRank by damped power iteration with restart at one node.
//!
//! The walk moves mass from a node to its neighbors in proportion to edge
//! weight (`1 / degree` when unweighted). Mass sitting on a node without
//! neighbors returns to the restart node, so every iterate is a probability
//! vector.

mod factored;
pub mod oracle;

pub use factored::{FactoredIteration, FullTpgSolver};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::CsrGraph;

/// Damping and stopping rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PprConfig {
    /// Probability of following an edge instead of restarting.
    pub alpha: f64,
    /// Stop once the L1 change between successive iterates drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PprConfig {
    fn default() -> Self {
        PprConfig {
            alpha: 0.85,
            tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

impl PprConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be non-negative, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Starting vector of the iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Init {
    /// All mass on the restart node.
    #[default]
    Personalization,
    /// Uniform random entries normalized to sum 1.
    Random(u64),
}

/// Result of one personalized PageRank solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PprVector {
    pub values: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    /// L1 change recorded after each iteration.
    pub residuals: Vec<f64>,
}

impl PprVector {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Writes `node,value` rows, one per global node id.
    pub fn write_csv(&self, mut out: impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "node,value")?;
        for (v, x) in self.values.iter().enumerate() {
            writeln!(out, "{v},{x:.16e}")?;
        }
        Ok(())
    }
}

/// Column-stochastic random-walk operator over a [`CsrGraph`].
#[derive(Clone, Debug)]
pub struct TransitionModel<'g> {
    graph: &'g CsrGraph,
    /// `1 / strength` per node, zero for dangling nodes.
    inv_strength: Vec<f64>,
    dangling: Vec<u32>,
}

impl<'g> TransitionModel<'g> {
    pub fn new(graph: &'g CsrGraph) -> Self {
        let n = graph.node_count();
        let mut inv_strength = vec![0.0; n];
        let mut dangling = Vec::new();
        for (v, inv) in inv_strength.iter_mut().enumerate() {
            let s = graph.strength(v);
            if s > 0.0 {
                *inv = 1.0 / s;
            } else {
                dangling.push(v as u32);
            }
        }
        TransitionModel {
            graph,
            inv_strength,
            dangling,
        }
    }

    pub fn graph(&self) -> &'g CsrGraph {
        self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn dangling_nodes(&self) -> &[u32] {
        &self.dangling
    }

    /// `out = T x` over non-dangling nodes; returns the mass left on
    /// dangling nodes, which the caller redistributes.
    ///
    /// `scratch` must have the graph's node count.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64], scratch: &mut [f64]) -> f64 {
        for ((s, &xi), &inv) in scratch.iter_mut().zip(x).zip(&self.inv_strength) {
            *s = xi * inv;
        }
        for (j, o) in out.iter_mut().enumerate() {
            let nbrs = self.graph.neighbors(j);
            *o = match self.graph.weights(j) {
                None => nbrs.iter().map(|&i| scratch[i as usize]).sum(),
                Some(w) => nbrs.iter().zip(w).map(|(&i, &w)| scratch[i as usize] * w).sum(),
            };
        }
        self.dangling.iter().map(|&v| x[v as usize]).sum()
    }
}

/// One application of the walk operator. Mass on dangling nodes moves to
/// `restart`.
pub fn transition_apply(model: &TransitionModel<'_>, x: &[f64], restart: usize) -> Vec<f64> {
    let n = model.node_count();
    let mut out = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let dangling = model.apply_into(x, &mut out, &mut scratch);
    out[restart] += dangling;
    out
}

/// Stepwise power iteration, for callers that inspect every iterate.
pub struct PowerIteration<'m, 'g> {
    model: &'m TransitionModel<'g>,
    target: usize,
    cfg: PprConfig,
    current: Vec<f64>,
    next: Vec<f64>,
    scratch: Vec<f64>,
    residuals: Vec<f64>,
}

impl<'m, 'g> PowerIteration<'m, 'g> {
    pub fn new(model: &'m TransitionModel<'g>, target: usize, cfg: PprConfig, init: Init) -> Result<Self> {
        cfg.validate()?;
        let n = model.node_count();
        if target >= n {
            return Err(Error::InvalidParameter(format!(
                "target node {target} out of range for {n} nodes"
            )));
        }
        let current = match init {
            Init::Personalization => {
                let mut v = vec![0.0; n];
                v[target] = 1.0;
                v
            }
            Init::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                let s: f64 = v.iter().sum();
                v.iter_mut().for_each(|x| *x /= s);
                v
            }
        };
        Ok(PowerIteration {
            model,
            target,
            cfg,
            current,
            next: vec![0.0; n],
            scratch: vec![0.0; n],
            residuals: Vec::new(),
        })
    }

    /// Performs one update and returns its L1 change.
    pub fn step(&mut self) -> f64 {
        let alpha = self.cfg.alpha;
        let dangling = self.model.apply_into(&self.current, &mut self.next, &mut self.scratch);
        self.next.iter_mut().for_each(|v| *v *= alpha);
        self.next[self.target] += alpha * dangling + (1.0 - alpha);
        let delta: f64 = self
            .next
            .iter()
            .zip(&self.current)
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut self.current, &mut self.next);
        self.residuals.push(delta);
        delta
    }

    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    /// Iterates until the change falls below the tolerance or the budget runs out.
    pub fn run(mut self) -> PprVector {
        let mut converged = false;
        while self.iterations() < self.cfg.max_iterations {
            if self.step() < self.cfg.tolerance {
                converged = true;
                break;
            }
        }
        PprVector {
            values: self.current,
            iterations_used: self.residuals.len(),
            converged,
            residuals: self.residuals,
        }
    }
}

/// Personalized PageRank restarted at `target`, starting from the
/// personalization vector.
///
/// Non-convergence is reported through [`PprVector::converged`].
pub fn personalized_pagerank(model: &TransitionModel<'_>, target: usize, cfg: &PprConfig) -> Result<PprVector> {
    personalized_pagerank_from(model, target, cfg, Init::Personalization)
}

pub fn personalized_pagerank_from(
    model: &TransitionModel<'_>,
    target: usize,
    cfg: &PprConfig,
    init: Init,
) -> Result<PprVector> {
    Ok(PowerIteration::new(model, target, *cfg, init)?.run())
}

/// Operator with `T_ij = 1/d_i` applied as written (`out_i = Σ_j T_ij x_j`),
/// which is row-stochastic and does not conserve mass.
#[cfg(test)]
pub(crate) fn literal_transition_apply(graph: &CsrGraph, x: &[f64]) -> Vec<f64> {
    (0..graph.node_count())
        .map(|i| {
            let d = graph.degree(i);
            if d == 0 {
                0.0
            } else {
                graph.neighbors(i).iter().map(|&j| x[j as usize]).sum::<f64>() / d as f64
            }
        })
        .collect()
}
