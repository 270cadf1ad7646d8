//! Compressed sparse adjacency shared by the preference graph and the
//! bipartite baselines.

use crate::error::{Error, Result};

/// Undirected graph stored as symmetric compressed sparse rows.
///
/// Every undirected edge `{a, b}` appears twice: `b` in the row of `a` and
/// `a` in the row of `b`. Rows are sorted by neighbor id.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrGraph {
    offsets: Vec<u64>,
    neighbors: Vec<u32>,
    weights: Option<Vec<f64>>,
}

impl CsrGraph {
    /// Builds a graph from undirected edges with a two-pass counting sort.
    ///
    /// Duplicate edges are kept; callers deduplicate beforehand when the edge
    /// set semantics matter.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Result<Self> {
        Self::build(node_count, edges.iter().map(|&(a, b)| (a, b, 1.0)), edges.len(), false)
    }

    /// Same as [`CsrGraph::from_edges`] but every edge carries a positive weight.
    pub fn from_weighted_edges(node_count: usize, edges: &[(u32, u32, f64)]) -> Result<Self> {
        for &(a, b, w) in edges {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Build(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
        }
        Self::build(node_count, edges.iter().copied(), edges.len(), true)
    }

    fn build<I>(node_count: usize, edges: I, len: usize, weighted: bool) -> Result<Self>
    where
        I: Iterator<Item = (u32, u32, f64)> + Clone,
    {
        let mut degree = vec![0u64; node_count + 1];
        for (a, b, _) in edges.clone() {
            if a as usize >= node_count || b as usize >= node_count {
                return Err(Error::Build(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            if a == b {
                return Err(Error::Build(format!("self loop on node {a}")));
            }
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for i in 0..node_count {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut cursor: Vec<u64> = offsets[..node_count].to_vec();
        let mut neighbors = vec![0u32; 2 * len];
        let mut weights = if weighted { vec![0.0; 2 * len] } else { Vec::new() };
        for (a, b, w) in edges {
            for (from, to) in [(a, b), (b, a)] {
                let slot = cursor[from as usize] as usize;
                neighbors[slot] = to;
                if weighted {
                    weights[slot] = w;
                }
                cursor[from as usize] += 1;
            }
        }
        let mut graph = CsrGraph {
            offsets,
            neighbors,
            weights: weighted.then_some(weights),
        };
        graph.sort_rows();
        Ok(graph)
    }

    /// Wraps pre-built arrays, checking the structural invariants.
    pub fn from_parts(offsets: Vec<u64>, neighbors: Vec<u32>, weights: Option<Vec<f64>>) -> Result<Self> {
        if offsets.first() != Some(&0) || *offsets.last().unwrap() as usize != neighbors.len() {
            return Err(Error::Build("offsets do not span the neighbor array".into()));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Build("offsets are not monotone".into()));
        }
        let n = offsets.len() - 1;
        if neighbors.iter().any(|&v| v as usize >= n) {
            return Err(Error::Build("neighbor id out of range".into()));
        }
        if let Some(w) = &weights {
            if w.len() != neighbors.len() {
                return Err(Error::Build("weight array length mismatch".into()));
            }
        }
        Ok(CsrGraph {
            offsets,
            neighbors,
            weights,
        })
    }

    fn sort_rows(&mut self) {
        for v in 0..self.node_count() {
            let (lo, hi) = (self.offsets[v] as usize, self.offsets[v + 1] as usize);
            let row = &mut self.neighbors[lo..hi];
            if row.windows(2).all(|w| w[0] <= w[1]) {
                continue;
            }
            match &mut self.weights {
                None => row.sort_unstable(),
                Some(weights) => {
                    let mut pairs: Vec<(u32, f64)> = row
                        .iter()
                        .copied()
                        .zip(weights[lo..hi].iter().copied())
                        .collect();
                    pairs.sort_by_key(|p| p.0);
                    for (k, (n, w)) in pairs.into_iter().enumerate() {
                        row[k] = n;
                        weights[lo + k] = w;
                    }
                }
            }
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Edge weights of row `v`, aligned with [`CsrGraph::neighbors`].
    #[inline]
    pub fn weights(&self, v: usize) -> Option<&[f64]> {
        self.weights
            .as_ref()
            .map(|w| &w[self.offsets[v] as usize..self.offsets[v + 1] as usize])
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[u32] {
        &self.neighbors
    }

    /// Total edge weight incident to `v` (its degree when unweighted).
    pub fn strength(&self, v: usize) -> f64 {
        match self.weights(v) {
            Some(w) => w.iter().sum(),
            None => self.degree(v) as f64,
        }
    }

    /// True when every stored edge has its reverse with the same weight.
    pub fn is_symmetric(&self) -> bool {
        (0..self.node_count()).all(|a| {
            self.neighbors(a).iter().enumerate().all(|(k, &b)| {
                let row = self.neighbors(b as usize);
                let forward = self.weights(a).map(|w| w[k]);
                // rows are sorted, duplicates allowed
                let lo = row.partition_point(|&x| x < a as u32);
                let hi = row.partition_point(|&x| x <= a as u32);
                match forward {
                    None => hi > lo,
                    Some(w) => {
                        let back = &self.weights(b as usize).unwrap()[lo..hi];
                        back.contains(&w)
                    }
                }
            })
        })
    }
}
