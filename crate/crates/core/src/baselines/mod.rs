//! Comparison algorithms: random walk with restart on the user–item
//! bipartite graph (unweighted and rating-weighted), and the random-walk
//! variant of EigenRank.

mod bgr;
mod eigenrank;
mod kendall;

pub use bgr::{bgr_recommend, BipartiteGraph, Bgr};
pub use eigenrank::{eigenrank_recommend, EigenRank, EigenRankConfig, PreferenceMatrix};
pub use kendall::{kendall_similarity, KendallSimilarity};
