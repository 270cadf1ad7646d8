pub mod baselines;
pub mod cli;
pub mod error;
pub mod eval;
pub mod grank;
pub mod graph;
pub mod ids;
pub mod ingest;
pub mod ppr;
pub mod ranking;
pub mod tpg;

pub use error::{Error, Result};
pub use ids::{ItemId, UserId};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/observations.md")]
    mod observations {}
    #[doc = include_str!("../../../book/src/tpg.md")]
    mod tpg {}
    #[doc = include_str!("../../../book/src/ppr.md")]
    mod ppr {}
    #[doc = include_str!("../../../book/src/grank.md")]
    mod grank {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
