//! NDCG evaluation, significance tests and the scalability sweep.

mod experiment;
mod ndcg;
mod report;
mod scalability;
mod ttest;

pub use experiment::{
    evaluate_algorithm, evaluate_ranker, paired_values, pooled_mean, run_experiment, Algorithm, AlgorithmConfig, EvalReport,
    DEFAULT_KS,
};
pub use ndcg::{dcg, ndcg_at_k, NdcgResult};
pub use report::{
    compare_against, write_report_by_variant_csv, write_report_csv, write_scalability_csv, write_ttest_csv, Comparison,
};
pub use scalability::{
    normalized_slope, polyfit, scalability_run, subsample, BenchSpec, Factor, PolyFit, ScalabilityPoint, Subsample,
    DEFAULT_LEVELS,
};
pub use ttest::{paired_ttest, TTestResult};
