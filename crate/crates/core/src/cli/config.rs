//! `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};

use crate::baselines::EigenRankConfig;
use crate::eval::{Algorithm, AlgorithmConfig, Factor, DEFAULT_KS, DEFAULT_LEVELS};
use crate::grank::Engine;
use crate::ingest::DatasetFormat;
use crate::ppr::PprConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub format: DatasetFormat,
    /// Training ratings per user; `evaluate` sweeps every value, other
    /// commands use the first.
    pub train_per_user: Vec<usize>,
    pub min_test_items: usize,
    pub variants: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub ks: Vec<usize>,
    pub ppr: PprConfig,
    pub pruned: bool,
    pub neighbors: usize,
    pub out: PathBuf,
    pub bench_items: usize,
    pub batch_size: usize,
    pub batches: usize,
    pub levels: Vec<f64>,
    pub factors: Vec<Factor>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            format: DatasetFormat::MovieLens100K,
            train_per_user: vec![50],
            min_test_items: 10,
            variants: 5,
            seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            ks: DEFAULT_KS.to_vec(),
            ppr: PprConfig::default(),
            pruned: false,
            neighbors: EigenRankConfig::default().neighborhood_size,
            out: PathBuf::from("runs/latest"),
            bench_items: 400,
            batch_size: 5,
            batches: 5,
            levels: DEFAULT_LEVELS.to_vec(),
            factors: Factor::ALL.to_vec(),
        }
    }
}

pub const KEYS: [&str; 19] = [
    "dataset",
    "format",
    "T",
    "min_test_items",
    "variants",
    "seed",
    "algorithms",
    "K",
    "alpha",
    "tolerance",
    "max_iterations",
    "pruned",
    "neighbors",
    "out",
    "bench_items",
    "batch_size",
    "batches",
    "levels",
    "factors",
];

fn list<T: FromStr>(value: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow!("{s:?}: {e}")))
        .collect()
}

fn one<T: FromStr>(value: &str) -> anyhow::Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| anyhow!("{value:?}: {e}"))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        let value = value.trim();
        match key {
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "format" => self.format = one(value)?,
            "T" | "train_per_user" => self.train_per_user = list(value)?,
            "min_test_items" => self.min_test_items = one(value)?,
            "variants" => self.variants = one(value)?,
            "seed" => self.seed = one(value)?,
            "algorithms" | "algorithm" => self.algorithms = list(value)?,
            "K" | "k" => self.ks = list(value)?,
            "alpha" => self.ppr.alpha = one(value)?,
            "tolerance" => self.ppr.tolerance = one(value)?,
            "max_iterations" => self.ppr.max_iterations = one(value)?,
            "pruned" => self.pruned = one(value)?,
            "neighbors" => self.neighbors = one(value)?,
            "out" => self.out = PathBuf::from(value),
            "bench_items" => self.bench_items = one(value)?,
            "batch_size" => self.batch_size = one(value)?,
            "batches" => self.batches = one(value)?,
            "levels" => self.levels = list(value)?,
            "factors" => self.factors = list(value)?,
            _ => bail!("unknown config key {key:?} (known: {})", KEYS.join(", ")),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> anyhow::Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", origin.display(), n + 1))?;
            self.set(k.trim(), v).with_context(|| format!("{}:{}", origin.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    /// Checks ranges and that the dataset exists when `need_dataset`.
    pub fn validate(&self, need_dataset: bool) -> anyhow::Result<()> {
        if need_dataset {
            let path = self.dataset.as_ref().ok_or_else(|| anyhow!("no dataset given (--dataset or dataset = ...)"))?;
            if !path.is_file() {
                bail!("dataset file not found: {}", path.display());
            }
        }
        if self.train_per_user.is_empty() || self.train_per_user.contains(&0) {
            bail!("T must be a non-empty list of positive counts");
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            bail!("K must be a non-empty list of positive cutoffs");
        }
        if self.variants == 0 || self.min_test_items == 0 {
            bail!("variants and min_test_items must be >= 1");
        }
        if self.algorithms.is_empty() {
            bail!("no algorithms selected");
        }
        self.ppr.validate()?;
        if self.batch_size == 0 || self.batches == 0 || self.bench_items < 2 {
            bail!("bench needs batch_size >= 1, batches >= 1 and bench_items >= 2");
        }
        if self.levels.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
            bail!("levels must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn algorithm_config(&self) -> AlgorithmConfig {
        AlgorithmConfig {
            ppr: self.ppr,
            pruned: self.pruned,
            engine: Engine::Auto,
            eigenrank: EigenRankConfig {
                neighborhood_size: self.neighbors,
                ..EigenRankConfig::default()
            },
        }
    }

    /// Every key in a fixed order; [`RunConfig::apply_text`] reads it back to
    /// an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.dataset {
            let _ = writeln!(s, "dataset = {}", d.display());
        }
        let _ = writeln!(s, "format = {}", self.format.name());
        let _ = writeln!(s, "T = {}", join(&self.train_per_user));
        let _ = writeln!(s, "min_test_items = {}", self.min_test_items);
        let _ = writeln!(s, "variants = {}", self.variants);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "algorithms = {}", join(&self.algorithms));
        let _ = writeln!(s, "K = {}", join(&self.ks));
        let _ = writeln!(s, "alpha = {}", self.ppr.alpha);
        let _ = writeln!(s, "tolerance = {}", self.ppr.tolerance);
        let _ = writeln!(s, "max_iterations = {}", self.ppr.max_iterations);
        let _ = writeln!(s, "pruned = {}", self.pruned);
        let _ = writeln!(s, "neighbors = {}", self.neighbors);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "bench_items = {}", self.bench_items);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "batches = {}", self.batches);
        let _ = writeln!(s, "levels = {}", join(&self.levels));
        let _ = writeln!(s, "factors = {}", join(&self.factors));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(
            "# comment\ndataset = /tmp/u.data\nT = 20, 30\nalgorithms = grank,bgr\nalpha = 0.8 # trailing\npruned = true\nfactors = N\n",
            Path::new("x.cfg"),
        )
        .unwrap();
        assert_eq!(cfg.train_per_user, vec![20, 30]);
        assert_eq!(cfg.algorithms, vec![Algorithm::GRank, Algorithm::Bgr]);
        assert_eq!(cfg.ppr.alpha, 0.8);
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_text(), Path::new("echo")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn errors_name_the_line() {
        let mut cfg = RunConfig::default();
        let e = cfg.apply_text("seed = 1\nbogus = 2\n", Path::new("run.cfg")).unwrap_err();
        assert!(format!("{e:#}").contains("run.cfg:2"));
        assert!(cfg.apply_text("no equals sign", Path::new("c")).is_err());
        assert!(cfg.set("algorithms", "grank,cofirank").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate(false).is_ok());
        assert!(cfg.validate(true).is_err());
        cfg.dataset = Some(PathBuf::from("/definitely/missing/u.data"));
        let msg = cfg.validate(true).unwrap_err().to_string();
        assert!(msg.contains("/definitely/missing/u.data"));
        cfg.ks = vec![0];
        assert!(cfg.validate(false).is_err());
    }
}
