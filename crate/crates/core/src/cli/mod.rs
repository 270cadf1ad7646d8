//! The `grank` command line.
//!
//! Every command writes into a run directory (`--out`) holding its outputs,
//! the effective configuration (`config.txt`) and a `manifest.txt` with the
//! seed and SHA-256 checksums of inputs and outputs. Exit codes: 0 success,
//! 1 runtime failure, 2 usage or validation error.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use sha2::{Digest, Sha256};

pub use config::{RunConfig, KEYS};

use crate::baselines::{Bgr, BipartiteGraph, EigenRank};
use crate::error::Error;
use crate::eval::{self, Algorithm, BenchSpec, EvalReport, Factor};
use crate::grank::{Engine, GRank};
use crate::ids::{ItemId, UserId};
use crate::ingest::{self, Dataset, RatingData, SplitSpec};
use crate::ranking::Ranker;
use crate::tpg::{build_tpg, write_debug_dump, write_snapshot};

#[derive(Debug, Parser)]
#[command(name = "grank", version, about = "Collaborative ranking with tripartite preference graphs")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// key = value config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rating file.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// ml-100k or ml-1m.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Training ratings per user (comma list for evaluate).
    #[arg(short = 'T', long = "train-per-user")]
    pub train_per_user: Option<String>,
    #[arg(long)]
    pub variants: Option<usize>,
    /// Use the pruned preference layer.
    #[arg(long)]
    pub pruned: bool,
    /// Any config key, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert ratings to observations and id maps.
    Ingest(Common),
    /// Write train/test splits for every variant.
    Split(Common),
    /// Build the graph of one split variant's train partition.
    BuildGraph {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        variant: usize,
        /// Also write a text adjacency dump.
        #[arg(long)]
        dump: bool,
    },
    /// Top-k list for one user from all ratings.
    Recommend {
        #[command(flatten)]
        common: Common,
        /// Raw user id as it appears in the dataset.
        #[arg(long)]
        user: String,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        /// grank, bgr, wbgr or eigenrank (default: first configured).
        #[arg(long)]
        algorithm: Option<String>,
        /// Also export the GRank PPR vector.
        #[arg(long)]
        ppr_csv: bool,
    },
    /// Split, rank, score NDCG and run t-tests.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Comma list of algorithms.
        #[arg(long)]
        algorithms: Option<String>,
        /// Comma list of NDCG cutoffs.
        #[arg(short = 'K', long = "cutoffs")]
        ks: Option<String>,
    },
    /// Time recommendations while varying users, items or preferences.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma list of M, N, S.
        #[arg(long)]
        factors: Option<String>,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

/// Validation-type library errors are usage failures.
fn classify(e: anyhow::Error) -> Failure {
    match e.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Validation(_) | Error::InvalidParameter(_) | Error::EmptyDataset { .. }) => Failure::Usage(e),
        Some(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => Failure::Usage(e),
        _ => Failure::Runtime(e),
    }
}

fn usage(e: anyhow::Error) -> Failure {
    Failure::Usage(e)
}

fn resolve(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &common.dataset {
        cfg.dataset = Some(v.clone());
    }
    if let Some(v) = &common.format {
        cfg.set("format", v)?;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = &common.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &common.train_per_user {
        cfg.set("T", v)?;
    }
    if let Some(v) = common.variants {
        cfg.variants = v;
    }
    if common.pruned {
        cfg.pruned = true;
    }
    for kv in &common.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {kv:?}"))?;
        cfg.set(k.trim(), v)?;
    }
    Ok(cfg)
}

fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Output directory plus the manifest being assembled.
struct RunDir {
    root: PathBuf,
    command: &'static str,
    inputs: Vec<PathBuf>,
    outputs: Vec<String>,
}

impl RunDir {
    fn create(cfg: &RunConfig, command: &'static str) -> anyhow::Result<Self> {
        fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create run directory {}", cfg.out.display()))?;
        Ok(RunDir {
            root: cfg.out.clone(),
            command,
            inputs: cfg.dataset.iter().cloned().collect(),
            outputs: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes `name` through `f` and records it as an output.
    fn write(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> anyhow::Result<()> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let file = fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = BufWriter::new(file);
        f(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Records a file some library writer already produced.
    fn record(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    fn finish(self, cfg: &RunConfig) -> anyhow::Result<()> {
        fs::write(self.path("config.txt"), cfg.to_text())?;
        let mut m = String::new();
        m.push_str(&format!("command = {}\nversion = {}\nseed = {}\n", self.command, env!("CARGO_PKG_VERSION"), cfg.seed));
        for p in &self.inputs {
            m.push_str(&format!("input {} sha256={}\n", p.display(), sha256_file(p)?));
        }
        for name in self.outputs.iter().chain(std::iter::once(&"config.txt".to_string())) {
            m.push_str(&format!("output {} sha256={}\n", name, sha256_file(&self.path(name))?));
        }
        fs::write(self.path("manifest.txt"), m)?;
        Ok(())
    }
}

fn load(cfg: &RunConfig) -> Result<RatingData, Failure> {
    let path = cfg.dataset.as_ref().expect("validated");
    let data = ingest::parse_ratings(path, cfg.format).map_err(|e| classify(e.into()))?;
    info!("{}: {} ratings, {} users, {} items", path.display(), data.records.len(), data.num_users(), data.num_items());
    Ok(data)
}

fn split_spec(cfg: &RunConfig, t: usize) -> SplitSpec {
    SplitSpec {
        train_per_user: t,
        min_test_items: cfg.min_test_items,
        variants: cfg.variants,
        seed: cfg.seed,
    }
}

fn splits(cfg: &RunConfig, data: &RatingData, t: usize) -> Result<Vec<Dataset>, Failure> {
    ingest::split(&data.records, &split_spec(cfg, t)).map_err(|e| classify(e.into()))
}

fn write_ratings(out: &mut dyn Write, records: &[ingest::RatingRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}\t{}\t{}", r.user, r.item, r.rating)?;
    }
    Ok(())
}

fn cmd_ingest(cfg: &RunConfig) -> Result<(), Failure> {
    cfg.validate(true).map_err(usage)?;
    let data = load(cfg)?;
    let obs = ingest::ratings_to_observations(&data.records);
    let run = || -> anyhow::Result<()> {
        let mut dir = RunDir::create(cfg, "ingest")?;
        ingest::write_observations(dir.path("observations.tsv"), &obs)?;
        dir.record("observations.tsv");
        ingest::write_id_map(dir.path("users.map"), &data.users)?;
        dir.record("users.map");
        ingest::write_id_map(dir.path("items.map"), &data.items)?;
        dir.record("items.map");
        dir.finish(cfg)?;
        println!("{} observations from {} ratings", obs.len(), data.records.len());
        Ok(())
    };
    run().map_err(classify)
}

fn cmd_split(cfg: &RunConfig) -> Result<(), Failure> {
    cfg.validate(true).map_err(usage)?;
    let data = load(cfg)?;
    let t = cfg.train_per_user[0];
    let ds = splits(cfg, &data, t)?;
    let run = || -> anyhow::Result<()> {
        let mut dir = RunDir::create(cfg, "split")?;
        ingest::write_id_map(dir.path("users.map"), &data.users)?;
        dir.record("users.map");
        ingest::write_id_map(dir.path("items.map"), &data.items)?;
        dir.record("items.map");
        for d in &ds {
            dir.write(&format!("variant_{}/train.tsv", d.variant), |w| write_ratings(w, &d.train))?;
            dir.write(&format!("variant_{}/test.tsv", d.variant), |w| write_ratings(w, &d.test))?;
        }
        dir.finish(cfg)?;
        println!("{} variants, T={t}, {} test users", ds.len(), ds[0].test_users().len());
        Ok(())
    };
    run().map_err(classify)
}

fn cmd_build_graph(cfg: &RunConfig, variant: usize, dump: bool) -> Result<(), Failure> {
    cfg.validate(true).map_err(usage)?;
    if variant >= cfg.variants {
        return Err(usage(anyhow!("variant {variant} out of range (variants = {})", cfg.variants)));
    }
    let data = load(cfg)?;
    let ds = splits(cfg, &data, cfg.train_per_user[0])?;
    let d = &ds[variant];
    let run = || -> anyhow::Result<()> {
        let tpg = build_tpg(d.num_users, d.num_items, &d.train_observations(), cfg.pruned)?;
        let mut dir = RunDir::create(cfg, "build-graph")?;
        write_snapshot(dir.path("tpg.bin"), &tpg)?;
        dir.record("tpg.bin");
        dir.write("graph.txt", |w| {
            writeln!(w, "users = {}", tpg.num_users())?;
            writeln!(w, "items = {}", tpg.num_items())?;
            writeln!(w, "preferences = {}", tpg.preference_count())?;
            writeln!(w, "observations = {}", tpg.user_edge_count())?;
            writeln!(w, "vertices = {}", tpg.vertex_count())?;
            writeln!(w, "edges = {}", tpg.edge_count())?;
            writeln!(w, "pruned = {}", tpg.is_pruned())
        })?;
        if dump {
            dir.write("tpg_dump.txt", |w| write_debug_dump(w, &tpg))?;
        }
        dir.finish(cfg)?;
        println!("{} vertices, {} edges", tpg.vertex_count(), tpg.edge_count());
        Ok(())
    };
    run().map_err(classify)
}

fn cmd_recommend(cfg: &RunConfig, user: &str, k: usize, algorithm: Option<&str>, ppr_csv: bool) -> Result<(), Failure> {
    cfg.validate(true).map_err(usage)?;
    let algorithm = match algorithm {
        Some(a) => a.parse::<Algorithm>().map_err(|e| usage(e.into()))?,
        None => cfg.algorithms[0],
    };
    if k == 0 {
        return Err(usage(anyhow!("k must be >= 1")));
    }
    let data = load(cfg)?;
    let uid = UserId(
        data.users
            .dense(user)
            .ok_or_else(|| usage(anyhow!("user {user:?} does not occur in the dataset")))?,
    );
    let (m, n) = (data.num_users(), data.num_items());
    let profile: Vec<ItemId> = {
        let mut p: Vec<ItemId> = data.records.iter().filter(|r| r.user == uid).map(|r| r.item).collect();
        p.sort_unstable();
        p
    };
    let ac = cfg.algorithm_config();
    let run = || -> anyhow::Result<()> {
        let mut dir = RunDir::create(cfg, "recommend")?;
        let list = match algorithm {
            Algorithm::GRank => {
                let tpg = build_tpg(m, n, &ingest::ratings_to_observations(&data.records), cfg.pruned)?;
                let g = GRank::new(&tpg, ac.ppr, Engine::Auto)?;
                if ppr_csv {
                    let ppr = g.ppr(uid)?;
                    dir.write("ppr.csv", |w| ppr.write_csv(w))?;
                }
                g.recommend(uid, k, &profile)?
            }
            Algorithm::Bgr | Algorithm::Wbgr => {
                let graph = BipartiteGraph::from_ratings(m, n, &data.records, algorithm == Algorithm::Wbgr)?;
                Bgr::new(&graph, ac.ppr)?.recommend(uid, k, &profile)?
            }
            Algorithm::EigenRank => EigenRank::new(m, n, &data.records, ac.eigenrank)?.recommend(uid, k, &profile)?,
        };
        let raw_user = |u: UserId| data.users.raw(u.0).unwrap_or_default().to_string();
        let raw_item = |i: ItemId| data.items.raw(i.0).unwrap_or_default().to_string();
        dir.write("recommendations.csv", |w| {
            writeln!(w, "user,rank,item,gr")?;
            list.write_csv(&mut *w, raw_user, raw_item)
        })?;
        dir.finish(cfg)?;
        list.write_csv(std::io::stdout().lock(), raw_user, raw_item)?;
        Ok(())
    };
    run().map_err(classify)
}

fn dataset_name(cfg: &RunConfig) -> &'static str {
    cfg.format.name()
}

fn cmd_evaluate(cfg: &RunConfig) -> Result<(), Failure> {
    cfg.validate(true).map_err(usage)?;
    let data = load(cfg)?;
    let ac = cfg.algorithm_config();
    let mut reports: Vec<EvalReport> = Vec::new();
    for &t in &cfg.train_per_user {
        let ds = splits(cfg, &data, t)?;
        for &a in &cfg.algorithms {
            reports.extend(eval::run_experiment(&ds, a, &ac, &cfg.ks).map_err(|e| classify(e.into()))?);
        }
    }
    let reference = if cfg.algorithms.contains(&Algorithm::GRank) { Algorithm::GRank } else { cfg.algorithms[0] };
    let run = || -> anyhow::Result<()> {
        let comparisons = eval::compare_against(reference.name(), &reports)?;
        let mut dir = RunDir::create(cfg, "evaluate")?;
        let name = dataset_name(cfg);
        dir.write("report.csv", |w| eval::write_report_csv(w, name, &reports))?;
        dir.write("report_by_variant.csv", |w| eval::write_report_by_variant_csv(w, name, &reports))?;
        dir.write("ttest.csv", |w| eval::write_ttest_csv(w, &comparisons))?;
        dir.write("skipped.csv", |w| {
            writeln!(w, "algorithm,T,variant,skipped_users")?;
            for r in &reports {
                writeln!(w, "{},{},{},{}", r.algorithm, r.train_per_user, r.variant, r.skipped.len())?;
            }
            Ok(())
        })?;
        dir.finish(cfg)?;
        println!("algorithm\tT\tK\tmean_ndcg");
        for &t in &cfg.train_per_user {
            for a in &cfg.algorithms {
                let rs: Vec<EvalReport> = reports.iter().filter(|r| r.algorithm == a.name() && r.train_per_user == t).cloned().collect();
                for &k in &cfg.ks {
                    println!("{a}\t{t}\t{k}\t{:.4}", eval::pooled_mean(&rs, k).unwrap_or(f64::NAN));
                }
            }
        }
        for c in &comparisons {
            println!("T={} K={} {} vs {}: p = {:.4}", c.train_per_user, c.k, c.reference, c.other, c.result.p_value);
        }
        Ok(())
    };
    run().map_err(classify)
}

fn cmd_bench(cfg: &RunConfig) -> Result<(), Failure> {
    cfg.validate(true).map_err(usage)?;
    let data = load(cfg)?;
    let ds = splits(cfg, &data, cfg.train_per_user[0])?;
    let d = &ds[0];
    let obs = d.train_observations();
    let fraction = (cfg.bench_items as f64 / d.num_items as f64).min(1.0);
    let base = eval::subsample(d.num_users, d.num_items, &obs, Factor::Items, fraction, cfg.seed).map_err(|e| classify(e.into()))?;
    info!("bench base: M={} N={} S={}", base.users, base.items, base.observations.len());
    let spec = BenchSpec {
        batch_size: cfg.batch_size,
        batches: cfg.batches,
        seed: cfg.seed,
        ppr: cfg.ppr,
        engine: Engine::Csr,
    };
    let run = || -> anyhow::Result<()> {
        let mut points = Vec::new();
        for &f in &cfg.factors {
            let pts = eval::scalability_run(base.users, base.items, &base.observations, f, &cfg.levels, &spec)?;
            if pts.len() >= 3 {
                let x: Vec<f64> = pts.iter().map(|p| p.size as f64).collect();
                let y: Vec<f64> = pts.iter().map(|p| p.seconds).collect();
                let lin = eval::polyfit(&x, &y, 1)?;
                let quad = eval::polyfit(&x, &y, 2)?;
                println!(
                    "{f}: normalized slope {:.3}, linear residual {:.3e}, quadratic residual {:.3e}",
                    eval::normalized_slope(&pts)?,
                    lin.residual,
                    quad.residual
                );
            } else {
                warn!("factor {f}: {} points, no fit", pts.len());
            }
            points.extend(pts);
        }
        let mut dir = RunDir::create(cfg, "bench")?;
        dir.write("scalability.csv", |w| eval::write_scalability_csv(w, &points))?;
        dir.finish(cfg)?;
        Ok(())
    };
    run().map_err(classify)
}

fn factor_list(s: &str) -> anyhow::Result<Vec<Factor>> {
    s.split(',').map(|f| f.trim().parse::<Factor>().map_err(Into::into)).collect()
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage(anyhow!("--threads must be >= 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    match &cli.command {
        Command::Ingest(c) => cmd_ingest(&resolve(c).map_err(usage)?),
        Command::Split(c) => cmd_split(&resolve(c).map_err(usage)?),
        Command::BuildGraph { common, variant, dump } => cmd_build_graph(&resolve(common).map_err(usage)?, *variant, *dump),
        Command::Recommend { common, user, k, algorithm, ppr_csv } => {
            cmd_recommend(&resolve(common).map_err(usage)?, user, *k, algorithm.as_deref(), *ppr_csv)
        }
        Command::Evaluate { common, algorithms, ks } => {
            let mut cfg = resolve(common).map_err(usage)?;
            if let Some(a) = algorithms {
                cfg.set("algorithms", a).map_err(usage)?;
            }
            if let Some(k) = ks {
                cfg.set("K", k).map_err(usage)?;
            }
            cmd_evaluate(&cfg)
        }
        Command::Bench { common, factors } => {
            let mut cfg = resolve(common).map_err(usage)?;
            if let Some(f) = factors {
                cfg.factors = factor_list(f).map_err(usage)?;
            }
            cmd_bench(&cfg)
        }
    }
}

/// Parses `args`, runs the command and reports failures on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            let (Failure::Usage(e) | Failure::Runtime(e)) = f;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
