//! Acceptance criteria, run one after another so the timing criteria do not
//! compete with each other. Prints one PASS/FAIL/SKIP line per criterion and
//! exits non-zero if any criterion fails. Numeric arguments select a
//! subset of criteria.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use grank::eval::{
    compare_against, ndcg_at_k, normalized_slope, polyfit, run_experiment, scalability_run, subsample, Algorithm,
    AlgorithmConfig, BenchSpec, EvalReport, Factor, DEFAULT_KS, DEFAULT_LEVELS,
};
use grank::graph::CsrGraph;
use grank::grank::{gr_scores, Engine, GRank};
use grank::ingest::{parse_ratings, split, Dataset, DatasetFormat, SplitSpec};
use grank::ppr::oracle::solve_dense_oracle;
use grank::ppr::{FullTpgSolver, Init, PowerIteration, PprConfig, PprVector, TransitionModel};
use grank::tpg::build_tpg;
use grank::{ItemId, UserId};
use rand::seq::SliceRandom;
use rand::Rng;

// criterion 1
const SIZE_CASES: usize = 100;
const SIZE_MAX_USERS: usize = 50;
const SIZE_MAX_ITEMS: usize = 20;
const SIZE_BUDGET: Duration = Duration::from_secs(1);
// criterion 3
const PPR_GRAPHS: usize = 50;
const PPR_MAX_NODES: usize = 50;
const PPR_ORACLE_L1: f64 = 1e-8;
const PPR_MASS_TOL: f64 = 1e-9;
/// Stopping tolerance used when comparing against the oracle; the stop rule
/// bounds the step, and the distance to the fixed point can be up to
/// alpha / (1 - alpha) times larger.
const PPR_RUN_TOL: f64 = 1e-12;
const PPR_BUDGET: Duration = Duration::from_secs(10);
// criterion 4
const ITER_TOLERANCE: f64 = 1e-6;
const ITER_USERS: usize = 50;
const ITER_STATED_BOUND: usize = 20;
const ITER_BINDING_BOUND: usize = 40;
const ITER_CAP: usize = 1000;
// criterion 5
const GR_ORACLE_TOL: f64 = 1e-7;
// criterion 6
const NDCG_EXAMPLE_TOL: f64 = 1e-12;
/// (1 + 31 / log2 3) / (31 + 1 / log2 3), from an independent script.
const NDCG_EXAMPLE_ORACLE: f64 = 0.6499594707105908;
const NDCG_PERMUTATIONS: usize = 1000;
// criterion 7
const EVAL_T: usize = 50;
const EVAL_K: usize = 10;
const EVAL_P: f64 = 0.01;
// criterion 8
const BENCH_ITEMS: usize = 400;
const BENCH_MAX_NORMALIZED_SLOPE: f64 = 0.2;
// shared
const SEED: u64 = 0;

type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn ml100k() -> Option<Vec<Dataset>> {
    let path = common::ml100k_path()?;
    let data = parse_ratings(path, DatasetFormat::MovieLens100K).ok()?;
    split(&data.records, &SplitSpec::new(EVAL_T, SEED)).ok()
}

fn c1_graph_sizes() -> Verdict {
    let mut rng = common::rng(1);
    let start = Instant::now();
    let mut bad = Vec::new();
    for case in 0..SIZE_CASES {
        let m = rng.random_range(1..=SIZE_MAX_USERS);
        let n = rng.random_range(1..=SIZE_MAX_ITEMS);
        let count = rng.random_range(0..=4 * m * n);
        let o = if n > 1 { common::random_observations(&mut rng, m, n, count) } else { Default::default() };
        let g = build_tpg(m, n, &o, false).unwrap();
        let (v, e) = (n * (n - 1) + m + 2 * n, o.len() + 2 * n * (n - 1));
        let counted = g.graph().neighbor_array().len() / 2;
        if g.vertex_count() != v || g.graph().node_count() != v || g.edge_count() != e || counted != e {
            bad.push(case);
        }
    }
    let took = start.elapsed();
    verdict(
        bad.is_empty() && took < SIZE_BUDGET,
        format!("{SIZE_CASES} instances, mismatches {bad:?}, {took:.2?} (budget {SIZE_BUDGET:?})"),
    )
}

fn c2_toy() -> Verdict {
    let (m, n, o) = common::toy();
    let g = build_tpg(m, n, &o, false).unwrap();
    let (v, e) = (g.vertex_count(), g.edge_count());
    verdict(v == 25 && e == 33 && o.len() == 9, format!("{v} vertices, {e} edges from {} observations", o.len()))
}

fn c3_ppr_oracle() -> Verdict {
    let mut rng = common::rng(3);
    let start = Instant::now();
    let (mut worst_l1, mut worst_mass) = (0f64, 0f64);
    for case in 0..PPR_GRAPHS {
        let n = rng.random_range(2..=PPR_MAX_NODES);
        let p = rng.random_range(0.05..0.4);
        let weighted = case % 3 == 0;
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if rng.random_bool(p) {
                    edges.push((a, b, if weighted { rng.random_range(0.5..5.0) } else { 1.0 }));
                }
            }
        }
        let g = if weighted {
            let e: Vec<(u32, u32, f64)> = edges.iter().map(|&(a, b, w)| (a as u32, b as u32, w)).collect();
            CsrGraph::from_weighted_edges(n, &e).unwrap()
        } else {
            let e: Vec<(u32, u32)> = edges.iter().map(|&(a, b, _)| (a as u32, b as u32)).collect();
            CsrGraph::from_edges(n, &e).unwrap()
        };
        let target = rng.random_range(0..n);
        let model = TransitionModel::new(&g);
        let cfg = PprConfig { tolerance: PPR_RUN_TOL, max_iterations: 5000, ..PprConfig::default() };
        let mut it = PowerIteration::new(&model, target, cfg, Init::Personalization).unwrap();
        loop {
            let delta = it.step();
            worst_mass = worst_mass.max((it.current().iter().sum::<f64>() - 1.0).abs());
            if delta < cfg.tolerance || it.iterations() >= cfg.max_iterations {
                break;
            }
        }
        let exact = solve_dense_oracle(n, &edges, target, cfg.alpha).unwrap();
        let l1: f64 = it.current().iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum();
        worst_l1 = worst_l1.max(l1);
    }
    let took = start.elapsed();
    verdict(
        worst_l1 < PPR_ORACLE_L1 && worst_mass <= PPR_MASS_TOL && took < PPR_BUDGET,
        format!(
            "{PPR_GRAPHS} graphs, worst L1 to oracle {worst_l1:.2e} (< {PPR_ORACLE_L1:e}), worst mass drift {worst_mass:.2e} (<= {PPR_MASS_TOL:e}), {took:.2?}"
        ),
    )
}

fn c4_iterations(ds: Option<&[Dataset]>) -> Verdict {
    let Some(ds) = ds else {
        return Verdict::Skip("ML-100K not found".into());
    };
    let d = &ds[0];
    let g = build_tpg(d.num_users, d.num_items, &d.train_observations(), false).unwrap();
    let solver = FullTpgSolver::new(&g).unwrap();
    let mut users = d.test_users();
    users.shuffle(&mut common::rng(4));
    users.truncate(ITER_USERS);
    let cfg = PprConfig { tolerance: ITER_TOLERANCE, max_iterations: ITER_CAP, ..PprConfig::default() };
    let mut counts: Vec<usize> = users
        .iter()
        .map(|&u| {
            let mut it = solver.start(u, cfg).unwrap();
            it.run();
            it.iterations()
        })
        .collect();
    counts.sort_unstable();
    let (lo, mid, hi) = (counts[0], counts[counts.len() / 2], counts[counts.len() - 1]);
    verdict(
        hi <= ITER_BINDING_BOUND,
        format!(
            "{} users at tolerance {ITER_TOLERANCE:e}: iterations min {lo}, median {mid}, max {hi}; stated bound {ITER_STATED_BOUND} {}, binding bound {ITER_BINDING_BOUND} {}",
            counts.len(),
            if hi <= ITER_STATED_BOUND { "met" } else { "missed" },
            if hi <= ITER_BINDING_BOUND { "met" } else { "missed" },
        ),
    )
}

fn c5_gr_contract() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;

    // defined scores lie in [0, 1]
    let mut rng = common::rng(5);
    let mut checked = 0;
    for case in 0..30 {
        let o = common::random_observations(&mut rng, 8, 7, 40);
        let g = build_tpg(8, 7, &o, case % 2 == 1).unwrap();
        let r = GRank::new(&g, PprConfig::default(), Engine::Auto).unwrap();
        for u in 0..8u32 {
            if let Ok(s) = r.score(UserId(u)) {
                for x in s.scores.iter().filter_map(|x| x.gr) {
                    ok &= (0.0..=1.0).contains(&x);
                    checked += 1;
                }
            }
        }
    }
    notes.push(format!("{checked} scores in [0,1]"));

    // both orders of every pair stated: each item's sides are symmetric
    let o = [common::obs(0, 0, 1), common::obs(0, 1, 0), common::obs(0, 1, 2), common::obs(0, 2, 1)]
        .into_iter()
        .collect();
    let g = build_tpg(1, 3, &o, false).unwrap();
    for engine in [Engine::Auto, Engine::Csr] {
        let s = GRank::new(&g, PprConfig::default(), engine).unwrap().score(UserId(0)).unwrap();
        let half = s.scores.iter().all(|x| x.gr == Some(0.5));
        ok &= half;
        notes.push(format!("symmetric case {engine:?} exactly 0.5: {half}"));
    }

    // single observation "item 2 over item 0", checked against the dense solve
    let o = [common::obs(0, 2, 0)].into_iter().collect();
    let g = build_tpg(1, 3, &o, false).unwrap();
    let edges: Vec<(usize, usize, f64)> = (0..g.graph().node_count())
        .flat_map(|v| g.graph().neighbors(v).iter().map(move |&w| (v, w as usize, 1.0)))
        .filter(|e| e.0 < e.1)
        .collect();
    let exact = solve_dense_oracle(g.graph().node_count(), &edges, 0, 0.85).unwrap();
    let oracle = PprVector { values: exact, iterations_used: 0, converged: true, residuals: vec![] };
    let want: Vec<f64> = gr_scores(&g, &oracle).iter().map(|s| s.gr.unwrap()).collect();
    let got = GRank::new(&g, PprConfig::default(), Engine::Auto).unwrap().score(UserId(0)).unwrap();
    let diff = got.scores.iter().zip(&want).map(|(a, b)| (a.gr.unwrap() - b).abs()).fold(0.0, f64::max);
    let ordered = want[2] > want[0] && got.scores[2].gr > got.scores[0].gr;
    ok &= ordered && diff < GR_ORACLE_TOL;
    notes.push(format!(
        "single observation GR winner {:.6} > loser {:.6}, max diff to oracle {diff:.1e}",
        want[2], want[0]
    ));
    verdict(ok, notes.join("; "))
}

fn c6_ndcg() -> Verdict {
    let mut rng = common::rng(6);
    let mut ok = true;
    // ideal order
    for _ in 0..100 {
        let len = rng.random_range(1..20);
        let test: Vec<(ItemId, u8)> = (0..len as u32).map(|i| (ItemId(i), rng.random_range(1..=5))).collect();
        let mut ideal = test.clone();
        ideal.sort_by_key(|e| std::cmp::Reverse(e.1));
        let order: Vec<ItemId> = ideal.iter().map(|e| e.0).collect();
        for k in 1..=len {
            ok &= ndcg_at_k(UserId(0), &order, &test, k).unwrap().value == 1.0;
        }
    }
    let ideal_ok = ok;

    let test = [(ItemId(0), 5), (ItemId(1), 1)];
    let example = ndcg_at_k(UserId(0), &[ItemId(1), ItemId(0)], &test, 2).unwrap().value;
    let example_ok = (example - NDCG_EXAMPLE_ORACLE).abs() < NDCG_EXAMPLE_TOL;

    let mut swaps = 0;
    let mut monotone = true;
    for _ in 0..NDCG_PERMUTATIONS {
        let len = rng.random_range(2..20);
        let test: Vec<(ItemId, u8)> = (0..len as u32).map(|i| (ItemId(i), rng.random_range(1..=5))).collect();
        let mut order: Vec<ItemId> = test.iter().map(|e| e.0).collect();
        order.shuffle(&mut rng);
        let k = rng.random_range(1..=len);
        let before = ndcg_at_k(UserId(0), &order, &test, k).unwrap().value;
        for p in 0..len - 1 {
            if test[order[p + 1].index()].1 > test[order[p].index()].1 {
                let mut swapped = order.clone();
                swapped.swap(p, p + 1);
                monotone &= ndcg_at_k(UserId(0), &swapped, &test, k).unwrap().value >= before;
                swaps += 1;
            }
        }
    }
    verdict(
        ideal_ok && example_ok && monotone,
        format!(
            "ideal orders exactly 1: {ideal_ok}; worked example {example:.15} vs oracle {NDCG_EXAMPLE_ORACLE:.15}; {swaps} improving swaps over {NDCG_PERMUTATIONS} permutations monotone: {monotone}"
        ),
    )
}

fn variant_mean(reports: &[EvalReport], k: usize) -> f64 {
    reports.iter().map(|r| r.mean_ndcg(k).unwrap()).sum::<f64>() / reports.len() as f64
}

fn c7_relational(ds: Option<&[Dataset]>) -> Verdict {
    let Some(ds) = ds else {
        return Verdict::Skip("ML-100K not found".into());
    };
    let start = Instant::now();
    let cfg = AlgorithmConfig::default();
    let mut all = Vec::new();
    let mut means = Vec::new();
    for a in Algorithm::ALL {
        let t = Instant::now();
        let r = run_experiment(ds, a, &cfg, &DEFAULT_KS).unwrap();
        means.push((a, variant_mean(&r, EVAL_K), t.elapsed()));
        all.extend(r);
    }
    let cmp = compare_against("grank", &all).unwrap();
    let p = |other: &str| {
        cmp.iter()
            .find(|c| c.k == EVAL_K && c.other == other)
            .map(|c| c.result.p_value)
            .unwrap()
    };
    let mean = |a: Algorithm| means.iter().find(|m| m.0 == a).unwrap().1;
    let g = mean(Algorithm::GRank);
    let ok = g > mean(Algorithm::Bgr) && g > mean(Algorithm::Wbgr) && p("bgr") < EVAL_P && p("wbgr") < EVAL_P;
    let listing: Vec<String> = means.iter().map(|(a, m, t)| format!("{a} {m:.4} ({t:.0?})")).collect();
    verdict(
        ok,
        format!(
            "NDCG@{EVAL_K} over {} variants: {}; p vs bgr {:.2e}, vs wbgr {:.2e} (< {EVAL_P}), vs eigenrank {:.2e} (informational); {:.0?}",
            ds.len(),
            listing.join(", "),
            p("bgr"),
            p("wbgr"),
            p("eigenrank"),
            start.elapsed()
        ),
    )
}

fn c8_scalability(ds: Option<&[Dataset]>) -> Verdict {
    let Some(ds) = ds else {
        return Verdict::Skip("ML-100K not found".into());
    };
    let d = &ds[0];
    let frac = BENCH_ITEMS as f64 / d.num_items as f64;
    let base = subsample(d.num_users, d.num_items, &d.train_observations(), Factor::Items, frac, SEED).unwrap();
    let spec = BenchSpec { seed: SEED, engine: Engine::Csr, ..BenchSpec::default() };
    let run = |f| scalability_run(base.users, base.items, &base.observations, f, &DEFAULT_LEVELS, &spec).unwrap();
    let (pm, pn, ps) = (run(Factor::Users), run(Factor::Items), run(Factor::Preferences));
    let x: Vec<f64> = pn.iter().map(|p| p.size as f64).collect();
    let y: Vec<f64> = pn.iter().map(|p| p.seconds).collect();
    let (lin, quad) = (polyfit(&x, &y, 1).unwrap(), polyfit(&x, &y, 2).unwrap());
    let (sm, ss) = (normalized_slope(&pm).unwrap(), normalized_slope(&ps).unwrap());
    let ok = quad.residual < lin.residual
        && quad.coefficients[2] > 0.0
        && sm < BENCH_MAX_NORMALIZED_SLOPE
        && ss < BENCH_MAX_NORMALIZED_SLOPE;
    let times = |pts: &[grank::eval::ScalabilityPoint]| {
        pts.iter().map(|p| format!("{}:{:.3}s", p.size, p.seconds)).collect::<Vec<_>>().join(" ")
    };
    verdict(
        ok,
        format!(
            "base M={} N={} S={}; N sweep [{}] linear SSR {:.3e} vs quadratic {:.3e}; M normalized slope {sm:.3}, S normalized slope {ss:.3} (< {BENCH_MAX_NORMALIZED_SLOPE})",
            base.users,
            base.items,
            base.observations.len(),
            times(&pn),
            lin.residual,
            quad.residual
        ),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_grank")).args(args).stdout(Stdio::null()).status().map(|s| s.success()).unwrap_or(false)
}

fn c9_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = common::rng(9);
    let records = common::random_ratings(&mut rng, 40, 50, 35);
    let data = dir.path().join("u.data");
    std::fs::write(&data, common::to_u_data(&records)).unwrap();
    let d = data.to_str().unwrap();
    let commands: [(&str, Vec<&str>, Vec<&str>); 5] = [
        ("ingest", vec!["ingest"], vec!["observations.tsv", "users.map", "items.map"]),
        ("split", vec!["split", "-T", "20", "--variants", "2"], vec!["variant_0/train.tsv", "variant_1/test.tsv"]),
        ("build-graph", vec!["build-graph", "-T", "20", "--dump"], vec!["graph.txt", "tpg_dump.txt", "tpg.bin"]),
        ("recommend", vec!["recommend", "--user", "7", "--ppr-csv"], vec!["recommendations.csv", "ppr.csv"]),
        (
            "evaluate",
            vec!["evaluate", "-T", "20", "--variants", "2"],
            vec!["report.csv", "report_by_variant.csv", "ttest.csv", "skipped.csv"],
        ),
    ];
    let mut differing = Vec::new();
    let mut compared = 0;
    for (name, args, files) in &commands {
        let mut outs = Vec::new();
        for threads in ["1", "2", "1"] {
            let out = dir.path().join(format!("{name}-{threads}-{}", outs.len()));
            let o = out.to_str().unwrap().to_string();
            let mut full: Vec<&str> = args.clone();
            full.extend(["--dataset", d, "--seed", "3", "--threads", threads, "--out", &o]);
            if !run_cli(&full) {
                return Verdict::Fail(format!("{name} failed to run"));
            }
            outs.push(out);
        }
        for f in files {
            let first = std::fs::read(outs[0].join(f)).unwrap();
            compared += 1;
            if outs[1..].iter().any(|o| std::fs::read(o.join(f)).unwrap() != first) {
                differing.push(format!("{name}/{f}"));
            }
        }
    }
    // bench timings vary run to run; its factor, level and size columns must not
    let mut shapes = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(format!("bench-{threads}"));
        let ok = run_cli(&[
            "bench", "--dataset", d, "-T", "20", "--seed", "3", "--threads", threads, "--set", "bench_items=20", "--set",
            "batch_size=2", "--set", "batches=2", "--out", out.to_str().unwrap(),
        ]);
        if !ok {
            return Verdict::Fail("bench failed to run".into());
        }
        let text = std::fs::read_to_string(Path::new(&out).join("scalability.csv")).unwrap();
        let shape: Vec<String> = text.lines().map(|l| l.split(',').take(3).collect::<Vec<_>>().join(",")).collect();
        shapes.push(shape);
    }
    if shapes[0] != shapes[1] {
        differing.push("bench/scalability.csv (factor,level,size)".into());
    }
    verdict(
        differing.is_empty(),
        format!(
            "{compared} output files byte-identical across reruns with 1 and 2 threads; bench layout columns identical (timing columns excluded); differing: {differing:?}"
        ),
    )
}

fn main() {
    let started = Instant::now();
    let ds = ml100k();
    let ds = ds.as_deref();
    let criteria: Vec<(&str, Check)> = vec![
        ("graph-size formulas", Box::new(c1_graph_sizes)),
        ("toy fixture", Box::new(c2_toy)),
        ("PPR against dense oracle", Box::new(c3_ppr_oracle)),
        ("iteration bound", Box::new(move || c4_iterations(ds))),
        ("GR contract", Box::new(c5_gr_contract)),
        ("NDCG correctness", Box::new(c6_ndcg)),
        ("relational accuracy", Box::new(move || c7_relational(ds))),
        ("scalability shape", Box::new(move || c8_scalability(ds))),
        ("determinism", Box::new(c9_determinism)),
    ];
    // optional criterion numbers as arguments, e.g. `-- 4 8`
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (mut failed, mut ran) = (0, 0);
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("criterion {} ({name}): {tag}: {detail}", i + 1);
    }
    println!("acceptance: {failed} of {ran} criteria failed, {:.0?}", started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
