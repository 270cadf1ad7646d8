use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::warn;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::grank::{Engine, GRank};
use crate::ids::{ItemId, UserId};
use crate::ingest::{stream_rng, Observation, ObservationSet};
use crate::ppr::oracle::gaussian_solve;
use crate::ppr::PprConfig;
use crate::tpg::build_tpg;

pub const DEFAULT_LEVELS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    /// Users, M.
    Users,
    /// Items, N.
    Items,
    /// Stated preferences, S.
    Preferences,
}

impl Factor {
    pub const ALL: [Factor; 3] = [Factor::Users, Factor::Items, Factor::Preferences];

    pub fn symbol(self) -> &'static str {
        match self {
            Factor::Users => "M",
            Factor::Items => "N",
            Factor::Preferences => "S",
        }
    }

    fn stream(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" | "users" => Ok(Factor::Users),
            "N" | "n" | "items" => Ok(Factor::Items),
            "S" | "s" | "preferences" => Ok(Factor::Preferences),
            _ => Err(Error::InvalidParameter(format!("unknown factor {s:?} (M, N, S)"))),
        }
    }
}

/// A reduced observation set with dense ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Subsample {
    pub users: usize,
    pub items: usize,
    pub observations: ObservationSet,
}

impl Subsample {
    pub fn size(&self, factor: Factor) -> usize {
        match factor {
            Factor::Users => self.users,
            Factor::Items => self.items,
            Factor::Preferences => self.observations.len(),
        }
    }
}

fn shuffled(n: usize, seed: u64, factor: Factor) -> Vec<u32> {
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut stream_rng(seed, factor.stream(), 0x5ca1e));
    order
}

/// Keeps `fraction` of the factor's population, chosen as a prefix of one
/// seeded permutation so smaller levels nest inside larger ones. Users and
/// items are re-indexed densely; the other factors are left as they are.
pub fn subsample(users: usize, items: usize, base: &ObservationSet, factor: Factor, fraction: f64, seed: u64) -> Result<Subsample> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("level must lie in (0, 1], got {fraction}")));
    }
    let keep = |n: usize| ((n as f64 * fraction).round() as usize).max(1).min(n);
    match factor {
        Factor::Users => {
            let order = shuffled(users, seed, factor);
            let mut chosen: Vec<u32> = order[..keep(users)].to_vec();
            chosen.sort_unstable();
            let observations = base
                .iter()
                .filter_map(|o| {
                    chosen
                        .binary_search(&o.user.0)
                        .ok()
                        .map(|u| Observation { user: UserId::from(u), ..*o })
                })
                .collect();
            Ok(Subsample { users: chosen.len(), items, observations })
        }
        Factor::Items => {
            let order = shuffled(items, seed, factor);
            let mut chosen: Vec<u32> = order[..keep(items)].to_vec();
            chosen.sort_unstable();
            let dense = |i: ItemId| chosen.binary_search(&i.0).ok().map(ItemId::from);
            let observations = base
                .iter()
                .filter_map(|o| match (dense(o.desirable), dense(o.undesirable)) {
                    (Some(d), Some(u)) => Some(Observation { user: o.user, desirable: d, undesirable: u }),
                    _ => None,
                })
                .collect();
            Ok(Subsample { users, items: chosen.len(), observations })
        }
        Factor::Preferences => {
            let all = base.as_slice();
            let order = shuffled(all.len(), seed, factor);
            let observations = order[..keep(all.len()).min(all.len())].iter().map(|&k| all[k as usize]).collect();
            Ok(Subsample { users, items, observations })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchSpec {
    /// Recommendations per timed batch.
    pub batch_size: usize,
    pub batches: usize,
    pub seed: u64,
    pub ppr: PprConfig,
    pub engine: Engine,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            batch_size: 5,
            batches: 5,
            seed: 0,
            ppr: PprConfig::default(),
            engine: Engine::Csr,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalabilityPoint {
    pub factor: Factor,
    pub level: f64,
    /// Value of the varied factor at this level.
    pub size: usize,
    /// Median over batches of the per-recommendation wall time.
    pub seconds: f64,
    /// Standard deviation of the per-batch values.
    pub std_seconds: f64,
}

/// Rebuilds the graph at each level and times batches of recommendations for
/// a fixed random set of users. Runs on the calling thread only.
pub fn scalability_run(
    users: usize,
    items: usize,
    base: &ObservationSet,
    factor: Factor,
    levels: &[f64],
    spec: &BenchSpec,
) -> Result<Vec<ScalabilityPoint>> {
    if spec.batch_size == 0 || spec.batches == 0 {
        return Err(Error::InvalidParameter("bench needs batch_size and batches >= 1".into()));
    }
    let mut points = Vec::with_capacity(levels.len());
    for &level in levels {
        let sub = subsample(users, items, base, factor, level, spec.seed)?;
        if sub.observations.is_empty() || sub.items < 2 {
            warn!("factor {factor} level {level}: subsample is empty, skipped");
            continue;
        }
        let tpg = build_tpg(sub.users, sub.items, &sub.observations, false)?;
        let mut active: Vec<UserId> = (0..sub.users).map(UserId::from).filter(|&u| tpg.user_degree(u) > 0).collect();
        active.shuffle(&mut stream_rng(spec.seed, factor.stream(), 0xba7c4));
        active.truncate(spec.batch_size);
        let ranker = GRank::new(&tpg, spec.ppr, spec.engine)?;
        let mut per_batch = Vec::with_capacity(spec.batches);
        for _ in 0..spec.batches {
            let start = Instant::now();
            for &u in &active {
                std::hint::black_box(ranker.score(u)?);
            }
            per_batch.push(start.elapsed().as_secs_f64() / active.len() as f64);
        }
        points.push(ScalabilityPoint {
            factor,
            level,
            size: sub.size(factor),
            seconds: median(&per_batch),
            std_seconds: sample_std(&per_batch),
        });
    }
    Ok(points)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        (s[mid - 1] + s[mid]) / 2.0
    }
}

fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Least-squares polynomial fit.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    /// Coefficients from the constant term up.
    pub coefficients: Vec<f64>,
    /// Sum of squared residuals.
    pub residual: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Fits a polynomial of `degree` through `(x, y)`. Needs more points than
/// coefficients.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit> {
    if x.len() != y.len() || x.len() <= degree {
        return Err(Error::InvalidParameter(format!(
            "degree {degree} fit needs more than {degree} paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    // Scale x to [0, 1]-ish to keep the normal equations well conditioned.
    let scale = x.iter().fold(0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let p = degree + 1;
    let mut a = vec![vec![0.0; p + 1]; p];
    for (&xi, &yi) in x.iter().zip(y) {
        let pw: Vec<f64> = (0..p).map(|k| (xi / scale).powi(k as i32)).collect();
        for r in 0..p {
            for c in 0..p {
                a[r][c] += pw[r] * pw[c];
            }
            a[r][p] += pw[r] * yi;
        }
    }
    let scaled = gaussian_solve(a)?;
    let coefficients: Vec<f64> = scaled.iter().enumerate().map(|(k, c)| c / scale.powi(k as i32)).collect();
    let mut fit = PolyFit { coefficients, residual: 0.0 };
    fit.residual = x.iter().zip(y).map(|(&xi, &yi)| (yi - fit.eval(xi)).powi(2)).sum();
    Ok(fit)
}

/// `|slope| * (max x - min x) / mean y` of the linear fit: the relative change
/// in time the trend predicts across the sweep.
pub fn normalized_slope(points: &[ScalabilityPoint]) -> Result<f64> {
    let x: Vec<f64> = points.iter().map(|p| p.size as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.seconds).collect();
    let fit = polyfit(&x, &y, 1)?;
    let range = x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    Ok(fit.coefficients[1].abs() * range / mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ObservationSet {
        (0..6u32)
            .flat_map(|u| (0..5u32).map(move |i| Observation::new(UserId(u), ItemId(i), ItemId((i + 1 + u % 3) % 6)).unwrap()))
            .collect()
    }

    #[test]
    fn polyfit_recovers_exact_polynomials() {
        let x: Vec<f64> = (1..=6).map(|v| v as f64 * 100.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 + 0.5 * v + 0.01 * v * v).collect();
        let q = polyfit(&x, &y, 2).unwrap();
        assert!((q.coefficients[2] - 0.01).abs() < 1e-9);
        assert!(q.residual < 1e-12 * y.iter().map(|v| v * v).sum::<f64>());
        let l = polyfit(&x, &y, 1).unwrap();
        assert!(l.residual > q.residual);
        assert!(polyfit(&x[..2], &y[..2], 2).is_err());
    }

    #[test]
    fn subsamples_nest_and_reindex() {
        let b = base();
        for f in Factor::ALL {
            let small = subsample(6, 6, &b, f, 0.4, 9).unwrap();
            let full = subsample(6, 6, &b, f, 1.0, 9).unwrap();
            assert!(small.size(f) < full.size(f));
            assert!(small.observations.iter().all(|o| o.user.index() < small.users && o.desirable.index() < small.items));
        }
        assert_eq!(subsample(6, 6, &b, Factor::Preferences, 1.0, 9).unwrap().observations, b);
        assert!(subsample(6, 6, &b, Factor::Items, 0.0, 9).is_err());
    }

    #[test]
    fn run_produces_one_point_per_level() {
        let spec = BenchSpec { batch_size: 2, batches: 3, ..Default::default() };
        let pts = scalability_run(6, 6, &base(), Factor::Items, &[0.5, 1.0], &spec).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.seconds > 0.0));
        assert_eq!(pts[1].size, 6);
        let one = scalability_run(6, 6, &base(), Factor::Users, &[1.0], &spec).unwrap();
        assert_eq!(one.len(), 1);
        assert!(normalized_slope(&one).is_err());
    }

    #[test]
    fn factor_parsing() {
        assert_eq!("N".parse::<Factor>().unwrap(), Factor::Items);
        assert!("x".parse::<Factor>().is_err());
    }
}
