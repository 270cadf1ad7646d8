//! CSV writers for experiment outputs.

use std::io::Write;

use log::warn;

use super::experiment::{paired_values, EvalReport};
use super::scalability::ScalabilityPoint;
use super::ttest::{paired_ttest, TTestResult};
use crate::error::Result;

/// Reports grouped by `(algorithm, T)` in order of first appearance.
fn groups(reports: &[EvalReport]) -> Vec<(&str, usize, Vec<&EvalReport>)> {
    let mut out: Vec<(&str, usize, Vec<&EvalReport>)> = Vec::new();
    for r in reports {
        match out.iter_mut().find(|g| g.0 == r.algorithm && g.1 == r.train_per_user) {
            Some(g) => g.2.push(r),
            None => out.push((&r.algorithm, r.train_per_user, vec![r])),
        }
    }
    out
}

/// One row per `(algorithm, T, K)`: the mean over variants of each variant's
/// mean NDCG, and the number of evaluated `(variant, user)` pairs.
pub fn write_report_csv<W: Write>(mut out: W, dataset: &str, reports: &[EvalReport]) -> std::io::Result<()> {
    writeln!(out, "algorithm,dataset,variant,T,K,mean_ndcg,n_users")?;
    for (alg, t, rs) in groups(reports) {
        for &k in &rs[0].ks {
            let means: Vec<f64> = rs.iter().filter_map(|r| r.mean_ndcg(k)).collect();
            let n: usize = rs.iter().map(|r| r.users.len()).sum();
            if means.is_empty() {
                continue;
            }
            let mean = means.iter().sum::<f64>() / means.len() as f64;
            writeln!(out, "{alg},{dataset},all,{t},{k},{mean},{n}")?;
        }
    }
    Ok(())
}

/// Same columns as [`write_report_csv`] with one row per variant.
pub fn write_report_by_variant_csv<W: Write>(mut out: W, dataset: &str, reports: &[EvalReport]) -> std::io::Result<()> {
    writeln!(out, "algorithm,dataset,variant,T,K,mean_ndcg,n_users")?;
    for (alg, t, rs) in groups(reports) {
        for r in rs {
            for &k in &r.ks {
                if let Some(mean) = r.mean_ndcg(k) {
                    writeln!(out, "{alg},{dataset},{},{t},{k},{mean},{}", r.variant, r.users.len())?;
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub train_per_user: usize,
    pub k: usize,
    pub reference: String,
    pub other: String,
    pub result: TTestResult,
}

/// Paired t-tests of `reference` against every other algorithm, per
/// `(T, K)`, over per-user values pooled across variants. Pairs with fewer
/// than two common users are skipped with a warning.
pub fn compare_against(reference: &str, reports: &[EvalReport]) -> Result<Vec<Comparison>> {
    let gs = groups(reports);
    let mut out = Vec::new();
    for (alg, t, rs) in &gs {
        if *alg != reference {
            continue;
        }
        let a: Vec<EvalReport> = rs.iter().map(|r| (*r).clone()).collect();
        for (other, t2, os) in &gs {
            if other == alg || t2 != t {
                continue;
            }
            let b: Vec<EvalReport> = os.iter().map(|r| (*r).clone()).collect();
            for &k in &a[0].ks {
                let (x, y) = paired_values(&a, &b, k)?;
                if x.len() < 2 {
                    warn!("{alg} vs {other} T={t} K={k}: {} paired users, t-test skipped", x.len());
                    continue;
                }
                out.push(Comparison {
                    train_per_user: *t,
                    k,
                    reference: alg.to_string(),
                    other: other.to_string(),
                    result: paired_ttest(&x, &y)?,
                });
            }
        }
    }
    Ok(out)
}

pub fn write_ttest_csv<W: Write>(mut out: W, comparisons: &[Comparison]) -> std::io::Result<()> {
    writeln!(out, "T,K,algorithm_vs,p_value")?;
    for c in comparisons {
        writeln!(out, "{},{},{}_vs_{},{:e}", c.train_per_user, c.k, c.reference, c.other, c.result.p_value)?;
    }
    Ok(())
}

pub fn write_scalability_csv<W: Write>(mut out: W, points: &[ScalabilityPoint]) -> std::io::Result<()> {
    writeln!(out, "factor,level,size,mean_seconds,std_seconds")?;
    for p in points {
        writeln!(out, "{},{},{},{},{}", p.factor, p.level, p.size, p.seconds, p.std_seconds)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::UserId;

    fn report(alg: &str, variant: usize, values: &[f64]) -> EvalReport {
        EvalReport {
            algorithm: alg.into(),
            variant,
            train_per_user: 20,
            ks: vec![1, 10],
            users: (0..values.len()).map(UserId::from).collect(),
            values: values.iter().map(|&v| vec![v, v]).collect(),
            skipped: vec![],
        }
    }

    #[test]
    fn one_comparison_row_per_cell() {
        let rs = vec![
            report("grank", 0, &[0.9, 0.8, 0.7]),
            report("grank", 1, &[0.6, 0.9, 0.8]),
            report("bgr", 0, &[0.5, 0.6, 0.65]),
            report("bgr", 1, &[0.6, 0.5, 0.7]),
        ];
        let cmp = compare_against("grank", &rs).unwrap();
        assert_eq!(cmp.len(), 2);
        let mut buf = Vec::new();
        write_ttest_csv(&mut buf, &cmp).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("20,1,grank_vs_bgr,"));
        let p: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(p, cmp[0].result.p_value);

        let mut buf = Vec::new();
        write_report_csv(&mut buf, "toy", &rs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("grank,toy,all,20,10,0.7833333333333334,6"));
    }
}
