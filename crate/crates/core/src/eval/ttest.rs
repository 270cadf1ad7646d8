use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TTestResult {
    /// Mean of `a - b`.
    pub mean_difference: f64,
    /// Sample standard deviation of `a - b`.
    pub std_difference: f64,
    pub samples: usize,
    pub t: f64,
    /// Two-tailed.
    pub p_value: f64,
    /// Set when every difference is equal and nonzero: `t` is infinite and
    /// `p` is reported as 0.
    pub degenerate: bool,
}

/// Paired two-tailed t-test with `N - 1` degrees of freedom.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("paired t-test needs N >= 2, got {n}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();

    let (t, p, degenerate) = if sd == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0, false)
        } else {
            (mean.signum() * f64::INFINITY, 0.0, true)
        }
    } else {
        let t = mean / (sd / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        (t, (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0), false)
    };
    Ok(TTestResult {
        mean_difference: mean,
        std_difference: sd,
        samples: n,
        t,
        p_value: p,
        degenerate,
    })
}
