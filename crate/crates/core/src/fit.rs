//! Log-log least-squares fits of power laws y ≈ C x^slope.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence half-width of the slope.
    pub ci: f64,
}

impl PowerFit {
    pub fn contains(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol
    }
}

/// Ordinary least squares of ln y on ln x.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!(
            "length mismatch {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points, got {}",
            x.len()
        )));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Fit(format!("non-positive or non-finite value {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let dof = n - 2.0;
    let se = (rss / dof / sxx).sqrt();
    let tq = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Fit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(PowerFit {
        slope,
        intercept,
        ci: tq * se,
    })
}

/// `count` log-spaced points on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
