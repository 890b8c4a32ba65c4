//! Weighted sequence norms ‖u‖_{ℓ^p_σ} = (Σ (1+|n|)^{pσ} |u_n|^p)^{1/p}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::C64;

/// A finitely supported complex sequence starting at lattice site `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSeq {
    pub offset: i64,
    pub values: Vec<C64>,
}

impl WeightedSeq {
    pub fn new(offset: i64, values: Vec<C64>) -> Self {
        WeightedSeq { offset, values }
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Self {
        WeightedSeq {
            offset,
            values: values.iter().map(|v| C64::new(*v, 0.0)).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.offset + i as i64, *v))
    }

    pub fn norm(&self, p: f64, sigma: f64) -> Result<f64> {
        weighted_norm(self, p, sigma)
    }
}

/// The weight (1+|n|)^σ.
pub fn weight(n: i64, sigma: f64) -> f64 {
    (1.0 + n.unsigned_abs() as f64).powf(sigma)
}

/// ℓ^p_σ norm; `p = f64::INFINITY` gives sup (1+|n|)^σ |u_n|.
pub fn weighted_norm(u: &WeightedSeq, p: f64, sigma: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidInput(format!(
            "norm exponent p = {p} must be ≥ 1"
        )));
    }
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "weight exponent σ = {sigma} must be finite"
        )));
    }
    if p.is_infinite() {
        return Ok(u
            .iter()
            .map(|(n, v)| weight(n, sigma) * v.norm())
            .fold(0.0, f64::max));
    }
    // Scale by the largest weighted entry to keep |u|^p representable.
    let scale = u
        .iter()
        .map(|(n, v)| weight(n, sigma) * v.norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = u
        .iter()
        .map(|(n, v)| (weight(n, sigma) * v.norm() / scale).powf(p))
        .sum();
    Ok(scale * s.powf(1.0 / p))
}
