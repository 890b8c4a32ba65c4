//! Discrete Fourier analysis on the uniform θ-grid.
//!
//! A periodic function is expanded as f(θ) = Σ_m a_m e^{−imθ}, the convention
//! under which h⁺_n(θ) = 1 + Σ_{m≥1} B⁺_{n,m} z^m with z = e^{−iθ}.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::spectral::C64;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Σ_j x_j e^{+2πijm/N} for all m (unnormalized inverse transform).
pub fn dft_plus(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf
}

/// Σ_j x_j e^{−2πijm/N} for all m.
pub fn dft_minus(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    plan(buf.len(), false).process(&mut buf);
    buf
}

/// Coefficients a_m, m ∈ [−N/2, N/2), of samples on θ_j = −π + 2πj/N.
#[derive(Debug, Clone)]
pub struct FourierSeries {
    len: usize,
    /// a_m stored at index m mod N.
    raw: Vec<C64>,
}

impl FourierSeries {
    pub fn from_samples(samples: &[C64]) -> Self {
        let n = samples.len();
        assert!(n.is_power_of_two(), "grid size must be a power of two");
        // a_m = (1/N) Σ_j f_j e^{imθ_j} = (−1)^m/N Σ_j f_j e^{2πijm/N}.
        let mut raw = dft_plus(samples);
        let inv = 1.0 / n as f64;
        for (k, v) in raw.iter_mut().enumerate() {
            let m = if k < n / 2 {
                k as i64
            } else {
                k as i64 - n as i64
            };
            *v *= if m.rem_euclid(2) == 0 { inv } else { -inv };
        }
        FourierSeries { len: n, raw }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_index(&self) -> i64 {
        self.len as i64 / 2 - 1
    }

    pub fn min_index(&self) -> i64 {
        -(self.len as i64 / 2)
    }

    /// a_m, zero outside the resolved band.
    pub fn get(&self, m: i64) -> C64 {
        if m < self.min_index() || m > self.max_index() {
            return C64::new(0.0, 0.0);
        }
        self.raw[m.rem_euclid(self.len as i64) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        (self.min_index()..=self.max_index()).map(move |m| (m, self.get(m)))
    }

    pub fn l1_norm(&self) -> f64 {
        self.raw.iter().map(|c| c.norm()).sum()
    }

    /// Σ_{|m| > cutoff} |a_m|.
    pub fn tail(&self, cutoff: i64) -> f64 {
        self.iter()
            .filter(|(m, _)| m.abs() > cutoff)
            .map(|(_, c)| c.norm())
            .sum()
    }

    /// Like [`tail`](Self::tail), ignoring coefficients below
    /// `floor_rel · max|a_m|`, which are not resolved in double precision.
    pub fn resolved_tail(&self, cutoff: i64, floor_rel: f64) -> f64 {
        self.tail_above(cutoff, floor_rel * self.max_abs())
    }

    /// Σ_{|m| > cutoff} |a_m| over coefficients larger than `floor`.
    pub fn tail_above(&self, cutoff: i64, floor: f64) -> f64 {
        self.iter()
            .filter(|(m, c)| m.abs() > cutoff && c.norm() > floor)
            .map(|(_, c)| c.norm())
            .fold(0.0, |a, b| a + b)
    }

    pub fn max_abs(&self) -> f64 {
        self.raw.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Σ_m a_m e^{−imθ}.
    pub fn eval(&self, theta: f64) -> C64 {
        self.iter()
            .map(|(m, c)| c * C64::from_polar(1.0, -(m as f64) * theta))
            .sum()
    }

    /// Coefficients with index window [lo, hi], as a dense vector.
    pub fn band(&self, lo: i64, hi: i64) -> Vec<C64> {
        (lo..=hi).map(|m| self.get(m)).collect()
    }

    /// Smallest symmetric index range outside of which every coefficient is
    /// below `tol · max|a_m|`.
    pub fn effective_band(&self, tol: f64) -> i64 {
        let floor = tol * self.raw.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.iter()
            .filter(|(_, c)| c.norm() > floor)
            .map(|(m, _)| m.abs())
            .max()
            .unwrap_or(0)
    }
}

/// Periodic trapezoid values of ∫_{−π}^{π} A(θ) e^{−imθ} dθ for every
/// m ∈ [−N/2, N/2), returned at index m mod N.
pub fn trapezoid_all_shifts(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    // e^{−imθ_j} = (−1)^m e^{−2πijm/N}.
    let mut out = dft_minus(samples);
    let h = 2.0 * PI / n as f64;
    for (k, v) in out.iter_mut().enumerate() {
        let m = if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        };
        *v *= if m.rem_euclid(2) == 0 { h } else { -h };
    }
    out
}

/// Reads index m from a vector laid out as in [`trapezoid_all_shifts`].
pub fn at_shift(v: &[C64], m: i64) -> C64 {
    v[m.rem_euclid(v.len() as i64) as usize]
}
