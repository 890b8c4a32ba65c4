//! Klein–Gordon kernels. With A = H + μ², the group generated by the matrix
//! operator [[0, i], [i(Δ − μ² − q), 0]] has 12-entry sin(t√A)/√A, whose
//! kernel on the continuous spectrum is
//!
//!   S_{n,k}(t) = (1/2π) ∫ sin(tg)/g · e^{−i(k−n)θ} Y_{n,k}(θ) dθ,  g = √(2 − 2cosθ + μ²).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::strip::wave_time_factor;
use super::{h_at, shifted_integral, transmission, z_of, KernelKind, KernelMatrix};
use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::fourier::trapezoid_all_shifts;
use crate::jost::Window;
use crate::oscillatory::{
    gauss_legendre, oracle_integral, wave_critical_velocity, PhaseFunction, PhaseKind,
};
use crate::potential::Potential;
use crate::scattering::resolvent_kernel;
use crate::spectral::{Side, C64, I};

const TIME_QUAD_TOL: f64 = 1e-12;

fn check_mass(mu: f64) -> Result<()> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "mass μ = {mu} must be finite and ≥ 0"
        )));
    }
    Ok(())
}

fn g_of(mu: f64, theta: f64) -> f64 {
    (2.0 - 2.0 * theta.cos() + mu * mu).sqrt()
}

/// (c_n(t), s_n(t)) for μ = 0: c_n = J_{2|n|}(2t), s_n = ∫₀ᵗ c_n.
pub fn free_wave_kernels(n: i64, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "time t = {t} must be finite and ≥ 0"
        )));
    }
    let order = 2 * n.unsigned_abs() as u32;
    let c = bessel_j(order, 2.0 * t);
    if t == 0.0 {
        return Ok((c, 0.0));
    }
    let gl = gauss_legendre(16);
    let integrate = |panels: usize| -> f64 {
        let h = t / panels as f64;
        (0..panels)
            .map(|p| {
                let mid = h * (p as f64 + 0.5);
                gl.iter()
                    .map(|(x, w)| 0.5 * h * w * bessel_j(order, 2.0 * (mid + 0.5 * h * x)))
                    .sum::<f64>()
            })
            .sum()
    };
    let mut panels = (2.0 * t).ceil() as usize + 1;
    let mut last = integrate(panels);
    for _ in 0..8 {
        panels *= 2;
        let next = integrate(panels);
        if (next - last).abs() < TIME_QUAD_TOL {
            return Ok((c, next));
        }
        last = next;
    }
    Err(Error::Quadrature(format!(
        "time quadrature of c_{n} up to t = {t} did not settle"
    )))
}

/// Free 12-entry S_m(t), m = 0..=mmax, from one FFT of sin(tg)/g.
pub fn free_wave12_row(mu: f64, t: f64, mmax: usize) -> Result<Vec<f64>> {
    check_mass(mu)?;
    let need = wave_critical_velocity(mu) * t + 10.0 * t.cbrt() + mmax as f64 + 64.0;
    let n = ((2.0 * need).ceil() as usize).next_power_of_two().max(1024);
    let samples: Vec<C64> = (0..n)
        .map(|j| {
            C64::new(
                wave_time_factor(t, mu, -PI + 2.0 * PI * j as f64 / n as f64),
                0.0,
            )
        })
        .collect();
    let all = trapezoid_all_shifts(&samples);
    Ok((0..=mmax).map(|m| all[m].re / (2.0 * PI)).collect())
}

/// The amplitude Y_{n,k}/g for n ≤ k.
fn wave_amplitude<'a>(
    q: &'a Potential,
    mu: f64,
    n: i64,
    k: i64,
) -> impl Fn(f64) -> C64 + Sync + 'a {
    move |th: f64| {
        let z = z_of(th);
        h_at(q, z, Side::Plus, k) * h_at(q, z, Side::Minus, n) * transmission(q, th) / g_of(mu, th)
    }
}

/// S_{n,k}(t) by the Jost route. For μ > 0 the two halves e^{∓itg} are
/// integrated with the wave phase Φ_v; for μ = 0 the smooth product
/// sin(tg)/g is integrated directly by oracle quadrature.
pub fn wave_kernel_12(q: &Potential, mu: f64, n: i64, k: i64, t: f64) -> Result<C64> {
    check_mass(mu)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "time t = {t} must be finite and ≥ 0"
        )));
    }
    let (n, k) = (n.min(k), n.max(k));
    let m = k - n;
    if t == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    if mu == 0.0 {
        let f = |th: f64| {
            let z = z_of(th);
            wave_time_factor(t, 0.0, th)
                * C64::from_polar(1.0, -(m as f64) * th)
                * h_at(q, z, Side::Plus, k)
                * h_at(q, z, Side::Minus, n)
                * transmission(q, th)
        };
        return Ok(
            oracle_integral(&PhaseFunction::schrodinger(0.0), &f, 0.0, -PI, PI)? / (2.0 * PI),
        );
    }
    let kind = PhaseKind::Wave { mu };
    let a = wave_amplitude(q, mu, n, k);
    let minus = shifted_integral(kind, m, t, &a)?;
    let a_conj = |th: f64| a(th).conj();
    let plus = shifted_integral(kind, -m, t, &a_conj)?.conj();
    Ok((plus - minus) / (4.0 * PI * I))
}

/// (I₊, I₋) with I± = −(1/2π) ∫ e^{±itg − iθ|n−k|}/g dθ by oracle
/// quadrature; the free 12-entry equals (i/2)(I₊ − I₋).
pub fn wave_reference_halves(mu: f64, n: i64, k: i64, t: f64) -> Result<(C64, C64)> {
    check_mass(mu)?;
    if mu == 0.0 {
        return Err(Error::InvalidInput(
            "the halves e^{±itg}/g are singular at μ = 0".into(),
        ));
    }
    let m = (n - k).abs() as f64;
    let phase = PhaseFunction::wave(mu, 0.0)?;
    let shifted = |sign: f64| move |th: f64| C64::from_polar(1.0 / g_of(mu, th), -sign * m * th);
    // ∫ e^{−itg} e^{−imθ}/g and ∫ e^{−itg} e^{+imθ}/g.
    let j_minus = oracle_integral(&phase, &shifted(1.0), t, -PI, PI)?;
    let j_plus = oracle_integral(&phase, &shifted(-1.0), t, -PI, PI)?.conj();
    Ok((-j_plus / (2.0 * PI), -j_minus / (2.0 * PI)))
}

/// S over a square window by per-entry quadrature.
pub fn wave12_matrix(q: &Potential, mu: f64, window: Window, t: f64) -> Result<KernelMatrix> {
    let idx: Vec<i64> = window.iter().collect();
    let upper = KernelMatrix::try_from_fn(
        KernelKind::WavePcEntry { i: 1, j: 2 },
        t,
        idx.clone(),
        idx.clone(),
        |n, k| {
            if n <= k {
                wave_kernel_12(q, mu, n, k, t)
            } else {
                Ok(C64::new(0.0, 0.0))
            }
        },
    )?;
    let len = idx.len();
    let mut values = upper.values;
    for i in 0..len {
        for j in 0..i {
            values[i * len + j] = values[j * len + i];
        }
    }
    let kind = if q.is_zero() {
        KernelKind::Wave12Free
    } else {
        KernelKind::WavePcEntry { i: 1, j: 2 }
    };
    Ok(KernelMatrix::square(kind, t, window, values)
        .with_method("route", "jost_adaptive")
        .with_method("mu", mu)
        .with_method("potential", q.name())
        .with_method("mu_zero_flag", mu == 0.0))
}

/// Kernel (n, k) of the 2×2 resolvent (𝐇 − ω)^{−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveBlock {
    pub entries: [[C64; 2]; 2],
}

/// Entries ωR, iR, −i(δ + ω²R), ωR with R = R(ω² − μ²)_{n,k}.
pub fn wave_resolvent_entries(
    q: &Potential,
    mu: f64,
    omega: C64,
    n: i64,
    k: i64,
) -> Result<WaveBlock> {
    check_mass(mu)?;
    let energy = omega * omega - mu * mu;
    let r = resolvent_kernel(q, energy, n, k).map_err(|e| match e {
        Error::OnSpectrum { tol, .. } => Error::OnSpectrum {
            omega: format!("{omega} (ω² − μ² = {energy})"),
            tol,
        },
        other => other,
    })?;
    let delta = if n == k { 1.0 } else { 0.0 };
    Ok(WaveBlock {
        entries: [
            [omega * r, I * r],
            [-I * (delta + omega * omega * r), omega * r],
        ],
    })
}
