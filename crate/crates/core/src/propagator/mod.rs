//! Propagator kernels: free and perturbed e^{−itH}P_c, the Klein–Gordon
//! group, and a dense finite-lattice oracle.
//!
//! The perturbed Schrödinger kernel is
//!
//!   K_{n,k}(t) = (1/2π) ∫_{−π}^{π} e^{−itφ₀(θ)} e^{−i(k−n)θ} Y_{n,k}(θ) dθ,
//!   Y_{n,k} = h⁺_k h⁻_n T,  n ≤ k,
//!
//! and symmetric in (n, k). Three routes evaluate it: the integral as written,
//! a case split through the scattering relation, and an integrated-by-parts
//! form valid for non-resonant potentials.

mod oracle;
mod strip;
mod wave;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, bessel_j_all};
use crate::error::{Error, Result};
use crate::jost::{propagate, Window};
use crate::oscillatory::{adaptive_rule, oscillatory_integral, PhaseFunction, PhaseKind, QuadMode};
use crate::potential::Potential;
use crate::scattering::{
    is_generic, resonance_tolerance, wronskian, wronskian_derivative, ScatteringPoint,
};
use crate::spectral::{Side, SpectralPoint, C64, I};

pub use oracle::{
    causality_margin, finite_lattice_propagator, oracle_half_width, LatticeOracle, SpectralFilter,
};
pub use strip::{wave_fft_size, Base, FarField, IbpStrip, SchrodingerBases, WaveBases};
pub use wave::{
    free_wave12_row, free_wave_kernels, wave12_matrix, wave_kernel_12, wave_reference_halves,
    wave_resolvent_entries, WaveBlock,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    SchrodingerFree,
    SchrodingerPc,
    Wave12Free,
    WavePcEntry { i: u8, j: u8 },
    Oracle,
}

/// K_{n,k} at one time over a row set × column set (both strictly increasing).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelMatrix {
    pub kind: KernelKind,
    pub t: f64,
    pub rows: Vec<i64>,
    pub cols: Vec<i64>,
    /// Row-major.
    pub values: Vec<C64>,
    pub method: BTreeMap<String, String>,
}

fn strictly_increasing(v: &[i64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl KernelMatrix {
    pub fn new(kind: KernelKind, t: f64, rows: Vec<i64>, cols: Vec<i64>, values: Vec<C64>) -> Self {
        assert!(
            strictly_increasing(&rows) && strictly_increasing(&cols),
            "indices must increase"
        );
        assert_eq!(values.len(), rows.len() * cols.len(), "shape mismatch");
        KernelMatrix {
            kind,
            t,
            rows,
            cols,
            values,
            method: BTreeMap::new(),
        }
    }

    /// Fills every entry in parallel.
    pub fn try_from_fn(
        kind: KernelKind,
        t: f64,
        rows: Vec<i64>,
        cols: Vec<i64>,
        f: impl Fn(i64, i64) -> Result<C64> + Sync,
    ) -> Result<Self> {
        let nc = cols.len();
        let values = (0..rows.len() * nc)
            .into_par_iter()
            .map(|idx| f(rows[idx / nc], cols[idx % nc]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(kind, t, rows, cols, values))
    }

    pub fn square(kind: KernelKind, t: f64, window: Window, values: Vec<C64>) -> Self {
        let idx: Vec<i64> = window.iter().collect();
        Self::new(kind, t, idx.clone(), idx, values)
    }

    pub fn with_method(mut self, key: &str, value: impl ToString) -> Self {
        self.method.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.cols.len() + j]
    }

    pub fn entry(&self, n: i64, k: i64) -> Option<C64> {
        let i = self.rows.binary_search(&n).ok()?;
        let j = self.cols.binary_search(&k).ok()?;
        Some(self.get(i, j))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, C64)> + '_ {
        let nc = self.cols.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(idx, v)| (self.rows[idx / nc], self.cols[idx % nc], *v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |A − B| over a common index layout.
    pub fn max_abs_diff(&self, other: &KernelMatrix) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidInput(
                "kernel matrices cover different index sets".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// max |K_{n,k} − K_{k,n}| over pairs present in both orders.
    pub fn symmetry_defect(&self) -> f64 {
        self.iter()
            .filter_map(|(n, k, v)| self.entry(k, n).map(|w| (v - w).norm()))
            .fold(0.0, f64::max)
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows.len(), self.cols.len(), &self.values)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.to_dmatrix()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Restriction to a square window contained in both index sets.
    pub fn restrict(&self, window: Window) -> Result<KernelMatrix> {
        let idx: Vec<i64> = window.iter().collect();
        let values = idx
            .iter()
            .flat_map(|n| idx.iter().map(move |k| (*n, *k)))
            .map(|(n, k)| {
                self.entry(n, k).ok_or_else(|| {
                    Error::InvalidInput(format!("entry ({n}, {k}) outside the kernel"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = KernelMatrix::new(self.kind, self.t, idx.clone(), idx, values);
        out.method = self.method.clone();
        Ok(out)
    }

    /// Lines `n,k,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,k,re,im\n");
        for (n, k, v) in self.iter() {
            let _ = writeln!(s, "{n},{k},{:.17e},{:.17e}", v.re, v.im);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    CaseSplit,
    Ibp,
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "direct" => Ok(Route::Direct),
            "case_split" | "case-split" => Ok(Route::CaseSplit),
            "ibp" => Ok(Route::Ibp),
            other => Err(Error::Config(format!("unknown route `{other}`"))),
        }
    }
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::CaseSplit => "case_split",
            Route::Ibp => "ibp",
        })
    }
}

/// i^m.
pub(crate) fn i_pow(m: u64) -> C64 {
    match m % 4 {
        0 => C64::new(1.0, 0.0),
        1 => I,
        2 => C64::new(-1.0, 0.0),
        _ => -I,
    }
}

pub(crate) fn z_of(theta: f64) -> C64 {
    C64::from_polar(1.0, -theta)
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(format!(
            "time t = {t} must be finite and ≥ 0"
        )));
    }
    Ok(())
}

/// e^{i(−2t + (π/2)|n−k|)} J_{|n−k|}(2t).
pub fn free_schrodinger_kernel(n: i64, k: i64, t: f64) -> C64 {
    let m = (n - k).unsigned_abs();
    C64::from_polar(1.0, -2.0 * t) * i_pow(m) * bessel_j(m as u32, 2.0 * t)
}

/// Free kernel over rows × cols with one Bessel sweep.
pub fn free_schrodinger_matrix(rows: Vec<i64>, cols: Vec<i64>, t: f64) -> KernelMatrix {
    let span = |v: &[i64]| {
        (
            v.first().copied().unwrap_or(0),
            v.last().copied().unwrap_or(0),
        )
    };
    let (r0, r1) = span(&rows);
    let (c0, c1) = span(&cols);
    let mmax = (r1 - c0).abs().max((c1 - r0).abs()) as usize;
    let j = bessel_j_all(mmax, 2.0 * t);
    let e = C64::from_polar(1.0, -2.0 * t);
    let values = rows
        .iter()
        .flat_map(|n| cols.iter().map(move |k| (n - k).unsigned_abs()))
        .map(|m| e * i_pow(m) * j[m as usize])
        .collect();
    KernelMatrix::new(KernelKind::SchrodingerFree, t, rows, cols, values)
        .with_method("route", "bessel_closed_form")
}

/// h±_n(θ) at a single site.
pub(crate) fn h_at(q: &Potential, z: C64, side: Side, n: i64) -> C64 {
    propagate(q, z, side, Window::new(n, n), 0).h[0]
}

/// T(θ), with the interior limit at a resonant edge.
pub(crate) fn transmission(q: &Potential, theta: f64) -> C64 {
    if q.is_zero() {
        return C64::new(1.0, 0.0);
    }
    let w = wronskian(q, &SpectralPoint::real(theta)).expect("real angle is on the circle");
    if theta.sin().abs() < 1e-14 && w.norm() < resonance_tolerance(q) {
        return ScatteringPoint::new(q, theta).t;
    }
    2.0 * I * theta.sin() / w
}

/// ∫_{−π}^{π} e^{−itφ(θ)} e^{−imθ} f(θ) dθ with φ of the given kind: adaptive
/// quadrature on the shifted phase for t ≥ 1, oracle quadrature below.
pub(crate) fn shifted_integral(
    kind: PhaseKind,
    m: i64,
    t: f64,
    f: &(dyn Fn(f64) -> C64 + Sync),
) -> Result<C64> {
    check_time(t)?;
    if t >= 1.0 {
        let phase = PhaseFunction {
            kind,
            v: m as f64 / t,
        };
        oscillatory_integral(&phase, f, t, QuadMode::Adaptive)
    } else {
        let phase = PhaseFunction { kind, v: 0.0 };
        let g = |th: f64| f(th) * C64::from_polar(1.0, -(m as f64) * th);
        oscillatory_integral(&phase, &g, t, QuadMode::Oracle)
    }
}

fn direct_entry(q: &Potential, n: i64, k: i64, t: f64) -> Result<C64> {
    let (n, k) = (n.min(k), n.max(k));
    let y = |th: f64| {
        let z = z_of(th);
        h_at(q, z, Side::Plus, k) * h_at(q, z, Side::Minus, n) * transmission(q, th)
    };
    Ok(shifted_integral(PhaseKind::Schrodinger, k - n, t, &y)? / (2.0 * PI))
}

fn case_split_entry(q: &Potential, n: i64, k: i64, t: f64) -> Result<C64> {
    let (n, k) = (n.min(k), n.max(k));
    let s = PhaseKind::Schrodinger;
    let (refl, free) = if k <= 0 {
        // T f⁺_k = R⁻ f⁻_k + f⁻_k(−θ).
        let refl = move |th: f64| {
            let z = z_of(th);
            h_at(q, z, Side::Minus, n)
                * h_at(q, z, Side::Minus, k)
                * ScatteringPoint::new(q, th).r_minus
        };
        let free =
            move |th: f64| h_at(q, z_of(th), Side::Minus, n) * h_at(q, z_of(-th), Side::Minus, k);
        (
            shifted_integral(s, -(n + k), t, &refl)?,
            shifted_integral(s, k - n, t, &free)?,
        )
    } else if n >= 0 {
        // T f⁻_n = R⁺ f⁺_n + f⁺_n(−θ).
        let refl = move |th: f64| {
            let z = z_of(th);
            h_at(q, z, Side::Plus, k)
                * h_at(q, z, Side::Plus, n)
                * ScatteringPoint::new(q, th).r_plus
        };
        let free =
            move |th: f64| h_at(q, z_of(th), Side::Plus, k) * h_at(q, z_of(-th), Side::Plus, n);
        (
            shifted_integral(s, k + n, t, &refl)?,
            shifted_integral(s, k - n, t, &free)?,
        )
    } else {
        return direct_entry(q, n, k, t);
    };
    Ok((refl + free) / (2.0 * PI))
}

/// The integrated-by-parts amplitude ∓i(k−n)Z/sinθ − Z cosθ/sin²θ + Z'/sinθ
/// with Z = |T|² h±_k(θ) h±_n(−θ), written through |T|² = 4sin²θ/|W|² so
/// that every term is regular.
fn ibp_amplitude(q: &Potential, n: i64, k: i64, side: Side, th: f64) -> C64 {
    let z = z_of(th);
    let (hk, dhk, _) = propagate(q, z, side, Window::new(k, k), 1).at(k);
    // Evaluating at conj z gives h(−θ) and its derivative in its own angle.
    let (hn, dhn, _) = propagate(q, z.conj(), side, Window::new(n, n), 1).at(n);
    let h = hk * hn;
    let dh = dhk * hn - hk * dhn;
    let w = wronskian(q, &SpectralPoint::real(th)).expect("real angle is on the circle");
    let dw = wronskian_derivative(q, th);
    let w2 = w.norm_sqr();
    let dw2 = 2.0 * (w.conj() * dw).re;
    let (s, c) = th.sin_cos();
    let z_sin = 4.0 * s * h / w2;
    let z_sin2 = 4.0 * h / w2;
    let dz_sin = 8.0 * c * h / w2 + 4.0 * s * (dh / w2 - h * dw2 / (w2 * w2));
    -I * side.sign() * (k - n) as f64 * z_sin - c * z_sin2 + dz_sin
}

fn ibp_entry(q: &Potential, n: i64, k: i64, t: f64) -> Result<C64> {
    if t <= 0.0 {
        return Err(Error::InvalidInput(
            "the integrated-by-parts route needs t > 0".into(),
        ));
    }
    require_generic(q)?;
    let mut total = C64::new(0.0, 0.0);
    for side in [Side::Plus, Side::Minus] {
        let amp = |th: f64| ibp_amplitude(q, n, k, side, th);
        total += shifted_integral(
            PhaseKind::Schrodinger,
            side.sign() as i64 * (k - n),
            t,
            &amp,
        )?;
    }
    Ok(-I / (8.0 * PI * t) * total)
}

pub(crate) fn require_generic(q: &Potential) -> Result<()> {
    if !is_generic(q) {
        return Err(Error::Resonant(format!(
            "potential `{}` has W = 0 at a band edge; the integrated-by-parts kernel needs a non-resonant q",
            q.name()
        )));
    }
    Ok(())
}

/// One entry of e^{−itH}P_c.
pub fn perturbed_schrodinger_kernel(
    q: &Potential,
    n: i64,
    k: i64,
    t: f64,
    route: Route,
) -> Result<C64> {
    check_time(t)?;
    match route {
        Route::Direct => direct_entry(q, n, k, t),
        Route::CaseSplit => case_split_entry(q, n, k, t),
        Route::Ibp => ibp_entry(q, n, k, t),
    }
}

/// e^{−itH}P_c over a square window. The direct route shares one quadrature
/// rule per diagonal k − n and evaluates the Jost columns once per node.
pub fn perturbed_schrodinger_matrix(
    q: &Potential,
    window: Window,
    t: f64,
    route: Route,
) -> Result<KernelMatrix> {
    check_time(t)?;
    let idx: Vec<i64> = window.iter().collect();
    let km = if route == Route::Direct && t >= 1.0 {
        direct_matrix(q, window, t)?
    } else {
        let upper = KernelMatrix::try_from_fn(
            KernelKind::SchrodingerPc,
            t,
            idx.clone(),
            idx.clone(),
            |n, k| {
                if n <= k {
                    perturbed_schrodinger_kernel(q, n, k, t, route)
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
        KernelMatrix::square(KernelKind::SchrodingerPc, t, window, values)
    };
    Ok(km
        .with_method("route", route)
        .with_method("potential", q.name())
        .with_method("quadrature", if t >= 1.0 { "adaptive" } else { "oracle" }))
}

fn direct_matrix(q: &Potential, window: Window, t: f64) -> Result<KernelMatrix> {
    let len = window.len();
    let diagonals: Vec<Vec<C64>> = (0..len)
        .into_par_iter()
        .map(|m| {
            let phase = PhaseFunction::schrodinger(m as f64 / t);
            let rule = adaptive_rule(&phase, t, -PI, PI);
            let rows = Window::new(window.lo, window.hi - m as i64);
            let cols = Window::new(window.lo + m as i64, window.hi);
            let mut acc = vec![C64::new(0.0, 0.0); len - m];
            for (th, w) in rule.nodes.iter().zip(&rule.weights) {
                let z = z_of(*th);
                let e = *w * (-I * t * phase.value(*th)).exp() * transmission(q, *th);
                let hp = propagate(q, z, Side::Plus, cols, 0).h;
                let hm = propagate(q, z, Side::Minus, rows, 0).h;
                for (a, (p, mm)) in acc.iter_mut().zip(hp.iter().zip(&hm)) {
                    *a += e * p * mm;
                }
            }
            acc.into_iter().map(|v| v / (2.0 * PI)).collect()
        })
        .collect();
    let mut values = vec![C64::new(0.0, 0.0); len * len];
    for (m, diag) in diagonals.iter().enumerate() {
        for (i, v) in diag.iter().enumerate() {
            values[i * len + i + m] = *v;
            values[(i + m) * len + i] = *v;
        }
    }
    Ok(KernelMatrix::square(
        KernelKind::SchrodingerPc,
        t,
        window,
        values,
    ))
}
