//! Wronskians, transmission and reflection coefficients, resonances, bound
//! states and resolvent kernels.
//!
//! Conventions: W = f⁺₀f⁻₁ − f⁺₁f⁻₀, W±(θ) = W(f∓(θ), f±(−θ)),
//! T = 2i sinθ/W, R± = ±W±/W, so that T f±_m = R∓ f∓_m + f∓_m(−θ).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::fourier::FourierSeries;
use crate::jost::{jost_f, jost_h, propagate, zpow, Window};
use crate::potential::Potential;
use crate::spectral::{Side, SpectralPoint, ThetaGrid, C64, I};

/// Smallest |z| and largest 1 − |z| resolved by the bound-state scan.
pub const EDGE_TOL: f64 = 1e-8;
const SCAN_POINTS: usize = 10_000;
const BISECT_TOL: f64 = 1e-12;

/// Resonance threshold 1e−8 (1 + ‖q‖_{ℓ¹₁}).
pub fn resonance_tolerance(q: &Potential) -> f64 {
    1e-8 * (1.0 + q.weighted_l1(1.0))
}

/// (h⁺₀, h⁺₁, h⁻₀, h⁻₁) at z.
fn local_h(q: &Potential, z: C64) -> [C64; 4] {
    let p = propagate(q, z, Side::Plus, Window::new(0, 1), 0).h;
    let m = propagate(q, z, Side::Minus, Window::new(0, 1), 0).h;
    [p[0], p[1], m[0], m[1]]
}

/// z·W(z) = h⁺₀h⁻₁ − z²h⁺₁h⁻₀, a polynomial in z for finite support.
pub fn z_wronskian(q: &Potential, z: C64) -> C64 {
    let [p0, p1, m0, m1] = local_h(q, z);
    p0 * m1 - z * z * p1 * m0
}

/// W = f⁺₀f⁻₁ − f⁺₁f⁻₀ at a point of the closed disk.
pub fn wronskian(q: &Potential, point: &SpectralPoint) -> Result<C64> {
    if point.z.norm() > 1.0 + 1e-12 {
        return Err(Error::OutsideDisk {
            z_abs: point.z.norm(),
        });
    }
    let z = point.z;
    let [p0, p1, m0, m1] = local_h(q, z);
    Ok(p0 * m1 / z - z * p1 * m0)
}

/// f⁺_n f⁻_{n+1} − f⁺_{n+1} f⁻_n, which is independent of n.
pub fn wronskian_at_site(q: &Potential, point: &SpectralPoint, n: i64) -> Result<C64> {
    let w = Window::new(n, n + 1);
    let fp = jost_f(&jost_h(q, point, Side::Plus, w)?);
    let fm = jost_f(&jost_h(q, point, Side::Minus, w)?);
    Ok(fp[0] * fm[1] - fp[1] * fm[0])
}

/// ∂_θ W at real θ, from the propagated derivatives of h±.
pub fn wronskian_derivative(q: &Potential, theta: f64) -> C64 {
    let z = C64::from_polar(1.0, -theta);
    let dz = -I * z;
    let p = propagate(q, z, Side::Plus, Window::new(0, 1), 1);
    let m = propagate(q, z, Side::Minus, Window::new(0, 1), 1);
    // W = h⁺₀h⁻₁/z − z h⁺₁h⁻₀; d(1/z)/dθ = i/z.
    let a = p.h[0] * m.h[1];
    let da = p.dh[0] * m.h[1] + p.h[0] * m.dh[1];
    let b = p.h[1] * m.h[0];
    let db = p.dh[1] * m.h[0] + p.h[1] * m.dh[0];
    I / z * a + da / z - dz * b - z * db
}

/// W±(θ) = f∓₀(θ)f±₁(−θ) − f∓₁(θ)f±₀(−θ) for real θ.
pub fn wronskian_pm(q: &Potential, theta: f64, side: Side) -> C64 {
    let z = C64::from_polar(1.0, -theta);
    let zr = z.conj();
    let here = propagate(q, z, side.flip(), Window::new(0, 1), 0).h;
    let there = propagate(q, zr, side, Window::new(0, 1), 0).h;
    // f∓_n(θ) = z^{∓n}h∓_n(θ); f±_n(−θ) = z̄^{±n}h±_n(−θ).
    let (f0, f1) = match side.flip() {
        Side::Plus => (here[0], z * here[1]),
        Side::Minus => (here[0], here[1] / z),
    };
    let (g0, g1) = match side {
        Side::Plus => (there[0], zr * there[1]),
        Side::Minus => (there[0], there[1] / zr),
    };
    f0 * g1 - f1 * g0
}

/// ∂_θ W±(θ) for real θ, from the propagated derivatives of h∓(θ) and h±(−θ).
pub fn wronskian_pm_derivative(q: &Potential, theta: f64, side: Side) -> C64 {
    let z = C64::from_polar(1.0, -theta);
    let zr = z.conj();
    let here = propagate(q, z, side.flip(), Window::new(0, 1), 1);
    let there = propagate(q, zr, side, Window::new(0, 1), 1);
    // d/dθ [h(−θ)] = −(∂h)(−θ); dz/dθ = −iz, dz̄/dθ = iz̄.
    let (h, dh) = (here.h, here.dh);
    let (k, dk) = (there.h, there.dh.iter().map(|v| -v).collect::<Vec<_>>());
    let ((f0, df0), (f1, df1)) = match side.flip() {
        Side::Plus => ((h[0], dh[0]), (z * h[1], -I * z * h[1] + z * dh[1])),
        Side::Minus => ((h[0], dh[0]), (h[1] / z, I / z * h[1] + dh[1] / z)),
    };
    let ((g0, dg0), (g1, dg1)) = match side {
        Side::Plus => ((k[0], dk[0]), (zr * k[1], I * zr * k[1] + zr * dk[1])),
        Side::Minus => ((k[0], dk[0]), (k[1] / zr, -I / zr * k[1] + dk[1] / zr)),
    };
    df0 * g1 + f0 * dg1 - df1 * g0 - f1 * dg0
}

/// W, W±, T, R± at one real angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPoint {
    pub theta: f64,
    pub w: C64,
    pub w_plus: C64,
    pub w_minus: C64,
    pub t: C64,
    pub r_plus: C64,
    pub r_minus: C64,
}

impl ScatteringPoint {
    /// Direct evaluation; at an edge with W = 0 the quotients are NaN.
    pub fn raw(q: &Potential, theta: f64) -> Self {
        let w = wronskian(q, &SpectralPoint::real(theta)).expect("real angle is on the circle");
        let w_plus = wronskian_pm(q, theta, Side::Plus);
        let w_minus = wronskian_pm(q, theta, Side::Minus);
        let s = 2.0 * I * theta.sin();
        ScatteringPoint {
            theta,
            w,
            w_plus,
            w_minus,
            t: s / w,
            r_plus: w_plus / w,
            r_minus: -w_minus / w,
        }
    }

    /// As [`raw`](Self::raw), replacing T and R± by their limits at a band
    /// edge where |W| is below the resonance tolerance: quotients of
    /// θ-derivatives when W' ≠ 0 there, Neville extrapolation otherwise.
    pub fn new(q: &Potential, theta: f64) -> Self {
        let mut p = Self::raw(q, theta);
        if is_edge(theta) && p.w.norm() < resonance_tolerance(q) {
            let dw = wronskian_derivative(q, theta);
            if dw.norm() > resonance_tolerance(q) {
                p.t = 2.0 * I * theta.cos() / dw;
                p.r_plus = wronskian_pm_derivative(q, theta, Side::Plus) / dw;
                p.r_minus = -wronskian_pm_derivative(q, theta, Side::Minus) / dw;
                return p;
            }
            let dir = if theta > -PI / 2.0 && theta < PI / 2.0 {
                1.0
            } else {
                -1.0
            };
            let dir = if theta <= -PI + 1e-15 { 1.0 } else { dir };
            p.t = edge_limit(|x| Self::raw(q, x).t, theta, dir);
            p.r_plus = edge_limit(|x| Self::raw(q, x).r_plus, theta, dir);
            p.r_minus = edge_limit(|x| Self::raw(q, x).r_minus, theta, dir);
        }
        p
    }
}

fn is_edge(theta: f64) -> bool {
    theta.sin().abs() < 1e-14
}

/// lim_{h→0+} f(θ₀ + dir·h) by Neville extrapolation from h = 0.05·2^{−j}.
pub fn edge_limit(f: impl Fn(f64) -> C64, theta0: f64, dir: f64) -> C64 {
    const LEVELS: usize = 7;
    let hs: Vec<f64> = (0..LEVELS).map(|j| 0.05 / 2f64.powi(j as i32)).collect();
    let mut p: Vec<C64> = hs.iter().map(|h| f(theta0 + dir * h)).collect();
    for k in 1..LEVELS {
        for i in 0..LEVELS - k {
            p[i] = (hs[i + k] * p[i] - hs[i] * p[i + 1]) / (hs[i + k] - hs[i]);
        }
    }
    p[0]
}

/// Edge diagnostics of W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlag {
    pub resonant: bool,
    pub w_abs: f64,
}

/// Scattering data sampled on a θ-grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringData {
    pub theta_grid: Vec<f64>,
    pub w: Vec<C64>,
    pub w_plus: Vec<C64>,
    pub w_minus: Vec<C64>,
    pub t: Vec<C64>,
    pub r_plus: Vec<C64>,
    pub r_minus: Vec<C64>,
    pub resonant_at_0: EdgeFlag,
    pub resonant_at_4: EdgeFlag,
}

impl ScatteringData {
    pub fn compute(q: &Potential, grid: &ThetaGrid) -> Self {
        let thetas = grid.nodes();
        let pts: Vec<ScatteringPoint> = thetas
            .par_iter()
            .map(|t| ScatteringPoint::new(q, *t))
            .collect();
        ScatteringData {
            w: pts.iter().map(|p| p.w).collect(),
            w_plus: pts.iter().map(|p| p.w_plus).collect(),
            w_minus: pts.iter().map(|p| p.w_minus).collect(),
            t: pts.iter().map(|p| p.t).collect(),
            r_plus: pts.iter().map(|p| p.r_plus).collect(),
            r_minus: pts.iter().map(|p| p.r_minus).collect(),
            resonant_at_0: detect_resonance(q, Edge::Zero).flag,
            resonant_at_4: detect_resonance(q, Edge::Four).flag,
            theta_grid: thetas,
        }
    }

    pub fn reflection(&self, side: Side) -> &[C64] {
        match side {
            Side::Plus => &self.r_plus,
            Side::Minus => &self.r_minus,
        }
    }

    /// max over the grid of ||T|² + |R±|² − 1| for both signs.
    pub fn unitarity_defect(&self) -> f64 {
        self.t
            .iter()
            .zip(self.r_plus.iter().zip(&self.r_minus))
            .map(|(t, (rp, rm))| {
                let a = (t.norm_sqr() + rp.norm_sqr() - 1.0).abs();
                let b = (t.norm_sqr() + rm.norm_sqr() - 1.0).abs();
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    /// max over the grid of |T conj(R⁻) + conj(T) R⁺|.
    pub fn consistency_defect(&self) -> f64 {
        self.t
            .iter()
            .zip(self.r_plus.iter().zip(&self.r_minus))
            .map(|(t, (rp, rm))| (t * rm.conj() + t.conj() * rp).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_t(&self) -> f64 {
        self.t.iter().map(|t| t.norm()).fold(0.0, f64::max)
    }

    /// CSV rows θ, Re/Im of W, T, R⁺, R⁻.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("theta,re_w,im_w,re_t,im_t,re_rplus,im_rplus,re_rminus,im_rminus\n");
        for i in 0..self.theta_grid.len() {
            let row = [self.w[i], self.t[i], self.r_plus[i], self.r_minus[i]];
            s.push_str(&format!("{:.17e}", self.theta_grid[i]));
            for v in row {
                s.push_str(&format!(",{:.17e},{:.17e}", v.re, v.im));
            }
            s.push('\n');
        }
        s
    }
}

/// max over m of |T f±_m − R∓ f∓_m − f∓_m(−θ)| for both signs.
pub fn check_scattering_relation(q: &Potential, theta: f64, m_range: Window) -> f64 {
    let sp = ScatteringPoint::new(q, theta);
    let here = SpectralPoint::real(theta);
    let there = SpectralPoint::real(-theta);
    let col = |p: &SpectralPoint, side| jost_f(&jost_h(q, p, side, m_range).expect("real angle"));
    let (fp, fm) = (col(&here, Side::Plus), col(&here, Side::Minus));
    let (gp, gm) = (col(&there, Side::Plus), col(&there, Side::Minus));
    (0..m_range.len())
        .map(|i| {
            let a = (sp.t * fp[i] - sp.r_minus * fm[i] - gm[i]).norm();
            let b = (sp.t * fm[i] - sp.r_plus * fp[i] - gp[i]).norm();
            a.max(b)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    /// ω = 0, θ = 0, z = 1.
    Zero,
    /// ω = 4, θ = π, z = −1.
    Four,
}

impl Edge {
    pub fn theta(self) -> f64 {
        match self {
            Edge::Zero => 0.0,
            Edge::Four => PI,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Resonance {
    pub edge: Edge,
    pub flag: EdgeFlag,
    pub tolerance: f64,
    /// The bounded edge solution f⁺_n on `witness_window` when resonant.
    pub witness: Option<Vec<f64>>,
    pub witness_window: Window,
}

/// Flags a resonance at ω ∈ {0, 4} by |W(edge)| < tol_res.
pub fn detect_resonance(q: &Potential, edge: Edge) -> Resonance {
    let tolerance = resonance_tolerance(q);
    let point = SpectralPoint::real(edge.theta());
    let w_abs = wronskian(q, &point).expect("edge is on the circle").norm();
    let resonant = w_abs < tolerance;
    let witness_window = match q.support() {
        Some((a, b)) => Window::new(a - 10, b + 10),
        None => Window::symmetric(10),
    };
    let witness = resonant.then(|| {
        jost_f(&jost_h(q, &point, Side::Plus, witness_window).expect("edge is on the circle"))
            .into_iter()
            .map(|v| v.re)
            .collect()
    });
    Resonance {
        edge,
        flag: EdgeFlag { resonant, w_abs },
        tolerance,
        witness,
        witness_window,
    }
}

/// Non-resonant at both edges.
pub fn is_generic(q: &Potential) -> bool {
    !detect_resonance(q, Edge::Zero).flag.resonant && !detect_resonance(q, Edge::Four).flag.resonant
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub z: f64,
    pub omega: f64,
    pub wronskian_residual: f64,
}

fn zw_real(q: &Potential, z: f64) -> f64 {
    z_wronskian(q, C64::new(z, 0.0)).re
}

/// Real zeros of W in (−1, 0) ∪ (0, 1), i.e. eigenvalues 2 − z − 1/z.
pub fn bound_states(q: &Potential) -> Result<Vec<BoundState>> {
    if q.is_zero() {
        return Ok(Vec::new());
    }
    // Uniform scan plus a geometric refinement toward both edges.
    let mut nodes: Vec<f64> = (0..=SCAN_POINTS)
        .map(|j| j as f64 / SCAN_POINTS as f64)
        .collect();
    nodes.extend((5..=12).map(|k| 1.0 - 10f64.powi(-k)));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let mut out = Vec::new();
    for sign in [-1.0, 1.0] {
        let xs: Vec<f64> = nodes.iter().map(|x| sign * x).collect();
        let vals: Vec<f64> = xs.iter().map(|x| zw_real(q, *x)).collect();
        for i in 0..xs.len() - 1 {
            let (a, b) = (xs[i], xs[i + 1]);
            let (fa, fb) = (vals[i], vals[i + 1]);
            if fa == 0.0 && a != 0.0 && a.abs() < 1.0 {
                out.push(a);
                continue;
            }
            if fa * fb >= 0.0 {
                continue;
            }
            let root = bisect(|x| zw_real(q, x), a, b, fa);
            if 1.0 - root.abs() < EDGE_TOL {
                return Err(Error::EdgeAmbiguity {
                    z: root,
                    tol: EDGE_TOL,
                });
            }
            out.push(root);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out
        .into_iter()
        .map(|z| BoundState {
            z,
            omega: 2.0 - z - 1.0 / z,
            wronskian_residual: (z_wronskian(q, C64::new(z, 0.0)) / z).norm(),
        })
        .collect())
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while (b - a).abs() > BISECT_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Kernel of (H − ω)^{−1}: f⁺_max(n,k) f⁻_min(n,k) / W at the disk point.
fn kernel_at(q: &Potential, point: &SpectralPoint, n: i64, k: i64) -> Result<C64> {
    let (lo, hi) = (n.min(k), n.max(k));
    let w = wronskian(q, point)?;
    let fp = jost_h(q, point, Side::Plus, Window::new(hi, hi))?.h[0] * zpow(point.z, hi);
    let fm = jost_h(q, point, Side::Minus, Window::new(lo, lo))?.h[0] * zpow(point.z, -lo);
    Ok(fp * fm / w)
}

/// Resolvent kernel R(ω)_{n,k} for ω off the spectrum.
pub fn resolvent_kernel(q: &Potential, omega: C64, n: i64, k: i64) -> Result<C64> {
    let tol = 1e-10;
    if omega.im.abs() < tol && omega.re > -tol && omega.re < 4.0 + tol {
        return Err(Error::OnSpectrum {
            omega: omega.to_string(),
            tol,
        });
    }
    if omega.im.abs() < tol {
        for b in bound_states(q)? {
            if (b.omega - omega.re).abs() < 1e-9 {
                return Err(Error::OnSpectrum {
                    omega: omega.to_string(),
                    tol: 1e-9,
                });
            }
        }
    }
    let point = SpectralPoint::from_omega(omega, Side::Plus)?;
    kernel_at(q, &point, n, k)
}

/// Column R(ω)_{·,k} over a window.
pub fn resolvent_column(q: &Potential, omega: C64, k: i64, window: Window) -> Result<Vec<C64>> {
    window
        .iter()
        .map(|n| resolvent_kernel(q, omega, n, k))
        .collect()
}

/// Boundary values R(ω ± i0)_{n,k} for ω inside the band, using θ±(ω).
pub fn boundary_resolvent_kernel(
    q: &Potential,
    omega: f64,
    side: Side,
    n: i64,
    k: i64,
) -> Result<C64> {
    let tol = 1e-12;
    if !(omega > tol && omega < 4.0 - tol) {
        return Err(Error::OnSpectrum {
            omega: format!("{omega} (band edge or outside the band interior)"),
            tol,
        });
    }
    let point = SpectralPoint::from_omega(C64::new(omega, 0.0), side)?;
    kernel_at(q, &point, n, k)
}

/// ℓ¹ tails Σ_{|m|>M} of the Fourier coefficients of T and R± on the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WienerTails {
    pub cutoffs: Vec<usize>,
    pub t: Vec<f64>,
    pub r_plus: Vec<f64>,
    pub r_minus: Vec<f64>,
    /// Tails after discarding coefficients below ROUNDOFF_FLOOR times the
    /// largest coefficient of T, R⁺, R⁻.
    pub t_resolved: Vec<f64>,
    pub r_plus_resolved: Vec<f64>,
    pub r_minus_resolved: Vec<f64>,
}

/// Relative coefficient size treated as roundoff in [`wiener_tails`].
pub const ROUNDOFF_FLOOR: f64 = 1e-15;

pub fn wiener_tails(data: &ScatteringData, cutoffs: &[usize]) -> WienerTails {
    let series = [&data.t, &data.r_plus, &data.r_minus].map(|v| FourierSeries::from_samples(v));
    let raw = |s: &FourierSeries| {
        cutoffs
            .iter()
            .map(|m| s.tail(*m as i64))
            .collect::<Vec<_>>()
    };
    // T and R± share one scale (|T|² + |R±|² = 1), so the floor is taken
    // relative to the largest coefficient of the three.
    let floor = ROUNDOFF_FLOOR * series.iter().map(|s| s.max_abs()).fold(0.0, f64::max);
    let res = |s: &FourierSeries| {
        cutoffs
            .iter()
            .map(|m| s.tail_above(*m as i64, floor))
            .collect::<Vec<_>>()
    };
    WienerTails {
        cutoffs: cutoffs.to_vec(),
        t: raw(&series[0]),
        r_plus: raw(&series[1]),
        r_minus: raw(&series[2]),
        t_resolved: res(&series[0]),
        r_plus_resolved: res(&series[1]),
        r_minus_resolved: res(&series[2]),
    }
}

/// Which family of Wiener norms to track in [`wiener_growth`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthKind {
    /// ‖T h±_m / sinθ‖, with T/sinθ = 2i/W.
    TOverSin,
    /// ‖∂_θ (T h±_m)‖.
    DerivativeOfTh,
}

/// Wiener norms over m and the fitted exponent of their growth in 1 + |m|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Growth {
    pub m: Vec<i64>,
    pub norms: Vec<f64>,
    pub exponent: f64,
}

/// Growth of Wiener norms of T h±_m-type amplitudes for a non-resonant q.
pub fn wiener_growth(
    q: &Potential,
    side: Side,
    m_range: Window,
    grid: &ThetaGrid,
    kind: GrowthKind,
) -> Result<Growth> {
    if !is_generic(q) {
        return Err(Error::Resonant(
            "Wiener growth bounds need W(0)W(π) ≠ 0".into(),
        ));
    }
    let thetas = grid.nodes();
    let per_theta: Vec<(C64, C64, Vec<C64>)> = thetas
        .par_iter()
        .map(|t| {
            let z = C64::from_polar(1.0, -t);
            let sp = ScatteringPoint::new(q, *t);
            let h = propagate(q, z, side, m_range, 0).h;
            (sp.w, sp.t, h)
        })
        .collect();
    let norms: Vec<f64> = (0..m_range.len())
        .into_par_iter()
        .map(|i| {
            let samples: Vec<C64> = per_theta
                .iter()
                .map(|(w, t, h)| match kind {
                    GrowthKind::TOverSin => 2.0 * I * h[i] / w,
                    GrowthKind::DerivativeOfTh => t * h[i],
                })
                .collect();
            let fs = FourierSeries::from_samples(&samples);
            match kind {
                GrowthKind::TOverSin => fs.l1_norm(),
                GrowthKind::DerivativeOfTh => {
                    fs.iter().map(|(m, c)| m.abs() as f64 * c.norm()).sum()
                }
            }
        })
        .collect();
    let m: Vec<i64> = m_range.iter().collect();
    let x: Vec<f64> = m.iter().map(|m| 1.0 + m.abs() as f64).collect();
    let exponent = loglog_fit(&x, &norms)?.slope;
    Ok(Growth { m, norms, exponent })
}
