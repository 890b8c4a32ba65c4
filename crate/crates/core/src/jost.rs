//! Jost solutions f±_n(θ) ~ e^{∓inθ} (n → ±∞) of Hf = ωf and their reduced
//! forms h±_n(θ) = e^{±inθ} f±_n(θ).
//!
//! With z = e^{−iθ} the recurrence f_{n+1} + f_{n−1} = (z + 1/z + q_n) f_n
//! becomes, for the + family,
//!
//! h_{n−1} = (1 + z² + z q_n) h_n − z² h_{n+1},
//!
//! which has no negative powers of z and is started from h ≡ 1 beyond the
//! support. The − family is the mirror image. θ-derivatives are propagated
//! through the same recurrence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::potential::Potential;
use crate::spectral::{Side, SpectralPoint, ThetaGrid, C64, I};

/// Distance from z = ±1 below which a point counts as near a band edge.
pub const EDGE_DELTA: f64 = 0.1;

const SA_TOL: f64 = 1e-13;
const SA_MAX_ITER: usize = 200;

/// Inclusive lattice index interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        Window { lo, hi }
    }

    pub fn symmetric(half: i64) -> Self {
        Window::new(-half, half)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.lo..=self.hi).contains(&n)
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

/// h±_n and optional θ-derivatives at one spectral point over a window.
#[derive(Debug, Clone)]
pub struct JostColumn {
    pub side: Side,
    pub point: SpectralPoint,
    pub window: Window,
    pub h: Vec<C64>,
    pub dh: Option<Vec<C64>>,
    pub d2h: Option<Vec<C64>>,
}

impl JostColumn {
    pub fn at(&self, n: i64) -> C64 {
        self.h[(n - self.window.lo) as usize]
    }

    pub fn d1_at(&self, n: i64) -> Option<C64> {
        self.dh.as_ref().map(|d| d[(n - self.window.lo) as usize])
    }

    pub fn d2_at(&self, n: i64) -> Option<C64> {
        self.d2h.as_ref().map(|d| d[(n - self.window.lo) as usize])
    }
}

/// Raw recurrence output: h, ∂h, ∂²h over a window.
#[derive(Debug, Clone)]
pub struct JostDerivs {
    pub window: Window,
    pub h: Vec<C64>,
    pub dh: Vec<C64>,
    pub d2h: Vec<C64>,
}

impl JostDerivs {
    pub fn at(&self, n: i64) -> (C64, C64, C64) {
        let i = (n - self.window.lo) as usize;
        (self.h[i], self.dh[i], self.d2h[i])
    }
}

/// h±_n(z) and its first two θ-derivatives over `window` by exact recurrence
/// from the plane-wave region. `order` limits which derivatives are computed
/// (the others are returned as zeros).
pub fn propagate(q: &Potential, z: C64, side: Side, window: Window, order: u8) -> JostDerivs {
    let len = window.len();
    let mut h = vec![C64::new(1.0, 0.0); len];
    let mut dh = vec![C64::new(0.0, 0.0); len];
    let mut d2h = vec![C64::new(0.0, 0.0); len];
    let Some((a, b)) = q.support() else {
        return JostDerivs { window, h, dh, d2h };
    };
    let z2 = z * z;
    let beta = z2;
    let dbeta = -2.0 * I * z2;
    let d2beta = -4.0 * z2;
    // (h_n, h_{n∓1}) pairs walking inward; state holds (value, d1, d2) for
    // the current site and the one already passed.
    let mut cur = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    let mut prev = cur;
    let step = |n: i64, cur: (C64, C64, C64), prev: (C64, C64, C64)| -> (C64, C64, C64) {
        let qn = q.get(n);
        let alpha = 1.0 + z2 + z * qn;
        let mut next = (
            alpha * cur.0 - beta * prev.0,
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        );
        if order >= 1 {
            let dalpha = -I * z * (2.0 * z + qn);
            next.1 = dalpha * cur.0 + alpha * cur.1 - dbeta * prev.0 - beta * prev.1;
            if order >= 2 {
                let d2alpha = -z * (4.0 * z + qn);
                next.2 = d2alpha * cur.0 + 2.0 * dalpha * cur.1 + alpha * cur.2
                    - d2beta * prev.0
                    - 2.0 * dbeta * prev.1
                    - beta * prev.2;
            }
        }
        next
    };
    match side {
        Side::Plus => {
            // h_n = 1 for n ≥ b; walk down from n = max(b, hi).
            let mut n = b.max(window.hi);
            loop {
                if window.contains(n) {
                    let i = (n - window.lo) as usize;
                    h[i] = cur.0;
                    dh[i] = cur.1;
                    d2h[i] = cur.2;
                }
                if n <= window.lo {
                    break;
                }
                let next = step(n, cur, prev);
                prev = cur;
                cur = next;
                n -= 1;
            }
        }
        Side::Minus => {
            let mut n = a.min(window.lo);
            loop {
                if window.contains(n) {
                    let i = (n - window.lo) as usize;
                    h[i] = cur.0;
                    dh[i] = cur.1;
                    d2h[i] = cur.2;
                }
                if n >= window.hi {
                    break;
                }
                let next = step(n, cur, prev);
                prev = cur;
                cur = next;
                n += 1;
            }
        }
    }
    JostDerivs { window, h, dh, d2h }
}

fn check_disk(point: &SpectralPoint) -> Result<()> {
    if point.z.norm() > 1.0 + 1e-12 {
        return Err(Error::OutsideDisk {
            z_abs: point.z.norm(),
        });
    }
    Ok(())
}

/// h±_n over `window` at a point of the closed disk.
pub fn jost_h(
    q: &Potential,
    point: &SpectralPoint,
    side: Side,
    window: Window,
) -> Result<JostColumn> {
    check_disk(point)?;
    let d = propagate(q, point.z, side, window, 0);
    Ok(JostColumn {
        side,
        point: *point,
        window,
        h: d.h,
        dh: None,
        d2h: None,
    })
}

/// f±_n = e^{∓inθ} h±_n = z^{±n} h±_n over the column's window.
pub fn jost_f(col: &JostColumn) -> Vec<C64> {
    let z = col.point.z;
    col.window
        .iter()
        .zip(&col.h)
        .map(|(n, h)| {
            let e = match col.side {
                Side::Plus => n,
                Side::Minus => -n,
            };
            zpow(z, e) * h
        })
        .collect()
}

/// z^e for integer e, with e^{−ieθ} evaluated directly on the unit circle.
pub fn zpow(z: C64, e: i64) -> C64 {
    if (z.norm() - 1.0).abs() < 1e-15 {
        C64::from_polar(1.0, z.arg() * e as f64)
    } else {
        z.powi(e as i32)
    }
}

/// Whether e^{−iθ} lies within [`EDGE_DELTA`] of ±1.
pub fn near_band_edge(z: C64) -> bool {
    (z - 1.0).norm() <= EDGE_DELTA || (z + 1.0).norm() <= EDGE_DELTA
}

/// ∂^p_θ h±_n over `window`, p ∈ {1, 2}. Near a band edge the potential must
/// certify q ∈ ℓ¹_{p+1}, elsewhere q ∈ ℓ¹_p.
pub fn jost_h_derivative(
    q: &Potential,
    theta: C64,
    side: Side,
    order: u8,
    window: Window,
) -> Result<Vec<C64>> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "derivative order {order} not in {{1, 2}}"
        )));
    }
    let point = SpectralPoint::from_theta(theta)?;
    check_disk(&point)?;
    let needed = if near_band_edge(point.z) {
        order as u32 + 1
    } else {
        order as u32
    };
    if !q.certifies(needed) {
        return Err(Error::MomentCertificate {
            needed,
            certified: q.decay_class.unwrap_or(0),
        });
    }
    let d = propagate(q, point.z, side, window, order);
    Ok(if order == 1 { d.dh } else { d.d2h })
}

/// Column with both derivatives attached.
pub fn jost_column_with_derivs(
    q: &Potential,
    point: &SpectralPoint,
    side: Side,
    window: Window,
) -> Result<JostColumn> {
    check_disk(point)?;
    let d = propagate(q, point.z, side, window, 2);
    Ok(JostColumn {
        side,
        point: *point,
        window,
        h: d.h,
        dh: Some(d.dh),
        d2h: Some(d.d2h),
    })
}

/// (z^{2k} − 1)/(z^{−1} − z), in the summed form −z Σ_{j<k} z^{2j} near z = ±1.
pub fn geometric_factor(k: usize, z: C64) -> C64 {
    if near_band_edge(z) {
        let z2 = z * z;
        let mut acc = C64::new(0.0, 0.0);
        let mut p = C64::new(1.0, 0.0);
        for _ in 0..k {
            acc += p;
            p *= z2;
        }
        -z * acc
    } else {
        (z.powi(2 * k as i32) - 1.0) / (1.0 / z - z)
    }
}

/// h±_n by Picard iteration of the Volterra equation
///
/// h⁺_n = 1 − Σ_{m>n} q_m (z^{2(m−n)} − 1)/(z^{−1} − z) h⁺_m,
///
/// the integral-equation counterpart of the recurrence (the − family by
/// mirror symmetry). Stops when the sup-norm update drops below 1e−13.
pub fn jost_h_successive(
    q: &Potential,
    point: &SpectralPoint,
    side: Side,
    window: Window,
) -> Result<JostColumn> {
    check_disk(point)?;
    let Some((a, b)) = q.support() else {
        return Ok(JostColumn {
            side,
            point: *point,
            window,
            h: vec![C64::new(1.0, 0.0); window.len()],
            dh: None,
            d2h: None,
        });
    };
    let lo = window.lo.min(a);
    let hi = window.hi.max(b);
    let span = (hi - lo + 1) as usize;
    let z = point.z;
    let kmax = span + 1;
    let g: Vec<C64> = (0..=kmax).map(|k| geometric_factor(k, z)).collect();
    let idx = |n: i64| (n - lo) as usize;
    let mut h = vec![C64::new(1.0, 0.0); span];
    let mut last = f64::INFINITY;
    for it in 1..=SA_MAX_ITER {
        let mut next = vec![C64::new(1.0, 0.0); span];
        for n in lo..=hi {
            let mut acc = C64::new(0.0, 0.0);
            match side {
                Side::Plus => {
                    for m in (n + 1).max(a)..=b {
                        acc += q.get(m) * g[(m - n) as usize] * h[idx(m)];
                    }
                }
                Side::Minus => {
                    for m in a..=(n - 1).min(b) {
                        acc += q.get(m) * g[(n - m) as usize] * h[idx(m)];
                    }
                }
            }
            next[idx(n)] = 1.0 - acc;
        }
        last = next
            .iter()
            .zip(&h)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        h = next;
        if last < SA_TOL {
            let out = window.iter().map(|n| h[idx(n)]).collect();
            return Ok(JostColumn {
                side,
                point: *point,
                window,
                h: out,
                dh: None,
                d2h: None,
            });
        }
        if !last.is_finite() {
            return Err(Error::NonConvergence {
                iterations: it,
                last_update: last,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: SA_MAX_ITER,
        last_update: last,
    })
}

/// Max over the window of |f_{n+1} + f_{n−1} − (z + 1/z + q_n) f_n|.
pub fn recurrence_residual(q: &Potential, col: &JostColumn) -> f64 {
    let f = jost_f(col);
    let z = col.point.z;
    let c = z + 1.0 / z;
    (1..col.window.len().saturating_sub(1))
        .map(|i| {
            let n = col.window.lo + i as i64;
            (f[i + 1] + f[i - 1] - (c + q.get(n)) * f[i]).norm()
        })
        .fold(0.0, f64::max)
}

/// h±_n(θ_j) (and derivatives) over a θ-grid.
#[derive(Debug, Clone)]
pub struct JostTable {
    pub side: Side,
    pub window: Window,
    pub theta_grid: Vec<f64>,
    /// h[j][i] = h_{window.lo + i}(θ_j).
    pub h: Vec<Vec<C64>>,
    pub dh: Option<Vec<Vec<C64>>>,
    pub d2h: Option<Vec<Vec<C64>>>,
}

impl JostTable {
    pub fn build(q: &Potential, side: Side, window: Window, grid: &ThetaGrid, order: u8) -> Self {
        let thetas = grid.nodes();
        let cols: Vec<JostDerivs> = thetas
            .par_iter()
            .map(|t| propagate(q, C64::from_polar(1.0, -t), side, window, order))
            .collect();
        let (mut h, mut dh, mut d2h) = (Vec::new(), Vec::new(), Vec::new());
        for c in cols {
            h.push(c.h);
            dh.push(c.dh);
            d2h.push(c.d2h);
        }
        JostTable {
            side,
            window,
            theta_grid: thetas,
            h,
            dh: (order >= 1).then_some(dh),
            d2h: (order >= 2).then_some(d2h),
        }
    }

    /// Samples of h_n over the grid.
    pub fn row(&self, n: i64) -> Vec<C64> {
        let i = (n - self.window.lo) as usize;
        self.h.iter().map(|col| col[i]).collect()
    }

    /// CSV with columns n, theta, re_h, im_h.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,theta,re_h,im_h\n");
        for (j, t) in self.theta_grid.iter().enumerate() {
            for (i, n) in self.window.iter().enumerate() {
                let v = self.h[j][i];
                s.push_str(&format!("{n},{t:.17e},{:.17e},{:.17e}\n", v.re, v.im));
            }
        }
        s
    }
}

/// Fourier coefficients of h±_n(θ) = 1 + Σ_{m≥1} B_{n,m} e^{∓imθ}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub side: Side,
    pub n: i64,
    /// b[m − 1] = B_{n,m}, m = 1..=cutoff.
    pub b: Vec<f64>,
    /// Σ of |coefficients| outside 1..=cutoff (including any spurious
    /// negative-frequency content and the deviation of the constant from 1).
    pub tail: f64,
    pub max_imag: f64,
    pub resynthesis_error: f64,
}

impl FourierCoeffs {
    pub fn get(&self, m: usize) -> f64 {
        if m == 0 || m > self.b.len() {
            0.0
        } else {
            self.b[m - 1]
        }
    }

    pub fn l1(&self) -> f64 {
        self.b.iter().map(|v| v.abs()).sum()
    }
}

/// Extracts B±_{n,m}, m = 1..=cutoff, from the discrete transform of h±_n on
/// the grid and checks that the discarded part is below `tol`.
pub fn fourier_coeffs_b(
    q: &Potential,
    side: Side,
    n: i64,
    cutoff: usize,
    grid: &ThetaGrid,
    tol: f64,
) -> Result<FourierCoeffs> {
    if cutoff as i64 > grid.len() as i64 / 2 - 1 {
        return Err(Error::InvalidInput(format!(
            "cutoff {cutoff} exceeds the grid's Nyquist index"
        )));
    }
    let thetas = grid.nodes();
    let samples: Vec<C64> = thetas
        .iter()
        .map(|t| propagate(q, C64::from_polar(1.0, -t), side, Window::new(n, n), 0).h[0])
        .collect();
    let fs = FourierSeries::from_samples(&samples);
    // Both families are polynomials in z = e^{−iθ}, so B_m sits at a_m.
    let coef = |m: i64| fs.get(m);
    let mut b = Vec::with_capacity(cutoff);
    let mut max_imag: f64 = 0.0;
    for m in 1..=cutoff as i64 {
        let c = coef(m);
        max_imag = max_imag.max(c.im.abs());
        b.push(c.re);
    }
    let mut tail = (coef(0) - 1.0).norm();
    for m in fs.min_index()..=fs.max_index() {
        if m == 0 || (1..=cutoff as i64).contains(&m) {
            continue;
        }
        tail += coef(m).norm();
    }
    let resynthesis_error = thetas
        .iter()
        .zip(&samples)
        .map(|(t, h)| {
            let approx: C64 = C64::new(1.0, 0.0)
                + b.iter()
                    .enumerate()
                    .map(|(i, v)| *v * C64::from_polar(1.0, -((i + 1) as f64) * t))
                    .sum::<C64>();
            (approx - h).norm()
        })
        .fold(0.0, f64::max);
    if tail > tol {
        return Err(Error::CutoffTooSmall { cutoff, tail, tol });
    }
    Ok(FourierCoeffs {
        side,
        n,
        b,
        tail,
        max_imag,
        resynthesis_error,
    })
}

/// Right side of the coefficient bound |B±_{n,m}| ≤ C Σ_{±k ≥ ±n + ⌊m/2⌋} |q_k|.
pub fn coefficient_bound_mass(q: &Potential, side: Side, n: i64, m: usize) -> f64 {
    let half = (m / 2) as i64;
    match side {
        Side::Plus => q.tail_mass_right(n + half),
        Side::Minus => q.tail_mass_left(n - half),
    }
}

/// sup over n in `range` of Σ_m |B±_{n,m}|, the Wiener-norm bound of h±_n − 1.
pub fn wiener_sup(q: &Potential, side: Side, range: Window, grid: &ThetaGrid) -> f64 {
    let thetas = grid.nodes();
    let cols: Vec<Vec<C64>> = thetas
        .par_iter()
        .map(|t| propagate(q, C64::from_polar(1.0, -t), side, range, 0).h)
        .collect();
    range
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let samples: Vec<C64> = cols.iter().map(|c| c[i]).collect();
            let fs = FourierSeries::from_samples(&samples);
            fs.iter()
                .filter(|(m, _)| *m != 0)
                .map(|(_, c)| c.norm())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Richardson-extrapolated central differences of h±_n in real θ, the
/// finite-difference oracle for the propagated derivatives.
pub fn finite_difference_derivative(
    q: &Potential,
    theta: f64,
    side: Side,
    order: u8,
    n: i64,
) -> C64 {
    let h_at = |t: f64| propagate(q, C64::from_polar(1.0, -t), side, Window::new(n, n), 0).h[0];
    let d = |step: f64| -> C64 {
        match order {
            1 => (h_at(theta + step) - h_at(theta - step)) / (2.0 * step),
            _ => (h_at(theta + step) - 2.0 * h_at(theta) + h_at(theta - step)) / (step * step),
        }
    };
    let base = if order == 1 { 1e-2 } else { 2e-2 };
    let mut tab: Vec<Vec<C64>> = Vec::new();
    for k in 0..5 {
        let mut row = vec![d(base / 2f64.powi(k))];
        for j in 1..=k as usize {
            let f = 4f64.powi(j as i32);
            let v = (f * row[j - 1] - tab[k as usize - 1][j - 1]) / (f - 1.0);
            row.push(v);
        }
        tab.push(row);
    }
    *tab.last().unwrap().last().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn delta() -> Potential {
        Potential::delta(0, 2.0)
    }

    #[test]
    fn free_solution_is_identically_one() {
        let p = SpectralPoint::from_theta(C64::new(0.7, -0.3)).unwrap();
        for side in [Side::Plus, Side::Minus] {
            let c = jost_h(&Potential::zero(), &p, side, Window::new(-5, 5)).unwrap();
            assert!(c.h.iter().all(|v| *v == C64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn delta_closed_forms() {
        let p = SpectralPoint::from_theta(C64::new(0.4, -0.2)).unwrap();
        let z = p.z;
        let plus = jost_h(&delta(), &p, Side::Plus, Window::new(-1, 3)).unwrap();
        assert_abs_diff_eq!((plus.at(-1) - (1.0 + 2.0 * z)).norm(), 0.0, epsilon = 1e-15);
        for n in 0..=3 {
            assert_eq!(plus.at(n), C64::new(1.0, 0.0));
        }
        let minus = jost_h(&delta(), &p, Side::Minus, Window::new(-3, 1)).unwrap();
        assert_abs_diff_eq!((minus.at(1) - (1.0 + 2.0 * z)).norm(), 0.0, epsilon = 1e-15);
        let f = jost_f(&plus);
        assert_abs_diff_eq!((f[0] - (1.0 / z + 2.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn free_plane_waves() {
        let p = SpectralPoint::real(1.1);
        let c = jost_h(&Potential::zero(), &p, Side::Plus, Window::new(-3, 3)).unwrap();
        let f = jost_f(&c);
        for (i, n) in c.window.iter().enumerate() {
            assert_abs_diff_eq!((f[i] - p.z.powi(n as i32)).norm(), 0.0, epsilon = 1e-14);
        }
        let c = jost_h(&Potential::zero(), &p, Side::Minus, Window::new(-3, 3)).unwrap();
        let f = jost_f(&c);
        for (i, n) in c.window.iter().enumerate() {
            assert_abs_diff_eq!((f[i] - p.z.powi(-n as i32)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn reality_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = Potential::random(&mut rng, -3, 7, 1.0);
        for side in [Side::Plus, Side::Minus] {
            let a = jost_h(&q, &SpectralPoint::real(0.9), side, Window::new(-8, 8)).unwrap();
            let b = jost_h(&q, &SpectralPoint::real(-0.9), side, Window::new(-8, 8)).unwrap();
            for (x, y) in a.h.iter().zip(&b.h) {
                assert_abs_diff_eq!((x.conj() - y).norm(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn rejects_points_outside_disk() {
        let p = SpectralPoint {
            theta: C64::new(0.0, 0.5),
            omega: C64::new(0.0, 0.0),
            z: C64::new(1.5, 0.0),
        };
        assert!(matches!(
            jost_h(&delta(), &p, Side::Plus, Window::new(0, 1)),
            Err(Error::OutsideDisk { .. })
        ));
    }

    #[test]
    fn delta_derivative_closed_form() {
        let th = 0.63;
        let d = jost_h_derivative(
            &delta(),
            C64::new(th, 0.0),
            Side::Plus,
            1,
            Window::new(-1, -1),
        )
        .unwrap();
        let expect = -2.0 * I * C64::from_polar(1.0, -th);
        assert_abs_diff_eq!((d[0] - expect).norm(), 0.0, epsilon = 1e-14);
        let zero = jost_h_derivative(
            &Potential::zero(),
            C64::new(th, 0.0),
            Side::Minus,
            2,
            Window::new(-4, 4),
        )
        .unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn derivative_needs_moment_certificate_at_edge() {
        let q = Potential::power_law(1.0, 4.0).unwrap(); // ℓ¹_s for s < 3
        assert_eq!(q.decay_class, Some(2));
        assert!(
            jost_h_derivative(&q, C64::new(0.01, 0.0), Side::Plus, 2, Window::new(0, 0)).is_err()
        );
        assert!(
            jost_h_derivative(&q, C64::new(0.01, 0.0), Side::Plus, 1, Window::new(0, 0)).is_ok()
        );
        assert!(
            jost_h_derivative(&q, C64::new(1.5, 0.0), Side::Plus, 2, Window::new(0, 0)).is_ok()
        );
    }

    #[test]
    fn successive_approximation_matches_delta() {
        let p = SpectralPoint::real(-0.02);
        let c = jost_h_successive(&delta(), &p, Side::Plus, Window::new(-3, 2)).unwrap();
        assert_abs_diff_eq!((c.at(-1) - (1.0 + 2.0 * p.z)).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(c.at(1), C64::new(1.0, 0.0));
    }

    #[test]
    fn geometric_factor_forms_agree() {
        for z in [
            C64::from_polar(1.0, 0.3),
            C64::new(0.5, 0.2),
            C64::from_polar(0.95, 2.9),
        ] {
            for k in [1usize, 2, 7, 20] {
                let summed = -z * (0..k).map(|j| z.powi(2 * j as i32)).sum::<C64>();
                let closed = (z.powi(2 * k as i32) - 1.0) / (1.0 / z - z);
                assert_abs_diff_eq!((summed - closed).norm(), 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(
                    (geometric_factor(k, z) - closed).norm(),
                    0.0,
                    epsilon = 1e-12
                );
            }
        }
        // At z = 1 the closed form is 0/0 but the summed form is finite.
        assert_abs_diff_eq!((geometric_factor(3, C64::new(1.0, 0.0)) + 3.0).norm(), 0.0);
    }

    #[test]
    fn delta_fourier_coefficients() {
        let g = ThetaGrid::new(8).unwrap();
        let fc = fourier_coeffs_b(&delta(), Side::Plus, -1, 20, &g, 1e-12).unwrap();
        assert_abs_diff_eq!(fc.get(1), 2.0, epsilon = 1e-13);
        assert!(fc.b[1..].iter().all(|v| v.abs() < 1e-13));
        assert!(fc.resynthesis_error < 1e-12);
        let fm = fourier_coeffs_b(&delta(), Side::Minus, 1, 20, &g, 1e-12).unwrap();
        assert_abs_diff_eq!(fm.get(1), 2.0, epsilon = 1e-13);
        assert!(fm.resynthesis_error < 1e-12);
        let free = fourier_coeffs_b(&Potential::zero(), Side::Minus, 4, 20, &g, 1e-12).unwrap();
        assert!(free.b.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cutoff_too_small_is_reported() {
        let g = ThetaGrid::new(8).unwrap();
        let q = Potential::new(0, vec![1.0, -1.0, 0.5, 0.7]).unwrap();
        assert!(matches!(
            fourier_coeffs_b(&q, Side::Plus, -10, 2, &g, 1e-12),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn csv_export_has_header() {
        let g = ThetaGrid::new(2).unwrap();
        let t = JostTable::build(&delta(), Side::Plus, Window::new(-1, 0), &g, 0);
        let csv = t.to_csv();
        assert!(csv.starts_with("n,theta,re_h,im_h\n"));
        assert_eq!(csv.lines().count(), 1 + 4 * 2);
    }
}
