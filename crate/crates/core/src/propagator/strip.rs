//! Large-t kernels far from the support of q.
//!
//! Outside [a, b] the Jost solutions are plane waves, so every kernel entry
//! reduces to integrals ∫ Ψ_t(θ) B(θ) e^{−iMθ} dθ of a few smooth base
//! functions B against a time factor Ψ_t. For Ψ_t = e^{−itφ₀} these are
//! finite sums against b_L = (1/2π)∫ e^{−itφ₀} e^{−iLθ} = e^{−2it} i^{|L|}
//! J_{|L|}(2t); for the wave factor sin(tg)/g a single FFT yields all M.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{i_pow, perturbed_schrodinger_kernel, require_generic, wave_kernel_12, z_of};
use super::{KernelKind, KernelMatrix, Route};
use crate::bessel::bessel_j_all;
use crate::error::{Error, Result};
use crate::fourier::{at_shift, dft_minus, trapezoid_all_shifts, FourierSeries};
use crate::jost::{propagate, zpow, Window};
use crate::oscillatory::wave_critical_velocity;
use crate::potential::Potential;
use crate::scattering::ScatteringPoint;
use crate::spectral::{Side, ThetaGrid, C64};

/// Coefficients below this fraction of the largest are dropped.
const COEFF_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    T,
    RMinus,
    RPlus,
    One,
}

fn base_index(b: Base) -> usize {
    match b {
        Base::T => 0,
        Base::RMinus => 1,
        Base::RPlus => 2,
        Base::One => 3,
    }
}

/// Which base integrals make up 2π K_{n,k} outside the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FarField {
    pub a: i64,
    pub b: i64,
}

impl FarField {
    pub fn new(q: &Potential) -> Self {
        let (a, b) = q.support().unwrap_or((0, 0));
        FarField { a, b }
    }

    /// Pairs (B, M) with 2π K_{n,k} = Σ ∫ Ψ_t B e^{−iMθ}, or None when n or k
    /// lies strictly between a and b.
    pub fn terms(&self, n: i64, k: i64) -> Option<([(Base, i64); 2], usize)> {
        let (n, k) = (n.min(k), n.max(k));
        let none = (Base::One, 0);
        if n <= self.a && k >= self.b {
            Some(([(Base::T, k - n), none], 1))
        } else if k <= self.a {
            Some(([(Base::RMinus, -(k + n)), (Base::One, k - n)], 2))
        } else if n >= self.b {
            Some(([(Base::RPlus, k + n), (Base::One, k - n)], 2))
        } else {
            None
        }
    }
}

fn truncated(series: &FourierSeries) -> Vec<(i64, C64)> {
    let band = series.effective_band(COEFF_FLOOR);
    (-band..=band).map(|j| (j, series.get(j))).collect()
}

/// e^{−2it} i^{|L|} J_{|L|}(2t) for |L| ≤ lmax.
fn free_modes(lmax: usize, t: f64) -> Vec<C64> {
    let e = C64::from_polar(1.0, -2.0 * t);
    bessel_j_all(lmax, 2.0 * t)
        .into_iter()
        .enumerate()
        .map(|(l, j)| e * i_pow(l as u64) * j)
        .collect()
}

fn base_samples(q: &Potential, grid: &ThetaGrid) -> [Vec<C64>; 4] {
    let pts: Vec<ScatteringPoint> = grid
        .nodes()
        .into_par_iter()
        .map(|th| ScatteringPoint::new(q, th))
        .collect();
    [
        pts.iter().map(|p| p.t).collect(),
        pts.iter().map(|p| p.r_minus).collect(),
        pts.iter().map(|p| p.r_plus).collect(),
        vec![C64::new(1.0, 0.0); pts.len()],
    ]
}

fn sorted_unique(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Fourier coefficients of T, R⁻, R⁺, 1 for the Schrödinger direct route.
#[derive(Debug, Clone)]
pub struct SchrodingerBases {
    far: FarField,
    coeffs: [Vec<(i64, C64)>; 4],
    q: Potential,
}

impl SchrodingerBases {
    pub fn new(q: &Potential, grid: &ThetaGrid) -> Self {
        let coeffs = base_samples(q, grid).map(|s| truncated(&FourierSeries::from_samples(&s)));
        SchrodingerBases {
            far: FarField::new(q),
            coeffs,
            q: q.clone(),
        }
    }

    pub fn band(&self) -> i64 {
        self.coeffs
            .iter()
            .map(|c| c.last().map_or(0, |x| x.0))
            .max()
            .unwrap_or(0)
    }

    fn base_integral(&self, b: Base, m: i64, modes: &[C64]) -> C64 {
        // ∫ e^{−itφ₀} B e^{−iMθ} = 2π Σ_j B̂_j b_{j+M}.
        self.coeffs[base_index(b)]
            .iter()
            .map(|(j, c)| c * modes[(j + m).unsigned_abs() as usize])
            .sum::<C64>()
    }

    /// e^{−itH}P_c on rows × cols; entries touching the interior of the
    /// support fall back to adaptive quadrature.
    pub fn kernel(&self, rows: Vec<i64>, cols: Vec<i64>, t: f64) -> Result<KernelMatrix> {
        let (rows, cols) = (sorted_unique(rows), sorted_unique(cols));
        let reach = rows.iter().chain(&cols).map(|v| v.abs()).max().unwrap_or(0);
        let modes = free_modes((2 * reach + self.band()) as usize + 1, t);
        let q = &self.q;
        let km =
            KernelMatrix::try_from_fn(KernelKind::SchrodingerPc, t, rows, cols, |n, k| match self
                .far
                .terms(n, k)
            {
                Some((terms, used)) => Ok(terms[..used]
                    .iter()
                    .map(|(b, m)| self.base_integral(*b, *m, &modes))
                    .sum()),
                None => perturbed_schrodinger_kernel(q, n, k, t, Route::Direct),
            })?;
        Ok(km
            .with_method("route", "direct_fourier_bessel")
            .with_method("base_band", self.band())
            .with_method("potential", q.name()))
    }
}

/// Samples of T, R⁻, R⁺, 1 on a fine grid for wave kernels by FFT.
#[derive(Debug, Clone)]
pub struct WaveBases {
    far: FarField,
    mu: f64,
    samples: [Vec<C64>; 4],
    q: Potential,
}

/// ∫ sin(tg)/g e^{−iMθ} by the FFT, exact once the grid resolves the
/// bandwidth t·v₀ + 10t^{1/3} plus the largest shift.
pub fn wave_fft_size(mu: f64, t: f64, max_shift: i64, base_band: i64) -> usize {
    let need =
        wave_critical_velocity(mu) * t + 10.0 * t.cbrt() + (max_shift + base_band) as f64 + 64.0;
    ((2.0 * need).ceil() as usize).next_power_of_two().max(1024)
}

fn fine_samples(coarse: &[C64], n: usize) -> Vec<C64> {
    let series = FourierSeries::from_samples(coarse);
    let mut c = vec![C64::new(0.0, 0.0); n];
    for (m, a) in series.iter() {
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        c[m.rem_euclid(n as i64) as usize] += sign * a;
    }
    // s_j = Σ_m a_m e^{−imθ_j} = Σ_m (−1)^m a_m e^{−2πijm/N}.
    dft_minus(&c)
}

/// sin(tg)/g with g = √(2 − 2cosθ + μ²); smooth in θ for every μ ≥ 0.
pub(crate) fn wave_time_factor(t: f64, mu: f64, theta: f64) -> f64 {
    let g = (2.0 - 2.0 * theta.cos() + mu * mu).sqrt();
    if g * t < 1e-6 {
        t * (1.0 - (g * t).powi(2) / 6.0)
    } else {
        (t * g).sin() / g
    }
}

impl WaveBases {
    /// Bases resampled on a grid of `n_fft` points (a power of two).
    pub fn new(q: &Potential, mu: f64, n_fft: usize) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mass μ = {mu} must be finite and ≥ 0"
            )));
        }
        if !n_fft.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "FFT size {n_fft} must be a power of two"
            )));
        }
        let coarse = ThetaGrid::new(12)?;
        let samples = base_samples(q, &coarse).map(|s| fine_samples(&s, n_fft));
        Ok(WaveBases {
            far: FarField::new(q),
            mu,
            samples,
            q: q.clone(),
        })
    }

    pub fn fft_size(&self) -> usize {
        self.samples[0].len()
    }

    /// sin(t√A)/√A on rows × cols with A = H + μ².
    pub fn kernel(&self, rows: Vec<i64>, cols: Vec<i64>, t: f64) -> Result<KernelMatrix> {
        let (rows, cols) = (sorted_unique(rows), sorted_unique(cols));
        let n = self.fft_size();
        let reach = rows.iter().chain(&cols).map(|v| v.abs()).max().unwrap_or(0);
        if wave_fft_size(self.mu, t, 2 * reach, 0) > n {
            return Err(Error::InvalidInput(format!(
                "FFT size {n} does not resolve t = {t} with shifts up to {}",
                2 * reach
            )));
        }
        let grid_nodes: Vec<f64> = (0..n)
            .map(|j| -PI + 2.0 * PI * j as f64 / n as f64)
            .collect();
        let psi: Vec<f64> = grid_nodes
            .iter()
            .map(|th| wave_time_factor(t, self.mu, *th))
            .collect();
        let integrals: Vec<Vec<C64>> = self
            .samples
            .par_iter()
            .map(|s| {
                trapezoid_all_shifts(&s.iter().zip(&psi).map(|(b, p)| b * p).collect::<Vec<_>>())
            })
            .collect();
        let q = &self.q;
        let km = KernelMatrix::try_from_fn(
            KernelKind::WavePcEntry { i: 1, j: 2 },
            t,
            rows,
            cols,
            |a, b| match self.far.terms(a, b) {
                Some((terms, used)) => Ok(terms[..used]
                    .iter()
                    .map(|(base, m)| at_shift(&integrals[base_index(*base)], *m))
                    .sum::<C64>()
                    / (2.0 * PI)),
                None => wave_kernel_12(q, self.mu, a, b, t),
            },
        )?;
        Ok(km
            .with_method("route", "direct_fft")
            .with_method("fft_size", n)
            .with_method("mu", self.mu)
            .with_method("potential", q.name()))
    }
}

/// One smooth component S(θ) e^{−isθ} of the integrated-by-parts amplitude,
/// stored as Fourier coefficients of S; the column index enters through s.
#[derive(Debug, Clone)]
struct Component {
    coeffs: Vec<(i64, C64)>,
}

#[derive(Debug, Clone)]
struct RowData {
    n: i64,
    /// S1..S4: k ≥ b uses e^{−ikθ}S1 + e^{ikθ}S2, k ≤ a uses e^{ikθ}S3 + e^{−ikθ}S4.
    far: [Component; 4],
    /// Columns strictly inside (a, b), with the full amplitude.
    middle: Vec<(i64, Component)>,
}

/// Rows of the integrated-by-parts kernel
///
///   K_{n,k} = −(i/8πt) ∫ e^{−itφ₀} ∂_θ[(|T|²/sinθ)(f⁺_k(θ)f⁺_n(−θ) + f⁻_k(θ)f⁻_n(−θ))] dθ,
///
/// with the derivative taken on Fourier coefficients, for a non-resonant q.
#[derive(Debug, Clone)]
pub struct IbpStrip {
    far: FarField,
    rows: Vec<RowData>,
    grid_pow: u32,
    label: String,
}

fn component(samples: &[C64]) -> Component {
    Component {
        coeffs: truncated(&FourierSeries::from_samples(samples)),
    }
}

impl IbpStrip {
    pub fn new(q: &Potential, rows: Vec<i64>) -> Result<Self> {
        require_generic(q)?;
        let rows = sorted_unique(rows);
        let far = FarField::new(q);
        let reach = rows.iter().map(|n| n.abs()).max().unwrap_or(0) + (far.b - far.a).abs();
        let mut pow = 12;
        while (1i64 << pow) < 4 * (2 * reach + 64) {
            pow += 1;
        }
        let grid = ThetaGrid::new(pow)?;
        let nodes = grid.nodes();
        let pts: Vec<ScatteringPoint> = nodes
            .par_iter()
            .map(|th| ScatteringPoint::raw(q, *th))
            .collect();
        // |T|²/sinθ = 4 sinθ/|W|², conj(T)/sinθ = −2i/conj(W).
        let t2s: Vec<C64> = pts
            .iter()
            .map(|p| C64::new(4.0 * p.theta.sin() / p.w.norm_sqr(), 0.0))
            .collect();
        let ts: Vec<C64> = pts.iter().map(|p| -2.0 * super::I / p.w.conj()).collect();
        let middle_cols: Vec<i64> = ((far.a + 1)..far.b).collect();
        let data = rows
            .par_iter()
            .map(|&n| {
                let fn_minus_theta = |side: Side, th: f64| {
                    let zc = z_of(th).conj();
                    let h = propagate(q, zc, side, Window::new(n, n), 0).h[0];
                    h * zpow(zc, side.sign() as i64 * n)
                };
                let fp: Vec<C64> = nodes
                    .iter()
                    .map(|th| fn_minus_theta(Side::Plus, *th))
                    .collect();
                let fm: Vec<C64> = nodes
                    .iter()
                    .map(|th| fn_minus_theta(Side::Minus, *th))
                    .collect();
                let len = nodes.len();
                let s1: Vec<C64> = (0..len)
                    .map(|j| t2s[j] * fp[j] + ts[j] * pts[j].r_plus * fm[j])
                    .collect();
                let s2: Vec<C64> = (0..len).map(|j| ts[j] * fm[j]).collect();
                let s3: Vec<C64> = (0..len)
                    .map(|j| ts[j] * pts[j].r_minus * fp[j] + t2s[j] * fm[j])
                    .collect();
                let s4: Vec<C64> = (0..len).map(|j| ts[j] * fp[j]).collect();
                let middle = middle_cols
                    .iter()
                    .map(|&k| {
                        let p: Vec<C64> = (0..len)
                            .map(|j| {
                                let z = z_of(nodes[j]);
                                let hp = propagate(q, z, Side::Plus, Window::new(k, k), 0).h[0]
                                    * zpow(z, k);
                                let hm = propagate(q, z, Side::Minus, Window::new(k, k), 0).h[0]
                                    * zpow(z, -k);
                                t2s[j] * (hp * fp[j] + hm * fm[j])
                            })
                            .collect();
                        (k, component(&p))
                    })
                    .collect();
                RowData {
                    n,
                    far: [
                        component(&s1),
                        component(&s2),
                        component(&s3),
                        component(&s4),
                    ],
                    middle,
                }
            })
            .collect();
        Ok(IbpStrip {
            far,
            rows: data,
            grid_pow: pow,
            label: q.name().to_string(),
        })
    }

    pub fn rows(&self) -> Vec<i64> {
        self.rows.iter().map(|r| r.n).collect()
    }

    fn band(&self) -> i64 {
        self.rows
            .iter()
            .flat_map(|r| r.far.iter().chain(r.middle.iter().map(|(_, c)| c)))
            .map(|c| c.coeffs.last().map_or(0, |x| x.0))
            .max()
            .unwrap_or(0)
    }

    /// Σ_j (j+s) ŝ_j b_{j+s}, i.e. (i/2π)∫ e^{−itφ₀} ∂_θ[S e^{−isθ}].
    fn apply(c: &Component, s: i64, modes: &[C64]) -> C64 {
        c.coeffs
            .iter()
            .map(|(j, a)| (j + s) as f64 * a * modes[(j + s).unsigned_abs() as usize])
            .sum()
    }

    /// K_{n,k}(t) for every stored row n and the given columns.
    pub fn kernel(&self, cols: Vec<i64>, t: f64) -> Result<KernelMatrix> {
        if t <= 0.0 {
            return Err(Error::InvalidInput(
                "the integrated-by-parts route needs t > 0".into(),
            ));
        }
        let cols = sorted_unique(cols);
        let reach = cols.iter().map(|k| k.abs()).max().unwrap_or(0);
        let modes = free_modes((reach + self.band()) as usize + 1, t);
        let FarField { a, b } = self.far;
        let scale = -1.0 / (4.0 * t);
        let values: Vec<C64> = self
            .rows
            .par_iter()
            .flat_map_iter(|row| {
                let modes = &modes;
                cols.iter().map(move |&k| {
                    let v = if k >= b {
                        Self::apply(&row.far[0], k, modes) + Self::apply(&row.far[1], -k, modes)
                    } else if k <= a {
                        Self::apply(&row.far[2], -k, modes) + Self::apply(&row.far[3], k, modes)
                    } else {
                        let c = &row
                            .middle
                            .iter()
                            .find(|(m, _)| *m == k)
                            .expect("middle column")
                            .1;
                        Self::apply(c, 0, modes)
                    };
                    scale * v
                })
            })
            .collect();
        Ok(
            KernelMatrix::new(KernelKind::SchrodingerPc, t, self.rows(), cols, values)
                .with_method("route", "ibp_fourier_bessel")
                .with_method("grid_pow", self.grid_pow)
                .with_method("coefficient_band", self.band())
                .with_method("potential", &self.label),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{free_schrodinger_matrix, perturbed_schrodinger_kernel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bases_reproduce_quadrature() {
        let q = Potential::delta(0, 2.0);
        let sb = SchrodingerBases::new(&q, &ThetaGrid::new(12).unwrap());
        let rows = vec![-3, 0, 4];
        let cols = vec![-6, -1, 0, 2, 7];
        let km = sb.kernel(rows.clone(), cols.clone(), 12.0).unwrap();
        for (n, k, v) in km.iter() {
            let d = perturbed_schrodinger_kernel(&q, n, k, 12.0, Route::Direct).unwrap();
            assert!((v - d).norm() < 1e-10, "({n},{k}) {v} vs {d}");
        }
    }

    #[test]
    fn bases_free_potential_is_bessel() {
        let sb = SchrodingerBases::new(&Potential::zero(), &ThetaGrid::new(10).unwrap());
        let a = sb.kernel(vec![-2, 5], vec![-9, 0, 30], 20.0).unwrap();
        let b = free_schrodinger_matrix(vec![-2, 5], vec![-9, 0, 30], 20.0);
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn ibp_strip_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = Potential::random(&mut rng, -1, 4, 1.0);
        let strip = IbpStrip::new(&q, vec![-3, 0, 1, 5]).unwrap();
        let km = strip.kernel(vec![-5, 0, 1, 2, 3, 9], 15.0).unwrap();
        for (n, k, v) in km.iter() {
            let d = perturbed_schrodinger_kernel(&q, n, k, 15.0, Route::Direct).unwrap();
            assert!((v - d).norm() < 1e-9, "({n},{k}) {v} vs {d}");
        }
    }

    #[test]
    fn wave_bases_match_per_entry() {
        let q = Potential::delta(0, 2.0);
        let n_fft = wave_fft_size(1.0, 10.0, 20, 64);
        let wb = WaveBases::new(&q, 1.0, n_fft).unwrap();
        let km = wb.kernel(vec![-2, 0, 3], vec![-4, 0, 1, 6], 10.0).unwrap();
        for (n, k, v) in km.iter() {
            let d = wave_kernel_12(&q, 1.0, n, k, 10.0).unwrap();
            assert!((v - d).norm() < 1e-9, "({n},{k}) {v} vs {d}");
        }
    }
}
