//! Phase functions, stationary points and quadrature of oscillatory integrals
//! I(t) = ∫_{−π}^{π} e^{−itφ(θ)} f(θ) dθ.
//!
//! Adaptive quadrature places breakpoints at stationary points and on the
//! dyadic rings θ* ± t^{−(1/2)^j}, adds a t^{−1/3} window of doubled order
//! around degenerate points, and fills every gap with Gauss–Legendre panels
//! narrow enough to resolve the local oscillation.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::spectral::{ThetaGrid, C64, I};

/// Phase change per panel allowed by the resolution cap, in radians.
const PHASE_PER_PANEL: f64 = 8.0;
const ORACLE_TOL: f64 = 1e-10;
const ORACLE_MAX_DOUBLINGS: u32 = 24;
/// Stop the dyadic rings once t_j exceeds e^{−RING_EPS}.
const RING_EPS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseKind {
    Schrodinger,
    Wave { mu: f64 },
}

/// φ_v(θ) = 2 − 2cosθ + vθ or Φ_v(θ) = √(2 − 2cosθ + μ²) + vθ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFunction {
    pub kind: PhaseKind,
    pub v: f64,
}

impl PhaseFunction {
    pub fn schrodinger(v: f64) -> Self {
        PhaseFunction {
            kind: PhaseKind::Schrodinger,
            v,
        }
    }

    pub fn wave(mu: f64, v: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mass μ = {mu} must be finite and ≥ 0"
            )));
        }
        Ok(PhaseFunction {
            kind: PhaseKind::Wave { mu },
            v,
        })
    }

    /// Derivative of order `p` ∈ 0..=3 at θ.
    pub fn derivative(&self, p: usize, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let lin = match p {
            0 => self.v * theta,
            1 => self.v,
            _ => 0.0,
        };
        lin + match self.kind {
            PhaseKind::Schrodinger => match p {
                0 => 2.0 - 2.0 * c,
                1 => 2.0 * s,
                2 => 2.0 * c,
                3 => -2.0 * s,
                _ => panic!("phase derivative order {p} not available"),
            },
            PhaseKind::Wave { mu } => {
                let g = (2.0 - 2.0 * c + mu * mu).sqrt();
                match p {
                    0 => g,
                    1 => s / g,
                    2 => c / g - s * s / g.powi(3),
                    3 => -s / g - 3.0 * s * c / g.powi(3) + 3.0 * s.powi(3) / g.powi(5),
                    _ => panic!("phase derivative order {p} not available"),
                }
            }
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.derivative(0, theta)
    }

    /// An upper bound for |φ'| on [−π, π].
    pub fn max_slope(&self) -> f64 {
        self.v.abs()
            + match self.kind {
                PhaseKind::Schrodinger => 2.0,
                PhaseKind::Wave { mu } => wave_critical_velocity(mu),
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub theta: f64,
    /// First derivative order ≥ 2 with magnitude above 1e−8.
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryAnalysis {
    pub points: Vec<StationaryPoint>,
    /// |v| at which a degenerate stationary point appears.
    pub critical_velocity: f64,
}

fn classify(phase: &PhaseFunction, theta: f64) -> StationaryPoint {
    let order = (2..=3)
        .find(|p| phase.derivative(*p, theta).abs() > 1e-8)
        .unwrap_or(4);
    StationaryPoint { theta, order }
}

/// ϰ = (2 + μ² − √(4μ² + μ⁴))/2, the cosine of the degenerate angle.
pub fn wave_kappa(mu: f64) -> f64 {
    let m2 = mu * mu;
    // Rationalized to avoid cancellation for large μ.
    2.0 / (2.0 + m2 + (4.0 * m2 + m2 * m2).sqrt())
}

/// v₀ = √ϰ, the largest group speed of the lattice Klein–Gordon dispersion.
pub fn wave_critical_velocity(mu: f64) -> f64 {
    wave_kappa(mu).sqrt()
}

/// All θ ∈ [−π, π] with φ'(θ) = 0, classified by degeneracy.
pub fn stationary_points(phase: &PhaseFunction) -> StationaryAnalysis {
    let v = phase.v;
    match phase.kind {
        PhaseKind::Schrodinger => {
            let mut thetas = Vec::new();
            if v.abs() <= 2.0 {
                let a = (-v / 2.0).asin();
                let b = if a >= 0.0 { PI - a } else { -PI - a };
                thetas.push(a);
                if (b - a).abs() > 1e-12 {
                    thetas.push(b);
                }
                if v == 0.0 {
                    thetas.push(-PI);
                }
            }
            thetas.sort_by(f64::total_cmp);
            StationaryAnalysis {
                points: thetas.into_iter().map(|t| classify(phase, t)).collect(),
                critical_velocity: 2.0,
            }
        }
        PhaseKind::Wave { mu } => {
            let kappa = wave_kappa(mu);
            let v0 = kappa.sqrt();
            let tc = kappa.acos();
            let mut thetas = Vec::new();
            if (v.abs() - v0).abs() <= 1e-12 * v0.max(1.0) {
                // g'(θ₀) = −v₀ at θ₀ = −arccos ϰ, and g' is odd.
                thetas.push(-v.signum() * tc);
            } else if v.abs() < v0 {
                let d1 = |t: f64| phase.derivative(1, t);
                let cuts = [-PI, -tc, tc, PI];
                for w in cuts.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if b - a <= 0.0 {
                        continue;
                    }
                    let (fa, fb) = (d1(a), d1(b));
                    if fa == 0.0 {
                        thetas.push(a);
                    } else if fa * fb < 0.0 {
                        thetas.push(bisect(d1, a, b, fa));
                    }
                }
                if d1(PI) == 0.0 {
                    thetas.push(PI);
                }
                thetas.sort_by(f64::total_cmp);
                thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            }
            StationaryAnalysis {
                points: thetas.into_iter().map(|t| classify(phase, t)).collect(),
                critical_velocity: v0,
            }
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= 4.0 * f64::EPSILON * m.abs().max(1.0) {
            break;
        }
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

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(order: usize) -> &'static [(f64, f64)] {
    static GL16: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static GL32: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let build = |n: usize| {
        GaussLegendre::new(NonZeroUsize::new(n).unwrap())
            .as_node_weight_pairs()
            .to_vec()
    };
    match order {
        16 => GL16.get_or_init(|| build(16)),
        32 => GL32.get_or_init(|| build(32)),
        _ => panic!("only orders 16 and 32 are cached"),
    }
}

/// Quadrature nodes θ_i and weights w_i on an interval.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    fn push_panels(&mut self, a: f64, b: f64, panels: usize, order: usize) {
        let gl = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            for (x, w) in gl {
                self.nodes.push(mid + 0.5 * h * x);
                self.weights.push(0.5 * h * w);
            }
        }
    }

    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let mut r = Rule::default();
        r.push_panels(a, b, panels, order);
        r
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i e^{−itφ(θ_i)} f(θ_i).
    pub fn apply(&self, phase: &PhaseFunction, t: f64, f: &(dyn Fn(f64) -> C64 + Sync)) -> C64 {
        self.nodes
            .par_iter()
            .zip(&self.weights)
            .map(|(th, w)| *w * (-I * t * phase.value(*th)).exp() * f(*th))
            .sum()
    }
}

/// Dyadic radii t^{−(1/2)^j}, j = 0..N, N = ⌈log₂(ln t / ε)⌉.
pub fn dyadic_radii(t: f64) -> Vec<f64> {
    if t <= 1.0 {
        return Vec::new();
    }
    let n = (t.ln() / RING_EPS).log2().ceil().max(0.0) as i32;
    (0..=n).map(|j| t.powf(-(0.5f64).powi(j))).collect()
}

/// Panel width cap away from stationary points.
pub fn panel_width(phase: &PhaseFunction, t: f64) -> f64 {
    let base = (2.0 * PI / 64.0) * (1.0f64).min(1.0 / t.max(1e-300).sqrt());
    base.min(PHASE_PER_PANEL / (t * phase.max_slope()).max(1e-300))
}

/// The adaptive rule for ∫ over [a, b] ⊂ [−π, π] at time t ≥ 1.
pub fn adaptive_rule(phase: &PhaseFunction, t: f64, a: f64, b: f64) -> Rule {
    let analysis = stationary_points(phase);
    let mut cuts = vec![a, b];
    let mut degenerate = Vec::new();
    let radii = dyadic_radii(t);
    for sp in &analysis.points {
        cuts.push(sp.theta);
        for r in &radii {
            cuts.push(sp.theta - r);
            cuts.push(sp.theta + r);
        }
        if sp.order >= 3 {
            let r = t.powf(-1.0 / 3.0);
            cuts.push(sp.theta - r);
            cuts.push(sp.theta + r);
            degenerate.push((sp.theta - r, sp.theta + r));
        }
    }
    cuts.retain(|c| *c >= a && *c <= b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let w = panel_width(phase, t);
    let mut rule = Rule::default();
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let mid = 0.5 * (lo + hi);
        let in_window = degenerate.iter().any(|(l, h)| mid > *l && mid < *h);
        let (order, width) = if in_window { (32, 2.0 * w) } else { (16, w) };
        let panels = ((hi - lo) / width).ceil().max(1.0) as usize;
        rule.push_panels(lo, hi, panels, order);
    }
    rule
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadMode {
    Adaptive,
    Oracle,
}

/// ∫_a^b e^{−itφ} f by composite GL16 with panel doubling until successive
/// values differ by < 1e−10.
pub fn oracle_integral(
    phase: &PhaseFunction,
    f: &(dyn Fn(f64) -> C64 + Sync),
    t: f64,
    a: f64,
    b: f64,
) -> Result<C64> {
    let mut panels = 16usize;
    let mut last = Rule::composite(a, b, panels, 16).apply(phase, t, f);
    let mut diff = f64::INFINITY;
    for _ in 0..ORACLE_MAX_DOUBLINGS {
        panels *= 2;
        let next = Rule::composite(a, b, panels, 16).apply(phase, t, f);
        diff = (next - last).norm();
        last = next;
        if diff < ORACLE_TOL {
            return Ok(last);
        }
    }
    Err(Error::Quadrature(format!(
        "oracle refinement did not converge after {ORACLE_MAX_DOUBLINGS} doublings (last change {diff:e})"
    )))
}

/// ∫_{−π}^{π} e^{−itφ(θ)} f(θ) dθ. Times below 1 always use the oracle.
pub fn oscillatory_integral(
    phase: &PhaseFunction,
    f: &(dyn Fn(f64) -> C64 + Sync),
    t: f64,
    mode: QuadMode,
) -> Result<C64> {
    oscillatory_integral_on(phase, f, t, mode, -PI, PI)
}

pub fn oscillatory_integral_on(
    phase: &PhaseFunction,
    f: &(dyn Fn(f64) -> C64 + Sync),
    t: f64,
    mode: QuadMode,
    a: f64,
    b: f64,
) -> Result<C64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(format!(
            "time t = {t} must be finite and ≥ 0"
        )));
    }
    match mode {
        QuadMode::Adaptive if t >= 1.0 => Ok(adaptive_rule(phase, t, a, b).apply(phase, t, f)),
        _ => oracle_integral(phase, f, t, a, b),
    }
}

/// Σ|f̂_m| of the samples of f on the grid.
pub fn wiener_norm(f: &(dyn Fn(f64) -> C64 + Sync), grid: &ThetaGrid) -> f64 {
    let samples: Vec<C64> = grid.nodes().into_iter().map(f).collect();
    FourierSeries::from_samples(&samples).l1_norm()
}

/// Default C_s for s = 2, 3.
pub const DEFAULT_VDC_CONSTANT: f64 = 3.0;

/// C_s ‖f̂‖₁ / (m_s t)^{1/s}.
pub fn van_der_corput_bound(m_s: f64, s: u32, t: f64, wiener: f64, c_s: f64) -> Result<f64> {
    if !(m_s > 0.0 && t > 0.0 && wiener >= 0.0 && s >= 2) {
        return Err(Error::InvalidInput(format!(
            "van der Corput inputs need m_s > 0, s ≥ 2, t > 0, ‖f̂‖ ≥ 0 (got {m_s}, {s}, {t}, {wiener})"
        )));
    }
    Ok(c_s * wiener / (m_s * t).powf(1.0 / s as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VdcSample {
    pub t: f64,
    pub abs_integral: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VdcReport {
    pub s: u32,
    pub m_s: f64,
    pub interval: (f64, f64),
    pub wiener_norm: f64,
    pub samples: Vec<VdcSample>,
    pub max_constant: f64,
}

/// Scans |φ^{(s)}| on [a, b] and fails if it drops below m_s.
pub fn verify_derivative_bound(
    phase: &PhaseFunction,
    s: u32,
    m_s: f64,
    a: f64,
    b: f64,
) -> Result<()> {
    const SCAN: usize = 10_000;
    let found = (0..=SCAN)
        .map(|i| {
            phase
                .derivative(s as usize, a + (b - a) * i as f64 / SCAN as f64)
                .abs()
        })
        .fold(f64::INFINITY, f64::min);
    if found < m_s * (1.0 - 1e-12) {
        return Err(Error::DerivativeBound {
            order: s as usize,
            found,
            bound: m_s,
        });
    }
    Ok(())
}

/// max_t |I(t)| (m_s t)^{1/s} / ‖f̂‖₁ for the integral over [a, b].
#[allow(clippy::too_many_arguments)]
pub fn check_vdc(
    phase: &PhaseFunction,
    f: &(dyn Fn(f64) -> C64 + Sync),
    s: u32,
    m_s: f64,
    interval: (f64, f64),
    t_grid: &[f64],
    wiener: f64,
) -> Result<VdcReport> {
    let (a, b) = interval;
    verify_derivative_bound(phase, s, m_s, a, b)?;
    if wiener <= 0.0 {
        return Err(Error::InvalidInput("amplitude has zero Wiener norm".into()));
    }
    let samples = t_grid
        .iter()
        .map(|&t| {
            let v = oscillatory_integral_on(phase, f, t, QuadMode::Adaptive, a, b)?;
            Ok(VdcSample {
                t,
                abs_integral: v.norm(),
                normalized: v.norm() * (m_s * t).powf(1.0 / s as f64) / wiener,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_constant = samples.iter().map(|s| s.normalized).fold(0.0, f64::max);
    Ok(VdcReport {
        s,
        m_s,
        interval,
        wiener_norm: wiener,
        samples,
        max_constant,
    })
}

/// The four-interval split of the Schrödinger phase: (interval, s, m_s).
/// |φ'''| = 2|sinθ| ≥ √2 on the first two, |φ''| = 2|cosθ| ≥ √2 on the rest.
pub fn schrodinger_vdc_split() -> [((f64, f64), u32, f64); 4] {
    let r2 = 2f64.sqrt();
    [
        ((-0.75 * PI, -0.25 * PI), 3, r2),
        ((0.25 * PI, 0.75 * PI), 3, r2),
        ((-0.25 * PI, 0.25 * PI), 2, r2),
        ((0.75 * PI, 1.25 * PI), 2, r2),
    ]
}

/// Amplitudes of the van der Corput test family.
pub const VDC_AMPLITUDES: [&str; 4] = ["one", "cos", "exp3", "poisson"];

fn vdc_amplitude(name: &str) -> Option<fn(f64) -> C64> {
    Some(match name {
        "one" => |_| C64::new(1.0, 0.0),
        "cos" => |th: f64| C64::new(th.cos(), 0.0),
        "exp3" => |th: f64| C64::from_polar(1.0, 3.0 * th),
        "poisson" => |th: f64| C64::new(1.0 / (2.0 - th.cos()), 0.0),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VdcFamilyEntry {
    pub v: f64,
    pub amplitude: String,
    pub report: VdcReport,
}

/// Normalized van der Corput constants of the Schrödinger phases φ₀ + vθ
/// over the four-interval split, for every velocity and test amplitude.
pub fn vdc_family(
    velocities: &[f64],
    t_grid: &[f64],
    grid: &ThetaGrid,
) -> Result<Vec<VdcFamilyEntry>> {
    let cases: Vec<(f64, &str, ((f64, f64), u32, f64))> = velocities
        .iter()
        .flat_map(|v| {
            VDC_AMPLITUDES.iter().flat_map(move |a| {
                schrodinger_vdc_split()
                    .into_iter()
                    .map(move |c| (*v, *a, c))
            })
        })
        .collect();
    cases
        .into_par_iter()
        .map(|(v, name, (interval, s, m_s))| {
            let f = vdc_amplitude(name).expect("listed amplitude");
            let phase = PhaseFunction::schrodinger(v);
            let report = check_vdc(&phase, &f, s, m_s, interval, t_grid, wiener_norm(&f, grid))?;
            Ok(VdcFamilyEntry {
                v,
                amplitude: name.to_string(),
                report,
            })
        })
        .collect()
}

/// |∫ e^{−itφ} dθ| over the full circle for φ = φ₀ + vθ, one value per t.
pub fn full_circle_magnitudes(v: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    let phase = PhaseFunction::schrodinger(v);
    let one = |_: f64| C64::new(1.0, 0.0);
    t_grid
        .par_iter()
        .map(|t| Ok(oscillatory_integral(&phase, &one, *t, QuadMode::Adaptive)?.norm()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn schrodinger_stationary_points() {
        let a = stationary_points(&PhaseFunction::schrodinger(2.0));
        assert_eq!(a.points.len(), 1);
        assert_abs_diff_eq!(a.points[0].theta, -PI / 2.0, epsilon = 1e-8);
        assert_eq!(a.points[0].order, 3);
        let p = PhaseFunction::schrodinger(2.0);
        assert_abs_diff_eq!(p.derivative(3, -PI / 2.0), 2.0, epsilon = 1e-15);
        let b = stationary_points(&PhaseFunction::schrodinger(0.0));
        let th: Vec<f64> = b.points.iter().map(|p| p.theta).collect();
        assert_eq!(th, vec![-PI, 0.0, PI]);
        assert!(b.points.iter().all(|p| p.order == 2));
        assert!(stationary_points(&PhaseFunction::schrodinger(3.0))
            .points
            .is_empty());
        let c = stationary_points(&PhaseFunction::schrodinger(1.0));
        assert_eq!(c.points.len(), 2);
        for sp in &c.points {
            assert!(p_prime(&PhaseFunction::schrodinger(1.0), sp.theta).abs() < 1e-10);
        }
    }

    fn p_prime(p: &PhaseFunction, t: f64) -> f64 {
        p.derivative(1, t)
    }

    #[test]
    fn wave_critical_velocity_examples() {
        assert_abs_diff_eq!(wave_critical_velocity(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wave_kappa(1.0), (3.0 - 5f64.sqrt()) / 2.0, epsilon = 1e-15);
        // Oracle: maximize |g'| by golden-section search on (−π, 0).
        let p = PhaseFunction::wave(1.0, 0.0).unwrap();
        let neg = |t: f64| p.derivative(1, t);
        let (mut a, mut b) = (-PI + 1e-9, -1e-9);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if neg(c) < neg(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let vmax = -neg(0.5 * (a + b));
        assert_abs_diff_eq!(wave_critical_velocity(1.0), vmax, epsilon = 1e-9);
        for mu in [0.3, 1.0, 2.5] {
            let v0 = wave_critical_velocity(mu);
            let th0 = -wave_kappa(mu).acos();
            let g = PhaseFunction::wave(mu, 0.0).unwrap();
            assert_abs_diff_eq!(g.derivative(1, th0), -v0, epsilon = 1e-9);
            assert_abs_diff_eq!(g.derivative(2, th0), 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(g.derivative(3, th0), v0, epsilon = 1e-9);
            let sa = stationary_points(&PhaseFunction::wave(mu, v0).unwrap());
            assert_eq!(sa.points.len(), 1);
            assert_eq!(sa.points[0].order, 3);
        }
    }

    #[test]
    fn wave_stationary_points_solve_the_phase_equation() {
        for v in [-0.5, 0.0, 0.2, 0.6] {
            let p = PhaseFunction::wave(1.0, v).unwrap();
            let sa = stationary_points(&p);
            assert!(!sa.points.is_empty());
            for sp in sa.points {
                assert!(p.derivative(1, sp.theta).abs() <= 1e-10);
                assert_eq!(sp.order, 2);
            }
        }
        assert!(stationary_points(&PhaseFunction::wave(1.0, 0.7).unwrap())
            .points
            .is_empty());
    }

    fn fd(p: &PhaseFunction, order: usize, t: f64) -> f64 {
        let h = 1e-4;
        let d = |x: f64| p.derivative(order - 1, x);
        (8.0 * (d(t + h) - d(t - h)) - (d(t + 2.0 * h) - d(t - 2.0 * h))) / (12.0 * h)
    }

    proptest! {
        #[test]
        fn derivatives_match_differences(theta in -3.0f64..3.0, v in -3.0f64..3.0, mu in 0.2f64..3.0) {
            for p in [PhaseFunction::schrodinger(v), PhaseFunction::wave(mu, v).unwrap()] {
                for order in 1..=3 {
                    prop_assert!((p.derivative(order, theta) - fd(&p, order, theta)).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn free_kernel_by_quadrature() {
        for &t in &[1.0, 5.0, 50.0] {
            for m in [0i64, 3, 40] {
                let p = PhaseFunction::schrodinger(m as f64 / t);
                let v = oscillatory_integral(&p, &|_| C64::new(1.0, 0.0), t, QuadMode::Adaptive)
                    .unwrap();
                let expect = 2.0
                    * PI
                    * C64::from_polar(1.0, -2.0 * t + PI / 2.0 * m as f64)
                    * bessel_j(m as u32, 2.0 * t);
                assert_abs_diff_eq!((v - expect).norm(), 0.0, epsilon = 1e-10);
            }
        }
        let z = oscillatory_integral(
            &PhaseFunction::schrodinger(0.3),
            &|_| C64::new(0.0, 0.0),
            7.0,
            QuadMode::Adaptive,
        )
        .unwrap();
        assert_eq!(z, C64::new(0.0, 0.0));
    }

    #[test]
    fn adaptive_matches_oracle() {
        let f = |th: f64| C64::from_polar(1.0, th);
        let p = PhaseFunction::schrodinger(0.0);
        let a = oscillatory_integral(&p, &f, 50.0, QuadMode::Adaptive).unwrap();
        let o = oscillatory_integral(&p, &f, 50.0, QuadMode::Oracle).unwrap();
        assert!((a - o).norm() <= 1e-8);
    }

    #[test]
    fn vdc_bound_examples() {
        assert_abs_diff_eq!(van_der_corput_bound(1.0, 2, 1.0, 1.0, 3.0).unwrap(), 3.0);
        let a = van_der_corput_bound(1.0, 2, 10.0, 1.0, 3.0).unwrap();
        let b = van_der_corput_bound(1.0, 2, 40.0, 1.0, 3.0).unwrap();
        assert_abs_diff_eq!(b, a / 2.0, epsilon = 1e-15);
        assert!(van_der_corput_bound(0.0, 2, 1.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn derivative_scan_rejects_bad_interval() {
        let p = PhaseFunction::schrodinger(2.0);
        let r = check_vdc(
            &p,
            &|_| C64::new(1.0, 0.0),
            2,
            2f64.sqrt(),
            (-1.0, 1.0),
            &[10.0],
            1.0,
        );
        assert!(matches!(r, Err(Error::DerivativeBound { .. })));
    }

    #[test]
    fn vdc_normalization_is_linear() {
        let p = PhaseFunction::schrodinger(2.0);
        let g = ThetaGrid::new(8).unwrap();
        let f1 = |_: f64| C64::new(1.0, 0.0);
        let f2 = |_: f64| C64::new(2.0, 0.0);
        let ts = [10.0, 100.0];
        let iv = (-0.75 * PI, -0.25 * PI);
        let a = check_vdc(&p, &f1, 3, 2f64.sqrt(), iv, &ts, wiener_norm(&f1, &g)).unwrap();
        let b = check_vdc(&p, &f2, 3, 2f64.sqrt(), iv, &ts, wiener_norm(&f2, &g)).unwrap();
        assert_abs_diff_eq!(a.max_constant, b.max_constant, epsilon = 1e-12);
        assert_abs_diff_eq!(b.wiener_norm, 2.0 * a.wiener_norm, epsilon = 1e-12);
    }

    #[test]
    fn superposition() {
        let p = PhaseFunction::wave(1.0, 0.3).unwrap();
        let f = |th: f64| C64::new(th.cos(), 0.2);
        let g = |th: f64| C64::from_polar(1.0, 3.0 * th);
        let fg = |th: f64| f(th) + 2.0 * g(th);
        let t = 40.0;
        let i = |h: &(dyn Fn(f64) -> C64 + Sync)| {
            oscillatory_integral(&p, h, t, QuadMode::Adaptive).unwrap()
        };
        assert!((i(&fg) - i(&f) - 2.0 * i(&g)).norm() <= 1e-12);
    }
}
