//! Brute-force reference: H = −Δ + q truncated to [−N, N] with zero boundary
//! values, diagonalized once and reused for every time.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{KernelKind, KernelMatrix};
use crate::error::{Error, Result};
use crate::jost::Window;
use crate::potential::Potential;
use crate::scattering::bound_states;
use crate::spectral::C64;

/// Eigenvalues farther than this outside [0, 4] count as bound states.
pub const SPECTRUM_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralFilter {
    Full,
    ContinuousOnly,
}

impl FromStr for SpectralFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(SpectralFilter::Full),
            "continuous_only" | "continuous-only" => Ok(SpectralFilter::ContinuousOnly),
            other => Err(Error::Config(format!("unknown spectral filter `{other}`"))),
        }
    }
}

/// Smallest lattice half-width keeping the light cone and its t^{1/3}
/// skirt away from the truncation, for a report reaching |n| ≤ half.
pub fn causality_margin(half: usize, t: f64) -> usize {
    half + (2.0 * t + 10.0 * t.cbrt()).ceil() as usize
}

/// Default oracle half-width for a reported window of half-width `half`.
pub fn oracle_half_width(half: usize, t: f64) -> usize {
    causality_margin(half, t) + 10
}

/// sin(t√x)/√x, continued analytically through x ≤ 0.
fn sin_over_root(t: f64, x: f64) -> f64 {
    if x.abs() * t * t < 1e-8 {
        t - t.powi(3) * x / 6.0
    } else if x > 0.0 {
        (t * x.sqrt()).sin() / x.sqrt()
    } else {
        (t * (-x).sqrt()).sinh() / (-x).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct LatticeOracle {
    pub half_width: usize,
    pub filter: SpectralFilter,
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, row i ↔ site i − N.
    eigenvectors: DMatrix<f64>,
    pub kept: Vec<bool>,
    /// Eigenvalues removed by the continuous-spectrum filter.
    pub discarded: Vec<f64>,
}

impl LatticeOracle {
    pub fn new(q: &Potential, half_width: usize, filter: SpectralFilter) -> Result<Self> {
        let n = half_width as i64;
        if let Some((a, b)) = q.support() {
            if a < -n || b > n {
                return Err(Error::InvalidInput(format!(
                    "potential support [{a}, {b}] does not fit in the lattice [−{n}, {n}]"
                )));
            }
        }
        let dim = 2 * half_width + 1;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            h[(i, i)] = 2.0 + q.get(i as i64 - n);
            if i + 1 < dim {
                h[(i, i + 1)] = -1.0;
                h[(i + 1, i)] = -1.0;
            }
        }
        let eig = h.symmetric_eigen();
        let eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let mut kept = vec![true; dim];
        if filter == SpectralFilter::ContinuousOnly {
            for (keep, lam) in kept.iter_mut().zip(&eigenvalues) {
                if *lam < -SPECTRUM_SLACK || *lam > 4.0 + SPECTRUM_SLACK {
                    *keep = false;
                }
            }
            for b in bound_states(q)? {
                let nearest = (0..dim).min_by(|x, y| {
                    (eigenvalues[*x] - b.omega)
                        .abs()
                        .total_cmp(&(eigenvalues[*y] - b.omega).abs())
                });
                if let Some(j) = nearest {
                    kept[j] = false;
                }
            }
        }
        let discarded = eigenvalues
            .iter()
            .zip(&kept)
            .filter(|(_, k)| !**k)
            .map(|(l, _)| *l)
            .collect();
        Ok(LatticeOracle {
            half_width,
            filter,
            eigenvalues,
            eigenvectors: eig.eigenvectors,
            kept,
            discarded,
        })
    }

    /// Eigenvalues sorted ascending.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    fn check_causality(&self, rows: Window, cols: Window, t: f64) -> Result<()> {
        let half = [rows.lo, rows.hi, cols.lo, cols.hi]
            .iter()
            .map(|v| v.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let required = causality_margin(half, t);
        if self.half_width < required {
            return Err(Error::CausalityMargin {
                n: self.half_width,
                required,
            });
        }
        Ok(())
    }

    fn block(&self, rows: Window, cols: Window, f: impl Fn(f64) -> C64) -> Vec<C64> {
        let n = self.half_width as i64;
        let keep: Vec<usize> = (0..self.kept.len()).filter(|j| self.kept[*j]).collect();
        let pick = |w: Window| {
            DMatrix::from_fn(w.len(), keep.len(), |i, j| {
                self.eigenvectors[((w.lo + i as i64 + n) as usize, keep[j])]
            })
        };
        let (vr, vc) = (pick(rows), pick(cols));
        let fv: Vec<C64> = keep.iter().map(|j| f(self.eigenvalues[*j])).collect();
        let scaled = |part: fn(&C64) -> f64| {
            let d = DVector::from_iterator(fv.len(), fv.iter().map(part));
            let mut a = vr.clone();
            for (j, mut col) in a.column_iter_mut().enumerate() {
                col *= d[j];
            }
            &a * vc.transpose()
        };
        let re = scaled(|c| c.re);
        let im = scaled(|c| c.im);
        (0..rows.len())
            .flat_map(|i| (0..cols.len()).map(move |j| (i, j)))
            .map(|(i, j)| C64::new(re[(i, j)], im[(i, j)]))
            .collect()
    }

    fn matrix(
        &self,
        kind: KernelKind,
        t: f64,
        rows: Window,
        cols: Window,
        values: Vec<C64>,
    ) -> KernelMatrix {
        KernelMatrix::new(
            kind,
            t,
            rows.iter().collect(),
            cols.iter().collect(),
            values,
        )
        .with_method("route", "lattice_oracle")
        .with_method("half_width", self.half_width)
        .with_method("filter", format!("{:?}", self.filter))
        .with_method("spectrum_slack", SPECTRUM_SLACK)
        .with_method("discarded", format!("{:?}", self.discarded))
    }

    /// e^{−itH} (projected per the filter) on rows × cols.
    pub fn schrodinger_block(&self, rows: Window, cols: Window, t: f64) -> Result<KernelMatrix> {
        self.check_causality(rows, cols, t)?;
        let values = self.block(rows, cols, |l| C64::from_polar(1.0, -t * l));
        Ok(self.matrix(KernelKind::Oracle, t, rows, cols, values))
    }

    pub fn schrodinger(&self, window: Window, t: f64) -> Result<KernelMatrix> {
        self.schrodinger_block(window, window, t)
    }

    /// sin(t√(H + μ²))/√(H + μ²), the map from initial velocity to position.
    pub fn wave12(&self, window: Window, t: f64, mu: f64) -> Result<KernelMatrix> {
        self.check_causality(window, window, t)?;
        let values = self.block(window, window, |l| {
            C64::new(sin_over_root(t, l + mu * mu), 0.0)
        });
        Ok(self
            .matrix(KernelKind::Oracle, t, window, window, values)
            .with_method("mu", mu))
    }
}

/// One-shot oracle kernel on a window.
pub fn finite_lattice_propagator(
    q: &Potential,
    half_width: usize,
    t: f64,
    filter: SpectralFilter,
    window: Window,
) -> Result<KernelMatrix> {
    LatticeOracle::new(q, half_width, filter)?.schrodinger(window, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::free_schrodinger_kernel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn free_lattice_matches_bessel() {
        let w = Window::symmetric(15);
        let k = finite_lattice_propagator(&Potential::zero(), 200, 5.0, SpectralFilter::Full, w)
            .unwrap();
        for (n, m, v) in k.iter() {
            assert!((v - free_schrodinger_kernel(n, m, 5.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn delta_bound_state_eigenvalue() {
        let o = LatticeOracle::new(
            &Potential::delta(0, 2.0),
            200,
            SpectralFilter::ContinuousOnly,
        )
        .unwrap();
        let top = *o.sorted_eigenvalues().last().unwrap();
        assert_abs_diff_eq!(top, 2.0 + 8f64.sqrt(), epsilon = 1e-8);
        assert_eq!(o.discarded.len(), 1);
    }

    #[test]
    fn t_zero_removes_bound_projector() {
        let q = Potential::delta(0, 2.0);
        let w = Window::symmetric(6);
        let k = finite_lattice_propagator(&q, 200, 0.0, SpectralFilter::ContinuousOnly, w).unwrap();
        // Bound state ψ_n = c·z^{|n|}, z = 1 − √2, normalized in ℓ².
        let z = 1.0 - 2f64.sqrt();
        let c2 = (1.0 - z * z) / (1.0 + z * z);
        for (n, m, v) in k.iter() {
            let p = c2 * z.powi((n.abs() + m.abs()) as i32);
            let want = if n == m { 1.0 - p } else { -p };
            assert!((v - want).norm() < 1e-10, "({n},{m}) {v} vs {want}");
        }
    }

    #[test]
    fn causality_is_enforced() {
        let o = LatticeOracle::new(&Potential::zero(), 40, SpectralFilter::Full).unwrap();
        assert!(matches!(
            o.schrodinger(Window::symmetric(10), 20.0),
            Err(Error::CausalityMargin { .. })
        ));
    }

    #[test]
    fn group_property() {
        let q = Potential::delta(1, -1.5);
        let (t1, t2) = (3.0, 4.0);
        let w = Window::symmetric(8);
        let pad = Window::symmetric(causality_margin(8, t2) as i64);
        let n = oracle_half_width(pad.hi as usize, t1 + t2);
        let o = LatticeOracle::new(&q, n, SpectralFilter::ContinuousOnly).unwrap();
        let a = o.schrodinger_block(w, pad, t1).unwrap().to_dmatrix();
        let b = o.schrodinger_block(pad, w, t2).unwrap().to_dmatrix();
        let ab = &a * &b;
        let c = o.schrodinger(w, t1 + t2).unwrap().to_dmatrix();
        assert!((ab - c).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-5);
    }

    #[test]
    fn wave_oracle_small_time() {
        let o = LatticeOracle::new(&Potential::zero(), 60, SpectralFilter::Full).unwrap();
        let k = o.wave12(Window::symmetric(3), 1e-3, 1.0).unwrap();
        // sin(tA^{1/2})A^{−1/2} = t − t³A/6 + …
        assert_abs_diff_eq!(k.entry(0, 0).unwrap().re, 1e-3, epsilon = 1e-9);
        assert_abs_diff_eq!(k.entry(0, 1).unwrap().re, 0.0, epsilon = 1e-9);
    }
}
