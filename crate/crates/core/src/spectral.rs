//! Spectral-parameter bookkeeping: the angle θ, the energy ω = 2 − 2cos θ and
//! the disk variable z = e^{−iθ}, plus the uniform θ-grids used for discrete
//! Fourier analysis.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Selects one of the two Jost families, or one of the two boundary values
/// θ₊ ∈ [−π, 0] and θ₋ = −θ₊ ∈ [0, π] on the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Plus => "+",
            Side::Minus => "-",
        })
    }
}

/// ω = 2 − 2cos θ.
pub fn omega_of_theta(theta: C64) -> C64 {
    2.0 - 2.0 * theta.cos()
}

/// Inverts ω = 2 − 2cos θ on the closed lower strip.
///
/// Off the band the root with |z| < 1 is selected, so Im θ < 0. On the band
/// `side` picks θ₊ ∈ [−π, 0] or θ₋ ∈ [0, π]. Near the band the sign of Im ω
/// decides, falling back to `side` when ω is real.
pub fn theta_of_omega(omega: C64, side: Side) -> Result<C64> {
    if !omega.re.is_finite() || !omega.im.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite energy {omega}")));
    }
    if omega.im == 0.0 && (0.0..=4.0).contains(&omega.re) {
        let c = ((2.0 - omega.re) / 2.0).clamp(-1.0, 1.0);
        let th = c.acos();
        return Ok(C64::new(-side.sign() * th, 0.0));
    }
    // z + 1/z = c, pick the root inside the disk.
    let c = 2.0 - omega;
    let s = (c * c - 4.0).sqrt();
    let big = if (c + s).norm() >= (c - s).norm() {
        (c + s) / 2.0
    } else {
        (c - s) / 2.0
    };
    let mut z = 1.0 / big;
    if (z.norm() - 1.0).abs() < 1e-12 {
        // Both roots are numerically on the circle; choose by boundary side.
        let want_plus = if omega.im != 0.0 {
            omega.im > 0.0
        } else {
            side == Side::Plus
        };
        // θ₊ ∈ [−π, 0] means arg z = −Re θ ∈ [0, π], i.e. Im z ≥ 0.
        let cand = [z, big];
        z = if want_plus {
            *cand.iter().max_by(|a, b| a.im.total_cmp(&b.im)).unwrap()
        } else {
            *cand.iter().min_by(|a, b| a.im.total_cmp(&b.im)).unwrap()
        };
    }
    Ok(theta_of_z(z))
}

/// θ = i ln z, with Re θ ∈ [−π, π) and Im θ = ln |z|.
pub fn theta_of_z(z: C64) -> C64 {
    let l = z.ln();
    let mut th = C64::new(-l.im, l.re);
    if th.re >= PI {
        th.re -= 2.0 * PI;
    }
    th
}

/// Consistent triple (θ, ω, z) with ω = 2 − 2cos θ and z = e^{−iθ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub theta: C64,
    pub omega: C64,
    pub z: C64,
}

impl SpectralPoint {
    /// Builds the triple from an angle in the closed lower strip.
    pub fn from_theta(theta: C64) -> Result<Self> {
        if !theta.re.is_finite() || !theta.im.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite angle {theta}")));
        }
        if theta.im > 1e-12 {
            return Err(Error::OutsideDisk {
                z_abs: theta.im.exp(),
            });
        }
        Ok(SpectralPoint {
            theta,
            omega: omega_of_theta(theta),
            z: (-I * theta).exp(),
        })
    }

    pub fn real(theta: f64) -> Self {
        SpectralPoint {
            theta: C64::new(theta, 0.0),
            omega: C64::new(2.0 - 2.0 * theta.cos(), 0.0),
            z: C64::new(theta.cos(), -theta.sin()),
        }
    }

    pub fn from_omega(omega: C64, side: Side) -> Result<Self> {
        let theta = theta_of_omega(omega, side)?;
        let mut p = Self::from_theta(theta)?;
        p.omega = omega;
        Ok(p)
    }

    /// Builds the triple from a disk point z = e^{−iθ}, |z| ≤ 1, z ≠ 0.
    pub fn from_z(z: C64) -> Result<Self> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::OutsideDisk { z_abs: z.norm() });
        }
        if z == C64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("z = 0 has no finite angle".into()));
        }
        Ok(SpectralPoint {
            theta: theta_of_z(z),
            omega: 2.0 - z - 1.0 / z,
            z,
        })
    }

    pub fn is_real(&self) -> bool {
        self.theta.im == 0.0
    }
}

/// Uniform grid of 2^k angles θ_j = −π + 2πj/2^k on [−π, π).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid {
    pub pow: u32,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        ThetaGrid { pow: 12 }
    }
}

impl ThetaGrid {
    pub fn new(pow: u32) -> Result<Self> {
        if !(2..=26).contains(&pow) {
            return Err(Error::InvalidInput(format!(
                "grid exponent {pow} outside 2..=26"
            )));
        }
        Ok(ThetaGrid { pow })
    }

    pub fn len(&self) -> usize {
        1usize << self.pow
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + self.step() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.node(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn omega_examples() {
        assert_abs_diff_eq!(omega_of_theta(C64::new(0.0, 0.0)).re, 0.0);
        assert_abs_diff_eq!(
            omega_of_theta(C64::new(-PI / 2.0, 0.0)).re,
            2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(omega_of_theta(C64::new(PI, 0.0)).re, 4.0);
        assert_abs_diff_eq!(omega_of_theta(C64::new(-PI, 0.0)).re, 4.0);
    }

    #[test]
    fn theta_examples() {
        let th = theta_of_omega(C64::new(2.0, 0.0), Side::Plus).unwrap();
        assert_abs_diff_eq!(th.re, -PI / 2.0, epsilon = 1e-15);
        let th = theta_of_omega(C64::new(2.0, 0.0), Side::Minus).unwrap();
        assert_abs_diff_eq!(th.re, PI / 2.0, epsilon = 1e-15);
        let th = theta_of_omega(C64::new(0.0, 0.0), Side::Plus).unwrap();
        assert_abs_diff_eq!(th.norm(), 0.0);
    }

    #[test]
    fn theta_above_band_matches_quadratic_root() {
        let r2 = 2f64.sqrt();
        let p = SpectralPoint::from_omega(C64::new(2.0 + 2.0 * r2, 0.0), Side::Plus).unwrap();
        assert_abs_diff_eq!(p.z.re, 1.0 - r2, epsilon = 1e-14);
        assert_abs_diff_eq!(p.z.im, 0.0, epsilon = 1e-14);
        assert!(p.theta.im < 0.0);
        assert_abs_diff_eq!(
            (omega_of_theta(p.theta) - p.omega).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rejects_non_finite() {
        assert!(theta_of_omega(C64::new(f64::NAN, 0.0), Side::Plus).is_err());
        assert!(theta_of_omega(C64::new(0.0, f64::INFINITY), Side::Plus).is_err());
    }

    #[test]
    fn grid_nodes() {
        let g = ThetaGrid::new(3).unwrap();
        assert_eq!(g.len(), 8);
        assert_abs_diff_eq!(g.node(0), -PI);
        assert_abs_diff_eq!(g.node(4), 0.0, epsilon = 1e-15);
    }
}
