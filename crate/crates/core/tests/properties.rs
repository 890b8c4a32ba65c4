//! Randomized invariants across the spectral, Jost, scattering, oscillatory,
//! propagator and decay layers.

use std::f64::consts::PI;

use lattice_dispersion::decay::{decay_rate_fit, op_norm_weighted_l2};
use lattice_dispersion::fit::log_grid;
use lattice_dispersion::jost::{
    fourier_coeffs_b, jost_f, jost_h, jost_h_successive, recurrence_residual, wiener_sup, Window,
};
use lattice_dispersion::oscillatory::{oscillatory_integral, PhaseFunction, QuadMode};
use lattice_dispersion::propagator::{
    perturbed_schrodinger_matrix, KernelKind, KernelMatrix, Route,
};
use lattice_dispersion::scattering::{is_generic, wiener_growth, GrowthKind, ScatteringData};
use lattice_dispersion::spectral::{omega_of_theta, theta_of_omega};
use lattice_dispersion::{Potential, Side, SpectralPoint, ThetaGrid, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_potential(seed: u64) -> Potential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Potential::random(&mut rng, -3, 7, 1.2)
}

/// A point of the closed unit disk away from the origin.
fn disk_point() -> impl Strategy<Value = SpectralPoint> {
    (-PI..PI, prop_oneof![Just(0.0), -2.0f64..0.0])
        .prop_map(|(a, b)| SpectralPoint::from_theta(C64::new(a, b)).expect("lower strip"))
}

fn same_angle(a: C64, b: C64) -> bool {
    let d = a - b;
    let wrapped = (d.re + PI).rem_euclid(2.0 * PI) - PI;
    wrapped.abs() <= 1e-10 && d.im.abs() <= 1e-10
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn theta_omega_round_trip(a in -PI..=PI, b in prop_oneof![Just(0.0), -6.0f64..0.0]) {
        let theta = C64::new(a, b);
        let side = if a <= 0.0 { Side::Plus } else { Side::Minus };
        let back = theta_of_omega(omega_of_theta(theta), side).unwrap();
        prop_assert!(same_angle(back, theta), "{theta} -> {back}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jost_recurrence_and_cross_method(seed in 0u64..1000, point in disk_point()) {
        let q = random_potential(seed);
        let w = Window::new(-12, 12);
        // On the band the bound is absolute; inside the disk f grows like
        // |z|^{−|n|}, so it is taken relative to the size of the terms.
        let scale = |f: &[C64]| {
            let c = (point.z + 1.0 / point.z).norm() + q.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
            f.iter().map(|v| v.norm()).fold(1.0, f64::max) * (2.0 + c) / 4.0
        };
        for side in [Side::Plus, Side::Minus] {
            let exact = jost_h(&q, &point, side, w).unwrap();
            let f = jost_f(&exact);
            let bound = if point.z.norm() == 1.0 { 1e-10 } else { 1e-10 * scale(&f) };
            prop_assert!(recurrence_residual(&q, &exact) <= bound);
            let iter = jost_h_successive(&q, &point, side, w).unwrap();
            let diff = exact.h.iter().zip(&iter.h).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(diff <= 1e-11, "successive vs recurrence {diff:e}");
        }
    }

    #[test]
    fn scattering_unitarity_and_bounds(seed in 0u64..1000) {
        let q = random_potential(seed);
        let data = ScatteringData::compute(&q, &ThetaGrid::new(8).unwrap());
        prop_assert!(data.unitarity_defect() <= 1e-9);
        prop_assert!(data.consistency_defect() <= 1e-9);
        prop_assert!(data.max_abs_t() <= 1.0 + 1e-10);
    }

    #[test]
    fn hilbert_schmidt_dominates_singular_value(
        re in prop::collection::vec(-1.0f64..1.0, 49),
        im in prop::collection::vec(-1.0f64..1.0, 49),
        sigma in 0.0f64..3.0,
    ) {
        let w = Window::symmetric(3);
        let values = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
        let k = KernelMatrix::square(KernelKind::Oracle, 1.0, w, values);
        let n = op_norm_weighted_l2(&k, sigma).unwrap();
        prop_assert!(n.hs >= n.singular * (1.0 - 1e-12));
    }

    #[test]
    fn fit_is_prefactor_invariant(c in 1e-3f64..1e3, slope in -2.0f64..0.0) {
        let t = log_grid(1e2, 1e4, 12);
        let y: Vec<f64> = t.iter().map(|t| c * t.powf(slope)).collect();
        prop_assert!((decay_rate_fit(&t, &y).unwrap().slope - slope).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn adaptive_matches_oracle(
        wave in any::<bool>(),
        v in -3.0f64..3.0,
        mu in 0.1f64..2.0,
        freq in -6i32..=6,
        shift in -1.0f64..1.0,
        log_t in 0.0f64..3.0,
    ) {
        let t = 10f64.powf(log_t);
        let phase = if wave {
            PhaseFunction::wave(mu, v).unwrap()
        } else {
            PhaseFunction::schrodinger(v)
        };
        let f = move |th: f64| C64::from_polar(1.0, freq as f64 * th) * (2.0 + (th + shift).cos());
        let a = oscillatory_integral(&phase, &f, t, QuadMode::Adaptive).unwrap();
        let o = oscillatory_integral(&phase, &f, t, QuadMode::Oracle).unwrap();
        prop_assert!((a - o).norm() <= 1e-8 * (1.0 + o.norm()), "t={t} {a} vs {o}");
    }
}

#[test]
fn fourier_coefficients_are_real() {
    let grid = ThetaGrid::new(10).unwrap();
    for seed in 0..4 {
        let q = random_potential(seed);
        for side in [Side::Plus, Side::Minus] {
            for n in [-5, 0, 2, 6] {
                let c = fourier_coeffs_b(&q, side, n, 60, &grid, 1e-10).unwrap();
                assert!(
                    c.max_imag <= 1e-10,
                    "seed {seed} side {side} n {n}: {}",
                    c.max_imag
                );
            }
        }
    }
}

#[test]
fn wiener_uniformity_stabilizes() {
    let grid = ThetaGrid::new(10).unwrap();
    let q = random_potential(5);
    for (side, short, long) in [
        (Side::Plus, Window::new(1, 200), Window::new(1, 400)),
        (Side::Minus, Window::new(-200, -1), Window::new(-400, -1)),
    ] {
        let a = wiener_sup(&q, side, short, &grid);
        let b = wiener_sup(&q, side, long, &grid);
        assert!(a.is_finite() && (a - b).abs() < 1e-8, "{side}: {a} vs {b}");
    }
}

#[test]
fn wiener_growth_is_at_most_linear() {
    let q = Potential::delta(0, 2.0);
    let grid = ThetaGrid::new(10).unwrap();
    for kind in [GrowthKind::TOverSin, GrowthKind::DerivativeOfTh] {
        for side in [Side::Plus, Side::Minus] {
            let g = wiener_growth(&q, side, Window::new(-100, 100), &grid, kind).unwrap();
            assert!(
                g.exponent <= 1.1,
                "{kind:?} {side}: exponent {}",
                g.exponent
            );
        }
    }
}

#[test]
fn routes_agree_and_kernels_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let q = Potential::random(&mut rng, -2, 5, 1.0);
    assert!(is_generic(&q));
    let w = Window::new(-10, 9);
    for t in [5.0, 20.0, 80.0] {
        let d = perturbed_schrodinger_matrix(&q, w, t, Route::Direct).unwrap();
        let c = perturbed_schrodinger_matrix(&q, w, t, Route::CaseSplit).unwrap();
        let diff = d.max_abs_diff(&c).unwrap();
        assert!(diff <= 1e-8, "t = {t}: direct vs case split {diff:e}");
        assert!(d.symmetry_defect() <= 1e-10);
        assert!(c.symmetry_defect() <= 1e-10);
    }
}
