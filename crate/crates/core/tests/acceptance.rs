//! Acceptance suite: one PASS/FAIL line per criterion, each with its measured
//! quantities and runtime against its budget.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lattice_dispersion::config::ExperimentConfig;
use lattice_dispersion::decay::{decay_rate_fit, run_experiment, DecayExperiment};
use lattice_dispersion::fit::log_grid;
use lattice_dispersion::jost::Window;
use lattice_dispersion::oscillatory::{
    full_circle_magnitudes, oscillatory_integral, vdc_family, wave_critical_velocity,
    PhaseFunction, QuadMode,
};
use lattice_dispersion::propagator::{
    free_schrodinger_kernel, free_wave_kernels, perturbed_schrodinger_kernel,
    perturbed_schrodinger_matrix, LatticeOracle, Route, SpectralFilter,
};
use lattice_dispersion::scattering::{
    bound_states, check_scattering_relation, detect_resonance, wiener_tails, wronskian, Edge,
    ScatteringData, ScatteringPoint,
};
use lattice_dispersion::{Potential, Result, SpectralPoint, ThetaGrid, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn preset(name: &str) -> Result<DecayExperiment> {
    let cfg = ExperimentConfig::preset(name)?;
    let q = cfg.load_potential(None)?;
    run_experiment(&cfg, &q)
}

fn describe(e: &DecayExperiment) -> String {
    format!(
        "{} slope {:.4} ± {:.4} (target {})",
        e.label, e.fitted_slope, e.slope_ci, e.check
    )
}

fn c1_free_kernel_identity() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for t in [1.0, 5.0, 10.0, 50.0] {
        for m in -60i64..=60 {
            // (1/2π)∫ e^{−it(φ₀ + (m/t)θ)} dθ with the shift folded into the phase.
            let phase = PhaseFunction::schrodinger(m as f64 / t);
            let v = oscillatory_integral(&phase, &|_| C64::new(1.0, 0.0), t, QuadMode::Adaptive)?
                / (2.0 * PI);
            worst = worst.max((v - free_schrodinger_kernel(0, m, t)).norm());
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max |quadrature − Bessel| = {worst:.2e}"),
    )
}

fn c2_free_decay() -> Result<Outcome> {
    let l1 = preset("free_l1")?;
    let l2 = preset("free_l2")?;
    outcome(
        l1.passed && l2.passed,
        format!("{}; {}", describe(&l1), describe(&l2)),
    )
}

fn c3_delta_closed_forms() -> Result<Outcome> {
    let q = Potential::delta(0, 2.0);
    let w_err = (0..64)
        .map(|j| -PI + 2.0 * PI * (j as f64 + 0.5) / 64.0)
        .map(|th| {
            let w = wronskian(&q, &SpectralPoint::real(th)).expect("real angle");
            (w - C64::new(2.0, 2.0 * th.sin())).norm()
        })
        .fold(0.0, f64::max);
    let bs = bound_states(&q)?;
    let omega_err = match bs.as_slice() {
        [b] => (b.omega - (2.0 + 2.0 * 2f64.sqrt())).abs(),
        _ => f64::INFINITY,
    };
    let generic = [Edge::Zero, Edge::Four]
        .iter()
        .all(|e| !detect_resonance(&q, *e).flag.resonant);
    let t2 = ScatteringPoint::new(&q, -PI / 2.0).t.norm_sqr();
    outcome(
        w_err <= 1e-10 && omega_err <= 1e-8 && generic && (t2 - 0.5).abs() <= 1e-10,
        format!(
            "W err {w_err:.1e}; {} bound state(s), ω err {omega_err:.1e}; non-resonant {generic}; |T(−π/2)|² = {t2:.12}",
            bs.len()
        ),
    )
}

fn c4_scattering_identities() -> Result<Outcome> {
    let grid = ThetaGrid::new(10)?;
    let angles: Vec<f64> = (0..64)
        .map(|j| -PI + 2.0 * PI * (j as f64 + 0.5) / 64.0)
        .collect();
    let (mut unit, mut cons, mut rel) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let q = Potential::random(&mut rng, -4, 9, 1.5);
        let data = ScatteringData::compute(&q, &grid);
        unit = unit.max(data.unitarity_defect());
        cons = cons.max(data.consistency_defect());
        for th in &angles {
            rel = rel.max(check_scattering_relation(&q, *th, Window::symmetric(20)));
        }
    }
    outcome(
        unit <= 1e-9 && cons <= 1e-9 && rel <= 1e-9,
        format!("unitarity {unit:.1e}, consistency {cons:.1e}, scattering relation {rel:.1e}"),
    )
}

fn c5_oracle_equivalence() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let potentials = [
        Potential::delta(0, 2.0),
        Potential::random(&mut rng, -3, 7, 1.0),
    ];
    let window = Window::symmetric(30);
    let mut worst: f64 = 0.0;
    for q in &potentials {
        let oracle = LatticeOracle::new(q, 1500, SpectralFilter::ContinuousOnly)?;
        for t in [5.0, 20.0, 40.0] {
            let a = perturbed_schrodinger_matrix(q, window, t, Route::Direct)?;
            let b = oracle.schrodinger(window, t)?;
            worst = worst.max(a.max_abs_diff(&b)?);
        }
    }
    outcome(worst <= 1e-5, format!("max |Jost − lattice| = {worst:.2e}"))
}

fn c6_non_resonant_decay() -> Result<Outcome> {
    let q = Potential::delta(0, 2.0);
    let t = 100.0;
    let idx = [-40i64, -7, -1, 0, 1, 3, 25];
    let mut worst: f64 = 0.0;
    for &n in &idx {
        for &k in &idx {
            let a = perturbed_schrodinger_kernel(&q, n, k, t, Route::Ibp)?;
            let b = perturbed_schrodinger_kernel(&q, n, k, t, Route::Direct)?;
            worst = worst.max((a - b).norm());
        }
    }
    let l11 = preset("delta_l11")?;
    let l2 = preset("delta_l2")?;
    outcome(
        l11.passed && l2.passed && worst <= 1e-7,
        format!(
            "{}; {}; |ibp − direct| at t = 100: {worst:.1e}",
            describe(&l11),
            describe(&l2)
        ),
    )
}

fn c7_resonant_contrast() -> Result<Outcome> {
    let e = preset("free_l11")?;
    outcome(e.passed, describe(&e))
}

fn c8_wiener_tails() -> Result<Outcome> {
    let grid = ThetaGrid::new(12)?;
    let cutoffs = [256, 512, 1024];
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [Potential::zero(), Potential::delta(0, 2.0)] {
        let tails = wiener_tails(&ScatteringData::compute(&q, &grid), &cutoffs);
        for (name, v, raw) in [
            ("T", &tails.t_resolved, &tails.t),
            ("R+", &tails.r_plus_resolved, &tails.r_plus),
            ("R-", &tails.r_minus_resolved, &tails.r_minus),
        ] {
            ok &= v.windows(2).all(|w| w[1] <= 0.6 * w[0]);
            parts.push(format!(
                "{}:{name} {:.1e}/{:.1e}/{:.1e} (raw {:.1e}/{:.1e}/{:.1e})",
                q.name(),
                v[0],
                v[1],
                v[2],
                raw[0],
                raw[1],
                raw[2]
            ));
        }
    }
    outcome(
        ok,
        format!("resolved tails at M = 256/512/1024: {}", parts.join(", ")),
    )
}

fn c9_van_der_corput() -> Result<Outcome> {
    let family = vdc_family(
        &[0.0, 0.5, 1.0, 1.5, 2.0],
        &log_grid(10.0, 1e3, 5),
        &ThetaGrid::new(10)?,
    )?;
    let max_c = family
        .iter()
        .map(|e| e.report.max_constant)
        .fold(0.0, f64::max);
    let t = log_grid(1e2, 1e4, 16);
    let fit = decay_rate_fit(&t, &full_circle_magnitudes(2.0, &t)?)?;
    outcome(
        max_c.is_finite() && (fit.slope + 1.0 / 3.0).abs() <= 0.02,
        format!(
            "{} cases, max normalized constant {max_c:.3}; degenerate slope {:.4} ± {:.4}",
            family.len(),
            fit.slope,
            fit.ci
        ),
    )
}

/// max over θ ∈ [0, π] of |g'(θ)| = sinθ/√(2 − 2cosθ + μ²), by grid search
/// and golden-section refinement.
fn max_group_velocity(mu: f64) -> f64 {
    let gp = |th: f64| th.sin() / (2.0 - 2.0 * th.cos() + mu * mu).sqrt();
    let n = 4096;
    let j = (0..=n)
        .max_by(|a, b| gp(PI * *a as f64 / n as f64).total_cmp(&gp(PI * *b as f64 / n as f64)))
        .unwrap_or(0);
    let (mut a, mut b) = (
        PI * (j.max(1) - 1) as f64 / n as f64,
        PI * (j + 1).min(n) as f64 / n as f64,
    );
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-14 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if gp(c) > gp(d) {
            b = d;
        } else {
            a = c;
        }
    }
    gp(0.5 * (a + b))
}

fn c10_wave() -> Result<Outcome> {
    let free = preset("wave_free_l1")?;
    let v0 = wave_critical_velocity(1.0);
    let v0_ref = max_group_velocity(1.0);
    let v0_ok = (v0 - v0_ref).abs() <= 1e-9 && (v0 - 0.618034).abs() <= 5e-7;
    let (_, s0) = free_wave_kernels(0, 1e3)?;
    let l11 = preset("wave_delta_l11")?;
    let l2 = preset("wave_delta_l2")?;
    outcome(
        free.passed && v0_ok && (s0 - 0.5).abs() <= 0.05 && l11.passed && l2.passed,
        format!(
            "{}; v₀(1) = {v0:.12} vs max|g'| = {v0_ref:.12}; s₀(10³) = {s0:.4}; {}; {}",
            describe(&free),
            describe(&l11),
            describe(&l2)
        ),
    )
}

type Criterion = (u32, &'static str, u64, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    // (number, name, budget in seconds, check)
    let criteria: [Criterion; 10] = [
        (1, "free-kernel identity", 30, c1_free_kernel_identity),
        (2, "free Schrödinger decay", 300, c2_free_decay),
        (3, "delta-potential closed forms", 5, c3_delta_closed_forms),
        (4, "scattering identities", 120, c4_scattering_identities),
        (5, "oracle equivalence", 600, c5_oracle_equivalence),
        (6, "non-resonant decay", 1200, c6_non_resonant_decay),
        (7, "resonant contrast", 300, c7_resonant_contrast),
        (8, "Wiener-algebra tails", 60, c8_wiener_tails),
        (9, "van der Corput engine", 300, c9_van_der_corput),
        (10, "wave equation", 1200, c10_wave),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {id} ({name}): {detail} [{:.1} s of {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
