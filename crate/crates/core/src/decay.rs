//! Decay-rate laboratory: weighted operator norms of propagator kernels over a
//! log-spaced time grid, with least-squares exponents checked against the
//! predicted rates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Equation, ExperimentConfig, NormKind, SlopeCheck};
use crate::error::{Error, Result};
use crate::fit::{log_grid, loglog_fit, PowerFit};
use crate::jost::Window;
use crate::norms::weight;
use crate::oscillatory::wave_critical_velocity;
use crate::potential::Potential;
use crate::propagator::{
    free_schrodinger_matrix, free_wave12_row, wave_fft_size, IbpStrip, KernelKind, KernelMatrix,
    Route, SchrodingerBases, WaveBases,
};
use crate::spectral::{ThetaGrid, C64};

/// Band of Fourier coefficients reserved for T, R± when sizing wave FFTs.
const WAVE_BASE_BAND: i64 = 64;

/// sup |K_{n,k}|, the ℓ¹ → ℓ∞ norm of the windowed kernel.
pub fn op_norm_l1_linf(k: &KernelMatrix) -> f64 {
    k.max_abs()
}

/// sup |K_{n,k}| / ((1+|n|)(1+|k|)), the ℓ¹₁ → ℓ∞₋₁ norm.
pub fn op_norm_l11_linfm1(k: &KernelMatrix) -> f64 {
    k.iter()
        .map(|(n, m, v)| v.norm() / (weight(n, 1.0) * weight(m, 1.0)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedL2 {
    /// √Σ |K_{n,k}|² (1+|n|)^{−2σ} (1+|k|)^{−2σ}.
    pub hs: f64,
    /// Largest singular value of diag(w)·K·diag(w), w_n = (1+|n|)^{−σ}.
    pub singular: f64,
}

/// ℓ²_σ → ℓ²_{−σ} norm of the windowed kernel, plus its Hilbert–Schmidt bound.
/// Any finite σ is accepted here; decay claims need σ > 1/2.
pub fn op_norm_weighted_l2(k: &KernelMatrix, sigma: f64) -> Result<WeightedL2> {
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "weight exponent σ = {sigma} must be finite"
        )));
    }
    let wr: Vec<f64> = k.rows.iter().map(|n| weight(*n, -sigma)).collect();
    let wc: Vec<f64> = k.cols.iter().map(|n| weight(*n, -sigma)).collect();
    let m = nalgebra::DMatrix::<C64>::from_fn(k.rows.len(), k.cols.len(), |i, j| {
        k.get(i, j) * (wr[i] * wc[j])
    });
    let hs = m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let singular = m.singular_values().iter().copied().fold(0.0, f64::max);
    Ok(WeightedL2 { hs, singular })
}

/// Log-log least squares with the sampling requirements of a decay claim:
/// at least 8 strictly increasing times spanning two decades, positive values.
pub fn decay_rate_fit(t: &[f64], values: &[f64]) -> Result<PowerFit> {
    if t.len() < 8 {
        return Err(Error::Fit(format!(
            "need at least 8 times, got {}",
            t.len()
        )));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Fit("time grid must be strictly increasing".into()));
    }
    if t[0] <= 0.0 || t[t.len() - 1] / t[0] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Fit(format!(
            "time grid [{}, {}] spans less than two decades",
            t[0],
            t[t.len() - 1]
        )));
    }
    loglog_fit(t, values)
}

/// Rows and columns of the kernel evaluated at one time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormWindow {
    pub rows: (i64, i64),
    pub cols: (i64, i64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayPoint {
    pub t: f64,
    pub value: f64,
    /// Hilbert–Schmidt companion for weighted ℓ² norms.
    pub hs: Option<f64>,
    pub window: NormWindow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayExperiment {
    pub label: String,
    pub potential: String,
    pub equation: Equation,
    pub norm: NormKind,
    pub points: Vec<DecayPoint>,
    pub fitted_slope: f64,
    pub slope_ci: f64,
    pub check: SlopeCheck,
    pub passed: bool,
    pub method: BTreeMap<String, String>,
}

impl DecayExperiment {
    pub fn t_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value,hs,row_lo,row_hi,col_lo,col_hi\n");
        for p in &self.points {
            let hs = p.hs.map_or(String::new(), |v| format!("{v:.17e}"));
            let _ = writeln!(
                s,
                "{:.17e},{:.17e},{hs},{},{},{},{}",
                p.t, p.value, p.window.rows.0, p.window.rows.1, p.window.cols.0, p.window.cols.1
            );
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct DecayReport<'a> {
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub experiment: &'a DecayExperiment,
}

/// Writes `<label>.csv` and `<label>.json` into `dir`.
pub fn write_report(
    dir: &Path,
    cfg: &ExperimentConfig,
    exp: &DecayExperiment,
) -> Result<[PathBuf; 2]> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", cfg.label));
    let json = dir.join(format!("{}.json", cfg.label));
    std::fs::write(&csv, exp.to_csv())?;
    let report = DecayReport {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        experiment: exp,
    };
    std::fs::write(&json, serde_json::to_string_pretty(&report)?)?;
    Ok([csv, json])
}

/// Kernel evaluator, built once per experiment and reused for every t.
enum Engine {
    FreeSchrodinger,
    Ibp(IbpStrip),
    Bases(SchrodingerBases),
    FreeWave { mu: f64 },
    Wave(WaveBases),
}

impl Engine {
    fn name(&self) -> &'static str {
        match self {
            Engine::FreeSchrodinger => "bessel_closed_form",
            Engine::Ibp(_) => "ibp_fourier_bessel",
            Engine::Bases(_) => "direct_fourier_bessel",
            Engine::FreeWave { .. } => "free_wave_fft",
            Engine::Wave(_) => "direct_fft",
        }
    }

    fn kernel(&self, rows: Window, cols: Window, t: f64) -> Result<KernelMatrix> {
        let (r, c): (Vec<i64>, Vec<i64>) = (rows.iter().collect(), cols.iter().collect());
        match self {
            Engine::FreeSchrodinger => Ok(free_schrodinger_matrix(r, c, t)),
            Engine::Ibp(strip) => strip.kernel(c, t),
            Engine::Bases(b) => b.kernel(r, c, t),
            Engine::FreeWave { mu } => {
                let mmax = (rows.hi - cols.lo).abs().max((cols.hi - rows.lo).abs()) as usize;
                let s = free_wave12_row(*mu, t, mmax)?;
                let values = r
                    .iter()
                    .flat_map(|n| c.iter().map(move |k| (n - k).unsigned_abs() as usize))
                    .map(|m| C64::new(s[m], 0.0))
                    .collect();
                Ok(KernelMatrix::new(KernelKind::Wave12Free, t, r, c, values))
            }
            Engine::Wave(w) => w.kernel(r, c, t),
        }
    }
}

/// Speed bounding the support of the kernel's bulk.
fn front_speed(eq: Equation) -> f64 {
    match eq {
        Equation::Schrodinger => 2.0,
        Equation::Wave { mu } => wave_critical_velocity(mu),
    }
}

/// Rows and columns evaluated at time t for the configured norm.
pub fn norm_window(cfg: &ExperimentConfig, t: f64) -> (Window, Window) {
    match cfg.norm {
        NormKind::L2Sigma { .. } => {
            let w = Window::symmetric(cfg.l2_window);
            (w, w)
        }
        NormKind::L1ToLinf | NormKind::L11ToLinfM1 => {
            let reach = (front_speed(cfg.equation) * t + 10.0 * t.cbrt()).ceil() as i64;
            (
                Window::symmetric(cfg.rows_half),
                Window::symmetric(reach + cfg.rows_half + 10),
            )
        }
    }
}

fn build_engine(cfg: &ExperimentConfig, q: &Potential, t_max: f64) -> Result<Engine> {
    let (rows, cols) = norm_window(cfg, t_max);
    match (cfg.equation, q.is_zero()) {
        (Equation::Schrodinger, true) => Ok(Engine::FreeSchrodinger),
        (Equation::Schrodinger, false) => match cfg.route {
            Route::Ibp => Ok(Engine::Ibp(IbpStrip::new(q, rows.iter().collect())?)),
            Route::Direct => Ok(Engine::Bases(SchrodingerBases::new(
                q,
                &ThetaGrid::new(cfg.grid_pow)?,
            ))),
            Route::CaseSplit => Err(Error::Config(
                "decay experiments use the `direct` or `ibp` route".into(),
            )),
        },
        (Equation::Wave { mu }, true) => Ok(Engine::FreeWave { mu }),
        (Equation::Wave { mu }, false) => {
            if cfg.route != Route::Direct {
                return Err(Error::Config(
                    "perturbed wave kernels are available on the `direct` route only".into(),
                ));
            }
            let reach = rows.hi.max(cols.hi);
            let n_fft = wave_fft_size(mu, t_max, 2 * reach, WAVE_BASE_BAND);
            Ok(Engine::Wave(WaveBases::new(q, mu, n_fft)?))
        }
    }
}

fn evaluate(cfg: &ExperimentConfig, engine: &Engine, t: f64) -> Result<DecayPoint> {
    let (rows, cols) = norm_window(cfg, t);
    let k = engine.kernel(rows, cols, t)?;
    let (value, hs) = match cfg.norm {
        NormKind::L1ToLinf => (op_norm_l1_linf(&k), None),
        NormKind::L11ToLinfM1 => (op_norm_l11_linfm1(&k), None),
        NormKind::L2Sigma { sigma } => {
            let w = op_norm_weighted_l2(&k, sigma)?;
            (w.singular, Some(w.hs))
        }
    };
    Ok(DecayPoint {
        t,
        value,
        hs,
        window: NormWindow {
            rows: (rows.lo, rows.hi),
            cols: (cols.lo, cols.hi),
        },
    })
}

/// Evaluates the configured norm on the time grid and fits its exponent.
/// Errors carry the name of the stage that failed.
pub fn run_experiment(cfg: &ExperimentConfig, q: &Potential) -> Result<DecayExperiment> {
    cfg.validate().map_err(|e| e.at_stage("config"))?;
    if let NormKind::L2Sigma { sigma } = cfg.norm {
        if sigma <= 0.5 {
            return Err(Error::Config(format!(
                "σ = {sigma} ≤ 1/2 does not support a weighted ℓ² decay claim"
            ))
            .at_stage("config"));
        }
    }
    let t_grid = log_grid(cfg.t_min, cfg.t_max, cfg.t_count);
    let engine = build_engine(cfg, q, cfg.t_max).map_err(|e| e.at_stage("engine"))?;
    let mut points = t_grid
        .par_iter()
        .map(|t| evaluate(cfg, &engine, *t))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("kernels"))?;
    points.sort_by(|a, b| a.t.total_cmp(&b.t));
    let t: Vec<f64> = points.iter().map(|p| p.t).collect();
    let v: Vec<f64> = points.iter().map(|p| p.value).collect();
    let fit = decay_rate_fit(&t, &v).map_err(|e| e.at_stage("fit"))?;
    let mut method = BTreeMap::new();
    method.insert("engine".to_string(), engine.name().to_string());
    method.insert("route".to_string(), cfg.route.to_string());
    method.insert("intercept".to_string(), fit.intercept.to_string());
    if let Engine::Wave(w) = &engine {
        method.insert("fft_size".to_string(), w.fft_size().to_string());
    }
    Ok(DecayExperiment {
        label: cfg.label.clone(),
        potential: q.name().to_string(),
        equation: cfg.equation,
        norm: cfg.norm,
        points,
        fitted_slope: fit.slope,
        slope_ci: fit.ci,
        check: cfg.check,
        passed: cfg.check.passes(fit.slope),
        method,
    })
}
