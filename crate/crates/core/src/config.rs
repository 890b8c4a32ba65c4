//! Decay-experiment configuration as plain `key = value` text.
//!
//! ```text
//! # q = 2δ₀, weighted sup norm
//! label = delta_l11
//! equation = schrodinger
//! potential = delta
//! norm = l11_to_linfm1
//! route = ibp
//! t_min = 100
//! t_max = 10000
//! t_count = 16
//! expected_slope = -1.333333
//! tolerance = 0.1
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::propagator::Route;

/// Weighted ℓ² norms of wave kernels beat between the two stationary points
/// ±θ₀; 16 samples alias that beating, so the wave ℓ² presets use 64.
pub const WAVE_L2_T_COUNT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Schrodinger,
    Wave { mu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1ToLinf,
    L2Sigma { sigma: f64 },
    L11ToLinfM1,
}

/// What the fitted slope must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeCheck {
    Within { expected: f64, tolerance: f64 },
    AtLeast(f64),
    AtMost(f64),
}

impl SlopeCheck {
    pub fn passes(&self, slope: f64) -> bool {
        match *self {
            SlopeCheck::Within {
                expected,
                tolerance,
            } => (slope - expected).abs() <= tolerance,
            SlopeCheck::AtLeast(b) => slope >= b,
            SlopeCheck::AtMost(b) => slope <= b,
        }
    }
}

impl std::fmt::Display for SlopeCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlopeCheck::Within {
                expected,
                tolerance,
            } => write!(f, "{expected:.4} ± {tolerance}"),
            SlopeCheck::AtLeast(b) => write!(f, "≥ {b}"),
            SlopeCheck::AtMost(b) => write!(f, "≤ {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub label: String,
    pub equation: Equation,
    /// Builtin name (`zero`, `delta`, `delta:<s>`, `power:<c>:<β>`, `random:<seed>`) or a file path.
    pub potential: String,
    pub norm: NormKind,
    pub route: Route,
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub check: SlopeCheck,
    /// Rows |n| ≤ rows_half for the sup norms.
    pub rows_half: i64,
    /// Square window |n|, |k| ≤ l2_window for weighted ℓ² norms.
    pub l2_window: i64,
    pub grid_pow: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            label: "experiment".into(),
            equation: Equation::Schrodinger,
            potential: "zero".into(),
            norm: NormKind::L1ToLinf,
            route: Route::Ibp,
            t_min: 1e2,
            t_max: 1e4,
            t_count: 16,
            check: SlopeCheck::Within {
                expected: -1.0 / 3.0,
                tolerance: 0.03,
            },
            rows_half: 16,
            l2_window: 300,
            grid_pow: 12,
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::Parse {
        line,
        msg: format!("`{key}`: {e}"),
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut mu: Option<f64> = None;
        let mut equation = "schrodinger".to_string();
        let mut norm = "l1_to_linf".to_string();
        let mut sigma = 1.0;
        let (mut expected, mut tolerance) = (None, None);
        let (mut at_least, mut at_most) = (None, None);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "label" => cfg.label = value.to_string(),
                "equation" => equation = value.to_string(),
                "mu" => mu = Some(parse_num(line, key, value)?),
                "potential" => cfg.potential = value.to_string(),
                "norm" => norm = value.to_string(),
                "sigma" => sigma = parse_num(line, key, value)?,
                "route" => {
                    cfg.route = value.parse().map_err(|e: Error| Error::Parse {
                        line,
                        msg: e.to_string(),
                    })?
                }
                "t_min" => cfg.t_min = parse_num(line, key, value)?,
                "t_max" => cfg.t_max = parse_num(line, key, value)?,
                "t_count" => cfg.t_count = parse_num(line, key, value)?,
                "expected_slope" => expected = Some(parse_num(line, key, value)?),
                "tolerance" => tolerance = Some(parse_num(line, key, value)?),
                "slope_at_least" => at_least = Some(parse_num(line, key, value)?),
                "slope_at_most" => at_most = Some(parse_num(line, key, value)?),
                "rows_half" => cfg.rows_half = parse_num(line, key, value)?,
                "l2_window" => cfg.l2_window = parse_num(line, key, value)?,
                "grid_pow" => cfg.grid_pow = parse_num(line, key, value)?,
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        cfg.equation = match (equation.as_str(), mu) {
            ("schrodinger", None) => Equation::Schrodinger,
            ("schrodinger", Some(_)) => {
                return Err(Error::Config(
                    "`mu` only applies to the wave equation".into(),
                ))
            }
            ("wave", Some(mu)) => Equation::Wave { mu },
            ("wave", None) => return Err(Error::Config("the wave equation needs `mu`".into())),
            (other, _) => return Err(Error::Config(format!("unknown equation `{other}`"))),
        };
        cfg.norm = match norm.as_str() {
            "l1_to_linf" => NormKind::L1ToLinf,
            "l2sigma" => NormKind::L2Sigma { sigma },
            "l11_to_linfm1" => NormKind::L11ToLinfM1,
            other => return Err(Error::Config(format!("unknown norm `{other}`"))),
        };
        cfg.check = match (expected, tolerance, at_least, at_most) {
            (Some(expected), tol, None, None) => SlopeCheck::Within {
                expected,
                tolerance: tol.unwrap_or(0.1),
            },
            (None, None, Some(b), None) => SlopeCheck::AtLeast(b),
            (None, None, None, Some(b)) => SlopeCheck::AtMost(b),
            _ => return Err(Error::Config(
                "give exactly one of expected_slope (+ tolerance), slope_at_least, slope_at_most"
                    .into(),
            )),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::Config(format!(
                "t-range [{}, {}] must satisfy 0 < t_min < t_max",
                self.t_min, self.t_max
            )));
        }
        if self.t_count < 2 {
            return Err(Error::Config("t_count must be at least 2".into()));
        }
        if let Equation::Wave { mu } = self.equation {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(Error::Config(format!("mass μ = {mu} must be ≥ 0")));
            }
        }
        if self.rows_half < 0 || self.l2_window < 0 {
            return Err(Error::Config(
                "window half-widths must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Builtin potential name first, then a path relative to `base`.
    pub fn load_potential(&self, base: Option<&Path>) -> Result<Potential> {
        match Potential::builtin(&self.potential) {
            Ok(q) => Ok(q),
            Err(_) => {
                let path = base.map_or_else(
                    || Path::new(&self.potential).to_path_buf(),
                    |b| b.join(&self.potential),
                );
                Potential::from_file(&path)
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label = {}", self.label);
        match self.equation {
            Equation::Schrodinger => s.push_str("equation = schrodinger\n"),
            Equation::Wave { mu } => {
                let _ = writeln!(s, "equation = wave\nmu = {mu}");
            }
        }
        let _ = writeln!(s, "potential = {}", self.potential);
        match self.norm {
            NormKind::L1ToLinf => s.push_str("norm = l1_to_linf\n"),
            NormKind::L2Sigma { sigma } => {
                let _ = writeln!(s, "norm = l2sigma\nsigma = {sigma}");
            }
            NormKind::L11ToLinfM1 => s.push_str("norm = l11_to_linfm1\n"),
        }
        let _ = writeln!(s, "route = {}", self.route);
        let _ = writeln!(
            s,
            "t_min = {}\nt_max = {}\nt_count = {}",
            self.t_min, self.t_max, self.t_count
        );
        match self.check {
            SlopeCheck::Within {
                expected,
                tolerance,
            } => {
                let _ = writeln!(s, "expected_slope = {expected}\ntolerance = {tolerance}");
            }
            SlopeCheck::AtLeast(b) => {
                let _ = writeln!(s, "slope_at_least = {b}");
            }
            SlopeCheck::AtMost(b) => {
                let _ = writeln!(s, "slope_at_most = {b}");
            }
        }
        let _ = writeln!(
            s,
            "rows_half = {}\nl2_window = {}\ngrid_pow = {}",
            self.rows_half, self.l2_window, self.grid_pow
        );
        s
    }

    /// Named experiments reproducing the headline decay rates.
    pub fn preset(name: &str) -> Result<Self> {
        let base = ExperimentConfig {
            label: name.to_string(),
            ..Default::default()
        };
        let within = |expected: f64, tolerance: f64| SlopeCheck::Within {
            expected,
            tolerance,
        };
        let cfg = match name {
            "free_l1" => base,
            "free_l2" => ExperimentConfig {
                norm: NormKind::L2Sigma { sigma: 1.0 },
                check: within(-0.5, 0.05),
                ..base
            },
            "free_l11" => ExperimentConfig {
                norm: NormKind::L11ToLinfM1,
                check: SlopeCheck::AtLeast(-0.6),
                ..base
            },
            "delta_l11" => ExperimentConfig {
                potential: "delta".into(),
                norm: NormKind::L11ToLinfM1,
                check: within(-4.0 / 3.0, 0.1),
                ..base
            },
            "delta_l2" => ExperimentConfig {
                potential: "delta".into(),
                norm: NormKind::L2Sigma { sigma: 2.0 },
                check: within(-1.5, 0.1),
                ..base
            },
            "wave_free_l1" => ExperimentConfig {
                equation: Equation::Wave { mu: 1.0 },
                check: within(-1.0 / 3.0, 0.05),
                route: Route::Direct,
                ..base
            },
            "wave_delta_l11" => ExperimentConfig {
                equation: Equation::Wave { mu: 1.0 },
                potential: "delta".into(),
                norm: NormKind::L11ToLinfM1,
                check: within(-4.0 / 3.0, 0.15),
                route: Route::Direct,
                ..base
            },
            "wave_delta_l2" => ExperimentConfig {
                equation: Equation::Wave { mu: 1.0 },
                potential: "delta".into(),
                norm: NormKind::L2Sigma { sigma: 2.0 },
                check: within(-1.5, 0.15),
                route: Route::Direct,
                t_count: WAVE_L2_T_COUNT,
                ..base
            },
            "wave_massless_l2" => ExperimentConfig {
                equation: Equation::Wave { mu: 0.0 },
                potential: "delta".into(),
                norm: NormKind::L2Sigma { sigma: 3.0 },
                check: SlopeCheck::AtMost(-1.3),
                route: Route::Direct,
                t_count: WAVE_L2_T_COUNT,
                ..base
            },
            other => return Err(Error::Config(format!("unknown preset `{other}`"))),
        };
        Ok(cfg)
    }

    pub const PRESETS: [&'static str; 9] = [
        "free_l1",
        "free_l2",
        "free_l11",
        "delta_l11",
        "delta_l2",
        "wave_free_l1",
        "wave_delta_l11",
        "wave_delta_l2",
        "wave_massless_l2",
    ];
}
