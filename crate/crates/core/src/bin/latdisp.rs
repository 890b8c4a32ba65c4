use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lattice_dispersion::config::ExperimentConfig;
use lattice_dispersion::decay::{decay_rate_fit, run_experiment, write_report};
use lattice_dispersion::fit::log_grid;
use lattice_dispersion::jost::Window;
use lattice_dispersion::oscillatory::{full_circle_magnitudes, vdc_family};
use lattice_dispersion::propagator::{
    free_schrodinger_matrix, perturbed_schrodinger_matrix, wave12_matrix, KernelMatrix, Route,
};
use lattice_dispersion::scattering::{bound_states, detect_resonance, Edge, ScatteringData};
use lattice_dispersion::{Error, Potential, Result, ThetaGrid};

#[derive(Parser)]
#[command(
    name = "latdisp",
    version,
    about = "Scattering and dispersive decay on the integer lattice"
)]
struct Cli {
    /// Experiment configuration (key = value text) for `decay`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// θ-grid of 2^k points.
    #[arg(long, global = true, default_value_t = 12)]
    grid_pow: u32,
    /// Seed for `random` potentials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PotentialArg {
    /// Builtin (`zero`, `delta`, `delta:<c>`, `power:<c>:<β>`, `random`) or a potential file.
    #[arg(long, short, default_value = "delta")]
    potential: String,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering data W, T, R± on the θ-grid.
    Scatter(PotentialArg),
    /// Resonance flags at both band edges.
    Resonance(PotentialArg),
    /// Eigenvalues outside the band.
    BoundStates(PotentialArg),
    /// Propagator kernels on a window, one CSV per time.
    Evolve {
        #[command(flatten)]
        potential: PotentialArg,
        /// Klein–Gordon mass; omit for the Schrödinger group.
        #[arg(long)]
        mu: Option<f64>,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', default_value = "10")]
        t: Vec<f64>,
        /// Half-width of the square window.
        #[arg(long, default_value_t = 10)]
        window: i64,
        #[arg(long, default_value = "direct")]
        route: Route,
    },
    /// Decay-rate experiments from `--config` or named presets.
    Decay {
        /// Preset names; `all` runs every preset.
        #[arg(long, value_delimiter = ',')]
        preset: Vec<String>,
    },
    /// van der Corput constants over the test family and the degenerate rate.
    VdcCheck {
        /// Tolerance on the degenerate slope −1/3.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
}

fn load_potential(spec: &str, seed: u64) -> Result<Potential> {
    if spec == "random" {
        return Potential::builtin(&format!("random:{seed}"));
    }
    Potential::builtin(spec).or_else(|_| Potential::from_file(Path::new(spec)))
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)?)?;
    Ok(path)
}

fn evolve(
    q: &Potential,
    mu: Option<f64>,
    t: f64,
    window: i64,
    route: Route,
) -> Result<KernelMatrix> {
    let w = Window::symmetric(window);
    match mu {
        Some(mu) => wave12_matrix(q, mu, w, t),
        None if q.is_zero() => {
            Ok(
                free_schrodinger_matrix(w.iter().collect(), w.iter().collect(), t)
                    .with_method("route", "bessel_closed_form"),
            )
        }
        None => perturbed_schrodinger_matrix(q, w, t, route),
    }
}

/// Runs the command; Ok(false) when a configured criterion fails.
fn run(cli: Cli) -> Result<bool> {
    let out = &cli.out;
    match cli.command {
        Command::Scatter(p) => {
            let q = load_potential(&p.potential, cli.seed)?;
            let data = ScatteringData::compute(&q, &ThetaGrid::new(cli.grid_pow)?);
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join("scatter.csv"), data.to_csv())?;
            let summary = json!({
                "potential": q.name(),
                "grid_pow": cli.grid_pow,
                "unitarity_defect": data.unitarity_defect(),
                "consistency_defect": data.consistency_defect(),
                "max_abs_t": data.max_abs_t(),
                "resonant_at_0": data.resonant_at_0,
                "resonant_at_4": data.resonant_at_4,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            write_json(out, "scatter.json", &summary)?;
            Ok(true)
        }
        Command::Resonance(p) => {
            let q = load_potential(&p.potential, cli.seed)?;
            let r = [Edge::Zero, Edge::Four].map(|e| detect_resonance(&q, e));
            let v = json!({ "potential": q.name(), "edges": r });
            println!("{}", serde_json::to_string_pretty(&v)?);
            write_json(out, "resonance.json", &v)?;
            Ok(true)
        }
        Command::BoundStates(p) => {
            let q = load_potential(&p.potential, cli.seed)?;
            let v = json!({ "potential": q.name(), "bound_states": bound_states(&q)? });
            println!("{}", serde_json::to_string_pretty(&v)?);
            write_json(out, "bound_states.json", &v)?;
            Ok(true)
        }
        Command::Evolve {
            potential,
            mu,
            t,
            window,
            route,
        } => {
            let q = load_potential(&potential.potential, cli.seed)?;
            std::fs::create_dir_all(out)?;
            let mut entries = Vec::new();
            for (i, &ti) in t.iter().enumerate() {
                let k = evolve(&q, mu, ti, window, route)
                    .map_err(|e| e.at_stage(format!("evolve t = {ti}")))?;
                let file = format!("kernel_{i:03}.csv");
                std::fs::write(out.join(&file), k.to_csv())?;
                entries.push(json!({ "t": ti, "file": file, "kind": k.kind, "method": k.method }));
            }
            let manifest = json!({
                "version": env!("CARGO_PKG_VERSION"),
                "potential": q.name(),
                "mu": mu,
                "window": window,
                "route": route.to_string(),
                "kernels": entries,
            });
            write_json(out, "manifest.json", &manifest)?;
            Ok(true)
        }
        Command::Decay { preset } => {
            let mut configs = Vec::new();
            if let Some(path) = &cli.config {
                configs.push((
                    ExperimentConfig::from_file(path)?,
                    path.parent().map(Path::to_path_buf),
                ));
            }
            let names: Vec<String> = if preset.iter().any(|p| p == "all") {
                ExperimentConfig::PRESETS
                    .iter()
                    .map(|s| s.to_string())
                    .collect()
            } else {
                preset
            };
            for name in names {
                configs.push((ExperimentConfig::preset(&name)?, None));
            }
            if configs.is_empty() {
                return Err(Error::Config("give --config or --preset".into()));
            }
            let mut all = true;
            for (mut cfg, base) in configs {
                if cfg.potential == "random" {
                    cfg.potential = format!("random:{}", cli.seed);
                }
                let q = cfg.load_potential(base.as_deref())?;
                let exp = run_experiment(&cfg, &q)?;
                write_report(out, &cfg, &exp)?;
                println!(
                    "{} {}: slope {:.4} ± {:.4} (target {})",
                    if exp.passed { "PASS" } else { "FAIL" },
                    cfg.label,
                    exp.fitted_slope,
                    exp.slope_ci,
                    exp.check
                );
                all &= exp.passed;
            }
            Ok(all)
        }
        Command::VdcCheck { tolerance } => {
            let grid = ThetaGrid::new(cli.grid_pow)?;
            let family = vdc_family(&[0.0, 0.5, 1.0, 1.5, 2.0], &log_grid(10.0, 1e3, 5), &grid)?;
            let max_constant = family
                .iter()
                .map(|e| e.report.max_constant)
                .fold(0.0, f64::max);
            let t = log_grid(1e2, 1e4, 16);
            let mags = full_circle_magnitudes(2.0, &t)?;
            let fit = decay_rate_fit(&t, &mags)?;
            let finite = max_constant.is_finite();
            let slope_ok = (fit.slope + 1.0 / 3.0).abs() <= tolerance;
            let v = json!({
                "max_normalized_constant": max_constant,
                "family": family,
                "degenerate": { "t": t, "abs_integral": mags, "slope": fit.slope, "ci": fit.ci },
                "constants_finite": finite,
                "degenerate_slope_ok": slope_ok,
            });
            write_json(out, "vdc_check.json", &v)?;
            println!(
                "max normalized constant {max_constant:.4}, degenerate slope {:.4}",
                fit.slope
            );
            Ok(finite && slope_ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
