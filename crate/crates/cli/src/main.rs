use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use twinbeam::gaussian::{extract_mode_sets, purity_from_determinant, CovarianceMatrix};
use twinbeam::scenario::{resolve_cache_dir, run_scenario, write_outputs, RunOptions, ScenarioConfig, Source};
use twinbeam::Error;

#[derive(Parser)]
#[command(name = "twinbeam", version, about = "Twin-beam squeezed light source simulator")]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a gain sweep and write summary and curve files.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Resample the gain list to this many log-spaced points.
        #[arg(long)]
        gain_points: Option<usize>,
        /// Propagator cache directory (overridden by TWINBEAM_CACHE_DIR).
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Design the poling profile of a configuration and print it as JSON.
    PoleDesign {
        config: PathBuf,
        /// Write the profile here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a covariance matrix file into squeezed and thermal modes.
    Decompose { covariance: PathBuf },
}

fn simulate(config: &Path, out: &Path, gain_points: Option<usize>, cache: Option<&Path>) -> twinbeam::Result<()> {
    let cfg = ScenarioConfig::load(config)?;
    let opts = RunOptions {
        gain_points,
        cache_dir: resolve_cache_dir(cache),
    };
    let res = run_scenario(&cfg, &opts)?;
    for p in write_outputs(&res, out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn pole_design(config: &Path, out: Option<&Path>) -> twinbeam::Result<()> {
    let cfg = ScenarioConfig::load(config)?;
    let src = Source::from_config(&cfg)?;
    let text = src.profile.to_json();
    match out {
        Some(p) => std::fs::write(p, &text).map_err(|e| Error::Config {
            field: "out".into(),
            reason: format!("{}: {e}", p.display()),
        })?,
        None => println!("{text}"),
    }
    eprintln!(
        "{} domains, max tracking error {}",
        src.profile.len(),
        src.design.as_ref().map_or(0.0, |d| d.max_error)
    );
    Ok(())
}

fn decompose(path: &Path) -> twinbeam::Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        field: "covariance".into(),
        reason: format!("{}: {e}", path.display()),
    })?;
    let (v, dw) = CovarianceMatrix::from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::Config {
            field: "covariance".into(),
            reason: j.to_string(),
        },
        other => other,
    })?;
    let dw = dw.unwrap_or(1.0);
    let ms = extract_mode_sets(&v, dw)?;
    let pairs = |m: &Vec<Vec<twinbeam::c64>>| -> Vec<Vec<[f64; 2]>> {
        m.iter().map(|v| v.iter().map(|x| [x.re, x.im]).collect()).collect()
    };
    let out = json!({
        "modes": v.modes(),
        "symplectic_eigenvalues": ms.williamson.nu,
        "purity": ms.purity(),
        "purity_determinant": purity_from_determinant(&v)?,
        "squeezing": ms.r,
        "squeeze_signal": pairs(&ms.squeeze_signal),
        "squeeze_idler": pairs(&ms.squeeze_idler),
        "thermal_signal_nbar": ms.thermal_signal_nbar,
        "thermal_idler_nbar": ms.thermal_idler_nbar,
        "thermal_signal": pairs(&ms.thermal_signal),
        "thermal_idler": pairs(&ms.thermal_idler),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Simulate {
            config,
            out,
            gain_points,
            cache,
        } => simulate(config, out, *gain_points, cache.as_deref()),
        Command::PoleDesign { config, out } => pole_design(config, out.as_deref()),
        Command::Decompose { covariance } => decompose(covariance),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
