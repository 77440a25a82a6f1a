use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{GainKind, Geometry, ScenarioConfig};
use crate::calibrate::{calibrate_pump_power, Calibration, CalibrationOptions};
use crate::error::{Error, Result};
use crate::filter::FilterFunction;
use crate::gaussian::{
    covariance_from_correlators, extract_mode_sets, fidelity_matrix, filter_pure_mode, filter_samples,
    filtered_correlators, purity_from_determinant, PURE_PATH_THRESHOLD,
};
use crate::grid::FrequencyGrid;
use crate::medium::MediumSpec;
use crate::poling::{design_domains, PmfTarget, PolingDesign, PolingProfile};
use crate::propagator::{double_pass_propagator, stitch, CacheHeader, Propagator};
use crate::pump::PumpSpectrum;
use crate::schmidt::{
    jsa, mode_fidelity, schmidt_decompose, schmidt_number, schmidt_number_of, Correlators, JsaMatrix,
    SchmidtDecomposition,
};

/// Grid size used for the first calibration pass on large grids.
pub const COARSE_POINTS: usize = 101;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Resample the gain list to this many log-spaced points.
    pub gain_points: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

/// Everything needed to build propagators for one geometry.
#[derive(Debug, Clone)]
pub struct Source {
    pub geometry: Geometry,
    pub grid: FrequencyGrid,
    pub medium: MediumSpec,
    pub pump: PumpSpectrum,
    pub profile: PolingProfile,
    pub design: Option<PolingDesign>,
    pub target: Option<PmfTarget>,
}

impl Source {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let grid = cfg.grid()?;
        let medium = cfg.medium()?;
        let pump = cfg.pump()?;
        let n = cfg.medium.n_domains;
        let (profile, design, target) = if cfg.geometry.is_apodized() {
            let sigma_th = 1.0 / (cfg.pump.sigma * cfg.medium.kappa.abs());
            let target = PmfTarget::new(sigma_th, cfg.medium.length)?;
            let design = design_domains(&target, n)?;
            (design.profile.clone(), Some(design), Some(target))
        } else {
            (PolingProfile::uniform(cfg.medium.length, n)?, None, None)
        };
        Ok(Self {
            geometry: cfg.geometry,
            grid,
            medium,
            pump,
            profile,
            design,
            target,
        })
    }

    pub fn with_grid(&self, grid: FrequencyGrid) -> Self {
        Self { grid, ..self.clone() }
    }

    pub fn propagator(&self, pump_photons: f64) -> Result<Propagator> {
        let pump = self.pump.with_photons(pump_photons);
        match self.geometry {
            Geometry::ApodizedDouble => double_pass_propagator(&self.grid, &self.medium, &pump, &self.profile),
            _ => stitch(&self.profile, &self.grid, &self.medium, &pump),
        }
    }

    pub fn cache_header(&self, pump_photons: f64) -> CacheHeader {
        let pump = self.pump.with_photons(pump_photons);
        let tag: &[u8] = match self.geometry {
            Geometry::ApodizedDouble => b"double",
            _ => b"single",
        };
        let marker = PolingProfile::new(1.0, tag.iter().map(|&b| if b % 2 == 0 { 1 } else { -1 }).collect())
            .expect("nonempty marker");
        CacheHeader::for_inputs(&self.grid, &self.medium, &[&self.profile, &marker], &pump)
    }
}

/// Directory of cached propagators keyed by input digests.
#[derive(Debug, Clone)]
pub struct PropagatorCache {
    dir: PathBuf,
}

impl PropagatorCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    fn path(&self, header: &CacheHeader) -> PathBuf {
        self.dir.join(format!("{}.twbprop", header.tag()))
    }

    pub fn get(&self, header: &CacheHeader) -> Option<Propagator> {
        let bytes = std::fs::read(self.path(header)).ok()?;
        match Propagator::from_cache_bytes(&bytes) {
            Ok((h, p)) if h == *header => Some(p),
            Ok(_) => None,
            Err(e) => {
                log::warn!("ignoring unreadable cache entry: {e}");
                None
            }
        }
    }

    pub fn put(&self, header: &CacheHeader, p: &Propagator) -> Result<()> {
        let path = self.path(header);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, p.to_cache_bytes(header)).map_err(|e| Error::Cache(e.to_string()))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::Cache(e.to_string()))
    }

    fn calibration_path(&self, src: &Source) -> PathBuf {
        self.dir.join(format!("{}.calib.json", src.cache_header(0.0).tag()))
    }

    /// Previously calibrated `(target, N_P)` pairs for this source.
    pub fn calibrations(&self, src: &Source) -> Vec<(f64, f64)> {
        std::fs::read_to_string(self.calibration_path(src))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default()
    }

    pub fn store_calibrations(&self, src: &Source, pairs: &[(f64, f64)]) -> Result<()> {
        let mut all = self.calibrations(src);
        for &(t, np) in pairs {
            all.retain(|&(x, _)| x != t);
            all.push((t, np));
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        std::fs::write(self.calibration_path(src), serde_json::to_string(&all)?)
            .map_err(|e| Error::Cache(e.to_string()))
    }
}

fn signal_photons(u: &Propagator) -> f64 {
    u.u_si().norm_l2().powi(2)
}

/// Calibrated state at one gain point.
#[derive(Debug, Clone)]
pub struct GainState {
    pub target: f64,
    pub pump_photons: f64,
    pub mean_signal_photons: f64,
    pub decomposition: SchmidtDecomposition,
}

/// Calibrated states for a list of gain values.
#[derive(Debug, Clone)]
pub struct StateSweep {
    pub source: Source,
    pub kind: GainKind,
    pub states: Vec<GainState>,
    /// Absent when there are no gain points.
    pub reference: Option<GainState>,
}

fn coarse_grid(grid: &FrequencyGrid) -> Option<FrequencyGrid> {
    if grid.len() <= COARSE_POINTS {
        return None;
    }
    FrequencyGrid::new(grid.omega_min(), grid.omega_max(), COARSE_POINTS).ok()
}

fn cached_or_build(src: &Source, cache: Option<&PropagatorCache>, np: f64) -> Result<Propagator> {
    if let Some(c) = cache {
        let h = src.cache_header(np);
        if let Some(p) = c.get(&h) {
            return Ok(p);
        }
        let p = src.propagator(np)?;
        c.put(&h, &p)?;
        return Ok(p);
    }
    src.propagator(np)
}

fn calibrate_fine(
    src: &Source,
    target: f64,
    guess: Option<(f64, Option<f64>)>,
    cache: Option<&PropagatorCache>,
) -> Result<Calibration<Propagator>> {
    let opts = CalibrationOptions {
        initial_pump_photons: guess.map(|g| g.0),
        initial_slope: guess.and_then(|g| g.1),
        ..Default::default()
    };
    let cal = calibrate_pump_power(target, &opts, |np| {
        let u = src.propagator(np)?;
        Ok((signal_photons(&u), u))
    })?;
    if let Some(c) = cache {
        c.put(&src.cache_header(cal.pump_photons), &cal.value)?;
    }
    Ok(cal)
}

/// Calibrate every target, coarse grid first, then the fine grid in parallel.
fn calibrate_targets(
    src: &Source,
    targets: &[f64],
    cache: Option<&PropagatorCache>,
) -> Result<Vec<(f64, f64, Propagator)>> {
    let known = cache.map(|c| c.calibrations(src)).unwrap_or_default();
    let mut guesses: Vec<Option<(f64, Option<f64>)>> = vec![None; targets.len()];
    let pending: Vec<usize> = (0..targets.len())
        .filter(|&i| !known.iter().any(|&(t, _)| t == targets[i]))
        .collect();
    if let Some(g) = coarse_grid(&src.grid) {
        let coarse = src.with_grid(g);
        let mut prev: Option<(f64, Option<f64>)> = None;
        let mut order = pending.clone();
        order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
        for i in order {
            let opts = CalibrationOptions {
                initial_pump_photons: prev.map(|p| p.0),
                initial_slope: prev.and_then(|p| p.1),
                ..Default::default()
            };
            let cal = calibrate_pump_power(targets[i], &opts, |np| {
                let u = coarse.propagator(np)?;
                Ok((signal_photons(&u), ()))
            })?;
            prev = Some((cal.pump_photons, cal.slope));
            guesses[i] = Some((cal.pump_photons, cal.slope));
        }
    }
    let out: Vec<Result<(f64, f64, Propagator)>> = (0..targets.len())
        .into_par_iter()
        .map(|i| {
            let t = targets[i];
            if let Some(&(_, np)) = known.iter().find(|&&(x, _)| x == t) {
                let u = cached_or_build(src, cache, np)?;
                let ns = signal_photons(&u);
                if (ns / t - 1.0).abs() <= CalibrationOptions::default().rel_tol {
                    return Ok((np, ns, u));
                }
            }
            let cal = calibrate_fine(src, t, guesses[i], cache)?;
            Ok((cal.pump_photons, cal.mean_signal_photons, cal.value))
        })
        .collect();
    let out: Vec<(f64, f64, Propagator)> = out.into_iter().collect::<Result<_>>()?;
    if let Some(c) = cache {
        let pairs: Vec<(f64, f64)> = targets.iter().zip(&out).map(|(t, o)| (*t, o.0)).collect();
        c.store_calibrations(src, &pairs)?;
    }
    Ok(out)
}

/// Calibrate and decompose every gain point of a scenario, plus the reference.
pub fn compute_states(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<StateSweep> {
    let source = Source::from_config(cfg)?;
    compute_states_for(&source, cfg, opts)
}

pub fn compute_states_for(source: &Source, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<StateSweep> {
    let cache = opts.cache_dir.as_ref().map(PropagatorCache::new).transpose()?;
    let (kind, values) = cfg.gain_values(opts.gain_points);
    if values.is_empty() {
        return Ok(StateSweep {
            source: source.clone(),
            kind,
            states: vec![],
            reference: None,
        });
    }
    let grid = &source.grid;
    let decompose = |target: f64, np: f64, ns: f64, u: Propagator| -> Result<GainState> {
        Ok(GainState {
            target,
            pump_photons: np,
            mean_signal_photons: ns,
            decomposition: schmidt_decompose(&u, grid)?,
        })
    };
    let mut targets: Vec<f64> = match kind {
        GainKind::SignalPhotons => values.clone(),
        GainKind::PumpPhotons => vec![],
    };
    let ref_index = targets.iter().position(|&t| t == cfg.reference_gain);
    if ref_index.is_none() {
        targets.push(cfg.reference_gain);
    }
    let calibrated = calibrate_targets(source, &targets, cache.as_ref())?;
    let mut decomposed: Vec<GainState> = calibrated
        .into_par_iter()
        .zip(targets.par_iter())
        .map(|((np, ns, u), &t)| decompose(t, np, ns, u))
        .collect::<Result<_>>()?;
    let reference = match ref_index {
        Some(i) => decomposed[i].clone(),
        None => decomposed.pop().expect("reference calibrated"),
    };
    let states = match kind {
        GainKind::SignalPhotons => decomposed,
        GainKind::PumpPhotons => values
            .par_iter()
            .map(|&np| {
                let u = cached_or_build(source, cache.as_ref(), np)?;
                let ns = signal_photons(&u);
                decompose(np, np, ns, u)
            })
            .collect::<Result<_>>()?,
    };
    Ok(StateSweep {
        source: source.clone(),
        kind,
        states,
        reference: Some(reference),
    })
}

/// Leading filtered signal mode and state figures after filtering.
#[derive(Debug, Clone)]
pub struct FilteredState {
    pub mode: Vec<crate::c64>,
    pub mean_signal_photons: f64,
    pub purity: f64,
    pub schmidt_number: f64,
    /// Fidelities among (A_1, A_2, thermal_1, thermal_2), when available.
    pub fidelity_matrix: Option<Vec<Vec<f64>>>,
    pub pure_path: bool,
}

pub fn filter_state(
    d: &SchmidtDecomposition,
    grid: &FrequencyGrid,
    filter: &FilterFunction,
    want_matrix: bool,
) -> Result<FilteredState> {
    let dw = grid.delta_omega();
    let k = schmidt_number(d)?;
    if k - 1.0 < PURE_PATH_THRESHOLD && !want_matrix {
        let p = filter_pure_mode(d, filter, grid)?;
        let v = covariance_from_correlators(&p.correlators)?;
        return Ok(FilteredState {
            mode: p.a_s,
            mean_signal_photons: p.correlators.signal_photons(),
            purity: purity_from_determinant(&v)?,
            schmidt_number: 1.0,
            fidelity_matrix: None,
            pure_path: true,
        });
    }
    let c: Correlators = filtered_correlators(&d.correlators(grid.len()), &filter_samples(filter, grid))?;
    let ns = c.signal_photons();
    let v = covariance_from_correlators(&c)?;
    let ms = extract_mode_sets(&v, dw)?;
    let mode = ms
        .squeeze_signal
        .first()
        .cloned()
        .ok_or_else(|| Error::Numerical("filtered state has no squeezing".into()))?;
    let fidelity_matrix = if want_matrix && ms.squeeze_signal.len() >= 2 && ms.thermal_signal.len() >= 2 {
        let modes = vec![
            ms.squeeze_signal[0].clone(),
            ms.squeeze_signal[1].clone(),
            ms.thermal_signal[0].clone(),
            ms.thermal_signal[1].clone(),
        ];
        Some(fidelity_matrix(&modes, dw)?)
    } else {
        None
    };
    Ok(FilteredState {
        mode,
        mean_signal_photons: ns,
        purity: ms.purity(),
        schmidt_number: schmidt_number_of(&ms.r)?,
        fidelity_matrix,
        pure_path: false,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FilteredSummary {
    pub mean_signal_photons: f64,
    pub purity: f64,
    pub schmidt_number: f64,
    pub fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GainSummary {
    pub target: f64,
    pub pump_photons: f64,
    pub mean_signal_photons: f64,
    pub schmidt_number: f64,
    pub r: Vec<f64>,
    /// Overlap of the leading signal mode with the reference-gain mode.
    pub fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filtered: Option<FilteredSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FilterSweep {
    pub half_widths: Vec<f64>,
    /// Pre-filter mean signal photon number of each gain point.
    pub bare_mean_signal_photons: Vec<f64>,
    /// `fidelity[w][g]`, `purity[w][g]`.
    pub fidelity: Vec<Vec<f64>>,
    pub purity: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub config_hash: String,
    pub geometry: Geometry,
    pub grid_points: usize,
    pub reference_gain: f64,
    pub points: Vec<GainSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poling_max_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter_sweep: Option<FilterSweep>,
}

/// Summary plus the heavier artifacts the output writers need.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub summary: ScenarioSummary,
    pub source: Source,
    pub sweep: StateSweep,
    pub jsa: Vec<(f64, JsaMatrix)>,
}

/// Filtered fidelity and purity tables for several top-hat widths.
pub fn sweep_filters(cfg: &ScenarioConfig, widths: &[f64], opts: &RunOptions) -> Result<FilterSweep> {
    if cfg.geometry != Geometry::ApodizedSingle {
        return Err(Error::config("geometry", "filter sweeps need apodized_single"));
    }
    let sweep = compute_states(cfg, opts)?;
    sweep_filters_on(&sweep, widths)
}

pub fn sweep_filters_on(sweep: &StateSweep, widths: &[f64]) -> Result<FilterSweep> {
    let grid = &sweep.source.grid;
    let Some(reference_state) = &sweep.reference else {
        return Ok(FilterSweep {
            half_widths: widths.to_vec(),
            bare_mean_signal_photons: vec![],
            fidelity: vec![vec![]; widths.len()],
            purity: vec![vec![]; widths.len()],
        });
    };
    let dw = grid.delta_omega();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = widths
        .iter()
        .map(|&w| {
            let f = FilterFunction::top_hat(0.0, w);
            let reference = filter_state(&reference_state.decomposition, grid, &f, false)?;
            let per: Vec<(f64, f64)> = sweep
                .states
                .par_iter()
                .map(|s| {
                    let fs = filter_state(&s.decomposition, grid, &f, false)?;
                    Ok((mode_fidelity(&reference.mode, &fs.mode, dw)?, fs.purity))
                })
                .collect::<Result<_>>()?;
            Ok(per.into_iter().unzip())
        })
        .collect::<Result<_>>()?;
    let (fidelity, purity) = rows.into_iter().unzip();
    Ok(FilterSweep {
        half_widths: widths.to_vec(),
        bare_mean_signal_photons: sweep.states.iter().map(|s| s.mean_signal_photons).collect(),
        fidelity,
        purity,
    })
}

pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ScenarioResult> {
    cfg.validate()?;
    let source = Source::from_config(cfg)?;
    let sweep = compute_states_for(&source, cfg, opts)?;
    let grid = &source.grid;
    let dw = grid.delta_omega();
    let want_matrix = cfg.outputs.contains(&super::OutputKind::FidelityMatrix);
    let reference = sweep.reference.as_ref().map(|r| &r.decomposition);
    let filtered_ref = match (&cfg.filter, reference) {
        (Some(f), Some(r)) => Some(filter_state(r, grid, f, false)?),
        _ => None,
    };
    let points: Vec<GainSummary> = sweep
        .states
        .par_iter()
        .map(|s| {
            let d = &s.decomposition;
            let filtered = match (&cfg.filter, &filtered_ref) {
                (Some(f), Some(fr)) => {
                    let fs = filter_state(d, grid, f, want_matrix)?;
                    Some(FilteredSummary {
                        mean_signal_photons: fs.mean_signal_photons,
                        purity: fs.purity,
                        schmidt_number: fs.schmidt_number,
                        fidelity: mode_fidelity(&fr.mode, &fs.mode, dw)?,
                        fidelity_matrix: fs.fidelity_matrix,
                    })
                }
                _ => None,
            };
            Ok(GainSummary {
                target: s.target,
                pump_photons: s.pump_photons,
                mean_signal_photons: s.mean_signal_photons,
                schmidt_number: schmidt_number(d)?,
                r: d.r.iter().take(5).copied().collect(),
                fidelity: mode_fidelity(&reference.expect("reference present").rho_s[0], &d.rho_s[0], dw)?,
                filtered,
            })
        })
        .collect::<Result<_>>()?;
    let filter_sweep = if cfg.filter_widths.is_empty() {
        None
    } else {
        Some(sweep_filters_on(&sweep, &cfg.filter_widths)?)
    };
    let jsa_points = if cfg.outputs.contains(&super::OutputKind::Jsa) {
        let mut v: Vec<&GainState> = sweep.states.first().into_iter().collect();
        if sweep.states.len() > 1 {
            v.push(sweep.states.last().expect("nonempty"));
        }
        v.into_iter()
            .map(|s| (s.mean_signal_photons, jsa(&s.decomposition, grid)))
            .collect()
    } else {
        vec![]
    };
    let summary = ScenarioSummary {
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        geometry: cfg.geometry,
        grid_points: grid.len(),
        reference_gain: sweep
            .reference
            .as_ref()
            .map_or(cfg.reference_gain, |r| r.mean_signal_photons),
        points,
        poling_max_error: source.design.as_ref().map(|d| d.max_error),
        filter_sweep,
    };
    Ok(ScenarioResult {
        config: cfg.clone(),
        summary,
        source,
        sweep,
        jsa: jsa_points,
    })
}

/// Cache directory from an explicit option or the `TWINBEAM_CACHE_DIR` variable.
pub fn resolve_cache_dir(explicit: Option<&Path>) -> Option<PathBuf> {
    std::env::var_os(super::CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| explicit.map(Path::to_path_buf))
}
