use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filter::FilterFunction;
use crate::grid::FrequencyGrid;
use crate::medium::MediumSpec;
use crate::pump::PumpSpectrum;

/// Speed of light in nm/fs.
const C_NM_PER_FS: f64 = 299.792_458;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    UnapodizedSingle,
    ApodizedSingle,
    ApodizedDouble,
}

impl Geometry {
    pub fn is_apodized(self) -> bool {
        !matches!(self, Geometry::UnapodizedSingle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Jsa,
    SchmidtModes,
    #[serde(rename = "K_vs_gain", alias = "k_vs_gain")]
    KVsGain,
    FidelityVsGain,
    PurityVsGain,
    FidelityMatrix,
    PolingAmplitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_half_width() -> f64 {
    6.0
}
fn default_points() -> usize {
    501
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: default_half_width(),
            points: default_points(),
        }
    }
}

/// Dimensionless medium: lengths in units of the region length scale,
/// frequencies in units of the pump bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    /// `1/v_S - 1/v_P`; the idler mismatch is its negative.
    pub kappa: f64,
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_domains")]
    pub n_domains: usize,
    #[serde(default = "default_omega_bar_p")]
    pub omega_bar_p: f64,
}

fn one() -> f64 {
    1.0
}
fn default_domains() -> usize {
    1000
}
fn default_omega_bar_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    #[serde(default = "one")]
    pub sigma: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self { sigma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GainConfig {
    /// Target mean signal photon numbers.
    MeanSignalPhotons(Vec<f64>),
    /// Fixed pump photon numbers.
    PumpPhotons(Vec<f64>),
    /// Logarithmic ladder of mean signal photon targets.
    Ladder { points: usize, min: f64, max: f64 },
}

impl Default for GainConfig {
    fn default() -> Self {
        GainConfig::Ladder {
            points: 20,
            min: 3e-4,
            max: 10.6,
        }
    }
}

/// Gain parameter kind after expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainKind {
    SignalPhotons,
    PumpPhotons,
}

/// Lab-unit inputs converted to the dimensionless pump centre frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabUnits {
    pub pump_wavelength_nm: f64,
    /// Intensity full width at half maximum of the pump pulse.
    pub pump_duration_fs: f64,
}

impl LabUnits {
    /// Pump bandwidth in rad/fs.
    pub fn sigma_rad_per_fs(&self) -> f64 {
        2.0 * std::f64::consts::LN_2.sqrt() / self.pump_duration_fs
    }

    /// Pump carrier frequency in units of the pump bandwidth.
    pub fn omega_bar_p(&self) -> f64 {
        2.0 * std::f64::consts::PI * C_NM_PER_FS / self.pump_wavelength_nm / self.sigma_rad_per_fs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub geometry: Geometry,
    #[serde(default)]
    pub grid: GridConfig,
    pub medium: MediumConfig,
    #[serde(default)]
    pub pump: PumpConfig,
    #[serde(default)]
    pub gain: GainConfig,
    /// Gain of the reference mode for distinguishability.
    #[serde(default = "default_reference")]
    pub reference_gain: f64,
    #[serde(default)]
    pub filter: Option<FilterFunction>,
    /// Top-hat half-widths for a filter sweep.
    #[serde(default)]
    pub filter_widths: Vec<f64>,
    #[serde(default)]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub lab_units: Option<LabUnits>,
}

fn default_name() -> String {
    "scenario".into()
}
fn default_reference() -> f64 {
    3e-4
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {x}")))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config("path", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(Error::config("name", "use letters, digits, '-' or '_'"));
        }
        positive("grid.half_width", self.grid.half_width)?;
        if self.grid.points < 2 || self.grid.points > 4096 {
            return Err(Error::config("grid.points", "must lie in 2..=4096"));
        }
        let m = &self.medium;
        if !(m.kappa.is_finite() && m.kappa != 0.0) {
            return Err(Error::config("medium.kappa", "must be finite and nonzero"));
        }
        positive("medium.length", m.length)?;
        positive("medium.gamma", m.gamma)?;
        positive("medium.omega_bar_p", m.omega_bar_p)?;
        if m.n_domains == 0 || m.n_domains > 1_000_000 {
            return Err(Error::config("medium.n_domains", "must lie in 1..=1000000"));
        }
        positive("pump.sigma", self.pump.sigma)?;
        positive("reference_gain", self.reference_gain)?;
        match &self.gain {
            GainConfig::MeanSignalPhotons(v) | GainConfig::PumpPhotons(v) => {
                for x in v {
                    positive("gain", *x)?;
                }
            }
            GainConfig::Ladder { points, min, max } => {
                positive("gain.ladder.min", *min)?;
                positive("gain.ladder.max", *max)?;
                if min > max {
                    return Err(Error::config("gain.ladder", "min exceeds max"));
                }
                if *points > 10_000 {
                    return Err(Error::config("gain.ladder.points", "at most 10000"));
                }
            }
        }
        if let Some(f) = &self.filter {
            if !f.center.is_finite() || !(f.half_width >= 0.0) || !f.half_width.is_finite() {
                return Err(Error::config(
                    "filter",
                    "center and half_width must be finite, half_width >= 0",
                ));
            }
        }
        for w in &self.filter_widths {
            positive("filter_widths", *w)?;
        }
        if !self.filter_widths.is_empty() && self.geometry != Geometry::ApodizedSingle {
            return Err(Error::config(
                "filter_widths",
                "filter sweeps need the apodized_single geometry",
            ));
        }
        if self.outputs.contains(&OutputKind::FidelityMatrix) && self.filter.is_none() {
            return Err(Error::config("outputs", "fidelity_matrix needs a filter"));
        }
        if let Some(l) = &self.lab_units {
            positive("lab_units.pump_wavelength_nm", l.pump_wavelength_nm)?;
            positive("lab_units.pump_duration_fs", l.pump_duration_fs)?;
        }
        Ok(())
    }

    /// Expanded gain values, optionally resampled to `points` log-spaced values.
    pub fn gain_values(&self, points: Option<usize>) -> (GainKind, Vec<f64>) {
        let (kind, values) = match &self.gain {
            GainConfig::MeanSignalPhotons(v) => (GainKind::SignalPhotons, v.clone()),
            GainConfig::PumpPhotons(v) => (GainKind::PumpPhotons, v.clone()),
            GainConfig::Ladder { points, min, max } => (GainKind::SignalPhotons, log_ladder(*min, *max, *points)),
        };
        match points {
            Some(k) if !values.is_empty() => {
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(0.0, f64::max);
                (kind, log_ladder(lo, hi, k))
            }
            _ => (kind, values),
        }
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::symmetric(self.grid.half_width, self.grid.points)
    }

    pub fn omega_bar_p(&self) -> f64 {
        self.lab_units
            .as_ref()
            .map_or(self.medium.omega_bar_p, LabUnits::omega_bar_p)
    }

    pub fn medium(&self) -> Result<MediumSpec> {
        let m = &self.medium;
        MediumSpec::symmetric(m.kappa, self.omega_bar_p(), m.gamma, m.length, m.n_domains)
    }

    pub fn pump(&self) -> Result<PumpSpectrum> {
        PumpSpectrum::new(self.pump.sigma, 0.0, self.omega_bar_p())
    }

    /// Hex digest of the canonical serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let d = Sha256::digest(text.as_bytes());
        d[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn log_ladder(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![min],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    max
                } else {
                    (min.ln() + (max / min).ln() * i as f64 / (points - 1) as f64).exp()
                }
            })
            .collect(),
    }
}
