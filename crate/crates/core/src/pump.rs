use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gaussian pump envelope normalized to `hbar * omega_bar_p * n_pump_photons`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpectrum {
    pub sigma: f64,
    pub n_pump_photons: f64,
    pub omega_bar_p: f64,
}

impl PumpSpectrum {
    pub fn new(sigma: f64, n_pump_photons: f64, omega_bar_p: f64) -> Result<Self> {
        let p = Self {
            sigma,
            n_pump_photons,
            omega_bar_p,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::param("sigma", "pump bandwidth must be positive"));
        }
        if !(self.n_pump_photons >= 0.0) || !self.n_pump_photons.is_finite() {
            return Err(Error::param("n_pump_photons", "must be finite and nonnegative"));
        }
        if !(self.omega_bar_p >= 0.0) || !self.omega_bar_p.is_finite() {
            return Err(Error::param("omega_bar_p", "must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn with_photons(&self, n_pump_photons: f64) -> Self {
        Self {
            n_pump_photons,
            ..*self
        }
    }

    fn prefactor(&self) -> f64 {
        (self.omega_bar_p * self.n_pump_photons).sqrt() * PI.powf(-0.25) / self.sigma.sqrt()
    }

    /// Amplitude at detuning `delta` from the pump centre.
    pub fn amplitude_detuned(&self, delta: f64) -> f64 {
        self.prefactor() * (-delta * delta / (2.0 * self.sigma * self.sigma)).exp()
    }

    pub(crate) fn hash_into(&self, h: &mut Sha256) {
        h.update(b"pump");
        h.update(self.sigma.to_le_bytes());
        h.update(self.n_pump_photons.to_le_bytes());
        h.update(self.omega_bar_p.to_le_bytes());
    }
}

/// Pump amplitude at absolute frequency `omega`.
pub fn pump_amplitude(pump: &PumpSpectrum, omega: f64) -> Result<f64> {
    pump.validate()?;
    Ok(pump.amplitude_detuned(omega - pump.omega_bar_p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_value_with_unit_prefactor() {
        let p = PumpSpectrum::new(1.0, 1.0, 1.0).unwrap();
        let v = pump_amplitude(&p, 1.0).unwrap();
        assert!((v - PI.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn tails_vanish() {
        let p = PumpSpectrum::new(1.0, 3.0, 2.0).unwrap();
        assert_eq!(pump_amplitude(&p, 1e3).unwrap(), 0.0);
        assert_eq!(pump_amplitude(&p, -1e3).unwrap(), 0.0);
    }

    #[test]
    fn nonpositive_sigma_is_rejected() {
        assert!(PumpSpectrum::new(0.0, 1.0, 1.0).is_err());
        let p = PumpSpectrum {
            sigma: -1.0,
            n_pump_photons: 1.0,
            omega_bar_p: 1.0,
        };
        assert!(pump_amplitude(&p, 0.0).is_err());
    }

    #[test]
    fn trapezoid_normalization() {
        for (sigma, np, wp) in [(1.0, 1.0, 1.0), (0.5, 7.0, 3.0), (2.0, 0.25, 485.0)] {
            let p = PumpSpectrum::new(sigma, np, wp).unwrap();
            let n = 4001;
            let a = -6.0 * sigma;
            let h = 12.0 * sigma / (n - 1) as f64;
            let mut s = 0.0;
            for k in 0..n {
                let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                s += w * pump_amplitude(&p, wp + a + k as f64 * h).unwrap().powi(2);
            }
            s *= h;
            assert!((s / (wp * np) - 1.0).abs() < 1e-6, "{s}");
        }
    }
}
