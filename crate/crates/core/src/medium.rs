use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Down-converted field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Signal,
    Idler,
}

/// Linear-dispersion waveguide parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    pub v_p: f64,
    pub v_s: f64,
    pub v_i: f64,
    pub omega_bar_p: f64,
    pub omega_bar_s: f64,
    pub omega_bar_i: f64,
    pub gamma: f64,
    pub length: f64,
    pub n_domains: usize,
}

impl MediumSpec {
    /// Symmetric group-velocity-matched medium with `kappa = 1/v_S - 1/v_P`
    /// and degenerate signal and idler at half the pump frequency.
    ///
    /// The pump inverse velocity is placed far enough from zero that all
    /// three velocities stay positive.
    pub fn symmetric(kappa: f64, omega_bar_p: f64, gamma: f64, length: f64, n_domains: usize) -> Result<Self> {
        let inv_p = 1.0 + 2.0 * kappa.abs();
        let m = Self {
            v_p: 1.0 / inv_p,
            v_s: 1.0 / (inv_p + kappa),
            v_i: 1.0 / (inv_p - kappa),
            omega_bar_p,
            omega_bar_s: omega_bar_p / 2.0,
            omega_bar_i: omega_bar_p / 2.0,
            gamma,
            length,
            n_domains,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_p", self.v_p), ("v_s", self.v_s), ("v_i", self.v_i)] {
            if v == 0.0 || !v.is_finite() {
                return Err(Error::param(name, "group velocity must be finite and nonzero"));
            }
        }
        for (name, w) in [
            ("omega_bar_p", self.omega_bar_p),
            ("omega_bar_s", self.omega_bar_s),
            ("omega_bar_i", self.omega_bar_i),
        ] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::param(name, "central frequency must be finite and nonnegative"));
            }
        }
        let mismatch = self.omega_bar_p - self.omega_bar_s - self.omega_bar_i;
        if mismatch.abs() > 1e-9 * self.omega_bar_p.abs().max(1.0) {
            return Err(Error::param(
                "omega_bar_p",
                format!("energy matching violated by {mismatch:e}"),
            ));
        }
        if !self.gamma.is_finite() {
            return Err(Error::param("gamma", "coupling must be finite"));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::param("length", "region length must be positive"));
        }
        if self.n_domains == 0 {
            return Err(Error::param("n_domains", "at least one domain is required"));
        }
        Ok(())
    }

    /// `1/v_l - 1/v_P` for the given mode.
    pub fn inverse_velocity_mismatch(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Signal => 1.0 / self.v_s - 1.0 / self.v_p,
            Mode::Idler => 1.0 / self.v_i - 1.0 / self.v_p,
        }
    }

    pub fn omega_bar(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Signal => self.omega_bar_s,
            Mode::Idler => self.omega_bar_i,
        }
    }

    /// Phase mismatch at absolute frequency `omega`.
    pub fn delta_k(&self, mode: Mode, omega: f64) -> f64 {
        self.delta_k_detuned(mode, omega - self.omega_bar(mode))
    }

    /// Phase mismatch at detuning `delta` from the mode's central frequency.
    pub fn delta_k_detuned(&self, mode: Mode, delta: f64) -> f64 {
        self.inverse_velocity_mismatch(mode) * delta
    }

    pub fn is_symmetric_gvm(&self) -> bool {
        let ks = self.inverse_velocity_mismatch(Mode::Signal);
        let ki = self.inverse_velocity_mismatch(Mode::Idler);
        (ks + ki).abs() <= 1e-12 * ks.abs().max(ki.abs()).max(1e-300)
    }

    /// Medium seen after a half-wave plate exchanges the polarizations.
    pub fn with_swapped_velocities(&self) -> Self {
        Self {
            v_s: self.v_i,
            v_i: self.v_s,
            ..*self
        }
    }

    pub fn domain_length(&self) -> f64 {
        self.length / self.n_domains as f64
    }

    pub(crate) fn hash_into(&self, h: &mut Sha256) {
        h.update(b"medium");
        for x in [
            self.v_p,
            self.v_s,
            self.v_i,
            self.omega_bar_p,
            self.omega_bar_s,
            self.omega_bar_i,
            self.gamma,
            self.length,
        ] {
            h.update(x.to_le_bytes());
        }
        h.update((self.n_domains as u64).to_le_bytes());
    }
}

/// Delta-k for `medium` at absolute frequency `omega`.
pub fn delta_k(medium: &MediumSpec, mode: Mode, omega: f64) -> Result<f64> {
    medium.validate()?;
    Ok(medium.delta_k(mode, omega))
}
