use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Uniform detuning grid shared by signal and idler.
///
/// Point `n` sits at detuning `omega_min + n * delta_omega` from the central
/// frequency of the respective mode, in units of the pump bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omega_min: f64,
    omega_max: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::param("n_points", "at least two points are required"));
        }
        if !omega_min.is_finite() || !omega_max.is_finite() {
            return Err(Error::param("omega", "grid bounds must be finite"));
        }
        if omega_max <= omega_min {
            return Err(Error::param("omega_max", "must exceed omega_min"));
        }
        Ok(Self {
            omega_min,
            omega_max,
            n_points,
        })
    }

    /// Grid spanning `[-half_span, half_span]`.
    pub fn symmetric(half_span: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_span, half_span, n_points)
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delta_omega(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n_points - 1) as f64
    }

    pub fn omega(&self, n: usize) -> f64 {
        if n + 1 == self.n_points {
            return self.omega_max;
        }
        self.omega_min + n as f64 * self.delta_omega()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|n| self.omega(n)).collect()
    }

    /// Index of the grid point nearest to `omega`, if it lies on the grid.
    pub fn index_of(&self, omega: f64) -> Option<usize> {
        let d = self.delta_omega();
        let x = (omega - self.omega_min) / d;
        let n = x.round();
        if n < 0.0 || n >= self.n_points as f64 {
            return None;
        }
        let n = n as usize;
        if (self.omega(n) - omega).abs() <= 1e-9 * d {
            Some(n)
        } else {
            None
        }
    }

    /// True when the grid is mirror-symmetric about zero detuning.
    pub fn is_symmetric(&self) -> bool {
        (self.omega_min + self.omega_max).abs() <= 1e-12 * self.omega_max.abs().max(1.0)
    }

    pub(crate) fn hash_into(&self, h: &mut Sha256) {
        h.update(b"grid");
        h.update(self.omega_min.to_le_bytes());
        h.update(self.omega_max.to_le_bytes());
        h.update((self.n_points as u64).to_le_bytes());
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self {
            omega_min: -6.0,
            omega_max: 6.0,
            n_points: 501,
        }
    }
}
