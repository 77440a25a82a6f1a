//! Heisenberg propagators of the coupled signal/idler equations of motion.

mod cache;
mod stitch;

pub use cache::{CacheHeader, CACHE_MAGIC, CACHE_VERSION};
pub use stitch::{stitch, stitch_naive, stitch_with, StitchMethod};

use faer::{c64, Mat, MatRef};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::{expm, CMat};
use crate::medium::{MediumSpec, Mode};
use crate::poling::PolingProfile;
use crate::pump::PumpSpectrum;

/// Blocks of the generator `Q = [[G, F], [-F^dagger, -H]]` for one domain.
#[derive(Debug, Clone)]
pub struct GeneratorBlocks {
    /// Diagonal of `G` (signal phase mismatch).
    pub g: Vec<f64>,
    /// Diagonal of `H` (idler phase mismatch).
    pub h: Vec<f64>,
    /// Pump kernel, symmetric for a Gaussian pump.
    pub f: CMat,
}

impl GeneratorBlocks {
    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// Full `2N x 2N` generator.
    pub fn q_matrix(&self) -> CMat {
        let n = self.dim();
        let zero = c64::new(0.0, 0.0);
        Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => {
                if i == j {
                    c64::new(self.g[i], 0.0)
                } else {
                    zero
                }
            }
            (true, false) => self.f[(i, j - n)],
            (false, true) => -self.f[(j, i - n)].conj(),
            (false, false) => {
                if i == j {
                    c64::new(-self.h[i - n], 0.0)
                } else {
                    zero
                }
            }
        })
    }
}

/// Generator blocks for a domain with nonlinearity sign `g_sign`.
pub fn assemble_generator(
    grid: &FrequencyGrid,
    medium: &MediumSpec,
    pump: &PumpSpectrum,
    g_sign: i8,
) -> Result<GeneratorBlocks> {
    medium.validate()?;
    pump.validate()?;
    if !matches!(g_sign, -1..=1) {
        return Err(Error::param("g_sign", "must be -1, 0 or 1"));
    }
    let n = grid.len();
    let w = grid.points();
    let g = w.iter().map(|&d| medium.delta_k_detuned(Mode::Signal, d)).collect();
    let h = w.iter().map(|&d| medium.delta_k_detuned(Mode::Idler, d)).collect();
    let coef = medium.gamma * g_sign as f64 / (2.0 * PI).sqrt() * grid.delta_omega();
    let f = if coef == 0.0 || pump.n_pump_photons == 0.0 {
        CMat::zeros(n, n)
    } else {
        // Detunings add: (w_s + d_n) + (w_i + d_m) - w_p = d_n + d_m.
        Mat::from_fn(n, n, |i, j| c64::new(coef * pump.amplitude_detuned(w[i] + w[j]), 0.0))
    };
    Ok(GeneratorBlocks { g, h, f })
}

/// Bogoliubov map from input to output operators.
///
/// The stored matrix `[[U_SS, U_SI], [(U_IS)^*, (U_II)^*]]` acts on
/// `(a_S, a_I^dagger)` with the free-propagation phases removed. The removed
/// phases are kept as `free`, so the raw transfer matrix is `diag(free) * matrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    matrix: CMat,
    free: Vec<c64>,
}

impl Propagator {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMat::identity(2 * n, 2 * n),
            free: vec![c64::new(1.0, 0.0); 2 * n],
        }
    }

    pub(crate) fn from_parts(matrix: CMat, free: Vec<c64>) -> Self {
        debug_assert_eq!(matrix.nrows(), free.len());
        Self { matrix, free }
    }

    /// Raw transfer matrix treated as already in the output frame.
    pub fn from_raw(matrix: CMat) -> Result<Self> {
        let m = matrix.nrows();
        if matrix.ncols() != m || !m.is_multiple_of(2) {
            return Err(Error::Dimension {
                expected: m,
                found: matrix.ncols(),
            });
        }
        Ok(Self {
            matrix,
            free: vec![c64::new(1.0, 0.0); m],
        })
    }

    /// Number of frequency points per field.
    pub fn dim(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn free_phase(&self) -> &[c64] {
        &self.free
    }

    pub fn u_ss(&self) -> MatRef<'_, c64> {
        let n = self.dim();
        self.matrix.as_ref().submatrix(0, 0, n, n)
    }

    pub fn u_si(&self) -> MatRef<'_, c64> {
        let n = self.dim();
        self.matrix.as_ref().submatrix(0, n, n, n)
    }

    /// Lower-left block, `(U_IS)^*`.
    pub fn u_is_conj(&self) -> MatRef<'_, c64> {
        let n = self.dim();
        self.matrix.as_ref().submatrix(n, 0, n, n)
    }

    /// Lower-right block, `(U_II)^*`.
    pub fn u_ii_conj(&self) -> MatRef<'_, c64> {
        let n = self.dim();
        self.matrix.as_ref().submatrix(n, n, n, n)
    }

    /// Transfer matrix including the free-propagation phases.
    pub fn raw_matrix(&self) -> CMat {
        let m = self.matrix.nrows();
        Mat::from_fn(m, m, |i, j| self.free[i] * self.matrix[(i, j)])
    }

    /// Frobenius norm of `U J U^dagger - J`, an upper bound on the operator norm.
    pub fn bogoliubov_residual(&self) -> f64 {
        let n = self.dim();
        let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
        let uj = Mat::from_fn(2 * n, 2 * n, |i, j| self.matrix[(i, j)] * sign(j));
        let p = &uj * self.matrix.adjoint();
        let mut s = 0.0;
        for j in 0..2 * n {
            for i in 0..2 * n {
                let want = if i == j { sign(i) } else { 0.0 };
                s += (p[(i, j)] - c64::new(want, 0.0)).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// `|det U|` of the full matrix.
    pub fn determinant_magnitude(&self) -> f64 {
        self.matrix.determinant().norm()
    }

    pub fn check_bogoliubov(&self, tolerance: f64) -> Result<f64> {
        let r = self.bogoliubov_residual();
        if r.is_finite() && r <= tolerance {
            Ok(r)
        } else {
            Err(Error::InconsistentPropagator { residual: r, tolerance })
        }
    }
}

/// Exact propagator `exp(i dz Q)` of a single domain, in the raw frame.
pub fn domain_propagator(blocks: &GeneratorBlocks, dz: f64) -> Result<Propagator> {
    if !(dz > 0.0) || !dz.is_finite() {
        return Err(Error::param("dz", "step must be positive and finite"));
    }
    let q = blocks.q_matrix();
    let a = Mat::from_fn(q.nrows(), q.ncols(), |i, j| c64::new(0.0, dz) * q[(i, j)]);
    Propagator::from_raw(expm(a.as_ref())?)
}

/// Propagator of `first` followed by `second`.
///
/// The raw transfer matrices multiply as `second * first`; the combined
/// free-propagation phase is removed only once, at the final output.
pub fn compose(first: &Propagator, second: &Propagator) -> Result<Propagator> {
    let m = first.matrix.nrows();
    if second.matrix.nrows() != m {
        return Err(Error::Dimension {
            expected: first.dim(),
            found: second.dim(),
        });
    }
    let f1 = &first.free;
    let s2 = Mat::from_fn(m, m, |i, j| second.matrix[(i, j)] * f1[j] / f1[i]);
    let matrix = &s2 * &first.matrix;
    let free = f1.iter().zip(&second.free).map(|(a, b)| a * b).collect();
    Ok(Propagator { matrix, free })
}

/// Two poled regions separated by a polarization swap.
///
/// The swap is carried by exchanging signal and idler group velocities in
/// the second region, which holds the mirror image of the first region's
/// poling so that its contribution adds coherently to the first.
pub fn double_pass_propagator(
    grid: &FrequencyGrid,
    medium: &MediumSpec,
    pump: &PumpSpectrum,
    profile: &PolingProfile,
) -> Result<Propagator> {
    let first = stitch(profile, grid, medium, pump)?;
    let second = stitch(&profile.reversed(), grid, &medium.with_swapped_velocities(), pump)?;
    compose(&first, &second)
}

#[cfg(test)]
pub(crate) mod tests;
