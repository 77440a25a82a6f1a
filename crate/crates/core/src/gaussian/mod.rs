//! Gaussian-state description of the filtered output.
//!
//! Quadratures are ordered `(x_S, x_I, p_S, p_I)` with `a = (x + i p)/sqrt(2)`
//! (`hbar = 1`), so the vacuum covariance is `I/2`.

mod bloch_messiah;
mod modes;
mod williamson;

pub use bloch_messiah::{bloch_messiah, BlochMessiahResult};
pub use modes::{extract_mode_sets, FilteredModeSet};
pub use williamson::{williamson, WilliamsonResult};

use faer::{c64, Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FilterFunction;
use crate::grid::FrequencyGrid;
use crate::linalg::{omega, RMat};
use crate::schmidt::{schmidt_number, Correlators, SchmidtDecomposition};

/// Vacuum quadrature variance.
pub const HALF: f64 = 0.5;
/// Largest `K - 1` for which the single-mode filtering shortcut applies.
pub const PURE_PATH_THRESHOLD: f64 = 1e-3;

/// Real symmetric `4N x 4N` covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    v: RMat,
}

#[derive(Serialize, Deserialize)]
struct CovarianceFile {
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    delta_omega: Option<f64>,
}

impl CovarianceMatrix {
    /// Wrap and validate a covariance matrix.
    pub fn new(v: RMat) -> Result<Self> {
        let d = v.nrows();
        if v.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                found: v.ncols(),
            });
        }
        if d == 0 || !d.is_multiple_of(4) {
            return Err(Error::NonPhysical(format!(
                "dimension {d} is not a positive multiple of four"
            )));
        }
        let scale = v.norm_max().max(1.0);
        for j in 0..d {
            for i in 0..d {
                let x = v[(i, j)];
                if !x.is_finite() {
                    return Err(Error::NonPhysical("non-finite entry".into()));
                }
                if (x - v[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::NonPhysical(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        let c = Self {
            v: Mat::from_fn(d, d, |i, j| 0.5 * (v[(i, j)] + v[(j, i)])),
        };
        c.check_physical()?;
        Ok(c)
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            v: Mat::from_fn(4 * n, 4 * n, |i, j| if i == j { HALF } else { 0.0 }),
        }
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.v.as_ref()
    }

    /// Number of bosonic modes (`2N`).
    pub fn modes(&self) -> usize {
        self.v.nrows() / 2
    }

    /// Frequency points per field (`N`).
    pub fn points(&self) -> usize {
        self.v.nrows() / 4
    }

    /// Uncertainty principle `V + i Omega / 2 >= 0`, tested by a Cholesky
    /// factorization with a small diagonal shift.
    pub fn check_physical(&self) -> Result<()> {
        let d = self.v.nrows();
        let om = omega(d / 2);
        let shift = 1e-9 * self.v.norm_max().max(1.0);
        let h = Mat::from_fn(d, d, |i, j| {
            c64::new(self.v[(i, j)] + if i == j { shift } else { 0.0 }, HALF * om[(i, j)])
        });
        h.llt(Side::Lower)
            .map(|_| ())
            .map_err(|_| Error::NonPhysical("violates the uncertainty principle".into()))
    }

    /// Parse the JSON covariance file format `{"matrix": [[..], ..], "delta_omega": ..}`.
    pub fn from_json(text: &str) -> Result<(Self, Option<f64>)> {
        let f: CovarianceFile = serde_json::from_str(text)?;
        let d = f.matrix.len();
        if f.matrix.iter().any(|row| row.len() != d) {
            return Err(Error::NonPhysical("matrix rows have unequal length".into()));
        }
        if let Some(dw) = f.delta_omega {
            if !(dw > 0.0) || !dw.is_finite() {
                return Err(Error::param("delta_omega", "must be positive"));
            }
        }
        let v = Mat::from_fn(d, d, |i, j| f.matrix[i][j]);
        Ok((Self::new(v)?, f.delta_omega))
    }

    pub fn to_json(&self, delta_omega: Option<f64>) -> String {
        let d = self.v.nrows();
        let f = CovarianceFile {
            matrix: (0..d).map(|i| (0..d).map(|j| self.v[(i, j)]).collect()).collect(),
            delta_omega,
        };
        serde_json::to_string(&f).expect("covariance serializes")
    }
}

/// Transmission of `f` sampled on the grid.
pub fn filter_samples(f: &FilterFunction, grid: &FrequencyGrid) -> Vec<f64> {
    f.sample(&grid.points())
}

/// Apply the same real transmission `t` to signal and idler.
pub fn filtered_correlators(c: &Correlators, t: &[f64]) -> Result<Correlators> {
    let n = c.dim();
    if t.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: t.len(),
        });
    }
    let cong = |m: &Mat<c64>| Mat::from_fn(n, n, |i, j| m[(i, j)] * (t[i] * t[j]));
    Ok(Correlators {
        n_s: cong(&c.n_s),
        n_i: cong(&c.n_i),
        m: cong(&c.m),
    })
}

/// Covariance matrix of the state with the given second moments.
pub fn covariance_from_correlators(c: &Correlators) -> Result<CovarianceMatrix> {
    let n = c.dim();
    let m = 2 * n;
    // Mode-space moments: N_jk = <c_j^dag c_k>, M_jk = <c_j c_k>.
    let nn = |j: usize, k: usize| -> c64 {
        match (j < n, k < n) {
            (true, true) => c.n_s[(j, k)],
            (false, false) => c.n_i[(j - n, k - n)],
            _ => c64::new(0.0, 0.0),
        }
    };
    let mm = |j: usize, k: usize| -> c64 {
        match (j < n, k < n) {
            (true, false) => c.m[(j, k - n)],
            (false, true) => c.m[(k, j - n)],
            _ => c64::new(0.0, 0.0),
        }
    };
    let v = Mat::from_fn(2 * m, 2 * m, |a, b| {
        let (j, k) = (a % m, b % m);
        let d = if j == k { HALF } else { 0.0 };
        let (nv, mv) = (nn(j, k), mm(j, k));
        match (a < m, b < m) {
            (true, true) => nv.re + mv.re + d,
            (false, false) => nv.re - mv.re + d,
            (true, false) => mv.im + nv.im,
            (false, true) => mv.im - nv.im,
        }
    });
    CovarianceMatrix::new(v)
}

/// Covariance matrix of a Schmidt-decomposed state after optional filtering.
pub fn covariance_from_state(
    d: &SchmidtDecomposition,
    grid: &FrequencyGrid,
    filter: Option<&FilterFunction>,
) -> Result<CovarianceMatrix> {
    let c = d.correlators(grid.len());
    let c = match filter {
        Some(f) => filtered_correlators(&c, &filter_samples(f, grid))?,
        None => c,
    };
    covariance_from_correlators(&c)
}

/// State purity `prod (1/2) / nu_i` from the symplectic spectrum.
pub fn purity(v: &CovarianceMatrix) -> Result<f64> {
    let w = williamson(v)?;
    Ok(purity_from_spectrum(&w.nu))
}

pub fn purity_from_spectrum(nu: &[f64]) -> f64 {
    nu.iter().map(|x| (HALF / x).ln()).sum::<f64>().exp()
}

/// State purity `(1/2)^M / sqrt(det V)`, evaluated in log space.
pub fn purity_from_determinant(v: &CovarianceMatrix) -> Result<f64> {
    let llt =
        v.v.llt(Side::Lower)
            .map_err(|_| Error::NonPhysical("covariance is not positive definite".into()))?;
    let l = llt.L();
    let log_det: f64 = (0..l.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum();
    Ok((v.modes() as f64 * HALF.ln() - 0.5 * log_det).exp())
}

/// Pairwise mode fidelities; the diagonal is exactly one.
pub fn fidelity_matrix(modes: &[Vec<c64>], delta_omega: f64) -> Result<Vec<Vec<f64>>> {
    let k = modes.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = if i == j {
                crate::schmidt::mode_fidelity(&modes[i], &modes[i], delta_omega)?;
                1.0
            } else {
                crate::schmidt::mode_fidelity(&modes[i], &modes[j], delta_omega)?
            };
        }
    }
    Ok(out)
}

/// Leading filtered mode of a spectrally pure state.
#[derive(Debug, Clone)]
pub struct PureFilteredMode {
    pub a_s: Vec<c64>,
    pub a_i: Vec<c64>,
    pub eta_s: f64,
    pub eta_i: f64,
    /// Moments of the filtered single-mode state.
    pub correlators: Correlators,
}

/// Filter a single-Schmidt-mode state by projecting its leading mode.
pub fn filter_pure_mode(
    d: &SchmidtDecomposition,
    filter: &FilterFunction,
    grid: &FrequencyGrid,
) -> Result<PureFilteredMode> {
    let k = schmidt_number(d)?;
    if k - 1.0 >= PURE_PATH_THRESHOLD {
        return Err(Error::MultimodeInput { excess: k - 1.0 });
    }
    let n = grid.len();
    let dw = grid.delta_omega();
    let t = filter_samples(filter, grid);
    let project = |rho: &[c64]| {
        let a: Vec<c64> = rho.iter().zip(&t).map(|(x, t)| x * *t).collect();
        let eta = a.iter().map(|x| x.norm_sqr()).sum::<f64>() * dw;
        (a, eta)
    };
    let (a_s, eta_s) = project(&d.rho_s[0]);
    let (a_i, eta_i) = project(&d.rho_i[0]);
    if eta_s <= 0.0 || eta_i <= 0.0 {
        return Err(Error::Numerical("filter removes the entire mode".into()));
    }
    let a_s: Vec<c64> = a_s.iter().map(|x| x / eta_s.sqrt()).collect();
    let a_i: Vec<c64> = a_i.iter().map(|x| x / eta_i.sqrt()).collect();
    let r = d.r[0];
    let (sh2, shch) = (r.sinh().powi(2), 0.5 * (2.0 * r).sinh());
    let correlators = Correlators {
        n_s: Mat::from_fn(n, n, |j, k| a_s[j].conj() * a_s[k] * (eta_s * sh2 * dw)),
        n_i: Mat::from_fn(n, n, |j, k| a_i[j].conj() * a_i[k] * (eta_i * sh2 * dw)),
        m: Mat::from_fn(n, n, |j, k| a_s[j] * a_i[k] * ((eta_s * eta_i).sqrt() * shch * dw)),
    };
    Ok(PureFilteredMode {
        a_s,
        a_i,
        eta_s,
        eta_i,
        correlators,
    })
}

pub(crate) fn symplectic_residual(s: MatRef<'_, f64>) -> f64 {
    let om = omega(s.nrows() / 2);
    let p = s * &om * s.transpose();
    (&p - &om).norm_max()
}
