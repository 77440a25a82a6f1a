//! Schmidt decomposition of the twin-beam output and derived figures of merit.

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::CMat;
use crate::propagator::Propagator;

/// Gate applied to propagators before they are analysed.
pub const BOGOLIUBOV_TOLERANCE: f64 = 1e-8;
/// Relative cut below which singular values count as numerical noise.
pub const SCHMIDT_THRESHOLD: f64 = 1e-10;

/// Second moments of the output fields on the grid, in per-bin units.
///
/// `n_s[j][k] = <b_S,j^dag b_S,k>`, `n_i` likewise for the idler and
/// `m[j][k] = <b_S,j b_I,k>`. Dividing by `delta_omega` gives densities.
#[derive(Debug, Clone)]
pub struct Correlators {
    pub n_s: CMat,
    pub n_i: CMat,
    pub m: CMat,
}

impl Correlators {
    pub fn from_propagator(u: &Propagator) -> Self {
        let si = u.u_si();
        let l = u.u_is_conj();
        let n_s = (si * si.adjoint()).conjugate().to_owned();
        let n_i = l * l.adjoint();
        let m = u.u_ss() * l.adjoint();
        Self { n_s, n_i, m }
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            n_s: CMat::zeros(n, n),
            n_i: CMat::zeros(n, n),
            m: CMat::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.n_s.nrows()
    }

    pub fn signal_photons(&self) -> f64 {
        (0..self.dim()).map(|k| self.n_s[(k, k)].re).sum()
    }
}

/// Squeezing parameters and paired signal/idler Schmidt modes.
///
/// Modes are sampled on the grid with `sum |rho|^2 delta_omega = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct SchmidtDecomposition {
    pub r: Vec<f64>,
    #[serde(skip)]
    pub rho_s: Vec<Vec<c64>>,
    #[serde(skip)]
    pub rho_i: Vec<Vec<c64>>,
    pub delta_omega: f64,
}

impl SchmidtDecomposition {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn sinh(&self) -> Vec<f64> {
        self.r.iter().map(|r| r.sinh()).collect()
    }

    /// Moments rebuilt from the modes.
    pub fn correlators(&self, n: usize) -> Correlators {
        let mut c = Correlators::vacuum(n);
        let dw = self.delta_omega;
        for (l, &r) in self.r.iter().enumerate() {
            let (s, ch) = (r.sinh(), r.cosh());
            let ws = &self.rho_s[l];
            let wi = &self.rho_i[l];
            for k in 0..n {
                for j in 0..n {
                    c.n_s[(j, k)] += ws[j].conj() * ws[k] * (s * s * dw);
                    c.n_i[(j, k)] += wi[j].conj() * wi[k] * (s * s * dw);
                    c.m[(j, k)] += ws[j] * wi[k] * (s * ch * dw);
                }
            }
        }
        c
    }
}

fn fix_gauge(a: &mut [c64], b: &mut [c64]) {
    let (mut best, mut idx) = (-1.0, 0);
    for (k, v) in a.iter().enumerate() {
        let m = v.norm();
        if m > best {
            best = m;
            idx = k;
        }
    }
    if best <= 0.0 {
        return;
    }
    let phase = a[idx] / best;
    for v in a.iter_mut() {
        *v *= phase.conj();
    }
    for v in b.iter_mut() {
        *v *= phase;
    }
}

/// Decompose the output state of `u` into Schmidt modes.
pub fn schmidt_decompose(u: &Propagator, grid: &FrequencyGrid) -> Result<SchmidtDecomposition> {
    let n = u.dim();
    if n != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: n,
        });
    }
    u.check_bogoliubov(BOGOLIUBOV_TOLERANCE)?;
    let dw = grid.delta_omega();
    let svd = u
        .u_si()
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let s: Vec<f64> = (0..n).map(|k| svd.S()[k].re).collect();
    let w = svd.U();
    let s1 = s.first().copied().unwrap_or(0.0);
    let kept = if s1 > 0.0 {
        s.iter().take_while(|&&x| x >= SCHMIDT_THRESHOLD * s1).count()
    } else {
        0
    };

    let cosh_sv = u
        .u_ss()
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    for (k, c) in cosh_sv.iter().enumerate() {
        let want = (1.0 + s[k] * s[k]).sqrt();
        if (c - want).abs() > 1e-6 * want {
            return Err(Error::InconsistentPropagator {
                residual: (c - want).abs(),
                tolerance: 1e-6,
            });
        }
    }

    let m = Correlators::from_propagator(u).m;
    let wk = w.submatrix(0, 0, n, kept);
    let proj = wk.adjoint() * &m;
    let norm = 1.0 / dw.sqrt();
    let mut rho_s = Vec::with_capacity(kept);
    let mut rho_i = Vec::with_capacity(kept);
    for l in 0..kept {
        let mut a: Vec<c64> = (0..n).map(|j| w[(j, l)] * norm).collect();
        let row_norm = (0..n).map(|j| proj[(l, j)].norm_sqr()).sum::<f64>().sqrt();
        let mut b: Vec<c64> = (0..n).map(|j| proj[(l, j)] * (norm / row_norm)).collect();
        fix_gauge(&mut a, &mut b);
        rho_s.push(a);
        rho_i.push(b);
    }
    Ok(SchmidtDecomposition {
        r: s[..kept].iter().map(|x| x.asinh()).collect(),
        rho_s,
        rho_i,
        delta_omega: dw,
    })
}

/// Mean signal photon number `sum sinh^2 r`.
pub fn mean_signal_photons(d: &SchmidtDecomposition) -> f64 {
    d.r.iter().map(|r| r.sinh().powi(2)).sum()
}

/// Schmidt number `(sum sinh^2 r)^2 / sum sinh^4 r`.
pub fn schmidt_number(d: &SchmidtDecomposition) -> Result<f64> {
    schmidt_number_of(&d.r)
}

pub fn schmidt_number_of(r: &[f64]) -> Result<f64> {
    let (mut s2, mut s4) = (0.0, 0.0);
    for x in r {
        let p = x.sinh().powi(2);
        s2 += p;
        s4 += p * p;
    }
    if s4 == 0.0 {
        return Err(Error::UndefinedSchmidtNumber);
    }
    Ok(s2 * s2 / s4)
}

/// Joint spectral amplitude on the grid.
#[derive(Debug, Clone)]
pub struct JsaMatrix {
    /// `values[(j, k)] = J(w_j, w'_k)` with `j` signal and `k` idler.
    pub values: CMat,
    pub axis: Vec<f64>,
}

pub fn jsa(d: &SchmidtDecomposition, grid: &FrequencyGrid) -> JsaMatrix {
    let n = grid.len();
    let values = Mat::from_fn(n, n, |j, k| {
        d.r.iter()
            .enumerate()
            .map(|(l, &r)| d.rho_s[l][j] * d.rho_i[l][k] * r)
            .sum()
    });
    JsaMatrix {
        values,
        axis: grid.points(),
    }
}

fn norm_sq(a: &[c64], delta_omega: f64) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>() * delta_omega
}

/// Overlap `|sum a b^* delta_omega|^2` of two unit-normalized mode functions.
pub fn mode_fidelity(a: &[c64], b: &[c64], delta_omega: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    for v in [a, b] {
        let ns = norm_sq(v, delta_omega);
        if (ns - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { norm_sq: ns });
        }
    }
    let ip: c64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    Ok((ip * delta_omega).norm_sqr().min(1.0))
}
