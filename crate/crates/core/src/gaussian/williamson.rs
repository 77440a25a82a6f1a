use faer::{c64, Mat, Side};

use super::{symplectic_residual, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::linalg::{omega, sym_sqrt_pair, RMat};

/// `V = S diag(nu, nu) S^T` with `S` symplectic.
#[derive(Debug, Clone)]
pub struct WilliamsonResult {
    /// Symplectic eigenvalues, descending.
    pub nu: Vec<f64>,
    pub s: RMat,
}

impl WilliamsonResult {
    /// Thermal occupations `nu - 1/2`.
    pub fn occupations(&self) -> Vec<f64> {
        self.nu.iter().map(|v| (v - 0.5).max(0.0)).collect()
    }
}

pub fn williamson(v: &CovarianceMatrix) -> Result<WilliamsonResult> {
    let d = v.matrix().nrows();
    let m = d / 2;
    let (vsq, visq, _) = sym_sqrt_pair(v.matrix())?;
    let a = &visq * omega(m) * &visq;
    // i A is Hermitian; its spectrum is +-mu with mu = 1/nu.
    let ia = Mat::from_fn(d, d, |i, j| c64::new(0.0, a[(i, j)]));
    let eig = ia
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver failed: {e:?}")))?;
    let u = eig.U();
    // Ascending order: the last m eigenvalues are the positive ones, so
    // nu = 1/mu comes out descending when they are walked upwards.
    let mut nu = Vec::with_capacity(m);
    let mut k = RMat::zeros(d, d);
    for j in 0..m {
        let col = m + j;
        let mu = eig.S()[col].re;
        if !(mu > 0.0) {
            return Err(Error::NonPhysical(format!(
                "symplectic spectrum is not paired (eigenvalue {mu:e})"
            )));
        }
        nu.push(1.0 / mu);
        for i in 0..d {
            let e = u[(i, col)];
            k[(i, j)] = std::f64::consts::SQRT_2 * e.im;
            k[(i, m + j)] = std::f64::consts::SQRT_2 * e.re;
        }
    }
    let isqrt_nu: Vec<f64> = nu.iter().chain(nu.iter()).map(|x| 1.0 / x.sqrt()).collect();
    let kd = Mat::from_fn(d, d, |i, j| k[(i, j)] * isqrt_nu[j]);
    let s = &vsq * &kd;
    let res = symplectic_residual(s.as_ref());
    let scale = s.norm_max().powi(2).max(1.0);
    if res > 1e-8 * scale {
        return Err(Error::NotSymplectic(res));
    }
    Ok(WilliamsonResult { nu, s })
}
