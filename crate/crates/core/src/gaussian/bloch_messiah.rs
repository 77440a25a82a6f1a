use faer::{c64, Mat, MatRef, Side};

use super::symplectic_residual;
use crate::error::{Error, Result};
use crate::linalg::{sym_sqrt_pair, CMat, RMat};

/// `S = O Lambda O_tilde^T` with `O`, `O_tilde` orthogonal symplectic and
/// `Lambda = diag(e^r, e^-r)`.
#[derive(Debug, Clone)]
pub struct BlochMessiahResult {
    /// Squeezing parameters, descending.
    pub r: Vec<f64>,
    /// Complex unitary representation of `O`; column `k` is squeezed by `r[k]`.
    pub u: CMat,
    pub o: RMat,
    pub o_tilde: RMat,
    /// Orthogonal factor of the polar decomposition, `O O_tilde^T`.
    pub q: RMat,
}

impl BlochMessiahResult {
    pub fn lambda(&self) -> Vec<f64> {
        self.r
            .iter()
            .map(|r| r.exp())
            .chain(self.r.iter().map(|r| (-r).exp()))
            .collect()
    }
}

/// Real representation `[[Re U, -Im U], [Im U, Re U]]` of a unitary.
pub fn unitary_to_orthogonal(u: MatRef<'_, c64>) -> RMat {
    let m = u.nrows();
    Mat::from_fn(2 * m, 2 * m, |i, j| {
        let v = u[(i % m, j % m)];
        match (i < m, j < m) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// Takagi vectors `B conj(u) = s u` with `s > tol`, descending in `s`.
fn takagi(b: &CMat) -> Result<(Vec<f64>, CMat)> {
    let m = b.nrows();
    let t = Mat::from_fn(2 * m, 2 * m, |i, j| {
        let v = b[(i % m, j % m)];
        match (i < m, j < m) {
            (true, true) => v.re,
            (false, false) => -v.re,
            _ => v.im,
        }
    });
    let eig = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    let smax = eig.S()[2 * m - 1].max(0.0);
    let tol = 1e-12 * smax.max(1.0);
    let mut s = Vec::new();
    let mut cols = Vec::new();
    for k in (0..2 * m).rev() {
        let v = eig.S()[k];
        if v <= tol || s.len() == m {
            break;
        }
        s.push(v);
        cols.push(k);
    }
    let vecs = eig.U();
    let u = Mat::from_fn(m, cols.len(), |i, j| {
        c64::new(vecs[(i, cols[j])], vecs[(m + i, cols[j])])
    });
    Ok((s, u))
}

/// Orthonormal completion of the columns of `u`.
fn complete_basis(u: &CMat) -> Result<CMat> {
    let (m, k) = (u.nrows(), u.ncols());
    if k == m {
        return Ok(u.clone());
    }
    let uu = u * u.adjoint();
    let proj = Mat::from_fn(m, m, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        c64::new(id, 0.0) - uu[(i, j)]
    });
    let eig = proj
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver failed: {e:?}")))?;
    let rest: Vec<usize> = (0..m).filter(|&i| eig.S()[i].re > 0.5).collect();
    if rest.len() != m - k {
        return Err(Error::Numerical(format!(
            "basis completion found {} of {} vectors",
            rest.len(),
            m - k
        )));
    }
    let e = eig.U();
    Ok(Mat::from_fn(
        m,
        m,
        |i, j| {
            if j < k {
                u[(i, j)]
            } else {
                e[(i, rest[j - k])]
            }
        },
    ))
}

pub fn bloch_messiah(s: MatRef<'_, f64>) -> Result<BlochMessiahResult> {
    let d = s.nrows();
    if s.ncols() != d || d % 2 != 0 {
        return Err(Error::Dimension {
            expected: d,
            found: s.ncols(),
        });
    }
    let res = symplectic_residual(s);
    if res > 1e-8 * s.norm_max().powi(2).max(1.0) {
        return Err(Error::NotSymplectic(res));
    }
    let m = d / 2;
    let sst = s * s.transpose();
    let (p, pinv, _) = sym_sqrt_pair(sst.as_ref())?;
    let pb = Mat::from_fn(m, m, |i, j| {
        c64::new(
            0.5 * (p[(i, j)] - p[(m + i, m + j)]),
            0.5 * (p[(m + i, j)] + p[(i, m + j)]),
        )
    });
    let pb = Mat::from_fn(m, m, |i, j| 0.5 * (pb[(i, j)] + pb[(j, i)]));
    let (sv, uk) = takagi(&pb)?;
    let u = complete_basis(&uk)?;
    let mut r: Vec<f64> = sv.iter().map(|x| x.asinh()).collect();
    r.resize(m, 0.0);
    let o = unitary_to_orthogonal(u.as_ref());
    let q = &pinv * s;
    let o_tilde = q.transpose() * &o;
    Ok(BlochMessiahResult { r, u, o, o_tilde, q })
}
