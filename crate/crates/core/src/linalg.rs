//! Dense complex and real matrix helpers built on faer.

use faer::prelude::*;
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;
pub type RMat = Mat<f64>;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

pub fn one_norm(a: MatRef<'_, c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn all_finite(a: MatRef<'_, c64>) -> bool {
    (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].re.is_finite() && a[(i, j)].im.is_finite()))
}

/// Matrix exponential by degree-13 Padé approximation with scaling and squaring.
pub fn expm(a: MatRef<'_, c64>) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: a.ncols(),
        });
    }
    if !all_finite(a) {
        return Err(Error::Numerical("non-finite entry in exponent".into()));
    }
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = c64::new(0.5f64.powi(s), 0.0);
    let a = a * Scale(scale);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| c64::new(PADE13[k], 0.0);
    let id = |i: usize, j: usize| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };

    let inner_u = Mat::from_fn(n, n, |i, j| b(13) * a6[(i, j)] + b(11) * a4[(i, j)] + b(9) * a2[(i, j)]);
    let tail_u = Mat::from_fn(n, n, |i, j| {
        b(7) * a6[(i, j)] + b(5) * a4[(i, j)] + b(3) * a2[(i, j)] + b(1) * id(i, j)
    });
    let u = &a * &(&(&a6 * &inner_u) + &tail_u);
    let inner_v = Mat::from_fn(n, n, |i, j| b(12) * a6[(i, j)] + b(10) * a4[(i, j)] + b(8) * a2[(i, j)]);
    let tail_v = Mat::from_fn(n, n, |i, j| {
        b(6) * a6[(i, j)] + b(4) * a4[(i, j)] + b(2) * a2[(i, j)] + b(0) * id(i, j)
    });
    let v = &(&a6 * &inner_v) + &tail_v;

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    if !all_finite(r.as_ref()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Ok(r)
}

/// Frobenius norm.
pub fn frob(a: MatRef<'_, c64>) -> f64 {
    a.norm_l2()
}

pub fn frob_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    (a - b).norm_l2()
}

pub fn rfrob_diff(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    (a - b).norm_l2()
}

/// Square root and inverse square root of a symmetric positive definite matrix.
pub fn sym_sqrt_pair(a: MatRef<'_, f64>) -> Result<(RMat, RMat, Vec<f64>)> {
    let n = a.nrows();
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let eig = sym
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    let vals: Vec<f64> = (0..n).map(|i| eig.S()[i]).collect();
    if vals.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NonPhysical(format!(
            "matrix is not positive definite (min eigenvalue {:e})",
            vals.iter().cloned().fold(f64::INFINITY, f64::min)
        )));
    }
    let e = eig.U();
    let sq = scaled_outer(e, &vals.iter().map(|l| l.sqrt()).collect::<Vec<_>>());
    let isq = scaled_outer(e, &vals.iter().map(|l| 1.0 / l.sqrt()).collect::<Vec<_>>());
    Ok((sq, isq, vals))
}

/// `E diag(d) E^T`.
pub fn scaled_outer(e: MatRef<'_, f64>, d: &[f64]) -> RMat {
    let n = e.nrows();
    let ed = Mat::from_fn(n, d.len(), |i, j| e[(i, j)] * d[j]);
    &ed * e.transpose()
}

/// The symplectic form `[[0, I], [-I, 0]]` on `m` modes.
pub fn omega(m: usize) -> RMat {
    Mat::from_fn(2 * m, 2 * m, |i, j| {
        if j == i + m {
            1.0
        } else if i == j + m {
            -1.0
        } else {
            0.0
        }
    })
}

/// Real symmetric part of a real matrix.
pub fn symmetrize(a: MatRef<'_, f64>) -> RMat {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

pub fn real_to_complex(a: MatRef<'_, f64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0))
}
