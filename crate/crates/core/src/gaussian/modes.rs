use faer::{c64, Mat, Side};

use super::{bloch_messiah, williamson, BlochMessiahResult, CovarianceMatrix, WilliamsonResult};
use crate::error::{Error, Result};

/// Relative tolerance on paired squeezing parameters.
pub const PAIRING_TOLERANCE: f64 = 1e-8;

/// Two-mode squeezed and thermal modes of a filtered twin-beam state.
///
/// Mode functions are unit-normalized densities on the grid. `squeeze_*[k]`
/// are the partners squeezed by `r[k]`; thermal modes carry occupation `nbar`.
#[derive(Debug, Clone)]
pub struct FilteredModeSet {
    pub r: Vec<f64>,
    pub squeeze_signal: Vec<Vec<c64>>,
    pub squeeze_idler: Vec<Vec<c64>>,
    /// Fraction of each squeeze-mode pair's signal function found on the signal field.
    pub squeeze_purity: Vec<f64>,
    pub thermal_signal: Vec<Vec<c64>>,
    pub thermal_signal_nbar: Vec<f64>,
    pub thermal_idler: Vec<Vec<c64>>,
    pub thermal_idler_nbar: Vec<f64>,
    pub williamson: WilliamsonResult,
    pub bloch_messiah: BlochMessiahResult,
    pub delta_omega: f64,
}

impl FilteredModeSet {
    pub fn purity(&self) -> f64 {
        super::purity_from_spectrum(&self.williamson.nu)
    }
}

fn gauge(v: &mut [c64]) {
    let k = (0..v.len())
        .max_by(|&a, &b| v[a].norm_sqr().total_cmp(&v[b].norm_sqr()))
        .unwrap_or(0);
    if let Some(p) = v.get(k).copied() {
        if p.norm() > 0.0 {
            let ph = p.conj() / p.norm();
            v.iter_mut().for_each(|x| *x *= ph);
        }
    }
}

/// Unit-normalized density from a slice of a per-bin mode vector.
fn density(v: &[c64], delta_omega: f64) -> Vec<c64> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let s = if norm > 0.0 {
        1.0 / (norm * delta_omega.sqrt())
    } else {
        0.0
    };
    let mut out: Vec<c64> = v.iter().map(|x| x * s).collect();
    gauge(&mut out);
    out
}

fn signal_weight(v: &[c64], n: usize) -> f64 {
    let total: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    v[..n].iter().map(|x| x.norm_sqr()).sum::<f64>() / total.max(f64::MIN_POSITIVE)
}

pub fn extract_mode_sets(v: &CovarianceMatrix, delta_omega: f64) -> Result<FilteredModeSet> {
    if !(delta_omega > 0.0) {
        return Err(Error::param("delta_omega", "must be positive"));
    }
    let n = v.points();
    let m = 2 * n;
    let w = williamson(v)?;
    let bm = bloch_messiah(w.s.as_ref())?;

    let rmax = bm.r.first().copied().unwrap_or(0.0);
    let mut r = Vec::new();
    let mut squeeze_signal = Vec::new();
    let mut squeeze_idler = Vec::new();
    let mut squeeze_purity = Vec::new();
    for k in 0..m / 2 {
        let (r1, r2) = (bm.r[2 * k], bm.r[2 * k + 1]);
        let gap = (r1 - r2).abs();
        if gap > PAIRING_TOLERANCE * r1.max(1.0) {
            return Err(Error::Pairing(gap));
        }
        if rmax <= 0.0 || r1 <= crate::schmidt::SCHMIDT_THRESHOLD * rmax {
            break;
        }
        let u1 = bm.u.col(2 * k);
        let u2 = bm.u.col(2 * k + 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let i = c64::new(0.0, 1.0);
        let mut a: Vec<c64> = (0..m).map(|j| (u1[j] + i * u2[j]) * h).collect();
        let mut b: Vec<c64> = (0..m).map(|j| (i * u1[j] + u2[j]) * h).collect();
        if signal_weight(&a, n) < signal_weight(&b, n) {
            std::mem::swap(&mut a, &mut b);
        }
        squeeze_purity.push(signal_weight(&a, n));
        r.push(0.5 * (r1 + r2));
        squeeze_signal.push(density(&a[..n], delta_omega));
        squeeze_idler.push(density(&b[n..], delta_omega));
    }

    let nbar = w.occupations();
    let nmax = nbar.first().copied().unwrap_or(0.0);
    let floor = (1e-9 * nmax).max(1e-12);
    let mut thermal = Vec::new();
    let mut j = 0;
    while j < m && nbar[j] > floor {
        let mut end = j + 1;
        while end < m && (nbar[end] - nbar[j]).abs() <= 1e-6 * nbar[j] + 1e-13 {
            end += 1;
        }
        let g = end - j;
        let cols = Mat::from_fn(m, g, |i, c| c64::new(bm.q[(i, j + c)], bm.q[(m + i, j + c)]));
        let cs = cols.subrows(0, n);
        let proj = cs.adjoint() * cs;
        let eig = proj
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("hermitian eigensolver failed: {e:?}")))?;
        let mixed = &cols * eig.U();
        for c in (0..g).rev() {
            let vcol: Vec<c64> = (0..m).map(|i| mixed[(i, c)]).collect();
            let nb = nbar[j..end].iter().sum::<f64>() / g as f64;
            thermal.push((signal_weight(&vcol, n) >= 0.5, nb, vcol));
        }
        j = end;
    }
    let mut thermal_signal = Vec::new();
    let mut thermal_signal_nbar = Vec::new();
    let mut thermal_idler = Vec::new();
    let mut thermal_idler_nbar = Vec::new();
    for (is_signal, nb, vcol) in thermal {
        if is_signal {
            thermal_signal.push(density(&vcol[..n], delta_omega));
            thermal_signal_nbar.push(nb);
        } else {
            thermal_idler.push(density(&vcol[n..], delta_omega));
            thermal_idler_nbar.push(nb);
        }
    }

    Ok(FilteredModeSet {
        r,
        squeeze_signal,
        squeeze_idler,
        squeeze_purity,
        thermal_signal,
        thermal_signal_nbar,
        thermal_idler,
        thermal_idler_nbar,
        williamson: w,
        bloch_messiah: bm,
        delta_omega,
    })
}
