//! Poling profiles, apodization targets and phase-matching functions.

use faer::c64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Equal-length domains with nonlinearity signs in {+1, -1, 0}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolingProfile {
    pub domain_length: f64,
    pub signs: Vec<i8>,
}

impl PolingProfile {
    pub fn new(domain_length: f64, signs: Vec<i8>) -> Result<Self> {
        let p = Self { domain_length, signs };
        p.validate()?;
        Ok(p)
    }

    /// All domains poled the same way.
    pub fn uniform(length: f64, n_domains: usize) -> Result<Self> {
        if n_domains == 0 {
            return Err(Error::param("n_domains", "at least one domain is required"));
        }
        Self::new(length / n_domains as f64, vec![1; n_domains])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.domain_length > 0.0) || !self.domain_length.is_finite() {
            return Err(Error::param("domain_length", "must be positive and finite"));
        }
        if let Some(s) = self.signs.iter().find(|s| !matches!(s, -1..=1)) {
            return Err(Error::param("signs", format!("entry {s} is not in {{-1, 0, 1}}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.domain_length * self.signs.len() as f64
    }

    /// Spatially mirrored profile (last domain first).
    pub fn reversed(&self) -> Self {
        let mut signs = self.signs.clone();
        signs.reverse();
        Self {
            domain_length: self.domain_length,
            signs,
        }
    }

    /// Profile with every sign flipped.
    pub fn negated(&self) -> Self {
        Self {
            domain_length: self.domain_length,
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    /// Running sum of `g * dz` at every domain boundary, starting at zero.
    pub fn cumulative_amplitude(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.signs.len() + 1);
        let mut acc = 0i64;
        out.push(0.0);
        for &s in &self.signs {
            acc += s as i64;
            out.push(acc as f64 * self.domain_length);
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }

    pub(crate) fn hash_into(&self, h: &mut Sha256) {
        h.update(b"profile");
        h.update(self.domain_length.to_le_bytes());
        h.update((self.signs.len() as u64).to_le_bytes());
        h.update(self.signs.iter().map(|&s| s as u8).collect::<Vec<_>>());
    }
}

/// Gaussian apodization target `g(z) = exp(-(z - L/2)^2 / (2 sigma_th^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfTarget {
    pub sigma_th: f64,
    pub length: f64,
}

impl PmfTarget {
    pub fn new(sigma_th: f64, length: f64) -> Result<Self> {
        if !(sigma_th > 0.0) {
            return Err(Error::param("sigma_th", "must be positive"));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::param("length", "must be positive and finite"));
        }
        Ok(Self { sigma_th, length })
    }

    pub fn g(&self, z: f64) -> f64 {
        let x = (z - 0.5 * self.length) / self.sigma_th;
        (-0.5 * x * x).exp()
    }

    fn is_flat(&self) -> bool {
        self.length / self.sigma_th < 1e-6
    }

    /// `\int_0^L g(z) dz`.
    pub fn total_area(&self) -> f64 {
        if self.is_flat() {
            return self.length;
        }
        let a = self.length / (2.0 * SQRT_2 * self.sigma_th);
        self.sigma_th * (std::f64::consts::PI / 2.0).sqrt() * 2.0 * libm::erf(a)
    }
}

/// Width of the Gaussian poling envelope that makes the low-gain JSA
/// separable for a Gaussian pump of bandwidth `pump_sigma`.
///
/// With symmetric group-velocity matching the mismatch enters as
/// `(1/v_S - 1/v_P)(w_s - w_i)`, so separability requires
/// `sigma_th = 1 / (sigma * |1/v_S - 1/v_P|)`.
pub fn sigma_th_from_separability(pump_sigma: f64, v_s: f64, v_p: f64) -> Result<f64> {
    if !(pump_sigma > 0.0) {
        return Err(Error::param("pump_sigma", "must be positive"));
    }
    if v_s == 0.0 || v_p == 0.0 {
        return Err(Error::param("velocity", "group velocities must be nonzero"));
    }
    let kappa = 1.0 / v_s - 1.0 / v_p;
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::DegenerateMatching);
    }
    Ok(1.0 / (pump_sigma * kappa.abs()))
}

/// Normalized accumulated field amplitude `\int_0^z g / \int_0^L g`.
///
/// Rises monotonically from 0 at `z = 0` through 1/2 at the centre to 1 at
/// the far edge.
pub fn target_amplitude(target: &PmfTarget, z: f64) -> Result<f64> {
    let l = target.length;
    if !(0.0..=l).contains(&z) {
        return Err(Error::OutOfRange { z, length: l });
    }
    if target.is_flat() {
        return Ok(z / l);
    }
    let s = 2.0 * SQRT_2 * target.sigma_th;
    let edge = libm::erf(l / s);
    let raw = libm::erf((l - 2.0 * z) / s) - edge;
    Ok(raw / (-2.0 * edge))
}

/// Result of a poling design.
#[derive(Debug, Clone, PartialEq)]
pub struct PolingDesign {
    pub profile: PolingProfile,
    /// Largest deviation between normalized cumulative and target amplitude
    /// over all domain boundaries.
    pub max_error: f64,
}

impl PolingDesign {
    /// Normalized cumulative amplitude at each domain boundary.
    pub fn normalized_cumulative(&self, target: &PmfTarget) -> Vec<f64> {
        let area = target.total_area();
        self.profile
            .cumulative_amplitude()
            .into_iter()
            .map(|c| c / area)
            .collect()
    }
}

const TIE: f64 = 1e-12;

/// Tracking errors and targets shared by the optimizer and its tests.
pub(crate) fn design_grid(target: &PmfTarget, n_domains: usize) -> (Vec<f64>, f64) {
    let dz = target.length / n_domains as f64;
    let t = (0..=n_domains)
        .map(|k| target_amplitude(target, (k as f64 * dz).min(target.length)).unwrap())
        .collect();
    (t, dz / target.total_area())
}

/// Choose signs so the normalized cumulative amplitude follows the target.
///
/// Each domain moves the normalized cumulative amplitude by `dz / A`, where
/// `A` is the target area, so the steepest part of the target is matched by
/// a run of equal signs. The sequence minimizes the maximum tracking error
/// over domain boundaries exactly; ties are broken by the sum of squared
/// errors and then lexicographically with `+1` first.
pub fn design_domains(target: &PmfTarget, n_domains: usize) -> Result<PolingDesign> {
    if n_domains < 2 {
        return Err(Error::param("n_domains", "at least two domains are required"));
    }
    let n = n_domains;
    let (t, step) = design_grid(target, n);
    let width = 2 * n + 1;
    let err = |k: usize, m: usize| ((m as f64 - n as f64) * step - t[k]).abs();

    // Minimax value by forward DP over the lattice of partial sums.
    let mut best = vec![f64::INFINITY; width];
    best[n] = 0.0;
    for k in 1..=n {
        let mut next = vec![f64::INFINITY; width];
        for m in (n - k)..=(n + k) {
            let mut from = f64::INFINITY;
            if m >= 1 && best[m - 1].is_finite() {
                from = from.min(best[m - 1]);
            }
            if m + 1 < width && best[m + 1].is_finite() {
                from = from.min(best[m + 1]);
            }
            if from.is_finite() {
                next[m] = from.max(err(k, m));
            }
        }
        best = next;
    }
    let e_star = best.iter().cloned().fold(f64::INFINITY, f64::min);
    let allowed = |k: usize, m: usize| err(k, m) <= e_star + TIE;

    // Least-squares completion restricted to the admissible lattice.
    let mut suffix = vec![vec![f64::INFINITY; width]; n + 1];
    for m in 0..width {
        if allowed(n, m) {
            suffix[n][m] = 0.0;
        }
    }
    for k in (0..n).rev() {
        for m in (n - k)..=(n + k) {
            let mut v = f64::INFINITY;
            for m2 in [m + 1, m.wrapping_sub(1)] {
                if m2 < width && allowed(k + 1, m2) && suffix[k + 1][m2].is_finite() {
                    let e = err(k + 1, m2);
                    v = v.min(e * e + suffix[k + 1][m2]);
                }
            }
            suffix[k][m] = v;
        }
    }
    let total = suffix[0][n];
    if !total.is_finite() {
        return Err(Error::Numerical("poling optimizer found no admissible path".into()));
    }

    let mut signs = Vec::with_capacity(n);
    let mut m = n;
    let mut prefix = 0.0;
    for k in 0..n {
        let mut chosen = None;
        for (s, m2) in [(1i8, m + 1), (-1i8, m.wrapping_sub(1))] {
            if m2 < width && allowed(k + 1, m2) && suffix[k + 1][m2].is_finite() {
                let e = err(k + 1, m2);
                if prefix + e * e + suffix[k + 1][m2] <= total + TIE {
                    chosen = Some((s, m2, e));
                    break;
                }
            }
        }
        let (s, m2, e) = chosen.ok_or_else(|| Error::Numerical("poling backtrack failed".into()))?;
        signs.push(s);
        prefix += e * e;
        m = m2;
    }
    let profile = PolingProfile::new(target.length / n as f64, signs)?;
    let max_error = tracking_error(target, &profile);
    Ok(PolingDesign { profile, max_error })
}

/// Maximum deviation of the normalized cumulative amplitude from the target.
pub fn tracking_error(target: &PmfTarget, profile: &PolingProfile) -> f64 {
    let (t, step) = design_grid(target, profile.len());
    let mut acc = 0i64;
    let mut worst: f64 = 0.0;
    for (k, &s) in profile.signs.iter().enumerate() {
        acc += s as i64;
        worst = worst.max((acc as f64 * step - t[k + 1]).abs());
    }
    worst
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Phase-matching function `sum_p g_p \int_{domain p} exp(-i z dk) dz`,
/// scaled so the largest magnitude over `dk_values` is one.
pub fn pmf_of_profile(profile: &PolingProfile, dk_values: &[f64]) -> Vec<c64> {
    let dz = profile.domain_length;
    let mut out: Vec<c64> = dk_values
        .iter()
        .map(|&dk| {
            let mut acc = c64::new(0.0, 0.0);
            for (p, &s) in profile.signs.iter().enumerate() {
                if s != 0 {
                    let zc = (p as f64 + 0.5) * dz;
                    acc += c64::from_polar(s as f64, -dk * zc);
                }
            }
            acc * (dz * sinc(0.5 * dk * dz))
        })
        .collect();
    let peak = out.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        for v in &mut out {
            *v /= peak;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn brute_force(target: &PmfTarget, n: usize) -> Vec<i8> {
        let (t, step) = design_grid(target, n);
        let mut best: Option<(f64, f64, Vec<i8>)> = None;
        // Enumerate with +1 first in lexicographic order.
        for code in 0..(1u32 << n) {
            let signs: Vec<i8> = (0..n)
                .map(|k| if code >> (n - 1 - k) & 1 == 0 { 1 } else { -1 })
                .collect();
            let mut acc = 0i64;
            let mut mx: f64 = 0.0;
            let mut sq = 0.0;
            for (k, &s) in signs.iter().enumerate() {
                acc += s as i64;
                let e = (acc as f64 * step - t[k + 1]).abs();
                mx = mx.max(e);
                sq += e * e;
            }
            let better = match &best {
                None => true,
                Some((bm, bs, _)) => mx < bm - TIE || (mx <= bm + TIE && sq < bs - TIE),
            };
            if better {
                best = Some((mx, sq, signs));
            }
        }
        best.unwrap().2
    }

    #[test]
    fn separability_width() {
        assert_eq!(sigma_th_from_separability(1.0, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(sigma_th_from_separability(2.0, 0.5, 1.0).unwrap(), 0.5);
        let a = sigma_th_from_separability(1.0, 1.0 / 1.7, 1.0).unwrap();
        let b = sigma_th_from_separability(1.0, 1.0 / 2.4, 1.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(matches!(
            sigma_th_from_separability(1.0, 2.0, 2.0),
            Err(Error::DegenerateMatching)
        ));
    }

    #[test]
    fn target_endpoints() {
        let t = PmfTarget::new(0.125, 1.0).unwrap();
        assert_eq!(target_amplitude(&t, 0.0).unwrap(), 0.0);
        assert!((target_amplitude(&t, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((target_amplitude(&t, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(target_amplitude(&t, 1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn target_matches_quadrature() {
        for sigma in [0.125, 0.25, 0.6] {
            let t = PmfTarget::new(sigma, 1.0).unwrap();
            // Composite Simpson with 20000 panels.
            let m = 20000;
            let h = 1.0 / m as f64;
            let mut cum = vec![0.0; m + 1];
            for k in 0..m {
                let a = k as f64 * h;
                let s = h / 6.0 * (t.g(a) + 4.0 * t.g(a + 0.5 * h) + t.g(a + h));
                cum[k + 1] = cum[k] + s;
            }
            let total = cum[m];
            for k in (0..=m).step_by(50) {
                let z = k as f64 * h;
                let d = (target_amplitude(&t, z).unwrap() - cum[k] / total).abs();
                assert!(d < 1e-8, "sigma={sigma} z={z} d={d}");
            }
            assert!((t.total_area() - total).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_target_gives_uniform_signs() {
        let t = PmfTarget::new(f64::INFINITY, 1.0).unwrap();
        let d = design_domains(&t, 4).unwrap();
        assert_eq!(d.profile.signs, vec![1, 1, 1, 1]);
        assert!(d.max_error < 1e-12);
    }

    #[test]
    fn design_matches_exhaustive_search() {
        for n in 2..=12 {
            for sigma in [0.1, 0.2, 0.35, 1.0] {
                let t = PmfTarget::new(sigma, 1.0).unwrap();
                let d = design_domains(&t, n).unwrap();
                assert_eq!(d.profile.signs, brute_force(&t, n), "n={n} sigma={sigma}");
            }
        }
    }

    #[test]
    fn thousand_domains_track_target() {
        let t = PmfTarget::new(0.125, 1.0).unwrap();
        let d = design_domains(&t, 1000).unwrap();
        assert!(d.max_error < 0.02, "{}", d.max_error);
        let c = d.normalized_cumulative(&t);
        for (k, v) in c.iter().enumerate() {
            let z = k as f64 / 1000.0;
            assert!((v - target_amplitude(&t, z.min(1.0)).unwrap()).abs() <= d.max_error + 1e-12);
        }
    }

    #[test]
    fn uniform_pmf_is_sinc() {
        let p = PolingProfile::uniform(1.0, 200).unwrap();
        let dks: Vec<f64> = (-400..=400).map(|k| k as f64 * 0.05).collect();
        let phi = pmf_of_profile(&p, &dks);
        for (dk, v) in dks.iter().zip(&phi) {
            assert!((v.norm() - sinc(dk / 2.0).abs()).abs() < 1e-6);
        }
    }

    #[test]
    fn designed_pmf_is_gaussian() {
        let sigma = 0.125;
        let t = PmfTarget::new(sigma, 1.0).unwrap();
        let p = design_domains(&t, 1000).unwrap().profile;
        let dks: Vec<f64> = (-300..=300).map(|k| k as f64 * 0.01 / sigma).collect();
        let phi = pmf_of_profile(&p, &dks);
        let (mut num, mut den) = (0.0, 0.0);
        for (dk, v) in dks.iter().zip(&phi) {
            let g = (-0.5 * sigma * sigma * dk * dk).exp();
            num += (v.norm() - g).powi(2);
            den += g * g;
        }
        assert!((num / den).sqrt() < 0.05, "{}", (num / den).sqrt());
    }

    #[test]
    fn single_domain_peak() {
        let p = PolingProfile::new(0.3, vec![1]).unwrap();
        let v = pmf_of_profile(&p, &[0.0]);
        assert!((v[0] - c64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn profile_text_round_trip() {
        let p = PolingProfile::new(0.25, vec![1, -1, 0, 1]).unwrap();
        assert_eq!(PolingProfile::from_json(&p.to_json()).unwrap(), p);
        assert!(PolingProfile::from_json(r#"{"domain_length":1,"signs":[2]}"#).is_err());
        assert!(PolingProfile::from_json(r#"{"domain_length":-1,"signs":[1]}"#).is_err());
    }

    fn signs_strategy() -> impl Strategy<Value = Vec<i8>> {
        proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8), Just(0i8)], 1..40)
    }

    proptest! {
        #[test]
        fn flipping_signs_keeps_magnitude(signs in signs_strategy(), dk in -50.0f64..50.0) {
            let p = PolingProfile::new(0.05, signs).unwrap();
            let dks = [0.0, dk, 0.5 * dk];
            let a = pmf_of_profile(&p, &dks);
            let b = pmf_of_profile(&p.negated(), &dks);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.norm() - y.norm()).abs() < 1e-12);
            }
        }

        #[test]
        fn reversal_conjugates_up_to_phase(signs in signs_strategy(), dk in -50.0f64..50.0) {
            let p = PolingProfile::new(0.05, signs).unwrap();
            let dks = [dk, 0.3 * dk, 1.7];
            let a = pmf_of_profile(&p, &dks);
            let b = pmf_of_profile(&p.reversed(), &dks);
            let len = p.length();
            for ((x, y), k) in a.iter().zip(&b).zip(dks) {
                // Mirror z -> L - z maps Phi(dk) to exp(-i dk L) conj(Phi(dk)).
                let want = c64::from_polar(1.0, -k * len) * x.conj();
                prop_assert!((want - y).norm() < 1e-10);
            }
        }

        #[test]
        fn design_never_exceeds_greedy_free_bound(sigma in 0.08f64..2.0, n in 2usize..60) {
            let t = PmfTarget::new(sigma, 1.0).unwrap();
            let d = design_domains(&t, n).unwrap();
            let uniform = PolingProfile::uniform(1.0, n).unwrap();
            prop_assert!(d.max_error <= tracking_error(&t, &uniform) + 1e-12);
            prop_assert_eq!(d.profile.len(), n);
        }
    }
}
