//! Pump-power calibration to a target mean signal photon number.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct CalibrationOptions {
    /// Relative tolerance on the mean signal photon number.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// First pump photon number to try.
    pub initial_pump_photons: Option<f64>,
    /// Expected `d ln N_S / d ln N_P` near the solution.
    pub initial_slope: Option<f64>,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            max_iter: 100,
            initial_pump_photons: None,
            initial_slope: None,
        }
    }
}

/// Outcome of a calibration together with the artifact of the final evaluation.
#[derive(Debug, Clone)]
pub struct Calibration<T> {
    pub pump_photons: f64,
    pub mean_signal_photons: f64,
    pub iterations: usize,
    /// Local `d ln N_S / d ln N_P` from the last two evaluations, if known.
    pub slope: Option<f64>,
    pub value: T,
}

/// Find the pump photon number whose output has `target` mean signal photons.
///
/// `eval` maps a pump photon number to `(N_S, artifact)` and must be
/// monotone increasing. The search runs a secant iteration on
/// `ln N_S` versus `ln N_P`, falling back to bisection whenever a step
/// leaves the current bracket.
pub fn calibrate_pump_power<T, F>(target: f64, opts: &CalibrationOptions, mut eval: F) -> Result<Calibration<T>>
where
    F: FnMut(f64) -> Result<(f64, T)>,
{
    if !(target >= 0.0) || !target.is_finite() {
        return Err(Error::param("target", "must be finite and nonnegative"));
    }
    if target == 0.0 {
        let (ns, value) = eval(0.0)?;
        return Ok(Calibration {
            pump_photons: 0.0,
            mean_signal_photons: ns,
            iterations: 1,
            slope: None,
            value,
        });
    }
    let ln_t = target.ln();
    let mut x = opts.initial_pump_photons.filter(|p| *p > 0.0).unwrap_or(1.0).ln();
    let mut lo: Option<f64> = None;
    let mut hi: Option<f64> = None;
    let mut prev: Option<(f64, f64)> = None;
    let mut last_ns = f64::NAN;
    for it in 1..=opts.max_iter {
        let np = x.exp();
        let (ns, value) = eval(np)?;
        if !ns.is_finite() || ns < 0.0 {
            return Err(Error::Numerical(format!("photon number {ns} at pump {np}")));
        }
        last_ns = ns;
        if ((ns - target) / target).abs() < opts.rel_tol {
            let slope = prev.and_then(|(px, py)| {
                let d = (ns.ln() - py) / (x - px);
                (d.is_finite() && d > 0.0).then_some(d)
            });
            return Ok(Calibration {
                pump_photons: np,
                mean_signal_photons: ns,
                iterations: it,
                slope,
                value,
            });
        }
        if ns <= 0.0 {
            lo = Some(x);
            x += 5.0;
            continue;
        }
        let y = ns.ln() - ln_t;
        if y < 0.0 {
            lo = Some(lo.map_or(x, |l: f64| l.max(x)));
        } else {
            hi = Some(hi.map_or(x, |h: f64| h.min(x)));
        }
        let slope = match prev {
            Some((px, py)) if (x - px).abs() > 0.0 => {
                let d = (ns.ln() - py) / (x - px);
                if d.is_finite() && d > 0.0 {
                    d
                } else {
                    1.0
                }
            }
            _ => opts.initial_slope.filter(|s| *s > 0.0).unwrap_or(1.0),
        };
        prev = Some((x, ns.ln()));
        let mut next = x - y / slope;
        next = next.clamp(x - 10.0, x + 10.0);
        if let (Some(l), Some(h)) = (lo, hi) {
            if !(next > l && next < h) {
                next = 0.5 * (l + h);
            }
        }
        x = next;
    }
    Err(Error::Calibration {
        iterations: opts.max_iter,
        target,
        reached: last_ns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_target_needs_no_pump() {
        let c = calibrate_pump_power(0.0, &CalibrationOptions::default(), |p| Ok((p, ()))).unwrap();
        assert_eq!(c.pump_photons, 0.0);
    }

    #[test]
    fn solves_nonlinear_gain_curve() {
        // sinh^2 of a square-root gain, like a single-mode squeezer.
        let f = |p: f64| (0.7 * p.sqrt()).sinh().powi(2);
        for target in [3e-4, 0.1, 1.0, 10.6, 200.0] {
            let c = calibrate_pump_power(target, &CalibrationOptions::default(), |p| Ok((f(p), ()))).unwrap();
            assert!(((c.mean_signal_photons - target) / target).abs() < 1e-3);
            assert!(c.iterations < 30, "{target}: {}", c.iterations);
        }
    }

    #[test]
    fn deterministic() {
        let f = |p: f64| (0.3 * p.sqrt()).sinh().powi(2);
        let a = calibrate_pump_power(5.0, &CalibrationOptions::default(), |p| Ok((f(p), ()))).unwrap();
        let b = calibrate_pump_power(5.0, &CalibrationOptions::default(), |p| Ok((f(p), ()))).unwrap();
        assert_eq!(a.pump_photons.to_bits(), b.pump_photons.to_bits());
    }

    #[test]
    fn reports_non_convergence() {
        let opts = CalibrationOptions {
            max_iter: 3,
            ..Default::default()
        };
        let r = calibrate_pump_power(1.0, &opts, |p| Ok((1e-30 * p, ())));
        assert!(matches!(r, Err(Error::Calibration { .. })));
    }

    #[test]
    fn rejects_negative_target() {
        assert!(calibrate_pump_power(-1.0, &CalibrationOptions::default(), |p| Ok((p, ()))).is_err());
    }
}
