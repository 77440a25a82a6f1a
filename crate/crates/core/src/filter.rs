use serde::{Deserialize, Serialize};

/// Shape of a spectral filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    TopHat,
    Identity,
}

/// Amplitude transmission applied identically to signal and idler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterFunction {
    pub kind: FilterKind,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub half_width: f64,
}

impl FilterFunction {
    pub fn identity() -> Self {
        Self {
            kind: FilterKind::Identity,
            center: 0.0,
            half_width: 0.0,
        }
    }

    pub fn top_hat(center: f64, half_width: f64) -> Self {
        Self {
            kind: FilterKind::TopHat,
            center,
            half_width,
        }
    }

    pub fn transmission(&self, omega: f64) -> f64 {
        match self.kind {
            FilterKind::Identity => 1.0,
            FilterKind::TopHat => {
                if (omega - self.center).abs() < self.half_width {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Transmission sampled at each detuning of `omegas`.
    pub fn sample(&self, omegas: &[f64]) -> Vec<f64> {
        omegas.iter().map(|&w| self.transmission(w)).collect()
    }
}

pub fn filter_transmission(f: &FilterFunction, omega: f64) -> f64 {
    f.transmission(omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_hat_values() {
        let f = FilterFunction::top_hat(0.5, 1.5);
        assert_eq!(filter_transmission(&f, 0.5), 1.0);
        assert_eq!(filter_transmission(&f, 0.5 + 3.0), 0.0);
        assert_eq!(filter_transmission(&f, 0.5 - 1.49), 1.0);
    }

    #[test]
    fn identity_passes_everything() {
        let f = FilterFunction::identity();
        for w in [-1e9, 0.0, 3.0, 1e300] {
            assert_eq!(f.transmission(w), 1.0);
        }
    }

    #[test]
    fn config_round_trip() {
        let f: FilterFunction = serde_json::from_str(r#"{"kind":"top-hat","center":0,"half_width":1.5}"#).unwrap();
        assert_eq!(f, FilterFunction::top_hat(0.0, 1.5));
    }
}
