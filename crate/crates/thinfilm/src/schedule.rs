//! Time-dependent coefficient k(t) with its closed-form derivative.
//!
//! The catalogue covers the shapes used by the experiments (constant,
//! exponential, power-of-base, arctan ramp) plus a linearly interpolated
//! user table. k must start positive and be nondecreasing; the validator
//! checks both numerically on a probe set.

use crate::error::{ModelError, Result};

/// Closed-form pair (k, k') drawn from a small catalogue.
#[derive(Clone, Debug)]
pub enum CoefficientSchedule {
    /// k(t) = a.
    Constant { a: f64 },
    /// k(t) = a * e^{b t}.
    Exponential { a: f64, b: f64 },
    /// k(t) = a * b^{c t}.
    PowerBase { a: f64, b: f64, c: f64 },
    /// k(t) = a * (1 + (2/pi) * arctan t).
    ArctanRamp { a: f64 },
    /// Piecewise-linear interpolation of (t, k) samples; constant
    /// extrapolation outside the covered span.
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl CoefficientSchedule {
    pub fn k(&self, t: f64) -> f64 {
        match self {
            Self::Constant { a } => *a,
            Self::Exponential { a, b } => a * (b * t).exp(),
            Self::PowerBase { a, b, c } => a * b.powf(c * t),
            Self::ArctanRamp { a } => a * (1.0 + std::f64::consts::FRAC_2_PI * t.atan()),
            Self::Table { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let hi = times.partition_point(|&s| s <= t);
                let (t0, t1) = (times[hi - 1], times[hi]);
                let (v0, v1) = (values[hi - 1], values[hi]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Closed-form derivative; tables use the slope of the current segment
    /// (zero outside the covered span).
    pub fn k_prime(&self, t: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Exponential { a, b } => a * b * (b * t).exp(),
            Self::PowerBase { a, b, c } => a * c * b.ln() * b.powf(c * t),
            Self::ArctanRamp { a } => a * std::f64::consts::FRAC_2_PI / (1.0 + t * t),
            Self::Table { times, values } => {
                let n = times.len();
                if t < times[0] || t >= times[n - 1] {
                    return 0.0;
                }
                let hi = times.partition_point(|&s| s <= t).min(n - 1);
                (values[hi] - values[hi - 1]) / (times[hi] - times[hi - 1])
            }
        }
    }

    /// Builds a table schedule, checking the sample layout.
    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(ModelError::Invalid {
                what: "schedule table",
                why: "need at least two (t, k) samples of equal length".into(),
            });
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(ModelError::Invalid {
                what: "schedule table",
                why: "sample times must be strictly increasing".into(),
            });
        }
        Ok(Self::Table { times, values })
    }

    /// Checks k(0) > 0 and k'(t) >= 0 on a probe set spanning [0, t_max].
    pub fn validate(&self, t_max: f64) -> Result<()> {
        if !(self.k(0.0) > 0.0) {
            return Err(ModelError::Invalid {
                what: "schedule",
                why: format!("k(0) = {} must be positive", self.k(0.0)),
            });
        }
        let span = if t_max > 0.0 { t_max } else { 1.0 };
        let probes = 257;
        for n in 0..probes {
            let t = span * n as f64 / (probes - 1) as f64;
            let kp = self.k_prime(t);
            if !(kp >= 0.0) || !self.k(t).is_finite() {
                return Err(ModelError::Invalid {
                    what: "schedule",
                    why: format!("k'({t}) = {kp} violates the nondecreasing requirement"),
                });
            }
        }
        Ok(())
    }
}
