//! Bounded scalar signals of the form `c + sum_k a_k sin(w_k t + phi_k)`.
//!
//! Used for leader inputs, follower disturbances and reference
//! accelerations.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Signal {
    #[serde(default)]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sinusoids: Vec<Sinusoid>,
}

impl Signal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            sinusoids: Vec::new(),
        }
    }

    /// `c + a sin(w t)`.
    pub fn sine(c: f64, amplitude: f64, omega: f64) -> Self {
        Self {
            constant: c,
            sinusoids: vec![Sinusoid {
                amplitude,
                omega,
                phase: 0.0,
            }],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.sinusoids
            .iter()
            .fold(self.constant, |acc, s| acc + s.amplitude * (s.omega * t + s.phase).sin())
    }

    /// `|c| + sum |a_k|`, an upper bound on `|signal(t)|` for all `t`.
    pub fn envelope(&self) -> f64 {
        self.sinusoids
            .iter()
            .fold(self.constant.abs(), |acc, s| acc + s.amplitude.abs())
    }

    /// Largest `|signal(t)|` over a uniform grid of `samples + 1` points on
    /// `[0, horizon]`.
    pub fn sampled_max(&self, horizon: f64, samples: usize) -> f64 {
        let samples = samples.max(1);
        (0..=samples)
            .map(|i| self.eval(horizon * i as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Whether `bound` covers the signal over `[0, horizon]`. The envelope is
    /// tried first; a dense sampling decides when the envelope is loose.
    pub fn respects_bound(&self, bound: f64, horizon: f64) -> bool {
        if self.envelope() <= bound {
            return true;
        }
        let samples = ((horizon * 2000.0) as usize).clamp(1000, 1_000_000);
        self.sampled_max(horizon, samples) <= bound * (1.0 + 1e-12)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.sinusoids.iter().all(|s| s.amplitude == 0.0)
    }
}
