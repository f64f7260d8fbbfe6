//! Time-based generators and the gain schedules built on them.
//!
//! A time-based generator `xi(t)` rises smoothly from 0 to 1 over a
//! prescribed duration and stays at 1 afterward, with `xi_dot` vanishing at
//! both ends. The gain
//!
//! ```text
//! h(t) = k * xi_dot(t) / (1 - xi(t) + delta)
//! ```
//!
//! drives `z' = -h(t) z` to `z0 * (delta / (1 + delta))^k` by the end of the
//! generator's duration, regardless of `z0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("generator duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("gain exponent k must be > 1, got {0}")]
    InvalidExponent(f64),
    #[error("regulariser delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
}

fn check_time(t: f64) -> Result<(), GeneratorError> {
    if t < 0.0 || t.is_nan() {
        Err(GeneratorError::NegativeTime(t))
    } else {
        Ok(())
    }
}

/// A termination function that rises from 0 to 1 over `duration()`.
///
/// Implementations must be nondecreasing and continuous, satisfy
/// `xi(0) = 0` and `xi(t) = 1` for `t >= duration()`, and have a derivative
/// that vanishes at `0` and for `t >= duration()`.
pub trait TimeBasedGenerator {
    fn duration(&self) -> f64;

    fn xi(&self, t: f64) -> Result<f64, GeneratorError>;

    fn xi_dot(&self, t: f64) -> Result<f64, GeneratorError>;

    fn xi_ddot(&self, t: f64) -> Result<f64, GeneratorError>;
}

/// The sixth-order polynomial generator
/// `10 (t/ts)^6 - 24 (t/ts)^5 + 15 (t/ts)^4`, whose first and second
/// derivatives both vanish at `0` and `ts`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialGenerator {
    t_s: f64,
}

impl PolynomialGenerator {
    pub fn new(t_s: f64) -> Result<Self, GeneratorError> {
        if !(t_s > 0.0 && t_s.is_finite()) {
            return Err(GeneratorError::InvalidDuration(t_s));
        }
        Ok(Self { t_s })
    }
}

impl TimeBasedGenerator for PolynomialGenerator {
    fn duration(&self) -> f64 {
        self.t_s
    }

    fn xi(&self, t: f64) -> Result<f64, GeneratorError> {
        check_time(t)?;
        if t >= self.t_s {
            return Ok(1.0);
        }
        let r = t / self.t_s;
        let r4 = r * r * r * r;
        Ok(r4 * (15.0 - 24.0 * r + 10.0 * r * r))
    }

    fn xi_dot(&self, t: f64) -> Result<f64, GeneratorError> {
        check_time(t)?;
        if t >= self.t_s {
            return Ok(0.0);
        }
        // 60 t^3 (t - ts)^2 / ts^6
        let r = t / self.t_s;
        let w = 1.0 - r;
        Ok(60.0 * r * r * r * w * w / self.t_s)
    }

    fn xi_ddot(&self, t: f64) -> Result<f64, GeneratorError> {
        check_time(t)?;
        if t >= self.t_s {
            return Ok(0.0);
        }
        // d/dt [60 r^3 (1-r)^2 / ts] = 60 r^2 (1-r) (3 - 5r) / ts^2
        let r = t / self.t_s;
        Ok(60.0 * r * r * (1.0 - r) * (3.0 - 5.0 * r) / (self.t_s * self.t_s))
    }
}

/// Exponent `k` and regulariser `delta` of a generator-based gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainParams {
    pub k: f64,
    pub delta: f64,
}

impl GainParams {
    pub fn new(k: f64, delta: f64) -> Result<Self, GeneratorError> {
        if !(k > 1.0 && k.is_finite()) {
            return Err(GeneratorError::InvalidExponent(k));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(GeneratorError::InvalidDelta(delta));
        }
        Ok(Self { k, delta })
    }
}

/// `h(t) = k xi_dot / (1 - xi + delta)`.
pub fn gain<G: TimeBasedGenerator>(g: &G, p: &GainParams, t: f64) -> Result<f64, GeneratorError> {
    let xi = g.xi(t)?;
    let xi_dot = g.xi_dot(t)?;
    Ok(p.k * xi_dot / (1.0 - xi + p.delta))
}

/// Exact time derivative of [`gain`] by the quotient rule.
pub fn gain_dot<G: TimeBasedGenerator>(
    g: &G,
    p: &GainParams,
    t: f64,
) -> Result<f64, GeneratorError> {
    let xi = g.xi(t)?;
    let xi_dot = g.xi_dot(t)?;
    let xi_ddot = g.xi_ddot(t)?;
    let den = 1.0 - xi + p.delta;
    Ok(p.k * (xi_ddot * den + xi_dot * xi_dot) / (den * den))
}

/// Factor multiplying `z0` at the end of the generator for `z' = -h(t) z`.
pub fn decay_residual_factor(p: &GainParams) -> f64 {
    (p.delta / (1.0 + p.delta)).powf(p.k)
}

/// One generator together with the gain parameters it is used with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage<G = PolynomialGenerator> {
    pub generator: G,
    pub params: GainParams,
}

impl<G: TimeBasedGenerator> Stage<G> {
    pub fn duration(&self) -> f64 {
        self.generator.duration()
    }
}

impl Stage<PolynomialGenerator> {
    pub fn polynomial(duration: f64, k: f64, delta: f64) -> Result<Self, GeneratorError> {
        Ok(Self {
            generator: PolynomialGenerator::new(duration)?,
            params: GainParams::new(k, delta)?,
        })
    }
}

/// Two generators used back to back: the first on `[0, t1)`, the second on
/// `[t1, t1 + t2)`, zero afterwards.
///
/// On the second stage the generator is shifted so that `xi_hat = xi2 + 1`
/// continues from the value the first stage ended at, with denominator
/// `2 - xi_hat + delta`. That is the same number as evaluating the second
/// gain with its clock restarted at `t1`, but it keeps `xi` itself
/// continuous across the joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagedGain<G = PolynomialGenerator> {
    pub stage1: Stage<G>,
    pub stage2: Stage<G>,
}

impl<G: TimeBasedGenerator> StagedGain<G> {
    pub fn new(stage1: Stage<G>, stage2: Stage<G>) -> Self {
        Self { stage1, stage2 }
    }

    /// `t1 + t2`, the instant after which the schedule is identically zero.
    pub fn total_duration(&self) -> f64 {
        self.stage1.generator.duration() + self.stage2.generator.duration()
    }

    pub fn first_duration(&self) -> f64 {
        self.stage1.generator.duration()
    }

    pub fn value(&self, t: f64) -> Result<f64, GeneratorError> {
        check_time(t)?;
        let t1 = self.stage1.generator.duration();
        if t < t1 {
            return gain(&self.stage1.generator, &self.stage1.params, t);
        }
        if t >= self.total_duration() {
            return Ok(0.0);
        }
        let tau = t - t1;
        let g = &self.stage2.generator;
        let xi_hat = g.xi(tau)? + 1.0;
        Ok(self.stage2.params.k * g.xi_dot(tau)? / (2.0 - xi_hat + self.stage2.params.delta))
    }

    pub fn derivative(&self, t: f64) -> Result<f64, GeneratorError> {
        check_time(t)?;
        let t1 = self.stage1.generator.duration();
        if t < t1 {
            return gain_dot(&self.stage1.generator, &self.stage1.params, t);
        }
        if t >= self.total_duration() {
            return Ok(0.0);
        }
        gain_dot(&self.stage2.generator, &self.stage2.params, t - t1)
    }

    /// `(h(t), h'(t))` in one call.
    pub fn evaluate(&self, t: f64) -> Result<(f64, f64), GeneratorError> {
        Ok((self.value(t)?, self.derivative(t)?))
    }
}

/// Staged gain value; free-function form of [`StagedGain::value`].
pub fn staged_gain<G: TimeBasedGenerator>(sg: &StagedGain<G>, t: f64) -> Result<f64, GeneratorError> {
    sg.value(t)
}

/// Staged gain derivative; free-function form of [`StagedGain::derivative`].
pub fn staged_gain_dot<G: TimeBasedGenerator>(
    sg: &StagedGain<G>,
    t: f64,
) -> Result<f64, GeneratorError> {
    sg.derivative(t)
}
