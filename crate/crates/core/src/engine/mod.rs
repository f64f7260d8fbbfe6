//! Fixed-step integration of the coupled plant/observer/controller system.
//!
//! Time is always `k * dt` rather than an accumulated sum, so stage
//! boundaries that are multiples of `dt` are hit exactly and reruns are
//! bit-identical.

mod diagnostics;
mod network;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::GeneratorError;

pub use diagnostics::{
    finite_time_bound, lyapunov_series, max_increase, settling_time, DiagnosticsError,
    LyapunovKind, LyapunovWeights,
};
pub use network::{simulate, TrajectoryLog};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("state became non-finite at t = {t} (component {component})")]
    NonFinite { t: f64, component: usize },
    #[error("initial state has length {got}, system dimension is {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("scenario is incomplete: {0}")]
    Scenario(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Forward Euler. The right-hand sides contain `sgn`, so nothing is
    /// gained from a higher order in general.
    #[default]
    Euler,
    /// Classical fourth-order Runge-Kutta, for smooth sub-problems.
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub integrator: Integrator,
    pub seed: u64,
    /// Log every `decimation`-th step.
    pub decimation: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            horizon: 10.0,
            integrator: Integrator::Euler,
            seed: 0,
            decimation: 100,
        }
    }
}

/// Relative slack when deciding whether a duration is a multiple of `dt`.
const GRID_TOL: f64 = 1e-6;

impl SimConfig {
    pub fn steps(&self) -> usize {
        let raw = self.horizon / self.dt;
        let rounded = raw.round();
        if (raw - rounded).abs() <= GRID_TOL {
            rounded as usize
        } else {
            raw.ceil() as usize
        }
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    fn check_basic(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(SimError::Config(format!(
                "horizon must be nonnegative, got {}",
                self.horizon
            )));
        }
        if self.decimation == 0 {
            return Err(SimError::Config("decimation must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks `dt`, the horizon against the scenario deadline, and that
    /// every named event duration lies on the time grid.
    pub fn validate(&self, deadline: f64, events: &[(&str, f64)]) -> Result<(), SimError> {
        self.check_basic()?;
        if self.horizon + GRID_TOL * self.dt < deadline {
            return Err(SimError::Config(format!(
                "horizon {} ends before the convergence deadline {deadline}",
                self.horizon
            )));
        }
        for &(name, d) in events {
            let steps = d / self.dt;
            if (steps - steps.round()).abs() > GRID_TOL * steps.abs().max(1.0) {
                return Err(SimError::Config(format!(
                    "{name} = {d} is not a multiple of dt = {}",
                    self.dt
                )));
            }
        }
        Ok(())
    }
}

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), SimError>;
}

/// Decimated samples of an integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, &[f64])> {
        Some((*self.t.last()?, self.y.last()?.as_slice()))
    }
}

/// Integrates `sys` from `y0` over `[0, cfg.horizon]`, sampling every
/// `cfg.decimation` steps plus the final step. `monitor` sees every step.
pub fn integrate_with<S, M>(
    sys: &mut S,
    y0: &[f64],
    cfg: &SimConfig,
    mut monitor: M,
) -> Result<Trajectory, SimError>
where
    S: OdeSystem,
    M: FnMut(f64, &[f64]),
{
    cfg.check_basic()?;
    let dim = sys.dim();
    if y0.len() != dim {
        return Err(SimError::Dimension {
            got: y0.len(),
            expected: dim,
        });
    }
    let steps = cfg.steps();
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut scratch = match cfg.integrator {
        Integrator::Euler => Vec::new(),
        Integrator::Rk4 => vec![vec![0.0; dim]; 4],
    };
    let mut out = Trajectory {
        t: Vec::with_capacity(steps / cfg.decimation + 2),
        y: Vec::with_capacity(steps / cfg.decimation + 2),
    };
    out.t.push(0.0);
    out.y.push(y.clone());
    monitor(0.0, &y);

    let dt = cfg.dt;
    for step in 0..steps {
        let t = cfg.time(step);
        match cfg.integrator {
            Integrator::Euler => {
                sys.rhs(t, &y, &mut k1)?;
                for (yi, ki) in y.iter_mut().zip(&k1) {
                    *yi += dt * ki;
                }
            }
            Integrator::Rk4 => {
                let (head, tail) = scratch.split_at_mut(1);
                let tmp = &mut head[0];
                let (k2, rest) = tail.split_at_mut(1);
                let (k3, k4) = rest.split_at_mut(1);
                let (k2, k3, k4) = (&mut k2[0], &mut k3[0], &mut k4[0]);
                let half = 0.5 * dt;
                sys.rhs(t, &y, &mut k1)?;
                for i in 0..dim {
                    tmp[i] = y[i] + half * k1[i];
                }
                sys.rhs(t + half, tmp, k2)?;
                for i in 0..dim {
                    tmp[i] = y[i] + half * k2[i];
                }
                sys.rhs(t + half, tmp, k3)?;
                for i in 0..dim {
                    tmp[i] = y[i] + dt * k3[i];
                }
                sys.rhs(t + dt, tmp, k4)?;
                for i in 0..dim {
                    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        let t_next = cfg.time(step + 1);
        if let Some(component) = y.iter().position(|v| !v.is_finite()) {
            return Err(SimError::NonFinite {
                t: t_next,
                component,
            });
        }
        monitor(t_next, &y);
        if (step + 1) % cfg.decimation == 0 || step + 1 == steps {
            out.t.push(t_next);
            out.y.push(y.clone());
        }
    }
    Ok(out)
}

/// [`integrate_with`] without a per-step monitor.
pub fn integrate<S: OdeSystem>(
    sys: &mut S,
    y0: &[f64],
    cfg: &SimConfig,
) -> Result<Trajectory, SimError> {
    integrate_with(sys, y0, cfg, |_, _| {})
}

/// Adapts a closure into an [`OdeSystem`].
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), SimError> {
        (self.f)(t, y, dy);
        Ok(())
    }
}
