//! Fixed-time sliding-mode control of a single double integrator
//! `z1' = z2, z2' = u + disturbance`.
//!
//! The surface `s = (h/2 + 1) z1 + z2` and the control
//! `u = -h'/2 z1 - (h/2 + 1) z2 - h/2 s - rho sgn(s)` give
//! `s' = -h/2 s - rho sgn(s) + disturbance`, so the staged gain `h` pulls
//! `s` to the surface by the end of stage one and `z1` to zero by the end of
//! stage two. Nothing in the law divides by the state.

use crate::generator::{GeneratorError, StagedGain};
use crate::signal::Signal;

/// `sgn` with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub z1: f64,
    pub z2: f64,
}

impl PlantState {
    pub fn new(z1: f64, z2: f64) -> Self {
        Self { z1, z2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmcController {
    pub schedule: StagedGain,
    pub rho: f64,
    /// Width of an optional `sat(s / width)` boundary layer replacing
    /// `sgn(s)`. `None` keeps the discontinuous law.
    pub boundary_layer: Option<f64>,
}

impl SmcController {
    pub fn new(schedule: StagedGain, rho: f64) -> Self {
        Self {
            schedule,
            rho,
            boundary_layer: None,
        }
    }

    /// `T_a = t_a1 + t_a2`.
    pub fn convergence_time(&self) -> f64 {
        self.schedule.total_duration()
    }

    fn switching(&self, s: f64) -> f64 {
        match self.boundary_layer {
            Some(w) if w > 0.0 => (s / w).clamp(-1.0, 1.0),
            _ => sgn(s),
        }
    }

    pub fn surface(&self, state: PlantState, t: f64) -> Result<f64, GeneratorError> {
        let h = self.schedule.value(t)?;
        Ok(surface_with_gain(h, state))
    }

    pub fn control(&self, state: PlantState, t: f64) -> Result<f64, GeneratorError> {
        let (h, h_dot) = self.schedule.evaluate(t)?;
        Ok(self.control_with_gain(h, h_dot, state))
    }

    /// Control law for a known `(h, h')` pair.
    pub fn control_with_gain(&self, h: f64, h_dot: f64, state: PlantState) -> f64 {
        let s = surface_with_gain(h, state);
        -0.5 * h_dot * state.z1 - (0.5 * h + 1.0) * state.z2 - 0.5 * h * s
            - self.rho * self.switching(s)
    }

    /// `(z1', z2')` of the closed loop.
    pub fn closed_loop_rhs(
        &self,
        state: PlantState,
        t: f64,
        disturbance: &Signal,
    ) -> Result<PlantState, GeneratorError> {
        let u = self.control(state, t)?;
        Ok(PlantState::new(state.z2, u + disturbance.eval(t)))
    }

    /// Warning text when `rho` is below `disturbance_bound + 1`.
    pub fn rho_warning(&self, disturbance_bound: f64) -> Option<String> {
        check_rho(self.rho, disturbance_bound + 1.0)
    }
}

pub(crate) fn check_rho(rho: f64, required: f64) -> Option<String> {
    (rho < required).then(|| {
        format!("rho = {rho} is below the required {required}; convergence is not guaranteed")
    })
}

/// `s = (h/2 + 1) z1 + z2`.
#[inline]
pub fn surface_with_gain(h: f64, state: PlantState) -> f64 {
    (0.5 * h + 1.0) * state.z1 + state.z2
}
