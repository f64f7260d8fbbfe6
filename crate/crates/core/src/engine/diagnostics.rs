//! Convergence and Lyapunov diagnostics over a [`TrajectoryLog`].

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::TrajectoryLog;
use crate::scenarios::Mode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("empty series")]
    Empty,
    #[error("time grid and series lengths differ ({times} vs {series})")]
    Length { times: usize, series: usize },
    #[error("{kind} is not defined for {mode} runs")]
    KindMismatch { kind: LyapunovKind, mode: Mode },
    #[error("parameter out of domain: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LyapunovKind {
    /// `1/2 sum s_i^2` of the tracking controllers.
    V1,
    /// `1/2 beta~^T Q beta~`, undirected consensus tracking.
    V3,
    /// `1/2 alpha~^T Q alpha~`, undirected consensus tracking.
    V4,
    /// `sum p_i (c1 z_i^2 + c2 |z_i|)` with `z = H beta~`, directed
    /// consensus tracking.
    V5,
    /// `1/2 beta^T L beta`, average tracking.
    V6,
    /// `1/2 alpha^T L alpha`, average tracking.
    V7,
}

impl fmt::Display for LyapunovKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Matrices the Lyapunov candidates are weighted by.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LyapunovWeights {
    /// `L + B`, undirected consensus tracking.
    pub grounded: Option<DMatrix<f64>>,
    /// `L`, average tracking.
    pub laplacian: Option<DMatrix<f64>>,
    /// `H = L + B`, directed consensus tracking.
    pub h: Option<DMatrix<f64>>,
    /// `p = H^-T 1`, directed consensus tracking.
    pub p: Option<DVector<f64>>,
    pub c1: f64,
    pub c2: f64,
}

/// `1/2 e^T M e`.
pub fn half_quadratic(m: &DMatrix<f64>, e: &[f64]) -> f64 {
    let e = DVector::from_column_slice(e);
    0.5 * e.dot(&(m * &e))
}

/// `sum p_i (c1 z_i^2 + c2 |z_i|)`.
pub fn weighted_switching_energy(p: &[f64], c1: f64, c2: f64, z: &[f64]) -> f64 {
    p.iter()
        .zip(z)
        .map(|(pi, zi)| pi * (c1 * zi * zi + c2 * zi.abs()))
        .sum()
}

fn mismatch(kind: LyapunovKind, log: &TrajectoryLog) -> DiagnosticsError {
    DiagnosticsError::KindMismatch {
        kind,
        mode: log.mode,
    }
}

/// One value of the chosen candidate per logged sample.
pub fn lyapunov_series(log: &TrajectoryLog, kind: LyapunovKind) -> Result<Vec<f64>, DiagnosticsError> {
    use crate::topology::ObserverMode as M;
    let w = &log.weights;
    let mode = log.mode.observer_mode();
    let quadratic = |m: &Option<DMatrix<f64>>, data: &[Vec<f64>]| {
        let m = m.as_ref().ok_or_else(|| mismatch(kind, log))?;
        Ok(data.iter().map(|e| half_quadratic(m, e)).collect())
    };
    match kind {
        LyapunovKind::V1 => Ok(log
            .s
            .iter()
            .map(|s| 0.5 * s.iter().map(|v| v * v).sum::<f64>())
            .collect()),
        LyapunovKind::V3 | LyapunovKind::V4 if mode == Some(M::UndirectedCt) => {
            let data = if kind == LyapunovKind::V3 { &log.beta_err } else { &log.alpha_err };
            quadratic(&w.grounded, data)
        }
        LyapunovKind::V6 | LyapunovKind::V7 if mode == Some(M::Dat) => {
            let data = if kind == LyapunovKind::V6 { &log.beta } else { &log.alpha };
            quadratic(&w.laplacian, data)
        }
        LyapunovKind::V5 if mode == Some(M::DirectedCt) => {
            let (h, p) = match (&w.h, &w.p) {
                (Some(h), Some(p)) => (h, p),
                _ => return Err(mismatch(kind, log)),
            };
            Ok(log
                .beta_err
                .iter()
                .map(|b| {
                    let z = h * DVector::from_column_slice(b);
                    weighted_switching_energy(p.as_slice(), w.c1, w.c2, z.as_slice())
                })
                .collect())
        }
        _ => Err(mismatch(kind, log)),
    }
}

/// First grid time after which `series` stays at or below `threshold`
/// until the end; `None` if the last sample is still above it.
pub fn settling_time(
    times: &[f64],
    series: &[f64],
    threshold: f64,
) -> Result<Option<f64>, DiagnosticsError> {
    if series.is_empty() {
        return Err(DiagnosticsError::Empty);
    }
    if times.len() != series.len() {
        return Err(DiagnosticsError::Length {
            times: times.len(),
            series: series.len(),
        });
    }
    Ok(match series.iter().rposition(|&v| v > threshold) {
        None => Some(times[0]),
        Some(k) => times.get(k + 1).copied(),
    })
}

/// Settling-time bound `V0^(1-nu) / (mu (1-nu))` for `V' <= -mu V^nu`.
// The negated comparisons also reject NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn finite_time_bound(mu: f64, nu: f64, v0: f64) -> Result<f64, DiagnosticsError> {
    if !(mu > 0.0) {
        return Err(DiagnosticsError::Domain(format!("mu must be positive, got {mu}")));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(DiagnosticsError::Domain(format!("nu must lie in (0, 1), got {nu}")));
    }
    if !(v0 >= 0.0) {
        return Err(DiagnosticsError::Domain(format!("V0 must be nonnegative, got {v0}")));
    }
    Ok(v0.powf(1.0 - nu) / (mu * (1.0 - nu)))
}

/// Largest step-to-step increase `V[k+1] - V[k]`, or 0 for a nonincreasing
/// series.
pub fn max_increase(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}
