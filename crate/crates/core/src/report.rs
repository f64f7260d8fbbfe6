//! Trajectory CSV and plain-text convergence reports.

use std::fmt;
use std::io::{self, Write};

use crate::engine::{settling_time, TrajectoryLog};
use crate::generator::decay_residual_factor;
use crate::scenarios::{Scenario, Validation};

pub const CSV_HEADER: &str = "t,agent_id,x,v,u,alpha,beta,err_pos,err_vel,s,V1,V_obs";

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Converged,
    NotConverged,
    Invalid,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Converged => 0,
            ExitStatus::NotConverged => 1,
            ExitStatus::Invalid => 2,
        }
    }

    /// The worst of several statuses.
    pub fn combine(self, other: Self) -> Self {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

/// One row per agent per logged sample. `err_pos`/`err_vel` are the
/// tracking errors, `V1 = s^2/2` and `V_obs = (alpha~^2 + beta~^2)/2`.
pub fn write_csv<W: Write>(log: &TrajectoryLog, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for k in 0..log.len() {
        for i in 0..log.n {
            let s = log.s[k][i];
            let (ae, be) = (log.alpha_err[k][i], log.beta_err[k][i]);
            let row = [
                log.t[k],
                log.x[k][i],
                log.v[k][i],
                log.u[k][i],
                log.alpha[k][i],
                log.beta[k][i],
                log.x[k][i] - log.x_ref[k],
                log.v[k][i] - log.v_ref[k],
                s,
                0.5 * s * s,
                0.5 * (ae * ae + be * be),
            ];
            write!(w, "{:.16e},{}", row[0], i + 1)?;
            for v in &row[1..] {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverCheck {
    pub label: &'static str,
    pub time: f64,
    pub error: f64,
    pub tolerance: f64,
}

impl ObserverCheck {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub name: String,
    pub mode: String,
    pub deadline: f64,
    pub threshold: f64,
    pub metric_at_deadline: f64,
    pub final_metric: f64,
    /// First time after which the tracking metric stays below threshold.
    pub settling_time: Option<f64>,
    pub observer_checks: Vec<ObserverCheck>,
    pub conservation_drift: Option<f64>,
    /// Failed assumption and gain checks of a forced run.
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

fn max_abs_at(series: &[Vec<f64>], k: usize) -> f64 {
    TrajectoryLog::max_abs(&series[k])
}

impl ConvergenceReport {
    pub fn new(sc: &Scenario, log: &TrajectoryLog, validation: &Validation) -> Self {
        let deadline = sc.deadline();
        let threshold = sc.convergence_threshold();
        let metric_at = |t: f64| log.index_at(t).map_or(f64::NAN, |k| log.metric[k]);

        let mut observer_checks = Vec::new();
        if let Some(obs) = &sc.observer {
            // Fixed-time estimation tolerance: the sgn chattering band or
            // the generator's residual applied to the initial error.
            let e0 = log
                .alpha_err
                .first()
                .zip(log.beta_err.first())
                .map_or(0.0, |(a, b)| TrajectoryLog::max_abs(a).max(TrajectoryLog::max_abs(b)));
            let residual = decay_residual_factor(&obs.schedule.stage1.params).sqrt();
            let tolerance = (10.0 * obs.c2 * sc.sim.dt).max(residual * e0);
            let t_b1 = obs.schedule.first_duration();
            let t_b = obs.convergence_time();
            if let Some(k) = log.index_at(t_b1) {
                observer_checks.push(ObserverCheck {
                    label: "beta error at t_b1",
                    time: log.t[k],
                    error: max_abs_at(&log.beta_err, k),
                    tolerance,
                });
            }
            if let Some(k) = log.index_at(t_b) {
                observer_checks.push(ObserverCheck {
                    label: "alpha error at T_b",
                    time: log.t[k],
                    error: max_abs_at(&log.alpha_err, k),
                    tolerance,
                });
            }
        }

        let mut violations = Vec::new();
        if let Some(a) = &validation.assumptions {
            violations.extend(a.failures().map(|c| format!("assumption: {}", c.reason)));
        }
        if let Some(g) = &validation.gains {
            violations.extend(g.failures().map(|i| format!("gain: {i}")));
        }
        violations.extend(validation.errors.iter().cloned());

        Self {
            name: sc.name.clone(),
            mode: sc.mode.to_string(),
            deadline,
            threshold,
            metric_at_deadline: metric_at(deadline),
            final_metric: log.metric.last().copied().unwrap_or(f64::NAN),
            settling_time: settling_time(&log.t, &log.metric, threshold).ok().flatten(),
            observer_checks,
            conservation_drift: log.conservation_drift,
            violations,
            warnings: validation.warnings.clone(),
        }
    }

    /// Tracking metric within threshold at the deadline and for the rest of
    /// the run.
    pub fn converged(&self) -> bool {
        self.settling_time.is_some() && self.metric_at_deadline <= self.threshold
    }

    pub fn status(&self) -> ExitStatus {
        if self.converged() {
            ExitStatus::Converged
        } else {
            ExitStatus::NotConverged
        }
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {} ({})", self.name, self.mode)?;
        writeln!(f, "deadline T_a + T_c: {} s", self.deadline)?;
        writeln!(f, "threshold: {:.3e}", self.threshold)?;
        writeln!(f, "tracking metric at deadline: {:.6e}", self.metric_at_deadline)?;
        writeln!(f, "tracking metric at end: {:.6e}", self.final_metric)?;
        match self.settling_time {
            Some(t) => writeln!(f, "settled below threshold at: {t} s")?,
            None => writeln!(f, "settled below threshold at: never")?,
        }
        for c in &self.observer_checks {
            writeln!(
                f,
                "{} (t = {}): {:.6e} [tolerance {:.3e}] {}",
                c.label,
                c.time,
                c.error,
                c.tolerance,
                if c.passed() { "ok" } else { "FAIL" }
            )?;
        }
        if let Some(d) = self.conservation_drift {
            writeln!(f, "conservation drift: {d:.3e}")?;
        }
        for v in &self.violations {
            writeln!(f, "violated: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        writeln!(f, "verdict: {}", if self.converged() { "converged" } else { "not converged" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::example;
    use crate::engine::simulate;

    #[test]
    fn csv_layout() {
        let mut sc = example(2).unwrap();
        sc.sim.horizon = 0.02;
        sc.sim.decimation = 100;
        let log = simulate(&sc).unwrap();
        let mut buf = Vec::new();
        write_csv(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 3 * 4);
        // header, four rows for t = 0, then sample 1
        let row: Vec<&str> = lines[8].split(',').collect();
        assert_eq!(row.len(), 12);
        assert_eq!(row[1], "4");
        let x: f64 = row[2].parse().unwrap();
        assert_eq!(x, log.x[1][3]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ExitStatus::Converged.code(), 0);
        assert_eq!(ExitStatus::NotConverged.code(), 1);
        assert_eq!(ExitStatus::Invalid.code(), 2);
        assert_eq!(ExitStatus::Converged.combine(ExitStatus::NotConverged), ExitStatus::NotConverged);
        assert_eq!(ExitStatus::Invalid.combine(ExitStatus::Converged), ExitStatus::Invalid);
    }

    #[test]
    fn example_one_report_converges() {
        let sc = example(1).unwrap();
        let log = simulate(&sc).unwrap();
        let r = ConvergenceReport::new(&sc, &log, &sc.validate());
        assert!(r.converged(), "{r}");
        assert!(r.to_string().contains("verdict: converged"));
    }
}
