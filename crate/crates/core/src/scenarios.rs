//! Leader, follower and reference dynamics, the observer-based tracking
//! controllers, and the [`Scenario`] aggregate the engine runs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{SimConfig, TrajectoryLog};
use crate::generator::GeneratorError;
use crate::observers::{validate_gains, Bounds, GainReport, ObserverGains};
use crate::signal::Signal;
use crate::smc::{check_rho, surface_with_gain, PlantState, SmcController};
use crate::topology::{check_assumptions, AssumptionReport, ObserverMode, Topology};

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderSpec {
    pub x0: f64,
    pub v0: f64,
    pub u0: Signal,
    pub u_max: f64,
}

/// `(x0', v0') = (v0, u0(t))`.
pub fn leader_rhs(spec: &LeaderSpec, state: (f64, f64), t: f64) -> (f64, f64) {
    (state.1, spec.u0.eval(t))
}

/// Initial follower positions and velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStates {
    Explicit { x: Vec<f64>, v: Vec<f64> },
    /// Uniform on `[low, high]` from a ChaCha8 stream seeded by the
    /// simulation seed: all `x` first, then all `v`.
    Random { low: f64, high: f64 },
}

impl InitialStates {
    pub fn resolve(&self, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        match self {
            InitialStates::Explicit { x, v } => (x.clone(), v.clone()),
            InitialStates::Random { low, high } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut draw = || {
                    if high > low {
                        rng.random_range(*low..=*high)
                    } else {
                        *low
                    }
                };
                let x = (0..n).map(|_| draw()).collect();
                let v = (0..n).map(|_| draw()).collect();
                (x, v)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FollowerSpec {
    pub initial: InitialStates,
    /// Empty: no disturbance. One entry: shared by every agent. Otherwise
    /// one per agent.
    pub disturbances: Vec<Signal>,
    pub d_max: f64,
}

impl FollowerSpec {
    pub fn disturbance(&self, i: usize) -> Option<&Signal> {
        match self.disturbances.len() {
            0 => None,
            1 => self.disturbances.first(),
            _ => self.disturbances.get(i),
        }
    }

    pub fn disturbance_at(&self, i: usize, t: f64) -> f64 {
        self.disturbance(i).map_or(0.0, |d| d.eval(t))
    }
}

/// `(x_i', v_i') = (v_i, u_i + d_i(t))`.
pub fn follower_rhs(spec: &FollowerSpec, i: usize, state: (f64, f64), u: f64, t: f64) -> (f64, f64) {
    (state.1, u + spec.disturbance_at(i, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSpec {
    pub r0: Vec<f64>,
    pub f0: Vec<f64>,
    pub accelerations: Vec<Signal>,
    pub a_max: f64,
}

impl ReferenceSpec {
    pub fn acceleration(&self, i: usize, t: f64) -> f64 {
        match self.accelerations.len() {
            0 => 0.0,
            1 => self.accelerations[0].eval(t),
            _ => self.accelerations[i].eval(t),
        }
    }
}

/// `(r_i', f_i') = (f_i, a_i(t))`.
pub fn reference_rhs(spec: &ReferenceSpec, i: usize, state: (f64, f64), t: f64) -> (f64, f64) {
    (state.1, spec.acceleration(i, t))
}

/// Sliding-mode tracking controller that stays silent until the observers
/// have converged at `t_c`, then runs the single-plant law on the observer
/// outputs with its gain clock restarted at `t_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingController {
    pub smc: SmcController,
    pub t_c: f64,
}

impl TrackingController {
    pub fn is_active(&self, t: f64) -> bool {
        t >= self.t_c
    }

    /// `(h1, h1')` at absolute time `t`, zero before `t_c`.
    pub fn gain(&self, t: f64) -> Result<(f64, f64), GeneratorError> {
        if t < self.t_c {
            Ok((0.0, 0.0))
        } else {
            self.smc.schedule.evaluate(t - self.t_c)
        }
    }

    /// Consensus tracking: drive `(alpha_i, beta_i)` (the estimated offset
    /// from the leader) to zero.
    pub fn ct_control(&self, alpha: f64, beta: f64, t: f64) -> Result<f64, GeneratorError> {
        if !self.is_active(t) {
            return Ok(0.0);
        }
        let (h, h_dot) = self.gain(t)?;
        Ok(self.smc.control_with_gain(h, h_dot, PlantState::new(alpha, beta)))
    }

    /// Average tracking: drive `(x_i - alpha_i, v_i - beta_i)` to zero.
    pub fn dat_control(
        &self,
        x: f64,
        v: f64,
        alpha: f64,
        beta: f64,
        t: f64,
    ) -> Result<f64, GeneratorError> {
        if !self.is_active(t) {
            return Ok(0.0);
        }
        let (h, h_dot) = self.gain(t)?;
        Ok(self
            .smc
            .control_with_gain(h, h_dot, PlantState::new(x - alpha, v - beta)))
    }

    /// Control for a tracking-error state with `(h1, h1')` already known;
    /// zero while inactive.
    #[inline]
    pub fn control_from_error(&self, active: bool, h: f64, h_dot: f64, e: PlantState) -> f64 {
        if active {
            self.smc.control_with_gain(h, h_dot, e)
        } else {
            0.0
        }
    }

    pub fn surface(&self, e: PlantState, t: f64) -> Result<f64, GeneratorError> {
        let (h, _) = self.gain(t)?;
        Ok(surface_with_gain(h, e))
    }
}

/// What a scenario simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// One double integrator under the sliding-mode controller.
    Smc,
    /// A network of followers with one of the distributed observers.
    Network(ObserverMode),
}

impl Mode {
    pub fn observer_mode(&self) -> Option<ObserverMode> {
        match self {
            Mode::Smc => None,
            Mode::Network(m) => Some(*m),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Smc => f.write_str("smc"),
            Mode::Network(m) => m.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    /// Absent in `Smc` mode.
    pub topology: Option<Topology>,
    pub controller: TrackingController,
    /// Absent in `Smc` mode.
    pub observer: Option<ObserverGains>,
    pub d_bar: Option<f64>,
    /// Consensus-tracking modes only.
    pub leader: Option<LeaderSpec>,
    pub followers: FollowerSpec,
    /// Average-tracking mode only.
    pub references: Option<ReferenceSpec>,
    pub sim: SimConfig,
    /// Convergence threshold override for reports.
    pub threshold: Option<f64>,
}

/// Outcome of checking a scenario before running it.
#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub assumptions: Option<AssumptionReport>,
    pub gains: Option<GainReport>,
    /// Fatal problems that are not assumption or gain violations (for
    /// example a gain report that could not be computed).
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Validation {
    pub fn assumptions_ok(&self) -> bool {
        self.assumptions.as_ref().is_none_or(|a| a.passed())
    }

    pub fn gains_ok(&self) -> bool {
        self.gains.as_ref().is_none_or(|g| g.passed())
    }

    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.assumptions_ok() && self.gains_ok()
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(a) = &self.assumptions {
            write!(f, "{a}")?;
        }
        if let Some(g) = &self.gains {
            let s = &g.spectral;
            writeln!(f, "spectral data:")?;
            if let Some(l1) = s.lambda1_q {
                writeln!(f, "  lambda1(Q) = {l1}")?;
            }
            if let Some(l2) = s.lambda2_l {
                writeln!(f, "  lambda2(L) = {l2}")?;
            }
            if let Some(p) = &s.p {
                let ps: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                writeln!(f, "  p = [{}]", ps.join(", "))?;
            }
            if let Some(pm) = s.p_max {
                writeln!(f, "  p_max = {pm}")?;
            }
            if let Some(d) = g.d_bar {
                writeln!(f, "  d_bar = {d}")?;
            }
            write!(f, "{g}")?;
        }
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

impl Scenario {
    pub fn n(&self) -> usize {
        match &self.topology {
            Some(t) => t.n(),
            None => 1,
        }
    }

    /// `T_b`, or 0 without an observer.
    pub fn observer_time(&self) -> f64 {
        self.observer.as_ref().map_or(0.0, |o| o.convergence_time())
    }

    /// `T_a + T_c`: the instant by which tracking is guaranteed.
    pub fn deadline(&self) -> f64 {
        self.controller.t_c + self.controller.smc.convergence_time()
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            u_max: self.leader.as_ref().map_or(0.0, |l| l.u_max),
            d_max: self.followers.d_max,
            a_max: self.references.as_ref().map_or(0.0, |r| r.a_max),
            d_bar: self.d_bar,
        }
    }

    /// Smallest `rho` the controller needs for this mode.
    pub fn required_rho(&self) -> f64 {
        let b = self.bounds();
        match self.mode {
            Mode::Smc => b.d_max + 1.0,
            Mode::Network(ObserverMode::Dat) => b.d_max + b.a_max + 1.0,
            Mode::Network(_) => b.d_max + b.u_max + 1.0,
        }
    }

    /// Tracking-metric threshold used for the convergence verdict:
    /// `max(0.02, 20 rho dt)` for a single plant, `max(0.05, 20 rho dt)` for
    /// networks, unless overridden.
    pub fn convergence_threshold(&self) -> f64 {
        if let Some(c) = self.threshold {
            return c;
        }
        let band = 20.0 * self.controller.smc.rho * self.sim.dt;
        match self.mode {
            Mode::Smc => band.max(2e-2),
            Mode::Network(_) => band.max(5e-2),
        }
    }

    /// Stage durations that must land on the time grid.
    pub fn event_durations(&self) -> Vec<(&'static str, f64)> {
        let s = &self.controller.smc.schedule;
        let mut out = vec![
            ("t_a1", s.stage1.duration()),
            ("t_a2", s.stage2.duration()),
            ("T_c", self.controller.t_c),
        ];
        if let Some(o) = &self.observer {
            out.push(("t_b1", o.schedule.stage1.duration()));
            out.push(("t_b2", o.schedule.stage2.duration()));
        }
        out
    }

    /// Assumption and gain checks plus advisory warnings.
    pub fn validate(&self) -> Validation {
        let mut v = Validation {
            assumptions: None,
            gains: None,
            errors: Vec::new(),
            warnings: Vec::new(),
        };
        if let Err(e) = self.sim.validate(self.deadline(), &self.event_durations()) {
            v.errors.push(e.to_string());
        }
        if let Some(w) = check_rho(self.controller.smc.rho, self.required_rho()) {
            v.warnings.push(w);
        }
        if let Mode::Network(mode) = self.mode {
            if self.controller.t_c < self.observer_time() {
                v.warnings.push(format!(
                    "T_c = {} is earlier than the observer convergence time T_b = {}",
                    self.controller.t_c,
                    self.observer_time()
                ));
            }
            match (&self.topology, &self.observer) {
                (Some(topo), Some(gains)) => {
                    let a = check_assumptions(topo, mode);
                    if a.passed() {
                        match validate_gains(topo, gains, mode, &self.bounds()) {
                            Ok(g) => v.gains = Some(g),
                            Err(e) => v.errors.push(e.to_string()),
                        }
                    }
                    v.assumptions = Some(a);
                }
                _ => v.errors.push("network scenario needs a topology and observer gains".into()),
            }
        }
        v
    }
}

/// Per-agent `|x_i - x_ref| + |v_i - v_ref|` at every logged instant,
/// `[sample][agent]`. The reference is the leader for consensus tracking,
/// the reference average for average tracking, and the origin for a
/// single plant.
pub fn tracking_metric(log: &TrajectoryLog) -> Vec<Vec<f64>> {
    (0..log.len())
        .map(|k| {
            (0..log.n)
                .map(|i| {
                    (log.x[k][i] - log.x_ref[k]).abs() + (log.v[k][i] - log.v_ref[k]).abs()
                })
                .collect()
        })
        .collect()
}

/// First time the series drops to `threshold` or below, linearly
/// interpolated between samples.
pub fn threshold_crossing_time(times: &[f64], series: &[f64], threshold: f64) -> Option<f64> {
    let first = *series.first()?;
    if first <= threshold {
        return times.first().copied();
    }
    for k in 1..series.len().min(times.len()) {
        let (a, b) = (series[k - 1], series[k]);
        if b <= threshold {
            let frac = if a == b { 1.0 } else { (a - threshold) / (a - b) };
            return Some(times[k - 1] + frac * (times[k] - times[k - 1]));
        }
    }
    None
}
