use super::{integrate_with, LyapunovWeights, OdeSystem, SimError};
use crate::observers::{
    dat_into, directed_ct_into, undirected_ct_into, EstimateSlices, ObserverGains,
    ObserverState, TrackingInputs,
};
use crate::scenarios::{Mode, Scenario};
use crate::smc::{surface_with_gain, PlantState};
use crate::topology::{ObserverMode, SpectralData, Topology};

/// Decimated record of one scenario run. Per-agent series are indexed
/// `[sample][agent]`; every series shares the grid `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub name: String,
    pub mode: Mode,
    pub n: usize,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    /// `alpha_i` minus what it estimates (`x_i - x0`, or the reference
    /// average).
    pub alpha_err: Vec<Vec<f64>>,
    pub beta_err: Vec<Vec<f64>>,
    /// Sliding variable of each agent's tracking controller.
    pub s: Vec<Vec<f64>>,
    /// What the agents track: the leader, the reference average, or the
    /// origin for a single plant.
    pub x_ref: Vec<f64>,
    pub v_ref: Vec<f64>,
    /// `max_i |x_i - x_ref| + |v_i - v_ref|`.
    pub metric: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// Average tracking only: the largest `|sum(alpha) - sum(r)|` or
    /// `|sum(beta) - sum(f)|` seen at any integration step.
    pub conservation_drift: Option<f64>,
    pub weights: LyapunovWeights,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Index of the sample closest to `t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        if self.t.is_empty() {
            return None;
        }
        let k = self.t.partition_point(|&s| s < t);
        let k = match k {
            0 => 0,
            k if k >= self.t.len() => self.t.len() - 1,
            k if (self.t[k] - t).abs() < (t - self.t[k - 1]).abs() => k,
            k => k - 1,
        };
        Some(k)
    }

    pub fn max_abs(series: &[f64]) -> f64 {
        series.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_count(what: &str, got: usize, n: usize, allow_shared: bool) -> Result<(), SimError> {
    let ok = got == n || (allow_shared && got <= 1);
    if ok {
        Ok(())
    } else {
        Err(SimError::Scenario(format!(
            "{what} has {got} entries, expected {}{n}",
            if allow_shared { "0, 1 or " } else { "" }
        )))
    }
}

struct Sample {
    u: Vec<f64>,
    alpha_err: Vec<f64>,
    beta_err: Vec<f64>,
    s: Vec<f64>,
    x_ref: f64,
    v_ref: f64,
    h1: f64,
    h2: f64,
}

/// State layout `[x, v, alpha, beta, x0, v0]` for consensus tracking and
/// `[x, v, alpha, beta, r, f]` for average tracking.
struct NetworkSystem<'a> {
    sc: &'a Scenario,
    topo: &'a Topology,
    gains: &'a ObserverGains,
    mode: ObserverMode,
    n: usize,
    u: Vec<f64>,
    a_ref: Vec<f64>,
}

impl NetworkSystem<'_> {
    fn refs(&self) -> usize {
        match self.mode {
            ObserverMode::Dat => 2 * self.n,
            _ => 2,
        }
    }

    fn tracking_error(&self, y: &[f64], i: usize) -> PlantState {
        let n = self.n;
        let (x, v, a, b) = (y[i], y[n + i], y[2 * n + i], y[3 * n + i]);
        match self.mode {
            ObserverMode::Dat => PlantState::new(x - a, v - b),
            _ => PlantState::new(a, b),
        }
    }

    fn controls(&mut self, t: f64, y: &[f64]) -> Result<(f64, f64), SimError> {
        let ctl = &self.sc.controller;
        let (h1, h1_dot) = ctl.gain(t)?;
        let active = ctl.is_active(t);
        for i in 0..self.n {
            let e = self.tracking_error(y, i);
            self.u[i] = ctl.control_from_error(active, h1, h1_dot, e);
        }
        Ok((h1, h1_dot))
    }

    fn sample(&mut self, t: f64, y: &[f64]) -> Result<Sample, SimError> {
        let n = self.n;
        let (h1, _) = self.controls(t, y)?;
        let h2 = self.gains.schedule.value(t)?;
        let (x_ref, v_ref) = match self.mode {
            ObserverMode::Dat => {
                let r = &y[4 * n..5 * n];
                let f = &y[5 * n..6 * n];
                (mean(r), mean(f))
            }
            _ => (y[4 * n], y[4 * n + 1]),
        };
        let mut alpha_err = vec![0.0; n];
        let mut beta_err = vec![0.0; n];
        let mut s = vec![0.0; n];
        for i in 0..n {
            let (x, v, a, b) = (y[i], y[n + i], y[2 * n + i], y[3 * n + i]);
            match self.mode {
                ObserverMode::Dat => {
                    alpha_err[i] = a - x_ref;
                    beta_err[i] = b - v_ref;
                }
                _ => {
                    alpha_err[i] = a - (x - x_ref);
                    beta_err[i] = b - (v - v_ref);
                }
            }
            s[i] = surface_with_gain(h1, self.tracking_error(y, i));
        }
        Ok(Sample {
            u: self.u.clone(),
            alpha_err,
            beta_err,
            s,
            x_ref,
            v_ref,
            h1,
            h2,
        })
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

impl OdeSystem for NetworkSystem<'_> {
    fn dim(&self) -> usize {
        4 * self.n + self.refs()
    }

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), SimError> {
        let n = self.n;
        self.controls(t, y)?;
        let h2 = self.gains.schedule.value(t)?;

        let (x, rest) = y.split_at(n);
        let (v, rest) = rest.split_at(n);
        let (alpha, rest) = rest.split_at(n);
        let (beta, refs) = rest.split_at(n);
        let (dx, drest) = dy.split_at_mut(n);
        let (dv, drest) = drest.split_at_mut(n);
        let (d_alpha, drest) = drest.split_at_mut(n);
        let (d_beta, d_refs) = drest.split_at_mut(n);

        let followers = &self.sc.followers;
        for i in 0..n {
            dx[i] = v[i];
            dv[i] = self.u[i] + followers.disturbance_at(i, t);
        }
        let obs = EstimateSlices { alpha, beta };
        match self.mode {
            ObserverMode::Dat => {
                let spec = self.sc.references.as_ref().expect("checked in simulate");
                for i in 0..n {
                    self.a_ref[i] = spec.acceleration(i, t);
                }
                dat_into(self.topo, self.gains, h2, obs, &self.a_ref, d_alpha, d_beta);
                let (dr, df) = d_refs.split_at_mut(n);
                dr.copy_from_slice(&refs[n..2 * n]);
                df.copy_from_slice(&self.a_ref);
            }
            mode => {
                let leader = self.sc.leader.as_ref().expect("checked in simulate");
                let inp = TrackingInputs {
                    x,
                    v,
                    x0: refs[0],
                    v0: refs[1],
                    u: &self.u,
                };
                if mode == ObserverMode::DirectedCt {
                    directed_ct_into(self.topo, self.gains, h2, obs, &inp, d_alpha, d_beta);
                } else {
                    undirected_ct_into(self.topo, self.gains, h2, obs, &inp, d_alpha, d_beta);
                }
                d_refs[0] = refs[1];
                d_refs[1] = leader.u0.eval(t);
            }
        }
        Ok(())
    }
}

/// State layout `[z1, z2]`.
struct PlantSystem<'a> {
    sc: &'a Scenario,
}

impl PlantSystem<'_> {
    fn control(&self, t: f64, y: &[f64]) -> Result<(f64, f64), SimError> {
        let ctl = &self.sc.controller;
        let (h1, h1_dot) = ctl.gain(t)?;
        let u = ctl.control_from_error(ctl.is_active(t), h1, h1_dot, PlantState::new(y[0], y[1]));
        Ok((u, h1))
    }
}

impl OdeSystem for PlantSystem<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), SimError> {
        let (u, _) = self.control(t, y)?;
        dy[0] = y[1];
        dy[1] = u + self.sc.followers.disturbance_at(0, t);
        Ok(())
    }
}

fn empty_log(sc: &Scenario, n: usize, weights: LyapunovWeights) -> TrajectoryLog {
    TrajectoryLog {
        name: sc.name.clone(),
        mode: sc.mode,
        n,
        t: Vec::new(),
        x: Vec::new(),
        v: Vec::new(),
        u: Vec::new(),
        alpha: Vec::new(),
        beta: Vec::new(),
        alpha_err: Vec::new(),
        beta_err: Vec::new(),
        s: Vec::new(),
        x_ref: Vec::new(),
        v_ref: Vec::new(),
        metric: Vec::new(),
        h1: Vec::new(),
        h2: Vec::new(),
        conservation_drift: None,
        weights,
    }
}

fn push_metric(log: &mut TrajectoryLog) {
    let k = log.t.len() - 1;
    let m = (0..log.n)
        .map(|i| (log.x[k][i] - log.x_ref[k]).abs() + (log.v[k][i] - log.v_ref[k]).abs())
        .fold(0.0, f64::max);
    log.metric.push(m);
}

fn simulate_plant(sc: &Scenario) -> Result<TrajectoryLog, SimError> {
    let (x, v) = sc.followers.initial.resolve(1, sc.sim.seed);
    check_count("initial x", x.len(), 1, false)?;
    check_count("initial v", v.len(), 1, false)?;
    check_count("disturbances", sc.followers.disturbances.len(), 1, true)?;
    let mut sys = PlantSystem { sc };
    let tr = integrate_with(&mut sys, &[x[0], v[0]], &sc.sim, |_, _| {})?;

    let mut log = empty_log(sc, 1, LyapunovWeights::default());
    for (t, y) in tr.t.iter().zip(&tr.y) {
        let (u, h1) = sys.control(*t, y)?;
        log.t.push(*t);
        log.x.push(vec![y[0]]);
        log.v.push(vec![y[1]]);
        log.u.push(vec![u]);
        log.alpha.push(vec![0.0]);
        log.beta.push(vec![0.0]);
        log.alpha_err.push(vec![0.0]);
        log.beta_err.push(vec![0.0]);
        log.s.push(vec![surface_with_gain(h1, PlantState::new(y[0], y[1]))]);
        log.x_ref.push(0.0);
        log.v_ref.push(0.0);
        log.h1.push(h1);
        log.h2.push(0.0);
        push_metric(&mut log);
    }
    Ok(log)
}

fn weights_for(topo: &Topology, gains: &ObserverGains, mode: ObserverMode) -> LyapunovWeights {
    let spectral = SpectralData::compute(topo, mode).ok();
    let grounded = match mode {
        ObserverMode::UndirectedCt => spectral.as_ref().map(|s| s.q.clone()),
        _ => None,
    };
    let (h, p) = match spectral.as_ref() {
        Some(s) if mode == ObserverMode::DirectedCt => (s.h.clone(), s.p.clone()),
        _ => (None, None),
    };
    LyapunovWeights {
        grounded,
        laplacian: (mode == ObserverMode::Dat).then(|| crate::topology::laplacian(topo)),
        h,
        p,
        c1: gains.c1,
        c2: gains.c2,
    }
}

fn simulate_network(sc: &Scenario, mode: ObserverMode) -> Result<TrajectoryLog, SimError> {
    let topo = sc
        .topology
        .as_ref()
        .ok_or_else(|| SimError::Scenario("network mode needs a topology".into()))?;
    let gains = sc
        .observer
        .as_ref()
        .ok_or_else(|| SimError::Scenario("network mode needs observer gains".into()))?;
    let n = topo.n();
    let (x, v) = sc.followers.initial.resolve(n, sc.sim.seed);
    check_count("initial x", x.len(), n, false)?;
    check_count("initial v", v.len(), n, false)?;
    check_count("disturbances", sc.followers.disturbances.len(), n, true)?;

    let mut y0 = Vec::with_capacity(6 * n);
    y0.extend_from_slice(&x);
    y0.extend_from_slice(&v);
    match mode {
        ObserverMode::Dat => {
            let refs = sc
                .references
                .as_ref()
                .ok_or_else(|| SimError::Scenario("average tracking needs references".into()))?;
            check_count("r0", refs.r0.len(), n, false)?;
            check_count("f0", refs.f0.len(), n, false)?;
            check_count("accelerations", refs.accelerations.len(), n, true)?;
            let obs = ObserverState::for_average_tracking(&refs.r0, &refs.f0)
                .map_err(|e| SimError::Scenario(e.to_string()))?;
            y0.extend_from_slice(&obs.alpha);
            y0.extend_from_slice(&obs.beta);
            y0.extend_from_slice(&refs.r0);
            y0.extend_from_slice(&refs.f0);
        }
        _ => {
            let leader = sc
                .leader
                .as_ref()
                .ok_or_else(|| SimError::Scenario("consensus tracking needs a leader".into()))?;
            y0.extend(std::iter::repeat_n(0.0, 2 * n));
            y0.push(leader.x0);
            y0.push(leader.v0);
        }
    }

    let mut sys = NetworkSystem {
        sc,
        topo,
        gains,
        mode,
        n,
        u: vec![0.0; n],
        a_ref: vec![0.0; n],
    };
    let mut drift: f64 = 0.0;
    let dat = mode == ObserverMode::Dat;
    let tr = integrate_with(&mut sys, &y0, &sc.sim, |_, y| {
        if dat {
            let sum = |s: &[f64]| s.iter().sum::<f64>();
            let da = sum(&y[2 * n..3 * n]) - sum(&y[4 * n..5 * n]);
            let db = sum(&y[3 * n..4 * n]) - sum(&y[5 * n..6 * n]);
            drift = drift.max(da.abs()).max(db.abs());
        }
    })?;

    let mut log = empty_log(sc, n, weights_for(topo, gains, mode));
    log.conservation_drift = dat.then_some(drift);
    for (t, y) in tr.t.iter().zip(&tr.y) {
        let smp = sys.sample(*t, y)?;
        log.t.push(*t);
        log.x.push(y[..n].to_vec());
        log.v.push(y[n..2 * n].to_vec());
        log.alpha.push(y[2 * n..3 * n].to_vec());
        log.beta.push(y[3 * n..4 * n].to_vec());
        log.u.push(smp.u);
        log.alpha_err.push(smp.alpha_err);
        log.beta_err.push(smp.beta_err);
        log.s.push(smp.s);
        log.x_ref.push(smp.x_ref);
        log.v_ref.push(smp.v_ref);
        log.h1.push(smp.h1);
        log.h2.push(smp.h2);
        push_metric(&mut log);
    }
    Ok(log)
}

/// Runs a scenario over `[0, sim.horizon]`. Does not check assumptions or
/// gains; see [`Scenario::validate`].
pub fn simulate(sc: &Scenario) -> Result<TrajectoryLog, SimError> {
    match sc.mode {
        Mode::Smc => simulate_plant(sc),
        Mode::Network(m) => simulate_network(sc, m),
    }
}
