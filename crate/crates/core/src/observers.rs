//! Distributed fixed-time observers.
//!
//! * Consensus tracking (undirected or directed graph): follower `i` keeps
//!   `alpha_i, beta_i`, estimates of its position and velocity offset from
//!   the leader, using only neighbour offsets `x_i - x_j` and the neighbours'
//!   estimates. The leader's own estimates are pinned at zero.
//! * Average tracking (leaderless, undirected): `alpha_i, beta_i` estimate
//!   the network average of the reference positions and velocities.
//!
//! Every right-hand side comes in two forms: an allocation-free `*_into`
//! taking the current generator gain `h2` explicitly (used by the
//! integrator), and a convenience form evaluating `h2` from the schedule.

use std::fmt;

use thiserror::Error;

use crate::generator::{GeneratorError, StagedGain};
use crate::smc::sgn;
use crate::topology::{ObserverMode, SpectralData, Topology, TopologyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObserverError {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("average tracking observer requires a leaderless topology")]
    LeaderLinksPresent,
    #[error("initial estimates must satisfy {0}")]
    Initialisation(&'static str),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), ObserverError> {
    if got == expected {
        Ok(())
    } else {
        Err(ObserverError::Dimension {
            what,
            got,
            expected,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGains {
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    pub schedule: StagedGain,
}

impl ObserverGains {
    /// `T_b = t_b1 + t_b2`.
    pub fn convergence_time(&self) -> f64 {
        self.schedule.total_duration()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ObserverState {
    pub fn zeros(n: usize) -> Self {
        Self {
            alpha: vec![0.0; n],
            beta: vec![0.0; n],
        }
    }

    /// Average-tracking initialisation that each agent can do locally:
    /// start from its own reference position and velocity, which makes the
    /// estimate sums equal the reference sums exactly.
    pub fn for_average_tracking(r0: &[f64], f0: &[f64]) -> Result<Self, ObserverError> {
        check_len("f0", f0.len(), r0.len())?;
        Ok(Self {
            alpha: r0.to_vec(),
            beta: f0.to_vec(),
        })
    }

    /// Explicit average-tracking initialisation; the sums must match the
    /// reference sums to within `tol`.
    pub fn for_average_tracking_with(
        alpha: Vec<f64>,
        beta: Vec<f64>,
        r0: &[f64],
        f0: &[f64],
        tol: f64,
    ) -> Result<Self, ObserverError> {
        check_len("alpha", alpha.len(), r0.len())?;
        check_len("beta", beta.len(), f0.len())?;
        if (alpha.iter().sum::<f64>() - r0.iter().sum::<f64>()).abs() > tol {
            return Err(ObserverError::Initialisation("sum(alpha(0)) = sum(r(0))"));
        }
        if (beta.iter().sum::<f64>() - f0.iter().sum::<f64>()).abs() > tol {
            return Err(ObserverError::Initialisation("sum(beta(0)) = sum(f(0))"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }
}

/// Borrowed view of observer estimates.
#[derive(Debug, Clone, Copy)]
pub struct EstimateSlices<'a> {
    pub alpha: &'a [f64],
    pub beta: &'a [f64],
}

impl<'a> From<&'a ObserverState> for EstimateSlices<'a> {
    fn from(s: &'a ObserverState) -> Self {
        Self {
            alpha: &s.alpha,
            beta: &s.beta,
        }
    }
}

/// `sum_j a_ij [(est_i - est_j) - (meas_i - meas_j)]` including the leader
/// term `a_i0 [(est_i - 0) - (meas_i - leader)]`.
#[inline]
fn leader_disagreement(
    topo: &Topology,
    i: usize,
    est: &[f64],
    meas: &[f64],
    leader: f64,
) -> f64 {
    let a = topo.adjacency();
    let mut acc = topo.leader_link(i) * (est[i] - (meas[i] - leader));
    for j in 0..est.len() {
        let w = a[(i, j)];
        if w != 0.0 {
            acc += w * ((est[i] - est[j]) - (meas[i] - meas[j]));
        }
    }
    acc
}

/// Inputs shared by both consensus-tracking observers.
#[derive(Debug, Clone, Copy)]
pub struct TrackingInputs<'a> {
    pub x: &'a [f64],
    pub v: &'a [f64],
    pub x0: f64,
    pub v0: f64,
    pub u: &'a [f64],
}

impl TrackingInputs<'_> {
    fn check(&self, n: usize) -> Result<(), ObserverError> {
        check_len("x", self.x.len(), n)?;
        check_len("v", self.v.len(), n)?;
        check_len("u", self.u.len(), n)
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn consensus_into(
    topo: &Topology,
    lin_alpha: f64,
    sgn_alpha: f64,
    lin_beta: f64,
    sgn_beta: f64,
    obs: EstimateSlices<'_>,
    inp: &TrackingInputs<'_>,
    d_alpha: &mut [f64],
    d_beta: &mut [f64],
) {
    for i in 0..obs.alpha.len() {
        let ea = leader_disagreement(topo, i, obs.alpha, inp.x, inp.x0);
        let eb = leader_disagreement(topo, i, obs.beta, inp.v, inp.v0);
        d_alpha[i] = obs.beta[i] - lin_alpha * ea - sgn_alpha * sgn(ea);
        d_beta[i] = inp.u[i] - lin_beta * eb - sgn_beta * sgn(eb);
    }
}

/// Undirected consensus-tracking observer with the generator gain `h2`
/// supplied directly.
pub fn undirected_ct_into(
    topo: &Topology,
    gains: &ObserverGains,
    h2: f64,
    obs: EstimateSlices<'_>,
    inp: &TrackingInputs<'_>,
    d_alpha: &mut [f64],
    d_beta: &mut [f64],
) {
    consensus_into(
        topo,
        gains.b1 * h2,
        gains.b2,
        gains.c1 * h2,
        gains.c2,
        obs,
        inp,
        d_alpha,
        d_beta,
    );
}

/// Directed consensus-tracking observer with the generator gain `h2`
/// supplied directly. Every coupling gain is scaled by `h2 + 2`.
pub fn directed_ct_into(
    topo: &Topology,
    gains: &ObserverGains,
    h2: f64,
    obs: EstimateSlices<'_>,
    inp: &TrackingInputs<'_>,
    d_alpha: &mut [f64],
    d_beta: &mut [f64],
) {
    let m = h2 + 2.0;
    consensus_into(
        topo,
        2.0 * gains.b1 * m,
        gains.b2 * m,
        2.0 * gains.c1 * m,
        gains.c2 * m,
        obs,
        inp,
        d_alpha,
        d_beta,
    );
}

/// Average-tracking observer with the generator gain `h2` supplied
/// directly. `a_ref` holds each agent's reference acceleration.
pub fn dat_into(
    topo: &Topology,
    gains: &ObserverGains,
    h2: f64,
    obs: EstimateSlices<'_>,
    a_ref: &[f64],
    d_alpha: &mut [f64],
    d_beta: &mut [f64],
) {
    let a = topo.adjacency();
    let n = obs.alpha.len();
    for i in 0..n {
        let (mut lin_a, mut sw_a, mut lin_b, mut sw_b) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..n {
            let w = a[(i, j)];
            if w != 0.0 {
                let da = obs.alpha[i] - obs.alpha[j];
                let db = obs.beta[i] - obs.beta[j];
                lin_a += w * da;
                sw_a += w * sgn(da);
                lin_b += w * db;
                sw_b += w * sgn(db);
            }
        }
        d_alpha[i] = -gains.b1 * h2 * lin_a - gains.b2 * sw_a + obs.beta[i];
        d_beta[i] = -gains.c1 * h2 * lin_b - gains.c2 * sw_b + a_ref[i];
    }
}

fn ct_rhs(
    topo: &Topology,
    gains: &ObserverGains,
    obs: &ObserverState,
    inp: &TrackingInputs<'_>,
    t: f64,
    directed: bool,
) -> Result<ObserverState, ObserverError> {
    let n = topo.n();
    check_len("alpha", obs.alpha.len(), n)?;
    check_len("beta", obs.beta.len(), n)?;
    inp.check(n)?;
    let h2 = gains.schedule.value(t)?;
    let mut out = ObserverState::zeros(n);
    if directed {
        directed_ct_into(topo, gains, h2, obs.into(), inp, &mut out.alpha, &mut out.beta);
    } else {
        undirected_ct_into(topo, gains, h2, obs.into(), inp, &mut out.alpha, &mut out.beta);
    }
    Ok(out)
}

/// `(alpha', beta')` of the undirected consensus-tracking observer.
pub fn undirected_ct_rhs(
    topo: &Topology,
    gains: &ObserverGains,
    obs: &ObserverState,
    inp: &TrackingInputs<'_>,
    t: f64,
) -> Result<ObserverState, ObserverError> {
    ct_rhs(topo, gains, obs, inp, t, false)
}

/// `(alpha', beta')` of the directed consensus-tracking observer.
pub fn directed_ct_rhs(
    topo: &Topology,
    gains: &ObserverGains,
    obs: &ObserverState,
    inp: &TrackingInputs<'_>,
    t: f64,
) -> Result<ObserverState, ObserverError> {
    ct_rhs(topo, gains, obs, inp, t, true)
}

/// `(alpha', beta')` of the average-tracking observer.
pub fn dat_rhs(
    topo: &Topology,
    gains: &ObserverGains,
    obs: &ObserverState,
    a_ref: &[f64],
    t: f64,
) -> Result<ObserverState, ObserverError> {
    if topo.has_leader_links() {
        return Err(ObserverError::LeaderLinksPresent);
    }
    let n = topo.n();
    check_len("alpha", obs.alpha.len(), n)?;
    check_len("beta", obs.beta.len(), n)?;
    check_len("a_ref", a_ref.len(), n)?;
    let h2 = gains.schedule.value(t)?;
    let mut out = ObserverState::zeros(n);
    dat_into(topo, gains, h2, obs.into(), a_ref, &mut out.alpha, &mut out.beta);
    Ok(out)
}

/// What the observer estimates are compared against.
#[derive(Debug, Clone, Copy)]
pub enum GroundTruth<'a> {
    /// Consensus tracking: true offsets `x_i - x0`, `v_i - v0`.
    Leader {
        x: &'a [f64],
        v: &'a [f64],
        x0: f64,
        v0: f64,
    },
    /// Average tracking: the reference averages.
    Average { r_bar: f64, f_bar: f64 },
}

/// Estimation errors `(alpha - truth, beta - truth)` per agent.
pub fn observer_error(obs: &ObserverState, truth: GroundTruth<'_>) -> (Vec<f64>, Vec<f64>) {
    match truth {
        GroundTruth::Leader { x, v, x0, v0 } => (
            obs.alpha.iter().zip(x).map(|(a, xi)| a - (xi - x0)).collect(),
            obs.beta.iter().zip(v).map(|(b, vi)| b - (vi - v0)).collect(),
        ),
        GroundTruth::Average { r_bar, f_bar } => (
            obs.alpha.iter().map(|a| a - r_bar).collect(),
            obs.beta.iter().map(|b| b - f_bar).collect(),
        ),
    }
}

/// Declared signal bounds the gain conditions are checked against.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bounds {
    /// Bound on the leader input.
    pub u_max: f64,
    /// Bound on each follower disturbance.
    pub d_max: f64,
    /// Bound on each reference acceleration.
    pub a_max: f64,
    /// Bound on the neighbourhood disturbance mismatch used by the directed
    /// observer. `None` uses `max in-degree * 2 * d_max`.
    pub d_bar: Option<f64>,
}

impl Bounds {
    pub fn effective_d_bar(&self, topo: &Topology) -> f64 {
        self.d_bar
            .unwrap_or_else(|| topo.max_in_degree() * 2.0 * self.d_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub gain: &'static str,
    pub rule: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub strict: bool,
    pub passed: bool,
}

impl Inequality {
    fn new(gain: &'static str, rule: &'static str, value: f64, threshold: f64, strict: bool) -> Self {
        let passed = if strict {
            value > threshold
        } else {
            value >= threshold
        };
        Self {
            gain,
            rule,
            value,
            threshold,
            strict,
            passed,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.strict { ">" } else { ">=" };
        let tag = if self.passed { "ok  " } else { "FAIL" };
        write!(
            f,
            "[{tag}] {} = {} {op} {} ({})",
            self.gain, self.value, self.threshold, self.rule
        )
    }
}

/// Smallest admissible gains. For strict inequalities the value is the
/// infimum, so any larger number is admissible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalGains {
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c2_strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub mode: ObserverMode,
    pub spectral: SpectralData,
    pub d_bar: Option<f64>,
    pub checks: Vec<Inequality>,
    pub minimal: MinimalGains,
}

impl GainReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Inequality> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for GainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "observer gain conditions ({}):", self.mode)?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        let m = &self.minimal;
        writeln!(
            f,
            "  minimal admissible: b1 = c1 = {}, b2 = {}, c2 {} {}",
            m.b1,
            m.b2,
            if m.c2_strict { ">" } else { ">=" },
            m.c2
        )
    }
}

/// Checks the observer gains against the sufficient conditions for `mode`.
pub fn validate_gains(
    topo: &Topology,
    gains: &ObserverGains,
    mode: ObserverMode,
    bounds: &Bounds,
) -> Result<GainReport, TopologyError> {
    let spectral = SpectralData::compute(topo, mode)?;
    let (b1_min, b2_min, c2_min, c2_strict, rules, d_bar) = match mode {
        ObserverMode::UndirectedCt => {
            let l1 = spectral.lambda1_q.expect("undirected spectral data has lambda1");
            (
                1.0 / (2.0 * l1),
                1.0,
                bounds.u_max + bounds.d_max,
                true,
                ["1/(2 lambda1(Q))", "1", "u_max + d_max"],
                None,
            )
        }
        ObserverMode::DirectedCt => {
            let l1 = spectral.lambda1_q.expect("directed spectral data has lambda1");
            let pm = spectral.p_max.expect("directed spectral data has p_max");
            let d_bar = bounds.effective_d_bar(topo);
            (
                pm / (4.0 * l1),
                pm / l1,
                pm * (d_bar + bounds.u_max) / l1,
                false,
                [
                    "p_max/(4 lambda1(Q))",
                    "p_max/lambda1(Q)",
                    "p_max (d_bar + u_max)/lambda1(Q)",
                ],
                Some(d_bar),
            )
        }
        ObserverMode::Dat => {
            let l2 = spectral.lambda2_l.expect("dat spectral data has lambda2");
            (
                1.0 / (2.0 * l2),
                1.0,
                2.0 * bounds.a_max,
                true,
                ["1/(2 lambda2(L))", "1", "2 a_max"],
                None,
            )
        }
    };
    let checks = vec![
        Inequality::new("b1", rules[0], gains.b1, b1_min, false),
        Inequality::new("c1", rules[0], gains.c1, b1_min, false),
        Inequality::new("b2", rules[1], gains.b2, b2_min, false),
        Inequality::new("c2", rules[2], gains.c2, c2_min, c2_strict),
    ];
    Ok(GainReport {
        mode,
        spectral,
        d_bar,
        checks,
        minimal: MinimalGains {
            b1: b1_min,
            b2: b2_min,
            c1: b1_min,
            c2: c2_min,
            c2_strict,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::Stage;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn gains(b1: f64, b2: f64, c1: f64, c2: f64) -> ObserverGains {
        ObserverGains {
            b1,
            b2,
            c1,
            c2,
            schedule: StagedGain::new(
                Stage::polynomial(1.5, 2.0, 0.01).unwrap(),
                Stage::polynomial(1.5, 2.0, 0.01).unwrap(),
            ),
        }
    }

    fn single() -> Topology {
        Topology::new(DMatrix::zeros(1, 1), DVector::from_element(1, 1.0), false).unwrap()
    }

    #[test]
    fn undirected_single_follower_plug_in() {
        let topo = single();
        let obs = ObserverState {
            alpha: vec![2.0],
            beta: vec![0.0],
        };
        let inp = TrackingInputs {
            x: &[1.0],
            v: &[0.0],
            x0: 0.0,
            v0: 0.0,
            u: &[0.0],
        };
        let (mut da, mut db) = ([0.0], [0.0]);
        undirected_ct_into(&topo, &gains(1.0, 1.0, 1.0, 1.0), 1.0, (&obs).into(), &inp, &mut da, &mut db);
        assert_eq!(da[0], -2.0);
        assert_eq!(db[0], 0.0);
    }

    #[test]
    fn consistent_state_is_equilibrium_of_error_dynamics() {
        let topo = Topology::ring(4, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        let x = [1.0, -2.0, 3.5, 0.25];
        // Dyadic values keep every difference exact, so sgn sees true zeros.
        let v = [0.5, 0.125, -1.0, 2.0];
        let (x0, v0) = (0.75, -0.25);
        let obs = ObserverState {
            alpha: x.iter().map(|xi| xi - x0).collect(),
            beta: v.iter().map(|vi| vi - v0).collect(),
        };
        let u = [0.3, -0.4, 1.0, 2.0];
        let inp = TrackingInputs { x: &x, v: &v, x0, v0, u: &u };
        let g = gains(4.0, 1.0, 4.0, 8.0);
        for t in [0.0, 0.75, 2.0, 5.0] {
            for d in [
                undirected_ct_rhs(&topo, &g, &obs, &inp, t).unwrap(),
                directed_ct_rhs(&topo, &g, &obs, &inp, t).unwrap(),
            ] {
                for (i, ui) in u.iter().enumerate() {
                    assert_relative_eq!(d.alpha[i], obs.beta[i], epsilon = 1e-14);
                    assert_relative_eq!(d.beta[i], ui, epsilon = 1e-14);
                }
            }
        }
        let zero = ObserverState::zeros(4);
        let inp0 = TrackingInputs { x: &[0.0; 4], v: &[0.0; 4], x0: 0.0, v0: 0.0, u: &[0.0; 4] };
        let d = undirected_ct_rhs(&topo, &g, &zero, &inp0, 0.7).unwrap();
        assert_eq!(d, zero);
    }

    #[test]
    fn directed_chain_plug_in() {
        let topo = Topology::directed_chain(2).unwrap();
        // Node 0 hears the leader only: disagreement = alpha_0 - (x_0 - x0) = 1.
        let obs = ObserverState {
            alpha: vec![1.0, 0.0],
            beta: vec![0.0, 0.0],
        };
        let inp = TrackingInputs {
            x: &[0.0, 0.0],
            v: &[0.0, 0.0],
            x0: 0.0,
            v0: 0.0,
            u: &[0.0, 0.0],
        };
        let g = gains(1.0, 1.0, 1.0, 1.0);
        let (mut da, mut db) = ([0.0; 2], [0.0; 2]);
        directed_ct_into(&topo, &g, 0.0, (&obs).into(), &inp, &mut da, &mut db);
        assert_eq!(da[0], -6.0);
        // After the schedule ends the gains are the constants 4 b1 and 2 b2.
        let d = directed_ct_rhs(&topo, &g, &obs, &inp, 10.0).unwrap();
        assert_eq!(d.alpha[0], -4.0 * 1.0 - 2.0 * 1.0);
        // Node 1 sees node 0: (0 - 1) - 0 = -1
        assert_eq!(d.alpha[1], 4.0 + 2.0);
    }

    #[test]
    fn dat_plug_in_and_antisymmetry() {
        let topo = Topology::from_edges(2, &[(0, 1, 1.0)], &[0.0, 0.0], false).unwrap();
        let g = gains(1.0, 1.0, 1.0, 1.0);
        let obs = ObserverState {
            alpha: vec![1.0, 3.0],
            beta: vec![0.0, 0.0],
        };
        let (mut da, mut db) = ([0.0; 2], [0.0; 2]);
        dat_into(&topo, &g, 1.0, (&obs).into(), &[0.0, 0.0], &mut da, &mut db);
        assert_eq!(da, [3.0, -3.0]);
        assert_eq!(da.iter().sum::<f64>(), 0.0);

        let cons = ObserverState {
            alpha: vec![2.0, 2.0],
            beta: vec![-1.0, -1.0],
        };
        let d = dat_rhs(&topo, &g, &cons, &[5.0, 7.0], 0.4).unwrap();
        assert_eq!(d.alpha, vec![-1.0, -1.0]);
        assert_eq!(d.beta, vec![5.0, 7.0]);

        let z = dat_rhs(&topo, &g, &ObserverState::zeros(2), &[0.0, 0.0], 0.4).unwrap();
        assert_eq!(z, ObserverState::zeros(2));
    }

    #[test]
    fn dat_rejects_leader_and_bad_dims() {
        let g = gains(1.0, 1.0, 1.0, 1.0);
        assert_eq!(
            dat_rhs(&single(), &g, &ObserverState::zeros(1), &[0.0], 0.0),
            Err(ObserverError::LeaderLinksPresent)
        );
        let topo = Topology::ring(3, &[1.0, 0.0, 0.0]).unwrap();
        let inp = TrackingInputs { x: &[0.0; 2], v: &[0.0; 3], x0: 0.0, v0: 0.0, u: &[0.0; 3] };
        assert!(matches!(
            undirected_ct_rhs(&topo, &g, &ObserverState::zeros(3), &inp, 0.0),
            Err(ObserverError::Dimension { what: "x", .. })
        ));
    }

    #[test]
    fn dat_initialisation() {
        let s = ObserverState::for_average_tracking(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(s.alpha, vec![1.0, 2.0]);
        assert!(ObserverState::for_average_tracking_with(
            vec![0.0, 3.0],
            vec![7.0, 0.0],
            &[1.0, 2.0],
            &[3.0, 4.0],
            1e-12
        )
        .is_ok());
        assert!(ObserverState::for_average_tracking_with(
            vec![0.0, 0.0],
            vec![7.0, 0.0],
            &[1.0, 2.0],
            &[3.0, 4.0],
            1e-12
        )
        .is_err());
    }

    #[test]
    fn validate_single_follower() {
        let bounds = Bounds { u_max: 6.0, ..Default::default() };
        let r = validate_gains(&single(), &gains(4.0, 1.0, 4.0, 8.0), ObserverMode::UndirectedCt, &bounds)
            .unwrap();
        assert!(r.passed());
        assert_relative_eq!(r.minimal.b1, 0.5);
        assert_eq!(r.minimal.b2, 1.0);
        assert_eq!(r.minimal.c2, 6.0);
        assert!(r.minimal.c2_strict);
        let r = validate_gains(&single(), &gains(4.0, 1.0, 4.0, 6.0), ObserverMode::UndirectedCt, &bounds)
            .unwrap();
        assert!(!r.passed());
        let r = validate_gains(&single(), &gains(4.0, 0.5, 4.0, 8.0), ObserverMode::UndirectedCt, &bounds)
            .unwrap();
        assert_eq!(r.failures().next().unwrap().gain, "b2");
    }

    #[test]
    fn validate_directed_chain() {
        let topo = Topology::directed_chain(2).unwrap();
        let bounds = Bounds { u_max: 1.0, ..Default::default() };
        let r = validate_gains(&topo, &gains(1.0, 3.0, 1.0, 10.0), ObserverMode::DirectedCt, &bounds)
            .unwrap();
        let l1 = (3.0 - 2f64.sqrt()) / 2.0;
        assert_relative_eq!(r.minimal.b1, 2.0 / (4.0 * l1), epsilon = 1e-10);
        assert_relative_eq!(r.minimal.b1, 0.6306, epsilon = 1e-4);
        assert_relative_eq!(r.minimal.b2, 2.522, epsilon = 1e-3);
        assert_eq!(r.d_bar, Some(0.0));
        assert!(r.passed());
        let low = validate_gains(&topo, &gains(1.0, 3.0, 1.0, 2.0), ObserverMode::DirectedCt, &bounds)
            .unwrap();
        let f = low.failures().next().unwrap();
        assert_eq!(f.gain, "c2");
        assert_relative_eq!(f.threshold, 2.0 / l1, epsilon = 1e-10);
    }

    #[test]
    fn validate_dat_pair() {
        let topo = Topology::from_edges(2, &[(0, 1, 1.0)], &[0.0, 0.0], false).unwrap();
        let bounds = Bounds { a_max: 1.0, ..Default::default() };
        let r = validate_gains(&topo, &gains(0.25, 1.0, 0.25, 2.5), ObserverMode::Dat, &bounds).unwrap();
        assert_relative_eq!(r.minimal.b1, 0.25, epsilon = 1e-12);
        assert_eq!(r.minimal.c2, 2.0);
        assert!(r.passed());
    }

    #[test]
    fn d_bar_default_is_conservative() {
        let topo = Topology::directed_chain(3).unwrap();
        let b = Bounds { d_max: 0.5, ..Default::default() };
        assert_eq!(b.effective_d_bar(&topo), 1.0);
        let b = Bounds { d_max: 0.5, d_bar: Some(0.1), ..Default::default() };
        assert_eq!(b.effective_d_bar(&topo), 0.1);
    }

    #[test]
    fn errors_against_truth() {
        let obs = ObserverState { alpha: vec![0.0, 1.5], beta: vec![0.0, 0.0] };
        let (ea, eb) = observer_error(
            &obs,
            GroundTruth::Leader { x: &[1.0, 1.5], v: &[0.0, 0.0], x0: 0.0, v0: 0.0 },
        );
        assert_eq!(ea, vec![-1.0, 0.0]);
        assert_eq!(eb, vec![0.0, 0.0]);
        let (ea, _) = observer_error(&obs, GroundTruth::Average { r_bar: 1.0, f_bar: 0.0 });
        assert_eq!(ea, vec![-1.0, 0.5]);
    }
}
