//! The four reference scenarios.
//!
//! Gains and timing follow the published examples. Where those leave
//! something open the choices are:
//!
//! * Example 2: leader linked to agent 1, followers on a ring of four.
//! * Example 3: directed chain leader -> 1 -> 2 -> 3 -> 4. On this graph the
//!   directed gain condition needs `c2 >= 120.98`, so `c2 = 121`.
//! * Example 4: leaderless ring of four, reference initial states
//!   `r(0) = (1, -1, 2, 0)`, `f(0) = (0.5, -0.5, 1, 0)`.
//! * Leader starts at rest at the origin; follower states are uniform on
//!   `[-10, 10]` from the scenario seed; no disturbances in Examples 2-4.
//! * `dt = 1e-4`, horizon two seconds past the convergence deadline.

use thiserror::Error;

use crate::engine::{Integrator, SimConfig};
use crate::generator::{GeneratorError, Stage, StagedGain};
use crate::observers::ObserverGains;
use crate::scenarios::{
    FollowerSpec, InitialStates, LeaderSpec, Mode, ReferenceSpec, Scenario, TrackingController,
};
use crate::signal::Signal;
use crate::smc::SmcController;
use crate::topology::{ObserverMode, Topology, TopologyError};

pub const EXAMPLE_IDS: [u32; 4] = [1, 2, 3, 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuiltinError {
    #[error("unknown example {0}; expected one of 1, 2, 3, 4")]
    UnknownExample(u32),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

const K: f64 = 2.0;
const DELTA: f64 = 0.01;
const DT: f64 = 1e-4;
const TAIL: f64 = 2.0;

fn schedule(stage: f64) -> Result<StagedGain, GeneratorError> {
    Ok(StagedGain::new(
        Stage::polynomial(stage, K, DELTA)?,
        Stage::polynomial(stage, K, DELTA)?,
    ))
}

fn sim(deadline: f64) -> SimConfig {
    SimConfig {
        dt: DT,
        horizon: deadline + TAIL,
        integrator: Integrator::Euler,
        seed: 0,
        decimation: 100,
    }
}

fn random_followers() -> FollowerSpec {
    FollowerSpec {
        initial: InitialStates::Random { low: -10.0, high: 10.0 },
        disturbances: Vec::new(),
        d_max: 0.0,
    }
}

struct NetworkParams {
    rho: f64,
    b1: f64,
    b2: f64,
    c2: f64,
    t_a: f64,
    t_b: f64,
}

fn network(
    name: &str,
    mode: ObserverMode,
    topology: Topology,
    p: NetworkParams,
) -> Result<Scenario, BuiltinError> {
    let t_c = 2.0 * p.t_b;
    let controller = TrackingController {
        smc: SmcController::new(schedule(p.t_a)?, p.rho),
        t_c,
    };
    let observer = ObserverGains {
        b1: p.b1,
        b2: p.b2,
        c1: p.b1,
        c2: p.c2,
        schedule: schedule(p.t_b)?,
    };
    Ok(Scenario {
        name: name.to_string(),
        mode: Mode::Network(mode),
        topology: Some(topology),
        controller,
        observer: Some(observer),
        d_bar: None,
        leader: None,
        followers: random_followers(),
        references: None,
        sim: sim(t_c + 2.0 * p.t_a),
        threshold: None,
    })
}

pub fn example(id: u32) -> Result<Scenario, BuiltinError> {
    match id {
        1 => {
            let controller = TrackingController {
                smc: SmcController::new(schedule(3.0)?, 2.0),
                t_c: 0.0,
            };
            Ok(Scenario {
                name: "example-1".into(),
                mode: Mode::Smc,
                topology: None,
                controller,
                observer: None,
                d_bar: None,
                leader: None,
                followers: FollowerSpec {
                    initial: InitialStates::Explicit { x: vec![200.0], v: vec![100.0] },
                    disturbances: vec![Signal::sine(0.0, 1.0, 1.0)],
                    d_max: 1.0,
                },
                references: None,
                sim: sim(6.0),
                threshold: None,
            })
        }
        2 => {
            let mut sc = network(
                "example-2",
                ObserverMode::UndirectedCt,
                Topology::ring(4, &[1.0, 0.0, 0.0, 0.0])?,
                NetworkParams { rho: 8.0, b1: 4.0, b2: 1.0, c2: 8.0, t_a: 3.0, t_b: 1.5 },
            )?;
            sc.leader = Some(LeaderSpec {
                x0: 0.0,
                v0: 0.0,
                u0: Signal::sine(1.0, 5.0, 1.0),
                u_max: 6.0,
            });
            Ok(sc)
        }
        3 => {
            let mut sc = network(
                "example-3",
                ObserverMode::DirectedCt,
                Topology::directed_chain(4)?,
                NetworkParams { rho: 21.0, b1: 2.0, b2: 7.0, c2: 121.0, t_a: 2.0, t_b: 1.0 },
            )?;
            sc.leader = Some(LeaderSpec {
                x0: 0.0,
                v0: 0.0,
                u0: Signal::sine(2.0, 18.0, 1.0),
                u_max: 20.0,
            });
            Ok(sc)
        }
        4 => {
            let mut sc = network(
                "example-4",
                ObserverMode::Dat,
                Topology::ring(4, &[0.0; 4])?,
                NetworkParams { rho: 63.0, b1: 0.25, b2: 1.0, c2: 123.0, t_a: 4.0, t_b: 2.0 },
            )?;
            sc.references = Some(ReferenceSpec {
                r0: vec![1.0, -1.0, 2.0, 0.0],
                f0: vec![0.5, -0.5, 1.0, 0.0],
                accelerations: vec![
                    Signal::sine(41.0, 20.0, 5.0),
                    Signal::sine(51.0, 10.0, 5.0),
                    Signal::sine(30.0, 30.0, 5.0),
                    Signal::sine(40.0, 20.0, 5.0),
                ],
                a_max: 61.0,
            });
            Ok(sc)
        }
        other => Err(BuiltinError::UnknownExample(other)),
    }
}
