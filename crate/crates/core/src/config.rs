//! TOML scenario files.
//!
//! Agent ids in files are 1-based. An edge `[i, j]` or `[i, j, w]` means
//! agent `i` receives from agent `j` (weight `w`, default 1); on an
//! undirected graph it links both ways. See `docs/scenario-format.md` for
//! the full schema.

use serde::{Deserialize, Serialize};
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

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("parse error: {0}")]
    ParseUnlocated(String),
    #[error("unsupported schema_version {0}; this build reads version {SCHEMA_VERSION}")]
    Schema(u32),
    #[error("[{section}] {message}")]
    Invalid {
        section: &'static str,
        message: String,
    },
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("could not serialise scenario: {0}")]
    Serialise(String),
}

fn invalid(section: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        section,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Smc,
    UndirectedCt,
    DirectedCt,
    Dat,
}

impl From<Mode> for ModeName {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Smc => ModeName::Smc,
            Mode::Network(ObserverMode::UndirectedCt) => ModeName::UndirectedCt,
            Mode::Network(ObserverMode::DirectedCt) => ModeName::DirectedCt,
            Mode::Network(ObserverMode::Dat) => ModeName::Dat,
        }
    }
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Smc => Mode::Smc,
            ModeName::UndirectedCt => Mode::Network(ObserverMode::UndirectedCt),
            ModeName::DirectedCt => Mode::Network(ObserverMode::DirectedCt),
            ModeName::Dat => Mode::Network(ObserverMode::Dat),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeSpec {
    Weighted(usize, usize, f64),
    Unit(usize, usize),
}

impl EdgeSpec {
    fn parts(&self) -> (usize, usize, f64) {
        match *self {
            EdgeSpec::Weighted(i, j, w) => (i, j, w),
            EdgeSpec::Unit(i, j) => (i, j, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub n: usize,
    #[serde(default)]
    pub directed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeSpec>>,
    /// Row-major `n x n`; alternative to `edges`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader_links: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSection {
    pub duration: f64,
    pub k: f64,
    pub delta: f64,
}

impl StageSection {
    fn build(&self) -> Result<Stage, GeneratorError> {
        Stage::polynomial(self.duration, self.k, self.delta)
    }

    fn from_stage(s: &Stage) -> Self {
        Self {
            duration: s.duration(),
            k: s.params.k,
            delta: s.params.delta,
        }
    }
}

fn schedule(s1: &StageSection, s2: &StageSection) -> Result<StagedGain, GeneratorError> {
    Ok(StagedGain::new(s1.build()?, s2.build()?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub rho: f64,
    #[serde(default)]
    pub t_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_layer: Option<f64>,
    pub stage1: StageSection,
    pub stage2: StageSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    /// Directed mode: overrides the derived disturbance-difference bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_bar: Option<f64>,
    pub stage1: StageSection,
    pub stage2: StageSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeaderSection {
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub v0: f64,
    #[serde(default)]
    pub u0: Signal,
    pub u_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FollowersSection {
    pub initial: InitialStates,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disturbances: Vec<Signal>,
    #[serde(default)]
    pub d_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferencesSection {
    pub r0: Vec<f64>,
    pub f0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub accelerations: Vec<Signal>,
    pub a_max: f64,
}

fn default_dt() -> f64 {
    SimConfig::default().dt
}

fn default_decimation() -> usize {
    SimConfig::default().decimation
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Defaults to two seconds past the convergence deadline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_decimation")]
    pub decimation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            horizon: None,
            integrator: Integrator::Euler,
            seed: 0,
            decimation: default_decimation(),
            threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySection>,
    pub controller: ControllerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observer: Option<ObserverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader: Option<LeaderSection>,
    pub followers: FollowersSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub references: Option<ReferencesSection>,
    #[serde(default)]
    pub sim: SimSection,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

/// Past this slack a declared bound is treated as violated by its signal.
const BOUND_SLACK: f64 = 1e-12;

fn check_bound(section: &'static str, what: &str, s: &Signal, bound: f64) -> Result<(), ConfigError> {
    if s.envelope() > bound + BOUND_SLACK {
        return Err(invalid(
            section,
            format!("{what} can reach {} but the declared bound is {bound}", s.envelope()),
        ));
    }
    Ok(())
}

impl ScenarioFile {
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let file: Self = toml::from_str(src).map_err(|e| match e.span() {
            Some(span) => {
                let (line, column) = line_col(src, span.start);
                ConfigError::Parse {
                    line,
                    column,
                    message: e.message().to_string(),
                }
            }
            None => ConfigError::ParseUnlocated(e.message().to_string()),
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(file.schema_version));
        }
        Ok(file)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Serialise(e.to_string()))
    }

    fn build_topology(&self) -> Result<Option<Topology>, ConfigError> {
        let Some(t) = &self.topology else {
            return Ok(None);
        };
        let links = t.leader_links.clone().unwrap_or_else(|| vec![0.0; t.n]);
        if links.len() != t.n {
            return Err(invalid("topology", format!("leader_links has {} entries, n = {}", links.len(), t.n)));
        }
        let topo = match (&t.edges, &t.adjacency) {
            (Some(_), Some(_)) => {
                return Err(invalid("topology", "give either edges or adjacency, not both"));
            }
            (None, Some(rows)) => {
                if rows.len() != t.n || rows.iter().any(|r| r.len() != t.n) {
                    return Err(invalid("topology", format!("adjacency must be {0} x {0}", t.n)));
                }
                let a = nalgebra::DMatrix::from_fn(t.n, t.n, |i, j| rows[i][j]);
                Topology::new(a, nalgebra::DVector::from_vec(links), t.directed)?
            }
            (edges, None) => {
                let mut zero_based = Vec::new();
                for e in edges.iter().flatten() {
                    let (i, j, w) = e.parts();
                    if i == 0 || j == 0 || i > t.n || j > t.n {
                        return Err(invalid(
                            "topology",
                            format!("edge [{i}, {j}] out of range; agent ids run 1..={}", t.n),
                        ));
                    }
                    zero_based.push((i - 1, j - 1, w));
                }
                Topology::from_edges(t.n, &zero_based, &links, t.directed)?
            }
        };
        Ok(Some(topo))
    }

    /// Builds the runnable scenario. Checks structure and declared bounds;
    /// assumptions and gains are checked by [`Scenario::validate`].
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let mode: Mode = self.mode.into();
        let topology = self.build_topology()?;
        let c = &self.controller;
        let mut smc = SmcController::new(schedule(&c.stage1, &c.stage2)?, c.rho);
        smc.boundary_layer = c.boundary_layer;
        let controller = TrackingController { smc, t_c: c.t_c };

        let observer = match &self.observer {
            Some(o) => Some(ObserverGains {
                b1: o.b1,
                b2: o.b2,
                c1: o.c1,
                c2: o.c2,
                schedule: schedule(&o.stage1, &o.stage2)?,
            }),
            None => None,
        };

        match mode {
            Mode::Smc => {
                if topology.is_some() || observer.is_some() {
                    return Err(invalid("topology", "smc mode takes no topology or observer"));
                }
            }
            Mode::Network(m) => {
                if topology.is_none() {
                    return Err(invalid("topology", format!("{m} mode needs a topology")));
                }
                if observer.is_none() {
                    return Err(invalid("observer", format!("{m} mode needs observer gains")));
                }
                let needs_leader = m != ObserverMode::Dat;
                if needs_leader != self.leader.is_some() {
                    return Err(invalid(
                        "leader",
                        if needs_leader { "consensus tracking needs a leader" } else { "dat mode takes no leader" },
                    ));
                }
                if needs_leader == self.references.is_some() {
                    return Err(invalid(
                        "references",
                        if needs_leader { "only dat mode takes references" } else { "dat mode needs references" },
                    ));
                }
            }
        }

        let leader = self.leader.as_ref().map(|l| LeaderSpec {
            x0: l.x0,
            v0: l.v0,
            u0: l.u0.clone(),
            u_max: l.u_max,
        });
        if let Some(l) = &leader {
            check_bound("leader", "u0", &l.u0, l.u_max)?;
        }
        let f = &self.followers;
        for (i, d) in f.disturbances.iter().enumerate() {
            check_bound("followers", &format!("disturbance {}", i + 1), d, f.d_max)?;
        }
        let references = self.references.as_ref().map(|r| ReferenceSpec {
            r0: r.r0.clone(),
            f0: r.f0.clone(),
            accelerations: r.accelerations.clone(),
            a_max: r.a_max,
        });
        if let Some(r) = &references {
            for (i, a) in r.accelerations.iter().enumerate() {
                check_bound("references", &format!("acceleration {}", i + 1), a, r.a_max)?;
            }
        }

        let d_bar = self.observer.as_ref().and_then(|o| o.d_bar);
        let mut sc = Scenario {
            name: self.name.clone(),
            mode,
            topology,
            controller,
            observer,
            d_bar,
            leader,
            followers: FollowerSpec {
                initial: f.initial.clone(),
                disturbances: f.disturbances.clone(),
                d_max: f.d_max,
            },
            references,
            sim: SimConfig {
                dt: self.sim.dt,
                horizon: 0.0,
                integrator: self.sim.integrator,
                seed: self.sim.seed,
                decimation: self.sim.decimation,
            },
            threshold: self.sim.threshold,
        };
        sc.sim.horizon = self.sim.horizon.unwrap_or(sc.deadline() + 2.0);
        Ok(sc)
    }

    /// File form of a scenario; building the result gives back `sc`.
    pub fn from_scenario(sc: &Scenario) -> Self {
        let topology = sc.topology.as_ref().map(|t| {
            let n = t.n();
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let w = t.weight(i, j);
                    if w != 0.0 && (t.is_directed() || i < j) {
                        edges.push(if w == 1.0 {
                            EdgeSpec::Unit(i + 1, j + 1)
                        } else {
                            EdgeSpec::Weighted(i + 1, j + 1, w)
                        });
                    }
                }
            }
            TopologySection {
                n,
                directed: t.is_directed(),
                edges: Some(edges),
                adjacency: None,
                leader_links: Some(t.leader_links().iter().copied().collect()),
            }
        });
        let smc = &sc.controller.smc;
        let controller = ControllerSection {
            rho: smc.rho,
            t_c: sc.controller.t_c,
            boundary_layer: smc.boundary_layer,
            stage1: StageSection::from_stage(&smc.schedule.stage1),
            stage2: StageSection::from_stage(&smc.schedule.stage2),
        };
        let observer = sc.observer.as_ref().map(|o| ObserverSection {
            b1: o.b1,
            b2: o.b2,
            c1: o.c1,
            c2: o.c2,
            d_bar: sc.d_bar,
            stage1: StageSection::from_stage(&o.schedule.stage1),
            stage2: StageSection::from_stage(&o.schedule.stage2),
        });
        Self {
            schema_version: SCHEMA_VERSION,
            name: sc.name.clone(),
            mode: sc.mode.into(),
            topology,
            controller,
            observer,
            leader: sc.leader.as_ref().map(|l| LeaderSection {
                x0: l.x0,
                v0: l.v0,
                u0: l.u0.clone(),
                u_max: l.u_max,
            }),
            followers: FollowersSection {
                initial: sc.followers.initial.clone(),
                disturbances: sc.followers.disturbances.clone(),
                d_max: sc.followers.d_max,
            },
            references: sc.references.as_ref().map(|r| ReferencesSection {
                r0: r.r0.clone(),
                f0: r.f0.clone(),
                accelerations: r.accelerations.clone(),
                a_max: r.a_max,
            }),
            sim: SimSection {
                dt: sc.sim.dt,
                horizon: Some(sc.sim.horizon),
                integrator: sc.sim.integrator,
                seed: sc.sim.seed,
                decimation: sc.sim.decimation,
                threshold: sc.threshold,
            },
        }
    }
}

/// Parses and builds in one step.
pub fn load_scenario(src: &str) -> Result<Scenario, ConfigError> {
    ScenarioFile::parse(src)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{example, EXAMPLE_IDS};

    const MINIMAL: &str = r#"
schema_version = 1
name = "two-agent"
mode = "undirected_ct"

[topology]
n = 2
edges = [[1, 2]]
leader_links = [1, 0]

[controller]
rho = 8
t_c = 2
stage1 = { duration = 2, k = 2, delta = 0.01 }
stage2 = { duration = 2, k = 2, delta = 0.01 }

[observer]
b1 = 4
b2 = 1
c1 = 4
c2 = 8
stage1 = { duration = 1, k = 2, delta = 0.01 }
stage2 = { duration = 1, k = 2, delta = 0.01 }

[leader]
u0 = { constant = 1, sinusoids = [{ amplitude = 5, omega = 1 }] }
u_max = 6

[followers]
initial = { explicit = { x = [1, -1], v = [0, 0] } }
"#;

    #[test]
    fn builtins_round_trip() {
        for id in EXAMPLE_IDS {
            let sc = example(id).unwrap();
            let text = ScenarioFile::from_scenario(&sc).to_toml().unwrap();
            assert_eq!(load_scenario(&text).unwrap(), sc, "example {id}:\n{text}");
        }
    }

    #[test]
    fn minimal_file() {
        let sc = load_scenario(MINIMAL).unwrap();
        assert_eq!(sc.n(), 2);
        assert_eq!(sc.sim.horizon, 8.0);
        assert_eq!(sc.topology.as_ref().unwrap().weight(1, 0), 1.0);
        assert!(sc.validate().passed());
    }

    #[test]
    fn unknown_field_is_located() {
        let src = MINIMAL.replace("rho = 8", "rho = 8\ngain = 3");
        match ScenarioFile::parse(&src) {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 13),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_version_checked() {
        let src = MINIMAL.replace("schema_version = 1", "schema_version = 9");
        assert_eq!(ScenarioFile::parse(&src), Err(ConfigError::Schema(9)));
    }

    #[test]
    fn declared_bounds_enforced() {
        let src = MINIMAL.replace("u_max = 6", "u_max = 5");
        assert!(matches!(load_scenario(&src), Err(ConfigError::Invalid { section: "leader", .. })));
    }

    #[test]
    fn edge_ids_are_one_based() {
        let src = MINIMAL.replace("edges = [[1, 2]]", "edges = [[0, 1]]");
        assert!(matches!(load_scenario(&src), Err(ConfigError::Invalid { section: "topology", .. })));
    }

    #[test]
    fn weighted_edges_and_adjacency_agree() {
        let a = MINIMAL.replace("edges = [[1, 2]]", "edges = [[1, 2, 2.5]]");
        let b = MINIMAL.replace("edges = [[1, 2]]", "adjacency = [[0, 2.5], [2.5, 0]]");
        assert_eq!(load_scenario(&a).unwrap(), load_scenario(&b).unwrap());
    }

    #[test]
    fn mode_sections_must_match() {
        let src = MINIMAL.replace("mode = \"undirected_ct\"", "mode = \"dat\"");
        assert!(load_scenario(&src).is_err());
    }
}
