//! Communication graphs and the spectral quantities the gain conditions use.
//!
//! Followers are indexed `0..n`. `adjacency[(i, j)] = a_ij > 0` means
//! follower `i` receives information from follower `j`; `leader_links[i] =
//! a_i0 > 0` means follower `i` hears the leader.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("adjacency must be {n}x{n}, got {rows}x{cols}")]
    Shape { n: usize, rows: usize, cols: usize },
    #[error("leader link vector must have length {n}, got {len}")]
    LeaderLinks { n: usize, len: usize },
    #[error("weight a[{i}][{j}] = {w} must be finite and nonnegative")]
    InvalidWeight { i: usize, j: usize, w: f64 },
    #[error("self loop at agent {0} (a_ii must be 0)")]
    SelfLoop(usize),
    #[error("undirected topology has asymmetric weights a[{i}][{j}] != a[{j}][{i}]")]
    Asymmetric { i: usize, j: usize },
    #[error("edge ({i}, {j}) refers to an agent outside 0..{n}")]
    EdgeOutOfRange { i: usize, j: usize, n: usize },
    #[error("operation requires an undirected topology")]
    RequiresUndirected,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is empty")]
    Empty,
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("H = L + B is singular (no spanning tree rooted at the leader)")]
    SingularH,
    #[error("weight vector p has nonpositive entry p[{index}] = {value}")]
    NonPositiveP { index: usize, value: f64 },
}

/// Which observer a topology is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverMode {
    /// Consensus tracking over an undirected follower graph.
    UndirectedCt,
    /// Consensus tracking over a directed graph rooted at the leader.
    DirectedCt,
    /// Leaderless distributed average tracking.
    Dat,
}

impl fmt::Display for ObserverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObserverMode::UndirectedCt => "undirected_ct",
            ObserverMode::DirectedCt => "directed_ct",
            ObserverMode::Dat => "dat",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    adjacency: DMatrix<f64>,
    leader_links: DVector<f64>,
    directed: bool,
}

impl Topology {
    pub fn new(
        adjacency: DMatrix<f64>,
        leader_links: DVector<f64>,
        directed: bool,
    ) -> Result<Self, TopologyError> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(TopologyError::Shape {
                n,
                rows: adjacency.nrows(),
                cols: adjacency.ncols(),
            });
        }
        if leader_links.len() != n {
            return Err(TopologyError::LeaderLinks {
                n,
                len: leader_links.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let w = adjacency[(i, j)];
                if !(w.is_finite() && w >= 0.0) {
                    return Err(TopologyError::InvalidWeight { i, j, w });
                }
                if i == j && w != 0.0 {
                    return Err(TopologyError::SelfLoop(i));
                }
                if !directed && w != adjacency[(j, i)] {
                    return Err(TopologyError::Asymmetric { i, j });
                }
            }
            let w = leader_links[i];
            if !(w.is_finite() && w >= 0.0) {
                // Column n stands for the leader in error messages.
                return Err(TopologyError::InvalidWeight { i, j: n, w });
            }
        }
        Ok(Self {
            adjacency,
            leader_links,
            directed,
        })
    }

    /// Builds a topology from weighted edges `(i, j, w)`. For undirected
    /// graphs each edge sets both `a_ij` and `a_ji`; for directed graphs it
    /// sets `a_ij` only (i receives from j).
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, f64)],
        leader_links: &[f64],
        directed: bool,
    ) -> Result<Self, TopologyError> {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(TopologyError::EdgeOutOfRange { i, j, n });
            }
            if i == j {
                return Err(TopologyError::SelfLoop(i));
            }
            a[(i, j)] = w;
            if !directed {
                a[(j, i)] = w;
            }
        }
        Self::new(a, DVector::from_column_slice(leader_links), directed)
    }

    /// Undirected cycle `0-1-...-(n-1)-0` with unit weights.
    pub fn ring(n: usize, leader_links: &[f64]) -> Result<Self, TopologyError> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Self::from_edges(n, &edges, leader_links, false)
    }

    /// Undirected path `0-1-...-(n-1)` with unit weights.
    pub fn path(n: usize, leader_links: &[f64]) -> Result<Self, TopologyError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        Self::from_edges(n, &edges, leader_links, false)
    }

    /// Directed chain `leader -> 0 -> 1 -> ... -> n-1`.
    pub fn directed_chain(n: usize) -> Result<Self, TopologyError> {
        let edges: Vec<_> = (1..n).map(|i| (i, i - 1, 1.0)).collect();
        let mut links = vec![0.0; n];
        if n > 0 {
            links[0] = 1.0;
        }
        Self::from_edges(n, &edges, &links, true)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn leader_links(&self) -> &DVector<f64> {
        &self.leader_links
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    pub fn leader_link(&self, i: usize) -> f64 {
        self.leader_links[i]
    }

    pub fn has_leader_links(&self) -> bool {
        self.leader_links.iter().any(|&w| w > 0.0)
    }

    /// Largest row sum of `[A | a_0]`, i.e. the largest in-degree counting
    /// the leader link.
    pub fn max_in_degree(&self) -> f64 {
        (0..self.n())
            .map(|i| self.adjacency.row(i).sum() + self.leader_links[i])
            .fold(0.0, f64::max)
    }

    /// Largest single weight in the graph, including leader links.
    pub fn max_weight(&self) -> f64 {
        self.adjacency
            .iter()
            .chain(self.leader_links.iter())
            .copied()
            .fold(0.0, f64::max)
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in row-major order.
    pub fn undirected_edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.adjacency[(i, j)].max(self.adjacency[(j, i)]);
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Whether the follower graph, with edge directions ignored, is
    /// connected. An empty graph counts as disconnected.
    #[allow(clippy::needless_range_loop)]
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !seen[j] && (self.adjacency[(i, j)] > 0.0 || self.adjacency[(j, i)] > 0.0) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Followers reachable from the leader along the direction information
    /// flows (`a_ij > 0` carries information from `j` to `i`).
    #[allow(clippy::needless_range_loop)]
    pub fn reachable_from_leader(&self) -> Vec<bool> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for i in 0..n {
            if self.leader_links[i] > 0.0 {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(j) = queue.pop_front() {
            for i in 0..n {
                if !seen[i] && self.adjacency[(i, j)] > 0.0 {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        seen
    }

    pub fn has_leader_spanning_tree(&self) -> bool {
        self.n() > 0 && self.reachable_from_leader().into_iter().all(|s| s)
    }
}

/// `L = O - A` with `O` the diagonal of row sums.
pub fn laplacian(topo: &Topology) -> DMatrix<f64> {
    let a = topo.adjacency();
    let n = topo.n();
    let mut l = -a.clone();
    for i in 0..n {
        l[(i, i)] = a.row(i).sum();
    }
    l
}

/// Node-by-edge incidence matrix, one column per undirected edge, with `+1`
/// on the lower-indexed endpoint and `-1` on the higher one.
pub fn incidence(topo: &Topology) -> Result<DMatrix<f64>, TopologyError> {
    if topo.is_directed() {
        return Err(TopologyError::RequiresUndirected);
    }
    let edges = topo.undirected_edges();
    let mut d = DMatrix::zeros(topo.n(), edges.len());
    for (col, &(i, j, _)) in edges.iter().enumerate() {
        d[(i, col)] = 1.0;
        d[(j, col)] = -1.0;
    }
    Ok(d)
}

/// `B = diag(a_i0)`.
pub fn leader_matrix(topo: &Topology) -> DMatrix<f64> {
    DMatrix::from_diagonal(topo.leader_links())
}

/// `Q = L + B` for an undirected, connected graph with at least one leader
/// link.
pub fn grounded_matrix(topo: &Topology) -> Result<DMatrix<f64>, TopologyError> {
    let report = check_assumptions(topo, ObserverMode::UndirectedCt);
    if let Some(reason) = report.first_failure() {
        return Err(TopologyError::Assumption(reason.to_string()));
    }
    Ok(laplacian(topo) + leader_matrix(topo))
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<(), TopologyError> {
    if m.nrows() == 0 {
        return Err(TopologyError::Empty);
    }
    if m.nrows() != m.ncols() {
        return Err(TopologyError::NotSymmetric);
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(TopologyError::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>, TopologyError> {
    check_symmetric(m)?;
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn smallest_eigenvalue(m: &DMatrix<f64>) -> Result<f64, TopologyError> {
    Ok(symmetric_eigenvalues(m)?[0])
}

/// Algebraic connectivity of an undirected Laplacian.
pub fn second_smallest_eigenvalue(l: &DMatrix<f64>) -> Result<f64, TopologyError> {
    let ev = symmetric_eigenvalues(l)?;
    ev.get(1).copied().ok_or(TopologyError::Empty)
}

/// Quantities derived from a directed graph rooted at the leader.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedWeights {
    /// `H = L + B`.
    pub h: DMatrix<f64>,
    /// Solution of `H^T p = 1`.
    pub p: DVector<f64>,
    pub p_max: f64,
    /// `Q = (H^T P + P H) / 2` with `P = diag(p)`.
    pub q: DMatrix<f64>,
    pub lambda1_q: f64,
}

pub fn directed_weights(topo: &Topology) -> Result<DirectedWeights, TopologyError> {
    let n = topo.n();
    if n == 0 {
        return Err(TopologyError::Empty);
    }
    let h = laplacian(topo) + leader_matrix(topo);
    let ht = h.transpose();
    let lu = ht.clone().lu();
    // Partial pivoting can still hand back a tiny pivot for a singular H.
    let pivot_floor = 1e-12 * h.amax().max(1.0);
    let u = lu.u();
    if (0..n).any(|i| u[(i, i)].abs() <= pivot_floor) {
        return Err(TopologyError::SingularH);
    }
    let p = lu
        .solve(&DVector::from_element(n, 1.0))
        .ok_or(TopologyError::SingularH)?;
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, &v)| v <= 0.0) {
        return Err(TopologyError::NonPositiveP { index, value });
    }
    let pm = DMatrix::from_diagonal(&p);
    let mut q = (&ht * &pm + &pm * &h) * 0.5;
    // Exact symmetry; the two products differ only by rounding.
    q = (&q + q.transpose()) * 0.5;
    let lambda1_q = smallest_eigenvalue(&q)?;
    let p_max = p.max();
    Ok(DirectedWeights {
        h,
        p,
        p_max,
        q,
        lambda1_q,
    })
}

/// Everything the gain conditions and Lyapunov diagnostics need for one
/// topology and observer mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub mode: ObserverMode,
    pub laplacian: DMatrix<f64>,
    /// `L + B` (undirected), `(H^T P + P H)/2` (directed), `L` (average
    /// tracking).
    pub q: DMatrix<f64>,
    /// Directed case only.
    pub h: Option<DMatrix<f64>>,
    /// Directed case only.
    pub p: Option<DVector<f64>>,
    pub p_max: Option<f64>,
    pub lambda1_q: Option<f64>,
    pub lambda2_l: Option<f64>,
}

impl SpectralData {
    pub fn compute(topo: &Topology, mode: ObserverMode) -> Result<Self, TopologyError> {
        let report = check_assumptions(topo, mode);
        if let Some(reason) = report.first_failure() {
            return Err(TopologyError::Assumption(reason.to_string()));
        }
        let l = laplacian(topo);
        match mode {
            ObserverMode::UndirectedCt => {
                let q = grounded_matrix(topo)?;
                let lambda1 = smallest_eigenvalue(&q)?;
                Ok(Self {
                    mode,
                    lambda2_l: second_smallest_eigenvalue(&l).ok(),
                    laplacian: l,
                    q,
                    h: None,
                    p: None,
                    p_max: None,
                    lambda1_q: Some(lambda1),
                })
            }
            ObserverMode::DirectedCt => {
                let w = directed_weights(topo)?;
                Ok(Self {
                    mode,
                    laplacian: l,
                    q: w.q,
                    h: Some(w.h),
                    p: Some(w.p),
                    p_max: Some(w.p_max),
                    lambda1_q: Some(w.lambda1_q),
                    lambda2_l: None,
                })
            }
            ObserverMode::Dat => {
                let lambda2 = second_smallest_eigenvalue(&l)?;
                Ok(Self {
                    mode,
                    q: l.clone(),
                    laplacian: l,
                    h: None,
                    p: None,
                    p_max: None,
                    lambda1_q: None,
                    lambda2_l: Some(lambda2),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub passed: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub mode: ObserverMode,
    pub conditions: Vec<Condition>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.conditions
            .iter()
            .find(|c| !c.passed)
            .map(|c| c.reason.as_str())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "topology assumptions ({}):", self.mode)?;
        for c in &self.conditions {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "  [{tag}] {}: {}", c.name, c.reason)?;
        }
        Ok(())
    }
}

fn condition(name: &'static str, passed: bool, ok: &str, fail: &str) -> Condition {
    Condition {
        name,
        passed,
        reason: if passed { ok } else { fail }.to_string(),
    }
}

/// Checks the graph assumptions each observer relies on. Never fails; the
/// outcome is in the report.
pub fn check_assumptions(topo: &Topology, mode: ObserverMode) -> AssumptionReport {
    let mut conditions = Vec::new();
    let nonempty = topo.n() > 0;
    conditions.push(condition(
        "nonempty",
        nonempty,
        "at least one follower",
        "graph has no followers",
    ));
    match mode {
        ObserverMode::UndirectedCt | ObserverMode::Dat => {
            let ok = !topo.is_directed() && topo.is_connected();
            conditions.push(condition(
                "undirected_connected",
                ok,
                "follower graph is undirected and connected",
                if topo.is_directed() {
                    "follower graph must be undirected and connected (graph is directed)"
                } else {
                    "follower graph must be undirected and connected (graph is disconnected)"
                },
            ));
            if mode == ObserverMode::UndirectedCt {
                conditions.push(condition(
                    "leader_link",
                    topo.has_leader_links(),
                    "at least one follower hears the leader",
                    "no follower receives information from the leader",
                ));
            } else {
                conditions.push(condition(
                    "leaderless",
                    !topo.has_leader_links(),
                    "no leader links",
                    "average tracking runs without a leader, but leader links are present",
                ));
            }
        }
        ObserverMode::DirectedCt => {
            let reach = topo.reachable_from_leader();
            let missing: Vec<String> = reach
                .iter()
                .enumerate()
                .filter(|(_, &r)| !r)
                .map(|(i, _)| (i + 1).to_string())
                .collect();
            let ok = nonempty && missing.is_empty();
            let fail = format!(
                "no spanning tree rooted at the leader (unreachable agents: {})",
                missing.join(", ")
            );
            conditions.push(condition(
                "spanning_tree",
                ok,
                "leader reaches every follower along directed edges",
                &fail,
            ));
        }
    }
    AssumptionReport { mode, conditions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k2() -> Topology {
        Topology::from_edges(2, &[(0, 1, 1.0)], &[0.0, 0.0], false).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let l = laplacian(&k2());
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let l = laplacian(&Topology::path(3, &[0.0; 3]).unwrap());
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(l, expected);

        let empty = Topology::new(DMatrix::zeros(3, 3), DVector::zeros(3), false).unwrap();
        assert_eq!(laplacian(&empty), DMatrix::zeros(3, 3));
    }

    #[test]
    fn incidence_examples() {
        let d = incidence(&k2()).unwrap();
        assert_eq!(d, DMatrix::from_column_slice(2, 1, &[1.0, -1.0]));

        let path = Topology::path(3, &[0.0; 3]).unwrap();
        let d = incidence(&path).unwrap();
        assert_eq!(d.shape(), (3, 2));
        assert_eq!(&d * d.transpose(), laplacian(&path));

        let empty = Topology::new(DMatrix::zeros(3, 3), DVector::zeros(3), false).unwrap();
        assert_eq!(incidence(&empty).unwrap().shape(), (3, 0));

        assert_eq!(
            incidence(&Topology::directed_chain(2).unwrap()),
            Err(TopologyError::RequiresUndirected)
        );
    }

    #[test]
    fn grounded_examples() {
        let single = Topology::new(DMatrix::zeros(1, 1), DVector::from_element(1, 1.0), false)
            .unwrap();
        assert_eq!(grounded_matrix(&single).unwrap(), DMatrix::from_element(1, 1, 1.0));

        let pair = Topology::from_edges(2, &[(0, 1, 1.0)], &[1.0, 0.0], false).unwrap();
        assert_eq!(
            grounded_matrix(&pair).unwrap(),
            DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0])
        );

        let apart = Topology::new(DMatrix::zeros(2, 2), DVector::from_element(2, 1.0), false)
            .unwrap();
        assert!(matches!(grounded_matrix(&apart), Err(TopologyError::Assumption(_))));
    }

    #[test]
    fn directed_chain_weights() {
        let topo = Topology::directed_chain(2).unwrap();
        let w = directed_weights(&topo).unwrap();
        assert_eq!(w.h, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 1.0]));
        assert_relative_eq!(w.p[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(w.p[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.q[(0, 0)], 2.0, epsilon = 1e-12);
        assert_relative_eq!(w.q[(0, 1)], -0.5, epsilon = 1e-12);
        assert_relative_eq!(w.q[(1, 1)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.lambda1_q, (3.0 - 2f64.sqrt()) / 2.0, epsilon = 1e-12);
        assert_eq!(w.p_max, 2.0);
    }

    #[test]
    fn directed_star_is_identity() {
        let topo = Topology::new(DMatrix::zeros(3, 3), DVector::from_element(3, 1.0), true)
            .unwrap();
        let w = directed_weights(&topo).unwrap();
        assert_eq!(w.h, DMatrix::identity(3, 3));
        assert_eq!(w.p, DVector::from_element(3, 1.0));
        assert_relative_eq!(w.lambda1_q, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn directed_unreachable_follower_is_rejected() {
        // leader -> 0, follower 1 isolated
        let topo = Topology::from_edges(2, &[], &[1.0, 0.0], true).unwrap();
        assert_eq!(directed_weights(&topo), Err(TopologyError::SingularH));
        let report = check_assumptions(&topo, ObserverMode::DirectedCt);
        assert!(!report.passed());
        assert!(report.first_failure().unwrap().contains("no spanning tree"));
    }

    #[test]
    fn assumption_reports() {
        let pair = Topology::from_edges(2, &[(0, 1, 1.0)], &[1.0, 0.0], false).unwrap();
        assert!(check_assumptions(&pair, ObserverMode::UndirectedCt).passed());
        assert!(!check_assumptions(&pair, ObserverMode::Dat).passed());
        assert!(check_assumptions(&k2(), ObserverMode::Dat).passed());

        // chain 0 -> 1 but nobody hears the leader
        let rootless = Topology::from_edges(2, &[(1, 0, 1.0)], &[0.0, 0.0], true).unwrap();
        let r = check_assumptions(&rootless, ObserverMode::DirectedCt);
        assert!(!r.passed());
        assert!(r.first_failure().unwrap().contains("no spanning tree"));

        let apart = Topology::new(DMatrix::zeros(2, 2), DVector::from_element(2, 1.0), false)
            .unwrap();
        let r = check_assumptions(&apart, ObserverMode::UndirectedCt);
        assert!(r.first_failure().unwrap().contains("undirected and connected"));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(smallest_eigenvalue(&DMatrix::from_element(1, 1, 1.0)).unwrap(), 1.0);
        let q = DMatrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 1.0]);
        assert_relative_eq!(smallest_eigenvalue(&q).unwrap(), 0.79289, epsilon = 1e-5);
        let l = laplacian(&Topology::path(3, &[0.0; 3]).unwrap());
        assert_relative_eq!(second_smallest_eigenvalue(&l).unwrap(), 1.0, epsilon = 1e-12);
        let skew = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert_eq!(smallest_eigenvalue(&skew), Err(TopologyError::NotSymmetric));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            Topology::new(a.clone(), DVector::zeros(2), false),
            Err(TopologyError::Asymmetric { .. })
        ));
        assert!(Topology::new(a, DVector::zeros(2), true).is_ok());
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            Topology::new(a, DVector::zeros(2), true),
            Err(TopologyError::SelfLoop(0))
        );
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(matches!(
            Topology::new(a, DVector::zeros(2), false),
            Err(TopologyError::InvalidWeight { .. })
        ));
        assert!(matches!(
            Topology::new(DMatrix::zeros(2, 2), DVector::zeros(3), false),
            Err(TopologyError::LeaderLinks { .. })
        ));
    }

    #[test]
    fn spectral_data_per_mode() {
        let ring = Topology::ring(4, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let s = SpectralData::compute(&ring, ObserverMode::UndirectedCt).unwrap();
        assert!(s.lambda1_q.unwrap() > 0.0);
        assert_relative_eq!(s.lambda2_l.unwrap(), 2.0, epsilon = 1e-12);

        let cycle = Topology::ring(4, &[0.0; 4]).unwrap();
        let s = SpectralData::compute(&cycle, ObserverMode::Dat).unwrap();
        assert_relative_eq!(s.lambda2_l.unwrap(), 2.0, epsilon = 1e-12);

        let chain = Topology::directed_chain(4).unwrap();
        let s = SpectralData::compute(&chain, ObserverMode::DirectedCt).unwrap();
        let p = s.p.unwrap();
        assert_relative_eq!(p.as_slice(), &[4.0, 3.0, 2.0, 1.0][..], epsilon = 1e-12);
        assert!(SpectralData::compute(&chain, ObserverMode::Dat).is_err());
    }
}
