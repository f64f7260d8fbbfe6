//! Batches of independent runs: several scenarios at once, or one scenario
//! over many seeds. Each run is single-threaded; batches fan out over rayon
//! when the `parallel` feature is on and run in order otherwise.

use crate::engine::{simulate, SimError, TrajectoryLog};
use crate::scenarios::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// rayon's global pool. Without the `parallel` feature this and
    /// `Threads` run sequentially.
    #[default]
    Parallel,
    Threads(usize),
}

impl Execution {
    /// `--jobs` style: 1 is sequential, 0 means all cores.
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::Threads(n),
        }
    }
}

/// Applies `f` to every item, preserving order.
pub fn map_items<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Execution::Threads(n) => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(_) => items.iter().map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::Threads(_) => items.iter().map(f).collect(),
    }
}

pub fn run_batch(scenarios: &[Scenario], exec: Execution) -> Vec<Result<TrajectoryLog, SimError>> {
    map_items(scenarios, exec, simulate)
}

/// Summary of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub metric_at_deadline: f64,
    pub max_metric_after_deadline: f64,
    pub settling_time: Option<f64>,
}

impl SeedOutcome {
    pub fn converged(&self, threshold: f64) -> bool {
        self.max_metric_after_deadline <= threshold
    }
}

fn outcome(sc: &Scenario, seed: u64) -> Result<SeedOutcome, SimError> {
    let mut run = sc.clone();
    run.sim.seed = seed;
    let log = simulate(&run)?;
    let deadline = run.deadline();
    let k = log.index_at(deadline).unwrap_or(0);
    let tail = &log.metric[k..];
    Ok(SeedOutcome {
        seed,
        metric_at_deadline: log.metric[k],
        max_metric_after_deadline: tail.iter().copied().fold(0.0, f64::max),
        settling_time: crate::engine::settling_time(&log.t, &log.metric, run.convergence_threshold())
            .ok()
            .flatten(),
    })
}

/// Re-runs `sc` once per seed. Only randomised initial states change
/// between runs.
pub fn monte_carlo(
    sc: &Scenario,
    seeds: &[u64],
    exec: Execution,
) -> Vec<Result<SeedOutcome, SimError>> {
    map_items(seeds, exec, |&seed| outcome(sc, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::example;

    fn short(id: u32) -> Scenario {
        let mut sc = example(id).unwrap();
        sc.sim.horizon = 0.5;
        sc
    }

    #[test]
    fn execution_modes_agree() {
        let batch = vec![short(1), short(2), short(3), short(4)];
        let seq = run_batch(&batch, Execution::Sequential);
        let par = run_batch(&batch, Execution::Parallel);
        let two = run_batch(&batch, Execution::Threads(2));
        assert_eq!(seq, par);
        assert_eq!(seq, two);
    }

    #[test]
    fn seeds_change_outcomes() {
        let mut sc = example(2).unwrap();
        sc.sim.dt = 1e-3;
        let out = monte_carlo(&sc, &[1, 2, 1], Execution::Parallel);
        let out: Vec<SeedOutcome> = out.into_iter().map(Result::unwrap).collect();
        assert_eq!(out[0], out[2]);
        assert_ne!(out[0].metric_at_deadline, out[1].metric_at_deadline);
    }

    #[test]
    fn jobs_mapping() {
        assert_eq!(Execution::from_jobs(0), Execution::Parallel);
        assert_eq!(Execution::from_jobs(1), Execution::Sequential);
        assert_eq!(Execution::from_jobs(4), Execution::Threads(4));
    }
}
