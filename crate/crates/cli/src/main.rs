use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fixtrack::builtin::example;
use fixtrack::config::{load_scenario, ScenarioFile};
use fixtrack::engine::simulate;
use fixtrack::report::{write_csv, ConvergenceReport, ExitStatus};
use fixtrack::scenarios::Scenario;
use fixtrack::sweep::{map_items, monte_carlo, Execution};

#[derive(Parser)]
#[command(name = "fixtrack", version, about = "Fixed-time tracking simulations for double-integrator networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Directory for the trajectory CSV and report.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the integration step.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the seed for random initial states.
    #[arg(long)]
    seed: Option<u64>,
    /// Run even if topology assumptions or gain conditions fail.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the built-in examples (1-4).
    RunExample {
        id: u32,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run scenario files.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
        /// Scenario files to run at once; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check assumptions and gain conditions without simulating.
    Validate { file: PathBuf },
    /// Print a built-in example as a scenario file.
    ExportExample { id: u32 },
    /// Re-run a scenario over a range of seeds and summarise convergence.
    Sweep {
        file: PathBuf,
        #[arg(long, default_value_t = 16)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        dt: Option<f64>,
    },
}

/// Something that ends the run with exit status 2.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn load(path: &Path) -> Result<Scenario> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut sc = load_scenario(&src).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if sc.name.is_empty() {
        sc.name = path
            .file_stem()
            .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
    }
    Ok(sc)
}

fn builtin(id: u32) -> Result<Scenario> {
    example(id).map_err(|e| invalid(e.to_string()))
}

fn apply_overrides(sc: &mut Scenario, dt: Option<f64>, seed: Option<u64>) {
    if let Some(dt) = dt {
        sc.sim.dt = dt;
    }
    if let Some(seed) = seed {
        sc.sim.seed = seed;
    }
}

/// Validates, simulates and writes outputs; returns the status and the
/// text to print.
fn run_scenario(mut sc: Scenario, opts: &RunOpts) -> Result<(ExitStatus, String)> {
    apply_overrides(&mut sc, opts.dt, opts.seed);
    let validation = sc.validate();
    if !validation.errors.is_empty() {
        bail!(invalid(format!("{}:\n{validation}", sc.name)));
    }
    if !validation.passed() && !opts.force {
        bail!(invalid(format!(
            "{}: assumption or gain check failed (use --force to run anyway)\n{validation}",
            sc.name
        )));
    }
    let log = simulate(&sc).with_context(|| format!("simulating {}", sc.name))?;
    let report = ConvergenceReport::new(&sc, &log, &validation);

    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let csv_path = opts.out.join(format!("{}.csv", sc.name));
    let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_csv(&log, BufWriter::new(file)).with_context(|| format!("writing {}", csv_path.display()))?;
    let report_path = opts.out.join(format!("{}_report.txt", sc.name));
    let text = report.to_string();
    fs::write(&report_path, &text).with_context(|| format!("writing {}", report_path.display()))?;

    Ok((
        report.status(),
        format!("{text}wrote {} and {}\n", csv_path.display(), report_path.display()),
    ))
}

fn status_of(err: &anyhow::Error) -> ExitStatus {
    if err.downcast_ref::<Invalid>().is_some() {
        ExitStatus::Invalid
    } else {
        // The run started but broke down (e.g. the state blew up).
        ExitStatus::NotConverged
    }
}

fn report_outcome(outcome: Result<(ExitStatus, String)>) -> ExitStatus {
    match outcome {
        Ok((status, text)) => {
            print!("{text}");
            status
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            status_of(&e)
        }
    }
}

fn validate(path: &Path) -> Result<ExitStatus> {
    let sc = load(path)?;
    let v = sc.validate();
    println!("scenario: {} ({})", sc.name, sc.mode);
    print!("{v}");
    if sc.topology.is_none() {
        println!("rho = {} (required >= {})", sc.controller.smc.rho, sc.required_rho());
    }
    let status = if v.passed() { ExitStatus::Converged } else { ExitStatus::Invalid };
    println!("{}", if v.passed() { "all checks passed" } else { "checks FAILED" });
    Ok(status)
}

fn sweep(path: &Path, seeds: u64, jobs: usize, dt: Option<f64>) -> Result<ExitStatus> {
    let mut sc = load(path)?;
    apply_overrides(&mut sc, dt, None);
    let v = sc.validate();
    if !v.passed() {
        bail!(invalid(format!("{}:\n{v}", sc.name)));
    }
    let threshold = sc.convergence_threshold();
    let seed_list: Vec<u64> = (0..seeds).collect();
    let outcomes = monte_carlo(&sc, &seed_list, Execution::from_jobs(jobs));
    println!("seed,metric_at_deadline,max_metric_after_deadline,settling_time,converged");
    let mut status = ExitStatus::Converged;
    for o in outcomes {
        let o = o?;
        let ok = o.converged(threshold);
        if !ok {
            status = ExitStatus::NotConverged;
        }
        let settle = o.settling_time.map_or_else(|| "none".to_string(), |t| t.to_string());
        println!(
            "{},{:.6e},{:.6e},{},{}",
            o.seed, o.metric_at_deadline, o.max_metric_after_deadline, settle, ok
        );
    }
    Ok(status)
}

fn dispatch(cli: Cli) -> Result<ExitStatus> {
    match cli.command {
        Command::RunExample { id, opts } => {
            let sc = builtin(id)?;
            Ok(report_outcome(run_scenario(sc, &opts)))
        }
        Command::Run { files, opts, jobs } => {
            let results = map_items(&files, Execution::from_jobs(jobs), |p| {
                load(p).and_then(|sc| run_scenario(sc, &opts))
            });
            Ok(results
                .into_iter()
                .map(report_outcome)
                .fold(ExitStatus::Converged, ExitStatus::combine))
        }
        Command::Validate { file } => validate(&file),
        Command::ExportExample { id } => {
            let text = ScenarioFile::from_scenario(&builtin(id)?)
                .to_toml()
                .map_err(|e| invalid(e.to_string()))?;
            print!("{text}");
            Ok(ExitStatus::Converged)
        }
        Command::Sweep { file, seeds, jobs, dt } => sweep(&file, seeds, jobs, dt),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match dispatch(cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            status_of(&e)
        }
    };
    ExitCode::from(status.code() as u8)
}
