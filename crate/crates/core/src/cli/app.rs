//! Argument parsing and subcommand dispatch for the `ce-grp` binary.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use super::batch::{ablation, load_instance, load_manifest, load_references, radius_sweep, run_batch, summarize, write_csv};
use super::plot::plot_solution;
use crate::construction::ConstructionError;
use crate::driver::{solve, DriverParams, SolveError};
use crate::exact_oracle::{solve_exact_global, OracleError};
use crate::instance::{generate_instance, serialize_instance, FleetSpec, GeneratorParams, Instance};
use crate::solution::{parse_solution, serialize_solution, total_distance, validate, validate_points};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ce-grp", version, about = "Close-enough multi-vehicle general routing solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the solution file and run log.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every instance of a manifest several times.
    Batch {
        manifest: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        runs: RunArgs,
        /// CSV with columns instance,best_known for gap reporting.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Best/average/worst objective over a list of disk radii.
    SweepRadius {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "10,30,50,70,100")]
        radii: Vec<f64>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        runs: RunArgs,
        /// CSV output path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the full method with the threshold re-increase and the disks
    /// switched off.
    Ablate {
        /// Instance files, or a manifest with --manifest.
        files: Vec<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        runs: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact optimum of a tiny instance by enumeration.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution file against its instance.
    Validate { instance: PathBuf, solution: PathBuf },
    /// Render a solution as SVG.
    Plot {
        solution: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// Output path; defaults to the solution path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random instance.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        nodes: usize,
        #[arg(long, default_value_t = 15)]
        edges: usize,
        #[arg(long, default_value_t = 1000.0)]
        area: f64,
        #[arg(long, default_value_t = 0.0)]
        radius: f64,
        /// Flight range L.
        #[arg(long = "range", default_value_t = 3000.0)]
        flight_range: f64,
        /// Node capacity Q.
        #[arg(long = "capacity", default_value_t = 4)]
        node_capacity: u32,
        #[arg(long)]
        vehicles: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// JSON parameter file (MaxIt, it_max, rho, tau_min, ...).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override every node radius.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    no_threshold_reincrease: bool,
    /// Serve node centers exactly (all radii zero).
    #[arg(long)]
    no_disks: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

impl SearchArgs {
    fn params(&self) -> Result<DriverParams> {
        let mut p = match &self.params {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let de = &mut serde_json::Deserializer::from_str(&text);
                serde_path_to_error::deserialize(de).with_context(|| format!("parsing {}", path.display()))?
            }
            None => DriverParams::default(),
        };
        if self.no_threshold_reincrease {
            p.threshold_reincrease = false;
        }
        p.validate()?;
        Ok(p)
    }

    fn apply(&self, instance: Instance) -> Instance {
        if self.no_disks {
            instance.with_radius(0.0)
        } else if let Some(r) = self.radius {
            instance.with_radius(r)
        } else {
            instance
        }
    }
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Infeasible(String),
    Other(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Other(e.into())
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(msg)) => {
            eprintln!("validation failed: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible instance: {msg}");
            EXIT_INFEASIBLE
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_string<T: serde::Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { file, search, seed, out } => {
            let mut params = search.params()?;
            if let Some(s) = seed {
                params.seed = s;
            }
            let instance = search.apply(load_instance(&file)?);
            let result = solve(&instance, &params).map_err(|e| match e {
                SolveError::Construction(
                    c @ (ConstructionError::InfeasibleTask { .. } | ConstructionError::FleetExhausted(_)),
                ) => Failure::Infeasible(c.to_string()),
                other => Failure::Other(other.into()),
            })?;
            let report = validate_points(&result.solution, &instance, &result.points);
            if !report.is_ok() {
                let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
                return Err(Failure::Invalid(msgs.join("; ")));
            }
            println!(
                "{}: objective {:.6} with {} routes after {} iterations",
                instance.name(),
                result.objective,
                result.solution.routes.len(),
                result.log.records.len() - 1
            );
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                let doc = serialize_solution(instance.name(), &result.solution, Some(&result.points), result.objective);
                fs::write(dir.join(format!("{}.solution.json", instance.name())), doc)?;
                fs::write(dir.join(format!("{}.runlog.jsonl", instance.name())), result.log.to_jsonl())?;
            }
            Ok(())
        }
        Command::Batch { manifest, search, runs, reference, out } => {
            let params = search.params()?;
            let instances = load_manifest(&manifest)?
                .iter()
                .map(|p| load_instance(p).map(|i| search.apply(i)))
                .collect::<Result<Vec<_>>>()?;
            let outputs = run_batch(&instances, &params, runs.reps, runs.base_seed, runs.workers())?;
            let refs = match reference {
                Some(p) => load_references(&p)?,
                None => Default::default(),
            };
            fs::create_dir_all(out.join("logs"))?;
            fs::create_dir_all(out.join("solutions"))?;
            for o in &outputs {
                if let Some(r) = &o.result {
                    let stem = format!("{}.rep{}", o.row.instance, o.row.rep);
                    fs::write(out.join("logs").join(format!("{stem}.runlog.jsonl")), r.log.to_jsonl())?;
                    let doc = serialize_solution(&o.row.instance, &r.solution, Some(&r.points), r.objective);
                    fs::write(out.join("solutions").join(format!("{stem}.solution.json")), doc)?;
                }
            }
            let rows: Vec<_> = outputs.iter().map(|o| o.row.clone()).collect();
            fs::write(out.join("runs.csv"), csv_string(&rows)?)?;
            let summary = csv_string(&summarize(&rows, &refs))?;
            fs::write(out.join("summary.csv"), &summary)?;
            print!("{summary}");
            Ok(())
        }
        Command::SweepRadius { file, radii, search, runs, out } => {
            let params = search.params()?;
            let instance = load_instance(&file)?;
            let rows = radius_sweep(&instance, &radii, &params, runs.reps, runs.base_seed, runs.workers())?;
            write_or_print(out.as_deref(), &csv_string(&rows)?)?;
            Ok(())
        }
        Command::Ablate { files, manifest, search, runs, out } => {
            let params = search.params()?;
            let mut paths = files;
            if let Some(m) = manifest {
                paths.extend(load_manifest(&m)?);
            }
            if paths.is_empty() {
                return Err(Failure::Other(anyhow::anyhow!("no instances given")));
            }
            let instances = paths.iter().map(|p| load_instance(p).map(|i| search.apply(i))).collect::<Result<Vec<_>>>()?;
            let rows = ablation(&instances, &params, runs.reps, runs.base_seed, runs.workers())?;
            let helps = rows.iter().filter(|r| r.reincrease_helps).count();
            write_or_print(out.as_deref(), &csv_string(&rows)?)?;
            eprintln!("threshold re-increase at least as good on {helps}/{} instances", rows.len());
            Ok(())
        }
        Command::Oracle { file, radius, out } => {
            let mut instance = load_instance(&file)?;
            if let Some(r) = radius {
                instance = instance.with_radius(r);
            }
            let (solution, points, objective) = solve_exact_global(&instance).map_err(|e| match e {
                OracleError::Infeasible => Failure::Infeasible(e.to_string()),
                other => Failure::Other(other.into()),
            })?;
            println!("{}: optimum {objective:.6} with {} routes", instance.name(), solution.routes.len());
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                let doc = serialize_solution(instance.name(), &solution, Some(&points), objective);
                fs::write(dir.join(format!("{}.oracle.json", instance.name())), doc)?;
            }
            Ok(())
        }
        Command::Validate { instance, solution } => {
            let instance = load_instance(&instance)?;
            let text = fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let file = parse_solution(&text).map_err(|e| Failure::Invalid(e.to_string()))?;
            let report = match &file.points {
                Some(p) => validate_points(&file.solution, &instance, p),
                None => validate(&file.solution, &instance),
            };
            if !report.is_ok() {
                let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
                return Err(Failure::Invalid(msgs.join("; ")));
            }
            let actual = total_distance(&file.solution, &instance, file.points.as_ref())
                .map_err(|e| Failure::Invalid(e.to_string()))?;
            if (actual - file.total_distance).abs() > 1e-6 * actual.max(1.0) {
                return Err(Failure::Invalid(format!(
                    "reported total distance {} differs from recomputed {actual}",
                    file.total_distance
                )));
            }
            println!("valid: total distance {actual:.6} over {} routes", file.solution.routes.len());
            Ok(())
        }
        Command::Plot { solution, instance, out } => {
            let instance = load_instance(&instance)?;
            let text = fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let file = parse_solution(&text).map_err(|e| Failure::Invalid(e.to_string()))?;
            let svg = plot_solution(&file.solution, file.points.as_ref(), &instance);
            let path = out.unwrap_or_else(|| solution.with_extension("svg"));
            fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
            Ok(())
        }
        Command::Generate { seed, nodes, edges, area, radius, flight_range, node_capacity, vehicles, out } => {
            let fleet = FleetSpec { flight_range, node_capacity, max_vehicles: vehicles };
            let params = GeneratorParams { n_nodes: nodes, n_edges: edges, area, radius, fleet };
            let instance = generate_instance(seed, &params)?;
            write_or_print(out.as_deref(), &(serialize_instance(&instance) + "\n"))?;
            Ok(())
        }
    }
}
