//! Repeated solver runs over many instances, radius sweeps and ablations.
//!
//! Runs execute on a worker pool; results come back in job order so every
//! table is reproducible for a fixed base seed.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{gap_percent, saving_rate};
use crate::driver::{solve, DriverParams, SolveResult};
use crate::instance::{parse_instance, Instance};
use crate::solution::solution_length;

/// Instance paths listed in a manifest: one per line, relative to the
/// manifest's directory, `#` starts a comment.
pub fn load_manifest(path: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| base.join(l))
        .collect())
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading instance {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing instance {}", path.display()))
}

/// One row per (instance, repetition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: String,
    pub rep: usize,
    pub seed: u64,
    pub objective: Option<f64>,
    pub center_objective: Option<f64>,
    pub vehicles: Option<usize>,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub row: RunRow,
    pub result: Option<SolveResult>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().context("building worker pool")
}

/// Solves every instance `reps` times with seeds `base_seed + rep`. Failures
/// are recorded in the row and the batch continues.
pub fn run_batch(
    instances: &[Instance],
    params: &DriverParams,
    reps: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<RunOutput>> {
    let jobs: Vec<(usize, usize)> = (0..instances.len()).flat_map(|i| (0..reps).map(move |r| (i, r))).collect();
    let run = |&(i, rep): &(usize, usize)| {
        let inst = &instances[i];
        let seed = base_seed + rep as u64;
        let p = DriverParams { seed, ..params.clone() };
        let t = Instant::now();
        let res = solve(inst, &p);
        let runtime_ms = t.elapsed().as_secs_f64() * 1e3;
        let mut row = RunRow {
            instance: inst.name().to_string(),
            rep,
            seed,
            objective: None,
            center_objective: None,
            vehicles: None,
            runtime_ms,
            error: None,
        };
        match res {
            Ok(r) => {
                row.objective = Some(r.objective);
                row.center_objective = Some(solution_length(&r.solution, inst));
                row.vehicles = Some(r.solution.routes.len());
                RunOutput { row, result: Some(r) }
            }
            Err(e) => {
                row.error = Some(e.to_string());
                RunOutput { row, result: None }
            }
        }
    };
    Ok(pool(workers)?.install(|| jobs.par_iter().map(run).collect()))
}

/// Per-instance aggregate over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub runs: usize,
    pub failures: usize,
    pub best: Option<f64>,
    pub avg: Option<f64>,
    pub worst: Option<f64>,
    pub avg_vehicles: Option<f64>,
    pub avg_runtime_ms: f64,
    pub reference: Option<f64>,
    pub gap_percent: Option<f64>,
}

/// Aggregates rows per instance in first-appearance order. `references` maps
/// instance names to best-known objectives.
pub fn summarize(rows: &[RunRow], references: &HashMap<String, f64>) -> Vec<SummaryRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&RunRow>> = HashMap::new();
    for r in rows {
        let g = groups.entry(&r.instance).or_default();
        if g.is_empty() {
            order.push(&r.instance);
        }
        g.push(r);
    }
    order
        .into_iter()
        .map(|name| {
            let g = &groups[name];
            let objs: Vec<f64> = g.iter().filter_map(|r| r.objective).collect();
            let vehicles: Vec<f64> = g.iter().filter_map(|r| r.vehicles.map(|v| v as f64)).collect();
            let best = objs.iter().copied().reduce(f64::min);
            let reference = references.get(name).copied();
            SummaryRow {
                instance: name.to_string(),
                runs: g.len(),
                failures: g.len() - objs.len(),
                best,
                avg: mean(&objs),
                worst: objs.iter().copied().reduce(f64::max),
                avg_vehicles: mean(&vehicles),
                avg_runtime_ms: g.iter().map(|r| r.runtime_ms).sum::<f64>() / g.len() as f64,
                reference,
                gap_percent: best.zip(reference).map(|(b, r)| gap_percent(b, r)),
            }
        })
        .collect()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Best-known objectives from a CSV with columns `instance,best_known`.
pub fn load_references(path: &Path) -> Result<HashMap<String, f64>> {
    #[derive(Deserialize)]
    struct Ref {
        instance: String,
        best_known: f64,
    }
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = HashMap::new();
    for rec in rdr.deserialize() {
        let r: Ref = rec?;
        out.insert(r.instance, r.best_known);
    }
    Ok(out)
}

pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub radius: f64,
    pub best: f64,
    pub avg: f64,
    pub worst: f64,
    /// Saving of the best objective relative to serving node centers.
    pub saving_vs_centers: f64,
}

/// Solves `base` at every radius (and at radius 0 for the baseline) with
/// `reps` seeds each.
pub fn radius_sweep(
    base: &Instance,
    radii: &[f64],
    params: &DriverParams,
    reps: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<SweepRow>> {
    let mut all = vec![0.0];
    all.extend_from_slice(radii);
    let instances: Vec<Instance> = all
        .iter()
        .map(|&r| base.with_radius(r).with_name(format!("{}@r{r}", base.name())))
        .collect();
    let runs = run_batch(&instances, params, reps, base_seed, workers)?;
    let stats: Vec<(f64, f64, f64)> = runs
        .chunks(reps)
        .map(|chunk| {
            let objs: Vec<f64> = chunk.iter().filter_map(|r| r.row.objective).collect();
            let best = objs.iter().copied().fold(f64::INFINITY, f64::min);
            let worst = objs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (best, mean(&objs).unwrap_or(f64::NAN), worst)
        })
        .collect();
    let baseline = stats[0].0;
    Ok(radii
        .iter()
        .zip(&stats[1..])
        .map(|(&radius, &(best, avg, worst))| SweepRow {
            radius,
            best,
            avg,
            worst,
            saving_vs_centers: saving_rate(baseline, best),
        })
        .collect())
}

/// Average best objective per instance for the full method, without the
/// threshold re-increase, and without disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub instance: String,
    pub full: f64,
    pub no_reincrease: f64,
    pub no_disks: f64,
    /// Saving of the full method over serving node centers.
    pub disk_saving_percent: f64,
    /// Whether disabling the re-increase made the average worse or equal.
    pub reincrease_helps: bool,
}

pub fn ablation(
    instances: &[Instance],
    params: &DriverParams,
    reps: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<AblationRow>> {
    let avg = |runs: &[RunOutput]| -> Vec<f64> {
        runs.chunks(reps)
            .map(|c| mean(&c.iter().filter_map(|r| r.row.objective).collect::<Vec<_>>()).unwrap_or(f64::NAN))
            .collect()
    };
    let full = avg(&run_batch(instances, params, reps, base_seed, workers)?);
    let no_re = DriverParams { threshold_reincrease: false, ..params.clone() };
    let no_reincrease = avg(&run_batch(instances, &no_re, reps, base_seed, workers)?);
    let centers: Vec<Instance> = instances.iter().map(|i| i.with_radius(0.0)).collect();
    let no_disks = avg(&run_batch(&centers, params, reps, base_seed, workers)?);
    Ok(instances
        .iter()
        .enumerate()
        .map(|(i, inst)| AblationRow {
            instance: inst.name().to_string(),
            full: full[i],
            no_reincrease: no_reincrease[i],
            no_disks: no_disks[i],
            disk_saving_percent: saving_rate(no_disks[i], full[i]),
            reincrease_helps: no_reincrease[i] >= full[i],
        })
        .collect())
}
