//! Multi-run experiments: MNS sweeps over seeded runs, aggregation and
//! CSV/JSON report emission.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, InstanceError};
use crate::instance::{generate_taillard, parse_instance, validate, Instance, Time, TAILLARD_FIRST};
use crate::rng::derive_seed;
use crate::search::{check_checkpoints, run_nils, NilsConfig, RunReport, DEFAULT_BUDGET, DEFAULT_KICK_STRENGTH};
use crate::stats::{mann_whitney_u, mean_std, median, median_and_quartiles, PValueMethod};

pub const DEFAULT_RUNS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSource {
    File { path: PathBuf, index: usize },
    Generated { jobs: usize, machines: usize, time_seed: u64 },
}

impl InstanceSource {
    /// The first published instance of a given size.
    pub fn taillard_first(jobs: usize, machines: usize) -> Option<Self> {
        TAILLARD_FIRST
            .iter()
            .find(|&&(_, n, m, _, _)| n == jobs && m == machines)
            .map(|&(_, _, _, seed, _)| Self::Generated { jobs, machines, time_seed: seed })
    }

    /// Loads and validates the instance.
    pub fn load(&self) -> Result<Instance, InstanceError> {
        let instance = match self {
            InstanceSource::File { path, index } => {
                let file = File::open(path).map_err(|e| InstanceError::Io(format!("{}: {e}", path.display())))?;
                parse_instance(file, *index)?
            }
            InstanceSource::Generated { jobs, machines, time_seed } => {
                let instance = generate_taillard(*jobs, *machines, *time_seed)?;
                match TAILLARD_FIRST.iter().find(|&&(_, n, m, s, _)| n == *jobs && m == *machines && s == *time_seed) {
                    Some(&(name, _, _, _, best)) => instance.with_name(name).with_best_known(Some(best)),
                    None => instance,
                }
            }
        };
        if let Some(v) = validate(&instance).first() {
            return Err(InstanceError::Invalid(v.to_string()));
        }
        Ok(instance)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: InstanceSource,
    pub mns_values: Vec<u64>,
    pub runs: usize,
    pub budget: u64,
    pub base_seed: u64,
    pub kick_strength: usize,
    pub checkpoints: Option<Vec<u64>>,
}

impl ExperimentConfig {
    pub fn new(source: InstanceSource, mns_values: Vec<u64>) -> Self {
        Self {
            source,
            mns_values,
            runs: DEFAULT_RUNS,
            budget: DEFAULT_BUDGET,
            base_seed: 0,
            kick_strength: DEFAULT_KICK_STRENGTH,
            checkpoints: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |msg: &str| Err(ExperimentError::Config(msg.to_string()));
        if self.runs < 1 {
            return fail("runs must be at least 1");
        }
        if self.mns_values.is_empty() {
            return fail("at least one MNS value is required");
        }
        if self.budget < 1 {
            return fail("budget must be at least 1");
        }
        if self.kick_strength < 1 {
            return fail("kick strength must be at least 1");
        }
        if let Some(points) = &self.checkpoints {
            check_checkpoints(points, self.budget).map_err(|e| ExperimentError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn run_config(&self, mns: u64, run: usize) -> NilsConfig {
        NilsConfig {
            mns,
            kick_strength: self.kick_strength,
            budget: self.budget,
            seed: derive_seed(self.base_seed, mns, run as u64),
            checkpoints: self.checkpoints.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions<'a> {
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
    /// Record wall-clock time per run. Off keeps reports byte-reproducible.
    pub timing: bool,
    /// Runs not yet started when this is set are skipped and the output is
    /// flagged incomplete.
    pub stop: Option<&'a AtomicBool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub name: String,
    pub n_jobs: usize,
    pub n_machines: usize,
    pub time_seed: Option<u64>,
    pub best_known: Option<Time>,
}

impl From<&Instance> for InstanceInfo {
    fn from(instance: &Instance) -> Self {
        Self {
            name: instance.name().to_string(),
            n_jobs: instance.n_jobs(),
            n_machines: instance.n_machines(),
            time_seed: instance.time_seed(),
            best_known: instance.best_known(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub report: RunReport,
    pub runtime_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnsSummary {
    pub mns: u64,
    pub runs: usize,
    pub min: Time,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: Time,
    /// Runs whose final best equals the instance's best known value.
    pub hits_best_known: Option<usize>,
    pub portal_pct_mean: f64,
    pub portal_pct_std: f64,
    pub lost_evals_mean: f64,
    pub lost_evals_std: f64,
    pub neutral_steps_mean: f64,
    /// Median best-so-far at each checkpoint shared by all runs.
    pub median_trajectory: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub mns_a: u64,
    pub mns_b: u64,
    pub u: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub per_mns: Vec<MnsSummary>,
    pub pairwise: Vec<PairwiseTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub instance: InstanceInfo,
    pub complete: bool,
    pub aggregate: AggregateReport,
    pub runs: Vec<RunRecord>,
}

impl ExperimentOutput {
    pub fn summary(&self, mns: u64) -> Option<&MnsSummary> {
        self.aggregate.per_mns.iter().find(|s| s.mns == mns)
    }

    pub fn finals(&self, mns: u64) -> Vec<Time> {
        self.runs.iter().filter(|r| r.report.mns == mns).map(|r| r.report.final_best.value()).collect()
    }
}

fn as_f64(values: impl IntoIterator<Item = Time>) -> Vec<f64> {
    values.into_iter().map(|v| v as f64).collect()
}

/// Groups runs by MNS and summarizes them. Independent of the order of `runs`.
pub fn aggregate(runs: &[RunRecord], best_known: Option<Time>) -> AggregateReport {
    let mut groups: BTreeMap<u64, Vec<&RunRecord>> = BTreeMap::new();
    for record in runs {
        groups.entry(record.report.mns).or_default().push(record);
    }
    let mut per_mns = Vec::new();
    let mut finals_by_mns = Vec::new();
    for (&mns, group) in groups.iter_mut() {
        group.sort_by_key(|r| r.run);
        let finals = as_f64(group.iter().map(|r| r.report.final_best.value()));
        let q = median_and_quartiles(&finals).expect("group is non-empty");
        let portal: Vec<f64> = group.iter().map(|r| r.report.portal_percentage()).collect();
        let lost: Vec<f64> = group.iter().map(|r| r.report.lost_evals as f64).collect();
        let steps: Vec<f64> = group.iter().map(|r| r.report.neutral_steps_total as f64).collect();
        let (portal_pct_mean, portal_pct_std) = mean_std(&portal).expect("non-empty");
        let (lost_evals_mean, lost_evals_std) = mean_std(&lost).expect("non-empty");
        let (neutral_steps_mean, _) = mean_std(&steps).expect("non-empty");
        per_mns.push(MnsSummary {
            mns,
            runs: group.len(),
            min: group.iter().map(|r| r.report.final_best.value()).min().expect("non-empty"),
            q1: q.q1,
            median: q.median,
            q3: q.q3,
            max: group.iter().map(|r| r.report.final_best.value()).max().expect("non-empty"),
            hits_best_known: best_known.map(|b| group.iter().filter(|r| r.report.final_best.value() == b).count()),
            portal_pct_mean,
            portal_pct_std,
            lost_evals_mean,
            lost_evals_std,
            neutral_steps_mean,
            median_trajectory: median_trajectory(group),
        });
        finals_by_mns.push((mns, finals));
    }
    let mut pairwise = Vec::new();
    for (i, (mns_a, a)) in finals_by_mns.iter().enumerate() {
        for (mns_b, b) in &finals_by_mns[i + 1..] {
            let test = mann_whitney_u(a, b).expect("groups are non-empty");
            pairwise.push(PairwiseTest {
                mns_a: *mns_a,
                mns_b: *mns_b,
                u: test.u,
                p_value: test.p_value,
                method: test.method,
            });
        }
    }
    AggregateReport { per_mns, pairwise }
}

fn median_trajectory(group: &[&RunRecord]) -> Vec<(u64, f64)> {
    let Some(first) = group.first() else { return Vec::new() };
    first
        .report
        .trajectory
        .iter()
        .enumerate()
        .filter_map(|(i, cp)| {
            let values: Option<Vec<f64>> = group
                .iter()
                .map(|r| r.report.trajectory.get(i).filter(|c| c.evals == cp.evals).map(|c| c.best.value() as f64))
                .collect();
            Some((cp.evals, median(&values?).ok()?))
        })
        .collect()
}

/// Loads the configured instance and runs the sweep.
pub fn run_experiment(
    config: &ExperimentConfig,
    options: &RunOptions<'_>,
) -> Result<ExperimentOutput, ExperimentError> {
    config.validate()?;
    let instance = config.source.load()?;
    run_experiment_on(&instance, config, options)
}

/// Runs `config.runs` seeded NILS runs for every MNS value on `instance`.
pub fn run_experiment_on(
    instance: &Instance,
    config: &ExperimentConfig,
    options: &RunOptions<'_>,
) -> Result<ExperimentOutput, ExperimentError> {
    config.validate()?;
    let jobs: Vec<(u64, usize)> =
        config.mns_values.iter().flat_map(|&mns| (0..config.runs).map(move |run| (mns, run))).collect();

    let execute = || -> Result<Vec<Option<RunRecord>>, ExperimentError> {
        jobs.par_iter()
            .map(|&(mns, run)| {
                if options.stop.is_some_and(|s| s.load(Ordering::Relaxed)) {
                    return Ok(None);
                }
                let started = Instant::now();
                let report = run_nils(instance, &config.run_config(mns, run))?;
                Ok(Some(RunRecord {
                    run,
                    report,
                    runtime_secs: options.timing.then(|| started.elapsed().as_secs_f64()),
                }))
            })
            .collect()
    };
    let results = match options.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ExperimentError::Config(e.to_string()))?
            .install(execute)?,
        None => execute()?,
    };
    let complete = results.iter().all(Option::is_some);
    let runs: Vec<RunRecord> = results.into_iter().flatten().collect();
    Ok(ExperimentOutput {
        config: config.clone(),
        instance: InstanceInfo::from(instance),
        complete,
        aggregate: aggregate(&runs, instance.best_known()),
        runs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: [&str; 15] = [
    "instance",
    "n_jobs",
    "n_machines",
    "mns",
    "seed",
    "final_best",
    "portals_found",
    "nwp_invocations",
    "lost_evals",
    "runtime",
    "run",
    "kicks",
    "neutral_steps_total",
    "evals_used",
    "complete",
];

/// One row per run.
pub fn write_csv<W: Write>(out: W, output: &ExperimentOutput) -> Result<(), ExperimentError> {
    write_csv_rows(out, &output.instance, &output.runs, output.complete)
}

/// Header plus one row per record, independent of any experiment config.
pub fn write_csv_rows<W: Write>(
    out: W,
    instance: &InstanceInfo,
    records: &[RunRecord],
    complete: bool,
) -> Result<(), ExperimentError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for record in records {
        let r = &record.report;
        writer.write_record([
            instance.name.clone(),
            instance.n_jobs.to_string(),
            instance.n_machines.to_string(),
            r.mns.to_string(),
            r.seed.to_string(),
            r.final_best.to_string(),
            r.portals_found.to_string(),
            r.nwp_invocations.to_string(),
            r.lost_evals.to_string(),
            record.runtime_secs.map(|t| format!("{t:.6}")).unwrap_or_default(),
            record.run.to_string(),
            r.kicks.to_string(),
            r.neutral_steps_total.to_string(),
            r.evals_used.to_string(),
            complete.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Full configuration, aggregate and per-run reports with trajectories.
pub fn write_json<W: Write>(mut out: W, output: &ExperimentOutput) -> Result<(), ExperimentError> {
    serde_json::to_writer_pretty(&mut out, output)?;
    writeln!(out)?;
    Ok(())
}

pub fn emit_reports(
    output: &ExperimentOutput,
    format: ReportFormat,
    destination: &Path,
) -> Result<(), ExperimentError> {
    let mut file = BufWriter::new(File::create(destination)?);
    match format {
        ReportFormat::Csv => write_csv(&mut file, output)?,
        ReportFormat::Json => write_json(&mut file, output)?,
    }
    file.flush()?;
    Ok(())
}
