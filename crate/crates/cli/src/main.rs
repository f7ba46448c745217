use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nils_core::experiment::{InstanceInfo, DEFAULT_RUNS};
use nils_core::search::{DEFAULT_BUDGET, DEFAULT_KICK_STRENGTH};
use nils_core::{
    derive_seed, fihc, probe, run_nils, seeded, write_csv_rows, write_instances, write_json, ExperimentConfig,
    ExperimentError, ExperimentOutput, Instance, InstanceError, InstanceSource, NilsConfig, Permutation, RunOptions,
    RunRecord, RunReport, SearchState, SolverError,
};
use serde::Serialize;

static STOP: AtomicBool = AtomicBool::new(false);

#[derive(Parser)]
#[command(name = "nils", version, about = "Neutrality-based iterated local search for the permutation flowshop")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run NILS once and report the best schedule found.
    Solve(SolveArgs),
    /// Sweep MNS values over seeded runs and report per-run rows or aggregates.
    Bench(BenchArgs),
    /// Sample local optima and measure their neutrality.
    Landscape(LandscapeArgs),
    /// Emit Taillard instances in the standard text layout.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Taillard-format instance file.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["jobs", "machines", "time_seed"])]
    instance: Option<PathBuf>,
    /// Zero-based instance index within FILE.
    #[arg(long, value_name = "K", requires = "instance")]
    index: Option<usize>,
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    #[arg(long, value_name = "M")]
    machines: Option<usize>,
    /// Generator seed. Defaults to the first published instance of size N x M.
    #[arg(long, value_name = "S")]
    time_seed: Option<u64>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to PATH instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    mns: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_KICK_STRENGTH)]
    kick: usize,
    /// Evaluation counts at which the best-so-far is sampled.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    checkpoints: Option<Vec<u64>>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated MNS values.
    #[arg(long, value_delimiter = ',', value_name = "LIST", required = true)]
    mns: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Base seed; run seeds are derived from (seed, mns, run).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_KICK_STRENGTH)]
    kick: usize,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    checkpoints: Option<Vec<u64>>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Leave the runtime column empty so reports are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct LandscapeArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Number of local optima to sample.
    #[arg(long, default_value_t = 30)]
    samples: usize,
    /// Maximum length of the neutral walk started from each optimum.
    #[arg(long, default_value_t = 100)]
    walk_steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_name = "N")]
    jobs: usize,
    #[arg(long, value_name = "M")]
    machines: usize,
    /// Comma-separated generator seeds, one instance each.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    time_seed: Option<Vec<u64>>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Instance(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Instance(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Instance(m) => write!(f, "instance error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::Instance(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Instance(e) => e.into(),
            ExperimentError::Solver(e) => CliError::Instance(e.to_string()),
            ExperimentError::Config(m) => CliError::Usage(m),
            other => CliError::Io(other.to_string()),
        }
    }
}

fn usage(e: SolverError) -> CliError {
    CliError::Usage(e.to_string())
}

impl InstanceArgs {
    fn source(&self) -> Result<InstanceSource, CliError> {
        if let Some(path) = &self.instance {
            return Ok(InstanceSource::File { path: path.clone(), index: self.index.unwrap_or(0) });
        }
        let (Some(jobs), Some(machines)) = (self.jobs, self.machines) else {
            return Err(CliError::Usage("give --instance FILE or both --jobs and --machines".into()));
        };
        match self.time_seed {
            Some(time_seed) => Ok(InstanceSource::Generated { jobs, machines, time_seed }),
            None => InstanceSource::taillard_first(jobs, machines).ok_or_else(|| {
                CliError::Usage(format!("no published instance of size {jobs}x{machines}; pass --time-seed"))
            }),
        }
    }

    fn load(&self) -> Result<(InstanceSource, Instance), CliError> {
        let source = self.source()?;
        let instance = source.load()?;
        if instance.n_jobs() < 2 {
            return Err(CliError::Instance(format!("search needs at least 2 jobs, got {}", instance.n_jobs())));
        }
        Ok((source, instance))
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    instance: InstanceInfo,
    config: &'a NilsConfig,
    runtime_secs: f64,
    report: &'a RunReport,
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let mut config = NilsConfig::new(args.mns, args.budget, args.seed).with_kick_strength(args.kick);
    config.checkpoints = args.checkpoints;
    config.validate().map_err(usage)?;
    let (_, instance) = args.instance.load()?;
    let mut out = open_output(args.output.out.as_ref())?;

    let started = Instant::now();
    let report = run_nils(&instance, &config).map_err(|e| CliError::Instance(e.to_string()))?;
    let runtime_secs = started.elapsed().as_secs_f64();
    eprintln!(
        "{}: best {} (initial {}) after {} evaluations, {} portals in {} walks",
        instance.name(),
        report.final_best,
        report.initial_fitness,
        report.evals_used,
        report.portals_found,
        report.nwp_invocations
    );

    let info = InstanceInfo::from(&instance);
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let doc = SolveOutput { instance: info, config: &config, runtime_secs, report: &report };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            let record = RunRecord { run: 0, report, runtime_secs: Some(runtime_secs) };
            write_csv_rows(&mut out, &info, &[record], true)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn print_summary(output: &ExperimentOutput) {
    eprintln!("{} ({} runs per MNS)", output.instance.name, output.config.runs);
    eprintln!("{:>8} {:>8} {:>10} {:>10} {:>10} {:>8} {:>9}", "mns", "min", "q1", "median", "q3", "max", "portal%");
    for s in &output.aggregate.per_mns {
        eprintln!(
            "{:>8} {:>8} {:>10.1} {:>10.1} {:>10.1} {:>8} {:>9.2}",
            s.mns, s.min, s.q1, s.median, s.q3, s.max, s.portal_pct_mean
        );
    }
    if !output.complete {
        eprintln!("interrupted: {} runs completed, output flagged incomplete", output.runs.len());
    }
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let (source, instance) = args.instance.load()?;
    let config = ExperimentConfig {
        runs: args.runs,
        budget: args.budget,
        base_seed: args.seed,
        kick_strength: args.kick,
        checkpoints: args.checkpoints,
        ..ExperimentConfig::new(source, args.mns)
    };
    config.validate()?;
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let mut out = open_output(args.output.out.as_ref())?;
    // A second interrupt falls through to the default behaviour.
    let _ = ctrlc::set_handler(|| {
        if STOP.swap(true, Ordering::Relaxed) {
            std::process::exit(130);
        }
    });
    let options = RunOptions { threads: args.threads, timing: !args.no_timing, stop: Some(&STOP) };
    let output = nils_core::run_experiment_on(&instance, &config, &options)?;
    print_summary(&output);

    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => nils_core::write_csv(&mut out, &output)?,
        Format::Json => write_json(&mut out, &output)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LandscapeSample {
    sample: usize,
    fitness: i64,
    neutral_degree: u64,
    neighborhood_size: u64,
    neutral_pct: f64,
    is_local_optimum: bool,
    portal_step: Option<u64>,
    evaluations: u64,
}

#[derive(Serialize)]
struct LandscapeOutput {
    instance: InstanceInfo,
    seed: u64,
    walk_steps: u64,
    mean_neutral_pct: f64,
    portal_rate: f64,
    samples: Vec<LandscapeSample>,
}

fn landscape(args: LandscapeArgs) -> Result<(), CliError> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let (_, instance) = args.instance.load()?;
    let mut out = open_output(args.output.out.as_ref())?;
    let mut samples = Vec::with_capacity(args.samples);
    for i in 0..args.samples {
        let mut rng = seeded(derive_seed(args.seed, 0, i as u64));
        let start = Permutation::random(instance.n_jobs(), &mut rng);
        let mut state =
            SearchState::new(&instance, start, u64::MAX, seeded(derive_seed(args.seed, 1, i as u64)), Vec::new())
                .map_err(|e| CliError::Instance(e.to_string()))?;
        fihc(&mut state);
        let p = probe(&instance, state.current(), args.walk_steps, &mut rng)
            .map_err(|e| CliError::Instance(e.to_string()))?;
        samples.push(LandscapeSample {
            sample: i,
            fitness: p.fitness.value(),
            neutral_degree: p.neutral_degree,
            neighborhood_size: p.neighborhood_size,
            neutral_pct: 100.0 * p.neutral_degree as f64 / p.neighborhood_size as f64,
            is_local_optimum: p.is_local_optimum,
            portal_step: p.has_portal_within,
            evaluations: p.evaluations,
        });
    }
    let count = samples.len() as f64;
    let mean_neutral_pct = samples.iter().map(|s| s.neutral_pct).sum::<f64>() / count;
    let portal_rate = samples.iter().filter(|s| s.portal_step.is_some()).count() as f64 / count;
    eprintln!(
        "{}: mean neutral degree {:.2}% of the neighborhood, portal reached from {:.0}% of optima",
        instance.name(),
        mean_neutral_pct,
        100.0 * portal_rate
    );

    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(&mut out);
            for s in &samples {
                writer.serialize(s).map_err(|e| CliError::Io(e.to_string()))?;
            }
            writer.flush()?;
        }
        Format::Json => {
            let doc = LandscapeOutput {
                instance: InstanceInfo::from(&instance),
                seed: args.seed,
                walk_steps: args.walk_steps,
                mean_neutral_pct,
                portal_rate,
                samples,
            };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let seeds = match args.time_seed {
        Some(seeds) => seeds,
        None => match InstanceSource::taillard_first(args.jobs, args.machines) {
            Some(InstanceSource::Generated { time_seed, .. }) => vec![time_seed],
            _ => {
                return Err(CliError::Usage(format!(
                    "no published instance of size {}x{}; pass --time-seed",
                    args.jobs, args.machines
                )))
            }
        },
    };
    let instances = seeds
        .iter()
        .map(|&seed| InstanceSource::Generated { jobs: args.jobs, machines: args.machines, time_seed: seed }.load())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut out = open_output(args.out.as_ref())?;
    write_instances(&mut out, &instances)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Landscape(args) => landscape(args),
        Command::Generate(args) => generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nils: {e}");
            ExitCode::from(e.code())
        }
    }
}
