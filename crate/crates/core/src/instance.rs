//! Permutation flowshop instances: storage, validation, Taillard-format I/O
//! and Taillard's instance generator.
//!
//! Processing times are stored job-major (`proc_times[job][machine]`), the
//! transpose of the on-disk layout, because every hot loop walks one job's
//! machine sequence.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::InstanceError;

/// Abstract time unit for processing times and completion dates.
pub type Time = i64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    name: String,
    n_jobs: usize,
    n_machines: usize,
    proc_times: Vec<Vec<Time>>,
    time_seed: Option<u64>,
    best_known: Option<Time>,
    lower_bound: Option<Time>,
}

impl Instance {
    /// Builds an instance from a job-major matrix, rejecting anything that
    /// [`validate`] would flag.
    pub fn new(name: impl Into<String>, proc_times: Vec<Vec<Time>>) -> Result<Self, InstanceError> {
        let n_jobs = proc_times.len();
        let n_machines = proc_times.first().map_or(0, Vec::len);
        let instance = Self::from_parts_unchecked(name, n_jobs, n_machines, proc_times);
        let violations = validate(&instance);
        if let Some(first) = violations.first() {
            return Err(InstanceError::Invalid(first.to_string()));
        }
        Ok(instance)
    }

    /// Stores the given parts as-is. Solver entry points assume a valid
    /// instance; use [`validate`] before handing one of these to them.
    pub fn from_parts_unchecked(
        name: impl Into<String>,
        n_jobs: usize,
        n_machines: usize,
        proc_times: Vec<Vec<Time>>,
    ) -> Self {
        Self { name: name.into(), n_jobs, n_machines, proc_times, time_seed: None, best_known: None, lower_bound: None }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_time_seed(mut self, seed: Option<u64>) -> Self {
        self.time_seed = seed;
        self
    }

    pub fn with_best_known(mut self, value: Option<Time>) -> Self {
        self.best_known = value;
        self
    }

    pub fn with_lower_bound(mut self, value: Option<Time>) -> Self {
        self.lower_bound = value;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_jobs(&self) -> usize {
        self.n_jobs
    }

    pub fn n_machines(&self) -> usize {
        self.n_machines
    }

    pub fn time_seed(&self) -> Option<u64> {
        self.time_seed
    }

    pub fn best_known(&self) -> Option<Time> {
        self.best_known
    }

    pub fn lower_bound(&self) -> Option<Time> {
        self.lower_bound
    }

    /// Processing time of `job` on `machine`.
    #[inline]
    pub fn p(&self, job: usize, machine: usize) -> Time {
        self.proc_times[job][machine]
    }

    /// The machine sequence of one job.
    #[inline]
    pub fn job_times(&self, job: usize) -> &[Time] {
        &self.proc_times[job]
    }

    pub fn proc_times(&self) -> &[Vec<Time>] {
        &self.proc_times
    }

    /// Largest total load on a single machine.
    pub fn machine_load_bound(&self) -> Time {
        (0..self.n_machines).map(|j| self.proc_times.iter().map(|row| row[j]).sum::<Time>()).max().unwrap_or(0)
    }

    /// Longest single job.
    pub fn job_length_bound(&self) -> Time {
        self.proc_times.iter().map(|row| row.iter().sum::<Time>()).max().unwrap_or(0)
    }
}

/// A violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoJobs,
    NoMachines,
    JobCount { expected: usize, got: usize },
    RowLength { job: usize, expected: usize, got: usize },
    Negative { job: usize, machine: usize, value: Time },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoJobs => write!(f, "instance has no jobs"),
            Violation::NoMachines => write!(f, "instance has no machines"),
            Violation::JobCount { expected, got } => {
                write!(f, "expected {expected} job rows, found {got}")
            }
            Violation::RowLength { job, expected, got } => {
                write!(f, "job {job} has {got} processing times, expected {expected}")
            }
            Violation::Negative { job, machine, value } => {
                write!(f, "negative processing time {value} for job {job} on machine {machine}")
            }
        }
    }
}

impl Violation {
    pub fn is_dimension(&self) -> bool {
        matches!(self, Violation::JobCount { .. } | Violation::RowLength { .. })
    }
}

/// Lists every violated invariant; an empty list means the instance is usable.
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if instance.n_jobs == 0 {
        out.push(Violation::NoJobs);
    }
    if instance.n_machines == 0 {
        out.push(Violation::NoMachines);
    }
    if instance.proc_times.len() != instance.n_jobs {
        out.push(Violation::JobCount { expected: instance.n_jobs, got: instance.proc_times.len() });
    }
    for (job, row) in instance.proc_times.iter().enumerate() {
        if row.len() != instance.n_machines {
            out.push(Violation::RowLength { job, expected: instance.n_machines, got: row.len() });
        }
        for (machine, &value) in row.iter().enumerate() {
            if value < 0 {
                out.push(Violation::Negative { job, machine, value });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Taillard generator
// ---------------------------------------------------------------------------

const LCG_MODULUS: i64 = 2_147_483_647;
const LCG_MULTIPLIER: i64 = 16_807;
const LCG_QUOTIENT: i64 = 127_773;
const LCG_REMAINDER: i64 = 2_836;

/// Taillard's portable linear congruential generator (Schrage decomposition).
#[derive(Debug, Clone)]
pub struct TaillardRng {
    seed: i64,
}

impl TaillardRng {
    pub fn new(seed: u64) -> Result<Self, InstanceError> {
        if seed == 0 || seed > (LCG_MODULUS - 1) as u64 {
            return Err(InstanceError::Argument(format!("time seed {seed} outside [1, {}]", LCG_MODULUS - 1)));
        }
        Ok(Self { seed: seed as i64 })
    }

    /// Advances the state and maps it to an integer in `[low, high]`.
    pub fn next_in(&mut self, low: i64, high: i64) -> i64 {
        let k = self.seed / LCG_QUOTIENT;
        self.seed = LCG_MULTIPLIER * (self.seed % LCG_QUOTIENT) - k * LCG_REMAINDER;
        if self.seed < 0 {
            self.seed += LCG_MODULUS;
        }
        let unit = self.seed as f64 / LCG_MODULUS as f64;
        low + (unit * (high - low + 1) as f64) as i64
    }
}

/// Generates a Taillard instance. Values are drawn machine by machine, job
/// by job, each in `[1, 99]`, exactly as the published benchmark files.
pub fn generate_taillard(n_jobs: usize, n_machines: usize, time_seed: u64) -> Result<Instance, InstanceError> {
    if n_jobs == 0 || n_machines == 0 {
        return Err(InstanceError::Argument("jobs and machines must be positive".into()));
    }
    let mut rng = TaillardRng::new(time_seed)?;
    let mut proc_times = vec![vec![0; n_machines]; n_jobs];
    for machine in 0..n_machines {
        for row in proc_times.iter_mut() {
            row[machine] = rng.next_in(1, 99);
        }
    }
    Ok(Instance::from_parts_unchecked(
        format!("taillard_{n_jobs}x{n_machines}_{time_seed}"),
        n_jobs,
        n_machines,
        proc_times,
    )
    .with_time_seed(Some(time_seed)))
}

/// The first benchmark instance of each size: (name, jobs, machines, time
/// seed, best known makespan).
pub const TAILLARD_FIRST: &[(&str, usize, usize, u64, Time)] = &[
    ("ta001", 20, 5, 873_654_221, 1278),
    ("ta011", 20, 10, 587_595_453, 1582),
    ("ta021", 20, 20, 479_340_445, 2297),
    ("ta031", 50, 5, 1_328_042_058, 2724),
    ("ta041", 50, 10, 1_958_948_863, 2991),
    ("ta051", 50, 20, 1_539_989_115, 3847),
    ("ta061", 100, 5, 896_678_084, 5493),
    ("ta071", 100, 10, 1_179_439_976, 5770),
    ("ta081", 100, 20, 1_122_278_347, 6202),
    ("ta091", 200, 10, 471_503_978, 10862),
    ("ta101", 200, 20, 1_215_892_992, 11181),
    ("ta111", 500, 20, 1_368_624_604, 26059),
];

/// Regenerates the first Taillard instance of the given size.
pub fn taillard_first(n_jobs: usize, n_machines: usize) -> Option<Instance> {
    let &(name, n, m, seed, best) = TAILLARD_FIRST.iter().find(|&&(_, n, m, _, _)| n == n_jobs && m == n_machines)?;
    let instance = generate_taillard(n, m, seed).ok()?;
    Some(instance.with_name(name).with_best_known(Some(best)))
}

// ---------------------------------------------------------------------------
// Taillard text format
// ---------------------------------------------------------------------------

fn is_label(line: &str) -> bool {
    line.trim_start().chars().next().is_some_and(char::is_alphabetic)
}

fn parse_ints(line: &str, line_no: usize) -> Result<Vec<Time>, InstanceError> {
    line.split_whitespace()
        .map(|tok| tok.parse::<Time>().map_err(|_| InstanceError::Token { line: line_no, token: tok.to_string() }))
        .collect()
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last_line: 0 }
    }

    /// Next non-blank line with its 1-based number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last_line = i + 1;
            if !line.trim().is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }
}

fn positive(value: Time) -> Option<Time> {
    (value > 0).then_some(value)
}

/// Parses the next instance, or returns `Ok(None)` at end of input.
fn parse_next(lines: &mut Lines<'_>, ordinal: usize) -> Result<Option<Instance>, InstanceError> {
    let (header_line, header) = loop {
        match lines.next_content() {
            None => return Ok(None),
            Some((_, line)) if is_label(line) => continue,
            Some(found) => break found,
        }
    };
    let fields = parse_ints(header, header_line)?;
    if !(2..=5).contains(&fields.len()) {
        return Err(InstanceError::Header {
            line: header_line,
            reason: format!("expected 2 to 5 integers, found {}", fields.len()),
        });
    }
    if fields[0] < 1 || fields[1] < 1 {
        return Err(InstanceError::Header {
            line: header_line,
            reason: "job and machine counts must be positive".into(),
        });
    }
    let n_jobs = fields[0] as usize;
    let n_machines = fields[1] as usize;
    let seed = fields.get(2).copied().and_then(positive).map(|s| s as u64);
    let upper = fields.get(3).copied().and_then(positive);
    let lower = fields.get(4).copied().and_then(positive);

    match lines.next_content() {
        Some((_, line)) if is_label(line) => {}
        Some((line_no, _)) => {
            return Err(InstanceError::Header {
                line: line_no,
                reason: "expected a marker line before the processing times".into(),
            })
        }
        None => {
            return Err(InstanceError::Header {
                line: lines.last_line,
                reason: "unexpected end of input after header".into(),
            })
        }
    }

    let mut proc_times = vec![Vec::with_capacity(n_machines); n_jobs];
    for machine in 0..n_machines {
        let (line_no, line) = match lines.next_content() {
            Some((line_no, line)) if !is_label(line) => (line_no, line),
            other => {
                return Err(InstanceError::Dimension {
                    line: other.map_or(lines.last_line, |(n, _)| n),
                    reason: format!("expected {n_machines} machine rows, found {machine}"),
                })
            }
        };
        let row = parse_ints(line, line_no)?;
        if row.len() != n_jobs {
            return Err(InstanceError::Dimension {
                line: line_no,
                reason: format!("expected {n_jobs} values in machine row, found {}", row.len()),
            });
        }
        for (job, value) in row.into_iter().enumerate() {
            proc_times[job].push(value);
        }
    }

    let name = match seed {
        Some(s) => format!("taillard_{n_jobs}x{n_machines}_{s}"),
        None => format!("instance_{n_jobs}x{n_machines}_{ordinal}"),
    };
    Ok(Some(
        Instance::from_parts_unchecked(name, n_jobs, n_machines, proc_times)
            .with_time_seed(seed)
            .with_best_known(upper)
            .with_lower_bound(lower),
    ))
}

/// Parses every instance in a Taillard-format text.
pub fn parse_instances_str(text: &str) -> Result<Vec<Instance>, InstanceError> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    while let Some(instance) = parse_next(&mut lines, out.len())? {
        out.push(instance);
    }
    Ok(out)
}

/// Parses the `index`-th instance (0-based) of a Taillard-format text.
/// Instances after the requested one are not read.
pub fn parse_instance_str(text: &str, index: usize) -> Result<Instance, InstanceError> {
    let mut lines = Lines::new(text);
    let mut seen = 0;
    while let Some(instance) = parse_next(&mut lines, seen)? {
        if seen == index {
            return Ok(instance);
        }
        seen += 1;
    }
    Err(InstanceError::OutOfRange { index, available: seen })
}

pub fn parse_instance<R: Read>(mut source: R, index: usize) -> Result<Instance, InstanceError> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| InstanceError::Io(e.to_string()))?;
    parse_instance_str(&text, index)
}

pub fn parse_instances<R: Read>(mut source: R) -> Result<Vec<Instance>, InstanceError> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| InstanceError::Io(e.to_string()))?;
    parse_instances_str(&text)
}

/// Writes one instance in Taillard layout (machines as rows). Absent header
/// fields are written as 0, which the parser reads back as absent.
pub fn write_instance<W: Write>(out: &mut W, instance: &Instance) -> std::io::Result<()> {
    writeln!(out, "number of jobs, number of machines, initial seed, upper bound and lower bound :")?;
    write!(out, "{:>12}{:>12}{:>12}", instance.n_jobs, instance.n_machines, instance.time_seed.unwrap_or(0))?;
    if instance.best_known.is_some() || instance.lower_bound.is_some() {
        write!(out, "{:>12}{:>12}", instance.best_known.unwrap_or(0), instance.lower_bound.unwrap_or(0))?;
    }
    writeln!(out)?;
    writeln!(out, "processing times :")?;
    for machine in 0..instance.n_machines {
        let row: Vec<String> = instance.proc_times.iter().map(|job| format!("{:>3}", job[machine])).collect();
        writeln!(out, "{}", row.join(""))?;
    }
    Ok(())
}

pub fn write_instances<W: Write>(out: &mut W, instances: &[Instance]) -> std::io::Result<()> {
    for instance in instances {
        write_instance(out, instance)?;
    }
    Ok(())
}
