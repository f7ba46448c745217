//! Makespan evaluation.
//!
//! [`evaluate`] is the reference completion-time recursion. [`InsertionScanner`]
//! evaluates every reinsertion of one job in O(N·M) using head and tail
//! completion arrays; its results are bit-identical to the reference.
//! [`simulate_schedule`] is an event-driven oracle used by tests.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::instance::{Instance, Time};

/// Makespan value. Integral, so neutrality is plain equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fitness(pub Time);

impl Fitness {
    pub fn value(self) -> Time {
        self.0
    }
}

impl fmt::Display for Fitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A job sequence; each job index in `0..n` appears exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self(order)
    }

    pub fn from_vec(order: Vec<usize>) -> Result<Self, SolverError> {
        let mut seen = vec![false; order.len()];
        for &job in &order {
            if job >= order.len() || seen[job] {
                return Err(SolverError::Argument(format!("{order:?} is not a permutation of 0..{}", order.len())));
            }
            seen[job] = true;
        }
        Ok(Self(order))
    }

    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        debug_assert!(Self::from_vec(order.clone()).is_ok());
        Self(order)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [usize] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = SolverError;

    fn try_from(order: Vec<usize>) -> Result<Self, Self::Error> {
        Self::from_vec(order)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

fn check_len(instance: &Instance, perm: &Permutation) -> Result<(), SolverError> {
    if perm.len() != instance.n_jobs() {
        return Err(SolverError::Dimension { expected: instance.n_jobs(), got: perm.len() });
    }
    Ok(())
}

/// Makespan of a job order, using `row` (length M) as scratch.
#[inline]
pub(crate) fn makespan_with(instance: &Instance, order: &[usize], row: &mut [Time]) -> Time {
    row.fill(0);
    for &job in order {
        let times = instance.job_times(job);
        let mut prev = 0;
        for (c, &p) in row.iter_mut().zip(times) {
            prev = (*c).max(prev) + p;
            *c = prev;
        }
    }
    row.last().copied().unwrap_or(0)
}

/// C_max of `perm` via C[k][j] = max(C[k-1][j], C[k][j-1]) + p(π(k), j).
pub fn evaluate(instance: &Instance, perm: &Permutation) -> Result<Fitness, SolverError> {
    check_len(instance, perm)?;
    let mut row = vec![0; instance.n_machines()];
    Ok(Fitness(makespan_with(instance, perm.as_slice(), &mut row)))
}

/// Computes C_max by simulating machine and job availability as discrete
/// events. Slow; exists to cross-check [`evaluate`].
pub fn simulate_schedule(instance: &Instance, perm: &Permutation) -> Result<Fitness, SolverError> {
    check_len(instance, perm)?;
    let order = perm.as_slice();
    let n = order.len();
    let m = instance.n_machines();
    // Next sequence position each machine will serve.
    let mut machine_next = vec![0usize; m];
    let mut machine_busy = vec![false; m];
    // Number of machines each position has finished.
    let mut stages_done = vec![0usize; n];
    let mut events: BinaryHeap<Reverse<(Time, usize, usize)>> = BinaryHeap::new();
    let mut now = 0;
    let mut last_finish = 0;
    loop {
        for machine in 0..m {
            if machine_busy[machine] {
                continue;
            }
            let pos = machine_next[machine];
            if pos < n && stages_done[pos] == machine {
                machine_busy[machine] = true;
                let finish = now + instance.p(order[pos], machine);
                events.push(Reverse((finish, pos, machine)));
            }
        }
        let Some(Reverse((time, pos, machine))) = events.pop() else {
            break;
        };
        now = time;
        last_finish = last_finish.max(time);
        machine_busy[machine] = false;
        machine_next[machine] += 1;
        stages_done[pos] = machine + 1;
    }
    Ok(Fitness(last_finish))
}

/// Reusable buffers for accelerated insertion scans.
#[derive(Debug, Clone)]
pub struct InsertionScanner {
    n_machines: usize,
    heads: Vec<Time>,
    tails: Vec<Time>,
    rest: Vec<usize>,
}

impl InsertionScanner {
    pub fn new(instance: &Instance) -> Self {
        let n = instance.n_jobs();
        let m = instance.n_machines();
        Self { n_machines: m, heads: vec![0; n * m], tails: vec![0; n * m], rest: Vec::with_capacity(n) }
    }

    /// Fills `out[q]` with the makespan of `order` after moving the job at
    /// `removed` to position `q`, for every `q` in `0..order.len()`.
    pub fn scan_into(&mut self, instance: &Instance, order: &[usize], removed: usize, out: &mut [Time]) {
        let n = order.len();
        let m = self.n_machines;
        debug_assert!(removed < n && out.len() == n);
        let moved = instance.job_times(order[removed]);
        let len = n - 1;
        self.rest.clear();
        self.rest.extend(order.iter().enumerate().filter(|&(k, _)| k != removed).map(|(_, &j)| j));

        // heads[t]: completion times of the first t remaining jobs (row 0 = zeros).
        // tails[t]: tail lengths of remaining jobs t.. (row len = zeros).
        let heads = &mut self.heads[..n * m];
        heads[..m].fill(0);
        for (t, &job) in self.rest.iter().enumerate() {
            let times = instance.job_times(job);
            let (done, next) = heads.split_at_mut((t + 1) * m);
            let prev_row = &done[t * m..];
            let mut prev = 0;
            for j in 0..m {
                prev = prev.max(prev_row[j]) + times[j];
                next[j] = prev;
            }
        }
        let tails = &mut self.tails[..n * m];
        tails[len * m..].fill(0);
        for t in (0..len).rev() {
            let times = instance.job_times(self.rest[t]);
            let (cur, after) = tails.split_at_mut((t + 1) * m);
            let cur = &mut cur[t * m..];
            let mut prev = 0;
            for j in (0..m).rev() {
                prev = prev.max(after[j]) + times[j];
                cur[j] = prev;
            }
        }

        for (t, slot) in out.iter_mut().enumerate() {
            let head = &heads[t * m..(t + 1) * m];
            let tail = &tails[t * m..(t + 1) * m];
            let mut prev = 0;
            let mut cmax = 0;
            for j in 0..m {
                prev = prev.max(head[j]) + moved[j];
                cmax = cmax.max(prev + tail[j]);
            }
            *slot = cmax;
        }
    }
}

/// Makespan of every reinsertion of the job at `removed_pos`; entry `q` is the
/// neighbor with that job moved to position `q`.
pub fn evaluate_insertion_scan(
    instance: &Instance,
    perm: &Permutation,
    removed_pos: usize,
) -> Result<Vec<Fitness>, SolverError> {
    check_len(instance, perm)?;
    if removed_pos >= perm.len() {
        return Err(SolverError::Argument(format!("position {removed_pos} out of range for {} jobs", perm.len())));
    }
    let mut scanner = InsertionScanner::new(instance);
    let mut out = vec![0; perm.len()];
    scanner.scan_into(instance, perm.as_slice(), removed_pos, &mut out);
    Ok(out.into_iter().map(Fitness).collect())
}
