//! First-improving hill climbing, neutral-walk perturbation and the NILS
//! outer loop, all under an exact evaluation budget.
//!
//! Every candidate fitness produced counts as one evaluation, whether it
//! came from a full makespan computation or from one entry of an
//! accelerated insertion scan. Neighbor fitnesses are served from a per-row
//! cache: the first candidate drawn with a given removal position triggers
//! one O(N·M) scan of all its reinsertions, later candidates sharing that
//! position are free until the current solution changes.

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::instance::{Instance, Time};
use crate::makespan::{makespan_with, Fitness, InsertionScanner, Permutation};
use crate::neighborhood::{insert_in_place, random_exchange, InsertionMove, ScanOrder};
use crate::rng::{seeded, SearchRng};

pub const DEFAULT_KICK_STRENGTH: usize = 3;
pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NilsConfig {
    /// Maximal number of neutral steps per perturbation.
    pub mns: u64,
    /// Number of random exchanges applied by a kick.
    pub kick_strength: usize,
    /// Total number of evaluations allowed.
    pub budget: u64,
    pub seed: u64,
    /// Evaluation counts at which best-so-far is sampled. `None` selects
    /// [`default_checkpoints`].
    pub checkpoints: Option<Vec<u64>>,
}

impl Default for NilsConfig {
    fn default() -> Self {
        Self { mns: 0, kick_strength: DEFAULT_KICK_STRENGTH, budget: DEFAULT_BUDGET, seed: 0, checkpoints: None }
    }
}

impl NilsConfig {
    pub fn new(mns: u64, budget: u64, seed: u64) -> Self {
        Self { mns, budget, seed, ..Self::default() }
    }

    pub fn with_kick_strength(mut self, kick_strength: usize) -> Self {
        self.kick_strength = kick_strength;
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<u64>) -> Self {
        self.checkpoints = Some(checkpoints);
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.budget < 1 {
            return Err(SolverError::Argument("budget must be at least 1".into()));
        }
        if self.kick_strength < 1 {
            return Err(SolverError::Argument("kick strength must be at least 1".into()));
        }
        if let Some(points) = &self.checkpoints {
            check_checkpoints(points, self.budget)?;
        }
        Ok(())
    }

    pub fn effective_checkpoints(&self) -> Vec<u64> {
        self.checkpoints.clone().unwrap_or_else(|| default_checkpoints(self.budget))
    }
}

pub(crate) fn check_checkpoints(points: &[u64], budget: u64) -> Result<(), SolverError> {
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SolverError::Argument("checkpoints must be strictly ascending".into()));
    }
    if points.iter().any(|&c| c == 0 || c > budget) {
        return Err(SolverError::Argument(format!("checkpoints must lie in [1, {budget}]")));
    }
    Ok(())
}

/// 1, 2, 5, 10, 20, 50, ... below `budget`, then `budget` itself.
pub fn default_checkpoints(budget: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for factor in [1, 2, 5] {
            let Some(point) = decade.checked_mul(factor) else { break 'outer };
            if point >= budget {
                break 'outer;
            }
            out.push(point);
        }
        let Some(next) = decade.checked_mul(10) else { break };
        decade = next;
    }
    if budget > 0 {
        out.push(budget);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub evals: u64,
    pub best: Fitness,
}

/// What changed the current solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Improve,
    Neutral,
    Portal,
    Kick,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: StepKind,
    pub before: Fitness,
    pub after: Fitness,
    pub evals_used: u64,
}

/// Mutable state of one run: current and best solutions, the evaluation
/// counter and the generator.
pub struct SearchState<'a> {
    instance: &'a Instance,
    current: Permutation,
    current_fitness: Fitness,
    best: Permutation,
    best_fitness: Fitness,
    evals_used: u64,
    budget: u64,
    rng: SearchRng,
    // Lowest fitness among all evaluated candidates; equals best_fitness
    // because every candidate that beats the best is accepted.
    min_seen: Fitness,
    checkpoints: Vec<u64>,
    next_checkpoint: usize,
    trajectory: Vec<Checkpoint>,
    trace: Option<Vec<TraceEvent>>,
    scan: ScanOrder,
    scanner: InsertionScanner,
    cache: Vec<Time>,
    cache_stamp: Vec<u64>,
    generation: u64,
    row: Vec<Time>,
}

impl<'a> SearchState<'a> {
    /// Evaluates `initial` (one evaluation) and makes it both current and best.
    pub fn new(
        instance: &'a Instance,
        initial: Permutation,
        budget: u64,
        rng: SearchRng,
        checkpoints: Vec<u64>,
    ) -> Result<Self, SolverError> {
        let n = instance.n_jobs();
        if initial.len() != n {
            return Err(SolverError::Dimension { expected: n, got: initial.len() });
        }
        if budget < 1 {
            return Err(SolverError::Argument("budget must be at least 1".into()));
        }
        check_checkpoints(&checkpoints, budget)?;
        let scan = ScanOrder::new(n)?;
        let mut row = vec![0; instance.n_machines()];
        let fitness = Fitness(makespan_with(instance, initial.as_slice(), &mut row));
        let mut state = Self {
            instance,
            best: initial.clone(),
            current: initial,
            current_fitness: fitness,
            best_fitness: fitness,
            evals_used: 0,
            budget,
            rng,
            min_seen: fitness,
            checkpoints,
            next_checkpoint: 0,
            trajectory: Vec::new(),
            trace: None,
            scan,
            scanner: InsertionScanner::new(instance),
            cache: vec![0; n * n],
            cache_stamp: vec![u64::MAX; n],
            generation: 0,
            row,
        };
        state.count(fitness);
        Ok(state)
    }

    /// Records every change of the current solution from now on.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn current(&self) -> &Permutation {
        &self.current
    }

    pub fn current_fitness(&self) -> Fitness {
        self.current_fitness
    }

    pub fn best(&self) -> &Permutation {
        &self.best
    }

    pub fn best_fitness(&self) -> Fitness {
        self.best_fitness
    }

    pub fn evals_used(&self) -> u64 {
        self.evals_used
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn is_exhausted(&self) -> bool {
        self.evals_used >= self.budget
    }

    pub fn trajectory(&self) -> &[Checkpoint] {
        &self.trajectory
    }

    fn count(&mut self, fitness: Fitness) {
        debug_assert!(self.evals_used < self.budget);
        self.evals_used += 1;
        self.min_seen = self.min_seen.min(fitness);
        while let Some(&point) = self.checkpoints.get(self.next_checkpoint) {
            if point > self.evals_used {
                break;
            }
            self.trajectory.push(Checkpoint { evals: point, best: self.min_seen });
            self.next_checkpoint += 1;
        }
    }

    /// Fitness of the insertion neighbor `mv`, or `None` once the budget is spent.
    #[inline]
    fn evaluate_move(&mut self, mv: InsertionMove) -> Option<Fitness> {
        if self.is_exhausted() {
            return None;
        }
        let n = self.current.len();
        if self.cache_stamp[mv.from] != self.generation {
            let out = &mut self.cache[mv.from * n..(mv.from + 1) * n];
            self.scanner.scan_into(self.instance, self.current.as_slice(), mv.from, out);
            self.cache_stamp[mv.from] = self.generation;
        }
        let fitness = Fitness(self.cache[mv.from * n + mv.to]);
        self.count(fitness);
        Some(fitness)
    }

    fn replace_current(&mut self, kind: StepKind, fitness: Fitness) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent { kind, before: self.current_fitness, after: fitness, evals_used: self.evals_used });
        }
        self.current_fitness = fitness;
        self.generation += 1;
        if fitness < self.best_fitness {
            self.best_fitness = fitness;
            self.best.clone_from(&self.current);
        }
    }

    fn commit(&mut self, mv: InsertionMove, fitness: Fitness, kind: StepKind) {
        insert_in_place(self.current.as_mut_slice(), mv);
        self.replace_current(kind, fitness);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FihcOutcome {
    LocalOptimum,
    BudgetExhausted,
}

/// First-improving hill climbing: scan the neighborhood in a fresh random
/// order, move to the first strictly better neighbor, repeat until a full
/// scan finds none.
pub fn fihc(state: &mut SearchState<'_>) -> FihcOutcome {
    loop {
        state.scan.restart();
        let mut improved = false;
        while let Some(mv) = state.scan.draw(&mut state.rng) {
            let Some(fitness) = state.evaluate_move(mv) else {
                return FihcOutcome::BudgetExhausted;
            };
            if fitness < state.current_fitness {
                state.commit(mv, fitness, StepKind::Improve);
                improved = true;
                break;
            }
        }
        if !improved {
            return FihcOutcome::LocalOptimum;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NwpKind {
    PortalFound,
    Kicked,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NwpOutcome {
    pub kind: NwpKind,
    pub neutral_steps_taken: u64,
    /// Evaluations consumed by the walk itself; the kick's own evaluation
    /// is not included.
    pub evals_spent: u64,
}

/// Neutral walk-based perturbation.
///
/// Up to `mns` times, scan a freshly shuffled neighborhood for the first
/// neighbor no worse than the current solution. A strictly better one is a
/// portal: move there and stop. An equal one is a neutral step. A scan that
/// finds neither means the solution has no neutral neighbor and ends the
/// walk. Without a portal the solution is kicked.
pub fn nwp(state: &mut SearchState<'_>, config: &NilsConfig) -> NwpOutcome {
    let start_evals = state.evals_used;
    let mut steps = 0;
    let outcome = |kind, steps, state: &SearchState<'_>| NwpOutcome {
        kind,
        neutral_steps_taken: steps,
        evals_spent: state.evals_used - start_evals,
    };
    'walk: while steps < config.mns {
        state.scan.restart();
        while let Some(mv) = state.scan.draw(&mut state.rng) {
            let Some(fitness) = state.evaluate_move(mv) else {
                return outcome(NwpKind::BudgetExhausted, steps, state);
            };
            if fitness < state.current_fitness {
                state.commit(mv, fitness, StepKind::Portal);
                return outcome(NwpKind::PortalFound, steps, state);
            }
            if fitness == state.current_fitness {
                state.commit(mv, fitness, StepKind::Neutral);
                steps += 1;
                continue 'walk;
            }
        }
        break;
    }
    let walked = outcome(NwpKind::Kicked, steps, state);
    if kick(state, config).is_none() {
        return NwpOutcome { kind: NwpKind::BudgetExhausted, ..walked };
    }
    walked
}

/// Applies `kick_strength` independent random exchanges to the current
/// solution and accepts the result unconditionally. Costs one evaluation;
/// returns `None` without touching the state if the budget is spent.
pub fn kick(state: &mut SearchState<'_>, config: &NilsConfig) -> Option<Fitness> {
    if state.is_exhausted() {
        return None;
    }
    let n = state.current.len();
    let order = state.current.as_mut_slice();
    for _ in 0..config.kick_strength {
        let mv = random_exchange(n, &mut state.rng);
        order.swap(mv.a, mv.b);
    }
    let fitness = Fitness(makespan_with(state.instance, state.current.as_slice(), &mut state.row));
    state.count(fitness);
    state.replace_current(StepKind::Kick, fitness);
    Some(fitness)
}

/// Per-run trace and counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub mns: u64,
    pub kick_strength: usize,
    pub budget: u64,
    pub evals_used: u64,
    pub initial_fitness: Fitness,
    pub final_best: Fitness,
    pub best_permutation: Permutation,
    pub trajectory: Vec<Checkpoint>,
    pub nwp_invocations: u64,
    pub portals_found: u64,
    pub kicks: u64,
    pub budget_exhausted_walks: u64,
    /// Evaluations spent in walks that ended with a kick.
    pub lost_evals: u64,
    pub neutral_steps_total: u64,
    pub fihc_calls: u64,
}

impl RunReport {
    /// Share of perturbations that reached a portal, in percent.
    pub fn portal_percentage(&self) -> f64 {
        if self.nwp_invocations == 0 {
            0.0
        } else {
            100.0 * self.portals_found as f64 / self.nwp_invocations as f64
        }
    }
}

/// Runs NILS: random initial solution, hill climbing, then alternating
/// neutral-walk perturbation and hill climbing until the budget is spent.
/// Returns the best solution evaluated along the way.
pub fn run_nils(instance: &Instance, config: &NilsConfig) -> Result<RunReport, SolverError> {
    config.validate()?;
    if instance.n_jobs() < 2 {
        return Err(SolverError::Argument(format!("search needs at least 2 jobs, instance has {}", instance.n_jobs())));
    }
    let mut rng = seeded(config.seed);
    let initial = Permutation::random(instance.n_jobs(), &mut rng);
    let mut state = SearchState::new(instance, initial, config.budget, rng, config.effective_checkpoints())?;
    let initial_fitness = state.current_fitness;

    let mut report = RunReport {
        seed: config.seed,
        mns: config.mns,
        kick_strength: config.kick_strength,
        budget: config.budget,
        evals_used: 0,
        initial_fitness,
        final_best: initial_fitness,
        best_permutation: state.best.clone(),
        trajectory: Vec::new(),
        nwp_invocations: 0,
        portals_found: 0,
        kicks: 0,
        budget_exhausted_walks: 0,
        lost_evals: 0,
        neutral_steps_total: 0,
        fihc_calls: 0,
    };

    if !state.is_exhausted() {
        report.fihc_calls += 1;
        fihc(&mut state);
    }
    while !state.is_exhausted() {
        let outcome = nwp(&mut state, config);
        report.nwp_invocations += 1;
        report.neutral_steps_total += outcome.neutral_steps_taken;
        match outcome.kind {
            NwpKind::PortalFound => report.portals_found += 1,
            NwpKind::Kicked => {
                report.kicks += 1;
                report.lost_evals += outcome.evals_spent;
            }
            NwpKind::BudgetExhausted => {
                report.budget_exhausted_walks += 1;
                break;
            }
        }
        if state.is_exhausted() {
            break;
        }
        report.fihc_calls += 1;
        fihc(&mut state);
    }

    debug_assert_eq!(state.min_seen, state.best_fitness);
    report.evals_used = state.evals_used;
    report.final_best = state.best_fitness;
    report.best_permutation = state.best.clone();
    report.trajectory = state.trajectory;
    Ok(report)
}
