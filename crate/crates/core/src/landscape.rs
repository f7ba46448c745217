//! Neutrality measurements on the insertion landscape.
//!
//! [`random_neutral_walk`] picks uniformly among all neutral neighbors after
//! a full scan, unlike the search's perturbation which takes the first
//! acceptable neighbor of a shuffled scan.

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::instance::{Instance, Time};
use crate::makespan::{evaluate, Fitness, InsertionScanner, Permutation};
use crate::neighborhood::{insert_in_place, InsertionMove};

/// Largest job count accepted by [`enumerate_plateau`].
pub const PLATEAU_ENUMERATION_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeutralityProbe {
    pub fitness: Fitness,
    pub neutral_degree: u64,
    pub better_neighbors: u64,
    pub neighborhood_size: u64,
    pub is_local_optimum: bool,
    /// Index of the first walk position adjacent to a portal, when a walk
    /// was run and found one.
    pub has_portal_within: Option<u64>,
    pub evaluations: u64,
}

/// Full classification of one solution's neighborhood.
struct Scan {
    fitness: Fitness,
    neutral: Vec<InsertionMove>,
    better: u64,
    evaluations: u64,
}

fn scan_neighborhood(
    instance: &Instance,
    perm: &Permutation,
    scanner: &mut InsertionScanner,
) -> Result<Scan, SolverError> {
    let n = instance.n_jobs();
    if n < 2 {
        return Err(SolverError::Argument(format!("neighborhood needs at least 2 jobs, got {n}")));
    }
    let fitness = evaluate(instance, perm)?;
    let mut row: Vec<Time> = vec![0; n];
    let mut neutral = Vec::new();
    let mut better = 0;
    let mut evaluations = 0;
    for from in 0..n {
        scanner.scan_into(instance, perm.as_slice(), from, &mut row);
        for (to, &value) in row.iter().enumerate() {
            let mv = InsertionMove { from, to };
            if !mv.is_canonical() {
                continue;
            }
            evaluations += 1;
            match Fitness(value).cmp(&fitness) {
                std::cmp::Ordering::Less => better += 1,
                std::cmp::Ordering::Equal => neutral.push(mv),
                std::cmp::Ordering::Greater => {}
            }
        }
    }
    Ok(Scan { fitness, neutral, better, evaluations })
}

/// Counts neutral and strictly better neighbors over the whole canonical
/// neighborhood, `(N - 1)^2` evaluations.
pub fn neutral_degree(instance: &Instance, perm: &Permutation) -> Result<NeutralityProbe, SolverError> {
    let mut scanner = InsertionScanner::new(instance);
    let scan = scan_neighborhood(instance, perm, &mut scanner)?;
    Ok(NeutralityProbe {
        fitness: scan.fitness,
        neutral_degree: scan.neutral.len() as u64,
        better_neighbors: scan.better,
        neighborhood_size: scan.evaluations,
        is_local_optimum: scan.better == 0,
        has_portal_within: None,
        evaluations: scan.evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStep {
    pub perm: Permutation,
    pub fitness: Fitness,
    pub neutral_degree: u64,
    pub portal_adjacent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeutralWalk {
    /// Visited solutions, starting with the start solution.
    pub steps: Vec<WalkStep>,
    pub evaluations: u64,
}

impl NeutralWalk {
    pub fn first_portal(&self) -> Option<u64> {
        self.steps.iter().position(|s| s.portal_adjacent).map(|i| i as u64)
    }

    pub fn len(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Walks up to `max_steps` uniformly random neutral moves from `start`.
/// Every visited solution is fully scanned; the walk stops early at a
/// solution without neutral neighbors.
pub fn random_neutral_walk<R: Rng + ?Sized>(
    instance: &Instance,
    start: &Permutation,
    max_steps: u64,
    rng: &mut R,
) -> Result<NeutralWalk, SolverError> {
    let mut scanner = InsertionScanner::new(instance);
    let mut current = start.clone();
    let mut steps = Vec::new();
    let mut evaluations = 0;
    loop {
        let scan = scan_neighborhood(instance, &current, &mut scanner)?;
        evaluations += scan.evaluations;
        steps.push(WalkStep {
            perm: current.clone(),
            fitness: scan.fitness,
            neutral_degree: scan.neutral.len() as u64,
            portal_adjacent: scan.better > 0,
        });
        if steps.len() as u64 > max_steps || scan.neutral.is_empty() {
            break;
        }
        let mv = scan.neutral[rng.random_range(0..scan.neutral.len())];
        let mut next = current.into_vec();
        insert_in_place(&mut next, mv);
        current = Permutation::from_vec_unchecked(next);
    }
    Ok(NeutralWalk { steps, evaluations })
}

/// Neutral degree of `perm` plus the first portal met by a random neutral
/// walk of at most `walk_steps` steps.
pub fn probe<R: Rng + ?Sized>(
    instance: &Instance,
    perm: &Permutation,
    walk_steps: u64,
    rng: &mut R,
) -> Result<NeutralityProbe, SolverError> {
    let walk = random_neutral_walk(instance, perm, walk_steps, rng)?;
    let mut probe = neutral_degree(instance, perm)?;
    probe.has_portal_within = walk.first_portal();
    probe.evaluations = walk.evaluations;
    Ok(probe)
}

/// Every solution reachable from `start` through neutral moves. Exhaustive;
/// restricted to tiny instances.
pub fn enumerate_plateau(instance: &Instance, start: &Permutation) -> Result<Vec<Permutation>, SolverError> {
    let n = instance.n_jobs();
    if n > PLATEAU_ENUMERATION_LIMIT {
        return Err(SolverError::Argument(format!(
            "plateau enumeration is limited to {PLATEAU_ENUMERATION_LIMIT} jobs, got {n}"
        )));
    }
    let mut scanner = InsertionScanner::new(instance);
    let mut seen: HashSet<Permutation> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    let mut out = Vec::new();
    while let Some(perm) = queue.pop_front() {
        let scan = scan_neighborhood(instance, &perm, &mut scanner)?;
        for mv in scan.neutral {
            let mut next = perm.clone().into_vec();
            insert_in_place(&mut next, mv);
            let next = Permutation::from_vec_unchecked(next);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
        out.push(perm);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_taillard;
    use crate::rng::seeded;

    #[test]
    fn flat_instance_is_fully_neutral() {
        let inst = Instance::new("flat", vec![vec![3, 3]; 4]).unwrap();
        let probe = neutral_degree(&inst, &Permutation::identity(4)).unwrap();
        assert_eq!(probe.neutral_degree, 9);
        assert_eq!(probe.neighborhood_size, 9);
        assert!(probe.is_local_optimum);
        assert_eq!(enumerate_plateau(&inst, &Permutation::identity(4)).unwrap().len(), 24);
    }

    #[test]
    fn distinct_pair_has_no_neutral_neighbor() {
        let inst = Instance::new("pair", vec![vec![2, 3], vec![4, 1]]).unwrap();
        // (0,1) -> 7, (1,0) -> 9
        let probe = neutral_degree(&inst, &Permutation::identity(2)).unwrap();
        assert_eq!(probe.neutral_degree, 0);
        assert!(probe.is_local_optimum);
        let probe = neutral_degree(&inst, &Permutation::from_vec(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(probe.better_neighbors, 1);
        assert!(!probe.is_local_optimum);
    }

    #[test]
    fn single_job_is_rejected() {
        let inst = Instance::new("one", vec![vec![1]]).unwrap();
        assert!(neutral_degree(&inst, &Permutation::identity(1)).is_err());
    }

    #[test]
    fn zero_step_walk_is_just_the_start() {
        let inst = generate_taillard(6, 3, 5).unwrap();
        let walk = random_neutral_walk(&inst, &Permutation::identity(6), 0, &mut seeded(1)).unwrap();
        assert_eq!(walk.steps.len(), 1);
        assert!(walk.is_empty());
        assert_eq!(walk.evaluations, 25);
    }

    #[test]
    fn flat_walk_runs_full_length_without_portals() {
        let inst = Instance::new("flat", vec![vec![2; 3]; 5]).unwrap();
        let walk = random_neutral_walk(&inst, &Permutation::identity(5), 12, &mut seeded(3)).unwrap();
        assert_eq!(walk.len(), 12);
        assert_eq!(walk.first_portal(), None);
    }

    #[test]
    fn plateau_limit() {
        let inst = generate_taillard(9, 2, 5).unwrap();
        assert!(enumerate_plateau(&inst, &Permutation::identity(9)).is_err());
    }
}
