//! Insertion and exchange moves.
//!
//! The canonical insertion neighborhood keeps `(i - 1 -> i)` and drops
//! `(i -> i - 1)`, since both produce the same adjacent transposition. What
//! remains has exactly `(n - 1)^2` moves yielding pairwise distinct neighbors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::makespan::Permutation;

/// Remove the job at `from` and reinsert it at `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InsertionMove {
    pub from: usize,
    pub to: usize,
}

impl InsertionMove {
    pub fn new(from: usize, to: usize) -> Self {
        Self { from, to }
    }

    pub fn inverse(self) -> Self {
        Self { from: self.to, to: self.from }
    }

    pub fn is_canonical(self) -> bool {
        self.from != self.to && self.to + 1 != self.from
    }
}

/// Swap the jobs at two positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeMove {
    pub a: usize,
    pub b: usize,
}

impl ExchangeMove {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }
}

#[inline]
pub(crate) fn insert_in_place(order: &mut [usize], mv: InsertionMove) {
    if mv.from < mv.to {
        order[mv.from..=mv.to].rotate_left(1);
    } else {
        order[mv.to..=mv.from].rotate_right(1);
    }
}

fn check_positions(n: usize, a: usize, b: usize) -> Result<(), SolverError> {
    if a >= n || b >= n {
        return Err(SolverError::Argument(format!("positions ({a}, {b}) out of range for {n} jobs")));
    }
    if a == b {
        return Err(SolverError::Argument(format!("move positions must differ, got {a} twice")));
    }
    Ok(())
}

/// Relocates the job at `from` to `to`; jobs in between shift one slot
/// toward `from`.
pub fn apply_insertion(perm: &Permutation, mv: InsertionMove) -> Result<Permutation, SolverError> {
    check_positions(perm.len(), mv.from, mv.to)?;
    let mut out = perm.clone();
    insert_in_place(out.as_mut_slice(), mv);
    Ok(out)
}

pub fn apply_exchange(perm: &Permutation, mv: ExchangeMove) -> Result<Permutation, SolverError> {
    check_positions(perm.len(), mv.a, mv.b)?;
    let mut out = perm.clone();
    out.as_mut_slice().swap(mv.a, mv.b);
    Ok(out)
}

pub fn canonical_insertion_moves(n: usize) -> Result<Vec<InsertionMove>, SolverError> {
    if n < 2 {
        return Err(SolverError::Argument(format!("insertion neighborhood needs at least 2 jobs, got {n}")));
    }
    let mut moves = Vec::with_capacity((n - 1) * (n - 1));
    for from in 0..n {
        for to in 0..n {
            let mv = InsertionMove { from, to };
            if mv.is_canonical() {
                moves.push(mv);
            }
        }
    }
    Ok(moves)
}

/// A random-order pass over the canonical neighborhood.
///
/// Moves are drawn lazily with Fisher-Yates steps, so a pass that stops
/// early (first improvement) only pays for the moves it consumed. Every pass
/// started with [`ScanOrder::restart`] is an independent uniform shuffle.
#[derive(Debug, Clone)]
pub struct ScanOrder {
    moves: Vec<InsertionMove>,
    drawn: usize,
}

impl ScanOrder {
    pub fn new(n: usize) -> Result<Self, SolverError> {
        Ok(Self { moves: canonical_insertion_moves(n)?, drawn: 0 })
    }

    pub fn restart(&mut self) {
        self.drawn = 0;
    }

    /// Next move of the current pass, or `None` once every move was drawn.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<InsertionMove> {
        let len = self.moves.len();
        if self.drawn == len {
            return None;
        }
        let pick = rng.random_range(self.drawn..len);
        self.moves.swap(self.drawn, pick);
        self.drawn += 1;
        Some(self.moves[self.drawn - 1])
    }

    /// Moves drawn so far in the current pass, in draw order.
    pub fn drawn(&self) -> &[InsertionMove] {
        &self.moves[..self.drawn]
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// A complete uniformly shuffled pass over the canonical neighborhood.
pub fn shuffled_scan<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<InsertionMove>, SolverError> {
    let mut order = ScanOrder::new(n)?;
    while order.draw(rng).is_some() {}
    Ok(order.moves)
}

/// Draws an exchange of two distinct uniformly chosen positions.
pub fn random_exchange<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ExchangeMove {
    debug_assert!(n >= 2);
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    ExchangeMove { a, b }
}
