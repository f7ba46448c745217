//! Test-only oracles. Nothing here calls into the solver's evaluation or
//! move code, so agreement with it is meaningful.

#![allow(dead_code)]

use nils_core::{Instance, Permutation};
use rand::Rng;

/// Makespan by explicit full completion-time table.
pub fn naive_makespan(instance: &Instance, order: &[usize]) -> i64 {
    let n = order.len();
    let m = instance.n_machines();
    let mut c = vec![vec![0i64; m]; n];
    for k in 0..n {
        for j in 0..m {
            let above = if k > 0 { c[k - 1][j] } else { 0 };
            let left = if j > 0 { c[k][j - 1] } else { 0 };
            c[k][j] = above.max(left) + instance.p(order[k], j);
        }
    }
    c[n - 1][m - 1]
}

/// Remove the job at `from`, reinsert at `to`.
pub fn naive_insert(order: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut v = order.to_vec();
    let job = v.remove(from);
    v.insert(to, job);
    v
}

/// All insertion neighbors (every ordered pair, duplicates removed).
pub fn naive_neighbors(order: &[usize]) -> Vec<Vec<usize>> {
    let n = order.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = naive_insert(order, i, j);
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
    }
    out
}

pub fn all_orders(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                rec(prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize, max_p: i64) -> Instance {
    let rows = (0..n).map(|_| (0..m).map(|_| rng.random_range(0..=max_p)).collect()).collect();
    Instance::new("random", rows).unwrap()
}

pub fn random_perm<R: Rng>(rng: &mut R, n: usize) -> Permutation {
    Permutation::random(n, rng)
}

pub fn flat_instance(n: usize, m: usize, p: i64) -> Instance {
    Instance::new("flat", vec![vec![p; m]; n]).unwrap()
}

/// Search for a small instance with a local optimum whose plateau contains a
/// portal: a neutral neighbor of the optimum that has a strictly better
/// neighbor. Returns (instance, local optimum, plateau fitness).
pub fn crafted_portal_instance(seed: u64) -> (Instance, Permutation, i64) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    loop {
        let inst = random_instance(&mut rng, 4, 3, 9);
        for order in all_orders(4) {
            let f = naive_makespan(&inst, &order);
            let neighbors = naive_neighbors(&order);
            if neighbors.iter().any(|v| naive_makespan(&inst, v) < f) {
                continue;
            }
            let portal_nearby = neighbors.iter().any(|v| {
                naive_makespan(&inst, v) == f && naive_neighbors(v).iter().any(|w| naive_makespan(&inst, w) < f)
            });
            if portal_nearby {
                return (inst, Permutation::from_vec(order).unwrap(), f);
            }
        }
    }
}
