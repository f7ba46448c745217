//! Order statistics and the Mann-Whitney rank-sum test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

fn sorted(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

// Linear interpolation between closest ranks: h = (n - 1) p.
fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn quantile(values: &[f64], p: f64) -> Result<f64, StatsError> {
    Ok(quantile_sorted(&sorted(values)?, p.clamp(0.0, 1.0)))
}

pub fn median_and_quartiles(values: &[f64]) -> Result<Quartiles, StatsError> {
    let v = sorted(values)?;
    Ok(Quartiles { q1: quantile_sorted(&v, 0.25), median: quantile_sorted(&v, 0.5), q3: quantile_sorted(&v, 0.75) })
}

pub fn median(values: &[f64]) -> Result<f64, StatsError> {
    median_and_quartiles(values).map(|q| q.median)
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> Result<(f64, f64), StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Midranks (1-based) of `values`; ties share the mean of their ranks.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// Pairs where the first sample exceeds the second, ties counting 1/2.
    pub u: f64,
    /// Same count in the other direction; `u + u_other = n_a * n_b`.
    pub u_other: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Samples with both sizes at least this use the normal approximation.
pub const NORMAL_APPROX_MIN_SIZE: usize = 8;
const EXACT_ENUMERATION_LIMIT: f64 = 5.0e6;
const U_TOLERANCE: f64 = 1e-9;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Two-sided rank-sum test. Small samples get the exact permutation
/// distribution of U over the pooled midranks; larger ones the normal
/// approximation with tie and continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let shift = (na * (na + 1)) as f64 / 2.0;
    let u = rank_sum_a - shift;
    let u_other = (na * nb) as f64 - u;
    let mean = (na * nb) as f64 / 2.0;
    let observed = (u - mean).abs();

    let exact = na.min(nb) < NORMAL_APPROX_MIN_SIZE && binomial(n, na) <= EXACT_ENUMERATION_LIMIT;
    let (p_value, method) = if exact {
        let mut extreme = 0u64;
        let mut total = 0u64;
        choose_sums(&ranks, na, 0, 0.0, &mut |sum| {
            total += 1;
            if ((sum - shift) - mean).abs() >= observed - U_TOLERANCE {
                extreme += 1;
            }
        });
        (extreme as f64 / total as f64, PValueMethod::Exact)
    } else {
        let tie_term: f64 = tie_groups(&pooled).into_iter().map(|t| (t * t * t - t) as f64).sum();
        let nf = n as f64;
        let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = ((observed - 0.5).max(0.0)) / var.sqrt();
            erfc(z / std::f64::consts::SQRT_2)
        };
        (p.min(1.0), PValueMethod::Normal)
    };
    Ok(MannWhitney { u, u_other, p_value, method })
}

// Calls `visit` with the rank sum of every k-subset of `ranks[start..]`.
fn choose_sums(ranks: &[f64], k: usize, start: usize, acc: f64, visit: &mut dyn FnMut(f64)) {
    if k == 0 {
        visit(acc);
        return;
    }
    for i in start..=ranks.len() - k {
        choose_sums(ranks, k - 1, i + 1, acc + ranks[i], visit);
    }
}

fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        if j > i {
            out.push(j - i + 1);
        }
        i = j + 1;
    }
    out
}
