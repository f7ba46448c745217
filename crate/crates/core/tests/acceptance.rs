//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use nils_core::experiment::{run_experiment, ExperimentConfig, InstanceSource, RunOptions};
use nils_core::search::{fihc, nwp, NwpKind, StepKind};
use nils_core::stats::{mann_whitney_u, median_and_quartiles};
use nils_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sweep(jobs: usize, machines: usize, mns: Vec<u64>, runs: usize, budget: u64) -> ExperimentOutput {
    let config = ExperimentConfig {
        runs,
        budget,
        base_seed: 0,
        ..ExperimentConfig::new(InstanceSource::taillard_first(jobs, machines).unwrap(), mns)
    };
    run_experiment(&config, &RunOptions::default()).unwrap()
}

/// 20x5 instance 1: every MNS reaches 1278 in at least 8 of 10 runs at 1e6 evaluations.
fn criterion_1() -> Outcome {
    let mns = vec![0, 10, 20, 50, 100];
    let out = sweep(20, 5, mns.clone(), 10, 1_000_000);
    let hits: Vec<usize> = mns.iter().map(|&m| out.finals(m).iter().filter(|&&f| f == 1278).count()).collect();
    check(hits.iter().all(|&h| h >= 8), format!("hits of 1278 per MNS {mns:?}: {hits:?} (need >= 8/10 each)"))
}

/// 20x10 instance 1: some MNS reaches 1582 in at least 5 of 10 runs at 5e6 evaluations.
fn criterion_2() -> Outcome {
    let mns = vec![0, 10, 20, 50, 100];
    let out = sweep(20, 10, mns.clone(), 10, 5_000_000);
    let hits: Vec<usize> = mns.iter().map(|&m| out.finals(m).iter().filter(|&&f| f == 1582).count()).collect();
    check(hits.iter().any(|&h| h >= 5), format!("hits of 1582 per MNS {mns:?}: {hits:?} (need >= 5/10 for one MNS)"))
}

/// 50x20 instance 1, 15 seeds, 5e6 evaluations: median(MNS=900) <= median(MNS=0);
/// a reversal below 0.1% is flagged as noise, anything larger fails.
fn criterion_3() -> Outcome {
    let out = sweep(50, 20, vec![0, 900], 15, 5_000_000);
    let m0 = out.summary(0).unwrap().median;
    let m900 = out.summary(900).unwrap().median;
    let detail = format!("median MNS=0 {m0}, MNS=900 {m900}");
    if m900 <= m0 {
        Ok(detail)
    } else if (m900 - m0) / m0 < 0.001 {
        Ok(format!("{detail} [FLAGGED: reversal below 0.1%, statistical noise]"))
    } else {
        Err(format!("{detail}: reversal of {:.3}%", 100.0 * (m900 - m0) / m0))
    }
}

/// evaluate == simulate_schedule on 1000 random instances (N <= 7, M <= 5),
/// all permutations for N <= 5.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pairs = 0u64;
    for i in 0..1000 {
        let n = 1 + i % 7;
        let m = 1 + (i / 7) % 5;
        let inst = random_instance(&mut rng, n, m, 99);
        let perms: Vec<Permutation> = if n <= 5 {
            all_orders(n).into_iter().map(|o| Permutation::from_vec(o).unwrap()).collect()
        } else {
            (0..30).map(|_| random_perm(&mut rng, n)).collect()
        };
        for perm in perms {
            let a = evaluate(&inst, &perm).unwrap();
            let b = simulate_schedule(&inst, &perm).unwrap();
            if a != b {
                return Err(format!("mismatch on instance {i}, {perm}: {a} vs {b}"));
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (instance, permutation) pairs agree exactly"))
}

/// Accelerated insertion scan == naive move-then-evaluate, 200 triples at 10x5.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 0..200 {
        let inst = random_instance(&mut rng, 10, 5, 99);
        let perm = random_perm(&mut rng, 10);
        let removed = rand::Rng::random_range(&mut rng, 0..10);
        let scan = evaluate_insertion_scan(&inst, &perm, removed).unwrap();
        for (q, f) in scan.iter().enumerate() {
            let expected = naive_makespan(&inst, &naive_insert(perm.as_slice(), removed, q));
            if f.value() != expected {
                return Err(format!("triple {t}: position {q} gave {f}, naive {expected}"));
            }
        }
    }
    Ok("200 triples x 10 positions agree exactly".into())
}

/// |canonical moves| = (n-1)^2 with pairwise distinct neighbors, n in 2..=8.
fn criterion_6() -> Outcome {
    for n in 2..=8 {
        let moves = canonical_insertion_moves(n).unwrap();
        let identity = Permutation::identity(n);
        let mut produced: Vec<Vec<usize>> =
            moves.iter().map(|&mv| apply_insertion(&identity, mv).unwrap().into_vec()).collect();
        produced.sort();
        produced.dedup();
        let oracle = naive_neighbors(identity.as_slice()).len();
        if moves.len() != (n - 1) * (n - 1) || produced.len() != moves.len() || oracle != moves.len() {
            return Err(format!(
                "n={n}: {} moves, {} distinct neighbors, oracle {oracle}",
                moves.len(),
                produced.len()
            ));
        }
        if produced.iter().any(|p| p == identity.as_slice()) {
            return Err(format!("n={n}: a move reproduces the input"));
        }
    }
    Ok("(n-1)^2 distinct neighbors for n = 2..8".into())
}

/// FIHC output has no strictly improving neighbor, 100 random 8x5 instances.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let inst = random_instance(&mut rng, 8, 5, 99);
        let start = random_perm(&mut rng, 8);
        let mut state = SearchState::new(&inst, start, 1_000_000, seeded(i), Vec::new()).unwrap();
        if fihc(&mut state) != FihcOutcome::LocalOptimum {
            return Err(format!("instance {i}: budget ran out"));
        }
        let f = naive_makespan(&inst, state.current().as_slice());
        if f != state.current_fitness().value() {
            return Err(format!("instance {i}: reported fitness differs from oracle"));
        }
        if naive_neighbors(state.current().as_slice()).iter().any(|v| naive_makespan(&inst, v) < f) {
            return Err(format!("instance {i}: improving neighbor exists"));
        }
    }
    Ok("100 instances: every FIHC output is a local optimum".into())
}

/// NWP on a flat 10x5 instance walks exactly MNS steps then kicks; portal
/// outcomes on crafted 4-job plateaus strictly improve.
fn criterion_8() -> Outcome {
    let inst = flat_instance(10, 5, 7);
    let mns = 12;
    let config = NilsConfig::new(mns, 1_000_000, 3);
    let mut state = SearchState::new(&inst, Permutation::identity(10), 1_000_000, seeded(3), Vec::new()).unwrap();
    for call in 0..50 {
        let out = nwp(&mut state, &config);
        if out.kind != NwpKind::Kicked || out.neutral_steps_taken != mns {
            return Err(format!("flat call {call}: {out:?}"));
        }
    }
    let report = run_nils(&inst, &NilsConfig::new(mns, 200_000, 9)).unwrap();
    if report.portals_found != 0 {
        return Err(format!("flat run found {} portals", report.portals_found));
    }

    let mut portal_runs = 0;
    for seed in 0..5 {
        let (inst, optimum, plateau) = crafted_portal_instance(seed);
        for walk_seed in 0..40 {
            let mut state = SearchState::new(&inst, optimum.clone(), 100_000, seeded(walk_seed), Vec::new()).unwrap();
            state.enable_trace();
            let out = nwp(&mut state, &NilsConfig::new(50, 100_000, 0));
            let neutral_ok = state
                .trace()
                .iter()
                .filter(|e| e.kind == StepKind::Neutral)
                .all(|e| e.before.value() == plateau && e.after.value() == plateau);
            if !neutral_ok {
                return Err(format!("instance {seed}: non-neutral step on the plateau"));
            }
            if out.kind == NwpKind::PortalFound {
                portal_runs += 1;
                if state.current_fitness().value() >= plateau {
                    return Err(format!("instance {seed}: portal without improvement"));
                }
            }
        }
    }
    check(
        portal_runs > 0,
        format!("flat: 50 walks of exactly {mns} steps, 0 portals; crafted: {portal_runs}/200 walks reached a strictly better portal"),
    )
}

/// evals_used == budget on 20 random configurations; identical runs give
/// byte-identical reports.
fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for c in 0..20 {
        use rand::Rng;
        let n = rng.random_range(2..=15);
        let m = rng.random_range(1..=6);
        let max_p = rng.random_range(0..=20);
        let inst = random_instance(&mut rng, n, m, max_p);
        let config = NilsConfig::new(rng.random_range(0..=30), rng.random_range(1..=30_000), rng.random())
            .with_kick_strength(rng.random_range(1..=4));
        let a = run_nils(&inst, &config).unwrap();
        let b = run_nils(&inst, &config).unwrap();
        if a.evals_used != config.budget {
            return Err(format!("config {c}: used {} of {}", a.evals_used, config.budget));
        }
        if serde_json::to_vec(&a).unwrap() != serde_json::to_vec(&b).unwrap() {
            return Err(format!("config {c}: reports differ between identical runs"));
        }
    }
    let config = ExperimentConfig {
        runs: 3,
        budget: 20_000,
        base_seed: 11,
        ..ExperimentConfig::new(InstanceSource::taillard_first(20, 5).unwrap(), vec![0, 10])
    };
    let render = || {
        let out = run_experiment(&config, &RunOptions::default()).unwrap();
        let mut csv = Vec::new();
        let mut json = Vec::new();
        write_csv(&mut csv, &out).unwrap();
        write_json(&mut json, &out).unwrap();
        (csv, json)
    };
    check(
        render() == render(),
        "20 configs exhaust their budget exactly; repeated runs and experiments are byte-identical".into(),
    )
}

/// portals + kicks + budget-exhausted walks = NWP invocations, and lost
/// evaluations equal the walk evaluations of kicked perturbations,
/// recomputed by driving the phases directly.
fn criterion_10() -> Outcome {
    let inst = taillard_first(20, 10).unwrap();
    for (mns, budget, seed) in [(0, 50_000, 1), (10, 80_000, 2), (100, 200_000, 3), (1000, 150_000, 4)] {
        let config = NilsConfig::new(mns, budget, seed);
        let report = run_nils(&inst, &config).unwrap();
        let total = report.portals_found + report.kicks + report.budget_exhausted_walks;
        if total != report.nwp_invocations || report.budget_exhausted_walks > 1 {
            return Err(format!("mns {mns}: counters {report:?}"));
        }

        let mut rng = seeded(seed);
        let initial = Permutation::random(inst.n_jobs(), &mut rng);
        let mut state = SearchState::new(&inst, initial, budget, rng, config.effective_checkpoints()).unwrap();
        fihc(&mut state);
        let (mut lost, mut invocations, mut portals) = (0, 0, 0);
        while !state.is_exhausted() {
            let out = nwp(&mut state, &config);
            invocations += 1;
            match out.kind {
                NwpKind::Kicked => lost += out.evals_spent,
                NwpKind::PortalFound => portals += 1,
                NwpKind::BudgetExhausted => break,
            }
            if state.is_exhausted() {
                break;
            }
            fihc(&mut state);
        }
        if (lost, invocations, portals) != (report.lost_evals, report.nwp_invocations, report.portals_found) {
            return Err(format!(
                "mns {mns}: replay ({lost}, {invocations}, {portals}) vs report ({}, {}, {})",
                report.lost_evals, report.nwp_invocations, report.portals_found
            ));
        }
        if report.lost_evals > report.budget || report.portal_percentage() > 100.0 {
            return Err(format!("mns {mns}: counters out of range"));
        }
    }
    Ok("counter identities hold for MNS 0, 10, 100, 1000".into())
}

/// Brute-force two-sided permutation p-value: every split of the pooled
/// sample, U counted pairwise.
fn permutation_p_value(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let na = a.len();
    let u_of = |ga: &[f64], gb: &[f64]| -> f64 {
        let mut u = 0.0;
        for x in ga {
            for y in gb {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
        }
        u
    };
    let mean = (na * (n - na)) as f64 / 2.0;
    let observed = (u_of(a, b) - mean).abs();
    let (mut extreme, mut total) = (0u32, 0u32);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let (ga, gb): (Vec<f64>, Vec<f64>) = {
            let mut ga = Vec::new();
            let mut gb = Vec::new();
            for (i, &v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    ga.push(v);
                } else {
                    gb.push(v);
                }
            }
            (ga, gb)
        };
        total += 1;
        if (u_of(&ga, &gb) - mean).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

/// Median of [6375, 6376] is 6375.5; Mann-Whitney p-values equal the
/// exhaustive permutation test at sizes (4,4) and (5,3).
fn criterion_11() -> Outcome {
    let med = median_and_quartiles(&[6375.0, 6376.0]).unwrap().median;
    if med != 6375.5 {
        return Err(format!("median {med}"));
    }
    let cases: [(&[f64], &[f64]); 6] = [
        (&[3925.0, 3931.0, 3940.0, 3918.0], &[3917.0, 3920.0, 3922.0, 3919.0]),
        (&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]),
        (&[1.0, 2.0, 2.0, 5.0], &[2.0, 3.0, 5.0, 5.0]),
        (&[10.0, 12.0, 9.0, 15.0, 11.0], &[13.0, 8.0, 14.0]),
        (&[1.0, 1.0, 2.0, 3.0, 3.0], &[1.0, 3.0, 4.0]),
        (&[7.0, 7.0, 7.0, 7.0, 7.0], &[7.0, 7.0, 7.0]),
    ];
    let mut worst: f64 = 0.0;
    for (a, b) in cases {
        let got = mann_whitney_u(a, b).unwrap().p_value;
        let want = permutation_p_value(a, b);
        worst = worst.max((got - want).abs());
    }
    check(worst < 1e-12, format!("median 6375.5; max |p - p_exhaustive| = {worst:e} over (4,4) and (5,3) cases"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1  20x5 reaches 1278 for every MNS", criterion_1),
        ("2  20x10 reaches 1582", criterion_2),
        ("3  50x20 median MNS=900 <= MNS=0", criterion_3),
        ("4  makespan oracle equivalence", criterion_4),
        ("5  accelerated scan equivalence", criterion_5),
        ("6  neighborhood count", criterion_6),
        ("7  FIHC local optimality", criterion_7),
        ("8  NWP contract", criterion_8),
        ("9  budget exactness and determinism", criterion_9),
        ("10 perturbation counters", criterion_10),
        ("11 statistics", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
