use criterion::{criterion_group, criterion_main, Criterion};
use nils_core::{fihc, run_nils, seeded, taillard_first, NilsConfig, Permutation, SearchState};

fn descent(c: &mut Criterion) {
    let inst = taillard_first(50, 20).unwrap();
    let mut group = c.benchmark_group("fihc");
    group.sample_size(20);
    group.bench_function("ta051_from_random", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            let start = Permutation::random(inst.n_jobs(), &mut seeded(seed));
            let mut state = SearchState::new(&inst, start, u64::MAX, seeded(seed), Vec::new()).unwrap();
            fihc(&mut state);
            state.best_fitness()
        })
    });
    group.finish();
}

fn nils_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_nils_1e5_evals");
    group.sample_size(10);
    for (n, m, mns) in [(20, 5, 100), (50, 10, 900), (100, 20, 600)] {
        let inst = taillard_first(n, m).unwrap();
        group.bench_function(format!("{}_mns{mns}", inst.name()), |b| {
            b.iter(|| run_nils(&inst, &NilsConfig::new(mns, 100_000, 7)).unwrap().final_best)
        });
    }
    group.finish();
}

criterion_group!(benches, descent, nils_run);
criterion_main!(benches);
