use criterion::{criterion_group, criterion_main, Criterion};
use leibniz_core::{maximize_defect, Exponent, Objective, SearchTask};

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximize_defect");
    group.sample_size(10);
    for objective in [Objective::Leibniz, Objective::Auxiliary] {
        let task = SearchTask::new(objective, 5, Exponent::ONE).with_budget(2000);
        group.bench_function(objective.name(), |b| b.iter(|| maximize_defect(&task).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, search);
criterion_main!(benches);
