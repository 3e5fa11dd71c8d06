use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cat0_rigidity::actions::{Action, ActionSpec};
use cat0_rigidity::conditions::minimal_m_table;
use cat0_rigidity::exec::Exec;
use cat0_rigidity::num::q;

fn star_pair() -> (Action, Action) {
    let shift = |s: i128| {
        Action::from_spec(&ActionSpec::Product {
            family: "F2xZ".into(),
            weights: Default::default(),
            shifts: [("b".to_string(), q(s))].into_iter().filter(|(_, v)| *v != q(0)).collect(),
        })
        .unwrap()
    };
    (shift(0), shift(1))
}

fn lattice_pair() -> (Action, Action) {
    let l = |rows: [[i128; 2]; 2]| Action::lattice(rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect()).unwrap();
    (l([[1, 0], [0, 1]]), l([[1, 0], [1, 1]]))
}

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("minimal_m_table");
    group.sample_size(10);
    for (name, (ax, ay), l) in [("product", star_pair(), 6u64), ("lattice", lattice_pair(), 16)] {
        for (mode, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            group.bench_function(BenchmarkId::new(name, mode), |b| {
                b.iter(|| minimal_m_table(&ax, &ay, &q(1), l, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
