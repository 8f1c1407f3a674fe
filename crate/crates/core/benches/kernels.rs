//! Parallel against sequential execution of the hot kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use filament_ns::biot_savart::{BiotSavart, FarField};
use filament_ns::domain_fields::{Grid, ScalarField};
use filament_ns::dynamics::{gaussian, operators, SimulationState, SolverParams};
use filament_ns::domain_fields::FilamentConfig;
use filament_ns::exec::set_force_sequential;

fn paths() -> [(&'static str, bool); 2] {
    [("parallel", false), ("sequential", true)]
}

fn kernels(c: &mut Criterion) {
    let g = Grid::new(0.88, 1.12, -0.12, 0.12, 192, 192).unwrap();
    let omega = ScalarField::from_fn(g, gaussian(1.0, 1.0, 0.0, 2.5e-5));
    let mut group = c.benchmark_group("kernels_192");
    for (name, seq) in paths() {
        set_force_sequential(seq);
        let mut bs = BiotSavart::new(&g, FarField::FreeSpace, 1e-10).unwrap();
        bs.solve(&omega).unwrap();
        group.bench_function(BenchmarkId::new("bs_cold_solve", name), |b| {
            b.iter(|| {
                bs.forget_warm_start();
                bs.solve(&omega).unwrap()
            })
        });
        let mut out = vec![0.0; g.len()];
        group.bench_function(BenchmarkId::new("diffusion", name), |b| {
            b.iter(|| operators::diffusion(&omega, &mut out))
        });
        let cfg = FilamentConfig::single(1.0, 1.0, 0.0).unwrap();
        let state = SimulationState::initialize_filaments(&cfg, 2.5e-5, &SolverParams::default()).unwrap();
        let dt = state.max_dt();
        group.bench_function(BenchmarkId::new("step", name), |b| {
            b.iter(|| {
                let mut s = state.clone();
                s.step(dt).unwrap();
                s
            })
        });
    }
    set_force_sequential(false);
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernels
}
criterion_main!(benches);
