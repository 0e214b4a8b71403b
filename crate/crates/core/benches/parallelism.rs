//! Parallel vs sequential right-hand-side evaluation.
//!
//! The spatial operator is the hot loop of every simulation; this compares
//! the rayon-dispatched path against the pinned sequential one on a 2D grid
//! large enough to clear the parallel dispatch threshold, plus a 1D grid
//! that stays below it (both paths should coincide there).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hotspot_core::kinetics::{builtin_kinetics, ModelParams, Variant};
use hotspot_core::solver::{initial_condition, rhs, rhs_seq, AdvectionScheme, IcWave, Mesh, Perturb};
use hotspot_core::spectral::DomainSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_rhs(c: &mut Criterion) {
    let kin = builtin_kinetics("paper-default").unwrap();
    let params = ModelParams::new(1.0, 3.0, 0.9, 0.008, Variant::Departure).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let mut group = c.benchmark_group("rhs");
    // 1d-256 sits below the dispatch threshold (both paths identical);
    // the 2D grids are above it and show the machine's actual crossover.
    for (label, domain, n) in [
        ("1d-256", DomainSpec::interval(1.0), 256usize),
        ("2d-192", DomainSpec::square(1.0), 192),
        ("2d-256", DomainSpec::square(1.0), 256),
    ] {
        let mesh = Mesh::new(domain, n).unwrap();
        let perturbs = [Perturb { wave: IcWave::Tensor { m: 1.0, n: 1.0 }, amp_a: 0.05, amp_rho: 0.02 }];
        let state = initial_condition(&params, &mesh, &perturbs, 0.01, &mut rng);

        group.bench_with_input(BenchmarkId::new("parallel", label), &state, |b, s| {
            b.iter(|| rhs(s, &params, &kin, &mesh, AdvectionScheme::Central))
        });
        group.bench_with_input(BenchmarkId::new("sequential", label), &state, |b, s| {
            b.iter(|| rhs_seq(s, &params, &kin, &mesh, AdvectionScheme::Central))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_rhs);
criterion_main!(benches);
