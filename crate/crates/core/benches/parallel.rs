//! Throughput of the data-parallel inner loops, default thread pool
//! against a single-thread pool (with the `parallel` feature off, only
//! the sequential path exists and is measured as such).

use criterion::{criterion_group, criterion_main, Criterion};
use mgm_core::allocation::McsTriple;
use mgm_core::experiment::{run_campaign, solve_campaign_precoders, CampaignSpec};
use mgm_core::precoding::{grid_oracle_maxmin, solve_maxmin, CsitSet, Mode, SolverConfig};
use mgm_core::rng::{complex_gaussian, rng_for};
use mgm_core::scenario::reference_base;
use mgm_core::Scheme;
use std::hint::black_box;

fn random_csit(seed: u64) -> CsitSet {
    let mut rng = rng_for(seed, &[0xBE]);
    CsitSet::new(std::array::from_fn(|_| {
        (0..2).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
    }))
    .unwrap()
}

/// Runs `f` once on the ambient pool and once confined to one thread,
/// so the two criterion lines compare the data-parallel speedup.
fn bench_both<F: Fn() + Sync>(c: &mut Criterion, name: &str, f: F) {
    c.bench_function(&format!("{name}/parallel"), |b| b.iter(&f));
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        c.bench_function(&format!("{name}/single-thread"), |b| {
            b.iter(|| pool.install(&f))
        });
    }
}

fn bench_wmmse(c: &mut Criterion) {
    let csit = random_csit(7);
    let cfg = SolverConfig::default();
    bench_both(c, "wmmse_solve_rsma", || {
        black_box(solve_maxmin(&csit, 1.0, 0.1, Scheme::Rsma, &cfg).unwrap());
    });
}

fn bench_grid_oracle(c: &mut Criterion) {
    let csit = random_csit(8);
    bench_both(c, "grid_oracle_sdma_res16", || {
        black_box(grid_oracle_maxmin(&csit, 1.0, 0.1, Mode::Sdma, 16).unwrap());
    });
}

fn bench_campaign(c: &mut Criterion) {
    let mut spec = CampaignSpec::new(reference_base());
    spec.runs = 8;
    let solution = solve_campaign_precoders(&spec, Scheme::Sdma).unwrap();
    let triple = McsTriple { common: None, private1: Some(2), private2: Some(2) };
    bench_both(c, "campaign_8_runs_qpsk", || {
        black_box(run_campaign(&spec, &solution.precoders, triple).unwrap());
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_wmmse, bench_grid_oracle, bench_campaign
}
criterion_main!(benches);
