//! Fixtures for the benchmarks.

use leadsto_core::synthgen::{generate, preset, GenConfig};
use leadsto_core::traces::TraceSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Tree-structured spike trains with `target` firings.
pub fn tree_data(seed: u64, target: u64) -> TraceSet {
    let structure = preset("tree", None)
        .and_then(|s| s.with_trigger_prob(0.9))
        .expect("tree preset");
    let mut cfg = GenConfig::new(structure, seed);
    cfg.target_firings = target;
    let (events, _) = generate(&cfg).expect("generation");
    TraceSet::single(events.to_trace().expect("trace"))
}

/// Standard normal draws with a 5% block shifted to mean 4.
pub fn spiked_z(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let null = Normal::new(0.0, 1.0).expect("normal");
    let spike = Normal::new(4.0, 1.0).expect("normal");
    (0..n)
        .map(|i| {
            if i % 20 == 0 {
                spike.sample(&mut rng)
            } else {
                null.sample(&mut rng)
            }
        })
        .collect()
}
