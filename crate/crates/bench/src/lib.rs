//! Shared fixtures for the criterion benchmarks.

use carpool_core::{generate_scenario, GeneratorConfig, Passenger, Scenario};

/// A deterministic benchmark scenario with `n` passengers.
pub fn bench_scenario(seed: u64, n: usize) -> Scenario {
    generate_scenario(seed, n, &GeneratorConfig::default()).expect("benchmark scenario is valid")
}

/// Its passengers, id-sorted.
pub fn bench_coalition(seed: u64, n: usize) -> Vec<Passenger> {
    let mut passengers = bench_scenario(seed, n).passengers;
    passengers.sort_by(|a, b| a.id.cmp(&b.id));
    passengers
}
