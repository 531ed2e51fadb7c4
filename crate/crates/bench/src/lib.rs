//! Benchmark fixtures: run configurations small enough to time repeatedly.

use cook_core::{Bench, Isol, RunConfig, Strategy};

/// A dna run cut to a fixed number of inferences per application.
pub fn short_dna(isol: Isol, strategy: Strategy, inferences: u32) -> RunConfig {
    RunConfig {
        max_inferences: Some(inferences),
        ..RunConfig::new(Bench::Dna, isol, strategy, 1)
    }
}

pub fn mmult(isol: Isol, strategy: Strategy) -> RunConfig {
    RunConfig::new(Bench::Mmult, isol, strategy, 1)
}
