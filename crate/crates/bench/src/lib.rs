//! Shared fixtures for the benchmarks.

use fbsde_core::sim::simulate_path;
use fbsde_core::{ModelSpec, SamplePath};

/// An example-1 path over `T = 10` with `n` increments and a fixed seed.
pub fn example1_path(n: usize) -> SamplePath {
    simulate_path(&ModelSpec::example1(), 10.0, n, 1).expect("example 1 does not blow up")
}
