//! Shared fixtures for the benchmarks.

use alphaconc_core::distributions::{sample, DistributionSpec};
use alphaconc_core::specnorms::sample_ensemble;
use alphaconc_core::{Ensemble, StreamId, SymMatrix};

/// `count` symmetric Weibull(α) draws from a fixed stream.
pub fn weibull_sample(alpha: f64, count: usize) -> Vec<f64> {
    sample(&DistributionSpec::weibull(alpha), count, StreamId::new(17, 0)).expect("valid law")
}

/// A fixed GOE matrix of dimension `n`.
pub fn goe(n: usize) -> SymMatrix {
    sample_ensemble(Ensemble::Goe, n, StreamId::new(23, 0)).expect("n >= 1")
}
