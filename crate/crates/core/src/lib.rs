//! Bootstrap percolation on Chung-Lu power-law random graphs.
//!
//! * [`weights`]: deterministic power-law weight sequences, kernels and bands.
//! * [`graphgen`]: `CL(w)` and `G(N, p)` samplers and the kernel coupling.
//! * [`percolation`]: the infection process, seed strategies and a reference engine.
//! * [`thresholds`]: closed-form critical seed sizes and bounds.
//! * [`experiments`]: reproducible Monte Carlo sweeps and their estimators.

pub mod error;
pub mod experiments;
pub mod graph;
pub mod graphgen;
pub mod percolation;
pub mod rng;
pub mod thresholds;
pub mod weights;

pub use error::{Error, Result};
pub use experiments::{
    estimate_final_fraction, estimate_no_evolution, kernel_coverage, read_config, run_sweep,
    AValue, GridPoint, Model, SeedTemplate, SweepConfig, SweepRecord,
};
pub use graph::Graph;
pub use graphgen::{
    edge_probability, induced_subgraph, sample_chung_lu, sample_chung_lu_bernoulli,
    sample_coupled_kernel, sample_gnp, CoupledKernel,
};
pub use percolation::{
    brute_force_bootstrap, count_neighbors_in_set, run_bootstrap, select_seeds, PercolationTrace,
    SeedSpec,
};
pub use rng::RngStream;
pub use thresholds::{
    classify_regime, critical_a, critical_a_plus, er_thresholds, first_moment_bound, phi, phi1,
    ErThresholds, Regime, ThresholdReport,
};
pub use weights::{
    alt_weights_chung_lu, build_weights, BandDecomposition, PowerLaw, WeightSequence,
};
