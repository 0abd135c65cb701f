//! Uniform random generation of weighted 3D lattice walks confined to the
//! first orthant.
//!
//! A walk model is a weighted set of steps in Z³. The crate finds a
//! half-space containing the orthant that makes orthant walks as large a
//! share as possible, projects the model to one dimension, builds a
//! context-free grammar for the 1D meanders, and draws meanders with a
//! singular Boltzmann sampler. Lifting the meanders back to 3D and rejecting
//! the walks that exit the orthant yields walks that are uniform at each
//! length (weight-proportional, for weighted models).
//!
//! ```no_run
//! use orthant_walks::{Model, ModelOptions, WeightedStepSet3, rng_from_seed};
//!
//! let model = Model::build(WeightedStepSet3::flagship(), &ModelOptions::default()).unwrap();
//! let report = model
//!     .sample_walks(95, 105, 10, 2_000_000, &mut rng_from_seed(1))
//!     .unwrap();
//! assert_eq!(report.walks.len(), 10);
//! ```

pub mod boltzmann;
pub mod cli;
pub mod error;
pub mod grammar;
pub mod hull;
pub mod io;
pub mod pipeline;
pub mod projection;
pub mod stats;
pub mod stepset;

pub use boltzmann::{
    evaluate_gf, evaluate_near_singularity, rng_from_seed, worker_seed, BoltzmannSampler, Draw,
    GfEvaluation, SampledWord, WalkRng,
};
pub use error::{Error, Result};
pub use grammar::{build_meander_grammar, count_walks_dp, grammar_counts, Grammar, Symbol};
pub use hull::{convex_hull_3d, HullMesh};
pub use pipeline::{
    count_orthant_walks, endpoint_chi_square, endpoint_rmse, endpoint_tally, frequencies,
    in_orthant, lift, naive_sample, naive_sample_parallel, sample_orthant_walks, CountTable,
    Counters, Model, ModelOptions, SampleReport, SampleRequest, Walk3D,
};
pub use projection::{
    analyze_1d, minimize_inventory, project_stepset, projection_vector, rationalize, Atom,
    Growth1D, IntegerProjection, Minimizer, ProjectionBranch, ProjectionVector, StepSet1D,
};
pub use stepset::{Drift3, DriftClass, Step3, WeightedStepSet3};
