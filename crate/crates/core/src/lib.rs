//! Structure-dependent lower bounds for testing the independence of
//! irrelevant alternatives (IIA) on a fixed collection of choice sets.
//!
//! The pipeline is: a [`Collection`] defines the incidence graph, a cycle
//! decomposition of that graph yields `mu` and `alpha`, the decomposition's
//! orientations give an adversarial perturbation family, and the closed-form
//! bounds turn `(N, delta, d, mu, alpha)` into a minimax risk floor. The
//! [`oracle`] module checks each step numerically on small instances.

pub mod collection;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod perturbation;
pub mod bounds;
pub mod system;

pub use collection::{presets, Collection};
pub use dataset::{derive_seed, sample_dataset, Dataset, Sampler};
pub use error::{Error, Result};
pub use graph::{CycleDecomposition, DecompositionMetrics, IncidenceGraph, Strategy};
pub use system::{
    chi_squared, entropy, expand_iia, kl_divergence, tv_distance, uniform_iia_witness, uniform_system, ChoiceSystem,
    IiaSystem,
};
pub use perturbation::{
    enumerate_family, epsilon_for_delta, orient, perturb, sample_family, Mixture, Orientation, PerturbationFamily,
};
pub use bounds::{global_bound, risk_lower_bound, table_bounds, BoundInput, BoundReport};
