//! Support frontier estimation for star-shaped sets.
//!
//! A point process with mean measure n·c·φ·1_S is observed on a set
//! S = {(x, y): x ∈ E, 0 ≤ y ≤ f(x)}; the crate estimates the frontier f
//! from one sample by smoothing bias-corrected cell extremes with a
//! Dirichlet kernel, and provides pointwise confidence intervals, samplers,
//! finite-n hypothesis diagnostics, and a Monte Carlo harness around the
//! estimator.
//!
//! The supported geometry is the polar one: E is the unit sphere of R^d
//! parameterized by angles, the intensity is φ(x, y) = γ_d y^{d−1}, and the
//! full estimation pipeline is instantiated in d = 2 where the Dirichlet
//! kernel lives. The building blocks (models, partitions, cell extremes,
//! the scale estimator) work for general d ≥ 2.

pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod geometry;
pub mod kernel;
pub mod model;
pub mod partition;
pub mod quad;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use estimator::{estimate_pipeline, EstimateResult, EstimateSettings};
pub use experiment::{coverage_study, run_experiment, ExperimentConfig, ExperimentReport};
pub use geometry::Direction;
pub use model::{FrontierFunction, ModelKind, ProcessModel};
pub use partition::{build_partition, Partition};
pub use simulate::{sample_star_support, PointSample, SampleKind};
