//! Likelihood-free exploration of simulation experiments.
//!
//! Given any parameterized stochastic simulator and a binary outcome
//! predicate, this crate samples parameters from the posterior
//! P(θ | outcome) with a likelihood-free Metropolis chain, fits a kernel
//! density estimate to the retained sample, and reconstructs the
//! outcome-probability surface P(outcome | θ) by importance sampling —
//! together with a conventional grid-search baseline for validation.
//!
//! The numeric layer is generic over the scalar type (see [`scalar::Scalar`]);
//! the aliases below fix `f64`, which is what the built-in simulators and the
//! CLI use.

pub mod density;
pub mod epidemic;
pub mod domestication;
pub mod error;
pub mod estimator;
pub mod gridsearch;
pub mod oracle;
pub mod params;
pub mod phylo;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use rng::{MasterSeed, RngStream};
pub use scalar::Scalar;

/// Default scalar for concrete pipelines.
pub type Real = f64;

pub type DimSpec = params::DimSpec<Real>;
pub type ParameterSpace = params::ParameterSpace<Real>;
pub type ParameterVector = params::ParameterVector<Real>;
pub type UniformBoxPrior = params::UniformBoxPrior<Real>;
pub type UniformWindowKernel = params::UniformWindowKernel<Real>;
pub type ChainTrace = sampler::ChainTrace<Real>;
pub type KdeModel = density::KdeModel<Real>;
pub type MarginalEstimate = estimator::MarginalEstimate<Real>;
pub type LikelihoodSurface = estimator::LikelihoodSurface<Real>;
pub type EvalGrid = estimator::EvalGrid<Real>;
