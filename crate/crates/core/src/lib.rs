//! Gradient-enhanced surrogate optimization of frequency responses.
//!
//! A solver returns a complex reflection spectrum together with its
//! derivatives with respect to every design parameter. Each evaluation yields
//! a first-order Taylor model of the real and imaginary parts; the models of
//! all evaluations are blended into a global surrogate that reproduces every
//! evaluated response. The optimizer alternates Expected-Improvement search on
//! that surrogate with a shrinking trust-region step from the incumbent.
//!
//! Module map:
//!
//! - [`design_space`]: parameter boxes, normalization, factorial and Latin
//!   hypercube designs
//! - [`spectrum`]: complex spectra, dB conversion, the worst-target objective
//! - [`local_model`]: Taylor models and the trust-region local search
//! - [`global_model`]: the interpolating surrogate, its error estimate and EI
//! - [`driver`]: the global/local optimization loop
//! - [`testbed`]: analytic resonator solvers and verification oracles
//! - [`external`]: the file-based protocol for plugging in an outside solver
//! - [`cli`]: problem files and the batch commands

pub mod cli;
pub mod design_space;
pub mod driver;
pub mod error;
pub mod external;
pub mod global_model;
pub mod local_model;
mod search;
pub mod solver;
pub mod spectrum;
pub mod testbed;

pub use design_space::{DesignVector, Parameter, ParameterSpace};
pub use driver::{DoeConfig, IterationReport, Optimizer, OptimizerConfig, Origin, RunHistory};
pub use error::{Error, Result, SolverError};
pub use global_model::{expected_improvement, EiResult, GlobalSurrogate};
pub use local_model::{DesignEvaluation, LocalConfig, TaylorModel, TrustRegion};
pub use solver::{Solver, SolverOutput};
pub use spectrum::{ComplexSpectrum, FrequencyGrid, ObjectiveSpec};
pub use testbed::{ResonatorModel, TestbedInstance};
