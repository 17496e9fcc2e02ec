//! The contract between the optimizer and a response solver.

use crate::design_space::DesignVector;
use crate::error::SolverError;
use crate::spectrum::{ComplexSpectrum, FrequencyGrid};

/// One solver call: the complex response and its parameter derivatives.
///
/// Derivatives are stored row-major, `m` rows (frequency nodes) of `d`
/// entries, in units of 1/parameter-unit.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub spectrum: ComplexSpectrum,
    pub d_re: Vec<f64>,
    pub d_im: Vec<f64>,
}

/// A source of responses with analytical derivatives.
///
/// Implementations must be safe to call from several threads at once; the
/// driver may evaluate independent designs concurrently.
pub trait Solver: Sync {
    fn grid(&self) -> &FrequencyGrid;

    fn solve(&self, x: &DesignVector) -> Result<SolverOutput, SolverError>;
}

impl<S: Solver + ?Sized> Solver for &S {
    fn grid(&self) -> &FrequencyGrid {
        (**self).grid()
    }

    fn solve(&self, x: &DesignVector) -> Result<SolverOutput, SolverError> {
        (**self).solve(x)
    }
}
