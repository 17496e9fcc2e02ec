//! The outer optimization loop.
//!
//! After an initial design of experiments, every iteration rebuilds the
//! global surrogate from all evaluations and proposes two designs: the
//! Expected-Improvement maximizer and one trust-region step from the
//! incumbent. Both are evaluated before the next rebuild. The run stops after
//! `stagnation_limit` consecutive iterations without improvement or after
//! `max_iterations`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::design_space::{DesignVector, ParameterSpace};
use crate::error::{Error, Result};
use crate::global_model::GlobalSurrogate;
use crate::local_model::{
    propose_local_candidate, DesignEvaluation, LocalConfig, TrustRegion, MERGE_TOLERANCE,
};
use crate::solver::Solver;
use crate::spectrum::ObjectiveSpec;

/// Initial design of experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DoeConfig {
    Lhs { size: usize },
    FullFactorial { levels: Vec<usize> },
}

impl DoeConfig {
    pub fn size(&self) -> usize {
        match self {
            DoeConfig::Lhs { size } => *size,
            DoeConfig::FullFactorial { levels } => levels.iter().product(),
        }
    }

    pub fn generate(&self, space: &ParameterSpace, seed: u64) -> Result<Vec<DesignVector>> {
        match self {
            DoeConfig::Lhs { size } => space.latin_hypercube(*size, seed),
            DoeConfig::FullFactorial { levels } => space.full_factorial(levels),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub doe: DoeConfig,
    #[serde(default = "defaults::max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "defaults::stagnation_limit")]
    pub stagnation_limit: usize,
    /// Decrease in dB of the best objective that resets the stagnation count.
    #[serde(default = "defaults::improvement_tol")]
    pub improvement_tol: f64,
    #[serde(default = "defaults::shrink_factor")]
    pub shrink_factor: f64,
    #[serde(default = "defaults::initial_half_width")]
    pub initial_half_width: f64,
    #[serde(default = "defaults::min_half_width")]
    pub min_half_width: f64,
    #[serde(default)]
    pub doe_seed: u64,
    #[serde(default)]
    pub ei_seed: u64,
    #[serde(default)]
    pub parallel_evals: bool,
}

mod defaults {
    pub fn max_iterations() -> usize {
        20
    }
    pub fn stagnation_limit() -> usize {
        5
    }
    pub fn improvement_tol() -> f64 {
        1e-6
    }
    pub fn shrink_factor() -> f64 {
        0.5
    }
    pub fn initial_half_width() -> f64 {
        0.25
    }
    pub fn min_half_width() -> f64 {
        1e-4
    }
}

impl OptimizerConfig {
    pub fn new(doe: DoeConfig) -> Self {
        Self {
            doe,
            max_iterations: defaults::max_iterations(),
            stagnation_limit: defaults::stagnation_limit(),
            improvement_tol: defaults::improvement_tol(),
            shrink_factor: defaults::shrink_factor(),
            initial_half_width: defaults::initial_half_width(),
            min_half_width: defaults::min_half_width(),
            doe_seed: 0,
            ei_seed: 0,
            parallel_evals: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.stagnation_limit < 1 {
            return Err(Error::InvalidConfig("stagnation_limit must be >= 1".into()));
        }
        if self.doe.size() < 2 {
            return Err(Error::InvalidConfig(
                "design of experiments needs >= 2 points".into(),
            ));
        }
        if self.improvement_tol.is_nan() || self.improvement_tol < 0.0 {
            return Err(Error::InvalidConfig("improvement_tol must be >= 0".into()));
        }
        self.local_config().validate()
    }

    pub fn local_config(&self) -> LocalConfig {
        LocalConfig {
            initial_half_width: self.initial_half_width,
            shrink_factor: self.shrink_factor,
            min_half_width: self.min_half_width,
            ..LocalConfig::default()
        }
    }

    /// Upper bound on successful solver calls for a full run.
    pub fn max_evaluations(&self) -> usize {
        self.doe.size() + 2 * self.max_iterations
    }
}

/// Which procedure produced an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Doe,
    Global,
    Local,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Doe => "doe",
            Origin::Global => "global",
            Origin::Local => "local",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub origin: Origin,
    pub evaluation: DesignEvaluation,
}

/// Every evaluation of a run in call order; DoE entries come first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunHistory {
    entries: Vec<HistoryEntry>,
    best_index: Option<usize>,
}

impl RunHistory {
    pub fn push(&mut self, iteration: usize, origin: Origin, evaluation: DesignEvaluation) {
        let better = self
            .best()
            .is_none_or(|b| evaluation.objective_value() < b.objective_value());
        self.entries.push(HistoryEntry {
            iteration,
            origin,
            evaluation,
        });
        if better {
            self.best_index = Some(self.entries.len() - 1);
        }
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best_index(&self) -> Option<usize> {
        self.best_index
    }

    pub fn best(&self) -> Option<&DesignEvaluation> {
        self.best_index.map(|i| &self.entries[i].evaluation)
    }

    pub fn evaluations(&self) -> impl Iterator<Item = &DesignEvaluation> {
        self.entries.iter().map(|e| &e.evaluation)
    }

    /// Best objective after each entry.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.entries
            .iter()
            .scan(f64::INFINITY, |best, e| {
                *best = best.min(e.evaluation.objective_value());
                Some(*best)
            })
            .collect()
    }
}

/// Progress record emitted after every refinement iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    pub best_objective: f64,
    /// EI of the global candidate, `None` if the search was exhausted.
    pub global_ei: Option<f64>,
    /// Largest trust-region half-width after the local step.
    pub trust_region_width: f64,
    pub evaluations: usize,
    pub improved: bool,
    pub failures: Vec<String>,
}

impl fmt::Display for IterationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iteration {:>3}  best {:>12.6} dB  ei {:>12}  tr {:.3e}  +{} eval{}",
            self.iteration,
            self.best_objective,
            self.global_ei
                .map_or("exhausted".to_string(), |v| format!("{v:.4e}")),
            self.trust_region_width,
            self.evaluations,
            if self.improved { "  improved" } else { "" }
        )?;
        for msg in &self.failures {
            write!(f, "  [failure: {msg}]")?;
        }
        Ok(())
    }
}

/// Optimizer state between iterations.
pub struct Optimizer<'a, S: Solver + ?Sized> {
    config: OptimizerConfig,
    space: ParameterSpace,
    spec: ObjectiveSpec,
    solver: &'a S,
    history: RunHistory,
    region: Option<TrustRegion>,
    iteration: usize,
    stagnation: usize,
}

fn mix_seed(seed: u64, iteration: usize, stream: u64) -> u64 {
    seed ^ (iteration as u64)
        .wrapping_add(stream << 32)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl<'a, S: Solver + ?Sized> Optimizer<'a, S> {
    /// Validates the inputs and evaluates the initial design.
    pub fn initialize(
        config: OptimizerConfig,
        space: ParameterSpace,
        solver: &'a S,
        spec: ObjectiveSpec,
    ) -> Result<Self> {
        config.validate()?;
        if let DoeConfig::FullFactorial { levels } = &config.doe {
            if levels.len() != space.dim() {
                return Err(Error::InvalidConfig(format!(
                    "full factorial has {} level counts for {} parameters",
                    levels.len(),
                    space.dim()
                )));
            }
        }
        let points = config.doe.generate(&space, config.doe_seed)?;
        let evaluations: Vec<Result<DesignEvaluation>> = if config.parallel_evals {
            use rayon::prelude::*;
            points
                .into_par_iter()
                .map(|x| DesignEvaluation::evaluate(solver, x, &spec))
                .collect()
        } else {
            points
                .into_iter()
                .map(|x| DesignEvaluation::evaluate(solver, x, &spec))
                .collect()
        };
        let mut history = RunHistory::default();
        for e in evaluations {
            history.push(0, Origin::Doe, e?);
        }
        Ok(Self {
            config,
            space,
            spec,
            solver,
            history,
            region: None,
            iteration: 0,
            stagnation: 0,
        })
    }

    pub fn history(&self) -> &RunHistory {
        &self.history
    }

    pub fn into_history(self) -> RunHistory {
        self.history
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn stagnation(&self) -> usize {
        self.stagnation
    }

    pub fn region(&self) -> Option<&TrustRegion> {
        self.region.as_ref()
    }

    /// Whether the stopping rule is met.
    pub fn finished(&self) -> bool {
        self.iteration >= self.config.max_iterations
            || self.stagnation >= self.config.stagnation_limit
    }

    /// One global-plus-local refinement iteration.
    pub fn iterate(&mut self) -> Result<IterationReport> {
        self.iteration += 1;
        let it = self.iteration;
        let best = self.history.best().expect("initialized history").clone();

        let surrogate = GlobalSurrogate::new(
            self.history.evaluations().cloned().collect(),
            self.space.clone(),
        )?;

        let region = match self.region.take() {
            Some(r) => r,
            None => TrustRegion::from_config(best.x().clone(), &self.config.local_config())?,
        };

        let proposal = surrogate.propose_global_candidate(
            best.objective_value(),
            &self.spec,
            mix_seed(self.config.ei_seed, it, 0),
        )?;
        let global_ei = (!proposal.exhausted()).then_some(proposal.ei);
        let global_x = (!proposal.exhausted() && !surrogate.is_near_anchor(&proposal.candidate))
            .then_some(proposal.candidate);

        let local_x = propose_local_candidate(
            &region,
            &best,
            &self.spec,
            &self.space,
            mix_seed(self.config.ei_seed, it, 1),
        )?
        .filter(|x| !surrogate.is_near_anchor(x))
        .filter(|x| {
            global_x.as_ref().is_none_or(|g| {
                self.space.distance_unchecked(g.values(), x.values()) > MERGE_TOLERANCE
            })
        });

        let eval = |x: Option<DesignVector>| {
            x.map(|x| DesignEvaluation::evaluate(self.solver, x, &self.spec))
        };
        let (global_eval, local_eval) = if self.config.parallel_evals {
            rayon::join(|| eval(global_x), || eval(local_x))
        } else {
            (eval(global_x), eval(local_x))
        };

        let mut failures = Vec::new();
        let mut errors = Vec::new();
        let mut added = 0;
        for (origin, result) in [(Origin::Global, global_eval), (Origin::Local, local_eval)] {
            match result {
                None => {}
                Some(Ok(e)) => {
                    self.history.push(it, origin, e);
                    added += 1;
                }
                Some(Err(err)) => {
                    failures.push(format!("{origin}: {err}"));
                    errors.push(err);
                }
            }
        }
        if errors.len() >= 2 {
            let source = errors.swap_remove(0);
            return Err(Error::Aborted {
                history: Box::new(self.history.clone()),
                source: Box::new(source),
            });
        }

        let new_best = self.history.best().expect("non-empty");
        // A new incumbent, whichever candidate found it, restarts the local
        // search around it at full width.
        let region = if new_best.x() == best.x() {
            region.advance(None)
        } else {
            TrustRegion::from_config(new_best.x().clone(), &self.config.local_config())?
        };
        let trust_region_width = region.max_half_width();
        self.region = Some(region);

        let new_best = new_best.objective_value();
        let improved = best.objective_value() - new_best > self.config.improvement_tol;
        if improved {
            self.stagnation = 0;
        } else {
            self.stagnation += 1;
        }

        Ok(IterationReport {
            iteration: it,
            best_objective: new_best,
            global_ei,
            trust_region_width,
            evaluations: added,
            improved,
            failures,
        })
    }

    /// Iterates until the stopping rule is met, reporting each iteration.
    pub fn run_to_end(&mut self, mut progress: impl FnMut(&IterationReport)) -> Result<()> {
        while !self.finished() {
            let report = self.iterate()?;
            progress(&report);
        }
        Ok(())
    }
}

/// Full optimization run: initial design, then refinement iterations until
/// stagnation or budget exhaustion.
pub fn run<S: Solver + ?Sized>(
    config: &OptimizerConfig,
    space: &ParameterSpace,
    solver: &S,
    spec: &ObjectiveSpec,
) -> Result<(RunHistory, DesignEvaluation)> {
    run_with_progress(config, space, solver, spec, |_| {})
}

pub fn run_with_progress<S: Solver + ?Sized>(
    config: &OptimizerConfig,
    space: &ParameterSpace,
    solver: &S,
    spec: &ObjectiveSpec,
    progress: impl FnMut(&IterationReport),
) -> Result<(RunHistory, DesignEvaluation)> {
    let mut opt = Optimizer::initialize(config.clone(), space.clone(), solver, spec.clone())?;
    opt.run_to_end(progress)?;
    let history = opt.into_history();
    let best = history.best().expect("non-empty history").clone();
    Ok((history, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::SolverError;
    use crate::solver::SolverOutput;
    use crate::spectrum::{ComplexSpectrum, FrequencyGrid};
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// `re = x0`, `im = 0.1`: minimum at x0 = 0.
    struct Slope {
        grid: FrequencyGrid,
        calls: AtomicUsize,
        fail_after: usize,
    }

    impl Slope {
        fn new(fail_after: usize) -> Self {
            Self {
                grid: FrequencyGrid::new(vec![1.0, 2.0]).unwrap(),
                calls: AtomicUsize::new(0),
                fail_after,
            }
        }
    }

    impl Solver for Slope {
        fn grid(&self) -> &FrequencyGrid {
            &self.grid
        }

        fn solve(&self, x: &DesignVector) -> Result<SolverOutput, SolverError> {
            if self.calls.fetch_add(1, Ordering::SeqCst) >= self.fail_after {
                return Err(SolverError::Domain("boom".into()));
            }
            let d = x.len();
            let mut grad = vec![0.0; d];
            grad[0] = 1.0;
            Ok(SolverOutput {
                spectrum: ComplexSpectrum::new(self.grid.clone(), vec![x[0]; 2], vec![0.1; 2])
                    .unwrap(),
                d_re: grad.repeat(2),
                d_im: vec![0.0; 2 * d],
            })
        }
    }

    fn spec() -> ObjectiveSpec {
        ObjectiveSpec::new(vec![1.5], &FrequencyGrid::new(vec![1.0, 2.0]).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::new(DoeConfig::Lhs { size: 1 });
        assert!(c.validate().is_err());
        c.doe = DoeConfig::Lhs { size: 4 };
        assert!(c.validate().is_ok());
        c.max_iterations = 0;
        assert!(c.validate().is_err());
        c.max_iterations = 3;
        c.stagnation_limit = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn doe_of_two_picks_lower() {
        let space = ParameterSpace::from_bounds(&[(-1.0, 0.5)]).unwrap();
        let solver = Slope::new(usize::MAX);
        let config = OptimizerConfig::new(DoeConfig::FullFactorial { levels: vec![2] });
        let opt = Optimizer::initialize(config, space, &solver, spec()).unwrap();
        let h = opt.history();
        assert_eq!(h.len(), 2);
        // |-1 + 0.1j| > |0.5 + 0.1j|
        assert_eq!(h.best_index(), Some(1));
        assert!(h.entries().iter().all(|e| e.origin == Origin::Doe));
    }

    #[test]
    fn doe_failure_aborts() {
        let space = ParameterSpace::from_bounds(&[(-1.0, 1.0)]).unwrap();
        let solver = Slope::new(1);
        let config = OptimizerConfig::new(DoeConfig::Lhs { size: 3 });
        assert!(matches!(
            Optimizer::initialize(config, space, &solver, spec()),
            Err(Error::Solver { .. })
        ));
    }

    #[test]
    fn single_failure_is_tolerated_and_double_aborts() {
        let space = ParameterSpace::from_bounds(&[(-1.0, 1.0), (0.0, 1.0)]).unwrap();
        let mut config = OptimizerConfig::new(DoeConfig::FullFactorial { levels: vec![2, 2] });
        config.max_iterations = 5;

        // 4 DoE calls succeed, then the global call succeeds, the local one fails
        let solver = Slope::new(5);
        let mut opt =
            Optimizer::initialize(config.clone(), space.clone(), &solver, spec()).unwrap();
        let report = opt.iterate().unwrap();
        assert_eq!(report.evaluations, 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(opt.history().len(), 5);

        let solver = Slope::new(4);
        let mut opt = Optimizer::initialize(config, space, &solver, spec()).unwrap();
        match opt.iterate() {
            Err(Error::Aborted { history, .. }) => assert_eq!(history.len(), 4),
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn refinement_reaches_optimum_and_accounts_calls() {
        let space = ParameterSpace::from_bounds(&[(-1.0, 0.7)]).unwrap();
        let solver = Slope::new(usize::MAX);
        let mut config = OptimizerConfig::new(DoeConfig::Lhs { size: 3 });
        config.max_iterations = 8;
        let (history, best) = run(&config, &space, &solver, &spec()).unwrap();
        assert!(best.x()[0].abs() < 1e-3, "{:?}", best.x());
        assert_eq!(history.len(), solver.calls.load(Ordering::SeqCst));
        assert!(history.len() <= config.max_evaluations());
        let bsf = history.best_so_far();
        assert!(bsf.windows(2).all(|w| w[1] <= w[0]));
        let first_refinement = history
            .entries()
            .iter()
            .position(|e| e.origin != Origin::Doe)
            .unwrap();
        assert!(history.entries()[first_refinement..]
            .iter()
            .all(|e| e.origin != Origin::Doe));
    }
}
