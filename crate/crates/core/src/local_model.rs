//! First-order Taylor models of the complex response and the shrinking
//! trust-region search built on them.
//!
//! The real and imaginary parts are linearized separately around an evaluated
//! design. Only afterwards are they assembled into dB, so the predicted
//! objective can be strongly nonlinear even though the model itself is affine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design_space::{DesignVector, ParameterSpace};
use crate::error::{Error, Result};
use crate::search::compass_search;
use crate::solver::{Solver, SolverOutput};
use crate::spectrum::{ComplexSpectrum, ObjectiveProbe, ObjectiveSpec};

/// Decrease in dB that counts as an improvement.
pub const IMPROVEMENT_THRESHOLD: f64 = 1e-9;

/// Normalized distance under which two designs are treated as the same point.
pub const MERGE_TOLERANCE: f64 = 1e-9;

/// Step size at which the inner surrogate search stops.
const POLISH_TOL: f64 = 1e-6;

/// A solver call together with the objective derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignEvaluation {
    x: DesignVector,
    spectrum: ComplexSpectrum,
    d_re: Vec<f64>,
    d_im: Vec<f64>,
    objective_value: f64,
}

impl DesignEvaluation {
    pub fn new(x: DesignVector, output: SolverOutput, spec: &ObjectiveSpec) -> Result<Self> {
        let SolverOutput {
            spectrum,
            d_re,
            d_im,
        } = output;
        let expected = spectrum.grid().len() * x.len();
        for (name, arr) in [("d_re", &d_re), ("d_im", &d_im)] {
            if arr.len() != expected {
                return Err(Error::InvalidSpectrum(format!(
                    "{name} has {} entries, expected {expected}",
                    arr.len()
                )));
            }
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpectrum(format!(
                    "{name} has non-finite entries"
                )));
            }
        }
        let objective_value = spectrum.objective(spec)?;
        Ok(Self {
            x,
            spectrum,
            d_re,
            d_im,
            objective_value,
        })
    }

    /// Calls `solver` at `x` and wraps the result.
    pub fn evaluate<S: Solver + ?Sized>(
        solver: &S,
        x: DesignVector,
        spec: &ObjectiveSpec,
    ) -> Result<Self> {
        match solver.solve(&x) {
            Ok(out) => Self::new(x, out, spec),
            Err(source) => Err(Error::Solver {
                x: x.into_inner(),
                source,
            }),
        }
    }

    pub fn x(&self) -> &DesignVector {
        &self.x
    }

    pub fn spectrum(&self) -> &ComplexSpectrum {
        &self.spectrum
    }

    pub fn objective_value(&self) -> f64 {
        self.objective_value
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `∂re/∂x_i` at node `k`.
    pub fn d_re(&self, k: usize, i: usize) -> f64 {
        self.d_re[k * self.dim() + i]
    }

    /// `∂im/∂x_i` at node `k`.
    pub fn d_im(&self, k: usize, i: usize) -> f64 {
        self.d_im[k * self.dim() + i]
    }
}

/// Linear predictor of the complex spectrum anchored at one evaluation.
#[derive(Debug, Clone, Copy)]
pub struct TaylorModel<'a> {
    anchor: &'a DesignEvaluation,
}

impl<'a> TaylorModel<'a> {
    pub fn new(anchor: &'a DesignEvaluation) -> Self {
        Self { anchor }
    }

    pub fn anchor(&self) -> &'a DesignEvaluation {
        self.anchor
    }

    pub fn predict(&self, x: &DesignVector) -> Result<ComplexSpectrum> {
        let a = self.anchor;
        if x.len() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: x.len(),
            });
        }
        let m = a.spectrum.grid().len();
        let nodes: Vec<usize> = (0..m).collect();
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        self.predict_nodes(x.values(), &nodes, &mut re, &mut im);
        ComplexSpectrum::new(a.spectrum.grid().clone(), re, im)
    }

    /// Prediction at a subset of nodes; `x` in physical units.
    pub(crate) fn predict_nodes(&self, x: &[f64], nodes: &[usize], re: &mut [f64], im: &mut [f64]) {
        let a = self.anchor;
        let d = a.dim();
        let ax = a.x.values();
        for (slot, &k) in nodes.iter().enumerate() {
            let row_re = &a.d_re[k * d..(k + 1) * d];
            let row_im = &a.d_im[k * d..(k + 1) * d];
            let mut r = a.spectrum.re()[k];
            let mut i = a.spectrum.im()[k];
            for j in 0..d {
                let dx = x[j] - ax[j];
                if dx != 0.0 {
                    r += row_re[j] * dx;
                    i += row_im[j] * dx;
                }
            }
            re[slot] = r;
            im[slot] = i;
        }
    }

    pub(crate) fn probe_objective(&self, probe: &ObjectiveProbe, x: &[f64]) -> f64 {
        let n = probe.nodes().len();
        let mut re = [0.0; 8];
        let mut im = [0.0; 8];
        if n <= 8 {
            self.predict_nodes(x, probe.nodes(), &mut re[..n], &mut im[..n]);
            probe.objective(&re[..n], &im[..n])
        } else {
            let mut re = vec![0.0; n];
            let mut im = vec![0.0; n];
            self.predict_nodes(x, probe.nodes(), &mut re, &mut im);
            probe.objective(&re, &im)
        }
    }

    /// Objective of the linearized spectrum at `x`.
    pub fn local_objective(&self, x: &DesignVector, spec: &ObjectiveSpec) -> Result<f64> {
        if x.len() != self.anchor.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.anchor.dim(),
                got: x.len(),
            });
        }
        let probe = ObjectiveProbe::new(self.anchor.spectrum.grid(), spec)?;
        Ok(self.probe_objective(&probe, x.values()))
    }
}

/// Knobs of the shrinking search domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalConfig {
    /// Initial half-width of the search box in normalized units.
    pub initial_half_width: f64,
    pub shrink_factor: f64,
    pub min_half_width: f64,
    /// Consecutive non-improving steps before `run_local` stops.
    pub stagnation_local: usize,
    pub max_local_steps: usize,
    pub seed: u64,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            initial_half_width: 0.25,
            shrink_factor: 0.5,
            min_half_width: 1e-4,
            stagnation_local: 3,
            max_local_steps: 20,
            seed: 0,
        }
    }
}

impl LocalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_half_width > 0.0 && self.initial_half_width <= 0.5) {
            return Err(Error::InvalidConfig(
                "initial_half_width must be in (0, 0.5]".into(),
            ));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(Error::InvalidConfig(
                "shrink_factor must be in (0, 1)".into(),
            ));
        }
        if !(self.min_half_width > 0.0 && self.min_half_width <= self.initial_half_width) {
            return Err(Error::InvalidConfig(
                "min_half_width must be in (0, initial_half_width]".into(),
            ));
        }
        if self.stagnation_local < 1 || self.max_local_steps < 1 {
            return Err(Error::InvalidConfig(
                "stagnation_local and max_local_steps must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Box around the incumbent within which the Taylor model is trusted.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegion {
    center: DesignVector,
    half_width: Vec<f64>,
    shrink_factor: f64,
    min_half_width: f64,
}

impl TrustRegion {
    pub fn new(
        center: DesignVector,
        half_width: Vec<f64>,
        shrink_factor: f64,
        min_half_width: f64,
    ) -> Result<Self> {
        if half_width.len() != center.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: half_width.len(),
            });
        }
        if half_width.iter().any(|&h| !(h > 0.0 && h <= 0.5)) {
            return Err(Error::InvalidConfig(
                "half widths must be in (0, 0.5]".into(),
            ));
        }
        if !(shrink_factor > 0.0 && shrink_factor < 1.0) {
            return Err(Error::InvalidConfig(
                "shrink_factor must be in (0, 1)".into(),
            ));
        }
        if min_half_width.is_nan() || min_half_width <= 0.0 {
            return Err(Error::InvalidConfig(
                "min_half_width must be positive".into(),
            ));
        }
        Ok(Self {
            center,
            half_width,
            shrink_factor,
            min_half_width,
        })
    }

    pub fn from_config(center: DesignVector, config: &LocalConfig) -> Result<Self> {
        let d = center.len();
        Self::new(
            center,
            vec![config.initial_half_width; d],
            config.shrink_factor,
            config.min_half_width,
        )
    }

    pub fn center(&self) -> &DesignVector {
        &self.center
    }

    pub fn half_width(&self) -> &[f64] {
        &self.half_width
    }

    pub fn max_half_width(&self) -> f64 {
        self.half_width.iter().copied().fold(0.0, f64::max)
    }

    /// The region box intersected with the unit cube, in normalized units.
    pub fn unit_box(&self, space: &ParameterSpace) -> (Vec<f64>, Vec<f64>) {
        let c = space.normalize_unchecked(self.center.values());
        let lo = c
            .iter()
            .zip(&self.half_width)
            .map(|(&c, &h)| (c - h).max(0.0))
            .collect();
        let hi = c
            .iter()
            .zip(&self.half_width)
            .map(|(&c, &h)| (c + h).min(1.0))
            .collect();
        (lo, hi)
    }

    fn shrunk(&self) -> Vec<f64> {
        self.half_width
            .iter()
            .map(|&h| (h * self.shrink_factor).max(self.min_half_width).min(h))
            .collect()
    }

    /// Next region after a local step: recentered on an improving candidate,
    /// otherwise kept in place. Shrinks in both cases.
    pub fn advance(&self, improved_to: Option<&DesignVector>) -> Self {
        Self {
            center: improved_to.cloned().unwrap_or_else(|| self.center.clone()),
            half_width: self.shrunk(),
            shrink_factor: self.shrink_factor,
            min_half_width: self.min_half_width,
        }
    }
}

/// Minimizes the linearized objective over the trust region.
///
/// Seeds a dense grid (33 points per axis for `d <= 2`, otherwise `256 d`
/// seeded random points), then polishes the best seed with a compass search.
/// The center wins all ties.
pub fn minimize_on_region(
    model: &TaylorModel<'_>,
    region: &TrustRegion,
    spec: &ObjectiveSpec,
    space: &ParameterSpace,
    seed: u64,
) -> Result<DesignVector> {
    let d = space.dim();
    if region.center.len() != d || model.anchor.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: region.center.len(),
        });
    }
    let probe = ObjectiveProbe::new(model.anchor.spectrum.grid(), spec)?;
    let (lo, hi) = region.unit_box(space);
    let eval = |u: &[f64]| {
        let x = space.denormalize(u);
        model.probe_objective(&probe, x.values())
    };

    let center = space.normalize(&region.center)?;
    let center_f = eval(&center);
    let mut best_u = center;
    let mut best_f = center_f;

    let mut consider = |u: Vec<f64>| {
        let f = eval(&u);
        if f < best_f {
            best_f = f;
            best_u = u;
        }
    };
    let initial_step: Vec<f64>;
    if d <= 2 {
        const PER_AXIS: usize = 33;
        let total = PER_AXIS.pow(d as u32);
        for flat in 0..total {
            let mut rem = flat;
            let mut u = vec![0.0; d];
            for j in (0..d).rev() {
                let t = (rem % PER_AXIS) as f64 / (PER_AXIS - 1) as f64;
                rem /= PER_AXIS;
                u[j] = lo[j] + t * (hi[j] - lo[j]);
            }
            consider(u);
        }
        initial_step = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l) / (PER_AXIS - 1) as f64)
            .collect();
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..256 * d {
            let u = (0..d)
                .map(|j| lo[j] + rng.random::<f64>() * (hi[j] - lo[j]))
                .collect();
            consider(u);
        }
        initial_step = lo.iter().zip(&hi).map(|(l, h)| (h - l) / 4.0).collect();
    }

    let (u, f) = compass_search(eval, best_u, best_f, &lo, &hi, &initial_step, POLISH_TOL);
    if f < center_f {
        Ok(space.denormalize(&u))
    } else {
        Ok(region.center.clone())
    }
}

/// Result of one trust-region step.
#[derive(Debug, Clone)]
pub struct LocalStep {
    /// `None` when the surrogate optimum coincided with the incumbent and no
    /// solver call was made.
    pub evaluation: Option<DesignEvaluation>,
    pub region: TrustRegion,
    pub improved: bool,
}

/// Proposes the next local candidate, or `None` if it coincides with the
/// region center.
pub fn propose_local_candidate(
    region: &TrustRegion,
    best: &DesignEvaluation,
    spec: &ObjectiveSpec,
    space: &ParameterSpace,
    seed: u64,
) -> Result<Option<DesignVector>> {
    if space.distance(region.center(), best.x())? > 0.0 {
        return Err(Error::InvalidConfig(
            "trust region must be centered on the incumbent".into(),
        ));
    }
    let model = TaylorModel::new(best);
    let candidate = minimize_on_region(&model, region, spec, space, seed)?;
    if space.distance(&candidate, best.x())? <= MERGE_TOLERANCE {
        return Ok(None);
    }
    Ok(Some(candidate))
}

/// Whether `candidate` beats `best` by more than [`IMPROVEMENT_THRESHOLD`].
pub fn improves(candidate: &DesignEvaluation, best: &DesignEvaluation) -> bool {
    candidate.objective_value < best.objective_value - IMPROVEMENT_THRESHOLD
}

/// One trust-region iteration: build the Taylor model at `best`, minimize it
/// on the region, evaluate the candidate and update the region.
pub fn local_step<S: Solver + ?Sized>(
    region: &TrustRegion,
    best: &DesignEvaluation,
    solver: &S,
    spec: &ObjectiveSpec,
    space: &ParameterSpace,
    seed: u64,
) -> Result<LocalStep> {
    let Some(candidate) = propose_local_candidate(region, best, spec, space, seed)? else {
        return Ok(LocalStep {
            evaluation: None,
            region: region.advance(None),
            improved: false,
        });
    };
    let eval = DesignEvaluation::evaluate(solver, candidate, spec)?;
    let improved = improves(&eval, best);
    Ok(LocalStep {
        region: region.advance(improved.then(|| eval.x())),
        evaluation: Some(eval),
        improved,
    })
}

/// Repeats [`local_step`] from `start` until `stagnation_local` consecutive
/// steps fail to improve or `max_local_steps` steps were taken. The returned
/// history begins with `start`.
pub fn run_local<S: Solver + ?Sized>(
    start: DesignEvaluation,
    config: &LocalConfig,
    solver: &S,
    spec: &ObjectiveSpec,
    space: &ParameterSpace,
) -> Result<Vec<DesignEvaluation>> {
    config.validate()?;
    let mut region = TrustRegion::from_config(start.x.clone(), config)?;
    let mut best = 0usize;
    let mut history = vec![start];
    let mut failures = 0;
    for step in 0..config.max_local_steps {
        let seed = config.seed.wrapping_add(step as u64);
        let out = local_step(&region, &history[best], solver, spec, space, seed)?;
        region = out.region;
        if let Some(eval) = out.evaluation {
            history.push(eval);
            if out.improved {
                best = history.len() - 1;
            }
        }
        if out.improved {
            failures = 0;
        } else {
            failures += 1;
            if failures >= config.stagnation_local {
                break;
            }
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::SolverError;
    use crate::spectrum::FrequencyGrid;

    /// Affine response `re = a + b·x`, `im = c + e·x` at every node.
    struct Affine {
        grid: FrequencyGrid,
        re: (f64, Vec<f64>),
        im: (f64, Vec<f64>),
    }

    impl Solver for Affine {
        fn grid(&self) -> &FrequencyGrid {
            &self.grid
        }

        fn solve(&self, x: &DesignVector) -> Result<SolverOutput, SolverError> {
            let m = self.grid.len();
            let dot = |c: &[f64]| c.iter().zip(x.values()).map(|(a, b)| a * b).sum::<f64>();
            let re = self.re.0 + dot(&self.re.1);
            let im = self.im.0 + dot(&self.im.1);
            Ok(SolverOutput {
                spectrum: ComplexSpectrum::new(self.grid.clone(), vec![re; m], vec![im; m])
                    .unwrap(),
                d_re: self.re.1.repeat(m),
                d_im: self.im.1.repeat(m),
            })
        }
    }

    fn setup_1d(re: (f64, f64), im: (f64, f64)) -> (Affine, ParameterSpace, ObjectiveSpec) {
        let grid = FrequencyGrid::new(vec![2.0, 3.0]).unwrap();
        let spec = ObjectiveSpec::new(vec![2.0], &grid).unwrap();
        let space = ParameterSpace::from_bounds(&[(-1.0, 1.0)]).unwrap();
        let solver = Affine {
            grid,
            re: (re.0, vec![re.1]),
            im: (im.0, vec![im.1]),
        };
        (solver, space, spec)
    }

    fn eval_at(
        solver: &Affine,
        space: &ParameterSpace,
        spec: &ObjectiveSpec,
        x: &[f64],
    ) -> DesignEvaluation {
        DesignEvaluation::evaluate(solver, space.vector(x.to_vec()).unwrap(), spec).unwrap()
    }

    #[test]
    fn evaluation_shape_checks() {
        let (solver, space, spec) = setup_1d((0.5, 1.0), (0.1, 0.0));
        let x = space.vector(vec![0.0]).unwrap();
        let mut out = solver.solve(&x).unwrap();
        out.d_re.pop();
        assert!(DesignEvaluation::new(x.clone(), out, &spec).is_err());
        let mut out = solver.solve(&x).unwrap();
        out.d_im[0] = f64::INFINITY;
        assert!(DesignEvaluation::new(x, out, &spec).is_err());
    }

    #[test]
    fn taylor_exact_at_anchor() {
        let (solver, space, spec) = setup_1d((0.5, 2.0), (0.3, -1.0));
        let e = eval_at(&solver, &space, &spec, &[0.2]);
        let model = TaylorModel::new(&e);
        assert_eq!(&model.predict(e.x()).unwrap(), e.spectrum());
        assert_eq!(
            model.local_objective(e.x(), &spec).unwrap(),
            e.objective_value()
        );
    }

    #[test]
    fn taylor_direct_formula() {
        let (solver, space, spec) = setup_1d((0.5, 2.0), (0.0, 0.0));
        let e = eval_at(&solver, &space, &spec, &[0.0]);
        let p = TaylorModel::new(&e)
            .predict(&space.vector(vec![0.1]).unwrap())
            .unwrap();
        assert!((p.re()[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn local_objective_minimum_of_assembled_db() {
        // re(x) = x, im = 0.2: minimum at x = 0 with 20 log10(0.2)
        let (solver, space, spec) = setup_1d((0.0, 1.0), (0.2, 0.0));
        let e = eval_at(&solver, &space, &spec, &[0.6]);
        let model = TaylorModel::new(&e);
        let at0 = model
            .local_objective(&space.vector(vec![0.0]).unwrap(), &spec)
            .unwrap();
        assert!((at0 - 20.0 * 0.2f64.log10()).abs() < 1e-12);
        assert!((at0 + 13.979).abs() < 1e-3);
        for k in 0..=200 {
            let x = -1.0 + k as f64 * 0.01;
            let v = model
                .local_objective(&space.vector(vec![x]).unwrap(), &spec)
                .unwrap();
            assert!(v >= at0 - 1e-12);
            assert!(v >= -300.0);
        }
    }

    #[test]
    fn minimize_constant_model_returns_center() {
        let (solver, space, spec) = setup_1d((0.4, 0.0), (0.2, 0.0));
        let e = eval_at(&solver, &space, &spec, &[0.3]);
        let region = TrustRegion::new(e.x().clone(), vec![0.25], 0.5, 1e-4).unwrap();
        let c = minimize_on_region(&TaylorModel::new(&e), &region, &spec, &space, 1).unwrap();
        assert_eq!(&c, e.x());
    }

    #[test]
    fn minimize_finds_zero_crossing() {
        // re = 0.3 - 1.5 x crosses zero at x = 0.2 (normalized 0.6), im = 0.05
        let (solver, space, spec) = setup_1d((0.3, -1.5), (0.05, 0.0));
        let e = eval_at(&solver, &space, &spec, &[0.0]);
        let region = TrustRegion::new(e.x().clone(), vec![0.25], 0.5, 1e-4).unwrap();
        let c = minimize_on_region(&TaylorModel::new(&e), &region, &spec, &space, 1).unwrap();
        assert!((c[0] - 0.2).abs() < 4e-6, "{c:?}");
    }

    #[test]
    fn minimize_stays_in_region_and_bounds() {
        let (solver, space, spec) = setup_1d((0.3, -0.1), (0.05, 0.0));
        let e = eval_at(&solver, &space, &spec, &[0.9]);
        let region = TrustRegion::new(e.x().clone(), vec![0.25], 0.5, 1e-4).unwrap();
        let c = minimize_on_region(&TaylorModel::new(&e), &region, &spec, &space, 1).unwrap();
        // zero crossing at x = 3 lies outside; optimum is the upper bound
        assert_eq!(c[0], 1.0);
        let e = eval_at(&solver, &space, &spec, &[-0.5]);
        let region = TrustRegion::new(e.x().clone(), vec![0.1], 0.5, 1e-4).unwrap();
        let c = minimize_on_region(&TaylorModel::new(&e), &region, &spec, &space, 1).unwrap();
        assert!((c[0] - -0.3).abs() < 1e-12);
    }

    #[test]
    fn region_state_machine() {
        let space = ParameterSpace::from_bounds(&[(0.0, 1.0)]).unwrap();
        let c = space.vector(vec![0.5]).unwrap();
        let r = TrustRegion::new(c.clone(), vec![0.25], 0.5, 1e-4).unwrap();
        let moved = space.vector(vec![0.6]).unwrap();
        let ok = r.advance(Some(&moved));
        assert_eq!(ok.center(), &moved);
        assert_eq!(ok.half_width(), &[0.125]);
        let fail = r.advance(None);
        assert_eq!(fail.center(), &c);
        assert_eq!(fail.half_width(), &[0.125]);

        let tight = TrustRegion::new(c.clone(), vec![1e-4], 0.5, 1e-4).unwrap();
        assert_eq!(tight.advance(None).half_width(), &[1e-4]);
        let below = TrustRegion::new(c.clone(), vec![5e-5], 0.5, 1e-4).unwrap();
        assert_eq!(below.advance(None).half_width(), &[5e-5]);

        assert!(TrustRegion::new(c.clone(), vec![0.6], 0.5, 1e-4).is_err());
        assert!(TrustRegion::new(c.clone(), vec![0.2], 1.0, 1e-4).is_err());
        assert!(TrustRegion::new(c, vec![0.2], 0.5, 0.0).is_err());
    }

    #[test]
    fn local_step_improves_and_recenters() {
        let (solver, space, spec) = setup_1d((0.3, -1.5), (0.05, 0.0));
        let best = eval_at(&solver, &space, &spec, &[0.0]);
        let region = TrustRegion::new(best.x().clone(), vec![0.25], 0.5, 1e-4).unwrap();
        let step = local_step(&region, &best, &solver, &spec, &space, 0).unwrap();
        assert!(step.improved);
        let e = step.evaluation.unwrap();
        assert_eq!(step.region.center(), e.x());
        assert_eq!(step.region.half_width(), &[0.125]);
    }

    #[test]
    fn local_step_requires_centered_region() {
        let (solver, space, spec) = setup_1d((0.3, -1.5), (0.05, 0.0));
        let best = eval_at(&solver, &space, &spec, &[0.0]);
        let region =
            TrustRegion::new(space.vector(vec![0.5]).unwrap(), vec![0.25], 0.5, 1e-4).unwrap();
        assert!(local_step(&region, &best, &solver, &spec, &space, 0).is_err());
    }

    #[test]
    fn run_local_stops_at_stationary_point() {
        let (solver, space, spec) = setup_1d((0.3, 0.0), (0.05, 0.0));
        let start = eval_at(&solver, &space, &spec, &[0.0]);
        let cfg = LocalConfig::default();
        let hist = run_local(start.clone(), &cfg, &solver, &spec, &space).unwrap();
        assert_eq!(hist, vec![start]);
    }

    #[test]
    fn config_validation() {
        assert!(LocalConfig::default().validate().is_ok());
        let bad = LocalConfig {
            shrink_factor: 1.0,
            ..LocalConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = LocalConfig {
            initial_half_width: 0.7,
            ..LocalConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
