//! Interpolating global surrogate built from all local Taylor models, its
//! error estimator, and Expected Improvement.
//!
//! The global prediction at `x` is a convex combination of every anchor's
//! Taylor prediction at `x`. Weights are regularized inverse-distance
//! (Shepard-type) weights
//!
//! ```text
//! ŵ_i(x) = (‖x - x_i‖² + ε²)^(-p/2),   w_i = ŵ_i / Σ_j ŵ_j
//! ```
//!
//! in normalized coordinates. For small `ε` the weight of an anchor tends to
//! one at that anchor, so the surrogate reproduces every evaluated response.
//! The uncertainty used by Expected Improvement is the gap between the global
//! objective and the objective of the nearest anchor's own Taylor model.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::design_space::{latin_hypercube_unit, DesignVector, ParameterSpace};
use crate::error::{Error, Result};
use crate::local_model::{DesignEvaluation, TaylorModel, MERGE_TOLERANCE};
use crate::search::compass_search;
use crate::spectrum::{fmt_real, ComplexSpectrum, ObjectiveProbe, ObjectiveSpec};

pub const DEFAULT_WEIGHT_EXPONENT: f64 = 4.0;
pub const DEFAULT_EPS: f64 = 1e-5;

/// Below this, sigma is treated as zero in [`expected_improvement`].
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Maximum EI under which the candidate search reports exhaustion.
pub const EI_EXHAUSTED: f64 = 1e-15;

const MAX_CLOUD: usize = 50_000;

#[derive(Debug, Clone)]
pub struct GlobalSurrogate {
    anchors: Vec<DesignEvaluation>,
    weight_exponent: f64,
    eps: f64,
    space: ParameterSpace,
}

impl GlobalSurrogate {
    pub fn new(anchors: Vec<DesignEvaluation>, space: ParameterSpace) -> Result<Self> {
        Self::with_weights(anchors, space, DEFAULT_WEIGHT_EXPONENT, DEFAULT_EPS)
    }

    pub fn with_weights(
        anchors: Vec<DesignEvaluation>,
        space: ParameterSpace,
        weight_exponent: f64,
        eps: f64,
    ) -> Result<Self> {
        let Some(first) = anchors.first() else {
            return Err(Error::InvalidSurrogate(
                "at least one anchor required".into(),
            ));
        };
        if !(weight_exponent > 0.0 && eps > 0.0) {
            return Err(Error::InvalidSurrogate(
                "weight exponent and eps must be positive".into(),
            ));
        }
        let grid = first.spectrum().grid();
        for (i, a) in anchors.iter().enumerate() {
            if a.dim() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    got: a.dim(),
                });
            }
            if a.spectrum().grid() != grid {
                return Err(Error::InvalidSurrogate(format!(
                    "anchor {i} uses a different frequency grid"
                )));
            }
            space.normalize(a.x())?;
            for (j, b) in anchors[..i].iter().enumerate() {
                if space.distance_unchecked(a.x().values(), b.x().values()) <= MERGE_TOLERANCE {
                    return Err(Error::InvalidSurrogate(format!(
                        "anchors {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(Self {
            anchors,
            weight_exponent,
            eps,
            space,
        })
    }

    pub fn anchors(&self) -> &[DesignEvaluation] {
        &self.anchors
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    /// Whether `x` lies within the merge tolerance of an anchor.
    pub fn is_near_anchor(&self, x: &DesignVector) -> bool {
        self.anchors
            .iter()
            .any(|a| self.space.distance_unchecked(a.x().values(), x.values()) <= MERGE_TOLERANCE)
    }

    /// Normalized interpolation weights at `x`, plus the nearest anchor
    /// (lowest index on ties).
    fn weights_and_nearest(&self, x: &[f64]) -> (Vec<f64>, usize) {
        let eps2 = self.eps * self.eps;
        let d2: Vec<f64> = self
            .anchors
            .iter()
            .map(|a| {
                let r = self.space.distance_unchecked(a.x().values(), x);
                r * r + eps2
            })
            .collect();
        let mut nearest = 0;
        for (i, &v) in d2.iter().enumerate() {
            if v < d2[nearest] {
                nearest = i;
            }
        }
        // scale by the largest raw weight to stay clear of overflow
        let dmin = d2[nearest];
        let half_p = 0.5 * self.weight_exponent;
        let mut w: Vec<f64> = d2.iter().map(|&v| (dmin / v).powf(half_p)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        (w, nearest)
    }

    pub fn weights(&self, x: &DesignVector) -> Vec<f64> {
        self.weights_and_nearest(x.values()).0
    }

    pub fn global_predict(&self, x: &DesignVector) -> Result<ComplexSpectrum> {
        self.space.normalize(x)?;
        let grid = self.anchors[0].spectrum().grid();
        let m = grid.len();
        let nodes: Vec<usize> = (0..m).collect();
        let (w, nearest) = self.weights_and_nearest(x.values());
        let (re, im, _) = self.blend(x.values(), &nodes, &w, nearest);
        ComplexSpectrum::new(grid.clone(), re, im)
    }

    /// Global objective and sigma at physical `x` through a probe.
    fn probe_eval(&self, probe: &ObjectiveProbe, x: &[f64]) -> (f64, f64) {
        let (w, nearest) = self.weights_and_nearest(x);
        let (re, im, (lre, lim)) = self.blend(x, probe.nodes(), &w, nearest);
        let global = probe.objective(&re, &im);
        let local = probe.objective(&lre, &lim);
        (global, (global - local).abs())
    }

    /// Weighted blend of all Taylor predictions at `nodes`, accumulated as
    /// corrections to the `reference` anchor's prediction, which is returned
    /// alongside. Identical predictions blend to exactly that value.
    #[allow(clippy::type_complexity)]
    fn blend(
        &self,
        x: &[f64],
        nodes: &[usize],
        w: &[f64],
        reference: usize,
    ) -> (Vec<f64>, Vec<f64>, (Vec<f64>, Vec<f64>)) {
        let n = nodes.len();
        let mut rre = vec![0.0; n];
        let mut rim = vec![0.0; n];
        TaylorModel::new(&self.anchors[reference]).predict_nodes(x, nodes, &mut rre, &mut rim);
        let mut dre = vec![0.0; n];
        let mut dim = vec![0.0; n];
        let mut tre = vec![0.0; n];
        let mut tim = vec![0.0; n];
        for (i, (a, &wi)) in self.anchors.iter().zip(w).enumerate() {
            if i == reference || wi == 0.0 {
                continue;
            }
            TaylorModel::new(a).predict_nodes(x, nodes, &mut tre, &mut tim);
            for k in 0..n {
                dre[k] += wi * (tre[k] - rre[k]);
                dim[k] += wi * (tim[k] - rim[k]);
            }
        }
        let re = rre.iter().zip(&dre).map(|(r, d)| r + d).collect();
        let im = rim.iter().zip(&dim).map(|(r, d)| r + d).collect();
        (re, im, (rre, rim))
    }

    fn probe(&self, spec: &ObjectiveSpec) -> Result<ObjectiveProbe> {
        ObjectiveProbe::new(self.anchors[0].spectrum().grid(), spec)
    }

    pub fn global_objective(&self, x: &DesignVector, spec: &ObjectiveSpec) -> Result<f64> {
        self.space.normalize(x)?;
        Ok(self.probe_eval(&self.probe(spec)?, x.values()).0)
    }

    /// `|global objective - nearest anchor's local objective|` at `x`.
    pub fn sigma_estimate(&self, x: &DesignVector, spec: &ObjectiveSpec) -> Result<f64> {
        self.space.normalize(x)?;
        Ok(self.probe_eval(&self.probe(spec)?, x.values()).1)
    }

    /// Writes `x1,x2,obj_dB,sigma_dB` on a `resolution × resolution` grid
    /// covering the whole box (two-parameter problems only).
    pub fn write_surface_csv<W: Write>(
        &self,
        spec: &ObjectiveSpec,
        resolution: usize,
        mut w: W,
    ) -> Result<()> {
        if self.space.dim() != 2 {
            return Err(Error::InvalidConfig(format!(
                "surface dump needs exactly 2 parameters, got {}",
                self.space.dim()
            )));
        }
        if resolution < 2 {
            return Err(Error::InvalidConfig(
                "surface resolution must be >= 2".into(),
            ));
        }
        let probe = self.probe(spec)?;
        let step = 1.0 / (resolution - 1) as f64;
        let rows: Vec<(DesignVector, f64, f64)> = (0..resolution * resolution)
            .into_par_iter()
            .map(|flat| {
                let u = [
                    (flat / resolution) as f64 * step,
                    (flat % resolution) as f64 * step,
                ];
                let x = self.space.denormalize(&u);
                let (obj, sigma) = self.probe_eval(&probe, x.values());
                (x, obj, sigma)
            })
            .collect();
        writeln!(w, "x1,x2,obj_dB,sigma_dB")?;
        for (x, obj, sigma) in rows {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_real(x[0]),
                fmt_real(x[1]),
                fmt_real(obj),
                fmt_real(sigma)
            )?;
        }
        Ok(())
    }

    /// Maximizes Expected Improvement over a seeded Latin hypercube cloud of
    /// `4096 d` points (at most 50 000), then polishes the best cloud point by
    /// compass search on EI.
    pub fn propose_global_candidate(
        &self,
        obj_best: f64,
        spec: &ObjectiveSpec,
        seed: u64,
    ) -> Result<EiResult> {
        if self.anchors.len() < 2 {
            return Err(Error::InvalidSurrogate(
                "global candidate search needs at least two anchors".into(),
            ));
        }
        let probe = self.probe(spec)?;
        let d = self.space.dim();
        let n = (4096 * d).min(MAX_CLOUD);
        let cloud = latin_hypercube_unit(d, n, seed);
        let score = |u: &[f64]| {
            let x = self.space.denormalize(u);
            let (obj, sigma) = self.probe_eval(&probe, x.values());
            (expected_improvement(obj_best, obj, sigma), obj, sigma)
        };
        let scored: Vec<f64> = cloud.par_iter().map(|u| score(u).0).collect();
        let mut best = 0;
        for (i, &ei) in scored.iter().enumerate() {
            if ei > scored[best] {
                best = i;
            }
        }

        let spacing = (n as f64).powf(-1.0 / d as f64);
        let (u, _) = compass_search(
            |u: &[f64]| -score(u).0,
            cloud[best].clone(),
            -scored[best],
            &vec![0.0; d],
            &vec![1.0; d],
            &vec![spacing; d],
            1e-6,
        );
        let (ei, obj_approx, sigma) = score(&u);
        Ok(EiResult {
            candidate: self.space.denormalize(&u),
            ei,
            obj_approx,
            sigma,
        })
    }
}

/// The maximizer of Expected Improvement and the quantities behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct EiResult {
    pub candidate: DesignVector,
    pub ei: f64,
    pub obj_approx: f64,
    pub sigma: f64,
}

impl EiResult {
    /// No candidate promises any improvement.
    pub fn exhausted(&self) -> bool {
        self.ei < EI_EXHAUSTED
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Expected Improvement for minimization.
pub fn expected_improvement(obj_best: f64, obj_approx: f64, sigma: f64) -> f64 {
    let gain = obj_best - obj_approx;
    if sigma < SIGMA_FLOOR {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    (gain * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
}
