//! Bounded parameter domains and initial designs of experiments.
//!
//! Every distance and trust region in the optimizer is measured in normalized
//! coordinates, where each parameter is mapped affinely onto `[0, 1]`. Solver
//! calls always receive physical values.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest design a full factorial may produce.
pub const MAX_FACTORIAL_POINTS: usize = 1_000_000;

/// A named design variable with a closed interval of admissible values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameter {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl Parameter {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Ordered box of design parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSpace {
    params: Vec<Parameter>,
}

impl ParameterSpace {
    pub fn new(params: Vec<Parameter>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSpace(
                "at least one parameter required".into(),
            ));
        }
        let mut seen = HashSet::new();
        for p in &params {
            if !(p.lower.is_finite() && p.upper.is_finite()) {
                return Err(Error::InvalidSpace(format!(
                    "parameter `{}` has non-finite bounds",
                    p.name
                )));
            }
            if p.lower >= p.upper {
                return Err(Error::InvalidSpace(format!(
                    "parameter `{}` needs lower < upper, got [{}, {}]",
                    p.name, p.lower, p.upper
                )));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate parameter name `{}`",
                    p.name
                )));
            }
        }
        Ok(Self { params })
    }

    /// Convenience constructor for `[lower, upper]` pairs named `x1, x2, ...`.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            bounds
                .iter()
                .enumerate()
                .map(|(i, &(lo, hi))| Parameter::new(format!("x{}", i + 1), lo, hi))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|p| p.name.as_str())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Builds a design vector, rejecting wrong lengths and out-of-bounds values.
    pub fn vector(&self, values: Vec<f64>) -> Result<DesignVector> {
        self.check_dim(values.len())?;
        for (p, &v) in self.params.iter().zip(&values) {
            if !(v >= p.lower && v <= p.upper) {
                return Err(Error::OutOfBounds {
                    name: p.name.clone(),
                    value: v,
                    lower: p.lower,
                    upper: p.upper,
                });
            }
        }
        Ok(DesignVector(values))
    }

    pub fn center(&self) -> DesignVector {
        self.denormalize(&vec![0.5; self.dim()])
    }

    pub fn normalize(&self, x: &DesignVector) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        for (p, &v) in self.params.iter().zip(x.values()) {
            if !(v >= p.lower && v <= p.upper) {
                return Err(Error::OutOfBounds {
                    name: p.name.clone(),
                    value: v,
                    lower: p.lower,
                    upper: p.upper,
                });
            }
        }
        Ok(self.normalize_unchecked(x.values()))
    }

    pub(crate) fn normalize_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.params
            .iter()
            .zip(x)
            .map(|(p, &v)| (v - p.lower) / p.width())
            .collect()
    }

    /// Maps unit coordinates back to physical units. Inputs are clamped to
    /// `[0, 1]`; the endpoints map onto the bounds exactly.
    pub fn denormalize(&self, u: &[f64]) -> DesignVector {
        debug_assert_eq!(u.len(), self.dim());
        DesignVector(
            self.params
                .iter()
                .zip(u)
                .map(|(p, &t)| {
                    let t = t.clamp(0.0, 1.0);
                    (p.lower * (1.0 - t) + p.upper * t).clamp(p.lower, p.upper)
                })
                .collect(),
        )
    }

    /// Euclidean distance in normalized coordinates.
    pub fn distance(&self, a: &DesignVector, b: &DesignVector) -> Result<f64> {
        self.check_dim(a.len())?;
        self.check_dim(b.len())?;
        Ok(self.distance_unchecked(a.values(), b.values()))
    }

    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        self.params
            .iter()
            .zip(a.iter().zip(b))
            .map(|(p, (&x, &y))| {
                let t = (x - y) / p.width();
                t * t
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Cartesian product of equally spaced levels, bounds included, with the
    /// last dimension varying fastest.
    pub fn full_factorial(&self, levels: &[usize]) -> Result<Vec<DesignVector>> {
        self.check_dim(levels.len())?;
        if let Some(&l) = levels.iter().find(|&&l| l < 2) {
            return Err(Error::InvalidDoe(format!(
                "every dimension needs >= 2 levels, got {l}"
            )));
        }
        let total = levels
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l))
            .filter(|&n| n <= MAX_FACTORIAL_POINTS)
            .ok_or_else(|| {
                Error::InvalidDoe(format!(
                    "full factorial {levels:?} exceeds {MAX_FACTORIAL_POINTS} points"
                ))
            })?;

        let d = self.dim();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let u: Vec<f64> = idx
                .iter()
                .zip(levels)
                .map(|(&i, &l)| i as f64 / (l - 1) as f64)
                .collect();
            out.push(self.denormalize(&u));
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < levels[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }

    /// Plain Latin hypercube: each of the `n` equal-width bins of every
    /// parameter holds exactly one point, placed uniformly inside its bin.
    pub fn latin_hypercube(&self, n: usize, seed: u64) -> Result<Vec<DesignVector>> {
        if n < 1 {
            return Err(Error::InvalidDoe("latin hypercube needs n >= 1".into()));
        }
        Ok(latin_hypercube_unit(self.dim(), n, seed)
            .iter()
            .map(|u| self.denormalize(u))
            .collect())
    }
}

/// Latin hypercube in the unit cube; rows are points.
pub(crate) fn latin_hypercube_unit(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    // keep samples off the bin edges so the bin of every point is unambiguous
    const EDGE: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![0.0; d]; n];
    let mut bins: Vec<usize> = (0..n).collect();
    for j in 0..d {
        bins.shuffle(&mut rng);
        for (point, &bin) in points.iter_mut().zip(&bins) {
            let r: f64 = rng.random();
            point[j] = (bin as f64 + EDGE + r * (1.0 - 2.0 * EDGE)) / n as f64;
        }
    }
    points
}

/// A point of the design space in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DesignVector(Vec<f64>);

impl DesignVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for DesignVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
