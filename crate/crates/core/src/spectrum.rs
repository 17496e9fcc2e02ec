//! Complex reflection spectra, dB conversion and the scalar objective.
//!
//! Off-grid targets are handled by interpolating the real and imaginary parts
//! separately and converting to dB afterwards; dB values are never
//! interpolated.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitudes below this are clamped before taking the logarithm.
pub const MAGNITUDE_FLOOR: f64 = 1e-15;

/// Strictly increasing, positive frequency nodes in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid {
    freqs: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.len() < 2 {
            return Err(Error::InvalidGrid("at least two nodes required".into()));
        }
        if freqs.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(Error::InvalidGrid(
                "frequencies must be finite and positive".into(),
            ));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self { freqs })
    }

    /// `n` equally spaced nodes from `start` to `stop` inclusive.
    pub fn uniform(start: f64, stop: f64, n: usize) -> Result<Self> {
        Self::bands(&[(start, stop, n)])
    }

    /// Concatenation of uniform bands, e.g. one band per service of interest.
    pub fn bands(bands: &[(f64, f64, usize)]) -> Result<Self> {
        let mut freqs = Vec::new();
        for &(start, stop, n) in bands {
            if n < 2 {
                return Err(Error::InvalidGrid(
                    "each band needs at least two nodes".into(),
                ));
            }
            let step = (stop - start) / (n - 1) as f64;
            freqs.extend((0..n).map(|k| {
                if k == n - 1 {
                    stop
                } else {
                    start + step * k as f64
                }
            }));
        }
        Self::new(freqs)
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.freqs[0], self.freqs[self.freqs.len() - 1])
    }

    /// Locates `f`: `(lo, hi, t)` with `f = (1 - t) f[lo] + t f[hi]`.
    /// Grid nodes resolve to `lo == hi` and `t == 0`.
    pub(crate) fn locate(&self, f: f64) -> Result<(usize, usize, f64)> {
        let (lo, hi) = self.span();
        if !(f >= lo && f <= hi) {
            return Err(Error::FrequencyOutOfSpan { freq: f, lo, hi });
        }
        match self.freqs.binary_search_by(|v| v.total_cmp(&f)) {
            Ok(k) => Ok((k, k, 0.0)),
            Err(k) => {
                let (a, b) = (self.freqs[k - 1], self.freqs[k]);
                Ok((k - 1, k, (f - a) / (b - a)))
            }
        }
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(g: FrequencyGrid) -> Self {
        g.freqs
    }
}

/// `20 log10 |re + j im|` with the magnitude floor applied.
pub fn db(re: f64, im: f64) -> f64 {
    20.0 * re.hypot(im).max(MAGNITUDE_FLOOR).log10()
}

/// Sampled complex response on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexSpectrum {
    grid: FrequencyGrid,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexSpectrum {
    pub fn new(grid: FrequencyGrid, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != grid.len() || im.len() != grid.len() {
            return Err(Error::InvalidSpectrum(format!(
                "grid has {} nodes but re/im have {}/{}",
                grid.len(),
                re.len(),
                im.len()
            )));
        }
        if re.iter().chain(&im).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite sample".into()));
        }
        Ok(Self { grid, re, im })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn to_db(&self) -> Vec<f64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| db(r, i))
            .collect()
    }

    pub fn sample_db(&self, f: f64) -> Result<f64> {
        let (lo, hi, t) = self.grid.locate(f)?;
        Ok(interpolated_db(&self.re, &self.im, lo, hi, t))
    }

    pub fn objective(&self, spec: &ObjectiveSpec) -> Result<f64> {
        spec.targets
            .iter()
            .map(|&f| self.sample_db(f))
            .try_fold(f64::NEG_INFINITY, |acc, v| Ok(acc.max(v?)))
    }

    /// Writes `freq_GHz,re,im,dB` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "freq_GHz,re,im,dB")?;
        for (k, d) in self.to_db().into_iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_real(self.grid.freqs[k]),
                fmt_real(self.re[k]),
                fmt_real(self.im[k]),
                fmt_real(d)
            )?;
        }
        Ok(())
    }
}

fn interpolated_db(re: &[f64], im: &[f64], lo: usize, hi: usize, t: f64) -> f64 {
    if lo == hi {
        return db(re[lo], im[lo]);
    }
    let r = re[lo] * (1.0 - t) + re[hi] * t;
    let i = im[lo] * (1.0 - t) + im[hi] * t;
    db(r, i)
}

/// Target frequencies whose worst (largest) dB value is minimized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveSpec {
    targets: Vec<f64>,
}

impl ObjectiveSpec {
    pub fn new(targets: Vec<f64>, grid: &FrequencyGrid) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidObjective(
                "at least one target frequency required".into(),
            ));
        }
        for &f in &targets {
            grid.locate(f)?;
        }
        Ok(Self { targets })
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// Objective evaluation restricted to the grid nodes the targets touch.
///
/// Predictors that produce spectra node by node use this to skip every node
/// the objective never reads; the result equals
/// [`ComplexSpectrum::objective`] on the full spectrum.
#[derive(Debug, Clone)]
pub struct ObjectiveProbe {
    nodes: Vec<usize>,
    // (position of lo in nodes, position of hi in nodes, t)
    taps: Vec<(usize, usize, f64)>,
}

impl ObjectiveProbe {
    pub fn new(grid: &FrequencyGrid, spec: &ObjectiveSpec) -> Result<Self> {
        let mut nodes: Vec<usize> = Vec::new();
        let pos = |k: usize, nodes: &mut Vec<usize>| match nodes.iter().position(|&n| n == k) {
            Some(p) => p,
            None => {
                nodes.push(k);
                nodes.len() - 1
            }
        };
        let mut taps = Vec::with_capacity(spec.targets.len());
        for &f in &spec.targets {
            let (lo, hi, t) = grid.locate(f)?;
            let a = pos(lo, &mut nodes);
            let b = pos(hi, &mut nodes);
            taps.push((a, b, t));
        }
        Ok(Self { nodes, taps })
    }

    /// Grid indices that must be supplied, in the order expected by
    /// [`ObjectiveProbe::objective`].
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn objective(&self, re: &[f64], im: &[f64]) -> f64 {
        self.taps
            .iter()
            .map(|&(a, b, t)| interpolated_db(re, im, a, b, t))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Formats a real with 17 significant digits.
pub(crate) fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}
