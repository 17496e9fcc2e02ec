//! Analytic stand-ins for a field solver.
//!
//! A [`ResonatorModel`] superposes Lorentzian resonances whose centre
//! frequencies and couplings move affinely with the design parameters:
//!
//! ```text
//! S(f; x) = 1 - Σ_k c_k(x) / (1 + 2j Q_k (f - f_k(x)) / f_k(x))
//! f_k(x)  = f0_k (1 + Σ_i g_ki x̂_i)
//! c_k(x)  = c0_k (1 + Σ_i h_ki x̂_i)
//! x̂       = 2 normalize(x) - 1
//! ```
//!
//! Derivatives come from differentiating this expression in closed form.
//! The module also carries the verification oracles: central finite
//! differences and brute-force optimum enumeration.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design_space::{DesignVector, Parameter, ParameterSpace};
use crate::error::{Error, Result, SolverError};
use crate::search::compass_search;
use crate::solver::{Solver, SolverOutput};
use crate::spectrum::{ComplexSpectrum, FrequencyGrid, ObjectiveProbe, ObjectiveSpec};

/// One Lorentzian resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resonance {
    /// Centre frequency at the box centre, GHz.
    pub f0: f64,
    pub q: f64,
    /// Coupling at the box centre as `[re, im]`.
    pub coupling: [f64; 2],
    /// Relative frequency shift per unit of `x̂_i`.
    pub freq_sensitivity: Vec<f64>,
    /// Relative coupling change per unit of `x̂_i`.
    pub coupling_sensitivity: Vec<f64>,
    /// Fault injection: when set, the analytic derivatives use this map in
    /// place of `freq_sensitivity` while the response keeps the true one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_freq_sensitivity: Option<Vec<f64>>,
}

impl Resonance {
    pub fn new(
        f0: f64,
        q: f64,
        coupling: Complex64,
        freq_sensitivity: Vec<f64>,
        coupling_sensitivity: Vec<f64>,
    ) -> Self {
        Self {
            f0,
            q,
            coupling: [coupling.re, coupling.im],
            freq_sensitivity,
            coupling_sensitivity,
            derivative_freq_sensitivity: None,
        }
    }

    fn c0(&self) -> Complex64 {
        Complex64::new(self.coupling[0], self.coupling[1])
    }
}

/// Multi-resonator reflection model with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorModel {
    space: ParameterSpace,
    grid: FrequencyGrid,
    resonances: Vec<Resonance>,
}

impl ResonatorModel {
    pub fn new(
        space: ParameterSpace,
        grid: FrequencyGrid,
        resonances: Vec<Resonance>,
    ) -> Result<Self> {
        let d = space.dim();
        for (k, r) in resonances.iter().enumerate() {
            let bad = |msg: &str| Err(Error::InvalidModel(format!("resonance {k}: {msg}")));
            if r.freq_sensitivity.len() != d
                || r.coupling_sensitivity.len() != d
                || r.derivative_freq_sensitivity
                    .as_ref()
                    .is_some_and(|g| g.len() != d)
            {
                return bad("sensitivity length differs from parameter count");
            }
            if !(r.f0 > 0.0 && r.q > 0.0) {
                return bad("f0 and Q must be positive");
            }
            let all = r
                .freq_sensitivity
                .iter()
                .chain(&r.coupling_sensitivity)
                .chain(r.coupling.iter());
            if all.clone().any(|v| !v.is_finite()) {
                return bad("non-finite constant");
            }
            // f_k is affine in x̂ ∈ [-1, 1]^d, so its minimum sits at a corner
            let worst = 1.0 - r.freq_sensitivity.iter().map(|g| g.abs()).sum::<f64>();
            if worst <= 0.0 {
                return bad("resonance frequency reaches zero inside the box");
            }
        }
        Ok(Self {
            space,
            grid,
            resonances,
        })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn resonances(&self) -> &[Resonance] {
        &self.resonances
    }

    fn centered(&self, x: &[f64]) -> Vec<f64> {
        self.space
            .normalize_unchecked(x)
            .into_iter()
            .map(|u| 2.0 * u - 1.0)
            .collect()
    }

    /// Complex response at an arbitrary frequency.
    pub fn response(&self, x: &[f64], f: f64) -> Complex64 {
        let xh = self.centered(x);
        self.response_centered(&xh, f)
    }

    fn response_centered(&self, xh: &[f64], f: f64) -> Complex64 {
        let mut s = Complex64::new(1.0, 0.0);
        for r in &self.resonances {
            let fk = r.f0 * (1.0 + dot(&r.freq_sensitivity, xh));
            let ck = r.c0() * (1.0 + dot(&r.coupling_sensitivity, xh));
            let den = Complex64::new(1.0, 2.0 * r.q * (f / fk - 1.0));
            s -= ck / den;
        }
        s
    }

    fn check_bounds(&self, x: &DesignVector) -> Result<(), SolverError> {
        self.space
            .normalize(x)
            .map(|_| ())
            .map_err(|e| SolverError::Domain(e.to_string()))
    }

    /// True objective, reading only the nodes the objective needs.
    pub(crate) fn probe_objective(&self, probe: &ObjectiveProbe, x: &[f64]) -> f64 {
        let xh = self.centered(x);
        let (re, im): (Vec<f64>, Vec<f64>) = probe
            .nodes()
            .iter()
            .map(|&k| {
                let s = self.response_centered(&xh, self.grid.freqs()[k]);
                (s.re, s.im)
            })
            .unzip();
        probe.objective(&re, &im)
    }

    /// Objective of the exact response at `x`.
    pub fn objective(&self, x: &DesignVector, spec: &ObjectiveSpec) -> Result<f64> {
        self.space.normalize(x)?;
        let probe = ObjectiveProbe::new(&self.grid, spec)?;
        Ok(self.probe_objective(&probe, x.values()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Solver for ResonatorModel {
    fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn solve(&self, x: &DesignVector) -> Result<SolverOutput, SolverError> {
        self.check_bounds(x)?;
        let d = self.space.dim();
        let m = self.grid.len();
        let xh = self.centered(x.values());
        // dx̂_i / dx_i
        let scale: Vec<f64> = self
            .space
            .params()
            .iter()
            .map(|p| 2.0 / p.width())
            .collect();

        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        let mut d_re = vec![0.0; m * d];
        let mut d_im = vec![0.0; m * d];
        let mut grad = vec![Complex64::new(0.0, 0.0); d];
        for (k, &f) in self.grid.freqs().iter().enumerate() {
            let mut s = Complex64::new(1.0, 0.0);
            grad.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
            for r in &self.resonances {
                let fk = r.f0 * (1.0 + dot(&r.freq_sensitivity, &xh));
                let c0 = r.c0();
                let ck = c0 * (1.0 + dot(&r.coupling_sensitivity, &xh));
                let den = Complex64::new(1.0, 2.0 * r.q * (f / fk - 1.0));
                s -= ck / den;
                let g_map = r
                    .derivative_freq_sensitivity
                    .as_ref()
                    .unwrap_or(&r.freq_sensitivity);
                // d den / d fk
                let dden_dfk = Complex64::new(0.0, -2.0 * r.q * f / (fk * fk));
                let inv = den.inv();
                for i in 0..d {
                    let dck = c0 * r.coupling_sensitivity[i];
                    let dden = dden_dfk * (r.f0 * g_map[i]);
                    grad[i] -= (dck - ck * dden * inv) * inv;
                }
            }
            re[k] = s.re;
            im[k] = s.im;
            for i in 0..d {
                d_re[k * d + i] = grad[i].re * scale[i];
                d_im[k * d + i] = grad[i].im * scale[i];
            }
        }
        let spectrum = ComplexSpectrum::new(self.grid.clone(), re, im)
            .map_err(|e| SolverError::Domain(e.to_string()))?;
        Ok(SolverOutput {
            spectrum,
            d_re,
            d_im,
        })
    }
}

/// Outcome of a finite-difference derivative check.
#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    pub max_rel_error: f64,
    /// `(node, parameter, is_imaginary)` of the worst component.
    pub worst: Option<(usize, usize, bool)>,
}

/// Components whose magnitude stays below this are not compared.
pub const FD_MAGNITUDE_FLOOR: f64 = 1e-9;

/// Compares analytic derivatives against central differences.
///
/// `step` is in normalized units. Each component is compared relative to the
/// magnitude of the complex derivative `∂S/∂x_i` it belongs to; derivatives
/// smaller than [`FD_MAGNITUDE_FLOOR`] count as agreeing.
pub fn fd_check<S: Solver + ?Sized>(
    solver: &S,
    space: &ParameterSpace,
    x: &DesignVector,
    step: f64,
) -> Result<FdReport> {
    let u = space.normalize(x)?;
    if step.is_nan() || step <= 0.0 || u.iter().any(|&t| t - step < 0.0 || t + step > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step {step} leaves the parameter box"
        )));
    }
    let solve = |x: &DesignVector| {
        solver.solve(x).map_err(|source| Error::Solver {
            x: x.values().to_vec(),
            source,
        })
    };
    let base = solve(x)?;
    let d = space.dim();
    let m = base.spectrum.grid().len();
    let mut report = FdReport {
        max_rel_error: 0.0,
        worst: None,
    };
    for i in 0..d {
        let h = step * space.params()[i].width();
        let mut up = u.clone();
        up[i] += step;
        let mut dn = u.clone();
        dn[i] -= step;
        let (xp, xm) = (space.denormalize(&up), space.denormalize(&dn));
        let span = xp[i] - xm[i];
        debug_assert!((span - 2.0 * h).abs() <= 1e-9 * h);
        let (sp, sm) = (solve(&xp)?, solve(&xm)?);
        for k in 0..m {
            let fd_re = (sp.spectrum.re()[k] - sm.spectrum.re()[k]) / span;
            let fd_im = (sp.spectrum.im()[k] - sm.spectrum.im()[k]) / span;
            let an_re = base.d_re[k * d + i];
            let an_im = base.d_im[k * d + i];
            let scale = an_re.hypot(an_im).max(fd_re.hypot(fd_im));
            if scale < FD_MAGNITUDE_FLOOR {
                continue;
            }
            for (is_im, err) in [
                (false, (an_re - fd_re).abs()),
                (true, (an_im - fd_im).abs()),
            ] {
                let rel = err / scale;
                if rel > report.max_rel_error {
                    report.max_rel_error = rel;
                    report.worst = Some((k, i, is_im));
                }
            }
        }
    }
    Ok(report)
}

/// A located minimum of the true objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub x: DesignVector,
    pub value: f64,
}

/// Default grid points per axis for [`grid_oracle`].
pub const ORACLE_RESOLUTION: usize = 201;

/// Deduplication radius for oracle optima, normalized units.
const ORACLE_DEDUP: f64 = 0.02;

/// Enumerates the local optima of the true objective on a regular grid.
///
/// Grid points strictly below all neighbours (including diagonal ones) are
/// polished by compass search on the exact model, deduplicated and sorted
/// ascending, so the global optimum comes first.
pub fn grid_oracle(
    model: &ResonatorModel,
    spec: &ObjectiveSpec,
    resolution: usize,
) -> Result<Vec<Optimum>> {
    let space = model.space();
    let d = space.dim();
    if d > 3 {
        return Err(Error::InvalidConfig(format!(
            "grid oracle supports at most 3 parameters, got {d}"
        )));
    }
    if resolution < 3 {
        return Err(Error::InvalidConfig(
            "grid oracle needs resolution >= 3".into(),
        ));
    }
    let probe = ObjectiveProbe::new(&model.grid, spec)?;
    let total = resolution.pow(d as u32);
    let unit = |flat: usize| -> Vec<f64> {
        let mut rem = flat;
        let mut u = vec![0.0; d];
        for j in (0..d).rev() {
            u[j] = (rem % resolution) as f64 / (resolution - 1) as f64;
            rem /= resolution;
        }
        u
    };
    let f = |u: &[f64]| model.probe_objective(&probe, space.denormalize(u).values());
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| f(&unit(flat)))
        .collect();

    let strides: Vec<usize> = (0..d).map(|j| resolution.pow((d - 1 - j) as u32)).collect();
    let mut minima = Vec::new();
    'cells: for flat in 0..total {
        let v = values[flat];
        let idx: Vec<usize> = strides.iter().map(|s| (flat / s) % resolution).collect();
        for offset in 0..3usize.pow(d as u32) {
            let mut rem = offset;
            let mut neighbour = 0isize;
            let mut is_self = true;
            for j in 0..d {
                let delta = (rem % 3) as isize - 1;
                rem /= 3;
                let c = idx[j] as isize + delta;
                if c < 0 || c >= resolution as isize {
                    neighbour = -1;
                    break;
                }
                is_self &= delta == 0;
                neighbour += c * strides[j] as isize;
            }
            if neighbour < 0 || is_self {
                continue;
            }
            if values[neighbour as usize] <= v {
                continue 'cells;
            }
        }
        minima.push(flat);
    }

    let step = vec![1.0 / (resolution - 1) as f64; d];
    let mut polished: Vec<(Vec<f64>, f64)> = minima
        .into_par_iter()
        .map(|flat| {
            let u = unit(flat);
            compass_search(
                f,
                u,
                values[flat],
                &vec![0.0; d],
                &vec![1.0; d],
                &step,
                1e-10,
            )
        })
        .collect();
    polished.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut out: Vec<Optimum> = Vec::new();
    for (u, value) in polished {
        let x = space.denormalize(&u);
        if out
            .iter()
            .all(|o| space.distance_unchecked(o.x.values(), x.values()) > ORACLE_DEDUP)
        {
            out.push(Optimum { x, value });
        }
    }
    Ok(out)
}

/// Best objective found by uniform random search followed by compass polish
/// of the best few samples. Works in any dimension.
pub fn random_search_oracle(
    model: &ResonatorModel,
    spec: &ObjectiveSpec,
    samples: usize,
    seed: u64,
) -> Result<Optimum> {
    let space = model.space();
    let d = space.dim();
    let probe = ObjectiveProbe::new(&model.grid, spec)?;
    let f = |u: &[f64]| model.probe_objective(&probe, space.denormalize(u).values());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples.max(1))
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut scored: Vec<(f64, usize)> = points
        .par_iter()
        .enumerate()
        .map(|(i, u)| (f(u), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let best = scored
        .iter()
        .take(10)
        .par_bridge()
        .map(|&(v, i)| {
            compass_search(
                f,
                points[i].clone(),
                v,
                &vec![0.0; d],
                &vec![1.0; d],
                &vec![0.05; d],
                1e-10,
            )
        })
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.partial_cmp(&b.0).unwrap()))
        .expect("at least one sample");
    Ok(Optimum {
        x: space.denormalize(&best.0),
        value: best.1,
    })
}

/// A shipped testbed problem: model plus its default target frequencies.
#[derive(Debug, Clone)]
pub struct TestbedInstance {
    pub name: &'static str,
    pub model: ResonatorModel,
    pub targets: Vec<f64>,
}

impl TestbedInstance {
    pub fn objective_spec(&self) -> ObjectiveSpec {
        ObjectiveSpec::new(self.targets.clone(), &self.model.grid)
            .expect("shipped targets lie on the grid")
    }
}

pub const INSTANCE_NAMES: [&str; 4] = [
    "single-band-1d",
    "single-band-2d",
    "dual-band-2d",
    "dual-band-9d",
];

/// Looks up a shipped instance by name.
pub fn instance(name: &str) -> Option<TestbedInstance> {
    let inst = match name {
        "single-band-1d" => single_band_1d(),
        "single-band-2d" => single_band_2d(),
        "dual-band-2d" => dual_band_2d(),
        "dual-band-9d" => dual_band_9d(),
        _ => return None,
    };
    Some(inst)
}

fn polar(mag: f64, phase: f64) -> Complex64 {
    Complex64::from_polar(mag, phase)
}

fn wifi_24_grid() -> FrequencyGrid {
    FrequencyGrid::uniform(1.94, 2.94, 101).expect("static grid")
}

fn single_band_1d() -> TestbedInstance {
    let space =
        ParameterSpace::new(vec![Parameter::new("slot_len", 14.0, 22.0)]).expect("static space");
    let model = ResonatorModel::new(
        space,
        wifi_24_grid(),
        vec![Resonance::new(
            2.5,
            30.0,
            polar(0.85, 0.2),
            vec![-0.1],
            vec![0.05],
        )],
    )
    .expect("static model");
    TestbedInstance {
        name: "single-band-1d",
        model,
        targets: vec![2.44],
    }
}

fn single_band_2d() -> TestbedInstance {
    let space = ParameterSpace::new(vec![
        Parameter::new("slot_len", 14.0, 22.0),
        Parameter::new("feed_w", 0.8, 2.4),
    ])
    .expect("static space");
    let model = ResonatorModel::new(
        space,
        wifi_24_grid(),
        vec![Resonance::new(
            2.5,
            30.0,
            polar(0.88, 0.2),
            vec![-0.1, -0.02],
            vec![0.0, 0.005],
        )],
    )
    .expect("static model");
    TestbedInstance {
        name: "single-band-2d",
        model,
        targets: vec![2.44],
    }
}

fn dual_band_2d() -> TestbedInstance {
    let space = ParameterSpace::new(vec![
        Parameter::new("w_s", 1.0, 4.0),
        Parameter::new("gap_2", 0.2, 1.2),
    ])
    .expect("static space");
    let model = ResonatorModel::new(
        space,
        FrequencyGrid::uniform(5.1, 6.1, 101).expect("static grid"),
        vec![
            // tuned to 5.6 GHz at x̂ = (-0.5, 1) and (0.5, -1) respectively
            Resonance::new(
                5.6 / 0.905,
                15.0,
                polar(0.86, 0.1),
                vec![0.25, 0.03],
                vec![0.0, 0.1],
            ),
            Resonance::new(
                5.6 / 1.095,
                15.0,
                polar(0.84, -0.15),
                vec![0.25, 0.03],
                vec![0.0, -0.1],
            ),
        ],
    )
    .expect("static model");
    TestbedInstance {
        name: "dual-band-2d",
        model,
        targets: vec![5.6],
    }
}

fn dual_band_9d() -> TestbedInstance {
    let names = [
        "l_1", "l_2", "w_1", "w_2", "w_s", "gap_1", "gap_2", "l_f", "w_f",
    ];
    let bounds = [
        (10.0, 16.0),
        (4.0, 8.0),
        (1.0, 3.0),
        (0.5, 2.0),
        (1.0, 4.0),
        (0.2, 1.0),
        (0.2, 1.2),
        (6.0, 12.0),
        (1.5, 3.5),
    ];
    let space = ParameterSpace::new(
        names
            .iter()
            .zip(bounds)
            .map(|(n, (lo, hi))| Parameter::new(*n, lo, hi))
            .collect(),
    )
    .expect("static space");
    let grid = FrequencyGrid::bands(&[(1.9, 2.9, 101), (5.3, 6.3, 101)]).expect("static grid");
    let model = ResonatorModel::new(
        space,
        grid,
        vec![
            Resonance::new(
                2.45,
                12.0,
                polar(0.74, 0.2),
                vec![-0.10, 0.0, 0.02, 0.0, 0.01, -0.015, 0.0, 0.01, 0.0],
                vec![0.0, 0.0, 0.06, -0.04, 0.0, 0.05, -0.03, 0.02, -0.05],
            ),
            Resonance::new(
                5.9,
                15.0,
                polar(0.74, -0.2),
                vec![0.0, -0.10, 0.0, 0.02, -0.03, 0.0, 0.015, 0.01, 0.0],
                vec![0.0, 0.0, -0.05, 0.06, 0.0, -0.04, 0.05, 0.02, 0.05],
            ),
        ],
    )
    .expect("static model");
    TestbedInstance {
        name: "dual-band-9d",
        model,
        targets: vec![2.4, 5.8],
    }
}
