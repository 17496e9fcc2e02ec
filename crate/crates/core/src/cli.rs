//! Problem files and the batch commands behind the `taylor-ego` binary.
//!
//! A problem file is one JSON document:
//!
//! ```json
//! {
//!   "parameters": [{"name": "w_s", "lower": 1.0, "upper": 4.0}],
//!   "objective": {"targets_ghz": [5.6]},
//!   "solver": {"builtin": {"instance": "dual-band-2d"}},
//!   "optimizer": {"doe": {"kind": "full_factorial", "levels": [3, 3]}},
//!   "output_dir": "out"
//! }
//! ```
//!
//! `parameters` and `objective` default to those of a builtin instance and
//! are required for an external solver. Unknown keys are rejected with
//! their line and column. Any field can be replaced from the command line
//! with `--set dotted.path=value`, where the value is parsed as JSON and
//! falls back to a plain string.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::design_space::{DesignVector, Parameter, ParameterSpace};
use crate::driver::{run_with_progress, OptimizerConfig, RunHistory};
use crate::error::{Error, Result, SolverError};
use crate::external::{ExternalSolver, NamedValue, Request, Response};
use crate::global_model::GlobalSurrogate;
use crate::local_model::{DesignEvaluation, MERGE_TOLERANCE};
use crate::solver::{Solver, SolverOutput};
use crate::spectrum::{fmt_real, FrequencyGrid, ObjectiveSpec};
use crate::testbed::{self, fd_check, Resonance, ResonatorModel, INSTANCE_NAMES};

/// Exit status for malformed configuration or arguments.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when the solver failed and the run was aborted.
pub const EXIT_SOLVER: i32 = 3;
/// Exit status of a failed derivative check.
pub const EXIT_CHECK_FAILED: i32 = 1;

/// Derivative checks above this relative error fail.
pub const CHECK_TOLERANCE: f64 = 1e-5;
/// Normalized finite-difference step used by `check`.
pub const CHECK_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub parameters: Option<Vec<Parameter>>,
    #[serde(default)]
    pub objective: Option<ObjectiveConfig>,
    pub solver: SolverConfig,
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub targets_ghz: Vec<f64>,
}

/// One uniformly sampled band of the frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub start_ghz: f64,
    pub stop_ghz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverConfig {
    Builtin(BuiltinConfig),
    External(ExternalConfig),
}

/// A shipped testbed instance, optionally with its constants replaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinConfig {
    pub instance: String,
    #[serde(default)]
    pub resonances: Option<Vec<Resonance>>,
    #[serde(default)]
    pub bands: Option<Vec<Band>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    /// Program and leading arguments; request and response paths are appended.
    pub command: Vec<String>,
    #[serde(default = "default_working_dir")]
    pub working_dir: PathBuf,
    pub bands: Vec<Band>,
    #[serde(default)]
    pub keep_files: bool,
}

fn default_working_dir() -> PathBuf {
    PathBuf::from(".")
}

fn grid_from_bands(bands: &[Band]) -> Result<FrequencyGrid> {
    let b: Vec<(f64, f64, usize)> = bands
        .iter()
        .map(|b| (b.start_ghz, b.stop_ghz, b.points))
        .collect();
    FrequencyGrid::bands(&b)
}

impl ProblemConfig {
    /// Parses a problem file; errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    /// Applies `key=value` overrides addressed by dotted paths.
    ///
    /// Every path segment must name an existing field (or array index) of
    /// the configuration with its defaults filled in.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut root = serde_json::to_value(self)?;
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("--set {item}: expected KEY=VALUE")))?;
            let value =
                serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            let slot = lookup(&mut root, key)
                .ok_or_else(|| Error::InvalidConfig(format!("--set {key}: unknown key")))?;
            *slot = value;
        }
        serde_json::from_value(root)
            .map_err(|e| Error::InvalidConfig(format!("after --set overrides: {e}")))
    }

    /// Builds the space, objective and solver this file describes.
    pub fn resolve(&self) -> Result<Problem> {
        self.optimizer.validate()?;
        let (space, spec, solver) = match &self.solver {
            SolverConfig::Builtin(b) => {
                let inst = testbed::instance(&b.instance).ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "unknown builtin instance `{}`; expected one of {}",
                        b.instance,
                        INSTANCE_NAMES.join(", ")
                    ))
                })?;
                let space = match &self.parameters {
                    Some(p) => ParameterSpace::new(p.clone())?,
                    None => inst.model.space().clone(),
                };
                let grid = match &b.bands {
                    Some(bands) => grid_from_bands(bands)?,
                    None => inst.model.grid().clone(),
                };
                let resonances = b
                    .resonances
                    .clone()
                    .unwrap_or_else(|| inst.model.resonances().to_vec());
                let targets = match &self.objective {
                    Some(o) => o.targets_ghz.clone(),
                    None => inst.targets.clone(),
                };
                let model = ResonatorModel::new(space.clone(), grid.clone(), resonances)?;
                let spec = ObjectiveSpec::new(targets, &grid)?;
                (space, spec, ProblemSolver::Builtin(model))
            }
            SolverConfig::External(e) => {
                let missing =
                    |what: &str| Error::InvalidConfig(format!("external solver requires `{what}`"));
                let space = ParameterSpace::new(
                    self.parameters
                        .clone()
                        .ok_or_else(|| missing("parameters"))?,
                )?;
                let targets = self
                    .objective
                    .as_ref()
                    .ok_or_else(|| missing("objective"))?;
                let grid = grid_from_bands(&e.bands)?;
                let spec = ObjectiveSpec::new(targets.targets_ghz.clone(), &grid)?;
                let solver =
                    ExternalSolver::new(e.command.clone(), &e.working_dir, space.clone(), grid)?
                        .keep_files(e.keep_files);
                (space, spec, ProblemSolver::External(solver))
            }
        };
        if let crate::driver::DoeConfig::FullFactorial { levels } = &self.optimizer.doe {
            if levels.len() != space.dim() {
                return Err(Error::InvalidConfig(format!(
                    "full_factorial has {} levels for {} parameters",
                    levels.len(),
                    space.dim()
                )));
            }
        }
        Ok(Problem {
            config: self.clone(),
            space,
            spec,
            solver,
        })
    }
}

fn lookup<'v>(root: &'v mut Value, path: &str) -> Option<&'v mut Value> {
    path.split('.').try_fold(root, |node, seg| match node {
        Value::Object(map) => map.get_mut(seg),
        Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
        _ => None,
    })
}

/// The solver a problem file selects.
#[derive(Debug)]
pub enum ProblemSolver {
    Builtin(ResonatorModel),
    External(ExternalSolver),
}

impl Solver for ProblemSolver {
    fn grid(&self) -> &FrequencyGrid {
        match self {
            Self::Builtin(m) => m.grid(),
            Self::External(e) => e.grid(),
        }
    }

    fn solve(&self, x: &DesignVector) -> Result<SolverOutput, SolverError> {
        match self {
            Self::Builtin(m) => m.solve(x),
            Self::External(e) => e.solve(x),
        }
    }
}

/// A fully resolved problem, ready to run.
#[derive(Debug)]
pub struct Problem {
    pub config: ProblemConfig,
    pub space: ParameterSpace,
    pub spec: ObjectiveSpec,
    pub solver: ProblemSolver,
}

impl Problem {
    pub fn output_dir(&self) -> &Path {
        &self.config.output_dir
    }
}

/// Writes `iteration,origin,<parameters>,objective_dB` rows.
pub fn write_history_csv<W: Write>(
    history: &RunHistory,
    space: &ParameterSpace,
    mut w: W,
) -> std::io::Result<()> {
    write!(w, "iteration,origin")?;
    for n in space.names() {
        write!(w, ",{n}")?;
    }
    writeln!(w, ",objective_dB")?;
    for e in history.entries() {
        write!(w, "{},{}", e.iteration, e.origin)?;
        for &v in e.evaluation.x().values() {
            write!(w, ",{}", fmt_real(v))?;
        }
        writeln!(w, ",{}", fmt_real(e.evaluation.objective_value()))?;
    }
    Ok(())
}

/// Reads the design points back from a history CSV.
pub fn read_history_points(text: &str, space: &ParameterSpace) -> Result<Vec<DesignVector>> {
    let bad =
        |line: usize, msg: String| Error::InvalidConfig(format!("history line {line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let idx: Vec<usize> = space
        .names()
        .map(|n| {
            cols.iter()
                .position(|c| *c == n)
                .ok_or_else(|| bad(1, format!("missing column `{n}`")))
        })
        .collect::<Result<_>>()?;
    lines
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let values = idx
                .iter()
                .map(|&c| {
                    let raw = fields
                        .get(c)
                        .ok_or_else(|| bad(i + 1, "too few columns".into()))?;
                    raw.parse::<f64>()
                        .map_err(|e| bad(i + 1, format!("`{raw}`: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            space.vector(values).map_err(|e| bad(i + 1, e.to_string()))
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct BestRecord<'a> {
    iteration: usize,
    origin: String,
    parameters: Vec<NamedValue>,
    objective_db: f64,
    evaluations: usize,
    spectrum: SpectrumRecord<'a>,
}

#[derive(Debug, Serialize)]
struct SpectrumRecord<'a> {
    frequencies_ghz: &'a [f64],
    re: &'a [f64],
    im: &'a [f64],
    db: Vec<f64>,
}

fn write_best(history: &RunHistory, space: &ParameterSpace, dir: &Path) -> Result<()> {
    let Some(i) = history.best_index() else {
        return Ok(());
    };
    let entry = &history.entries()[i];
    let best = &entry.evaluation;
    let s = best.spectrum();
    let record = BestRecord {
        iteration: entry.iteration,
        origin: entry.origin.to_string(),
        parameters: Request::new(space, best.x(), s.grid()).parameters,
        objective_db: best.objective_value(),
        evaluations: history.len(),
        spectrum: SpectrumRecord {
            frequencies_ghz: s.grid().freqs(),
            re: s.re(),
            im: s.im(),
            db: s.to_db(),
        },
    };
    let mut json = serde_json::to_string_pretty(&record)?;
    json.push('\n');
    fs::write(dir.join("best.json"), json)?;
    s.write_csv(BufWriter::new(fs::File::create(
        dir.join("best_spectrum.csv"),
    )?))?;
    Ok(())
}

fn write_run_artifacts(history: &RunHistory, problem: &Problem, log: &[String]) -> Result<()> {
    let dir = problem.output_dir();
    let mut w = BufWriter::new(fs::File::create(dir.join("history.csv"))?);
    write_history_csv(history, &problem.space, &mut w)?;
    w.flush()?;
    write_best(history, &problem.space, dir)?;
    fs::write(dir.join("progress.log"), log.concat())?;
    Ok(())
}

/// Summary of a finished `optimize` run.
#[derive(Debug)]
pub struct OptimizeOutcome {
    pub history: RunHistory,
    pub best: DesignEvaluation,
}

/// Runs the optimizer and writes `history.csv`, `best.json`,
/// `best_spectrum.csv`, `progress.log` and the effective `config.json`.
///
/// Artifacts of an aborted run are written before the error is returned.
pub fn cmd_optimize(problem: &Problem, mut progress: impl FnMut(&str)) -> Result<OptimizeOutcome> {
    let dir = problem.output_dir();
    fs::create_dir_all(dir)?;
    let mut config = serde_json::to_string_pretty(&problem.config)?;
    config.push('\n');
    fs::write(dir.join("config.json"), config)?;

    let mut log = Vec::new();
    let mut emit = |line: String| {
        progress(&line);
        log.push(line + "\n");
    };
    emit(format!(
        "problem: {} parameters, targets {:?} GHz, up to {} evaluations",
        problem.space.dim(),
        problem.spec.targets(),
        problem.config.optimizer.max_evaluations()
    ));
    let result = run_with_progress(
        &problem.config.optimizer,
        &problem.space,
        &problem.solver,
        &problem.spec,
        |r| emit(r.to_string()),
    );
    match result {
        Ok((history, best)) => {
            emit(format!(
                "finished: {} evaluations, best {} dB",
                history.len(),
                fmt_real(best.objective_value())
            ));
            write_run_artifacts(&history, problem, &log)?;
            Ok(OptimizeOutcome { history, best })
        }
        Err(Error::Aborted { history, source }) => {
            emit(format!(
                "aborted after {} evaluations: {source}",
                history.len()
            ));
            write_run_artifacts(&history, problem, &log)?;
            Err(Error::Aborted { history, source })
        }
        Err(e) => {
            emit(format!("failed: {e}"));
            fs::write(dir.join("progress.log"), log.concat())?;
            Err(e)
        }
    }
}

/// Evaluates the anchors for `surface`: the points of a history file, or
/// the configured design of experiments when none is given.
pub fn surface_anchors(problem: &Problem, history: Option<&Path>) -> Result<Vec<DesignEvaluation>> {
    let points = match history {
        Some(path) => read_history_points(&fs::read_to_string(path)?, &problem.space)?,
        None => problem
            .config
            .optimizer
            .doe
            .generate(&problem.space, problem.config.optimizer.doe_seed)?,
    };
    let mut unique: Vec<DesignVector> = Vec::with_capacity(points.len());
    for p in points {
        let dup = unique
            .iter()
            .any(|q| problem.space.distance_unchecked(p.values(), q.values()) <= MERGE_TOLERANCE);
        if !dup {
            unique.push(p);
        }
    }
    unique
        .into_par_iter()
        .map(|x| DesignEvaluation::evaluate(&problem.solver, x, &problem.spec))
        .collect()
}

/// Writes `surface.csv` with the surrogate objective and its error estimate
/// on a `resolution`² grid; only two-parameter problems qualify.
pub fn cmd_surface(
    problem: &Problem,
    resolution: usize,
    history: Option<&Path>,
) -> Result<PathBuf> {
    if problem.space.dim() != 2 {
        return Err(Error::InvalidConfig(format!(
            "surface needs exactly 2 parameters, the problem has {}",
            problem.space.dim()
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig(
            "surface resolution must be at least 2".into(),
        ));
    }
    let anchors = surface_anchors(problem, history)?;
    let surrogate = GlobalSurrogate::new(anchors, problem.space.clone())?;
    let dir = problem.output_dir();
    fs::create_dir_all(dir)?;
    let path = dir.join("surface.csv");
    let mut w = BufWriter::new(fs::File::create(&path)?);
    surrogate.write_surface_csv(&problem.spec, resolution, &mut w)?;
    w.flush()?;
    Ok(path)
}

/// Result of the derivative self-test.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub points: usize,
    pub max_rel_error: f64,
    /// Design, frequency node, parameter index and component of the worst error.
    pub worst: Option<(DesignVector, usize, usize, bool)>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= CHECK_TOLERANCE
    }
}

/// Finite-difference check of the builtin solver at random interior points.
pub fn cmd_check(problem: &Problem, points: usize, seed: u64) -> Result<CheckReport> {
    let ProblemSolver::Builtin(model) = &problem.solver else {
        return Err(Error::InvalidConfig(
            "check needs a builtin solver; external solvers have no derivative oracle".into(),
        ));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 100.0 * CHECK_STEP;
    let mut report = CheckReport {
        points,
        max_rel_error: 0.0,
        worst: None,
    };
    for _ in 0..points {
        let u: Vec<f64> = (0..problem.space.dim())
            .map(|_| rng.random_range(margin..1.0 - margin))
            .collect();
        let x = problem.space.denormalize(&u);
        let r = fd_check(model, &problem.space, &x, CHECK_STEP)?;
        if r.max_rel_error > report.max_rel_error || report.worst.is_none() && r.worst.is_some() {
            report.max_rel_error = r.max_rel_error;
            report.worst = r.worst.map(|(k, i, im)| (x.clone(), k, i, im));
        }
    }
    Ok(report)
}

/// Answers one external-solver request with a builtin testbed instance.
pub fn cmd_solve(instance: &str, request: &Path, response: &Path) -> Result<()> {
    let inst = testbed::instance(instance)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown builtin instance `{instance}`")))?;
    let req: Request = serde_json::from_str(&fs::read_to_string(request)?)?;
    let space = inst.model.space().clone();
    let grid = FrequencyGrid::new(req.frequencies_ghz.clone())?;
    let model = ResonatorModel::new(space.clone(), grid, inst.model.resonances().to_vec())?;
    let x = req.design(&space).map_err(|source| Error::Solver {
        x: req.parameters.iter().map(|p| p.value).collect(),
        source,
    })?;
    let out = model.solve(&x).map_err(|source| Error::Solver {
        x: x.values().to_vec(),
        source,
    })?;
    fs::write(response, serde_json::to_vec(&Response::from_output(&out))?)?;
    Ok(())
}

/// Maps an error to the documented process exit status.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Solver { .. } | Error::Aborted { .. } => EXIT_SOLVER,
        Error::Io(_) => 1,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "taylor-ego",
    version,
    about = "Gradient-enhanced surrogate optimization of frequency responses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the optimizer and write history.csv, best.json and progress.log.
    Optimize(RunArgs),
    /// Dump the surrogate objective and error estimate of a 2-parameter problem.
    Surface(SurfaceArgs),
    /// Compare builtin analytic derivatives against finite differences.
    Check(CheckArgs),
    /// Act as an external solver backed by a builtin instance.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Sets both the design-of-experiments and the search seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "K")]
    pub max_iters: Option<usize>,
    #[arg(long, value_name = "S")]
    pub stagnation: Option<usize>,
    /// Override any config field, e.g. `optimizer.improvement_tol=1e-4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, value_name = "BOOL")]
    pub parallel: Option<bool>,
}

impl RunArgs {
    /// Loads the problem file with `--set` applied first, then the flags.
    pub fn problem(&self) -> Result<Problem> {
        let mut config = ProblemConfig::load(&self.config)?.with_overrides(&self.overrides)?;
        let opt = &mut config.optimizer;
        if let Some(s) = self.seed {
            opt.doe_seed = s;
            opt.ei_seed = s;
        }
        if let Some(k) = self.max_iters {
            opt.max_iterations = k;
        }
        if let Some(s) = self.stagnation {
            opt.stagnation_limit = s;
        }
        if let Some(p) = self.parallel {
            opt.parallel_evals = p;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        config.resolve()
    }
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    /// History CSV whose designs become the anchors; without it the
    /// configured design of experiments is used.
    #[arg(long, value_name = "PATH")]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: String,
    pub request: PathBuf,
    pub response: PathBuf,
}

/// Parses arguments, runs one command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Optimize(args) => {
            let problem = args.problem()?;
            let out = cmd_optimize(&problem, |line| eprintln!("{line}"))?;
            println!(
                "best {} dB after {} evaluations; artifacts in {}",
                fmt_real(out.best.objective_value()),
                out.history.len(),
                problem.output_dir().display()
            );
            Ok(0)
        }
        Command::Surface(args) => {
            let problem = args.run.problem()?;
            let path = cmd_surface(&problem, args.resolution, args.history.as_deref())?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Check(args) => {
            let config = ProblemConfig::load(&args.config)?.with_overrides(&args.overrides)?;
            let problem = config.resolve()?;
            let report = cmd_check(&problem, args.points, args.seed)?;
            println!(
                "checked {} points, worst relative error {:.3e}",
                report.points, report.max_rel_error
            );
            if let Some((x, k, i, im)) = &report.worst {
                println!(
                    "worst at {:?}, {} GHz, d({})/d({})",
                    x.values(),
                    problem.solver.grid().freqs()[*k],
                    if *im { "im" } else { "re" },
                    problem.space.params()[*i].name
                );
            }
            if report.passed() {
                println!("PASS (tolerance {CHECK_TOLERANCE:e})");
                Ok(0)
            } else {
                println!("FAIL (tolerance {CHECK_TOLERANCE:e})");
                Ok(EXIT_CHECK_FAILED)
            }
        }
        Command::Solve(args) => {
            cmd_solve(&args.instance, &args.request, &args.response)?;
            Ok(0)
        }
    }
}
