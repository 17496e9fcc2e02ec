//! File-based protocol for solvers that run as separate processes.
//!
//! For every design the optimizer writes a request file into the working
//! directory, then runs `command... <request> <response>` there, both
//! arguments being bare file names, and reads the response file back. A
//! nonzero exit status, a missing response file, a missing field or an
//! array of the wrong shape is a solver failure.
//!
//! Request layout:
//!
//! ```json
//! {
//!   "parameters": [{"name": "w_s", "value": 2.5}, {"name": "gap_2", "value": 0.7}],
//!   "frequencies_ghz": [5.1, 5.11, 5.12]
//! }
//! ```
//!
//! Response layout, `m` frequencies and `d` parameters:
//!
//! ```json
//! {
//!   "re": [m reals],
//!   "im": [m reals],
//!   "d_re": [m rows of d reals],
//!   "d_im": [m rows of d reals]
//! }
//! ```
//!
//! Row `k` of `d_re` holds the derivatives of `re[k]` with respect to each
//! parameter in request order, per physical parameter unit. Frequencies are
//! in GHz. Extra response fields are ignored.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::design_space::{DesignVector, ParameterSpace};
use crate::error::SolverError;
use crate::solver::{Solver, SolverOutput};
use crate::spectrum::{ComplexSpectrum, FrequencyGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub parameters: Vec<NamedValue>,
    pub frequencies_ghz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub d_re: Vec<Vec<f64>>,
    pub d_im: Vec<Vec<f64>>,
}

impl Request {
    pub fn new(space: &ParameterSpace, x: &DesignVector, grid: &FrequencyGrid) -> Self {
        Self {
            parameters: space
                .names()
                .zip(x.values())
                .map(|(n, &v)| NamedValue {
                    name: n.to_string(),
                    value: v,
                })
                .collect(),
            frequencies_ghz: grid.freqs().to_vec(),
        }
    }

    /// Values in the order of `space`, checking that the names agree.
    pub fn design(&self, space: &ParameterSpace) -> Result<DesignVector, SolverError> {
        let names: Vec<&str> = self.parameters.iter().map(|p| p.name.as_str()).collect();
        let expected: Vec<&str> = space.names().collect();
        if names != expected {
            return Err(SolverError::Domain(format!(
                "request parameters {names:?} do not match {expected:?}"
            )));
        }
        space
            .vector(self.parameters.iter().map(|p| p.value).collect())
            .map_err(|e| SolverError::Domain(e.to_string()))
    }
}

impl Response {
    pub fn from_output(output: &SolverOutput) -> Self {
        let s = &output.spectrum;
        let m = s.grid().len();
        let d = output.d_re.len().checked_div(m).unwrap_or(0);
        let rows = |flat: &[f64]| flat.chunks(d.max(1)).map(<[f64]>::to_vec).collect();
        Self {
            re: s.re().to_vec(),
            im: s.im().to_vec(),
            d_re: rows(&output.d_re),
            d_im: rows(&output.d_im),
        }
    }

    /// Checks shapes against the request and flattens the derivative rows.
    pub fn into_output(self, grid: &FrequencyGrid, d: usize) -> Result<SolverOutput, SolverError> {
        let m = grid.len();
        let bad = |msg: String| Err(SolverError::Response(msg));
        if self.re.len() != m || self.im.len() != m {
            return bad(format!(
                "expected {m} samples, got re {} and im {}",
                self.re.len(),
                self.im.len()
            ));
        }
        for (name, rows) in [("d_re", &self.d_re), ("d_im", &self.d_im)] {
            if rows.len() != m {
                return bad(format!("{name}: expected {m} rows, got {}", rows.len()));
            }
            if let Some(k) = rows.iter().position(|r| r.len() != d) {
                return bad(format!(
                    "{name}: row {k} has {} entries, expected {d}",
                    rows[k].len()
                ));
            }
        }
        let spectrum = ComplexSpectrum::new(grid.clone(), self.re, self.im)
            .map_err(|e| SolverError::Response(e.to_string()))?;
        let d_re: Vec<f64> = self.d_re.into_iter().flatten().collect();
        let d_im: Vec<f64> = self.d_im.into_iter().flatten().collect();
        if d_re.iter().chain(&d_im).any(|v| !v.is_finite()) {
            return bad("non-finite derivative".into());
        }
        Ok(SolverOutput {
            spectrum,
            d_re,
            d_im,
        })
    }
}

/// A solver that runs an outside program once per design.
#[derive(Debug)]
pub struct ExternalSolver {
    command: Vec<String>,
    working_dir: PathBuf,
    space: ParameterSpace,
    grid: FrequencyGrid,
    keep_files: bool,
    counter: AtomicU64,
}

impl ExternalSolver {
    pub fn new(
        command: Vec<String>,
        working_dir: impl Into<PathBuf>,
        space: ParameterSpace,
        grid: FrequencyGrid,
    ) -> crate::Result<Self> {
        if command.is_empty() || command[0].is_empty() {
            return Err(crate::Error::InvalidConfig(
                "external solver command is empty".into(),
            ));
        }
        Ok(Self {
            command,
            working_dir: working_dir.into(),
            space,
            grid,
            keep_files: false,
            counter: AtomicU64::new(0),
        })
    }

    /// Keep request and response files after successful calls.
    pub fn keep_files(mut self, keep: bool) -> Self {
        self.keep_files = keep;
        self
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    /// Fresh file names, unique within this process and across processes
    /// sharing the working directory.
    fn file_names(&self) -> (String, String) {
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let tag = format!("{}-{n:06}", std::process::id());
        (
            format!("request-{tag}.json"),
            format!("response-{tag}.json"),
        )
    }

    fn call(&self, request: &str, response: &Path) -> Result<SolverOutput, SolverError> {
        let response_name = response.file_name().expect("joined file name");
        let out = Command::new(&self.command[0])
            .args(&self.command[1..])
            .arg(request)
            .arg(response_name)
            .current_dir(&self.working_dir)
            .output()?;
        if !out.status.success() {
            return Err(SolverError::ExitStatus {
                status: out.status.to_string(),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        let text = fs::read_to_string(response)
            .map_err(|e| SolverError::Response(format!("{}: {e}", response.display())))?;
        let parsed: Response =
            serde_json::from_str(&text).map_err(|e| SolverError::Response(e.to_string()))?;
        parsed.into_output(&self.grid, self.space.dim())
    }
}

impl Solver for ExternalSolver {
    fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn solve(&self, x: &DesignVector) -> Result<SolverOutput, SolverError> {
        self.space
            .normalize(x)
            .map_err(|e| SolverError::Domain(e.to_string()))?;
        fs::create_dir_all(&self.working_dir)?;
        let (request_name, response_name) = self.file_names();
        let (request, response) = (
            self.working_dir.join(&request_name),
            self.working_dir.join(&response_name),
        );
        let body = serde_json::to_vec_pretty(&Request::new(&self.space, x, &self.grid))
            .map_err(|e| SolverError::Io(e.into()))?;
        fs::write(&request, body)?;
        let result = self.call(&request_name, &response);
        if result.is_ok() && !self.keep_files {
            let _ = fs::remove_file(&request);
            let _ = fs::remove_file(&response);
        }
        result
    }
}
