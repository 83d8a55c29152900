//! JSON documents read and written by the commands.
//!
//! Matrices are lists of rows. Block indices in problem files are 1-based.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use otsm::experiment::write_atomic;
use otsm::{build_maxdiff, Alpha, BlockDims, Certificate, Point, Problem, Report, ViewData};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    pub data: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    pub r: usize,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<CouplingEntry>>,
    /// Data matrices `A_i`; the problem is then MAXDIFF with `S_ij = A_iᵀA_j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub views: Option<Vec<Rows>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub blocks: Vec<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityFile {
    pub max_gradient_residual: f64,
    pub max_asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub verdict: String,
    pub taus: Vec<f64>,
    pub lmin_full: f64,
    pub lmin_reduced: f64,
    pub dual_bound: f64,
    pub gap_bound: f64,
    pub tol_psd: f64,
    pub tol_tau: f64,
    pub asymmetry: f64,
    pub null_residual: f64,
}

impl From<&Certificate> for CertificateFile {
    fn from(c: &Certificate) -> Self {
        Self {
            verdict: c.verdict.as_str().to_string(),
            taus: c.taus.clone(),
            lmin_full: c.lmin_full,
            lmin_reduced: c.lmin_reduced,
            dual_bound: c.dual_bound,
            gap_bound: c.gap_bound,
            tol_psd: c.tol_psd,
            tol_tau: c.tol_tau,
            asymmetry: c.asymmetry,
            null_residual: c.null_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub objective: f64,
    pub initial_objective: f64,
    pub iterations: usize,
    pub stop_reason: String,
    /// `null` for `α = +∞`.
    pub alpha: Option<f64>,
    pub stationarity: StationarityFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_trace: Option<Vec<f64>>,
}

impl ReportFile {
    pub fn new(report: &Report, certificate: Option<&Certificate>, trace: bool) -> Self {
        Self {
            objective: report.final_objective(),
            initial_objective: report.initial_objective(),
            iterations: report.iterations,
            stop_reason: report.stop_reason.as_str().to_string(),
            alpha: match report.alpha {
                Alpha::Finite(a) => Some(a),
                Alpha::Infinite => None,
            },
            stationarity: StationarityFile {
                max_gradient_residual: report.stationarity.max_gradient_residual,
                max_asymmetry: report.stationarity.max_asymmetry,
            },
            certificate: certificate.map(CertificateFile::from),
            objective_trace: trace.then(|| report.objective_trace.clone()),
        }
    }
}

/// Output of the certify command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyFile {
    pub objective: f64,
    pub stationarity: StationarityFile,
    pub certificate: CertificateFile,
}

/// Stiefel membership above this is reported but accepted.
pub const ORTH_WARN: f64 = 1e-8;
/// Stiefel membership above this rejects the file.
pub const ORTH_ERROR: f64 = 1e-4;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: cannot read: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: malformed JSON: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Internal(format!("serializing {}: {e}", path.display())))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes).map_err(CliError::from)
}

/// Row list to matrix; `field` names the JSON location in diagnostics.
pub fn matrix_from_rows(field: &str, rows: &Rows) -> CliResult<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(CliError::input(format!("{field}: empty matrix")));
    }
    if let Some(k) = rows.iter().position(|row| row.len() != ncols) {
        return Err(CliError::input(format!(
            "{field}: row {} has {} entries, expected {ncols}",
            k + 1,
            rows[k].len()
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::input(format!("{field}: non-finite entry")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |a, b| rows[a][b]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ProblemFile {
    pub fn load(path: &Path) -> CliResult<Problem> {
        let file: ProblemFile = read_json(path)?;
        file.to_problem()
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn to_problem(&self) -> CliResult<Problem> {
        match (&self.couplings, &self.views) {
            (Some(s), None) => self.coupling_problem(s),
            (None, Some(v)) => self.views_problem(v),
            (Some(_), Some(_)) => Err(CliError::input(
                "S, views: exactly one of the two may be given",
            )),
            (None, None) => Err(CliError::input("S: missing (or give views)")),
        }
    }

    fn coupling_problem(&self, entries: &[CouplingEntry]) -> CliResult<Problem> {
        let dims = self
            .dims
            .clone()
            .ok_or_else(|| CliError::input("dims: required when S is given"))?;
        let dims =
            BlockDims::new(dims, self.r).map_err(|e| CliError::input(format!("dims/r: {e}")))?;
        let m = dims.num_blocks();
        let mut seen = BTreeSet::new();
        let mut problem = Problem::new(dims.clone());
        for (k, e) in entries.iter().enumerate() {
            let field = format!("S[{k}]");
            if e.i < 1 || e.j > m || e.i >= e.j {
                return Err(CliError::input(format!(
                    "{field}: indices (i, j) = ({}, {}) must satisfy 1 <= i < j <= {m}",
                    e.i, e.j
                )));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(CliError::input(format!(
                    "{field}: duplicate entry for (i, j) = ({}, {})",
                    e.i, e.j
                )));
            }
            let s = matrix_from_rows(&format!("{field}.data"), &e.data)?;
            let expected = (dims.dim(e.i - 1), dims.dim(e.j - 1));
            if s.shape() != expected {
                return Err(CliError::input(format!(
                    "{field}.data: expected {}x{}, found {}x{}",
                    expected.0,
                    expected.1,
                    s.nrows(),
                    s.ncols()
                )));
            }
            problem.set_coupling(e.i - 1, e.j - 1, s)?;
        }
        Ok(problem)
    }

    fn views_problem(&self, views: &[Rows]) -> CliResult<Problem> {
        let mats = views
            .iter()
            .enumerate()
            .map(|(k, v)| matrix_from_rows(&format!("views[{k}]"), v))
            .collect::<CliResult<Vec<_>>>()?;
        let data = ViewData::new(mats).map_err(|e| CliError::input(format!("views: {e}")))?;
        if let Some(dims) = &self.dims {
            let cols: Vec<usize> = data.views().iter().map(|v| v.ncols()).collect();
            if dims != &cols {
                return Err(CliError::input(format!(
                    "dims: {dims:?} disagrees with view column counts {cols:?}"
                )));
            }
        }
        build_maxdiff(&data, self.r).map_err(|e| CliError::input(format!("views/r: {e}")))
    }

    pub fn from_problem(problem: &Problem) -> Self {
        Self {
            dims: Some(problem.dims().dims().to_vec()),
            r: problem.rank(),
            couplings: Some(
                problem
                    .couplings()
                    .map(|((i, j), s)| CouplingEntry {
                        i: i + 1,
                        j: j + 1,
                        data: matrix_to_rows(s),
                    })
                    .collect(),
            ),
            views: None,
        }
    }
}

impl SolutionFile {
    /// Loads a point for `dims`. Returns warnings for blocks whose
    /// orthonormality defect exceeds [`ORTH_WARN`].
    pub fn load(path: &Path, dims: &BlockDims) -> CliResult<(Point, Vec<String>)> {
        let file: SolutionFile = read_json(path)?;
        file.to_point(dims)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn to_point(&self, dims: &BlockDims) -> CliResult<(Point, Vec<String>)> {
        if self.blocks.len() != dims.num_blocks() {
            return Err(CliError::input(format!(
                "blocks: expected {} blocks, found {}",
                dims.num_blocks(),
                self.blocks.len()
            )));
        }
        let mut mats = Vec::with_capacity(self.blocks.len());
        for (k, rows) in self.blocks.iter().enumerate() {
            let field = format!("blocks[{k}]");
            let b = matrix_from_rows(&field, rows)?;
            if b.shape() != (dims.dim(k), dims.rank()) {
                return Err(CliError::input(format!(
                    "{field}: expected {}x{}, found {}x{}",
                    dims.dim(k),
                    dims.rank(),
                    b.nrows(),
                    b.ncols()
                )));
            }
            mats.push(b);
        }
        let point = Point::with_tolerance(dims.clone(), mats, ORTH_ERROR)
            .map_err(|e| CliError::input(format!("blocks: {e}")))?;
        let warnings = point
            .orthonormality_defects()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > ORTH_WARN)
            .map(|(k, d)| {
                format!("blocks[{k}]: orthonormality defect {d:.3e} exceeds {ORTH_WARN:.0e}")
            })
            .collect();
        Ok((point, warnings))
    }

    pub fn from_point(point: &Point) -> Self {
        Self {
            blocks: point.blocks().iter().map(matrix_to_rows).collect(),
        }
    }
}
