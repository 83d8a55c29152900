//! Seeded benchmark grid over synthetic Procrustes instances: how often the
//! certificate fires, how many cycles each initialization needs, and how far
//! apart the two initializations end up when a run is not certified.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builders::synth_procrustes;
use crate::certificate::{certify, CertifyOptions, Verdict};
use crate::error::{OtsmError, Result};
use crate::solver::{solve, Alpha, InitStrategy, SolverConfig, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Identity,
    Spectral,
}

impl InitKind {
    pub fn strategy(self) -> InitStrategy<f64> {
        match self {
            InitKind::Identity => InitStrategy::Identity,
            InitKind::Spectral => InitStrategy::Spectral,
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitKind::Identity => "identity",
            InitKind::Spectral => "spectral",
        })
    }
}

impl FromStr for InitKind {
    type Err = OtsmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(InitKind::Identity),
            "spectral" => Ok(InitKind::Spectral),
            other => Err(OtsmError::InvalidInput(format!("unknown init '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub d_values: Vec<usize>,
    pub sigma_values: Vec<f64>,
    pub reps: usize,
    pub base_seed: u64,
    pub inits: Vec<InitKind>,
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            m: 5,
            n: 100,
            r: 3,
            d_values: vec![5, 10, 20],
            sigma_values: vec![0.1, 10.0],
            reps: 20,
            base_seed: 1,
            inits: vec![InitKind::Identity, InitKind::Spectral],
            alpha: 1000.0,
            tol: 1e-5,
            max_iter: 2000,
        }
    }
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(OtsmError::InvalidConfig(msg.to_string()));
        if self.m < 2 || self.n == 0 || self.r == 0 {
            return bad("m must be at least 2 and n, r positive");
        }
        if self.reps == 0 {
            return bad("reps must be at least 1");
        }
        if self.d_values.is_empty() || self.sigma_values.is_empty() || self.inits.is_empty() {
            return bad("d, sigma and init lists must be nonempty");
        }
        if self.d_values.iter().any(|&d| d < self.r) {
            return bad("every d must be at least r");
        }
        if self
            .sigma_values
            .iter()
            .any(|&s| !s.is_finite() || s <= 0.0)
        {
            return bad("sigma values must be positive and finite");
        }
        if !self.alpha.is_finite()
            || self.alpha <= 0.0
            || !self.tol.is_finite()
            || self.tol <= 0.0
            || self.max_iter == 0
        {
            return bad("alpha, tol and max_iter must be positive");
        }
        Ok(())
    }
}

/// Aggregated outcome of one `(d, σ, init)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub d: usize,
    pub sigma: f64,
    pub init: InitKind,
    pub certified: usize,
    pub inconclusive: usize,
    pub not_global: usize,
    /// Runs whose solve or certificate returned an error.
    pub failed: usize,
    /// Runs that stopped without meeting the mean-change tolerance.
    pub unconverged: usize,
    /// `not_global` restricted to converged runs.
    pub not_global_converged: usize,
    pub mean_iterations: f64,
    pub mean_final_objective: f64,
    /// For uncertified runs of this init: own objective minus the other
    /// init's objective on the same instance.
    pub objective_gaps: Vec<f64>,
}

impl CellResult {
    pub fn total(&self) -> usize {
        self.certified + self.inconclusive + self.not_global + self.failed
    }

    pub fn certified_fraction(&self) -> f64 {
        self.certified as f64 / self.total().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
struct RunOutcome {
    verdict: Option<Verdict>,
    converged: bool,
    iterations: usize,
    objective: f64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Instance seed for one repetition of one cell.
pub fn derive_seed(base: u64, d: usize, sigma: f64, rep: usize) -> u64 {
    [d as u64, sigma.to_bits(), rep as u64]
        .iter()
        .fold(splitmix(base), |h, &x| splitmix(h ^ x))
}

fn run_one(grid: &ExperimentGrid, d: usize, sigma: f64, rep: usize) -> Vec<RunOutcome> {
    let seed = derive_seed(grid.base_seed, d, sigma, rep);
    let instance = match synth_procrustes::<f64>(grid.m, grid.n, d, grid.r, sigma, seed) {
        Ok(s) => s,
        Err(_) => {
            return grid
                .inits
                .iter()
                .map(|_| RunOutcome {
                    verdict: None,
                    converged: false,
                    iterations: 0,
                    objective: f64::NAN,
                })
                .collect()
        }
    };
    grid.inits
        .iter()
        .map(|init| {
            let config = SolverConfig {
                alpha: Alpha::Finite(grid.alpha),
                tol: grid.tol,
                max_iter: grid.max_iter,
                init: init.strategy(),
                ..SolverConfig::default()
            };
            let solved = solve(&instance.problem, &config).and_then(|rep| {
                let cert = certify(&instance.problem, &rep.solution, &CertifyOptions::default())?;
                Ok((rep, cert))
            });
            match solved {
                Ok((rep, cert)) => RunOutcome {
                    verdict: Some(cert.verdict),
                    converged: rep.stop_reason == StopReason::Converged,
                    iterations: rep.iterations,
                    objective: rep.final_objective(),
                },
                Err(_) => RunOutcome {
                    verdict: None,
                    converged: false,
                    iterations: 0,
                    objective: f64::NAN,
                },
            }
        })
        .collect()
}

/// Runs every `(d, σ, rep)` instance with every init and aggregates per
/// `(d, σ, init)`. Output order is `d`, then `σ`, then init, as given in the
/// grid; parallel execution does not affect the result.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<CellResult>> {
    grid.validate()?;
    let tasks: Vec<(usize, f64, usize)> = grid
        .d_values
        .iter()
        .flat_map(|&d| {
            grid.sigma_values
                .iter()
                .flat_map(move |&s| (0..grid.reps).map(move |rep| (d, s, rep)))
        })
        .collect();
    let outcomes: Vec<Vec<RunOutcome>> = tasks
        .par_iter()
        .map(|&(d, s, rep)| run_one(grid, d, s, rep))
        .collect();

    let mut results = Vec::new();
    for (cell_idx, chunk) in outcomes.chunks(grid.reps).enumerate() {
        let (d, sigma, _) = tasks[cell_idx * grid.reps];
        for (k, &init) in grid.inits.iter().enumerate() {
            let mut cell = CellResult {
                d,
                sigma,
                init,
                certified: 0,
                inconclusive: 0,
                not_global: 0,
                failed: 0,
                unconverged: 0,
                not_global_converged: 0,
                mean_iterations: 0.0,
                mean_final_objective: 0.0,
                objective_gaps: Vec::new(),
            };
            let mut ok = 0usize;
            for runs in chunk {
                let run = &runs[k];
                match run.verdict {
                    None => {
                        cell.failed += 1;
                        continue;
                    }
                    Some(Verdict::CertifiedGlobal) => cell.certified += 1,
                    Some(Verdict::Inconclusive) => cell.inconclusive += 1,
                    Some(Verdict::CertifiedNotGlobal) => {
                        cell.not_global += 1;
                        if run.converged {
                            cell.not_global_converged += 1;
                        }
                    }
                }
                if !run.converged {
                    cell.unconverged += 1;
                }
                ok += 1;
                cell.mean_iterations += run.iterations as f64;
                cell.mean_final_objective += run.objective;
                if run.verdict != Some(Verdict::CertifiedGlobal) && runs.len() == 2 {
                    let other = &runs[1 - k];
                    if other.verdict.is_some() {
                        cell.objective_gaps.push(run.objective - other.objective);
                    }
                }
            }
            if ok > 0 {
                cell.mean_iterations /= ok as f64;
                cell.mean_final_objective /= ok as f64;
            } else {
                cell.mean_iterations = f64::NAN;
                cell.mean_final_objective = f64::NAN;
            }
            results.push(cell);
        }
    }
    Ok(results)
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub d: usize,
    pub sigma: f64,
    pub init: InitKind,
    pub certified: usize,
    pub inconclusive: usize,
    pub not_global: usize,
    pub mean_iter: f64,
    pub mean_final_objective: f64,
    pub failed: usize,
}

impl From<&CellResult> for CsvRow {
    fn from(c: &CellResult) -> Self {
        Self {
            d: c.d,
            sigma: c.sigma,
            init: c.init,
            certified: c.certified,
            inconclusive: c.inconclusive,
            not_global: c.not_global,
            mean_iter: c.mean_iterations,
            mean_final_objective: c.mean_final_objective,
            failed: c.failed,
        }
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "d",
    "sigma",
    "init",
    "certified",
    "inconclusive",
    "not_global",
    "mean_iter",
    "mean_final_objective",
    "failed",
];

fn io_err(path: &Path, e: impl fmt::Display) -> OtsmError {
    OtsmError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Serializes rows to CSV bytes, header first.
pub fn results_to_csv(results: &[CellResult]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER)
        .map_err(|e| OtsmError::Internal(e.to_string()))?;
    for c in results {
        w.serialize(CsvRow::from(c))
            .map_err(|e| OtsmError::Internal(e.to_string()))?;
    }
    w.into_inner()
        .map_err(|e| OtsmError::Internal(e.to_string()))
}

/// Writes the CSV atomically: a temporary file in the target directory is
/// renamed over `path` only after a complete write.
pub fn export_results(results: &[CellResult], path: &Path) -> Result<()> {
    let bytes = results_to_csv(results)?;
    write_atomic(path, &bytes)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.flush().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn parse_results(path: &Path) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    rdr.deserialize()
        .map(|row| row.map_err(|e| io_err(path, e)))
        .collect()
}
