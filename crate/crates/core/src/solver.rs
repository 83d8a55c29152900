//! Proximal block relaxation.
//!
//! Each cycle visits the blocks in ascending order and replaces `O_i` by the
//! polar factor of `B = Σ_{j≠i} S_ij O_j + α⁻¹ O_i`, which maximizes the block
//! objective minus `(1/2α)‖O_i − O_i^k‖²_F`. With finite `α` every update is
//! monotone and the per-cycle gain dominates `(1/2α)Σ_i‖O_i^{k+1} − O_i^k‖²_F`;
//! both facts are checked at run time. `α = +∞` drops the proximal term and
//! recovers the classical block ascent, which can cycle.

use nalgebra::DMatrix;

use crate::error::{OtsmError, Result};
use crate::linalg::{polar_project, sym_eigen};
use crate::objective::{objective_of_blocks, stationarity, StationarityReport};
use crate::problem::{BlockDims, BlockOrthogonal, OtsmProblem};
use crate::scalar::{lit, slack_floor, Real};

/// Proximity constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha<T> {
    Finite(T),
    /// Classical block ascent without the proximal term. Not guaranteed to
    /// converge.
    Infinite,
}

impl<T: Real> Alpha<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Alpha::Finite(_))
    }

    fn inverse(&self) -> Option<T> {
        match *self {
            Alpha::Finite(a) => Some(T::one() / a),
            Alpha::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy<T: Real> {
    /// First `r` columns of `I_{d_i}` for every block.
    Identity,
    /// Top-`r` eigenvectors of `S̃`, split by block and projected.
    Spectral,
    Custom(BlockOrthogonal<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T: Real> {
    pub alpha: Alpha<T>,
    /// Stop once the mean block change of a cycle drops below this.
    pub tol: T,
    /// Maximum number of full cycles.
    pub max_iter: usize,
    pub init: InitStrategy<T>,
    /// Keep every iterate in [`SolveReport::history`].
    pub record_history: bool,
    /// Relative slack for the finite-α monotonicity audit.
    pub monotonicity_slack: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            alpha: Alpha::Finite(lit(1000.0)),
            tol: lit(1e-5),
            max_iter: 2000,
            init: InitStrategy::Spectral,
            record_history: false,
            monotonicity_slack: slack_floor(1e-12),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn with_init(mut self, init: InitStrategy<T>) -> Self {
        self.init = init;
        self
    }

    pub fn with_alpha(mut self, alpha: Alpha<T>) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Alpha::Finite(a) = self.alpha {
            if !a.is_finite() || a <= T::zero() {
                return Err(OtsmError::InvalidConfig(format!(
                    "alpha must be positive and finite (use Alpha::Infinite for the classical variant), got {a}"
                )));
            }
        }
        if !self.tol.is_finite() || self.tol <= T::zero() {
            return Err(OtsmError::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(OtsmError::InvalidConfig("max_iter must be positive".into()));
        }
        if !self.monotonicity_slack.is_finite() || self.monotonicity_slack < T::zero() {
            return Err(OtsmError::InvalidConfig(
                "monotonicity_slack must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    Converged,
    MaxIter,
    /// Objective flat for [`STAGNATION_WINDOW`] cycles while the iterates keep
    /// moving. Only raised in `α = +∞` mode.
    Stagnated,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIter => "max_iter",
            StopReason::Stagnated => "stagnated",
        }
    }
}

pub const STAGNATION_WINDOW: usize = 10;
const STAGNATION_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct SolveReport<T: Real> {
    pub solution: BlockOrthogonal<T>,
    /// Objective at the initial point followed by one entry per cycle, so
    /// `objective_trace.len() == iterations + 1`.
    pub objective_trace: Vec<T>,
    /// `(1/m) Σ_i ‖O_i^k − O_i^{k−1}‖_F` per cycle.
    pub mean_change_trace: Vec<T>,
    /// `Σ_i ‖O_i^k − O_i^{k−1}‖²_F` per cycle.
    pub step_sq_trace: Vec<T>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub stationarity: StationarityReport<T>,
    pub alpha: Alpha<T>,
    /// Every iterate including the initial point, if requested.
    pub history: Option<Vec<BlockOrthogonal<T>>>,
}

impl<T: Real> SolveReport<T> {
    pub fn final_objective(&self) -> T {
        *self
            .objective_trace
            .last()
            .expect("trace holds the initial value")
    }

    pub fn initial_objective(&self) -> T {
        self.objective_trace[0]
    }
}

pub fn init_identity<T: Real>(dims: &BlockDims) -> BlockOrthogonal<T> {
    let blocks = dims
        .dims()
        .iter()
        .map(|&d| DMatrix::identity(d, dims.rank()))
        .collect();
    BlockOrthogonal::from_blocks_unchecked(dims.clone(), blocks)
        .expect("identity blocks match their dims")
}

pub fn init_spectral<T: Real>(problem: &OtsmProblem<T>) -> Result<BlockOrthogonal<T>> {
    let dims = problem.dims();
    let r = dims.rank();
    let total = dims.total();
    let eig = sym_eigen(&problem.assemble_stilde())?;
    // largest eigenvalue first
    let mut top = DMatrix::zeros(total, r);
    for k in 0..r {
        top.set_column(k, &eig.vectors.column(total - 1 - k));
    }
    let blocks = dims
        .dims()
        .iter()
        .zip(dims.offsets())
        .map(|(&d, off)| polar_project(&top.rows(off, d).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    BlockOrthogonal::from_blocks_unchecked(dims.clone(), blocks)
}

/// Proximal update of block `i` given the current blocks.
pub fn step_block<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
    i: usize,
    alpha: Alpha<T>,
) -> Result<DMatrix<T>> {
    problem.check_point(point)?;
    if i >= problem.num_blocks() {
        return Err(OtsmError::InvalidInput(format!(
            "block index {} out of range for m = {}",
            i + 1,
            problem.num_blocks()
        )));
    }
    update_block(problem, point.blocks(), i, alpha)
}

fn update_block<T: Real>(
    problem: &OtsmProblem<T>,
    blocks: &[DMatrix<T>],
    i: usize,
    alpha: Alpha<T>,
) -> Result<DMatrix<T>> {
    let mut b = problem.block_gradient(i, blocks);
    if let Some(inv) = alpha.inverse() {
        b += &blocks[i] * inv;
    }
    polar_project(&b)
}

fn initial_point<T: Real>(
    problem: &OtsmProblem<T>,
    init: &InitStrategy<T>,
) -> Result<BlockOrthogonal<T>> {
    match init {
        InitStrategy::Identity => Ok(init_identity(problem.dims())),
        InitStrategy::Spectral => init_spectral(problem),
        InitStrategy::Custom(p) => {
            problem.check_point(p)?;
            Ok(p.clone())
        }
    }
}

/// Runs cycles of [`step_block`] until the mean change drops below `tol` or
/// `max_iter` cycles have completed.
pub fn solve<T: Real>(
    problem: &OtsmProblem<T>,
    config: &SolverConfig<T>,
) -> Result<SolveReport<T>> {
    config.validate()?;
    let start = initial_point(problem, &config.init)?;
    let dims = problem.dims().clone();
    let m = dims.num_blocks();
    let m_t: T = lit(m as f64);
    let descent_slack: T = slack_floor(1e-10);
    let stagnation_tol: T = lit(STAGNATION_TOL);

    let mut blocks = start.clone().into_blocks();
    let mut f_prev = objective_of_blocks(problem, &blocks);
    let mut objective_trace = vec![f_prev];
    let mut mean_change_trace = Vec::new();
    let mut step_sq_trace = Vec::new();
    let mut history = config.record_history.then(|| vec![start]);
    let mut stop_reason = StopReason::MaxIter;
    let mut iterations = 0;
    let mut flat_cycles = 0;

    for cycle in 1..=config.max_iter {
        let previous = blocks.clone();
        for i in 0..m {
            blocks[i] = update_block(problem, &blocks, i, config.alpha)?;
        }
        let (change_sum, step_sq) =
            blocks
                .iter()
                .zip(&previous)
                .fold((T::zero(), T::zero()), |(sum, sq), (a, b)| {
                    let n = (a - b).norm();
                    (sum + n, sq + n * n)
                });
        let mean_change = change_sum / m_t;
        let f = objective_of_blocks(problem, &blocks);

        if let Alpha::Finite(a) = config.alpha {
            let scale = T::one() + f_prev.abs();
            if f < f_prev - config.monotonicity_slack * scale {
                return Err(OtsmError::MonotonicityViolation {
                    cycle,
                    previous: f_prev.to_f64_lossy(),
                    current: f.to_f64_lossy(),
                });
            }
            let lhs = step_sq / (a + a);
            if lhs > f - f_prev + descent_slack * scale {
                return Err(OtsmError::DescentViolation {
                    cycle,
                    lhs: lhs.to_f64_lossy(),
                    rhs: (f - f_prev).to_f64_lossy(),
                });
            }
        }

        objective_trace.push(f);
        mean_change_trace.push(mean_change);
        step_sq_trace.push(step_sq);
        if let Some(h) = history.as_mut() {
            h.push(BlockOrthogonal::from_blocks_unchecked(
                dims.clone(),
                blocks.clone(),
            )?);
        }
        iterations = cycle;

        if mean_change < config.tol {
            stop_reason = StopReason::Converged;
            break;
        }
        if !config.alpha.is_finite() {
            if (f - f_prev).abs() < stagnation_tol * T::one().max(f.abs()) {
                flat_cycles += 1;
            } else {
                flat_cycles = 0;
            }
            if flat_cycles >= STAGNATION_WINDOW {
                stop_reason = StopReason::Stagnated;
                break;
            }
        }
        f_prev = f;
    }

    let solution = BlockOrthogonal::from_blocks_unchecked(dims, blocks)?;
    let stationarity = stationarity(problem, &solution)?;
    Ok(SolveReport {
        solution,
        objective_trace,
        mean_change_trace,
        step_sq_trace,
        iterations,
        stop_reason,
        stationarity,
        alpha: config.alpha,
        history,
    })
}
