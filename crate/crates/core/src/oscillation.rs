//! The four-cycle of classical block ascent on the hard example (`d = 3`,
//! `r = 2`): from `(I, J, I)` every block update with `α = +∞` has a
//! rank-one `B`, and picking a particular maximizer at each step walks
//! `(I,J,I) → (−J,I,−J) → (−I,−J,−I) → (J,−I,J) → (I,J,I)` at constant
//! objective 2, while the global optimum is 3. With finite `α` the update is
//! unique and `(I, J, I)` is a fixed point.

use nalgebra::DMatrix;

use crate::builders::hard_example;
use crate::error::{OtsmError, Result};
use crate::linalg::nuclear_norm;
use crate::objective::objective;
use crate::problem::{BlockDims, BlockOrthogonal};
use crate::solver::{solve, Alpha, InitStrategy, SolverConfig, StopReason};

/// One scripted block update.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxCheck {
    pub cycle: usize,
    pub block: usize,
    /// `tr(O_newᵀ B)`.
    pub attained: f64,
    /// `‖B‖_*`.
    pub nuclear_norm: f64,
}

#[derive(Debug, Clone)]
pub struct OscillationTrace {
    /// `(I,J,I)`, `(−J,I,−J)`, `(−I,−J,−I)`, `(J,−I,J)`.
    pub iterates: Vec<BlockOrthogonal<f64>>,
    pub objectives: Vec<f64>,
    pub checks: Vec<ArgmaxCheck>,
    /// Objective at the known global maximizer.
    pub global_optimum: f64,
    /// Finite-α solve from `(I, J, I)`.
    pub fixed_point_iterations: usize,
    pub fixed_point_mean_change: f64,
    pub fixed_point_alpha: f64,
}

pub const ARGMAX_TOL: f64 = 1e-10;

pub fn mat_i() -> DMatrix<f64> {
    DMatrix::identity(3, 2)
}

pub fn mat_j() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 1.0, 0.0, 0.0, 0.0])
}

/// The known global maximizer of the `d = 3, r = 2` hard example.
pub fn hard_optimum() -> BlockOrthogonal<f64> {
    let h = 3f64.sqrt() / 2.0;
    let o1 = DMatrix::identity(3, 2);
    let o2 = DMatrix::from_row_slice(3, 2, &[-0.5, h, -h, -0.5, 0.0, 0.0]);
    let o3 = DMatrix::from_row_slice(3, 2, &[0.5, h, -h, 0.5, 0.0, 0.0]);
    BlockOrthogonal::new(BlockDims::uniform(3, 3, 2).unwrap(), vec![o1, o2, o3])
        .expect("hard optimum is feasible")
}

fn triple(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> BlockOrthogonal<f64> {
    BlockOrthogonal::new(BlockDims::uniform(3, 3, 2).unwrap(), vec![a, b, c])
        .expect("scripted iterates are feasible")
}

/// Replays and verifies the cycle. Fails with [`OtsmError::Internal`] if any
/// scripted step is not a valid `α = +∞` update, if the objective moves, or if
/// `(I, J, I)` is not a finite-α fixed point.
pub fn oscillation_demo() -> Result<OscillationTrace> {
    let problem = hard_example::<f64>(3, 2)?;
    let (i, j) = (mat_i(), mat_j());
    let iterates = vec![
        triple(i.clone(), j.clone(), i.clone()),
        triple(-&j, i.clone(), -&j),
        triple(-&i, -&j, -&i),
        triple(j.clone(), -&i, j.clone()),
    ];

    let mut checks = Vec::new();
    for (cycle, from) in iterates.iter().enumerate() {
        let to = &iterates[(cycle + 1) % iterates.len()];
        // Gauss-Seidel: blocks before `k` already hold their new values
        let mut blocks = from.blocks().to_vec();
        for k in 0..3 {
            let b = problem.block_gradient(k, &blocks);
            let attained = to.block(k).dot(&b);
            let nuclear = nuclear_norm(&b)?;
            if (attained - nuclear).abs() > ARGMAX_TOL {
                return Err(OtsmError::Internal(format!(
                    "cycle {} block {}: tr(OᵀB) = {attained} but ‖B‖_* = {nuclear}",
                    cycle + 1,
                    k + 1
                )));
            }
            checks.push(ArgmaxCheck {
                cycle: cycle + 1,
                block: k + 1,
                attained,
                nuclear_norm: nuclear,
            });
            blocks[k] = to.block(k).clone();
        }
    }

    let objectives = iterates
        .iter()
        .map(|p| objective(&problem, p))
        .collect::<Result<Vec<_>>>()?;
    if let Some(f) = objectives.iter().find(|f| (**f - 2.0).abs() > ARGMAX_TOL) {
        return Err(OtsmError::Internal(format!(
            "objective along the cycle moved to {f}"
        )));
    }
    let global_optimum = objective(&problem, &hard_optimum())?;

    let alpha = 1000.0;
    let config = SolverConfig::default()
        .with_alpha(Alpha::Finite(alpha))
        .with_init(InitStrategy::Custom(iterates[0].clone()));
    let report = solve(&problem, &config)?;
    let moved = report.solution.mean_change(&iterates[0]);
    if report.stop_reason != StopReason::Converged || moved > ARGMAX_TOL {
        return Err(OtsmError::Internal(format!(
            "finite-α solve left (I, J, I): stop {:?}, change {moved}",
            report.stop_reason
        )));
    }

    Ok(OscillationTrace {
        iterates,
        objectives,
        checks,
        global_optimum,
        fixed_point_iterations: report.iterations,
        fixed_point_mean_change: report.mean_change_trace.iter().copied().fold(0.0, f64::max),
        fixed_point_alpha: alpha,
    })
}
