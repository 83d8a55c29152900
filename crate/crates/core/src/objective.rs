//! Objective evaluation, Lagrange multipliers and first-order diagnostics.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::problem::{BlockOrthogonal, OtsmProblem};
use crate::scalar::{lit, Real};

/// `Σ_{i<j} tr(O_iᵀ S_ij O_j)`.
pub fn objective<T: Real>(problem: &OtsmProblem<T>, point: &BlockOrthogonal<T>) -> Result<T> {
    problem.check_point(point)?;
    Ok(objective_of_blocks(problem, point.blocks()))
}

pub(crate) fn objective_of_blocks<T: Real>(problem: &OtsmProblem<T>, blocks: &[DMatrix<T>]) -> T {
    problem.couplings().fold(T::zero(), |acc, ((i, j), s)| {
        acc + blocks[i].dot(&(s * &blocks[j]))
    })
}

/// `½ tr(Oᵀ S̃ O)` with `O` the stacked `D × r` point. Equal to [`objective`]
/// up to rounding; kept as an independent route through the lifted matrix.
pub fn lifted_objective<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
) -> Result<T> {
    problem.check_point(point)?;
    let o = point.stacked();
    let s = problem.assemble_stilde();
    Ok(o.dot(&(s * &o)) * lit(0.5))
}

/// `Λ_i = O_iᵀ Σ_{j≠i} S_ij O_j`, not symmetrized.
pub fn lagrange_multipliers<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
) -> Result<Vec<DMatrix<T>>> {
    problem.check_point(point)?;
    let blocks = point.blocks();
    Ok((0..problem.num_blocks())
        .map(|i| blocks[i].tr_mul(&problem.block_gradient(i, blocks)))
        .collect())
}

/// First-order residuals of a point.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport<T: Real> {
    /// `‖Σ_{j≠i} S_ij O_j − O_i Λ_i‖_F` per block.
    pub gradient_residuals: Vec<T>,
    /// `‖Λ_i − Λ_iᵀ‖_F` per block.
    pub asymmetries: Vec<T>,
    pub max_gradient_residual: T,
    pub max_asymmetry: T,
}

impl<T: Real> StationarityReport<T> {
    pub fn is_stationary(&self, tol: T) -> bool {
        self.max_gradient_residual <= tol && self.max_asymmetry <= tol
    }
}

pub fn stationarity<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
) -> Result<StationarityReport<T>> {
    problem.check_point(point)?;
    let blocks = point.blocks();
    let mut gradient_residuals = Vec::with_capacity(blocks.len());
    let mut asymmetries = Vec::with_capacity(blocks.len());
    for (i, o) in blocks.iter().enumerate() {
        let g = problem.block_gradient(i, blocks);
        let lambda = o.tr_mul(&g);
        gradient_residuals.push((&g - o * &lambda).norm());
        asymmetries.push((&lambda - lambda.transpose()).norm());
    }
    let max = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a.max(b));
    Ok(StationarityReport {
        max_gradient_residual: max(&gradient_residuals),
        max_asymmetry: max(&asymmetries),
        gradient_residuals,
        asymmetries,
    })
}
