//! Post-hoc global optimality certificate for stationary points.
//!
//! At a stationary point with multipliers `Λ̄_i` (symmetrized) and `τ_i` the
//! smallest eigenvalue of `Λ̄_i`, the point is a global maximizer whenever
//!
//! ```text
//! L* = blockdiag(Ō_i Λ̄_i Ō_iᵀ + τ_i (I − Ō_i Ō_iᵀ)) − S̃ ⪰ 0.
//! ```
//!
//! Conversely any `τ_i < 0` proves the point is not a global maximizer. When
//! neither test fires the verdict is [`Verdict::Inconclusive`].

use nalgebra::DMatrix;

use crate::error::{mismatch, Result};
use crate::linalg::{orthogonal_complement, sym_eigenvalues, sym_spectral_norm, symmetrize};
use crate::objective::lagrange_multipliers;
use crate::problem::{BlockOrthogonal, OtsmProblem};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    CertifiedGlobal,
    CertifiedNotGlobal,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::CertifiedGlobal => "certified_global",
            Verdict::CertifiedNotGlobal => "certified_not_global",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions<T> {
    /// PSD tolerance on `λ_min(L*)`. `None` means `1e-6 · (1 + ‖S̃‖₂)`.
    pub tol_psd: Option<T>,
    pub tol_tau: T,
    /// Relative tolerance for the null-vector check `‖L* Ō‖_F`.
    pub tol_null: T,
}

impl<T: Real> Default for CertifyOptions<T> {
    fn default() -> Self {
        Self {
            tol_psd: None,
            tol_tau: lit(1e-8),
            tol_null: lit(1e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport<T: Real> {
    /// Raw multipliers `Λ̄_i = Ō_iᵀ Σ_{j≠i} S_ij Ō_j`.
    pub lambdas: Vec<DMatrix<T>>,
    /// Smallest eigenvalue of each symmetrized `Λ̄_i`.
    pub taus: Vec<T>,
    pub lmin_full: T,
    pub lmin_reduced: T,
    pub dual_bound: T,
    /// `(m r / 2) · max(0, −λ_min(L*))`. No feasible point beats the certified
    /// point's objective by more than this, whatever the verdict.
    pub gap_bound: T,
    pub verdict: Verdict,
    /// `max_i ‖Λ̄_i − Λ̄_iᵀ‖_F`.
    pub asymmetry: T,
    /// `‖L* Ō‖_F` with `Ō` the stacked point scaled by `m^{-1/2}`.
    pub null_residual: T,
    pub null_ok: bool,
    pub tol_psd: T,
    pub tol_tau: T,
}

impl<T: Real> CertificateReport<T> {
    pub fn min_tau(&self) -> T {
        self.taus
            .iter()
            .fold(T::max_value().unwrap(), |a, &b| a.min(b))
    }
}

/// `Λ̄_i` and `τ_i` for a point.
fn multipliers_and_taus<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
) -> Result<(Vec<DMatrix<T>>, Vec<T>)> {
    let lambdas = lagrange_multipliers(problem, point)?;
    let taus = lambdas
        .iter()
        .map(|l| sym_eigenvalues(&symmetrize(l)).map(|v| v[0]))
        .collect::<Result<Vec<_>>>()?;
    Ok((lambdas, taus))
}

/// `L*` built with caller-supplied `τ_i`. Lowering any `τ_i` can only lower
/// `L*` in Loewner order.
pub fn certificate_matrix_with_taus<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
    taus: &[T],
) -> Result<DMatrix<T>> {
    problem.check_point(point)?;
    if taus.len() != problem.num_blocks() {
        return Err(mismatch("number of taus", problem.num_blocks(), taus.len()));
    }
    let lambdas = lagrange_multipliers(problem, point)?;
    Ok(assemble_certificate(problem, point, &lambdas, taus))
}

fn assemble_certificate<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
    lambdas: &[DMatrix<T>],
    taus: &[T],
) -> DMatrix<T> {
    let dims = problem.dims();
    let mut l = -problem.assemble_stilde();
    for (i, off) in dims.offsets().into_iter().enumerate() {
        let d = dims.dim(i);
        let o = point.block(i);
        let lam = symmetrize(&lambdas[i]);
        let proj = o * o.transpose();
        let mut block = o * lam * o.transpose() - &proj * taus[i];
        for k in 0..d {
            block[(k, k)] += taus[i];
        }
        let mut view = l.view_mut((off, off), (d, d));
        view += &block;
    }
    // exact symmetry
    symmetrize(&l)
}

/// The `D × D` certificate matrix `L*`.
pub fn certificate_matrix<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
) -> Result<DMatrix<T>> {
    let (lambdas, taus) = multipliers_and_taus(problem, point)?;
    Ok(assemble_certificate(problem, point, &lambdas, &taus))
}

/// `L*` restricted to the orthogonal complement of the stacked point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCertificate<T: Real> {
    /// `(Ō⊥)ᵀ L* Ō⊥`, of size `(D − r) × (D − r)`.
    pub matrix: DMatrix<T>,
    /// `‖L* Ō‖_F`.
    pub null_residual: T,
    /// `null_residual ≤ tol_null · (1 + ‖L*‖_F)`.
    pub null_ok: bool,
}

pub fn reduced_certificate<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
    tol_null: T,
) -> Result<ReducedCertificate<T>> {
    let full = certificate_matrix(problem, point)?;
    reduce(problem, point, &full, tol_null)
}

fn reduce<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
    full: &DMatrix<T>,
    tol_null: T,
) -> Result<ReducedCertificate<T>> {
    let m: T = lit(problem.num_blocks() as f64);
    let stacked = point.stacked() / m.sqrt();
    let null_residual = (full * &stacked).norm();
    let null_ok = null_residual <= tol_null * (T::one() + full.norm());
    let complement = orthogonal_complement(&stacked, lit::<T>(1e-6).max(T::orth_floor()))?;
    let matrix = symmetrize(&(complement.tr_mul(&(full * &complement))));
    Ok(ReducedCertificate {
        matrix,
        null_residual,
        null_ok,
    })
}

/// Spectral upper bound `(m/2) · r · λ_max(S̃)` on the optimal value, from the
/// dual feasible point `Z = λ_max I, M = 0, L = λ_max I − S̃`.
pub fn dual_upper_bound<T: Real>(problem: &OtsmProblem<T>) -> Result<T> {
    let eig = sym_eigenvalues(&problem.assemble_stilde())?;
    let lmax = *eig.last().expect("D >= 2");
    let m: T = lit(problem.num_blocks() as f64);
    let r: T = lit(problem.rank() as f64);
    Ok(m * r * lmax * lit(0.5))
}

/// Default PSD tolerance `1e-6 · (1 + ‖S̃‖₂)`.
pub fn default_tol_psd<T: Real>(problem: &OtsmProblem<T>) -> Result<T> {
    Ok(lit::<T>(1e-6) * (T::one() + sym_spectral_norm(&problem.assemble_stilde())?))
}

pub fn certify<T: Real>(
    problem: &OtsmProblem<T>,
    point: &BlockOrthogonal<T>,
    options: &CertifyOptions<T>,
) -> Result<CertificateReport<T>> {
    problem.check_point(point)?;
    let tol_psd = match options.tol_psd {
        Some(t) => t,
        None => default_tol_psd(problem)?,
    };
    let (lambdas, taus) = multipliers_and_taus(problem, point)?;
    let full = assemble_certificate(problem, point, &lambdas, &taus);
    let lmin_full = sym_eigenvalues(&full)?[0];
    let reduced = reduce(problem, point, &full, options.tol_null)?;
    let lmin_reduced = if reduced.matrix.nrows() == 0 {
        T::zero()
    } else {
        sym_eigenvalues(&reduced.matrix)?[0]
    };
    let asymmetry = lambdas
        .iter()
        .map(|l| (l - l.transpose()).norm())
        .fold(T::zero(), |a, b| a.max(b));
    let m: T = lit(problem.num_blocks() as f64);
    let r: T = lit(problem.rank() as f64);
    let gap_bound = m * r * lit(0.5) * (-lmin_full).max(T::zero());
    let min_tau = taus.iter().fold(T::max_value().unwrap(), |a, &b| a.min(b));
    let verdict = if min_tau < -options.tol_tau {
        Verdict::CertifiedNotGlobal
    } else if lmin_full >= -tol_psd {
        Verdict::CertifiedGlobal
    } else {
        Verdict::Inconclusive
    };
    Ok(CertificateReport {
        lambdas,
        taus,
        lmin_full,
        lmin_reduced,
        dual_bound: dual_upper_bound(problem)?,
        gap_bound,
        verdict,
        asymmetry,
        null_residual: reduced.null_residual,
        null_ok: reduced.null_ok,
        tol_psd,
        tol_tau: options.tol_tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::hard_example;
    use crate::oscillation::{hard_optimum, mat_i, mat_j};
    use crate::problem::BlockDims;
    use approx::assert_relative_eq;

    fn point(blocks: Vec<DMatrix<f64>>) -> BlockOrthogonal<f64> {
        BlockOrthogonal::new(hard_example::<f64>(3, 2).unwrap().dims().clone(), blocks).unwrap()
    }

    #[test]
    fn hard_optimum_is_certified_with_unit_taus() {
        let p = hard_example::<f64>(3, 2).unwrap();
        let c = certify(&p, &hard_optimum(), &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedGlobal);
        for t in &c.taus {
            assert_relative_eq!(*t, 1.0, epsilon = 1e-12);
        }
        assert!(c.lmin_full.abs() < 1e-12);
        assert!(c.null_ok);
        assert!(c.gap_bound < 1e-11);
    }

    #[test]
    fn oscillation_point_is_inconclusive() {
        // every τ_i is 0 here, yet L* has a negative direction
        let p = hard_example::<f64>(3, 2).unwrap();
        let x = point(vec![mat_i(), mat_j(), mat_i()]);
        let c = certify(&p, &x, &CertifyOptions::default()).unwrap();
        assert!(c.min_tau() >= -1e-12);
        assert!(c.lmin_full < -1e-3);
        assert_eq!(c.verdict, Verdict::Inconclusive);
        // the optimum 3 exceeds f = 2 by at most the gap bound
        assert!(3.0 <= 2.0 + c.gap_bound + 1e-12);
    }

    #[test]
    fn negative_tau_proves_non_global() {
        let dims = BlockDims::uniform(2, 2, 2).unwrap();
        let p =
            OtsmProblem::from_couplings(dims.clone(), [((0, 1), -DMatrix::<f64>::identity(2, 2))])
                .unwrap();
        let x = BlockOrthogonal::new(dims, vec![DMatrix::identity(2, 2); 2]).unwrap();
        let c = certify(&p, &x, &CertifyOptions::default()).unwrap();
        assert_relative_eq!(c.taus[0], -1.0, epsilon = 1e-14);
        assert_eq!(c.verdict, Verdict::CertifiedNotGlobal);
    }

    #[test]
    fn dual_bound_on_hard_example_is_three() {
        let p = hard_example::<f64>(3, 2).unwrap();
        assert_relative_eq!(dual_upper_bound(&p).unwrap(), 3.0, epsilon = 1e-10);
    }

    #[test]
    fn lowering_taus_lowers_certificate() {
        let p = hard_example::<f64>(3, 2).unwrap();
        let x = hard_optimum();
        let base = certificate_matrix(&p, &x).unwrap();
        let lowered = certificate_matrix_with_taus(&p, &x, &[0.5, 1.0, 0.25]).unwrap();
        let diff = &base - &lowered;
        let ev = sym_eigenvalues(&diff).unwrap();
        assert!(ev[0] >= -1e-12);
    }

    #[test]
    fn reduced_matrix_has_complement_size() {
        let p = hard_example::<f64>(3, 2).unwrap();
        let red = reduced_certificate(&p, &hard_optimum(), 1e-6).unwrap();
        assert_eq!(red.matrix.shape(), (7, 7));
        assert!(red.null_ok);
    }

    #[test]
    fn explicit_tolerance_is_respected() {
        let p = hard_example::<f64>(3, 2).unwrap();
        let x = point(vec![mat_i(), mat_j(), mat_i()]);
        let opts = CertifyOptions {
            tol_psd: Some(10.0),
            ..CertifyOptions::default()
        };
        let c = certify(&p, &x, &opts).unwrap();
        assert_eq!(c.tol_psd, 10.0);
        assert_eq!(c.verdict, Verdict::CertifiedGlobal);
    }
}
