//! Constructors that turn application data into OTSM instances.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{mismatch, OtsmError, Result};
use crate::problem::{BlockDims, BlockOrthogonal, OtsmProblem};
use crate::scalar::{lit, Real};

/// `m` data matrices `A_i` of shape `n × d_i` sharing the row count `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewData<T: Real> {
    views: Vec<DMatrix<T>>,
}

impl<T: Real> ViewData<T> {
    pub fn new(views: Vec<DMatrix<T>>) -> Result<Self> {
        if views.len() < 2 {
            return Err(OtsmError::InvalidInput(format!(
                "need at least 2 views, got {}",
                views.len()
            )));
        }
        let n = views[0].nrows();
        for (i, v) in views.iter().enumerate() {
            if v.nrows() != n {
                return Err(mismatch(format!("rows of view {}", i + 1), n, v.nrows()));
            }
            if v.ncols() == 0 {
                return Err(OtsmError::InvalidInput(format!(
                    "view {} has no columns",
                    i + 1
                )));
            }
        }
        Ok(Self { views })
    }

    pub fn views(&self) -> &[DMatrix<T>] {
        &self.views
    }

    pub fn num_rows(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn dims(&self, rank: usize) -> Result<BlockDims> {
        BlockDims::new(self.views.iter().map(|v| v.ncols()).collect(), rank)
    }
}

fn cross_products<T: Real>(views: &[DMatrix<T>], sign: T) -> Vec<((usize, usize), DMatrix<T>)> {
    let m = views.len();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            out.push(((i, j), views[i].tr_mul(&views[j]) * sign));
        }
    }
    out
}

/// MAXDIFF / multi-set CCA: `S_ij = A_iᵀ A_j`.
pub fn build_maxdiff<T: Real>(data: &ViewData<T>, rank: usize) -> Result<OtsmProblem<T>> {
    OtsmProblem::from_couplings(data.dims(rank)?, cross_products(data.views(), T::one()))
}

/// Generalized Procrustes analysis of landmark sets.
#[derive(Debug, Clone)]
pub struct ProcrustesProblem<T: Real> {
    pub problem: OtsmProblem<T>,
    views: Vec<DMatrix<T>>,
    /// `(m − 1) Σ_i ‖A_i‖²_F`. For square orthogonal blocks the pairwise
    /// discrepancy equals `offset − 2 · objective`.
    pub offset: T,
}

impl<T: Real> ProcrustesProblem<T> {
    /// `Σ_{i<j} ‖A_i O_i − A_j O_j‖²_F` evaluated directly.
    pub fn discrepancy(&self, point: &BlockOrthogonal<T>) -> Result<T> {
        self.problem.check_point(point)?;
        let rotated: Vec<DMatrix<T>> = self
            .views
            .iter()
            .zip(point.blocks())
            .map(|(a, o)| a * o)
            .collect();
        let mut total = T::zero();
        for i in 0..rotated.len() {
            for j in i + 1..rotated.len() {
                total += (&rotated[i] - &rotated[j]).norm_squared();
            }
        }
        Ok(total)
    }

    /// Discrepancy implied by an objective value; exact when `r = d`.
    pub fn discrepancy_from_objective(&self, objective: T) -> T {
        self.offset - objective * lit(2.0)
    }
}

/// Procrustes with equal landmark dimensions; `r < d` gives partial rotations.
pub fn build_procrustes<T: Real>(data: &ViewData<T>, rank: usize) -> Result<ProcrustesProblem<T>> {
    let d = data.views()[0].ncols();
    if let Some(i) = data.views().iter().position(|v| v.ncols() != d) {
        return Err(mismatch(
            format!("columns of view {}", i + 1),
            d,
            data.views()[i].ncols(),
        ));
    }
    let problem = build_maxdiff(data, rank)?;
    let m: T = lit(data.views().len() as f64);
    let offset = data
        .views()
        .iter()
        .fold(T::zero(), |acc, a| acc + a.norm_squared())
        * (m - T::one());
    Ok(ProcrustesProblem {
        problem,
        views: data.views().to_vec(),
        offset,
    })
}

/// Orthogonal least squares `min ½‖Y − Σ_k A_k O_k‖²_F` over square orthogonal
/// `O_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsData<T: Real> {
    pub target: DMatrix<T>,
    pub regressors: Vec<DMatrix<T>>,
}

impl<T: Real> OlsData<T> {
    pub fn new(target: DMatrix<T>, regressors: Vec<DMatrix<T>>) -> Result<Self> {
        if regressors.is_empty() {
            return Err(OtsmError::InvalidInput(
                "need at least one regressor".into(),
            ));
        }
        for (k, a) in regressors.iter().enumerate() {
            if a.shape() != target.shape() {
                return Err(mismatch(
                    format!("regressor {}", k + 1),
                    format!("{}x{}", target.nrows(), target.ncols()),
                    format!("{}x{}", a.nrows(), a.ncols()),
                ));
            }
        }
        Ok(Self { target, regressors })
    }

    /// `½‖Y − Σ_k A_k O_k‖²_F`.
    pub fn criterion(&self, rotations: &[DMatrix<T>]) -> Result<T> {
        if rotations.len() != self.regressors.len() {
            return Err(mismatch(
                "number of rotations",
                self.regressors.len(),
                rotations.len(),
            ));
        }
        let mut resid = self.target.clone();
        for (a, o) in self.regressors.iter().zip(rotations) {
            resid -= a * o;
        }
        Ok(resid.norm_squared() * lit(0.5))
    }
}

/// OTSM reformulation of orthogonal least squares over `K + 1` blocks with
/// `A_{K+1} = Y` and `S_ij = −A_iᵀ A_j`.
#[derive(Debug, Clone)]
pub struct OlsProblem<T: Real> {
    pub problem: OtsmProblem<T>,
    pub data: OlsData<T>,
}

impl<T: Real> OlsProblem<T> {
    /// Maps `(Õ_1, …, Õ_{K+1})` to `(−Õ_1 Õ_{K+1}ᵀ, …, −Õ_K Õ_{K+1}ᵀ)`.
    pub fn recover(&self, point: &BlockOrthogonal<T>) -> Result<Vec<DMatrix<T>>> {
        self.problem.check_point(point)?;
        let k = self.data.regressors.len();
        let last = point.block(k);
        Ok((0..k)
            .map(|i| -(point.block(i) * last.transpose()))
            .collect())
    }
}

pub fn build_ols<T: Real>(data: OlsData<T>, rank: usize) -> Result<OlsProblem<T>> {
    let d = data.target.ncols();
    if rank != d {
        return Err(OtsmError::InvalidInput(format!(
            "orthogonal least squares needs square blocks (r = d = {d}), got r = {rank}"
        )));
    }
    let mut views = data.regressors.clone();
    views.push(data.target.clone());
    let dims = BlockDims::uniform(views.len(), d, rank)?;
    let problem = OtsmProblem::from_couplings(dims, cross_products(&views, -T::one()))?;
    Ok(OlsProblem { problem, data })
}

/// Three blocks with `S_12 = −I_d`, `S_13 = I_d`, `S_23 = I_d`.
///
/// Any feasible triple `(O_1, O_2, O_1 + O_2)` is a global maximizer with value
/// `3r/2` (3 for `d = 3, r = 2`). The identity start is a stationary point
/// with value `r`.
pub fn hard_example<T: Real>(d: usize, rank: usize) -> Result<OtsmProblem<T>> {
    let dims = BlockDims::uniform(3, d, rank)?;
    let eye = DMatrix::<T>::identity(d, d);
    OtsmProblem::from_couplings(
        dims,
        [((0, 1), -eye.clone()), ((0, 2), eye.clone()), ((1, 2), eye)],
    )
}

/// Seeded synthetic Procrustes instance and its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticProcrustes<T: Real> {
    pub problem: OtsmProblem<T>,
    /// Common `n × d` landmark matrix.
    pub landmarks: DMatrix<T>,
    /// Per-view `d × d` rotations `R_i`; view `i` is `L R_iᵀ + σ E_i`.
    pub rotations: Vec<DMatrix<T>>,
    pub views: Vec<DMatrix<T>>,
}

fn gaussian<T: Real>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<T> {
    // column-major fill order is part of the reproducibility contract
    DMatrix::from_fn(rows, cols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        lit(x)
    })
}

/// Haar-distributed `d × d` orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `diag(R)` absorbed into `Q`.
pub fn random_orthogonal<T: Real>(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<T> {
    let qr = gaussian::<T>(rng, d, d).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        if r[(k, k)] < T::zero() {
            let mut col = q.column_mut(k);
            col.neg_mut();
        }
    }
    q
}

/// `m` landmark sets `A_i = L R_iᵀ + σ E_i` with `L` an `n × d` standard normal
/// matrix, Haar rotations `R_i ∈ O(d)` and standard normal noise `E_i`; the
/// returned problem is MAXDIFF on the `A_i` at rank `r`. Deterministic in
/// `seed`.
pub fn synth_procrustes<T: Real>(
    m: usize,
    n: usize,
    d: usize,
    rank: usize,
    sigma: f64,
    seed: u64,
) -> Result<SyntheticProcrustes<T>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(OtsmError::InvalidInput(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    if n == 0 {
        return Err(OtsmError::InvalidInput("n must be positive".into()));
    }
    let dims = BlockDims::uniform(m, d, rank)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let landmarks = gaussian::<T>(&mut rng, n, d);
    let rotations: Vec<DMatrix<T>> = (0..m).map(|_| random_orthogonal(&mut rng, d)).collect();
    let sigma_t: T = lit(sigma);
    let views: Vec<DMatrix<T>> = rotations
        .iter()
        .map(|rot| &landmarks * rot.transpose() + gaussian::<T>(&mut rng, n, d) * sigma_t)
        .collect();
    let problem = OtsmProblem::from_couplings(dims, cross_products(&views, T::one()))?;
    Ok(SyntheticProcrustes {
        problem,
        landmarks,
        rotations,
        views,
    })
}
