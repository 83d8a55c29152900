//! Problem data: block shapes, the coupling matrices `S_ij`, and feasible points.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{mismatch, OtsmError, Result};
use crate::scalar::{lit, Real};

/// Shape contract of an instance: `m` blocks of row dimension `d_i`, all with
/// `r` columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockDims {
    dims: Vec<usize>,
    rank: usize,
}

impl BlockDims {
    pub fn new(dims: Vec<usize>, rank: usize) -> Result<Self> {
        if dims.len() < 2 {
            return Err(OtsmError::InvalidDims(format!(
                "need at least 2 blocks, got {}",
                dims.len()
            )));
        }
        if rank == 0 {
            return Err(OtsmError::InvalidDims("rank r must be positive".into()));
        }
        if let Some(i) = dims.iter().position(|&d| d == 0) {
            return Err(OtsmError::InvalidDims(format!(
                "block {} has zero dimension",
                i + 1
            )));
        }
        if let Some(i) = dims.iter().position(|&d| d < rank) {
            return Err(OtsmError::InvalidDims(format!(
                "rank r = {rank} exceeds d_{} = {}",
                i + 1,
                dims[i]
            )));
        }
        Ok(Self { dims, rank })
    }

    /// `m` equal blocks of size `d`.
    pub fn uniform(m: usize, d: usize, rank: usize) -> Result<Self> {
        Self::new(vec![d; m], rank)
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `D = Σ d_i`.
    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Row offset of each block inside the stacked `D`-dimensional space.
    pub fn offsets(&self) -> Vec<usize> {
        self.dims
            .iter()
            .scan(0, |acc, &d| {
                let start = *acc;
                *acc += d;
                Some(start)
            })
            .collect()
    }
}

/// An OTSM instance: maximize `Σ_{i<j} tr(O_iᵀ S_ij O_j)` over Stiefel blocks.
///
/// Only the upper blocks `S_ij` with `i < j` are stored (0-based indices).
/// `S_ji` is `S_ijᵀ` by construction and missing pairs are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OtsmProblem<T: Real> {
    dims: BlockDims,
    couplings: BTreeMap<(usize, usize), DMatrix<T>>,
}

impl<T: Real> OtsmProblem<T> {
    /// A problem with every coupling equal to zero.
    pub fn new(dims: BlockDims) -> Self {
        Self {
            dims,
            couplings: BTreeMap::new(),
        }
    }

    pub fn from_couplings<I>(dims: BlockDims, couplings: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), DMatrix<T>)>,
    {
        let mut problem = Self::new(dims);
        for ((i, j), s) in couplings {
            if problem.couplings.contains_key(&(i.min(j), i.max(j))) {
                return Err(OtsmError::InvalidInput(format!(
                    "duplicate coupling ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            problem.set_coupling(i, j, s)?;
        }
        Ok(problem)
    }

    /// Stores `S_ij`. A request with `i > j` stores the transpose as `S_ji`.
    pub fn set_coupling(&mut self, i: usize, j: usize, s: DMatrix<T>) -> Result<()> {
        let m = self.dims.num_blocks();
        if i >= m || j >= m {
            return Err(OtsmError::InvalidInput(format!(
                "coupling index ({}, {}) out of range for m = {m}",
                i + 1,
                j + 1
            )));
        }
        if i == j {
            return Err(OtsmError::InvalidInput(format!(
                "diagonal block ({}, {}) must be zero and cannot be set",
                i + 1,
                j + 1
            )));
        }
        let (i, j, s) = if i < j {
            (i, j, s)
        } else {
            (j, i, s.transpose())
        };
        let expected = (self.dims.dim(i), self.dims.dim(j));
        if s.shape() != expected {
            return Err(mismatch(
                format!("S_{}{}", i + 1, j + 1),
                format!("{}x{}", expected.0, expected.1),
                format!("{}x{}", s.nrows(), s.ncols()),
            ));
        }
        self.couplings.insert((i, j), s);
        Ok(())
    }

    pub fn dims(&self) -> &BlockDims {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.num_blocks()
    }

    pub fn rank(&self) -> usize {
        self.dims.rank()
    }

    /// Stored upper couplings `((i, j), S_ij)` with `i < j`, in index order.
    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), &DMatrix<T>)> {
        self.couplings.iter().map(|(&k, v)| (k, v))
    }

    /// `S_ij` for any `i != j`, transposing the stored block when `i > j`.
    pub fn coupling(&self, i: usize, j: usize) -> Option<DMatrix<T>> {
        if i < j {
            self.couplings.get(&(i, j)).cloned()
        } else {
            self.couplings.get(&(j, i)).map(|s| s.transpose())
        }
    }

    /// Same problem with a different column rank `r`.
    pub fn with_rank(&self, rank: usize) -> Result<Self> {
        Ok(Self {
            dims: BlockDims::new(self.dims.dims().to_vec(), rank)?,
            couplings: self.couplings.clone(),
        })
    }

    /// The symmetric `D × D` matrix `S̃` with zero diagonal blocks.
    pub fn assemble_stilde(&self) -> DMatrix<T> {
        let n = self.dims.total();
        let offsets = self.dims.offsets();
        let mut full = DMatrix::zeros(n, n);
        for (&(i, j), s) in &self.couplings {
            let (oi, oj) = (offsets[i], offsets[j]);
            full.view_mut((oi, oj), s.shape()).copy_from(s);
            full.view_mut((oj, oi), (s.ncols(), s.nrows()))
                .copy_from(&s.transpose());
        }
        full
    }

    /// `G_i = Σ_{j≠i} S_ij O_j` for the given blocks.
    pub fn block_gradient(&self, i: usize, blocks: &[DMatrix<T>]) -> DMatrix<T> {
        let r = blocks[i].ncols();
        let mut g = DMatrix::zeros(self.dims.dim(i), r);
        for (&(a, b), s) in &self.couplings {
            if a == i {
                g.gemm(T::one(), s, &blocks[b], T::one());
            } else if b == i {
                g.gemm_tr(T::one(), s, &blocks[a], T::one());
            }
        }
        g
    }

    pub(crate) fn check_point(&self, point: &BlockOrthogonal<T>) -> Result<()> {
        if point.dims() != &self.dims {
            return Err(mismatch(
                "point dimensions",
                format!("{:?} r={}", self.dims.dims(), self.dims.rank()),
                format!("{:?} r={}", point.dims().dims(), point.dims().rank()),
            ));
        }
        Ok(())
    }
}

/// Default Stiefel membership tolerance for `T`: `1e-10` in double precision.
pub fn default_orth_tol<T: Real>() -> T {
    T::orth_floor()
}

/// A point `(O_1, …, O_m)` of the product of Stiefel manifolds.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOrthogonal<T: Real> {
    dims: BlockDims,
    blocks: Vec<DMatrix<T>>,
}

impl<T: Real> BlockOrthogonal<T> {
    /// Validates shapes and orthonormality at [`default_orth_tol`].
    pub fn new(dims: BlockDims, blocks: Vec<DMatrix<T>>) -> Result<Self> {
        Self::with_tolerance(dims, blocks, default_orth_tol())
    }

    pub fn with_tolerance(dims: BlockDims, blocks: Vec<DMatrix<T>>, tol: T) -> Result<Self> {
        let point = Self::from_blocks_unchecked(dims, blocks)?;
        for (i, defect) in point.orthonormality_defects().into_iter().enumerate() {
            if !defect.is_finite() || defect > tol {
                return Err(OtsmError::NotOrthonormal {
                    block: i + 1,
                    residual: defect.to_f64_lossy(),
                    tolerance: tol.to_f64_lossy(),
                });
            }
        }
        Ok(point)
    }

    /// Checks shapes only. Used for iterates that are orthonormal by
    /// construction.
    pub fn from_blocks_unchecked(dims: BlockDims, blocks: Vec<DMatrix<T>>) -> Result<Self> {
        if blocks.len() != dims.num_blocks() {
            return Err(mismatch(
                "number of blocks",
                dims.num_blocks(),
                blocks.len(),
            ));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.shape() != (dims.dim(i), dims.rank()) {
                return Err(mismatch(
                    format!("block O_{}", i + 1),
                    format!("{}x{}", dims.dim(i), dims.rank()),
                    format!("{}x{}", b.nrows(), b.ncols()),
                ));
            }
        }
        Ok(Self { dims, blocks })
    }

    pub fn dims(&self) -> &BlockDims {
        &self.dims
    }

    pub fn blocks(&self) -> &[DMatrix<T>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &DMatrix<T> {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<DMatrix<T>> {
        self.blocks
    }

    /// `‖O_iᵀO_i − I_r‖_F` per block.
    pub fn orthonormality_defects(&self) -> Vec<T> {
        self.blocks
            .iter()
            .map(|b| {
                let mut gram = b.tr_mul(b);
                for k in 0..gram.nrows() {
                    gram[(k, k)] -= T::one();
                }
                gram.norm()
            })
            .collect()
    }

    /// The `D × r` matrix `[O_1ᵀ, …, O_mᵀ]ᵀ`.
    pub fn stacked(&self) -> DMatrix<T> {
        let mut out = DMatrix::zeros(self.dims.total(), self.dims.rank());
        for (b, off) in self.blocks.iter().zip(self.dims.offsets()) {
            out.view_mut((off, 0), b.shape()).copy_from(b);
        }
        out
    }

    /// `(1/m) Σ_i ‖O_i − P_i‖_F`, the mean block change used for stopping.
    pub fn mean_change(&self, other: &Self) -> T {
        let total = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm());
        total / lit(self.blocks.len() as f64)
    }
}
