//! Dense linear algebra helpers: polar projection onto the Stiefel manifold and
//! symmetric eigen-decompositions with sorted spectra.

use nalgebra::{DMatrix, DVector, SymmetricEigen, QR, SVD};

use crate::error::{OtsmError, Result};
use crate::scalar::Real;

/// Orthonormal polar factor `PQᵀ` of a `d × r` matrix with `d ≥ r`.
///
/// Among all `d × r` matrices with orthonormal columns, the result maximizes
/// `tr(Oᵀ b)`, and the maximum equals the nuclear norm of `b`. When `b` is rank
/// deficient the maximizer is not unique and the null-space completion is
/// whatever the SVD routine produces, deterministically.
pub fn polar_project<T: Real>(b: &DMatrix<T>) -> Result<DMatrix<T>> {
    let (d, r) = b.shape();
    if d < r {
        return Err(OtsmError::InvalidDims(format!(
            "polar projection needs d >= r, got {d}x{r}"
        )));
    }
    if r == 0 {
        return Ok(DMatrix::zeros(d, 0));
    }
    if !b.iter().all(|x| x.is_finite()) {
        return Err(OtsmError::Numerical(
            "non-finite entry in polar projection input".into(),
        ));
    }
    let svd = SVD::try_new(b.clone(), true, true, T::default_epsilon(), 0)
        .ok_or_else(|| OtsmError::Numerical("SVD did not converge".into()))?;
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    Ok(u * v_t)
}

/// Sum of singular values.
pub fn nuclear_norm<T: Real>(b: &DMatrix<T>) -> Result<T> {
    if b.is_empty() {
        return Ok(T::zero());
    }
    let svd = SVD::try_new(b.clone(), false, false, T::default_epsilon(), 0)
        .ok_or_else(|| OtsmError::Numerical("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().fold(T::zero(), |a, &s| a + s))
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(b: &DMatrix<T>) -> Result<Vec<T>> {
    if b.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(b.clone(), false, false, T::default_epsilon(), 0)
        .ok_or_else(|| OtsmError::Numerical("SVD did not converge".into()))?;
    let mut s: Vec<T> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SortedEigen<T: Real> {
    pub values: DVector<T>,
    /// Column `k` is the unit eigenvector of `values[k]`.
    pub vectors: DMatrix<T>,
}

impl<T: Real> SortedEigen<T> {
    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }
}

/// Symmetric eigen-decomposition. Only the lower triangle is read.
pub fn sym_eigen<T: Real>(a: &DMatrix<T>) -> Result<SortedEigen<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(OtsmError::InvalidDims(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Err(OtsmError::InvalidDims("empty matrix".into()));
    }
    if !a.iter().all(|x| x.is_finite()) {
        return Err(OtsmError::Numerical(
            "non-finite entry in eigen-decomposition input".into(),
        ));
    }
    let eig = SymmetricEigen::try_new(a.clone(), T::default_epsilon(), 0)
        .ok_or_else(|| OtsmError::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SortedEigen { values, vectors })
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues<T: Real>(a: &DMatrix<T>) -> Result<Vec<T>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if !a.iter().all(|x| x.is_finite()) {
        return Err(OtsmError::Numerical(
            "non-finite entry in eigenvalue input".into(),
        ));
    }
    let eig = SymmetricEigen::try_new(a.clone(), T::default_epsilon(), 0)
        .ok_or_else(|| OtsmError::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut v: Vec<T> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(v)
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn sym_spectral_norm<T: Real>(a: &DMatrix<T>) -> Result<T> {
    let v = sym_eigenvalues(a)?;
    Ok(v.iter().fold(T::zero(), |acc, &x| acc.max(x.abs())))
}

/// `(a + aᵀ) / 2`.
pub fn symmetrize<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let half: T = crate::scalar::lit(0.5);
    (a + a.transpose()) * half
}

/// Orthonormal basis of the orthogonal complement of the column span of a
/// `D × r` matrix with orthonormal columns, as a `D × (D − r)` matrix.
///
/// Householder QR of `[basis | I_D]`: the first `r` columns of the full `Q`
/// span the input, the remaining `D − r` columns span the complement.
pub fn orthogonal_complement<T: Real>(basis: &DMatrix<T>, tol: T) -> Result<DMatrix<T>> {
    let (n, r) = basis.shape();
    if r > n {
        return Err(OtsmError::InvalidDims(format!(
            "cannot complete a {n}x{r} basis"
        )));
    }
    let mut gram = basis.tr_mul(basis);
    for k in 0..r {
        gram[(k, k)] -= T::one();
    }
    let defect = gram.norm();
    if !defect.is_finite() || defect > tol {
        return Err(OtsmError::NotOrthonormal {
            block: 0,
            residual: defect.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    if r == n {
        return Ok(DMatrix::zeros(n, 0));
    }
    let mut aug = DMatrix::zeros(n, r + n);
    aug.view_mut((0, 0), (n, r)).copy_from(basis);
    aug.view_mut((0, r), (n, n)).fill_with_identity();
    let q = QR::new(aug).q();
    Ok(q.columns(r, n - r).into_owned())
}
