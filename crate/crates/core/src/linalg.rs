use nalgebra::{DMatrix, SMatrix};

/// A factor `L` with `L * L^T == m` for a symmetric positive semi-definite
/// matrix. Falls back to an eigen decomposition (negative eigenvalues
/// clamped to zero) when Cholesky fails, so singular covariances still
/// yield a usable sampling factor.
pub(crate) fn psd_factor<const D: usize>(m: &SMatrix<f64, D, D>) -> SMatrix<f64, D, D> {
    let sym = (m + m.transpose()) * 0.5;
    if let Some(chol) = sym.cholesky() {
        return chol.l();
    }
    let eig = DMatrix::from_column_slice(D, D, sym.as_slice()).symmetric_eigen();
    let mut sqrt_vals = eig.eigenvalues;
    for v in sqrt_vals.iter_mut() {
        *v = v.max(0.0).sqrt();
    }
    let f = eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals);
    SMatrix::from_column_slice(f.as_slice())
}

pub(crate) fn is_psd<const D: usize>(m: &SMatrix<f64, D, D>) -> bool {
    let d = DMatrix::from_column_slice(D, D, m.as_slice());
    d.symmetric_eigen().eigenvalues.iter().all(|&v| v >= 0.0)
}
