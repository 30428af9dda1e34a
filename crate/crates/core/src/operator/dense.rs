//! Dense conversions and the LAPACK-style kernels backed by `faer`.
//!
//! Used for small-system certificates (gap, level spacing), for the Krylov
//! projected problems and as the shifted-solve fallback.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;

use super::sparse::{LinearOperator, SparseOperator};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense copy of a sparse operator.
pub fn sparse_to_dense(op: &SparseOperator) -> Mat<Complex64> {
    let n = op.dim();
    let mut m = Mat::<Complex64>::zeros(n, n);
    for r in 0..n {
        for (c, v) in op.row(r) {
            m[(r, c)] = v;
        }
    }
    m
}

/// Dense matrix of any operator, built column by column from basis vectors.
pub fn operator_to_dense<A: LinearOperator + ?Sized>(op: &A) -> Mat<Complex64> {
    let n = op.dim();
    let mut m = Mat::<Complex64>::zeros(n, n);
    let mut e = vec![ZERO; n];
    let mut col = vec![ZERO; n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = *v;
        }
        e[j] = ZERO;
    }
    m
}

fn evd_err<E: std::fmt::Debug>(e: E) -> Error {
    Error::Dense(format!("{e:?}"))
}

/// Eigenvalues (ascending) of a Hermitian matrix, reading the lower triangle.
/// Takes the real symmetric path when every entry is real.
pub fn hermitian_eigenvalues(m: &Mat<Complex64>) -> Result<Vec<f64>> {
    let real = (0..m.nrows()).all(|i| (0..=i).all(|j| m[(i, j)].im == 0.0));
    if real {
        let r = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        r.self_adjoint_eigenvalues(Side::Lower).map_err(evd_err)
    } else {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(evd_err)
    }
}

/// Full eigendecomposition of a Hermitian matrix: ascending eigenvalues and
/// eigenvectors as columns.
pub fn hermitian_eigen(m: &Mat<Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(evd_err)?;
    let vals = evd.S().column_vector().iter().map(|v| v.re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta` (`beta.len() >= alpha.len() - 1`).
pub(crate) fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let evd = t.self_adjoint_eigen(Side::Lower).map_err(evd_err)?;
    let vals = evd.S().column_vector().iter().copied().collect();
    Ok((vals, evd.U().to_owned()))
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn dense_solve(a: &Mat<Complex64>, b: &[Complex64]) -> Vec<Complex64> {
    let rhs = Mat::<Complex64>::from_fn(b.len(), 1, |i, _| b[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}
