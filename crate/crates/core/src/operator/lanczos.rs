//! Hermitian Lanczos recurrence with full reorthogonalisation.
//!
//! After `m` steps `alpha` and `beta` both have length `m`; `beta[m-1]` couples
//! the last basis vector to the residual direction. The basis holds `m + 1`
//! vectors unless the last step broke down.

use num_complex::Complex64;

use super::sparse::LinearOperator;
use super::state::{axpy, inner, norm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) struct Lanczos<'a, A: LinearOperator + ?Sized> {
    op: &'a A,
    pub basis: Vec<Vec<Complex64>>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    anorm: f64,
    scratch: Vec<Complex64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    Extended,
    /// The Krylov space became invariant; no new direction was added.
    Breakdown,
}

impl<'a, A: LinearOperator + ?Sized> Lanczos<'a, A> {
    /// `start` must be nonzero; it is normalised here.
    pub fn new(op: &'a A, start: &[Complex64]) -> Self {
        let n = norm(start);
        let q0: Vec<Complex64> = start.iter().map(|v| v / n).collect();
        Self {
            op,
            basis: vec![q0],
            alpha: Vec::new(),
            beta: Vec::new(),
            anorm: 0.0,
            scratch: vec![ZERO; start.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    fn orthogonalize(&self, w: &mut [Complex64]) {
        // two classical Gram-Schmidt passes
        for _ in 0..2 {
            for q in &self.basis {
                let h = inner(q, w);
                axpy(-h, q, w);
            }
        }
    }

    pub fn step(&mut self) -> Step {
        let j = self.alpha.len();
        debug_assert!(self.basis.len() == j + 1);
        let mut w = std::mem::take(&mut self.scratch);
        self.op.apply(&self.basis[j], &mut w);
        let a = inner(&self.basis[j], &w).re;
        axpy(Complex64::new(-a, 0.0), &self.basis[j], &mut w);
        if j > 0 {
            axpy(
                Complex64::new(-self.beta[j - 1], 0.0),
                &self.basis[j - 1],
                &mut w,
            );
        }
        self.orthogonalize(&mut w);
        let b = norm(&w);
        self.alpha.push(a);
        self.anorm = self.anorm.max(a.abs()).max(b);
        let dim = w.len();
        if b <= 1e-13 * self.anorm.max(f64::MIN_POSITIVE) || self.basis.len() == dim {
            self.beta.push(0.0);
            self.scratch = w;
            self.scratch.fill(ZERO);
            Step::Breakdown
        } else {
            self.beta.push(b);
            for v in &mut w {
                *v /= b;
            }
            self.basis.push(w);
            self.scratch = vec![ZERO; dim];
            Step::Extended
        }
    }

    /// After a breakdown, continues in a fresh direction orthogonal to the
    /// basis (the tridiagonal matrix becomes block diagonal). Returns `false`
    /// if `v` has no component outside the current span.
    pub fn inject(&mut self, v: &[Complex64]) -> bool {
        debug_assert!(self.basis.len() == self.alpha.len());
        let mut w = v.to_vec();
        self.orthogonalize(&mut w);
        let n = norm(&w);
        if n <= 1e-10 * norm(v) {
            return false;
        }
        for x in &mut w {
            *x /= n;
        }
        self.basis.push(w);
        true
    }

    /// `Σ_j coeffs[j] q_j` over the first `coeffs.len()` basis vectors.
    pub fn combine(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.basis[0].len()];
        for (c, q) in coeffs.iter().zip(&self.basis) {
            axpy(*c, q, &mut out);
        }
        out
    }
}
