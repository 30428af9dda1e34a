//! Compressed-sparse-row operators on the `2^n` qubit space.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::pauli::{is_hermitian_sum, PauliString};
use super::state::StateVector;
use crate::error::{check_dim, Error, Result};

/// Default cap on the number of sites an operator may be assembled for.
pub const DEFAULT_SITE_CAP: usize = 20;

/// Row count above which matvec is split across the rayon pool.
const PARALLEL_ROWS: usize = 1 << 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Anything that can act on a state vector.
///
/// Implementations must be deterministic: `y` depends only on `x`, never on
/// thread scheduling.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`, overwriting `y`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);

    /// Whether the operator is known to be Hermitian.
    fn is_hermitian(&self) -> bool;
}

/// Operator in compressed row layout.
///
/// Row sums are accumulated sequentially in stored column order, so matvec
/// output is bitwise identical for any thread count.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from raw CSR arrays. Columns within each row must be unique.
    pub fn from_csr(
        dim: usize,
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        values: Vec<Complex64>,
        hermitian: bool,
    ) -> Result<Self> {
        if row_ptr.len() != dim + 1 || cols.len() != values.len() || row_ptr[dim] != cols.len() {
            return Err(Error::InvalidArgument("inconsistent CSR arrays".into()));
        }
        if cols.iter().any(|&c| c >= dim) {
            return Err(Error::InvalidArgument("CSR column out of range".into()));
        }
        Ok(Self {
            dim,
            row_ptr,
            cols,
            values,
            hermitian,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![Complex64::new(1.0, 0.0); dim], true)
    }

    pub fn from_diagonal(diag: &[Complex64], hermitian: bool) -> Self {
        let dim = diag.len();
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            values: diag.to_vec(),
            hermitian,
        }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(
        dim: usize,
        triplets: &[(usize, usize, Complex64)],
        hermitian: bool,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r}, {c}) out of range for dim {dim}"
                )));
            }
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            dim,
            row_ptr,
            cols,
            values,
            hermitian,
        })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn hermitian_flag(&self) -> bool {
        self.hermitian
    }

    pub fn with_hermitian_flag(mut self, flag: bool) -> Self {
        self.hermitian = flag;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    /// Entries of row `r` as `(column, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r).find(|e| e.0 == c).map(|e| e.1).unwrap_or(ZERO)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// True when every stored value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// `y = A x` on a [`StateVector`].
    pub fn matvec(&self, v: &StateVector) -> Result<StateVector> {
        check_dim(self.dim, v.dim())?;
        let mut out = vec![ZERO; self.dim];
        self.apply(v.amplitudes(), &mut out);
        StateVector::from_amplitudes(out)
    }

    fn row_dot(&self, r: usize, x: &[Complex64]) -> Complex64 {
        let mut acc = ZERO;
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.values[k] * x[self.cols[k]];
        }
        acc
    }

    pub fn adjoint(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                triplets.push((c, r, v.conj()));
            }
        }
        Self::from_triplets(self.dim, &triplets, self.hermitian).expect("indices in range")
    }

    /// Largest elementwise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let hermitian = self.hermitian && factor.im == 0.0;
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            hermitian,
            ..self.clone()
        }
    }

    /// `self + factor · other` over the union sparsity pattern.
    pub fn axpy(&self, factor: Complex64, other: &SparseOperator) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        let mut cols = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for r in 0..self.dim {
            let mut a = self.row(r).peekable();
            let mut b = other.row(r).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                        cols.push(ca);
                        values.push(va + factor * vb);
                        a.next();
                        b.next();
                    }
                    (Some((ca, va)), Some((cb, _))) if ca < cb => {
                        cols.push(ca);
                        values.push(va);
                        a.next();
                    }
                    (Some((ca, va)), None) => {
                        cols.push(ca);
                        values.push(va);
                        a.next();
                    }
                    (_, Some((cb, vb))) => {
                        cols.push(cb);
                        values.push(factor * vb);
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            dim: self.dim,
            row_ptr,
            cols,
            values,
            hermitian: self.hermitian && other.hermitian && factor.im == 0.0,
        })
    }

    /// Sparse product `self · other` (row-by-row Gustavson accumulation).
    ///
    /// The result carries `hermitian = false`; callers that know better set it.
    pub fn matmul(&self, other: &SparseOperator) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let rows: Vec<(Vec<usize>, Vec<Complex64>)> = (0..self.dim)
            .into_par_iter()
            .map_init(
                || (vec![ZERO; self.dim], vec![usize::MAX; self.dim]),
                |(acc, marker), r| {
                    let mut touched = Vec::new();
                    for (k, a) in self.row(r) {
                        for (c, b) in other.row(k) {
                            if marker[c] != r {
                                marker[c] = r;
                                acc[c] = ZERO;
                                touched.push(c);
                            }
                            acc[c] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let vals: Vec<Complex64> = touched.iter().map(|&c| acc[c]).collect();
                    (touched, vals)
                },
            )
            .collect();
        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(|r| r.0.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for (c, v) in rows {
            cols.extend(c);
            values.extend(v);
            row_ptr.push(cols.len());
        }
        Ok(Self {
            dim: self.dim,
            row_ptr,
            cols,
            values,
            hermitian: false,
        })
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        if self.dim >= PARALLEL_ROWS {
            y.par_chunks_mut(1024).enumerate().for_each(|(chunk, ys)| {
                let base = chunk * 1024;
                for (i, yi) in ys.iter_mut().enumerate() {
                    *yi = self.row_dot(base + i, x);
                }
            });
        } else {
            for (r, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(r, x);
            }
        }
    }

    fn is_hermitian(&self) -> bool {
        self.hermitian
    }
}

/// `factor · A` without copying `A`.
pub struct Scaled<'a, A: LinearOperator + ?Sized> {
    pub inner: &'a A,
    pub factor: f64,
}

impl<A: LinearOperator + ?Sized> LinearOperator for Scaled<'_, A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.inner.apply(x, y);
        for v in y.iter_mut() {
            *v *= self.factor;
        }
    }

    fn is_hermitian(&self) -> bool {
        self.inner.is_hermitian()
    }
}

/// Sums Pauli strings into a sparse matrix.
///
/// Strings sharing an X mask land on the same column of every row, so each
/// row gets exactly one entry per distinct X mask.
pub fn assemble(terms: &[PauliString], n_sites: usize) -> Result<SparseOperator> {
    assemble_with_cap(terms, n_sites, DEFAULT_SITE_CAP)
}

pub fn assemble_with_cap(
    terms: &[PauliString],
    n_sites: usize,
    cap: usize,
) -> Result<SparseOperator> {
    if n_sites > cap {
        return Err(Error::SiteCapExceeded { n_sites, cap });
    }
    if n_sites == 0 {
        return Err(Error::InvalidArgument(
            "operators need at least one site".into(),
        ));
    }
    for t in terms {
        check_dim(n_sites, t.n_sites())?;
    }
    let dim = 1usize << n_sites;

    let mut group_of: HashMap<u64, usize> = HashMap::new();
    let mut groups: Vec<(u64, Vec<&PauliString>)> = Vec::new();
    for t in terms {
        let g = *group_of.entry(t.x_mask()).or_insert_with(|| {
            groups.push((t.x_mask(), Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(t);
    }
    // diagonal group first, then by mask, so column order is easy to sort per row
    groups.sort_by_key(|g| g.0);

    let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .into_par_iter()
        .map(|r| {
            let mut entries: Vec<(usize, Complex64)> = Vec::with_capacity(groups.len());
            for (xmask, members) in &groups {
                let col = r ^ (*xmask as usize);
                let mut v = ZERO;
                for t in members {
                    // ⟨r|P|col⟩ with r = col ⊕ x
                    let (target, ph) = t.apply_to_basis(col);
                    debug_assert_eq!(target, r);
                    v += ph;
                }
                if v != ZERO {
                    entries.push((col, v));
                }
            }
            entries.sort_by_key(|e| e.0);
            entries
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            cols.push(c);
            values.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseOperator {
        dim,
        row_ptr,
        cols,
        values,
        hermitian: is_hermitian_sum(terms, 1e-12),
    })
}

/// `op · v` for any operator, checking dimensions.
pub fn matvec<A: LinearOperator + ?Sized>(op: &A, v: &StateVector) -> Result<StateVector> {
    check_dim(op.dim(), v.dim())?;
    let mut out = vec![ZERO; op.dim()];
    op.apply(v.amplitudes(), &mut out);
    StateVector::from_amplitudes(out)
}
