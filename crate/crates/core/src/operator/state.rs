//! State vectors and the observables computed on them.

use faer::Mat;
use num_complex::Complex64;

use super::sparse::LinearOperator;
use crate::error::{check_dim, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Singular values at or below this are dropped from entropy sums.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

/// Complex amplitude vector of length `2^n`, site 0 on the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

/// `⟨a|b⟩`, summed in index order.
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha · x`
pub(crate) fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl StateVector {
    /// Wraps amplitudes; the length must be a positive power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "state length {} is not a power of two >= 2",
                amps.len()
            )));
        }
        Ok(Self { amps })
    }

    pub fn zeros(n_sites: usize) -> Self {
        Self {
            amps: vec![ZERO; 1 << n_sites],
        }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        let mut v = Self::zeros(n_sites);
        if index >= v.dim() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n_sites} sites"
            )));
        }
        v.amps[index] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_sites(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// Scales to unit norm; fails on the zero vector.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero vector".into(),
            ));
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(n)
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(inner(&self.amps, &other.amps))
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// `self += alpha · other`
    pub fn axpy(&mut self, alpha: Complex64, other: &StateVector) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        axpy(alpha, &other.amps, &mut self.amps);
        Ok(())
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

/// Mean energy and variance `⟨H²⟩ − ⟨H⟩²` of `v` (normalised internally).
///
/// The variance is evaluated as `‖(H − μ)v‖²`, so it can only go negative
/// through the normalisation; anything above `-1e-12` is clipped to zero.
pub fn energy_moments<A: LinearOperator + ?Sized>(op: &A, v: &StateVector) -> Result<(f64, f64)> {
    check_dim(op.dim(), v.dim())?;
    if !op.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let nrm2 = v.norm().powi(2);
    if nrm2 == 0.0 {
        return Err(Error::InvalidArgument("zero state has no moments".into()));
    }
    let mut hv = vec![ZERO; v.dim()];
    op.apply(v.amplitudes(), &mut hv);
    let mean = inner(v.amplitudes(), &hv).re / nrm2;
    axpy(Complex64::new(-mean, 0.0), v.amplitudes(), &mut hv);
    let var = norm(&hv).powi(2) / nrm2;
    let var = if var < 0.0 && var >= -1e-12 { 0.0 } else { var };
    Ok((mean, var))
}

/// `|⟨a|b⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Von Neumann entropy (nats) of the first `cut` sites.
///
/// The amplitudes are reshaped into a `2^cut × 2^(n−cut)` matrix (row index =
/// the leading sites) and the Schmidt weights are the squared singular values.
pub fn entanglement_entropy(v: &StateVector, cut: usize) -> Result<f64> {
    let n = v.n_sites();
    if cut == 0 || cut >= n {
        return Err(Error::InvalidArgument(format!(
            "cut {cut} must lie strictly between 0 and {n}"
        )));
    }
    let rows = 1usize << cut;
    let cols = 1usize << (n - cut);
    let amps = v.amplitudes();
    let m = Mat::<Complex64>::from_fn(rows, cols, |r, c| amps[r * cols + c]);
    let sv = m
        .singular_values()
        .map_err(|e| Error::Dense(format!("{e:?}")))?;
    let weights: Vec<f64> = sv
        .iter()
        .filter(|&&s| s > SCHMIDT_CUTOFF)
        .map(|s| s * s)
        .collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Err(Error::InvalidArgument("zero state has no entropy".into()));
    }
    Ok(weights
        .iter()
        .map(|w| {
            let p = w / total;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0))
}
