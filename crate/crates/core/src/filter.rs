//! Lorentzian filter `𝓕 = 1 + iδ⁻¹(H − E)`, the filtered state `𝓕⁻¹|Ψ⟩`
//! and the parent Hamiltonian `𝓗 = 𝓕†(Σᵢ Pᵢ)𝓕` that has it as unique
//! zero-energy ground state.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::operator::dense::{hermitian_eigenvalues, sparse_to_dense};
use crate::operator::pauli::PauliString;
use crate::operator::solve::apply_filter;
use crate::operator::sparse::{assemble, LinearOperator, SparseOperator};
use crate::operator::state::StateVector;
use crate::operator::{shifted_solve_with, SolveOptions};

/// Largest chain for which the parent Hamiltonian is assembled explicitly.
pub const EXPLICIT_PARENT_MAX_SITES: usize = 14;
/// Largest chain accepted by the dense certificates.
pub const DENSE_MAX_SITES: usize = 12;

/// Off-centre filters further than this (in units of `δ`) are logged.
const OFF_CENTRE_WARN: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FilterParams {
    /// Filter centre `E_F`.
    pub energy: f64,
    /// `δ⁻¹ ≥ 0`; zero means no filtering.
    pub delta_inv: f64,
}

impl FilterParams {
    pub fn from_delta(energy: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || delta.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "filter width must be > 0, got {delta}"
            )));
        }
        Self::from_delta_inv(energy, 1.0 / delta)
    }

    pub fn from_delta_inv(energy: f64, delta_inv: f64) -> Result<Self> {
        if !(delta_inv >= 0.0) || !delta_inv.is_finite() || !energy.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad filter parameters E={energy}, 1/delta={delta_inv}"
            )));
        }
        Ok(Self { energy, delta_inv })
    }

    /// `δ`; infinite when the filter is switched off.
    pub fn delta(&self) -> f64 {
        1.0 / self.delta_inv
    }

    /// `1 + δ⁻²`, the rescaling divisor.
    pub fn rescale_divisor(&self) -> f64 {
        1.0 + self.delta_inv * self.delta_inv
    }

    /// Same width, different centre.
    pub fn with_delta_inv(&self, delta_inv: f64) -> Result<Self> {
        Self::from_delta_inv(self.energy, delta_inv)
    }

    /// Logs a warning when the centre is away from the state's mean energy.
    /// The filter still works there but the filtered norm collapses.
    pub fn warn_if_off_centre(&self, state_energy: f64) -> bool {
        let off = (self.energy - state_energy).abs() * self.delta_inv;
        if off > OFF_CENTRE_WARN {
            log::warn!(
                "filter centre {} differs from the state energy {} by {:.3e} widths",
                self.energy,
                state_energy,
                off
            );
            return true;
        }
        false
    }
}

/// `(1 ± iδ⁻¹(H − E_F)) v`, unnormalised. `adjoint` selects the minus sign.
pub fn filter_matvec<A: LinearOperator + ?Sized>(
    h: &A,
    fp: &FilterParams,
    v: &StateVector,
    adjoint: bool,
) -> Result<StateVector> {
    check_dim(h.dim(), v.dim())?;
    let mut out = vec![Complex64::new(0.0, 0.0); v.dim()];
    apply_filter(
        h,
        fp.energy,
        fp.delta_inv,
        adjoint,
        v.amplitudes(),
        &mut out,
    );
    StateVector::from_amplitudes(out)
}

/// Normalised `𝓕⁻¹|ψ⟩`.
pub fn filtered_state<A: LinearOperator + ?Sized>(
    h: &A,
    psi: &StateVector,
    fp: &FilterParams,
) -> Result<StateVector> {
    filtered_state_with(h, psi, fp, &SolveOptions::default())
}

pub fn filtered_state_with<A: LinearOperator + ?Sized>(
    h: &A,
    psi: &StateVector,
    fp: &FilterParams,
    opts: &SolveOptions,
) -> Result<StateVector> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    shifted_solve_with(h, fp.energy, fp.delta_inv, psi, opts)?
        .solution
        .normalized()
}

/// Matrix-free `scale · 𝓕†P𝓕` on borrowed `H` and `P = Σᵢ Pᵢ`.
///
/// Costs two `H` and one `P` product per application.
pub struct ParentOperator<'a> {
    pub h: &'a SparseOperator,
    pub projector_sum: &'a SparseOperator,
    pub params: FilterParams,
    pub scale: f64,
}

impl<'a> ParentOperator<'a> {
    pub fn raw(
        h: &'a SparseOperator,
        projector_sum: &'a SparseOperator,
        params: FilterParams,
    ) -> Self {
        Self {
            h,
            projector_sum,
            params,
            scale: 1.0,
        }
    }

    /// `𝓗 / (1 + δ⁻²)`.
    pub fn rescaled(
        h: &'a SparseOperator,
        projector_sum: &'a SparseOperator,
        params: FilterParams,
    ) -> Self {
        Self {
            scale: 1.0 / params.rescale_divisor(),
            ..Self::raw(h, projector_sum, params)
        }
    }
}

impl LinearOperator for ParentOperator<'_> {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let FilterParams { energy, delta_inv } = self.params;
        let mut fx = vec![Complex64::new(0.0, 0.0); x.len()];
        apply_filter(self.h, energy, delta_inv, false, x, &mut fx);
        self.projector_sum.apply(&fx, y);
        apply_filter(self.h, energy, delta_inv, true, y, &mut fx);
        for (yi, f) in y.iter_mut().zip(&fx) {
            *yi = f * self.scale;
        }
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

/// Parent Hamiltonian with its ingredients.
///
/// Up to [`EXPLICIT_PARENT_MAX_SITES`] sites the raw matrix is assembled by
/// sparse products; larger chains only have the composed form.
#[derive(Clone, Debug)]
pub struct ParentHamiltonian {
    pub params: FilterParams,
    pub hamiltonian: SparseOperator,
    pub projector_sum: SparseOperator,
    explicit: Option<SparseOperator>,
}

impl ParentHamiltonian {
    pub fn new(
        hamiltonian: SparseOperator,
        projector_sum: SparseOperator,
        params: FilterParams,
    ) -> Result<Self> {
        check_dim(hamiltonian.dim(), projector_sum.dim())?;
        if !hamiltonian.hermitian_flag() || !projector_sum.hermitian_flag() {
            return Err(Error::NotHermitian);
        }
        let explicit = if hamiltonian.n_sites() <= EXPLICIT_PARENT_MAX_SITES {
            Some(explicit_parent(&hamiltonian, &projector_sum, &params)?)
        } else {
            None
        };
        Ok(Self {
            params,
            hamiltonian,
            projector_sum,
            explicit,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.hamiltonian.n_sites()
    }

    /// The assembled raw matrix, when the chain is small enough.
    pub fn raw_matrix(&self) -> Option<&SparseOperator> {
        self.explicit.as_ref()
    }

    /// Raw `𝓗` as an operator (explicit when available).
    pub fn raw(&self) -> ParentView<'_> {
        ParentView {
            parent: self,
            scale: 1.0,
        }
    }

    /// `𝓗̃ = 𝓗 / (1 + δ⁻²)`.
    pub fn rescaled(&self) -> ParentView<'_> {
        ParentView {
            parent: self,
            scale: 1.0 / self.params.rescale_divisor(),
        }
    }

    /// `⟨v|𝓗|v⟩ / ⟨v|v⟩` of the raw operator.
    pub fn energy(&self, v: &StateVector) -> Result<f64> {
        expectation(&self.raw(), v)
    }
}

/// Borrowed raw or rescaled view of a [`ParentHamiltonian`].
pub struct ParentView<'a> {
    parent: &'a ParentHamiltonian,
    scale: f64,
}

impl LinearOperator for ParentView<'_> {
    fn dim(&self) -> usize {
        self.parent.hamiltonian.dim()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        match &self.parent.explicit {
            Some(m) => {
                m.apply(x, y);
                if self.scale != 1.0 {
                    for v in y.iter_mut() {
                        *v *= self.scale;
                    }
                }
            }
            None => ParentOperator {
                h: &self.parent.hamiltonian,
                projector_sum: &self.parent.projector_sum,
                params: self.parent.params,
                scale: self.scale,
            }
            .apply(x, y),
        }
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

/// `⟨v|A|v⟩ / ⟨v|v⟩`, real part.
pub(crate) fn expectation<A: LinearOperator + ?Sized>(op: &A, v: &StateVector) -> Result<f64> {
    check_dim(op.dim(), v.dim())?;
    let mut av = vec![Complex64::new(0.0, 0.0); v.dim()];
    op.apply(v.amplitudes(), &mut av);
    let num = crate::operator::state::inner(v.amplitudes(), &av).re;
    Ok(num / v.norm().powi(2))
}

fn explicit_parent(
    h: &SparseOperator,
    p: &SparseOperator,
    fp: &FilterParams,
) -> Result<SparseOperator> {
    if fp.delta_inv == 0.0 {
        return Ok(p.clone());
    }
    let dim = h.dim();
    let k = h.axpy(
        Complex64::new(-fp.energy, 0.0),
        &SparseOperator::identity(dim),
    )?;
    let f = SparseOperator::identity(dim).axpy(Complex64::new(0.0, fp.delta_inv), &k)?;
    let pf = p.matmul(&f)?;
    Ok(f.adjoint().matmul(&pf)?.with_hermitian_flag(true))
}

/// Assembles `H`, `Σᵢ Pᵢ` and the parent Hamiltonian from term lists.
pub fn build_parent(
    h_terms: &[PauliString],
    projector_terms: &[PauliString],
    fp: &FilterParams,
) -> Result<ParentHamiltonian> {
    let n = h_terms
        .first()
        .or(projector_terms.first())
        .map(|t| t.n_sites())
        .ok_or_else(|| Error::InvalidArgument("empty term lists".into()))?;
    let h = assemble(h_terms, n)?;
    let p = assemble(projector_terms, n)?;
    ParentHamiltonian::new(h, p, *fp)
}

/// Numerical check of `𝓗² − 𝓗 ⪰ 0`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GapCertificate {
    /// `min λ² − λ` over the spectrum of raw `𝓗`.
    pub min_h2_minus_h: f64,
    /// Lowest eigenvalue (the ground-state energy, ideally 0).
    pub lambda0: f64,
    /// Second-lowest eigenvalue; the gap since the ground state is unique.
    pub lambda1: f64,
    /// `min_h2_minus_h ≥ −GAP_TOL`.
    pub passed: bool,
}

impl GapCertificate {
    /// Both the operator inequality and `λ₁ ≥ 1` hold within [`GAP_TOL`].
    pub fn gap_at_least_one(&self) -> bool {
        self.passed && self.lambda1 >= 1.0 - GAP_TOL
    }
}

pub const GAP_TOL: f64 = 1e-8;

/// Dense spectrum of raw `𝓗` mapped through `λ ↦ λ² − λ`.
///
/// `𝓗² − 𝓗` shares eigenvectors with `𝓗`, so its spectrum is the image of
/// `𝓗`'s; this avoids squaring a matrix whose norm grows like `δ⁻²`.
pub fn gap_certificate(ph: &ParentHamiltonian) -> Result<GapCertificate> {
    let n = ph.n_sites();
    if n > DENSE_MAX_SITES {
        return Err(Error::SiteCapExceeded {
            n_sites: n,
            cap: DENSE_MAX_SITES,
        });
    }
    let raw = ph.raw_matrix().expect("explicit below the dense cap");
    let vals = hermitian_eigenvalues(&sparse_to_dense(raw))?;
    let min = vals.iter().map(|l| l * l - l).fold(f64::INFINITY, f64::min);
    Ok(GapCertificate {
        min_h2_minus_h: min,
        lambda0: vals[0],
        lambda1: vals.get(1).copied().unwrap_or(f64::INFINITY),
        passed: min >= -GAP_TOL,
    })
}

/// Ascending dense spectrum of a Hermitian sparse operator.
pub fn dense_spectrum(h: &SparseOperator) -> Result<Vec<f64>> {
    if !h.hermitian_flag() {
        return Err(Error::NotHermitian);
    }
    if h.n_sites() > DENSE_MAX_SITES {
        return Err(Error::SiteCapExceeded {
            n_sites: h.n_sites(),
            cap: DENSE_MAX_SITES,
        });
    }
    hermitian_eigenvalues(&sparse_to_dense(h))
}

/// `η = minₙ |eₙ − E|`.
pub fn discreteness_eta(h: &SparseOperator, energy: f64) -> Result<f64> {
    Ok(eta_from_spectrum(&dense_spectrum(h)?, energy))
}

/// `η` from a precomputed spectrum.
pub fn eta_from_spectrum(spectrum: &[f64], energy: f64) -> f64 {
    spectrum
        .iter()
        .map(|e| (e - energy).abs())
        .fold(f64::INFINITY, f64::min)
}

/// `(r, 1 − r)` with `r(x) = x√π · exp(x²) erfc(x)`, for `x > 0`.
/// The large-`x` branch sums the asymptotic series of
/// `1 − r` directly so the difference does not cancel.
fn erfcx_ratio(x: f64) -> (f64, f64) {
    if x < 10.0 {
        let r = x * PI.sqrt() * (x * x).exp() * libm::erfc(x);
        return (r, 1.0 - r);
    }
    // 1 − r = Σ_{k≥1} (−1)^{k+1} (2k−1)!! / (2x²)^k
    let u = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..40 {
        term *= (2 * k - 1) as f64 * u;
        let signed = if k % 2 == 1 { term } else { -term };
        sum += signed;
        if term < 1e-18 * sum.abs() {
            break;
        }
    }
    (1.0 - sum, sum)
}

/// Energy variance after filtering an ideal Gaussian energy distribution of
/// variance `σ₀²` with a Lorentzian of width `δ`:
/// `σ² = −δ² + δ e^{−x²} √(2σ₀²/π) / erfc(x)`, `x = δ/√(2σ₀²)`.
///
/// Evaluated as `δ² (1 − r)/r` with `r = x√π eˣ² erfc(x)`.
pub fn variance_theory(delta: f64, sigma0_sq: f64) -> Result<f64> {
    if !(delta > 0.0) || !(sigma0_sq > 0.0) || !delta.is_finite() || !sigma0_sq.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "variance_theory needs positive finite inputs, got delta={delta}, sigma0_sq={sigma0_sq}"
        )));
    }
    let x = delta / (2.0 * sigma0_sq).sqrt();
    let (r, one_minus_r) = erfcx_ratio(x);
    Ok(delta * delta * one_minus_r / r)
}
