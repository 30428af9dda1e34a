//! The transverse-field Ising benchmark, product states and their
//! annihilating projectors.
//!
//! `H = J (Σᵢ ZᵢZᵢ₊₁ + Σᵢ g Xᵢ + h Zᵢ)` with open boundaries.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::operator::pauli::{Pauli, PauliString};
use crate::operator::state::StateVector;

#[derive(Clone, Debug, PartialEq)]
pub struct TfiParams {
    pub n_sites: usize,
    pub j: f64,
    pub g: f64,
    pub h: f64,
}

impl TfiParams {
    /// Couplings `(J, g, h) = (1, −1.05, 0.5)`.
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            j: 1.0,
            g: -1.05,
            h: 0.5,
        }
    }
}

/// Term list in the order: `N−1` ZZ bonds, `N` X fields, `N` Z fields.
pub fn build_tfi(p: &TfiParams) -> Result<Vec<PauliString>> {
    let n = p.n_sites;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "TFI chain needs N >= 2, got {n}"
        )));
    }
    let mut terms = Vec::with_capacity(3 * n - 1);
    for i in 0..n - 1 {
        terms.push(PauliString::real(
            n,
            p.j,
            &[(i, Pauli::Z), (i + 1, Pauli::Z)],
        )?);
    }
    for i in 0..n {
        terms.push(PauliString::real(n, p.j * p.g, &[(i, Pauli::X)])?);
    }
    for i in 0..n {
        terms.push(PauliString::real(n, p.j * p.h, &[(i, Pauli::Z)])?);
    }
    Ok(terms)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum ProductKind {
    /// `|1 0 1 0 …⟩`, site 0 in `|1⟩`.
    Afm,
    /// `(cos θ |0⟩ + sin θ |1⟩)^{⊗N}`.
    Theta(f64),
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ProductStateSpec {
    pub kind: ProductKind,
    pub n_sites: usize,
}

impl ProductStateSpec {
    pub fn afm(n_sites: usize) -> Self {
        Self {
            kind: ProductKind::Afm,
            n_sites,
        }
    }

    pub fn theta(theta: f64, n_sites: usize) -> Self {
        Self {
            kind: ProductKind::Theta(theta),
            n_sites,
        }
    }

    /// Single-site amplitudes `(⟨0|φᵢ⟩, ⟨1|φᵢ⟩)`.
    pub fn site_amplitudes(&self, site: usize) -> (f64, f64) {
        match self.kind {
            ProductKind::Afm if site % 2 == 0 => (0.0, 1.0),
            ProductKind::Afm => (1.0, 0.0),
            ProductKind::Theta(t) => (t.cos(), t.sin()),
        }
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of site `site`.
    pub fn bloch_vector(&self, site: usize) -> [f64; 3] {
        match self.kind {
            ProductKind::Afm if site % 2 == 0 => [0.0, 0.0, -1.0],
            ProductKind::Afm => [0.0, 0.0, 1.0],
            ProductKind::Theta(t) => [(2.0 * t).sin(), 0.0, (2.0 * t).cos()],
        }
    }

    /// Short label used in output tables: `afm` or the angle.
    pub fn label(&self) -> String {
        match self.kind {
            ProductKind::Afm => "afm".to_string(),
            ProductKind::Theta(t) => format!("{t:.16e}"),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_sites == 0 || self.n_sites > 30 {
            return Err(Error::InvalidArgument(format!(
                "product state needs 1..=30 sites, got {}",
                self.n_sites
            )));
        }
        if let ProductKind::Theta(t) = self.kind {
            if !t.is_finite() {
                return Err(Error::InvalidArgument("theta must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Normalised product vector; site 0 is the most significant bit.
pub fn product_state(spec: &ProductStateSpec) -> Result<StateVector> {
    spec.validate()?;
    let n = spec.n_sites;
    let sites: Vec<(f64, f64)> = (0..n).map(|i| spec.site_amplitudes(i)).collect();
    let amps = (0..1usize << n)
        .map(|b| {
            let a = sites.iter().enumerate().fold(1.0, |acc, (i, &(a0, a1))| {
                if b >> (n - 1 - i) & 1 == 1 {
                    acc * a1
                } else {
                    acc * a0
                }
            });
            Complex64::new(a, 0.0)
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// Coefficients below this are left out of projector expansions.
const PROJECTOR_DROP: f64 = 1e-15;

/// One projector `Pᵢ = (𝕀 − n̂ᵢ·σ⃗ᵢ)/2` per site, each as a Pauli-string sum.
pub fn projectors(spec: &ProductStateSpec) -> Result<Vec<Vec<PauliString>>> {
    spec.validate()?;
    let n = spec.n_sites;
    (0..n)
        .map(|i| {
            let [bx, by, bz] = spec.bloch_vector(i);
            let mut terms = vec![PauliString::identity(n, Complex64::new(0.5, 0.0))?];
            for (comp, p) in [(bx, Pauli::X), (by, Pauli::Y), (bz, Pauli::Z)] {
                if comp.abs() > PROJECTOR_DROP {
                    terms.push(PauliString::real(n, -0.5 * comp, &[(i, p)])?);
                }
            }
            Ok(terms)
        })
        .collect()
}

/// All projector strings concatenated, i.e. the term list of `Σᵢ Pᵢ`.
pub fn projector_sum_terms(spec: &ProductStateSpec) -> Result<Vec<PauliString>> {
    Ok(projectors(spec)?.into_iter().flatten().collect())
}

/// Expectation of a Pauli string (coefficient included) in the product state.
fn string_expectation(spec: &ProductStateSpec, s: &PauliString) -> Complex64 {
    // each factor is i^(x·z) X^x Z^z; ⟨Y⟩ etc come from the Bloch vector directly
    let mut val = 1.0;
    for site in s.support() {
        let b = spec.bloch_vector(site);
        val *= match s.factor(site) {
            Pauli::X => b[0],
            Pauli::Y => b[1],
            Pauli::Z => b[2],
            Pauli::I => 1.0,
        };
        if val == 0.0 {
            break;
        }
    }
    s.coefficient() * val
}

/// `(E₀, σ₀²)` of the product state by local contraction.
///
/// `⟨H²⟩ − ⟨H⟩²` is summed as the covariance over term pairs; pairs with
/// disjoint support contribute nothing in a product state and are skipped.
/// No `2^N` object is built.
pub fn classical_moments(spec: &ProductStateSpec, terms: &[PauliString]) -> Result<(f64, f64)> {
    spec.validate()?;
    for t in terms {
        check_dim(spec.n_sites, t.n_sites())?;
    }
    let expect: Vec<Complex64> = terms.iter().map(|t| string_expectation(spec, t)).collect();
    let mean: Complex64 = expect.iter().sum();
    let mut var = 0.0;
    for (a, ta) in terms.iter().enumerate() {
        for (b, tb) in terms.iter().enumerate() {
            if ta.support_mask() & tb.support_mask() == 0 {
                continue;
            }
            // ⟨Pa† Pb⟩ − ⟨Pa⟩*⟨Pb⟩ for H = Σ c P Hermitian
            let prod = &ta.adjoint() * tb;
            let cov = string_expectation(spec, &prod) - expect[a].conj() * expect[b];
            var += cov.re;
        }
    }
    Ok((mean.re, var.max(0.0)))
}

/// Thermodynamic-limit energy density `E/JN = cos²2θ + h cos 2θ + g sin 2θ`
/// of the translation-invariant product state.
pub fn theta_energy_density(theta: f64, g: f64, h: f64) -> f64 {
    let c = (2.0 * theta).cos();
    c * c + h * c + g * (2.0 * theta).sin()
}

/// `θ ∈ [0, π/2]` grid with `points` evenly spaced values.
pub fn theta_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| FRAC_PI_2 * k as f64 / (points - 1) as f64)
            .collect(),
    }
}
