//! Pauli strings in symplectic (x, z) bit form.
//!
//! A string on `n` sites stores two masks. Site `i` occupies bit `n - 1 - i`, so
//! site 0 is the most significant bit of a computational-basis index, matching
//! the state-vector convention used everywhere else in the crate.
//!
//! Each site factor is `i^(x·z) X^x Z^z`, which gives `Y = iXZ`.

use std::collections::HashMap;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest site count a single string can address.
pub const MAX_STRING_SITES: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// `i^k` for `k` taken mod 4.
pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Tensor product of single-site Paulis with a complex coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    n_sites: usize,
    x: u64,
    z: u64,
    coeff: Complex64,
}

impl PauliString {
    /// The identity string scaled by `coeff`.
    pub fn identity(n_sites: usize, coeff: Complex64) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_STRING_SITES {
            return Err(Error::InvalidArgument(format!(
                "Pauli strings need 1..={MAX_STRING_SITES} sites, got {n_sites}"
            )));
        }
        Ok(Self {
            n_sites,
            x: 0,
            z: 0,
            coeff,
        })
    }

    /// Builds a string from one factor per site.
    pub fn from_factors(coeff: Complex64, factors: &[Pauli]) -> Result<Self> {
        let mut s = Self::identity(factors.len(), coeff)?;
        for (site, &p) in factors.iter().enumerate() {
            s.set_factor(site, p);
        }
        Ok(s)
    }

    /// Builds a string from sparse `(site, factor)` pairs; unlisted sites are `I`.
    pub fn from_sites(n_sites: usize, coeff: Complex64, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_sites, coeff)?;
        for &(site, p) in sites {
            if site >= n_sites {
                return Err(Error::InvalidArgument(format!(
                    "site {site} out of range for {n_sites} sites"
                )));
            }
            s.set_factor(site, p);
        }
        Ok(s)
    }

    /// Real-coefficient shorthand for [`PauliString::from_sites`].
    pub fn real(n_sites: usize, coeff: f64, sites: &[(usize, Pauli)]) -> Result<Self> {
        Self::from_sites(n_sites, Complex64::new(coeff, 0.0), sites)
    }

    fn bit(&self, site: usize) -> u64 {
        1u64 << (self.n_sites - 1 - site)
    }

    fn set_factor(&mut self, site: usize, p: Pauli) {
        let b = self.bit(site);
        let (x, z) = p.bits();
        self.x = if x { self.x | b } else { self.x & !b };
        self.z = if z { self.z | b } else { self.z & !b };
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coeff
    }

    pub fn set_coefficient(&mut self, c: Complex64) {
        self.coeff = c;
    }

    pub fn with_coefficient(&self, c: Complex64) -> Self {
        Self { coeff: c, ..*self }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            coeff: self.coeff * factor,
            ..*self
        }
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Key identifying the operator part, ignoring the coefficient.
    pub fn key(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    pub fn factor(&self, site: usize) -> Pauli {
        let b = self.bit(site);
        Pauli::from_bits(self.x & b != 0, self.z & b != 0)
    }

    pub fn factors(&self) -> Vec<Pauli> {
        (0..self.n_sites).map(|s| self.factor(s)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Bit mask of sites carrying a non-identity factor.
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    /// Sites carrying a non-identity factor, in increasing order.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_sites)
            .filter(|&s| self.support_mask() & self.bit(s) != 0)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    /// `max - min + 1` over the support, zero for the identity.
    pub fn span(&self) -> usize {
        let sup = self.support();
        match (sup.first(), sup.last()) {
            (Some(a), Some(b)) => b - a + 1,
            _ => 0,
        }
    }

    /// Number of `Y` factors.
    pub(crate) fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// Hermitian conjugate (Pauli strings are Hermitian, so only the coefficient changes).
    pub fn adjoint(&self) -> Self {
        Self {
            coeff: self.coeff.conj(),
            ..*self
        }
    }

    /// Product `self · other`, or a dimension error if the site counts differ.
    pub fn try_mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_sites != other.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: other.n_sites,
            });
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &PauliString) -> PauliString {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // i^(a1 + a2 - a3) (-1)^(z1·x2), all exponents mod 4
        let k = self.y_count() + other.y_count() + 4 * 64 - (x & z).count_ones()
            + 2 * (self.z & other.x).count_ones();
        PauliString {
            n_sites: self.n_sites,
            x,
            z,
            coeff: self.coeff * other.coeff * i_pow(k),
        }
    }

    /// Action on a computational basis state: `P|b⟩ = phase · |b'⟩`,
    /// coefficient included.
    pub fn apply_to_basis(&self, b: usize) -> (usize, Complex64) {
        let b = b as u64;
        let sign = if (self.z & b).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let phase = i_pow(self.y_count()) * sign * self.coeff;
        ((b ^ self.x) as usize, phase)
    }

    /// `out += self · v` on a full state vector.
    pub fn apply_add(&self, v: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(v.len(), 1usize << self.n_sites);
        for (b, &amp) in v.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (b2, ph) = self.apply_to_basis(b);
            out[b2] += ph * amp;
        }
    }

    /// Compact label such as `XIZ`.
    pub fn label(&self) -> String {
        self.factors().iter().map(|p| p.symbol()).collect()
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    /// Panics when the site counts differ; use [`PauliString::try_mul`] otherwise.
    fn mul(self, rhs: &PauliString) -> PauliString {
        assert_eq!(self.n_sites, rhs.n_sites, "Pauli string site counts differ");
        self.mul_unchecked(rhs)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.coeff, self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a dense label such as `"XIZY"` with unit coefficient.
    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                Pauli::from_symbol(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad Pauli symbol {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_factors(Complex64::new(1.0, 0.0), &factors)
    }
}

/// Merges like strings, keeping first-occurrence order, and drops coefficients
/// with modulus at most `rel_tol` times the largest surviving modulus.
pub fn collect_terms<'a, I>(terms: I, rel_tol: f64) -> Vec<PauliString>
where
    I: IntoIterator<Item = &'a PauliString>,
{
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut out: Vec<PauliString> = Vec::new();
    for t in terms {
        match index.get(&t.key()) {
            Some(&i) => out[i].coeff += t.coeff,
            None => {
                index.insert(t.key(), out.len());
                out.push(t.clone());
            }
        }
    }
    prune(out, rel_tol)
}

pub(crate) fn prune(terms: Vec<PauliString>, rel_tol: f64) -> Vec<PauliString> {
    let max = terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    let cut = rel_tol * max;
    terms
        .into_iter()
        .filter(|t| t.coeff.norm() > cut && t.coeff.norm() > 0.0)
        .collect()
}

/// True when the term sum equals its own adjoint: after collecting like
/// strings every coefficient is real up to `tol` (relative to the largest).
pub fn is_hermitian_sum(terms: &[PauliString], tol: f64) -> bool {
    let collected = collect_terms(terms.iter(), 0.0);
    let max = collected
        .iter()
        .map(|t| t.coeff.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    collected.iter().all(|t| t.coeff.im.abs() <= tol * max)
}
