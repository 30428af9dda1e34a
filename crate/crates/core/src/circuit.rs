//! Pauli-string expansion of the parent Hamiltonian, rotation layering and
//! the `.lfc` circuit text format.
//!
//! `𝓗 = P + δ⁻¹ C + δ⁻² S` with `P = Σᵢ Pᵢ`, `C = −i[K, P]`, `S = K P K` and
//! `K = H − E_F`. The unit parts are kept so any `δ` along a schedule can be
//! read off without re-expanding.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::filter::FilterParams;
use crate::operator::pauli::{Pauli, PauliString};
use crate::operator::sparse::{assemble, SparseOperator};

/// Relative pruning threshold for expanded coefficients.
pub const PRUNE_REL: f64 = 1e-12;
/// Imaginary parts larger than this (relative) after collection are a bug.
const HERMITIAN_SLACK: f64 = 1e-9;

/// Insertion-ordered accumulator over Pauli keys.
#[derive(Default)]
struct Accumulator {
    index: HashMap<(u64, u64), usize>,
    terms: Vec<PauliString>,
}

impl Accumulator {
    fn add(&mut self, t: PauliString) {
        match self.index.get(&t.key()) {
            Some(&i) => {
                let c = self.terms[i].coefficient() + t.coefficient();
                self.terms[i].set_coefficient(c);
            }
            None => {
                self.index.insert(t.key(), self.terms.len());
                self.terms.push(t);
            }
        }
    }

    /// Prunes, checks hermiticity and drops the (roundoff) imaginary parts.
    fn finish(self, what: &str) -> Result<Vec<PauliString>> {
        let max = self
            .terms
            .iter()
            .map(|t| t.coefficient().norm())
            .fold(0.0, f64::max);
        let mut out = Vec::with_capacity(self.terms.len());
        for mut t in self.terms {
            let c = t.coefficient();
            if c.im.abs() > HERMITIAN_SLACK * max.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{what} expansion is not Hermitian: {t} has coefficient {c}"
                )));
            }
            if c.re.abs() > PRUNE_REL * max && c.re != 0.0 {
                t.set_coefficient(Complex64::new(c.re, 0.0));
                out.push(t);
            }
        }
        Ok(out)
    }
}

/// Maximum span `w` of any Hamiltonian term and maximum number `v` of terms
/// touching one site.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Locality {
    pub w: usize,
    pub v: usize,
}

pub fn locality(h_terms: &[PauliString]) -> Locality {
    let n = h_terms.first().map_or(0, |t| t.n_sites());
    let w = h_terms.iter().map(|t| t.span()).max().unwrap_or(0);
    let v = (0..n)
        .map(|site| {
            h_terms
                .iter()
                .filter(|t| t.factor(site) != Pauli::I)
                .count()
        })
        .max()
        .unwrap_or(0);
    Locality { w, v }
}

/// The three parts of the parent Hamiltonian as real-coefficient Pauli sums.
#[derive(Clone, Debug)]
pub struct TermDecomposition {
    pub n_sites: usize,
    pub params: FilterParams,
    pub h_terms: Vec<PauliString>,
    pub projector_terms: Vec<PauliString>,
    /// `Σᵢ Pᵢ`.
    pub part1: Vec<PauliString>,
    /// `−i[K, P]`, to be multiplied by `δ⁻¹`.
    pub commutator_unit: Vec<PauliString>,
    /// `K P K`, to be multiplied by `δ⁻²`.
    pub sandwich_unit: Vec<PauliString>,
    pub locality: Locality,
}

impl TermDecomposition {
    /// `δ⁻¹ · (−i[K, P])`; empty when the filter is off.
    pub fn part2(&self) -> Vec<PauliString> {
        scaled_part(&self.commutator_unit, self.params.delta_inv)
    }

    /// `δ⁻² · K P K`; empty when the filter is off.
    pub fn part3(&self) -> Vec<PauliString> {
        scaled_part(
            &self.sandwich_unit,
            self.params.delta_inv * self.params.delta_inv,
        )
    }

    /// Merged strings of `𝓗(δ⁻¹)`, divided by `1 + δ⁻²` when `rescaled`.
    ///
    /// Identity strings only add a global phase to the evolution and are
    /// dropped.
    pub fn strings_at(&self, delta_inv: f64, rescaled: bool) -> Vec<PauliString> {
        let d = delta_inv;
        let scale = if rescaled { 1.0 / (1.0 + d * d) } else { 1.0 };
        let mut acc = Accumulator::default();
        let parts: [(&[PauliString], f64); 3] = [
            (&self.part1, 1.0),
            (&self.commutator_unit, d),
            (&self.sandwich_unit, d * d),
        ];
        for (terms, f) in parts {
            if f == 0.0 {
                continue;
            }
            for t in terms.iter().filter(|t| !t.is_identity()) {
                acc.add(t.scaled(Complex64::new(f * scale, 0.0)));
            }
        }
        acc.finish("merged").expect("parts are real")
    }

    /// Identity coefficient of `𝓗(δ⁻¹)` (a global phase in time evolution).
    pub fn identity_coefficient(&self, delta_inv: f64) -> f64 {
        let pick = |ts: &[PauliString]| {
            ts.iter()
                .filter(|t| t.is_identity())
                .map(|t| t.coefficient().re)
                .sum::<f64>()
        };
        pick(&self.part1)
            + delta_inv * pick(&self.commutator_unit)
            + delta_inv * delta_inv * pick(&self.sandwich_unit)
    }

    /// All parts at the decomposition's own `δ`, identity included.
    pub fn all_terms(&self) -> Vec<PauliString> {
        let mut v = self.part1.clone();
        v.extend(self.part2());
        v.extend(self.part3());
        v
    }

    /// Sparse matrix of the full expansion.
    pub fn assemble(&self) -> Result<SparseOperator> {
        assemble(&self.all_terms(), self.n_sites)
    }

    pub fn hamiltonian(&self) -> Result<SparseOperator> {
        assemble(&self.h_terms, self.n_sites)
    }

    pub fn projector_sum(&self) -> Result<SparseOperator> {
        assemble(&self.projector_terms, self.n_sites)
    }

    pub fn string_count(&self) -> usize {
        self.part1.len() + self.commutator_unit.len() + self.sandwich_unit.len()
    }
}

fn scaled_part(terms: &[PauliString], f: f64) -> Vec<PauliString> {
    if f == 0.0 {
        return Vec::new();
    }
    terms
        .iter()
        .map(|t| t.scaled(Complex64::new(f, 0.0)))
        .collect()
}

fn overlaps(a: &PauliString, b: &PauliString) -> bool {
    a.support_mask() & b.support_mask() != 0
}

/// Symbolic expansion of `𝓕†(Σᵢ Pᵢ)𝓕` with like-term collection.
pub fn decompose_parent(
    h_terms: &[PauliString],
    projector_terms: &[PauliString],
    fp: &FilterParams,
) -> Result<TermDecomposition> {
    let n = h_terms
        .first()
        .or(projector_terms.first())
        .map(|t| t.n_sites())
        .ok_or_else(|| Error::InvalidArgument("empty term lists".into()))?;
    for t in h_terms.iter().chain(projector_terms) {
        check_dim(n, t.n_sites())?;
    }

    let mut acc = Accumulator::default();
    for p in projector_terms {
        acc.add(p.clone());
    }
    let part1 = acc.finish("projector")?;

    let mut k_acc = Accumulator::default();
    for h in h_terms {
        k_acc.add(h.clone());
    }
    k_acc.add(PauliString::identity(n, Complex64::new(-fp.energy, 0.0))?);
    let k_terms: Vec<PauliString> = k_acc.terms;

    // only overlapping, anticommuting pairs survive the commutator
    let mut acc = Accumulator::default();
    let minus_i = Complex64::new(0.0, -1.0);
    for k in &k_terms {
        for p in &part1 {
            if !overlaps(k, p) || k.commutes_with(p) {
                continue;
            }
            // [k, p] = 2 k p for anticommuting strings
            acc.add((k * p).scaled(minus_i * 2.0));
        }
    }
    let commutator_unit = acc.finish("commutator")?;

    let mut acc = Accumulator::default();
    for p in &part1 {
        let kp: Vec<PauliString> = k_terms.iter().map(|k| k * p).collect();
        for a in &kp {
            for k in &k_terms {
                acc.add(a * k);
            }
        }
    }
    let sandwich_unit = acc.finish("sandwich")?;

    Ok(TermDecomposition {
        n_sites: n,
        params: *fp,
        h_terms: h_terms.to_vec(),
        projector_terms: projector_terms.to_vec(),
        part1,
        commutator_unit,
        sandwich_unit,
        locality: locality(h_terms),
    })
}

/// Whether the support mask can be covered by `count` windows of `width`
/// contiguous sites (greedy from the lowest set bit).
pub fn fits_in_windows(mask: u64, width: usize, count: usize) -> bool {
    let mut rest = mask;
    for _ in 0..count {
        if rest == 0 {
            return true;
        }
        let low = rest.trailing_zeros() as usize;
        let window = if low + width >= 64 {
            u64::MAX << low
        } else {
            ((1u64 << width) - 1) << low
        };
        rest &= !window;
    }
    rest == 0
}

/// `exp(−i · angle · P)` for a unit-coefficient Pauli string `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    pub string: PauliString,
    pub angle: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CircuitLayer {
    pub rotations: Vec<Rotation>,
}

impl CircuitLayer {
    /// Pairwise-disjoint supports within the layer.
    pub fn is_valid(&self) -> bool {
        let mut used = 0u64;
        for r in &self.rotations {
            let m = r.string.support_mask();
            if used & m != 0 {
                return false;
            }
            used |= m;
        }
        true
    }
}

/// First-fit packing of strings into layers of disjoint support.
///
/// Strings are visited by leftmost site, wider spans first on ties, then by
/// masks so the result does not depend on input order.
pub fn pack_layers(strings: &[PauliString], tau: f64) -> Vec<CircuitLayer> {
    let mut order: Vec<&PauliString> = strings.iter().filter(|s| !s.is_identity()).collect();
    order.sort_by(|a, b| {
        let left = |s: &PauliString| s.support()[0];
        left(a)
            .cmp(&left(b))
            .then(b.span().cmp(&a.span()))
            .then(a.key().cmp(&b.key()))
    });
    let mut layers: Vec<CircuitLayer> = Vec::new();
    let mut used: Vec<u64> = Vec::new();
    for s in order {
        let m = s.support_mask();
        let slot = match used.iter().position(|u| u & m == 0) {
            Some(i) => i,
            None => {
                layers.push(CircuitLayer::default());
                used.push(0);
                layers.len() - 1
            }
        };
        used[slot] |= m;
        layers[slot].rotations.push(Rotation {
            string: s.with_coefficient(Complex64::new(1.0, 0.0)),
            angle: s.coefficient().re * tau,
        });
    }
    layers
}

/// One Trotter step of `𝓗̃` at the decomposition's `δ`, packed into layers.
pub fn schedule_layers(dec: &TermDecomposition, tau: f64) -> Vec<CircuitLayer> {
    pack_layers(&dec.strings_at(dec.params.delta_inv, true), tau)
}

/// `(per_step_depth, total_depth)` for `steps` Trotter steps.
pub fn depth_report(steps: usize, dec: &TermDecomposition) -> (usize, usize) {
    let per_step = schedule_layers(dec, 1.0).len();
    (per_step, per_step * steps)
}

/// Text form: one `ROT <angle> site:P ...` line per rotation, a blank line
/// between layers. Angles use the shortest round-trip decimal form.
pub fn format_circuit(layers: &[CircuitLayer]) -> String {
    let mut out = String::new();
    for (i, layer) in layers.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for r in &layer.rotations {
            write!(out, "ROT {}", r.angle).unwrap();
            for site in r.string.support() {
                write!(out, " {}:{}", site, r.string.factor(site).symbol()).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn export_circuit(layers: &[CircuitLayer], path: &Path) -> Result<()> {
    std::fs::write(path, format_circuit(layers))?;
    Ok(())
}

/// Inverse of [`format_circuit`].
pub fn parse_circuit(text: &str, n_sites: usize) -> Result<Vec<CircuitLayer>> {
    let bad =
        |line: usize, msg: &str| Error::InvalidArgument(format!("circuit line {line}: {msg}"));
    let mut layers = Vec::new();
    let mut current = CircuitLayer::default();
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = line.trim();
        if line.is_empty() {
            if !current.rotations.is_empty() {
                layers.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        if parts.next() != Some("ROT") {
            return Err(bad(line_no, "expected ROT"));
        }
        let angle: f64 = parts
            .next()
            .ok_or_else(|| bad(line_no, "missing angle"))?
            .parse()
            .map_err(|_| bad(line_no, "bad angle"))?;
        let mut sites = Vec::new();
        for tok in parts {
            let (s, p) = tok
                .split_once(':')
                .ok_or_else(|| bad(line_no, "expected site:P"))?;
            let site: usize = s.parse().map_err(|_| bad(line_no, "bad site"))?;
            let mut chars = p.chars();
            let pauli = match (chars.next().and_then(Pauli::from_symbol), chars.next()) {
                (Some(q), None) if q != Pauli::I => q,
                _ => return Err(bad(line_no, "bad Pauli symbol")),
            };
            sites.push((site, pauli));
        }
        if sites.is_empty() {
            return Err(bad(line_no, "rotation without support"));
        }
        let string = PauliString::from_sites(n_sites, Complex64::new(1.0, 0.0), &sites)?;
        current.rotations.push(Rotation { string, angle });
    }
    if !current.rotations.is_empty() {
        layers.push(current);
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::build_parent;
    use crate::model::{build_tfi, projector_sum_terms, ProductStateSpec, TfiParams};
    use crate::operator::sparse::LinearOperator;

    fn decomposition(spec: ProductStateSpec, delta_inv: f64) -> TermDecomposition {
        let n = spec.n_sites;
        let h = build_tfi(&TfiParams::new(n)).unwrap();
        let p = projector_sum_terms(&spec).unwrap();
        let fp = FilterParams::from_delta_inv(-0.7, delta_inv).unwrap();
        decompose_parent(&h, &p, &fp).unwrap()
    }

    #[test]
    fn no_filter_keeps_only_projectors() {
        let dec = decomposition(ProductStateSpec::theta(0.4, 5), 0.0);
        assert!(dec.part2().is_empty() && dec.part3().is_empty());
        assert!(dec.part1.len() <= 4 * 5);
        assert!(dec.part1.iter().all(|t| t.weight() <= 1));
        assert!(schedule_layers(&dec, 0.1).len() <= 4);
    }

    #[test]
    fn expansion_matches_assembled_parent() {
        for spec in [
            ProductStateSpec::theta(0.0, 3),
            ProductStateSpec::theta(0.9, 4),
            ProductStateSpec::afm(4),
        ] {
            let dec = decomposition(spec, 1.3);
            let ph = build_parent(&dec.h_terms, &dec.projector_terms, &dec.params).unwrap();
            let a = dec.assemble().unwrap();
            let b = ph.raw_matrix().unwrap();
            let diff = a.axpy(Complex64::new(-1.0, 0.0), b).unwrap();
            let worst = (0..diff.dim())
                .flat_map(|r| diff.row(r).map(|(_, v)| v.norm()).collect::<Vec<_>>())
                .fold(0.0, f64::max);
            assert!(worst < 1e-10, "{worst}");
        }
    }

    #[test]
    fn locality_of_tfi() {
        let dec = decomposition(ProductStateSpec::afm(6), 1.0);
        assert_eq!(dec.locality, Locality { w: 2, v: 4 });
        let window = 2 * dec.locality.w - 1;
        for t in &dec.commutator_unit {
            assert!(t.span() <= window, "{t}");
        }
        for t in &dec.sandwich_unit {
            assert!(fits_in_windows(t.support_mask(), window, 3), "{t}");
        }
    }

    #[test]
    fn commutator_count_is_linear() {
        let counts: Vec<usize> = [6, 8, 10]
            .iter()
            .map(|&n| {
                decomposition(ProductStateSpec::theta(0.3, n), 1.0)
                    .commutator_unit
                    .len()
            })
            .collect();
        assert_eq!(counts[2] - counts[1], counts[1] - counts[0]);
    }

    #[test]
    fn window_cover() {
        assert!(fits_in_windows(0b101, 3, 1));
        assert!(!fits_in_windows(0b1011, 3, 1));
        assert!(!fits_in_windows(0b10001, 3, 1));
        assert!(fits_in_windows(0b10001, 3, 2));
        assert!(fits_in_windows(0, 3, 0));
    }

    #[test]
    fn layers_are_disjoint_and_complete() {
        let dec = decomposition(ProductStateSpec::theta(0.5, 6), 2.0);
        let strings = dec.strings_at(2.0, true);
        let layers = schedule_layers(&dec, 0.1);
        assert!(layers.iter().all(CircuitLayer::is_valid));
        let total: usize = layers.iter().map(|l| l.rotations.len()).sum();
        assert_eq!(total, strings.len());
    }

    #[test]
    fn full_support_strings_need_one_layer_each() {
        let s: Vec<PauliString> = ["XXX", "ZZZ", "YXZ"]
            .iter()
            .map(|l| l.parse::<PauliString>().unwrap())
            .collect();
        assert_eq!(pack_layers(&s, 1.0).len(), 3);
    }

    #[test]
    fn depth_is_linear_in_steps() {
        let dec = decomposition(ProductStateSpec::afm(4), 1.0);
        let (one, total) = depth_report(1, &dec);
        assert_eq!(one, total);
        assert_eq!(depth_report(200, &dec).1, 2 * depth_report(100, &dec).1);
    }

    #[test]
    fn single_rotation_format() {
        let layer = CircuitLayer {
            rotations: vec![Rotation {
                string: PauliString::real(3, 1.0, &[(0, Pauli::Z)]).unwrap(),
                angle: 0.1,
            }],
        };
        assert_eq!(format_circuit(&[layer]), "ROT 0.1 0:Z\n");
        assert_eq!(format_circuit(&[]), "");
    }

    #[test]
    fn round_trip() {
        let dec = decomposition(ProductStateSpec::theta(0.5, 6), 3.0);
        let layers = schedule_layers(&dec, 0.1);
        let text = format_circuit(&layers);
        assert_eq!(parse_circuit(&text, 6).unwrap(), layers);
        assert!(parse_circuit("ROT x 0:Z", 2).is_err());
        assert!(parse_circuit("ROT 0.1 0:Q", 2).is_err());
    }
}
