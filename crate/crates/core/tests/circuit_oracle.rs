mod common;

use common::*;
use lorentz_core::circuit::{
    decompose_parent, depth_report, fits_in_windows, format_circuit, pack_layers, parse_circuit, schedule_layers,
};
use lorentz_core::filter::FilterParams;
use lorentz_core::model::{build_tfi, classical_moments, projector_sum_terms, ProductStateSpec, TfiParams};
use lorentz_core::operator::pauli::{collect_terms, Pauli, PauliString};
use lorentz_core::Complex64 as C;
use proptest::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;

fn decomposition(spec: ProductStateSpec, delta_inv: f64) -> lorentz_core::circuit::TermDecomposition {
    let n = spec.n_sites;
    let h_terms = build_tfi(&TfiParams::new(n)).unwrap();
    let (e0, _) = classical_moments(&spec, &h_terms).unwrap();
    let fp = FilterParams::from_delta_inv(e0, delta_inv).unwrap();
    decompose_parent(&h_terms, &projector_sum_terms(&spec).unwrap(), &fp).unwrap()
}

#[test]
fn expansion_reproduces_the_triple_product() {
    for spec in [ProductStateSpec::afm(5), ProductStateSpec::theta(PI / 6.0, 4)] {
        let n = spec.n_sites;
        for d in [0.0, 0.5, 4.0] {
            let dec = decomposition(spec, d);
            let sites: Vec<_> = (0..n).map(|i| spec.site_amplitudes(i)).collect();
            let want = parent_matrix(&sum_matrix(&dec.h_terms, n), &projector_sum_matrix(&sites), dec.params.energy, d);
            let got = sum_matrix(&dec.all_terms(), n);
            assert!(got.max_abs_diff(&want) < 1e-11 * want.max_abs(), "d={d}");
            // merged strings plus the identity part give the rescaled operator
            let mut merged = sum_matrix(&dec.strings_at(d, true), n);
            merged = merged.add(&Dense::eye(1 << n), C::from(dec.identity_coefficient(d) / (1.0 + d * d)));
            assert!(merged.max_abs_diff(&want.scale(C::from(1.0 / (1.0 + d * d)))) < 1e-11 * want.max_abs());
        }
    }
}

#[test]
fn expansion_strings_stay_within_three_windows() {
    let dec = decomposition(ProductStateSpec::theta(PI / 6.0, 9), 1.0);
    let w = dec.locality.w;
    assert_eq!((w, dec.locality.v), (2, 4));
    for (part, windows) in [(&dec.part1, 1), (&dec.commutator_unit, 2), (&dec.sandwich_unit, 3)] {
        assert!(part.iter().all(|t| fits_in_windows(t.support_mask(), w, windows)));
    }
    assert!(dec.sandwich_unit.iter().any(|t| !fits_in_windows(t.support_mask(), w, 2)));
}

#[test]
fn layers_recount_to_the_merged_strings() {
    let dec = decomposition(ProductStateSpec::afm(8), 3.0);
    let tau = 0.1;
    let layers = schedule_layers(&dec, tau);
    let strings = dec.strings_at(3.0, true);
    let mut want: HashMap<(u64, u64), f64> = strings.iter().map(|s| (s.key(), s.coefficient().re * tau)).collect();
    for layer in &layers {
        let mut used = 0u64;
        for r in &layer.rotations {
            assert_eq!(used & r.string.support_mask(), 0);
            used |= r.string.support_mask();
            let a = want.remove(&r.string.key()).expect("each string once");
            assert_eq!(a, r.angle);
        }
    }
    assert!(want.is_empty());
    // a disjoint-support layering needs at least the heaviest per-site load
    let load = (0..8)
        .map(|site| strings.iter().filter(|s| s.factor(site) != Pauli::I).count())
        .max()
        .unwrap();
    assert!(layers.len() >= load);
}

#[test]
fn total_depth_is_linear_in_steps() {
    let dec = decomposition(ProductStateSpec::theta(PI / 6.0, 6), 10.0);
    let (per, _) = depth_report(1, &dec);
    for steps in [1, 7, 250, 2000] {
        assert_eq!(depth_report(steps, &dec), (per, per * steps));
    }
    assert_eq!(per, schedule_layers(&dec, 0.37).len());
}

#[test]
fn text_format_round_trips() {
    let dec = decomposition(ProductStateSpec::afm(6), 2.0);
    let layers = schedule_layers(&dec, 0.1);
    let text = format_circuit(&layers);
    assert_eq!(parse_circuit(&text, 6).unwrap(), layers);
    assert!(text.lines().next().unwrap().starts_with("ROT "));
    assert!(parse_circuit("ROT 0.1 0:Q\n", 6).is_err());
    assert!(parse_circuit("ROT 0.1\n", 6).is_err());
    assert!(parse_circuit("ROT 0.1 9:X\n", 6).is_err());
}

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0usize..4, n), 0.1..2.0f64).prop_map(move |(f, c)| {
        let factors: Vec<Pauli> = f.iter().map(|&k| Pauli::ALL[k]).collect();
        PauliString::from_factors(C::from(c), &factors).unwrap()
    })
}

proptest! {
    #[test]
    fn packing_is_valid_and_complete(strings in prop::collection::vec(string(6), 0..40)) {
        let layers = pack_layers(&strings, 1.0);
        prop_assert!(layers.iter().all(|l| l.is_valid() && !l.rotations.is_empty()));
        let packed: usize = layers.iter().map(|l| l.rotations.len()).sum();
        prop_assert_eq!(packed, strings.iter().filter(|s| !s.is_identity()).count());
        // input order does not matter once like strings are merged
        let strings = collect_terms(strings.iter(), 0.0);
        let layers = pack_layers(&strings, 1.0);
        let mut rev = strings.clone();
        rev.reverse();
        let a = format_circuit(&layers);
        let b = format_circuit(&pack_layers(&rev, 1.0));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn window_cover_matches_brute_force(mask in 1u64..(1 << 12), width in 1usize..4, count in 1usize..4) {
        // try every placement of `count` windows
        let starts: Vec<usize> = (0..12).collect();
        let mut any = false;
        let mut stack = vec![(0usize, 0u64)];
        while let Some((k, covered)) = stack.pop() {
            if mask & !covered == 0 { any = true; break; }
            if k == count { continue; }
            for &s in &starts {
                stack.push((k + 1, covered | (((1u64 << width) - 1) << s)));
            }
        }
        prop_assert_eq!(fits_in_windows(mask, width, count), any);
    }
}
