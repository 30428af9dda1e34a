mod common;

use common::*;
use lorentz_core::filter::{
    build_parent, discreteness_eta, filtered_state, gap_certificate, variance_theory, FilterParams,
};
use lorentz_core::model::{
    build_tfi, classical_moments, product_state, projector_sum_terms, ProductStateSpec, TfiParams,
};
use lorentz_core::operator::sparse::{assemble, LinearOperator};
use lorentz_core::operator::state::energy_moments;
use lorentz_core::Complex64 as C;
use proptest::prelude::*;
use std::f64::consts::PI;

fn sites(spec: &ProductStateSpec) -> Vec<(f64, f64)> {
    (0..spec.n_sites).map(|i| spec.site_amplitudes(i)).collect()
}

fn dense_of<A: LinearOperator>(op: &A) -> Dense {
    let n = op.dim();
    let mut m = Dense::zeros(n);
    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = ONE;
        let mut col = vec![ZERO; n];
        op.apply(&e, &mut col);
        for i in 0..n {
            m.a[i * n + j] = col[i];
        }
    }
    m
}

fn hamiltonian(n: usize) -> Dense {
    sum_matrix(&build_tfi(&TfiParams::new(n)).unwrap(), n)
}

fn dense_moments(h: &Dense, v: &[C]) -> (f64, f64) {
    let hv = h.apply(v);
    let mean = dot(v, &hv).re;
    let sq = dot(&hv, &hv).re;
    (mean, sq - mean * mean)
}

#[test]
fn jacobi_oracle_diagonalises() {
    let h = hamiltonian(4);
    let (vals, vecs) = jacobi_real(&h);
    for (l, v) in vals.iter().zip(&vecs) {
        let vc: Vec<C> = v.iter().map(|&x| C::from(x)).collect();
        let r: f64 = h.apply(&vc).iter().zip(&vc).map(|(a, b)| (a - b * l).norm_sqr()).sum();
        assert!(r.sqrt() < 1e-10);
    }
}

#[test]
fn product_states_match_kronecker_vectors() {
    for (spec, want) in [
        (ProductStateSpec::afm(5), afm_vector(5)),
        (ProductStateSpec::theta(0.3, 5), theta_vector(0.3, 5)),
    ] {
        let got = product_state(&spec).unwrap();
        let d: f64 = got.amplitudes().iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-14);
    }
}

#[test]
fn projector_terms_match_rank_one_projectors() {
    for spec in [ProductStateSpec::afm(4), ProductStateSpec::theta(PI / 6.0, 4), ProductStateSpec::theta(1.1, 3)] {
        let p = sum_matrix(&projector_sum_terms(&spec).unwrap(), spec.n_sites);
        assert!(p.max_abs_diff(&projector_sum_matrix(&sites(&spec))) < 1e-14);
        let psi = product_state(&spec).unwrap();
        assert!(vnorm(&p.apply(psi.amplitudes())) < 1e-14);
    }
}

#[test]
fn parent_matches_dense_triple_product() {
    for spec in [ProductStateSpec::afm(4), ProductStateSpec::theta(PI / 6.0, 4), ProductStateSpec::afm(5)] {
        let n = spec.n_sites;
        let h_terms = build_tfi(&TfiParams::new(n)).unwrap();
        let p_terms = projector_sum_terms(&spec).unwrap();
        let (e0, _) = classical_moments(&spec, &h_terms).unwrap();
        let hd = sum_matrix(&h_terms, n);
        let pd = projector_sum_matrix(&sites(&spec));
        for delta_inv in [0.0, 0.7, 3.0, 10.0] {
            let fp = FilterParams::from_delta_inv(e0, delta_inv).unwrap();
            let ph = build_parent(&h_terms, &p_terms, &fp).unwrap();
            let want = parent_matrix(&hd, &pd, e0, delta_inv);
            let tol = 1e-12 * (1.0 + delta_inv * delta_inv) * want.max_abs().max(1.0);
            assert!(dense_of(&ph.raw()).max_abs_diff(&want) < tol);
            let scaled = want.scale(C::from(1.0 / (1.0 + delta_inv * delta_inv)));
            assert!(dense_of(&ph.rescaled()).max_abs_diff(&scaled) < tol);
        }
    }
}

#[test]
fn filtered_state_has_lorentzian_weights() {
    let n = 4;
    let h = hamiltonian(n);
    let (vals, vecs) = jacobi_real(&h);
    for spec in [ProductStateSpec::afm(n), ProductStateSpec::theta(PI / 6.0, n)] {
        let psi = product_state(&spec).unwrap();
        let e0 = dense_moments(&h, psi.amplitudes()).0;
        let hs = assemble(&build_tfi(&TfiParams::new(n)).unwrap(), n).unwrap();
        for delta in [0.1, 0.5, 2.0] {
            let mut want = vec![ZERO; 1 << n];
            for (e, v) in vals.iter().zip(&vecs) {
                let c: C = v.iter().zip(psi.amplitudes()).map(|(a, b)| b * a).sum();
                let w = c / C::new(1.0, (e - e0) / delta);
                for (o, x) in want.iter_mut().zip(v) {
                    *o += w * x;
                }
            }
            let nrm = vnorm(&want);
            want.iter_mut().for_each(|x| *x /= nrm);
            let got = filtered_state(&hs, &psi, &FilterParams::from_delta(e0, delta).unwrap()).unwrap();
            let d: f64 = got.amplitudes().iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(d < 1e-9, "delta={delta}: {d}");
            // variance as a Lorentzian-weighted sum over the spectrum
            let weights: Vec<f64> = vals
                .iter()
                .zip(&vecs)
                .map(|(e, v)| {
                    let c: f64 = v.iter().zip(psi.amplitudes()).map(|(a, b)| a * b.re).sum();
                    c * c / (1.0 + ((e - e0) / delta).powi(2))
                })
                .collect();
            let z: f64 = weights.iter().sum();
            let mean: f64 = weights.iter().zip(&vals).map(|(w, e)| w * e).sum::<f64>() / z;
            let var: f64 = weights.iter().zip(&vals).map(|(w, e)| w * (e - mean).powi(2)).sum::<f64>() / z;
            let (_, measured) = energy_moments(&hs, &got).unwrap();
            assert!((measured - var).abs() < 1e-9 * var.max(1.0));
        }
    }
}

#[test]
fn filtered_state_is_parent_ground_state() {
    for spec in [ProductStateSpec::afm(6), ProductStateSpec::theta(PI / 6.0, 6)] {
        let n = spec.n_sites;
        let h_terms = build_tfi(&TfiParams::new(n)).unwrap();
        let (e0, _) = classical_moments(&spec, &h_terms).unwrap();
        let hd = sum_matrix(&h_terms, n);
        let pd = projector_sum_matrix(&sites(&spec));
        let hs = assemble(&h_terms, n).unwrap();
        let psi = product_state(&spec).unwrap();
        for delta in [0.1, 0.5, 1.0] {
            let fp = FilterParams::from_delta(e0, delta).unwrap();
            let phi = filtered_state(&hs, &psi, &fp).unwrap();
            let r = parent_matrix(&hd, &pd, e0, 1.0 / delta).apply(phi.amplitudes());
            assert!(vnorm(&r) < 1e-8, "delta={delta}: {}", vnorm(&r));
        }
    }
}

#[test]
fn gap_certificate_agrees_with_jacobi() {
    let spec = ProductStateSpec::theta(PI / 6.0, 4);
    let h_terms = build_tfi(&TfiParams::new(4)).unwrap();
    let (e0, _) = classical_moments(&spec, &h_terms).unwrap();
    let pd = projector_sum_matrix(&sites(&spec));
    let fp = FilterParams::from_delta(e0, 0.5).unwrap();
    let cert = gap_certificate(&build_parent(&h_terms, &projector_sum_terms(&spec).unwrap(), &fp).unwrap()).unwrap();
    let want = parent_matrix(&sum_matrix(&h_terms, 4), &pd, e0, 2.0);
    // the triple product is complex Hermitian; embed as a real symmetric matrix
    let n = want.n;
    let mut emb = Dense::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = want.at(i, j);
            emb.a[i * 2 * n + j] = C::from(z.re);
            emb.a[i * 2 * n + j + n] = C::from(-z.im);
            emb.a[(i + n) * 2 * n + j] = C::from(z.im);
            emb.a[(i + n) * 2 * n + j + n] = C::from(z.re);
        }
    }
    let (vals, _) = jacobi_real(&emb);
    // each eigenvalue appears twice in the embedding
    assert!((cert.lambda0 - vals[0]).abs() < 1e-9);
    assert!((cert.lambda1 - vals[2]).abs() < 1e-9);
    assert!(cert.gap_at_least_one());
}

#[test]
fn eta_matches_jacobi_spectrum_at_eight_sites() {
    let n = 8;
    let h_terms = build_tfi(&TfiParams::new(n)).unwrap();
    let (vals, _) = jacobi_real(&sum_matrix(&h_terms, n));
    let hs = assemble(&h_terms, n).unwrap();
    for spec in [ProductStateSpec::afm(n), ProductStateSpec::theta(PI / 6.0, n)] {
        let (e0, _) = classical_moments(&spec, &h_terms).unwrap();
        let want = vals.iter().map(|e| (e - e0).abs()).fold(f64::INFINITY, f64::min);
        assert!((discreteness_eta(&hs, e0).unwrap() - want).abs() < 1e-9);
    }
}

#[test]
fn classical_moments_on_a_theta_grid() {
    for n in [2, 3, 5] {
        let h_terms = build_tfi(&TfiParams::new(n)).unwrap();
        let hd = sum_matrix(&h_terms, n);
        for k in 0..=12 {
            let theta = PI / 2.0 * k as f64 / 12.0;
            let spec = ProductStateSpec::theta(theta, n);
            let (m, v) = classical_moments(&spec, &h_terms).unwrap();
            let (dm, dv) = dense_moments(&hd, &theta_vector(theta, n));
            assert!((m - dm).abs() < 1e-12 && (v - dv).abs() < 1e-12, "n={n} theta={theta}");
        }
        let (m, v) = classical_moments(&ProductStateSpec::afm(n), &h_terms).unwrap();
        let (dm, dv) = dense_moments(&hd, &afm_vector(n));
        assert!((m - dm).abs() < 1e-12 && (v - dv).abs() < 1e-12);
    }
}

#[test]
fn afm_energy_closed_form() {
    // every bond is antialigned; the staggered h field sums to −h for odd N
    for n in [4, 5, 8] {
        let h_terms = build_tfi(&TfiParams::new(n)).unwrap();
        let (e0, var) = classical_moments(&ProductStateSpec::afm(n), &h_terms).unwrap();
        let field = if n % 2 == 0 { 0.0 } else { -0.5 };
        assert!((e0 - (-(n as f64 - 1.0) + field)).abs() < 1e-12);
        assert!((var - n as f64 * 1.05f64.powi(2)).abs() < 1e-12);
    }
}

// Values from mpmath at 50 digits.
#[test]
fn variance_theory_frozen_values() {
    for (d, s, want) in [
        (1.0, 1.0, 0.5251352761609812),
        (0.5, 2.0, 0.48238412661098859),
        (3.0, 0.7, 0.61895559010096509),
    ] {
        let got = variance_theory(d, s).unwrap();
        assert!((got - want).abs() < 1e-12 * want, "({d},{s}): {got}");
    }
}

proptest! {
    #[test]
    fn variance_theory_is_below_both_limits(delta in 1e-3..1e3f64, s0 in 1e-2..1e2f64) {
        let v = variance_theory(delta, s0).unwrap();
        prop_assert!(v > 0.0);
        prop_assert!(v <= s0 * (1.0 + 1e-12));
        prop_assert!(v <= delta * (2.0 * s0 / PI).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn variance_theory_is_monotone_in_delta(delta in 1e-3..1e3f64, s0 in 1e-2..1e2f64) {
        prop_assert!(variance_theory(delta * 1.1, s0).unwrap() >= variance_theory(delta, s0).unwrap());
    }

    #[test]
    fn theta_moments_match_dense(theta in 0.0..PI, n in 2usize..5) {
        let h_terms = build_tfi(&TfiParams::new(n)).unwrap();
        let (m, v) = classical_moments(&ProductStateSpec::theta(theta, n), &h_terms).unwrap();
        let (dm, dv) = dense_moments(&sum_matrix(&h_terms, n), &theta_vector(theta, n));
        prop_assert!((m - dm).abs() < 1e-12 && (v - dv).abs() < 1e-12);
    }
}
