//! Dense reference implementations built from 2×2 matrices and Kronecker
//! products. Nothing here calls into the library's operator code.
#![allow(dead_code)]

use lorentz_core::operator::pauli::{Pauli, PauliString};
use lorentz_core::Complex64 as C;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![ZERO; n * n] }
    }

    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = ONE;
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> C {
        self.a[r * self.n + c]
    }

    pub fn kron(&self, o: &Dense) -> Dense {
        let n = self.n * o.n;
        let mut m = Dense::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..o.n {
                    for l in 0..o.n {
                        m.a[(i * o.n + k) * n + j * o.n + l] = self.at(i, j) * o.at(k, l);
                    }
                }
            }
        }
        m
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut m = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.at(i, k);
                if x == ZERO {
                    continue;
                }
                for j in 0..n {
                    m.a[i * n + j] += x * o.at(k, j);
                }
            }
        }
        m
    }

    pub fn add(&self, o: &Dense, s: C) -> Dense {
        Dense {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + s * y).collect(),
        }
    }

    pub fn scale(&self, s: C) -> Dense {
        Dense {
            n: self.n,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn dagger(&self) -> Dense {
        let n = self.n;
        let mut m = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[j * n + i] = self.at(i, j).conj();
            }
        }
        m
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, o: &Dense) -> f64 {
        self.a.iter().zip(&o.a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

pub fn pauli2(p: Pauli) -> Dense {
    let i = C::new(0.0, 1.0);
    let a = match p {
        Pauli::I => [ONE, ZERO, ZERO, ONE],
        Pauli::X => [ZERO, ONE, ONE, ZERO],
        Pauli::Y => [ZERO, -i, i, ZERO],
        Pauli::Z => [ONE, ZERO, ZERO, -ONE],
    };
    Dense { n: 2, a: a.to_vec() }
}

/// Kronecker product over sites, site 0 leftmost.
pub fn string_matrix(s: &PauliString) -> Dense {
    let mut m = Dense::eye(1);
    for p in s.factors() {
        m = m.kron(&pauli2(p));
    }
    m.scale(s.coefficient())
}

pub fn sum_matrix(terms: &[PauliString], n_sites: usize) -> Dense {
    let mut m = Dense::zeros(1 << n_sites);
    for t in terms {
        m = m.add(&string_matrix(t), ONE);
    }
    m
}

pub fn product_vector(sites: &[(f64, f64)]) -> Vec<C> {
    let mut v = vec![ONE];
    for &(a0, a1) in sites {
        v = v.iter().flat_map(|x| [x * a0, x * a1]).collect();
    }
    v
}

pub fn afm_vector(n: usize) -> Vec<C> {
    product_vector(&(0..n).map(|i| if i % 2 == 0 { (0.0, 1.0) } else { (1.0, 0.0) }).collect::<Vec<_>>())
}

pub fn theta_vector(theta: f64, n: usize) -> Vec<C> {
    product_vector(&vec![(theta.cos(), theta.sin()); n])
}

/// Rank-one site projectors `(I − n·σ)/2` summed over the chain.
pub fn projector_sum_matrix(sites: &[(f64, f64)]) -> Dense {
    let n = sites.len();
    let mut total = Dense::zeros(1 << n);
    for (k, &(a0, a1)) in sites.iter().enumerate() {
        // |φ⊥⟩ = (−a1, a0)
        let perp = Dense {
            n: 2,
            a: vec![C::from(a1 * a1), C::from(-a1 * a0), C::from(-a0 * a1), C::from(a0 * a0)],
        };
        let id = pauli2(Pauli::I);
        let mut m = Dense::eye(1);
        for j in 0..n {
            m = m.kron(if j == k { &perp } else { &id });
        }
        total = total.add(&m, ONE);
    }
    total
}

pub fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &[C]) -> f64 {
    dot(a, a).re.sqrt()
}

/// Cyclic Jacobi for a Hermitian matrix with negligible imaginary part.
/// Returns ascending eigenvalues and eigenvectors as columns.
pub fn jacobi_real(m: &Dense) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.n;
    assert!(m.a.iter().all(|x| x.im.abs() < 1e-12), "jacobi_real needs a real matrix");
    let mut a: Vec<f64> = m.a.iter().map(|x| x.re).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let vals = idx.iter().map(|&i| a[i * n + i]).collect();
    let vecs = idx.iter().map(|&i| (0..n).map(|k| v[k * n + i]).collect()).collect();
    (vals, vecs)
}

/// `exp(−i t M)` by scaling and squaring a Taylor series.
pub fn expm_minus_i(m: &Dense, t: f64) -> Dense {
    let a = m.scale(C::new(0.0, -t));
    let norm = a.max_abs() * a.n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let a = a.scale(C::from(0.5f64.powi(squarings as i32)));
    let mut result = Dense::eye(a.n);
    let mut term = Dense::eye(a.n);
    for k in 1..40 {
        term = term.mul(&a).scale(C::from(1.0 / k as f64));
        result = result.add(&term, ONE);
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.mul(&result);
    }
    result
}

/// `F†PF` with `F = 1 + i δ⁻¹ (H − E)`.
pub fn parent_matrix(h: &Dense, p: &Dense, energy: f64, delta_inv: f64) -> Dense {
    let k = h.add(&Dense::eye(h.n), C::from(-energy));
    let f = Dense::eye(h.n).add(&k, C::new(0.0, delta_inv));
    f.dagger().mul(&p.mul(&f))
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
