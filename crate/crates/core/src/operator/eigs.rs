//! Extremal eigenpairs of Hermitian operators by restarted Lanczos.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::tridiagonal_eigen;
use super::lanczos::{Lanczos, Step};
use super::sparse::LinearOperator;
use super::state::{axpy, norm, StateVector};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Which {
    Lowest,
    Highest,
}

#[derive(Clone, Debug)]
pub struct EigOptions {
    /// Required true residual `‖Av − λv‖` for every returned pair.
    pub tol: f64,
    /// Basis size before an explicit restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Seed for the random start vector and breakdown injections.
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_basis: 200,
            max_restarts: 40,
            seed: 0x5eed,
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

/// The `k` lowest or highest eigenpairs, ordered from the extreme inward.
pub fn extremal_eigs<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    which: Which,
) -> Result<Vec<(f64, StateVector)>> {
    extremal_eigs_with(op, k, which, &EigOptions::default())
}

pub fn extremal_eigs_with<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    which: Which,
    opts: &EigOptions,
) -> Result<Vec<(f64, StateVector)>> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a {dim}-dimensional operator"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let m_max = dim.min(opts.max_basis.max(k + 20));
    let mut start = random_vector(&mut rng, dim);
    let mut best_residual = f64::INFINITY;
    let mut total_iters = 0;

    for _restart in 0..=opts.max_restarts {
        let mut lz = Lanczos::new(op, &start);
        loop {
            let step = lz.step();
            total_iters += 1;
            let m = lz.len();
            if step == Step::Breakdown && m < dim {
                // keep exploring; wanted eigenvalues may lie outside this invariant subspace
                let mut injected = false;
                for _ in 0..4 {
                    if lz.inject(&random_vector(&mut rng, dim)) {
                        injected = true;
                        break;
                    }
                }
                if !injected {
                    return Err(Error::NonConvergence {
                        what: "Lanczos injection",
                        iterations: total_iters,
                        residual: best_residual,
                    });
                }
            }
            let full = m >= m_max || m == dim;
            if m < k || !(full || m % 10 == 0) {
                continue;
            }
            let (vals, vecs) = tridiagonal_eigen(&lz.alpha, &lz.beta)?;
            let picks: Vec<usize> = match which {
                Which::Lowest => (0..k).collect(),
                Which::Highest => (0..k).map(|i| m - 1 - i).collect(),
            };
            let coupling = lz.beta[m - 1];
            let estimate = picks
                .iter()
                .map(|&i| (coupling * vecs[(m - 1, i)]).abs())
                .fold(0.0, f64::max);
            if estimate <= opts.tol || full {
                let pairs: Vec<(f64, Vec<Complex64>)> = picks
                    .iter()
                    .map(|&i| {
                        let coeffs: Vec<Complex64> =
                            (0..m).map(|j| Complex64::new(vecs[(j, i)], 0.0)).collect();
                        (vals[i], lz.combine(&coeffs))
                    })
                    .collect();
                let mut worst: f64 = 0.0;
                let mut av = vec![Complex64::new(0.0, 0.0); dim];
                for (lam, v) in &pairs {
                    op.apply(v, &mut av);
                    axpy(Complex64::new(-lam, 0.0), v, &mut av);
                    worst = worst.max(norm(&av));
                }
                best_residual = best_residual.min(worst);
                if worst <= opts.tol {
                    return pairs
                        .into_iter()
                        .map(|(lam, v)| Ok((lam, StateVector::from_amplitudes(v)?.normalized()?)))
                        .collect();
                }
                if full {
                    start = vec![Complex64::new(0.0, 0.0); dim];
                    for (_, v) in &pairs {
                        axpy(Complex64::new(1.0, 0.0), v, &mut start);
                    }
                    break;
                }
            }
        }
    }
    Err(Error::NonConvergence {
        what: "Lanczos eigensolver",
        iterations: total_iters,
        residual: best_residual,
    })
}
