//! Action of `exp(−i t A)` on a vector for Hermitian `A`.
//!
//! Each substep builds a Lanczos basis of at most [`KRYLOV_MAX_DIM`] vectors
//! and exponentiates the projected tridiagonal matrix exactly. The a-posteriori
//! estimate `β_m |[exp(−i dt T_m)]_{m,1}| ‖v‖` is compared against the share
//! `tol · ‖v‖ · dt / t` of the error budget; if the full remaining time does
//! not fit, the substep is halved until it does.

use num_complex::Complex64;

use super::dense::tridiagonal_eigen;
use super::lanczos::{Lanczos, Step};
use super::sparse::LinearOperator;
use super::state::StateVector;
use crate::error::{check_dim, Error, Result};

pub const KRYLOV_MAX_DIM: usize = 64;

#[derive(Clone, Debug)]
pub struct ExpmOptions {
    pub max_dim: usize,
    /// Convergence is tested every this many Lanczos steps.
    pub check_every: usize,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        Self {
            max_dim: KRYLOV_MAX_DIM,
            check_every: 4,
        }
    }
}

/// `exp(−i t A) v`, accurate to `tol · ‖v‖` by the Krylov error estimate.
pub fn expm_apply<A: LinearOperator + ?Sized>(
    op: &A,
    v: &StateVector,
    t: f64,
    tol: f64,
) -> Result<StateVector> {
    expm_apply_with(op, v, t, tol, &ExpmOptions::default())
}

struct Projected {
    vals: Vec<f64>,
    vecs: faer::Mat<f64>,
}

impl Projected {
    /// `exp(−i dt T) e₁` in the Lanczos basis.
    fn propagate(&self, dt: f64) -> Vec<Complex64> {
        let m = self.vals.len();
        let phases: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(self.vecs[(0, k)], -dt * self.vals[k]))
            .collect();
        (0..m)
            .map(|j| {
                phases
                    .iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (k, p)| {
                        acc + p * self.vecs[(j, k)]
                    })
            })
            .collect()
    }

    fn last_component(&self, dt: f64) -> f64 {
        let m = self.vals.len();
        (0..m)
            .fold(Complex64::new(0.0, 0.0), |acc, k| {
                acc + Complex64::from_polar(
                    self.vecs[(0, k)] * self.vecs[(m - 1, k)],
                    -dt * self.vals[k],
                )
            })
            .norm()
    }
}

pub fn expm_apply_with<A: LinearOperator + ?Sized>(
    op: &A,
    v: &StateVector,
    t: f64,
    tol: f64,
    opts: &ExpmOptions,
) -> Result<StateVector> {
    check_dim(op.dim(), v.dim())?;
    if !op.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    if !(tol > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bad expm arguments t={t}, tol={tol}"
        )));
    }
    let vnorm = v.norm();
    if t == 0.0 || vnorm == 0.0 {
        return Ok(v.clone());
    }
    let dim = op.dim();
    let mut current = v.amplitudes().to_vec();
    let mut remaining = t;
    let budget = |dt: f64| tol * vnorm * (dt / t).abs();

    while remaining != 0.0 {
        let cnorm = super::state::norm(&current);
        let mut lz = Lanczos::new(op, &current);
        let (dt, coeffs) = loop {
            let step = lz.step();
            let m = lz.len();
            let exact = step == Step::Breakdown || m >= dim;
            let at_cap = m >= opts.max_dim;
            if !(exact || at_cap || m % opts.check_every == 0) {
                continue;
            }
            let (vals, vecs) = tridiagonal_eigen(&lz.alpha, &lz.beta)?;
            let proj = Projected { vals, vecs };
            if exact {
                break (remaining, proj.propagate(remaining));
            }
            let beta = lz.beta[m - 1];
            let estimate = |dt: f64| beta * proj.last_component(dt) * cnorm;
            if estimate(remaining) <= budget(remaining) {
                break (remaining, proj.propagate(remaining));
            }
            if at_cap {
                let mut dt = remaining / 2.0;
                while estimate(dt) > budget(dt) {
                    dt /= 2.0;
                    if dt.abs() < t.abs() * 1e-12 {
                        return Err(Error::ToleranceUnreachable {
                            tol,
                            max_dim: opts.max_dim,
                        });
                    }
                }
                break (dt, proj.propagate(dt));
            }
        };
        let scaled: Vec<Complex64> = coeffs.iter().map(|c| c * cnorm).collect();
        current = lz.combine(&scaled);
        remaining -= dt;
        if (remaining / t).abs() < 1e-15 {
            remaining = 0.0;
        }
    }
    StateVector::from_amplitudes(current)
}
