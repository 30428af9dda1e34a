use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lorentz_core::adiabatic::{adiabatic_evolve_with, EvolveOptions, ScheduleSpec};
use lorentz_core::circuit::{decompose_parent, depth_report as core_depth_report};
use lorentz_core::filter::{self, FilterParams, ParentHamiltonian};
use lorentz_core::harness::{self, ExperimentConfig, HarnessError};
use lorentz_core::model::{self, ProductStateSpec, TfiParams};
use lorentz_core::operator::sparse::{assemble, SparseOperator};
use lorentz_core::operator::state::{energy_moments, entanglement_entropy, StateVector};
use lorentz_core::Complex64;

fn err(e: lorentz_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn harness_err(e: HarnessError) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// AFM when `theta` is None.
fn spec(n: usize, theta: Option<f64>) -> ProductStateSpec {
    match theta {
        Some(t) => ProductStateSpec::theta(t, n),
        None => ProductStateSpec::afm(n),
    }
}

struct Setup {
    h_terms: Vec<lorentz_core::operator::pauli::PauliString>,
    p_terms: Vec<lorentz_core::operator::pauli::PauliString>,
    h: SparseOperator,
    p: SparseOperator,
    psi: StateVector,
    e0: f64,
}

fn setup(n: usize, theta: Option<f64>) -> PyResult<Setup> {
    let s = spec(n, theta);
    let h_terms = model::build_tfi(&TfiParams::new(n)).map_err(err)?;
    let p_terms = model::projector_sum_terms(&s).map_err(err)?;
    let (e0, _) = model::classical_moments(&s, &h_terms).map_err(err)?;
    Ok(Setup {
        h: assemble(&h_terms, n).map_err(err)?,
        p: assemble(&p_terms, n).map_err(err)?,
        psi: model::product_state(&s).map_err(err)?,
        h_terms,
        p_terms,
        e0,
    })
}

/// Terms of the chain as `(label, coefficient)` pairs.
#[pyfunction]
#[pyo3(signature = (n, j=1.0, g=-1.05, h=0.5))]
fn tfi_terms(n: usize, j: f64, g: f64, h: f64) -> PyResult<Vec<(String, f64)>> {
    let terms = model::build_tfi(&TfiParams { n_sites: n, j, g, h }).map_err(err)?;
    Ok(terms.iter().map(|t| (t.label(), t.coefficient().re)).collect())
}

/// `(E0, sigma0^2)` of the product state.
#[pyfunction]
#[pyo3(signature = (n, theta=None))]
fn classical_moments(n: usize, theta: Option<f64>) -> PyResult<(f64, f64)> {
    let terms = model::build_tfi(&TfiParams::new(n)).map_err(err)?;
    model::classical_moments(&spec(n, theta), &terms).map_err(err)
}

#[pyfunction]
fn variance_theory(delta: f64, sigma0_sq: f64) -> PyResult<f64> {
    filter::variance_theory(delta, sigma0_sq).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (theta, g=-1.05, h=0.5))]
fn theta_energy_density(theta: f64, g: f64, h: f64) -> f64 {
    model::theta_energy_density(theta, g, h)
}

/// Normalised filtered state, centred on the product-state energy.
#[pyfunction]
#[pyo3(signature = (n, delta, theta=None))]
fn filtered_state(n: usize, delta: f64, theta: Option<f64>) -> PyResult<Vec<Complex64>> {
    let s = setup(n, theta)?;
    let fp = FilterParams::from_delta(s.e0, delta).map_err(err)?;
    let phi = filter::filtered_state(&s.h, &s.psi, &fp).map_err(err)?;
    Ok(phi.into_amplitudes())
}

/// `(mean, variance)` of the energy in the filtered state.
#[pyfunction]
#[pyo3(signature = (n, delta, theta=None))]
fn filtered_moments(n: usize, delta: f64, theta: Option<f64>) -> PyResult<(f64, f64)> {
    let s = setup(n, theta)?;
    let fp = FilterParams::from_delta(s.e0, delta).map_err(err)?;
    let phi = filter::filtered_state(&s.h, &s.psi, &fp).map_err(err)?;
    energy_moments(&s.h, &phi).map_err(err)
}

/// `(min eig(H^2 - H), lambda0, lambda1, passed)` of the parent Hamiltonian.
#[pyfunction]
#[pyo3(signature = (n, delta, theta=None))]
fn gap_certificate(n: usize, delta: f64, theta: Option<f64>) -> PyResult<(f64, f64, f64, bool)> {
    let s = setup(n, theta)?;
    let fp = FilterParams::from_delta(s.e0, delta).map_err(err)?;
    let ph = ParentHamiltonian::new(s.h, s.p, fp).map_err(err)?;
    let c = filter::gap_certificate(&ph).map_err(err)?;
    Ok((c.min_h2_minus_h, c.lambda0, c.lambda1, c.gap_at_least_one()))
}

/// Half-chain entropy (nats) of the filtered state at inverse width `delta_inv`.
#[pyfunction]
#[pyo3(signature = (n, delta_inv, theta=None))]
fn half_chain_entropy(n: usize, delta_inv: f64, theta: Option<f64>) -> PyResult<f64> {
    let s = setup(n, theta)?;
    let fp = FilterParams::from_delta_inv(s.e0, delta_inv).map_err(err)?;
    let phi = filter::filtered_state(&s.h, &s.psi, &fp).map_err(err)?;
    entanglement_entropy(&phi, n / 2).map_err(err)
}

/// `(per_step, total)` layer counts of the Trotterized preparation.
#[pyfunction]
#[pyo3(signature = (n, delta, steps, theta=None))]
fn depth_report(n: usize, delta: f64, steps: usize, theta: Option<f64>) -> PyResult<(usize, usize)> {
    let s = setup(n, theta)?;
    let fp = FilterParams::from_delta(s.e0, delta).map_err(err)?;
    let dec = decompose_parent(&s.h_terms, &s.p_terms, &fp).map_err(err)?;
    Ok(core_depth_report(steps, &dec))
}

/// `(fidelity, parent_energy)` at the end of the adiabatic schedule.
#[pyfunction]
#[pyo3(signature = (n, delta, tau, steps, theta=None))]
fn adiabatic_endpoint(
    py: Python<'_>,
    n: usize,
    delta: f64,
    tau: f64,
    steps: usize,
    theta: Option<f64>,
) -> PyResult<(f64, f64)> {
    let s = setup(n, theta)?;
    let sched = ScheduleSpec::from_steps(1.0 / delta, steps, tau).map_err(err)?;
    let opts = EvolveOptions::for_schedule(&sched);
    let traj = py
        .detach(|| adiabatic_evolve_with(&s.psi, &s.h, &s.p, s.e0, &sched, &opts))
        .map_err(err)?;
    let last = traj.last();
    Ok((last.fidelity, last.parent_energy))
}

/// Config text of a named preset.
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    harness::preset(name)
        .map(|c| c.to_string())
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name}")))
}

/// Runs a sweep from config text; returns `(rows, flagged)`.
#[pyfunction]
#[pyo3(signature = (config, output=None, threads=None))]
fn run(py: Python<'_>, config: &str, output: Option<PathBuf>, threads: Option<usize>) -> PyResult<(usize, usize)> {
    let mut cfg = ExperimentConfig::parse(config).map_err(|e| harness_err(e.into()))?;
    if let Some(o) = output {
        cfg.output = o;
    }
    if let Some(t) = threads {
        cfg.threads = t;
    }
    let s = py.detach(|| harness::run(&cfg, false)).map_err(harness_err)?;
    Ok((s.rows, s.flagged))
}

#[pymodule]
fn lorentz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tfi_terms, m)?)?;
    m.add_function(wrap_pyfunction!(classical_moments, m)?)?;
    m.add_function(wrap_pyfunction!(variance_theory, m)?)?;
    m.add_function(wrap_pyfunction!(theta_energy_density, m)?)?;
    m.add_function(wrap_pyfunction!(filtered_state, m)?)?;
    m.add_function(wrap_pyfunction!(filtered_moments, m)?)?;
    m.add_function(wrap_pyfunction!(gap_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(half_chain_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(depth_report, m)?)?;
    m.add_function(wrap_pyfunction!(adiabatic_endpoint, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
