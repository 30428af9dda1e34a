//! Stepwise adiabatic preparation of the filtered state.
//!
//! Step `l` of `T/τ` applies `exp(−iτ 𝓗̃(s_l))` with `s_l = lτ/T`, where
//! `𝓗̃(s) = 𝓗(δ⁻¹(s)) / (1 + δ⁻²(s))` and `δ⁻¹(s)` follows the schedule.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::circuit::{pack_layers, TermDecomposition};
use crate::error::{check_dim, Error, Result};
use crate::filter::{expectation, filtered_state, FilterParams, ParentOperator};
use crate::operator::expm::expm_apply;
use crate::operator::pauli::PauliString;
use crate::operator::sparse::{assemble, LinearOperator, SparseOperator};
use crate::operator::state::{fidelity, StateVector};

/// Default number of evenly spaced checkpoints along a trajectory.
pub const DEFAULT_CHECKPOINTS: usize = 20;
/// Per-step Krylov tolerance.
pub const STEP_TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum ScheduleShape {
    /// `sin²(π/2 · sin²(sπ/2))`.
    #[default]
    SinSinSquared,
    Linear,
}

impl ScheduleShape {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleShape::SinSinSquared => "sin-sin-squared",
            ScheduleShape::Linear => "linear",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin-sin-squared" => Some(ScheduleShape::SinSinSquared),
            "linear" => Some(ScheduleShape::Linear),
            _ => None,
        }
    }

    fn eval(self, s: f64) -> f64 {
        match self {
            ScheduleShape::SinSinSquared => {
                let inner = (s * FRAC_PI_2).sin().powi(2);
                (FRAC_PI_2 * inner).sin().powi(2)
            }
            ScheduleShape::Linear => s,
        }
    }
}

/// `δ⁻¹(s) = shape(s) · δ⁻¹_max`.
pub fn schedule_value(shape: ScheduleShape, s: f64, delta_inv_max: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "schedule parameter {s} outside [0, 1]"
        )));
    }
    Ok(shape.eval(s) * delta_inv_max)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScheduleSpec {
    pub delta_inv_max: f64,
    pub total_time: f64,
    pub tau: f64,
    pub shape: ScheduleShape,
    steps: usize,
}

impl ScheduleSpec {
    /// `total_time / tau` must be a positive integer (to 1e−9 relative).
    pub fn new(
        delta_inv_max: f64,
        total_time: f64,
        tau: f64,
        shape: ScheduleShape,
    ) -> Result<Self> {
        if !(delta_inv_max >= 0.0) || !delta_inv_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad delta_inv_max {delta_inv_max}"
            )));
        }
        if !(tau > 0.0) || !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad schedule T={total_time}, tau={tau}"
            )));
        }
        let ratio = total_time / tau;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio {
            return Err(Error::InvalidArgument(format!(
                "T/tau = {ratio} is not a positive integer"
            )));
        }
        Ok(Self {
            delta_inv_max,
            total_time,
            tau,
            shape,
            steps: steps as usize,
        })
    }

    /// Shorthand from a step count.
    pub fn from_steps(delta_inv_max: f64, steps: usize, tau: f64) -> Result<Self> {
        Self::new(
            delta_inv_max,
            steps as f64 * tau,
            tau,
            ScheduleShape::default(),
        )
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Schedule parameter at the end of step `l` (1-based); `s_0 = 0`.
    pub fn s_at(&self, l: usize) -> f64 {
        l as f64 / self.steps as f64
    }

    pub fn delta_inv_at(&self, l: usize) -> f64 {
        self.shape.eval(self.s_at(l)) * self.delta_inv_max
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub s: f64,
    pub delta_inv: f64,
    /// `⟨𝓗(δ⁻¹_max)⟩` of the raw parent at the target width.
    pub parent_energy: f64,
    /// `⟨𝓗̃(s)⟩` of the instantaneous generator.
    pub instantaneous_energy: f64,
    /// Overlap with the exact filtered state at the target width.
    pub fidelity: f64,
    pub norm: f64,
    pub state: Option<StateVector>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub checkpoints: Vec<Checkpoint>,
    pub final_state: StateVector,
}

impl Trajectory {
    pub fn last(&self) -> &Checkpoint {
        self.checkpoints
            .last()
            .expect("trajectory has a final checkpoint")
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Record a checkpoint every this many steps (the last step always is).
    pub checkpoint_every: usize,
    pub expm_tol: f64,
    pub keep_states: bool,
    /// Precomputed filtered state at the target width.
    pub target: Option<StateVector>,
}

impl EvolveOptions {
    /// About [`DEFAULT_CHECKPOINTS`] evenly spaced checkpoints.
    pub fn for_schedule(sched: &ScheduleSpec) -> Self {
        Self {
            checkpoint_every: (sched.steps() / DEFAULT_CHECKPOINTS).max(1),
            expm_tol: STEP_TOL,
            keep_states: false,
            target: None,
        }
    }
}

struct Diagnostics<'a> {
    h: &'a SparseOperator,
    p: &'a SparseOperator,
    energy: f64,
    sched: ScheduleSpec,
    target: StateVector,
    keep_states: bool,
}

impl Diagnostics<'_> {
    fn record(&self, step: usize, v: &StateVector) -> Result<Checkpoint> {
        let delta_inv = self.sched.delta_inv_at(step);
        let target_fp = FilterParams::from_delta_inv(self.energy, self.sched.delta_inv_max)?;
        let now_fp = FilterParams::from_delta_inv(self.energy, delta_inv)?;
        Ok(Checkpoint {
            step,
            s: self.sched.s_at(step),
            delta_inv,
            parent_energy: expectation(&ParentOperator::raw(self.h, self.p, target_fp), v)?,
            instantaneous_energy: expectation(
                &ParentOperator::rescaled(self.h, self.p, now_fp),
                v,
            )?,
            fidelity: fidelity(v, &self.target)?,
            norm: v.norm(),
            state: self.keep_states.then(|| v.clone()),
        })
    }
}

fn run<F>(
    psi: &StateVector,
    h: &SparseOperator,
    p: &SparseOperator,
    energy: f64,
    sched: &ScheduleSpec,
    opts: &EvolveOptions,
    mut step_fn: F,
) -> Result<Trajectory>
where
    F: FnMut(usize, &StateVector) -> Result<StateVector>,
{
    check_dim(h.dim(), psi.dim())?;
    check_dim(h.dim(), p.dim())?;
    if opts.checkpoint_every == 0 {
        return Err(Error::InvalidArgument(
            "checkpoint_every must be >= 1".into(),
        ));
    }
    let target = match &opts.target {
        Some(t) => t.clone(),
        None => filtered_state(
            h,
            psi,
            &FilterParams::from_delta_inv(energy, sched.delta_inv_max)?,
        )?,
    };
    let diag = Diagnostics {
        h,
        p,
        energy,
        sched: *sched,
        target,
        keep_states: opts.keep_states,
    };
    let mut checkpoints = vec![diag.record(0, psi)?];
    let mut v = psi.clone();
    for l in 1..=sched.steps() {
        v = step_fn(l, &v)?;
        if l % opts.checkpoint_every == 0 || l == sched.steps() {
            checkpoints.push(diag.record(l, &v)?);
        }
    }
    Ok(Trajectory {
        checkpoints,
        final_state: v,
    })
}

/// Evolves `psi` (the ground state of `Σᵢ Pᵢ`) along the schedule.
pub fn adiabatic_evolve(
    psi: &StateVector,
    h_terms: &[PauliString],
    projector_terms: &[PauliString],
    energy: f64,
    sched: &ScheduleSpec,
    checkpoint_every: usize,
) -> Result<Trajectory> {
    let n = psi.n_sites();
    let h = assemble(h_terms, n)?;
    let p = assemble(projector_terms, n)?;
    let opts = EvolveOptions {
        checkpoint_every,
        ..EvolveOptions::for_schedule(sched)
    };
    adiabatic_evolve_with(psi, &h, &p, energy, sched, &opts)
}

/// Same as [`adiabatic_evolve`] on assembled operators. The generator is
/// applied matrix-free.
pub fn adiabatic_evolve_with(
    psi: &StateVector,
    h: &SparseOperator,
    p: &SparseOperator,
    energy: f64,
    sched: &ScheduleSpec,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    run(psi, h, p, energy, sched, opts, |l, v| {
        let fp = FilterParams::from_delta_inv(energy, sched.delta_inv_at(l))?;
        expm_apply(
            &ParentOperator::rescaled(h, p, fp),
            v,
            sched.tau,
            opts.expm_tol,
        )
    })
}

/// In-place `exp(−iθP) v = cos θ v − i sin θ P v` for a unit Pauli string.
pub fn apply_rotation(string: &PauliString, angle: f64, v: &mut [Complex64]) {
    let unit = string.with_coefficient(Complex64::new(1.0, 0.0));
    let (c, s) = (angle.cos(), angle.sin());
    let mis = Complex64::new(0.0, -s);
    let x = unit.x_mask() as usize;
    if x == 0 {
        for (b, amp) in v.iter_mut().enumerate() {
            let (_, ph) = unit.apply_to_basis(b);
            *amp *= c + mis * ph;
        }
        return;
    }
    for b in 0..v.len() {
        let b2 = b ^ x;
        if b2 < b {
            continue;
        }
        // P|b⟩ = p1|b2⟩, P|b2⟩ = p2|b⟩
        let (_, p1) = unit.apply_to_basis(b);
        let (_, p2) = unit.apply_to_basis(b2);
        let (a, a2) = (v[b], v[b2]);
        v[b] = c * a + mis * p2 * a2;
        v[b2] = c * a2 + mis * p1 * a;
    }
}

/// Order in which one Trotter step visits the strings.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum TrotterOrdering {
    /// Merged-string order of the decomposition.
    #[default]
    Sequential,
    /// Layer by layer as produced by the circuit scheduler.
    Layered,
}

/// First-order product `Π_γ exp(−iτ c_γ P_γ)` over the given real strings.
pub fn trotter_step(strings: &[PauliString], tau: f64, v: &mut StateVector) {
    for s in strings {
        apply_rotation(s, s.coefficient().re * tau, v.amplitudes_mut());
    }
}

fn ordered_strings(
    dec: &TermDecomposition,
    delta_inv: f64,
    ordering: TrotterOrdering,
) -> Vec<PauliString> {
    let strings = dec.strings_at(delta_inv, true);
    match ordering {
        TrotterOrdering::Sequential => strings,
        TrotterOrdering::Layered => pack_layers(&strings, 1.0)
            .into_iter()
            .flat_map(|l| l.rotations)
            .map(|r| r.string.with_coefficient(Complex64::new(r.angle, 0.0)))
            .collect(),
    }
}

/// First-order Trotterized version of [`adiabatic_evolve_with`]. Only
/// `order = 1` exists.
pub fn trotter_evolve(
    psi: &StateVector,
    dec: &TermDecomposition,
    sched: &ScheduleSpec,
    order: usize,
    ordering: TrotterOrdering,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if order != 1 {
        return Err(Error::InvalidArgument(format!(
            "Trotter order {order} not available"
        )));
    }
    let h = dec.hamiltonian()?;
    let p = dec.projector_sum()?;
    run(psi, &h, &p, dec.params.energy, sched, opts, |l, v| {
        let d = sched.delta_inv_at(l);
        let strings = ordered_strings(dec, d, ordering);
        let mut out = v.clone();
        trotter_step(&strings, sched.tau, &mut out);
        // the circuit drops the identity part; the simulation keeps its phase
        let phase = dec.identity_coefficient(d) / (1.0 + d * d) * sched.tau;
        out.scale(Complex64::from_polar(1.0, -phase));
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::decompose_parent;
    use crate::model::{
        build_tfi, product_state, projector_sum_terms, ProductStateSpec, TfiParams,
    };
    use crate::operator::pauli::Pauli;
    use crate::operator::state::energy_moments;

    #[test]
    fn schedule_endpoints_and_midpoint() {
        let shape = ScheduleShape::SinSinSquared;
        assert_eq!(schedule_value(shape, 0.0, 7.0).unwrap(), 0.0);
        assert!((schedule_value(shape, 1.0, 7.0).unwrap() - 7.0).abs() < 1e-15);
        assert!((schedule_value(shape, 0.5, 7.0).unwrap() - 3.5).abs() < 1e-14);
        assert!(schedule_value(shape, 1.5, 7.0).is_err());
    }

    #[test]
    fn schedule_is_monotone() {
        let mut last = 0.0;
        for k in 0..=1000 {
            let v = schedule_value(ScheduleShape::SinSinSquared, k as f64 / 1000.0, 1.0).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn step_count_must_be_integer() {
        assert_eq!(
            ScheduleSpec::new(1.0, 10.0, 0.1, ScheduleShape::default())
                .unwrap()
                .steps(),
            100
        );
        assert!(ScheduleSpec::new(1.0, 1.05, 0.1, ScheduleShape::default()).is_err());
        assert!(ScheduleSpec::new(1.0, 1.0, 0.0, ScheduleShape::default()).is_err());
    }

    fn setup(n: usize) -> (StateVector, Vec<PauliString>, Vec<PauliString>, f64) {
        let spec = ProductStateSpec::afm(n);
        let h = build_tfi(&TfiParams::new(n)).unwrap();
        let p = projector_sum_terms(&spec).unwrap();
        let psi = product_state(&spec).unwrap();
        let (e0, _) = energy_moments(&assemble(&h, n).unwrap(), &psi).unwrap();
        (psi, h, p, e0)
    }

    #[test]
    fn no_filter_leaves_state_alone() {
        let (psi, h, p, e0) = setup(4);
        let sched = ScheduleSpec::from_steps(0.0, 10, 0.1).unwrap();
        let traj = adiabatic_evolve(&psi, &h, &p, e0, &sched, 1).unwrap();
        assert_eq!(traj.checkpoints.len(), 11);
        let last = traj.last();
        assert!((last.fidelity - 1.0).abs() < 1e-12);
        assert!(last.parent_energy.abs() < 1e-12);
    }

    #[test]
    fn checkpoints_increase_and_norm_holds() {
        let (psi, h, p, e0) = setup(4);
        let sched = ScheduleSpec::from_steps(2.0, 40, 0.1).unwrap();
        let traj = adiabatic_evolve(&psi, &h, &p, e0, &sched, 7).unwrap();
        let s: Vec<f64> = traj.checkpoints.iter().map(|c| c.s).collect();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*s.last().unwrap(), 1.0);
        for c in &traj.checkpoints {
            assert!((c.norm - 1.0).abs() < 1e-9);
            assert!(c.instantaneous_energy >= -1e-9 && c.parent_energy >= -1e-9);
        }
    }

    #[test]
    fn rotation_matches_definition() {
        let s = PauliString::real(2, 1.0, &[(0, Pauli::Y), (1, Pauli::X)]).unwrap();
        let v0: Vec<Complex64> = (0..4)
            .map(|k| Complex64::new(k as f64 + 1.0, 0.5 * k as f64))
            .collect();
        let mut v = v0.clone();
        let th = 0.37;
        apply_rotation(&s, th, &mut v);
        let mut pv = vec![Complex64::new(0.0, 0.0); 4];
        s.apply_add(&v0, &mut pv);
        for k in 0..4 {
            let want = th.cos() * v0[k] + Complex64::new(0.0, -th.sin()) * pv[k];
            assert!((v[k] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn commuting_terms_trotterize_exactly() {
        let (_, h, p, e0) = setup(4);
        let fp = FilterParams::from_delta_inv(e0, 0.0).unwrap();
        let dec = decompose_parent(&h, &p, &fp).unwrap();
        let sched = ScheduleSpec::from_steps(0.0, 5, 0.3).unwrap();
        let mut opts = EvolveOptions::for_schedule(&sched);
        opts.keep_states = true;
        // start away from the ground state so the evolution is nontrivial
        let start = StateVector::from_amplitudes(vec![Complex64::new(0.25, 0.0); 16]).unwrap();
        let a =
            trotter_evolve(&start, &dec, &sched, 1, TrotterOrdering::Sequential, &opts).unwrap();
        let hs = assemble(&h, 4).unwrap();
        let ps = assemble(&p, 4).unwrap();
        let b = adiabatic_evolve_with(&start, &hs, &ps, e0, &sched, &opts).unwrap();
        assert!(a.final_state.distance(&b.final_state).unwrap() < 1e-9);
    }

    #[test]
    fn single_string_step_is_exact() {
        let n = 3;
        let s = PauliString::real(n, 0.8, &[(1, Pauli::X), (2, Pauli::Z)]).unwrap();
        let op = assemble(std::slice::from_ref(&s), n).unwrap();
        let v =
            StateVector::from_amplitudes(vec![Complex64::new(0.5f64.powf(1.5), 0.0); 8]).unwrap();
        let mut t = v.clone();
        trotter_step(std::slice::from_ref(&s), 0.4, &mut t);
        let e = expm_apply(&op, &v, 0.4, 1e-13).unwrap();
        assert!(t.distance(&e).unwrap() < 1e-12);
    }

    #[test]
    fn higher_order_rejected() {
        let (psi, h, p, e0) = setup(3);
        let dec =
            decompose_parent(&h, &p, &FilterParams::from_delta_inv(e0, 1.0).unwrap()).unwrap();
        let sched = ScheduleSpec::from_steps(1.0, 2, 0.1).unwrap();
        let opts = EvolveOptions::for_schedule(&sched);
        assert!(trotter_evolve(&psi, &dec, &sched, 2, TrotterOrdering::Sequential, &opts).is_err());
    }
}
