//! Sweep runner: expands a configuration into points, evaluates them on a
//! bounded pool and streams one CSV row per point in grid order.

pub mod config;
pub mod presets;

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{ConfigError, Cut, ExperimentConfig, ExperimentKind};
pub use presets::{preset, PRESET_NAMES};

use crate::adiabatic::{adiabatic_evolve_with, EvolveOptions, ScheduleSpec};
use crate::circuit::{decompose_parent, depth_report, export_circuit, schedule_layers};
use crate::filter::{
    dense_spectrum, eta_from_spectrum, filtered_state, gap_certificate, variance_theory,
    FilterParams, ParentHamiltonian,
};
use crate::model::{
    build_tfi, classical_moments, product_state, projector_sum_terms, theta_energy_density,
    theta_grid, ProductKind, ProductStateSpec, TfiParams,
};
use crate::operator::pauli::PauliString;
use crate::operator::sparse::{assemble, SparseOperator};
use crate::operator::state::{energy_moments, entanglement_entropy, StateVector};

/// CSV header, in column order.
pub const COLUMNS: [&str; 20] = [
    "N",
    "theta_or_afm",
    "delta",
    "sigma0_sq",
    "sigma_L_sq_measured",
    "sigma_L_sq_theory",
    "E0",
    "fidelity",
    "parent_energy",
    "parent_energy_rescaled",
    "T",
    "tau",
    "entropy",
    "depth",
    "eta",
    "gap_min_h2_minus_h",
    "gap_lambda1",
    "passed",
    "wall_time",
    "status",
];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("unknown preset {0}")]
    UnknownPreset(String),
    #[error("cannot resume {path}: {msg}")]
    Resume { path: PathBuf, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerics(#[from] crate::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::UnknownPreset(_) => 2,
            _ => 1,
        }
    }
}

/// One CSV row; `None` fields are written empty.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    pub n_sites: Option<usize>,
    pub state_label: String,
    pub delta: Option<f64>,
    pub sigma0_sq: Option<f64>,
    pub sigma_l_sq_measured: Option<f64>,
    pub sigma_l_sq_theory: Option<f64>,
    pub e0: Option<f64>,
    pub fidelity: Option<f64>,
    pub parent_energy: Option<f64>,
    pub parent_energy_rescaled: Option<f64>,
    pub total_time: Option<f64>,
    pub tau: Option<f64>,
    pub entropy: Option<f64>,
    pub depth: Option<usize>,
    pub eta: Option<f64>,
    pub gap_min_h2_minus_h: Option<f64>,
    pub gap_lambda1: Option<f64>,
    pub passed: Option<bool>,
    pub wall_time: Option<f64>,
    /// `ok`, or the reason the point was flagged.
    pub status: String,
}

fn real(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

impl Record {
    pub fn flagged(&self) -> bool {
        self.status != "ok"
    }

    pub fn to_csv_line(&self) -> String {
        let status = if self.status.contains([',', '"', '\n']) {
            format!(
                "\"{}\"",
                self.status.replace('"', "\"\"").replace('\n', " ")
            )
        } else {
            self.status.clone()
        };
        let fields = [
            self.n_sites.map(|n| n.to_string()).unwrap_or_default(),
            self.state_label.clone(),
            real(self.delta),
            real(self.sigma0_sq),
            real(self.sigma_l_sq_measured),
            real(self.sigma_l_sq_theory),
            real(self.e0),
            real(self.fidelity),
            real(self.parent_energy),
            real(self.parent_energy_rescaled),
            real(self.total_time),
            real(self.tau),
            real(self.entropy),
            self.depth.map(|d| d.to_string()).unwrap_or_default(),
            real(self.eta),
            real(self.gap_min_h2_minus_h),
            real(self.gap_lambda1),
            self.passed.map(|p| p.to_string()).unwrap_or_default(),
            real(self.wall_time),
            status,
        ];
        fields.join(",")
    }
}

pub fn csv_header() -> String {
    COLUMNS.join(",")
}

/// One unit of work; the grid order of these is the row order.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Point {
    Variance {
        n: usize,
        delta: f64,
    },
    Adiabatic {
        n: usize,
        delta: f64,
        steps: usize,
    },
    Entropy {
        n: usize,
        delta_inv: f64,
    },
    Theta {
        theta: f64,
    },
    Gap {
        n: usize,
        delta: f64,
    },
    Depth {
        n: usize,
        delta_inv: f64,
        index: usize,
    },
}

impl Point {
    fn n_sites(&self) -> Option<usize> {
        match *self {
            Point::Variance { n, .. }
            | Point::Adiabatic { n, .. }
            | Point::Entropy { n, .. }
            | Point::Gap { n, .. }
            | Point::Depth { n, .. } => Some(n),
            Point::Theta { .. } => None,
        }
    }
}

/// Points in row order: chain length outermost, then the sweep grid.
pub fn expand(cfg: &ExperimentConfig) -> Vec<Point> {
    let mut out = Vec::new();
    if cfg.kind == ExperimentKind::ThetaCurve {
        return theta_grid(cfg.theta_points)
            .into_iter()
            .map(|theta| Point::Theta { theta })
            .collect();
    }
    for &n in &cfg.n_sites {
        match cfg.kind {
            ExperimentKind::VarianceSweep => {
                out.extend(cfg.deltas.iter().map(|&delta| Point::Variance { n, delta }))
            }
            ExperimentKind::GapAudit => {
                out.extend(cfg.deltas.iter().map(|&delta| Point::Gap { n, delta }))
            }
            ExperimentKind::AdiabaticSweep => {
                for &delta in &cfg.deltas {
                    out.extend(
                        cfg.steps
                            .iter()
                            .map(|&steps| Point::Adiabatic { n, delta, steps }),
                    );
                }
            }
            ExperimentKind::EntropySweep => out.extend(
                cfg.delta_invs
                    .iter()
                    .map(|&delta_inv| Point::Entropy { n, delta_inv }),
            ),
            ExperimentKind::DepthAudit => out.extend(cfg.delta_invs.iter().enumerate().map(
                |(index, &delta_inv)| Point::Depth {
                    n,
                    delta_inv,
                    index,
                },
            )),
            ExperimentKind::ThetaCurve => unreachable!(),
        }
    }
    out
}

/// Per-chain objects shared by every point of that length.
struct Chain {
    h_terms: Vec<PauliString>,
    p_terms: Vec<PauliString>,
    h: SparseOperator,
    p: SparseOperator,
    psi: StateVector,
    e0: f64,
    sigma0_sq: f64,
    spectrum: Option<Vec<f64>>,
}

impl Chain {
    fn build(cfg: &ExperimentConfig, n: usize) -> crate::Result<Self> {
        let spec = ProductStateSpec {
            kind: cfg.state,
            n_sites: n,
        };
        let h_terms = build_tfi(&TfiParams {
            n_sites: n,
            ..cfg.model.clone()
        })?;
        let p_terms = projector_sum_terms(&spec)?;
        let (e0, sigma0_sq) = classical_moments(&spec, &h_terms)?;
        let h = assemble(&h_terms, n)?;
        let p = assemble(&p_terms, n)?;
        let spectrum = if cfg.kind == ExperimentKind::VarianceSweep && n <= cfg.dense_max_sites {
            Some(dense_spectrum(&h)?)
        } else {
            None
        };
        Ok(Self {
            psi: product_state(&spec)?,
            h_terms,
            p_terms,
            h,
            p,
            e0,
            sigma0_sq,
            spectrum,
        })
    }
}

fn state_label(kind: ProductKind) -> String {
    match kind {
        ProductKind::Afm => "afm".into(),
        ProductKind::Theta(t) => format!("{t:.16e}"),
    }
}

fn evaluate(cfg: &ExperimentConfig, chain: Option<&Chain>, point: &Point) -> crate::Result<Record> {
    let mut r = Record {
        n_sites: point.n_sites(),
        state_label: state_label(cfg.state),
        status: "ok".into(),
        ..Default::default()
    };
    if let Point::Theta { theta } = *point {
        r.state_label = state_label(ProductKind::Theta(theta));
        r.e0 = Some(theta_energy_density(theta, cfg.model.g, cfg.model.h));
        return Ok(r);
    }
    let c = chain.expect("chain context for sized points");
    r.e0 = Some(c.e0);
    r.sigma0_sq = Some(c.sigma0_sq);
    match *point {
        Point::Variance { delta, .. } => {
            let fp = FilterParams::from_delta(c.e0, delta)?;
            let phi = filtered_state(&c.h, &c.psi, &fp)?;
            r.delta = Some(delta);
            r.sigma_l_sq_measured = Some(energy_moments(&c.h, &phi)?.1);
            r.sigma_l_sq_theory = Some(variance_theory(delta, c.sigma0_sq)?);
            r.eta = c.spectrum.as_ref().map(|s| eta_from_spectrum(s, c.e0));
        }
        Point::Adiabatic { delta, steps, .. } => {
            let sched = ScheduleSpec::new(1.0 / delta, steps as f64 * cfg.tau, cfg.tau, cfg.shape)?;
            let opts = EvolveOptions::for_schedule(&sched);
            let traj = adiabatic_evolve_with(&c.psi, &c.h, &c.p, c.e0, &sched, &opts)?;
            let last = traj.last();
            let fp = FilterParams::from_delta(c.e0, delta)?;
            let dec = decompose_parent(&c.h_terms, &c.p_terms, &fp)?;
            r.delta = Some(delta);
            r.fidelity = Some(last.fidelity);
            r.parent_energy = Some(last.parent_energy);
            r.parent_energy_rescaled = Some(last.instantaneous_energy);
            r.total_time = Some(sched.total_time);
            r.tau = Some(cfg.tau);
            r.depth = Some(depth_report(steps, &dec).1);
        }
        Point::Entropy { delta_inv, n } => {
            let fp = FilterParams::from_delta_inv(c.e0, delta_inv)?;
            let phi = filtered_state(&c.h, &c.psi, &fp)?;
            r.delta = Some(fp.delta());
            r.sigma_l_sq_measured = Some(energy_moments(&c.h, &phi)?.1);
            r.entropy = Some(entanglement_entropy(&phi, cfg.cut.for_chain(n))?);
        }
        Point::Gap { delta, .. } => {
            let fp = FilterParams::from_delta(c.e0, delta)?;
            let ph = ParentHamiltonian::new(c.h.clone(), c.p.clone(), fp)?;
            let cert = gap_certificate(&ph)?;
            r.delta = Some(delta);
            r.gap_min_h2_minus_h = Some(cert.min_h2_minus_h);
            r.gap_lambda1 = Some(cert.lambda1);
            r.passed = Some(cert.gap_at_least_one());
            if !cert.gap_at_least_one() {
                r.status = "gap certificate failed".into();
            }
        }
        Point::Depth {
            n,
            delta_inv,
            index,
        } => {
            let fp = FilterParams::from_delta_inv(c.e0, delta_inv)?;
            let dec = decompose_parent(&c.h_terms, &c.p_terms, &fp)?;
            if let Some(dir) = &cfg.circuit_dir {
                let layers = schedule_layers(&dec, cfg.tau);
                export_circuit(&layers, &dir.join(format!("N{n}_{index}.lfc")))?;
            }
            let steps = cfg.steps.first().copied().unwrap_or(1);
            r.delta = Some(fp.delta());
            r.tau = Some(cfg.tau);
            r.total_time = Some(steps as f64 * cfg.tau);
            r.depth = Some(depth_report(steps, &dec).1);
        }
        Point::Theta { .. } => unreachable!(),
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub output: PathBuf,
    pub rows: usize,
    /// Rows already present from an earlier, interrupted run.
    pub resumed: usize,
    pub flagged: usize,
}

impl RunSummary {
    /// 0 when clean, 3 when any row was flagged.
    pub fn exit_code(&self) -> i32 {
        if self.flagged > 0 {
            3
        } else {
            0
        }
    }
}

/// Complete rows of an earlier run and how many of them were flagged.
/// A partial trailing line is cut off.
fn prepare_resume(path: &Path, expected: usize) -> Result<(usize, usize), HarnessError> {
    let resume_err = |msg: &str| HarnessError::Resume {
        path: path.to_path_buf(),
        msg: msg.into(),
    };
    let text = std::fs::read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut lines = complete.lines();
    if lines.next() != Some(csv_header().as_str()) {
        return Err(resume_err("header does not match"));
    }
    let rows: Vec<&str> = lines.collect();
    if rows.len() > expected {
        return Err(resume_err("more rows than the configuration produces"));
    }
    let flagged = rows
        .iter()
        .filter(|l| l.rsplit(',').next().is_some_and(|s| s != "ok"))
        .count();
    if complete.len() != text.len() {
        OpenOptions::new()
            .write(true)
            .open(path)?
            .set_len(complete.len() as u64)?;
    }
    Ok((rows.len(), flagged))
}

/// Runs the sweep, writing `cfg.output`. With `resume`, rows already in the
/// file are kept and only the remaining points are evaluated.
pub fn run(cfg: &ExperimentConfig, resume: bool) -> Result<RunSummary, HarnessError> {
    cfg.validate()?;
    let points = expand(cfg);
    let (done, old_flagged) = if resume && cfg.output.exists() {
        prepare_resume(&cfg.output, points.len())?
    } else {
        (0, 0)
    };
    let mut file = if done > 0 || (resume && cfg.output.exists()) {
        OpenOptions::new().append(true).open(&cfg.output)?
    } else {
        let mut f = File::create(&cfg.output)?;
        writeln!(f, "{}", csv_header())?;
        f.flush()?;
        f
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| HarnessError::Io(std::io::Error::other(e)))?;

    let todo = &points[done..];
    let mut sizes: Vec<usize> = todo.iter().filter_map(Point::n_sites).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let chains: Vec<(usize, crate::Result<Chain>)> = pool.install(|| {
        sizes
            .par_iter()
            .map(|&n| (n, Chain::build(cfg, n)))
            .collect()
    });

    let (tx, rx) = mpsc::channel::<(usize, Record)>();
    let mut flagged = old_flagged;
    let mut written = 0usize;
    std::thread::scope(|scope| -> Result<(), HarnessError> {
        let chains = &chains;
        scope.spawn(move || {
            pool.install(|| {
                todo.par_iter()
                    .enumerate()
                    .for_each_with(tx, |tx, (i, point)| {
                        let start = Instant::now();
                        let chain = point
                            .n_sites()
                            .map(|n| &chains.iter().find(|c| c.0 == n).expect("chain built").1);
                        let result = match chain {
                            Some(Err(e)) => Err(e.to_string()),
                            Some(Ok(c)) => evaluate(cfg, Some(c), point).map_err(|e| e.to_string()),
                            None => evaluate(cfg, None, point).map_err(|e| e.to_string()),
                        };
                        let mut rec = result.unwrap_or_else(|msg| Record {
                            n_sites: point.n_sites(),
                            state_label: state_label(cfg.state),
                            passed: Some(false),
                            status: format!("error: {msg}"),
                            ..Default::default()
                        });
                        if cfg.record_wall_time {
                            rec.wall_time = Some(start.elapsed().as_secs_f64());
                        }
                        // the receiver only goes away on an I/O failure
                        let _ = tx.send((i, rec));
                    });
            })
        });
        let mut pending: std::collections::BTreeMap<usize, Record> = Default::default();
        for (i, rec) in rx {
            pending.insert(i, rec);
            while let Some(rec) = pending.remove(&written) {
                if rec.flagged() {
                    log::warn!("flagged point {}: {}", done + written, rec.status);
                    flagged += 1;
                }
                writeln!(file, "{}", rec.to_csv_line())?;
                file.flush()?;
                written += 1;
            }
        }
        Ok(())
    })?;

    Ok(RunSummary {
        output: cfg.output.clone(),
        rows: done + written,
        resumed: done,
        flagged,
    })
}

/// Reads a config file, mapping parse failures to configuration errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    Ok(ExperimentConfig::parse(&text)?)
}
