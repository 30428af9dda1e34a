//! Experiment configuration and its text grammar.
//!
//! ```text
//! # comment
//! [experiment]
//! kind = variance_sweep        # variance_sweep | adiabatic_sweep | entropy_sweep
//!                              # | theta_curve | gap_audit | depth_audit
//! seed = 24301
//! threads = 0                  # 0: all cores
//! output = results.csv
//! wall_time = false
//!
//! [model]
//! J = 1
//! g = -1.05
//! h = 0.5
//!
//! [state]
//! kind = theta                 # afm | theta
//! theta = pi/6
//!
//! [sweep]
//! n = 6, 8, 10
//! delta = logspace(0.05, 5, 16)
//! ```
//!
//! Reals accept `pi`, `pi/6`, `2*pi/3` and plain floats. Lists are comma
//! separated; `logspace(a, b, k)` and `linspace(a, b, k)` expand to `k`
//! points including both ends.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use crate::adiabatic::ScheduleShape;
use crate::model::{ProductKind, TfiParams};

/// Largest chain any harness experiment will build.
pub const HARNESS_MAX_SITES: usize = 16;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("[{section}] {key}: {msg}")]
    Value {
        section: String,
        key: String,
        msg: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    VarianceSweep,
    AdiabaticSweep,
    EntropySweep,
    ThetaCurve,
    GapAudit,
    DepthAudit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::VarianceSweep,
        ExperimentKind::AdiabaticSweep,
        ExperimentKind::EntropySweep,
        ExperimentKind::ThetaCurve,
        ExperimentKind::GapAudit,
        ExperimentKind::DepthAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VarianceSweep => "variance_sweep",
            ExperimentKind::AdiabaticSweep => "adiabatic_sweep",
            ExperimentKind::EntropySweep => "entropy_sweep",
            ExperimentKind::ThetaCurve => "theta_curve",
            ExperimentKind::GapAudit => "gap_audit",
            ExperimentKind::DepthAudit => "depth_audit",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Entanglement cut position.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Cut {
    Half,
    Sites(usize),
}

impl Cut {
    pub fn for_chain(self, n: usize) -> usize {
        match self {
            Cut::Half => n / 2,
            Cut::Sites(k) => k,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub threads: usize,
    pub output: PathBuf,
    pub record_wall_time: bool,
    /// depth_audit writes one step of each schedule here as `.lfc` files.
    pub circuit_dir: Option<PathBuf>,
    pub model: TfiParams,
    pub state: ProductKind,
    pub n_sites: Vec<usize>,
    /// Filter widths `δ` (variance, gap and adiabatic sweeps).
    pub deltas: Vec<f64>,
    /// Inverse widths `δ⁻¹` (entropy and depth sweeps).
    pub delta_invs: Vec<f64>,
    pub tau: f64,
    /// Step counts `T/τ`.
    pub steps: Vec<usize>,
    pub shape: ScheduleShape,
    pub cut: Cut,
    pub theta_points: usize,
    /// Dense cross-checks (η) run up to this size.
    pub dense_max_sites: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::VarianceSweep,
            seed: 0x5eed,
            threads: 0,
            output: PathBuf::from("results.csv"),
            record_wall_time: false,
            circuit_dir: None,
            model: TfiParams::new(0),
            state: ProductKind::Afm,
            n_sites: Vec::new(),
            deltas: Vec::new(),
            delta_invs: Vec::new(),
            tau: 0.1,
            steps: Vec::new(),
            shape: ScheduleShape::default(),
            cut: Cut::Half,
            theta_points: 91,
            dense_max_sites: 10,
        }
    }
}

/// Parses a real: float, `pi`, `pi/d`, `a*pi`, `a*pi/d`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let factor = match num.split_once('*') {
        Some((a, "pi")) => a.trim().parse::<f64>().ok()?,
        None if num == "pi" => 1.0,
        None if num == "-pi" => -1.0,
        _ => return None,
    };
    Some(factor * PI / den)
}

fn spaced(args: &str, log: bool) -> Option<Vec<f64>> {
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return None;
    }
    let a = parse_real(parts[0])?;
    let b = parse_real(parts[1])?;
    let k: usize = parts[2].parse().ok()?;
    if k == 0 || (log && (a <= 0.0 || b <= 0.0)) {
        return None;
    }
    if k == 1 {
        return Some(vec![a]);
    }
    Some(
        (0..k)
            .map(|i| {
                let t = i as f64 / (k - 1) as f64;
                if i == k - 1 {
                    b
                } else if log {
                    (a.ln() + t * (b.ln() - a.ln())).exp()
                } else {
                    a + t * (b - a)
                }
            })
            .collect(),
    )
}

/// Comma list of reals, or a single `logspace(..)` / `linspace(..)`.
pub fn parse_real_list(s: &str) -> Option<Vec<f64>> {
    let s = s.trim();
    for (prefix, log) in [("logspace(", true), ("linspace(", false)] {
        if let Some(rest) = s.strip_prefix(prefix) {
            return spaced(rest.strip_suffix(')')?, log);
        }
    }
    s.split(',').map(parse_real).collect()
}

fn parse_usize_list(s: &str) -> Option<Vec<usize>> {
    s.split(',').map(|t| t.trim().parse().ok()).collect()
}

type Sections = BTreeMap<String, BTreeMap<String, (usize, String)>>;

fn tokenize(text: &str) -> Result<Sections, ConfigError> {
    let mut out: Sections = BTreeMap::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(ConfigError::Syntax {
                line: line_no,
                msg: "unterminated section header".into(),
            })?;
            section = Some(name.trim().to_string());
            out.entry(name.trim().to_string()).or_default();
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax {
            line: line_no,
            msg: "expected key = value".into(),
        })?;
        let sec = section.clone().ok_or(ConfigError::Syntax {
            line: line_no,
            msg: "key outside any section".into(),
        })?;
        let key = k.trim().to_string();
        let entry = out.entry(sec).or_default();
        if entry.contains_key(&key) {
            return Err(ConfigError::Syntax {
                line: line_no,
                msg: format!("duplicate key {key}"),
            });
        }
        entry.insert(key, (line_no, v.trim().to_string()));
    }
    Ok(out)
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    (
        "experiment",
        &["kind", "seed", "threads", "output", "wall_time", "circuits"],
    ),
    ("model", &["J", "g", "h"]),
    ("state", &["kind", "theta"]),
    (
        "sweep",
        &[
            "n",
            "delta",
            "delta_inv",
            "tau",
            "steps",
            "shape",
            "cut",
            "theta_points",
            "dense_max_n",
        ],
    ),
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let sections = tokenize(text)?;
        for (sec, keys) in &sections {
            let known = KNOWN_KEYS
                .iter()
                .find(|(s, _)| s == sec)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown section [{sec}]")))?;
            for (key, (line, _)) in keys {
                if !known.1.contains(&key.as_str()) {
                    return Err(ConfigError::Syntax {
                        line: *line,
                        msg: format!("unknown key {key} in [{sec}]"),
                    });
                }
            }
        }
        let get = |sec: &str, key: &str| {
            sections
                .get(sec)
                .and_then(|m| m.get(key))
                .map(|v| v.1.as_str())
        };
        let bad = |sec: &str, key: &str, msg: &str| ConfigError::Value {
            section: sec.into(),
            key: key.into(),
            msg: msg.into(),
        };
        let real = |sec: &str, key: &str| -> Result<Option<f64>, ConfigError> {
            get(sec, key)
                .map(|v| parse_real(v).ok_or_else(|| bad(sec, key, "expected a real number")))
                .transpose()
        };

        let mut cfg = ExperimentConfig::default();
        let kind = get("experiment", "kind").ok_or_else(|| bad("experiment", "kind", "missing"))?;
        cfg.kind = ExperimentKind::from_name(kind)
            .ok_or_else(|| bad("experiment", "kind", "unknown kind"))?;
        if let Some(v) = get("experiment", "seed") {
            cfg.seed = v
                .parse()
                .map_err(|_| bad("experiment", "seed", "expected an integer"))?;
        }
        if let Some(v) = get("experiment", "threads") {
            cfg.threads = v
                .parse()
                .map_err(|_| bad("experiment", "threads", "expected an integer"))?;
        }
        if let Some(v) = get("experiment", "output") {
            cfg.output = PathBuf::from(v);
        }
        if let Some(v) = get("experiment", "wall_time") {
            cfg.record_wall_time = v
                .parse()
                .map_err(|_| bad("experiment", "wall_time", "expected true or false"))?;
        }

        if let Some(v) = get("experiment", "circuits") {
            cfg.circuit_dir = Some(PathBuf::from(v));
        }

        cfg.model.j = real("model", "J")?.unwrap_or(cfg.model.j);
        cfg.model.g = real("model", "g")?.unwrap_or(cfg.model.g);
        cfg.model.h = real("model", "h")?.unwrap_or(cfg.model.h);

        cfg.state = match get("state", "kind").unwrap_or("afm") {
            "afm" => ProductKind::Afm,
            "theta" => ProductKind::Theta(
                real("state", "theta")?.ok_or_else(|| bad("state", "theta", "missing"))?,
            ),
            _ => return Err(bad("state", "kind", "expected afm or theta")),
        };

        if let Some(v) = get("sweep", "n") {
            cfg.n_sites =
                parse_usize_list(v).ok_or_else(|| bad("sweep", "n", "expected integers"))?;
        }
        if let Some(v) = get("sweep", "delta") {
            cfg.deltas =
                parse_real_list(v).ok_or_else(|| bad("sweep", "delta", "expected a real list"))?;
        }
        if let Some(v) = get("sweep", "delta_inv") {
            cfg.delta_invs = parse_real_list(v)
                .ok_or_else(|| bad("sweep", "delta_inv", "expected a real list"))?;
        }
        cfg.tau = real("sweep", "tau")?.unwrap_or(cfg.tau);
        if let Some(v) = get("sweep", "steps") {
            cfg.steps =
                parse_usize_list(v).ok_or_else(|| bad("sweep", "steps", "expected integers"))?;
        }
        if let Some(v) = get("sweep", "shape") {
            cfg.shape = ScheduleShape::from_name(v)
                .ok_or_else(|| bad("sweep", "shape", "unknown shape"))?;
        }
        if let Some(v) = get("sweep", "cut") {
            cfg.cut = match v {
                "half" => Cut::Half,
                k => Cut::Sites(
                    k.parse()
                        .map_err(|_| bad("sweep", "cut", "expected half or a site count"))?,
                ),
            };
        }
        if let Some(v) = get("sweep", "theta_points") {
            cfg.theta_points = v
                .parse()
                .map_err(|_| bad("sweep", "theta_points", "expected an integer"))?;
        }
        if let Some(v) = get("sweep", "dense_max_n") {
            cfg.dense_max_sites = v
                .parse()
                .map_err(|_| bad("sweep", "dense_max_n", "expected an integer"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the grids the chosen experiment needs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.kind != ExperimentKind::ThetaCurve {
            if self.n_sites.is_empty() {
                return invalid("sweep.n must list at least one chain length".into());
            }
            if let Some(&n) = self
                .n_sites
                .iter()
                .find(|&&n| !(2..=HARNESS_MAX_SITES).contains(&n))
            {
                return invalid(format!("chain length {n} outside 2..={HARNESS_MAX_SITES}"));
            }
        } else if self.theta_points < 2 {
            return invalid("theta_points must be at least 2".into());
        }
        let needs_delta = matches!(
            self.kind,
            ExperimentKind::VarianceSweep
                | ExperimentKind::AdiabaticSweep
                | ExperimentKind::GapAudit
        );
        if needs_delta && self.deltas.is_empty() {
            return invalid(format!("{} needs sweep.delta", self.kind.name()));
        }
        if self.deltas.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return invalid("every delta must be positive and finite".into());
        }
        let needs_inv = matches!(
            self.kind,
            ExperimentKind::EntropySweep | ExperimentKind::DepthAudit
        );
        if needs_inv && self.delta_invs.is_empty() {
            return invalid(format!("{} needs sweep.delta_inv", self.kind.name()));
        }
        if self
            .delta_invs
            .iter()
            .any(|&d| !(d >= 0.0) || !d.is_finite())
        {
            return invalid("every delta_inv must be finite and >= 0".into());
        }
        if self.kind == ExperimentKind::AdiabaticSweep {
            if self.steps.is_empty() || self.steps.contains(&0) {
                return invalid("adiabatic_sweep needs positive sweep.steps".into());
            }
            if !(self.tau > 0.0) {
                return invalid("tau must be positive".into());
            }
        }
        if self.kind == ExperimentKind::GapAudit {
            if let Some(&n) = self
                .n_sites
                .iter()
                .find(|&&n| n > crate::filter::DENSE_MAX_SITES)
            {
                return invalid(format!(
                    "gap_audit is dense; N={n} is above {}",
                    crate::filter::DENSE_MAX_SITES
                ));
            }
        }
        if self.kind == ExperimentKind::EntropySweep {
            for &n in &self.n_sites {
                let c = self.cut.for_chain(n);
                if c == 0 || c >= n {
                    return invalid(format!("cut {c} is not inside a chain of {n}"));
                }
            }
        }
        if self.kind == ExperimentKind::DepthAudit && self.steps.contains(&0) {
            return invalid("steps must be positive".into());
        }
        Ok(())
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes the config back in the grammar accepted by [`ExperimentConfig::parse`].
impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[experiment]")?;
        writeln!(f, "kind = {}", self.kind.name())?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "threads = {}", self.threads)?;
        writeln!(f, "output = {}", self.output.display())?;
        writeln!(f, "wall_time = {}", self.record_wall_time)?;
        if let Some(d) = &self.circuit_dir {
            writeln!(f, "circuits = {}", d.display())?;
        }
        writeln!(f, "\n[model]")?;
        writeln!(
            f,
            "J = {}\ng = {}\nh = {}",
            self.model.j, self.model.g, self.model.h
        )?;
        writeln!(f, "\n[state]")?;
        match self.state {
            ProductKind::Afm => writeln!(f, "kind = afm")?,
            ProductKind::Theta(t) => writeln!(f, "kind = theta\ntheta = {t}")?,
        }
        writeln!(f, "\n[sweep]")?;
        if !self.n_sites.is_empty() {
            writeln!(f, "n = {}", join(&self.n_sites))?;
        }
        if !self.deltas.is_empty() {
            writeln!(f, "delta = {}", join(&self.deltas))?;
        }
        if !self.delta_invs.is_empty() {
            writeln!(f, "delta_inv = {}", join(&self.delta_invs))?;
        }
        writeln!(f, "tau = {}", self.tau)?;
        if !self.steps.is_empty() {
            writeln!(f, "steps = {}", join(&self.steps))?;
        }
        writeln!(f, "shape = {}", self.shape.name())?;
        match self.cut {
            Cut::Half => writeln!(f, "cut = half")?,
            Cut::Sites(k) => writeln!(f, "cut = {k}")?,
        }
        writeln!(f, "theta_points = {}", self.theta_points)?;
        writeln!(f, "dense_max_n = {}", self.dense_max_sites)
    }
}
