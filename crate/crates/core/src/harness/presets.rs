use std::f64::consts::PI;
use std::path::PathBuf;

use super::config::{parse_real_list, Cut, ExperimentConfig, ExperimentKind};
use crate::model::ProductKind;

pub const PRESET_NAMES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig8"];

fn variance(state: ProductKind, output: &str) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::VarianceSweep,
        output: PathBuf::from(output),
        state,
        n_sites: vec![6, 8, 10, 12],
        deltas: parse_real_list("logspace(0.05, 5, 16)").expect("static grid"),
        ..Default::default()
    }
}

fn adiabatic(state: ProductKind, output: &str) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::AdiabaticSweep,
        output: PathBuf::from(output),
        state,
        n_sites: vec![6, 8, 10],
        deltas: vec![0.1],
        tau: 0.1,
        steps: vec![250, 500, 1000, 2000],
        ..Default::default()
    }
}

/// Configuration behind one of the named figure reproductions.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let pi6 = ProductKind::Theta(PI / 6.0);
    Some(match name {
        "fig2" => variance(ProductKind::Afm, "fig2.csv"),
        "fig3" => variance(pi6, "fig3.csv"),
        "fig4" => adiabatic(ProductKind::Afm, "fig4.csv"),
        "fig5" => adiabatic(pi6, "fig5.csv"),
        "fig6" => ExperimentConfig {
            kind: ExperimentKind::ThetaCurve,
            output: PathBuf::from("fig6.csv"),
            theta_points: 91,
            ..Default::default()
        },
        "fig8" => ExperimentConfig {
            kind: ExperimentKind::EntropySweep,
            output: PathBuf::from("fig8.csv"),
            state: pi6,
            n_sites: vec![6, 8, 10, 12],
            delta_invs: parse_real_list("linspace(0, 10, 11)").expect("static grid"),
            cut: Cut::Half,
            ..Default::default()
        },
        _ => return None,
    })
}
