//! The rotating-field benchmark runner.
//!
//! Builds `H_0(t) = h_0 (cos(wt) S_1 + sin(wt) S_2)`, constructs the
//! counter-diabatic term spectrally, adds the selected perturbation,
//! propagates from the `S_1`(+1) eigenstate, and records per sample the
//! fidelity against the closed-form adiabatic state, the `S_2`(+1)
//! probability for both the perturbed and ideal drive, and the instability
//! functional of the selected perturbation.

use std::thread;

use qbdrive_core::dynamics;
use qbdrive_core::grid::Grid;
use qbdrive_core::matrix::CMatrix;
use qbdrive_core::spin1;
use qbdrive_core::stability;

use crate::config::{ExperimentConfig, PerturbationChoice};
use crate::{csvio, svg, CliError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRow {
    pub t: f64,
    pub fidelity: f64,
    pub prob_s2_plus: f64,
    pub prob_ideal: f64,
    pub i_t: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub rows: Vec<RunRow>,
}

impl RunOutput {
    pub fn time_averaged_fidelity(&self) -> f64 {
        self.rows.iter().map(|r| r.fidelity).sum::<f64>() / self.rows.len() as f64
    }

    pub fn min_fidelity(&self) -> f64 {
        self.rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let grid = Grid::from_step(0.0, config.dt, config.steps());
    let protocol = spin1::rotating_protocol_with_cd(config.h0, config.omega);
    let perturbation = config
        .perturbation
        .kind()
        .map(|kind| spin1::perturbation(kind, config.delta_h));

    let h_at = |t: f64| -> CMatrix {
        let base = protocol.h_matrix(t);
        match &perturbation {
            Some(p) => &base + &p.operator_at(t),
            None => base,
        }
    };
    let record = dynamics::propagate(h_at, &spin1::initial_state(), &grid)?;

    let s2 = spin1::s2();
    let mut rows = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let t = grid.time(k);
        let psi = record.state(k);
        let reference = spin1::adiabatic_reference(config.omega, t);
        let fidelity = dynamics::fidelity(&reference, psi);
        let prob_s2_plus = dynamics::eigen_probability(psi, &s2, 1.0)?;
        let prob_ideal = dynamics::eigen_probability(&reference, &s2, 1.0)?;
        let i_t = match &perturbation {
            None => 0.0,
            Some(p) => {
                let h1 = protocol
                    .h1_matrix(t)
                    .expect("benchmark protocol carries its completion");
                stability::instability_cd(&reference, &h1, &p.operator_at(t))?
            }
        };
        for (label, v) in [("fidelity", fidelity), ("prob_s2_plus", prob_s2_plus), ("prob_ideal", prob_ideal)] {
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(CliError::Numerical(format!(
                    "{label}={v} outside [0, 1] at t={t}"
                )));
            }
        }
        rows.push(RunRow { t, fidelity, prob_s2_plus, prob_ideal, i_t });
    }
    let out = RunOutput { config: config.clone(), rows };
    if let Some(path) = &config.out_csv {
        csvio::emit_csv(path, &out)?;
    }
    if let Some(path) = &config.out_svg {
        svg::emit_svg(path, &out)?;
    }
    Ok(out)
}

/// Runs the four perturbed benchmark variants in parallel, writing
/// `run_<label>.csv` / `run_<label>.svg` into `out_dir`.
pub fn sweep(base: &ExperimentConfig, out_dir: &std::path::Path) -> Result<Vec<RunOutput>, CliError> {
    base.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let choices = [
        PerturbationChoice::S3,
        PerturbationChoice::L4,
        PerturbationChoice::L5,
        PerturbationChoice::L8,
    ];
    let configs: Vec<ExperimentConfig> = choices
        .iter()
        .map(|&choice| {
            let mut cfg = base.clone();
            cfg.perturbation = choice;
            cfg.out_csv = Some(out_dir.join(format!("run_{}.csv", choice.as_str())));
            cfg.out_svg = Some(out_dir.join(format!("run_{}.svg", choice.as_str())));
            cfg
        })
        .collect();
    let mut results: Vec<Option<Result<RunOutput, CliError>>> = Vec::new();
    results.resize_with(configs.len(), || None);
    thread::scope(|scope| {
        let mut handles = Vec::new();
        for cfg in &configs {
            handles.push(scope.spawn(move || run_experiment(cfg)));
        }
        for (slot, handle) in results.iter_mut().zip(handles) {
            *slot = Some(handle.join().expect("worker panicked"));
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("slot filled"))
        .collect()
}
