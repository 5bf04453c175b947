//! Command execution: resolve options, run the computations, emit artifacts.

use rayon::prelude::*;

use qndsim::metrics::{conditional_signal_shape, fit_exponential_decay, qnd_metrics_detailed};
use qndsim::one_photon::{one_photon_output_tol, CavityParams};
use qndsim::oracle::{full_model_propagate, suggested_t_final};
use qndsim::pulses::{default_grid, Grid, PulseSpec};
use qndsim::{Error, Shape};

use crate::config::{Cli, Command, PulseShapeArg, Resolved, SweepModeArg};
use crate::output::{
    emit, sig12, Artifact, MetricsRow, OracleRow, ShapeRow, TransmittanceRow,
};

/// Failure with the exit code it maps to: 1 for configuration problems,
/// 2 for numerical non-convergence.
pub enum Failure {
    Config(String),
    Numerical(String),
}

fn classify(err: Error) -> Failure {
    match err {
        Error::InvalidPulse(_)
        | Error::InvalidGrid(_)
        | Error::InvalidParameter(_)
        | Error::NonFinite { .. }
        | Error::KResolution(_) => Failure::Config(err.to_string()),
        Error::Convergence { .. }
        | Error::NoBracket { .. }
        | Error::NormDrift { .. }
        | Error::DetectionOutOfRange { .. } => Failure::Numerical(err.to_string()),
    }
}

fn grid_for(resolved: &Resolved, a: &PulseSpec, b: &PulseSpec) -> Result<Grid, Failure> {
    match (resolved.grid_lo, resolved.grid_hi, resolved.grid_n) {
        (None, None, None) => Ok(default_grid(a, b)),
        (Some(lo), Some(hi), Some(n)) => Grid::new(lo, hi, n).map_err(classify),
        _ => Err(Failure::Config(
            "grid override needs all of --grid-lo, --grid-hi, --grid-n".into(),
        )),
    }
}

fn spec(shape: PulseShapeArg, d: f64) -> Result<PulseSpec, Failure> {
    PulseSpec::new(Shape::from(shape), d).map_err(classify)
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let resolved = crate::config::resolve(&cli.common).map_err(Failure::Config)?;
    match &cli.command {
        Command::Transmittance { d, shape } => transmittance(&resolved, d, *shape),
        Command::Metrics { d_signal, d_ancilla } => {
            metrics(&resolved, &[(*d_signal, *d_ancilla)], "metrics")
        }
        Command::Sweep { mode, d, d_ancilla } => {
            for w in d.windows(2) {
                if w[0] >= w[1] {
                    return Err(Failure::Config("sweep durations must be ascending".into()));
                }
            }
            let pairs: Vec<(f64, f64)> = d
                .iter()
                .map(|&ds| match mode {
                    SweepModeArg::Symmetric => (ds, ds),
                    SweepModeArg::Asymmetric => (ds, *d_ancilla),
                })
                .collect();
            metrics(&resolved, &pairs, "sweep")
        }
        Command::Shape { d_signal, d_ancilla, x_detect, shape } => {
            heralded_shape(&resolved, *d_signal, *d_ancilla, *x_detect, *shape)
        }
        Command::OracleCheck { d, kappa_over_g, k_cutoff, n_modes } => {
            oracle_check(&resolved, *d, *kappa_over_g, *k_cutoff, *n_modes)
        }
    }
}

fn transmittance(resolved: &Resolved, ds: &[f64], shape: PulseShapeArg) -> Result<(), Failure> {
    let rows: Vec<TransmittanceRow> = ds
        .par_iter()
        .map(|&d| -> Result<TransmittanceRow, Failure> {
            let s = spec(shape, d)?;
            let grid = grid_for(resolved, &s, &s)?;
            let out = one_photon_output_tol(&s, &grid, resolved.tol_1d).map_err(classify)?;
            Ok(TransmittanceRow {
                d,
                p_l: out.p_l(),
                p_r: out.p_r(),
                achieved_error: out.error_estimate(),
            })
        })
        .collect::<Result<_, _>>()?;
    let summary = rows
        .iter()
        .map(|r| format!("d = {}: p_L = {}, p_R = {}", r.d, sig12(r.p_l), sig12(r.p_r)))
        .collect::<Vec<_>>()
        .join("\n");
    emit(resolved, &Artifact::Transmittance(rows).render("transmittance", resolved), &summary)
        .map_err(Failure::Config)
}

fn metrics(resolved: &Resolved, pairs: &[(f64, f64)], command: &str) -> Result<(), Failure> {
    let rows: Vec<MetricsRow> = pairs
        .par_iter()
        .map(|&(ds, da)| -> Result<MetricsRow, Failure> {
            let signal = PulseSpec::gaussian(ds).map_err(classify)?;
            let ancilla = PulseSpec::gaussian(da).map_err(classify)?;
            let grid = grid_for(resolved, &signal, &ancilla)?;
            let c = qnd_metrics_detailed(&signal, &ancilla, &grid, resolved.tol_2d)
                .map_err(classify)?;
            Ok(MetricsRow {
                d_signal: ds,
                d_ancilla: da,
                p_suc: c.metrics.p_suc,
                eqnd: c.metrics.eqnd,
                p1r: c.metrics.p1r_ancilla,
                achieved_error_2ph: c.two_photon_error,
                achieved_error_1ph: c.one_photon_error,
            })
        })
        .collect::<Result<_, _>>()?;
    let summary = rows
        .iter()
        .map(|r| {
            format!(
                "d_signal = {}, d_ancilla = {}: P_suc = {}, EQND = {}, p1R = {}",
                r.d_signal,
                r.d_ancilla,
                sig12(r.p_suc),
                sig12(r.eqnd),
                sig12(r.p1r)
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    emit(resolved, &Artifact::Metrics(rows).render(command, resolved), &summary)
        .map_err(Failure::Config)
}

fn heralded_shape(
    resolved: &Resolved,
    d_signal: f64,
    d_ancilla: f64,
    x_detect: f64,
    shape: PulseShapeArg,
) -> Result<(), Failure> {
    let signal = spec(shape, d_signal)?;
    let ancilla = spec(shape, d_ancilla)?;
    let cs = conditional_signal_shape(&signal, &ancilla, x_detect).map_err(classify)?;
    let decay_rate = fit_exponential_decay(&cs.deltas, &cs.amplitude, -6.0, -0.25);
    let rows: Vec<ShapeRow> = cs
        .deltas
        .iter()
        .zip(&cs.amplitude)
        .map(|(&delta, &amplitude)| ShapeRow { delta, amplitude })
        .collect();
    let summary = format!(
        "heralded slice at x_detect = {x_detect}: trailing decay rate = {}, aleph = {}",
        decay_rate.map_or("n/a".to_string(), sig12),
        sig12(cs.aleph)
    );
    let artifact = Artifact::Shape { rows, decay_rate, aleph: cs.aleph };
    emit(resolved, &artifact.render("shape", resolved), &summary).map_err(Failure::Config)
}

fn oracle_check(
    resolved: &Resolved,
    d: f64,
    kappa_over_g: f64,
    k_cutoff: Option<f64>,
    n_modes: Option<usize>,
) -> Result<(), Failure> {
    let spec = PulseSpec::gaussian(d).map_err(classify)?;
    // Gamma = 1 working units: g = kappa/g ratio, kappa = ratio^2
    let params =
        CavityParams::new(kappa_over_g, kappa_over_g * kappa_over_g).map_err(classify)?;
    let cutoff = k_cutoff.unwrap_or_else(|| (20.0 / d).max(2.0));
    let n = n_modes.unwrap_or_else(|| {
        let target_dk = 0.1 / d / 1.01;
        let mut n = (2.0 * cutoff / target_dk).ceil() as usize + 1;
        if n.is_multiple_of(2) {
            n += 1;
        }
        n
    });
    let run = full_model_propagate(&params, &spec, suggested_t_final(&spec), cutoff, n)
        .map_err(classify)?;
    let grid = grid_for(resolved, &spec, &spec)?;
    let eff = one_photon_output_tol(&spec, &grid, resolved.tol_1d).map_err(classify)?;
    let rel = (run.p_r - eff.p_r()).abs() / eff.p_r();
    let row = OracleRow {
        d,
        kappa_over_g,
        p_r_full: run.p_r,
        p_r_effective: eff.p_r(),
        rel_deviation: rel,
        norm_drift: run.norm_drift,
    };
    let summary = format!(
        "full model p_R = {} vs effective {} (relative deviation {}, norm drift {})",
        sig12(row.p_r_full),
        sig12(row.p_r_effective),
        sig12(row.rel_deviation),
        sig12(row.norm_drift)
    );
    emit(resolved, &Artifact::Oracle(vec![row]).render("oracle-check", resolved), &summary)
        .map_err(Failure::Config)
}
