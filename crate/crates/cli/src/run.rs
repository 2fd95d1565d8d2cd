//! One function per experiment; each writes its artifacts into an
//! [`OutputDir`].

use std::path::{Path, PathBuf};

use kerrgate::entangle::{
    chsh_formula, chsh_max, concurrence_pure, qpg_plus_plus_output, violation_vs_damping, weak_field_violation,
};
use kerrgate::masterq::{drive_for_photon_number, kerr_curve, saturation_curve, AtomCavityModel, Polarization};
use kerrgate::qpg::{
    coherent_output, reduced_probe_phase, slope_extract_delta, truth_table, DeltaEstimate, SlopeRelation,
    BASIS_LABELS, DEFAULT_MAX_M,
};
use kerrgate::response::{
    coupled_amplitude_detuned, fit_atom_number, synthetic_samples, FitOptions, ResponseNoise, ResponseSample,
};
use num_complex::Complex;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::formats::{read_csv, response_samples, to_csv, DampingRow, KerrRow, ResponseRow, SaturationRow};
use crate::output::{json_bytes, sha256_hex, OutputDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Response,
    Saturation,
    Kerr,
    Gate,
    Chsh,
    Fit,
    Damping,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Response => "response",
            Experiment::Saturation => "saturation",
            Experiment::Kerr => "kerr",
            Experiment::Gate => "gate",
            Experiment::Chsh => "chsh",
            Experiment::Fit => "fit",
            Experiment::Damping => "damping",
        }
    }
}

/// Validates `cfg`, runs the experiment into `out_dir` and writes the
/// manifest. Returns the manifest path.
pub fn run(experiment: Experiment, cfg: &RunConfig, out_dir: &Path) -> CliResult<PathBuf> {
    cfg.validate()?;
    let config_sha = sha256_hex(&serde_json::to_vec(cfg).map_err(|e| CliError::Config(e.to_string()))?);
    let mut out = OutputDir::create(out_dir)?;
    match experiment {
        Experiment::Response => response(cfg, &mut out)?,
        Experiment::Saturation => saturation(cfg, &mut out)?,
        Experiment::Kerr => kerr(cfg, &mut out)?,
        Experiment::Gate => gate(cfg, &mut out)?,
        Experiment::Chsh => chsh(cfg, &mut out)?,
        Experiment::Fit => fit(cfg, &mut out)?,
        Experiment::Damping => damping(cfg, &mut out)?,
    }
    out.finish(experiment.name(), &config_sha)
}

fn model(cfg: &RunConfig) -> CliResult<AtomCavityModel<f64>> {
    Ok(AtomCavityModel::new(cfg.rates()?, cfg.detunings()?, cfg.mean_atoms).with_n_max(cfg.n_max))
}

fn response(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let rates = cfg.rates()?;
    let offset = cfg.detunings.atom_cavity_mhz;
    let rows: Vec<ResponseRow> = cfg
        .response
        .omega_mhz
        .values()?
        .into_iter()
        .map(|w| {
            let t = coupled_amplitude_detuned(w, offset, &rates, cfg.mean_atoms);
            ResponseRow {
                omega_mhz: w,
                transmission: t.norm_sqr(),
                phase_deg: cfg.phase_sign() * t.arg().to_degrees(),
                weight_t: None,
                weight_phi: None,
            }
        })
        .collect();
    out.write("response.csv", &to_csv(&rows)?)?;
    Ok(())
}

fn saturation(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let curve = saturation_curve(&model(cfg)?, &cfg.saturation.drive_mhz.values()?)?;
    let rows: Vec<SaturationRow> = curve
        .iter()
        .map(|p| SaturationRow {
            m_a: p.m_a,
            transmission: p.transmission,
        })
        .collect();
    out.write("saturation.csv", &to_csv(&rows)?)?;
    Ok(())
}

#[derive(Serialize)]
struct SlopeReport {
    relation: &'static str,
    delta_deg: f64,
    delta_err_deg: f64,
    slope_deg_per_photon: f64,
    slope_err: f64,
    intercept_deg: f64,
    intercept_err_deg: f64,
}

fn relation_name(r: SlopeRelation) -> &'static str {
    match r {
        SlopeRelation::Printed => "printed",
        SlopeRelation::ReducedState => "reduced_state",
    }
}

impl From<DeltaEstimate<f64>> for SlopeReport {
    fn from(e: DeltaEstimate<f64>) -> Self {
        Self {
            relation: relation_name(e.relation),
            delta_deg: e.delta,
            delta_err_deg: e.delta_err,
            slope_deg_per_photon: e.slope,
            slope_err: e.slope_err,
            intercept_deg: e.intercept,
            intercept_err_deg: e.intercept_err,
        }
    }
}

fn relations(cfg: &RunConfig) -> Vec<SlopeRelation> {
    if cfg.exact_oracle {
        vec![SlopeRelation::Printed, SlopeRelation::ReducedState]
    } else {
        vec![SlopeRelation::Printed]
    }
}

/// Slope fits of a curve in the reported phase convention. The printed
/// relation is applied to it as is; the reduced-state relation is defined in
/// the internal convention, so the phase sign is undone first. An inversion
/// failure is reported in place rather than aborting the run.
fn slope_fits(reported: &[(f64, f64)], sign: f64, which: &[SlopeRelation], max_m: f64) -> Vec<serde_json::Value> {
    which
        .iter()
        .map(|&r| {
            let curve: Vec<(f64, f64)> = match r {
                SlopeRelation::Printed => reported.to_vec(),
                SlopeRelation::ReducedState => reported.iter().map(|&(m, p)| (m, sign * p)).collect(),
            };
            match slope_extract_delta(&curve, r, max_m) {
                Ok(e) => serde_json::to_value(SlopeReport::from(e)).expect("plain struct"),
                Err(e) => json!({ "relation": relation_name(r), "error": e.to_string() }),
            }
        })
        .collect()
}

fn slope_reports(reported: &[(f64, f64)], cfg: &RunConfig, max_m: f64) -> serde_json::Value {
    let fits = slope_fits(reported, cfg.phase_sign(), &relations(cfg), max_m);
    json!({ "phase_sign": cfg.phase_sign, "max_m": max_m, "points": reported.len(), "fits": fits })
}

fn kerr(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let m = model(cfg)?;
    let pump: Polarization = cfg.kerr.pump.into();
    let probe: Polarization = cfg.kerr.probe.into();
    let drives = cfg
        .kerr
        .m_pump
        .values()?
        .into_iter()
        .map(|target| drive_for_photon_number(&m, pump, target))
        .collect::<kerrgate::Result<Vec<f64>>>()?;
    let curve = kerr_curve(&m, pump, probe, &drives)?;
    let rows: Vec<KerrRow> = curve
        .iter()
        .map(|p| KerrRow {
            m_pump: p.m_pump,
            phi_probe_deg: cfg.phase_sign() * p.phi_probe_deg,
        })
        .collect();
    out.write("kerr.csv", &to_csv(&rows)?)?;
    let max_m = cfg.kerr.slope_max_m;
    let fit_points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.m_pump <= max_m)
        .map(|r| (r.m_pump, r.phi_probe_deg))
        .collect();
    out.write("kerr_slope.json", &json_bytes(&slope_reports(&fit_points, cfg, max_m))?)?;
    Ok(())
}

fn gate(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let angles = cfg.qpg_angles();
    let table = truth_table(&angles);
    out.write("truth_table.txt", table.to_text().as_bytes())?;
    let phases: serde_json::Map<String, serde_json::Value> = BASIS_LABELS
        .iter()
        .zip(table.phases_deg)
        .map(|(l, p)| (l.to_string(), json!(p)))
        .collect();
    let report = json!({
        "phases_deg": phases,
        "conditional_phase_deg": table.conditional_phase(),
        "unitarity_residual": table.unitarity_residual,
    });
    out.write("gate.json", &json_bytes(&report)?)?;

    let max_m = cfg.gate.slope_max_m.unwrap_or(DEFAULT_MAX_M);
    if let Some(path) = &cfg.gate.slope_csv {
        let rows: Vec<KerrRow> = read_csv(path)?;
        let curve: Vec<(f64, f64)> = rows.iter().map(|r| (r.m_pump, r.phi_probe_deg)).collect();
        out.write("slope.json", &json_bytes(&slope_reports(&curve, cfg, max_m))?)?;
    }
    if cfg.exact_oracle {
        // curve from the exact reduced state of the configured gate
        let grid: Vec<f64> = (0..=10).map(|i| 0.001 * f64::from(i)).collect();
        let curve = grid
            .iter()
            .map(|&mb| {
                let s = coherent_output(Complex::new(0.1, 0.0), Complex::new(mb.sqrt(), 0.0), &angles)?;
                Ok((mb, reduced_probe_phase(&s)?))
            })
            .collect::<kerrgate::Result<Vec<(f64, f64)>>>()?;
        let reported: Vec<(f64, f64)> = curve.iter().map(|&(m, p)| (m, cfg.phase_sign() * p)).collect();
        let both = [SlopeRelation::Printed, SlopeRelation::ReducedState];
        let fits = slope_fits(&reported, cfg.phase_sign(), &both, max_m);
        let rows: Vec<KerrRow> = reported
            .iter()
            .map(|&(m_pump, phi_probe_deg)| KerrRow { m_pump, phi_probe_deg })
            .collect();
        out.write("oracle_curve.csv", &to_csv(&rows)?)?;
        out.write("oracle.json", &json_bytes(&json!({ "delta_deg": angles.delta, "fits": fits }))?)?;
    }
    Ok(())
}

fn chsh(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let angles = cfg.qpg_angles();
    let state = qpg_plus_plus_output(&angles)?;
    let report = chsh_max(&state.ket().to_density())?;
    let s = report.settings;
    let weak = Complex::new(0.1f64.sqrt(), 0.0);
    let doc = json!({
        "delta_deg": angles.delta,
        "s_max": report.s_max,
        "violating": report.violating,
        "formula": chsh_formula(angles.delta),
        "concurrence": concurrence_pure(&state),
        "settings": { "a": s.a, "a_prime": s.a_prime, "b": s.b, "b_prime": s.b_prime },
        "weak_field_violation_m0.1": weak_field_violation(weak, weak, angles.delta),
    });
    out.write("chsh.json", &json_bytes(&doc)?)?;
    Ok(())
}

fn fit(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let rates = cfg.rates()?;
    let f = &cfg.fit;
    let (samples, weights) = match &f.data_csv {
        Some(path) => {
            let rows: Vec<ResponseRow> = read_csv(path)?;
            let (mut s, w) = response_samples(&rows)?;
            for x in &mut s {
                x.phase_deg *= cfg.phase_sign();
            }
            (s, w)
        }
        None => {
            let noise = ResponseNoise {
                sigma_transmission: f.sigma_transmission,
                sigma_phase_deg: f.sigma_phase_deg,
            };
            let s = synthetic_samples(&f.omega_mhz.values()?, &rates, cfg.mean_atoms, noise, cfg.seed)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let rows: Vec<ResponseRow> = s
                .iter()
                .map(|x| ResponseRow {
                    phase_deg: cfg.phase_sign() * x.phase_deg,
                    ..ResponseRow::from(x)
                })
                .collect();
            out.write("fit_samples.csv", &to_csv(&rows)?)?;
            (s, None)
        }
    };
    let opts = FitOptions {
        mode: f.mode.into(),
        weights,
        atom_cavity_offset: cfg.detunings.atom_cavity_mhz,
        ..FitOptions::default()
    };
    let r = fit_atom_number(&samples, &rates, f.initial_guess, &opts)?;
    let est = |e: Option<kerrgate::response::Estimate<f64>>| e.map(|e| json!({ "value": e.value, "std_error": e.std_error }));
    let doc = json!({
        "mean_atoms": { "value": r.mean_atoms.value, "std_error": r.mean_atoms.std_error },
        "g_plus_mhz": est(r.g_plus),
        "kappa_mhz": est(r.kappa),
        "residual_norm": r.residual_norm,
        "converged": r.converged,
        "iterations": r.iterations,
        "degenerate": r.degenerate,
        "samples": samples.len(),
        "synthetic": f.data_csv.is_none(),
    });
    out.write("fit.json", &json_bytes(&doc)?)?;

    let mut fitted = rates;
    if let (Some(g), Some(k)) = (r.g_plus, r.kappa) {
        fitted.g_plus = g.value;
        fitted.kappa = k.value;
    }
    let curve: Vec<ResponseRow> = samples
        .iter()
        .map(|s: &ResponseSample<f64>| {
            let t = coupled_amplitude_detuned(s.omega, opts.atom_cavity_offset, &fitted, r.mean_atoms.value);
            ResponseRow {
                omega_mhz: s.omega,
                transmission: t.norm_sqr(),
                phase_deg: cfg.phase_sign() * t.arg().to_degrees(),
                weight_t: None,
                weight_phi: None,
            }
        })
        .collect();
    out.write("fit_curve.csv", &to_csv(&curve)?)?;
    Ok(())
}

fn damping(cfg: &RunConfig, out: &mut OutputDir) -> CliResult<()> {
    let curve = violation_vs_damping(&cfg.qpg_angles(), cfg.damping.family.into(), &cfg.damping.d.values()?)?;
    let rows: Vec<DampingRow> = curve.into_iter().map(|(d, s_max)| DampingRow { d, s_max }).collect();
    out.write("damping.csv", &to_csv(&rows)?)?;
    Ok(())
}
