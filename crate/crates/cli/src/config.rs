//! JSON run configuration. Every key is optional; missing keys take the
//! reference values (the σ₋ coupling defaults to `g_plus_mhz/√45`).

use std::path::{Path, PathBuf};

use kerrgate::entangle::MaskFamily;
use kerrgate::masterq::Polarization;
use kerrgate::params::{Detunings, RateSet};
use kerrgate::qpg::QpgAngles;
use kerrgate::response::FitMode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub g_plus_mhz: f64,
    pub g_minus_mhz: Option<f64>,
    pub kappa_mhz: f64,
    pub gamma_mhz: f64,
    pub transit_rate_mhz: f64,
    pub atom_lifetime_ns: Option<f64>,
    pub mean_atoms: f64,
    pub detunings: DetuningConfig,
    pub n_max: usize,
    /// Multiplies every emitted probe phase (+1 or −1).
    pub phase_sign: i8,
    pub exact_oracle: bool,
    pub seed: u64,
    pub angles: AngleConfig,
    pub response: ResponseConfig,
    pub saturation: SaturationConfig,
    pub kerr: KerrConfig,
    pub gate: GateConfig,
    pub fit: FitConfig,
    pub damping: DampingConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            g_plus_mhz: 20.0,
            g_minus_mhz: None,
            kappa_mhz: 75.0,
            gamma_mhz: 2.5,
            transit_rate_mhz: 0.7,
            atom_lifetime_ns: Some(32.0),
            mean_atoms: 1.0,
            detunings: DetuningConfig::default(),
            n_max: 3,
            phase_sign: 1,
            exact_oracle: false,
            seed: 1,
            angles: AngleConfig::default(),
            response: ResponseConfig::default(),
            saturation: SaturationConfig::default(),
            kerr: KerrConfig::default(),
            gate: GateConfig::default(),
            fit: FitConfig::default(),
            damping: DampingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetuningConfig {
    pub probe_mhz: f64,
    pub pump_mhz: f64,
    pub atom_cavity_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleConfig {
    pub phi_a_deg: f64,
    pub phi_b_deg: f64,
    pub delta_deg: f64,
}

impl Default for AngleConfig {
    fn default() -> Self {
        Self {
            phi_a_deg: 17.5,
            phi_b_deg: 12.5,
            delta_deg: 16.0,
        }
    }
}

/// Evenly spaced grid, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn values(&self) -> CliResult<Vec<f64>> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.points == 0 || self.min > self.max {
            return Err(CliError::Config(format!("bad range {self:?}")));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| if i + 1 == self.points { self.max } else { self.min + step * i as f64 })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponseConfig {
    pub omega_mhz: Range,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        Self {
            omega_mhz: Range::new(-150.0, 150.0, 301),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaturationConfig {
    /// σ₊ drive amplitudes in MHz.
    pub drive_mhz: Range,
}

impl Default for SaturationConfig {
    fn default() -> Self {
        Self {
            drive_mhz: Range::new(0.0, 40.0, 21),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pol {
    Plus,
    Minus,
}

impl From<Pol> for Polarization {
    fn from(p: Pol) -> Self {
        match p {
            Pol::Plus => Polarization::Plus,
            Pol::Minus => Polarization::Minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KerrConfig {
    pub pump: Pol,
    pub probe: Pol,
    /// Target intracavity pump photon numbers; drives are solved for.
    pub m_pump: Range,
    /// Upper end of the slope fit.
    pub slope_max_m: f64,
}

impl Default for KerrConfig {
    fn default() -> Self {
        Self {
            pump: Pol::Plus,
            probe: Pol::Plus,
            m_pump: Range::new(0.0, 0.3, 7),
            slope_max_m: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    /// Optional `m_pump,phi_probe_deg` CSV to extract Δ from.
    pub slope_csv: Option<PathBuf>,
    pub slope_max_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModeConfig {
    #[default]
    AtomNumber,
    AtomNumberCouplingDecay,
}

impl From<FitModeConfig> for FitMode {
    fn from(m: FitModeConfig) -> Self {
        match m {
            FitModeConfig::AtomNumber => FitMode::AtomNumber,
            FitModeConfig::AtomNumberCouplingDecay => FitMode::AtomNumberCouplingDecay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Measured `omega_mhz,transmission,phase_deg[,weight_t,weight_phi]`
    /// samples; synthetic data are generated when absent.
    pub data_csv: Option<PathBuf>,
    pub mode: FitModeConfig,
    pub initial_guess: f64,
    pub omega_mhz: Range,
    pub sigma_transmission: f64,
    pub sigma_phase_deg: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            data_csv: None,
            mode: FitModeConfig::AtomNumber,
            initial_guess: 0.5,
            omega_mhz: Range::new(-100.0, 100.0, 41),
            sigma_transmission: 0.02,
            sigma_phase_deg: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskFamilyConfig {
    #[default]
    Uniform,
    Mutual,
    SelfCoherence,
}

impl From<MaskFamilyConfig> for MaskFamily {
    fn from(m: MaskFamilyConfig) -> Self {
        match m {
            MaskFamilyConfig::Uniform => MaskFamily::Uniform,
            MaskFamilyConfig::Mutual => MaskFamily::Mutual,
            MaskFamilyConfig::SelfCoherence => MaskFamily::SelfCoherence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DampingConfig {
    pub family: MaskFamilyConfig,
    pub d: Range,
}

impl Default for DampingConfig {
    fn default() -> Self {
        Self {
            family: MaskFamilyConfig::Uniform,
            d: Range::new(0.0, 1.0, 21),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // relative input paths are taken relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.gate.slope_csv, &mut cfg.fit.data_csv].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.rates()?;
        self.detunings()?;
        if !(self.mean_atoms.is_finite() && self.mean_atoms >= 0.0) {
            return Err(CliError::Config(format!("mean_atoms must be >= 0, got {}", self.mean_atoms)));
        }
        if self.n_max == 0 {
            return Err(CliError::Config("n_max must be at least 1".into()));
        }
        if self.phase_sign != 1 && self.phase_sign != -1 {
            return Err(CliError::Config(format!("phase_sign must be +1 or -1, got {}", self.phase_sign)));
        }
        let a = &self.angles;
        if ![a.phi_a_deg, a.phi_b_deg, a.delta_deg].iter().all(|x| x.is_finite()) {
            return Err(CliError::Config("angles must be finite".into()));
        }
        for p in [&self.gate.slope_csv, &self.fit.data_csv].into_iter().flatten() {
            if !p.is_file() {
                return Err(CliError::Config(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn rates(&self) -> CliResult<RateSet<f64>> {
        let g_minus = self.g_minus_mhz.unwrap_or(self.g_plus_mhz / 45f64.sqrt());
        let mut r = RateSet::new(self.g_plus_mhz, g_minus, self.kappa_mhz, self.gamma_mhz, self.transit_rate_mhz)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(t) = self.atom_lifetime_ns {
            r = r.with_lifetime_ns(t).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(r)
    }

    pub fn detunings(&self) -> CliResult<Detunings<f64>> {
        let d = &self.detunings;
        Detunings::with_atom_offset(d.probe_mhz, d.pump_mhz, d.atom_cavity_mhz).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn qpg_angles(&self) -> QpgAngles<f64> {
        QpgAngles::new(self.angles.phi_a_deg, self.angles.phi_b_deg, self.angles.delta_deg)
    }

    pub fn phase_sign(&self) -> f64 {
        f64::from(self.phase_sign)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_reference_config() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let r = cfg.rates().unwrap();
        assert_eq!(r, RateSet::reference());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"kapa_mhz": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig { kappa_mhz: -1.0, ..RunConfig::default() };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        cfg.kappa_mhz = 75.0;
        cfg.phase_sign = 2;
        assert!(cfg.validate().is_err());
        cfg.phase_sign = -1;
        cfg.validate().unwrap();
        cfg.fit.data_csv = Some("/nonexistent/data.csv".into());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(Range::new(0.0, 1.0, 3).values().unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Range::new(2.0, 2.0, 1).values().unwrap(), vec![2.0]);
        assert!(Range::new(1.0, 0.0, 3).values().is_err());
        assert!(Range::new(0.0, 1.0, 0).values().is_err());
    }
}
