//! CSV layouts read and written by the runner.

use std::path::Path;

use kerrgate::response::ResponseSample;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub omega_mhz: f64,
    pub transmission: f64,
    pub phase_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_phi: Option<f64>,
}

impl From<&ResponseSample<f64>> for ResponseRow {
    fn from(s: &ResponseSample<f64>) -> Self {
        Self {
            omega_mhz: s.omega,
            transmission: s.transmission,
            phase_deg: s.phase_deg,
            weight_t: None,
            weight_phi: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrRow {
    pub m_pump: f64,
    pub phi_probe_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationRow {
    pub m_a: f64,
    pub transmission: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingRow {
    pub d: f64,
    pub s_max: f64,
}

pub fn to_csv<R: Serialize>(rows: &[R]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::io("csv", e))?;
    }
    w.into_inner().map_err(|e| CliError::io("csv", e))
}

pub fn from_csv<R: DeserializeOwned>(bytes: &[u8]) -> CliResult<Vec<R>> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .collect::<Result<Vec<R>, _>>()
        .map_err(|e| CliError::Config(format!("csv: {e}")))
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> CliResult<Vec<R>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path.display(), e))?;
    from_csv(&bytes).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Samples plus per-row weights; weights must be given on every row or none.
pub fn response_samples(rows: &[ResponseRow]) -> CliResult<(Vec<ResponseSample<f64>>, Option<Vec<(f64, f64)>>)> {
    let samples = rows
        .iter()
        .map(|r| ResponseSample {
            omega: r.omega_mhz,
            transmission: r.transmission,
            phase_deg: r.phase_deg,
        })
        .collect();
    let weighted = rows.iter().filter(|r| r.weight_t.is_some() && r.weight_phi.is_some()).count();
    let weights = if weighted == 0 && rows.iter().all(|r| r.weight_t.is_none() && r.weight_phi.is_none()) {
        None
    } else if weighted == rows.len() {
        Some(rows.iter().map(|r| (r.weight_t.unwrap_or(1.0), r.weight_phi.unwrap_or(1.0))).collect())
    } else {
        return Err(CliError::Config("weights must be given for both channels on every row or not at all".into()));
    };
    Ok((samples, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kerr_round_trip() {
        let rows = vec![
            KerrRow { m_pump: 0.0, phi_probe_deg: -8.416_600_000_000_001 },
            KerrRow { m_pump: 0.1, phi_probe_deg: 1e-20 },
        ];
        let bytes = to_csv(&rows).unwrap();
        assert!(bytes.starts_with(b"m_pump,phi_probe_deg\n"));
        assert_eq!(from_csv::<KerrRow>(&bytes).unwrap(), rows);
    }

    #[test]
    fn response_headers_and_weights() {
        let plain = b"omega_mhz,transmission,phase_deg\n0,0.1,0\n10,0.2,3.5\n";
        let rows: Vec<ResponseRow> = from_csv(plain).unwrap();
        let (s, w) = response_samples(&rows).unwrap();
        assert_eq!(s.len(), 2);
        assert!(w.is_none());
        assert_eq!(from_csv::<ResponseRow>(&to_csv(&rows).unwrap()).unwrap(), rows);

        let weighted = b"omega_mhz,transmission,phase_deg,weight_t,weight_phi\n0,0.1,0,2,3\n";
        let rows: Vec<ResponseRow> = from_csv(weighted).unwrap();
        assert_eq!(response_samples(&rows).unwrap().1, Some(vec![(2.0, 3.0)]));
        let again = to_csv(&rows).unwrap();
        assert!(again.starts_with(b"omega_mhz,transmission,phase_deg,weight_t,weight_phi\n"));
        assert_eq!(from_csv::<ResponseRow>(&again).unwrap(), rows);

        let mixed = b"omega_mhz,transmission,phase_deg,weight_t,weight_phi\n0,0.1,0,2,3\n1,0.1,0,,\n";
        let rows: Vec<ResponseRow> = from_csv(mixed).unwrap();
        assert!(response_samples(&rows).is_err());
    }

    #[test]
    fn malformed_rows_are_config_errors() {
        assert!(matches!(from_csv::<KerrRow>(b"m_pump,phi_probe_deg\nx,1\n"), Err(CliError::Config(_))));
    }
}
