//! Two-mode conditional phase transformation on the {0,1} photon subspace.
//!
//! Amplitudes of two-mode states are ordered `|j⟩_a|k⟩_b → 2j + k`. In the
//! polarization basis `0 ↔ 1⁻`, `1 ↔ 1⁺`, which fixes the order
//! `(−−, −+, +−, ++)` used everywhere in the crate.

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use crate::qlinalg::{partial_trace, ComplexMatrix, KetState};
use crate::scalar::{lit, to_degrees, to_radians, Real};

/// Largest mean photon number per mode accepted by [`coherent_output`].
pub const WEAK_FIELD_LIMIT: f64 = 0.2;
/// Coherence magnitude below which the reduced phase is undefined.
pub const COHERENCE_FLOOR: f64 = 1e-14;
/// Default upper end of the linear regime for slope fits.
pub const DEFAULT_MAX_M: f64 = 0.3;

pub const BASIS_LABELS: [&str; 4] = ["--", "-+", "+-", "++"];

/// Phases `μ_jk` (radians) acquired by `|j⟩_a|k⟩_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTable<T> {
    pub mu00: T,
    pub mu01: T,
    pub mu10: T,
    pub mu11: T,
}

impl<T: Real> PhaseTable<T> {
    pub fn new(mu00: T, mu01: T, mu10: T, mu11: T) -> Result<Self> {
        let t = Self { mu00, mu01, mu10, mu11 };
        if !t.as_array().iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("phase table entries must be finite".into()));
        }
        Ok(t)
    }

    pub fn from_angles(angles: &QpgAngles<T>) -> Self {
        let (a, b, d) = (to_radians(angles.phi_a), to_radians(angles.phi_b), to_radians(angles.delta));
        Self {
            mu00: T::zero(),
            mu01: b,
            mu10: a,
            mu11: a + b + d,
        }
    }

    /// Drops the global phase `μ00`.
    pub fn to_angles(&self) -> QpgAngles<T> {
        QpgAngles::new(
            to_degrees(self.mu10 - self.mu00),
            to_degrees(self.mu01 - self.mu00),
            to_degrees(self.conditional_phase()),
        )
    }

    /// `Δ = μ11 − μ10 − μ01 + μ00`.
    pub fn conditional_phase(&self) -> T {
        self.mu11 - self.mu10 - self.mu01 + self.mu00
    }

    /// In basis order `00, 01, 10, 11`.
    pub fn as_array(&self) -> [T; 4] {
        [self.mu00, self.mu01, self.mu10, self.mu11]
    }
}

/// Single-beam phases and conditional phase, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QpgAngles<T> {
    pub phi_a: T,
    pub phi_b: T,
    pub delta: T,
    pub phi_a_err: Option<T>,
    pub phi_b_err: Option<T>,
    pub delta_err: Option<T>,
}

impl<T: Real> QpgAngles<T> {
    pub fn new(phi_a: T, phi_b: T, delta: T) -> Self {
        Self {
            phi_a,
            phi_b,
            delta,
            phi_a_err: None,
            phi_b_err: None,
            delta_err: None,
        }
    }

    /// `φ_a = 17.5 ± 1°`, `φ_b = 12.5 ± 1°`, `Δ = 16 ± 3°`.
    pub fn measured() -> Self {
        Self {
            phi_a_err: Some(T::one()),
            phi_b_err: Some(T::one()),
            delta_err: Some(lit(3.0)),
            ..Self::new(lit(17.5), lit(12.5), lit(16.0))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.phi_a, self.phi_b, self.delta].iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("angles must be finite".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `{|0⟩, |1⟩}` photon number per mode.
    Occupation,
    /// `{|1⁻⟩, |1⁺⟩}` single-photon polarization per mode.
    Polarization,
}

impl Basis {
    fn name(self) -> &'static str {
        match self {
            Basis::Occupation => "occupation",
            Basis::Polarization => "polarization",
        }
    }
}

/// Normalized two-qubit ket with a basis tag.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState<T> {
    ket: KetState<T>,
    basis: Basis,
}

impl<T: Real> TwoModeState<T> {
    pub fn new(amplitudes: [Complex<T>; 4], basis: Basis) -> Result<Self> {
        let ket = KetState::new(amplitudes.to_vec(), vec![2, 2])?;
        if !ket.is_normalized() {
            return Err(Error::InvalidState(format!("norm² {} differs from 1", ket.norm_sqr())));
        }
        Ok(Self { ket, basis })
    }

    /// Normalizes `amplitudes` first.
    pub fn normalized(amplitudes: [Complex<T>; 4], basis: Basis) -> Result<Self> {
        let ket = KetState::new(amplitudes.to_vec(), vec![2, 2])?.normalized()?;
        Ok(Self { ket, basis })
    }

    pub fn ket(&self) -> &KetState<T> {
        &self.ket
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> [Complex<T>; 4] {
        let a = self.ket.amplitudes();
        [a[0], a[1], a[2], a[3]]
    }

    fn require(&self, basis: Basis) -> Result<()> {
        if self.basis != basis {
            return Err(Error::Basis {
                expected: basis.name(),
                found: self.basis.name(),
            });
        }
        Ok(())
    }
}

/// Multiplies the `|j⟩|k⟩` amplitude by `e^{iμ_jk}`.
pub fn apply_ansatz<T: Real>(state: &TwoModeState<T>, table: &PhaseTable<T>) -> Result<TwoModeState<T>> {
    state.require(Basis::Occupation)?;
    let mut amps = state.amplitudes();
    for (z, mu) in amps.iter_mut().zip(table.as_array()) {
        *z *= Complex::from_polar(T::one(), mu);
    }
    Ok(TwoModeState {
        ket: KetState::new(amps.to_vec(), vec![2, 2])?,
        basis: Basis::Occupation,
    })
}

/// Output for weak coherent inputs truncated to one photon per mode,
/// `(|0⟩ + α|1⟩)(|0⟩ + β|1⟩)`, normalized.
pub fn coherent_output<T: Real>(alpha: Complex<T>, beta: Complex<T>, angles: &QpgAngles<T>) -> Result<TwoModeState<T>> {
    angles.validate()?;
    let limit = lit::<T>(WEAK_FIELD_LIMIT);
    for (name, z) in [("alpha", alpha), ("beta", beta)] {
        if !(z.norm_sqr() <= limit) {
            return Err(Error::Validity(format!(
                "|{name}|² = {} exceeds the one-photon truncation limit {WEAK_FIELD_LIMIT}",
                z.norm_sqr()
            )));
        }
    }
    let one = Complex::one();
    let input = TwoModeState::normalized([one, beta, alpha, alpha * beta], Basis::Occupation)?;
    apply_ansatz(&input, &PhaseTable::from_angles(angles))
}

/// Phase (degrees) of the probe-mode coherence `⟨1|ρ_a|0⟩ = Tr_b(ρ)₁₀`,
/// which equals `arg⟨a⟩` on the one-photon subspace.
pub fn reduced_probe_phase<T: Real>(state: &TwoModeState<T>) -> Result<T> {
    state.require(Basis::Occupation)?;
    let rho_a = partial_trace(&state.ket.to_density(), &[0])?;
    let c = rho_a.matrix()[(1, 0)];
    if c.norm() < lit(COHERENCE_FLOOR) {
        return Err(Error::UndefinedPhase(c.norm().to_f64().unwrap_or(0.0)));
    }
    Ok(to_degrees(c.arg()))
}

/// How the initial slope `∂Φ_a/∂m_b` maps to the conditional phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlopeRelation {
    /// `s = −2 sin(Δ/2)`.
    Printed,
    /// `s = sin Δ`, the first-order expansion of [`reduced_probe_phase`].
    ReducedState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate<T> {
    /// Δ in degrees.
    pub delta: T,
    pub delta_err: T,
    /// Fitted slope in degrees per photon.
    pub slope: T,
    pub slope_err: T,
    /// Fitted Φ_a at m_b = 0, in degrees.
    pub intercept: T,
    pub intercept_err: T,
    pub relation: SlopeRelation,
}

impl<T: Real> DeltaEstimate<T> {
    /// Angles with `φ_a` from the intercept and a caller-supplied `φ_b`.
    pub fn to_angles(&self, phi_b: T) -> QpgAngles<T> {
        QpgAngles {
            phi_a_err: Some(self.intercept_err),
            delta_err: Some(self.delta_err),
            ..QpgAngles::new(self.intercept, phi_b, self.delta)
        }
    }
}

/// Straight-line fit of `(m_b, Φ_a°)` and inversion of the slope to Δ.
///
/// Every point must satisfy `0 ≤ m_b ≤ max_m`. The uncertainty is the
/// ordinary least-squares standard error propagated through the inverse.
pub fn slope_extract_delta<T: Real>(curve: &[(T, T)], relation: SlopeRelation, max_m: T) -> Result<DeltaEstimate<T>> {
    if curve.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: curve.len() });
    }
    for &(m, phi) in curve {
        if !(m.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidParameter("curve points must be finite".into()));
        }
        if m < T::zero() || m > max_m {
            return Err(Error::Validity(format!("m_b = {m} outside the linear regime [0, {max_m}]")));
        }
    }
    let n = lit::<T>(curve.len() as f64);
    let mx = curve.iter().map(|p| p.0).sum::<T>() / n;
    let my = curve.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = curve.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let sxy = curve.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    if sxx <= T::zero() {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = curve
        .iter()
        .map(|&(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum::<T>();
    let s2 = rss / (n - lit(2.0));
    let slope_err = (s2 / sxx).sqrt();
    let intercept_err = (s2 * (T::one() / n + mx * mx / sxx)).sqrt();

    let s = to_radians(slope);
    let (delta, ddelta_ds) = match relation {
        SlopeRelation::Printed => {
            let x = -s / lit(2.0);
            if x.abs() > T::one() {
                return Err(Error::NonInvertibleSlope(slope.to_f64().unwrap_or(f64::NAN)));
            }
            (lit::<T>(2.0) * x.asin(), T::one() / (T::one() - x * x).sqrt())
        }
        SlopeRelation::ReducedState => {
            if s.abs() > T::one() {
                return Err(Error::NonInvertibleSlope(slope.to_f64().unwrap_or(f64::NAN)));
            }
            (s.asin(), T::one() / (T::one() - s * s).sqrt())
        }
    };
    Ok(DeltaEstimate {
        delta: to_degrees(delta),
        // dΔ/ds is dimensionless once both are in the same angular unit
        delta_err: ddelta_ds * slope_err,
        slope,
        slope_err,
        intercept,
        intercept_err,
        relation,
    })
}

/// Diagonal gate on the polarization basis `(−−, −+, +−, ++)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTable<T> {
    pub diagonal: [Complex<T>; 4],
    /// Phases in degrees, not wrapped.
    pub phases_deg: [T; 4],
    /// `max |U†U − I|`.
    pub unitarity_residual: T,
}

impl<T: Real> TruthTable<T> {
    pub fn matrix(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_diag(&self.diagonal)
    }

    pub fn apply(&self, state: &TwoModeState<T>) -> Result<TwoModeState<T>> {
        state.require(Basis::Polarization)?;
        let mut amps = state.amplitudes();
        for (z, u) in amps.iter_mut().zip(self.diagonal) {
            *z *= u;
        }
        Ok(TwoModeState {
            ket: KetState::new(amps.to_vec(), vec![2, 2])?,
            basis: Basis::Polarization,
        })
    }

    /// `phase(++) − phase(+−) − phase(−+) + phase(−−)` in degrees.
    pub fn conditional_phase(&self) -> T {
        let p = self.phases_deg;
        p[3] - p[2] - p[1] + p[0]
    }

    /// Four lines `label<TAB>phase`.
    pub fn to_text(&self) -> String {
        BASIS_LABELS
            .iter()
            .zip(self.phases_deg)
            .map(|(l, p)| format!("{l}\t{p}\n"))
            .collect()
    }
}

pub fn truth_table<T: Real>(angles: &QpgAngles<T>) -> TruthTable<T> {
    let phases_deg = [
        T::zero(),
        angles.phi_b,
        angles.phi_a,
        angles.phi_a + angles.phi_b + angles.delta,
    ];
    let diagonal = phases_deg.map(|p| Complex::from_polar(T::one(), to_radians(p)));
    let u = ComplexMatrix::from_diag(&diagonal);
    let unitarity_residual = (&u.dagger() * &u)
        .max_abs_diff(&ComplexMatrix::identity(4))
        .expect("4x4 shapes agree");
    TruthTable {
        diagonal,
        phases_deg,
        unitarity_residual,
    }
}
