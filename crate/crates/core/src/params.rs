//! Physical rates, detunings and the derived figures of merit.
//!
//! Every rate is a linear frequency in MHz (the quoted value of `rate/2π`).
//! Formulas that need angular frequencies multiply by 2π themselves.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Rates of one atom-cavity system, in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet<T> {
    pub g_plus: T,
    pub g_minus: T,
    pub kappa: T,
    pub gamma: T,
    pub transit_rate: T,
    pub atom_lifetime_ns: Option<T>,
}

impl<T: Real> RateSet<T> {
    pub fn new(g_plus: T, g_minus: T, kappa: T, gamma: T, transit_rate: T) -> Result<Self> {
        let rates = Self {
            g_plus,
            g_minus,
            kappa,
            gamma,
            transit_rate,
            atom_lifetime_ns: None,
        };
        rates.validate()?;
        Ok(rates)
    }

    /// Cesium `F=4, m=4` configuration: the weak σ₋ coupling is `g₊/√45`.
    pub fn cesium(g_plus: T, kappa: T, gamma: T, transit_rate: T) -> Result<Self> {
        Self::new(g_plus, g_plus / lit::<T>(45.0).sqrt(), kappa, gamma, transit_rate)
    }

    /// The experimental rates `(g₊, κ, γ, T₀⁻¹)/2π = (20, 75, 2.5, 0.7)` MHz with a
    /// 32 ns excited-state lifetime.
    pub fn reference() -> Self {
        let mut r = Self::cesium(lit(20.0), lit(75.0), lit(2.5), lit(0.7))
            .expect("reference rates are positive");
        r.atom_lifetime_ns = Some(lit(32.0));
        r
    }

    pub fn with_g_minus(mut self, g_minus: T) -> Result<Self> {
        self.g_minus = g_minus;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lifetime_ns(mut self, lifetime: T) -> Result<Self> {
        self.atom_lifetime_ns = Some(lifetime);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("g_plus", self.g_plus),
            ("g_minus", self.g_minus),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("transit_rate", self.transit_rate),
        ];
        for (name, v) in named.into_iter().chain(self.atom_lifetime_ns.map(|t| ("atom_lifetime_ns", t))) {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Converts a linear-frequency rate to angular units (rad/µs).
    pub fn angular(x: T) -> T {
        x * T::TAU()
    }
}

/// Frequency offsets in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Detunings<T> {
    /// Ω_a, probe frequency minus cavity resonance.
    pub probe_offset: T,
    /// Ω_b, pump frequency minus cavity resonance.
    pub pump_offset: T,
    /// ω_A − ω_C.
    pub atom_cavity_offset: T,
}

impl<T: Real> Detunings<T> {
    pub fn new(probe_offset: T, pump_offset: T) -> Result<Self> {
        Self::with_atom_offset(probe_offset, pump_offset, T::zero())
    }

    pub fn with_atom_offset(probe_offset: T, pump_offset: T, atom_cavity_offset: T) -> Result<Self> {
        if !(probe_offset.is_finite() && pump_offset.is_finite() && atom_cavity_offset.is_finite()) {
            return Err(Error::InvalidParameter("detunings must be finite".into()));
        }
        Ok(Self {
            probe_offset,
            pump_offset,
            atom_cavity_offset,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// κ > g₊²/κ > γ
    BadCavity,
    /// g₊ > κ > γ
    StrongCoupling,
    Other,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::BadCavity => "bad-cavity",
            Regime::StrongCoupling => "strong-coupling",
            Regime::Other => "other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities<T> {
    /// Saturation photon number `4γ²/(3g₊²)`.
    pub m0: T,
    /// Critical atom number `2κγ/g₊²`.
    pub n0: T,
    /// `N̄ g₊²/(2κγ)`.
    pub cooperativity: T,
    /// One-photon tipping angle `2·(2π g₊)·T₀` in radians.
    pub tipping_angle: T,
    pub regime: Regime,
}

pub fn classify<T: Real>(rates: &RateSet<T>) -> Result<Regime> {
    rates.validate()?;
    let (g, k, y) = (rates.g_plus, rates.kappa, rates.gamma);
    let g2k = g * g / k;
    Ok(if k > g2k && g2k > y {
        Regime::BadCavity
    } else if g > k && k > y {
        Regime::StrongCoupling
    } else {
        Regime::Other
    })
}

/// Transit time T₀ in µs: seven lifetimes when the lifetime is known,
/// otherwise the inverse of the angular transit rate.
pub fn transit_time_us<T: Real>(rates: &RateSet<T>) -> T {
    match rates.atom_lifetime_ns {
        Some(tau) => lit::<T>(7.0) * tau / lit(1000.0),
        None => T::one() / RateSet::angular(rates.transit_rate),
    }
}

pub fn derive<T: Real>(rates: &RateSet<T>, mean_atoms: T) -> Result<DerivedQuantities<T>> {
    if !(mean_atoms.is_finite() && mean_atoms >= T::zero()) {
        return Err(Error::InvalidParameter(format!("mean atom number must be >= 0, got {mean_atoms}")));
    }
    let regime = classify(rates)?;
    let (g, k, y) = (rates.g_plus, rates.kappa, rates.gamma);
    let g2 = g * g;
    let two = lit::<T>(2.0);
    Ok(DerivedQuantities {
        m0: lit::<T>(4.0) * y * y / (lit::<T>(3.0) * g2),
        n0: two * k * y / g2,
        cooperativity: mean_atoms * g2 / (two * k * y),
        tipping_angle: two * RateSet::angular(g) * transit_time_us(rates),
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(g: f64, k: f64, y: f64) -> RateSet<f64> {
        RateSet::cesium(g, k, y, 0.7).unwrap()
    }

    #[test]
    fn reference_constants() {
        let d = derive(&RateSet::<f64>::reference(), 1.0).unwrap();
        assert!((d.m0 - 1.0 / 48.0).abs() < 1e-15);
        assert!((d.n0 - 0.9375).abs() < 1e-15);
        assert!((d.cooperativity - 16.0 / 15.0).abs() < 1e-15);
        assert_eq!(d.regime, Regime::BadCavity);
    }

    #[test]
    fn unit_rates_without_atoms() {
        let d = derive(&rates(1., 1., 1.), 0.0).unwrap();
        assert!((d.m0 - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.n0, 2.0);
        assert_eq!(d.cooperativity, 0.0);
    }

    #[test]
    fn cooperativity_at_point_nine_atoms() {
        // 0.9 * 400 / (2 * 75 * 2.5) = 360 / 375
        let d = derive(&RateSet::<f64>::reference(), 0.9).unwrap();
        assert!((d.cooperativity - 0.96).abs() < 1e-15);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify(&rates(20., 75., 2.5)).unwrap(), Regime::BadCavity);
        assert_eq!(classify(&rates(75., 20., 2.5)).unwrap(), Regime::StrongCoupling);
        assert_eq!(classify(&rates(1., 1., 1.)).unwrap(), Regime::Other);
    }

    #[test]
    fn cesium_minus_coupling() {
        let r = RateSet::<f64>::reference();
        assert_eq!(r.g_minus, 20.0 / 45f64.sqrt());
        assert!((r.g_minus * 45f64.sqrt() - r.g_plus).abs() < 1e-14);
    }

    #[test]
    fn tipping_angle_in_own_convention() {
        // 2 · 2π·20 MHz · 224 ns ≈ 17.92π
        let d = derive(&RateSet::<f64>::reference(), 1.0).unwrap();
        assert!((d.tipping_angle / std::f64::consts::PI - 17.92).abs() < 1e-9);
        let no_tau = rates(20., 75., 2.5);
        let d2 = derive(&no_tau, 1.0).unwrap();
        assert!((d2.tipping_angle - 2.0 * 20.0 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(RateSet::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(RateSet::new(1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(RateSet::new(1.0, 1.0, 1.0, f64::NAN, 1.0).is_err());
        assert!(derive(&RateSet::<f64>::reference(), -0.1).is_err());
        assert!(Detunings::new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let d = derive(&RateSet::<f32>::reference(), 1.0).unwrap();
        assert!((d.n0 - 0.9375).abs() < 1e-6);
    }
}
