//! Weak-field transmission of the coupled atom-cavity system, polarimetric
//! readout, and least-squares recovery of the mean atom number.
//!
//! The transmission amplitude is normalized to the empty cavity at the same
//! probe detuning:
//!
//! ```text
//! t(Ω) = (κ − iΩ)(γ − iΩ_A) / [(κ − iΩ)(γ − iΩ_A) + N̄ g₊²],   Ω_A = Ω − (ω_A − ω_C)
//! ```
//!
//! with `e^{−iωt}` time dependence, so `T = |t|²` and `φ = arg t`. The 2π
//! between linear and angular frequency cancels in the ratio.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::lsq::{invert_small, levenberg_marquardt, normal_equations, LmOptions};
use crate::params::RateSet;
use crate::scalar::{lit, to_degrees, to_radians, wrap_angle, Real};

/// One probe-detuning point of a response curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseSample<T> {
    /// Probe detuning Ω_a in MHz.
    pub omega: T,
    /// Transmitted power ratio T_a (atoms present / empty cavity).
    pub transmission: T,
    /// Differential σ₊/σ₋ phase φ_a in degrees.
    pub phase_deg: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationReadout<T> {
    /// Major-axis rotation in degrees, in (−90°, 90°].
    pub rotation_deg: T,
    /// |σ₊ out| / |σ₋ out|.
    pub amplitude_ratio: T,
}

fn amplitude_raw<T: Real>(omega: T, atom_offset: T, g: T, kappa: T, gamma: T, mean_atoms: T) -> Complex<T> {
    let cav = Complex::new(kappa, -omega);
    let atom = Complex::new(gamma, -(omega - atom_offset));
    let p = cav * atom;
    p / (p + Complex::new(mean_atoms * g * g, T::zero()))
}

/// Normalized transmission amplitude with coincident atom and cavity
/// resonances.
pub fn coupled_amplitude<T: Real>(omega: T, rates: &RateSet<T>, mean_atoms: T) -> Complex<T> {
    coupled_amplitude_detuned(omega, T::zero(), rates, mean_atoms)
}

/// Normalized transmission amplitude for an atom detuned by
/// `atom_cavity_offset = ω_A − ω_C` (MHz).
pub fn coupled_amplitude_detuned<T: Real>(
    omega: T,
    atom_cavity_offset: T,
    rates: &RateSet<T>,
    mean_atoms: T,
) -> Complex<T> {
    amplitude_raw(omega, atom_cavity_offset, rates.g_plus, rates.kappa, rates.gamma, mean_atoms)
}

fn sample_from<T: Real>(omega: T, t: Complex<T>) -> ResponseSample<T> {
    ResponseSample {
        omega,
        transmission: t.norm_sqr(),
        phase_deg: to_degrees(t.arg()),
    }
}

pub fn response_curve<T: Real>(omega_grid: &[T], rates: &RateSet<T>, mean_atoms: T) -> Vec<ResponseSample<T>> {
    omega_grid
        .iter()
        .map(|&w| sample_from(w, coupled_amplitude(w, rates, mean_atoms)))
        .collect()
}

/// Rotation of the major axis of the output polarization ellipse,
/// `(arg σ₊ − arg σ₋)/2`, for a linearly polarized input.
pub fn polarization_readout<T: Real>(
    sigma_plus: Complex<T>,
    sigma_minus: Complex<T>,
) -> Result<PolarizationReadout<T>> {
    let (ap, am) = (sigma_plus.norm(), sigma_minus.norm());
    if ap == T::zero() && am == T::zero() {
        return Err(Error::UndefinedPolarization);
    }
    let diff = if ap == T::zero() || am == T::zero() {
        T::zero()
    } else {
        wrap_angle(sigma_plus.arg() - sigma_minus.arg())
    };
    Ok(PolarizationReadout {
        rotation_deg: to_degrees(diff) / lit(2.0),
        amplitude_ratio: if am == T::zero() { T::infinity() } else { ap / am },
    })
}

/// Gaussian measurement noise for synthetic response data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseNoise<T> {
    pub sigma_transmission: T,
    pub sigma_phase_deg: T,
}

/// Model curve plus seeded Gaussian noise on both channels.
pub fn synthetic_samples<T: Real>(
    omega_grid: &[T],
    rates: &RateSet<T>,
    mean_atoms: T,
    noise: ResponseNoise<T>,
    seed: u64,
) -> Result<Vec<ResponseSample<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let to64 = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let nt = Normal::new(0.0, to64(noise.sigma_transmission))
        .map_err(|e| Error::InvalidParameter(format!("transmission noise: {e}")))?;
    let np = Normal::new(0.0, to64(noise.sigma_phase_deg))
        .map_err(|e| Error::InvalidParameter(format!("phase noise: {e}")))?;
    Ok(response_curve(omega_grid, rates, mean_atoms)
        .into_iter()
        .map(|s| ResponseSample {
            omega: s.omega,
            transmission: s.transmission + lit(nt.sample(&mut rng)),
            phase_deg: s.phase_deg + lit(np.sample(&mut rng)),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMode {
    /// Fit N̄ with all rates fixed.
    #[default]
    AtomNumber,
    /// Fit (N̄, g₊, κ) jointly.
    AtomNumberCouplingDecay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions<T> {
    pub mode: FitMode,
    pub max_iterations: usize,
    pub step_tol: T,
    /// Per-sample `(weight_T, weight_φ)`; equal weights when absent.
    pub weights: Option<Vec<(T, T)>>,
    pub atom_cavity_offset: T,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            mode: FitMode::AtomNumber,
            max_iterations: 200,
            step_tol: lit(1e-9),
            weights: None,
            atom_cavity_offset: T::zero(),
        }
    }
}

/// Estimate with standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub mean_atoms: Estimate<T>,
    /// Present in [`FitMode::AtomNumberCouplingDecay`].
    pub g_plus: Option<Estimate<T>>,
    pub kappa: Option<Estimate<T>>,
    /// `‖r‖` of the weighted residual vector at the optimum.
    pub residual_norm: T,
    pub converged: bool,
    pub iterations: usize,
    /// Curvature matrix was singular; standard errors are infinite.
    pub degenerate: bool,
}

/// Least-squares N̄ (and optionally g₊, κ) over both the transmission and
/// the phase channel; φ residuals are in radians.
pub fn fit_atom_number<T: Real>(
    samples: &[ResponseSample<T>],
    rates: &RateSet<T>,
    initial_guess: T,
    opts: &FitOptions<T>,
) -> Result<FitResult<T>> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: samples.len() });
    }
    if let Some(w) = &opts.weights {
        if w.len() != samples.len() {
            return Err(Error::Dimension(format!("{} weights for {} samples", w.len(), samples.len())));
        }
    }
    rates.validate()?;
    let gamma = rates.gamma;
    let offset = opts.atom_cavity_offset;
    let weights = opts.weights.clone();
    let (g0, k0) = (rates.g_plus, rates.kappa);
    let extended = opts.mode == FitMode::AtomNumberCouplingDecay;

    let residual = |p: &[T]| -> Vec<T> {
        let (n, g, k) = if extended { (p[0], p[1], p[2]) } else { (p[0], g0, k0) };
        let mut out = Vec::with_capacity(2 * samples.len());
        for (i, s) in samples.iter().enumerate() {
            let t = amplitude_raw(s.omega, offset, g, k, gamma, n);
            let (wt, wp) = weights.as_ref().map_or((T::one(), T::one()), |w| w[i]);
            out.push(wt * (t.norm_sqr() - s.transmission));
            out.push(wp * wrap_angle(t.arg() - to_radians(s.phase_deg)));
        }
        out
    };

    let x0: Vec<T> = if extended { vec![initial_guess, g0, k0] } else { vec![initial_guess] };
    let lm = LmOptions {
        max_iterations: opts.max_iterations,
        step_tol: opts.step_tol,
        ..LmOptions::default()
    };
    let out = levenberg_marquardt(residual, &x0, &lm);

    let m = out.residuals.len();
    let p = out.params.len();
    let rss = out.cost * lit(2.0);
    let dof = if m > p { lit::<T>((m - p) as f64) } else { T::one() };
    let s2 = rss / dof;
    let (jtj, _) = normal_equations(&out.jacobian, &out.residuals);
    let cov = invert_small(&jtj).filter(|c| (0..p).all(|i| c[i][i].is_finite() && c[i][i] >= T::zero()));
    let degenerate = cov.is_none();
    let se = |i: usize| match &cov {
        Some(c) => (s2 * c[i][i]).sqrt(),
        None => T::infinity(),
    };
    let est = |i: usize| Estimate { value: out.params[i], std_error: se(i) };

    Ok(FitResult {
        mean_atoms: est(0),
        g_plus: extended.then(|| est(1)),
        kappa: extended.then(|| est(2)),
        residual_norm: rss.sqrt(),
        converged: out.converged,
        iterations: out.iterations,
        degenerate,
    })
}
