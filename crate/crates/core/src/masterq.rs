//! Truncated Fock-space Lindblad model of a three-level atom (`g`, `e₊`, `e₋`)
//! coupled to the σ₊ and σ₋ modes of one cavity.
//!
//! The Hamiltonian is written in the frame rotating at the frequency of the
//! coherent drive(s), which sit at `detunings.pump_offset`:
//!
//! ```text
//! H = −Ω_c Σ a±†a± − Ω_A Σ |e±⟩⟨e±| + Σ g±√N̄ (a±† |g⟩⟨e±| + h.c.) + Σ (ε± a±† + ε±* a±)
//! ```
//!
//! with collapse operators `√(2κ) a±` and `√(2γ) |g⟩⟨e±|`, so κ and γ are
//! field and dipole amplitude decay rates. All rates enter in angular units
//! (2π × MHz). Mean atom number enters as an effective coupling `g√N̄`.
//!
//! A weak probe on top of a pump-dressed steady state is handled in linear
//! response: with `δ` the probe-pump frequency difference, the first-order
//! density-matrix component at the probe frequency solves
//! `(L + iδ) ρ₁ = i[c†, ρ_ss]` and the probe field is `Tr(c ρ₁)`.

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{Detunings, RateSet};
use crate::qlinalg::{lu_solve, steady_null_solve, ComplexMatrix, DensityMatrix};
use crate::scalar::{lit, to_degrees, Real};

/// Largest superoperator (entries) the dense builder will assemble.
pub const MAX_SUPEROPERATOR_ENTRIES: usize = 10_000_000;
/// Top-Fock-level population that triggers a truncation warning.
pub const TRUNCATION_WARN: f64 = 1e-3;
/// Top-Fock-level population treated as a truncation failure in sweeps.
pub const TRUNCATION_FAIL: f64 = 1e-2;
/// Relative pivot below which the probe resolvent counts as singular.
pub const RESOLVENT_PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Plus,
    Minus,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::Plus => "sigma+",
            Polarization::Minus => "sigma-",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomCavityModel<T> {
    pub rates: RateSet<T>,
    pub detunings: Detunings<T>,
    pub mean_atoms: T,
    /// Fock cutoff per cavity mode.
    pub n_max: usize,
    pub include_sigma_minus_mode: bool,
    /// Drive on the σ₊ mode in MHz, at `detunings.pump_offset`.
    pub drive_plus: Complex<T>,
    /// Drive on the σ₋ mode in MHz, at `detunings.pump_offset`.
    pub drive_minus: Complex<T>,
    /// Extra excited-state dephasing at the transit rate.
    pub transit_dephasing: bool,
}

impl<T: Real> AtomCavityModel<T> {
    pub fn new(rates: RateSet<T>, detunings: Detunings<T>, mean_atoms: T) -> Self {
        Self {
            rates,
            detunings,
            mean_atoms,
            n_max: 3,
            include_sigma_minus_mode: true,
            drive_plus: Complex::zero(),
            drive_minus: Complex::zero(),
            transit_dephasing: false,
        }
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_drive(mut self, pol: Polarization, amplitude: Complex<T>) -> Self {
        match pol {
            Polarization::Plus => self.drive_plus = amplitude,
            Polarization::Minus => self.drive_minus = amplitude,
        }
        self
    }

    pub fn with_sigma_minus_mode(mut self, include: bool) -> Self {
        self.include_sigma_minus_mode = include;
        self
    }

    pub fn drive(&self, pol: Polarization) -> Complex<T> {
        match pol {
            Polarization::Plus => self.drive_plus,
            Polarization::Minus => self.drive_minus,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        if !(self.mean_atoms.is_finite() && self.mean_atoms >= T::zero()) {
            return Err(Error::InvalidParameter(format!("mean atom number {} < 0", self.mean_atoms)));
        }
        let d = &self.detunings;
        let finite = [d.probe_offset, d.pump_offset, d.atom_cavity_offset]
            .into_iter()
            .chain([self.drive_plus.re, self.drive_plus.im, self.drive_minus.re, self.drive_minus.im])
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("detunings and drives must be finite".into()));
        }
        Ok(())
    }

    /// `3·(n_max+1)^modes`.
    pub fn hilbert_dim(&self) -> usize {
        self.full_layout().dim()
    }

    fn full_layout(&self) -> Layout {
        Layout {
            plus: Some(self.n_max),
            minus: self.include_sigma_minus_mode.then_some(self.n_max),
        }
    }

    /// Steady field of the empty cavity under this model's drive,
    /// `−iε/(κ − iΩ_c)`.
    pub fn empty_cavity_amplitude(&self, pol: Polarization) -> Complex<T> {
        empty_response(&self.rates, self.detunings.pump_offset) * self.drive(pol)
    }
}

/// Field response of the empty cavity to unit drive at offset `omega`.
fn empty_response<T: Real>(rates: &RateSet<T>, omega: T) -> Complex<T> {
    -Complex::<T>::i() / Complex::new(rates.kappa, -omega)
}

/// Per-mode Fock cutoffs; `None` drops the mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    plus: Option<usize>,
    minus: Option<usize>,
}

impl Layout {
    fn dims(&self) -> Vec<usize> {
        self.plus
            .into_iter()
            .chain(self.minus)
            .map(|n| n + 1)
            .chain(std::iter::once(3))
            .collect()
    }

    fn dim(&self) -> usize {
        self.dims().iter().product()
    }
}

/// Operators of one layout, embedded in the full Hilbert space.
struct Operators<T> {
    dims: Vec<usize>,
    a_plus: Option<ComplexMatrix<T>>,
    a_minus: Option<ComplexMatrix<T>>,
    /// |g⟩⟨e₊|, |g⟩⟨e₋|
    lower_plus: ComplexMatrix<T>,
    lower_minus: ComplexMatrix<T>,
    excited_plus: ComplexMatrix<T>,
    excited_minus: ComplexMatrix<T>,
    /// Projector on the top Fock level of each present mode.
    top_plus: Option<ComplexMatrix<T>>,
    top_minus: Option<ComplexMatrix<T>>,
}

impl<T: Real> Operators<T> {
    fn new(layout: Layout) -> Self {
        let dims = layout.dims();
        let atom_slot = dims.len() - 1;
        let plus_slot = layout.plus.map(|_| 0);
        let minus_slot = layout.minus.map(|_| usize::from(layout.plus.is_some()));
        let embed = |slot: usize, op: ComplexMatrix<T>| -> ComplexMatrix<T> {
            dims.iter().enumerate().fold(ComplexMatrix::identity(1), |acc, (i, &d)| {
                if i == slot {
                    acc.kron(&op)
                } else {
                    acc.kron(&ComplexMatrix::identity(d))
                }
            })
        };
        let atom = |r: usize, c: usize| {
            let mut m = ComplexMatrix::zeros(3, 3);
            m[(r, c)] = Complex::one();
            embed(atom_slot, m)
        };
        let top = |n: usize, slot: usize| {
            let mut m = ComplexMatrix::zeros(n + 1, n + 1);
            m[(n, n)] = Complex::one();
            embed(slot, m)
        };
        Self {
            a_plus: layout.plus.zip(plus_slot).map(|(n, s)| embed(s, annihilation(n))),
            a_minus: layout.minus.zip(minus_slot).map(|(n, s)| embed(s, annihilation(n))),
            lower_plus: atom(0, 1),
            lower_minus: atom(0, 2),
            excited_plus: atom(1, 1),
            excited_minus: atom(2, 2),
            top_plus: layout.plus.zip(plus_slot).map(|(n, s)| top(n, s)),
            top_minus: layout.minus.zip(minus_slot).map(|(n, s)| top(n, s)),
            dims,
        }
    }

    fn field(&self, pol: Polarization) -> Option<&ComplexMatrix<T>> {
        match pol {
            Polarization::Plus => self.a_plus.as_ref(),
            Polarization::Minus => self.a_minus.as_ref(),
        }
    }
}

fn annihilation<T: Real>(n: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(n + 1, n + 1, |i, j| {
        if j == i + 1 {
            Complex::new(lit::<T>(j as f64).sqrt(), T::zero())
        } else {
            Complex::zero()
        }
    })
}

fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Nonzero entries of a matrix.
fn nonzeros<T: Real>(m: &ComplexMatrix<T>) -> Vec<(usize, usize, Complex<T>)> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            if !z.is_zero() {
                out.push((i, j, z));
            }
        }
    }
    out
}

/// `l += coeff · (a ⊗ b)` touching only nonzero entries.
fn add_kron<T: Real>(l: &mut ComplexMatrix<T>, a: &ComplexMatrix<T>, b: &ComplexMatrix<T>, coeff: Complex<T>) {
    let (br, bc) = (b.rows(), b.cols());
    let bnz = nonzeros(b);
    for (ai, aj, av) in nonzeros(a) {
        let f = av * coeff;
        for &(bi, bj, bv) in &bnz {
            l[(ai * br + bi, aj * bc + bj)] += f * bv;
        }
    }
}

fn check_size(d: usize) -> Result<()> {
    let entries = d.saturating_mul(d).saturating_mul(d).saturating_mul(d);
    if entries > MAX_SUPEROPERATOR_ENTRIES {
        return Err(Error::Size {
            entries,
            limit: MAX_SUPEROPERATOR_ENTRIES,
        });
    }
    Ok(())
}

fn assemble<T: Real>(model: &AtomCavityModel<T>, layout: Layout) -> Result<(ComplexMatrix<T>, Operators<T>)> {
    model.validate()?;
    let d = layout.dim();
    check_size(d)?;
    let ops = Operators::new(layout);
    let w = RateSet::<T>::angular;
    let r = &model.rates;
    let cav_detuning = w(model.detunings.pump_offset);
    let atom_detuning = w(model.detunings.pump_offset - model.detunings.atom_cavity_offset);
    let root_n = model.mean_atoms.sqrt();

    let mut h = (&ops.excited_plus + &ops.excited_minus).scale(real(-atom_detuning));
    let mut collapse = vec![
        ops.lower_plus.scale(real((lit::<T>(2.0) * w(r.gamma)).sqrt())),
        ops.lower_minus.scale(real((lit::<T>(2.0) * w(r.gamma)).sqrt())),
    ];
    if model.transit_dephasing {
        let rate = (lit::<T>(2.0) * w(r.transit_rate)).sqrt();
        collapse.push(ops.excited_plus.scale(real(rate)));
        collapse.push(ops.excited_minus.scale(real(rate)));
    }
    for (pol, g, lower) in [
        (Polarization::Plus, r.g_plus, &ops.lower_plus),
        (Polarization::Minus, r.g_minus, &ops.lower_minus),
    ] {
        let Some(a) = ops.field(pol) else { continue };
        let ad = a.dagger();
        h = &h + &(&ad * a).scale(real(-cav_detuning));
        let coupling = &ad * lower;
        h = &h + &(&coupling + &coupling.dagger()).scale(real(w(g) * root_n));
        let eps = model.drive(pol).scale(T::TAU());
        h = &h + &(&ad.scale(eps) + &a.scale(eps.conj()));
        collapse.push(a.scale(real((lit::<T>(2.0) * w(r.kappa)).sqrt())));
    }

    // L = −i I⊗H_eff + i conj(H_eff)⊗I + Σ conj(c)⊗c,  H_eff = H − (i/2) Σ c†c
    let mut h_eff = h;
    for c in &collapse {
        h_eff = &h_eff - &(&c.dagger() * c).scale(Complex::new(T::zero(), lit(0.5)));
    }
    let id = ComplexMatrix::identity(d);
    let mut l = ComplexMatrix::zeros(d * d, d * d);
    add_kron(&mut l, &id, &h_eff, -Complex::i());
    add_kron(&mut l, &h_eff.conj(), &id, Complex::i());
    for c in &collapse {
        add_kron(&mut l, &c.conj(), c, Complex::one());
    }
    Ok((l, ops))
}

/// Liouvillian superoperator on column-stacked density matrices for the full
/// model layout (σ₊ mode, σ₋ mode when included, atom).
pub fn build_liouvillian<T: Real>(model: &AtomCavityModel<T>) -> Result<ComplexMatrix<T>> {
    Ok(assemble(model, model.full_layout())?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyObservables<T> {
    pub m_plus: T,
    pub m_minus: T,
    pub amp_plus: Complex<T>,
    pub amp_minus: Complex<T>,
    /// Total excited-state population.
    pub atom_excitation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState<T> {
    pub rho: DensityMatrix<T>,
    pub observables: SteadyObservables<T>,
    /// Largest population of a top Fock level over the simulated modes.
    pub top_fock_population: T,
}

impl<T: Real> SteadyState<T> {
    /// Steady field normalized to the empty cavity at equal drive.
    pub fn transmission_amplitude(&self, model: &AtomCavityModel<T>, pol: Polarization) -> Result<Complex<T>> {
        let empty = model.empty_cavity_amplitude(pol);
        if empty.is_zero() {
            return Err(Error::InvalidParameter(format!("no drive on the {pol} mode")));
        }
        Ok(match pol {
            Polarization::Plus => self.observables.amp_plus,
            Polarization::Minus => self.observables.amp_minus,
        } / empty)
    }
}

fn solve_layout<T: Real>(model: &AtomCavityModel<T>, layout: Layout) -> Result<(SteadyState<T>, ComplexMatrix<T>, Operators<T>)> {
    let (l, ops) = assemble(model, layout)?;
    let rho = steady_null_solve(&l)?.with_dims(ops.dims.clone())?;
    let ev = |op: &ComplexMatrix<T>| rho.expectation(op);
    let number = |a: &Option<ComplexMatrix<T>>| -> Result<(T, Complex<T>)> {
        match a {
            Some(a) => Ok((ev(&(&a.dagger() * a))?.re, ev(a)?)),
            None => Ok((T::zero(), Complex::zero())),
        }
    };
    let (mut m_plus, mut amp_plus) = number(&ops.a_plus)?;
    let (mut m_minus, mut amp_minus) = number(&ops.a_minus)?;
    // an absent mode is decoupled from the atom and behaves as an empty cavity
    if layout.plus.is_none() {
        amp_plus = model.empty_cavity_amplitude(Polarization::Plus);
        m_plus = amp_plus.norm_sqr();
    }
    if layout.minus.is_none() {
        amp_minus = model.empty_cavity_amplitude(Polarization::Minus);
        m_minus = amp_minus.norm_sqr();
    }
    let atom_excitation = ev(&(&ops.excited_plus + &ops.excited_minus))?.re;
    let mut top = T::zero();
    for p in [&ops.top_plus, &ops.top_minus].into_iter().flatten() {
        top = top.max(ev(p)?.re);
    }
    if top > lit(TRUNCATION_WARN) {
        log::warn!("top Fock level population {top:e} exceeds {TRUNCATION_WARN:e}; raise n_max");
    }
    let state = SteadyState {
        rho,
        observables: SteadyObservables {
            m_plus,
            m_minus,
            amp_plus,
            amp_minus,
            atom_excitation,
        },
        top_fock_population: top,
    };
    Ok((state, l, ops))
}

/// Steady state of the full model layout.
pub fn steady_state<T: Real>(model: &AtomCavityModel<T>) -> Result<SteadyState<T>> {
    Ok(solve_layout(model, model.full_layout())?.0)
}

/// Steady state on the smallest exact layout: undriven modes stay in vacuum
/// and are left out of `rho`; their observables are still reported.
pub fn driven_steady_state<T: Real>(model: &AtomCavityModel<T>) -> Result<SteadyState<T>> {
    model.validate()?;
    Ok(solve_layout(model, pump_probe_layout(model, None))?.0)
}

/// Smallest exact layout for a pump-probe calculation: driven modes keep
/// `n_max`, an undriven probed mode needs only one photon at linear order,
/// and modes that are neither driven nor probed stay in vacuum and drop out.
fn pump_probe_layout<T: Real>(model: &AtomCavityModel<T>, probe: Option<Polarization>) -> Layout {
    let pick = |pol: Polarization, present: bool| -> Option<usize> {
        if !present {
            None
        } else if !model.drive(pol).is_zero() {
            Some(model.n_max)
        } else if probe == Some(pol) {
            Some(1)
        } else {
            None
        }
    };
    Layout {
        plus: pick(Polarization::Plus, true),
        minus: pick(Polarization::Minus, model.include_sigma_minus_mode),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResponse<T> {
    /// Probe transmission amplitude normalized to the empty cavity.
    pub amplitude: Complex<T>,
    /// Intracavity photon number of the pumped mode(s).
    pub m_pump: T,
    pub top_fock_population: T,
}

fn check_truncation<T: Real>(top: T) -> Result<()> {
    if top > lit(TRUNCATION_FAIL) {
        return Err(Error::Truncation(top.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// Linear response of a weak probe at `probe_offset` (MHz) on the
/// `probe` mode, on top of the steady state of the model's drives.
pub fn probe_response<T: Real>(
    model: &AtomCavityModel<T>,
    probe: Polarization,
    probe_offset: T,
) -> Result<ProbeResponse<T>> {
    model.validate()?;
    if probe == Polarization::Minus && !model.include_sigma_minus_mode {
        let (ss, _, _) = solve_layout(model, pump_probe_layout(model, None))?;
        return Ok(ProbeResponse {
            amplitude: Complex::one(),
            m_pump: pumped_photons(model, &ss.observables),
            top_fock_population: ss.top_fock_population,
        });
    }
    let layout = pump_probe_layout(model, Some(probe));
    let (ss, l, ops) = solve_layout(model, layout)?;
    check_truncation(ss.top_fock_population)?;

    let c = ops.field(probe).expect("probed mode is in the layout");
    let cd = c.dagger();
    let rho = ss.rho.matrix();
    let source = &(&cd * rho) - &(rho * &cd);
    let b: Vec<Complex<T>> = source.scale(Complex::i()).vectorize();

    let w = RateSet::<T>::angular;
    let delta = w(probe_offset - model.detunings.pump_offset);
    let shift = w(model.rates.kappa);
    let n2 = l.rows();
    let d = rho.rows();
    let rho_vec = rho.vectorize();
    let mut m = l;
    for i in 0..n2 {
        m[(i, i)] += Complex::new(T::zero(), delta);
    }
    // rank-one term fixes the component along ρ_ss; the solution is traceless
    // so it does not change the answer, but it removes the zero mode at δ = 0
    for k in 0..d {
        let col = k + k * d;
        for (i, &r) in rho_vec.iter().enumerate() {
            m[(i, col)] += r * shift;
        }
    }
    let x = lu_solve(&m, &b, lit(RESOLVENT_PIVOT_TOL))?;
    let x = ComplexMatrix::unvectorize(&x, d)?;
    let mut field = Complex::<T>::zero();
    for i in 0..d {
        for j in 0..d {
            field += c[(i, j)] * x[(j, i)];
        }
    }
    // unit angular drive on the empty cavity gives −i/(κ − iΩ_a) in angular units
    let empty = empty_response(&model.rates, probe_offset) / T::TAU();
    Ok(ProbeResponse {
        amplitude: field / empty,
        m_pump: pumped_photons(model, &ss.observables),
        top_fock_population: ss.top_fock_population,
    })
}

fn pumped_photons<T: Real>(model: &AtomCavityModel<T>, obs: &SteadyObservables<T>) -> T {
    let mut m = T::zero();
    if !model.drive_plus.is_zero() {
        m += obs.m_plus;
    }
    if !model.drive_minus.is_zero() {
        m += obs.m_minus;
    }
    m
}

/// Complex probe transmission (normalized to the empty cavity) in the
/// presence of the model's pump drive; `arg` of the result is Φ_a.
pub fn probe_susceptibility<T: Real>(
    model: &AtomCavityModel<T>,
    probe: Polarization,
    probe_offset: T,
) -> Result<Complex<T>> {
    Ok(probe_response(model, probe, probe_offset)?.amplitude)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationPoint<T> {
    pub drive: T,
    pub m_a: T,
    pub transmission: T,
}

/// Resonant-probe saturation: steady state for each σ₊ drive amplitude,
/// with `T_a = |⟨a₊⟩|² / |⟨a₊⟩_empty|²`. A zero drive reports the
/// linear-response limit.
pub fn saturation_curve<T: Real>(model: &AtomCavityModel<T>, drive_grid: &[T]) -> Result<Vec<SaturationPoint<T>>> {
    model.validate()?;
    drive_grid
        .par_iter()
        .map(|&eps| {
            let m = model
                .clone()
                .with_drive(Polarization::Plus, real(eps))
                .with_drive(Polarization::Minus, Complex::zero());
            if eps == T::zero() {
                let t = probe_susceptibility(&m, Polarization::Plus, m.detunings.pump_offset)?;
                return Ok(SaturationPoint { drive: eps, m_a: T::zero(), transmission: t.norm_sqr() });
            }
            let (ss, _, _) = solve_layout(&m, pump_probe_layout(&m, None))?;
            check_truncation(ss.top_fock_population)?;
            let t = ss.transmission_amplitude(&m, Polarization::Plus)?;
            Ok(SaturationPoint {
                drive: eps,
                m_a: ss.observables.m_plus,
                transmission: t.norm_sqr(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrPoint<T> {
    pub drive: T,
    /// Pump intracavity photon number m_b.
    pub m_pump: T,
    /// Probe phase Φ_a in degrees (`e^{−iωt}` convention).
    pub phi_probe_deg: T,
    pub probe_transmission: T,
}

/// Probe phase versus pump strength. The pump sits at
/// `detunings.pump_offset` on the `pump` mode, the probe at
/// `detunings.probe_offset` on the `probe` mode.
pub fn kerr_curve<T: Real>(
    model: &AtomCavityModel<T>,
    pump: Polarization,
    probe: Polarization,
    pump_grid: &[T],
) -> Result<Vec<KerrPoint<T>>> {
    model.validate()?;
    pump_grid
        .par_iter()
        .map(|&eps| {
            let m = model
                .clone()
                .with_drive(Polarization::Plus, Complex::zero())
                .with_drive(Polarization::Minus, Complex::zero())
                .with_drive(pump, real(eps));
            let r = probe_response(&m, probe, m.detunings.probe_offset)?;
            Ok(KerrPoint {
                drive: eps,
                m_pump: r.m_pump,
                phi_probe_deg: to_degrees(r.amplitude.arg()),
                probe_transmission: r.amplitude.norm_sqr(),
            })
        })
        .collect()
}

/// Intracavity photon number of the `pump` mode for a real drive amplitude.
pub fn pump_photon_number<T: Real>(model: &AtomCavityModel<T>, pump: Polarization, drive: T) -> Result<T> {
    let m = model
        .clone()
        .with_drive(Polarization::Plus, Complex::zero())
        .with_drive(Polarization::Minus, Complex::zero())
        .with_drive(pump, real(drive));
    if drive == T::zero() {
        return Ok(T::zero());
    }
    let (ss, _, _) = solve_layout(&m, pump_probe_layout(&m, None))?;
    Ok(match pump {
        Polarization::Plus => ss.observables.m_plus,
        Polarization::Minus => ss.observables.m_minus,
    })
}

/// Real drive amplitude giving `target` intracavity photons in the `pump`
/// mode, by bracketing and bisection on the monotone map drive → m.
pub fn drive_for_photon_number<T: Real>(model: &AtomCavityModel<T>, pump: Polarization, target: T) -> Result<T> {
    if !(target.is_finite() && target >= T::zero()) {
        return Err(Error::InvalidParameter(format!("target photon number {target} < 0")));
    }
    if target == T::zero() {
        return Ok(T::zero());
    }
    // empty-cavity estimate: m = ε²/(κ² + Ω²)
    let k = model.rates.kappa;
    let o = model.detunings.pump_offset;
    let mut hi = (target * (k * k + o * o)).sqrt();
    let mut lo = T::zero();
    let mut guard = 0;
    while pump_photon_number(model, pump, hi)? < target {
        lo = hi;
        hi = hi * lit(2.0);
        guard += 1;
        if guard > 60 {
            return Err(Error::InvalidParameter("photon number target unreachable".into()));
        }
    }
    // Illinois false position on f(ε) = m(ε) − target
    let f = |e: T| pump_photon_number(model, pump, e).map(|m| m - target);
    let mut flo = if lo == T::zero() { -target } else { f(lo)? };
    let mut fhi = f(hi)?;
    let mut side = 0i8;
    for _ in 0..100 {
        let mid = (lo * fhi - hi * flo) / (fhi - flo);
        let fm = f(mid)?;
        if fm.abs() <= target * lit(1e-10) || hi - lo <= hi * lit(1e-12) {
            return Ok(mid);
        }
        if fm < T::zero() {
            lo = mid;
            flo = fm;
            if side == -1 {
                fhi *= lit(0.5);
            }
            side = -1;
        } else {
            hi = mid;
            fhi = fm;
            if side == 1 {
                flo *= lit(0.5);
            }
            side = 1;
        }
    }
    Ok((lo + hi) * lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::coupled_amplitude;

    fn model_at(n: f64, pump_offset: f64, probe_offset: f64) -> AtomCavityModel<f64> {
        AtomCavityModel::new(RateSet::reference(), Detunings::new(probe_offset, pump_offset).unwrap(), n)
    }

    #[test]
    fn hilbert_dimension() {
        let m = model_at(1.0, 0.0, 0.0);
        assert_eq!(m.hilbert_dim(), 48);
        assert_eq!(m.clone().with_sigma_minus_mode(false).hilbert_dim(), 12);
        assert_eq!(m.with_n_max(5).with_sigma_minus_mode(false).hilbert_dim(), 18);
    }

    #[test]
    fn size_guard() {
        let m = model_at(1.0, 0.0, 0.0).with_n_max(6);
        assert!(matches!(build_liouvillian(&m), Err(Error::Size { .. })));
    }

    #[test]
    fn generator_is_trace_preserving() {
        let m = model_at(0.8, 12.0, 0.0)
            .with_n_max(2)
            .with_drive(Polarization::Plus, Complex::new(3.0, 1.0))
            .with_drive(Polarization::Minus, Complex::new(0.0, 2.0));
        let l = build_liouvillian(&m).unwrap();
        let d = m.hilbert_dim();
        // vec(I)ᵀ L = 0
        for col in 0..d * d {
            let s = (0..d).fold(Complex::<f64>::zero(), |acc, k| acc + l[(k + k * d, col)]);
            assert!(s.norm() < 1e-9, "column {col}: {s}");
        }
    }

    #[test]
    fn undriven_uncoupled_model_relaxes_to_vacuum_ground() {
        let r = RateSet::<f64>::reference();
        let m = AtomCavityModel::new(r, Detunings::default(), 0.0)
            .with_n_max(2)
            .with_sigma_minus_mode(false);
        let ss = steady_state(&m).unwrap();
        assert!((ss.rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(ss.observables.m_plus.abs() < 1e-12);
        assert!(ss.observables.atom_excitation.abs() < 1e-12);
    }

    #[test]
    fn driven_empty_cavity_matches_closed_form() {
        let m = model_at(0.0, 17.0, 17.0)
            .with_sigma_minus_mode(false)
            .with_n_max(8)
            .with_drive(Polarization::Plus, Complex::new(20.0, 0.0));
        let ss = steady_state(&m).unwrap();
        let expect = Complex::new(0.0, -20.0) / Complex::new(75.0, -17.0);
        assert!((ss.observables.amp_plus - expect).norm() < 1e-10);
        assert!((ss.observables.m_plus - expect.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn weak_drive_reproduces_analytic_response() {
        let m = model_at(1.0, 20.0, 20.0)
            .with_sigma_minus_mode(false)
            .with_drive(Polarization::Plus, Complex::new(0.01, 0.0));
        let ss = steady_state(&m).unwrap();
        let t = ss.transmission_amplitude(&m, Polarization::Plus).unwrap();
        let expect = coupled_amplitude(20.0, &m.rates, 1.0);
        assert!((t.norm() / expect.norm() - 1.0).abs() < 1e-3);
        assert!((t.arg() - expect.arg()).abs() < 1e-3 * expect.arg().abs());
        ss.rho.check_physical().unwrap();
    }

    #[test]
    fn excluded_minus_mode_is_an_empty_cavity() {
        let m = model_at(1.0, 5.0, 5.0)
            .with_sigma_minus_mode(false)
            .with_drive(Polarization::Minus, Complex::new(2.0, 0.0));
        let ss = steady_state(&m).unwrap();
        assert_eq!(ss.transmission_amplitude(&m, Polarization::Minus).unwrap(), Complex::new(1.0, 0.0));
        assert_eq!(probe_susceptibility(&m, Polarization::Minus, 5.0).unwrap(), Complex::new(1.0, 0.0));
    }

    #[test]
    fn pump_off_susceptibility_is_linear_response() {
        for (pump, probe) in [(20.0, 30.0), (0.0, 0.0), (-15.0, 40.0)] {
            let m = model_at(0.9, pump, probe);
            let t = probe_susceptibility(&m, Polarization::Plus, probe).unwrap();
            let expect = coupled_amplitude(probe, &m.rates, 0.9);
            assert!((t - expect).norm() < 1e-9, "{t} vs {expect}");
        }
    }

    #[test]
    fn probe_on_pumped_mode_at_pump_frequency_is_finite() {
        let m = model_at(0.9, 20.0, 20.0)
            .with_drive(Polarization::Plus, Complex::new(10.0, 0.0));
        let t = probe_susceptibility(&m, Polarization::Plus, 20.0).unwrap();
        assert!(t.norm().is_finite());
    }

    #[test]
    fn no_coupling_means_unit_saturation_transmission() {
        let m = model_at(0.0, 0.0, 0.0).with_n_max(6);
        let curve = saturation_curve(&m, &[0.0, 5.0, 20.0]).unwrap();
        for p in curve {
            assert!((p.transmission - 1.0).abs() < 1e-7, "{p:?}");
        }
    }

    #[test]
    fn saturation_flags_truncation() {
        let m = model_at(0.6, 0.0, 0.0).with_n_max(2);
        assert!(matches!(saturation_curve(&m, &[200.0]), Err(Error::Truncation(_))));
    }

    #[test]
    fn photon_number_inversion() {
        let m = model_at(0.9, 20.0, 30.0).with_n_max(5);
        let eps = drive_for_photon_number(&m, Polarization::Plus, 0.1).unwrap();
        let got = pump_photon_number(&m, Polarization::Plus, eps).unwrap();
        assert!((got - 0.1).abs() < 1e-9);
        assert_eq!(drive_for_photon_number(&m, Polarization::Plus, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn kerr_curve_single_point() {
        let m = model_at(0.9, 20.0, 30.0);
        let c = kerr_curve(&m, Polarization::Plus, Polarization::Plus, &[0.0]).unwrap();
        assert_eq!(c.len(), 1);
        let phi = coupled_amplitude(30.0, &m.rates, 0.9).arg().to_degrees();
        assert!((c[0].phi_probe_deg - phi).abs() < 1e-8);
        assert_eq!(c[0].m_pump, 0.0);
    }
}
