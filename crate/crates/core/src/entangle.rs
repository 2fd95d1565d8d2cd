//! Entanglement and CHSH analysis of two-qubit gate outputs.
//!
//! Two-qubit density matrices use the basis order `(−−, −+, +−, ++)`, i.e.
//! `|j⟩_a|k⟩_b → 2j + k`. The Pauli operators act on each qubit with
//! `|−⟩ ≡ |0⟩` and `|+⟩ ≡ |1⟩`.

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qlinalg::{hermitian_eigen, psd_sqrt, ComplexMatrix, DensityMatrix, PSD_TOL};
use crate::qpg::{truth_table, Basis, QpgAngles, TwoModeState};
use crate::scalar::{lit, to_radians, tol, Real};

/// Tolerance on the entries and symmetry of a decoherence mask.
pub const MASK_TOL: f64 = 1e-12;

/// Pairs of basis indices differing in exactly one qubit.
pub const SELF_COHERENCE_PAIRS: [(usize, usize); 4] = [(0, 1), (0, 2), (1, 3), (2, 3)];
/// Pairs of basis indices differing in both qubits.
pub const MUTUAL_COHERENCE_PAIRS: [(usize, usize); 2] = [(0, 3), (1, 2)];

/// Element-wise damping factors `d_jk` for a two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceMask<T> {
    d: [[T; 4]; 4],
}

impl<T: Real> DecoherenceMask<T> {
    /// Requires unit diagonal, symmetry and entries in `[0, 1]`.
    pub fn new(d: [[T; 4]; 4]) -> Result<Self> {
        let eps = tol::<T>(MASK_TOL);
        for i in 0..4 {
            if (d[i][i] - T::one()).abs() > eps {
                return Err(Error::InvalidParameter(format!("mask diagonal d[{i}][{i}] = {} must be 1", d[i][i])));
            }
            for j in 0..4 {
                let v = d[i][j];
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::InvalidParameter(format!("mask entry d[{i}][{j}] = {v} outside [0, 1]")));
                }
                if (v - d[j][i]).abs() > eps {
                    return Err(Error::InvalidParameter(format!("mask is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { d })
    }

    pub fn identity() -> Self {
        Self { d: [[T::one(); 4]; 4] }
    }

    fn with_pairs(pairs: &[(usize, usize)], value: T) -> Result<Self> {
        let mut d = [[T::one(); 4]; 4];
        for &(i, j) in pairs {
            d[i][j] = value;
            d[j][i] = value;
        }
        Self::new(d)
    }

    /// Every off-diagonal element damped by `value`.
    pub fn uniform(value: T) -> Result<Self> {
        let mut pairs = SELF_COHERENCE_PAIRS.to_vec();
        pairs.extend(MUTUAL_COHERENCE_PAIRS);
        Self::with_pairs(&pairs, value)
    }

    /// Only coherences between states differing in both qubits.
    pub fn mutual(value: T) -> Result<Self> {
        Self::with_pairs(&MUTUAL_COHERENCE_PAIRS, value)
    }

    /// Only coherences between states differing in one qubit.
    pub fn self_coherence(value: T) -> Result<Self> {
        Self::with_pairs(&SELF_COHERENCE_PAIRS, value)
    }

    /// Separate damping of self and mutual coherences. Local dephasing of
    /// both qubits by `λ` is `split(λ, λ²)`.
    pub fn split(self_value: T, mutual_value: T) -> Result<Self> {
        let mut m = Self::with_pairs(&SELF_COHERENCE_PAIRS, self_value)?;
        for (i, j) in MUTUAL_COHERENCE_PAIRS {
            m.d[i][j] = mutual_value;
            m.d[j][i] = mutual_value;
        }
        Self::new(m.d)
    }

    pub fn entries(&self) -> &[[T; 4]; 4] {
        &self.d
    }
}

/// One-parameter mask families for damping sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaskFamily {
    Uniform,
    Mutual,
    SelfCoherence,
}

impl MaskFamily {
    pub fn mask<T: Real>(self, d: T) -> Result<DecoherenceMask<T>> {
        match self {
            MaskFamily::Uniform => DecoherenceMask::uniform(d),
            MaskFamily::Mutual => DecoherenceMask::mutual(d),
            MaskFamily::SelfCoherence => DecoherenceMask::self_coherence(d),
        }
    }
}

/// Measurement directions (unit Bloch vectors) for the CHSH sum
/// `E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings<T> {
    pub a: [T; 3],
    pub a_prime: [T; 3],
    pub b: [T; 3],
    pub b_prime: [T; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshReport<T> {
    pub s_max: T,
    pub violating: bool,
    pub settings: ChshSettings<T>,
}

/// The input `(|1⁻⟩ + |1⁺⟩)_a (|1⁻⟩ + |1⁺⟩)_b / 2` after the gate.
pub fn qpg_plus_plus_output<T: Real>(angles: &QpgAngles<T>) -> Result<TwoModeState<T>> {
    angles.validate()?;
    let h = Complex::new(lit::<T>(0.5), T::zero());
    let input = TwoModeState::new([h; 4], Basis::Polarization)?;
    truth_table(angles).apply(&input)
}

/// `2√(1 + sin²(Δ/2))` for Δ in degrees.
pub fn chsh_formula<T: Real>(delta_deg: T) -> T {
    let s = (to_radians(delta_deg) / lit(2.0)).sin();
    lit::<T>(2.0) * (T::one() + s * s).sqrt()
}

fn pauli<T: Real>(k: usize) -> ComplexMatrix<T> {
    let (o, z) = (Complex::<T>::one(), Complex::<T>::zero());
    let i = Complex::<T>::i();
    let rows = match k {
        0 => [[z, o], [o, z]],
        1 => [[z, -i], [i, z]],
        _ => [[o, z], [z, -o]],
    };
    ComplexMatrix::from_fn(2, 2, |r, c| rows[r][c])
}

fn spin_along<T: Real>(n: &[T; 3]) -> ComplexMatrix<T> {
    (0..3).fold(ComplexMatrix::zeros(2, 2), |acc, k| {
        &acc + &pauli::<T>(k).scale(Complex::new(n[k], T::zero()))
    })
}

fn require_two_qubit<T: Real>(rho: &DensityMatrix<T>) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("expected a two-qubit state, got dimension {}", rho.dim())));
    }
    Ok(())
}

/// `T_ij = Tr[ρ σ_i ⊗ σ_j]`.
pub fn correlation_matrix<T: Real>(rho: &DensityMatrix<T>) -> Result<[[T; 3]; 3]> {
    require_two_qubit(rho)?;
    let mut t = [[T::zero(); 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = rho.expectation(&pauli::<T>(i).kron(&pauli(j)))?.re;
        }
    }
    Ok(t)
}

/// `⟨(a·σ) ⊗ (b·σ)⟩`.
pub fn correlation<T: Real>(rho: &DensityMatrix<T>, a: &[T; 3], b: &[T; 3]) -> Result<T> {
    require_two_qubit(rho)?;
    Ok(rho.expectation(&spin_along(a).kron(&spin_along(b)))?.re)
}

/// CHSH sum evaluated directly from expectation values.
pub fn chsh_value<T: Real>(rho: &DensityMatrix<T>, s: &ChshSettings<T>) -> Result<T> {
    Ok(correlation(rho, &s.a, &s.b)? + correlation(rho, &s.a, &s.b_prime)? + correlation(rho, &s.a_prime, &s.b)?
        - correlation(rho, &s.a_prime, &s.b_prime)?)
}

fn norm3<T: Real>(v: &[T; 3]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn unit_or<T: Real>(v: [T; 3], fallback: [T; 3]) -> [T; 3] {
    let n = norm3(&v);
    if n > tol(1e-12) {
        v.map(|x| x / n)
    } else {
        fallback
    }
}

/// Any unit vector orthogonal to `v` (assumed unit).
fn orthogonal<T: Real>(v: &[T; 3]) -> [T; 3] {
    let k = (0..3)
        .min_by(|&i, &j| v[i].abs().partial_cmp(&v[j].abs()).expect("finite"))
        .expect("three entries");
    let mut e = [T::zero(); 3];
    e[k] = T::one();
    let d = v[k];
    unit_or([e[0] - d * v[0], e[1] - d * v[1], e[2] - d * v[2]], [T::one(), T::zero(), T::zero()])
}

/// Maximal CHSH value from the two largest singular values of the
/// correlation matrix, with settings that attain it.
pub fn chsh_max<T: Real>(rho: &DensityMatrix<T>) -> Result<ChshReport<T>> {
    require_two_qubit(rho)?;
    rho.check_physical()?;
    chsh_operator_max(rho)
}

/// Largest expectation of the CHSH operator over all settings for any
/// Hermitian 4×4 matrix, without the positivity and trace checks of
/// [`chsh_max`]. Useful for masked matrices flagged as unphysical.
pub fn chsh_operator_max<T: Real>(rho: &DensityMatrix<T>) -> Result<ChshReport<T>> {
    require_two_qubit(rho)?;
    let herm = rho.hermiticity_error();
    if herm > tol(crate::qlinalg::HERMITIAN_TOL) {
        return Err(Error::InvalidState(format!("not Hermitian (max |ρ-ρ†| = {herm:e})")));
    }
    let t = correlation_matrix(rho)?;
    let tt = ComplexMatrix::from_fn(3, 3, |i, j| {
        Complex::new((0..3).map(|k| t[k][i] * t[k][j]).sum::<T>(), T::zero())
    });
    let (vals, vecs) = hermitian_eigen(&tt)?;
    // eigenvectors of a real symmetric matrix: remove the arbitrary phase
    let real_vec = |col: usize| -> [T; 3] {
        let v = [vecs[(0, col)], vecs[(1, col)], vecs[(2, col)]];
        let big = v.iter().copied().fold(Complex::zero(), |m: Complex<T>, z| if z.norm() > m.norm() { z } else { m });
        let phase = if big.norm() > T::zero() { big.conj() / big.norm() } else { Complex::one() };
        unit_or(v.map(|z| (z * phase).re), [T::one(), T::zero(), T::zero()])
    };
    let t1sq = vals[2].max(T::zero());
    let t2sq = vals[1].max(T::zero());
    let (t1, t2) = (t1sq.sqrt(), t2sq.sqrt());
    let c1 = real_vec(2);
    let mut c2 = real_vec(1);
    // re-orthogonalize against rounding
    let dot = (0..3).map(|k| c1[k] * c2[k]).sum::<T>();
    c2 = unit_or([c2[0] - dot * c1[0], c2[1] - dot * c1[1], c2[2] - dot * c1[2]], orthogonal(&c1));
    let apply = |c: &[T; 3]| -> [T; 3] { [0, 1, 2].map(|i| (0..3).map(|k| t[i][k] * c[k]).sum::<T>()) };
    let d1 = unit_or(apply(&c1), [T::zero(), T::zero(), T::one()]);
    let d2 = unit_or(apply(&c2), orthogonal(&d1));
    let theta = t2.atan2(t1);
    let (co, si) = (theta.cos(), theta.sin());
    let settings = ChshSettings {
        a: d1,
        a_prime: d2,
        b: [0, 1, 2].map(|k| co * c1[k] + si * c2[k]),
        b_prime: [0, 1, 2].map(|k| co * c1[k] - si * c2[k]),
    };
    let s_max = lit::<T>(2.0) * (t1sq + t2sq).sqrt();
    Ok(ChshReport {
        s_max,
        violating: s_max > lit(2.0),
        settings,
    })
}

/// `2|a d − b c|` for a normalized two-qubit ket.
pub fn concurrence_pure<T: Real>(state: &TwoModeState<T>) -> T {
    let [a, b, c, d] = state.amplitudes();
    lit::<T>(2.0) * (a * d - b * c).norm()
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    require_two_qubit(rho)?;
    let yy = pauli::<T>(1).kron(&pauli(1));
    let tilde = &(&yy * &rho.matrix().conj()) * &yy;
    let sqrt_rho = psd_sqrt(rho.matrix())?;
    let r = &(&sqrt_rho * &tilde) * &sqrt_rho;
    let (vals, _) = hermitian_eigen(&r.hermitian_part())?;
    let mut l: Vec<T> = vals.iter().map(|&v| v.max(T::zero()).sqrt()).collect();
    l.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok((l[0] - l[1] - l[2] - l[3]).max(T::zero()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskedState<T> {
    pub rho: DensityMatrix<T>,
    /// False when the masked matrix has an eigenvalue below `−PSD_TOL`.
    pub physical: bool,
    pub min_eigenvalue: T,
}

/// Element-wise product `ρ_jk d_jk`; positivity is re-checked and reported.
pub fn apply_mask<T: Real>(rho: &DensityMatrix<T>, mask: &DecoherenceMask<T>) -> Result<MaskedState<T>> {
    require_two_qubit(rho)?;
    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(4, 4, |i, j| m[(i, j)].scale(mask.d[i][j]));
    let rho = DensityMatrix::new(out, rho.dims().to_vec())?;
    let min_eigenvalue = rho.min_eigenvalue()?;
    Ok(MaskedState {
        physical: min_eigenvalue >= -tol::<T>(PSD_TOL),
        rho,
        min_eigenvalue,
    })
}

/// `(d, s_max)` for the ++ gate output under `family.mask(d)`.
pub fn violation_vs_damping<T: Real>(angles: &QpgAngles<T>, family: MaskFamily, grid: &[T]) -> Result<Vec<(T, T)>> {
    let rho = qpg_plus_plus_output(angles)?.ket().to_density();
    grid.par_iter()
        .map(|&d| {
            let masked = apply_mask(&rho, &family.mask(d)?)?;
            if !masked.physical {
                return Err(Error::InvalidState(format!(
                    "mask value {d} gives negative eigenvalue {:e}",
                    masked.min_eigenvalue
                )));
            }
            Ok((d, chsh_max(&masked.rho)?.s_max))
        })
        .collect()
}

/// Size of the CHSH violation available from weak coherent inputs,
/// `|ᾱβ̄(1 − cos Δ)|²`. Informational only.
pub fn weak_field_violation<T: Real>(alpha: Complex<T>, beta: Complex<T>, delta_deg: T) -> T {
    let x = alpha.norm() * beta.norm() * (T::one() - to_radians(delta_deg).cos());
    x * x
}
