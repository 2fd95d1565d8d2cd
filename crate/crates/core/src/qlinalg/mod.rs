//! Minimal dense complex linear algebra for quantum states.
//!
//! Superoperators act on column-stacked density matrices, so
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

mod decomp;
mod matrix;
mod state;

pub use decomp::{hermitian_eigen, lu_solve, null_space, psd_sqrt, NullSpace};
pub use matrix::ComplexMatrix;
pub use state::{
    expectation, partial_trace, DensityMatrix, KetState, HERMITIAN_TOL, KET_NORM_TOL, PSD_TOL,
    TRACE_TOL,
};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{tol, Real};

/// Rank threshold for null-space extraction, relative to the largest pivot.
pub const NULL_RANK_TOL: f64 = 1e-10;
/// Residual bound `‖L v‖ ≤ STEADY_RESIDUAL_TOL·‖L‖` for an accepted steady state.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-8;

pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kron(b)
}

pub fn dagger<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.dagger()
}

/// Unique trace-one null vector of a Liouvillian acting on column-stacked
/// `D×D` density matrices.
///
/// The returned state is Hermitized and checked against the physical-state
/// tolerances; its subsystem structure is the single factor `[D]`.
pub fn steady_null_solve<T: Real>(l: &ComplexMatrix<T>) -> Result<DensityMatrix<T>> {
    let n2 = l.rows();
    if !l.is_square() {
        return Err(Error::Dimension(format!("superoperator is {}x{}", l.rows(), l.cols())));
    }
    let d = (n2 as f64).sqrt().round() as usize;
    if d * d != n2 || d == 0 {
        return Err(Error::Dimension(format!("superoperator size {n2} is not a perfect square")));
    }

    let ns = null_space(l, tol(NULL_RANK_TOL));
    match ns.basis.len() {
        0 => {
            return Err(Error::SingularStructure(
                ns.smallest_relative_pivot.to_f64().unwrap_or(f64::NAN),
            ))
        }
        1 => {}
        k => return Err(Error::AmbiguousSteadyState(k)),
    }
    let v = &ns.basis[0];
    let rho = ComplexMatrix::unvectorize(v, d)?;
    let tr = rho.trace();
    if tr.norm() <= T::epsilon() * rho.max_abs() {
        return Err(Error::SingularStructure(0.0));
    }
    let rho = rho.scale(Complex::new(T::one(), T::zero()) / tr).hermitian_part();

    let lnorm = l.frobenius_norm();
    let residual: T = l
        .matvec(&rho.vectorize())?
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<T>()
        .sqrt();
    if residual > tol::<T>(STEADY_RESIDUAL_TOL) * lnorm.max(T::one()) {
        return Err(Error::SingularStructure((residual / lnorm).to_f64().unwrap_or(f64::NAN)));
    }

    let rho = DensityMatrix::new(rho, vec![d])?;
    let min = rho.min_eigenvalue()?;
    if min < -tol::<T>(PSD_TOL) {
        return Err(Error::InvalidState(format!(
            "steady state has negative eigenvalue {min:e}"
        )));
    }
    Ok(rho)
}
