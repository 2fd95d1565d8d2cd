use num_complex::Complex;
use num_traits::Zero;

use super::decomp::hermitian_eigen;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{tol, Real};

/// Maximum `|ρ - ρ†|` entry accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Maximum `|Tr ρ - 1|` accepted as normalized.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;
/// Maximum `|‖ψ‖² - 1|` accepted as a normalized ket.
pub const KET_NORM_TOL: f64 = 1e-12;

fn check_dims(dims: &[usize], n: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Dimension(format!("invalid subsystem dims {dims:?}")));
    }
    let prod: usize = dims.iter().product();
    if prod != n {
        return Err(Error::Dimension(format!(
            "subsystem dims {dims:?} multiply to {prod}, state has dimension {n}"
        )));
    }
    Ok(())
}

/// Pure state with subsystem structure; the first subsystem is the slowest
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct KetState<T> {
    amplitudes: Vec<Complex<T>>,
    dims: Vec<usize>,
}

impl<T: Real> KetState<T> {
    pub fn new(amplitudes: Vec<Complex<T>>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        Ok(Self { amplitudes, dims })
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() <= tol(KET_NORM_TOL)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n.is_zero() {
            return Err(Error::InvalidState("zero vector cannot be normalized".into()));
        }
        Ok(Self {
            amplitudes: self.amplitudes.iter().map(|z| z.unscale(n)).collect(),
            dims: self.dims.clone(),
        })
    }

    /// Tensor product; `self` becomes the leading subsystem(s).
    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        Self { amplitudes, dims }
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
            dims: self.dims.clone(),
        }
    }
}

/// Density matrix with subsystem dimensions whose product is the matrix size.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: ComplexMatrix<T>,
    dims: Vec<usize>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(matrix: ComplexMatrix<T>, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_dims(&dims, matrix.rows())?;
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Same matrix with a new subsystem factorization.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.matrix, dims)
    }

    pub fn trace(&self) -> Complex<T> {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> T {
        self.matrix.hermiticity_error()
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(hermitian_eigen(&self.matrix)?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or_else(T::zero))
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - Complex::new(T::one(), T::zero())).norm() <= tol(TRACE_TOL)
    }

    /// Hermitian, unit trace and positive semidefinite within the module
    /// tolerances.
    pub fn check_physical(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol(HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (max |ρ-ρ†| = {herm:e})")));
        }
        if !self.is_normalized() {
            return Err(Error::InvalidState(format!("trace {} differs from 1", self.trace())));
        }
        let min = self.min_eigenvalue()?;
        if min < -tol::<T>(PSD_TOL) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `Tr(ρ·op)`.
    pub fn expectation(&self, op: &ComplexMatrix<T>) -> Result<Complex<T>> {
        expectation(self, op)
    }
}

/// `Tr(ρ·op)` without forming the product.
pub fn expectation<T: Real>(rho: &DensityMatrix<T>, op: &ComplexMatrix<T>) -> Result<Complex<T>> {
    let n = rho.dim();
    if op.rows() != n || op.cols() != n {
        return Err(Error::Dimension(format!(
            "operator {}x{} on a state of dimension {n}",
            op.rows(),
            op.cols()
        )));
    }
    let r = rho.matrix();
    let mut acc = Complex::zero();
    for i in 0..n {
        for k in 0..n {
            acc += r[(i, k)] * op[(k, i)];
        }
    }
    Ok(acc)
}

/// Reduced state on the subsystems listed in `keep` (returned in ascending
/// subsystem order).
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: &[usize]) -> Result<DensityMatrix<T>> {
    let dims = rho.dims();
    let count = dims.len();
    if keep.is_empty() {
        return Err(Error::InvalidParameter("partial trace must keep at least one subsystem".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::InvalidParameter(format!("duplicate subsystem in {keep:?}")));
    }
    if let Some(&index) = kept.iter().find(|&&i| i >= count) {
        return Err(Error::InvalidIndex { index, count });
    }
    let traced: Vec<usize> = (0..count).filter(|i| !kept.contains(i)).collect();

    // strides of each subsystem in the full index
    let mut strides = vec![1usize; count];
    for i in (0..count.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offsets = |subsystems: &[usize]| -> Vec<usize> {
        let total: usize = subsystems.iter().map(|&s| dims[s]).product();
        (0..total)
            .map(|mut idx| {
                let mut off = 0;
                for &s in subsystems.iter().rev() {
                    off += (idx % dims[s]) * strides[s];
                    idx /= dims[s];
                }
                off
            })
            .collect()
    };
    let keep_off = offsets(&kept);
    let trace_off = if traced.is_empty() { vec![0] } else { offsets(&traced) };

    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(keep_off.len(), keep_off.len(), |i, j| {
        trace_off
            .iter()
            .fold(Complex::zero(), |acc, &t| acc + m[(keep_off[i] + t, keep_off[j] + t)])
    });
    DensityMatrix::new(out, kept.iter().map(|&s| dims[s]).collect())
}
