//! Dense decompositions: LU solve, column-pivoted QR null space, Hermitian
//! eigendecomposition.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// Fails with [`Error::Conditioning`] when the smallest pivot falls below
/// `rel_pivot_tol` times the largest one.
pub fn lu_solve<T: Real>(
    a: &ComplexMatrix<T>,
    b: &[Complex<T>],
    rel_pivot_tol: T,
) -> Result<Vec<Complex<T>>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Dimension(format!(
            "lu_solve on {}x{} with rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut m: Vec<Complex<T>> = a.as_slice().to_vec();
    let mut x: Vec<Complex<T>> = b.to_vec();
    let mut pivots = Vec::with_capacity(n);

    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, m[i * n + k].norm()))
            .fold((k, -T::one()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        pivots.push(pmax);
        let piv = m[k * n + k];
        if piv.is_zero() {
            return Err(Error::Conditioning(0.0));
        }
        let inv: Complex<T> = piv.inv();
        let (upper, lower) = m.split_at_mut((k + 1) * n);
        let krow = &upper[k * n..(k + 1) * n];
        for i in 0..(n - k - 1) {
            let row = &mut lower[i * n..(i + 1) * n];
            let f: Complex<T> = row[k] * inv;
            if f.is_zero() {
                continue;
            }
            row[k] = Complex::zero();
            for j in (k + 1)..n {
                row[j] -= f * krow[j];
            }
            let xk = x[k];
            x[k + 1 + i] -= f * xk;
        }
    }

    let largest = pivots.iter().fold(T::zero(), |a, &b| a.max(b));
    let smallest = pivots.iter().fold(T::infinity(), |a, &b| a.min(b));
    if n > 0 && smallest <= rel_pivot_tol * largest {
        let rel = if largest > T::zero() { smallest / largest } else { T::zero() };
        return Err(Error::Conditioning(rel.to_f64().unwrap_or(0.0)));
    }

    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s -= m[k * n + j] * x[j];
        }
        x[k] = s / m[k * n + k];
    }
    Ok(x)
}

/// Result of a rank-revealing column-pivoted QR factorization.
#[derive(Debug, Clone)]
pub struct NullSpace<T> {
    pub rank: usize,
    /// One basis vector per null dimension (not orthonormalized).
    pub basis: Vec<Vec<Complex<T>>>,
    /// `|R_kk| / |R_00|` at the first diagonal entry that was declared zero,
    /// or at the last entry when the matrix has full rank.
    pub smallest_relative_pivot: T,
}

/// Null space of a square or wide matrix via Householder QR with column
/// pivoting; diagonal entries of `R` below `rel_tol·|R_00|` count as zero.
pub fn null_space<T: Real>(a: &ComplexMatrix<T>, rel_tol: T) -> NullSpace<T> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<T> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
    let two = lit::<T>(2.0);

    let steps = m.min(n);
    let mut rank = steps;
    let mut r00 = T::zero();
    let mut smallest = T::one();
    for k in 0..steps {
        // Downdated norms lose accuracy; refresh them every step (cost is
        // dominated by the reflector application anyway).
        for j in k..n {
            norms[j] = cols[j][k..].iter().map(|z| z.norm_sqr()).sum();
        }
        let p = (k..n).fold(k, |best, j| if norms[j] > norms[best] { j } else { best });
        cols.swap(k, p);
        norms.swap(k, p);
        perm.swap(k, p);

        let normx = norms[k].sqrt();
        if k == 0 {
            r00 = normx;
        }
        let rel = if r00 > T::zero() { normx / r00 } else { T::zero() };
        smallest = rel;
        if r00.is_zero() || rel <= rel_tol {
            rank = k;
            break;
        }

        let x0 = cols[k][k];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::one() };
        let alpha = -phase * normx;
        let mut v: Vec<Complex<T>> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|z| z.norm_sqr()).sum();
        cols[k][k] = alpha;
        for z in cols[k][k + 1..].iter_mut() {
            *z = Complex::zero();
        }
        if vnorm2.is_zero() {
            continue;
        }
        for col in cols[k + 1..].iter_mut() {
            let s = v
                .iter()
                .zip(&col[k..])
                .fold(Complex::zero(), |acc, (vi, ci)| acc + vi.conj() * ci);
            let f = s * (two / vnorm2);
            for (ci, vi) in col[k..].iter_mut().zip(&v) {
                *ci -= f * vi;
            }
        }
    }

    let mut basis = Vec::with_capacity(n - rank);
    for free in rank..n {
        // Solve R11 y = -R[:, free] by back substitution.
        let mut y = vec![Complex::zero(); rank];
        for i in (0..rank).rev() {
            let mut s = -cols[free][i];
            for (j, yj) in y.iter().enumerate().skip(i + 1) {
                s -= cols[j][i] * yj;
            }
            y[i] = s / cols[i][i];
        }
        let mut x = vec![Complex::zero(); n];
        for (i, yi) in y.into_iter().enumerate() {
            x[perm[i]] = yi;
        }
        x[perm[free]] = Complex::one();
        basis.push(x);
    }

    NullSpace {
        rank,
        basis,
        smallest_relative_pivot: smallest,
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as the columns of the second element.
pub fn hermitian_eigen<T: Real>(a: &ComplexMatrix<T>) -> Result<(Vec<T>, ComplexMatrix<T>)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut h = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = h.frobenius_norm().max(T::min_positive_value());
    let half = lit::<T>(0.5);

    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= T::epsilon() * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = h[(p, q)];
                let babs = b.norm();
                if babs <= T::epsilon() * T::epsilon() * scale {
                    continue;
                }
                let e = b / babs;
                let app = h[(p, p)].re;
                let aqq = h[(q, q)].re;
                let theta = (aqq - app) / (babs + babs);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // U restricted to the (p, q) plane.
                let upp = Complex::new(c, T::zero());
                let upq = Complex::new(s, T::zero());
                let uqp = -e.conj() * s;
                let uqq = e.conj() * c;

                for k in 0..n {
                    let hkp = h[(k, p)];
                    let hkq = h[(k, q)];
                    h[(k, p)] = hkp * upp + hkq * uqp;
                    h[(k, q)] = hkp * upq + hkq * uqq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
                for k in 0..n {
                    let hpk = h[(p, k)];
                    let hqk = h[(q, k)];
                    h[(p, k)] = upp.conj() * hpk + uqp.conj() * hqk;
                    h[(q, k)] = upq.conj() * hpk + uqq.conj() * hqk;
                }
                h[(p, q)] = Complex::zero();
                h[(q, p)] = Complex::zero();
                h[(p, p)] = Complex::new(h[(p, p)].re, T::zero());
                h[(q, q)] = Complex::new(h[(q, q)].re, T::zero());
            }
        }
        // keep rounding drift from breaking Hermiticity across sweeps
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (h[(i, j)] + h[(j, i)].conj()).scale(half);
                h[(i, j)] = avg;
                h[(j, i)] = avg.conj();
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| h[(i, i)].re.partial_cmp(&h[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| h[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Principal square root of a positive semidefinite Hermitian matrix; small
/// negative eigenvalues from rounding are clamped to zero.
pub fn psd_sqrt<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let (vals, vecs) = hermitian_eigen(a)?;
    let n = a.rows();
    let roots: Vec<Complex<T>> = vals
        .iter()
        .map(|&l| Complex::new(l.max(T::zero()).sqrt(), T::zero()))
        .collect();
    let d = ComplexMatrix::from_diag(&roots);
    let out = &(&vecs * &d) * &vecs.dagger();
    debug_assert_eq!(out.rows(), n);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sample_hermitian(n: usize, seed: u64) -> M {
        // cheap deterministic pseudo-random fill
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = M::from_fn(n, n, |_, _| c(next(), next()));
        a.hermitian_part()
    }

    #[test]
    fn lu_solves_a_small_system() {
        let a = M::from_rows(&[vec![c(2., 0.), c(1., 1.)], vec![c(0., -1.), c(3., 0.)]]).unwrap();
        let x_true = vec![c(1., -2.), c(0.5, 0.25)];
        let b = a.matvec(&x_true).unwrap();
        let x = lu_solve(&a, &b, 1e-14).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn lu_rejects_singular_matrix() {
        let a = M::from_real_rows(&[vec![1., 2.], vec![2., 4.]]).unwrap();
        assert!(matches!(lu_solve(&a, &[c(1., 0.), c(0., 0.)], 1e-12), Err(Error::Conditioning(_))));
    }

    #[test]
    fn null_space_of_rank_deficient_matrix() {
        let a = M::from_real_rows(&[vec![1., 2., 3.], vec![2., 4., 6.], vec![1., 0., 1.]]).unwrap();
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.rank, 2);
        assert_eq!(ns.basis.len(), 1);
        let r = a.matvec(&ns.basis[0]).unwrap();
        assert!(r.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn null_space_of_full_rank_matrix_is_empty() {
        let ns = null_space(&M::identity(4), 1e-10);
        assert_eq!(ns.rank, 4);
        assert!(ns.basis.is_empty());
    }

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        let ns = null_space(&M::zeros(3, 3), 1e-10);
        assert_eq!(ns.rank, 0);
        assert_eq!(ns.basis.len(), 3);
    }

    #[test]
    fn jacobi_diagonalizes_random_hermitian() {
        for (n, seed) in [(2, 1), (4, 7), (9, 42)] {
            let a = sample_hermitian(n, seed);
            let (vals, vecs) = hermitian_eigen(&a).unwrap();
            let av = &a * &vecs;
            let vd = &vecs * &M::from_diag(&vals.iter().map(|&l| c(l, 0.)).collect::<Vec<_>>());
            assert!(av.max_abs_diff(&vd).unwrap() < 1e-12, "n={n}");
            let gram = &vecs.dagger() * &vecs;
            assert!(gram.max_abs_diff(&M::identity(n)).unwrap() < 1e-12);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let b = sample_hermitian(4, 3);
        let a = &b * &b;
        let r = psd_sqrt(&a).unwrap();
        assert!((&r * &r).max_abs_diff(&a).unwrap() < 1e-12);
    }
}
