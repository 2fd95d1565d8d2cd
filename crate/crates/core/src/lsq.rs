//! Small dense Levenberg-Marquardt solver for a handful of parameters.

use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    /// Stop once `‖δ‖ ≤ step_tol·(‖x‖ + step_tol)`.
    pub step_tol: T,
    pub initial_damping: T,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tol: lit(1e-9),
            initial_damping: lit(1e-3),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome<T> {
    pub params: Vec<T>,
    pub residuals: Vec<T>,
    /// Jacobian at `params`, one row per residual.
    pub jacobian: Vec<Vec<T>>,
    pub cost: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Central-difference Jacobian of `f` at `x`.
pub fn numeric_jacobian<T: Real, F>(f: &F, x: &[T]) -> Vec<Vec<T>>
where
    F: Fn(&[T]) -> Vec<T>,
{
    let h0 = T::epsilon().cbrt();
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = h0 * x[j].abs().max(T::one());
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        cols.push(fp.iter().zip(&fm).map(|(&a, &b)| (a - b) / (h + h)).collect::<Vec<T>>());
    }
    let m = cols.first().map_or(0, Vec::len);
    (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// `JᵀJ` and `Jᵀr`.
pub fn normal_equations<T: Real>(jac: &[Vec<T>], r: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
    let p = jac.first().map_or(0, Vec::len);
    let mut jtj = vec![vec![T::zero(); p]; p];
    let mut jtr = vec![T::zero(); p];
    for (row, &ri) in jac.iter().zip(r) {
        for a in 0..p {
            jtr[a] += row[a] * ri;
            for b in 0..p {
                jtj[a][b] += row[a] * row[b];
            }
        }
    }
    (jtj, jtr)
}

/// Solves a small dense real system; `None` when singular.
pub fn solve_small<T: Real>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut m: Vec<Vec<T>> = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    let scale = a.iter().flatten().fold(T::zero(), |s, v| s.max(v.abs()));
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap())?;
        if m[p][k].abs() <= T::epsilon() * scale * lit(n as f64) || m[p][k] == T::zero() {
            return None;
        }
        m.swap(k, p);
        for i in (k + 1)..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let s = ((k + 1)..n).fold(m[k][n], |s, j| s - m[k][j] * x[j]);
        x[k] = s / m[k][k];
    }
    Some(x)
}

/// Inverse of a small symmetric positive matrix; `None` when singular.
pub fn invert_small<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<T> = (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect();
        cols.push(solve_small(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

fn cost_of<T: Real>(r: &[T]) -> T {
    r.iter().map(|&v| v * v).sum::<T>() * lit(0.5)
}

/// Minimizes `½‖f(x)‖²` with Marquardt-scaled damping
/// (`JᵀJ + λ·diag(JᵀJ)`), which keeps the iteration invariant under a
/// constant rescaling of the residuals.
pub fn levenberg_marquardt<T: Real, F>(f: F, x0: &[T], opts: &LmOptions<T>) -> LmOutcome<T>
where
    F: Fn(&[T]) -> Vec<T>,
{
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut cost = cost_of(&r);
    let mut jac = numeric_jacobian(&f, &x);
    let mut lambda = opts.initial_damping;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let (jtj, jtr) = normal_equations(&jac, &r);
        if jtr.iter().all(|g| *g == T::zero()) {
            converged = true;
            break;
        }
        let mut accepted = false;
        // inner loop: raise damping until the step reduces the cost
        for _ in 0..40 {
            let mut a = jtj.clone();
            for (i, row) in a.iter_mut().enumerate() {
                let d = jtj[i][i].max(T::min_positive_value());
                row[i] += lambda * d;
            }
            let neg: Vec<T> = jtr.iter().map(|&g| -g).collect();
            let Some(step) = solve_small(&a, &neg) else {
                lambda *= lit(10.0);
                continue;
            };
            let trial: Vec<T> = x.iter().zip(&step).map(|(&a, &b)| a + b).collect();
            let r_trial = f(&trial);
            let c_trial = cost_of(&r_trial);
            let step_norm = step.iter().map(|&v| v * v).sum::<T>().sqrt();
            let x_norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
            let small = step_norm <= opts.step_tol * (x_norm + opts.step_tol);
            if c_trial.is_finite() && c_trial <= cost {
                x = trial;
                r = r_trial;
                cost = c_trial;
                jac = numeric_jacobian(&f, &x);
                lambda = (lambda / lit(10.0)).max(lit(1e-12));
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            if small {
                // no downhill step even at negligible size: at the minimum
                converged = true;
                break;
            }
            lambda *= lit(10.0);
        }
        if converged || !accepted {
            converged = converged || !accepted && cost == T::zero();
            break;
        }
    }

    LmOutcome {
        params: x,
        residuals: r,
        jacobian: jac,
        cost,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_an_exponential_decay() {
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.5 * (-0.8 * t).exp()).collect();
        let f = |p: &[f64]| ts.iter().zip(&ys).map(|(t, y)| p[0] * (-p[1] * t).exp() - y).collect();
        let out = levenberg_marquardt(f, &[1.0, 0.1], &LmOptions::default());
        assert!(out.converged);
        assert!((out.params[0] - 2.5).abs() < 1e-8);
        assert!((out.params[1] - 0.8).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock_valley() {
        let f = |p: &[f64]| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]];
        let out = levenberg_marquardt(f, &[-1.2, 1.0], &LmOptions::default());
        assert!((out.params[0] - 1.0).abs() < 1e-7 && (out.params[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn small_solver_detects_singularity() {
        assert!(solve_small(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 1.0]).is_none());
        let inv = invert_small::<f64>(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert!((inv[0][0] - 3.0 / 11.0).abs() < 1e-15);
    }
}
