//! Restarted Lanczos for the lowest eigenpair of a real symmetric operator.
//!
//! Full reorthogonalization against the current Krylov basis; on restart the
//! Ritz vector becomes the new starting vector. Used above the dense-solver
//! crossover.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov subspace size per cycle.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Absolute residual target ‖A x − θ x‖.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { krylov_dim: 120, max_restarts: 200, tol: 1e-11 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenpair of the `n × n` operator `apply(x, y): y = A x`.
///
/// Returns `(eigenvalue, unit eigenvector, total iterations)`.
pub fn lowest_eigenpair<F>(n: usize, apply: F, opts: &LanczosOptions) -> Result<(f64, Vec<f64>, usize)>
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return Err(Error::Empty("operator of dimension 0"));
    }
    // deterministic, generic start vector
    let mut start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract()).collect();
    normalize(&mut start);

    let m = opts.krylov_dim.min(n).max(1);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut w = vec![0.0; n];
    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for k in 0..m {
            apply(&basis[k], &mut w);
            iterations += 1;
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            if k + 1 == m {
                break;
            }
            let b = normalize(&mut w);
            if b < 1e-14 {
                // invariant subspace found
                break;
            }
            beta.push(b);
            basis.push(w.clone());
        }
        let size = alpha.len();
        let mut t = DMatrix::zeros(size, size);
        for i in 0..size {
            t[(i, i)] = alpha[i];
            if i + 1 < size {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, theta) = eig.eigenvalues.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let y = eig.eigenvectors.column(imin);
        let mut x = vec![0.0; n];
        for (c, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += c * vi);
        }
        normalize(&mut x);
        apply(&x, &mut w);
        residual = w.iter().zip(&x).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
        if residual <= opts.tol || size == n {
            return Ok((theta, x, iterations));
        }
        start = x;
    }
    Err(Error::NoConvergence { iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_on_a_tridiagonal_chain() {
        let n = 300;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 7) % 13) as f64 * 0.3).collect();
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s -= x[i - 1];
                }
                if i + 1 < n {
                    s -= x[i + 1];
                }
                y[i] = s;
            }
        };
        let (e, v, _) = lowest_eigenpair(n, apply, &LanczosOptions::default()).unwrap();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = diag[i];
            if i + 1 < n {
                a[(i, i + 1)] = -1.0;
                a[(i + 1, i)] = -1.0;
            }
        }
        let dense = SymmetricEigen::new(a).eigenvalues.min();
        assert!((e - dense).abs() < 1e-10, "{e} vs {dense}");
        assert!((dot(&v, &v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_operator_is_exact() {
        let apply = |x: &[f64], y: &mut [f64]| {
            y[0] = 2.0 * x[0] + x[1];
            y[1] = x[0] + 2.0 * x[1];
        };
        let (e, _, _) = lowest_eigenpair(2, apply, &LanczosOptions::default()).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }
}
