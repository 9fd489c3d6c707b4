//! `e^{itH} v` for Hermitian `H` given only as a matrix-vector product, by
//! Lanczos with full reorthogonalization and adaptive time steps.

use super::{inner, vec_norm};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    pub max_dim: usize,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { max_dim: 40, tol: 1e-13, max_steps: 10_000 }
    }
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

struct Lanczos {
    q: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Norm of the residual after the last vector; zero means the space is invariant.
    residual: f64,
}

fn lanczos(h: &dyn Fn(&[C64]) -> Result<Vec<C64>>, v: &[C64], beta0: f64, max_dim: usize) -> Result<Lanczos> {
    let mut q = vec![v.iter().map(|z| z / beta0).collect::<Vec<_>>()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let scale_ref = beta0;
    loop {
        let j = q.len() - 1;
        let mut w = h(&q[j])?;
        let a = inner(&q[j], &w).re;
        alpha.push(a);
        axpy(&mut w, C64::new(-a, 0.0), &q[j]);
        if j > 0 {
            axpy(&mut w, C64::new(-beta[j - 1], 0.0), &q[j - 1]);
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            for qk in &q {
                let c = inner(qk, &w);
                axpy(&mut w, -c, qk);
            }
        }
        let b = vec_norm(&w);
        let hnorm = alpha.iter().map(|x| x.abs()).fold(1.0, f64::max);
        if b <= 1e-13 * hnorm || q.len() == max_dim {
            let residual = if b <= 1e-13 * hnorm { 0.0 } else { b };
            let _ = scale_ref;
            return Ok(Lanczos { q, alpha, beta, residual });
        }
        beta.push(b);
        q.push(w.into_iter().map(|z| z / b).collect());
    }
}

fn exp_tridiagonal(alpha: &[f64], beta: &[f64], tau: f64) -> DVector<C64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    DVector::from_fn(m, |i, _| {
        (0..m)
            .map(|k| {
                let qk = eig.eigenvectors[(i, k)] * eig.eigenvectors[(0, k)];
                C64::from_polar(1.0, tau * eig.eigenvalues[k]) * qk
            })
            .sum()
    })
}

/// `e^{itH} v`, where `h` applies the Hermitian operator `H`.
pub fn expmv_hermitian(
    h: &dyn Fn(&[C64]) -> Result<Vec<C64>>,
    v: &[C64],
    t: f64,
    opts: KrylovOptions,
) -> Result<Vec<C64>> {
    let mut w = v.to_vec();
    let total = t.abs();
    let sign = t.signum();
    let mut done = 0.0;
    let mut step = total;
    let mut steps = 0;
    while done < total {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::ConvergenceFailure(format!("more than {} Krylov steps", opts.max_steps)));
        }
        let beta0 = vec_norm(&w);
        if beta0 == 0.0 {
            return Ok(w);
        }
        let basis = lanczos(h, &w, beta0, opts.max_dim)?;
        let m = basis.alpha.len();
        step = step.min(total - done);
        let y = loop {
            let y = exp_tridiagonal(&basis.alpha, &basis.beta, sign * step);
            let err = basis.residual * y[m - 1].norm();
            if err <= opts.tol * (step / total).max(1e-3) {
                break y;
            }
            step *= 0.5;
            if step < total * 1e-10 {
                return Err(Error::ConvergenceFailure(format!("step size collapsed (error {err:.3e})")));
            }
        };
        let mut next = vec![C64::new(0.0, 0.0); w.len()];
        for (k, qk) in basis.q.iter().enumerate() {
            axpy(&mut next, y[k] * beta0, qk);
        }
        w = next;
        done += step;
        if basis.residual == 0.0 {
            step = total - done;
        } else {
            step *= 1.5;
        }
    }
    Ok(w)
}
