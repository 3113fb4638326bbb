//! Dense BFGS with Armijo backtracking, for the small problems in this crate.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Stop once `|x|` exceeds this (the objective is probably unbounded).
    pub divergence_radius: f64,
}

impl Default for LocalOptions {
    fn default() -> Self {
        Self { max_iter: 2000, grad_tol: 1e-10, divergence_radius: 1e8 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub diverged: bool,
}

/// Minimises `f`, where `f(x, grad)` returns the value and fills `grad`.
pub(crate) fn minimize<F>(f: F, x0: Vec<f64>, opts: &LocalOptions) -> LocalResult
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    let dim = x0.len();
    let mut x = DVector::from_vec(x0);
    let mut g = DVector::zeros(dim);
    let mut fx = f(x.as_slice(), g.as_mut_slice());
    let mut h = DMatrix::<f64>::identity(dim, dim);
    let mut g_new = DVector::zeros(dim);
    let mut resets = 0;

    for _ in 0..opts.max_iter {
        let gnorm = g.norm();
        if gnorm < opts.grad_tol {
            return LocalResult { x: x.data.into(), value: fx, grad_norm: gnorm, diverged: false };
        }
        if x.norm() > opts.divergence_radius || !fx.is_finite() {
            return LocalResult { x: x.data.into(), value: fx, grad_norm: gnorm, diverged: true };
        }

        let mut dir = -(&h * &g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            h = DMatrix::identity(dim, dim);
            dir = -g.clone();
            slope = -gnorm * gnorm;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + step * &dir;
            let ft = f(trial.as_slice(), g_new.as_mut_slice());
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if resets < 2 {
                resets += 1;
                h = DMatrix::identity(dim, dim);
                continue;
            }
            return LocalResult { x: x.data.into(), value: fx, grad_norm: gnorm, diverged: false };
        };

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H+ = H + (1 + rho y'Hy) rho ss' - rho (Hy s' + s y'H)
            h += (rho * (1.0 + rho * yhy)) * (&s * s.transpose())
                - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
        let stalled = (fx - f_new).abs() <= f64::EPSILON * fx.abs().max(1e-300) && s.norm() < 1e-15;
        x = x_new;
        fx = f_new;
        std::mem::swap(&mut g, &mut g_new);
        if stalled {
            break;
        }
    }
    let gnorm = g.norm();
    LocalResult {
        x: x.data.into(),
        value: fx,
        grad_norm: gnorm,
        diverged: false,
    }
}
