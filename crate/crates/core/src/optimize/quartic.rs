//! The quartic `f(x) = (lambda + |x|^2)^2 - L(x)^2`, with
//! `L(x) = gamma_1 x_2 + sum_{k>=2} gamma_k x_k x_{k+1}`.
//!
//! Coordinates are stored 0-based: `x[0]` is `x_2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bfgs::{self, LocalOptions};
use crate::error::{Error, Result};
use crate::hahn::lambda_k;

const STATIONARY_TOL: f64 = 1e-8;
const DEFICIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarticProblem {
    pub lambda: f64,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarticKind {
    MinAtZero,
    InteriorMinPositive,
    MinNegative,
    UnboundedBelow,
}

impl QuarticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QuarticKind::MinAtZero => "min_at_zero",
            QuarticKind::InteriorMinPositive => "interior_min_positive",
            QuarticKind::MinNegative => "min_negative",
            QuarticKind::UnboundedBelow => "unbounded_below",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarticOutcome {
    pub kind: QuarticKind,
    pub minimizers: Vec<Vec<f64>>,
    pub min_value: Option<f64>,
    /// Descent direction along which `f -> -inf` (unbounded case only).
    pub ray: Option<Vec<f64>>,
    /// Largest `|Q(u)|^2 - 1` over unit `u`, `Q` the quadratic part of `L`.
    pub deficit: f64,
    pub restarts: usize,
    pub converged: bool,
}

impl QuarticProblem {
    pub fn new(lambda: f64, gamma: Vec<f64>) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be positive and finite, got {lambda}")));
        }
        if let Some(g) = gamma.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::Domain(format!("gamma must be positive and finite, got {g}")));
        }
        Ok(Self { lambda, gamma })
    }

    /// Number of variables `x_2, ..., x_n`.
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    fn linear_form(&self, x: &[f64]) -> f64 {
        let g = &self.gamma;
        g[0] * x[0] + (1..g.len()).map(|m| g[m] * x[m - 1] * x[m]).sum::<f64>()
    }

    fn linear_form_grad(&self, x: &[f64], out: &mut [f64]) {
        let g = &self.gamma;
        let d = g.len();
        for m in 0..d {
            let mut v = if m == 0 { g[0] } else { g[m] * x[m - 1] };
            if m + 1 < d {
                v += g[m + 1] * x[m + 1];
            }
            out[m] = v;
        }
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        if x.is_empty() {
            return self.lambda * self.lambda;
        }
        let s = self.lambda + x.iter().map(|v| v * v).sum::<f64>();
        let l = self.linear_form(x);
        self.linear_form_grad(x, grad);
        for (gm, xm) in grad.iter_mut().zip(x) {
            *gm = 4.0 * s * xm - 2.0 * l * *gm;
        }
        s * s - l * l
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut g = vec![0.0; x.len()];
        self.value_grad(x, &mut g);
        Ok(g)
    }

    /// `4 S I + 8 x x' - 2 dL dL' - 2 L H_L`.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        let d = x.len();
        if d == 0 {
            return Ok(DMatrix::zeros(0, 0));
        }
        let s = self.lambda + x.iter().map(|v| v * v).sum::<f64>();
        let l = self.linear_form(x);
        let mut dl = vec![0.0; d];
        self.linear_form_grad(x, &mut dl);
        let xv = DVector::from_column_slice(x);
        let dlv = DVector::from_vec(dl);
        let mut h = DMatrix::identity(d, d) * (4.0 * s) + 8.0 * &xv * xv.transpose()
            - 2.0 * &dlv * dlv.transpose();
        for m in 1..d {
            h[(m - 1, m)] -= 2.0 * l * self.gamma[m];
            h[(m, m - 1)] -= 2.0 * l * self.gamma[m];
        }
        Ok(h)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }
}

/// Parameters arising from the uniform population on `{1, ..., N}`:
/// `lambda = (2 + N^-2)/3`, `gamma_k = 2 lambda_k / N` for `k = 1..N-2`.
pub fn default_quartic_params(n: usize) -> Result<QuarticProblem> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("need N >= 2, got {n}")));
    }
    let nf = n as f64;
    let lambda = (2.0 + 1.0 / (nf * nf)) / 3.0;
    let gamma = (1..n - 1).map(|k| 2.0 * lambda_k(n, k) / nf).collect();
    QuarticProblem::new(lambda, gamma)
}

pub fn quartic_value(p: &QuarticProblem, x: &[f64]) -> Result<f64> {
    p.check_dim(x)?;
    let mut g = vec![0.0; x.len()];
    Ok(p.value_grad(x, &mut g))
}

/// `(1/rho_12)^2` written through the quartic's ingredients, for Hahn
/// coefficients `delta_1..delta_{N-1}` (`+inf` when `delta_1 = 0`).
pub fn inverse_rho_squared(n: usize, delta: &[f64]) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("need N >= 2, got {n}")));
    }
    if delta.len() != n - 1 {
        return Err(Error::DimensionMismatch { expected: n - 1, got: delta.len() });
    }
    if delta[0] == 0.0 {
        return Ok(f64::INFINITY);
    }
    let p = default_quartic_params(n)?;
    let nf = n as f64;
    let energy = p.lambda * delta[0] * delta[0] + delta[1..].iter().map(|d| d * d).sum::<f64>();
    let cross: f64 = (0..n - 2).map(|k| p.gamma[k] * delta[k] * delta[k + 1]).sum();
    let scale = 9.0 * nf.powi(4) / (nf * nf - 1.0).powi(2);
    Ok(scale * (energy * energy - cross * cross) / delta[0].powi(4))
}

/// Eigen-decomposition of the symmetric tridiagonal matrix of
/// `Q(x) = sum_{k>=2} gamma_k x_k x_{k+1}`.
fn quadratic_part(p: &QuarticProblem) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let d = p.dim();
    let mut m = DMatrix::zeros(d, d);
    for k in 1..d {
        m[(k - 1, k)] = p.gamma[k] / 2.0;
        m[(k, k - 1)] = p.gamma[k] / 2.0;
    }
    SymmetricEigen::new(m)
}

/// Leading behaviour along `t u` for unit `u`: returns a descent ray if one
/// exists.
fn unbounded_ray(p: &QuarticProblem) -> (f64, Option<Vec<f64>>) {
    let d = p.dim();
    let eig = quadratic_part(p);
    let rho = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let deficit = rho * rho - 1.0;
    if deficit > DEFICIT_TOL {
        let k = eig.eigenvalues.iter().enumerate().fold(0, |b, (i, v)| {
            if v.abs() > eig.eigenvalues[b].abs() { i } else { b }
        });
        return (deficit, Some(eig.eigenvectors.column(k).iter().copied().collect()));
    }
    if deficit.abs() <= DEFICIT_TOL {
        // Quartic terms cancel on the eigenspaces of +-1. Along t u the cubic
        // coefficient is -2 gamma_1 u_1 Q(u); it is a descent term iff some
        // such u has u_1 != 0. Project e_1 onto each eigenspace.
        for sign in [1.0, -1.0] {
            let mut u = DVector::<f64>::zeros(d);
            for (k, &mu) in eig.eigenvalues.iter().enumerate() {
                if (mu - sign).abs() <= 1e-8 {
                    let col = eig.eigenvectors.column(k);
                    u += col[0] * col;
                }
            }
            let norm = u.norm();
            if norm > 1e-8 {
                u /= norm;
                // Q(u) = sign; choose orientation making gamma_1 u_1 Q(u) > 0.
                if u[0] * sign < 0.0 {
                    u = -u;
                }
                return (deficit, Some(u.iter().copied().collect()));
            }
        }
    }
    (deficit, None)
}

/// Confirms that `f(t u)` keeps falling below zero on a geometric sequence
/// of radii.
fn confirm_ray(p: &QuarticProblem, u: &[f64]) -> bool {
    let mut prev = f64::INFINITY;
    let mut below = false;
    for e in 1..=8 {
        let t = 10f64.powi(e);
        let x: Vec<f64> = u.iter().map(|v| v * t).collect();
        let f = quartic_value(p, &x).unwrap_or(f64::NAN);
        if !(f < prev) {
            return false;
        }
        below = f < 0.0;
        prev = f;
    }
    below
}

/// Newton polish with the analytic Hessian, accepted only while the
/// Hessian is positive definite and the gradient shrinks.
fn polish(p: &QuarticProblem, mut x: Vec<f64>) -> (Vec<f64>, f64, f64) {
    let d = x.len();
    let mut g = vec![0.0; d];
    let mut f = p.value_grad(&x, &mut g);
    let mut gn = norm(&g);
    for _ in 0..50 {
        if gn < 1e-14 {
            break;
        }
        let h = p.hessian(&x).expect("dimension checked");
        let Some(chol) = h.cholesky() else { break };
        let step = chol.solve(&DVector::from_column_slice(&g));
        let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - s).collect();
        let mut gt = vec![0.0; d];
        let ft = p.value_grad(&trial, &mut gt);
        let gtn = norm(&gt);
        if !(gtn < gn) || ft > f + 1e-12 * f.abs().max(1.0) {
            break;
        }
        x = trial;
        f = ft;
        g = gt;
        gn = gtn;
    }
    (x, f, gn)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Deterministic starting points: coordinate axes at two radii in both
/// directions, then a seeded uniform batch on `[-2, 2]^d`.
fn seeds(d: usize, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for m in 0..d {
        for r in [0.5, -0.5, 1.5, -1.5] {
            let mut x = vec![0.0; d];
            x[m] = r;
            out.push(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        out.push((0..d).map(|_| rng.random_range(-2.0..2.0)).collect());
    }
    out
}

pub const DEFAULT_QUARTIC_RESTARTS: usize = 64;

pub fn minimize_quartic(p: &QuarticProblem) -> QuarticOutcome {
    minimize_quartic_with(p, DEFAULT_QUARTIC_RESTARTS, 0)
}

pub fn minimize_quartic_with(p: &QuarticProblem, restarts: usize, seed: u64) -> QuarticOutcome {
    let d = p.dim();
    let lam2 = p.lambda * p.lambda;
    if d == 0 {
        return QuarticOutcome {
            kind: QuarticKind::MinAtZero,
            minimizers: vec![vec![]],
            min_value: Some(lam2),
            ray: None,
            deficit: -1.0,
            restarts: 0,
            converged: true,
        };
    }

    let (deficit, ray) = unbounded_ray(p);
    if let Some(u) = ray {
        if confirm_ray(p, &u) {
            return QuarticOutcome {
                kind: QuarticKind::UnboundedBelow,
                minimizers: vec![],
                min_value: None,
                ray: Some(u),
                deficit,
                restarts: 0,
                converged: true,
            };
        }
        log::warn!("spectral test flagged an unbounded ray that did not confirm; falling back to descent");
    }

    let opts = LocalOptions { grad_tol: 1e-10, ..Default::default() };
    let starts = seeds(d, restarts, seed);
    let n_starts = starts.len();
    let mut candidates: Vec<(f64, Vec<f64>, f64)> = vec![(lam2, vec![0.0; d], 0.0)];
    for x0 in starts {
        let r = bfgs::minimize(|x, g| p.value_grad(x, g), x0, &opts);
        if r.diverged {
            let u: Vec<f64> = {
                let n = norm(&r.x);
                r.x.iter().map(|v| v / n).collect()
            };
            if confirm_ray(p, &u) {
                return QuarticOutcome {
                    kind: QuarticKind::UnboundedBelow,
                    minimizers: vec![],
                    min_value: None,
                    ray: Some(u),
                    deficit,
                    restarts: n_starts,
                    converged: true,
                };
            }
            continue;
        }
        let (x, f, gn) = polish(p, r.x);
        candidates.push((f, x, gn));
    }

    let best = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let zero_tol = 1e-10 * lam2.max(1.0);
    if best >= lam2 - zero_tol {
        return QuarticOutcome {
            kind: QuarticKind::MinAtZero,
            minimizers: vec![vec![0.0; d]],
            min_value: Some(lam2),
            ray: None,
            deficit,
            restarts: n_starts,
            converged: true,
        };
    }

    let tol = 1e-9 * best.abs().max(1.0);
    let mut mins: Vec<Vec<f64>> = Vec::new();
    let mut converged = true;
    for (f, x, gn) in &candidates {
        if *f > best + tol {
            continue;
        }
        if mins.iter().any(|m| m.iter().zip(x).all(|(a, b)| (a - b).abs() < 1e-6)) {
            continue;
        }
        converged &= *gn < STATIONARY_TOL;
        mins.push(x.clone());
    }
    mins.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    QuarticOutcome {
        kind: if best > 0.0 { QuarticKind::InteriorMinPositive } else { QuarticKind::MinNegative },
        minimizers: mins,
        min_value: Some(best),
        ray: None,
        deficit,
        restarts: n_starts,
        converged,
    }
}
