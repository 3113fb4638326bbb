//! Best correlation `corr(g(X_{i:n}), g(X_{j:n}))` over a single transform
//! `g`, optionally restricted to nondecreasing `g`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bfgs::{self, LocalOptions};
use crate::error::{Error, Result};
use crate::hahn::build_basis;
use crate::populations::{order_stat_joint_with, JointOptions, Population};

pub const DEFAULT_RESTARTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub monotone: bool,
    /// Size of the pseudorandom batch (structured seeds come on top).
    pub restarts: usize,
    pub seed: u64,
    pub joint: JointOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { monotone: false, restarts: DEFAULT_RESTARTS, seed: 0, joint: JointOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub value: f64,
    pub support: Vec<f64>,
    /// Optimal transform, centred and scaled under the law of `X_{i:n}`.
    pub g_star: Vec<f64>,
    /// Correlation of the order statistics themselves (identity start).
    pub identity_value: f64,
    pub restarts: usize,
    pub converged: bool,
    pub monotone_constraint: bool,
}

/// Quadratic forms of the ratio `g'Cg / sqrt(g'Ag g'Bg)`.
struct Forms {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    monotone: bool,
}

impl Forms {
    fn to_g(&self, theta: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(theta.len() + 1);
        for (k, t) in theta.iter().enumerate() {
            g[k + 1] = if self.monotone { g[k] + t * t } else { *t };
        }
        g
    }

    fn theta_for(&self, g: &[f64]) -> Option<Vec<f64>> {
        let theta: Vec<f64> = if self.monotone {
            g.windows(2).map(|w| (w[1] - w[0]).max(0.0).sqrt()).collect()
        } else {
            g[1..].iter().map(|v| v - g[0]).collect()
        };
        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        (norm > 1e-12).then(|| theta.iter().map(|t| t / norm).collect())
    }

    fn ratio(&self, g: &DVector<f64>) -> Option<(f64, DVector<f64>)> {
        let (ag, bg, cg) = (&self.a * g, &self.b * g, &self.c * g);
        let (a, b, c) = (g.dot(&ag), g.dot(&bg), g.dot(&cg));
        if !(a > 1e-300 && b > 1e-300) {
            return None;
        }
        let s = (a * b).sqrt();
        let r = c / s;
        let grad = 2.0 * cg / s - r * (ag / a + bg / b);
        Some((r, grad))
    }

    /// Negated ratio and its gradient in `theta`.
    fn objective(&self, theta: &[f64], out: &mut [f64]) -> f64 {
        let g = self.to_g(theta);
        let Some((r, dg)) = self.ratio(&g) else {
            out.fill(0.0);
            return f64::INFINITY;
        };
        if self.monotone {
            let mut tail = 0.0;
            for k in (0..theta.len()).rev() {
                tail += dg[k + 1];
                out[k] = -2.0 * theta[k] * tail;
            }
        } else {
            for k in 0..theta.len() {
                out[k] = -dg[k + 1];
            }
        }
        -r
    }
}

pub fn search_same_g(
    pop: &Population,
    i: usize,
    j: usize,
    n: usize,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    let m = pop.m();
    if m < 2 {
        return Err(Error::InvalidSize(format!("support must have at least 2 points, got {m}")));
    }
    let joint = order_stat_joint_with(pop, i, j, n, &opts.joint)?;
    let px = DVector::from_vec(joint.marginal_x());
    let py = DVector::from_vec(joint.marginal_y());
    let p = &joint.pmf;
    let forms = Forms {
        a: DMatrix::from_diagonal(&px) - &px * px.transpose(),
        b: DMatrix::from_diagonal(&py) - &py * py.transpose(),
        c: (p + p.transpose()) * 0.5 - (&px * py.transpose() + &py * px.transpose()) * 0.5,
        monotone: opts.monotone,
    };

    let identity: Vec<f64> = pop.support().to_vec();
    let identity_value = joint.same_transform_moments(&identity)?.correlation()?;

    let mut starts: Vec<Vec<f64>> = vec![identity.clone()];
    let basis = build_basis(m)?;
    for k in 1..=3.min(m - 1) {
        let psi = basis.psi(k);
        if opts.monotone {
            let mut g = vec![0.0; m];
            for x in 1..m {
                g[x] = g[x - 1] + (psi[x] - psi[x - 1]).abs();
            }
            starts.push(g);
        } else {
            starts.push(psi.to_vec());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        let mut g = vec![0.0; m];
        for x in 1..m {
            g[x] = if opts.monotone { g[x - 1] + rng.random_range(0.0..1.0) } else { rng.random_range(-1.0..1.0) };
        }
        starts.push(g);
    }

    let local = LocalOptions { grad_tol: 1e-11, max_iter: 5000, divergence_radius: 1e12 };
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut used = 0;
    for g0 in &starts {
        let Some(theta0) = forms.theta_for(g0) else { continue };
        used += 1;
        let r = bfgs::minimize(|t, out| forms.objective(t, out), theta0, &local);
        if !r.value.is_finite() {
            continue;
        }
        let scale = r.x.iter().map(|t| t * t).sum::<f64>().sqrt();
        let converged = r.grad_norm * scale < 1e-8;
        // Strict improvement only, so ties go to the earliest seed.
        if best.as_ref().is_none_or(|b| -r.value > b.0) {
            best = Some((-r.value, r.x, converged));
        }
    }
    let (_, theta, converged) =
        best.ok_or_else(|| Error::UndefinedCorrelation("no admissible starting transform".into()))?;

    let g = forms.to_g(&theta);
    let mean = px.dot(&g);
    let sd = px.iter().zip(g.iter()).map(|(w, v)| w * (v - mean).powi(2)).sum::<f64>().sqrt();
    let g_star: Vec<f64> = g.iter().map(|v| (v - mean) / sd).collect();
    let value = joint.same_transform_moments(&g_star)?.correlation()?;
    Ok(SearchResult {
        value,
        support: identity,
        g_star,
        identity_value,
        restarts: used,
        converged,
        monotone_constraint: opts.monotone,
    })
}
