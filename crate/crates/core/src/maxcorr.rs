//! Maximal correlation of a finite discrete pair.
//!
//! For a joint pmf `P` with marginals `p_X`, `p_Y`, the kernel
//! `K[a][b] = P[a][b] / sqrt(p_X[a] p_Y[b])` has top singular value 1
//! (constants), and its second singular value is the maximal correlation
//! `R = sup corr(f(X), g(Y))`. The corresponding singular vectors, divided
//! by `sqrt(marginal)`, are the optimal `f` and `g`.

use nalgebra::DMatrix;
use num::{BigInt, BigRational, One, Zero};

use crate::bounds::terrell_discrete_bound;
use crate::error::{Error, Result};
use crate::populations::{order_stat_joint, OrderStatJoint, Population, SupportFunction};

/// Gap below which the second and third singular values are treated as tied.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MaxCorrResult {
    /// Maximal correlation.
    pub r: f64,
    /// Optimal transform of the first coordinate, standardised under its
    /// marginal.
    pub f_opt: SupportFunction,
    /// Optimal transform of the second coordinate, standardised.
    pub g_opt: SupportFunction,
    /// All singular values of the kernel, descending (the first is 1).
    pub singular_values: Vec<f64>,
    /// Set when the second singular value is not separated from the third,
    /// so the extremisers are not unique.
    pub non_unique: bool,
}

/// Support points and masses with positive probability.
fn positive_part(support: &[f64], marginal: &[f64]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let idx: Vec<usize> = (0..marginal.len()).filter(|&a| marginal[a] > 0.0).collect();
    let pts = idx.iter().map(|&a| support[a]).collect();
    let mass = idx.iter().map(|&a| marginal[a]).collect();
    (idx, pts, mass)
}

/// Maximal correlation of the order-statistic pair described by `joint`.
pub fn maximal_correlation(joint: &OrderStatJoint) -> Result<MaxCorrResult> {
    maximal_correlation_pmf(&joint.pmf, &joint.x_support, &joint.y_support)
}

/// Maximal correlation of an arbitrary finite joint pmf.
pub fn maximal_correlation_pmf(
    pmf: &DMatrix<f64>,
    x_support: &[f64],
    y_support: &[f64],
) -> Result<MaxCorrResult> {
    let px_full: Vec<f64> = pmf.row_iter().map(|r| r.sum()).collect();
    let py_full: Vec<f64> = pmf.column_iter().map(|c| c.sum()).collect();
    let (ix, xs, px) = positive_part(x_support, &px_full);
    let (iy, ys, py) = positive_part(y_support, &py_full);
    if px.len() < 2 || py.len() < 2 {
        return Err(Error::UndefinedCorrelation(
            "maximal correlation needs two non-degenerate marginals".into(),
        ));
    }

    let kernel = DMatrix::from_fn(px.len(), py.len(), |a, b| {
        pmf[(ix[a], iy[b])] / (px[a] * py[b]).sqrt()
    });
    let svd = kernel.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let second = order[1];
    let r = singular_values[1];
    let non_unique = singular_values
        .get(2)
        .is_some_and(|&s3| (r - s3).abs() < DEGENERACY_GAP);

    let mut f: Vec<f64> = (0..px.len()).map(|a| u[(a, second)] / px[a].sqrt()).collect();
    // Sign: non-negative at the largest support point.
    if *f.last().unwrap() < 0.0 {
        f.iter_mut().for_each(|v| *v = -*v);
    }
    // g = E[f(X) | Y] / R, consistent with the sign of f.
    let g: Vec<f64> = if r > 0.0 {
        (0..py.len())
            .map(|b| (0..px.len()).map(|a| pmf[(ix[a], iy[b])] * f[a]).sum::<f64>() / (py[b] * r))
            .collect()
    } else {
        (0..py.len()).map(|b| v_t[(second, b)] / py[b].sqrt()).collect()
    };

    Ok(MaxCorrResult {
        r,
        f_opt: SupportFunction { points: xs, values: f },
        g_opt: SupportFunction { points: ys, values: g },
        singular_values,
        non_unique,
    })
}

/// Maximal correlation by alternating conditional expectations (power
/// iteration on `E[E[f(X)|Y]|X]`). Independent of the SVD route.
pub fn maximal_correlation_ace(joint: &OrderStatJoint, iterations: usize) -> Result<f64> {
    let px = joint.marginal_x();
    let py = joint.marginal_y();
    let (mx, my) = (px.len(), py.len());
    // Start from a non-constant, non-symmetric vector.
    let mut f: Vec<f64> = (0..mx).map(|a| (a as f64 + 1.0).powf(1.3)).collect();
    let mut r = 0.0;
    for _ in 0..iterations {
        let mean: f64 = px.iter().zip(&f).map(|(p, v)| p * v).sum();
        f.iter_mut().for_each(|v| *v -= mean);
        let norm: f64 = px.iter().zip(&f).map(|(p, v)| p * v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::UndefinedCorrelation("ACE collapsed to a constant".into()));
        }
        f.iter_mut().for_each(|v| *v /= norm);
        let g: Vec<f64> = (0..my)
            .map(|b| {
                if py[b] > 0.0 {
                    (0..mx).map(|a| joint.pmf[(a, b)] * f[a]).sum::<f64>() / py[b]
                } else {
                    0.0
                }
            })
            .collect();
        r = py.iter().zip(&g).map(|(p, v)| p * v * v).sum::<f64>().sqrt();
        f = (0..mx)
            .map(|a| {
                if px[a] > 0.0 {
                    (0..my).map(|b| joint.pmf[(a, b)] * g[b]).sum::<f64>() / px[a]
                } else {
                    0.0
                }
            })
            .collect();
    }
    Ok(r)
}

/// `E[(E[f(X) | Y])^2]` with `f` first standardised under the law of `X`.
pub fn renyi_functional(joint: &OrderStatJoint, f: &[f64]) -> Result<f64> {
    if f.len() != joint.x_support.len() {
        return Err(Error::DimensionMismatch { expected: joint.x_support.len(), got: f.len() });
    }
    let px = joint.marginal_x();
    let py = joint.marginal_y();
    let mean: f64 = px.iter().zip(f).map(|(p, v)| p * v).sum();
    let var: f64 = px.iter().zip(f).map(|(p, v)| p * (v - mean).powi(2)).sum();
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(var > 1e-24 * scale * scale) {
        return Err(Error::UndefinedCorrelation("constant f".into()));
    }
    let sd = var.sqrt();
    let mut total = 0.0;
    for (b, &mass) in py.iter().enumerate() {
        if mass <= 0.0 {
            continue;
        }
        let h: f64 = (0..f.len()).map(|a| joint.pmf[(a, b)] * (f[a] - mean) / sd).sum::<f64>() / mass;
        total += mass * h * h;
    }
    Ok(total)
}

/// Outcome of the linear-perturbation argument `R_N >= rho_0 > rho_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationOutcome {
    /// `corr(f0(U_{1:2}), g0(U_{2:2}))`.
    pub rho0: f64,
    /// The lattice correlation bound at `N`.
    pub rho_n: f64,
    /// `rho0 > rho_n` and both perturbed maps strictly increasing.
    pub passes: bool,
}

/// `f0(x) = x - 3x^2/N^3`, `g0(y) = y + 3y^2/N^3` on `{1, ..., N}`.
fn perturbed_maps(n: usize) -> (Vec<f64>, Vec<f64>) {
    let n3 = (n as f64).powi(3);
    let f0 = (1..=n).map(|x| x as f64 - 3.0 * (x * x) as f64 / n3).collect();
    let g0 = (1..=n).map(|y| y as f64 + 3.0 * (y * y) as f64 / n3).collect();
    (f0, g0)
}

pub fn perturbation_check(n: usize) -> Result<PerturbationOutcome> {
    if n < 3 {
        return Err(Error::InvalidSize(format!("perturbation check needs N >= 3, got {n}")));
    }
    let joint = order_stat_joint(&Population::uniform_grid(n)?, 1, 2, 2)?;
    let (f0, g0) = perturbed_maps(n);
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    let rho0 = joint.pair_moments(&f0, &g0)?.correlation()?;
    let rho_n = terrell_discrete_bound(n)?;
    Ok(PerturbationOutcome {
        rho0,
        rho_n,
        passes: rho0 > rho_n && increasing(&f0) && increasing(&g0),
    })
}

/// Coefficients of `w(n)`, lowest degree first.
pub const W_COEFFS: [i64; 13] = [
    7010100, 35183016, 72768816, 86119956, 66523137, 35823456, 13910474, 3946848, 815185, 119820,
    11914, 720, 20,
];

/// Coefficients of the polynomial in `N` before substituting `N = n + 3`.
pub const W_COEFFS_IN_N: [i64; 13] = [
    -666, -1332, 846, 2952, 1077, -828, -934, -792, -485, 0, 34, 0, 20,
];

fn horner_big(coeffs: &[i64], x: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, &c| acc * x + BigInt::from(c))
}

/// Exact `w(n)`, checked against the pre-substitution polynomial at
/// `N = n + 3`.
pub fn w_polynomial_exact(n: u64) -> BigInt {
    let w = horner_big(&W_COEFFS, &BigInt::from(n));
    let v = horner_big(&W_COEFFS_IN_N, &BigInt::from(n + 3));
    assert_eq!(w, v, "w(n) and its pre-substitution form disagree at n = {n}");
    w
}

pub fn w_polynomial(n: u64) -> f64 {
    use num::ToPrimitive;
    w_polynomial_exact(n).to_f64().unwrap_or(f64::INFINITY)
}

/// Exact value of
/// `3600 s1^2 s2^2 N^14 (2N^2+1)^2 / ((N^2-1)^2 (N^2-4)) (rho0^2 - rho_N^2)`
/// for the perturbed pair, computed over the rationals from the joint law
/// of `(U_{1:2}, U_{2:2})`. Equals the pre-substitution polynomial at `N`.
pub fn perturbation_identity_exact(n: usize) -> Result<BigRational> {
    if n < 3 {
        return Err(Error::InvalidSize(format!("identity needs N >= 3, got {n}")));
    }
    let big = |v: i64| BigRational::from_integer(BigInt::from(v));
    let ni = n as i64;
    let n2 = ni * ni;
    let n3 = big(n2 * ni);
    let f0 = |x: i64| big(x) - big(3 * x * x) / &n3;
    let g0 = |y: i64| big(y) + big(3 * y * y) / &n3;

    let mut cells = Vec::new();
    for x in 1..=ni {
        for y in x..=ni {
            let w = if x < y { 2 } else { 1 };
            cells.push((BigRational::new(BigInt::from(w), BigInt::from(n2)), f0(x), g0(y)));
        }
    }
    let ef = cells.iter().fold(BigRational::zero(), |s, (p, f, _)| s + p * f);
    let eg = cells.iter().fold(BigRational::zero(), |s, (p, _, g)| s + p * g);
    let mut vf = BigRational::zero();
    let mut vg = BigRational::zero();
    let mut c = BigRational::zero();
    for (p, f, g) in &cells {
        let df = f - &ef;
        let dg = g - &eg;
        vf += p * &df * &df;
        vg += p * &dg * &dg;
        c += p * &df * &dg;
    }
    let rho_n = BigRational::new(BigInt::from(n2 - 1), BigInt::from(2 * n2 + 1));
    let diff = &c * &c - &rho_n * &rho_n * &vf * &vg;
    let mut n14 = BigRational::one();
    for _ in 0..14 {
        n14 *= big(ni);
    }
    let pref = big(3600) * n14 * big(2 * n2 + 1) * big(2 * n2 + 1)
        / (big(n2 - 1) * big(n2 - 1) * big(n2 - 4));
    Ok(pref * diff)
}
