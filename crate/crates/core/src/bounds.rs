//! Closed-form bounds for the correlation and covariance of an ordered pair,
//! and the variance representations behind them.
//!
//! For a grid function `g` with Hahn coefficients `delta_k`, the variances
//! and covariance of `(g(U_{1:2}), g(U_{2:2}))` (`U` uniform on
//! `{1, ..., N}`) have explicit quadratic forms in the `delta_k`:
//! [`sigma_from_deltas`] evaluates them directly, [`sigma_terrell_hahn`]
//! evaluates the equivalent sum-of-squares form built from
//! [`alpha_beta`]. The second form is what makes the Cauchy-Schwarz
//! argument in [`cauchy_chain`] work.

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};
use crate::hahn::{lambda_k, FourierCoeffs};
use crate::populations::{order_stat_joint, Population};

/// Relative tolerance used to decide that a bound is attained.
pub const EQUALITY_TOL: f64 = 1e-10;

fn check_grid(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("N must be >= 2, got {n}")));
    }
    Ok(())
}

/// `(1 - N^-2) / (2 + N^-2)`, the largest correlation of an ordered pair
/// drawn from an `N`-point uniform population.
pub fn terrell_discrete_bound(n: usize) -> Result<f64> {
    check_grid(n)?;
    let n2 = (n as f64) * (n as f64);
    Ok((n2 - 1.0) / (2.0 * n2 + 1.0))
}

/// `1/2 - terrell_discrete_bound(N) = 3 / (2 (2 N^2 + 1))`, free of the
/// cancellation that makes the bound itself saturate in `f64` for large `N`.
pub fn terrell_gap(n: usize) -> Result<f64> {
    check_grid(n)?;
    let n2 = (n as f64) * (n as f64);
    Ok(1.5 / (2.0 * n2 + 1.0))
}

/// The bound as an exact fraction `(N^2 - 1) / (2 N^2 + 1)`.
pub fn terrell_discrete_bound_exact(n: usize) -> Result<num::rational::Ratio<u128>> {
    check_grid(n)?;
    let n2 = (n as u128) * (n as u128);
    Ok(num::rational::Ratio::new(n2 - 1, 2 * n2 + 1))
}

/// `sqrt(i (n + 1 - j) / (j (n + 1 - i)))`.
pub fn tsm_bound(i: usize, j: usize, n: usize) -> Result<f64> {
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidIndices { i, j, n });
    }
    let (i, j, n) = (i as f64, j as f64, n as f64);
    Ok((i * (n + 1.0 - j) / (j * (n + 1.0 - i))).sqrt())
}

/// `R_k(x)` from `R_0 = 1`,
/// `R_k = 1 - k^2 (1 - k^2/x) / ((4k^2 - 1) R_{k-1})`.
///
/// Defined for `x >= k^2` (for `k >= 1`); `(k+1)/(2k+1) < R_k(x) < 1`
/// whenever `x > k^2`, and `R_k(k^2) = 1`.
pub fn rational_r(k: usize, x: f64) -> Result<f64> {
    let kf = k as f64;
    if k >= 1 && !(x >= kf * kf) {
        return Err(Error::Domain(format!("R_{k}(x) needs x >= {}, got {x}", kf * kf)));
    }
    Ok(rational_r_unchecked(k, x))
}

fn rational_r_unchecked(k: usize, x: f64) -> f64 {
    let mut r = 1.0;
    for m in 1..=k {
        let m2 = (m * m) as f64;
        r = 1.0 - m2 * (1.0 - m2 / x) / ((4.0 * m2 - 1.0) * r);
    }
    r
}

/// `(alpha_k, beta_k)`, `k = 1..N-1`, with `alpha_k = R_k(N^2)` and
/// `beta_k = 1 - R_{k+1}(N^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBetaSeq {
    pub n: usize,
    /// `alpha[k - 1] = alpha_k`.
    pub alpha: Vec<f64>,
    /// `beta[k - 1] = beta_k`.
    pub beta: Vec<f64>,
}

impl AlphaBetaSeq {
    pub fn alpha(&self, k: usize) -> f64 {
        self.alpha[k - 1]
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.beta[k - 1]
    }
}

pub fn alpha_beta(n: usize) -> Result<AlphaBetaSeq> {
    check_grid(n)?;
    let x = (n * n) as f64;
    let mut alpha = Vec::with_capacity(n - 1);
    let mut beta = Vec::with_capacity(n - 1);
    // One pass of the recurrence yields R_1(x), ..., R_N(x).
    let mut r = 1.0;
    let mut rs = Vec::with_capacity(n);
    for m in 1..=n {
        let m2 = (m * m) as f64;
        r = 1.0 - m2 * (1.0 - m2 / x) / ((4.0 * m2 - 1.0) * r);
        rs.push(r);
    }
    for k in 1..n {
        alpha.push(rs[k - 1]);
        beta.push(if k == n - 1 { 0.0 } else { 1.0 - rs[k] });
    }
    Ok(AlphaBetaSeq { n, alpha, beta })
}

/// Exact `(alpha_k, beta_k)` over the rationals.
pub fn alpha_beta_exact(n: usize) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    check_grid(n)?;
    let x = BigRational::from_integer(BigInt::from(n * n));
    let one = BigRational::one();
    let mut r = one.clone();
    let mut rs = Vec::with_capacity(n);
    for m in 1..=n {
        let m2 = BigRational::from_integer(BigInt::from(m * m));
        let four_m2_minus_1 = BigRational::from_integer(BigInt::from(4 * m * m - 1));
        r = &one - &m2 * (&one - &m2 / &x) / (four_m2_minus_1 * &r);
        rs.push(r.clone());
    }
    let alpha = rs[..n - 1].to_vec();
    let beta = (1..n)
        .map(|k| if k == n - 1 { BigRational::zero() } else { &one - &rs[k] })
        .collect();
    Ok((alpha, beta))
}

/// Variances and covariance of `(g(U_{1:2}), g(U_{2:2}))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaTriple {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma12: f64,
}

impl SigmaTriple {
    pub fn rho(&self) -> Result<f64> {
        if !(self.sigma1_sq > 0.0 && self.sigma2_sq > 0.0) {
            return Err(Error::UndefinedCorrelation("constant transform".into()));
        }
        Ok(self.sigma12 / (self.sigma1_sq * self.sigma2_sq).sqrt())
    }
}

fn check_coeffs(n: usize, deltas: &FourierCoeffs) -> Result<()> {
    check_grid(n)?;
    if deltas.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: deltas.n() });
    }
    Ok(())
}

/// Quadratic-form representation of the variances and covariance of the
/// ordered pair in terms of the Hahn coefficients.
pub fn sigma_from_deltas(n: usize, deltas: &FourierCoeffs) -> Result<SigmaTriple> {
    check_coeffs(n, deltas)?;
    let nf = n as f64;
    let d = deltas.delta();
    let energy: f64 = d[1..].iter().map(|v| v * v).sum();
    let sigma12 = d[1] * d[1] / 3.0 * (1.0 - 1.0 / (nf * nf));
    let cross: f64 = (1..n - 1).map(|k| lambda_k(n, k) * d[k] * d[k + 1]).sum::<f64>() * 2.0 / nf;
    Ok(SigmaTriple {
        sigma1_sq: energy - sigma12 - cross,
        sigma2_sq: energy - sigma12 + cross,
        sigma12,
    })
}

/// Sum-of-squares form of `(sigma1^2, sigma2^2)`:
/// `sum_k (sqrt(alpha_k) delta_k -/+ sqrt(beta_k) delta_{k+1})^2`, with
/// `delta_N = 0`.
pub fn sigma_terrell_hahn(n: usize, deltas: &FourierCoeffs, ab: &AlphaBetaSeq) -> Result<(f64, f64)> {
    check_coeffs(n, deltas)?;
    if ab.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: ab.n });
    }
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for k in 1..n {
        let u = ab.alpha(k).sqrt() * deltas.get(k);
        let v = ab.beta(k).sqrt() * deltas.get(k + 1);
        s1 += (u - v) * (u - v);
        s2 += (u + v) * (u + v);
    }
    Ok((s1, s2))
}

/// The chain `sigma1^2 sigma2^2 >= cauchy^2 >= (alpha_1 delta_1^2)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyChain {
    pub product: f64,
    /// `(sum_k alpha_k delta_k^2 - beta_k delta_{k+1}^2)^2`.
    pub cauchy: f64,
    /// `(alpha_1 delta_1^2)^2`.
    pub floor: f64,
    pub sigma12: f64,
}

pub fn cauchy_chain(n: usize, deltas: &FourierCoeffs, ab: &AlphaBetaSeq) -> Result<CauchyChain> {
    let (s1, s2) = sigma_terrell_hahn(n, deltas, ab)?;
    let inner: f64 = (1..n)
        .map(|k| ab.alpha(k) * deltas.get(k).powi(2) - ab.beta(k) * deltas.get(k + 1).powi(2))
        .sum();
    let d1 = deltas.get(1);
    let nf = n as f64;
    Ok(CauchyChain {
        product: s1 * s2,
        cauchy: inner * inner,
        floor: (ab.alpha(1) * d1 * d1).powi(2),
        sigma12: d1 * d1 / 3.0 * (1.0 - 1.0 / (nf * nf)),
    })
}

fn require_uniform(pop: &Population) -> Result<usize> {
    let n = pop.raw_size().ok_or_else(|| {
        Error::Unsupported("bound only holds for uniform populations (no explicit weights)".into())
    })?;
    if pop.is_degenerate() {
        return Err(Error::UndefinedCorrelation("degenerate population".into()));
    }
    Ok(n)
}

/// `E X_{2:2} <= mu + sqrt(1 - N^-2) sigma / sqrt(3)` for a uniform
/// `N`-point population. Returns the bound and whether it is attained.
pub fn hdg_discrete_bound(pop: &Population) -> Result<(f64, bool)> {
    let n = require_uniform(pop)? as f64;
    let mu = pop.mean();
    let sigma = pop.variance().sqrt();
    let bound = mu + (1.0 - 1.0 / (n * n)).sqrt() * sigma / 3f64.sqrt();
    let e_max = order_stat_joint(pop, 1, 2, 2)?.moments().mean_y;
    let attained = (bound - e_max).abs() <= EQUALITY_TOL * sigma.max(mu.abs());
    Ok((bound, attained))
}

/// `(Cov(X_{1:2}, X_{2:2}), sigma^2 (1 - N^-2) / 3)` for a uniform
/// `N`-point population.
pub fn covariance_bound_check(pop: &Population) -> Result<(f64, f64)> {
    let n = require_uniform(pop)? as f64;
    let cov = order_stat_joint(pop, 1, 2, 2)?.moments().cov;
    Ok((cov, pop.variance() * (1.0 - 1.0 / (n * n)) / 3.0))
}

/// Whether `cov` attains `bound` within [`EQUALITY_TOL`] (scaled by the
/// bound itself, i.e. by a product of standard deviations).
pub fn covariance_attained(cov: f64, bound: f64) -> bool {
    (bound - cov).abs() <= EQUALITY_TOL * bound.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hahn::{build_basis, GridFunction};
    use crate::populations::make_population;
    use approx::assert_relative_eq;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn bound_fixtures() {
        assert_eq!(terrell_discrete_bound(2).unwrap(), 1.0 / 3.0);
        assert_eq!(terrell_discrete_bound(3).unwrap(), 8.0 / 19.0);
        assert!((0.5 - terrell_discrete_bound(1_000_000).unwrap()) < 1e-11);
        assert!(terrell_discrete_bound(1).is_err());
        assert_relative_eq!(terrell_gap(3).unwrap(), 0.5 - 8.0 / 19.0, epsilon = 1e-16);
    }

    #[test]
    fn tsm_fixtures() {
        assert_relative_eq!(tsm_bound(1, 2, 2).unwrap(), 0.5, epsilon = 1e-16);
        assert_relative_eq!(tsm_bound(1, 3, 3).unwrap(), 1.0 / 3.0, epsilon = 1e-16);
        assert_relative_eq!(tsm_bound(2, 3, 3).unwrap(), 1.0 / 3f64.sqrt(), epsilon = 1e-16);
        assert!(tsm_bound(2, 2, 3).is_err());
        assert!(tsm_bound(1, 4, 3).is_err());
    }

    #[test]
    fn rational_r_fixtures() {
        assert_eq!(rational_r(0, 123.0).unwrap(), 1.0);
        assert_eq!(rational_r(1, 1.0).unwrap(), 1.0);
        for x in [1.5, 4.0, 1e3] {
            assert_relative_eq!(rational_r(1, x).unwrap(), (2.0 + 1.0 / x) / 3.0, epsilon = 1e-15);
        }
        assert_relative_eq!(rational_r(2, 9.0).unwrap(), 15.0 / 19.0, epsilon = 1e-15);
        assert!(matches!(rational_r(2, 3.9), Err(Error::Domain(_))));
    }

    #[test]
    fn alpha_beta_three() {
        let ab = alpha_beta(3).unwrap();
        assert_relative_eq!(ab.alpha(1), 19.0 / 27.0, epsilon = 1e-15);
        assert_relative_eq!(ab.beta(1), 4.0 / 19.0, epsilon = 1e-15);
        assert_relative_eq!(ab.alpha(2), 15.0 / 19.0, epsilon = 1e-15);
        assert_eq!(ab.beta(2), 0.0);
        assert_relative_eq!(ab.alpha(1) * ab.beta(1), 4.0 / 27.0, epsilon = 1e-15);

        let (a, b) = alpha_beta_exact(3).unwrap();
        assert_eq!(a, vec![ratio(19, 27), ratio(15, 19)]);
        assert_eq!(b, vec![ratio(4, 19), ratio(0, 1)]);
    }

    #[test]
    fn float_recurrence_matches_exact() {
        use num::ToPrimitive;
        for n in 2..=20 {
            let ab = alpha_beta(n).unwrap();
            let (a, b) = alpha_beta_exact(n).unwrap();
            for k in 1..n {
                assert_relative_eq!(ab.alpha(k), a[k - 1].to_f64().unwrap(), max_relative = 1e-14);
                assert!((ab.beta(k) - b[k - 1].to_f64().unwrap()).abs() < 1e-15);
            }
            // (iv) exactly
            for k in 1..n {
                let k1 = (k + 1) as i64;
                let nn = (n * n) as i64;
                let want = ratio(k1 * k1, (2 * k as i64 + 1) * (2 * k as i64 + 3))
                    * (BigRational::one() - ratio(k1 * k1, nn));
                assert_eq!(&a[k - 1] * &b[k - 1], want, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn sigma_for_identity_on_three() {
        let basis = build_basis(3).unwrap();
        let id = GridFunction::from_fn(3, |x| x).unwrap();
        let d = basis.fourier_coefficients(&id).unwrap();
        let s = sigma_from_deltas(3, &d).unwrap();
        assert_relative_eq!(s.sigma1_sq, 38.0 / 81.0, epsilon = 1e-14);
        assert_relative_eq!(s.sigma2_sq, 38.0 / 81.0, epsilon = 1e-14);
        assert_relative_eq!(s.sigma12, 16.0 / 81.0, epsilon = 1e-14);
        let ab = alpha_beta(3).unwrap();
        let (s1, s2) = sigma_terrell_hahn(3, &d, &ab).unwrap();
        assert_relative_eq!(s1, 38.0 / 81.0, epsilon = 1e-14);
        assert_relative_eq!(s2, 38.0 / 81.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_and_top_coefficient() {
        let n = 6;
        let z = FourierCoeffs::new(vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let s = sigma_from_deltas(n, &z).unwrap();
        assert_eq!((s.sigma1_sq, s.sigma2_sq, s.sigma12), (0.0, 0.0, 0.0));

        let mut d = vec![0.0; n];
        d[n - 1] = 1.7;
        let top = FourierCoeffs::new(d).unwrap();
        let ab = alpha_beta(n).unwrap();
        let (s1, s2) = sigma_terrell_hahn(n, &top, &ab).unwrap();
        let want = (ab.alpha(n - 1) + ab.beta(n - 2)) * 1.7 * 1.7;
        assert_relative_eq!(want, 1.7 * 1.7, epsilon = 1e-14);
        assert_relative_eq!(s1, want, epsilon = 1e-14);
        assert_relative_eq!(s2, want, epsilon = 1e-14);
        let bad = FourierCoeffs::new(vec![0.0; 5]).unwrap();
        assert!(matches!(sigma_from_deltas(n, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn remark_bounds_fixtures() {
        let p = make_population(&[1.0, 2.0, 4.0], None).unwrap();
        let (cov, bound) = covariance_bound_check(&p).unwrap();
        assert_relative_eq!(cov, 4.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(bound, 112.0 / 243.0, epsilon = 1e-15);
        let (hdg, attained) = hdg_discrete_bound(&p).unwrap();
        assert_relative_eq!(hdg, 7.0 / 3.0 + (112.0f64 / 243.0).sqrt(), epsilon = 1e-14);
        assert!((hdg - 3.01224).abs() < 1e-5);
        assert!(!attained);

        let l = make_population(&[1.0, 2.0, 3.0], None).unwrap();
        let (cov, bound) = covariance_bound_check(&l).unwrap();
        assert_relative_eq!(cov, 16.0 / 81.0, epsilon = 1e-15);
        assert!(covariance_attained(cov, bound));
        assert!(hdg_discrete_bound(&l).unwrap().1);

        let two = make_population(&[0.0, 1.0], None).unwrap();
        let (cov, bound) = covariance_bound_check(&two).unwrap();
        assert_relative_eq!(cov, 1.0 / 16.0, epsilon = 1e-16);
        assert_relative_eq!(bound, 1.0 / 16.0, epsilon = 1e-16);

        let w = make_population(&[1.0, 2.0, 3.0], Some(&[0.25, 0.5, 0.25])).unwrap();
        assert!(matches!(hdg_discrete_bound(&w), Err(Error::Unsupported(_))));
        assert!(matches!(covariance_bound_check(&w), Err(Error::Unsupported(_))));
    }

    #[test]
    fn hdg_limit_approaches_continuous_constant() {
        let p = Population::lattice(0.0, 1.0, 500).unwrap();
        let (b, _) = hdg_discrete_bound(&p).unwrap();
        assert!((b - 1.0 / 3f64.sqrt()).abs() < 1e-5);
    }
}
