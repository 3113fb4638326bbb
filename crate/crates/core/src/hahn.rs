//! Orthonormal Hahn (discrete Chebyshev) polynomials on `{1, ..., N}`.
//!
//! `psi_k` is the degree-`k` polynomial orthonormal for the uniform law on
//! the grid, `(1/N) sum_x psi_k(x) psi_m(x) = delta_{k,m}`, with a strictly
//! positive leading coefficient.
//!
//! The basis is tabulated by a Lanczos run on the diagonal operator
//! `x -> x`, started from the constant vector, with full
//! reorthogonalisation at every step. This is stable up to several hundred
//! grid points, whereas the explicit binomial sum loses all digits to
//! cancellation long before that.

use crate::error::{Error, Result};

/// Largest grid size for which the orthonormality tolerance is guaranteed.
pub const MAX_STABLE_N: usize = 200;

/// Tabulated Hahn basis for a grid of size `n`.
#[derive(Debug, Clone)]
pub struct HahnBasis {
    n: usize,
    /// `psi[k][x - 1] = psi_k(x)`.
    psi: Vec<Vec<f64>>,
    /// Leading coefficients `A_0..A_{N-1}` (`A_0 = 1`).
    a: Vec<f64>,
    /// Second coefficients `B_0..B_{N-1}` (`B_0 = 0`).
    b: Vec<f64>,
    /// `lambda_1..lambda_{N-1}` stored at index `k - 1`.
    lambda: Vec<f64>,
}

/// A real function on the grid `{1, ..., N}`; `values[x - 1] = g(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

/// Hahn-Fourier coefficients `delta_0..delta_{N-1}` of a grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    delta: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSize(format!(
                "grid function needs at least 2 points, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid function has non-finite entries".into()));
        }
        Ok(Self { values })
    }

    /// `g(x) = f(x)` for `x = 1..=n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((1..=n).map(|x| f(x as f64)).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at grid point `x` (1-based).
    pub fn at(&self, x: usize) -> f64 {
        self.values[x - 1]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl FourierCoeffs {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.len() < 2 {
            return Err(Error::InvalidSize(format!(
                "coefficient vector needs at least 2 entries, got {}",
                delta.len()
            )));
        }
        Ok(Self { delta })
    }

    pub fn n(&self) -> usize {
        self.delta.len()
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// `delta_k`, with the convention `delta_k = 0` for `k >= N`.
    pub fn get(&self, k: usize) -> f64 {
        self.delta.get(k).copied().unwrap_or(0.0)
    }
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    (1..=k).map(|i| (((n - k + i) as f64) / (i as f64)).ln()).sum()
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln A_k` for `k >= 1`.
fn ln_leading(n: usize, k: usize) -> f64 {
    let (n, k) = (n as u64, k as u64);
    0.5 * (n as f64).ln() - ln_factorial(k) + 0.5 * ln_binomial(2 * k, k)
        - 0.5 * ln_binomial(n + k, 2 * k + 1)
}

/// Leading and sub-leading monomial coefficients `(A_k, B_k)` of `psi_k`,
/// `psi_k(x) = A_k x^k + B_k x^{k-1} + ...`, from their closed forms.
pub fn leading_coefficients(n: usize, k: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("grid size must be >= 2, got {n}")));
    }
    if k < 1 || k > n - 1 {
        return Err(Error::IndexOutOfRange { index: k, lo: 1, hi: n - 1 });
    }
    let a = ln_leading(n, k).exp();
    // B_k = -k (N+1) sqrt(N) / k! * C(2k-1, k) * C(N+k, 2k+1)^{-1/2} * C(2k, k)^{-1/2}
    let (nu, ku) = (n as u64, k as u64);
    let ln_b_abs = ((k * (n + 1)) as f64).ln() + 0.5 * (n as f64).ln() - ln_factorial(ku)
        + ln_binomial(2 * ku - 1, ku)
        - 0.5 * ln_binomial(nu + ku, 2 * ku + 1)
        - 0.5 * ln_binomial(2 * ku, ku);
    Ok((a, -ln_b_abs.exp()))
}

/// `lambda_k = (k+1) sqrt((N^2 - (k+1)^2) / ((2k+1)(2k+3)))`.
pub fn lambda_k(n: usize, k: usize) -> f64 {
    let n = n as f64;
    let k1 = (k + 1) as f64;
    let k = k as f64;
    k1 * ((n * n - k1 * k1) / ((2.0 * k + 1.0) * (2.0 * k + 3.0))).sqrt()
}

/// `N A_k / (2 A_{k+1})`, evaluated in log space (valid for `1 <= k <= N-2`).
pub fn lambda_from_leading(n: usize, k: usize) -> f64 {
    0.5 * n as f64 * (ln_leading(n, k) - ln_leading(n, k + 1)).exp()
}

/// Tabulates the orthonormal Hahn basis on `{1, ..., n}`.
pub fn build_basis(n: usize) -> Result<HahnBasis> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("grid size must be >= 2, got {n}")));
    }
    if n > MAX_STABLE_N {
        log::warn!(
            "Hahn basis requested for N = {n} > {MAX_STABLE_N}; orthonormality is only \
             guaranteed to 1e-9 up to N = {MAX_STABLE_N}"
        );
    }

    let centre = (n as f64 + 1.0) / 2.0;
    let nodes: Vec<f64> = (1..=n).map(|x| x as f64 - centre).collect();

    // Euclidean-orthonormal Lanczos vectors; psi_k = sqrt(N) q_k.
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    q.push(vec![1.0 / (n as f64).sqrt(); n]);
    for k in 0..n - 1 {
        let mut w: Vec<f64> = q[k].iter().zip(&nodes).map(|(v, t)| v * t).collect();
        for _ in 0..2 {
            for prev in &q {
                let proj = dot(&w, prev);
                for (wi, pi) in w.iter_mut().zip(prev) {
                    *wi -= proj * pi;
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        // norm = lambda_k / 2 > 0 in exact arithmetic, so the new vector
        // inherits a positive leading coefficient.
        w.iter_mut().for_each(|v| *v /= norm);
        q.push(w);
    }

    let scale = (n as f64).sqrt();
    let psi = q
        .into_iter()
        .map(|v| v.into_iter().map(|e| e * scale).collect())
        .collect();

    let mut a = vec![1.0; n];
    let mut b = vec![0.0; n];
    for k in 1..n {
        let (ak, bk) = leading_coefficients(n, k)?;
        a[k] = ak;
        b[k] = bk;
    }
    let lambda = (1..n).map(|k| lambda_k(n, k)).collect();

    Ok(HahnBasis { n, psi, a, b, lambda })
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

impl HahnBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Values of `psi_k` on the grid.
    pub fn psi(&self, k: usize) -> &[f64] {
        &self.psi[k]
    }

    /// `psi_k(x)`, `x` 1-based.
    pub fn eval(&self, k: usize, x: usize) -> f64 {
        self.psi[k][x - 1]
    }

    /// Leading coefficients `A_0..A_{N-1}`.
    pub fn leading(&self) -> &[f64] {
        &self.a
    }

    /// Second coefficients `B_0..B_{N-1}`.
    pub fn second(&self) -> &[f64] {
        &self.b
    }

    /// `lambda_1..lambda_{N-1}` at indices `0..N-1`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    /// `lambda_k` for `1 <= k <= N-1`.
    pub fn lambda(&self, k: usize) -> f64 {
        self.lambda[k - 1]
    }

    /// The grid function `psi_k`.
    pub fn grid_function(&self, k: usize) -> GridFunction {
        GridFunction { values: self.psi[k].clone() }
    }

    /// `(1/N) sum_x u(x) v(x)`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, v) / self.n as f64
    }

    /// `max_{k,m} |<psi_k, psi_m> - delta_{k,m}|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.n {
            for m in k..self.n {
                let target = if k == m { 1.0 } else { 0.0 };
                worst = worst.max((self.inner(&self.psi[k], &self.psi[m]) - target).abs());
            }
        }
        worst
    }

    /// `delta_k = (1/N) sum_x psi_k(x) g(x)`.
    pub fn fourier_coefficients(&self, g: &GridFunction) -> Result<FourierCoeffs> {
        check_dim(self.n, g.n())?;
        Ok(FourierCoeffs {
            delta: self.psi.iter().map(|p| self.inner(p, &g.values)).collect(),
        })
    }

    /// `g(x) = sum_k delta_k psi_k(x)`.
    pub fn reconstruct(&self, coeffs: &FourierCoeffs) -> Result<GridFunction> {
        check_dim(self.n, coeffs.n())?;
        let mut values = vec![0.0; self.n];
        for (d, p) in coeffs.delta.iter().zip(&self.psi) {
            for (v, pv) in values.iter_mut().zip(p) {
                *v += d * pv;
            }
        }
        Ok(GridFunction { values })
    }
}

/// Free-function form of [`HahnBasis::fourier_coefficients`].
pub fn fourier_coefficients(basis: &HahnBasis, g: &GridFunction) -> Result<FourierCoeffs> {
    basis.fourier_coefficients(g)
}

/// Free-function form of [`HahnBasis::reconstruct`].
pub fn reconstruct(basis: &HahnBasis, coeffs: &FourierCoeffs) -> Result<GridFunction> {
    basis.reconstruct(coeffs)
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// The explicit binomial-sum definition, usable only for small grids.
    fn psi_explicit(n: usize, k: usize, x: usize) -> f64 {
        let (nu, ku) = (n as u64, k as u64);
        let binom = |a: u64, b: u64| -> f64 {
            if b > a {
                0.0
            } else {
                ln_binomial(a, b).exp()
            }
        };
        let pref = (n as f64).sqrt()
            / (binom(nu + ku, 2 * ku + 1) * binom(2 * ku, ku)).sqrt();
        let mut s = 0.0;
        for j in 0..=ku {
            let sign = if (ku - j) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign
                * binom(ku + j, j)
                * binom(nu - 1 - j, ku - j)
                * binom(x as u64 - 1, j);
        }
        pref * s
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(matches!(build_basis(1), Err(Error::InvalidSize(_))));
        assert!(matches!(build_basis(0), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn psi1_on_three_points() {
        let b = build_basis(3).unwrap();
        let s = 1.5f64.sqrt();
        for (got, want) in b.psi(1).iter().zip([-s, 0.0, s]) {
            assert_relative_eq!(*got, want, epsilon = 1e-14);
        }
        assert!(b.psi(0).iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert_relative_eq!(b.lambda(1), 2.0 * (5.0f64 / 15.0).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn matches_explicit_sum_for_small_grids() {
        for n in 2..=12 {
            let b = build_basis(n).unwrap();
            for k in 0..n {
                for x in 1..=n {
                    let e = psi_explicit(n, k, x);
                    assert!(
                        (b.eval(k, x) - e).abs() < 1e-9 * (1.0 + e.abs()),
                        "N={n} k={k} x={x}: {} vs {e}",
                        b.eval(k, x)
                    );
                }
            }
        }
    }

    #[test]
    fn leading_coefficient_examples() {
        let (a, b) = leading_coefficients(3, 1).unwrap();
        assert_relative_eq!(a, 1.5f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(b, -2.0 * a, epsilon = 1e-13);
        let (a, b) = leading_coefficients(2, 1).unwrap();
        assert_relative_eq!(a, 2.0, epsilon = 1e-14);
        assert_relative_eq!(b, -3.0, epsilon = 1e-13);
        for n in 2..40 {
            let (a, b) = leading_coefficients(n, 1).unwrap();
            assert_relative_eq!(a, (12.0 / ((n * n - 1) as f64)).sqrt(), max_relative = 1e-13);
            assert_relative_eq!(b / a, -((n + 1) as f64) / 2.0, max_relative = 1e-13);
        }
        assert!(matches!(leading_coefficients(3, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(leading_coefficients(3, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn leading_coefficients_match_finite_differences() {
        // Delta^k psi_k = k! A_k and
        // Delta^{k-1} psi_k(1) = A_k k! (k+1)/2 + B_k (k-1)!.
        for n in [6usize, 9, 14] {
            let basis = build_basis(n).unwrap();
            for k in 1..=5.min(n - 1) {
                let mut d = basis.psi(k).to_vec();
                for _ in 0..k - 1 {
                    d = d.windows(2).map(|w| w[1] - w[0]).collect();
                }
                let dkm1 = d[0];
                let dk = d[1] - d[0];
                let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
                let a = dk / fact(k);
                let b = (dkm1 - a * fact(k) * (k as f64 + 1.0) / 2.0) / fact(k - 1);
                let (ca, cb) = leading_coefficients(n, k).unwrap();
                assert_relative_eq!(a, ca, max_relative = 1e-8);
                assert_relative_eq!(b, cb, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn fourier_of_identity_and_constants() {
        for n in [2usize, 3, 7, 20] {
            let basis = build_basis(n).unwrap();
            let id = GridFunction::from_fn(n, |x| x).unwrap();
            let c = basis.fourier_coefficients(&id).unwrap();
            let nf = n as f64;
            assert_relative_eq!(c.get(0), (nf + 1.0) / 2.0, epsilon = 1e-12);
            assert_relative_eq!(c.get(1), ((nf * nf - 1.0) / 12.0).sqrt(), epsilon = 1e-12);
            for k in 2..n {
                assert!(c.get(k).abs() < 1e-11);
            }
            let k3 = GridFunction::new(vec![3.5; n]).unwrap();
            let c = basis.fourier_coefficients(&k3).unwrap();
            assert_relative_eq!(c.get(0), 3.5, epsilon = 1e-13);
            assert!(c.delta()[1..].iter().all(|d| d.abs() < 1e-12));
        }
        let basis = build_basis(5).unwrap();
        let c = basis.fourier_coefficients(&basis.grid_function(2)).unwrap();
        for (k, d) in c.delta().iter().enumerate() {
            assert_relative_eq!(*d, if k == 2 { 1.0 } else { 0.0 }, epsilon = 1e-13);
        }
    }

    #[test]
    fn reconstruct_basics() {
        let basis = build_basis(6).unwrap();
        let mut d = vec![0.0; 6];
        d[1] = 1.0;
        let g = basis.reconstruct(&FourierCoeffs::new(d).unwrap()).unwrap();
        assert_eq!(g.values(), basis.psi(1));
        let z = basis.reconstruct(&FourierCoeffs::new(vec![0.0; 6]).unwrap()).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let bad = FourierCoeffs::new(vec![0.0; 5]).unwrap();
        assert!(matches!(basis.reconstruct(&bad), Err(Error::DimensionMismatch { .. })));
        let g5 = GridFunction::new(vec![1.0; 5]).unwrap();
        assert!(matches!(basis.fourier_coefficients(&g5), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn grid_function_validation() {
        assert!(GridFunction::new(vec![1.0]).is_err());
        assert!(GridFunction::new(vec![1.0, f64::NAN]).is_err());
    }
}
