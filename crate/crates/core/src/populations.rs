//! Finite populations and the exact joint law of pairs of order statistics.
//!
//! A [`Population`] is a finite discrete law: strictly increasing support
//! points with positive masses. Tied input values are merged on
//! construction, so an `N`-point list with ties becomes the uniform law on
//! the list in which each distinct value carries `(multiplicity)/N`.
//!
//! The joint pmf of `(X_{i:n}, X_{j:n})` is computed either by enumerating
//! all `m^n` samples or through multinomial sums over the cumulative
//! probabilities. Enumeration is the reference; the formula extends the
//! reachable range.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Default cap on the number of enumerated samples.
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

/// Tolerance on `sum(p) = 1` after normalisation.
const PROB_SUM_TOL: f64 = 1e-12;

/// A finite discrete law with strictly increasing support.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    support: Vec<f64>,
    probs: Vec<f64>,
    raw_size: Option<usize>,
    lattice: bool,
}

/// Builds a population from (unsorted, possibly tied) values.
///
/// Without `probs` each value gets mass `1/N`. Given `probs`, they are
/// normalised to sum to one; zero masses drop the corresponding value.
pub fn make_population(values: &[f64], probs: Option<&[f64]>) -> Result<Population> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("population values must be finite".into()));
    }
    let n = values.len();
    let weights: Vec<f64> = match probs {
        None => vec![1.0 / n as f64; n],
        Some(p) => {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
            if p.iter().any(|&w| !w.is_finite() || w < 0.0) {
                return Err(Error::InvalidProbabilities(
                    "probabilities must be finite and non-negative".into(),
                ));
            }
            let total: f64 = p.iter().sum();
            if total <= 0.0 {
                return Err(Error::InvalidProbabilities("probabilities sum to zero".into()));
            }
            p.iter().map(|w| w / total).collect()
        }
    };
    let uniform = weights.iter().all(|&w| (w - 1.0 / n as f64).abs() <= PROB_SUM_TOL);

    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .copied()
        .zip(weights)
        .filter(|&(_, w)| w > 0.0)
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut masses: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut counts: Vec<usize> = Vec::with_capacity(pairs.len());
    for (v, w) in pairs {
        if support.last() == Some(&v) {
            *masses.last_mut().unwrap() += w;
            *counts.last_mut().unwrap() += 1;
        } else {
            support.push(v);
            masses.push(w);
            counts.push(1);
        }
    }
    if uniform {
        // k_j / N exactly, rather than a sum of k_j rounded copies of 1/N.
        for (m, &c) in masses.iter_mut().zip(&counts) {
            *m = c as f64 / n as f64;
        }
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        masses.iter_mut().for_each(|m| *m /= total);
    }

    let raw_size = uniform.then_some(n);
    let lattice = uniform && counts.iter().all(|&c| c == 1) && is_arithmetic(&support);
    Ok(Population { support, probs: masses, raw_size, lattice })
}

/// Successive gaps agree to `1e-9` relative (diagnostic only).
fn is_arithmetic(support: &[f64]) -> bool {
    if support.len() < 2 {
        return false;
    }
    let gap = support[1] - support[0];
    support
        .windows(2)
        .all(|w| ((w[1] - w[0]) - gap).abs() <= 1e-9 * gap.abs())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationFile {
    values: Vec<f64>,
    #[serde(default)]
    probs: Option<Vec<f64>>,
}

impl Population {
    /// Uniform law on `{1, ..., n}`.
    pub fn uniform_grid(n: usize) -> Result<Self> {
        let values: Vec<f64> = (1..=n).map(|x| x as f64).collect();
        make_population(&values, None)
    }

    /// `{1, ..., N}` where point `k` has mass `p[k-1]`.
    pub fn weighted_grid(p: &[f64]) -> Result<Self> {
        if p.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidProbabilities(
                "weighted grid needs strictly positive masses".into(),
            ));
        }
        let values: Vec<f64> = (1..=p.len()).map(|x| x as f64).collect();
        make_population(&values, Some(p))
    }

    /// Uniform lattice with mean `mu` and variance `sigma^2`:
    /// `x_k = mu + sigma sqrt(3) (2k - N - 1) / sqrt(N^2 - 1)`.
    pub fn lattice(mu: f64, sigma: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!("lattice needs N >= 2, got {n}")));
        }
        let nf = n as f64;
        let values: Vec<f64> = (1..=n)
            .map(|k| mu + sigma * 3f64.sqrt() * (2.0 * k as f64 - nf - 1.0) / (nf * nf - 1.0).sqrt())
            .collect();
        make_population(&values, None)
    }

    /// Parses `{"values": [...], "probs": [...]}` or one value per line.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let file: PopulationFile = serde_json::from_str(text)?;
            return make_population(&file.values, file.probs.as_deref());
        }
        let values = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad population value {l:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        make_population(&values, None)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of distinct support points.
    pub fn m(&self) -> usize {
        self.support.len()
    }

    /// Size `N` of the underlying list when the population is uniform.
    pub fn raw_size(&self) -> Option<usize> {
        self.raw_size
    }

    pub fn is_uniform(&self) -> bool {
        self.raw_size.is_some()
    }

    /// Uniform on `N` distinct, equally spaced points.
    pub fn is_lattice(&self) -> bool {
        self.lattice
    }

    pub fn is_degenerate(&self) -> bool {
        self.support.len() < 2
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * (x - mu) * (x - mu))
            .sum()
    }
}

/// How to obtain the joint pmf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JointMethod {
    /// Enumerate when within budget, else use the multinomial formula.
    #[default]
    Auto,
    /// Always enumerate; error when over budget.
    Enumerate,
    /// Always use the multinomial formula.
    Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointOptions {
    pub method: JointMethod,
    pub budget: u64,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self { method: JointMethod::Auto, budget: DEFAULT_ENUM_BUDGET }
    }
}

/// Exact joint law of `(X_{i:n}, X_{j:n})`.
///
/// `pmf[(a, b)] = Pr(X_{i:n} = y_a, X_{j:n} = y_b)`.
#[derive(Debug, Clone)]
pub struct OrderStatJoint {
    pub i: usize,
    pub j: usize,
    pub n: usize,
    pub x_support: Vec<f64>,
    pub y_support: Vec<f64>,
    pub pmf: DMatrix<f64>,
}

/// Joint pmf of `(X_{i:n}, X_{j:n})` with default options.
pub fn order_stat_joint(pop: &Population, i: usize, j: usize, n: usize) -> Result<OrderStatJoint> {
    order_stat_joint_with(pop, i, j, n, &JointOptions::default())
}

pub fn order_stat_joint_with(
    pop: &Population,
    i: usize,
    j: usize,
    n: usize,
    opts: &JointOptions,
) -> Result<OrderStatJoint> {
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidIndices { i, j, n });
    }
    let m = pop.m();
    let outcomes = u32::try_from(n).ok().and_then(|e| (m as u64).checked_pow(e));
    let within = outcomes.is_some_and(|o| o <= opts.budget);
    let pmf = match opts.method {
        JointMethod::Enumerate if !within => {
            return Err(Error::BudgetExceeded {
                outcomes: outcomes.map_or_else(|| format!("{m}^{n}"), |o| o.to_string()),
                budget: opts.budget,
            })
        }
        JointMethod::Enumerate => enumerate_joint(pop.probs(), i, j, n),
        JointMethod::Auto if within => enumerate_joint(pop.probs(), i, j, n),
        JointMethod::Auto | JointMethod::Formula => formula_joint(pop.probs(), i, j, n),
    };
    Ok(OrderStatJoint {
        i,
        j,
        n,
        x_support: pop.support().to_vec(),
        y_support: pop.support().to_vec(),
        pmf,
    })
}

fn enumerate_joint(p: &[f64], i: usize, j: usize, n: usize) -> DMatrix<f64> {
    let m = p.len();
    let mut pmf = DMatrix::zeros(m, m);
    let mut idx = vec![0usize; n];
    let mut sorted = vec![0usize; n];
    loop {
        sorted.copy_from_slice(&idx);
        sorted.sort_unstable();
        let w: f64 = idx.iter().map(|&a| p[a]).product();
        pmf[(sorted[i - 1], sorted[j - 1])] += w;

        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return pmf;
            }
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `C(n, k)` in floating point, exact while it fits in 53 bits.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for t in 0..k {
        c = c * (n - t) as f64 / (t + 1) as f64;
    }
    c.round()
}

/// Joint pmf from `G(s, t) = Pr(X_{i:n} <= y_s, X_{j:n} <= y_t)` by
/// two-dimensional differencing.
fn formula_joint(p: &[f64], i: usize, j: usize, n: usize) -> DMatrix<f64> {
    let m = p.len();
    // prefix[s] = Pr(X <= y_{s-1}) in 1-based terms; prefix[0] = 0.
    let mut prefix = vec![0.0; m + 1];
    for s in 0..m {
        prefix[s + 1] = prefix[s] + p[s];
    }
    let mut suffix = vec![0.0; m + 1];
    for s in (0..m).rev() {
        suffix[s] = suffix[s + 1] + p[s];
    }
    let binom: Vec<Vec<f64>> = (0..=n).map(|a| (0..=a).map(|b| binomial(a, b)).collect()).collect();

    // g[s][t] with s, t in 0..=m, zero when either index is 0.
    let mut g = vec![vec![0.0; m + 1]; m + 1];
    for s in 1..=m {
        for t in 1..=m {
            let (lo, hi) = (s.min(t), t);
            if s >= t {
                // X_{i:n} <= X_{j:n} <= y_t <= y_s
                g[s][t] = upper_count_prob(prefix[t], suffix[t], j, n, &binom);
                continue;
            }
            let f_lo = prefix[lo];
            let f_mid = prefix[hi] - prefix[lo];
            let f_hi = suffix[hi];
            let mut acc = 0.0;
            for c1 in i..=n {
                let c2_min = j.saturating_sub(c1);
                for c2 in c2_min..=n - c1 {
                    let c3 = n - c1 - c2;
                    acc += binom[n][c1]
                        * binom[n - c1][c2]
                        * f_lo.powi(c1 as i32)
                        * f_mid.powi(c2 as i32)
                        * f_hi.powi(c3 as i32);
                }
            }
            g[s][t] = acc;
        }
    }

    let mut pmf = DMatrix::zeros(m, m);
    for a in 1..=m {
        for b in a..=m {
            let v = g[a][b] - g[a - 1][b] - g[a][b - 1] + g[a - 1][b - 1];
            pmf[(a - 1, b - 1)] = v.max(0.0);
        }
    }
    pmf
}

/// `Pr(at least j of n draws fall at or below y_t)`.
fn upper_count_prob(below: f64, above: f64, j: usize, n: usize, binom: &[Vec<f64>]) -> f64 {
    (j..=n)
        .map(|c| binom[n][c] * below.powi(c as i32) * above.powi((n - c) as i32))
        .sum()
}

/// First and second moments of `(f(X), g(Y))` under a joint table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMoments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov: f64,
}

impl PairMoments {
    pub fn correlation(&self) -> Result<f64> {
        if !(self.var_x > 0.0 && self.var_y > 0.0) {
            return Err(Error::UndefinedCorrelation(format!(
                "degenerate marginal (var_x = {}, var_y = {})",
                self.var_x, self.var_y
            )));
        }
        Ok(self.cov / (self.var_x.sqrt() * self.var_y.sqrt()))
    }
}

impl OrderStatJoint {
    /// Pr(X_{i:n} = x_a).
    pub fn marginal_x(&self) -> Vec<f64> {
        self.pmf.row_iter().map(|r| r.sum()).collect()
    }

    /// Pr(X_{j:n} = y_b).
    pub fn marginal_y(&self) -> Vec<f64> {
        self.pmf.column_iter().map(|c| c.sum()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.pmf.sum()
    }

    /// Moments of `(f(X_{i:n}), g(X_{j:n}))`, with `f`, `g` given as values
    /// on the respective supports. Two-pass, so variances are never
    /// negative.
    pub fn pair_moments(&self, f: &[f64], g: &[f64]) -> Result<PairMoments> {
        if f.len() != self.x_support.len() {
            return Err(Error::DimensionMismatch { expected: self.x_support.len(), got: f.len() });
        }
        if g.len() != self.y_support.len() {
            return Err(Error::DimensionMismatch { expected: self.y_support.len(), got: g.len() });
        }
        let px = self.marginal_x();
        let py = self.marginal_y();
        let mean_x: f64 = px.iter().zip(f).map(|(p, v)| p * v).sum();
        let mean_y: f64 = py.iter().zip(g).map(|(p, v)| p * v).sum();
        let var_x = px.iter().zip(f).map(|(p, v)| p * (v - mean_x).powi(2)).sum();
        let var_y = py.iter().zip(g).map(|(p, v)| p * (v - mean_y).powi(2)).sum();
        let mut cov = 0.0;
        for a in 0..f.len() {
            for b in 0..g.len() {
                let w = self.pmf[(a, b)];
                if w != 0.0 {
                    cov += w * (f[a] - mean_x) * (g[b] - mean_y);
                }
            }
        }
        Ok(PairMoments { mean_x, mean_y, var_x, var_y, cov })
    }

    /// Moments of the order statistics themselves.
    pub fn moments(&self) -> PairMoments {
        self.pair_moments(&self.x_support, &self.y_support)
            .expect("supports have matching lengths")
    }

    /// Same transform applied to both order statistics.
    pub fn same_transform_moments(&self, g: &[f64]) -> Result<PairMoments> {
        self.pair_moments(g, g)
    }
}

/// Pearson correlation of `(X_{i:n}, X_{j:n})`.
pub fn rho_order_stats(pop: &Population, i: usize, j: usize, n: usize) -> Result<f64> {
    rho_order_stats_with(pop, i, j, n, &JointOptions::default())
}

pub fn rho_order_stats_with(
    pop: &Population,
    i: usize,
    j: usize,
    n: usize,
    opts: &JointOptions,
) -> Result<f64> {
    if pop.is_degenerate() {
        return Err(Error::UndefinedCorrelation("degenerate population".into()));
    }
    order_stat_joint_with(pop, i, j, n, opts)?.moments().correlation()
}

/// A function tabulated on an arbitrary finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFunction {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

/// `h(y) = E[g(X_{i:n}) | X_{j:n} = y]` for every `y` of positive mass.
pub fn conditional_expectation(joint: &OrderStatJoint, g: &[f64]) -> Result<SupportFunction> {
    if g.len() != joint.x_support.len() {
        return Err(Error::DimensionMismatch { expected: joint.x_support.len(), got: g.len() });
    }
    let py = joint.marginal_y();
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (b, &mass) in py.iter().enumerate() {
        if mass <= 0.0 {
            continue;
        }
        let s: f64 = (0..g.len()).map(|a| joint.pmf[(a, b)] * g[a]).sum();
        points.push(joint.y_support[b]);
        values.push(s / mass);
    }
    Ok(SupportFunction { points, values })
}
