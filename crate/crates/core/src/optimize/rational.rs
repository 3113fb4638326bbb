//! Bound for populations whose masses are rational: writing `p_k = c_k/M`
//! in lowest terms reduces to the uniform population on `M` points.

use num::integer::Integer;
use num::rational::Ratio;
use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalBound {
    /// Common denominator `M`.
    pub m: u64,
    /// `(M^2 - 1)/(2M^2 + 1)`.
    #[serde(skip)]
    pub bound: Ratio<i128>,
}

impl RationalBound {
    pub fn value(&self) -> f64 {
        *self.bound.numer() as f64 / *self.bound.denom() as f64
    }
}

/// Parses `"a/b"`, an integer, or a plain decimal such as `"0.0625"`.
pub fn parse_rational(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    if s.contains('/') {
        let r: Ratio<i64> = s.parse().map_err(|_| bad())?;
        return Ok(r);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let denom = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let r = Ratio::new(numer, denom);
    Ok(if neg { -r } else { r })
}

pub fn rational_p_reduction_bound(p: &[Ratio<i64>]) -> Result<RationalBound> {
    if p.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = p.iter().find(|q| **q <= Ratio::zero()) {
        return Err(Error::InvalidProbabilities(format!("mass {bad} is not positive")));
    }
    let total = p.iter().fold(Ratio::<i64>::zero(), |a, q| a + q);
    if !total.is_one() {
        return Err(Error::InvalidProbabilities(format!("masses sum to {total}, not 1")));
    }
    let m = p.iter().fold(1i64, |acc, q| acc.lcm(q.denom()));
    let mm = (m as i128)
        .checked_mul(m as i128)
        .ok_or_else(|| Error::Domain(format!("common denominator {m} too large")))?;
    Ok(RationalBound { m: m as u64, bound: Ratio::new(mm - 1, 2 * mm + 1) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(v: &[&str]) -> Vec<Ratio<i64>> {
        v.iter().map(|s| parse_rational(s).unwrap()).collect()
    }

    #[test]
    fn examples() {
        let b = rational_p_reduction_bound(&ps(&["1/4", "1/2", "1/4"])).unwrap();
        assert_eq!((b.m, b.bound), (4, Ratio::new(5, 11)));
        let b = rational_p_reduction_bound(&ps(&["1/16", "3/8", "9/16"])).unwrap();
        assert_eq!((b.m, b.bound), (16, Ratio::new(85, 171)));
        let b = rational_p_reduction_bound(&ps(&["0.25", "0.5", "0.25"])).unwrap();
        assert_eq!(b.bound, Ratio::new(5, 11));
    }

    #[test]
    fn uniform_reduces_to_grid_bound() {
        for n in 2..30i64 {
            let p = vec![Ratio::new(1, n); n as usize];
            let b = rational_p_reduction_bound(&p).unwrap();
            let exact = crate::bounds::terrell_discrete_bound_exact(n as usize).unwrap();
            assert_eq!(*b.bound.numer() as u128 * *exact.denom(), *exact.numer() * *b.bound.denom() as u128);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_rational("0.3x").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(parse_rational("-1.5").unwrap(), Ratio::new(-3, 2));
        assert!(rational_p_reduction_bound(&ps(&["1/3", "1/3"])).is_err());
        assert!(rational_p_reduction_bound(&ps(&["1/2", "0", "1/2"])).is_err());
    }
}
