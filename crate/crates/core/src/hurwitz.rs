//! Disconnected Hurwitz numbers with completed cycles for a curve target.
//!
//! For a target curve of genus `g`, the bracket with naive tangencies of
//! orders `k_1, ..., k_n` at points of the target equals
//!
//! ```text
//! sum_{|lambda| = d} (dim lambda / d!)^{2 - 2g} prod_i p_{k_i}(lambda) / k_i
//! ```
//!
//! where `p_k` is the shifted symmetric power sum, the `z^k` coefficient
//! (times `k!`) of the regularized sum `sum_{i >= 1} e^{z (lambda_i - i + 1/2)}`.
//! The sum index starts at `i = 1`; the tail `sum_{i>=1} e^{z(-i + 1/2)}` is
//! interpreted as `1 / (2 sinh(z/2))`.

use serde::Serialize;

use crate::combinatorics::{binomial, dimension, factorial, partitions_of, Partition};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::series::regularized_half_shift_series;

/// Largest symmetric group the brute-force oracle will walk.
pub const ORACLE_MAX_DEGREE: usize = 6;
/// Largest number of transposition tuples the oracle will check.
pub const ORACLE_MAX_TUPLES: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HurwitzSpec {
    pub target_genus: usize,
    pub degree: usize,
    pub orders: Vec<usize>,
}

impl HurwitzSpec {
    pub fn new(target_genus: usize, degree: usize, orders: Vec<usize>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Domain("Hurwitz degree must be at least 1".into()));
        }
        if orders.contains(&0) {
            return Err(Error::Domain("tangency orders must be positive".into()));
        }
        Ok(HurwitzSpec { target_genus, degree, orders })
    }
}

/// `p_k(lambda) = k! [z^k] ( sum_i (e^{z(lambda_i - i + 1/2)} - e^{z(-i + 1/2)})
/// + 1/(2 sinh(z/2)) )`.
pub fn shifted_power_sum(k: usize, lambda: &Partition) -> Result<Rational> {
    shifted_power_sum_with_order(k, lambda, k.max(1))
}

/// As [`shifted_power_sum`], with the regularizer expanded through `z^order`.
pub fn shifted_power_sum_with_order(k: usize, lambda: &Partition, order: usize) -> Result<Rational> {
    if order < k.max(1) {
        return Err(Error::Domain(format!(
            "regularizer order {order} is below the requested power {k}"
        )));
    }
    let half = Rational::frac(1, 2);
    let mut finite = Rational::zero();
    for (i, &part) in lambda.parts().iter().enumerate() {
        let row = Rational::from(i as i64 + 1);
        let shifted = Rational::from(part) - &row + &half;
        let empty = &half - &row;
        finite += shifted.pow(k as i32) - empty.pow(k as i32);
    }
    let regular = regularized_half_shift_series(order)?.coeff(k as i64)?;
    Ok(finite + Rational::from(factorial(k)) * regular)
}

/// One partition's contribution to [`completed_cycle_hurwitz`].
#[derive(Clone, Debug, Serialize)]
pub struct HurwitzSummand {
    pub partition: Partition,
    pub dimension: Rational,
    pub value: Rational,
}

/// Sum over partitions of `d` of `(dim / d!)^{2-2g} prod_i p_{k_i} / k_i`.
pub fn completed_cycle_hurwitz(spec: &HurwitzSpec) -> Result<Rational> {
    Ok(completed_cycle_hurwitz_summands(spec)?.into_iter().map(|s| s.value).sum())
}

/// Per-partition breakdown, in reverse-lexicographic partition order.
pub fn completed_cycle_hurwitz_summands(spec: &HurwitzSpec) -> Result<Vec<HurwitzSummand>> {
    let d_fact = Rational::from(factorial(spec.degree));
    let exponent = 2 - 2 * spec.target_genus as i32;
    partitions_of(spec.degree)
        .into_iter()
        .map(|lambda| {
            let dim = Rational::from(dimension(&lambda));
            let mut value = (&dim / &d_fact).pow(exponent);
            for &k in &spec.orders {
                value = value * shifted_power_sum(k, &lambda)? / Rational::from(k);
            }
            Ok(HurwitzSummand { partition: lambda, dimension: dim, value })
        })
        .collect()
}

/// `#{(t_1, ..., t_n) transpositions in S_d : t_1 ... t_n = id} / d!`,
/// by enumerating every tuple.
pub fn transposition_factorization_count(d: usize, n: usize) -> Result<Rational> {
    if d == 0 {
        return Err(Error::Domain("symmetric group degree must be at least 1".into()));
    }
    if d > ORACLE_MAX_DEGREE {
        return Err(Error::ResourceGuard(format!(
            "factorization oracle is limited to d <= {ORACLE_MAX_DEGREE}, got {d}"
        )));
    }
    let transpositions: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| (a + 1..d).map(move |b| (a, b)))
        .collect();
    let t = transpositions.len() as u64;
    let tuples = t.checked_pow(n as u32).filter(|&c| c <= ORACLE_MAX_TUPLES);
    if tuples.is_none() {
        return Err(Error::ResourceGuard(format!(
            "factorization oracle would check {t}^{n} tuples, limit is {ORACLE_MAX_TUPLES}"
        )));
    }
    debug_assert_eq!(binomial(d, 2), t.into());
    if t == 0 && n > 0 {
        return Ok(Rational::zero());
    }

    let mut hits = 0u64;
    let mut choice = vec![0usize; n];
    loop {
        let mut perm: Vec<usize> = (0..d).collect();
        for &c in &choice {
            let (a, b) = transpositions[c];
            perm.swap(a, b);
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            hits += 1;
        }
        let mut idx = 0;
        while idx < n && choice[idx] + 1 == transpositions.len() {
            choice[idx] = 0;
            idx += 1;
        }
        if idx == n {
            break;
        }
        choice[idx] += 1;
    }
    Ok(Rational::from(hits) / Rational::from(factorial(d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn power_sum_examples() {
        assert_eq!(shifted_power_sum(2, &p(&[2])).unwrap(), Rational::from(2));
        assert_eq!(shifted_power_sum(2, &p(&[1, 1])).unwrap(), Rational::from(-2));
        assert_eq!(shifted_power_sum(1, &p(&[1])).unwrap(), Rational::frac(23, 24));
        for d in 0..=4 {
            for lambda in partitions_of(d) {
                assert!(shifted_power_sum(0, &lambda).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn p1_is_size_minus_one_twenty_fourth() {
        for d in 0..=6 {
            for lambda in partitions_of(d) {
                let expected = Rational::from(d) - Rational::frac(1, 24);
                assert_eq!(shifted_power_sum(1, &lambda).unwrap(), expected);
            }
        }
    }

    #[test]
    fn truncation_insensitive() {
        for lambda in partitions_of(5) {
            for k in 0..=6 {
                let base = shifted_power_sum_with_order(k, &lambda, k.max(1)).unwrap();
                let longer = shifted_power_sum_with_order(k, &lambda, k.max(1) + 4).unwrap();
                assert_eq!(base, longer);
            }
        }
    }

    #[test]
    fn hurwitz_examples() {
        let h = |g, d, orders: &[usize]| {
            completed_cycle_hurwitz(&HurwitzSpec::new(g, d, orders.to_vec()).unwrap()).unwrap()
        };
        assert_eq!(h(0, 1, &[]), Rational::one());
        assert_eq!(h(1, 2, &[]), Rational::from(2));
        assert_eq!(h(0, 2, &[2, 2]), Rational::frac(1, 2));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(transposition_factorization_count(2, 2).unwrap(), Rational::frac(1, 2));
        assert_eq!(transposition_factorization_count(2, 1).unwrap(), Rational::zero());
        assert_eq!(transposition_factorization_count(3, 2).unwrap(), Rational::frac(1, 2));
        assert_eq!(transposition_factorization_count(3, 0).unwrap(), Rational::frac(1, 6));
        assert_eq!(transposition_factorization_count(1, 2).unwrap(), Rational::zero());
        assert!(matches!(
            transposition_factorization_count(7, 2),
            Err(Error::ResourceGuard(_))
        ));
        assert!(matches!(
            transposition_factorization_count(6, 8),
            Err(Error::ResourceGuard(_))
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(HurwitzSpec::new(0, 0, vec![]).is_err());
        assert!(HurwitzSpec::new(0, 2, vec![0]).is_err());
    }
}
