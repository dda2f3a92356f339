//! Truncated power series and Laurent series over exact rationals.
//!
//! A [`Series`] knows its coefficients for `q^0 ..= q^N` and nothing beyond.
//! Binary operations keep the smaller of the two truncation orders, and
//! asking for a coefficient past `N` is an error rather than a silent zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// `sum_{k=0}^{N} c_k q^k + O(q^{N+1})`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Series {
    order: usize,
    coefficients: Vec<Rational>,
}

impl Series {
    /// Builds a series from its coefficients; the truncation order is
    /// `coefficients.len() - 1`.
    pub fn new(coefficients: Vec<Rational>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Domain("a series needs at least one coefficient".into()));
        }
        Ok(Series { order: coefficients.len() - 1, coefficients })
    }

    /// Builds a series of the given order, padding with zeros or truncating.
    pub fn from_coefficients(mut coefficients: Vec<Rational>, order: usize) -> Self {
        coefficients.resize(order + 1, Rational::zero());
        Series { order, coefficients }
    }

    pub fn zero(order: usize) -> Self {
        Series::from_coefficients(Vec::new(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        Series::from_coefficients(vec![c], order)
    }

    pub fn one(order: usize) -> Self {
        Series::constant(Rational::one(), order)
    }

    /// The series `c q^k`.
    pub fn monomial(k: usize, c: Rational, order: usize) -> Self {
        let mut s = Series::zero(order);
        if k <= order {
            s.coefficients[k] = c;
        }
        s
    }

    /// The variable `q` itself.
    pub fn variable(order: usize) -> Self {
        Series::monomial(1, Rational::one(), order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn coeff(&self, k: usize) -> Result<&Rational> {
        self.coefficients.get(k).ok_or(Error::Truncated {
            requested: k as i64,
            order: self.order as i64,
        })
    }

    /// Overwrites one known coefficient.
    pub fn set_coeff(&mut self, k: usize, value: Rational) -> Result<()> {
        let order = self.order;
        let slot = self.coefficients.get_mut(k).ok_or(Error::Truncated {
            requested: k as i64,
            order: order as i64,
        })?;
        *slot = value;
        Ok(())
    }

    /// Drops coefficients above `order`; never raises the order.
    pub fn truncate(&self, order: usize) -> Series {
        let order = order.min(self.order);
        Series { order, coefficients: self.coefficients[..=order].to_vec() }
    }

    pub fn scale(&self, c: &Rational) -> Series {
        Series {
            order: self.order,
            coefficients: self.coefficients.iter().map(|x| x * c).collect(),
        }
    }

    /// `c_k -> f(k, c_k)`, useful for sign substitutions `q -> -q`.
    pub fn map_coefficients(&self, mut f: impl FnMut(usize, &Rational) -> Rational) -> Series {
        Series {
            order: self.order,
            coefficients: self.coefficients.iter().enumerate().map(|(k, c)| f(k, c)).collect(),
        }
    }

    pub fn derivative(&self) -> Series {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * Rational::from(k))
            .collect();
        // the derivative loses one order of precision
        Series::from_coefficients(coefficients, self.order.saturating_sub(1))
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Series> {
        let inv0 = self.coefficients[0].recip().ok_or_else(|| {
            Error::Domain("reciprocal of a series with constant term 0".into())
        })?;
        let mut out = vec![inv0.clone()];
        for n in 1..=self.order {
            let acc: Rational = (1..=n).map(|k| &self.coefficients[k] * &out[n - k]).sum();
            out.push(-(acc * &inv0));
        }
        Ok(Series { order: self.order, coefficients: out })
    }

    pub fn exp(&self) -> Result<Series> {
        if !self.coefficients[0].is_zero() {
            return Err(Error::Domain(format!(
                "exp needs constant term 0, found {}",
                self.coefficients[0]
            )));
        }
        // n b_n = sum_{k=1}^n k a_k b_{n-k}
        let mut out = vec![Rational::one()];
        for n in 1..=self.order {
            let acc: Rational = (1..=n)
                .map(|k| Rational::from(k) * &self.coefficients[k] * &out[n - k])
                .sum();
            out.push(acc / Rational::from(n));
        }
        Ok(Series { order: self.order, coefficients: out })
    }

    pub fn log(&self) -> Result<Series> {
        if !self.coefficients[0].is_one() {
            return Err(Error::Domain(format!(
                "log needs constant term 1, found {}",
                self.coefficients[0]
            )));
        }
        // n c_n = n a_n - sum_{k=1}^{n-1} k c_k a_{n-k}
        let mut out = vec![Rational::zero()];
        for n in 1..=self.order {
            let acc: Rational = (1..n)
                .map(|k| Rational::from(k) * &out[k] * &self.coefficients[n - k])
                .sum();
            out.push(&self.coefficients[n] - acc / Rational::from(n));
        }
        Ok(Series { order: self.order, coefficients: out })
    }

    pub fn pow(&self, n: u32) -> Series {
        (0..n).fold(Series::one(self.order), |acc, _| &acc * self)
    }

    /// `self(inner(q))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Series) -> Result<Series> {
        if !inner.coefficients[0].is_zero() {
            return Err(Error::Domain(format!(
                "composition needs an inner series with constant term 0, found {}",
                inner.coefficients[0]
            )));
        }
        let order = self.order.min(inner.order);
        let inner = inner.truncate(order);
        let mut acc = Series::zero(order);
        for c in self.coefficients[..=order].iter().rev() {
            acc = &acc * &inner;
            acc.coefficients[0] += c;
        }
        Ok(acc)
    }

    /// Compositional inverse: returns `g` with `f(g(Q)) = Q`.
    ///
    /// Newton iteration `g <- g - (f(g) - Q) / f'(g)`, which doubles the
    /// number of correct coefficients per step.
    pub fn reversion(&self) -> Result<Series> {
        if !self.coefficients[0].is_zero() {
            return Err(Error::Domain(format!(
                "reversion needs constant term 0, found {}",
                self.coefficients[0]
            )));
        }
        let linear = self.coeff(1).map_err(|_| {
            Error::Domain("reversion needs truncation order at least 1".into())
        })?;
        let inv_linear = linear
            .recip()
            .ok_or_else(|| Error::Domain("reversion needs a nonzero linear coefficient".into()))?;
        let order = self.order;
        let q = Series::variable(order);
        let df = self.derivative();
        let mut g = q.scale(&inv_linear);
        let mut correct = 1usize;
        while correct < order {
            let residual = &self.compose(&g)? - &q;
            let slope = Series::from_coefficients(df.compose(&g)?.coefficients, order);
            let step = &residual * &slope.reciprocal()?;
            g = &g - &step;
            correct *= 2;
        }
        Ok(g)
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*q")?,
                _ => write!(f, "({c})*q^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.order + 1)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let order = self.order.min(rhs.order);
        let coefficients = (0..=order)
            .map(|k| &self.coefficients[k] + &rhs.coefficients[k])
            .collect();
        Series { order, coefficients }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let order = self.order.min(rhs.order);
        let coefficients = (0..=order)
            .map(|k| &self.coefficients[k] - &rhs.coefficients[k])
            .collect();
        Series { order, coefficients }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let order = self.order.min(rhs.order);
        let mut coefficients = vec![Rational::zero(); order + 1];
        for (i, a) in self.coefficients[..=order].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coefficients[..=order - i].iter().enumerate() {
                coefficients[i + j] += a * b;
            }
        }
        Series { order, coefficients }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(&Rational::from(-1))
    }
}

/// `sum_{k=v}^{v+N} c_k z^k + O(z^{v+N+1})` with a possibly negative
/// valuation `v`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct LaurentSeries {
    valuation: i64,
    /// highest exponent whose coefficient is known
    order: i64,
    coefficients: Vec<Rational>,
}

impl LaurentSeries {
    /// Coefficients for `z^valuation ..`; leading zeros are stripped and the
    /// valuation adjusted. The known range ends at `z^order`.
    pub fn new(valuation: i64, coefficients: Vec<Rational>, order: i64) -> Self {
        let mut out = LaurentSeries { valuation, order, coefficients };
        let keep = (order - valuation + 1).max(0) as usize;
        out.coefficients.resize(keep, Rational::zero());
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        let lead = self.coefficients.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coefficients.len() {
            self.coefficients.clear();
            self.valuation = self.order + 1;
        } else if lead > 0 {
            self.coefficients.drain(..lead);
            self.valuation += lead as i64;
        }
    }

    pub fn from_series(s: &Series, shift: i64) -> Self {
        LaurentSeries::new(shift, s.coefficients.clone(), shift + s.order as i64)
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Result<Rational> {
        if k > self.order {
            return Err(Error::Truncated { requested: k, order: self.order });
        }
        if k < self.valuation {
            return Ok(Rational::zero());
        }
        Ok(self.coefficients[(k - self.valuation) as usize].clone())
    }

    pub fn reciprocal(&self) -> Result<LaurentSeries> {
        if self.is_zero() {
            return Err(Error::Domain("reciprocal of a zero Laurent series".into()));
        }
        let width = (self.order - self.valuation) as usize;
        let unit = Series::from_coefficients(self.coefficients.clone(), width).reciprocal()?;
        Ok(LaurentSeries::new(-self.valuation, unit.coefficients, width as i64 - self.valuation))
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        let order = (self.order + rhs.valuation).min(rhs.order + self.valuation);
        let valuation = self.valuation + rhs.valuation;
        let len = (order - valuation + 1).max(0) as usize;
        let mut coefficients = vec![Rational::zero(); len];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in rhs.coefficients.iter().enumerate() {
                if i + j < len {
                    coefficients[i + j] += a * b;
                }
            }
        }
        LaurentSeries::new(valuation, coefficients, order)
    }
}

/// Exact expansion of `2 sinh(z/2)` known through `z^order`.
pub fn two_sinh_half(order: i64) -> LaurentSeries {
    let mut coefficients = Vec::new();
    let mut factorial = Rational::one();
    for k in 1..=order.max(1) {
        factorial = factorial * Rational::from(k);
        let c = if k % 2 == 1 {
            Rational::from(2) * Rational::frac(1, 2).pow(k as i32) / &factorial
        } else {
            Rational::zero()
        };
        coefficients.push(c);
    }
    LaurentSeries::new(1, coefficients, order.max(1))
}

/// Laurent expansion of `1 / (2 sinh(z/2))`, the regularized value of
/// `sum_{i>=1} e^{-z(i - 1/2)}`, known through `z^order`.
pub fn regularized_half_shift_series(order: usize) -> Result<LaurentSeries> {
    if order < 1 {
        return Err(Error::Domain("regularized series needs order >= 1".into()));
    }
    two_sinh_half(order as i64 + 2).reciprocal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    fn series(cs: &[i64], order: usize) -> Series {
        Series::from_coefficients(cs.iter().map(|&c| r(c)).collect(), order)
    }

    #[test]
    fn exp_log_inverse_pair() {
        let one_plus_q = series(&[1, 1], 10);
        let back = one_plus_q.log().unwrap().exp().unwrap();
        assert_eq!(back, one_plus_q);
        assert_eq!(Series::zero(6).exp().unwrap(), Series::one(6));
    }

    #[test]
    fn exp_is_a_homomorphism() {
        let a = series(&[0, -2], 8).exp().unwrap();
        let b = series(&[0, 2], 8).exp().unwrap();
        assert_eq!(&a * &b, Series::one(8));
    }

    #[test]
    fn domain_errors_name_constant_term() {
        let err = series(&[3, 1], 4).exp().unwrap_err();
        assert!(err.to_string().contains('3'), "{err}");
        assert!(series(&[2], 4).log().is_err());
        assert!(series(&[0, 0, 1], 4).reversion().is_err());
        assert!(series(&[1, 1], 4).reversion().is_err());
    }

    #[test]
    fn truncation_is_explicit() {
        let a = series(&[1, 2, 3], 2);
        assert!(matches!(a.coeff(3), Err(Error::Truncated { requested: 3, order: 2 })));
        let b = series(&[1], 5);
        assert_eq!((&a * &b).order(), 2);
        assert_eq!((&a + &b).order(), 2);
    }

    #[test]
    fn reversion_of_identity_and_quadratic() {
        let q = Series::variable(7);
        assert_eq!(q.reversion().unwrap(), q);
        // f = q - 6 q^2: g = sum C_{n-1} 6^{n-1} Q^n (Catalan numbers)
        let f = series(&[0, 1, -6], 7);
        let g = f.reversion().unwrap();
        let catalan = [1i64, 1, 2, 5, 14, 42, 132];
        for n in 1..=7usize {
            let expected = r(catalan[n - 1]) * r(6).pow(n as i32 - 1);
            assert_eq!(g.coeff(n).unwrap(), &expected, "n={n}");
        }
        assert_eq!(g.coeff(3).unwrap(), &r(72));
        assert_eq!(f.compose(&g).unwrap(), q);
        assert_eq!(g.compose(&f).unwrap(), q);
    }

    #[test]
    fn regularized_series_coefficients() {
        let s = regularized_half_shift_series(8).unwrap();
        assert_eq!(s.valuation(), -1);
        assert_eq!(s.coeff(-1).unwrap(), r(1));
        assert_eq!(s.coeff(1).unwrap(), Rational::frac(-1, 24));
        assert_eq!(s.coeff(3).unwrap(), Rational::frac(7, 5760));
        for k in 0..=4 {
            assert!(s.coeff(2 * k).unwrap().is_zero());
        }
        assert!(s.coeff(9).is_err());
    }

    #[test]
    fn regularized_series_inverts_two_sinh() {
        for n in 1..=12usize {
            let s = regularized_half_shift_series(n).unwrap();
            let prod = &s * &two_sinh_half(n as i64 + 2);
            assert!(prod.order() >= n as i64);
            assert_eq!(prod.coeff(0).unwrap(), r(1));
            for k in 1..=n as i64 {
                assert!(prod.coeff(k).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn serializes_with_order_field() {
        let s = Series::from_coefficients(vec![r(0), Rational::frac(-45, 8)], 1);
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["order"], 1);
        assert_eq!(json["coefficients"][1], "-45/8");
        let back: Series = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }

    fn small_series(order: usize) -> impl Strategy<Value = Series> {
        proptest::collection::vec(-5i64..=5, order + 1)
            .prop_map(move |cs| series(&cs, order))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ring_laws(f in small_series(12), g in small_series(12), h in small_series(12)) {
            prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
            prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
            prop_assert_eq!(&f * &g, &g * &f);
        }

        #[test]
        fn reversion_round_trip(tail in proptest::collection::vec(-4i64..=4, 8), lin in 1i64..=3, sign in prop::bool::ANY) {
            let lin = if sign { lin } else { -lin };
            let mut cs = vec![0, lin];
            cs.extend(tail);
            let f = series(&cs, 9);
            let g = f.reversion().unwrap();
            let q = Series::variable(9);
            prop_assert_eq!(f.compose(&g).unwrap(), q.clone());
            prop_assert_eq!(g.compose(&f).unwrap(), q);
            prop_assert_eq!(g.reversion().unwrap(), f);
        }
    }
}
