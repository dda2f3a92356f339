//! The cohomology ring `Q[H]/(H^3)` of the projective plane.
//!
//! Grading is by complex codimension: `1`, `H`, `H^2` sit in degrees 0, 1, 2.
//! [`SurfaceClass`] is the concrete P² element type; [`RingTable`] describes
//! a surface ring by its basis, structure constants and integration functional
//! so that the diagonal (Künneth) decomposition used by the recursion can be
//! derived rather than hard-coded.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// `c0 + c1 H + c2 H^2` in `A^*(P^2)`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "[Rational; 3]", into = "[Rational; 3]")]
pub struct SurfaceClass {
    c: [Rational; 3],
}

impl SurfaceClass {
    pub fn new(c0: Rational, c1: Rational, c2: Rational) -> Self {
        SurfaceClass { c: [c0, c1, c2] }
    }

    pub fn zero() -> Self {
        SurfaceClass::default()
    }

    pub fn one() -> Self {
        SurfaceClass::monomial(0, Rational::one())
    }

    /// The hyperplane class.
    pub fn h() -> Self {
        SurfaceClass::monomial(1, Rational::one())
    }

    /// The point class `H^2`.
    pub fn point() -> Self {
        SurfaceClass::monomial(2, Rational::one())
    }

    /// `coeff * H^codim`; zero when `codim > 2`.
    pub fn monomial(codim: usize, coeff: Rational) -> Self {
        let mut out = SurfaceClass::zero();
        if codim <= 2 {
            out.c[codim] = coeff;
        }
        out
    }

    pub fn coeff(&self, codim: usize) -> &Rational {
        &self.c[codim]
    }

    pub fn coefficients(&self) -> &[Rational; 3] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Rational::is_zero)
    }

    /// Nonzero homogeneous pieces as `(codim, coefficient)`.
    pub fn homogeneous_parts(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.c.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    /// The codimension if the class is a nonzero multiple of a single `H^k`.
    pub fn pure_codim(&self) -> Option<usize> {
        let mut parts = self.homogeneous_parts();
        match (parts.next(), parts.next()) {
            (Some((k, _)), None) => Some(k),
            _ => None,
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        SurfaceClass { c: [&self.c[0] * s, &self.c[1] * s, &self.c[2] * s] }
    }

    /// Multiplication by `H^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut out = SurfaceClass::zero();
        for (codim, c) in self.homogeneous_parts() {
            if codim + k <= 2 {
                out.c[codim + k] = c.clone();
            }
        }
        out
    }

    /// `∫_{P^2}`: the coefficient of `H^2`.
    pub fn integrate(&self) -> Rational {
        self.c[2].clone()
    }
}

pub fn class_mul(a: &SurfaceClass, b: &SurfaceClass) -> SurfaceClass {
    a * b
}

pub fn integrate(a: &SurfaceClass) -> Rational {
    a.integrate()
}

/// Diagonal pairs `(T_mu, T^mu)` for the Poincaré pairing on `(1, H, H^2)`.
pub fn pairing_inverse_basis() -> Vec<(SurfaceClass, SurfaceClass)> {
    RingTable::projective_plane()
        .dual_basis()
        .expect("the P^2 pairing is nondegenerate")
        .into_iter()
        .map(|(i, dual)| {
            let t = SurfaceClass::monomial(i, Rational::one());
            let dual = SurfaceClass::new(dual[0].clone(), dual[1].clone(), dual[2].clone());
            (t, dual)
        })
        .collect()
}

impl From<[Rational; 3]> for SurfaceClass {
    fn from(c: [Rational; 3]) -> Self {
        SurfaceClass { c }
    }
}

impl From<SurfaceClass> for [Rational; 3] {
    fn from(s: SurfaceClass) -> Self {
        s.c
    }
}

impl Add for &SurfaceClass {
    type Output = SurfaceClass;
    fn add(self, rhs: &SurfaceClass) -> SurfaceClass {
        SurfaceClass {
            c: [&self.c[0] + &rhs.c[0], &self.c[1] + &rhs.c[1], &self.c[2] + &rhs.c[2]],
        }
    }
}

impl Sub for &SurfaceClass {
    type Output = SurfaceClass;
    fn sub(self, rhs: &SurfaceClass) -> SurfaceClass {
        SurfaceClass {
            c: [&self.c[0] - &rhs.c[0], &self.c[1] - &rhs.c[1], &self.c[2] - &rhs.c[2]],
        }
    }
}

impl Neg for &SurfaceClass {
    type Output = SurfaceClass;
    fn neg(self) -> SurfaceClass {
        self.scale(&Rational::from(-1))
    }
}

impl Mul for &SurfaceClass {
    type Output = SurfaceClass;
    fn mul(self, rhs: &SurfaceClass) -> SurfaceClass {
        let [a0, a1, a2] = &self.c;
        let [b0, b1, b2] = &rhs.c;
        SurfaceClass {
            c: [a0 * b0, a0 * b1 + a1 * b0, a0 * b2 + a1 * b1 + a2 * b0],
        }
    }
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*H + {}*H^2", self.c[0], self.c[1], self.c[2])
    }
}

impl fmt::Debug for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for SurfaceClass {
    type Err = Error;

    /// Accepts sums of terms like `3`, `-1/2*H`, `H^2`, `2*H^1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("class {s:?}: {why}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        // split on + and - that are not at the start of a term
        let mut terms = Vec::new();
        let mut current = String::new();
        for ch in compact.chars() {
            let after_operator = current.is_empty() || current.ends_with(['*', '/', '+', '-']);
            if (ch == '+' || ch == '-') && !after_operator {
                terms.push(std::mem::take(&mut current));
            }
            current.push(ch);
        }
        terms.push(current);
        let mut out = SurfaceClass::zero();
        for term in terms {
            let term = term.strip_prefix('+').unwrap_or(&term);
            let (negative, term) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term),
            };
            let (coeff, codim) = match term.find('H') {
                None => (term.parse::<Rational>()?, 0usize),
                Some(pos) => {
                    let prefix = &term[..pos];
                    let coeff = if prefix.is_empty() {
                        Rational::one()
                    } else {
                        prefix
                            .strip_suffix('*')
                            .ok_or_else(|| bad("expected '*' before H"))?
                            .parse::<Rational>()?
                    };
                    let rest = &term[pos + 1..];
                    let codim = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .ok_or_else(|| bad("expected '^' after H"))?
                            .parse::<usize>()
                            .map_err(|_| bad("bad exponent"))?
                    };
                    (coeff, codim)
                }
            };
            let coeff = if negative { -coeff } else { coeff };
            out = &out + &SurfaceClass::monomial(codim, coeff);
        }
        Ok(out)
    }
}

/// A graded surface cohomology ring given by structure constants.
///
/// `mult[i][j]` holds the coordinates of `e_i * e_j` in the basis, and
/// `integral[i]` is `∫ e_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingTable {
    pub codims: Vec<usize>,
    pub mult: Vec<Vec<Vec<Rational>>>,
    pub integral: Vec<Rational>,
}

impl RingTable {
    pub fn projective_plane() -> Self {
        let rank = 3;
        let mut mult = vec![vec![vec![Rational::zero(); rank]; rank]; rank];
        for i in 0..rank {
            for j in 0..rank {
                if i + j < rank {
                    mult[i][j][i + j] = Rational::one();
                }
            }
        }
        let mut integral = vec![Rational::zero(); rank];
        integral[2] = Rational::one();
        RingTable { codims: vec![0, 1, 2], mult, integral }
    }

    pub fn rank(&self) -> usize {
        self.codims.len()
    }

    pub fn multiply(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.rank()];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                let xy = x * y;
                for (k, c) in self.mult[i][j].iter().enumerate() {
                    out[k] += &xy * c;
                }
            }
        }
        out
    }

    pub fn integrate(&self, a: &[Rational]) -> Rational {
        a.iter().zip(&self.integral).map(|(x, w)| x * w).sum()
    }

    /// Gram matrix `g_ij = ∫ e_i e_j`.
    pub fn pairing_matrix(&self) -> Vec<Vec<Rational>> {
        (0..self.rank())
            .map(|i| {
                (0..self.rank())
                    .map(|j| self.integral.iter().zip(&self.mult[i][j]).map(|(w, c)| w * c).sum())
                    .collect()
            })
            .collect()
    }

    /// For each basis index `i`, the dual vector `e^i = sum_j (g^{-1})_{ij} e_j`.
    pub fn dual_basis(&self) -> Result<Vec<(usize, Vec<Rational>)>> {
        let n = self.rank();
        let g = self.pairing_matrix();
        // Gauss-Jordan on [g | I]
        let mut aug: Vec<Vec<Rational>> = g
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !aug[r][col].is_zero())
                .ok_or_else(|| Error::Domain("degenerate intersection pairing".into()))?;
            aug.swap(col, pivot);
            let inv = aug[col][col].recip().unwrap();
            for x in aug[col].iter_mut() {
                *x *= &inv;
            }
            for r in 0..n {
                if r != col && !aug[r][col].is_zero() {
                    let factor = aug[r][col].clone();
                    let pivot_row = aug[col].clone();
                    for (x, p) in aug[r].iter_mut().zip(pivot_row) {
                        *x -= &factor * p;
                    }
                }
            }
        }
        Ok(aug.into_iter().enumerate().map(|(i, row)| (i, row[n..].to_vec())).collect())
    }
}

/// A Laurent polynomial in `z` with `SurfaceClass` coefficients.
///
/// Everything the mirror computations produce for P² is a finite Laurent
/// polynomial (`H^3 = 0` cuts every geometric expansion short), so entries are
/// stored exactly in a sparse map and no truncation is carried.
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CohLaurent {
    terms: BTreeMap<i64, SurfaceClass>,
}

impl CohLaurent {
    pub fn zero() -> Self {
        CohLaurent::default()
    }

    /// `class * z^power`.
    pub fn term(power: i64, class: SurfaceClass) -> Self {
        let mut out = CohLaurent::zero();
        out.add_term(power, &class);
        out
    }

    /// The plain variable `z`.
    pub fn z() -> Self {
        CohLaurent::term(1, SurfaceClass::one())
    }

    pub fn add_term(&mut self, power: i64, class: &SurfaceClass) {
        let entry = self.terms.entry(power).or_default();
        *entry = &*entry + class;
        if entry.is_zero() {
            self.terms.remove(&power);
        }
    }

    pub fn coefficient(&self, power: i64) -> SurfaceClass {
        self.terms.get(&power).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &SurfaceClass)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest `z`-power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_power(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = CohLaurent::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, &v.scale(s));
        }
        out
    }

    /// `Res_{z=0} ∫`: the integral of the `z^{-1}` coefficient.
    pub fn residue_integral(&self) -> Rational {
        self.coefficient(-1).integrate()
    }

    /// The degree under `deg H = deg z = 1`, if every term shares it.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut degree = None;
        for (k, class) in &self.terms {
            for (codim, _) in class.homogeneous_parts() {
                let d = k + codim as i64;
                match degree {
                    None => degree = Some(d),
                    Some(prev) if prev != d => return None,
                    _ => {}
                }
            }
        }
        degree
    }
}

impl Add for &CohLaurent {
    type Output = CohLaurent;
    fn add(self, rhs: &CohLaurent) -> CohLaurent {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, v);
        }
        out
    }
}

impl Mul for &CohLaurent {
    type Output = CohLaurent;
    fn mul(self, rhs: &CohLaurent) -> CohLaurent {
        let mut out = CohLaurent::zero();
        for (i, a) in &self.terms {
            for (j, b) in &rhs.terms {
                out.add_term(i + j, &(a * b));
            }
        }
        out
    }
}

impl fmt::Debug for CohLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for CohLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, class) in self.terms.iter().rev() {
            for (codim, c) in class.homogeneous_parts() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({c})")?;
                match codim {
                    0 => {}
                    1 => write!(f, "*H")?,
                    _ => write!(f, "*H^{codim}")?,
                }
                if *k != 0 {
                    write!(f, "*z^{k}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn products() {
        let h = SurfaceClass::h();
        assert_eq!(class_mul(&h, &h), SurfaceClass::point());
        assert!(class_mul(&SurfaceClass::point(), &h).is_zero());
        let one_plus_h = &SurfaceClass::one() + &h;
        let one_minus_h = &SurfaceClass::one() - &h;
        assert_eq!(
            class_mul(&one_plus_h, &one_minus_h),
            &SurfaceClass::one() - &SurfaceClass::point()
        );
    }

    #[test]
    fn integration() {
        assert_eq!(integrate(&SurfaceClass::point()), r(1));
        assert_eq!(integrate(&SurfaceClass::h()), r(0));
        assert_eq!(integrate(&SurfaceClass::new(r(0), r(3), r(5))), r(5));
    }

    #[test]
    fn diagonal_basis() {
        let pairs = pairing_inverse_basis();
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0], (SurfaceClass::one(), SurfaceClass::point()));
        assert_eq!(pairs[1], (SurfaceClass::h(), SurfaceClass::h()));
        assert_eq!(pairs[2], (SurfaceClass::point(), SurfaceClass::one()));

        let contract = |g: &SurfaceClass, d: &SurfaceClass| -> Rational {
            pairs
                .iter()
                .map(|(t, dual)| integrate(&(g * t)) * integrate(&(d * dual)))
                .sum()
        };
        let h = SurfaceClass::h();
        assert_eq!(contract(&h, &h), r(1));
        assert_eq!(contract(&SurfaceClass::one(), &h), r(0));
    }

    #[test]
    fn completeness_of_dual_basis() {
        let pairs = pairing_inverse_basis();
        for k in 0..3 {
            let gamma = SurfaceClass::monomial(k, r(1));
            let rebuilt = pairs.iter().fold(SurfaceClass::zero(), |acc, (t, dual)| {
                &acc + &dual.scale(&integrate(&(&gamma * t)))
            });
            assert_eq!(rebuilt, gamma);
        }
    }

    #[test]
    fn pairing_is_symmetric_and_nondegenerate() {
        let table = RingTable::projective_plane();
        let g = table.pairing_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g[i][j], g[j][i]);
                let a = SurfaceClass::monomial(i, r(1));
                let b = SurfaceClass::monomial(j, r(1));
                assert_eq!(g[i][j], integrate(&(&a * &b)));
                let via_table = table.multiply(a.coefficients(), b.coefficients());
                assert_eq!(via_table.as_slice(), (&a * &b).coefficients());
            }
        }
        assert!(table.dual_basis().is_ok());
    }

    #[test]
    fn string_round_trip() {
        let c = SurfaceClass::new(Rational::frac(1, 2), r(-3), r(5));
        assert_eq!(c.to_string(), "1/2 + -3*H + 5*H^2");
        assert_eq!(c.to_string().parse::<SurfaceClass>().unwrap(), c);
        assert_eq!("H^2".parse::<SurfaceClass>().unwrap(), SurfaceClass::point());
        assert_eq!("2*H - 1".parse::<SurfaceClass>().unwrap(), SurfaceClass::new(r(-1), r(2), r(0)));
        assert!("H^x".parse::<SurfaceClass>().is_err());
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"["1/2","-3","5"]"#);
    }

    #[test]
    fn laurent_homogeneity() {
        let z = CohLaurent::z();
        let h = CohLaurent::term(0, SurfaceClass::h());
        let sum = &z + &h;
        assert_eq!(sum.homogeneous_degree(), Some(1));
        let sq = &sum * &sum;
        assert_eq!(sq.homogeneous_degree(), Some(2));
        assert_eq!(sq.coefficient(0), SurfaceClass::point());
        let mixed = &z + &CohLaurent::term(0, SurfaceClass::one());
        assert_eq!(mixed.homogeneous_degree(), None);
    }
}
