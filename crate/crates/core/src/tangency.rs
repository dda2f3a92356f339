//! Naive tangency conditions on P² and their descendent expansions.
//!
//! A condition `m Z` at a marked point asks the curve to meet `Z` there with
//! contact order at least `m`. Its pulled-back class is a polynomial in the
//! cotangent line class `psi` with coefficients in `A^*(P^2)`:
//!
//! - a degree-`e` curve: `prod_{k=0}^{m-1} (k psi + eH)`,
//! - a point: `((m-1)! psi^{m-1})^2 H^2`,
//! - the zero locus of a transverse section of a rank-`r` bundle `E`:
//!   `prod_{k=0}^{m-1} sum_j (k psi)^{r-j} c_j(E)`.
//!
//! [`lci_insertion_via_theorem`] computes the same classes along a second
//! route, working in the Chow ring of `Z` itself and pushing forward.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::cohomology::SurfaceClass;
use crate::combinatorics::{factorial, stirling_first_unsigned};
use crate::engine::{Engine, Insertion};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Shape {
    /// A plane curve of the given degree.
    Divisor { degree: usize },
    Point,
    /// Zero locus of a transverse section of a bundle with the given Chern
    /// classes `c_1 .. c_r`.
    Bundle { chern: Vec<SurfaceClass> },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TangencyCondition {
    pub order: usize,
    pub shape: Shape,
}

impl TangencyCondition {
    pub fn new(order: usize, shape: Shape) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("tangency order must be at least 1".into()));
        }
        if let Shape::Divisor { degree: 0 } = shape {
            return Err(Error::Domain("divisor degree must be at least 1".into()));
        }
        Ok(TangencyCondition { order, shape })
    }

    pub fn point(order: usize) -> Result<Self> {
        TangencyCondition::new(order, Shape::Point)
    }

    pub fn divisor(order: usize, degree: usize) -> Result<Self> {
        TangencyCondition::new(order, Shape::Divisor { degree })
    }

    /// The descendent class this condition pulls back to.
    pub fn insertion(&self) -> PsiPolynomial {
        match &self.shape {
            Shape::Divisor { degree } => divisor_insertion(self.order, *degree),
            Shape::Point => point_insertion(self.order),
            Shape::Bundle { chern } => bundle_insertion(self.order, chern),
        }
    }
}

impl fmt::Display for TangencyCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Divisor { degree } => write!(f, "{}*div({})", self.order, degree),
            Shape::Point => write!(f, "{}*point", self.order),
            Shape::Bundle { chern } => write!(f, "{}*bundle(rank {})", self.order, chern.len()),
        }
    }
}

impl FromStr for TangencyCondition {
    type Err = Error;

    /// `point`, `m*point`, `div(e)` or `m*div(e)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("condition {s:?}: {why}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (order, body) = match compact.split_once('*') {
            Some((m, body)) => (m.parse::<usize>().map_err(|_| bad("bad tangency order"))?, body),
            None => (1, compact.as_str()),
        };
        let shape = if body == "point" || body == "pt" {
            Shape::Point
        } else if let Some(inner) = body.strip_prefix("div(").and_then(|b| b.strip_suffix(')')) {
            Shape::Divisor { degree: inner.parse().map_err(|_| bad("bad divisor degree"))? }
        } else {
            return Err(bad("expected point or div(e)"));
        };
        TangencyCondition::new(order, shape)
    }
}

/// Conditions grouped by marked point: points separated by `,`, conditions at
/// one point joined by `&`. Example: `point,point,point, 2*div(1) & 1*div(1)`.
pub fn parse_conditions(s: &str) -> Result<Vec<Vec<TangencyCondition>>> {
    let points: Vec<Vec<TangencyCondition>> = s
        .split(',')
        .map(|point| point.split('&').map(str::parse).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    if points.is_empty() {
        return Err(Error::Parse("no marked points".into()));
    }
    Ok(points)
}

/// A finitely supported polynomial `sum_a psi^a * gamma_a`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct PsiPolynomial {
    terms: BTreeMap<usize, SurfaceClass>,
}

impl PsiPolynomial {
    pub fn zero() -> Self {
        PsiPolynomial::default()
    }

    pub fn one() -> Self {
        PsiPolynomial::term(0, SurfaceClass::one())
    }

    /// `psi^a * class`.
    pub fn term(a: usize, class: SurfaceClass) -> Self {
        let mut out = PsiPolynomial::zero();
        out.add_term(a, &class);
        out
    }

    pub fn add_term(&mut self, a: usize, class: &SurfaceClass) {
        let slot = self.terms.entry(a).or_default();
        *slot = &*slot + class;
        if slot.is_zero() {
            self.terms.remove(&a);
        }
    }

    pub fn coefficient(&self, a: usize) -> SurfaceClass {
        self.terms.get(&a).cloned().unwrap_or_default()
    }

    /// Nonzero `(psi power, class)` pairs in increasing psi power.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &SurfaceClass)> {
        self.terms.iter().map(|(a, c)| (*a, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PsiPolynomial) -> PsiPolynomial {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(*a, c);
        }
        out
    }

    pub fn mul(&self, other: &PsiPolynomial) -> PsiPolynomial {
        let mut out = PsiPolynomial::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a + b, &(x * y));
            }
        }
        out
    }

    /// The descendent insertions `tau_a(gamma_a)`, one per psi power.
    pub fn insertions(&self) -> Vec<Insertion> {
        self.terms.iter().map(|(a, c)| Insertion::new(*a, c.clone())).collect()
    }
}

impl fmt::Debug for PsiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PsiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "psi^{a}*({c})")?;
        }
        Ok(())
    }
}

/// `prod_{k=0}^{m-1} (k psi + eH) = sum_k [m k] psi^{m-k} (eH)^k`, with
/// `H^3 = 0` applied.
pub fn divisor_insertion(m: usize, e: usize) -> PsiPolynomial {
    let mut out = PsiPolynomial::zero();
    for k in 0..=m.min(2) {
        let s = Rational::from(stirling_first_unsigned(m, k));
        let coeff = s * Rational::from(e).pow(k as i32);
        out.add_term(m - k, &SurfaceClass::monomial(k, coeff));
    }
    out
}

/// `((m-1)! psi^{m-1})^2 H^2`.
pub fn point_insertion(m: usize) -> PsiPolynomial {
    let f = Rational::from(factorial(m.saturating_sub(1)));
    PsiPolynomial::term(2 * m.saturating_sub(1), SurfaceClass::monomial(2, &f * &f))
}

/// `prod_{k=0}^{m-1} sum_{j=0}^{r} (k psi)^{r-j} c_j(E)` for `chern = [c_1 .. c_r]`.
pub fn bundle_insertion(m: usize, chern: &[SurfaceClass]) -> PsiPolynomial {
    let r = chern.len();
    let class = |j: usize| if j == 0 { SurfaceClass::one() } else { chern[j - 1].clone() };
    (0..m).fold(PsiPolynomial::one(), |acc, k| {
        let mut factor = PsiPolynomial::zero();
        for j in 0..=r {
            let power = r - j;
            let weight = Rational::from(k).pow(power as i32);
            if weight.is_zero() {
                continue;
            }
            factor.add_term(power, &class(j).scale(&weight));
        }
        acc.mul(&factor)
    })
}

/// Chow ring data of a subvariety `Z` of P² for the pushforward route.
///
/// `A^*(Z)` is `Q[t]/(t^{dim+1})` with `t` of codimension 1 (the point class
/// on a curve); `pushforward[i]` is `iota_!(t^i)` and `normal_chern[j]` gives
/// `c_{j+1}(N)` as coefficients in powers of `t`.
struct Locus {
    dim: usize,
    pushforward: Vec<SurfaceClass>,
    normal_chern: Vec<Vec<Rational>>,
}

impl Locus {
    fn for_shape(shape: &Shape) -> Result<Locus> {
        match shape {
            // smooth curve of degree e: H|_Z = e t, N = O(e)|_Z so c_1(N) = e^2 t
            Shape::Divisor { degree } => {
                let e = Rational::from(*degree);
                Ok(Locus {
                    dim: 1,
                    pushforward: vec![SurfaceClass::monomial(1, e.clone()), SurfaceClass::point()],
                    normal_chern: vec![vec![Rational::zero(), &e * &e]],
                })
            }
            // point: N is the trivial rank-2 bundle
            Shape::Point => Ok(Locus {
                dim: 0,
                pushforward: vec![SurfaceClass::point()],
                normal_chern: vec![vec![Rational::zero()], vec![Rational::zero()]],
            }),
            Shape::Bundle { .. } => Err(Error::Unsupported(
                "the pushforward route handles curves and points of P^2 only".into(),
            )),
        }
    }

    fn mul(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim + 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if i + j <= self.dim {
                    out[i + j] += x * y;
                }
            }
        }
        out
    }
}

/// `ev^* iota_! prod_{k=1}^{m-1} sum_j (k psi)^{r-j} c_j(N)`, computed in
/// `A^*(Z)[psi]` and pushed forward coefficientwise.
pub fn lci_insertion_via_theorem(m: usize, shape: &Shape) -> Result<PsiPolynomial> {
    if m == 0 {
        return Err(Error::Domain("tangency order must be at least 1".into()));
    }
    let locus = Locus::for_shape(shape)?;
    let r = locus.normal_chern.len();
    let unit = {
        let mut v = vec![Rational::zero(); locus.dim + 1];
        v[0] = Rational::one();
        v
    };
    let chern = |j: usize| if j == 0 { unit.clone() } else { locus.normal_chern[j - 1].clone() };

    // psi power -> coefficient in A^*(Z)
    let mut poly: BTreeMap<usize, Vec<Rational>> = BTreeMap::from([(0, unit.clone())]);
    for k in 1..m {
        let mut next: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
        for (a, coeff) in &poly {
            for j in 0..=r {
                let weight = Rational::from(k).pow((r - j) as i32);
                let product = locus.mul(coeff, &chern(j));
                let slot = next
                    .entry(a + r - j)
                    .or_insert_with(|| vec![Rational::zero(); locus.dim + 1]);
                for (s, p) in slot.iter_mut().zip(product) {
                    *s += &weight * p;
                }
            }
        }
        poly = next;
    }

    let mut out = PsiPolynomial::zero();
    for (a, coeff) in poly {
        for (i, c) in coeff.iter().enumerate() {
            if !c.is_zero() {
                out.add_term(a, &locus.pushforward[i].scale(c));
            }
        }
    }
    Ok(out)
}

/// `<cap_j m_{1,j} Z_{1,j}, ..., cap_j m_{n,j} Z_{n,j}>_{0,d}`.
///
/// Conditions sharing a marked point multiply as psi polynomials; the
/// product over marked points is distributed and each monomial bracket is
/// evaluated by `engine`.
pub fn naive_invariant(
    engine: &Engine,
    degree: usize,
    points: &[Vec<TangencyCondition>],
) -> Result<Rational> {
    if points.is_empty() {
        return Err(Error::Domain("a naive invariant needs at least one marked point".into()));
    }
    let per_point: Vec<Vec<Insertion>> = points
        .iter()
        .map(|conditions| {
            conditions
                .iter()
                .fold(PsiPolynomial::one(), |acc, c| acc.mul(&c.insertion()))
                .insertions()
        })
        .collect();
    if per_point.iter().any(Vec::is_empty) {
        return Ok(Rational::zero());
    }

    let mut total = Rational::zero();
    let mut choice = vec![0usize; per_point.len()];
    loop {
        let insertions: Vec<Insertion> = per_point
            .iter()
            .zip(&choice)
            .map(|(options, &i)| options[i].clone())
            .collect();
        total += engine.correlator(degree, &insertions)?;

        let mut idx = 0;
        while idx < choice.len() && choice[idx] + 1 == per_point[idx].len() {
            choice[idx] = 0;
            idx += 1;
        }
        if idx == choice.len() {
            break;
        }
        choice[idx] += 1;
    }
    Ok(total)
}

/// `(1/5!) <2C, 2C, 2C, 2C, 2C>_{0,2}` for a plane curve `C` of degree `d`.
pub fn gathmann_count(engine: &Engine, d: usize) -> Result<Rational> {
    if d == 0 {
        return Err(Error::Domain("curve degree must be at least 1".into()));
    }
    let tangent = vec![TangencyCondition::divisor(2, d)?];
    let points = vec![tangent; 5];
    Ok(naive_invariant(engine, 2, &points)? / Rational::from(120))
}

/// `d^8 (d^2 + 5d + 20) / 120`.
pub fn gathmann_closed_form(d: usize) -> Rational {
    let d = Rational::from(d);
    d.pow(8) * (d.pow(2) + Rational::from(5) * &d + Rational::from(20)) / Rational::from(120)
}
