//! Integer combinatorics: Stirling numbers, binomials, partitions and the
//! hook-length formula.

use std::cell::RefCell;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static STIRLING: RefCell<Vec<Vec<BigInt>>> = RefCell::new(vec![vec![BigInt::one()]]);
    static PASCAL: RefCell<Vec<Vec<BigInt>>> = RefCell::new(vec![vec![BigInt::one()]]);
}

/// Unsigned Stirling number of the first kind `[m k]`.
///
/// This is the coefficient of `x^(m-k) y^k` in `prod_{j=0}^{m-1} (j x + y)`,
/// filled in row by row from `s(m+1, k) = s(m, k-1) + m s(m, k)`.
pub fn stirling_first_unsigned(m: usize, k: usize) -> BigInt {
    if k > m {
        return BigInt::zero();
    }
    STIRLING.with(|table| {
        let mut rows = table.borrow_mut();
        while rows.len() <= m {
            let n = rows.len() - 1;
            let prev = &rows[n];
            let mut next = vec![BigInt::zero(); n + 2];
            for (j, slot) in next.iter_mut().enumerate() {
                let from_left = if j >= 1 { prev[j - 1].clone() } else { BigInt::zero() };
                let stay = prev.get(j).map(|v| v * n).unwrap_or_default();
                *slot = from_left + stay;
            }
            rows.push(next);
        }
        rows[m][k].clone()
    })
}

/// `C(n, k)` from a memoized Pascal triangle; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    PASCAL.with(|table| {
        let mut rows = table.borrow_mut();
        while rows.len() <= n {
            let prev = rows.last().unwrap();
            let mut next = Vec::with_capacity(prev.len() + 1);
            next.push(BigInt::one());
            for w in prev.windows(2) {
                next.push(&w[0] + &w[1]);
            }
            next.push(BigInt::one());
            rows.push(next);
        }
        rows[n][k].clone()
    })
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `(sum parts)! / prod(parts!)`.
pub fn multinomial(parts: &[usize]) -> BigInt {
    let total: usize = parts.iter().sum();
    parts
        .iter()
        .fold(factorial(total), |acc, &p| acc / factorial(p))
}

/// An integer partition with weakly decreasing positive parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition, rejecting zero parts and increasing sequences.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Domain("partition parts must be positive".into()));
        }
        if !parts.windows(2).all(|w| w[0] >= w[1]) {
            return Err(Error::Domain("partition parts must be weakly decreasing".into()));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Conjugate partition (transpose of the Young diagram).
    pub fn conjugate(&self) -> Partition {
        let width = self.parts.first().copied().unwrap_or(0);
        let parts = (0..width)
            .map(|j| self.parts.iter().filter(|&&p| p > j).count())
            .collect();
        Partition { parts }
    }

    /// Iterator over the boxes `(row, col)` of the Young diagram, 0-based.
    pub fn boxes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (0..p).map(move |j| (i, j)))
    }

    /// Sum of contents `col - row` over all boxes.
    pub fn content_sum(&self) -> i64 {
        self.boxes().map(|(i, j)| j as i64 - i as i64).sum()
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// All partitions of `d` in reverse-lexicographic order: `(d)` first,
/// `(1, ..., 1)` last.
pub fn partitions_of(d: usize) -> Vec<Partition> {
    fn fill(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            fill(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(d, d, &mut Vec::new(), &mut out);
    out
}

/// Number of standard Young tableaux of shape `lambda`, by the hook-length
/// formula.
pub fn dimension(lambda: &Partition) -> BigInt {
    let conj = lambda.conjugate();
    let hooks = lambda.boxes().fold(BigInt::one(), |acc, (i, j)| {
        let arm = lambda.parts[i] - j - 1;
        let leg = conj.parts[j] - i - 1;
        acc * (arm + leg + 1)
    });
    factorial(lambda.size()) / hooks
}
