//! Genus-zero descendent invariants of P².
//!
//! A bracket `<tau_{a_1}(H^{c_1}) ... tau_{a_n}(H^{c_n})>_{0,d}` is reduced
//! deterministically:
//!
//! 1. the dimension gate `sum (a_i + c_i) = 3d - 1 + n` (otherwise 0);
//! 2. degree 0: `(n-3)! / prod a_i!` when the classes integrate to a point;
//! 3. string, dilaton and divisor equations strip `tau_0(1)`, `tau_1(1)` and
//!    `tau_0(H)` (the last only when at least three points remain, or when no
//!    descendants are left);
//! 4. with descendants and `n >= 3`, the topological recursion relation at the
//!    insertion with largest `(a, c)`, using the next two insertions as
//!    companions;
//! 5. with descendants and `n < 3`, the divisor equation read backwards adds a
//!    `tau_0(H)` point;
//! 6. pure point brackets `<tau_0(H^2)^{3d-1}>_d` are the plane curve counts
//!    `N_d`, taken either from Kontsevich's recursion or rebuilt from the
//!    recursion relation itself (see [`PrimaryRule`]).
//!
//! Every step strictly lowers `(sum a_i, 3 - min(n, 3), d, n)`
//! lexicographically, so the reduction terminates.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::RwLock;

use serde::Serialize;

use crate::cohomology::SurfaceClass;
use crate::combinatorics::{binomial, multinomial};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A descendent insertion `tau_psi(class)`; the class may be mixed, in which
/// case correlators split it by linearity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Insertion {
    pub psi: usize,
    pub class: SurfaceClass,
}

impl Insertion {
    pub fn new(psi: usize, class: SurfaceClass) -> Self {
        Insertion { psi, class }
    }

    /// `tau_psi(H^codim)`.
    pub fn tau(psi: usize, codim: usize) -> Self {
        Insertion { psi, class: SurfaceClass::monomial(codim, Rational::one()) }
    }
}

/// A monomial insertion `tau_psi(H^codim)` with unit coefficient.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct Tau {
    pub psi: usize,
    pub codim: usize,
}

impl Tau {
    pub const fn new(psi: usize, codim: usize) -> Self {
        Tau { psi, codim }
    }

    fn weight(&self) -> usize {
        self.psi + self.codim
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.codim {
            0 => write!(f, "tau_{}(1)", self.psi),
            1 => write!(f, "tau_{}(H)", self.psi),
            c => write!(f, "tau_{}(H^{})", self.psi, c),
        }
    }
}

/// Degree plus a canonically ordered multiset of monomial insertions
/// (descending `psi`, then descending `codim`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct CorrelatorKey {
    pub degree: usize,
    insertions: Vec<Tau>,
}

impl CorrelatorKey {
    pub fn new(degree: usize, mut insertions: Vec<Tau>) -> Self {
        insertions.sort_unstable_by(|a, b| b.cmp(a));
        CorrelatorKey { degree, insertions }
    }

    pub fn insertions(&self) -> &[Tau] {
        &self.insertions
    }

    pub fn len(&self) -> usize {
        self.insertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insertions.is_empty()
    }

    fn psi_total(&self) -> usize {
        self.insertions.iter().map(|t| t.psi).sum()
    }

    /// `sum (a_i + c_i) == 3d - 1 + n`.
    pub fn passes_dimension_gate(&self) -> bool {
        let weight: usize = self.insertions.iter().map(Tau::weight).sum();
        weight as i64 == 3 * self.degree as i64 - 1 + self.len() as i64
    }

    /// Genus-zero stability: `d > 0` or at least three points.
    pub fn is_stable(&self) -> bool {
        self.degree > 0 || self.len() >= 3
    }

    fn position(&self, tau: Tau) -> Option<usize> {
        self.insertions.iter().position(|&t| t == tau)
    }

    fn without(&self, index: usize) -> Vec<Tau> {
        let mut rest = self.insertions.clone();
        rest.remove(index);
        rest
    }

    fn replaced(&self, index: usize, tau: Tau) -> Vec<Tau> {
        let mut out = self.insertions.clone();
        out[index] = tau;
        out
    }
}

impl fmt::Display for CorrelatorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, t) in self.insertions.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ">_{{0,{}}}", self.degree)
    }
}

/// How the engine evaluates pure point brackets `<tau_0(H^2)^{3d-1}>_d`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum PrimaryRule {
    /// Kontsevich's closed recursion ([`primary_point_count`]).
    #[default]
    Kontsevich,
    /// Rebuild `N_d` from the recursion relation: with
    /// `W = <tau_0(H) tau_1(H) tau_0(H^2)^{3d-2}>_d` expanded using the
    /// companions `tau_0(H)` and `tau_0(H^2)`, and
    /// `X = <tau_1(H) tau_0(H^2)^{3d-2}>_d`, the divisor equation gives
    /// `N_d = W - d X`. Both right-hand sides only involve lower degrees.
    RecursionRelation,
}

/// `N_d`, the number of rational degree-`d` plane curves through `3d - 1`
/// general points.
pub fn primary_point_count(d: usize) -> Result<Rational> {
    if d == 0 {
        return Err(Error::Domain("point counts need degree >= 1".into()));
    }
    let mut counts = vec![Rational::zero(), Rational::one()];
    for n in 2..=d {
        let mut total = Rational::zero();
        for d1 in 1..n {
            let d2 = n - d1;
            let inner = Rational::from(binomial(3 * n - 4, 3 * d1 - 2)) * Rational::from(d2)
                - Rational::from(binomial(3 * n - 4, 3 * d1 - 1)) * Rational::from(d1);
            total += &counts[d1] * &counts[d2] * Rational::from(d1 * d1 * d2) * inner;
        }
        counts.push(total);
    }
    Ok(counts.swap_remove(d))
}

/// One summand of a TRR expansion: `coefficient * <left> * <right>`.
pub type TrrTerm = (Rational, CorrelatorKey, CorrelatorKey);

/// The genus-zero topological recursion relation at `pivot`, with the two
/// canonically first non-pivot insertions as companions.
pub fn trr_expand(key: &CorrelatorKey, pivot: usize) -> Result<Vec<TrrTerm>> {
    let companions: Vec<usize> = (0..key.len()).filter(|&i| i != pivot).take(2).collect();
    if companions.len() < 2 {
        return Err(Error::Domain(format!(
            "recursion relation needs at least 3 points, got {}",
            key.len()
        )));
    }
    trr_expand_with(key, pivot, (companions[0], companions[1]))
}

/// The genus-zero topological recursion relation
/// `psi_pivot = sum of boundary divisors separating pivot from {j, k}`,
/// applied to one power of the pivot's psi class.
///
/// The sum runs over degree splittings, over distributions of the remaining
/// insertions and over the diagonal pairs `(H^mu, H^{2-mu})`. Terms with an
/// unstable degree-0 factor are dropped; terms violating either factor's
/// dimension gate are dropped as zero.
pub fn trr_expand_with(
    key: &CorrelatorKey,
    pivot: usize,
    (j, k): (usize, usize),
) -> Result<Vec<TrrTerm>> {
    let n = key.len();
    if n < 3 {
        return Err(Error::Domain(format!("recursion relation needs at least 3 points, got {n}")));
    }
    if pivot >= n || j >= n || k >= n || j == k || j == pivot || k == pivot {
        return Err(Error::Domain("pivot and companions must be three distinct insertions".into()));
    }
    let pivot_tau = key.insertions[pivot];
    if pivot_tau.psi == 0 {
        return Err(Error::Domain("recursion relation pivot needs a psi power".into()));
    }
    let lowered = Tau::new(pivot_tau.psi - 1, pivot_tau.codim);

    let mut groups: Vec<(Tau, usize)> = Vec::new();
    for (i, &t) in key.insertions.iter().enumerate() {
        if i == pivot || i == j || i == k {
            continue;
        }
        match groups.iter_mut().find(|(g, _)| *g == t) {
            Some((_, count)) => *count += 1,
            None => groups.push((t, 1)),
        }
    }

    let mut terms: Vec<TrrTerm> = Vec::new();
    let mut take = vec![0usize; groups.len()];
    loop {
        let multiplicity: Rational = groups
            .iter()
            .zip(&take)
            .map(|((_, count), &t)| Rational::from(binomial(*count, t)))
            .product();
        for d1 in 0..=key.degree {
            let d2 = key.degree - d1;
            for mu in 0..=2 {
                let mut left = vec![lowered, Tau::new(0, mu)];
                let mut right = vec![Tau::new(0, 2 - mu), key.insertions[j], key.insertions[k]];
                for ((t, count), &taken) in groups.iter().zip(&take) {
                    left.extend(std::iter::repeat_n(*t, taken));
                    right.extend(std::iter::repeat_n(*t, count - taken));
                }
                let left = CorrelatorKey::new(d1, left);
                let right = CorrelatorKey::new(d2, right);
                if !left.is_stable() || !left.passes_dimension_gate() || !right.passes_dimension_gate() {
                    continue;
                }
                match terms.iter_mut().find(|(_, l, r)| *l == left && *r == right) {
                    Some((c, _, _)) => *c += &multiplicity,
                    None => terms.push((multiplicity.clone(), left, right)),
                }
            }
        }
        // odometer over the distribution counts
        let mut idx = 0;
        while idx < take.len() && take[idx] == groups[idx].1 {
            take[idx] = 0;
            idx += 1;
        }
        if idx == take.len() {
            break;
        }
        take[idx] += 1;
    }
    Ok(terms)
}

/// A linear combination of products of brackets.
struct Term {
    coefficient: Rational,
    factors: Vec<CorrelatorKey>,
}

enum Step {
    Value(Rational, &'static str),
    Expand(&'static str, Vec<Term>),
}

fn push_term(terms: &mut Vec<Term>, coefficient: Rational, factors: Vec<CorrelatorKey>) {
    if coefficient.is_zero() {
        return;
    }
    match terms.iter_mut().find(|t| t.factors == factors) {
        Some(t) => t.coefficient += coefficient,
        None => terms.push(Term { coefficient, factors }),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
    pub max_depth: usize,
}

/// One node of a reduction tree.
#[derive(Clone, Debug, Serialize)]
pub struct TraceNode {
    pub bracket: String,
    pub rule: String,
    pub value: Rational,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TraceTerm>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceTerm {
    pub coefficient: Rational,
    pub factors: Vec<TraceNode>,
}

impl TraceNode {
    fn open(key: &CorrelatorKey) -> Self {
        TraceNode {
            bracket: key.to_string(),
            rule: String::new(),
            value: Rational::zero(),
            terms: Vec::new(),
        }
    }

    /// Height of the tree; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self
            .terms
            .iter()
            .flat_map(|t| &t.factors)
            .map(TraceNode::depth)
            .max()
            .unwrap_or(0)
    }

    /// Indented text rendering, one bracket per line.
    pub fn render(&self) -> String {
        fn walk(node: &TraceNode, indent: usize, coefficient: Option<&Rational>, out: &mut String) {
            let pad = "  ".repeat(indent);
            let prefix = coefficient.map(|c| format!("[{c}] ")).unwrap_or_default();
            out.push_str(&format!("{pad}{prefix}{} = {}  ({})\n", node.bracket, node.value, node.rule));
            for term in &node.terms {
                for (i, f) in term.factors.iter().enumerate() {
                    walk(f, indent + 1, (i == 0).then_some(&term.coefficient), out);
                }
            }
        }
        let mut out = String::new();
        walk(self, 0, None, &mut out);
        out
    }
}

/// Memoizing evaluator for genus-zero P² brackets.
///
/// The cache is shared behind a lock; two threads may compute the same key
/// concurrently, but both store the same exact value.
#[derive(Debug)]
pub struct Engine {
    rule: PrimaryRule,
    budget: Option<u64>,
    cache: RwLock<HashMap<CorrelatorKey, Rational>>,
    hits: AtomicU64,
    misses: AtomicU64,
    max_depth: AtomicUsize,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine::with_rule(PrimaryRule::default())
    }

    pub fn with_rule(rule: PrimaryRule) -> Self {
        Engine {
            rule,
            budget: None,
            cache: RwLock::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            max_depth: AtomicUsize::new(0),
        }
    }

    /// Caps the number of distinct brackets the engine may evaluate; going
    /// past it yields [`Error::ResourceGuard`].
    pub fn with_budget(mut self, max_evaluations: u64) -> Self {
        self.budget = Some(max_evaluations);
        self
    }

    pub fn rule(&self) -> PrimaryRule {
        self.rule
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            entries: self.cache.read().unwrap().len(),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            max_depth: self.max_depth.load(Ordering::Relaxed),
        }
    }

    /// `<prod tau_{a_i}(gamma_i)>_{0,d}`, splitting mixed classes by linearity.
    pub fn correlator(&self, degree: usize, insertions: &[Insertion]) -> Result<Rational> {
        let mut total = Rational::zero();
        for (coefficient, key) in expand_linear(degree, insertions) {
            total += coefficient * self.evaluate(&key)?;
        }
        Ok(total)
    }

    /// Value of a monomial bracket.
    pub fn evaluate(&self, key: &CorrelatorKey) -> Result<Rational> {
        self.eval(key, 1, None)
    }

    /// Value together with its reduction tree.
    pub fn trace(&self, key: &CorrelatorKey) -> Result<(Rational, TraceNode)> {
        let mut root = TraceNode::open(key);
        let value = self.eval(key, 1, Some(&mut root))?;
        Ok((value, root))
    }

    /// `<tau_a(H^b)>_{0,d}`.
    pub fn one_point_descendent(&self, degree: usize, psi: usize, codim: usize) -> Result<Rational> {
        self.correlator(degree, &[Insertion::tau(psi, codim)])
    }

    fn eval(&self, key: &CorrelatorKey, depth: usize, trace: Option<&mut TraceNode>) -> Result<Rational> {
        self.max_depth.fetch_max(depth, Ordering::Relaxed);
        if let Some(v) = self.cache.read().unwrap().get(key).cloned() {
            self.hits.fetch_add(1, Ordering::Relaxed);
            if let Some(node) = trace {
                node.rule = "cached".into();
                node.value = v.clone();
            }
            return Ok(v);
        }
        let misses = self.misses.fetch_add(1, Ordering::Relaxed) + 1;
        if let Some(budget) = self.budget {
            if misses > budget {
                return Err(Error::ResourceGuard(format!(
                    "correlator engine exceeded its budget of {budget} bracket evaluations"
                )));
            }
        }

        let mut trace = trace;
        let value = match self.reduce(key)? {
            Step::Value(v, rule) => {
                if let Some(node) = trace.as_deref_mut() {
                    node.rule = rule.into();
                }
                v
            }
            Step::Expand(rule, terms) => {
                if let Some(node) = trace.as_deref_mut() {
                    node.rule = rule.into();
                }
                let mut total = Rational::zero();
                for term in terms {
                    let mut product = term.coefficient.clone();
                    let mut traced = trace.is_some().then(|| TraceTerm {
                        coefficient: term.coefficient.clone(),
                        factors: Vec::new(),
                    });
                    for factor in &term.factors {
                        if product.is_zero() {
                            break;
                        }
                        let mut child = traced.as_ref().map(|_| TraceNode::open(factor));
                        let v = self.eval(factor, depth + 1, child.as_mut())?;
                        if let (Some(t), Some(c)) = (traced.as_mut(), child) {
                            t.factors.push(c);
                        }
                        product *= &v;
                    }
                    if let (Some(node), Some(t)) = (trace.as_deref_mut(), traced) {
                        node.terms.push(t);
                    }
                    total += product;
                }
                total
            }
        };
        if let Some(node) = trace {
            node.value = value.clone();
        }
        self.cache.write().unwrap().insert(key.clone(), value.clone());
        Ok(value)
    }

    fn reduce(&self, key: &CorrelatorKey) -> Result<Step> {
        let d = key.degree;
        let n = key.len();
        if key.insertions.iter().any(|t| t.codim > 2) {
            return Ok(Step::Value(Rational::zero(), "H^3 = 0"));
        }
        if !key.passes_dimension_gate() {
            return Ok(Step::Value(Rational::zero(), "dimension"));
        }
        if d == 0 {
            if n < 3 {
                return Ok(Step::Value(Rational::zero(), "unstable"));
            }
            let codims: usize = key.insertions.iter().map(|t| t.codim).sum();
            if codims != 2 {
                return Ok(Step::Value(Rational::zero(), "degree 0"));
            }
            let psis: Vec<usize> = key.insertions.iter().map(|t| t.psi).collect();
            return Ok(Step::Value(Rational::from(multinomial(&psis)), "degree 0"));
        }

        let mut terms = Vec::new();

        if let Some(i) = key.position(Tau::new(0, 0)) {
            let rest = CorrelatorKey::new(d, key.without(i));
            for (j, t) in rest.insertions.iter().enumerate() {
                if t.psi > 0 {
                    let lowered = rest.replaced(j, Tau::new(t.psi - 1, t.codim));
                    push_term(&mut terms, Rational::one(), vec![CorrelatorKey::new(d, lowered)]);
                }
            }
            return Ok(Step::Expand("string", terms));
        }

        if let Some(i) = key.position(Tau::new(1, 0)) {
            let coefficient = Rational::from(n as i64 - 3);
            push_term(&mut terms, coefficient, vec![CorrelatorKey::new(d, key.without(i))]);
            return Ok(Step::Expand("dilaton", terms));
        }

        let divisor = key.position(Tau::new(0, 1));
        if key.psi_total() == 0 {
            if let Some(i) = divisor {
                push_term(&mut terms, Rational::from(d), vec![CorrelatorKey::new(d, key.without(i))]);
                return Ok(Step::Expand("divisor", terms));
            }
            // only points remain, and the gate forces n = 3d - 1
            return self.point_count(d);
        }

        if let (Some(i), true) = (divisor, n >= 4) {
            let rest = CorrelatorKey::new(d, key.without(i));
            push_term(&mut terms, Rational::from(d), vec![rest.clone()]);
            for (j, t) in rest.insertions.iter().enumerate() {
                if t.psi > 0 && t.codim < 2 {
                    let moved = rest.replaced(j, Tau::new(t.psi - 1, t.codim + 1));
                    push_term(&mut terms, Rational::one(), vec![CorrelatorKey::new(d, moved)]);
                }
            }
            return Ok(Step::Expand("divisor", terms));
        }

        if n >= 3 {
            // index 0 carries the largest (psi, codim) and psi > 0 here
            for (c, left, right) in trr_expand(key, 0)? {
                push_term(&mut terms, c, vec![left, right]);
            }
            return Ok(Step::Expand("recursion relation", terms));
        }

        // n < 3 with descendants: <prod> = (1/d) [<tau_0(H) prod> - corrections]
        let inv_d = Rational::frac(1, d as i64);
        let mut raised = key.insertions.clone();
        raised.push(Tau::new(0, 1));
        push_term(&mut terms, inv_d.clone(), vec![CorrelatorKey::new(d, raised)]);
        for (j, t) in key.insertions.iter().enumerate() {
            if t.psi > 0 && t.codim < 2 {
                let moved = key.replaced(j, Tau::new(t.psi - 1, t.codim + 1));
                push_term(&mut terms, -inv_d.clone(), vec![CorrelatorKey::new(d, moved)]);
            }
        }
        Ok(Step::Expand("inverse divisor", terms))
    }

    fn point_count(&self, d: usize) -> Result<Step> {
        match self.rule {
            PrimaryRule::Kontsevich => Ok(Step::Value(primary_point_count(d)?, "point count")),
            PrimaryRule::RecursionRelation if d == 1 => {
                Ok(Step::Value(Rational::one(), "line through two points"))
            }
            PrimaryRule::RecursionRelation => {
                let points = 3 * d - 2;
                let mut w = vec![Tau::new(0, 1), Tau::new(1, 1)];
                w.extend(std::iter::repeat_n(Tau::new(0, 2), points));
                let w = CorrelatorKey::new(d, w);
                let pivot = w.position(Tau::new(1, 1)).unwrap();
                let divisor = w.position(Tau::new(0, 1)).unwrap();
                let point = w.position(Tau::new(0, 2)).unwrap();
                let mut terms = Vec::new();
                for (c, left, right) in trr_expand_with(&w, pivot, (divisor, point))? {
                    push_term(&mut terms, c, vec![left, right]);
                }
                let mut x = vec![Tau::new(1, 1)];
                x.extend(std::iter::repeat_n(Tau::new(0, 2), points));
                push_term(&mut terms, Rational::from(-(d as i64)), vec![CorrelatorKey::new(d, x)]);
                Ok(Step::Expand("point count via recursion relation", terms))
            }
        }
    }
}

/// Distributes mixed classes into monomial keys with their coefficients.
pub fn expand_linear(degree: usize, insertions: &[Insertion]) -> Vec<(Rational, CorrelatorKey)> {
    let mut partial: Vec<(Rational, Vec<Tau>)> = vec![(Rational::one(), Vec::new())];
    for ins in insertions {
        let mut next = Vec::new();
        for (coefficient, taus) in &partial {
            for (codim, c) in ins.class.homogeneous_parts() {
                let mut taus = taus.clone();
                taus.push(Tau::new(ins.psi, codim));
                next.push((coefficient * c, taus));
            }
        }
        partial = next;
    }
    let mut out: Vec<(Rational, CorrelatorKey)> = Vec::new();
    for (c, taus) in partial {
        let key = CorrelatorKey::new(degree, taus);
        match out.iter_mut().find(|(_, k)| *k == key) {
            Some((acc, _)) => *acc += c,
            None => out.push((c, key)),
        }
    }
    out.retain(|(c, _)| !c.is_zero());
    out
}

/// A parsed bracket such as `d=2 tau_1(H)^2 tau_0(H^2)^3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bracket {
    pub degree: usize,
    pub insertions: Vec<Insertion>,
}

impl Bracket {
    pub fn evaluate(&self, engine: &Engine) -> Result<Rational> {
        engine.correlator(self.degree, &self.insertions)
    }
}

impl FromStr for Bracket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: String| Error::Parse(format!("bracket {s:?}: {why}"));
        let mut degree = None;
        let mut insertions = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            if let Some(after) = rest.strip_prefix("d=") {
                let end = after.find(|c: char| !c.is_ascii_digit()).unwrap_or(after.len());
                let value = after[..end].parse::<usize>().map_err(|_| bad("bad degree".into()))?;
                if degree.replace(value).is_some() {
                    return Err(bad("degree given twice".into()));
                }
                rest = after[end..].trim_start();
                continue;
            }
            let after = rest
                .strip_prefix("tau_")
                .ok_or_else(|| bad(format!("unexpected token at {rest:?}")))?;
            let open = after.find('(').ok_or_else(|| bad("missing '('".into()))?;
            let psi = after[..open].parse::<usize>().map_err(|_| bad("bad psi power".into()))?;
            let close = after[open..]
                .find(')')
                .map(|i| i + open)
                .ok_or_else(|| bad("missing ')'".into()))?;
            let class: SurfaceClass = after[open + 1..close].parse()?;
            let mut tail = &after[close + 1..];
            let mut repeat = 1usize;
            if let Some(pow) = tail.strip_prefix('^') {
                let end = pow.find(|c: char| !c.is_ascii_digit()).unwrap_or(pow.len());
                repeat = pow[..end].parse().map_err(|_| bad("bad repetition count".into()))?;
                tail = &pow[end..];
            }
            if !(tail.is_empty() || tail.starts_with(char::is_whitespace)) {
                return Err(bad(format!("unexpected text {tail:?}")));
            }
            for _ in 0..repeat {
                insertions.push(Insertion::new(psi, class.clone()));
            }
            rest = tail.trim_start();
        }
        let degree = degree.ok_or_else(|| bad("missing d=<degree>".into()))?;
        Ok(Bracket { degree, insertions })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(d: usize, taus: &[(usize, usize)]) -> CorrelatorKey {
        CorrelatorKey::new(d, taus.iter().map(|&(a, c)| Tau::new(a, c)).collect())
    }

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn point_counts() {
        let expected = [1i64, 1, 12, 620, 87304];
        for (d, n) in expected.iter().enumerate() {
            assert_eq!(primary_point_count(d + 1).unwrap(), r(*n));
        }
        assert!(primary_point_count(0).is_err());
    }

    #[test]
    fn degree_zero_brackets() {
        let e = Engine::new();
        assert_eq!(e.evaluate(&key(0, &[(0, 0), (0, 1), (0, 1)])).unwrap(), r(1));
        assert_eq!(e.evaluate(&key(0, &[(0, 0), (0, 0), (0, 2)])).unwrap(), r(1));
        // psi integrals on M_{0,5}: <tau_2 tau_0^4> = 1, <tau_1^2 tau_0^3> = 2
        assert_eq!(e.evaluate(&key(0, &[(1, 0), (1, 0), (0, 0), (0, 0), (0, 2)])).unwrap(), r(2));
        assert_eq!(e.evaluate(&key(0, &[(0, 1), (0, 1)])).unwrap(), r(0));
    }

    #[test]
    fn worked_brackets() {
        let e = Engine::new();
        assert_eq!(e.evaluate(&key(1, &[(1, 1), (0, 2)])).unwrap(), r(-1));
        assert_eq!(e.evaluate(&key(1, &[(1, 1), (0, 2), (0, 1)])).unwrap(), r(0));
        assert_eq!(e.evaluate(&key(1, &[(0, 2), (0, 2)])).unwrap(), r(1));
        assert_eq!(e.evaluate(&key(2, &[(1, 1), (0, 2), (0, 2), (0, 2), (0, 2)])).unwrap(), r(1));
        assert_eq!(e.evaluate(&key(2, &[(1, 2), (0, 2), (0, 2), (0, 2)])).unwrap(), r(1));
        assert_eq!(e.evaluate(&key(2, &[(1, 1), (1, 1), (0, 2), (0, 2), (0, 2)])).unwrap(), r(2));
    }

    #[test]
    fn one_point_descendents_degree_one() {
        let e = Engine::new();
        assert_eq!(e.one_point_descendent(1, 1, 2).unwrap(), r(1));
        assert_eq!(e.one_point_descendent(1, 2, 1).unwrap(), r(-3));
        assert_eq!(e.one_point_descendent(1, 3, 0).unwrap(), r(6));
        assert_eq!(e.one_point_descendent(1, 0, 2).unwrap(), r(0));
    }

    #[test]
    fn trr_instance_from_lines() {
        // <tau_1(H) tau_0(H^2) tau_0(H)>_1 expands to nothing nonzero
        let k = key(1, &[(1, 1), (0, 2), (0, 1)]);
        let e = Engine::new();
        let total: Rational = trr_expand(&k, 0)
            .unwrap()
            .into_iter()
            .map(|(c, l, r)| c * e.evaluate(&l).unwrap() * e.evaluate(&r).unwrap())
            .sum();
        assert_eq!(total, r(0));
    }

    #[test]
    fn trr_errors() {
        assert!(trr_expand(&key(1, &[(1, 1), (0, 2)]), 0).is_err());
        assert!(trr_expand(&key(1, &[(0, 1), (0, 2), (0, 2)]), 0).is_err());
        assert!(trr_expand_with(&key(1, &[(1, 1), (0, 2), (0, 2)]), 0, (1, 1)).is_err());
    }

    #[test]
    fn recursion_relation_rule_matches_kontsevich() {
        let trr = Engine::with_rule(PrimaryRule::RecursionRelation);
        for d in 1..=4 {
            let k = CorrelatorKey::new(d, vec![Tau::new(0, 2); 3 * d - 1]);
            assert_eq!(trr.evaluate(&k).unwrap(), primary_point_count(d).unwrap(), "d={d}");
        }
    }

    #[test]
    fn key_is_permutation_invariant() {
        let a = key(2, &[(0, 2), (1, 1), (0, 1), (2, 0)]);
        let b = key(2, &[(2, 0), (0, 1), (1, 1), (0, 2)]);
        assert_eq!(a, b);
        assert_eq!(a.insertions()[0], Tau::new(2, 0));
    }

    #[test]
    fn mixed_classes_split_linearly() {
        let e = Engine::new();
        // <tau_0(H^2) tau_0(2H + H^2)>_1 = 2 <p H>_1 + <p p>_1 = 0 + 1
        let ins = [
            Insertion::tau(0, 2),
            Insertion::new(0, SurfaceClass::new(r(0), r(2), r(1))),
        ];
        assert_eq!(e.correlator(1, &ins).unwrap(), r(1));
    }

    #[test]
    fn budget_guard() {
        let e = Engine::new().with_budget(3);
        let err = e.evaluate(&key(2, &[(1, 1), (1, 1), (0, 2), (0, 2), (0, 2)])).unwrap_err();
        assert!(matches!(err, Error::ResourceGuard(_)));
    }

    #[test]
    fn trace_reproduces_value() {
        let e = Engine::new();
        let (v, tree) = e.trace(&key(1, &[(1, 1), (0, 2)])).unwrap();
        assert_eq!(v, r(-1));
        assert_eq!(tree.rule, "inverse divisor");
        assert!(tree.depth() >= 2);
        assert!(tree.render().contains("tau_1(H)"));
        assert!(e.stats().misses > 0);
    }

    #[test]
    fn bracket_grammar() {
        let b: Bracket = "d=2 tau_1(H)^2 tau_0(H^2)^3".parse().unwrap();
        assert_eq!(b.degree, 2);
        assert_eq!(b.insertions.len(), 5);
        assert_eq!(b.insertions[0], Insertion::tau(1, 1));
        assert_eq!(b.evaluate(&Engine::new()).unwrap(), r(2));
        let c: Bracket = "tau_1(H) tau_0(H^2) d=1".parse().unwrap();
        assert_eq!(c.evaluate(&Engine::new()).unwrap(), r(-1));
        assert!("tau_1(H)".parse::<Bracket>().is_err());
        assert!("d=1 tau_x(H)".parse::<Bracket>().is_err());
        assert!("d=1 tau_1(H)junk".parse::<Bracket>().is_err());
    }
}
