//! Randomized property suites shared by the `properties` and `acceptance`
//! targets. Each suite returns `Err` with the first counterexample.

#![allow(dead_code)]

use naive_gw::engine::{trr_expand_with, CorrelatorKey, Engine, Insertion, Tau};
use naive_gw::tangency::{
    divisor_insertion, lci_insertion_via_theorem, point_insertion, Shape,
};
use naive_gw::Rational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, max_global_rejects: 100_000, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn tau() -> impl Strategy<Value = Tau> {
    (0usize..=3, 0usize..=2).prop_map(|(psi, codim)| Tau::new(psi, codim))
}

/// Brackets of degree `<= max_degree` satisfying the dimension constraint:
/// all but the last insertion are random and the last one absorbs the
/// remaining weight.
pub fn gated_bracket(max_degree: usize, min_len: usize, max_len: usize) -> impl Strategy<Value = CorrelatorKey> {
    (0..=max_degree, prop::collection::vec(tau(), min_len - 1..max_len)).prop_filter_map(
        "no valid last insertion",
        |(degree, mut taus)| {
            let n = taus.len() + 1;
            let target = 3 * degree + n - 1;
            let used: usize = taus.iter().map(|t| t.psi + t.codim).sum();
            let rest = target.checked_sub(used)?;
            let codim = rest.min(2);
            taus.push(Tau::new(rest - codim, codim));
            let key = CorrelatorKey::new(degree, taus);
            (key.is_stable() && key.insertions().iter().map(|t| t.psi).sum::<usize>() <= 8).then_some(key)
        },
    )
}

fn violating_bracket() -> impl Strategy<Value = CorrelatorKey> {
    (0usize..=4, prop::collection::vec((0usize..=5, 0usize..=2), 1..=7)).prop_filter_map(
        "passes the gate",
        |(degree, raw)| {
            let key = CorrelatorKey::new(degree, raw.into_iter().map(|(a, c)| Tau::new(a, c)).collect());
            (!key.passes_dimension_gate()).then_some(key)
        },
    )
}

fn to_insertions(taus: &[Tau]) -> Vec<Insertion> {
    taus.iter().map(|t| Insertion::tau(t.psi, t.codim)).collect()
}

/// Brackets violating the dimension constraint evaluate to zero.
pub fn dimension_gate(cases: u32) -> Result<(), String> {
    let engine = Engine::new();
    runner(cases)
        .run(&violating_bracket(), |key| {
            let value = engine.evaluate(&key).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(value.is_zero(), "{:?} gave {}", key, value);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn reduce_at(engine: &Engine, key: &CorrelatorKey, pivot: usize, companions: (usize, usize)) -> Result<Rational, String> {
    let mut total = Rational::zero();
    for (c, left, right) in trr_expand_with(key, pivot, companions).map_err(|e| e.to_string())? {
        let l = engine.evaluate(&left).map_err(|e| e.to_string())?;
        let r = engine.evaluate(&right).map_err(|e| e.to_string())?;
        total += c * l * r;
    }
    Ok(total)
}

/// Reordering the insertions does not change the value: the bracket is fed
/// to a fresh engine in shuffled order, and reduced with the recursion
/// relation pivoting on every insertion that carries a psi class.
pub fn permutation_invariance(cases: u32) -> Result<(), String> {
    let reference = Engine::new();
    let strategy = gated_bracket(2, 1, 6).prop_flat_map(|key| {
        let taus = key.insertions().to_vec();
        (Just(key), Just(taus).prop_shuffle())
    });
    runner(cases)
        .run(&strategy, |(key, shuffled)| {
            let expected = reference.evaluate(&key).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let fresh = Engine::new();
            let got = fresh
                .correlator(key.degree, &to_insertions(&shuffled))
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&got, &expected, "shuffled {:?}", shuffled);
            if key.len() >= 3 {
                for pivot in (0..key.len()).filter(|&i| key.insertions()[i].psi > 0) {
                    let others: Vec<usize> = (0..key.len()).filter(|&i| i != pivot).collect();
                    let companions = (others[others.len() - 1], others[others.len() - 2]);
                    let reduced = reduce_at(&reference, &key, pivot, companions).map_err(TestCaseError::fail)?;
                    prop_assert_eq!(&reduced, &expected, "{:?} pivot {}", key, pivot);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The recursion relation gives the same total for every choice of the two
/// companion insertions.
pub fn trr_companion_independence(cases: u32) -> Result<(), String> {
    let engine = Engine::new();
    let strategy = gated_bracket(3, 3, 6).prop_filter("needs a psi class", |k| k.insertions()[0].psi > 0);
    runner(cases)
        .run(&strategy, |key| {
            let expected = engine.evaluate(&key).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let n = key.len();
            for j in 1..n {
                for k in j + 1..n {
                    let got = reduce_at(&engine, &key, 0, (j, k)).map_err(TestCaseError::fail)?;
                    prop_assert_eq!(&got, &expected, "{:?} companions ({}, {})", key, j, k);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Pushing the tangency class forward from the locus agrees with the
/// closed expansions for divisors of degree `<= 5` and for points.
pub fn theorem_matches_closed_forms(max_order: usize) -> Result<(), String> {
    for m in 1..=max_order {
        for e in 1..=5 {
            let pushed = lci_insertion_via_theorem(m, &Shape::Divisor { degree: e }).map_err(|e| e.to_string())?;
            if pushed != divisor_insertion(m, e) {
                return Err(format!("divisor of degree {e}, order {m}: {pushed:?}"));
            }
        }
        let pushed = lci_insertion_via_theorem(m, &Shape::Point).map_err(|e| e.to_string())?;
        if pushed != point_insertion(m) {
            return Err(format!("point, order {m}: {pushed:?}"));
        }
    }
    Ok(())
}
