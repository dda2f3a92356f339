mod support;

use naive_gw::combinatorics::partitions_of;
use naive_gw::engine::{CorrelatorKey, Engine, Tau};
use naive_gw::hurwitz::{
    completed_cycle_hurwitz, shifted_power_sum, transposition_factorization_count, HurwitzSpec,
};
use naive_gw::mirror::j_function;
use naive_gw::Rational;
use proptest::prelude::*;

#[test]
fn dimension_gate_zero_on_100_brackets() {
    support::dimension_gate(100).unwrap();
}

#[test]
fn permutation_invariance_on_50_brackets() {
    support::permutation_invariance(50).unwrap();
}

#[test]
fn trr_companions_on_20_brackets() {
    support::trr_companion_independence(20).unwrap();
}

#[test]
fn tangency_pushforward_through_order_8() {
    support::theorem_matches_closed_forms(8).unwrap();
}

fn eval(engine: &Engine, degree: usize, taus: Vec<Tau>) -> Rational {
    engine.evaluate(&CorrelatorKey::new(degree, taus)).unwrap()
}

fn lowered(taus: &[Tau], i: usize, extra_codim: usize) -> Option<Vec<Tau>> {
    let t = taus[i];
    if t.psi == 0 || t.codim + extra_codim > 2 {
        return None;
    }
    let mut out = taus.to_vec();
    out[i] = Tau::new(t.psi - 1, t.codim + extra_codim);
    Some(out)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn string_equation(key in support::gated_bracket(2, 2, 5)) {
        let engine = Engine::new();
        let taus = key.insertions().to_vec();
        let mut with_unit = taus.clone();
        with_unit.push(Tau::new(0, 0));
        let lhs = eval(&engine, key.degree, with_unit);
        let rhs: Rational = (0..taus.len())
            .filter_map(|i| lowered(&taus, i, 0))
            .map(|t| eval(&engine, key.degree, t))
            .sum();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dilaton_equation(key in support::gated_bracket(2, 2, 5)) {
        let engine = Engine::new();
        let taus = key.insertions().to_vec();
        let mut with_dilaton = taus.clone();
        with_dilaton.push(Tau::new(1, 0));
        let lhs = eval(&engine, key.degree, with_dilaton);
        let rhs = Rational::from(taus.len() as i64 - 2) * eval(&engine, key.degree, taus);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn divisor_equation(key in support::gated_bracket(2, 2, 5)) {
        prop_assume!(key.degree > 0 || key.len() >= 3);
        let engine = Engine::new();
        let taus = key.insertions().to_vec();
        let mut with_h = taus.clone();
        with_h.push(Tau::new(0, 1));
        let lhs = eval(&engine, key.degree, with_h);
        let mut rhs = Rational::from(key.degree) * eval(&engine, key.degree, taus.clone());
        for i in 0..taus.len() {
            if let Some(t) = lowered(&taus, i, 1) {
                rhs += eval(&engine, key.degree, t);
            }
        }
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn one_point_descendents_match_j_function() {
    let engine = Engine::new();
    let table = j_function(3);
    for d in 1..=3 {
        for codim in 0..=2 {
            let psi = 3 * d - codim;
            assert_eq!(
                engine.one_point_descendent(d, psi, codim).unwrap(),
                table.one_point_descendent(d, psi, codim),
                "degree {d}, tau_{psi}(H^{codim})"
            );
        }
    }
}

#[test]
fn hurwitz_matches_factorization_oracle() {
    for d in 1..=4 {
        for n in 0..=4 {
            let spec = HurwitzSpec::new(0, d, vec![2; n]).unwrap();
            assert_eq!(
                completed_cycle_hurwitz(&spec).unwrap(),
                transposition_factorization_count(d, n).unwrap(),
                "d = {d}, n = {n}"
            );
        }
    }
}

#[test]
fn p2_is_twice_content_sum() {
    for size in 0..=6 {
        for lambda in partitions_of(size) {
            assert_eq!(
                shifted_power_sum(2, &lambda).unwrap(),
                Rational::from(2 * lambda.content_sum()),
                "{lambda}"
            );
        }
    }
}
