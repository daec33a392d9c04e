mod common;

use common::{deterministic_value, distance_min_mean, nfa_universal_by_enumeration};
use proptest::prelude::*;
use quantsafe::gen::{random_distance, random_nfa, seeded_automaton, GenParams};
use quantsafe::limitedness::{brute_force_growth, unlimited_witness};
use quantsafe::omega::{nfa_universal, ramsey_universality, threshold_automaton, universality};
use quantsafe::{
    evaluate_lasso, is_limited, parse_automaton, safety_closure_inf, serialize_automaton, top_value, Evaluator,
    LassoWord, Rational, ValueFunction,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn valfn_strategy() -> impl Strategy<Value = ValueFunction> {
    prop_oneof![
        Just(ValueFunction::Inf),
        Just(ValueFunction::Sup),
        Just(ValueFunction::LimInf),
        Just(ValueFunction::LimSup),
        Just(ValueFunction::LimInfAvg),
        Just(ValueFunction::LimSupAvg),
        (1i128..4, 2i128..5).prop_map(|(p, q)| ValueFunction::DSum(Rational::new(p.min(q - 1), q))),
    ]
}

fn finite_valfn() -> impl Strategy<Value = ValueFunction> {
    prop_oneof![
        Just(ValueFunction::Inf),
        Just(ValueFunction::Sup),
        Just(ValueFunction::LimInf),
        Just(ValueFunction::LimSup),
    ]
}

fn lasso_strategy(letters: usize) -> impl Strategy<Value = LassoWord> {
    (
        prop::collection::vec(0..letters, 0..4),
        prop::collection::vec(0..letters, 1..4),
    )
        .prop_map(|(u, v)| LassoWord::new(u, v).unwrap())
}

fn small_weights() -> Vec<Rational> {
    vec![Rational::new(-1, 2), Rational::ZERO, Rational::ONE, Rational::new(7, 3)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lasso_representations_denote_the_same_word(
        u in prop::collection::vec(0usize..3, 0..5),
        v in prop::collection::vec(0usize..3, 1..4),
        k in 1usize..3,
    ) {
        let w = LassoWord::new(u.clone(), v.clone()).unwrap();
        let mut u2 = u.clone();
        u2.extend(&v);
        let w2 = LassoWord::new(u2, v.repeat(k)).unwrap();
        prop_assert_eq!(&w, &w2);
        let raw: Vec<usize> = u.iter().chain(v.iter().cycle()).take(30).copied().collect();
        let norm: Vec<usize> = (0..30).map(|i| w.nth(i)).collect();
        prop_assert_eq!(raw, norm);
    }

    #[test]
    fn deterministic_evaluation_matches_the_definitions(
        seed in any::<u64>(),
        states in 1usize..5,
        vf in valfn_strategy(),
        w in lasso_strategy(2),
    ) {
        let p = GenParams::new(states, 2, vf).deterministic(true).weights(small_weights());
        let a = seeded_automaton(seed, &p).unwrap();
        prop_assert_eq!(evaluate_lasso(&a, &w).unwrap(), deterministic_value(&a, &w));
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>(), states in 1usize..6, vf in valfn_strategy()) {
        let p = GenParams::new(states, 3, vf).weights(small_weights());
        let a = seeded_automaton(seed, &p).unwrap();
        prop_assert_eq!(parse_automaton(&serialize_automaton(&a)).unwrap(), a);
    }

    #[test]
    fn top_value_bounds_every_lasso(seed in any::<u64>(), states in 1usize..5, vf in valfn_strategy()) {
        let a = seeded_automaton(seed, &GenParams::new(states, 2, vf)).unwrap();
        let (top, w) = top_value(&a);
        let ev = Evaluator::new(&a);
        prop_assert_eq!(ev.evaluate(&w).unwrap(), top);
        for w in LassoWord::enumerate(2, 2, 2) {
            prop_assert!(ev.evaluate(&w).unwrap() <= top);
        }
    }

    #[test]
    fn closure_dominates(seed in any::<u64>(), states in 1usize..5, vf in valfn_strategy(), w in lasso_strategy(2)) {
        let a = seeded_automaton(seed, &GenParams::new(states, 2, vf)).unwrap();
        let c = safety_closure_inf(&a).unwrap();
        prop_assert!(evaluate_lasso(&c, &w).unwrap() >= evaluate_lasso(&a, &w).unwrap());
        let (top, _) = top_value(&a);
        prop_assert!(evaluate_lasso(&c, &w).unwrap() <= top);
    }

    #[test]
    fn threshold_automata_agree_with_evaluation(
        seed in any::<u64>(),
        states in 1usize..4,
        vf in finite_valfn(),
        w in lasso_strategy(2),
    ) {
        let a = seeded_automaton(seed, &GenParams::new(states, 2, vf)).unwrap();
        let x = evaluate_lasso(&a, &w).unwrap();
        for v in a.weights() {
            let t = threshold_automaton(&a, v).unwrap();
            prop_assert_eq!(quantsafe::omega::lasso_member(&t, &w).unwrap(), x >= v);
        }
    }

    #[test]
    fn two_universality_checks_agree(seed in any::<u64>(), states in 1usize..4, vf in finite_valfn()) {
        let a = seeded_automaton(seed, &GenParams::new(states, 2, vf)).unwrap();
        for v in a.weights() {
            let t = threshold_automaton(&a, v).unwrap();
            let by_complement = universality(&t).unwrap();
            let by_ramsey = ramsey_universality(&t).unwrap();
            prop_assert_eq!(by_complement.is_none(), by_ramsey.is_none());
            for w in by_complement.iter().chain(by_ramsey.iter()) {
                prop_assert!(evaluate_lasso(&a, w).unwrap() < v);
            }
        }
    }

    #[test]
    fn nfa_universality_matches_subset_exploration(seed in any::<u64>(), states in 1usize..5) {
        let n = random_nfa(&mut ChaCha8Rng::seed_from_u64(seed), states).unwrap();
        match nfa_universal(&n) {
            quantsafe::omega::NfaUniversality::Universal => prop_assert!(nfa_universal_by_enumeration(&n)),
            quantsafe::omega::NfaUniversality::Rejects(w) => {
                prop_assert!(!n.accepts(&w));
                prop_assert!(!nfa_universal_by_enumeration(&n));
            }
        }
    }

    #[test]
    fn limitedness_witnesses_and_growth(seed in any::<u64>(), states in 1usize..4, det in any::<bool>()) {
        let d = random_distance(&mut ChaCha8Rng::seed_from_u64(seed), states, 2, det).unwrap();
        let growth = brute_force_growth(&d, 6).unwrap();
        // growth is nondecreasing for total automata with all states accepting
        prop_assert!(growth.windows(2).all(|p| p[0] <= p[1]));
        if !is_limited(&d).unwrap() {
            let w = unlimited_witness(&d).unwrap();
            prop_assert!(w.min_mean >= Rational::new(1, w.bound as i128));
            prop_assert_eq!(distance_min_mean(&d, &w.word), Some(w.min_mean));
        }
    }
}
