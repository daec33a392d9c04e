//! Seeded random automata for cross-checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Automaton, Transition, ValueFunction};
use crate::error::{Error, Result};
use crate::limitedness::{DistanceAutomaton, DistanceTransition};
use crate::omega::Nfa;
use crate::rational::Rational;

pub const MAX_GEN_STATES: usize = 64;
pub const MAX_GEN_LETTERS: usize = 26;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub states: usize,
    pub letters: usize,
    pub weights: Vec<Rational>,
    pub valfn: ValueFunction,
    pub deterministic: bool,
    /// Upper bound on successors per (state, letter) when nondeterministic.
    pub max_branching: usize,
}

impl GenParams {
    pub fn new(states: usize, letters: usize, valfn: ValueFunction) -> Self {
        GenParams {
            states,
            letters,
            weights: (0..=2).map(Rational::from).collect(),
            valfn,
            deterministic: false,
            max_branching: 2,
        }
    }

    pub fn deterministic(mut self, yes: bool) -> Self {
        self.deterministic = yes;
        self
    }

    pub fn weights(mut self, weights: Vec<Rational>) -> Self {
        self.weights = weights;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.states == 0 || self.states > MAX_GEN_STATES {
            return Err(Error::Invalid(format!("states must be in 1..={MAX_GEN_STATES}")));
        }
        if self.letters == 0 || self.letters > MAX_GEN_LETTERS {
            return Err(Error::Invalid(format!("letters must be in 1..={MAX_GEN_LETTERS}")));
        }
        if self.weights.is_empty() {
            return Err(Error::Invalid("weight set must be nonempty".into()));
        }
        if self.max_branching == 0 {
            return Err(Error::Invalid("branching must be positive".into()));
        }
        self.valfn.validate()
    }
}

pub fn letter_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

fn state_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

/// Successor lists per (state, letter): one target when deterministic, else
/// between one and `max_branching` distinct targets.
fn targets<R: Rng>(rng: &mut R, n: usize, deterministic: bool, max_branching: usize) -> Vec<usize> {
    if deterministic {
        return vec![rng.gen_range(0..n)];
    }
    let k = rng.gen_range(1..=max_branching.min(n));
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all.sort_unstable();
    all
}

pub fn random_automaton<R: Rng>(rng: &mut R, p: &GenParams) -> Result<Automaton> {
    p.validate()?;
    let mut ts = Vec::new();
    for q in 0..p.states {
        for s in 0..p.letters {
            for target in targets(rng, p.states, p.deterministic, p.max_branching) {
                ts.push(Transition {
                    source: q,
                    letter: s,
                    weight: *p.weights.choose(rng).expect("nonempty"),
                    target,
                });
            }
        }
    }
    Automaton::new(letter_names(p.letters), state_names(p.states), 0, ts, p.valfn)
}

pub fn seeded_automaton(seed: u64, p: &GenParams) -> Result<Automaton> {
    random_automaton(&mut ChaCha8Rng::seed_from_u64(seed), p)
}

/// Random NFA over {a, b}, possibly incomplete.
pub fn random_nfa<R: Rng>(rng: &mut R, states: usize) -> Result<Nfa> {
    let mut ts = Vec::new();
    for q in 0..states {
        for s in 0..2 {
            for t in 0..states {
                if rng.gen_bool(0.4) {
                    ts.push((q, s, t));
                }
            }
        }
    }
    let accepting = (0..states).map(|_| rng.gen_bool(0.6)).collect();
    Nfa::new(letter_names(2), state_names(states), vec![0], accepting, ts)
}

/// Random total distance automaton with all states accepting.
pub fn random_distance<R: Rng>(rng: &mut R, states: usize, letters: usize, deterministic: bool) -> Result<DistanceAutomaton> {
    let mut ts = Vec::new();
    for q in 0..states {
        for s in 0..letters {
            for target in targets(rng, states, deterministic, 2) {
                ts.push(DistanceTransition {
                    source: q,
                    letter: s,
                    weight: rng.gen_range(0..=1),
                    target,
                });
            }
        }
    }
    DistanceAutomaton::new(letter_names(letters), state_names(states), vec![0], vec![true; states], ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize_automaton;

    #[test]
    fn seeded_generation_is_reproducible() {
        let p = GenParams::new(3, 2, ValueFunction::LimSup).deterministic(true);
        let a = serialize_automaton(&seeded_automaton(7, &p).unwrap());
        let b = serialize_automaton(&seeded_automaton(7, &p).unwrap());
        assert_eq!(a, b);
        assert!(seeded_automaton(7, &p).unwrap().is_deterministic());
    }

    #[test]
    fn weights_stay_in_the_set() {
        let p = GenParams::new(4, 2, ValueFunction::Inf);
        for seed in 0..20 {
            let a = seeded_automaton(seed, &p).unwrap();
            assert!(a.weights().iter().all(|w| p.weights.contains(w)));
        }
    }

    #[test]
    fn invalid_params() {
        assert!(seeded_automaton(0, &GenParams::new(0, 2, ValueFunction::Inf)).is_err());
        assert!(seeded_automaton(0, &GenParams::new(2, 2, ValueFunction::Inf).weights(vec![])).is_err());
    }
}
