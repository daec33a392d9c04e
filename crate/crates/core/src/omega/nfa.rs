//! Finite-word automata and antichain universality.

use std::collections::VecDeque;

use crate::automaton::{Letter, StateId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: Vec<StateId>,
    accepting: Vec<bool>,
    transitions: Vec<(StateId, Letter, StateId)>,
}

impl Nfa {
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<String>,
        initial: Vec<StateId>,
        accepting: Vec<bool>,
        transitions: Vec<(StateId, Letter, StateId)>,
    ) -> Result<Self> {
        if alphabet.is_empty() || states.is_empty() {
            return Err(Error::Invalid("NFA needs a letter and a state".into()));
        }
        if initial.is_empty() {
            return Err(Error::Invalid("NFA needs an initial state".into()));
        }
        if accepting.len() != states.len() {
            return Err(Error::Invalid("accepting flags do not match the states".into()));
        }
        let n = states.len();
        for &q in &initial {
            if q >= n {
                return Err(Error::UnknownState(format!("#{q}")));
            }
        }
        for &(p, s, q) in &transitions {
            if p >= n || q >= n {
                return Err(Error::UnknownState(format!("#{}", p.max(q))));
            }
            if s >= alphabet.len() {
                return Err(Error::UnknownLetter(format!("#{s}")));
            }
        }
        Ok(Nfa {
            alphabet,
            states,
            initial,
            accepting,
            transitions,
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn transitions(&self) -> &[(StateId, Letter, StateId)] {
        &self.transitions
    }

    /// Membership of a finite word.
    pub fn accepts(&self, word: &[Letter]) -> bool {
        let mut cur = vec![false; self.num_states()];
        for &q in &self.initial {
            cur[q] = true;
        }
        for &s in word {
            let mut next = vec![false; self.num_states()];
            for &(p, l, q) in &self.transitions {
                if l == s && cur[p] {
                    next[q] = true;
                }
            }
            cur = next;
        }
        (0..self.num_states()).any(|q| cur[q] && self.accepting[q])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NfaUniversality {
    Universal,
    /// A shortest rejected word.
    Rejects(Vec<Letter>),
}

impl NfaUniversality {
    pub fn is_universal(&self) -> bool {
        matches!(self, NfaUniversality::Universal)
    }
}

/// Universality by breadth-first subset construction. A subset is kept only if
/// no previously visited subset is contained in it: smaller subsets reject at
/// least the words larger ones reject.
pub fn nfa_universal(n: &Nfa) -> NfaUniversality {
    let nq = n.num_states();
    let nl = n.alphabet.len();
    let mut succ = vec![vec![Vec::new(); nl]; nq];
    for &(p, s, q) in &n.transitions {
        succ[p][s].push(q);
    }
    let to_set = |v: &[bool]| -> Vec<usize> { (0..nq).filter(|&q| v[q]).collect() };
    let mut start = vec![false; nq];
    for &q in &n.initial {
        start[q] = true;
    }
    let rejecting = |v: &[bool]| !(0..nq).any(|q| v[q] && n.accepting[q]);
    if rejecting(&start) {
        return NfaUniversality::Rejects(Vec::new());
    }
    let mut visited: Vec<Vec<usize>> = vec![to_set(&start)];
    // (subset, parent index, letter)
    let mut nodes: Vec<(Vec<bool>, usize, Letter)> = vec![(start, usize::MAX, 0)];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for s in 0..nl {
            let mut next = vec![false; nq];
            for q in 0..nq {
                if nodes[i].0[q] {
                    for &t in &succ[q][s] {
                        next[t] = true;
                    }
                }
            }
            let set = to_set(&next);
            if visited.iter().any(|v| v.iter().all(|q| next[*q])) {
                continue;
            }
            let rej = rejecting(&next);
            nodes.push((next, i, s));
            let id = nodes.len() - 1;
            if rej {
                let mut word = Vec::new();
                let mut cur = id;
                while nodes[cur].1 != usize::MAX {
                    word.push(nodes[cur].2);
                    cur = nodes[cur].1;
                }
                word.reverse();
                return NfaUniversality::Rejects(word);
            }
            visited.retain(|v| !set.iter().all(|q| v.contains(q)));
            visited.push(set);
            queue.push_back(id);
        }
    }
    NfaUniversality::Universal
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nfa(n: usize, trans: &[(usize, usize, usize)], accepting: &[usize]) -> Nfa {
        let mut acc = vec![false; n];
        for &q in accepting {
            acc[q] = true;
        }
        Nfa::new(
            vec!["a".into(), "b".into()],
            (0..n).map(|i| format!("s{i}")).collect(),
            vec![0],
            acc,
            trans.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn complete_all_accepting_is_universal() {
        let n = nfa(1, &[(0, 0, 0), (0, 1, 0)], &[0]);
        assert!(nfa_universal(&n).is_universal());
    }

    #[test]
    fn a_loop_only_rejects_b() {
        let n = nfa(1, &[(0, 0, 0)], &[0]);
        assert_eq!(nfa_universal(&n), NfaUniversality::Rejects(vec![1]));
    }

    #[test]
    fn shortest_rejected_word_with_accepting_set() {
        let n = nfa(3, &[(0, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 2), (1, 1, 2)], &[0, 2]);
        let r = nfa_universal(&n);
        // s0 is accepting and complete
        assert!(r.is_universal());
        let n = nfa(3, &[(0, 0, 1), (0, 1, 1), (1, 0, 2), (1, 1, 1), (2, 0, 2), (2, 1, 2)], &[0, 2]);
        assert_eq!(nfa_universal(&n), NfaUniversality::Rejects(vec![0]));
        assert!(!n.accepts(&[1]));
        assert!(n.accepts(&[1, 0]));
    }

    #[test]
    fn rejects_empty_word() {
        let n = nfa(1, &[(0, 0, 0), (0, 1, 0)], &[]);
        assert_eq!(nfa_universal(&n), NfaUniversality::Rejects(vec![]));
    }
}
