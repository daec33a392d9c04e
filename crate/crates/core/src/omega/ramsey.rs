//! Universality through the transition semigroup, independent of any
//! complementation. Each finite word is abstracted by a matrix over {0,1,2}
//! recording, for each pair of states, whether there is no run, a run, or a
//! run that is good for the acceptance condition.

use std::collections::HashMap;

use super::{Acceptance, OmegaAutomaton, STATE_CAP};
use crate::automaton::{LassoWord, Letter};
use crate::error::{Error, Result};

type Matrix = Vec<u8>;

struct Semiring {
    n: usize,
    // Büchi: a path is good if it contains an accepting edge; coBüchi: if all
    // of its edges are accepting.
    all_good: bool,
}

impl Semiring {
    fn combine(&self, x: u8, y: u8) -> u8 {
        if x == 0 || y == 0 {
            0
        } else if self.all_good {
            x.min(y)
        } else {
            x.max(y)
        }
    }

    fn mul(&self, a: &Matrix, b: &Matrix) -> Matrix {
        let n = self.n;
        let mut c = vec![0u8; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = a[i * n + k];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = self.combine(x, b[k * n + j]);
                    if v > c[i * n + j] {
                        c[i * n + j] = v;
                    }
                }
            }
        }
        c
    }
}

/// `None` when every infinite word is accepted, otherwise a rejected lasso.
pub fn ramsey_universality(b: &OmegaAutomaton) -> Result<Option<LassoWord>> {
    let b = match b.acceptance() {
        Acceptance::Reachability => b.to_buchi(),
        _ => b.clone(),
    };
    let n = b.num_states();
    let nl = b.num_letters();
    let ring = Semiring {
        n,
        all_good: b.acceptance() == Acceptance::CoBuchi,
    };
    let mut letters = vec![vec![0u8; n * n]; nl];
    for t in b.transitions() {
        let v = match b.acceptance() {
            Acceptance::Safety => 2,
            _ if t.accepting => 2,
            _ => 1,
        };
        let cell = &mut letters[t.letter][t.source * n + t.target];
        *cell = (*cell).max(v);
    }
    // closure under right multiplication by letters, remembering a word
    let mut index: HashMap<Matrix, usize> = HashMap::new();
    let mut mats: Vec<(Matrix, Vec<Letter>)> = Vec::new();
    for (s, m) in letters.iter().enumerate() {
        if !index.contains_key(m) {
            index.insert(m.clone(), mats.len());
            mats.push((m.clone(), vec![s]));
        }
    }
    let mut i = 0;
    while i < mats.len() {
        for (s, l) in letters.iter().enumerate() {
            let m = ring.mul(&mats[i].0, l);
            if !index.contains_key(&m) {
                if mats.len() >= STATE_CAP {
                    return Err(Error::CapExceeded(format!("more than {STATE_CAP} word classes")));
                }
                let mut w = mats[i].1.clone();
                w.push(s);
                index.insert(m.clone(), mats.len());
                mats.push((m, w));
            }
        }
        i += 1;
    }
    let init = b.initial();
    let idempotents: Vec<usize> = (0..mats.len()).filter(|&e| ring.mul(&mats[e].0, &mats[e].0) == mats[e].0).collect();
    for (s, (sm, sw)) in mats.iter().enumerate() {
        for &e in &idempotents {
            let em = &mats[e].0;
            if index.get(&ring.mul(sm, em)) != Some(&s) {
                continue;
            }
            let accepted = (0..n).any(|q| sm[init * n + q] >= 1 && em[q * n + q] == 2);
            if !accepted {
                return Ok(Some(LassoWord::new(sw.clone(), mats[e].1.clone())?));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::{lasso_member, OmegaTransition};
    use super::*;

    fn ab() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    fn t(source: usize, letter: usize, target: usize, accepting: bool) -> OmegaTransition {
        OmegaTransition {
            source,
            letter,
            target,
            accepting,
        }
    }

    #[test]
    fn universal_automata() {
        let all = OmegaAutomaton::new(ab(), 1, 0, vec![t(0, 0, 0, true), t(0, 1, 0, true)], Acceptance::Buchi).unwrap();
        assert_eq!(ramsey_universality(&all).unwrap(), None);
        // nondeterministic: either infinitely many a or finitely many a
        let b = OmegaAutomaton::new(
            ab(),
            3,
            0,
            vec![
                t(0, 0, 1, true),
                t(0, 1, 1, false),
                t(1, 0, 1, true),
                t(1, 1, 1, false),
                t(0, 0, 2, false),
                t(0, 1, 2, false),
                t(2, 0, 2, false),
                t(2, 1, 2, false),
                t(2, 1, 2, true),
            ],
            Acceptance::Buchi,
        )
        .unwrap();
        // state 2 accepts infinitely many b, state 1 infinitely many a
        assert_eq!(ramsey_universality(&b).unwrap(), None);
    }

    #[test]
    fn rejected_word_is_a_real_counterexample() {
        let b = OmegaAutomaton::new(ab(), 1, 0, vec![t(0, 0, 0, true), t(0, 1, 0, false)], Acceptance::Buchi).unwrap();
        let w = ramsey_universality(&b).unwrap().unwrap();
        assert!(!lasso_member(&b, &w).unwrap());
        let c = OmegaAutomaton::new(ab(), 1, 0, vec![t(0, 0, 0, true), t(0, 1, 0, false)], Acceptance::CoBuchi).unwrap();
        let w = ramsey_universality(&c).unwrap().unwrap();
        assert!(!lasso_member(&c, &w).unwrap());
        let s = OmegaAutomaton::new(ab(), 1, 0, vec![t(0, 0, 0, true)], Acceptance::Safety).unwrap();
        let w = ramsey_universality(&s).unwrap().unwrap();
        assert!(!lasso_member(&s, &w).unwrap());
    }
}
