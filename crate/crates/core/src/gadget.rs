//! Reduction from NFA universality to constancy: the automaton built from an
//! NFA over {a, b} is constant iff the NFA accepts every finite word.

use crate::automaton::{Automaton, Transition, ValueFunction};
use crate::error::{Error, Result};
use crate::omega::Nfa;
use crate::rational::Rational;

/// The gadget over {a, b, #}. Letters a, b follow the NFA with weight 1; `#`
/// moves accepting states to a 1-sink and the others to a 0-sink. Missing NFA
/// moves go to a rejecting sink so the result is total. For Sup see
/// [`sup_gadget`].
pub fn gadget(n: &Nfa, valfn: ValueFunction) -> Result<Automaton> {
    check_ab(n)?;
    if valfn == ValueFunction::Sup {
        return sup_gadget(n);
    }
    valfn.validate()?;
    let m = n.num_states();
    let (dead, zero, one) = (m, m + 1, m + 2);
    let mut states: Vec<String> = n.states().to_vec();
    states.extend(["dead".to_string(), "z0".to_string(), "z1".to_string()]);
    let mut ts = Vec::new();
    let mut add = |source, letter, weight: i64, target| {
        ts.push(Transition {
            source,
            letter,
            weight: Rational::from(weight),
            target,
        })
    };
    for &(p, s, q) in n.transitions() {
        add(p, s, 1, q);
    }
    for q in 0..=m {
        for s in 0..2 {
            if q == dead || !n.transitions().iter().any(|&(p, l, _)| p == q && l == s) {
                add(q, s, 1, dead);
            }
        }
        if q < m && n.is_accepting(q) {
            add(q, 2, 1, one);
        } else {
            add(q, 2, 0, zero);
        }
    }
    for s in 0..3 {
        add(zero, s, 0, zero);
        add(one, s, 1, one);
    }
    let initial = with_single_initial(n, &mut states, &mut ts)?;
    Automaton::new(alphabet(), states, initial, ts, valfn)
}

/// Sup variant. Sup values are decided by finite prefixes, so the #-free words
/// must reach the top after a bounded number of letters: after `2^|Q|` letters
/// (a bound on the shortest rejected word) the gadget moves to the 1-sink.
/// Before that, `#` compares acceptance as in [`gadget`] and a, b weigh 0.
pub fn sup_gadget(n: &Nfa) -> Result<Automaton> {
    check_ab(n)?;
    let m = n.num_states() + 1;
    if m > 12 {
        return Err(Error::CapExceeded(format!(
            "the Sup gadget counts to 2^{} and supports at most 11 NFA states",
            m - 1
        )));
    }
    let bound = 1usize << (m - 1);
    // state (q, k) for q in Q ∪ {dead} and k in 0..=bound, then the two sinks
    let id = |q: usize, k: usize| q * (bound + 1) + k;
    let zero = m * (bound + 1);
    let one = zero + 1;
    let mut states = Vec::new();
    for q in 0..m {
        let name = if q + 1 == m { "dead" } else { n.states()[q].as_str() };
        for k in 0..=bound {
            states.push(format!("{name}@{k}"));
        }
    }
    states.extend(["z0".to_string(), "z1".to_string()]);
    let dead = m - 1;
    let mut ts = Vec::new();
    let mut add = |source, letter, weight: i64, target| {
        ts.push(Transition {
            source,
            letter,
            weight: Rational::from(weight),
            target,
        })
    };
    for q in 0..m {
        for k in 0..=bound {
            for s in 0..2 {
                if k == bound {
                    add(id(q, k), s, 1, one);
                    continue;
                }
                let succ: Vec<usize> = if q == dead {
                    vec![dead]
                } else {
                    n.transitions()
                        .iter()
                        .filter(|&&(p, l, _)| p == q && l == s)
                        .map(|&(_, _, r)| r)
                        .collect()
                };
                if succ.is_empty() {
                    add(id(q, k), s, 0, id(dead, k + 1));
                }
                for r in succ {
                    add(id(q, k), s, 0, id(r, k + 1));
                }
            }
            if q != dead && n.is_accepting(q) {
                add(id(q, k), 2, 1, one);
            } else {
                add(id(q, k), 2, 0, zero);
            }
        }
    }
    for s in 0..3 {
        add(zero, s, 0, zero);
        add(one, s, 1, one);
    }
    // several NFA initial states: a fresh initial state copying their moves
    let mut initial = id(n.initial()[0], 0);
    if n.initial().len() > 1 {
        let fresh = states.len();
        states.push("init".to_string());
        let copies: Vec<Transition> = ts
            .iter()
            .filter(|t| n.initial().iter().any(|&q| t.source == id(q, 0)))
            .map(|t| Transition { source: fresh, ..*t })
            .collect();
        ts.extend(copies);
        initial = fresh;
    }
    let a = Automaton::new(alphabet(), states, initial, ts, ValueFunction::Sup)?;
    Ok(a.trim().0)
}

fn alphabet() -> Vec<String> {
    vec!["a".into(), "b".into(), "#".into()]
}

fn check_ab(n: &Nfa) -> Result<()> {
    if n.alphabet() != ["a", "b"] {
        return Err(Error::Invalid(format!(
            "the gadget needs an NFA over `a b`, got `{}`",
            n.alphabet().join(" ")
        )));
    }
    Ok(())
}

/// Merges several initial states into a fresh one copying their moves.
fn with_single_initial(n: &Nfa, states: &mut Vec<String>, ts: &mut Vec<Transition>) -> Result<usize> {
    if n.initial().len() == 1 {
        return Ok(n.initial()[0]);
    }
    let fresh = states.len();
    states.push("init".to_string());
    let copies: Vec<Transition> = ts
        .iter()
        .filter(|t| n.initial().contains(&t.source))
        .map(|t| Transition { source: fresh, ..*t })
        .collect();
    ts.extend(copies);
    Ok(fresh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::LassoWord;
    use crate::decide::is_constant;
    use crate::eval::evaluate_lasso;
    use crate::format::parse_nfa;

    const UNIVERSAL: &str = "initial: s\naccepting: s\ns -- a,b --> s\n";
    const REJECTS_B: &str = "initial: s\naccepting: s\ns -- a --> s\n";

    #[test]
    fn universal_nfa_gives_constant_gadget() {
        let n = parse_nfa(UNIVERSAL).unwrap();
        for tag in ValueFunction::TAGS {
            let vf = ValueFunction::from_tag(tag, (tag == "dsum").then(|| Rational::new(1, 2))).unwrap();
            let g = gadget(&n, vf).unwrap();
            assert_eq!(g.alphabet(), ["a", "b", "#"]);
            assert!(is_constant(&g).unwrap().answer, "{tag}");
        }
    }

    #[test]
    fn rejecting_nfa_gives_hash_witness() {
        let n = parse_nfa(REJECTS_B).unwrap();
        for tag in ValueFunction::TAGS {
            let vf = ValueFunction::from_tag(tag, (tag == "dsum").then(|| Rational::new(1, 2))).unwrap();
            let g = gadget(&n, vf).unwrap();
            let v = is_constant(&g).unwrap();
            assert!(!v.answer, "{tag}");
            let w = v.lasso().unwrap();
            assert!(w.prefix().contains(&2) || w.cycle().contains(&2), "{tag}");
        }
    }

    #[test]
    fn sup_gadget_values() {
        let n = parse_nfa(REJECTS_B).unwrap();
        let g = sup_gadget(&n).unwrap();
        let al = g.alphabet().to_vec();
        let v = |u: &str, c: &str| evaluate_lasso(&g, &LassoWord::parse(&al, u, c).unwrap()).unwrap();
        assert_eq!(v("b #", "a"), Rational::ZERO);
        assert_eq!(v("a #", "a"), Rational::ONE);
        assert_eq!(v("", "a"), Rational::ONE);
    }
}
