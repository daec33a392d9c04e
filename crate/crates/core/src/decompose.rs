//! Safety-liveness decomposition `A = min(B, C)` with B safe and C live, and
//! the determinization front-ends for nondeterministic Sup and LimInf inputs.

use std::collections::HashMap;

use crate::automaton::{Automaton, StateId, Transition, ValueFunction};
use crate::closure::{safety_closure_inf, safety_closure_val};
use crate::error::{Error, Result};
use crate::eval::{monotone_form, top_value};
use crate::omega::{determinize_cobuchi, threshold_automaton, OmegaAutomaton, STATE_CAP};
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Safety component.
    pub safety: Automaton,
    /// Liveness component.
    pub liveness: Automaton,
    /// The automaton actually decomposed (monotone form for Sup inputs).
    pub source: Automaton,
    pub top: Rational,
}

pub fn decompose(a: &Automaton) -> Result<Decomposition> {
    if !a.is_deterministic() {
        return Err(match a.valfn() {
            ValueFunction::LimSup => Error::OpenProblem(
                "safety-liveness decomposition of nondeterministic LimSup automata is open: \
                 they cannot always be determinized"
                    .into(),
            ),
            ValueFunction::Sup | ValueFunction::LimInf => {
                Error::NonDeterministic(format!("decompose (use determinize for {})", a.valfn()))
            }
            _ => Error::NonDeterministic("decompose".into()),
        });
    }
    let (top, _) = top_value(a);
    match a.valfn() {
        ValueFunction::Inf | ValueFunction::DSum(_) => Ok(Decomposition {
            safety: a.clone(),
            liveness: Automaton::constant(a.alphabet().to_vec(), top, a.valfn())?,
            source: a.clone(),
            top,
        }),
        ValueFunction::Sup => {
            let m = monotone_form(a, ValueFunction::LimSup)?;
            let b = safety_closure_inf(&m)?;
            let c = top_where_equal(&m, &b, top).with_valfn(ValueFunction::Sup)?;
            Ok(Decomposition {
                safety: b,
                liveness: c,
                source: m.with_valfn(ValueFunction::Sup)?,
                top,
            })
        }
        ValueFunction::LimInf | ValueFunction::LimSup => {
            let b = safety_closure_val(a)?;
            let c = top_where_equal(a, &b, top);
            Ok(Decomposition {
                safety: b,
                liveness: c,
                source: a.clone(),
                top,
            })
        }
        other => Err(Error::unsupported("decompose", other)),
    }
}

/// `a` with every transition whose weight agrees with the corresponding
/// transition of `b` reweighted to `top`.
fn top_where_equal(a: &Automaton, b: &Automaton, top: Rational) -> Automaton {
    a.map_weights(|i, t| if t.weight == b.transitions()[i].weight { top } else { t.weight })
}

/// Subset construction for Sup automata tracking, per state, the best running
/// maximum; the emitted weight is the largest tracked maximum.
pub fn determinize_sup(a: &Automaton) -> Result<Automaton> {
    if a.valfn() != ValueFunction::Sup {
        return Err(Error::unsupported("determinize_sup", a.valfn()));
    }
    let n = a.num_states();
    type Mapping = Vec<Option<Rational>>;
    let mut start: Mapping = vec![None; n];
    // nothing read yet: the smallest weight is neutral for max
    start[a.initial()] = Some(a.min_weight());
    explore(a, start, ValueFunction::Sup, |maps, i, s| {
        let mut next: Mapping = vec![None; n];
        for (q, entry) in maps[i].iter().enumerate() {
            let Some(v) = entry else { continue };
            for t in a.successors(q, s) {
                let m = (*v).max(t.weight);
                let slot = &mut next[t.target];
                if slot.is_none_or(|x| m > x) {
                    *slot = Some(m);
                }
            }
        }
        let weight = next.iter().flatten().max().copied().expect("total automaton");
        (next, weight)
    })
    .map(|(aut, maps)| rename(aut, &maps, |m| mapping_name(a, m)))
}

fn mapping_name(a: &Automaton, m: &[Option<Rational>]) -> String {
    let parts: Vec<String> = m
        .iter()
        .enumerate()
        .filter_map(|(q, v)| v.map(|v| format!("{}:{}", a.state_name(q), v)))
        .collect();
    format!("{{{}}}", parts.join(","))
}

/// Generic worklist determinization: `step(states, i, letter)` gives the key
/// of the successor and the emitted weight.
fn explore<K: Clone + Eq + std::hash::Hash>(
    a: &Automaton,
    start: K,
    valfn: ValueFunction,
    mut step: impl FnMut(&[K], usize, usize) -> (K, Rational),
) -> Result<(Automaton, Vec<K>)> {
    let mut index: HashMap<K, StateId> = HashMap::from([(start.clone(), 0)]);
    let mut keys = vec![start];
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        for s in 0..a.num_letters() {
            let (next, weight) = step(&keys, i, s);
            let target = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if keys.len() >= STATE_CAP {
                        return Err(Error::CapExceeded(format!("determinization exceeds {STATE_CAP} states")));
                    }
                    index.insert(next.clone(), keys.len());
                    keys.push(next);
                    keys.len() - 1
                }
            };
            transitions.push(Transition {
                source: i,
                letter: s,
                weight,
                target,
            });
        }
        i += 1;
    }
    let names = (0..keys.len()).map(|i| format!("d{i}")).collect();
    Ok((Automaton::new(a.alphabet().to_vec(), names, 0, transitions, valfn)?, keys))
}

fn rename<K>(a: Automaton, keys: &[K], name: impl Fn(&K) -> String) -> Automaton {
    let names: Vec<String> = keys.iter().map(name).collect();
    Automaton::new(a.alphabet().to_vec(), names, a.initial(), a.transitions().to_vec(), a.valfn())
        .expect("renaming keeps the automaton valid")
}

/// LimInf determinization: one breakpoint-determinized coBüchi automaton per
/// threshold, run in lockstep. The emitted weight is the largest threshold
/// `v` such that every component up to `v` takes a good transition.
pub fn determinize_liminf(a: &Automaton) -> Result<Automaton> {
    if a.valfn() != ValueFunction::LimInf {
        return Err(Error::unsupported("determinize_liminf", a.valfn()));
    }
    let weights = a.weights();
    let comps: Vec<OmegaAutomaton> = weights
        .iter()
        .map(|&v| determinize_cobuchi(&threshold_automaton(a, v)?))
        .collect::<Result<_>>()?;
    let start: Vec<StateId> = comps.iter().map(|c| c.initial()).collect();
    let (aut, keys) = explore(a, start, ValueFunction::LimInf, |keys, i, s| {
        let mut next = Vec::with_capacity(comps.len());
        let mut weight = weights[0];
        let mut prefix_good = true;
        for (k, c) in comps.iter().enumerate() {
            let t = c.successors(keys[i][k], s).next().expect("complete deterministic");
            next.push(t.target);
            prefix_good &= t.accepting;
            if prefix_good {
                weight = weights[k];
            }
        }
        (next, weight)
    })?;
    Ok(rename(aut, &keys, |k| {
        format!("({})", k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::LassoWord;
    use crate::eval::evaluate_lasso;
    use crate::format::parse_automaton;

    fn check_min(d: &Decomposition) {
        for w in LassoWord::enumerate(d.source.num_letters(), 3, 3) {
            let x = evaluate_lasso(&d.source, &w).unwrap();
            let b = evaluate_lasso(&d.safety, &w).unwrap();
            let c = evaluate_lasso(&d.liveness, &w).unwrap();
            assert_eq!(x, b.min(c), "{w:?}");
        }
    }

    #[test]
    fn fig1a_decomposition() {
        let a = parse_automaton(include_str!("../fixtures/fig1a.qa")).unwrap();
        let d = decompose(&a).unwrap();
        check_min(&d);
        assert_eq!(d.safety.valfn(), ValueFunction::LimSup);
    }

    #[test]
    fn fig2_decomposition() {
        let a = parse_automaton(include_str!("../fixtures/fig2.qa")).unwrap();
        let d = decompose(&a).unwrap();
        check_min(&d);
        assert_eq!(d.safety.valfn(), ValueFunction::Inf);
        assert_eq!(d.liveness.valfn(), ValueFunction::Sup);
        let w = LassoWord::parse(a.alphabet(), "", "a").unwrap();
        assert_eq!(evaluate_lasso(&d.safety, &w).unwrap(), Rational::from(2));
        assert_eq!(evaluate_lasso(&a, &w).unwrap(), Rational::ZERO);
    }

    #[test]
    fn trivial_decompositions() {
        let ab = vec!["a".to_string(), "b".to_string()];
        let k = Automaton::constant(ab, Rational::from(3), ValueFunction::LimInf).unwrap();
        check_min(&decompose(&k).unwrap());
        let d = parse_automaton("valfn: dsum\ndiscount: 1/2\nalphabet: a b\ninitial: q\nq -- a:0 --> q\nq -- b:1 --> q\n")
            .unwrap();
        let dd = decompose(&d).unwrap();
        check_min(&dd);
        assert_eq!(dd.safety, d);
    }

    #[test]
    fn nondeterministic_inputs() {
        let text = "valfn: limsup\nalphabet: a b\ninitial: p\np -- a:1 --> p\np -- a:0 --> q\np -- b:0 --> p\nq -- a,b:0 --> q\n";
        let a = parse_automaton(text).unwrap();
        assert!(matches!(decompose(&a), Err(Error::OpenProblem(_))));
        let b = a.with_valfn(ValueFunction::LimInf).unwrap();
        assert!(matches!(decompose(&b), Err(Error::NonDeterministic(_))));
    }

    #[test]
    fn determinize_sup_and_liminf() {
        let text = "valfn: sup\nalphabet: a b\ninitial: p\np -- a:0 --> q\np -- a:0 --> r\np -- b:0 --> p\n\
            q -- a:1 --> q\nq -- b:0 --> q\nr -- a:0 --> r\nr -- b:2 --> r\n";
        let a = parse_automaton(text).unwrap();
        let d = determinize_sup(&a).unwrap();
        assert!(d.is_deterministic());
        for w in LassoWord::enumerate(2, 3, 3) {
            assert_eq!(evaluate_lasso(&a, &w).unwrap(), evaluate_lasso(&d, &w).unwrap(), "{w:?}");
        }
        let text = "valfn: liminf\nalphabet: a b\ninitial: p\np -- a:1 --> p\np -- a:0 --> q\np -- b:0 --> p\n\
            q -- a:1 --> q\nq -- b:0 --> p\n";
        let a = parse_automaton(text).unwrap();
        let d = determinize_liminf(&a).unwrap();
        assert!(d.is_deterministic());
        for w in LassoWord::enumerate(2, 3, 3) {
            assert_eq!(evaluate_lasso(&a, &w).unwrap(), evaluate_lasso(&d, &w).unwrap(), "{w:?}");
        }
    }
}
