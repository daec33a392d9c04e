//! Safety closures and Inf-automaton determinization.

use std::collections::HashMap;

use crate::automaton::{Automaton, StateId, Transition, ValueFunction};
use crate::error::{Error, Result};
use crate::eval::{monotone_form, state_top_values, TopValueTable};
use crate::omega::STATE_CAP;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureKind {
    /// Read under Inf.
    Inf,
    /// Read under the source's value function.
    Val,
    /// The source was already safe (Inf, DSum) and is returned as is.
    Identity,
}

#[derive(Clone, Debug)]
pub struct ClosureArtifact {
    pub closure: Automaton,
    pub kind: ClosureKind,
    /// Top values of the automaton that was reweighted (after the monotone
    /// conversion for Sup inputs).
    pub tops: TopValueTable,
}

/// The safety closure as an Inf-automaton: the same graph with each transition
/// weighted by the top value of its target state. Sup inputs are first put in
/// monotone LimSup form. Inf and DSum automata are already safe and come back
/// unchanged.
pub fn safety_closure_inf(a: &Automaton) -> Result<Automaton> {
    Ok(closure_artifact(a)?.closure)
}

pub fn closure_artifact(a: &Automaton) -> Result<ClosureArtifact> {
    match a.valfn() {
        ValueFunction::Inf | ValueFunction::DSum(_) => Ok(ClosureArtifact {
            closure: a.clone(),
            kind: ClosureKind::Identity,
            tops: state_top_values(a),
        }),
        ValueFunction::Sup => {
            let m = monotone_form(a, ValueFunction::LimSup)?;
            reweight(&m)
        }
        _ => reweight(a),
    }
}

fn reweight(a: &Automaton) -> Result<ClosureArtifact> {
    let tops = state_top_values(a);
    let closure = a
        .map_weights(|_, t| tops.value(t.target))
        .with_valfn(ValueFunction::Inf)?;
    Ok(ClosureArtifact {
        closure,
        kind: ClosureKind::Inf,
        tops,
    })
}

/// The Inf-form closure read under the source's limit value function. Its runs
/// have nonincreasing, eventually constant weights, so every limit reading
/// agrees with Inf.
pub fn safety_closure_val(a: &Automaton) -> Result<Automaton> {
    match a.valfn() {
        ValueFunction::LimInf | ValueFunction::LimSup | ValueFunction::LimInfAvg | ValueFunction::LimSupAvg => {
            safety_closure_inf(a)?.with_valfn(a.valfn())
        }
        other => Err(Error::unsupported("safety_closure_val", other)),
    }
}

/// Subset construction for Inf-automata. A state maps each automaton state to
/// the best running minimum of a run ending there; the emitted weight is the
/// largest entry of the target mapping.
pub fn determinize_inf(a: &Automaton) -> Result<Automaton> {
    if a.valfn() != ValueFunction::Inf {
        return Err(Error::unsupported("determinize_inf", a.valfn()));
    }
    let n = a.num_states();
    let nl = a.num_letters();
    type Mapping = Vec<Option<Rational>>;
    let mut start: Mapping = vec![None; n];
    // nothing read yet: the largest weight is neutral for min
    start[a.initial()] = Some(a.max_weight());
    let mut index: HashMap<Mapping, StateId> = HashMap::from([(start.clone(), 0)]);
    let mut maps = vec![start];
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < maps.len() {
        for s in 0..nl {
            let mut next: Mapping = vec![None; n];
            for (q, entry) in maps[i].iter().enumerate() {
                let Some(v) = entry else { continue };
                for t in a.successors(q, s) {
                    let m = (*v).min(t.weight);
                    let slot = &mut next[t.target];
                    if slot.is_none_or(|x| m > x) {
                        *slot = Some(m);
                    }
                }
            }
            let weight = next.iter().flatten().max().copied().expect("total automaton");
            let target = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if maps.len() >= STATE_CAP {
                        return Err(Error::CapExceeded(format!("determinization exceeds {STATE_CAP} states")));
                    }
                    index.insert(next.clone(), maps.len());
                    maps.push(next);
                    maps.len() - 1
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
    let names = maps
        .iter()
        .map(|m| {
            let parts: Vec<String> = m
                .iter()
                .enumerate()
                .filter_map(|(q, v)| v.map(|v| format!("{}:{}", a.state_name(q), v)))
                .collect();
            format!("{{{}}}", parts.join(","))
        })
        .collect();
    Automaton::new(a.alphabet().to_vec(), names, 0, transitions, ValueFunction::Inf)
}
