//! Constant-function, safety and liveness checks with verified witnesses.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::automaton::{Automaton, LassoWord, Letter, Transition, ValueFunction};
use crate::closure::{determinize_inf, safety_closure_inf};
use crate::error::{Error, Result};
use crate::eval::{evaluate_lasso, state_top_values, sup_after_prefix, top_value, Evaluator};
use crate::graph::{johnson_reweight, WeightedGraph};
use crate::limitedness::{is_limited, unlimited_witness, DistanceAutomaton, DistanceTransition};
use crate::omega::{contains, is_safety_language, nfa_universal, threshold_automaton, universality, Nfa, NfaUniversality, OmegaAutomaton};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Question {
    Constant,
    Safe,
    Live,
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Question::Constant => "constant",
            Question::Safe => "safe",
            Question::Live => "live",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Lasso(LassoWord),
    Prefix(Vec<Letter>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub question: Question,
    pub answer: bool,
    /// The constant, or the top value the question was measured against.
    pub value: Option<Rational>,
    pub witness: Option<Witness>,
    /// Steps of the reduction that produced the answer.
    pub method: Vec<String>,
}

impl Verdict {
    fn yes(question: Question, value: Option<Rational>, method: Vec<String>) -> Self {
        Verdict {
            question,
            answer: true,
            value,
            witness: None,
            method,
        }
    }

    fn no(question: Question, value: Option<Rational>, witness: Witness, method: Vec<String>) -> Self {
        Verdict {
            question,
            answer: false,
            value,
            witness: Some(witness),
            method,
        }
    }

    pub fn lasso(&self) -> Option<&LassoWord> {
        match &self.witness {
            Some(Witness::Lasso(w)) => Some(w),
            _ => None,
        }
    }

    pub fn prefix(&self) -> Option<&[Letter]> {
        match &self.witness {
            Some(Witness::Prefix(u)) => Some(u),
            _ => None,
        }
    }
}

fn check_below(a: &Automaton, w: &LassoWord, top: Rational) -> Result<()> {
    let v = evaluate_lasso(a, w)?;
    if v >= top {
        return Err(Error::Internal(format!(
            "witness {} has value {v}, not below the top value {top}",
            w.display(a.alphabet())
        )));
    }
    Ok(())
}

/// Whether `a` assigns the same value to every word.
pub fn is_constant(a: &Automaton) -> Result<Verdict> {
    match a.valfn() {
        ValueFunction::DSum(_) => is_constant_dsum(a),
        ValueFunction::LimInfAvg | ValueFunction::LimSupAvg => is_constant_limavg(a),
        vf => {
            let (top, _) = top_value(a);
            let thr = threshold_automaton(a, top)?;
            let mut method = vec![
                format!("top value {top}"),
                format!("universality of the {} threshold automaton at {top}", thr.acceptance()),
            ];
            let all = OmegaAutomaton::universal(a.alphabet().to_vec());
            match contains(&thr, &all)?.counterexample() {
                None => Ok(Verdict::yes(Question::Constant, Some(top), method)),
                Some(w) => {
                    check_below(a, w, top)?;
                    method.push(format!("{vf} value below the top on the counterexample"));
                    Ok(Verdict::no(Question::Constant, Some(top), Witness::Lasso(w.clone()), method))
                }
            }
        }
    }
}

/// The finite-word automaton of optimal moves: transitions `p -x-> q` with
/// `x + λ·T(q) = T(p)`, all states accepting.
fn optimal_moves(a: &Automaton, lambda: Rational) -> Result<Nfa> {
    let tops = state_top_values(a);
    let transitions = a
        .transitions()
        .iter()
        .filter(|t| t.weight + lambda * tops.value(t.target) == tops.value(t.source))
        .map(|t| (t.source, t.letter, t.target))
        .collect();
    Nfa::new(
        a.alphabet().to_vec(),
        a.states().to_vec(),
        vec![a.initial()],
        vec![true; a.num_states()],
        transitions,
    )
}

/// DSum constancy: constant iff every finite word can be read with optimal
/// moves only.
pub fn is_constant_dsum(a: &Automaton) -> Result<Verdict> {
    let ValueFunction::DSum(lambda) = a.valfn() else {
        return Err(Error::unsupported("is_constant_dsum", a.valfn()));
    };
    let (top, _) = top_value(a);
    let nfa = optimal_moves(a, lambda)?;
    let mut method = vec![
        format!("top value {top}"),
        "pruned transitions that lose value against the per-state tops".to_string(),
        "universality of the pruned automaton over finite words".to_string(),
    ];
    match nfa_universal(&nfa) {
        NfaUniversality::Universal => Ok(Verdict::yes(Question::Constant, Some(top), method)),
        NfaUniversality::Rejects(u) => {
            let w = LassoWord::new(u, vec![0])?;
            check_below(a, &w, top)?;
            method.push(format!("rejected prefix extended to {}", w.display(a.alphabet())));
            Ok(Verdict::no(Question::Constant, Some(top), Witness::Lasso(w), method))
        }
    }
}

/// The distance automaton of the limit-average pipeline: weights shifted by
/// the top value and negated, made nonnegative by potentials, then every
/// positive weight becomes 1. `a` must have only reachable states.
fn limavg_distance(a: &Automaton, top: Rational) -> Result<DistanceAutomaton> {
    let mut g = WeightedGraph::new(a.num_states());
    for t in a.transitions() {
        g.add_edge(t.source, t.target, top - t.weight, None);
    }
    let rw = johnson_reweight(&g).map_err(|e| match e {
        Error::NegativeCycle(c) => Error::Internal(format!(
            "negated automaton has a negative cycle through {c:?} although the top value is {top}"
        )),
        e => e,
    })?;
    let transitions = a
        .transitions()
        .iter()
        .zip(&rw.gamma_prime)
        .map(|(t, &w)| DistanceTransition {
            source: t.source,
            letter: t.letter,
            weight: u8::from(w > Rational::ZERO),
            target: t.target,
        })
        .collect();
    DistanceAutomaton::new(
        a.alphabet().to_vec(),
        a.states().to_vec(),
        vec![a.initial()],
        vec![true; a.num_states()],
        transitions,
    )
}

/// Limit-average constancy through limitedness of a distance automaton.
pub fn is_constant_limavg(a: &Automaton) -> Result<Verdict> {
    if !a.valfn().is_limit_average() {
        return Err(Error::unsupported("is_constant_limavg", a.valfn()));
    }
    let (a, _) = a.trim();
    let (top, _) = top_value(&a);
    let d = limavg_distance(&a, top)?;
    let mut method = vec![
        format!("top value {top}"),
        "subtracted the top, negated, reweighted by potentials, binarized".to_string(),
        "limitedness of the resulting distance automaton".to_string(),
    ];
    if is_limited(&d)? {
        return Ok(Verdict::yes(Question::Constant, Some(top), method));
    }
    let w = match unlimited_witness(&d) {
        Ok(wit) => {
            method.push(format!("unlimited witness with segment bound {}", wit.bound));
            wit.word
        }
        Err(Error::BudgetExhausted(msg)) => {
            method.push(format!("witness search inconclusive ({msg}); lasso sweep used instead"));
            sweep_below(&a, top, 4).ok_or_else(|| Error::BudgetExhausted(msg))?
        }
        Err(e) => return Err(e),
    };
    check_below(&a, &w, top)?;
    Ok(Verdict::no(Question::Constant, Some(top), Witness::Lasso(w), method))
}

/// First lasso (by size) with value strictly below `top`.
fn sweep_below(a: &Automaton, top: Rational, max: usize) -> Option<LassoWord> {
    let ev = Evaluator::new(a);
    LassoWord::enumerate(a.num_letters(), max, max)
        .into_iter()
        .find(|w| ev.evaluate(w).is_ok_and(|v| v < top))
}

fn check_above(a: &Automaton, closure: &Automaton, w: &LassoWord) -> Result<()> {
    let (x, c) = (evaluate_lasso(a, w)?, evaluate_lasso(closure, w)?);
    if c <= x {
        return Err(Error::Internal(format!(
            "safety counterexample {} does not separate: value {x}, closure {c}",
            w.display(a.alphabet())
        )));
    }
    Ok(())
}

/// Whether `a` expresses a safety property, i.e. equals its safety closure.
pub fn is_safe(a: &Automaton) -> Result<Verdict> {
    match a.valfn() {
        ValueFunction::Inf | ValueFunction::DSum(_) => Ok(Verdict::yes(
            Question::Safe,
            None,
            vec![format!("{} automata always express safety properties", a.valfn().tag())],
        )),
        ValueFunction::LimInfAvg | ValueFunction::LimSupAvg => is_safe_limavg(a),
        _ => {
            let closure = safety_closure_inf(a)?;
            let mut thresholds = a.weights();
            thresholds.extend(closure.weights());
            thresholds.sort();
            thresholds.dedup();
            let mut method = vec![
                "built the Inf safety closure".to_string(),
                format!("checked closure ≥ v implies value ≥ v for v in {{{}}}", join(&thresholds)),
            ];
            for v in thresholds {
                let outer = threshold_automaton(a, v)?;
                let inner = threshold_automaton(&closure, v)?;
                if let Some(w) = contains(&outer, &inner)?.counterexample() {
                    check_above(a, &closure, w)?;
                    method.push(format!("containment fails at threshold {v}"));
                    return Ok(Verdict::no(Question::Safe, None, Witness::Lasso(w.clone()), method));
                }
            }
            Ok(Verdict::yes(Question::Safe, None, method))
        }
    }
}

fn join(xs: &[Rational]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Product of `a` with a deterministic automaton `b` whose transition weight
/// is subtracted from `a`'s.
fn difference_product(a: &Automaton, b: &Automaton) -> Result<Automaton> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([((a.initial(), b.initial()), 0)]);
    let mut nodes = vec![(a.initial(), b.initial())];
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let (p, q) = nodes[i];
        for s in 0..a.num_letters() {
            let tb = b.step(q, s);
            for ta in a.successors(p, s) {
                let key = (ta.target, tb.target);
                let target = *index.entry(key).or_insert_with(|| {
                    nodes.push(key);
                    nodes.len() - 1
                });
                transitions.push(Transition {
                    source: i,
                    letter: s,
                    weight: ta.weight - tb.weight,
                    target,
                });
            }
        }
        i += 1;
    }
    let names = nodes
        .iter()
        .map(|&(p, q)| format!("{}|{}", a.state_name(p), b.state_name(q)))
        .collect();
    Automaton::new(a.alphabet().to_vec(), names, 0, transitions, a.valfn())
}

fn is_safe_limavg(a: &Automaton) -> Result<Verdict> {
    let closure = safety_closure_inf(a)?;
    let det = determinize_inf(&closure)?.with_valfn(a.valfn())?;
    let diff = difference_product(a, &det)?;
    let (top, _) = top_value(&diff);
    if top != Rational::ZERO {
        return Err(Error::Internal(format!("value minus closure has top value {top}, expected 0")));
    }
    let inner = is_constant_limavg(&diff)?;
    let mut method = vec![
        "built and determinized the Inf safety closure".to_string(),
        "subtracted the closure from the automaton in a product".to_string(),
    ];
    method.extend(inner.method.iter().map(|m| format!("difference: {m}")));
    match inner.lasso() {
        None => Ok(Verdict::yes(Question::Safe, None, method)),
        Some(w) => {
            check_above(a, &closure, w)?;
            Ok(Verdict::no(Question::Safe, None, Witness::Lasso(w.clone()), method))
        }
    }
}

/// Whether `a` expresses a liveness property: its safety closure is constantly
/// the top value.
pub fn is_live(a: &Automaton) -> Result<Verdict> {
    let (top, _) = top_value(a);
    let prefix = match a.valfn() {
        ValueFunction::DSum(lambda) => {
            let mut method = vec![
                format!("top value {top}"),
                "discounted sums are safe: live iff constant".to_string(),
            ];
            match nfa_universal(&optimal_moves(a, lambda)?) {
                NfaUniversality::Universal => return Ok(Verdict::yes(Question::Live, Some(top), method)),
                NfaUniversality::Rejects(u) => {
                    method.push("prefix on which no optimal run exists".to_string());
                    (u, method)
                }
            }
        }
        _ => {
            let closure = safety_closure_inf(a)?;
            let method = vec![
                format!("top value {top}"),
                "built the Inf safety closure".to_string(),
                format!("subset construction over closure transitions of weight at least {top}"),
            ];
            match top_blocking_prefix(&closure, top) {
                None => return Ok(Verdict::yes(Question::Live, Some(top), method)),
                Some(u) => (u, method),
            }
        }
    };
    let (u, method) = prefix;
    let best = sup_after_prefix(a, &u);
    if best >= top {
        return Err(Error::Internal(format!(
            "liveness witness {} still allows value {best}",
            u.iter().map(|&s| a.letter_name(s)).collect::<Vec<_>>().join(" ")
        )));
    }
    Ok(Verdict::no(Question::Live, Some(top), Witness::Prefix(u), method))
}

/// Shortest (then lexicographically least) prefix after which no run can
/// continue with transitions of weight at least `top`.
fn top_blocking_prefix(c: &Automaton, top: Rational) -> Option<Vec<Letter>> {
    let n = c.num_states();
    let start: Vec<bool> = (0..n).map(|q| q == c.initial()).collect();
    let mut parent: HashMap<Vec<bool>, Option<(Vec<bool>, Letter)>> = HashMap::from([(start.clone(), None)]);
    let mut queue = VecDeque::from([start]);
    while let Some(set) = queue.pop_front() {
        for s in 0..c.num_letters() {
            let mut next = vec![false; n];
            for q in (0..n).filter(|&q| set[q]) {
                for t in c.successors(q, s).filter(|t| t.weight >= top) {
                    next[t.target] = true;
                }
            }
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), Some((set.clone(), s)));
            if next.iter().all(|&b| !b) {
                let mut word = Vec::new();
                let mut cur = next;
                while let Some(Some((prev, s))) = parent.get(&cur) {
                    word.push(*s);
                    cur = prev.clone();
                }
                word.reverse();
                return Some(word);
            }
            queue.push_back(next);
        }
    }
    None
}

fn check_finite_valued(a: &Automaton, op: &str) -> Result<()> {
    match a.valfn() {
        ValueFunction::Inf | ValueFunction::Sup | ValueFunction::LimInf | ValueFunction::LimSup => Ok(()),
        other => Err(Error::unsupported(op, other)),
    }
}

/// Safety through the threshold languages: every `{w | A(w) ≥ v}` must be a
/// safety language.
pub fn crosscheck_safety_thresholds(a: &Automaton) -> Result<bool> {
    check_finite_valued(a, "crosscheck_safety_thresholds")?;
    for v in a.weights() {
        if !is_safety_language(&threshold_automaton(a, v)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Liveness through the threshold languages: for every weight `v` up to the
/// top value, every finite word extends into `{w | A(w) ≥ v}`.
pub fn crosscheck_liveness_thresholds(a: &Automaton) -> Result<bool> {
    check_finite_valued(a, "crosscheck_liveness_thresholds")?;
    let (top, _) = top_value(a);
    for v in a.weights().into_iter().filter(|&v| v <= top) {
        let closure = threshold_automaton(a, v)?.safety_closure();
        if universality(&closure)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_automaton;

    fn load(text: &str) -> Automaton {
        parse_automaton(text).unwrap()
    }

    fn fig1a() -> Automaton {
        load(include_str!("../fixtures/fig1a.qa"))
    }

    fn one_state(valfn: &str, wa: i64, wb: i64) -> Automaton {
        let discount = if valfn == "dsum" { "discount: 1/2\n" } else { "" };
        load(&format!(
            "valfn: {valfn}\n{discount}alphabet: a b\ninitial: q\nq -- a:{wa} --> q\nq -- b:{wb} --> q\n"
        ))
    }

    fn lasso(a: &Automaton, u: &str, v: &str) -> LassoWord {
        LassoWord::parse(a.alphabet(), u, v).unwrap()
    }

    #[test]
    fn constant_examples() {
        for vf in ["inf", "sup", "liminf", "limsup", "liminfavg", "limsupavg", "dsum"] {
            let v = is_constant(&one_state(vf, 5, 5)).unwrap();
            assert!(v.answer, "{vf}");
            let expected = if vf == "dsum" { Rational::from(10) } else { Rational::from(5) };
            assert_eq!(v.value, Some(expected), "{vf}");
        }
        let a = fig1a();
        let v = is_constant(&a).unwrap();
        assert!(!v.answer);
        assert_eq!(v.value, Some(Rational::from(2)));
        assert!(evaluate_lasso(&a, v.lasso().unwrap()).unwrap() < Rational::from(2));
    }

    #[test]
    fn dsum_constancy() {
        let a = one_state("dsum", 0, 1);
        let v = is_constant_dsum(&a).unwrap();
        assert!(!v.answer);
        assert_eq!(v.lasso(), Some(&lasso(&a, "a", "a")));
        assert!(is_constant_dsum(&one_state("dsum", 1, 1)).unwrap().answer);
    }

    #[test]
    fn limavg_constancy() {
        let a = one_state("limsupavg", 0, 1);
        let v = is_constant_limavg(&a).unwrap();
        assert!(!v.answer);
        assert_eq!(v.lasso(), Some(&lasso(&a, "", "a")));
        // only the first a costs something
        let b = load(
            "valfn: liminfavg\nalphabet: a b\ninitial: p\np -- a:-1 --> q\np -- b:0 --> p\nq -- a,b:0 --> q\n",
        );
        let v = is_constant_limavg(&b).unwrap();
        assert!(v.answer);
        assert_eq!(v.value, Some(Rational::ZERO));
    }

    #[test]
    fn safety_examples() {
        let a = fig1a();
        let v = is_safe(&a).unwrap();
        assert!(!v.answer);
        assert_eq!(v.lasso(), Some(&lasso(&a, "", "off")));
        let f2 = load(include_str!("../fixtures/fig2.qa"));
        let v = is_safe(&f2).unwrap();
        assert!(!v.answer);
        assert!(is_safe(&one_state("inf", 0, 1)).unwrap().answer);
        assert!(is_safe(&one_state("dsum", 0, 1)).unwrap().answer);
        let l = one_state("limsupavg", 0, 1);
        let v = is_safe(&l).unwrap();
        assert!(!v.answer);
        assert_eq!(v.lasso(), Some(&lasso(&l, "", "a")));
        assert!(is_safe(&one_state("liminfavg", 3, 3)).unwrap().answer);
    }

    #[test]
    fn liveness_examples() {
        let a = fig1a();
        let v = is_live(&a).unwrap();
        assert!(!v.answer);
        assert_eq!(v.prefix(), Some(&[3usize][..]));
        assert!(is_live(&load(include_str!("../fixtures/fig1c.qa"))).unwrap().answer);
        let d = one_state("dsum", 0, 1);
        let v = is_live(&d).unwrap();
        assert!(!v.answer);
        assert_eq!(v.prefix(), Some(&[0usize][..]));
        assert!(is_live(&one_state("limsup", 4, 4)).unwrap().answer);
    }

    #[test]
    fn threshold_crosschecks() {
        let a = fig1a();
        assert!(!crosscheck_safety_thresholds(&a).unwrap());
        assert!(!crosscheck_liveness_thresholds(&a).unwrap());
        assert!(crosscheck_liveness_thresholds(&load(include_str!("../fixtures/fig1c.qa"))).unwrap());
        assert!(!crosscheck_safety_thresholds(&load(include_str!("../fixtures/fig2.qa"))).unwrap());
        assert!(crosscheck_safety_thresholds(&one_state("inf", 0, 2)).unwrap());
    }
}
