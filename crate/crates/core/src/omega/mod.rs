//! Boolean ω-automata with transition-based acceptance: threshold languages of
//! quantitative automata, lasso membership, emptiness, complementation and
//! language containment.

mod complement;
mod nfa;
mod ramsey;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::automaton::{Automaton, LassoWord, Letter, StateId, ValueFunction};
use crate::error::{Error, Result};
use crate::graph::{sccs, WeightedGraph};
use crate::rational::Rational;

pub use complement::{complement, complement_buchi, determinize_cobuchi};
pub use nfa::{nfa_universal, Nfa, NfaUniversality};
pub use ramsey::ramsey_universality;

/// Products and complements larger than this many states are refused.
pub const STATE_CAP: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Acceptance {
    /// Some infinite run exists (every transition is accepting).
    Safety,
    /// Some infinite run takes an accepting transition at least once.
    Reachability,
    /// Some run takes accepting transitions infinitely often.
    Buchi,
    /// Some run eventually takes only accepting transitions.
    CoBuchi,
}

impl fmt::Display for Acceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Acceptance::Safety => "safety",
            Acceptance::Reachability => "reachability",
            Acceptance::Buchi => "buchi",
            Acceptance::CoBuchi => "cobuchi",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OmegaTransition {
    pub source: StateId,
    pub letter: Letter,
    pub target: StateId,
    pub accepting: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaAutomaton {
    alphabet: Vec<String>,
    num_states: usize,
    initial: StateId,
    transitions: Vec<OmegaTransition>,
    acceptance: Acceptance,
    outgoing: Vec<Vec<usize>>,
}

impl OmegaAutomaton {
    pub fn new(
        alphabet: Vec<String>,
        num_states: usize,
        initial: StateId,
        transitions: Vec<OmegaTransition>,
        acceptance: Acceptance,
    ) -> Result<Self> {
        if alphabet.is_empty() || num_states == 0 {
            return Err(Error::Invalid("ω-automaton needs a letter and a state".into()));
        }
        if initial >= num_states {
            return Err(Error::UnknownState(format!("#{initial}")));
        }
        let nl = alphabet.len();
        let mut outgoing = vec![Vec::new(); num_states * nl];
        for (i, t) in transitions.iter().enumerate() {
            if t.source >= num_states || t.target >= num_states {
                return Err(Error::UnknownState(format!("#{}", t.source.max(t.target))));
            }
            if t.letter >= nl {
                return Err(Error::UnknownLetter(format!("#{}", t.letter)));
            }
            if acceptance == Acceptance::Safety && !t.accepting {
                return Err(Error::Invalid("safety automata have only accepting transitions".into()));
            }
            outgoing[t.source * nl + t.letter].push(i);
        }
        Ok(OmegaAutomaton {
            alphabet,
            num_states,
            initial,
            transitions,
            acceptance,
            outgoing,
        })
    }

    /// The one-state safety automaton accepting every word.
    pub fn universal(alphabet: Vec<String>) -> Self {
        let transitions = (0..alphabet.len())
            .map(|s| OmegaTransition {
                source: 0,
                letter: s,
                target: 0,
                accepting: true,
            })
            .collect();
        OmegaAutomaton::new(alphabet, 1, 0, transitions, Acceptance::Safety).expect("valid")
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_letters(&self) -> usize {
        self.alphabet.len()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn transitions(&self) -> &[OmegaTransition] {
        &self.transitions
    }

    pub fn acceptance(&self) -> Acceptance {
        self.acceptance
    }

    pub fn successors(&self, q: StateId, s: Letter) -> impl Iterator<Item = &OmegaTransition> + '_ {
        self.outgoing[q * self.alphabet.len() + s]
            .iter()
            .map(move |&i| &self.transitions[i])
    }

    pub fn is_complete(&self) -> bool {
        self.outgoing.iter().all(|v| !v.is_empty())
    }

    pub fn is_deterministic(&self) -> bool {
        self.outgoing.iter().all(|v| v.len() <= 1)
    }

    /// Equivalent Büchi automaton (transition-based).
    pub fn to_buchi(&self) -> OmegaAutomaton {
        let n = self.num_states;
        let mut ts = Vec::new();
        match self.acceptance {
            Acceptance::Buchi => return self.clone(),
            Acceptance::Safety => {
                let mut b = self.clone();
                b.acceptance = Acceptance::Buchi;
                return b;
            }
            Acceptance::Reachability => {
                // copy 1 remembers that an accepting transition was taken
                for t in &self.transitions {
                    ts.push(OmegaTransition {
                        source: t.source,
                        letter: t.letter,
                        target: if t.accepting { t.target + n } else { t.target },
                        accepting: t.accepting,
                    });
                    ts.push(OmegaTransition {
                        source: t.source + n,
                        letter: t.letter,
                        target: t.target + n,
                        accepting: true,
                    });
                }
            }
            Acceptance::CoBuchi => {
                // copy 0 waits; copy 1 is entered on a guess and allows only accepting transitions
                for t in &self.transitions {
                    ts.push(OmegaTransition {
                        source: t.source,
                        letter: t.letter,
                        target: t.target,
                        accepting: false,
                    });
                    if t.accepting {
                        ts.push(OmegaTransition {
                            source: t.source,
                            letter: t.letter,
                            target: t.target + n,
                            accepting: true,
                        });
                        ts.push(OmegaTransition {
                            source: t.source + n,
                            letter: t.letter,
                            target: t.target + n,
                            accepting: true,
                        });
                    }
                }
            }
        }
        OmegaAutomaton::new(self.alphabet.clone(), 2 * n, self.initial, ts, Acceptance::Buchi)
            .expect("doubling preserves validity")
    }

    /// States from which some accepted continuation exists.
    pub fn productive_states(&self) -> Vec<bool> {
        let fg = FlagGraph::from_automaton(self, self.initial);
        match self.acceptance {
            Acceptance::Reachability => {
                // an accepting transition whose target still has an infinite run
                let live = fg.can_reach_cycle(&Condition::default());
                let mut good = vec![false; self.num_states];
                for t in &self.transitions {
                    if t.accepting && live[t.target] {
                        good[t.source] = true;
                    }
                }
                fg.backward_closure(good)
            }
            acc => fg.can_reach_cycle(&Condition::of(acc)),
        }
    }

    /// The topological closure of the language: the automaton restricted to
    /// productive states, read as a safety automaton.
    pub fn safety_closure(&self) -> OmegaAutomaton {
        let prod = self.productive_states();
        let ts: Vec<OmegaTransition> = self
            .transitions
            .iter()
            .filter(|t| prod[t.source] && prod[t.target])
            .map(|t| OmegaTransition { accepting: true, ..*t })
            .collect();
        OmegaAutomaton::new(self.alphabet.clone(), self.num_states, self.initial, ts, Acceptance::Safety)
            .expect("restriction stays valid")
    }

    /// Restriction to states reachable from the initial state and productive,
    /// renumbered. Returns `None` when the language is empty.
    pub(crate) fn trim(&self) -> Option<OmegaAutomaton> {
        let prod = self.productive_states();
        if !prod[self.initial] {
            return None;
        }
        let mut reach = vec![false; self.num_states];
        reach[self.initial] = true;
        let mut stack = vec![self.initial];
        while let Some(q) = stack.pop() {
            for t in self.transitions.iter().filter(|t| t.source == q) {
                if prod[t.target] && !reach[t.target] {
                    reach[t.target] = true;
                    stack.push(t.target);
                }
            }
        }
        let mut id = vec![usize::MAX; self.num_states];
        let mut next = 0;
        for q in 0..self.num_states {
            if reach[q] {
                id[q] = next;
                next += 1;
            }
        }
        let ts = self
            .transitions
            .iter()
            .filter(|t| reach[t.source] && reach[t.target])
            .map(|t| OmegaTransition {
                source: id[t.source],
                target: id[t.target],
                ..*t
            })
            .collect();
        Some(OmegaAutomaton::new(self.alphabet.clone(), next, id[self.initial], ts, self.acceptance).expect("valid"))
    }

    fn check_alphabet(&self, other: &[String]) -> Result<()> {
        if self.alphabet != other {
            return Err(Error::AlphabetMismatch(format!(
                "[{}] vs [{}]",
                self.alphabet.join(" "),
                other.join(" ")
            )));
        }
        Ok(())
    }
}

/// The ω-automaton recognizing `{w | A(w) ≥ v}`.
pub fn threshold_automaton(a: &Automaton, v: Rational) -> Result<OmegaAutomaton> {
    let acceptance = match a.valfn() {
        ValueFunction::Inf => Acceptance::Safety,
        ValueFunction::Sup => Acceptance::Reachability,
        ValueFunction::LimSup => Acceptance::Buchi,
        ValueFunction::LimInf => Acceptance::CoBuchi,
        other => return Err(Error::unsupported("threshold_automaton", other)),
    };
    let ts = a
        .transitions()
        .iter()
        .filter(|t| acceptance != Acceptance::Safety || t.weight >= v)
        .map(|t| OmegaTransition {
            source: t.source,
            letter: t.letter,
            target: t.target,
            accepting: t.weight >= v,
        })
        .collect();
    OmegaAutomaton::new(a.alphabet().to_vec(), a.num_states(), a.initial(), ts, acceptance)
}

/// Acceptance of a lasso path: every mask in `inf` is seen infinitely often,
/// and eventually every edge carries all bits of `eventually`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Condition {
    pub inf: Vec<u32>,
    pub eventually: u32,
}

impl Condition {
    /// Condition for one automaton whose accepting flag is bit 0.
    /// Reachability must be converted with [`OmegaAutomaton::to_buchi`] first.
    fn of(acc: Acceptance) -> Self {
        Condition::for_bit(acc, 0)
    }

    fn for_bit(acc: Acceptance, bit: u32) -> Self {
        match acc {
            Acceptance::Safety => Condition::default(),
            Acceptance::Buchi => Condition {
                inf: vec![1 << bit],
                eventually: 0,
            },
            Acceptance::CoBuchi => Condition {
                inf: Vec::new(),
                eventually: 1 << bit,
            },
            Acceptance::Reachability => panic!("reachability acceptance has no lasso condition"),
        }
    }

    fn and(mut self, other: Condition) -> Self {
        self.inf.extend(other.inf);
        self.eventually |= other.eventually;
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct FEdge {
    pub source: usize,
    pub target: usize,
    pub letter: Letter,
    pub flags: u32,
}

/// Explicit graph with flagged edges, used for emptiness of products.
#[derive(Clone, Debug)]
pub(crate) struct FlagGraph {
    pub n: usize,
    pub start: usize,
    pub edges: Vec<FEdge>,
    pub adj: Vec<Vec<usize>>,
}

impl FlagGraph {
    pub fn new(n: usize, start: usize, mut edges: Vec<FEdge>) -> Self {
        edges.sort_by_key(|e| (e.source, e.letter, e.target, std::cmp::Reverse(e.flags)));
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.source].push(i);
        }
        FlagGraph { n, start, edges, adj }
    }

    fn from_automaton(b: &OmegaAutomaton, start: usize) -> Self {
        let edges = b
            .transitions
            .iter()
            .map(|t| FEdge {
                source: t.source,
                target: t.target,
                letter: t.letter,
                flags: t.accepting as u32,
            })
            .collect();
        FlagGraph::new(b.num_states, start, edges)
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[self.start] = true;
        let mut stack = vec![self.start];
        while let Some(v) = stack.pop() {
            for &e in &self.adj[v] {
                let t = self.edges[e].target;
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Nodes that can reach `targets` (including themselves).
    fn backward_closure(&self, mut good: Vec<bool>) -> Vec<bool> {
        let mut rev = vec![Vec::new(); self.n];
        for e in &self.edges {
            rev[e.target].push(e.source);
        }
        let mut stack: Vec<usize> = (0..self.n).filter(|&v| good[v]).collect();
        while let Some(v) = stack.pop() {
            for &p in &rev[v] {
                if !good[p] {
                    good[p] = true;
                    stack.push(p);
                }
            }
        }
        good
    }

    /// Components of the `eventually`-restricted graph that satisfy `cond`.
    fn good_components(&self, cond: &Condition) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut g = WeightedGraph::new(self.n);
        let mut kept = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.flags & cond.eventually == cond.eventually {
                g.add_edge(e.source, e.target, Rational::ZERO, Some(i));
                kept.push(i);
            }
        }
        let dec = sccs(&g);
        let mut good = Vec::new();
        for (cid, comp) in dec.components.iter().enumerate() {
            if comp.trivial {
                continue;
            }
            let internal: Vec<usize> = kept
                .iter()
                .copied()
                .filter(|&i| {
                    dec.component_of[self.edges[i].source] == cid && dec.component_of[self.edges[i].target] == cid
                })
                .collect();
            if cond
                .inf
                .iter()
                .all(|&m| internal.iter().any(|&i| self.edges[i].flags & m != 0))
            {
                good.push(internal);
            }
        }
        (good, dec.component_of)
    }

    /// Nodes from which some path satisfying `cond` starts.
    fn can_reach_cycle(&self, cond: &Condition) -> Vec<bool> {
        let (good, _) = self.good_components(cond);
        let mut mark = vec![false; self.n];
        for comp in &good {
            for &e in comp {
                mark[self.edges[e].source] = true;
            }
        }
        self.backward_closure(mark)
    }

    fn bfs(&self, from: usize, allowed: impl Fn(usize) -> bool, is_goal: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        if is_goal(from) {
            return Some(Vec::new());
        }
        let mut pred: Vec<Option<usize>> = vec![None; self.n];
        let mut seen = vec![false; self.n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                if !allowed(e) {
                    continue;
                }
                let t = self.edges[e].target;
                if seen[t] {
                    continue;
                }
                seen[t] = true;
                pred[t] = Some(e);
                if is_goal(t) {
                    let mut path = Vec::new();
                    let mut cur = t;
                    while cur != from {
                        let e = pred[cur].expect("predecessor");
                        path.push(e);
                        cur = self.edges[e].source;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(t);
            }
        }
        None
    }

    /// A lasso path from `start` satisfying `cond`, as (prefix edges, cycle edges),
    /// preferring the accepting component closest to the start.
    pub fn accepting_lasso(&self, cond: &Condition) -> Option<(Vec<usize>, Vec<usize>)> {
        let reach = self.reachable();
        let (good, _) = self.good_components(cond);
        let good: Vec<Vec<usize>> = good
            .into_iter()
            .filter(|c| reach[self.edges[c[0]].source])
            .collect();
        if good.is_empty() {
            return None;
        }
        let mut in_good = vec![usize::MAX; self.n];
        for (gi, comp) in good.iter().enumerate() {
            for &e in comp {
                in_good[self.edges[e].source] = gi;
            }
        }
        let prefix = self
            .bfs(self.start, |_| true, |v| in_good[v] != usize::MAX)
            .expect("good component is reachable");
        let head = prefix.last().map_or(self.start, |&e| self.edges[e].target);
        let gi = in_good[head];
        let comp = &good[gi];
        let mut is_internal = vec![false; self.edges.len()];
        for &e in comp {
            is_internal[e] = true;
        }
        let mut cycle = Vec::new();
        let mut cur = head;
        let mut targets: Vec<usize> = cond
            .inf
            .iter()
            .map(|&m| *comp.iter().find(|&&e| self.edges[e].flags & m != 0).expect("mask present"))
            .collect();
        if targets.is_empty() {
            targets.push(*comp.iter().find(|&&e| self.edges[e].source == head).expect("head has an internal edge"));
        }
        for e in targets {
            let src = self.edges[e].source;
            cycle.extend(self.bfs(cur, |x| is_internal[x], |v| v == src).expect("strongly connected"));
            cycle.push(e);
            cur = self.edges[e].target;
        }
        cycle.extend(self.bfs(cur, |x| is_internal[x], |v| v == head).expect("strongly connected"));
        Some((prefix, cycle))
    }

    pub fn lasso_word(&self, prefix: &[usize], cycle: &[usize]) -> LassoWord {
        let letters = |es: &[usize]| es.iter().map(|&e| self.edges[e].letter).collect::<Vec<_>>();
        LassoWord::new(letters(prefix), letters(cycle)).expect("accepting cycles are nonempty")
    }
}

/// Membership of a lasso word, by product with the lasso shape.
pub fn lasso_member(b: &OmegaAutomaton, w: &LassoWord) -> Result<bool> {
    w.check_alphabet(b.num_letters())?;
    let b = if b.acceptance == Acceptance::Reachability {
        b.to_buchi()
    } else {
        b.clone()
    };
    let len = w.len();
    let mut edges = Vec::new();
    for q in 0..b.num_states {
        for pos in 0..len {
            for t in b.successors(q, w.letter(pos)) {
                edges.push(FEdge {
                    source: q * len + pos,
                    target: t.target * len + w.next_pos(pos),
                    letter: t.letter,
                    flags: t.accepting as u32,
                });
            }
        }
    }
    let fg = FlagGraph::new(b.num_states * len, b.initial * len, edges);
    Ok(fg.accepting_lasso(&Condition::of(b.acceptance)).is_some())
}

/// `None` if the language is empty, otherwise an accepted lasso word.
pub fn is_empty(b: &OmegaAutomaton) -> Option<LassoWord> {
    let b = if b.acceptance == Acceptance::Reachability {
        b.to_buchi()
    } else {
        b.clone()
    };
    let fg = FlagGraph::from_automaton(&b, b.initial);
    let (prefix, cycle) = fg.accepting_lasso(&Condition::of(b.acceptance))?;
    Some(fg.lasso_word(&prefix, &cycle))
}

/// A word in the inner language but not in the outer one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoCounterexample {
    pub word: LassoWord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Containment {
    Holds,
    Fails(LassoCounterexample),
}

impl Containment {
    pub fn holds(&self) -> bool {
        matches!(self, Containment::Holds)
    }

    pub fn counterexample(&self) -> Option<&LassoWord> {
        match self {
            Containment::Holds => None,
            Containment::Fails(c) => Some(&c.word),
        }
    }
}

/// Explicit reachable product of several automata (none with Reachability
/// acceptance). Edge flag bit `i` is the accepting flag of component `i`.
pub(crate) fn product(parts: &[&OmegaAutomaton]) -> Result<FlagGraph> {
    let nl = parts[0].num_letters();
    let start: Vec<usize> = parts.iter().map(|p| p.initial).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut nodes = vec![start];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        for s in 0..nl {
            // all combinations of successors
            let mut combos: Vec<(Vec<usize>, u32)> = vec![(Vec::new(), 0)];
            for (k, p) in parts.iter().enumerate() {
                let mut next = Vec::new();
                for (tuple, flags) in &combos {
                    for t in p.successors(nodes[i][k], s) {
                        let mut tu = tuple.clone();
                        tu.push(t.target);
                        next.push((tu, flags | ((t.accepting as u32) << k)));
                    }
                }
                combos = next;
                if combos.is_empty() {
                    break;
                }
            }
            for (tuple, flags) in combos {
                let id = match index.get(&tuple) {
                    Some(&id) => id,
                    None => {
                        if nodes.len() >= STATE_CAP {
                            return Err(Error::CapExceeded(format!("product exceeds {STATE_CAP} states")));
                        }
                        index.insert(tuple.clone(), nodes.len());
                        nodes.push(tuple);
                        nodes.len() - 1
                    }
                };
                edges.push(FEdge {
                    source: i,
                    target: id,
                    letter: s,
                    flags,
                });
            }
        }
        i += 1;
    }
    Ok(FlagGraph::new(nodes.len(), 0, edges))
}

/// Decides `L(inner) ⊆ L(outer)` by intersecting `inner` with a complement of
/// `outer`; a counterexample is re-checked by lasso membership on both sides.
pub fn contains(outer: &OmegaAutomaton, inner: &OmegaAutomaton) -> Result<Containment> {
    outer.check_alphabet(&inner.alphabet)?;
    let inner_n = if inner.acceptance == Acceptance::Reachability {
        inner.to_buchi()
    } else {
        inner.clone()
    };
    let comp = complement(outer)?;
    let fg = product(&[&inner_n, &comp])?;
    let cond = Condition::for_bit(inner_n.acceptance, 0).and(Condition::for_bit(comp.acceptance, 1));
    match fg.accepting_lasso(&cond) {
        None => Ok(Containment::Holds),
        Some((prefix, cycle)) => {
            let word = fg.lasso_word(&prefix, &cycle);
            if !lasso_member(inner, &word)? || lasso_member(outer, &word)? {
                return Err(Error::Internal(format!(
                    "containment counterexample {:?} does not re-check",
                    word
                )));
            }
            Ok(Containment::Fails(LassoCounterexample { word }))
        }
    }
}

/// Universality: `None` if every word is accepted, else a rejected lasso.
pub fn universality(b: &OmegaAutomaton) -> Result<Option<LassoWord>> {
    let all = OmegaAutomaton::universal(b.alphabet.clone());
    Ok(contains(b, &all)?.counterexample().cloned())
}

/// `None` if the language is a safety language (equal to its topological
/// closure), otherwise a word of the closure outside the language.
pub fn safety_violation(b: &OmegaAutomaton) -> Result<Option<LassoWord>> {
    let closure = b.safety_closure();
    Ok(contains(b, &closure)?.counterexample().cloned())
}

pub fn is_safety_language(b: &OmegaAutomaton) -> Result<bool> {
    Ok(safety_violation(b)?.is_none())
}
