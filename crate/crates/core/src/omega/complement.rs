//! Complementation: rank-based for nondeterministic Büchi, breakpoint
//! determinization for coBüchi, subset constructions for safety and
//! reachability, flipping for deterministic automata.

use std::collections::HashMap;
use std::hash::Hash;

use super::{Acceptance, OmegaAutomaton, OmegaTransition, STATE_CAP};
use crate::error::{Error, Result};

const ABSENT: u8 = u8::MAX;

/// Successor sets per (state, letter) as single-word bitmasks, for the
/// rank-based construction.
struct Succ {
    n: usize,
    nl: usize,
    all: Vec<u64>,
    // (target, accepting) lists
    list: Vec<Vec<(usize, bool)>>,
}

impl Succ {
    fn new(b: &OmegaAutomaton) -> Result<Self> {
        let n = b.num_states();
        if n > 63 {
            return Err(Error::CapExceeded(format!(
                "rank-based complementation supports at most 63 states, got {n}"
            )));
        }
        let nl = b.num_letters();
        let mut all = vec![0u64; n * nl];
        let mut list = vec![Vec::new(); n * nl];
        for t in b.transitions() {
            let i = t.source * nl + t.letter;
            all[i] |= 1 << t.target;
            list[i].push((t.target, t.accepting));
        }
        Ok(Succ { n, nl, all, list })
    }

    fn post(&self, set: u64, s: usize) -> u64 {
        bits(set).fold(0, |m, q| m | self.all[q * self.nl + s])
    }

}

fn bits(set: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&i| set & (1u64 << i) != 0)
}

type Set = Vec<u64>;

/// Successor sets for the subset constructions, as multiword bitsets so that
/// they are not bounded by the width of a machine word.
struct WideSucc {
    nl: usize,
    words: usize,
    all: Vec<Set>,
    acc: Vec<Set>,
}

impl WideSucc {
    fn new(b: &OmegaAutomaton) -> Self {
        let nl = b.num_letters();
        let words = b.num_states().div_ceil(64).max(1);
        let mut all = vec![vec![0u64; words]; b.num_states() * nl];
        let mut acc = all.clone();
        for t in b.transitions() {
            let i = t.source * nl + t.letter;
            all[i][t.target / 64] |= 1 << (t.target % 64);
            if t.accepting {
                acc[i][t.target / 64] |= 1 << (t.target % 64);
            }
        }
        WideSucc { nl, words, all, acc }
    }

    fn singleton(&self, q: usize) -> Set {
        let mut set = vec![0u64; self.words];
        set[q / 64] |= 1 << (q % 64);
        set
    }

    fn union_over(&self, table: &[Set], set: &Set, s: usize) -> Set {
        let mut out = vec![0u64; self.words];
        for q in wide_bits(set) {
            for (o, x) in out.iter_mut().zip(&table[q * self.nl + s]) {
                *o |= x;
            }
        }
        out
    }

    fn post(&self, set: &Set, s: usize) -> Set {
        self.union_over(&self.all, set, s)
    }

    fn post_acc(&self, set: &Set, s: usize) -> Set {
        self.union_over(&self.acc, set, s)
    }

    fn any_accepting(&self, set: &Set, s: usize) -> bool {
        wide_bits(set).any(|q| !is_empty(&self.acc[q * self.nl + s]))
    }
}

fn wide_bits(set: &Set) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let b = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(w * 64 + b)
        })
    })
}

fn is_empty(set: &Set) -> bool {
    set.iter().all(|&x| x == 0)
}

/// Worklist exploration of a deterministic or nondeterministic construction
/// whose states are hashable keys.
struct Builder<K> {
    index: HashMap<K, usize>,
    keys: Vec<K>,
    transitions: Vec<OmegaTransition>,
}

impl<K: Clone + Eq + Hash> Builder<K> {
    fn new(initial: K) -> Self {
        Builder {
            index: HashMap::from([(initial.clone(), 0)]),
            keys: vec![initial],
            transitions: Vec::new(),
        }
    }

    fn id(&mut self, k: K) -> Result<usize> {
        if let Some(&i) = self.index.get(&k) {
            return Ok(i);
        }
        if self.keys.len() >= STATE_CAP {
            return Err(Error::CapExceeded(format!("construction exceeds {STATE_CAP} states")));
        }
        self.index.insert(k.clone(), self.keys.len());
        self.keys.push(k);
        Ok(self.keys.len() - 1)
    }

    fn edge(&mut self, source: usize, letter: usize, target: K, accepting: bool) -> Result<()> {
        let target = self.id(target)?;
        self.transitions.push(OmegaTransition {
            source,
            letter,
            target,
            accepting,
        });
        Ok(())
    }

    fn finish(self, alphabet: Vec<String>, acceptance: Acceptance) -> OmegaAutomaton {
        OmegaAutomaton::new(alphabet, self.keys.len(), 0, self.transitions, acceptance)
            .expect("construction is well formed")
    }
}

/// A complement of `b` with whatever acceptance is cheapest: never
/// Reachability, so it can enter products directly.
pub fn complement(b: &OmegaAutomaton) -> Result<OmegaAutomaton> {
    match b.acceptance() {
        Acceptance::Safety => complement_safety(b),
        Acceptance::Reachability if b.is_complete() => complement_reachability(b),
        Acceptance::Reachability => complement_buchi(&b.to_buchi()),
        Acceptance::Buchi if b.is_deterministic() => Ok(flip(&complete(b), Acceptance::CoBuchi)),
        Acceptance::Buchi => complement_buchi(b),
        Acceptance::CoBuchi => Ok(flip(&determinize_cobuchi(b)?, Acceptance::Buchi)),
    }
}

/// Adds a rejecting sink for missing transitions.
fn complete(b: &OmegaAutomaton) -> OmegaAutomaton {
    if b.is_complete() {
        return b.clone();
    }
    let sink = b.num_states();
    let mut ts = b.transitions().to_vec();
    for q in 0..=sink {
        for s in 0..b.num_letters() {
            if q == sink || b.successors(q, s).next().is_none() {
                ts.push(OmegaTransition {
                    source: q,
                    letter: s,
                    target: sink,
                    accepting: false,
                });
            }
        }
    }
    OmegaAutomaton::new(b.alphabet().to_vec(), sink + 1, b.initial(), ts, b.acceptance()).expect("valid")
}

/// Complement of a deterministic complete Büchi/coBüchi automaton.
fn flip(b: &OmegaAutomaton, acceptance: Acceptance) -> OmegaAutomaton {
    let ts = b
        .transitions()
        .iter()
        .map(|t| OmegaTransition {
            accepting: !t.accepting,
            ..*t
        })
        .collect();
    OmegaAutomaton::new(b.alphabet().to_vec(), b.num_states(), b.initial(), ts, acceptance).expect("valid")
}

/// Words with a prefix on which every run is blocked: subset construction,
/// Büchi-accepting only in the empty-set sink.
fn complement_safety(b: &OmegaAutomaton) -> Result<OmegaAutomaton> {
    let succ = WideSucc::new(b);
    let mut bl = Builder::new(succ.singleton(b.initial()));
    let mut i = 0;
    while i < bl.keys.len() {
        let set = bl.keys[i].clone();
        for s in 0..succ.nl {
            let next = succ.post(&set, s);
            let blocked = is_empty(&next);
            bl.edge(i, s, next, blocked)?;
        }
        i += 1;
    }
    Ok(bl.finish(b.alphabet().to_vec(), Acceptance::Buchi))
}

/// For complete reachability automata: the subset of states reached without
/// an accepting transition, blocked as soon as one becomes possible.
fn complement_reachability(b: &OmegaAutomaton) -> Result<OmegaAutomaton> {
    let succ = WideSucc::new(b);
    let mut bl = Builder::new(succ.singleton(b.initial()));
    let mut i = 0;
    while i < bl.keys.len() {
        let set = bl.keys[i].clone();
        for s in 0..succ.nl {
            if !succ.any_accepting(&set, s) {
                let next = succ.post(&set, s);
                bl.edge(i, s, next, true)?;
            }
        }
        i += 1;
    }
    Ok(bl.finish(b.alphabet().to_vec(), Acceptance::Safety))
}

/// Breakpoint construction: states (S, B) where B ⊆ S holds the states reached
/// by accepting-only paths since the last breakpoint. A transition is
/// rejecting when B empties. The result is deterministic and complete.
pub fn determinize_cobuchi(b: &OmegaAutomaton) -> Result<OmegaAutomaton> {
    if b.acceptance() != Acceptance::CoBuchi {
        return Err(Error::Precondition(format!(
            "determinize_cobuchi expects a coBüchi automaton, got {}",
            b.acceptance()
        )));
    }
    let succ = WideSucc::new(b);
    let empty = vec![0u64; succ.words];
    let mut bl = Builder::new((succ.singleton(b.initial()), empty.clone()));
    let mut i = 0;
    while i < bl.keys.len() {
        let (set, brk) = bl.keys[i].clone();
        for s in 0..succ.nl {
            let next = succ.post(&set, s);
            if is_empty(&next) {
                // (∅, ∅) is the rejecting sink
                bl.edge(i, s, (empty.clone(), empty.clone()), false)?;
                continue;
            }
            let next_brk = if is_empty(&brk) {
                succ.post_acc(&set, s)
            } else {
                succ.post_acc(&brk, s)
            };
            let good = !is_empty(&next_brk);
            bl.edge(i, s, (next, next_brk), good)?;
        }
        i += 1;
    }
    Ok(bl.finish(b.alphabet().to_vec(), Acceptance::CoBuchi))
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum RankKey {
    Subset(u64),
    Ranked { set: u64, obligations: u64, rank: Vec<u8> },
}

/// Rank-based complementation restricted to tight level rankings, with an
/// initial subset phase. Transition-based: an accepting edge leaving an odd
/// rank must strictly decrease the rank. Accepting transitions are those
/// entering a state whose obligation set is empty.
pub fn complement_buchi(b: &OmegaAutomaton) -> Result<OmegaAutomaton> {
    if b.acceptance() != Acceptance::Buchi {
        return Err(Error::Precondition(format!(
            "complement_buchi expects a Büchi automaton, got {}",
            b.acceptance()
        )));
    }
    let alphabet = b.alphabet().to_vec();
    let Some(b) = b.trim() else {
        // empty language: the complement is universal
        let ts = (0..alphabet.len())
            .map(|s| OmegaTransition {
                source: 0,
                letter: s,
                target: 0,
                accepting: true,
            })
            .collect();
        return Ok(OmegaAutomaton::new(alphabet, 1, 0, ts, Acceptance::Buchi).expect("valid"));
    };
    let succ = Succ::new(&b)?;
    let n = succ.n;
    let sink = RankKey::Ranked {
        set: 0,
        obligations: 0,
        rank: vec![ABSENT; n],
    };
    let mut bl = Builder::new(RankKey::Subset(1u64 << b.initial()));
    let mut i = 0;
    let mut scratch = Vec::new();
    while i < bl.keys.len() {
        let key = bl.keys[i].clone();
        for s in 0..succ.nl {
            match &key {
                RankKey::Subset(set) => {
                    let next = succ.post(*set, s);
                    if next == 0 {
                        bl.edge(i, s, sink.clone(), true)?;
                        continue;
                    }
                    bl.edge(i, s, RankKey::Subset(next), false)?;
                    let bound = vec![(2 * n - 1) as u8; n];
                    scratch.clear();
                    tight_rankings(next, &bound, n, &mut scratch);
                    for rank in scratch.drain(..) {
                        let obligations = evens(next, &rank);
                        let acc = obligations == 0;
                        bl.edge(
                            i,
                            s,
                            RankKey::Ranked {
                                set: next,
                                obligations,
                                rank,
                            },
                            acc,
                        )?;
                    }
                }
                RankKey::Ranked {
                    set,
                    obligations,
                    rank,
                } => {
                    let next = succ.post(*set, s);
                    if next == 0 {
                        bl.edge(i, s, sink.clone(), true)?;
                        continue;
                    }
                    let mut bound = vec![ABSENT; n];
                    for q in bits(*set) {
                        let f = rank[q];
                        for &(t, accepting) in &succ.list[q * succ.nl + s] {
                            let cap = if accepting && f % 2 == 1 { f - 1 } else { f };
                            bound[t] = bound[t].min(cap);
                        }
                    }
                    let moved = if *obligations == 0 {
                        next
                    } else {
                        succ.post(*obligations, s)
                    };
                    scratch.clear();
                    tight_rankings(next, &bound, n, &mut scratch);
                    for r2 in scratch.drain(..) {
                        let ob2 = evens(moved, &r2);
                        let acc = ob2 == 0;
                        bl.edge(
                            i,
                            s,
                            RankKey::Ranked {
                                set: next,
                                obligations: ob2,
                                rank: r2,
                            },
                            acc,
                        )?;
                    }
                }
            }
        }
        i += 1;
    }
    Ok(bl.finish(alphabet, Acceptance::Buchi))
}

fn evens(set: u64, rank: &[u8]) -> u64 {
    bits(set).filter(|&q| rank[q] % 2 == 0).fold(0, |m, q| m | (1 << q))
}

/// All tight rankings of `set` bounded pointwise by `bound`: the maximal rank
/// is odd and every odd rank below it is used.
fn tight_rankings(set: u64, bound: &[u8], n: usize, out: &mut Vec<Vec<u8>>) {
    let states: Vec<usize> = bits(set).collect();
    let k = states.len();
    let limit = (2 * k - 1) as u8;
    let mut rank = vec![ABSENT; n];
    fn rec(
        idx: usize,
        states: &[usize],
        bound: &[u8],
        limit: u8,
        used_odd: u64,
        max: u8,
        rank: &mut Vec<u8>,
        out: &mut Vec<Vec<u8>>,
    ) {
        if idx == states.len() {
            if max % 2 == 1 && used_odd.count_ones() == max.div_ceil(2) as u32 {
                out.push(rank.clone());
            }
            return;
        }
        // odd ranks still missing must fit in the remaining states
        let remaining = (states.len() - idx) as u32;
        let q = states[idx];
        let hi = bound[q].min(limit);
        for r in 0..=hi {
            let used = if r % 2 == 1 { used_odd | (1 << (r / 2)) } else { used_odd };
            let m = max.max(r);
            let top_odd = if m % 2 == 1 { m } else { m + 1 };
            let needed = top_odd.div_ceil(2) as u32;
            if needed > used.count_ones() + remaining - 1 {
                continue;
            }
            rank[q] = r;
            rec(idx + 1, states, bound, limit, used, m, rank, out);
        }
        rank[q] = ABSENT;
    }
    if k == 0 {
        return;
    }
    rec(0, &states, bound, limit, 0, 0, &mut rank, out);
}
