//! Distance automata over finite words (min-plus, weights 0/1) and the
//! limitedness problem, decided with the stabilization monoid over
//! {0, 1, ω, ∞}.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use crate::automaton::{LassoWord, Letter, StateId};
use crate::error::{Error, Result};
use crate::graph::{max_mean_cycle, WeightedGraph};
use crate::rational::Rational;

/// Cap on closure size and on brute-force frontier size.
pub const MATRIX_CAP: usize = 500_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DistanceTransition {
    pub source: StateId,
    pub letter: Letter,
    pub weight: u8,
    pub target: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceAutomaton {
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: Vec<StateId>,
    accepting: Vec<bool>,
    transitions: Vec<DistanceTransition>,
}

impl DistanceAutomaton {
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<String>,
        initial: Vec<StateId>,
        accepting: Vec<bool>,
        transitions: Vec<DistanceTransition>,
    ) -> Result<Self> {
        if alphabet.is_empty() || states.is_empty() {
            return Err(Error::Invalid("distance automaton needs a letter and a state".into()));
        }
        if initial.is_empty() {
            return Err(Error::Invalid("distance automaton needs an initial state".into()));
        }
        if accepting.len() != states.len() {
            return Err(Error::Invalid("accepting flags do not match the states".into()));
        }
        let n = states.len();
        if let Some(&q) = initial.iter().find(|&&q| q >= n) {
            return Err(Error::UnknownState(format!("#{q}")));
        }
        for t in &transitions {
            if t.source >= n || t.target >= n {
                return Err(Error::UnknownState(format!("#{}", t.source.max(t.target))));
            }
            if t.letter >= alphabet.len() {
                return Err(Error::UnknownLetter(format!("#{}", t.letter)));
            }
            if t.weight > 1 {
                return Err(Error::Invalid(format!("distance weights are 0 or 1, got {}", t.weight)));
            }
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        Ok(DistanceAutomaton {
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

    pub fn num_letters(&self) -> usize {
        self.alphabet.len()
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn transitions(&self) -> &[DistanceTransition] {
        &self.transitions
    }

    pub fn is_total(&self) -> bool {
        let mut seen = vec![false; self.num_states() * self.num_letters()];
        for t in &self.transitions {
            seen[t.source * self.num_letters() + t.letter] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn all_accepting(&self) -> bool {
        self.accepting.iter().all(|&b| b)
    }

    /// Same automaton with a different set of initial states.
    pub fn with_initial(&self, initial: Vec<StateId>) -> Result<Self> {
        DistanceAutomaton::new(
            self.alphabet.clone(),
            self.states.clone(),
            initial,
            self.accepting.clone(),
            self.transitions.clone(),
        )
    }

    /// Per-state minimal cost after reading `u` from `costs`.
    fn step_costs(&self, costs: &[Option<u64>], s: Letter) -> Vec<Option<u64>> {
        let mut next: Vec<Option<u64>> = vec![None; self.num_states()];
        for t in &self.transitions {
            if t.letter != s {
                continue;
            }
            if let Some(c) = costs[t.source] {
                let c = c + t.weight as u64;
                let slot = &mut next[t.target];
                if slot.is_none_or(|x| c < x) {
                    *slot = Some(c);
                }
            }
        }
        next
    }

    fn start_costs(&self, from: &[StateId]) -> Vec<Option<u64>> {
        let mut costs = vec![None; self.num_states()];
        for &q in from {
            costs[q] = Some(0);
        }
        costs
    }

    fn accepted_cost(&self, costs: &[Option<u64>]) -> Option<u64> {
        (0..self.num_states())
            .filter(|&q| self.accepting[q])
            .filter_map(|q| costs[q])
            .min()
    }
}

/// Minimal weight over accepting runs on `u`; `None` stands for ∞.
pub fn distance(d: &DistanceAutomaton, u: &[Letter]) -> Option<u64> {
    let mut costs = d.start_costs(d.initial());
    for &s in u {
        costs = d.step_costs(&costs, s);
    }
    d.accepted_cost(&costs)
}

/// Abstraction domain ordered 0 < 1 < ω < ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Abs {
    Zero,
    One,
    Omega,
    Infinity,
}

impl Abs {
    fn combine(self, other: Abs) -> Abs {
        if self == Abs::Infinity || other == Abs::Infinity {
            Abs::Infinity
        } else {
            self.max(other)
        }
    }

    fn stab(self) -> Abs {
        match self {
            Abs::One => Abs::Omega,
            x => x,
        }
    }
}

impl fmt::Display for Abs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Abs::Zero => "0",
            Abs::One => "1",
            Abs::Omega => "ω",
            Abs::Infinity => "∞",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbstractMatrix {
    n: usize,
    cells: Vec<Abs>,
}

impl AbstractMatrix {
    pub fn get(&self, i: usize, j: usize) -> Abs {
        self.cells[i * self.n + j]
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn letter(d: &DistanceAutomaton, s: Letter) -> Self {
        let n = d.num_states();
        let mut cells = vec![Abs::Infinity; n * n];
        for t in d.transitions.iter().filter(|t| t.letter == s) {
            let v = if t.weight == 0 { Abs::Zero } else { Abs::One };
            let c = &mut cells[t.source * n + t.target];
            *c = (*c).min(v);
        }
        AbstractMatrix { n, cells }
    }

    pub fn product(&self, other: &AbstractMatrix) -> AbstractMatrix {
        let n = self.n;
        let mut cells = vec![Abs::Infinity; n * n];
        for i in 0..n {
            for j in 0..n {
                let x = self.cells[i * n + j];
                if x == Abs::Infinity {
                    continue;
                }
                for k in 0..n {
                    let v = x.combine(other.cells[j * n + k]);
                    let c = &mut cells[i * n + k];
                    if v < *c {
                        *c = v;
                    }
                }
            }
        }
        AbstractMatrix { n, cells }
    }

    pub fn is_idempotent(&self) -> bool {
        self.product(self) == *self
    }

    pub fn stabilize(&self) -> AbstractMatrix {
        let n = self.n;
        let mut cells = vec![Abs::Infinity; n * n];
        for i in 0..n {
            for j in 0..n {
                cells[i * n + j] = (0..n)
                    .map(|k| self.get(i, k).combine(self.get(k, k).stab()).combine(self.get(k, j)))
                    .min()
                    .unwrap_or(Abs::Infinity);
            }
        }
        AbstractMatrix { n, cells }
    }

    /// Minimum over (initial, accepting) entries.
    pub fn value(&self, d: &DistanceAutomaton) -> Abs {
        let mut best = Abs::Infinity;
        for &i in d.initial() {
            for f in (0..self.n).filter(|&f| d.is_accepting(f)) {
                best = best.min(self.get(i, f));
            }
        }
        best
    }
}

/// Least set of matrices containing the letter matrices and closed under
/// product and stabilization of idempotents.
pub fn stabilization_closure(d: &DistanceAutomaton) -> Result<Vec<AbstractMatrix>> {
    let mut index: HashSet<AbstractMatrix> = HashSet::new();
    let mut mats: Vec<AbstractMatrix> = Vec::new();
    let mut queue = VecDeque::new();
    let mut push = |m: AbstractMatrix, mats: &mut Vec<AbstractMatrix>, queue: &mut VecDeque<usize>| -> Result<()> {
        if index.contains(&m) {
            return Ok(());
        }
        if mats.len() >= MATRIX_CAP {
            return Err(Error::CapExceeded(format!("stabilization closure exceeds {MATRIX_CAP} matrices")));
        }
        index.insert(m.clone());
        mats.push(m);
        queue.push_back(mats.len() - 1);
        Ok(())
    };
    for s in 0..d.num_letters() {
        push(AbstractMatrix::letter(d, s), &mut mats, &mut queue)?;
    }
    while let Some(i) = queue.pop_front() {
        let m = mats[i].clone();
        if m.is_idempotent() {
            push(m.stabilize(), &mut mats, &mut queue)?;
        }
        // products with every matrix discovered so far, on both sides
        for j in 0..mats.len() {
            let other = mats[j].clone();
            push(m.product(&other), &mut mats, &mut queue)?;
            push(other.product(&m), &mut mats, &mut queue)?;
        }
    }
    Ok(mats)
}

/// True iff the accepted distances are bounded.
pub fn is_limited(d: &DistanceAutomaton) -> Result<bool> {
    Ok(!stabilization_closure(d)?.iter().any(|m| m.value(d) == Abs::Omega))
}

/// For each length `0..=maxlen`, the maximum distance over accepted words of
/// that length (`None` when no word of that length is accepted). Exact: it
/// explores the distinct per-state cost vectors rather than the words.
pub fn brute_force_growth(d: &DistanceAutomaton, maxlen: usize) -> Result<Vec<Option<u64>>> {
    let mut frontier: HashSet<Vec<Option<u64>>> = HashSet::from([d.start_costs(d.initial())]);
    let mut out = Vec::with_capacity(maxlen + 1);
    for len in 0..=maxlen {
        out.push(frontier.iter().filter_map(|c| d.accepted_cost(c)).max());
        if len == maxlen {
            break;
        }
        let mut next = HashSet::new();
        for c in &frontier {
            for s in 0..d.num_letters() {
                next.insert(d.step_costs(c, s));
            }
            if next.len() > MATRIX_CAP {
                return Err(Error::CapExceeded(format!("more than {MATRIX_CAP} cost vectors at length {}", len + 1)));
            }
        }
        frontier = next;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnlimitedWitness {
    pub word: LassoWord,
    pub segments: Vec<Vec<Letter>>,
    /// Index of the first segment of the loop.
    pub loop_start: usize,
    pub bound: usize,
    /// Minimal mean cost over all runs on `word`, at least `1/bound`.
    pub min_mean: Rational,
}

/// Builds a lasso on which every run of `d` has mean cost at least `1/m`, by
/// repeatedly appending a shortest segment of minimal cost exactly one after
/// which the automaton is still unlimited.
pub fn unlimited_witness(d: &DistanceAutomaton) -> Result<UnlimitedWitness> {
    let budget = 4usize.saturating_mul(1usize.checked_shl(d.num_states() as u32).unwrap_or(usize::MAX));
    unlimited_witness_with_budget(d, budget)
}

pub fn unlimited_witness_with_budget(d: &DistanceAutomaton, max_segment: usize) -> Result<UnlimitedWitness> {
    if !d.is_total() || !d.all_accepting() {
        return Err(Error::Precondition("witness extraction needs a total automaton with all states accepting".into()));
    }
    if is_limited(d)? {
        return Err(Error::Precondition("the distance automaton is limited".into()));
    }
    let mut sets: Vec<Vec<StateId>> = vec![d.initial().to_vec()];
    let mut segments: Vec<Vec<Letter>> = Vec::new();
    let loop_start = loop {
        let current = sets.last().expect("nonempty");
        let (u, next) = next_segment(d, current, max_segment)?;
        segments.push(u);
        if let Some(j) = sets.iter().position(|s| *s == next) {
            break j;
        }
        sets.push(next);
    };
    let prefix: Vec<Letter> = segments[..loop_start].concat();
    let cycle: Vec<Letter> = segments[loop_start..].concat();
    let word = LassoWord::new(prefix, cycle)?;
    let bound = segments.iter().map(Vec::len).max().unwrap_or(1);
    let min_mean = min_run_mean(d, &word).ok_or_else(|| Error::Internal("lasso product has no cycle".into()))?;
    if min_mean < Rational::new(1, bound as i128) {
        return Err(Error::Internal(format!(
            "witness check failed: minimal run mean {min_mean} below 1/{bound}"
        )));
    }
    Ok(UnlimitedWitness {
        word,
        segments,
        loop_start,
        bound,
        min_mean,
    })
}

/// Shortest (then lexicographically least) nonempty word whose minimal cost
/// from `from` is exactly one and whose reached set is still unlimited.
fn next_segment(d: &DistanceAutomaton, from: &[StateId], max_len: usize) -> Result<(Vec<Letter>, Vec<StateId>)> {
    // costs capped at 2: only "0, 1, more" matter for the segment search
    let cap = |c: Vec<Option<u64>>| -> Vec<Option<u64>> { c.into_iter().map(|x| x.map(|v| v.min(2))).collect() };
    let start = d.start_costs(from);
    let mut seen: HashMap<Vec<Option<u64>>, ()> = HashMap::from([(start.clone(), ())]);
    let mut layer: Vec<(Vec<Option<u64>>, Vec<Letter>)> = vec![(start, Vec::new())];
    let mut limited_cache: HashMap<Vec<StateId>, bool> = HashMap::new();
    for _ in 0..max_len {
        let mut next_layer = Vec::new();
        for (costs, word) in &layer {
            for s in 0..d.num_letters() {
                let next = cap(d.step_costs(costs, s));
                let min = next.iter().filter_map(|&c| c).min();
                if min.is_none_or(|m| m >= 2) || seen.contains_key(&next) {
                    continue;
                }
                seen.insert(next.clone(), ());
                let mut w = word.clone();
                w.push(s);
                if min == Some(1) {
                    let reached: Vec<StateId> = (0..d.num_states()).filter(|&q| next[q].is_some()).collect();
                    let limited = match limited_cache.get(&reached) {
                        Some(&b) => b,
                        None => {
                            let b = is_limited(&d.with_initial(reached.clone())?)?;
                            limited_cache.insert(reached.clone(), b);
                            b
                        }
                    };
                    if !limited {
                        return Ok((w, reached));
                    }
                }
                next_layer.push((next, w));
            }
        }
        if next_layer.is_empty() {
            break;
        }
        layer = next_layer;
    }
    Err(Error::BudgetExhausted(format!(
        "no unlimited segment of length at most {max_len} from {{{}}}",
        from.iter().map(|&q| d.states()[q].as_str()).collect::<Vec<_>>().join(", ")
    )))
}

/// Minimal cycle mean over the reachable part of the product of `d` with the
/// lasso `w`, i.e. the least limit-average cost of an infinite run.
pub fn min_run_mean(d: &DistanceAutomaton, w: &LassoWord) -> Option<Rational> {
    let len = w.len();
    let n = d.num_states();
    let node = |q: StateId, pos: usize| q * len + pos;
    let mut seen = vec![false; n * len];
    let mut stack: Vec<usize> = Vec::new();
    for &q in d.initial() {
        if !seen[node(q, 0)] {
            seen[node(q, 0)] = true;
            stack.push(node(q, 0));
        }
    }
    let mut g = WeightedGraph::new(n * len);
    while let Some(v) = stack.pop() {
        let (q, pos) = (v / len, v % len);
        let s = w.letter(pos);
        let np = w.next_pos(pos);
        for t in d.transitions.iter().filter(|t| t.source == q && t.letter == s) {
            let u = node(t.target, np);
            g.add_edge(v, u, Rational::from_integer(-(t.weight as i128)), None);
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    max_mean_cycle(&g).map(|c| -c.mean)
}
