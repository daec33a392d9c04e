//! Quantitative automata, value functions and lasso words.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type StateId = usize;
pub type Letter = usize;

/// How the infinite weight sequence of a run is aggregated into a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueFunction {
    Inf,
    Sup,
    LimInf,
    LimSup,
    LimInfAvg,
    LimSupAvg,
    /// Discounted sum with factor `0 < λ < 1`.
    DSum(Rational),
}

impl ValueFunction {
    pub const TAGS: [&'static str; 7] = [
        "inf",
        "sup",
        "liminf",
        "limsup",
        "liminfavg",
        "limsupavg",
        "dsum",
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ValueFunction::Inf => "inf",
            ValueFunction::Sup => "sup",
            ValueFunction::LimInf => "liminf",
            ValueFunction::LimSup => "limsup",
            ValueFunction::LimInfAvg => "liminfavg",
            ValueFunction::LimSupAvg => "limsupavg",
            ValueFunction::DSum(_) => "dsum",
        }
    }

    /// Builds a value function from its tag. `discount` must be present
    /// exactly when the tag is `dsum`.
    pub fn from_tag(tag: &str, discount: Option<Rational>) -> Result<Self> {
        let vf = match tag.to_ascii_lowercase().as_str() {
            "inf" => ValueFunction::Inf,
            "sup" => ValueFunction::Sup,
            "liminf" => ValueFunction::LimInf,
            "limsup" => ValueFunction::LimSup,
            "liminfavg" => ValueFunction::LimInfAvg,
            "limsupavg" => ValueFunction::LimSupAvg,
            "dsum" => match discount {
                Some(l) => ValueFunction::DSum(l),
                None => return Err(Error::Invalid("value function dsum needs a discount factor".into())),
            },
            other => return Err(Error::Invalid(format!("unknown value function `{other}`"))),
        };
        if discount.is_some() && !matches!(vf, ValueFunction::DSum(_)) {
            return Err(Error::Invalid(format!(
                "discount factor given for value function `{}`",
                vf.tag()
            )));
        }
        vf.validate()?;
        Ok(vf)
    }

    pub fn validate(&self) -> Result<()> {
        if let ValueFunction::DSum(l) = self {
            if *l <= Rational::ZERO || *l >= Rational::ONE {
                return Err(Error::Invalid(format!("discount factor {l} is not in (0,1)")));
            }
        }
        Ok(())
    }

    pub fn discount(&self) -> Option<Rational> {
        match self {
            ValueFunction::DSum(l) => Some(*l),
            _ => None,
        }
    }

    /// Inf, Sup, LimInf and LimSup: every value is one of the weights.
    pub fn is_finite_valued(&self) -> bool {
        matches!(
            self,
            ValueFunction::Inf | ValueFunction::Sup | ValueFunction::LimInf | ValueFunction::LimSup
        )
    }

    pub fn is_limit_average(&self) -> bool {
        matches!(self, ValueFunction::LimInfAvg | ValueFunction::LimSupAvg)
    }
}

impl fmt::Display for ValueFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueFunction::DSum(l) => write!(f, "dsum({l})"),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: StateId,
    pub letter: Letter,
    pub weight: Rational,
    pub target: StateId,
}

/// A total, possibly nondeterministic, quantitative automaton.
///
/// Immutable after construction. Transitions form a multiset; parallel
/// transitions (same source, letter and target) are kept as given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: StateId,
    transitions: Vec<Transition>,
    valfn: ValueFunction,
    // transition indices per (state, letter), flattened as state * |alphabet| + letter
    outgoing: Vec<Vec<usize>>,
}

impl Automaton {
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<String>,
        initial: StateId,
        transitions: Vec<Transition>,
        valfn: ValueFunction,
    ) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::Invalid("empty alphabet".into()));
        }
        if states.is_empty() {
            return Err(Error::Invalid("no states".into()));
        }
        check_distinct("letter", &alphabet)?;
        check_distinct("state", &states)?;
        valfn.validate()?;
        if initial >= states.len() {
            return Err(Error::UnknownState(format!("#{initial}")));
        }
        let nl = alphabet.len();
        let mut outgoing = vec![Vec::new(); states.len() * nl];
        for (i, t) in transitions.iter().enumerate() {
            if t.source >= states.len() {
                return Err(Error::UnknownState(format!("#{}", t.source)));
            }
            if t.target >= states.len() {
                return Err(Error::UnknownState(format!("#{}", t.target)));
            }
            if t.letter >= nl {
                return Err(Error::UnknownLetter(format!("#{}", t.letter)));
            }
            outgoing[t.source * nl + t.letter].push(i);
        }
        for q in 0..states.len() {
            for s in 0..nl {
                if outgoing[q * nl + s].is_empty() {
                    return Err(Error::NotTotal {
                        state: states[q].clone(),
                        letter: alphabet[s].clone(),
                    });
                }
            }
        }
        Ok(Automaton {
            alphabet,
            states,
            initial,
            transitions,
            valfn,
            outgoing,
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

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn valfn(&self) -> ValueFunction {
        self.valfn
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn letter_name(&self, s: Letter) -> &str {
        &self.alphabet[s]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn letter_id(&self, name: &str) -> Result<Letter> {
        self.alphabet
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    /// Transitions leaving `q` on letter `s` (never empty).
    pub fn successors(&self, q: StateId, s: Letter) -> impl Iterator<Item = &Transition> + '_ {
        self.outgoing[q * self.alphabet.len() + s]
            .iter()
            .map(move |&i| &self.transitions[i])
    }

    /// Index (into `transitions()`) of the transitions leaving `q` on `s`.
    pub fn successor_indices(&self, q: StateId, s: Letter) -> &[usize] {
        &self.outgoing[q * self.alphabet.len() + s]
    }

    /// The unique transition on (q, s) of a deterministic automaton.
    pub fn step(&self, q: StateId, s: Letter) -> &Transition {
        &self.transitions[self.outgoing[q * self.alphabet.len() + s][0]]
    }

    pub fn is_deterministic(&self) -> bool {
        self.outgoing.iter().all(|v| v.len() == 1)
    }

    /// Distinct weights in increasing order.
    pub fn weights(&self) -> Vec<Rational> {
        let set: BTreeSet<Rational> = self.transitions.iter().map(|t| t.weight).collect();
        set.into_iter().collect()
    }

    pub fn min_weight(&self) -> Rational {
        self.transitions.iter().map(|t| t.weight).min().unwrap_or(Rational::ZERO)
    }

    pub fn max_weight(&self) -> Rational {
        self.transitions.iter().map(|t| t.weight).max().unwrap_or(Rational::ZERO)
    }

    /// Number of drawn arrows: transitions grouped by (source, weight, target).
    pub fn arrow_count(&self) -> usize {
        let set: BTreeSet<(StateId, Rational, StateId)> = self
            .transitions
            .iter()
            .map(|t| (t.source, t.weight, t.target))
            .collect();
        set.len()
    }

    /// The same automaton with initial state `q`.
    pub fn reroot(&self, q: StateId) -> Result<Automaton> {
        if q >= self.states.len() {
            return Err(Error::UnknownState(format!("#{q}")));
        }
        let mut a = self.clone();
        a.initial = q;
        Ok(a)
    }

    /// The same transition structure read under another value function.
    pub fn with_valfn(&self, valfn: ValueFunction) -> Result<Automaton> {
        valfn.validate()?;
        let mut a = self.clone();
        a.valfn = valfn;
        Ok(a)
    }

    /// Replaces every weight by `f(index, transition)`.
    pub fn map_weights(&self, mut f: impl FnMut(usize, &Transition) -> Rational) -> Automaton {
        let mut a = self.clone();
        for (i, t) in a.transitions.iter_mut().enumerate() {
            t.weight = f(i, &self.transitions[i]);
        }
        a
    }

    /// States reachable from the initial state (sorted).
    pub fn reachable_states(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for s in 0..self.num_letters() {
                for t in self.successors(q, s) {
                    if !seen[t.target] {
                        seen[t.target] = true;
                        stack.push(t.target);
                    }
                }
            }
        }
        (0..self.num_states()).filter(|&q| seen[q]).collect()
    }

    /// Restriction to the reachable part, renumbered in increasing order of
    /// the old ids. Returns the automaton and the old id of each new state.
    pub fn trim(&self) -> (Automaton, Vec<StateId>) {
        let keep = self.reachable_states();
        let mut new_id = vec![usize::MAX; self.num_states()];
        for (i, &q) in keep.iter().enumerate() {
            new_id[q] = i;
        }
        let transitions = self
            .transitions
            .iter()
            .filter(|t| new_id[t.source] != usize::MAX)
            .map(|t| Transition {
                source: new_id[t.source],
                letter: t.letter,
                weight: t.weight,
                target: new_id[t.target],
            })
            .collect();
        let states = keep.iter().map(|&q| self.states[q].clone()).collect();
        let a = Automaton::new(
            self.alphabet.clone(),
            states,
            new_id[self.initial],
            transitions,
            self.valfn,
        )
        .expect("restriction to reachable states stays total");
        (a, keep)
    }

    /// A one-state automaton over `alphabet` that assigns `c` to every word.
    pub fn constant(alphabet: Vec<String>, c: Rational, valfn: ValueFunction) -> Result<Automaton> {
        let weight = match valfn {
            // Σ λ^i x = x / (1 − λ), so the loop weight must be c·(1 − λ)
            ValueFunction::DSum(l) => c * (Rational::ONE - l),
            _ => c,
        };
        let transitions = (0..alphabet.len())
            .map(|s| Transition {
                source: 0,
                letter: s,
                weight,
                target: 0,
            })
            .collect();
        Automaton::new(alphabet, vec!["top".to_string()], 0, transitions, valfn)
    }

    /// Fails unless `other` is exactly this automaton's alphabet.
    pub fn check_same_alphabet(&self, other: &[String]) -> Result<()> {
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

fn check_distinct(kind: &str, names: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if n.is_empty() {
            return Err(Error::Invalid(format!("empty {kind} name")));
        }
        if !seen.insert(n.as_str()) {
            return Err(Error::Invalid(format!("duplicate {kind} `{n}`")));
        }
    }
    Ok(())
}

/// The ultimately periodic word `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LassoWord {
    prefix: Vec<Letter>,
    cycle: Vec<Letter>,
}

impl LassoWord {
    pub fn new(prefix: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Invalid("lasso loop must be nonempty".into()));
        }
        Ok(Self::normalize(prefix, cycle))
    }

    /// Canonical representation: primitive loop, shortest prefix. Two lassos
    /// denote the same word iff their canonical forms are equal.
    fn normalize(mut prefix: Vec<Letter>, mut cycle: Vec<Letter>) -> Self {
        let n = cycle.len();
        if let Some(d) = (1..n).find(|&d| n % d == 0 && (d..n).all(|i| cycle[i] == cycle[i - d])) {
            cycle.truncate(d);
        }
        while prefix.last().is_some_and(|&s| s == *cycle.last().expect("nonempty")) {
            prefix.pop();
            cycle.rotate_right(1);
        }
        LassoWord { prefix, cycle }
    }

    pub fn prefix(&self) -> &[Letter] {
        &self.prefix
    }

    /// The repeated part `v` of `u·v^ω`.
    pub fn cycle(&self) -> &[Letter] {
        &self.cycle
    }

    /// Total number of positions in the lasso shape, `|u| + |v|`.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Letter at shape position `pos < len()`.
    pub fn letter(&self, pos: usize) -> Letter {
        if pos < self.prefix.len() {
            self.prefix[pos]
        } else {
            self.cycle[pos - self.prefix.len()]
        }
    }

    /// Successor position in the lasso shape; the last position wraps to the loop start.
    pub fn next_pos(&self, pos: usize) -> usize {
        if pos + 1 == self.len() {
            self.prefix.len()
        } else {
            pos + 1
        }
    }

    /// The `i`-th letter of the infinite word.
    pub fn nth(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Largest letter id used, if any.
    pub fn max_letter(&self) -> Letter {
        self.prefix
            .iter()
            .chain(self.cycle.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn check_alphabet(&self, num_letters: usize) -> Result<()> {
        if self.max_letter() >= num_letters {
            return Err(Error::AlphabetMismatch(format!(
                "lasso uses letter #{} but the alphabet has {} letters",
                self.max_letter(),
                num_letters
            )));
        }
        Ok(())
    }

    /// Parses a letter sequence. Tokens are separated by whitespace or commas;
    /// a token that is not a letter is split into characters when every
    /// character is a one-character letter (so `"ab"` reads as `a b`).
    pub fn parse_word(alphabet: &[String], text: &str) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        for tok in text.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            if let Some(i) = alphabet.iter().position(|a| a == tok) {
                out.push(i);
                continue;
            }
            let mut chars = Vec::new();
            for ch in tok.chars() {
                let mut buf = [0u8; 4];
                let s: &str = ch.encode_utf8(&mut buf);
                match alphabet.iter().position(|a| a == s) {
                    Some(i) => chars.push(i),
                    None => return Err(Error::UnknownLetter(tok.to_string())),
                }
            }
            out.extend(chars);
        }
        Ok(out)
    }

    pub fn parse(alphabet: &[String], prefix: &str, cycle: &str) -> Result<Self> {
        LassoWord::new(
            Self::parse_word(alphabet, prefix)?,
            Self::parse_word(alphabet, cycle)?,
        )
    }

    pub fn display(&self, alphabet: &[String]) -> String {
        let names = |w: &[Letter]| {
            w.iter()
                .map(|&s| alphabet[s].as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        if self.prefix.is_empty() {
            format!("({})^w", names(&self.cycle))
        } else {
            format!("{} ({})^w", names(&self.prefix), names(&self.cycle))
        }
    }

    /// Every lasso with `|u| ≤ max_prefix` and `1 ≤ |v| ≤ max_loop` over
    /// `num_letters` letters, in order of (|u|, |v|, lexicographic).
    pub fn enumerate(num_letters: usize, max_prefix: usize, max_loop: usize) -> Vec<LassoWord> {
        let mut out = Vec::new();
        for pl in 0..=max_prefix {
            let prefixes = words_of_length(num_letters, pl);
            for ll in 1..=max_loop {
                let loops = words_of_length(num_letters, ll);
                for u in &prefixes {
                    for v in &loops {
                        out.push(LassoWord {
                            prefix: u.clone(),
                            cycle: v.clone(),
                        });
                    }
                }
            }
        }
        out
    }
}

/// All words of length `len` in lexicographic order.
pub fn words_of_length(num_letters: usize, len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * num_letters);
        for w in &out {
            for s in 0..num_letters {
                let mut w2 = w.clone();
                w2.push(s);
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

/// JSON shape of a lasso: letter names under `prefix` and `loop`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedLasso {
    pub prefix: Vec<String>,
    #[serde(rename = "loop")]
    pub cycle: Vec<String>,
}

impl NamedLasso {
    pub fn new(w: &LassoWord, alphabet: &[String]) -> Self {
        NamedLasso {
            prefix: w.prefix.iter().map(|&s| alphabet[s].clone()).collect(),
            cycle: w.cycle.iter().map(|&s| alphabet[s].clone()).collect(),
        }
    }

    pub fn resolve(&self, alphabet: &[String]) -> Result<LassoWord> {
        let ids = |w: &[String]| -> Result<Vec<Letter>> {
            w.iter()
                .map(|n| {
                    alphabet
                        .iter()
                        .position(|a| a == n)
                        .ok_or_else(|| Error::UnknownLetter(n.clone()))
                })
                .collect()
        };
        LassoWord::new(ids(&self.prefix)?, ids(&self.cycle)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn tr(source: usize, letter: usize, w: i64, target: usize) -> Transition {
        Transition {
            source,
            letter,
            weight: Rational::from(w),
            target,
        }
    }

    #[test]
    fn totality_is_enforced() {
        let err = Automaton::new(
            names(&["a", "b"]),
            names(&["q"]),
            0,
            vec![tr(0, 0, 0, 0)],
            ValueFunction::Inf,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::NotTotal {
                state: "q".into(),
                letter: "b".into()
            }
        );
    }

    #[test]
    fn determinism_flag_and_weights() {
        let a = Automaton::new(
            names(&["a"]),
            names(&["p", "q"]),
            0,
            vec![tr(0, 0, 1, 0), tr(0, 0, 2, 1), tr(1, 0, 1, 1)],
            ValueFunction::Sup,
        )
        .unwrap();
        assert!(!a.is_deterministic());
        assert_eq!(a.weights(), vec![Rational::from(1), Rational::from(2)]);
        assert_eq!(a.reroot(1).unwrap().initial(), 1);
        assert!(a.reroot(2).is_err());
    }

    #[test]
    fn dsum_discount_range() {
        assert!(ValueFunction::from_tag("dsum", Some(Rational::ONE)).is_err());
        assert!(ValueFunction::from_tag("dsum", None).is_err());
        assert!(ValueFunction::from_tag("inf", Some(Rational::new(1, 2))).is_err());
        assert_eq!(
            ValueFunction::from_tag("dsum", Some(Rational::new(1, 2))).unwrap(),
            ValueFunction::DSum(Rational::new(1, 2))
        );
    }

    #[test]
    fn lasso_positions_wrap_into_loop() {
        let w = LassoWord::new(vec![0, 1], vec![2, 3]).unwrap();
        assert_eq!(w.next_pos(3), 2);
        assert_eq!(w.nth(7), 3);
        assert!(LassoWord::new(vec![0], vec![]).is_err());
    }

    #[test]
    fn word_parsing_accepts_names_and_packed_letters() {
        let ab = names(&["a", "b"]);
        assert_eq!(LassoWord::parse_word(&ab, "ab a").unwrap(), vec![0, 1, 0]);
        let long = names(&["on", "off"]);
        assert_eq!(LassoWord::parse_word(&long, "on,off").unwrap(), vec![0, 1]);
        assert!(LassoWord::parse_word(&long, "x").is_err());
    }

    #[test]
    fn enumeration_counts() {
        // prefixes of length 0..=1 (1 + 2), loops of length 1..=2 (2 + 4)
        assert_eq!(LassoWord::enumerate(2, 1, 2).len(), 3 * 6);
    }
}
