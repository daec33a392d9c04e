//! Line-based text format for automata.
//!
//! ```text
//! valfn: limsup          # inf|sup|liminf|limsup|liminfavg|limsupavg|dsum
//! discount: 1/2          # only with dsum
//! alphabet: on eco off err
//! initial: p0
//! p0 -- on:2 --> p0
//! p0 -- eco,off:0 --> p1
//! p3 -- *:0 --> p3
//! ```
//!
//! A label may name several letters separated by commas, or `*` for the whole
//! alphabet. An optional `states:` line fixes the state order; otherwise states
//! are numbered by first appearance. A `#` starts a comment when it begins a
//! line or is preceded and followed by whitespace, so `#` itself can be a letter
//! (`q -- #:1 --> r`, `alphabet: a b #`).
//!
//! Distance automata use `valfn: distance`, any number of `initial:` states, an
//! `accepting:` line (default: all states) and weights 0/1. Finite-word automata
//! (NFAs) have no `valfn:` and unweighted labels `q -- a,b --> r`; their alphabet
//! defaults to `a b`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automaton::{Automaton, Letter, StateId, Transition, ValueFunction};
use crate::error::{Error, Result};
use crate::limitedness::{DistanceAutomaton, DistanceTransition};
use crate::omega::Nfa;
use crate::rational::Rational;

#[derive(Clone, Debug)]
struct Token {
    text: String,
    col: usize,
}

#[derive(Clone, Debug)]
struct Header {
    line: usize,
    col: usize,
    values: Vec<Token>,
}

#[derive(Clone, Debug)]
struct RawTransition {
    line: usize,
    source: Token,
    letters: Vec<Token>,
    weight: Option<Token>,
    target: Token,
}

#[derive(Default, Debug)]
struct RawFile {
    headers: HashMap<String, Header>,
    transitions: Vec<RawTransition>,
}

const HEADERS: [&str; 7] = [
    "valfn",
    "discount",
    "alphabet",
    "initial",
    "states",
    "accepting",
    "transitions",
];

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Removes a trailing comment and splits the rest into tokens with 1-based columns.
fn tokenize(line: &str) -> Vec<Token> {
    let chars: Vec<char> = line.chars().collect();
    let mut end = chars.len();
    for i in 0..chars.len() {
        if chars[i] != '#' {
            continue;
        }
        let before_ok = chars[..i].iter().all(|c| c.is_whitespace()) || chars[i - 1].is_whitespace();
        let at_start = chars[..i].iter().all(|c| c.is_whitespace());
        let after_ws = i + 1 < chars.len() && chars[i + 1].is_whitespace();
        if at_start || (before_ok && after_ws) {
            end = i;
            break;
        }
    }
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < end {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < end && !chars[i].is_whitespace() {
            i += 1;
        }
        tokens.push(Token {
            text: chars[start..i].iter().collect(),
            col: start + 1,
        });
    }
    tokens
}

fn parse_raw(text: &str, weighted: bool) -> Result<RawFile> {
    let mut raw = RawFile::default();
    for (idx, line) in text.lines().enumerate() {
        let ln = idx + 1;
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        let first = &tokens[0];
        if let Some(key) = first.text.strip_suffix(':') {
            let key = key.to_ascii_lowercase();
            if !HEADERS.contains(&key.as_str()) {
                return Err(perr(ln, first.col, format!("unknown header `{}`", first.text)));
            }
            let values = tokens[1..].to_vec();
            if key == "initial" {
                // several initial lines accumulate
                if let Some(h) = raw.headers.get_mut("initial") {
                    h.values.extend(values);
                    continue;
                }
            } else if raw.headers.contains_key(&key) {
                return Err(perr(ln, first.col, format!("duplicate header `{key}`")));
            }
            raw.headers.insert(
                key,
                Header {
                    line: ln,
                    col: first.col,
                    values,
                },
            );
            continue;
        }
        raw.transitions.push(parse_transition_line(ln, &tokens, weighted)?);
    }
    Ok(raw)
}

fn parse_transition_line(ln: usize, tokens: &[Token], weighted: bool) -> Result<RawTransition> {
    let dash = tokens.iter().position(|t| t.text == "--");
    let arrow = tokens.iter().position(|t| t.text == "-->");
    let (dash, arrow) = match (dash, arrow) {
        (Some(d), Some(a)) if d == 1 && a > d + 1 && a + 2 == tokens.len() => (d, a),
        _ => {
            return Err(perr(
                ln,
                tokens[0].col,
                "expected `SOURCE -- LABEL --> TARGET` or a `key: value` header",
            ))
        }
    };
    let label_col = tokens[dash + 1].col;
    let label: String = tokens[dash + 1..arrow].iter().map(|t| t.text.as_str()).collect();
    let (letters_text, weight) = if weighted {
        match label.rfind(':') {
            Some(i) if i > 0 => (
                label[..i].to_string(),
                Some(Token {
                    text: label[i + 1..].to_string(),
                    col: label_col + label[..=i].chars().count(),
                }),
            ),
            _ => return Err(perr(ln, label_col, format!("label `{label}` lacks `:weight`"))),
        }
    } else {
        (label.clone(), None)
    };
    let mut letters = Vec::new();
    let mut offset = 0;
    for part in letters_text.split(',') {
        if part.is_empty() {
            return Err(perr(ln, label_col + offset, "empty letter in label"));
        }
        letters.push(Token {
            text: part.to_string(),
            col: label_col + offset,
        });
        offset += part.chars().count() + 1;
    }
    Ok(RawTransition {
        line: ln,
        source: tokens[0].clone(),
        letters,
        weight,
        target: tokens[arrow + 1].clone(),
    })
}

struct Resolved {
    alphabet: Vec<String>,
    states: Vec<String>,
    state_index: HashMap<String, StateId>,
    fixed_states: bool,
}

impl Resolved {
    fn new(raw: &RawFile, default_alphabet: Option<&[&str]>) -> Result<Self> {
        let alphabet: Vec<String> = match raw.headers.get("alphabet") {
            Some(h) => {
                if h.values.is_empty() {
                    return Err(perr(h.line, h.col, "empty alphabet"));
                }
                let mut seen = HashMap::new();
                for t in &h.values {
                    if t.text == "*" || t.text.contains([',', ':']) {
                        return Err(perr(h.line, t.col, format!("invalid letter name `{}`", t.text)));
                    }
                    if seen.insert(t.text.clone(), ()).is_some() {
                        return Err(perr(h.line, t.col, format!("duplicate letter `{}`", t.text)));
                    }
                }
                h.values.iter().map(|t| t.text.clone()).collect()
            }
            None => match default_alphabet {
                Some(d) => d.iter().map(|s| s.to_string()).collect(),
                None => return Err(perr(1, 1, "missing `alphabet:` header")),
            },
        };
        let mut r = Resolved {
            alphabet,
            states: Vec::new(),
            state_index: HashMap::new(),
            fixed_states: false,
        };
        if let Some(h) = raw.headers.get("states") {
            for t in &h.values {
                if r.state_index.contains_key(&t.text) {
                    return Err(perr(h.line, t.col, format!("duplicate state `{}`", t.text)));
                }
                r.add_state(&t.text);
            }
            r.fixed_states = true;
        }
        Ok(r)
    }

    fn add_state(&mut self, name: &str) -> StateId {
        let id = self.states.len();
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        id
    }

    fn state(&mut self, line: usize, t: &Token) -> Result<StateId> {
        if let Some(&id) = self.state_index.get(&t.text) {
            return Ok(id);
        }
        if self.fixed_states {
            return Err(perr(line, t.col, format!("state `{}` not listed in `states:`", t.text)));
        }
        Ok(self.add_state(&t.text))
    }

    fn letters(&self, line: usize, toks: &[Token]) -> Result<Vec<Letter>> {
        if toks.len() == 1 && toks[0].text == "*" {
            return Ok((0..self.alphabet.len()).collect());
        }
        toks.iter()
            .map(|t| {
                self.alphabet
                    .iter()
                    .position(|a| *a == t.text)
                    .ok_or_else(|| perr(line, t.col, format!("letter `{}` not in alphabet", t.text)))
            })
            .collect()
    }

    fn initial_states(&mut self, raw: &RawFile, single: bool) -> Result<Vec<StateId>> {
        let h = raw
            .headers
            .get("initial")
            .ok_or_else(|| perr(1, 1, "missing `initial:` header"))?;
        if h.values.is_empty() || (single && h.values.len() != 1) {
            return Err(perr(
                h.line,
                h.col,
                if single {
                    "`initial:` must name exactly one state"
                } else {
                    "`initial:` must name at least one state"
                },
            ));
        }
        h.values.iter().map(|t| self.state(h.line, t)).collect()
    }
}

fn reject_headers(raw: &RawFile, keys: &[&str], kind: &str) -> Result<()> {
    for k in keys {
        if let Some(h) = raw.headers.get(*k) {
            return Err(perr(h.line, h.col, format!("`{k}:` is not allowed in {kind} files")));
        }
    }
    Ok(())
}

fn parse_weight(line: usize, t: &Token) -> Result<Rational> {
    t.text
        .parse::<Rational>()
        .map_err(|_| perr(line, t.col, format!("invalid weight `{}`", t.text)))
}

/// Parses a quantitative automaton; see the module docs for the format.
pub fn parse_automaton(text: &str) -> Result<Automaton> {
    let raw = parse_raw(text, true)?;
    reject_headers(&raw, &["accepting"], "quantitative automaton")?;
    let vh = raw
        .headers
        .get("valfn")
        .ok_or_else(|| perr(1, 1, "missing `valfn:` header"))?;
    if vh.values.len() != 1 {
        return Err(perr(vh.line, vh.col, "`valfn:` takes exactly one value"));
    }
    let tag = vh.values[0].text.to_ascii_lowercase();
    if tag == "distance" {
        return Err(perr(vh.line, vh.values[0].col, "distance automaton given where a quantitative automaton is expected"));
    }
    let discount = match raw.headers.get("discount") {
        Some(h) => {
            if h.values.len() != 1 {
                return Err(perr(h.line, h.col, "`discount:` takes exactly one value"));
            }
            if tag != "dsum" {
                return Err(perr(h.line, h.col, "`discount:` is only allowed with `valfn: dsum`"));
            }
            Some(parse_weight(h.line, &h.values[0])?)
        }
        None => None,
    };
    if tag == "dsum" && discount.is_none() {
        return Err(perr(vh.line, vh.col, "`valfn: dsum` requires a `discount:` header"));
    }
    let valfn = ValueFunction::from_tag(&tag, discount).map_err(|e| {
        let h = raw.headers.get("discount").unwrap_or(vh);
        perr(h.line, h.col, e.to_string())
    })?;

    let mut r = Resolved::new(&raw, None)?;
    let initial = r.initial_states(&raw, true)?[0];
    let mut transitions = Vec::new();
    for t in &raw.transitions {
        let source = r.state(t.line, &t.source)?;
        let letters = r.letters(t.line, &t.letters)?;
        let weight = parse_weight(t.line, t.weight.as_ref().expect("weighted label"))?;
        let target = r.state(t.line, &t.target)?;
        for letter in letters {
            transitions.push(Transition {
                source,
                letter,
                weight,
                target,
            });
        }
    }
    Automaton::new(r.alphabet, r.states, initial, transitions, valfn)
}

fn write_header(out: &mut String, key: &str, values: impl IntoIterator<Item = impl AsRef<str>>) {
    out.push_str(key);
    out.push(':');
    for v in values {
        out.push(' ');
        out.push_str(v.as_ref());
    }
    out.push('\n');
}

/// Renders an automaton in the text format. Parsing the output yields an
/// identical automaton (same ids, same transition multiset in the same order).
pub fn serialize_automaton(a: &Automaton) -> String {
    let mut out = String::new();
    write_header(&mut out, "valfn", [a.valfn().tag()]);
    if let Some(l) = a.valfn().discount() {
        write_header(&mut out, "discount", [l.to_string()]);
    }
    write_header(&mut out, "alphabet", a.alphabet());
    write_header(&mut out, "states", a.states());
    write_header(&mut out, "initial", [a.state_name(a.initial())]);
    for t in a.transitions() {
        let _ = writeln!(
            out,
            "{} -- {}:{} --> {}",
            a.state_name(t.source),
            a.letter_name(t.letter),
            t.weight,
            a.state_name(t.target)
        );
    }
    out
}

/// Parses a distance automaton (`valfn: distance`).
pub fn parse_distance_automaton(text: &str) -> Result<DistanceAutomaton> {
    let raw = parse_raw(text, true)?;
    reject_headers(&raw, &["discount"], "distance automaton")?;
    let vh = raw
        .headers
        .get("valfn")
        .ok_or_else(|| perr(1, 1, "missing `valfn: distance` header"))?;
    if vh.values.len() != 1 || !vh.values[0].text.eq_ignore_ascii_case("distance") {
        return Err(perr(vh.line, vh.col, "expected `valfn: distance`"));
    }
    let mut r = Resolved::new(&raw, None)?;
    let initial = r.initial_states(&raw, false)?;
    let mut transitions = Vec::new();
    for t in &raw.transitions {
        let source = r.state(t.line, &t.source)?;
        let letters = r.letters(t.line, &t.letters)?;
        let wt = t.weight.as_ref().expect("weighted label");
        let weight = match wt.text.as_str() {
            "0" => 0u8,
            "1" => 1u8,
            _ => return Err(perr(t.line, wt.col, format!("distance weights are 0 or 1, got `{}`", wt.text))),
        };
        let target = r.state(t.line, &t.target)?;
        for letter in letters {
            transitions.push(DistanceTransition {
                source,
                letter,
                weight,
                target,
            });
        }
    }
    let accepting = accepting_flags(&raw, &mut r)?;
    DistanceAutomaton::new(r.alphabet, r.states, initial, accepting, transitions)
}

fn accepting_flags(raw: &RawFile, r: &mut Resolved) -> Result<Vec<bool>> {
    match raw.headers.get("accepting") {
        Some(h) => {
            let ids: Vec<StateId> = h
                .values
                .iter()
                .map(|t| r.state(h.line, t))
                .collect::<Result<_>>()?;
            let mut flags = vec![false; r.states.len()];
            for q in ids {
                flags[q] = true;
            }
            Ok(flags)
        }
        None => Ok(vec![true; r.states.len()]),
    }
}

pub fn serialize_distance_automaton(d: &DistanceAutomaton) -> String {
    let mut out = String::new();
    write_header(&mut out, "valfn", ["distance"]);
    write_header(&mut out, "alphabet", d.alphabet());
    write_header(&mut out, "states", d.states());
    write_header(&mut out, "initial", d.initial().iter().map(|&q| d.states()[q].as_str()));
    write_header(
        &mut out,
        "accepting",
        (0..d.num_states())
            .filter(|&q| d.is_accepting(q))
            .map(|q| d.states()[q].as_str()),
    );
    for t in d.transitions() {
        let _ = writeln!(
            out,
            "{} -- {}:{} --> {}",
            d.states()[t.source],
            d.alphabet()[t.letter],
            t.weight,
            d.states()[t.target]
        );
    }
    out
}

/// Parses a finite-word automaton. Alphabet defaults to `a b`.
pub fn parse_nfa(text: &str) -> Result<Nfa> {
    let raw = parse_raw(text, false)?;
    reject_headers(&raw, &["valfn", "discount"], "NFA")?;
    let mut r = Resolved::new(&raw, Some(&["a", "b"]))?;
    let initial = r.initial_states(&raw, false)?;
    let mut transitions = Vec::new();
    for t in &raw.transitions {
        let source = r.state(t.line, &t.source)?;
        let letters = r.letters(t.line, &t.letters)?;
        let target = r.state(t.line, &t.target)?;
        for letter in letters {
            transitions.push((source, letter, target));
        }
    }
    let accepting = accepting_flags(&raw, &mut r)?;
    Nfa::new(r.alphabet, r.states, initial, accepting, transitions)
}

pub fn serialize_nfa(n: &Nfa) -> String {
    let mut out = String::new();
    write_header(&mut out, "alphabet", n.alphabet());
    write_header(&mut out, "states", n.states());
    write_header(&mut out, "initial", n.initial().iter().map(|&q| n.states()[q].as_str()));
    write_header(
        &mut out,
        "accepting",
        (0..n.num_states())
            .filter(|&q| n.is_accepting(q))
            .map(|q| n.states()[q].as_str()),
    );
    for &(p, s, q) in n.transitions() {
        let _ = writeln!(out, "{} -- {} --> {}", n.states()[p], n.alphabet()[s], n.states()[q]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1A: &str = "\
valfn: limsup   # comment
alphabet: on eco off err
initial: p0
p0 -- on:2 --> p0
p0 -- off:0 --> p1
p0 -- eco:1 --> p2
p0 -- err:0 --> p3
p1 -- on:2 --> p0
p1 -- off:0 --> p1
p1 -- eco:1 --> p2
p1 -- err:0 --> p3
p2 -- on:2 --> p0
p2 -- off:0 --> p1
p2 -- eco:1 --> p2
p2 -- err:0 --> p3
p3 -- *:0 --> p3
";

    #[test]
    fn parses_running_example() {
        let a = parse_automaton(FIG1A).unwrap();
        assert_eq!(a.num_states(), 4);
        assert_eq!(a.arrow_count(), 13);
        assert_eq!(a.transitions().len(), 16);
        assert!(a.is_deterministic());
        assert_eq!(a.valfn(), ValueFunction::LimSup);
    }

    #[test]
    fn round_trip_is_identity() {
        let a = parse_automaton(FIG1A).unwrap();
        let b = parse_automaton(&serialize_automaton(&a)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dsum_discount_round_trips() {
        let text = "valfn: dsum\ndiscount: 1/2\nalphabet: a b\ninitial: q\nq -- a:0 --> q\nq -- b:1 --> q\n";
        let a = parse_automaton(text).unwrap();
        assert_eq!(a.valfn().discount(), Some(Rational::new(1, 2)));
        let b = parse_automaton(&serialize_automaton(&a)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_transitions_survive() {
        let text = "valfn: sup\nalphabet: a\ninitial: q\nq -- a:1 --> q\nq -- a:3/2 --> q\nq -- a:1 --> q\n";
        let a = parse_automaton(text).unwrap();
        assert_eq!(a.transitions().len(), 3);
        assert_eq!(parse_automaton(&serialize_automaton(&a)).unwrap(), a);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_automaton("valfn: inf\nalphabet: a\ninitial: q\nq -- b:0 --> q\n").unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 4,
                column: 6,
                message: "letter `b` not in alphabet".into()
            }
        );
        let e = parse_automaton("valfn: inf\nalphabet: a\ninitial: q\nq -- a:x --> q\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, column: 8, .. }), "{e:?}");
        let e = parse_automaton("valfn: inf\nalphabet: a b\ninitial: q\nq -- a:0 --> q\n").unwrap_err();
        assert_eq!(
            e,
            Error::NotTotal {
                state: "q".into(),
                letter: "b".into()
            }
        );
        assert!(parse_automaton("valfn: dsum\nalphabet: a\ninitial: q\nq -- a:0 --> q\n").is_err());
        assert!(parse_automaton("valfn: inf\ndiscount: 1/2\nalphabet: a\ninitial: q\nq -- a:0 --> q\n").is_err());
        assert!(parse_automaton("valfn: inf\nalphabet: a\ninitial: q\nq - a:0 -> q\n").is_err());
    }

    #[test]
    fn hash_letter_is_not_a_comment() {
        let text = "valfn: sup\nalphabet: a #\ninitial: q  # start\nq -- a,#:0 --> q\n";
        let a = parse_automaton(text).unwrap();
        assert_eq!(a.alphabet(), ["a", "#"]);
        assert_eq!(a.transitions().len(), 2);
    }

    #[test]
    fn distance_and_nfa_formats() {
        let d = parse_distance_automaton(
            "valfn: distance\nalphabet: a b\ninitial: p\ninitial: q\naccepting: q\np -- a:1 --> q\nq -- *:0 --> q\n",
        )
        .unwrap();
        assert_eq!(d.initial(), [0, 1]);
        assert!(!d.is_accepting(0) && d.is_accepting(1));
        let d2 = parse_distance_automaton(&serialize_distance_automaton(&d)).unwrap();
        assert_eq!(d.transitions(), d2.transitions());
        assert!(parse_distance_automaton("valfn: distance\nalphabet: a\ninitial: p\np -- a:2 --> p\n").is_err());

        let n = parse_nfa("states: s t\ninitial: s\naccepting: s t\ns -- a --> s\ns -- b --> t\n").unwrap();
        assert_eq!(n.alphabet(), ["a", "b"]);
        assert_eq!(n.transitions().len(), 2);
        let n2 = parse_nfa(&serialize_nfa(&n)).unwrap();
        assert_eq!(n.transitions(), n2.transitions());
    }
}
