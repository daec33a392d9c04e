//! Independent oracles and fixture loaders shared by the integration suites.
//! None of the oracles below call into the evaluation or decision code.
#![allow(dead_code)]

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use quantsafe::automaton::words_of_length;
use quantsafe::limitedness::DistanceAutomaton;
use quantsafe::{
    parse_automaton, parse_distance_automaton, parse_nfa, Automaton, LassoWord, Letter, Nfa, Rational, ValueFunction,
};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> Automaton {
    let text = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
    parse_automaton(&text).unwrap()
}

/// `# key: value` comment lines of a fixture.
pub fn annotations(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once(':'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn corpus(dir: &str, ext: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(fixture_dir().join(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

pub struct NfaCase {
    pub name: String,
    pub nfa: Nfa,
    pub universal: bool,
}

pub fn nfa_corpus() -> Vec<NfaCase> {
    corpus("nfa", "nfa")
        .into_iter()
        .map(|(name, text)| {
            let universal = annotations(&text)["universal"] == "yes";
            NfaCase {
                name,
                nfa: parse_nfa(&text).unwrap(),
                universal,
            }
        })
        .collect()
}

pub struct DistanceCase {
    pub name: String,
    pub aut: DistanceAutomaton,
    pub limited: bool,
    /// Hand-derived maximum distance per word length 0..=8.
    pub growth: Option<Vec<Option<u64>>>,
}

pub fn distance_corpus() -> Vec<DistanceCase> {
    corpus("distance", "qa")
        .into_iter()
        .map(|(name, text)| {
            let ann = annotations(&text);
            let growth = ann.get("growth").map(|g| {
                g.split_whitespace()
                    .map(|x| if x == "-" { None } else { Some(x.parse().unwrap()) })
                    .collect()
            });
            DistanceCase {
                name,
                aut: parse_distance_automaton(&text).unwrap(),
                limited: ann["limited"] == "yes",
                growth,
            }
        })
        .collect()
}

/// Universality over finite words by exploring every reachable subset of
/// states, with no antichain pruning. A universal verdict is also confirmed
/// on all words up to length 6.
pub fn nfa_universal_by_enumeration(n: &Nfa) -> bool {
    let post = |set: &Vec<bool>, s: Letter| {
        let mut next = vec![false; n.num_states()];
        for &(p, l, q) in n.transitions() {
            if l == s && set[p] {
                next[q] = true;
            }
        }
        next
    };
    let accepting = |set: &Vec<bool>| (0..n.num_states()).any(|q| set[q] && n.is_accepting(q));
    let start: Vec<bool> = (0..n.num_states()).map(|q| n.initial().contains(&q)).collect();
    let mut seen = vec![start.clone()];
    let mut stack = vec![start];
    let mut universal = true;
    while let Some(set) = stack.pop() {
        universal &= accepting(&set);
        for s in 0..n.alphabet().len() {
            let next = post(&set, s);
            if !seen.contains(&next) {
                seen.push(next.clone());
                stack.push(next);
            }
        }
    }
    let short = (0..=6usize).all(|len| words_of_length(n.alphabet().len(), len).iter().all(|w| n.accepts(w)));
    assert!(!universal || short, "subset exploration missed a rejected word");
    universal
}

/// The single run of a deterministic automaton on `u·v^ω`, simulated until
/// the pair (state, position in the loop) repeats: the weights of the
/// transient part and of the repeating part.
fn deterministic_run(a: &Automaton, w: &LassoWord) -> (Vec<Rational>, Vec<Rational>) {
    assert!(a.is_deterministic());
    let step = |q: usize, s: Letter| {
        a.transitions()
            .iter()
            .find(|t| t.source == q && t.letter == s)
            .map(|t| (t.weight, t.target))
            .unwrap()
    };
    let mut q = a.initial();
    let mut weights = Vec::new();
    for &s in w.prefix() {
        let (x, r) = step(q, s);
        weights.push(x);
        q = r;
    }
    let cycle = w.cycle();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pos = 0;
    loop {
        if let Some(&start) = seen.get(&(q, pos)) {
            let tail = weights.split_off(start);
            return (weights, tail);
        }
        seen.insert((q, pos), weights.len());
        let (x, r) = step(q, cycle[pos]);
        weights.push(x);
        q = r;
        pos = (pos + 1) % cycle.len();
    }
}

/// Value of a deterministic automaton on a lasso, straight from the
/// definitions of the value functions.
pub fn deterministic_value(a: &Automaton, w: &LassoWord) -> Rational {
    let (head, tail) = deterministic_run(a, w);
    let all = head.iter().chain(&tail);
    let mean = || tail.iter().copied().sum::<Rational>() / Rational::from(tail.len() as i64);
    match a.valfn() {
        ValueFunction::Inf => *all.min().unwrap(),
        ValueFunction::Sup => *all.max().unwrap(),
        ValueFunction::LimInf => *tail.iter().min().unwrap(),
        ValueFunction::LimSup => *tail.iter().max().unwrap(),
        ValueFunction::LimInfAvg | ValueFunction::LimSupAvg => mean(),
        ValueFunction::DSum(l) => {
            let mut v = Rational::ZERO;
            let mut f = Rational::ONE;
            for &x in &head {
                v += f * x;
                f = f * l;
            }
            let mut c = Rational::ZERO;
            let mut g = Rational::ONE;
            for &x in &tail {
                c += g * x;
                g = g * l;
            }
            v + f * c / (Rational::ONE - g)
        }
    }
}

/// Least cycle mean reachable in a graph given by weighted edges from `start`.
/// Every closed walk splits into simple cycles, so the minimum of
/// `cost(closed walk of length k) / k` over `k ≤ n` is the least cycle mean.
pub fn min_cycle_mean(n: usize, start: &[usize], edges: &[(usize, usize, i64)]) -> Option<Rational> {
    let mut reach = vec![false; n];
    let mut stack: Vec<usize> = start.to_vec();
    for &s in start {
        reach[s] = true;
    }
    while let Some(v) = stack.pop() {
        for &(a, b, _) in edges {
            if a == v && !reach[b] {
                reach[b] = true;
                stack.push(b);
            }
        }
    }
    let inf = i64::MAX / 4;
    let mut base = vec![vec![inf; n]; n];
    for &(a, b, c) in edges {
        if reach[a] && reach[b] {
            base[a][b] = base[a][b].min(c);
        }
    }
    let mut power = base.clone();
    let mut best: Option<Rational> = None;
    for k in 1..=n {
        for (v, row) in power.iter().enumerate() {
            if row[v] < inf {
                let m = Rational::new(row[v] as i128, k as i128);
                best = Some(best.map_or(m, |b| b.min(m)));
            }
        }
        let mut next = vec![vec![inf; n]; n];
        for i in 0..n {
            for j in 0..n {
                if power[i][j] == inf {
                    continue;
                }
                for l in 0..n {
                    if base[j][l] < inf {
                        next[i][l] = next[i][l].min(power[i][j] + base[j][l]);
                    }
                }
            }
        }
        power = next;
    }
    best
}

/// Least mean cost over the infinite runs of a distance automaton on a lasso.
pub fn distance_min_mean(d: &DistanceAutomaton, w: &LassoWord) -> Option<Rational> {
    let p = w.prefix().len();
    let len = p + w.cycle().len();
    let next = |i: usize| if i + 1 == len { p } else { i + 1 };
    let letter = |i: usize| if i < p { w.prefix()[i] } else { w.cycle()[i - p] };
    let node = |q: usize, i: usize| q * len + i;
    let edges: Vec<(usize, usize, i64)> = d
        .transitions()
        .iter()
        .flat_map(|t| {
            (0..len)
                .filter(move |&i| letter(i) == t.letter)
                .map(move |i| (node(t.source, i), node(t.target, next(i)), t.weight as i64))
        })
        .collect();
    let start: Vec<usize> = d.initial().iter().map(|&q| node(q, 0)).collect();
    min_cycle_mean(d.num_states() * len, &start, &edges)
}

/// Prints a line that survives the test harness's output capture.
pub fn report(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}
