//! Exact semantics: lasso evaluation, top values and the monotone form.
//!
//! Every analysis runs on a finite labeled graph whose nodes are automaton
//! states (for top values) or pairs (state, lasso position) (for evaluation),
//! and computes for each node the best value any infinite path from it can
//! achieve. On a lasso product the paths are exactly the runs on the word, so
//! the best value at the start node is the automaton's value on the word.

use std::collections::{BTreeMap, VecDeque};

use crate::automaton::{Automaton, LassoWord, Letter, StateId, Transition, ValueFunction};
use crate::error::{Error, Result};
use crate::graph::{max_mean_cycle, sccs, WeightedGraph};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug)]
pub(crate) struct LEdge {
    pub source: usize,
    pub target: usize,
    pub letter: Letter,
    pub weight: Rational,
}

/// Finite graph with lettered, weighted edges; every node is expected to have
/// an outgoing edge.
#[derive(Clone, Debug)]
pub(crate) struct LGraph {
    pub n: usize,
    pub edges: Vec<LEdge>,
    // outgoing edges sorted by (letter, target)
    pub adj: Vec<Vec<usize>>,
}

impl LGraph {
    pub fn new(n: usize, mut edges: Vec<LEdge>) -> Self {
        edges.sort_by(|a, b| (a.source, a.letter, a.target).cmp(&(b.source, b.letter, b.target)));
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.source].push(i);
        }
        LGraph { n, edges, adj }
    }

    /// Collapses parallel transitions (same source, letter, target) keeping the
    /// largest weight. Every value function here is monotone in each weight.
    pub fn from_automaton(a: &Automaton) -> Self {
        let mut best: BTreeMap<(StateId, Letter, StateId), Rational> = BTreeMap::new();
        for t in a.transitions() {
            let e = best.entry((t.source, t.letter, t.target)).or_insert(t.weight);
            if t.weight > *e {
                *e = t.weight;
            }
        }
        let edges = best
            .into_iter()
            .map(|((source, letter, target), weight)| LEdge {
                source,
                target,
                letter,
                weight,
            })
            .collect();
        LGraph::new(a.num_states(), edges)
    }

    pub fn reachable_from(&self, start: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        for &s in start {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
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

    /// The subgraph of edges satisfying `keep`, on the same node set.
    fn filter(&self, keep: impl Fn(&LEdge) -> bool) -> LGraph {
        LGraph::new(self.n, self.edges.iter().filter(|e| keep(e)).copied().collect())
    }

    fn weighted(&self) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.n);
        for (i, e) in self.edges.iter().enumerate() {
            g.add_edge(e.source, e.target, e.weight, Some(i));
        }
        g
    }

    /// Shortest path (edge list) from `from` to any node with `is_goal`,
    /// exploring edges in (letter, target) order.
    pub fn bfs_path(&self, from: usize, is_goal: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        if is_goal(from) {
            return Some(Vec::new());
        }
        let mut pred: Vec<Option<usize>> = vec![None; self.n];
        let mut seen = vec![false; self.n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
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
                        let e = pred[cur].expect("bfs predecessor");
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

    /// A cycle through edge `e` using only edges of `self` (which must contain a
    /// path from `e.target` back to `e.source`).
    fn cycle_through(&self, e: usize) -> Vec<usize> {
        let src = self.edges[e].source;
        let mut cycle = vec![e];
        cycle.extend(
            self.bfs_path(self.edges[e].target, |v| v == src)
                .expect("edge lies inside a strongly connected component"),
        );
        cycle
    }
}

/// Objective optimized over infinite paths of an [`LGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Objective {
    LimSup,
    LimInf,
    MeanPayoff,
    Discounted(Rational),
}

impl Objective {
    fn of(valfn: ValueFunction) -> Self {
        match valfn {
            ValueFunction::LimSup | ValueFunction::Sup | ValueFunction::Inf => Objective::LimSup,
            ValueFunction::LimInf => Objective::LimInf,
            ValueFunction::LimInfAvg | ValueFunction::LimSupAvg => Objective::MeanPayoff,
            ValueFunction::DSum(l) => Objective::Discounted(l),
        }
    }
}

/// How a node attains its best value: reach a cycle and loop on it forever, or
/// follow a positional strategy (discounted sums).
#[derive(Clone, Debug)]
pub(crate) enum Goal {
    Cycle(usize),
    Policy,
}

/// Best value per node plus enough structure to extract witnesses.
#[derive(Clone, Debug)]
pub(crate) struct Analysis {
    pub values: Vec<Option<Rational>>,
    goals: Vec<Option<Goal>>,
    cycles: Vec<Vec<usize>>,
    policy: Vec<usize>,
}

impl Analysis {
    /// Edge path and cycle (edge indices) realizing the value of `node`.
    pub fn witness_edges(&self, g: &LGraph, node: usize) -> (Vec<usize>, Vec<usize>) {
        match self.goals[node].as_ref().expect("node was analysed") {
            Goal::Cycle(c) => {
                let cycle = &self.cycles[*c];
                let head = g.edges[cycle[0]].source;
                let path = g.bfs_path(node, |v| v == head).expect("goal cycle is reachable");
                (path, cycle.clone())
            }
            Goal::Policy => {
                let mut order = Vec::new();
                let mut pos = vec![usize::MAX; g.n];
                let mut v = node;
                while pos[v] == usize::MAX {
                    pos[v] = order.len();
                    let e = self.policy[v];
                    order.push(e);
                    v = g.edges[e].target;
                }
                let split = pos[v];
                (order[..split].to_vec(), order[split..].to_vec())
            }
        }
    }

    pub fn witness_lasso(&self, g: &LGraph, node: usize) -> LassoWord {
        let (path, cycle) = self.witness_edges(g, node);
        let letters = |es: &[usize]| es.iter().map(|&e| g.edges[e].letter).collect::<Vec<_>>();
        LassoWord::new(letters(&path), letters(&cycle)).expect("cycles are nonempty")
    }
}

/// Best value over infinite paths from every node.
pub(crate) fn analyse(g: &LGraph, obj: Objective) -> Analysis {
    match obj {
        Objective::LimSup => analyse_limsup(g),
        Objective::LimInf => analyse_liminf(g),
        Objective::MeanPayoff => analyse_mean(g),
        Objective::Discounted(l) => analyse_discounted(g, l),
    }
}

/// Nontrivial components of `g` with, for every node, the best goal reachable
/// through the component DAG. `score` rates a component (None: no goal inside).
fn dag_best(
    g: &LGraph,
    mut score: impl FnMut(&[usize], &LGraph) -> Option<(Rational, Vec<usize>)>,
) -> Analysis {
    let wg = g.weighted();
    let dec = sccs(&wg);
    let mut cycles = Vec::new();
    // best (value, cycle id) per component, in reverse topological order
    let mut best: Vec<Option<(Rational, usize)>> = vec![None; dec.components.len()];
    for (cid, comp) in dec.components.iter().enumerate() {
        let mut here: Option<(Rational, usize)> = None;
        if !comp.trivial {
            let inside = g.filter(|e| dec.component_of[e.source] == cid && dec.component_of[e.target] == cid);
            if let Some((val, cycle)) = score(&comp.vertices, &inside) {
                // cycle edges index `inside`; map to `g`
                let mapped = cycle
                    .iter()
                    .map(|&e| find_edge(g, &inside.edges[e]))
                    .collect();
                cycles.push(mapped);
                here = Some((val, cycles.len() - 1));
            }
        }
        for &v in &comp.vertices {
            for &e in &g.adj[v] {
                let c2 = dec.component_of[g.edges[e].target];
                if c2 == cid {
                    continue;
                }
                if let Some(b) = best[c2] {
                    if here.is_none_or(|h| b.0 > h.0) {
                        here = Some(b);
                    }
                }
            }
        }
        best[cid] = here;
    }
    let mut values = vec![None; g.n];
    let mut goals = vec![None; g.n];
    for v in 0..g.n {
        if let Some((val, c)) = best[dec.component_of[v]] {
            values[v] = Some(val);
            goals[v] = Some(Goal::Cycle(c));
        }
    }
    Analysis {
        values,
        goals,
        cycles,
        policy: Vec::new(),
    }
}

fn find_edge(g: &LGraph, e: &LEdge) -> usize {
    g.adj[e.source]
        .iter()
        .copied()
        .find(|&i| {
            let x = &g.edges[i];
            x.letter == e.letter && x.target == e.target && x.weight == e.weight
        })
        .expect("edge exists")
}

fn analyse_limsup(g: &LGraph) -> Analysis {
    dag_best(g, |_, inside| {
        // the heaviest internal edge, ties broken by (source, letter, target)
        let e = (0..inside.edges.len()).max_by(|&a, &b| {
            let (x, y) = (&inside.edges[a], &inside.edges[b]);
            x.weight
                .cmp(&y.weight)
                .then((y.source, y.letter, y.target).cmp(&(x.source, x.letter, x.target)))
        })?;
        Some((inside.edges[e].weight, inside.cycle_through(e)))
    })
}

fn analyse_mean(g: &LGraph) -> Analysis {
    dag_best(g, |_, inside| {
        // `weighted()` keeps edge order, so its edge indices are those of `inside`
        let m = max_mean_cycle(&inside.weighted())?;
        Some((m.mean, m.cycle))
    })
}

fn analyse_liminf(g: &LGraph) -> Analysis {
    let mut weights: Vec<Rational> = g.edges.iter().map(|e| e.weight).collect();
    weights.sort();
    weights.dedup();
    let mut values = vec![None; g.n];
    let mut goals = vec![None; g.n];
    let mut cycles = Vec::new();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); g.n];
    for e in &g.edges {
        reverse[e.target].push(e.source);
    }
    for &v in weights.iter().rev() {
        let sub = g.filter(|e| e.weight >= v);
        let dec = sccs(&sub.weighted());
        for (cid, comp) in dec.components.iter().enumerate() {
            if comp.trivial {
                continue;
            }
            let head = comp.vertices[0];
            let inside = sub.filter(|e| dec.component_of[e.source] == cid && dec.component_of[e.target] == cid);
            let e0 = inside.adj[head][0];
            let cycle: Vec<usize> = inside
                .cycle_through(e0)
                .iter()
                .map(|&e| find_edge(g, &inside.edges[e]))
                .collect();
            cycles.push(cycle);
            let id = cycles.len() - 1;
            // every node that can reach this component and has no better goal yet
            let mut stack: Vec<usize> = comp.vertices.clone();
            let mut seen = vec![false; g.n];
            for &x in &stack {
                seen[x] = true;
            }
            while let Some(x) = stack.pop() {
                if values[x].is_none() {
                    values[x] = Some(v);
                    goals[x] = Some(Goal::Cycle(id));
                }
                for &p in &reverse[x] {
                    if !seen[p] {
                        seen[p] = true;
                        stack.push(p);
                    }
                }
            }
        }
    }
    Analysis {
        values,
        goals,
        cycles,
        policy: Vec::new(),
    }
}

/// Exact policy iteration for `V(x) = max over edges (w + λ·V(target))`.
fn analyse_discounted(g: &LGraph, lambda: Rational) -> Analysis {
    let n = g.n;
    let has_out: Vec<bool> = (0..n).map(|v| !g.adj[v].is_empty()).collect();
    // start from the heaviest immediate edge
    let mut policy: Vec<usize> = (0..n)
        .map(|v| {
            g.adj[v]
                .iter()
                .copied()
                .max_by(|&a, &b| g.edges[a].weight.cmp(&g.edges[b].weight).then(b.cmp(&a)))
                .unwrap_or(usize::MAX)
        })
        .collect();
    loop {
        let values = evaluate_policy(g, &policy, lambda);
        let mut changed = false;
        for v in 0..n {
            if !has_out[v] {
                continue;
            }
            let cur = values[v].expect("policy value");
            let mut best: Option<(Rational, usize)> = None;
            for &e in &g.adj[v] {
                let ed = &g.edges[e];
                let q = ed.weight + lambda * values[ed.target].expect("policy value");
                if best.is_none_or(|b| q > b.0) {
                    best = Some((q, e));
                }
            }
            let (bq, be) = best.expect("node has an edge");
            if bq > cur {
                policy[v] = be;
                changed = true;
            }
        }
        if !changed {
            let goals = (0..n).map(|v| has_out[v].then_some(Goal::Policy)).collect();
            return Analysis {
                values,
                goals,
                cycles: Vec::new(),
                policy,
            };
        }
    }
}

/// Values of a positional strategy: each node's path ends in a unique cycle,
/// solved in closed form `Σ λ^i w_i / (1 − λ^L)`, then propagated backwards.
fn evaluate_policy(g: &LGraph, policy: &[usize], lambda: Rational) -> Vec<Option<Rational>> {
    let n = g.n;
    let mut values: Vec<Option<Rational>> = vec![None; n];
    // 0 = untouched, 1 = on current walk, 2 = done
    let mut state = vec![0u8; n];
    for start in 0..n {
        if state[start] != 0 || policy[start] == usize::MAX {
            continue;
        }
        let mut walk = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            v = g.edges[policy[v]].target;
        }
        let mut upto = walk.len();
        if state[v] == 1 {
            // closed a new cycle starting at v
            let k = walk.iter().position(|&x| x == v).expect("cycle node on walk");
            let cyc = &walk[k..];
            let mut num = Rational::ZERO;
            let mut pw = Rational::ONE;
            for &x in cyc {
                num += pw * g.edges[policy[x]].weight;
                pw = pw * lambda;
            }
            values[v] = Some(num / (Rational::ONE - pw));
            for &x in cyc.iter().skip(1).rev() {
                let e = &g.edges[policy[x]];
                values[x] = Some(e.weight + lambda * values[e.target].expect("successor solved"));
            }
            upto = k;
        }
        for &x in walk[..upto].iter().rev() {
            let e = &g.edges[policy[x]];
            values[x] = Some(e.weight + lambda * values[e.target].expect("successor solved"));
        }
        for &x in &walk {
            state[x] = 2;
        }
    }
    values
}

/// Product of an automaton with the shape of a lasso word.
#[derive(Clone, Debug)]
pub struct ProductGraph {
    pub num_states: usize,
    /// `|u| + |v|`; node `q * shape_len + pos` stands for (q, pos).
    pub shape_len: usize,
    /// Edge tags are indices of the automaton transitions they come from.
    pub graph: WeightedGraph,
    pub start: usize,
    pub reachable: Vec<bool>,
}

impl ProductGraph {
    pub fn node(&self, q: StateId, pos: usize) -> usize {
        q * self.shape_len + pos
    }

    pub fn decode(&self, node: usize) -> (StateId, usize) {
        (node / self.shape_len, node % self.shape_len)
    }
}

pub fn product_graph(a: &Automaton, w: &LassoWord) -> Result<ProductGraph> {
    w.check_alphabet(a.num_letters())?;
    let len = w.len();
    let mut graph = WeightedGraph::new(a.num_states() * len);
    for q in 0..a.num_states() {
        for pos in 0..len {
            let next = w.next_pos(pos);
            for &ti in a.successor_indices(q, w.letter(pos)) {
                let t = &a.transitions()[ti];
                graph.add_edge(q * len + pos, t.target * len + next, t.weight, Some(ti));
            }
        }
    }
    let start = a.initial() * len;
    let lg = LGraph::new(
        graph.num_vertices(),
        graph
            .edges()
            .iter()
            .map(|e| LEdge {
                source: e.source,
                target: e.target,
                letter: 0,
                weight: e.weight,
            })
            .collect(),
    );
    let reachable = lg.reachable_from(&[start]);
    Ok(ProductGraph {
        num_states: a.num_states(),
        shape_len: len,
        graph,
        start,
        reachable,
    })
}

/// Reusable evaluator: precomputes the collapsed transition relation and, for
/// Inf/Sup, the monotone product.
#[derive(Clone, Debug)]
pub struct Evaluator {
    valfn: ValueFunction,
    num_letters: usize,
    // automaton actually evaluated (monotone form for Inf/Sup)
    graph: LGraph,
    initial: usize,
    // edge indices per (node, letter)
    by_letter: Vec<Vec<Vec<usize>>>,
}

impl Evaluator {
    pub fn new(a: &Automaton) -> Self {
        let (graph, initial) = match a.valfn() {
            ValueFunction::Inf | ValueFunction::Sup => {
                let m = MonotoneProduct::new(a);
                let init = m.node(a.initial(), m.start_index());
                (m.graph, init)
            }
            _ => (LGraph::from_automaton(a), a.initial()),
        };
        let mut by_letter = vec![vec![Vec::new(); a.num_letters()]; graph.n];
        for (i, e) in graph.edges.iter().enumerate() {
            by_letter[e.source][e.letter].push(i);
        }
        Evaluator {
            valfn: a.valfn(),
            num_letters: a.num_letters(),
            graph,
            initial,
            by_letter,
        }
    }

    pub fn evaluate(&self, w: &LassoWord) -> Result<Rational> {
        w.check_alphabet(self.num_letters)?;
        let len = w.len();
        let g = &self.graph;
        let mut edges = Vec::new();
        // explore only the reachable part of the product
        let start = self.initial * len;
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut nodes = vec![start];
        index.insert(start, 0);
        let mut i = 0;
        while i < nodes.len() {
            let node = nodes[i];
            let (v, pos) = (node / len, node % len);
            let next = w.next_pos(pos);
            for &ei in &self.by_letter[v][w.letter(pos)] {
                let e = &g.edges[ei];
                let tn = e.target * len + next;
                let ti = *index.entry(tn).or_insert_with(|| {
                    nodes.push(tn);
                    nodes.len() - 1
                });
                edges.push(LEdge {
                    source: i,
                    target: ti,
                    letter: 0,
                    weight: e.weight,
                });
            }
            i += 1;
        }
        let pg = LGraph::new(nodes.len(), edges);
        let an = analyse(&pg, Objective::of(self.valfn));
        Ok(an.values[0].expect("start node has an infinite path"))
    }
}

/// Exact value of `a` on the lasso word `w` (supremum over runs).
pub fn evaluate_lasso(a: &Automaton, w: &LassoWord) -> Result<Rational> {
    Evaluator::new(a).evaluate(w)
}

/// Top values of every state with witness lassos.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopValueTable {
    pub values: Vec<Rational>,
    pub witnesses: Vec<LassoWord>,
}

impl TopValueTable {
    pub fn value(&self, q: StateId) -> Rational {
        self.values[q]
    }
}

/// The full product of an Inf/Sup automaton with its weight set, memorizing the
/// running maximum (Sup) or minimum (Inf). Node `q * |V| + k` stands for
/// (q, k-th smallest weight); each edge emits the updated memory.
#[derive(Clone, Debug)]
pub(crate) struct MonotoneProduct {
    pub weights: Vec<Rational>,
    pub graph: LGraph,
    pub is_sup: bool,
}

impl MonotoneProduct {
    pub fn new(a: &Automaton) -> Self {
        let is_sup = match a.valfn() {
            ValueFunction::Sup => true,
            ValueFunction::Inf => false,
            other => panic!("monotone product of a {other} automaton"),
        };
        let weights = a.weights();
        let nv = weights.len();
        let idx = |x: Rational| weights.binary_search(&x).expect("weight in set");
        let mut edges = Vec::new();
        for t in a.transitions() {
            let xi = idx(t.weight);
            for k in 0..nv {
                let k2 = if is_sup { k.max(xi) } else { k.min(xi) };
                let key = (t.source * nv + k, t.letter, t.target * nv + k2);
                edges.push(LEdge {
                    source: key.0,
                    target: key.2,
                    letter: t.letter,
                    weight: weights[k2],
                });
            }
        }
        edges.sort_by(|a, b| (a.source, a.letter, a.target).cmp(&(b.source, b.letter, b.target)));
        edges.dedup_by(|a, b| (a.source, a.letter, a.target) == (b.source, b.letter, b.target));
        let graph = LGraph::new(a.num_states() * nv, edges);
        MonotoneProduct { weights, graph, is_sup }
    }

    pub fn node(&self, q: StateId, k: usize) -> usize {
        q * self.weights.len() + k
    }

    /// Memory index before any weight has been read.
    pub fn start_index(&self) -> usize {
        if self.is_sup {
            0
        } else {
            self.weights.len() - 1
        }
    }
}

fn table_from(g: &LGraph, an: &Analysis, nodes: impl Iterator<Item = usize>) -> TopValueTable {
    let mut values = Vec::new();
    let mut witnesses = Vec::new();
    for node in nodes {
        values.push(an.values[node].expect("every state has an infinite run"));
        witnesses.push(an.witness_lasso(g, node));
    }
    TopValueTable { values, witnesses }
}

/// θ_q for every state q, from one shared analysis of the automaton graph.
pub fn state_top_values(a: &Automaton) -> TopValueTable {
    match a.valfn() {
        ValueFunction::Inf | ValueFunction::Sup => {
            let m = MonotoneProduct::new(a);
            let an = analyse(&m.graph, Objective::LimSup);
            let s = m.start_index();
            table_from(&m.graph, &an, (0..a.num_states()).map(|q| m.node(q, s)))
        }
        vf => {
            let g = LGraph::from_automaton(a);
            let an = analyse(&g, Objective::of(vf));
            table_from(&g, &an, 0..a.num_states())
        }
    }
}

/// The top value `sup_w A(w)` with a lasso attaining it.
pub fn top_value(a: &Automaton) -> (Rational, LassoWord) {
    let t = state_top_values(a);
    let q = a.initial();
    (t.values[q], t.witnesses[q].clone())
}

/// `sup` over continuations `w'` of `A(u·w')`: the best value still achievable
/// after reading the finite prefix `u`.
pub fn sup_after_prefix(a: &Automaton, u: &[Letter]) -> Rational {
    match a.valfn() {
        ValueFunction::Inf | ValueFunction::Sup => {
            let m = MonotoneProduct::new(a);
            let an = analyse(&m.graph, Objective::LimSup);
            let mut cur = vec![m.node(a.initial(), m.start_index())];
            for &s in u {
                let mut next: Vec<usize> = cur
                    .iter()
                    .flat_map(|&v| m.graph.adj[v].iter().map(|&e| &m.graph.edges[e]))
                    .filter(|e| e.letter == s)
                    .map(|e| e.target)
                    .collect();
                next.sort_unstable();
                next.dedup();
                cur = next;
            }
            cur.iter()
                .map(|&v| an.values[v].expect("analysed"))
                .max()
                .expect("total automaton has a run")
        }
        ValueFunction::DSum(l) => {
            let top = state_top_values(a);
            // best discounted prefix sum per reached state
            let mut best: BTreeMap<StateId, Rational> = BTreeMap::from([(a.initial(), Rational::ZERO)]);
            let mut scale = Rational::ONE;
            for &s in u {
                let mut next: BTreeMap<StateId, Rational> = BTreeMap::new();
                for (&q, &p) in &best {
                    for t in a.successors(q, s) {
                        let cand = p + scale * t.weight;
                        let e = next.entry(t.target).or_insert(cand);
                        if cand > *e {
                            *e = cand;
                        }
                    }
                }
                best = next;
                scale = scale * l;
            }
            best.iter()
                .map(|(&q, &p)| p + scale * top.values[q])
                .max()
                .expect("total automaton has a run")
        }
        _ => {
            let top = state_top_values(a);
            reachable_after(a, u)
                .into_iter()
                .map(|q| top.values[q])
                .max()
                .expect("total automaton has a run")
        }
    }
}

/// States reachable by reading `u` from the initial state (sorted).
pub fn reachable_after(a: &Automaton, u: &[Letter]) -> Vec<StateId> {
    let mut cur = vec![a.initial()];
    for &s in u {
        let mut next: Vec<StateId> = cur
            .iter()
            .flat_map(|&q| a.successors(q, s).map(|t| t.target))
            .collect();
        next.sort_unstable();
        next.dedup();
        cur = next;
    }
    cur
}

/// Equivalent automaton whose runs have monotone, eventually constant weight
/// sequences: the product with the weight set memorizing the running maximum
/// (Sup) or minimum (Inf). Only the reachable part is kept.
pub fn monotone_form(a: &Automaton, target: ValueFunction) -> Result<Automaton> {
    let ok = match (a.valfn(), target) {
        (ValueFunction::Sup, ValueFunction::Sup | ValueFunction::LimInf | ValueFunction::LimSup) => true,
        (ValueFunction::Inf, ValueFunction::Inf | ValueFunction::LimInf | ValueFunction::LimSup) => true,
        (ValueFunction::Sup | ValueFunction::Inf, _) => {
            return Err(Error::Invalid(format!(
                "monotone form of a {} automaton cannot be read as {}",
                a.valfn(),
                target
            )))
        }
        _ => false,
    };
    if !ok {
        return Err(Error::unsupported("monotone_form", a.valfn()));
    }
    let m = MonotoneProduct::new(a);
    let start = m.node(a.initial(), m.start_index());
    let reach = m.graph.reachable_from(&[start]);
    let mut ids = vec![usize::MAX; m.graph.n];
    let mut names = Vec::new();
    // initial state first, then the rest in node order
    let order = std::iter::once(start).chain((0..m.graph.n).filter(|&v| v != start && reach[v]));
    let nv = m.weights.len();
    for v in order {
        ids[v] = names.len();
        names.push(format!("{}@{}", a.state_name(v / nv), m.weights[v % nv]));
    }
    let mut transitions = Vec::new();
    for e in &m.graph.edges {
        if reach[e.source] {
            transitions.push(Transition {
                source: ids[e.source],
                letter: e.letter,
                weight: e.weight,
                target: ids[e.target],
            });
        }
    }
    // parallel transitions with different weights collapse to one edge in the
    // product; reintroduce nothing else since the max dominates
    Automaton::new(a.alphabet().to_vec(), names, 0, transitions, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_automaton;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    const FIG2: &str = "valfn: sup\nalphabet: a b c\ninitial: q0\nq0 -- a:0 --> q0\nq0 -- b:1 --> q1\nq0 -- c:2 --> q2\nq1 -- *:0 --> q1\nq2 -- *:0 --> q2\n";
    const DSUM: &str = "valfn: dsum\ndiscount: 1/2\nalphabet: a b\ninitial: q\nq -- a:0 --> q\nq -- b:1 --> q\n";

    fn lasso(a: &Automaton, u: &str, v: &str) -> LassoWord {
        LassoWord::parse(a.alphabet(), u, v).unwrap()
    }

    #[test]
    fn fig2_values() {
        let a = parse_automaton(FIG2).unwrap();
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "a")).unwrap(), r(0));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "a", "b")).unwrap(), r(1));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "a", "c")).unwrap(), r(2));
        let (top, w) = top_value(&a);
        assert_eq!(top, r(2));
        assert_eq!(w, lasso(&a, "c", "a"));
        let t = state_top_values(&a);
        assert_eq!(t.values, vec![r(2), r(0), r(0)]);
    }

    #[test]
    fn fig2_monotone_form_has_three_states() {
        let a = parse_automaton(FIG2).unwrap();
        let m = monotone_form(&a, ValueFunction::LimSup).unwrap();
        assert_eq!(m.num_states(), 3);
        for w in LassoWord::enumerate(3, 2, 2) {
            assert_eq!(evaluate_lasso(&a, &w).unwrap(), evaluate_lasso(&m, &w).unwrap());
        }
        assert!(monotone_form(&a, ValueFunction::Inf).is_err());
    }

    #[test]
    fn dsum_values() {
        let a = parse_automaton(DSUM).unwrap();
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "b")).unwrap(), r(2));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "a")).unwrap(), r(0));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "a", "b")).unwrap(), r(1));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "ab")).unwrap(), Rational::new(2, 3));
        assert_eq!(top_value(&a), (r(2), lasso(&a, "", "b")));
        assert_eq!(sup_after_prefix(&a, &[0]), r(1));
    }

    #[test]
    fn nondeterministic_sup_over_runs() {
        // guess on the first letter whether to collect 1 now or 2 at the first b
        let a = parse_automaton(
            "valfn: liminf\nalphabet: a b\ninitial: s\ns -- a:1 --> x\ns -- a:0 --> y\ns -- b:0 --> s\nx -- *:1 --> x\ny -- a:0 --> y\ny -- b:2 --> z\nz -- *:2 --> z\n",
        )
        .unwrap();
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "a")).unwrap(), r(1));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "a", "b")).unwrap(), r(2));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "b")).unwrap(), r(0));
    }

    #[test]
    fn inf_run_weights_decrease() {
        let a = parse_automaton(
            "valfn: inf\nalphabet: a b\ninitial: p\np -- a:2 --> p\np -- b:1 --> p\n",
        )
        .unwrap();
        let m = monotone_form(&a, ValueFunction::Inf).unwrap();
        assert_eq!(m.num_states(), 2);
        assert_eq!(evaluate_lasso(&m, &lasso(&a, "aa", "ba")).unwrap(), r(1));
        assert_eq!(evaluate_lasso(&m, &lasso(&a, "", "a")).unwrap(), r(2));
    }

    #[test]
    fn mean_payoff_picks_best_cycle() {
        let a = parse_automaton(
            "valfn: limsupavg\nalphabet: a b\ninitial: p\np -- a:0 --> p\np -- b:1 --> q\nq -- *:3 --> p\n",
        )
        .unwrap();
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "ab")).unwrap(), r(2));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "aab")).unwrap(), Rational::new(4, 3));
        assert_eq!(evaluate_lasso(&a, &lasso(&a, "", "b")).unwrap(), r(2));
        let (top, w) = top_value(&a);
        assert_eq!(top, r(2));
        assert_eq!(evaluate_lasso(&a, &w).unwrap(), r(2));
    }
}
