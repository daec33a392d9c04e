//! Weighted directed multigraphs: SCCs, maximum mean cycles, negative cycles
//! and Johnson potentials. All arithmetic is exact.

use crate::error::{Error, Result};
use crate::rational::{common_denominator, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: Rational,
    /// Optional back-reference, e.g. to the automaton transition the edge came from.
    pub tag: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightedGraph {
    num_vertices: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(num_vertices: usize) -> Self {
        WeightedGraph {
            num_vertices,
            edges: Vec::new(),
        }
    }

    pub fn from_edges(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize, Rational)>) -> Self {
        let mut g = WeightedGraph::new(num_vertices);
        for (s, t, w) in edges {
            g.add_edge(s, t, w, None);
        }
        g
    }

    /// Adds an edge and returns its index. Panics on an out-of-range endpoint.
    pub fn add_edge(&mut self, source: usize, target: usize, weight: Rational, tag: Option<usize>) -> usize {
        assert!(
            source < self.num_vertices && target < self.num_vertices,
            "edge endpoint out of range"
        );
        self.edges.push(Edge {
            source,
            target,
            weight,
            tag,
        });
        self.edges.len() - 1
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Outgoing edge indices per vertex.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.source].push(i);
        }
        adj
    }

    /// Weights scaled to integers by the LCM of their denominators.
    fn integer_weights(&self) -> (Vec<i128>, i128) {
        let scale = common_denominator(self.edges.iter().map(|e| &e.weight));
        let ints = self
            .edges
            .iter()
            .map(|e| {
                let r = e.weight * Rational::from_integer(scale);
                debug_assert!(r.is_integer());
                r.numer()
            })
            .collect();
        (ints, scale)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    /// A singleton without a self-loop; it lies on no cycle.
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sccs {
    /// Components in reverse topological order: every edge leaving a
    /// component points to one listed earlier.
    pub components: Vec<Component>,
    pub component_of: Vec<usize>,
}

/// Tarjan's algorithm, iterative.
pub fn sccs(g: &WeightedGraph) -> Sccs {
    let n = g.num_vertices();
    let adj = g.adjacency();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut component_of = vec![UNSEEN; n];
    let mut components = Vec::new();
    // (vertex, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = g.edges[adj[v][*pos]].target;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let id = components.len();
                let mut vertices = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    component_of[w] = id;
                    vertices.push(w);
                    if w == v {
                        break;
                    }
                }
                vertices.sort_unstable();
                let trivial = vertices.len() == 1
                    && !adj[v].iter().any(|&e| g.edges[e].target == v);
                components.push(Component { vertices, trivial });
            }
        }
    }
    Sccs {
        components,
        component_of,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanCycle {
    pub mean: Rational,
    /// Edge indices forming a simple cycle whose mean is `mean`.
    pub cycle: Vec<usize>,
}

/// Maximum cycle mean over the whole graph, with a witness cycle.
/// Returns `None` when the graph is acyclic.
pub fn max_mean_cycle(g: &WeightedGraph) -> Option<MeanCycle> {
    let (ints, scale) = g.integer_weights();
    let decomposition = sccs(g);
    let mut best: Option<MeanCycle> = None;
    for (cid, comp) in decomposition.components.iter().enumerate() {
        if comp.trivial {
            continue;
        }
        let edges: Vec<usize> = (0..g.edges.len())
            .filter(|&e| {
                decomposition.component_of[g.edges[e].source] == cid
                    && decomposition.component_of[g.edges[e].target] == cid
            })
            .collect();
        let mean = karp(&comp.vertices, &edges, g, &ints);
        if best.as_ref().is_some_and(|b| b.mean * Rational::from_integer(scale) >= mean) {
            continue;
        }
        let cycle = tight_cycle(&comp.vertices, &edges, g, &ints, mean);
        best = Some(MeanCycle {
            mean: mean / Rational::from_integer(scale),
            cycle,
        });
    }
    best
}

/// Karp's recurrence on one strongly connected component (integer weights).
fn karp(vertices: &[usize], edges: &[usize], g: &WeightedGraph, ints: &[i128]) -> Rational {
    let n = vertices.len();
    let mut local = vec![usize::MAX; g.num_vertices()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    // d[k][v]: maximum weight of a walk with exactly k edges from vertices[0] to v
    let mut d: Vec<Vec<Option<i128>>> = vec![vec![None; n]; n + 1];
    d[0][0] = Some(0);
    for k in 1..=n {
        for &e in edges {
            let (u, v) = (local[g.edges[e].source], local[g.edges[e].target]);
            if let Some(du) = d[k - 1][u] {
                let cand = du + ints[e];
                if d[k][v].is_none_or(|x| cand > x) {
                    d[k][v] = Some(cand);
                }
            }
        }
    }
    let mut best: Option<Rational> = None;
    for v in 0..n {
        let Some(dn) = d[n][v] else { continue };
        let mut worst: Option<Rational> = None;
        for k in 0..n {
            if let Some(dk) = d[k][v] {
                let r = Rational::new(dn - dk, (n - k) as i128);
                if worst.is_none_or(|w| r < w) {
                    worst = Some(r);
                }
            }
        }
        if let Some(w) = worst {
            if best.is_none_or(|b| w > b) {
                best = Some(w);
            }
        }
    }
    best.expect("strongly connected component with a cycle has a walk of length n")
}

/// Finds a cycle of mean exactly `mean` (integer-scaled) inside an SCC whose
/// maximum mean is `mean`: after reweighting to `q·w − p` no cycle is positive,
/// and the optimal cycle consists of edges tight for longest-path potentials.
fn tight_cycle(vertices: &[usize], edges: &[usize], g: &WeightedGraph, ints: &[i128], mean: Rational) -> Vec<usize> {
    let (p, q) = (mean.numer(), mean.denom());
    let w: Vec<i128> = edges.iter().map(|&e| q * ints[e] - p).collect();
    let n = g.num_vertices();
    let mut dist = vec![0i128; n];
    for _ in 0..vertices.len() {
        let mut changed = false;
        for (i, &e) in edges.iter().enumerate() {
            let (u, v) = (g.edges[e].source, g.edges[e].target);
            if dist[u] + w[i] > dist[v] {
                dist[v] = dist[u] + w[i];
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut tight_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &e) in edges.iter().enumerate() {
        let (u, v) = (g.edges[e].source, g.edges[e].target);
        if dist[u] + w[i] == dist[v] {
            tight_adj[u].push(e);
        }
    }
    find_cycle(vertices, &tight_adj, g).expect("optimal cycle lies in the tight subgraph")
}

/// Any cycle in the subgraph given by `adj` (edge indices), searched from `vertices`.
fn find_cycle(vertices: &[usize], adj: &[Vec<usize>], g: &WeightedGraph) -> Option<Vec<usize>> {
    // colors: 0 unvisited, 1 on current path, 2 done
    let mut color = vec![0u8; g.num_vertices()];
    for &root in vertices {
        if color[root] != 0 {
            continue;
        }
        let mut path_edges: Vec<usize> = Vec::new();
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = 1;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let e = adj[v][*pos];
                *pos += 1;
                let t = g.edges[e].target;
                if color[t] == 1 {
                    // close the cycle: edges from t's position on the path to here
                    let start = call.iter().position(|&(x, _)| x == t).expect("on path");
                    let mut cycle = path_edges[start..].to_vec();
                    cycle.push(e);
                    return Some(cycle);
                }
                if color[t] == 0 {
                    color[t] = 1;
                    path_edges.push(e);
                    call.push((t, 0));
                }
                continue;
            }
            color[v] = 2;
            call.pop();
            path_edges.pop();
        }
    }
    None
}

/// Bellman-Ford from a virtual source with 0-edges to every vertex.
/// Returns the edge indices of a negative cycle, if one exists.
pub fn detect_negative_cycle(g: &WeightedGraph) -> Option<Vec<usize>> {
    bellman_ford(g).err()
}

/// Shortest distances from the virtual source (all ≤ 0), or a negative cycle.
fn bellman_ford(g: &WeightedGraph) -> std::result::Result<Vec<i128>, Vec<usize>> {
    let (ints, _) = g.integer_weights();
    let n = g.num_vertices();
    let mut dist = vec![0i128; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut last_relaxed = None;
    for _ in 0..=n {
        last_relaxed = None;
        for (i, e) in g.edges.iter().enumerate() {
            let cand = dist[e.source] + ints[i];
            if cand < dist[e.target] {
                dist[e.target] = cand;
                pred[e.target] = Some(i);
                last_relaxed = Some(e.target);
            }
        }
        if last_relaxed.is_none() {
            return Ok(dist);
        }
    }
    // still relaxing after n+1 rounds: walking predecessors n times lands on a cycle
    let mut v = last_relaxed.expect("relaxed in last round");
    for _ in 0..n {
        v = g.edges[pred[v].expect("relaxed vertex has a predecessor")].source;
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let e = pred[v].expect("cycle vertex has a predecessor");
        cycle.push(e);
        v = g.edges[e].source;
        if v == start {
            break;
        }
    }
    cycle.reverse();
    Err(cycle)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reweighting {
    /// Potential per vertex.
    pub h: Vec<Rational>,
    /// Reweighted edge weights `γ'(u→v) = γ(u→v) + h(u) − h(v)`, all nonnegative.
    pub gamma_prime: Vec<Rational>,
}

/// Johnson's potentials from Bellman-Ford; fails with the vertices of a
/// negative cycle when one exists.
pub fn johnson_reweight(g: &WeightedGraph) -> Result<Reweighting> {
    let (_, scale) = g.integer_weights();
    let dist = bellman_ford(g).map_err(|cycle| {
        Error::NegativeCycle(cycle.iter().map(|&e| g.edges[e].source).collect())
    })?;
    let scale = Rational::from_integer(scale);
    let h: Vec<Rational> = dist.iter().map(|&d| Rational::from_integer(d) / scale).collect();
    let gamma_prime = g
        .edges
        .iter()
        .map(|e| e.weight + h[e.source] - h[e.target])
        .collect();
    Ok(Reweighting { h, gamma_prime })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    fn fig1a_graph() -> WeightedGraph {
        // p0..p3 as in the running example, one edge per letter transition
        let mut edges = Vec::new();
        for p in 0..3 {
            edges.push((p, 0, r(2)));
            edges.push((p, 1, r(0)));
            edges.push((p, 2, r(1)));
            edges.push((p, 3, r(0)));
        }
        for _ in 0..4 {
            edges.push((3, 3, r(0)));
        }
        WeightedGraph::from_edges(4, edges)
    }

    #[test]
    fn sccs_of_running_example() {
        let s = sccs(&fig1a_graph());
        assert_eq!(s.components.len(), 2);
        assert_eq!(s.components[0].vertices, vec![3]);
        assert_eq!(s.components[1].vertices, vec![0, 1, 2]);
        assert!(!s.components[0].trivial);
    }

    #[test]
    fn sccs_small_cases() {
        let g = WeightedGraph::from_edges(1, [(0, 0, r(1))]);
        let s = sccs(&g);
        assert_eq!(s.components.len(), 1);
        assert!(!s.components[0].trivial);

        let g = WeightedGraph::from_edges(2, [(0, 1, r(1))]);
        let s = sccs(&g);
        assert_eq!(s.components.len(), 2);
        assert!(s.components.iter().all(|c| c.trivial));
        // reverse topological: the sink 1 comes first
        assert_eq!(s.components[0].vertices, vec![1]);
    }

    #[test]
    fn max_mean_examples() {
        let tri = WeightedGraph::from_edges(3, [(0, 1, r(1)), (1, 2, r(2)), (2, 0, r(3))]);
        let m = max_mean_cycle(&tri).unwrap();
        assert_eq!(m.mean, r(2));
        assert_eq!(m.cycle.len(), 3);

        let g = WeightedGraph::from_edges(1, [(0, 0, r(5))]);
        assert_eq!(max_mean_cycle(&g).unwrap().mean, r(5));

        let g = WeightedGraph::from_edges(2, [(0, 0, r(0)), (1, 1, r(1))]);
        let m = max_mean_cycle(&g).unwrap();
        assert_eq!(m.mean, r(1));
        assert_eq!(m.cycle.len(), 1);
        assert_eq!(g.edges()[m.cycle[0]].source, 1);

        assert!(max_mean_cycle(&WeightedGraph::from_edges(2, [(0, 1, r(1))])).is_none());
    }

    #[test]
    fn fractional_means() {
        let g = WeightedGraph::from_edges(
            2,
            [(0, 1, Rational::new(1, 2)), (1, 0, Rational::new(1, 3)), (0, 0, Rational::new(1, 4))],
        );
        assert_eq!(max_mean_cycle(&g).unwrap().mean, Rational::new(5, 12));
    }

    #[test]
    fn negative_cycles() {
        let g = WeightedGraph::from_edges(1, [(0, 0, r(-1))]);
        assert_eq!(detect_negative_cycle(&g), Some(vec![0]));
        let g = WeightedGraph::from_edges(2, [(0, 1, r(1)), (1, 0, r(0))]);
        assert_eq!(detect_negative_cycle(&g), None);
        let g = WeightedGraph::from_edges(2, [(0, 1, r(-2)), (1, 0, r(3))]);
        assert_eq!(detect_negative_cycle(&g), None);
        let g = WeightedGraph::from_edges(3, [(0, 1, r(1)), (1, 2, r(-2)), (2, 1, r(1)), (2, 0, r(0))]);
        let c = detect_negative_cycle(&g).unwrap();
        let total: Rational = c.iter().map(|&e| g.edges()[e].weight).sum();
        assert!(total < Rational::ZERO);
    }

    #[test]
    fn johnson_examples() {
        let g = WeightedGraph::from_edges(2, [(0, 1, r(-2)), (1, 0, r(3))]);
        let rw = johnson_reweight(&g).unwrap();
        assert_eq!(rw.h, vec![r(0), r(-2)]);
        assert_eq!(rw.gamma_prime, vec![r(0), r(1)]);

        let g = WeightedGraph::from_edges(2, [(0, 1, r(2)), (1, 1, r(0))]);
        let rw = johnson_reweight(&g).unwrap();
        assert_eq!(rw.h, vec![r(0), r(0)]);
        assert_eq!(rw.gamma_prime, vec![r(2), r(0)]);

        let g = WeightedGraph::from_edges(1, [(0, 0, r(-1))]);
        assert_eq!(johnson_reweight(&g), Err(Error::NegativeCycle(vec![0])));
    }
}
