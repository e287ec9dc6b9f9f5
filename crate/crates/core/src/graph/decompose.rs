//! Cycle decompositions of the incidence graph and their metrics.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::IncidenceGraph;
use crate::collection::Collection;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Pigeonhole,
    BfsPeel,
    Combined,
    Kirkman,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Pigeonhole, Strategy::BfsPeel, Strategy::Combined, Strategy::Kirkman];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Pigeonhole => "pigeonhole",
            Strategy::BfsPeel => "bfs-peel",
            Strategy::Combined => "combined",
            Strategy::Kirkman => "kirkman",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "pigeonhole" => Ok(Strategy::Pigeonhole),
            "bfs-peel" | "bfspeel" | "peel" => Ok(Strategy::BfsPeel),
            "combined" => Ok(Strategy::Combined),
            "kirkman" => Ok(Strategy::Kirkman),
            other => Err(Error::InvalidParameter(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Edge-disjoint simple cycles plus the uncovered remainder.
///
/// Each cycle lists edge ids in traversal order, rotated to start at its
/// smallest id and continuing toward the smaller neighbouring id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleDecomposition {
    pub strategy: Strategy,
    pub cycles: Vec<Vec<usize>>,
    pub remainder: Vec<usize>,
    /// Number of edges in the decomposed graph.
    pub edges: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionMetrics {
    pub cycles: usize,
    pub d: usize,
    pub mu: f64,
    pub alpha: f64,
    pub max_cycle: usize,
    /// Cycle length to count.
    pub histogram: BTreeMap<usize, usize>,
}

impl CycleDecomposition {
    pub fn is_complete(&self) -> bool {
        self.remainder.is_empty()
    }

    pub fn n_cycles(&self) -> usize {
        self.cycles.len()
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for c in &self.cycles {
            *h.entry(c.len()).or_insert(0) += 1;
        }
        h
    }

    pub fn max_cycle(&self) -> usize {
        self.cycles.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `mu = d/|σ|` and `alpha = Σ|σ_i|²/d`; requires an empty remainder.
    pub fn metrics(&self) -> Result<DecompositionMetrics> {
        if !self.is_complete() {
            return Err(Error::IncompleteDecomposition { uncovered: self.remainder.len() });
        }
        if self.cycles.is_empty() {
            return Err(Error::InvalidDecomposition("no cycles".into()));
        }
        let d = self.edges;
        let sq: usize = self.cycles.iter().map(|c| c.len() * c.len()).sum();
        Ok(DecompositionMetrics {
            cycles: self.cycles.len(),
            d,
            mu: d as f64 / self.cycles.len() as f64,
            alpha: sq as f64 / d as f64,
            max_cycle: self.max_cycle(),
            histogram: self.histogram(),
        })
    }

    /// Checks that the cycles are simple, even, at least 4 long, edge-disjoint,
    /// and together with the remainder partition the edges of `g`.
    pub fn validate(&self, g: &IncidenceGraph) -> Result<()> {
        let mut seen = vec![false; g.source_edges()];
        let mut count = 0;
        for e in self.cycles.iter().flatten().chain(&self.remainder) {
            if !g.has_edge(*e) {
                return Err(Error::InvalidDecomposition(format!("edge {e} is not in the graph")));
            }
            if std::mem::replace(&mut seen[*e], true) {
                return Err(Error::InvalidDecomposition(format!("edge {e} is used twice")));
            }
            count += 1;
        }
        if count != g.n_edges() {
            return Err(Error::InvalidDecomposition(format!(
                "{} of {} edges covered",
                count,
                g.n_edges()
            )));
        }
        if self.edges != g.n_edges() {
            return Err(Error::InvalidDecomposition(format!(
                "declared {} edges, graph has {}",
                self.edges,
                g.n_edges()
            )));
        }
        for (i, c) in self.cycles.iter().enumerate() {
            check_cycle(g, c).map_err(|msg| Error::InvalidDecomposition(format!("cycle {i}: {msg}")))?;
        }
        Ok(())
    }
}

fn shared_node(g: &IncidenceGraph, a: usize, b: usize) -> Option<usize> {
    let (a0, a1) = g.endpoints(a);
    let (b0, b1) = g.endpoints(b);
    if a0 == b0 {
        Some(a0)
    } else if a1 == b1 {
        Some(a1)
    } else {
        None
    }
}

fn check_cycle(g: &IncidenceGraph, cycle: &[usize]) -> std::result::Result<(), String> {
    let k = cycle.len();
    if k < 4 || k % 2 == 1 {
        return Err(format!("length {k} is not an even number >= 4"));
    }
    let mut nodes = Vec::with_capacity(k);
    for i in 0..k {
        let prev = cycle[(i + k - 1) % k];
        let node = shared_node(g, prev, cycle[i])
            .ok_or_else(|| format!("edges {prev} and {} are not adjacent", cycle[i]))?;
        nodes.push(node);
    }
    for i in 0..k {
        let (u, v) = g.endpoints(cycle[i]);
        let (a, b) = (nodes[i], nodes[(i + 1) % k]);
        if !((u == a && v == b) || (u == b && v == a)) {
            return Err(format!("edge {} does not continue the walk", cycle[i]));
        }
    }
    let mut sorted = nodes.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err("a node repeats".into());
    }
    Ok(())
}

/// Rotates a closed walk to start at its smallest edge id, heading toward the
/// smaller of that edge's two cycle neighbours.
pub(super) fn canonical_cycle(mut cycle: Vec<usize>) -> Vec<usize> {
    let k = cycle.len();
    let (pos, _) = cycle.iter().enumerate().min_by_key(|&(_, &e)| e).expect("nonempty cycle");
    cycle.rotate_left(pos);
    if k > 2 && cycle[k - 1] < cycle[1] {
        cycle[1..].reverse();
    }
    cycle
}

/// Mutable view of a subgraph that only loses edges.
struct Alive<'a> {
    g: &'a IncidenceGraph,
    alive: Vec<bool>,
    deg: Vec<usize>,
    cursor: Vec<usize>,
}

impl<'a> Alive<'a> {
    fn new(g: &'a IncidenceGraph, edges: &[usize]) -> Self {
        let mut alive = vec![false; g.source_edges()];
        let mut deg = vec![0; g.n_nodes()];
        for &e in edges {
            if g.has_edge(e) && !alive[e] {
                alive[e] = true;
                let (u, v) = g.endpoints(e);
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        Self { g, alive, deg, cursor: vec![0; g.n_nodes()] }
    }

    /// Smallest live edge at `u`.
    fn first(&mut self, u: usize) -> Option<(usize, usize)> {
        let list = self.g.neighbors(u);
        while self.cursor[u] < list.len() {
            let (v, e) = list[self.cursor[u]];
            if self.alive[e] {
                return Some((v, e));
            }
            self.cursor[u] += 1;
        }
        None
    }

    fn live(&self, u: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.g.neighbors(u).iter().copied().filter(|&(_, e)| self.alive[e])
    }

    fn kill(&mut self, e: usize) {
        debug_assert!(self.alive[e]);
        self.alive[e] = false;
        let (u, v) = self.g.endpoints(e);
        self.deg[u] -= 1;
        self.deg[v] -= 1;
    }

    fn live_edges(&self) -> Vec<usize> {
        (0..self.alive.len()).filter(|&e| self.alive[e]).collect()
    }
}

fn require_even(g: &IncidenceGraph, edges: &[usize]) -> Result<()> {
    let view = Alive::new(g, edges);
    let odd: Vec<usize> = (0..g.n_nodes()).filter(|&v| view.deg[v] % 2 == 1).collect();
    if odd.is_empty() {
        Ok(())
    } else {
        let show: Vec<String> = odd.iter().take(8).map(|v| node_label(g, *v)).collect();
        Err(Error::NotEulerian(format!(
            "{} odd-degree node(s): {}{}",
            odd.len(),
            show.join(", "),
            if odd.len() > 8 { ", ..." } else { "" }
        )))
    }
}

fn node_label(g: &IncidenceGraph, v: usize) -> String {
    if g.is_item(v) {
        format!("item {v}")
    } else {
        format!("set {}", v - g.n_items())
    }
}

/// Walks from the lowest live node, always taking the smallest live edge, and
/// splices off a cycle whenever the walk revisits a node on its current path.
fn pigeonhole_on(view: &mut Alive<'_>) -> Result<Vec<Vec<usize>>> {
    let nodes = view.g.n_nodes();
    let mut pos = vec![usize::MAX; nodes];
    let mut cycles = Vec::new();
    let mut start_ptr = 0;
    loop {
        while start_ptr < nodes && view.deg[start_ptr] == 0 {
            start_ptr += 1;
        }
        if start_ptr == nodes {
            break;
        }
        let start = start_ptr;
        let mut path_nodes = vec![start];
        let mut path_edges: Vec<usize> = Vec::new();
        pos[start] = 0;
        let mut cur = start;
        loop {
            let Some((v, e)) = view.first(cur) else {
                if path_edges.is_empty() {
                    break;
                }
                return Err(Error::NotEulerian(format!("walk stuck at {}", node_label(view.g, cur))));
            };
            view.kill(e);
            if pos[v] != usize::MAX {
                let k = pos[v];
                let mut cycle: Vec<usize> = path_edges.drain(k..).collect();
                cycle.push(e);
                for w in path_nodes.drain(k + 1..) {
                    pos[w] = usize::MAX;
                }
                cycles.push(canonical_cycle(cycle));
            } else {
                pos[v] = path_nodes.len();
                path_nodes.push(v);
                path_edges.push(e);
            }
            cur = v;
        }
        for w in path_nodes {
            pos[w] = usize::MAX;
        }
    }
    Ok(cycles)
}

/// Complete decomposition of an even-degree graph by walking and splicing.
pub fn decompose_pigeonhole(g: &IncidenceGraph) -> Result<CycleDecomposition> {
    let edges = g.edge_ids();
    require_even(g, &edges)?;
    let mut view = Alive::new(g, &edges);
    let cycles = pigeonhole_on(&mut view)?;
    Ok(CycleDecomposition {
        strategy: Strategy::Pigeonhole,
        cycles,
        remainder: Vec::new(),
        edges: edges.len(),
        warnings: Vec::new(),
    })
}

/// Removes item nodes of degree at most 2 and set nodes of degree at most 1
/// until none remain, moving their edges to `remainder`.
fn peel(view: &mut Alive<'_>, remainder: &mut Vec<usize>) {
    let g = view.g;
    let n = g.n_items();
    let qualifies = |v: usize, deg: &[usize]| deg[v] > 0 && deg[v] <= if v < n { 2 } else { 1 };
    let mut queued = vec![false; g.n_nodes()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for v in 0..g.n_nodes() {
        if qualifies(v, &view.deg) {
            queued[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        if !qualifies(v, &view.deg) {
            continue;
        }
        let incident: Vec<(usize, usize)> = view.live(v).collect();
        for (w, e) in incident {
            view.kill(e);
            remainder.push(e);
            if !queued[w] && qualifies(w, &view.deg) {
                queued[w] = true;
                queue.push_back(w);
            }
        }
    }
}

/// Breadth-first search from `root` until the first non-tree edge, returning
/// the cycle through the lowest common ancestor of its endpoints.
fn bfs_cycle(view: &Alive<'_>, root: usize, scratch: &mut BfsScratch) -> Option<Vec<usize>> {
    scratch.stamp += 1;
    let stamp = scratch.stamp;
    scratch.mark[root] = stamp;
    scratch.depth[root] = 0;
    scratch.parent[root] = (usize::MAX, usize::MAX);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let parent_edge = scratch.parent[u].1;
        for (v, e) in view.live(u) {
            if e == parent_edge {
                continue;
            }
            if scratch.mark[v] != stamp {
                scratch.mark[v] = stamp;
                scratch.depth[v] = scratch.depth[u] + 1;
                scratch.parent[v] = (u, e);
                queue.push_back(v);
                continue;
            }
            let (mut a, mut b) = (u, v);
            let (mut up_a, mut up_b) = (Vec::new(), Vec::new());
            while scratch.depth[a] > scratch.depth[b] {
                up_a.push(scratch.parent[a].1);
                a = scratch.parent[a].0;
            }
            while scratch.depth[b] > scratch.depth[a] {
                up_b.push(scratch.parent[b].1);
                b = scratch.parent[b].0;
            }
            while a != b {
                up_a.push(scratch.parent[a].1);
                a = scratch.parent[a].0;
                up_b.push(scratch.parent[b].1);
                b = scratch.parent[b].0;
            }
            let mut cycle = Vec::with_capacity(1 + up_a.len() + up_b.len());
            cycle.push(e);
            cycle.extend(up_b);
            cycle.extend(up_a.into_iter().rev());
            return Some(cycle);
        }
    }
    None
}

struct BfsScratch {
    stamp: u32,
    mark: Vec<u32>,
    depth: Vec<usize>,
    parent: Vec<(usize, usize)>,
}

fn bfs_peel_on(view: &mut Alive<'_>) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    let g = view.g;
    let n = g.n_items();
    let mut scratch = BfsScratch {
        stamp: 0,
        mark: vec![0; g.n_nodes()],
        depth: vec![0; g.n_nodes()],
        parent: vec![(usize::MAX, usize::MAX); g.n_nodes()],
    };
    let mut cycles = Vec::new();
    let mut remainder = Vec::new();
    loop {
        peel(view, &mut remainder);
        let Some(root) = (0..n).find(|&x| view.deg[x] > 0) else {
            break;
        };
        let cycle = bfs_cycle(view, root, &mut scratch).ok_or_else(|| {
            Error::InvalidDecomposition(format!("no cycle found from item {root} after peeling"))
        })?;
        for &e in &cycle {
            view.kill(e);
        }
        cycles.push(canonical_cycle(cycle));
    }
    remainder.sort_unstable();
    Ok((cycles, remainder))
}

/// Short-cycle decomposition of any incidence graph; edges peeled away end up
/// in the remainder.
pub fn decompose_bfs_peel(g: &IncidenceGraph) -> Result<CycleDecomposition> {
    let edges = g.edge_ids();
    let mut view = Alive::new(g, &edges);
    let (cycles, remainder) = bfs_peel_on(&mut view)?;
    Ok(CycleDecomposition { strategy: Strategy::BfsPeel, cycles, remainder, edges: edges.len(), warnings: Vec::new() })
}

/// Peel-and-search cycles first, then the walk-and-splice cover of the
/// (still even) remainder. Always complete on even-degree graphs.
pub fn decompose_combined(g: &IncidenceGraph) -> Result<CycleDecomposition> {
    let edges = g.edge_ids();
    require_even(g, &edges)?;
    let mut view = Alive::new(g, &edges);
    let (mut cycles, remainder) = bfs_peel_on(&mut view)?;
    let mut rest = Alive::new(g, &remainder);
    cycles.extend(pigeonhole_on(&mut rest)?);
    debug_assert!(rest.live_edges().is_empty());
    Ok(CycleDecomposition {
        strategy: Strategy::Combined,
        cycles,
        remainder: Vec::new(),
        edges: edges.len(),
        warnings: Vec::new(),
    })
}

/// `2⌊2 log₂ n⌋`, the length guarantee of peel-and-search cycles.
pub fn max_short_cycle(n: usize) -> usize {
    2 * (2.0 * (n as f64).log2()).floor() as usize
}

/// Runs one strategy. `kirkman` needs the full graph of an all-pairs collection.
pub fn decompose(g: &IncidenceGraph, coll: &Collection, strategy: Strategy, seed: u64) -> Result<CycleDecomposition> {
    match strategy {
        Strategy::Pigeonhole => decompose_pigeonhole(g),
        Strategy::BfsPeel => decompose_bfs_peel(g),
        Strategy::Combined => decompose_combined(g),
        Strategy::Kirkman => {
            if g.n_edges() != coll.d() {
                return Err(Error::StrategyPrecondition(
                    "kirkman decomposes the full all-pairs graph; no edges may be removed".into(),
                ));
            }
            super::decompose_kirkman(coll, seed)
        }
    }
}

/// Which side of a `min{..}` cap is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CapBranch {
    /// The logarithmic, density-dependent expression.
    Log,
    /// The `2n` ceiling.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalCaps {
    pub mu_cap: f64,
    pub alpha_cap: f64,
    pub mu_branch: CapBranch,
    pub alpha_branch: CapBranch,
}

/// Upper bounds on `mu` and `alpha` achievable on any even-degree incidence
/// graph with `n` items and `d` edges.
///
/// When `d <= 4n` every edge may sit in a cycle of length up to `2n`, so both
/// caps are `2n`.
pub fn global_caps(n: usize, d: usize) -> Result<GlobalCaps> {
    if n < 2 || d < 4 {
        return Err(Error::InvalidParameter(format!("global caps need n >= 2 and d >= 4 (n = {n}, d = {d})")));
    }
    let (nf, df) = (n as f64, d as f64);
    let two_n = 2.0 * nf;
    let l = nf.log2();
    if d <= 4 * n {
        return Ok(GlobalCaps { mu_cap: two_n, alpha_cap: two_n, mu_branch: CapBranch::Linear, alpha_branch: CapBranch::Linear });
    }
    let den = df - 4.0 * nf + 8.0 * l;
    let mu_log = if den > 0.0 { df / den * 4.0 * l } else { f64::INFINITY };
    let alpha_log = 4.0 * l + 4.0 * nf * (two_n - 4.0 * l) / df;
    let pick = |v: f64| if v < two_n { (v, CapBranch::Log) } else { (two_n, CapBranch::Linear) };
    let (mu_cap, mu_branch) = pick(mu_log);
    let (alpha_cap, alpha_branch) = pick(alpha_log);
    Ok(GlobalCaps { mu_cap, alpha_cap, mu_branch, alpha_branch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::presets;

    fn graph(coll: &Collection) -> IncidenceGraph {
        IncidenceGraph::build(coll)
    }

    #[test]
    fn pigeonhole_big_cycle() {
        let g = graph(&presets::big_cycle(5).unwrap());
        let dec = decompose_pigeonhole(&g).unwrap();
        dec.validate(&g).unwrap();
        assert_eq!(dec.cycle_lengths(), vec![10]);
    }

    #[test]
    fn pigeonhole_twin_pairs() {
        let g = graph(&presets::twin_pairs());
        let dec = decompose_pigeonhole(&g).unwrap();
        dec.validate(&g).unwrap();
        assert_eq!(dec.cycle_lengths(), vec![4, 4]);
        let m = dec.metrics().unwrap();
        assert_eq!((m.mu, m.alpha), (4.0, 4.0));
    }

    #[test]
    fn pigeonhole_empty_graph() {
        let g = graph(&presets::triangle()).restricted(&[]);
        let dec = decompose_pigeonhole(&g).unwrap();
        assert!(dec.cycles.is_empty() && dec.remainder.is_empty());
        assert!(dec.metrics().is_err());
    }

    #[test]
    fn pigeonhole_rejects_odd_graph() {
        let g = graph(&presets::all_pairs(4).unwrap());
        assert!(matches!(decompose_pigeonhole(&g), Err(Error::NotEulerian(_))));
        assert!(matches!(decompose_combined(&g), Err(Error::NotEulerian(_))));
    }

    #[test]
    fn peel_removes_big_cycle_entirely() {
        let g = graph(&presets::big_cycle(5).unwrap());
        let dec = decompose_bfs_peel(&g).unwrap();
        dec.validate(&g).unwrap();
        assert!(dec.cycles.is_empty());
        assert_eq!(dec.remainder.len(), 10);
        assert!(dec.metrics().is_err());
    }

    #[test]
    fn peel_guarantees_on_even_subsets() {
        let coll = presets::all_even_subsets(8).unwrap();
        let g = graph(&coll);
        let dec = decompose_bfs_peel(&g).unwrap();
        dec.validate(&g).unwrap();
        assert!(dec.max_cycle() <= 12);
        assert!(dec.remainder.len() <= (2 * 8 + coll.n_sets()).min(4 * 8));
    }

    #[test]
    fn combined_matches_pigeonhole_on_big_cycle() {
        let g = graph(&presets::big_cycle(6).unwrap());
        let a = decompose_combined(&g).unwrap();
        let b = decompose_pigeonhole(&g).unwrap();
        assert_eq!(a.cycles, b.cycles);
        let m = a.metrics().unwrap();
        assert_eq!((m.mu, m.alpha), (12.0, 12.0));
    }

    #[test]
    fn combined_even_subsets_six() {
        let g = graph(&presets::all_even_subsets(6).unwrap());
        let dec = decompose_combined(&g).unwrap();
        dec.validate(&g).unwrap();
        let m = dec.metrics().unwrap();
        let cap = 5.0 * 6f64.log2();
        assert!(m.mu <= cap && m.alpha <= cap, "{m:?}");
    }

    #[test]
    fn cycles_are_canonical() {
        let g = graph(&presets::all_pairs(7).unwrap());
        for c in decompose_combined(&g).unwrap().cycles {
            assert_eq!(c[0], *c.iter().min().unwrap());
            assert!(c[1] < c[c.len() - 1]);
        }
    }

    #[test]
    fn caps_examples() {
        let c = global_caps(8, 512).unwrap();
        assert!(c.mu_cap < 16.0 && c.mu_cap > 12.0);
        assert!(c.alpha_cap < 16.0 && c.alpha_cap > 12.0);
        assert_eq!(c.mu_branch, CapBranch::Log);
        let sparse = global_caps(10, 20).unwrap();
        assert_eq!((sparse.mu_cap, sparse.alpha_cap), (20.0, 20.0));
        let dense = global_caps(8, 1_000_000).unwrap();
        assert!(dense.mu_cap > 12.0 && dense.mu_cap - 12.0 < 1e-3);
        assert!(dense.alpha_cap > 12.0 && dense.alpha_cap - 12.0 < 1e-3);
        assert!(global_caps(1, 10).is_err());
    }

    #[test]
    fn short_cycle_guarantee_values() {
        assert_eq!(max_short_cycle(8), 12);
        assert_eq!(max_short_cycle(6), 10);
        assert_eq!(max_short_cycle(3), 6);
    }

    #[test]
    fn validate_catches_corruption() {
        let g = graph(&presets::twin_pairs());
        let mut dec = decompose_pigeonhole(&g).unwrap();
        dec.cycles[0].swap(1, 2);
        assert!(dec.validate(&g).is_err());
        let mut dec = decompose_pigeonhole(&g).unwrap();
        let e = dec.cycles[0].pop().unwrap();
        dec.remainder.push(e);
        assert!(dec.validate(&g).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.label().parse::<Strategy>().unwrap(), s);
        }
        assert!("magic".parse::<Strategy>().is_err());
    }
}
