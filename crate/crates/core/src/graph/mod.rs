//! The bipartite item/set incidence graph of a collection.
//!
//! Nodes `0..n` are items and `n..n+m` are sets. Every edge carries the
//! canonical index of its `(item, set)` pair, so edge ids line up with
//! choice-system entries even after edges are removed.

mod decompose;
mod format;
mod kirkman;

use std::collections::VecDeque;

use serde::Serialize;

use crate::collection::Collection;
use crate::error::{Error, Result};

pub use decompose::{
    decompose, decompose_bfs_peel, decompose_combined, decompose_pigeonhole, global_caps, max_short_cycle,
    CapBranch, CycleDecomposition, DecompositionMetrics, GlobalCaps, Strategy,
};
pub use kirkman::{decompose_kirkman, steiner_triple_system, triangle_packing};

/// One `(item, set)` incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: usize,
    pub item: usize,
    pub set: usize,
}

#[derive(Debug, Clone)]
pub struct IncidenceGraph {
    n: usize,
    m: usize,
    total_edges: usize,
    edges: Vec<Option<Edge>>,
    adj: Vec<Vec<(usize, usize)>>,
}

/// Parity and connectivity summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EulerReport {
    pub eulerian: bool,
    pub even_degrees: bool,
    pub connected: bool,
    pub components: usize,
    pub odd_items: Vec<usize>,
    pub odd_sets: Vec<usize>,
    /// No cycle exists at all (the edge set is a forest).
    pub acyclic: bool,
}

/// Result of parity repair: the even-degree graph and the removed paths.
#[derive(Debug, Clone)]
pub struct EulerRepair {
    pub graph: IncidenceGraph,
    pub removed_paths: Vec<Vec<usize>>,
}

impl EulerRepair {
    pub fn removed(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.removed_paths.iter().flatten().copied().collect();
        out.sort_unstable();
        out
    }
}

impl IncidenceGraph {
    pub fn build(coll: &Collection) -> Self {
        let n = coll.n_items();
        let m = coll.n_sets();
        let mut adj = vec![Vec::new(); n + m];
        let mut edges = Vec::with_capacity(coll.d());
        for (id, &(item, set)) in coll.pairs().iter().enumerate() {
            adj[item].push((n + set, id));
            adj[n + set].push((item, id));
            edges.push(Some(Edge { id, item, set }));
        }
        Self { n, m, total_edges: coll.d(), edges, adj }
    }

    /// The subgraph keeping only the listed edge ids.
    pub fn restricted(&self, keep: &[usize]) -> Self {
        let mut mask = vec![false; self.edges.len()];
        for &e in keep {
            if self.has_edge(e) {
                mask[e] = true;
            }
        }
        self.with_mask(&mask)
    }

    fn with_mask(&self, mask: &[bool]) -> Self {
        let edges: Vec<Option<Edge>> = self
            .edges
            .iter()
            .zip(mask)
            .map(|(e, &keep)| if keep { *e } else { None })
            .collect();
        let adj = self
            .adj
            .iter()
            .map(|list| list.iter().copied().filter(|&(_, e)| mask[e]).collect())
            .collect();
        Self { n: self.n, m: self.m, total_edges: self.total_edges, edges, adj }
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn n_sets(&self) -> usize {
        self.m
    }

    pub fn n_nodes(&self) -> usize {
        self.n + self.m
    }

    /// Number of edges present.
    pub fn n_edges(&self) -> usize {
        self.edges.iter().flatten().count()
    }

    /// Edge count of the source collection, `d`.
    pub fn source_edges(&self) -> usize {
        self.total_edges
    }

    pub fn has_edge(&self, id: usize) -> bool {
        matches!(self.edges.get(id), Some(Some(_)))
    }

    pub fn edge(&self, id: usize) -> Option<Edge> {
        self.edges.get(id).copied().flatten()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().flatten().copied()
    }

    pub fn edge_ids(&self) -> Vec<usize> {
        self.edges().map(|e| e.id).collect()
    }

    /// Endpoints of an edge as node ids `(item, n + set)`.
    pub fn endpoints(&self, id: usize) -> (usize, usize) {
        let e = self.edge(id).expect("edge present");
        (e.item, self.n + e.set)
    }

    /// `(neighbor, edge id)` pairs of a node in edge-id order.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adj[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn item_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|x| self.degree(x)).collect()
    }

    pub fn set_degrees(&self) -> Vec<usize> {
        (0..self.m).map(|c| self.degree(self.n + c)).collect()
    }

    pub fn is_item(&self, node: usize) -> bool {
        node < self.n
    }

    /// Count of odd-degree set nodes.
    pub fn odd_set_count(&self) -> usize {
        self.set_degrees().iter().filter(|&&k| k % 2 == 1).count()
    }

    pub fn all_degrees_even(&self) -> bool {
        self.adj.iter().all(|a| a.len() % 2 == 0)
    }

    /// Connected components among nodes of positive degree, as sorted node lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n_nodes()];
        let mut out = Vec::new();
        for start in 0..self.n_nodes() {
            if seen[start] || self.adj[start].is_empty() {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn euler_report(&self) -> EulerReport {
        let odd_items: Vec<usize> = (0..self.n).filter(|&x| self.degree(x) % 2 == 1).collect();
        let odd_sets: Vec<usize> = (0..self.m).filter(|&c| self.degree(self.n + c) % 2 == 1).collect();
        let comps = self.components();
        let active: usize = comps.iter().map(Vec::len).sum();
        let even_degrees = odd_items.is_empty() && odd_sets.is_empty();
        let connected = comps.len() <= 1;
        EulerReport {
            eulerian: even_degrees && connected,
            even_degrees,
            connected,
            components: comps.len(),
            odd_items,
            odd_sets,
            acyclic: self.n_edges() + comps.len() == active,
        }
    }

    pub fn is_eulerian(&self) -> bool {
        self.euler_report().eulerian
    }

    /// Pairs up odd-degree nodes greedily and removes a shortest path between
    /// each pair. The lowest odd node is paired with its nearest odd node.
    pub fn eulerianize(&self) -> Result<EulerRepair> {
        let comps = self.components();
        if comps.len() > 1 {
            return Err(Error::Disconnected { components: comps.len() });
        }
        let mut mask: Vec<bool> = self.edges.iter().map(Option::is_some).collect();
        let mut work = self.clone();
        let mut removed_paths = Vec::new();
        loop {
            let Some(u) = (0..work.n_nodes()).find(|&v| work.degree(v) % 2 == 1) else {
                break;
            };
            let path = work.shortest_path_to_odd(u).ok_or_else(|| {
                Error::NotEulerian(format!("odd node {u} has no odd partner in its component"))
            })?;
            for &e in &path {
                mask[e] = false;
            }
            removed_paths.push(path);
            work = self.with_mask(&mask);
        }
        Ok(EulerRepair { graph: work, removed_paths })
    }

    fn shortest_path_to_odd(&self, src: usize) -> Option<Vec<usize>> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.n_nodes()];
        let mut seen = vec![false; self.n_nodes()];
        seen[src] = true;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if u != src && self.degree(u) % 2 == 1 {
                let mut path = Vec::new();
                let mut cur = u;
                while let Some((prev, e)) = parent[cur] {
                    path.push(e);
                    cur = prev;
                }
                path.reverse();
                return Some(path);
            }
            for &(v, e) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, e));
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Removes the given edges (used to check that cycle removal keeps parity).
    pub fn without(&self, remove: &[usize]) -> Self {
        let mut mask: Vec<bool> = self.edges.iter().map(Option::is_some).collect();
        for &e in remove {
            if e < mask.len() {
                mask[e] = false;
            }
        }
        self.with_mask(&mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::presets;

    #[test]
    fn twin_pairs_graph() {
        let g = IncidenceGraph::build(&presets::twin_pairs());
        assert_eq!((g.n_items(), g.n_sets(), g.n_edges()), (4, 3, 8));
        assert_eq!(g.item_degrees(), vec![2; 4]);
        assert_eq!(g.set_degrees(), vec![2, 2, 4]);
        let r = g.euler_report();
        assert!(r.eulerian && !r.acyclic);
    }

    #[test]
    fn all_pairs_parity() {
        let g7 = IncidenceGraph::build(&presets::all_pairs(7).unwrap());
        assert_eq!(g7.n_edges(), 42);
        assert!(g7.item_degrees().iter().all(|&k| k == 6));
        assert!(g7.set_degrees().iter().all(|&k| k == 2));
        assert!(g7.is_eulerian());
        let g4 = IncidenceGraph::build(&presets::all_pairs(4).unwrap());
        let r = g4.euler_report();
        assert!(!r.eulerian);
        assert_eq!(r.odd_items, vec![0, 1, 2, 3]);
        assert!(r.odd_sets.is_empty());
    }

    #[test]
    fn single_pair_is_a_path() {
        let g = IncidenceGraph::build(&Collection::parse("a,b").unwrap());
        assert_eq!(g.n_edges(), 2);
        let r = g.euler_report();
        assert!(r.acyclic);
        assert!(!r.eulerian);
        assert_eq!(r.odd_items, vec![0, 1]);
    }

    #[test]
    fn eulerianize_all_pairs_four() {
        let g = IncidenceGraph::build(&presets::all_pairs(4).unwrap());
        let rep = g.eulerianize().unwrap();
        assert!(rep.graph.all_degrees_even());
        assert!(rep.removed_paths.len() <= 2);
        assert_eq!(rep.graph.n_edges() + rep.removed().len(), 12);
    }

    #[test]
    fn eulerianize_identity_and_single_edge() {
        let g = IncidenceGraph::build(&presets::triangle());
        let rep = g.eulerianize().unwrap();
        assert!(rep.removed_paths.is_empty());
        assert_eq!(rep.graph.n_edges(), 6);

        // c has degree 1 and {a,b,c} has degree 3; they share one edge
        let coll = Collection::parse("a,b,c\na,b\n").unwrap();
        let g = IncidenceGraph::build(&coll);
        let rep = g.eulerianize().unwrap();
        assert_eq!(rep.removed(), vec![coll.index_of(2, 0).unwrap()]);
        assert!(rep.graph.all_degrees_even());
    }

    #[test]
    fn eulerianize_rejects_disconnected() {
        let g = IncidenceGraph::build(&Collection::parse("a,b\nc,d\n").unwrap());
        assert!(matches!(g.eulerianize(), Err(Error::Disconnected { components: 2 })));
    }
}
