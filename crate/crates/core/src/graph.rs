//! Finite weighted directed multigraphs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use num_traits::{Signed, Zero};

use crate::{Error, Rational, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: VertexId,
    pub target: VertexId,
    pub weight: Rational,
}

/// Directed multigraph with positive rational edge weights. Parallel edges
/// and loops are kept as distinct edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
    inc: Vec<Vec<EdgeId>>,
}

impl WeightedDigraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            if e.source >= n || e.target >= n {
                return Err(Error::InvalidGraph(format!("edge {id} has an endpoint out of range")));
            }
            if !e.weight.is_positive() {
                return Err(Error::InvalidGraph(format!("edge {id} has weight {}", e.weight)));
            }
            out[e.source].push(id);
            inc[e.target].push(id);
        }
        Ok(Self { n, edges, out, inc })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.inc[v]
    }

    /// `α_x`: total weight of edges leaving `v`.
    pub fn out_weight(&self, v: VertexId) -> Rational {
        self.out[v].iter().map(|&e| &self.edges[e].weight).sum()
    }

    pub fn in_weight(&self, v: VertexId) -> Rational {
        self.inc[v].iter().map(|&e| &self.edges[e].weight).sum()
    }

    /// Out-weight minus in-weight.
    pub fn divergence(&self, v: VertexId) -> Rational {
        self.out_weight(v) - self.in_weight(v)
    }

    /// Same vertices, every edge reversed, same weights and edge ids.
    pub fn reversed(&self) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { source: e.target, target: e.source, weight: e.weight.clone() })
            .collect();
        Self { n: self.n, edges, out: self.inc.clone(), inc: self.out.clone() }
    }

    /// Vertices from which `targets` can be reached along edges kept by `keep`.
    pub fn can_reach(&self, targets: &[VertexId], keep: impl Fn(EdgeId) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack: Vec<VertexId> = targets.to_vec();
        for &t in targets {
            seen[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &e in &self.inc[v] {
                let s = self.edges[e].source;
                if !seen[s] && keep(e) {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        seen
    }

    /// Shortest number of steps from each vertex to `target`, if reachable.
    pub fn distances_to(&self, target: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[target] = Some(0);
        let mut queue = alloc::collections::VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &e in &self.inc[v] {
                let s = self.edges[e].source;
                if dist[s].is_none() {
                    dist[s] = Some(d + 1);
                    queue.push_back(s);
                }
            }
        }
        dist
    }
}

/// A weighted digraph whose weight divergence vanishes at every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedGraph(WeightedDigraph);

impl BalancedGraph {
    pub fn new(graph: WeightedDigraph) -> Result<Self> {
        for v in 0..graph.vertex_count() {
            if !graph.divergence(v).is_zero() {
                return Err(Error::Unbalanced { vertex: v });
            }
        }
        Ok(Self(graph))
    }

    pub fn reverse(&self) -> Self {
        Self(self.0.reversed())
    }

    pub fn into_inner(self) -> WeightedDigraph {
        self.0
    }
}

impl Deref for BalancedGraph {
    type Target = WeightedDigraph;

    fn deref(&self) -> &WeightedDigraph {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::int;

    fn edge(s: usize, t: usize, w: i64) -> Edge {
        Edge { source: s, target: t, weight: int(w) }
    }

    #[test]
    fn balanced_cycle() {
        let g = WeightedDigraph::new(3, vec![edge(0, 1, 2), edge(1, 2, 2), edge(2, 0, 2), edge(1, 1, 5)]).unwrap();
        let b = BalancedGraph::new(g).unwrap();
        assert_eq!(b.out_weight(1), int(7));
        assert_eq!(b.reverse().reverse(), b);
        assert_eq!(b.reverse().out_weight(1), b.in_weight(1));
    }

    #[test]
    fn unbalanced_is_refused() {
        let g = WeightedDigraph::new(2, vec![edge(0, 1, 2), edge(1, 0, 1)]).unwrap();
        assert_eq!(BalancedGraph::new(g), Err(Error::Unbalanced { vertex: 0 }));
    }

    #[test]
    fn invalid_edges() {
        assert!(WeightedDigraph::new(1, vec![edge(0, 1, 1)]).is_err());
        assert!(WeightedDigraph::new(2, vec![edge(0, 1, 0)]).is_err());
    }

    #[test]
    fn reachability() {
        let g = WeightedDigraph::new(4, vec![edge(0, 1, 1), edge(1, 2, 1), edge(3, 3, 1)]).unwrap();
        assert_eq!(g.can_reach(&[2], |_| true), vec![true, true, true, false]);
        assert_eq!(g.distances_to(2), vec![Some(2), Some(1), Some(0), None]);
    }
}
