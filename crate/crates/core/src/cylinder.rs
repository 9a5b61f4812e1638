//! The finite cylinder graph `G_{N,L}`.
//!
//! The slab `{0 ≤ x·u ≤ L k ‖u‖²}` of `Z^d` is wrapped on the torus obtained by
//! identifying sites that differ by `N u_i` (`i ≥ 2`). Two vertices are added:
//! a sink `∂` collecting every edge that leaves through the left end and
//! emitting every edge that enters through it, and a collector `R` doing the
//! same at the right end. A single closing edge `R → ∂` carries the weight
//! that makes the divergence vanish at both.
//!
//! Vertex ids: `∂` is 0, slab vertices follow in increasing level, `R` is last.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use num_traits::{Signed, Zero};

use crate::graph::{BalancedGraph, Edge, EdgeId, VertexId, WeightedDigraph};
use crate::lattice::DirectionFrame;
use crate::model::{dot, int, ProjectedMoments, RationalDisplay, WeightSystem};
use crate::{Error, Rational, Result, Site};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Induced by a lattice edge inside the slab.
    Interior,
    /// Slab vertex to `∂`.
    ExitLeft,
    /// `∂` to slab vertex.
    EnterLeft,
    /// Slab vertex to `R`.
    ExitRight,
    /// `R` to slab vertex.
    EnterRight,
    /// The edge `R → ∂`.
    Closing,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Interior => "interior",
            EdgeKind::ExitLeft => "exit-left",
            EdgeKind::EnterLeft => "enter-left",
            EdgeKind::ExitRight => "exit-right",
            EdgeKind::EnterRight => "enter-right",
            EdgeKind::Closing => "closing",
        }
    }
}

/// Provenance of a cylinder edge: its kind and the lattice step it comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeInfo {
    pub kind: EdgeKind,
    pub step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VertexKey {
    Sink,
    Right,
    /// Level `x·u` and torus coordinates `m_i mod N`.
    Site { level: i64, torus: Site },
}

impl fmt::Display for VertexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKey::Sink => f.write_str("D"),
            VertexKey::Right => f.write_str("R"),
            VertexKey::Site { level, torus } => {
                write!(f, "{level}")?;
                for m in torus {
                    write!(f, ":{m}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CylinderGraph {
    n: i64,
    l: i64,
    level_max: i64,
    torus_size: usize,
    frame: DirectionFrame,
    weights: WeightSystem,
    moments: ProjectedMoments,
    graph: BalancedGraph,
    info: Vec<EdgeInfo>,
    keys: Vec<VertexKey>,
    sites: Vec<Option<Site>>,
    left_set: Vec<VertexId>,
    right_set: Vec<VertexId>,
    closing_edge: EdgeId,
    reversed: bool,
}

pub const SINK: VertexId = 0;

impl CylinderGraph {
    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn l(&self) -> i64 {
        self.l
    }

    /// Largest level `L k ‖u‖²` inside the slab.
    pub fn level_max(&self) -> i64 {
        self.level_max
    }

    pub fn frame(&self) -> &DirectionFrame {
        &self.frame
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn graph(&self) -> &BalancedGraph {
        &self.graph
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn sink(&self) -> VertexId {
        SINK
    }

    pub fn right(&self) -> VertexId {
        self.keys.len() - 1
    }

    pub fn closing_edge(&self) -> EdgeId {
        self.closing_edge
    }

    pub fn edge_info(&self, e: EdgeId) -> EdgeInfo {
        self.info[e]
    }

    pub fn key(&self, v: VertexId) -> &VertexKey {
        &self.keys[v]
    }

    /// Representative lattice site of a slab vertex.
    pub fn site(&self, v: VertexId) -> Option<&[i64]> {
        self.sites[v].as_deref()
    }

    pub fn left_set(&self) -> &[VertexId] {
        &self.left_set
    }

    pub fn right_set(&self) -> &[VertexId] {
        &self.right_set
    }

    /// Number of slab vertices per level, `N^{d−1}`.
    pub fn torus_size(&self) -> usize {
        self.torus_size
    }

    pub fn slab_vertices(&self) -> core::ops::Range<VertexId> {
        1..self.keys.len() - 1
    }

    /// Slab vertex holding the class of `x`, if `x` lies in the slab.
    pub fn vertex_of_site(&self, x: &[i64]) -> Option<VertexId> {
        let (level, m) = self.frame.coordinates(x);
        if !(0..=self.level_max).contains(&level) {
            return None;
        }
        Some(self.slab_vertex(level, &m))
    }

    fn slab_vertex(&self, level: i64, m: &[i64]) -> VertexId {
        1 + level as usize * self.torus_size + torus_index(m, self.n)
    }

    /// `α_{(R,∂)}`.
    pub fn closing_weight(&self) -> &Rational {
        &self.graph.edge(self.closing_edge).weight
    }

    /// `α_{(𝓛,∂)}`: total weight of the edges leaving the slab through the left end.
    pub fn left_exit_weight(&self) -> Rational {
        self.edges_of_kind(EdgeKind::ExitLeft).map(|e| &self.graph.edge(e).weight).sum()
    }

    /// Total weight of the edges leaving through the right end.
    pub fn right_exit_weight(&self) -> Rational {
        self.edges_of_kind(EdgeKind::ExitRight).map(|e| &self.graph.edge(e).weight).sum()
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = EdgeId> + '_ {
        self.info.iter().enumerate().filter(move |(_, i)| i.kind == kind).map(|(e, _)| e)
    }

    /// Slab vertex for entry point `i` of the frame, in the torus copy `m = 0`.
    pub fn entry_vertex(&self, i: usize) -> VertexId {
        let x = &self.frame.entry_points()[i];
        self.vertex_of_site(x).expect("entry points lie in the slab")
    }

    /// Plain-text edge list: `source<TAB>target<TAB>label<TAB>weight` per line.
    pub fn edge_list(&self) -> String {
        let mut out = String::from("# source\ttarget\tlabel\tweight\n");
        for (id, e) in self.graph.edges().iter().enumerate() {
            let info = self.info[id];
            let _ = write!(out, "{}\t{}\t{}", self.keys[e.source], self.keys[e.target], info.kind.name());
            if let Some(j) = info.step {
                let step = self.weights.step_set().step(j);
                let coords: Vec<String> = step.iter().map(|c| format!("{c}")).collect();
                let _ = write!(out, ":({})", coords.join(","));
            }
            let _ = writeln!(out, "\t{}", RationalDisplay(&e.weight));
        }
        out
    }
}

fn torus_index(m: &[i64], n: i64) -> usize {
    m.iter().fold(0usize, |acc, &c| acc * n as usize + c.rem_euclid(n) as usize)
}

fn torus_coords(mut index: usize, dims: usize, n: i64) -> Site {
    let mut m = vec![0; dims];
    for slot in m.iter_mut().rev() {
        *slot = (index % n as usize) as i64;
        index /= n as usize;
    }
    m
}

/// Builds `G_{N,L}` and checks that its weight divergence vanishes.
pub fn build_cylinder(frame: &DirectionFrame, w: &WeightSystem, n: i64, l: i64) -> Result<CylinderGraph> {
    if n < 1 || l < 1 {
        return Err(Error::InvalidParameter(format!("N and L must be positive, got N={n}, L={l}")));
    }
    let d = frame.dim();
    if w.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: w.dim() });
    }
    let level_max = l * frame.scale() * frame.norm_sq();
    let steps = w.step_set();
    let step_level: Vec<i64> = steps.steps().iter().map(|e| frame.level(e)).collect();
    if let Some(j) = step_level.iter().position(|lv| lv.abs() > level_max + 1) {
        return Err(Error::SlabTooThin(format!(
            "step {:?} crosses the whole slab of thickness {level_max}",
            steps.step(j)
        )));
    }
    let step_shift: Vec<Site> = steps.steps().iter().map(|e| frame.coordinates(e).1).collect();
    let dims = d - 1;
    let torus_size = (n as usize).pow(dims as u32);
    let slab_count = (level_max as usize + 1) * torus_size;
    let right = slab_count + 1;

    let mut keys = Vec::with_capacity(slab_count + 2);
    let mut sites = Vec::with_capacity(slab_count + 2);
    keys.push(VertexKey::Sink);
    sites.push(None);
    for level in 0..=level_max {
        for t in 0..torus_size {
            let m = torus_coords(t, dims, n);
            sites.push(Some(frame.site(level, &m)));
            keys.push(VertexKey::Site { level, torus: m });
        }
    }
    keys.push(VertexKey::Right);
    sites.push(None);

    let slab_vertex = |level: i64, m: &[i64]| 1 + level as usize * torus_size + torus_index(m, n);
    let shifted = |m: &[i64], j: usize, sign: i64| -> Site {
        m.iter().zip(&step_shift[j]).map(|(a, b)| (a + sign * b).rem_euclid(n)).collect()
    };

    let mut edges = Vec::new();
    let mut info = Vec::new();
    let mut push = |source, target, kind, step: Option<usize>, weight: Rational| {
        edges.push(Edge { source, target, weight });
        info.push(EdgeInfo { kind, step });
    };

    // Out-edges of ∂: lattice edges entering through the left end.
    for level in 0..=level_max {
        for t in 0..torus_size {
            for (j, lv) in step_level.iter().enumerate() {
                if level - lv < 0 {
                    push(SINK, slab_vertex(level, &torus_coords(t, dims, n)), EdgeKind::EnterLeft, Some(j), w.weight(j).clone());
                }
            }
        }
    }
    // Slab vertices, one edge per step in step order.
    let mut exits_left = Rational::zero();
    let mut exits_right = Rational::zero();
    for level in 0..=level_max {
        for t in 0..torus_size {
            let m = torus_coords(t, dims, n);
            let v = slab_vertex(level, &m);
            for (j, lv) in step_level.iter().enumerate() {
                let b = level + lv;
                let a = w.weight(j).clone();
                if b < 0 {
                    exits_left += &a;
                    push(v, SINK, EdgeKind::ExitLeft, Some(j), a);
                } else if b > level_max {
                    exits_right += &a;
                    push(v, right, EdgeKind::ExitRight, Some(j), a);
                } else {
                    push(v, slab_vertex(b, &shifted(&m, j, 1)), EdgeKind::Interior, Some(j), a);
                }
            }
        }
    }
    // Out-edges of R: lattice edges entering through the right end, then R → ∂.
    for level in 0..=level_max {
        for t in 0..torus_size {
            for (j, lv) in step_level.iter().enumerate() {
                if level - lv > level_max {
                    push(right, slab_vertex(level, &torus_coords(t, dims, n)), EdgeKind::EnterRight, Some(j), w.weight(j).clone());
                }
            }
        }
    }
    let closing = exits_right - exits_left;
    if !closing.is_positive() {
        return Err(Error::CylinderDriftViolated);
    }
    push(right, SINK, EdgeKind::Closing, None, closing);
    let closing_edge = edges.len() - 1;

    let digraph = WeightedDigraph::new(slab_count + 2, edges)?;
    let graph = BalancedGraph::new(digraph).map_err(|e| match e {
        Error::Unbalanced { vertex } => Error::CylinderDivergence { vertex },
        other => other,
    })?;

    let mut left_set = Vec::new();
    let mut right_set = Vec::new();
    for v in 1..right {
        let touches = |hub: VertexId| {
            graph.out_edges(v).iter().chain(graph.in_edges(v)).any(|&e| {
                let edge = graph.edge(e);
                edge.source == hub || edge.target == hub
            })
        };
        if touches(SINK) {
            left_set.push(v);
        }
        if touches(right) {
            right_set.push(v);
        }
    }

    Ok(CylinderGraph {
        n,
        l,
        level_max,
        torus_size,
        frame: frame.clone(),
        weights: w.clone(),
        moments: w.projected_moments(frame.u()),
        graph,
        info,
        keys,
        sites,
        left_set,
        right_set,
        closing_edge,
        reversed: false,
    })
}

/// The reversed cylinder: every edge reversed with its weight; `R → ∂`
/// becomes `∂ → R`.
pub fn reverse_graph(g: &CylinderGraph) -> CylinderGraph {
    let mut r = g.clone();
    r.graph = g.graph.reverse();
    r.reversed = !g.reversed;
    r
}

/// `α_{(𝓛,∂)} / α_{(R,∂)}`, checked against `E[(X_1·u)_-] / E[X_1·u]`.
pub fn exit_ratio(g: &CylinderGraph) -> Result<Rational> {
    let ratio = g.left_exit_weight() / g.closing_weight();
    let expected = &g.moments.negative / g.moments.mean();
    if ratio != expected {
        return Err(Error::IdentityMismatch(format!("exit ratio {ratio} differs from {expected}")));
    }
    Ok(ratio)
}

/// `N^{d−1} |det(u, u_2, ..., u_d)| (u·ΣΔ) / ‖u‖²`.
pub fn closing_weight_closed_form(frame: &DirectionFrame, w: &WeightSystem, n: i64) -> Rational {
    let area = int(n.pow(frame.dim() as u32 - 1) * frame.volume());
    area * w.drift_along(frame.u()) * w.sigma() / int(frame.norm_sq())
}

/// `N^{d−1} |det(u, u_2, ..., u_d)| Σ_e (−u·e)_+ α_e / ‖u‖²`.
pub fn left_exit_weight_closed_form(frame: &DirectionFrame, w: &WeightSystem, n: i64) -> Rational {
    let area = int(n.pow(frame.dim() as u32 - 1) * frame.volume());
    let outflow: Rational = w
        .step_set()
        .steps()
        .iter()
        .zip(w.weights())
        .map(|(e, a)| a * int((-dot(frame.u(), e)).max(0)))
        .sum();
    area * outflow / int(frame.norm_sq())
}
