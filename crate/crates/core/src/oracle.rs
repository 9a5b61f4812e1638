//! Exact and semi-exact reference computations.
//!
//! * annealed path probabilities through the rising-factorial product
//!   formula, in exact rationals;
//! * exhaustive comparison of cycle probabilities on a divergence-free graph
//!   and on its reverse;
//! * quenched absorption probabilities and invariant measures by linear
//!   solve, and the time reversal of a quenched environment.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use hashbrown::HashMap;
use num_traits::{One, Zero};
use rand::Rng;

use crate::dirichlet::{DirichletSampler, SIMPLEX_TOLERANCE};
use crate::graph::{BalancedGraph, EdgeId, VertexId, WeightedDigraph};
use crate::linalg::{solve_rational, solve_sparse, SparseMatrix};
use crate::model::{int, WeightSystem};
use crate::{Error, Rational, Result, Site};

/// Residual bound enforced on every float solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Default bound on the number of cycles examined by [`verify_cycle_reversal`].
pub const DEFAULT_CYCLE_BUDGET: u64 = 1_000_000;

/// Largest number of unknowns accepted by the exact rational solver.
pub const EXACT_SOLVE_LIMIT: usize = 200;

/// A graph on which the urn-reinforced walk can run: edges out of a vertex
/// are addressed by labels.
pub trait UrnGraph {
    type Vertex: Clone + Eq + Hash;

    /// Weight and target of the edge `label` out of `v`, if it exists.
    fn edge(&self, v: &Self::Vertex, label: usize) -> Option<(Rational, Self::Vertex)>;

    /// `α_v`, total weight out of `v`.
    fn out_weight(&self, v: &Self::Vertex) -> Rational;
}

/// Labels are global edge ids; the edge must leave `v`.
impl UrnGraph for WeightedDigraph {
    type Vertex = VertexId;

    fn edge(&self, v: &VertexId, label: usize) -> Option<(Rational, VertexId)> {
        let e = self.edges().get(label)?;
        (e.source == *v).then(|| (e.weight.clone(), e.target))
    }

    fn out_weight(&self, v: &VertexId) -> Rational {
        WeightedDigraph::out_weight(self, *v)
    }
}

impl UrnGraph for BalancedGraph {
    type Vertex = VertexId;

    fn edge(&self, v: &VertexId, label: usize) -> Option<(Rational, VertexId)> {
        UrnGraph::edge(&**self, v, label)
    }

    fn out_weight(&self, v: &VertexId) -> Rational {
        WeightedDigraph::out_weight(self, *v)
    }
}

/// `Z^d` with translation-invariant weights; labels are step indices.
#[derive(Debug, Clone, Copy)]
pub struct LatticeGraph<'a>(pub &'a WeightSystem);

impl UrnGraph for LatticeGraph<'_> {
    type Vertex = Site;

    fn edge(&self, v: &Site, label: usize) -> Option<(Rational, Site)> {
        let steps = self.0.step_set();
        if label >= steps.len() || v.len() != steps.dim() {
            return None;
        }
        let target = v.iter().zip(steps.step(label)).map(|(a, b)| a + b).collect();
        Some((self.0.weight(label).clone(), target))
    }

    fn out_weight(&self, _v: &Site) -> Rational {
        self.0.sigma().clone()
    }
}

/// Start vertex and edge labels; labels disambiguate parallel edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinitePath<V> {
    pub start: V,
    pub labels: Vec<usize>,
}

impl<V: Clone + Eq + Hash> FinitePath<V> {
    pub fn new(start: V, labels: Vec<usize>) -> Self {
        Self { start, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Visited vertices, first to last.
    pub fn vertices<G: UrnGraph<Vertex = V>>(&self, g: &G) -> Result<Vec<V>> {
        let mut out = vec![self.start.clone()];
        for (i, &label) in self.labels.iter().enumerate() {
            let (_, next) = g
                .edge(out.last().expect("nonempty"), label)
                .ok_or_else(|| Error::InvalidPath(format!("label {label} at position {i} is not an edge")))?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn is_closed<G: UrnGraph<Vertex = V>>(&self, g: &G) -> Result<bool> {
        Ok(self.vertices(g)?.last() == Some(&self.start))
    }
}

/// `a (a+1) ... (a+n−1)`.
pub fn rising_factorial(a: &Rational, n: u32) -> Rational {
    let mut acc = Rational::one();
    let mut term = a.clone();
    for _ in 0..n {
        acc *= &term;
        term += Rational::one();
    }
    acc
}

/// Probability that the urn walk follows `path`:
/// `Π_e α_e^{(n_e)} / Π_x α_x^{(n_x)}` with rising factorials, where `n_e`
/// counts crossings of `e` and `n_x` departures from `x`.
pub fn annealed_path_probability<G: UrnGraph>(g: &G, path: &FinitePath<G::Vertex>) -> Result<Rational> {
    let mut edges: HashMap<(G::Vertex, usize), (Rational, u32)> = HashMap::new();
    let mut departures: HashMap<G::Vertex, u32> = HashMap::new();
    let mut v = path.start.clone();
    for (i, &label) in path.labels.iter().enumerate() {
        let (weight, next) = g
            .edge(&v, label)
            .ok_or_else(|| Error::InvalidPath(format!("label {label} at position {i} is not an edge")))?;
        edges.entry((v.clone(), label)).or_insert((weight, 0)).1 += 1;
        *departures.entry(v).or_insert(0) += 1;
        v = next;
    }
    let mut p = Rational::one();
    for (weight, n) in edges.values() {
        p *= rising_factorial(weight, *n);
    }
    for (x, n) in &departures {
        p /= rising_factorial(&g.out_weight(x), *n);
    }
    Ok(p)
}

/// The same probability as a product of successive urn conditionals
/// `(α_e + N_n(e)) / (α_x + N_n(x))`.
pub fn sequential_path_probability<G: UrnGraph>(g: &G, path: &FinitePath<G::Vertex>) -> Result<Rational> {
    let mut crossed: HashMap<(G::Vertex, usize), u32> = HashMap::new();
    let mut left: HashMap<G::Vertex, u32> = HashMap::new();
    let mut v = path.start.clone();
    let mut p = Rational::one();
    for (i, &label) in path.labels.iter().enumerate() {
        let (weight, next) = g
            .edge(&v, label)
            .ok_or_else(|| Error::InvalidPath(format!("label {label} at position {i} is not an edge")))?;
        let ne = crossed.entry((v.clone(), label)).or_insert(0);
        let nx = left.entry(v.clone()).or_insert(0);
        p *= (weight + int(i64::from(*ne))) / (g.out_weight(&v) + int(i64::from(*nx)));
        *ne += 1;
        *nx += 1;
        v = next;
    }
    Ok(p)
}

/// Outcome of an exhaustive cycle comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReport {
    pub max_len: usize,
    pub cycles_checked: u64,
    /// True when the budget stopped the enumeration early.
    pub truncated: bool,
    /// Largest `|P_g(σ) − P_ǧ(σ̌)|` seen.
    pub max_discrepancy: Rational,
    /// First cycle with unequal probabilities, if any.
    pub first_mismatch: Option<FinitePath<VertexId>>,
}

impl CycleReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none() && self.cycles_checked > 0
    }
}

/// Compares `P_g(σ)` with `P_ǧ(σ̌)` for every closed edge path of length at
/// most `max_len` from every base vertex, in exact rationals.
pub fn verify_cycle_reversal(
    g: &BalancedGraph,
    reversed: &BalancedGraph,
    max_len: usize,
    budget: u64,
) -> Result<CycleReport> {
    if reversed != &g.reverse() {
        return Err(Error::InvalidGraph("second graph is not the reverse of the first".into()));
    }
    let mut report = CycleReport {
        max_len,
        cycles_checked: 0,
        truncated: false,
        max_discrepancy: Rational::zero(),
        first_mismatch: None,
    };
    'bases: for base in 0..g.vertex_count() {
        let dist = g.distances_to(base);
        // Depth-first over edge labels; each frame is (vertex, next out-edge index).
        let mut labels: Vec<EdgeId> = Vec::new();
        let mut stack: Vec<(VertexId, usize)> = vec![(base, 0)];
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            let out = g.out_edges(v);
            if i >= out.len() || labels.len() >= max_len {
                stack.pop();
                labels.pop();
                continue;
            }
            top.1 += 1;
            let e = out[i];
            let next = WeightedDigraph::edge(g, e).target;
            let remaining = max_len - labels.len() - 1;
            match dist[next] {
                Some(d) if d <= remaining => {}
                _ => continue,
            }
            labels.push(e);
            if next == base {
                if report.cycles_checked >= budget {
                    report.truncated = true;
                    break 'bases;
                }
                check_cycle(g, reversed, base, &labels, &mut report)?;
            }
            stack.push((next, 0));
        }
    }
    Ok(report)
}

/// Closed edge paths of length `1..=max_len` from every base vertex, at
/// most `budget` of them, in depth-first order.
pub fn closed_paths(g: &WeightedDigraph, max_len: usize, budget: usize) -> Vec<FinitePath<VertexId>> {
    let mut out = Vec::new();
    for base in 0..g.vertex_count() {
        let dist = g.distances_to(base);
        let mut labels: Vec<EdgeId> = Vec::new();
        let mut stack: Vec<(VertexId, usize)> = vec![(base, 0)];
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            let out_edges = g.out_edges(v);
            if i >= out_edges.len() || labels.len() >= max_len {
                stack.pop();
                labels.pop();
                continue;
            }
            top.1 += 1;
            let e = out_edges[i];
            let next = g.edge(e).target;
            match dist[next] {
                Some(d) if d < max_len - labels.len() => {}
                _ => continue,
            }
            labels.push(e);
            if next == base {
                if out.len() >= budget {
                    return out;
                }
                out.push(FinitePath::new(base, labels.clone()));
            }
            stack.push((next, 0));
        }
    }
    out
}

fn check_cycle(
    g: &BalancedGraph,
    reversed: &BalancedGraph,
    base: VertexId,
    labels: &[EdgeId],
    report: &mut CycleReport,
) -> Result<()> {
    let forward = annealed_path_probability(g, &FinitePath::new(base, labels.to_vec()))?;
    let back = FinitePath::new(base, labels.iter().rev().copied().collect());
    let backward = annealed_path_probability(reversed, &back)?;
    report.cycles_checked += 1;
    let gap = if forward > backward { &forward - &backward } else { &backward - &forward };
    if gap > report.max_discrepancy {
        report.max_discrepancy = gap;
    }
    if forward != backward && report.first_mismatch.is_none() {
        report.first_mismatch = Some(FinitePath::new(base, labels.to_vec()));
    }
    Ok(())
}

/// Transition probabilities on the edges of a graph, indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchedGraphEnvironment {
    probs: Vec<f64>,
}

impl QuenchedGraphEnvironment {
    /// Checks positivity on every edge and unit sums at every vertex with out-edges.
    pub fn from_edge_probabilities(g: &WeightedDigraph, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != g.edge_count() {
            return Err(Error::InvalidEnvironment(format!(
                "{} probabilities for {} edges",
                probs.len(),
                g.edge_count()
            )));
        }
        if let Some(e) = probs.iter().position(|p| !(*p > 0.0)) {
            return Err(Error::InvalidEnvironment(format!("edge {e} has probability {}", probs[e])));
        }
        for v in 0..g.vertex_count() {
            let out = g.out_edges(v);
            if out.is_empty() {
                continue;
            }
            let sum: f64 = out.iter().map(|&e| probs[e]).sum();
            if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                return Err(Error::InvalidEnvironment(format!("vertex {v} sums to {sum}")));
            }
        }
        Ok(Self { probs })
    }

    /// Independent Dirichlet simplices with the edge weights as parameters.
    pub fn sample<R: Rng + ?Sized>(g: &WeightedDigraph, rng: &mut R) -> Result<Self> {
        let mut probs = vec![0.0; g.edge_count()];
        for v in 0..g.vertex_count() {
            let out = g.out_edges(v);
            if out.is_empty() {
                continue;
            }
            let params: Vec<Rational> = out.iter().map(|&e| g.edge(e).weight.clone()).collect();
            let simplex = DirichletSampler::from_rationals(&params)?.sample(rng);
            for (&e, &p) in out.iter().zip(simplex.components()) {
                probs[e] = p;
            }
        }
        Self::from_edge_probabilities(g, probs)
    }

    pub fn probability(&self, e: EdgeId) -> f64 {
        self.probs[e]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

/// `P^ω` of an edge path: the product of the edge probabilities.
pub fn quenched_path_probability(
    g: &WeightedDigraph,
    q: &QuenchedGraphEnvironment,
    path: &FinitePath<VertexId>,
) -> Result<f64> {
    path.vertices(g)?;
    Ok(path.labels.iter().map(|&e| q.probability(e)).product())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Banded LU with iterative refinement.
    #[default]
    Float,
    /// Gaussian elimination over the rationals (small systems only).
    ExactRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    /// `h(x) = P^ω_x(H_target < H_absorber)` for every vertex.
    pub h: Vec<f64>,
    /// Max-norm residual of the harmonic equations.
    pub residual: f64,
}

/// Solves `h(x) = Σ_e ω(e) h(head e)` with `h(target) = 1`, `h(absorber) = 0`.
pub fn absorption_probability(
    g: &WeightedDigraph,
    q: &QuenchedGraphEnvironment,
    target: VertexId,
    absorber: VertexId,
    method: SolveMethod,
) -> Result<Harmonic> {
    let n = g.vertex_count();
    if target >= n || absorber >= n || target == absorber {
        return Err(Error::InvalidParameter(format!("target {target} and absorber {absorber}")));
    }
    let reach = g.can_reach(&[target, absorber], |_| true);
    if let Some(v) = reach.iter().position(|r| !r) {
        return Err(Error::SingularSystem(format!("vertex {v} cannot reach the absorbing set")));
    }
    let fixed = |v: VertexId| v == target || v == absorber;
    // Unknowns keep the vertex order, which keeps cylinder systems banded.
    let mut index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in (0..n).filter(|&v| !fixed(v)) {
        index[v] = free.len();
        free.push(v);
    }
    let values = match method {
        SolveMethod::Float => {
            let mut a = SparseMatrix::new(free.len());
            let mut b = vec![0.0; free.len()];
            for (i, &v) in free.iter().enumerate() {
                a.add(i, i, 1.0);
                for &e in g.out_edges(v) {
                    let w = g.edge(e).target;
                    if w == target {
                        b[i] += q.probability(e);
                    } else if w != absorber {
                        a.add(i, index[w], -q.probability(e));
                    }
                }
            }
            let sol = solve_sparse(&a, &b)?;
            sol.x
        }
        SolveMethod::ExactRational => {
            if free.len() > EXACT_SOLVE_LIMIT {
                return Err(Error::InvalidParameter(format!(
                    "{} unknowns exceed the exact solver limit {EXACT_SOLVE_LIMIT}",
                    free.len()
                )));
            }
            let m = free.len();
            let mut a = vec![vec![Rational::zero(); m]; m];
            let mut b = vec![Rational::zero(); m];
            for (i, &v) in free.iter().enumerate() {
                a[i][i] += Rational::one();
                for &e in g.out_edges(v) {
                    let w = g.edge(e).target;
                    let p = exact(q.probability(e))?;
                    if w == target {
                        b[i] += p;
                    } else if w != absorber {
                        a[i][index[w]] -= p;
                    }
                }
            }
            solve_rational(a, b)?.iter().map(crate::model::to_f64).collect()
        }
    };
    let mut h = vec![0.0; n];
    h[target] = 1.0;
    for (&v, x) in free.iter().zip(values) {
        h[v] = x;
    }
    let residual = free
        .iter()
        .map(|&v| {
            let mean: f64 = g.out_edges(v).iter().map(|&e| q.probability(e) * h[g.edge(e).target]).sum();
            (h[v] - mean).abs()
        })
        .fold(0.0, f64::max);
    if !(residual < RESIDUAL_TOLERANCE) {
        return Err(Error::Residual { residual });
    }
    Ok(Harmonic { h, residual })
}

fn exact(p: f64) -> Result<Rational> {
    Rational::from_float(p).ok_or_else(|| Error::InvalidEnvironment(format!("probability {p} is not finite")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMeasure {
    /// Stationary probabilities, summing to one.
    pub pi: Vec<f64>,
    /// Max-norm residual of `πP − π`.
    pub residual: f64,
}

/// Stationary law of the quenched chain on an irreducible graph.
///
/// Vertex 0 is used as regeneration point: the expected visits `ν` between
/// returns to it solve `ν_j − Σ_{i≠0} ν_i P_{ij} = P_{0j}` for `j ≠ 0`.
pub fn invariant_measure(g: &WeightedDigraph, q: &QuenchedGraphEnvironment) -> Result<InvariantMeasure> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidGraph("empty graph".into()));
    }
    let reaches_root = g.can_reach(&[0], |_| true);
    let reached_from_root = g.reversed().can_reach(&[0], |_| true);
    if reaches_root.iter().chain(&reached_from_root).any(|r| !r) {
        return Err(Error::Reducible);
    }
    let m = n - 1;
    let mut a = SparseMatrix::new(m);
    let mut b = vec![0.0; m];
    for j in 1..n {
        a.add(j - 1, j - 1, 1.0);
    }
    for (e, edge) in g.edges().iter().enumerate() {
        if edge.target == 0 {
            continue;
        }
        if edge.source == 0 {
            b[edge.target - 1] += q.probability(e);
        } else {
            a.add(edge.target - 1, edge.source - 1, -q.probability(e));
        }
    }
    let nu = solve_sparse(&a, &b)?.x;
    let total: f64 = 1.0 + nu.iter().sum::<f64>();
    let mut pi = vec![1.0 / total];
    pi.extend(nu.iter().map(|x| x / total));
    let mut flow = vec![0.0; n];
    for (e, edge) in g.edges().iter().enumerate() {
        flow[edge.target] += pi[edge.source] * q.probability(e);
    }
    let residual = flow.iter().zip(&pi).map(|(f, p)| (f - p).abs()).fold(0.0, f64::max);
    if !(residual < RESIDUAL_TOLERANCE) {
        return Err(Error::Residual { residual });
    }
    if pi.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Reducible);
    }
    Ok(InvariantMeasure { pi, residual })
}

/// Time reversal `ω̌_ě = π(source e) ω_e / π(target e)`, an environment on
/// `g.reversed()` (edge ids are shared).
pub fn reverse_environment(g: &WeightedDigraph, q: &QuenchedGraphEnvironment) -> Result<QuenchedGraphEnvironment> {
    let pi = invariant_measure(g, q)?.pi;
    let probs = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| pi[edge.source] * q.probability(e) / pi[edge.target])
        .collect();
    let rev = g.reversed();
    // Rounding in π can move vertex sums by a few ulps beyond the simplex
    // tolerance on large graphs; renormalize per vertex before validating.
    let probs = renormalize(&rev, probs);
    QuenchedGraphEnvironment::from_edge_probabilities(&rev, probs)
}

fn renormalize(g: &WeightedDigraph, mut probs: Vec<f64>) -> Vec<f64> {
    for v in 0..g.vertex_count() {
        let out = g.out_edges(v);
        let sum: f64 = out.iter().map(|&e| probs[e]).sum();
        if sum > 0.0 {
            for &e in out {
                probs[e] /= sum;
            }
        }
    }
    probs
}
