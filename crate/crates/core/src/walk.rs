//! Trajectories under the urn-reinforced (annealed) law and under a fixed
//! environment (quenched law), with projected hitting times.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand::Rng;

use crate::dirichlet::{Simplex, Transitions};
use crate::graph::{EdgeId, VertexId, WeightedDigraph};
use crate::lattice::{DirectionFrame, EntryMeasure};
use crate::model::{dot, StepSet, WeightSystem};
use crate::{Error, Result, Site};

/// Default bound on the number of steps of one trajectory.
pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

/// When a walk stops. Slab bounds are in units of `‖u‖²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoppingSpec {
    /// Exactly `n` steps.
    FixedSteps(u64),
    /// First time `X_n·u > high ‖u‖²` or `X_n·u < low ‖u‖²`.
    ExitSlab { u: Site, low: i64, high: i64 },
    /// First time `X_n·u < 0`.
    HitHalfspaceBoundary { u: Site },
}

impl StoppingSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            StoppingSpec::FixedSteps(_) => Ok(()),
            StoppingSpec::ExitSlab { u, low, high } => {
                check_direction(u, dim)?;
                if low >= high {
                    return Err(Error::InvalidParameter(format!("slab bounds {low} >= {high}")));
                }
                Ok(())
            }
            StoppingSpec::HitHalfspaceBoundary { u } => check_direction(u, dim),
        }
    }

    fn should_stop(&self, n: u64, x: &[i64]) -> bool {
        match self {
            StoppingSpec::FixedSteps(steps) => n >= *steps,
            StoppingSpec::ExitSlab { u, low, high } => {
                let p = dot(x, u);
                let norm = dot(u, u);
                p > high * norm || p < low * norm
            }
            StoppingSpec::HitHalfspaceBoundary { u } => dot(x, u) < 0,
        }
    }
}

fn check_direction(u: &[i64], dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: u.len() });
    }
    if u.iter().all(|&c| c == 0) {
        return Err(Error::DegenerateDirection);
    }
    Ok(())
}

/// Sparse edge counts `N_n(e)` over visited `(site, step)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeCounts {
    per_site: HashMap<Site, (Vec<u32>, u32)>,
    total: u64,
}

impl EdgeCounts {
    /// `N_n((x, x + e_j))`.
    pub fn count(&self, site: &[i64], step: usize) -> u32 {
        self.per_site.get(site).map_or(0, |(c, _)| c[step])
    }

    /// Number of departures from `site`.
    pub fn departures(&self, site: &[i64]) -> u32 {
        self.per_site.get(site).map_or(0, |(_, d)| *d)
    }

    /// `Σ_e N_n(e)`, which equals the number of steps taken.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn visited_sites(&self) -> usize {
        self.per_site.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Site, &[u32])> {
        self.per_site.iter().map(|(s, (c, _))| (s, c.as_slice()))
    }

    fn record(&mut self, site: &[i64], step: usize, n_steps: usize) {
        let entry = self
            .per_site
            .entry_ref(site)
            .or_insert_with(|| (vec![0; n_steps], 0));
        entry.0[step] += 1;
        entry.1 += 1;
        self.total += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub start: Site,
    /// `X_0, X_1, ...`; the first entry is `start`.
    pub positions: Vec<Site>,
    /// Index in the step set of each step taken.
    pub steps: Vec<usize>,
    /// Present for urn walks only.
    pub edge_counts: Option<EdgeCounts>,
    /// False when the step cap was reached before the stopping rule fired.
    pub complete: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &[i64] {
        self.positions.last().expect("trajectory holds its start")
    }

    /// Checks that consecutive positions differ by members of `steps` and
    /// that the edge counts, if any, agree with the path.
    pub fn validate(&self, steps: &StepSet) -> Result<()> {
        if self.positions.first() != Some(&self.start) || self.positions.len() != self.steps.len() + 1 {
            return Err(Error::InvalidPath("positions and steps are misaligned".into()));
        }
        for (n, pair) in self.positions.windows(2).enumerate() {
            let j = self.steps[n];
            let diff: Site = pair[1].iter().zip(&pair[0]).map(|(a, b)| a - b).collect();
            if j >= steps.len() || steps.step(j) != diff.as_slice() {
                return Err(Error::InvalidPath(format!("step {n} is not {diff:?}")));
            }
        }
        if let Some(counts) = &self.edge_counts {
            let mut recount = EdgeCounts::default();
            for (x, &j) in self.positions.iter().zip(&self.steps) {
                recount.record(x, j, steps.len());
            }
            if &recount != counts {
                return Err(Error::InvalidPath("edge counts disagree with the path".into()));
            }
        }
        Ok(())
    }
}

/// Incremental urn-reinforced walk on `Z^d`: from `x` the step `e` is taken
/// with probability `(α_e + N_n(x, x+e)) / Σ_f (α_f + N_n(x, x+f))`.
#[derive(Debug, Clone)]
pub struct UrnWalker {
    steps: StepSet,
    alpha: Vec<f64>,
    sigma: f64,
    position: Site,
    counts: EdgeCounts,
}

impl UrnWalker {
    pub fn new(w: &WeightSystem, start: Site) -> Result<Self> {
        if start.len() != w.dim() {
            return Err(Error::DimensionMismatch { expected: w.dim(), found: start.len() });
        }
        let alpha = w.weights_f64();
        let sigma = alpha.iter().sum();
        Ok(Self { steps: w.step_set().clone(), alpha, sigma, position: start, counts: EdgeCounts::default() })
    }

    pub fn position(&self) -> &[i64] {
        &self.position
    }

    pub fn counts(&self) -> &EdgeCounts {
        &self.counts
    }

    pub fn into_counts(self) -> EdgeCounts {
        self.counts
    }

    /// Takes one step and returns its index in the step set.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let local = self.counts.per_site.get(&self.position);
        let departures = local.map_or(0, |(_, d)| *d);
        let mut r = rng.random::<f64>() * (self.sigma + f64::from(departures));
        let last = self.alpha.len() - 1;
        let mut chosen = last;
        for (j, a) in self.alpha.iter().enumerate() {
            let weight = a + local.map_or(0.0, |(c, _)| f64::from(c[j]));
            if r < weight {
                chosen = j;
                break;
            }
            r -= weight;
        }
        self.counts.record(&self.position, chosen, self.alpha.len());
        for (x, e) in self.position.iter_mut().zip(self.steps.step(chosen)) {
            *x += e;
        }
        chosen
    }
}

/// Quenched walk in a site-indexed environment; simplices are cached per site.
pub struct QuenchedWalker<'a, T: Transitions + ?Sized> {
    env: &'a T,
    steps: StepSet,
    position: Site,
    cache: HashMap<Site, Simplex>,
}

impl<'a, T: Transitions + ?Sized> QuenchedWalker<'a, T> {
    pub fn new(env: &'a T, steps: &StepSet, start: Site) -> Result<Self> {
        if start.len() != steps.dim() {
            return Err(Error::DimensionMismatch { expected: steps.dim(), found: start.len() });
        }
        Ok(Self { env, steps: steps.clone(), position: start, cache: HashMap::new() })
    }

    pub fn position(&self) -> &[i64] {
        &self.position
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let env = self.env;
        let simplex = self
            .cache
            .entry_ref(self.position.as_slice())
            .or_insert_with(|| env.transition(&self.position));
        let j = simplex.sample_index(rng);
        for (x, e) in self.position.iter_mut().zip(self.steps.step(j)) {
            *x += e;
        }
        j
    }
}

fn run<R: Rng + ?Sized>(
    start: Site,
    stop: &StoppingSpec,
    cap: u64,
    rng: &mut R,
    mut step: impl FnMut(&mut R) -> (usize, Site),
) -> Trajectory {
    let mut positions = vec![start.clone()];
    let mut steps = Vec::new();
    let mut n = 0u64;
    let mut complete = true;
    while !stop.should_stop(n, positions.last().expect("nonempty")) {
        if n >= cap {
            complete = false;
            break;
        }
        let (j, x) = step(rng);
        steps.push(j);
        positions.push(x);
        n += 1;
    }
    Trajectory { start, positions, steps, edge_counts: None, complete }
}

/// Urn-reinforced walk from `start` until `stop` fires or `cap` steps are taken.
pub fn urn_walk<R: Rng + ?Sized>(
    w: &WeightSystem,
    start: Site,
    stop: &StoppingSpec,
    cap: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    stop.validate(w.dim())?;
    let mut walker = UrnWalker::new(w, start.clone())?;
    let mut traj = run(start, stop, cap, rng, |rng| {
        let j = walker.step(rng);
        (j, walker.position().to_vec())
    });
    traj.edge_counts = Some(walker.into_counts());
    Ok(traj)
}

/// Markov walk in a fixed environment, same stopping contract as [`urn_walk`].
pub fn quenched_walk<T: Transitions + ?Sized, R: Rng + ?Sized>(
    env: &T,
    steps: &StepSet,
    start: Site,
    stop: &StoppingSpec,
    cap: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    stop.validate(steps.dim())?;
    let mut walker = QuenchedWalker::new(env, steps, start.clone())?;
    Ok(run(start, stop, cap, rng, |rng| {
        let j = walker.step(rng);
        (j, walker.position().to_vec())
    }))
}

/// A start drawn from the entry measure `μ` on the entry set of `frame`.
pub fn sample_entry_start<R: Rng + ?Sized>(frame: &DirectionFrame, mu: &EntryMeasure, rng: &mut R) -> Site {
    frame.entry_points()[mu.sample(rng)].clone()
}

/// `(T^u_L, T̃^u_L)`: first indices with `X_n·u > L‖u‖²`, resp. `X_n·u < L‖u‖²`.
pub fn hitting_times(traj: &Trajectory, u: &[i64], l: i64) -> (Option<usize>, Option<usize>) {
    let level = l * dot(u, u);
    let above = traj.positions.iter().position(|x| dot(x, u) > level);
    let below = traj.positions.iter().position(|x| dot(x, u) < level);
    (above, below)
}

/// Urn-reinforced walk on a finite weighted digraph: the edge `e` out of the
/// current vertex is taken with probability proportional to `α_e + N_n(e)`.
#[derive(Debug, Clone)]
pub struct GraphUrnWalker<'a> {
    graph: &'a WeightedDigraph,
    alpha: Vec<f64>,
    out_weight: Vec<f64>,
    counts: Vec<u32>,
    departures: Vec<u32>,
    position: VertexId,
}

impl<'a> GraphUrnWalker<'a> {
    pub fn new(graph: &'a WeightedDigraph, start: VertexId) -> Result<Self> {
        if start >= graph.vertex_count() {
            return Err(Error::InvalidParameter(format!("start vertex {start} out of range")));
        }
        let alpha: Vec<f64> = graph.edges().iter().map(|e| crate::model::to_f64(&e.weight)).collect();
        let out_weight = (0..graph.vertex_count())
            .map(|v| graph.out_edges(v).iter().map(|&e| alpha[e]).sum())
            .collect();
        Ok(Self {
            graph,
            alpha,
            out_weight,
            counts: vec![0; graph.edge_count()],
            departures: vec![0; graph.vertex_count()],
            position: start,
        })
    }

    pub fn position(&self) -> VertexId {
        self.position
    }

    pub fn edge_count(&self, e: EdgeId) -> u32 {
        self.counts[e]
    }

    /// Takes one step and returns the edge used, or `None` at a vertex
    /// without out-edges.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<EdgeId> {
        let v = self.position;
        let out = self.graph.out_edges(v);
        let &last = out.last()?;
        let mut r = rng.random::<f64>() * (self.out_weight[v] + f64::from(self.departures[v]));
        let mut chosen = last;
        for &e in out {
            let weight = self.alpha[e] + f64::from(self.counts[e]);
            if r < weight {
                chosen = e;
                break;
            }
            r -= weight;
        }
        self.counts[chosen] += 1;
        self.departures[v] += 1;
        self.position = self.graph.edge(chosen).target;
        Some(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{Environment, Homogeneous};
    use crate::rng::{domain, stream, StreamRng};

    fn weights() -> WeightSystem {
        WeightSystem::from_integers(StepSet::nearest_neighbor(2).unwrap(), &[2, 1, 1, 1]).unwrap()
    }

    fn rng(i: u64) -> StreamRng {
        stream(7, domain::WALK, i)
    }

    fn within_3se(hits: usize, n: usize, p: f64) -> bool {
        let se = (p * (1.0 - p) / n as f64).sqrt();
        ((hits as f64 / n as f64) - p).abs() < 3.0 * se
    }

    #[test]
    fn zero_steps() {
        let t = urn_walk(&weights(), vec![0, 0], &StoppingSpec::FixedSteps(0), DEFAULT_STEP_CAP, &mut rng(0)).unwrap();
        assert_eq!(t.positions, vec![vec![0, 0]]);
        assert!(t.complete);
    }

    #[test]
    fn first_step_frequencies() {
        let w = weights();
        let n = 100_000;
        let mut hits = [0usize; 4];
        let mut r = rng(1);
        for _ in 0..n {
            let mut walker = UrnWalker::new(&w, vec![0, 0]).unwrap();
            hits[walker.step(&mut r)] += 1;
        }
        for (j, p) in [0.4, 0.2, 0.2, 0.2].iter().enumerate() {
            assert!(within_3se(hits[j], n, *p), "step {j}: {}", hits[j]);
        }
    }

    #[test]
    fn repeated_edge_probability() {
        // Return to the origin via a two-site loop is impossible in two
        // steps, so reinforce by repeating the loop e1, −e1: the second
        // departure from the origin reuses e1 with probability (2+1)/(5+1).
        let w = weights();
        let n = 100_000;
        let mut hits = 0;
        let mut r = rng(2);
        for _ in 0..n {
            let mut walker = UrnWalker::new(&w, vec![0, 0]).unwrap();
            let a = walker.step(&mut r);
            let b = walker.step(&mut r);
            if a == 0 && b == 1 && walker.step(&mut r) == 0 {
                hits += 1;
            }
        }
        // (2/5)(1/5)(3/6)
        assert!(within_3se(hits, n, 0.04));
    }

    #[test]
    fn same_edge_from_fresh_site_in_one_dimension() {
        // On a single vertex with loops the urn is classical Pólya:
        // P(e, e) = (α_e/Σ)((α_e + 1)/(Σ + 1)).
        let g = WeightedDigraph::new(
            1,
            vec![
                crate::graph::Edge { source: 0, target: 0, weight: crate::model::int(2) },
                crate::graph::Edge { source: 0, target: 0, weight: crate::model::int(3) },
            ],
        )
        .unwrap();
        let n = 100_000;
        let mut hits = 0;
        let mut r = rng(3);
        for _ in 0..n {
            let mut walker = GraphUrnWalker::new(&g, 0).unwrap();
            if walker.step(&mut r) == Some(0) && walker.step(&mut r) == Some(0) {
                hits += 1;
            }
        }
        assert!(within_3se(hits, n, (2.0 / 5.0) * (3.0 / 6.0)));
    }

    #[test]
    fn edge_count_bookkeeping() {
        let w = weights();
        let t = urn_walk(&w, vec![0, 0], &StoppingSpec::FixedSteps(500), DEFAULT_STEP_CAP, &mut rng(4)).unwrap();
        t.validate(w.step_set()).unwrap();
        assert_eq!(t.edge_counts.as_ref().unwrap().total(), 500);
        let mut walker = UrnWalker::new(&w, vec![0, 0]).unwrap();
        let mut r = rng(5);
        for n in 1..=200u64 {
            walker.step(&mut r);
            assert_eq!(walker.counts().total(), n);
        }
    }

    #[test]
    fn straight_line_in_point_mass_environment() {
        let env = Homogeneous(Simplex::point_mass(4, 0));
        let steps = StepSet::nearest_neighbor(2).unwrap();
        let t = quenched_walk(&env, &steps, vec![0, 0], &StoppingSpec::FixedSteps(5), 100, &mut rng(6)).unwrap();
        assert_eq!(t.last(), &[5, 0]);
        assert!(t.positions.iter().enumerate().all(|(i, x)| x == &vec![i as i64, 0]));
    }

    #[test]
    fn fixed_environment_frequencies() {
        let w = weights();
        let env = Environment::new(&w, 11).unwrap();
        let simplex = env.site_simplex(&[0, 0]);
        let n = 100_000;
        let mut hits = [0usize; 4];
        let mut r = rng(7);
        for _ in 0..n {
            let mut walker = QuenchedWalker::new(&env, w.step_set(), vec![0, 0]).unwrap();
            hits[walker.step(&mut r)] += 1;
        }
        for j in 0..4 {
            assert!(within_3se(hits[j], n, simplex.get(j)));
        }
    }

    #[test]
    fn quenched_average_matches_annealed() {
        // 10⁴ environments × 10 walks: first steps average to α/Σ, and two
        // consecutive e1 steps to (2/5)·E[ω(e1)ω'(e1)] = (2/5)² (distinct sites).
        let w = weights();
        let mut first = [0usize; 4];
        let mut pair = 0;
        let mut r = rng(8);
        let envs = 10_000;
        for k in 0..envs {
            let env = Environment::new(&w, crate::rng::child_seed(3, domain::ENVIRONMENT, k)).unwrap();
            for _ in 0..10 {
                let mut walker = QuenchedWalker::new(&env, w.step_set(), vec![0, 0]).unwrap();
                let a = walker.step(&mut r);
                first[a] += 1;
                if a == 0 && walker.step(&mut r) == 0 {
                    pair += 1;
                }
            }
        }
        let total = envs as usize * 10;
        // Walks sharing an environment are correlated; inflate the SE by the
        // design effect bound sqrt(10).
        let close = |hits: usize, p: f64| {
            let se = (p * (1.0 - p) / total as f64).sqrt() * 10f64.sqrt();
            ((hits as f64 / total as f64) - p).abs() < 3.0 * se
        };
        for (j, p) in [0.4, 0.2, 0.2, 0.2].iter().enumerate() {
            assert!(close(first[j], *p));
        }
        assert!(close(pair, 0.16));
    }

    #[test]
    fn hitting_time_examples() {
        let traj = |positions: Vec<Site>, steps: Vec<usize>| Trajectory {
            start: positions[0].clone(),
            positions,
            steps,
            edge_counts: None,
            complete: true,
        };
        let t = traj(vec![vec![0, 0], vec![1, 0], vec![2, 0]], vec![0, 0]);
        assert_eq!(hitting_times(&t, &[2, 1], 0), (Some(1), None));
        let t = traj(vec![vec![0, 0]], vec![]);
        assert_eq!(hitting_times(&t, &[2, 1], 0), (None, None));
        let t = traj(vec![vec![0, 0], vec![-1, 0], vec![-2, 0]], vec![1, 1]);
        assert_eq!(hitting_times(&t, &[1, 0], -1).1, Some(2));
    }

    #[test]
    fn stopping_rules() {
        let w = weights();
        let stop = StoppingSpec::ExitSlab { u: vec![1, 0], low: -2, high: 3 };
        for i in 0..50 {
            let t = urn_walk(&w, vec![0, 0], &stop, DEFAULT_STEP_CAP, &mut rng(100 + i)).unwrap();
            let p = t.last()[0];
            assert!(p == -3 || p == 4);
            assert!(t.positions[..t.len()].iter().all(|x| (-2..=3).contains(&x[0])));
        }
        let stop = StoppingSpec::HitHalfspaceBoundary { u: vec![0, 1] };
        let t = urn_walk(&w, vec![0, 0], &stop, 10, &mut rng(9)).unwrap();
        assert!(!t.complete || t.last()[1] < 0);
        assert!(StoppingSpec::ExitSlab { u: vec![1, 0], low: 2, high: 2 }.validate(2).is_err());
        assert!(StoppingSpec::HitHalfspaceBoundary { u: vec![0, 0] }.validate(2).is_err());
    }

    #[test]
    fn cap_flags_incomplete() {
        let w = weights();
        let stop = StoppingSpec::ExitSlab { u: vec![1, 0], low: -1_000_000, high: 1_000_000 };
        let t = urn_walk(&w, vec![0, 0], &stop, 100, &mut rng(10)).unwrap();
        assert!(!t.complete);
        assert_eq!(t.len(), 100);
    }

    proptest::proptest! {
        #[test]
        fn trajectories_are_valid(seed in 0u64..1000, len in 0u64..200) {
            let w = weights();
            let t = urn_walk(&w, vec![3, -1], &StoppingSpec::FixedSteps(len), DEFAULT_STEP_CAP, &mut rng(seed)).unwrap();
            proptest::prop_assert!(t.validate(w.step_set()).is_ok());
            proptest::prop_assert_eq!(t.len() as u64, len);
        }
    }
}
