//! Dirichlet simplices and lazily generated i.i.d. Dirichlet environments.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::lattice::DirectionFrame;
use crate::model::{to_f64, WeightSystem};
use crate::rng::{self, domain};
use crate::{Error, Rational, Result};

/// Allowed deviation of a simplex's component sum from one.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Probability vector aligned with a step-set (or edge) order.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex(Vec<f64>);

impl Simplex {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidEnvironment("empty simplex".into()));
        }
        if components.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidEnvironment(format!("negative component in {components:?}")));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidEnvironment(format!("components sum to {sum}")));
        }
        Ok(Self(components))
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut v = alloc::vec![0.0; len];
        v[at] = 1.0;
        Self(v)
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index drawn according to the simplex.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut r: f64 = rng.random();
        for (i, p) in self.0.iter().enumerate() {
            if r < *p {
                return i;
            }
            r -= p;
        }
        // Rounding leftovers go to the last positive component.
        self.0.iter().rposition(|p| *p > 0.0).unwrap_or(self.0.len() - 1)
    }
}

/// Dirichlet law sampled as normalized independent Gamma variates
/// (Marsaglia–Tsang rejection, exact in distribution).
#[derive(Debug, Clone)]
pub struct DirichletSampler {
    gammas: Vec<Gamma<f64>>,
}

impl DirichletSampler {
    pub fn new(params: &[f64]) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidParameter("no Dirichlet parameters".into()));
        }
        let gammas = params
            .iter()
            .map(|&a| {
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::InvalidParameter(format!("Dirichlet parameter {a} is not positive")));
                }
                Gamma::new(a, 1.0).map_err(|e| Error::InvalidParameter(format!("{e}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { gammas })
    }

    pub fn from_rationals(params: &[Rational]) -> Result<Self> {
        if let Some(p) = params.iter().find(|p| **p <= Rational::default()) {
            return Err(Error::InvalidParameter(format!("Dirichlet parameter {p} is not positive")));
        }
        Self::new(&params.iter().map(to_f64).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Simplex {
        if self.gammas.len() == 1 {
            return Simplex(alloc::vec![1.0]);
        }
        loop {
            let draws: Vec<f64> = self.gammas.iter().map(|g| g.sample(rng)).collect();
            let total: f64 = draws.iter().sum();
            // All variates underflowing is only possible for tiny parameters.
            if total > 0.0 && total.is_finite() {
                return Simplex(draws.into_iter().map(|x| x / total).collect());
            }
        }
    }
}

pub fn sample_dirichlet<R: Rng + ?Sized>(params: &[Rational], rng: &mut R) -> Result<Simplex> {
    Ok(DirichletSampler::from_rationals(params)?.sample(rng))
}

/// Site-indexed transition simplices.
pub trait Transitions {
    fn transition(&self, site: &[i64]) -> Simplex;
}

/// The same simplex at every site.
#[derive(Debug, Clone, PartialEq)]
pub struct Homogeneous(pub Simplex);

impl Transitions for Homogeneous {
    fn transition(&self, _site: &[i64]) -> Simplex {
        self.0.clone()
    }
}

/// i.i.d. Dirichlet environment over `Z^d`, realized lazily: the simplex at a
/// site is a pure function of `(master_seed, site)`.
#[derive(Debug, Clone)]
pub struct Environment {
    master_seed: u64,
    weights: WeightSystem,
    sampler: DirichletSampler,
}

impl Environment {
    pub fn new(weights: &WeightSystem, master_seed: u64) -> Result<Self> {
        let sampler = DirichletSampler::from_rationals(weights.weights())?;
        Ok(Self { master_seed, weights: weights.clone(), sampler })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn site_simplex(&self, site: &[i64]) -> Simplex {
        let mut rng = rng::site_stream(self.master_seed, domain::SITE, site);
        self.sampler.sample(&mut rng)
    }

    /// The boundary component `ω(∂,·)` over the entry set of `frame`: Dirichlet
    /// with parameters `Σ_{e : (x−e)·u < 0} α_e`, independent of the sites.
    pub fn boundary_simplex(&self, frame: &DirectionFrame) -> Result<Simplex> {
        let params = boundary_parameters(&self.weights, frame)?;
        let sampler = DirichletSampler::from_rationals(&params)?;
        let mut rng = rng::stream(self.master_seed, domain::BOUNDARY, rng::site_id(frame.u()));
        Ok(sampler.sample(&mut rng))
    }
}

impl Transitions for Environment {
    fn transition(&self, site: &[i64]) -> Simplex {
        self.site_simplex(site)
    }
}

/// Dirichlet parameters of the boundary component: the unnormalized entry masses.
pub fn boundary_parameters(w: &WeightSystem, frame: &DirectionFrame) -> Result<Vec<Rational>> {
    Ok(frame.entry_measure(w)?.masses)
}

pub fn site_simplex(env: &Environment, site: &[i64]) -> Simplex {
    env.site_simplex(site)
}

pub fn boundary_simplex(env: &Environment, frame: &DirectionFrame) -> Result<Simplex> {
    env.boundary_simplex(frame)
}
