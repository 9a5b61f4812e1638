//! Step sets, weight systems and the quantities derived from them.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Rational, Result, Site};

/// Ordered list of distinct nonzero steps in `Z^d`.
///
/// The order fixes the component order of every simplex built on top of it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepSet {
    dim: usize,
    steps: Vec<Site>,
}

impl StepSet {
    pub fn new(dim: usize, steps: Vec<Site>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidStepSet("dimension must be at least 1".into()));
        }
        if steps.is_empty() {
            return Err(Error::InvalidStepSet("no steps".into()));
        }
        for (i, s) in steps.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.len() });
            }
            if s.iter().all(|&c| c == 0) {
                return Err(Error::InvalidStepSet(format!("step {i} is zero")));
            }
            if steps[..i].contains(s) {
                return Err(Error::InvalidStepSet(format!("step {s:?} is repeated")));
            }
        }
        Ok(Self { dim, steps })
    }

    /// `{e1, -e1, e2, -e2, ..., ed, -ed}` in that order.
    pub fn nearest_neighbor(dim: usize) -> Result<Self> {
        let mut steps = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for sign in [1, -1] {
                let mut e = vec![0; dim];
                e[i] = sign;
                steps.push(e);
            }
        }
        Self::new(dim, steps)
    }

    /// Nearest-neighbour mode: the set is exactly `{±e1, ..., ±ed}`, in any order.
    pub fn is_nearest_neighbor(&self) -> bool {
        self.steps.len() == 2 * self.dim
            && self
                .steps
                .iter()
                .all(|s| s.iter().map(|c| c.abs()).sum::<i64>() == 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Site] {
        &self.steps
    }

    pub fn step(&self, i: usize) -> &[i64] {
        &self.steps[i]
    }

    pub fn index_of(&self, step: &[i64]) -> Option<usize> {
        self.steps.iter().position(|s| s.as_slice() == step)
    }

    pub fn opposite(&self, i: usize) -> Option<usize> {
        let neg: Site = self.steps[i].iter().map(|c| -c).collect();
        self.index_of(&neg)
    }

    /// Largest squared Euclidean norm of a step.
    pub fn max_norm_sq(&self) -> i64 {
        self.steps.iter().map(|s| dot(s, s)).max().unwrap_or(0)
    }
}

/// Positive rational weights on a step set, with `Σ` and the mean drift
/// `Δ = (1/Σ) Σ_e α_e e` cached in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSystem {
    steps: StepSet,
    weights: Vec<Rational>,
    sigma: Rational,
    drift: Vec<Rational>,
}

impl WeightSystem {
    pub fn new(steps: StepSet, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != steps.len() {
            return Err(Error::InvalidWeight(format!(
                "{} weights for {} steps",
                weights.len(),
                steps.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidWeight(format!("weight {w} is not positive")));
        }
        let sigma: Rational = weights.iter().sum();
        let mut drift = vec![Rational::zero(); steps.dim()];
        for (e, a) in steps.steps().iter().zip(&weights) {
            for (d, &c) in drift.iter_mut().zip(e) {
                *d += a * Rational::from_integer(c.into());
            }
        }
        for d in &mut drift {
            *d /= &sigma;
        }
        Ok(Self { steps, weights, sigma, drift })
    }

    /// Nearest-neighbour weights listed as `α_{e1}, α_{-e1}, α_{e2}, α_{-e2}, ...`.
    pub fn nearest_neighbor(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() || !weights.len().is_multiple_of(2) {
            return Err(Error::InvalidWeight(format!(
                "nearest-neighbour mode needs an even, nonzero number of weights, got {}",
                weights.len()
            )));
        }
        Self::new(StepSet::nearest_neighbor(weights.len() / 2)?, weights)
    }

    /// Convenience constructor from integer weights.
    pub fn from_integers(steps: StepSet, weights: &[i64]) -> Result<Self> {
        Self::new(steps, weights.iter().map(|&w| int(w)).collect())
    }

    pub fn step_set(&self) -> &StepSet {
        &self.steps
    }

    pub fn dim(&self) -> usize {
        self.steps.dim()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(to_f64).collect()
    }

    pub fn sigma(&self) -> &Rational {
        &self.sigma
    }

    pub fn drift(&self) -> &[Rational] {
        &self.drift
    }

    pub fn is_symmetric_drift(&self) -> bool {
        self.drift.iter().all(Zero::is_zero)
    }

    /// `u·Δ`, exact.
    pub fn drift_along(&self, u: &[i64]) -> Rational {
        self.drift
            .iter()
            .zip(u)
            .map(|(d, &c)| d * Rational::from_integer(c.into()))
            .sum()
    }

    /// `2Σ − α_e − α_{−e} − 1`; positive when exit times from the edge are integrable.
    pub fn ballisticity_margin(&self, step: &[i64]) -> Result<Rational> {
        let i = self
            .steps
            .index_of(step)
            .ok_or_else(|| Error::InvalidStepSet(format!("{step:?} is not a step")))?;
        let j = self.steps.opposite(i).ok_or(Error::MissingOppositeStep)?;
        Ok(&self.sigma * int(2) - &self.weights[i] - &self.weights[j] - Rational::one())
    }

    /// First-step moments of the projection `X_1·u` under the annealed law.
    pub fn projected_moments(&self, u: &[i64]) -> ProjectedMoments {
        let mut positive = Rational::zero();
        let mut negative = Rational::zero();
        for (e, a) in self.steps.steps().iter().zip(&self.weights) {
            let p = dot(e, u);
            if p > 0 {
                positive += a * int(p);
            } else if p < 0 {
                negative += a * int(-p);
            }
        }
        ProjectedMoments {
            positive: positive / &self.sigma,
            negative: negative / &self.sigma,
        }
    }
}

/// `E[(X_1·u)_+]` and `E[(X_1·u)_-]` for the walk started at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedMoments {
    pub positive: Rational,
    pub negative: Rational,
}

impl ProjectedMoments {
    pub fn mean(&self) -> Rational {
        &self.positive - &self.negative
    }

    /// `1 − E[(X_1·u)_-] / E[(X_1·u)_+]`, the probability of never leaving the
    /// half-space `{x·u ≥ 0}` when started from the entry measure.
    pub fn stay_probability(&self) -> Result<Rational> {
        if !self.mean().is_positive() {
            return Err(Error::DriftConditionViolated);
        }
        Ok(Rational::one() - &self.negative / &self.positive)
    }

    /// `E[(X_1·u)_-] / E[(X_1·u)_+]`.
    pub fn exit_ratio(&self) -> Result<Rational> {
        if !self.mean().is_positive() {
            return Err(Error::DriftConditionViolated);
        }
        Ok(&self.negative / &self.positive)
    }
}

pub fn mean_drift(w: &WeightSystem) -> Vec<Rational> {
    w.drift().to_vec()
}

pub fn ballisticity_margin(w: &WeightSystem, step: &[i64]) -> Result<Rational> {
    w.ballisticity_margin(step)
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3/2"`, `"-1/3"`, `"2"`, `"0.25"` or `"1e-3"` as an exact rational.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let s = input.trim();
    let fail = |reason: &str| Error::Parse { input: input.to_string(), reason: reason.to_string() };
    if s.is_empty() {
        return Err(fail("empty"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| fail("bad numerator"))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| fail("bad denominator"))?;
        if d.is_zero() {
            return Err(fail("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => {
            let e = s[k + 1..].parse::<i32>().map_err(|_| fail("bad exponent"))?;
            (&s[..k], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(fail("no digits"));
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(fail("not a number"));
    }
    let mut all = alloc::string::String::from(whole);
    all.push_str(frac);
    let mut value = Rational::from_integer(BigInt::from_str(&all).map_err(|_| fail("not a number"))?);
    let scale = exponent - frac.len() as i32;
    let ten = int(10);
    for _ in 0..scale.unsigned_abs() {
        if scale > 0 {
            value *= &ten;
        } else {
            value /= &ten;
        }
    }
    Ok(if negative { -value } else { value })
}

/// Parses a comma-separated list of rationals, e.g. `"2,1,1,1"` or `"1/2, 1/3"`.
pub fn parse_rational_list(input: &str) -> Result<Vec<Rational>> {
    input.split(',').map(parse_rational).collect()
}

/// Formats a rational as `n` or `n/d`.
pub struct RationalDisplay<'a>(pub &'a Rational);

impl fmt::Display for RationalDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}
