//! Goodness-of-fit and mean-comparison statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// Continuous reference law for a Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum Cdf {
    Uniform,
    Beta { a: f64, b: f64 },
}

impl Cdf {
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Stats(format!("Beta parameters must be positive, got ({a}, {b})")));
        }
        Ok(Cdf::Beta { a, b })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Cdf::Uniform => x.clamp(0.0, 1.0),
            Cdf::Beta { a, b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    Beta::new(a, b).expect("validated parameters").cdf(x)
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Cdf::Uniform => 0.5,
            Cdf::Beta { a, b } => a / (a + b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Two-sided one-sample Kolmogorov–Smirnov test with the asymptotic
/// p-value (Stephens' small-sample correction of the Kolmogorov law).
pub fn ks_test(sample: &[f64], cdf: &Cdf) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::Stats("empty sample".into()));
    }
    if let Some(x) = sample.iter().find(|x| x.is_nan()) {
        return Err(Error::Stats(format!("sample contains {x}")));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsResult { statistic, p_value: kolmogorov_p_value(sorted.len(), statistic), n: sorted.len() })
}

/// `P(D_n ≥ d)` under the null, via `Q_KS((√n + 0.12 + 0.11/√n) d)`.
pub fn kolmogorov_p_value(n: usize, d: f64) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    kolmogorov_q(lambda)
}

/// `Q_KS(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub n: usize,
}

pub fn mean_estimate(sample: &[f64]) -> Result<MeanEstimate> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::DegenerateSample(format!("{n} observations")));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(MeanEstimate { mean, standard_error: (var / n as f64).sqrt(), n })
}

/// Frequency `hits / n` with the plug-in binomial standard error.
pub fn proportion(hits: usize, n: usize) -> Result<MeanEstimate> {
    if n == 0 {
        return Err(Error::DegenerateSample("no trials".into()));
    }
    let p = hits as f64 / n as f64;
    Ok(MeanEstimate { mean: p, standard_error: (p * (1.0 - p) / n as f64).sqrt(), n })
}

/// Standard error of a frequency under the null value `p0`.
pub fn null_standard_error(p0: f64, n: usize) -> f64 {
    (p0 * (1.0 - p0) / n as f64).sqrt()
}

/// `(estimate − target) / se`; infinite when `se = 0` and the values differ.
pub fn z_score(estimate: f64, target: f64, se: f64) -> f64 {
    let diff = estimate - target;
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// `p_a / p_b` with its delta-method standard error for independent samples.
pub fn ratio_estimate(a: &MeanEstimate, b: &MeanEstimate) -> Result<MeanEstimate> {
    if a.mean <= 0.0 || b.mean <= 0.0 {
        return Err(Error::DegenerateSample(format!("ratio of {} and {}", a.mean, b.mean)));
    }
    let r = a.mean / b.mean;
    let rel = (a.standard_error / a.mean).powi(2) + (b.standard_error / b.mean).powi(2);
    Ok(MeanEstimate { mean: r, standard_error: r * rel.sqrt(), n: a.n.min(b.n) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of observed counts against expected counts
/// (which should sum to the number of observations).
pub fn chi_square(observed: &[usize], expected: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(Error::Stats(format!("{} cells for {} expectations", observed.len(), expected.len())));
    }
    if let Some(e) = expected.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::Stats(format!("expected count {e} is not positive")));
    }
    let statistic = observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum::<f64>();
    let df = observed.len() - 1;
    let law = ChiSquared::new(df as f64).map_err(|e| Error::Stats(e.to_string()))?;
    Ok(ChiSquareResult { statistic, degrees_of_freedom: df, p_value: 1.0 - law.cdf(statistic) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_closed_forms() {
        let uniform = Cdf::beta(1.0, 1.0).unwrap();
        let square = Cdf::beta(2.0, 1.0).unwrap();
        let one_two = Cdf::beta(1.0, 2.0).unwrap();
        for x in [0.1, 0.25, 0.5, 0.9] {
            assert!((uniform.cdf(x) - x).abs() < 1e-12);
            assert!((square.cdf(x) - x * x).abs() < 1e-12);
            assert!((Cdf::Uniform.cdf(x) - x).abs() < 1e-15);
        }
        assert!((one_two.cdf(0.5) - 0.75).abs() < 1e-12);
        assert!(Cdf::beta(0.0, 1.0).is_err());
    }

    #[test]
    fn kolmogorov_tail() {
        // Tabulated: Q(1.358) ≈ 0.05, Q(1.628) ≈ 0.01.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 2e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn ks_on_a_perfect_grid() {
        let n = 1000;
        let sample: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let r = ks_test(&sample, &Cdf::Uniform).unwrap();
        assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.p_value > 0.99);
        let shifted: Vec<f64> = sample.iter().map(|x| x * x).collect();
        assert!(ks_test(&shifted, &Cdf::Uniform).unwrap().p_value < 1e-6);
        assert!(ks_test(&[], &Cdf::Uniform).is_err());
    }

    #[test]
    fn ratio_standard_error() {
        let a = MeanEstimate { mean: 0.2, standard_error: 0.01, n: 100 };
        let b = MeanEstimate { mean: 0.4, standard_error: 0.02, n: 100 };
        let r = ratio_estimate(&a, &b).unwrap();
        assert!((r.mean - 0.5).abs() < 1e-15);
        assert!((r.standard_error - 0.5 * (0.05f64.powi(2) * 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chi_square_of_exact_and_skewed_counts() {
        let exact = chi_square(&[25, 25, 50], &[25.0, 25.0, 50.0]).unwrap();
        assert_eq!(exact.statistic, 0.0);
        assert!((exact.p_value - 1.0).abs() < 1e-12);
        // Two cells, statistic 4 on one degree of freedom: p = P(|N| > 2).
        let skewed = chi_square(&[60, 40], &[50.0, 50.0]).unwrap();
        assert!((skewed.statistic - 4.0).abs() < 1e-12);
        assert!((skewed.p_value - 0.0455).abs() < 1e-3);
        assert!(chi_square(&[1], &[1.0]).is_err());
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
        assert_eq!(z_score(2.0, 1.0, 0.5), 2.0);
        assert!(z_score(2.0, 1.0, 0.0).is_infinite());
    }
}
