//! TOML run configurations.
//!
//! ```toml
//! seed = 7
//! workers = 4
//!
//! [model]
//! dimension = 2
//! weights = [2, 1, 1, "1/2"]          # nearest-neighbour order e1, -e1, e2, -e2
//! # steps = [[1, 0], [-1, 0], [0, 1], [0, -1]]
//!
//! [direction]
//! u = [2, 1]                           # or "2,1" or "1/2, 1/4"
//!
//! [[experiment]]
//! name = "identity"
//! ladder = [10, 20, 40]
//! walks = 20000
//!
//! [output]
//! dir = "reports"
//! format = "json"                      # or "text"
//! csv = true
//! ```
//!
//! Unknown keys are rejected, and every error names the line it refers to.

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use dirwalk_core::model::{parse_rational, parse_rational_list, StepSet, WeightSystem};
use dirwalk_core::{Rational, Site};

use crate::catalog::{default_model, Job, Kind, Plan, Settings};
use crate::{Error, Result};

/// A number written either as a TOML number or as a string such as `"3/2"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Integer(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    pub fn to_rational(&self) -> dirwalk_core::Result<Rational> {
        match self {
            Scalar::Integer(i) => Ok(Rational::from_integer((*i).into())),
            Scalar::Float(f) => parse_rational(&f.to_string()),
            Scalar::Text(s) => parse_rational(s),
        }
    }
}

/// A direction written as an array of numbers or as a comma-separated string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DirectionValue {
    List(Vec<Scalar>),
    Text(String),
}

impl DirectionValue {
    pub fn resolve(&self) -> Result<Site> {
        let raw = match self {
            DirectionValue::List(items) => items.iter().map(Scalar::to_rational).collect::<dirwalk_core::Result<Vec<_>>>()?,
            DirectionValue::Text(s) => parse_rational_list(s)?,
        };
        Ok(dirwalk_core::lattice::normalize_direction(&raw)?)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    /// Explicit steps; nearest-neighbour steps when absent.
    pub steps: Option<Vec<Vec<i64>>>,
    pub weights: Vec<Scalar>,
}

impl ModelConfig {
    pub fn resolve(&self) -> Result<WeightSystem> {
        let steps = match &self.steps {
            Some(steps) => StepSet::new(self.dimension, steps.clone())?,
            None => StepSet::nearest_neighbor(self.dimension)?,
        };
        let weights = self.weights.iter().map(Scalar::to_rational).collect::<dirwalk_core::Result<Vec<_>>>()?;
        Ok(WeightSystem::new(steps, weights)?)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionConfig {
    pub u: DirectionValue,
}

/// One `[[experiment]]` table: a catalog name, an optional direction
/// override and experiment parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub u: Option<DirectionValue>,
    #[serde(rename = "N")]
    pub n: Option<i64>,
    #[serde(rename = "L")]
    pub l: Option<i64>,
    pub ladder: Option<Vec<i64>>,
    pub walks: Option<usize>,
    pub envs: Option<usize>,
    pub cap: Option<u64>,
    pub steps: Option<u64>,
    pub threshold: Option<f64>,
    pub max_cycle_len: Option<usize>,
    pub budget: Option<u64>,
    pub cycle_len: Option<usize>,
    pub doubling: Option<usize>,
    pub length: Option<u32>,
    pub repetitions: Option<usize>,
    pub trials: Option<usize>,
    pub max_failure_rate_percent: Option<u32>,
    pub states: Option<usize>,
    pub p_right: Option<f64>,
}

impl ExperimentConfig {
    pub fn settings(&self) -> Settings {
        Settings {
            n: self.n,
            l: self.l,
            ladder: self.ladder.clone(),
            walks: self.walks,
            envs: self.envs,
            cap: self.cap,
            steps: self.steps,
            threshold: self.threshold,
            max_cycle_len: self.max_cycle_len,
            budget: self.budget,
            cycle_len: self.cycle_len,
            doubling: self.doubling,
            length: self.length,
            repetitions: self.repetitions,
            trials: self.trials,
            max_failure_rate_percent: self.max_failure_rate_percent,
            states: self.states,
            p_right: self.p_right,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Also write raw samples as CSV, for experiments that have them.
    #[serde(default)]
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub model: Option<Spanned<ModelConfig>>,
    pub direction: Option<Spanned<DirectionConfig>>,
    #[serde(default)]
    pub experiment: Vec<Spanned<ExperimentConfig>>,
    pub output: Option<OutputConfig>,
}

/// A validated configuration: every job is resolved before anything runs.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub jobs: Vec<Job>,
    pub output: OutputConfig,
}

/// 1-based line of a byte offset.
fn line_of(source: &str, span: &Range<usize>) -> usize {
    source[..span.start.min(source.len())].matches('\n').count() + 1
}

fn at_line(source: &str, span: &Range<usize>, what: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {}: {what}: {e}", line_of(source, span)))
}

impl RunConfig {
    pub fn parse(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    /// Validates every block against `source` (the text this was parsed
    /// from, used for line numbers).
    pub fn resolve(&self, source: &str) -> Result<ResolvedConfig> {
        let model = match &self.model {
            Some(m) => m.get_ref().resolve().map_err(|e| at_line(source, &m.span(), "[model]", e))?,
            None => default_model(),
        };
        let direction = match &self.direction {
            Some(d) => Some(d.get_ref().u.resolve().map_err(|e| at_line(source, &d.span(), "[direction]", e))?),
            None => None,
        };
        if self.experiment.is_empty() {
            return Err(Error::Config("no [[experiment]] table".into()));
        }
        let mut jobs = Vec::with_capacity(self.experiment.len());
        for spanned in &self.experiment {
            let span = spanned.span();
            let exp = spanned.get_ref();
            let fail = |e: Error| at_line(source, &span, &format!("experiment `{}`", exp.name), e);
            let kind = Kind::from_name(&exp.name).ok_or_else(|| {
                fail(Error::Config(format!(
                    "unknown experiment (known: {})",
                    Kind::ALL.map(Kind::name).join(", ")
                )))
            })?;
            let plan = Plan::build(kind, &exp.settings()).map_err(fail)?;
            let u = match (&exp.u, &direction) {
                (Some(u), _) => u.resolve().map_err(fail)?,
                (None, Some(u)) => u.clone(),
                (None, None) => unit(model.dim()),
            };
            let job = Job { plan, model: model.clone(), u };
            job.validate().map_err(fail)?;
            jobs.push(job);
        }
        Ok(ResolvedConfig {
            seed: self.seed,
            workers: self.workers,
            jobs,
            output: self.output.clone().unwrap_or_default(),
        })
    }
}

/// `e_1` in dimension `d`.
pub fn unit(d: usize) -> Site {
    let mut u = vec![0; d];
    if let Some(first) = u.first_mut() {
        *first = 1;
    }
    u
}

/// Parses and validates a configuration file.
pub fn load(path: &Path) -> Result<ResolvedConfig> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed = RunConfig::parse(&source).map_err(|e| prefix(path, e))?;
    parsed.resolve(&source).map_err(|e| prefix(path, e))
}

fn prefix(path: &Path, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dirwalk_core::model::int;

    const GOOD: &str = r#"
seed = 7

[model]
dimension = 2
weights = [2, 1, "1", 1.0]

[direction]
u = "1/2, 1/4"

[[experiment]]
name = "identity"
ladder = [10, 20]
walks = 500

[[experiment]]
name = "beta"
u = [1, 0]
L = 30
"#;

    #[test]
    fn resolves_models_directions_and_plans() {
        let cfg = RunConfig::parse(GOOD).unwrap().resolve(GOOD).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.jobs.len(), 2);
        assert_eq!(cfg.jobs[0].u, vec![2, 1]);
        assert_eq!(cfg.jobs[1].u, vec![1, 0]);
        assert_eq!(cfg.jobs[0].model.weights(), &[int(2), int(1), int(1), int(1)]);
        assert!(matches!(&cfg.jobs[0].plan, Plan::Identity(p) if p.ladder == vec![10, 20] && p.walks == 500));
        assert!(matches!(&cfg.jobs[1].plan, Plan::Beta(p) if p.l == 30 && p.envs == 2000));
        assert_eq!(cfg.output.format, Format::Json);
    }

    fn error_of(source: &str) -> String {
        match RunConfig::parse(source).and_then(|c| c.resolve(source)) {
            Err(Error::Config(msg)) => msg,
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let msg = error_of("seed = 1\nbogus = 2\n[[experiment]]\nname = \"identity\"\n");
        assert!(msg.contains("line 2"), "{msg}");
        let msg = error_of("[[experiment]]\nname = \"identity\"\nwalkz = 3\n");
        assert!(msg.contains("line 3") && msg.contains("walkz"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_table_line() {
        let msg = error_of("seed = 1\n\n[[experiment]]\nname = \"nonsense\"\n");
        assert!(msg.contains("line 3") && msg.contains("unknown experiment"), "{msg}");
        let msg = error_of("[[experiment]]\nname = \"identity\"\n\n[[experiment]]\nname = \"identity\"\nenvs = 3\n");
        assert!(msg.contains("line 4") && msg.contains("envs"), "{msg}");
        let msg = error_of("[model]\ndimension = 2\nweights = [1, 2, 3]\n[[experiment]]\nname = \"beta\"\n");
        assert!(msg.contains("line 1") && msg.contains("[model]"), "{msg}");
        let msg = error_of("[direction]\nu = [1, 0, 0]\n[[experiment]]\nname = \"beta\"\n");
        assert!(msg.contains("dimension mismatch"), "{msg}");
        assert!(error_of("seed = 1\n").contains("no [[experiment]]"));
    }

    #[test]
    fn explicit_step_sets() {
        let src = "[model]\ndimension = 1\nsteps = [[1], [-1], [2]]\nweights = [1, 1, 1]\n[[experiment]]\nname = \"path-law\"\n";
        let cfg = RunConfig::parse(src).unwrap().resolve(src).unwrap();
        assert_eq!(cfg.jobs[0].model.step_set().len(), 3);
        assert_eq!(cfg.jobs[0].u, vec![1]);
    }
}
