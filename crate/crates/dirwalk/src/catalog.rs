//! Registry of experiments: stable names, the identity each one tests,
//! default parameters, validated plans and their execution.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dirwalk_core::model::{int, StepSet, WeightSystem};
use dirwalk_core::oracle::DEFAULT_CYCLE_BUDGET;
use dirwalk_core::Site;

use crate::experiments::{self, anchor, *};
use crate::parallel::Runner;
use crate::report::ExperimentReport;
use crate::{Error, Result};

/// Experiments in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CycleReversal,
    CylinderWeights,
    PathLaw,
    Identity,
    Transience,
    SlabRatio,
    ReturnTime,
    StartShift,
    Beta,
    Reversal,
    Direction,
    Oscillation,
    Calibration,
    GamblersRuin,
}

impl Kind {
    pub const ALL: [Kind; 14] = [
        Kind::CycleReversal,
        Kind::CylinderWeights,
        Kind::PathLaw,
        Kind::Identity,
        Kind::Transience,
        Kind::SlabRatio,
        Kind::ReturnTime,
        Kind::StartShift,
        Kind::Beta,
        Kind::Reversal,
        Kind::Direction,
        Kind::Oscillation,
        Kind::Calibration,
        Kind::GamblersRuin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::CycleReversal => "cycle-reversal",
            Kind::CylinderWeights => "cylinder-weights",
            Kind::PathLaw => "path-law",
            Kind::Identity => "identity",
            Kind::Transience => "transience",
            Kind::SlabRatio => "slab-ratio",
            Kind::ReturnTime => "return-time",
            Kind::StartShift => "start-shift",
            Kind::Beta => "beta",
            Kind::Reversal => "reversal",
            Kind::Direction => "direction",
            Kind::Oscillation => "oscillation",
            Kind::Calibration => "calibration",
            Kind::GamblersRuin => "gamblers-ruin",
        }
    }

    /// Accepts the catalog name and the historical alias of the cycle check.
    pub fn from_name(name: &str) -> Option<Kind> {
        if name == "verify-lemma1" {
            return Some(Kind::CycleReversal);
        }
        Kind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn anchor(self) -> &'static str {
        match self {
            Kind::CycleReversal => anchor::CYCLES,
            Kind::CylinderWeights => anchor::WEIGHTS,
            Kind::PathLaw => anchor::PATHS,
            Kind::Identity => anchor::STAY,
            Kind::Transience => anchor::TRANSIENCE,
            Kind::SlabRatio => anchor::SLAB,
            Kind::ReturnTime => anchor::RETURN,
            Kind::StartShift => anchor::SHIFT,
            Kind::Beta => anchor::BETA,
            Kind::Reversal => anchor::QUENCHED,
            Kind::Direction => anchor::DIRECTION,
            Kind::Oscillation => anchor::OSCILLATION,
            Kind::Calibration => anchor::CALIBRATION,
            Kind::GamblersRuin => anchor::RUIN,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Kind::CycleReversal => {
                "exact equality of annealed closed-path probabilities on a cylinder graph and its reverse"
            }
            Kind::CylinderWeights => "cylinder closing weight and exit-weight ratio against their closed forms",
            Kind::PathLaw => "exact urn path probabilities sum to one and match urn Monte Carlo frequencies",
            Kind::Identity => "P_μ(X_n·u ≥ 0 for all n) = 1 − E[(X_1·u)_-]/E[(X_1·u)_+] along a slab ladder",
            Kind::Transience => "P_μ(exit above L before falling below −‖u‖²) ≥ the stay probability, for every L",
            Kind::SlabRatio => "P_μ(T̃_0 < T_L)/P_μ(T_0 < T̃_{−L}) = E[(X_1·u)_-]/E[(X_1·u)_+]",
            Kind::ReturnTime => "E_μ[T̃_0 | T̃_0 < ∞] = E_μ[T_0] + 1 − E[(X_1·u)_+]/E[(X_1·u)_-]",
            Kind::StartShift => "P_μ(H_R < H_∂) = P_∂(H_R < H⁺_∂) for the urn walk on the cylinder",
            Kind::Beta => "law of the quenched stay probability on the cylinder against Beta(a, b)",
            Kind::Reversal => "reversed Dirichlet environment preserves cycles and has Dirichlet marginals",
            Kind::Direction => "angle between X_n and the mean drift Δ shrinks along a time ladder",
            Kind::Oscillation => "running extremes of X_n·u when u·Δ = 0 (demonstration, no verdict)",
            Kind::Calibration => "failure rate of the 3-SE band for a Bernoulli(1/2) frequency",
            Kind::GamblersRuin => "absorption solver against the gambler's-ruin formula",
        }
    }

    /// Whether the experiment needs a direction `u`.
    pub fn uses_direction(self) -> bool {
        !matches!(self, Kind::PathLaw | Kind::Direction | Kind::Calibration | Kind::GamblersRuin)
    }

    /// Whether the experiment needs a weight system.
    pub fn uses_model(self) -> bool {
        !matches!(self, Kind::Calibration | Kind::GamblersRuin)
    }

    /// Settings keys accepted by this experiment.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Kind::CycleReversal => &["N", "L", "max_cycle_len", "budget"],
            Kind::CylinderWeights => &["N", "L"],
            Kind::PathLaw => &["length", "walks"],
            Kind::Identity | Kind::Transience => &["ladder", "walks", "cap"],
            Kind::SlabRatio => &["L", "walks", "cap"],
            Kind::ReturnTime => &["L", "walks", "cap"],
            Kind::StartShift => &["N", "L", "walks", "cap"],
            Kind::Beta => &["L", "envs", "doubling"],
            Kind::Reversal => &["N", "L", "envs", "cycle_len"],
            Kind::Direction => &["steps", "ladder", "walks", "threshold"],
            Kind::Oscillation => &["steps", "walks"],
            Kind::Calibration => &["repetitions", "trials", "max_failure_rate_percent"],
            Kind::GamblersRuin => &["states", "p_right"],
        }
    }

    /// Default settings, keyed exactly as configuration files and flags spell them.
    pub fn defaults(self) -> Value {
        match Plan::build(self, &Settings::default()).expect("defaults are valid") {
            Plan::CycleReversal(p) => {
                json!({ "N": p.n, "L": p.l, "max_cycle_len": p.max_len, "budget": p.budget })
            }
            Plan::CylinderWeights { n, l } => json!({ "N": n, "L": l }),
            Plan::PathLaw(p) => json!({ "length": p.length, "walks": p.walks }),
            Plan::Identity(p) | Plan::Transience(p) => json!({ "ladder": p.ladder, "walks": p.walks, "cap": p.cap }),
            Plan::SlabRatio(p) => json!({ "L": p.l, "walks": p.walks, "cap": p.cap }),
            Plan::ReturnTime(p) => json!({ "L": p.l_trunc, "walks": p.walks, "cap": p.cap }),
            Plan::StartShift(p) => json!({ "N": p.n, "L": p.l, "walks": p.walks, "cap": p.cap }),
            Plan::Beta(p) => json!({ "L": p.l, "envs": p.envs, "doubling": p.doubling }),
            Plan::Reversal(p) => json!({ "N": p.n, "L": p.l, "envs": p.envs, "cycle_len": p.cycle_len }),
            Plan::Direction(p) => json!({
                "steps": p.ladder.iter().max(),
                "ladder": p.ladder,
                "walks": p.walks,
                "threshold": p.threshold,
            }),
            Plan::Oscillation(p) => json!({ "steps": p.steps, "walks": p.walks }),
            Plan::Calibration(p) => json!({
                "repetitions": p.repetitions,
                "trials": p.trials,
                "max_failure_rate_percent": p.max_failure_rate_percent,
            }),
            Plan::GamblersRuin { states, p_right } => json!({ "states": states, "p_right": p_right }),
        }
    }
}

/// Optional experiment parameters, shared by configuration files and flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
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

impl Settings {
    /// Names of the keys that are set.
    pub fn present(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut mark = |set: bool, key: &'static str| {
            if set {
                keys.push(key);
            }
        };
        mark(self.n.is_some(), "N");
        mark(self.l.is_some(), "L");
        mark(self.ladder.is_some(), "ladder");
        mark(self.walks.is_some(), "walks");
        mark(self.envs.is_some(), "envs");
        mark(self.cap.is_some(), "cap");
        mark(self.steps.is_some(), "steps");
        mark(self.threshold.is_some(), "threshold");
        mark(self.max_cycle_len.is_some(), "max_cycle_len");
        mark(self.budget.is_some(), "budget");
        mark(self.cycle_len.is_some(), "cycle_len");
        mark(self.doubling.is_some(), "doubling");
        mark(self.length.is_some(), "length");
        mark(self.repetitions.is_some(), "repetitions");
        mark(self.trials.is_some(), "trials");
        mark(self.max_failure_rate_percent.is_some(), "max_failure_rate_percent");
        mark(self.states.is_some(), "states");
        mark(self.p_right.is_some(), "p_right");
        keys
    }
}

/// Fully resolved and validated experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    CycleReversal(CycleParams),
    CylinderWeights { n: i64, l: i64 },
    PathLaw(PathLawParams),
    Identity(LadderParams),
    Transience(LadderParams),
    SlabRatio(SlabParams),
    ReturnTime(ReturnParams),
    StartShift(ShiftParams),
    Beta(BetaParams),
    Reversal(ReversalParams),
    Direction(DirectionParams),
    Oscillation(OscillationParams),
    Calibration(CalibrationParams),
    GamblersRuin { states: usize, p_right: f64 },
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(key: &str, v: T) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(Error::Config(format!("`{key}` must be positive, got {v}")))
    }
}

/// Time ladder `10³, 10⁴, …` up to `steps`, ending at `steps`.
fn default_time_ladder(steps: u64) -> Vec<u64> {
    let mut ladder: Vec<u64> = std::iter::successors(Some(1_000u64), |t| t.checked_mul(10))
        .take_while(|&t| t < steps)
        .collect();
    ladder.push(steps);
    ladder
}

impl Plan {
    /// Applies `s` over the defaults of `kind`; rejects keys the experiment
    /// does not use and out-of-range values.
    pub fn build(kind: Kind, s: &Settings) -> Result<Plan> {
        if let Some(key) = s.present().into_iter().find(|k| !kind.keys().contains(k)) {
            return Err(Error::Config(format!(
                "`{key}` does not apply to experiment `{}` (accepted: {})",
                kind.name(),
                kind.keys().join(", ")
            )));
        }
        let cap = positive("cap", s.cap.unwrap_or(DEFAULT_CAP))?;
        let walks = |default: usize| positive("walks", s.walks.unwrap_or(default));
        let n = positive("N", s.n.unwrap_or(1))?;
        let ladder = |default: &[i64]| -> Result<Vec<i64>> {
            let ladder = s.ladder.clone().unwrap_or_else(|| default.to_vec());
            if ladder.is_empty() || ladder.iter().any(|&l| l < 1) {
                return Err(Error::Config("`ladder` needs positive levels".into()));
            }
            Ok(ladder)
        };
        Ok(match kind {
            Kind::CycleReversal => Plan::CycleReversal(CycleParams {
                n,
                l: positive("L", s.l.unwrap_or(1))?,
                max_len: positive("max_cycle_len", s.max_cycle_len.unwrap_or(8))?,
                budget: positive("budget", s.budget.unwrap_or(DEFAULT_CYCLE_BUDGET))?,
            }),
            Kind::CylinderWeights => Plan::CylinderWeights { n, l: positive("L", s.l.unwrap_or(1))? },
            Kind::PathLaw => Plan::PathLaw(PathLawParams {
                length: positive("length", s.length.unwrap_or(4))?,
                walks: walks(100_000)?,
            }),
            Kind::Identity => Plan::Identity(LadderParams { ladder: ladder(&[10, 20, 40, 80])?, walks: walks(100_000)?, cap }),
            Kind::Transience => {
                Plan::Transience(LadderParams { ladder: ladder(&[5, 10, 20, 40])?, walks: walks(100_000)?, cap })
            }
            Kind::SlabRatio => Plan::SlabRatio(SlabParams { l: positive("L", s.l.unwrap_or(10))?, walks: walks(100_000)?, cap }),
            Kind::ReturnTime => {
                Plan::ReturnTime(ReturnParams { l_trunc: positive("L", s.l.unwrap_or(50))?, walks: walks(100_000)?, cap })
            }
            Kind::StartShift => Plan::StartShift(ShiftParams {
                n,
                l: positive("L", s.l.unwrap_or(2))?,
                walks: walks(100_000)?,
                cap,
            }),
            Kind::Beta => Plan::Beta(BetaParams {
                l: positive("L", s.l.unwrap_or(200))?,
                envs: positive("envs", s.envs.unwrap_or(2000))?,
                doubling: s.doubling.unwrap_or(50),
            }),
            Kind::Reversal => Plan::Reversal(ReversalParams {
                n,
                l: positive("L", s.l.unwrap_or(2))?,
                envs: positive("envs", s.envs.unwrap_or(5000))?,
                cycle_len: positive("cycle_len", s.cycle_len.unwrap_or(6))?,
            }),
            Kind::Direction => {
                let steps = positive("steps", s.steps.unwrap_or(100_000))?;
                let ladder = match &s.ladder {
                    Some(l) if l.iter().all(|&t| t > 0) => l.iter().map(|&t| t as u64).collect(),
                    Some(_) => return Err(Error::Config("`ladder` needs positive times".into())),
                    None => default_time_ladder(steps),
                };
                let threshold = s.threshold.unwrap_or(0.1);
                if !(threshold > 0.0) {
                    return Err(Error::Config(format!("`threshold` must be positive, got {threshold}")));
                }
                Plan::Direction(DirectionParams { ladder, walks: walks(100)?, threshold })
            }
            Kind::Oscillation => Plan::Oscillation(OscillationParams {
                steps: positive("steps", s.steps.unwrap_or(100_000))?,
                walks: walks(20)?,
            }),
            Kind::Calibration => Plan::Calibration(CalibrationParams {
                repetitions: positive("repetitions", s.repetitions.unwrap_or(1000))?,
                trials: positive("trials", s.trials.unwrap_or(1000))?,
                max_failure_rate_percent: s.max_failure_rate_percent.unwrap_or(1),
            }),
            Kind::GamblersRuin => {
                let p_right = s.p_right.unwrap_or(0.6);
                if !(p_right > 0.0 && p_right < 1.0) {
                    return Err(Error::Config(format!("`p_right` must lie in (0, 1), got {p_right}")));
                }
                Plan::GamblersRuin { states: positive("states", s.states.unwrap_or(40))?, p_right }
            }
        })
    }

    pub fn kind(&self) -> Kind {
        match self {
            Plan::CycleReversal(_) => Kind::CycleReversal,
            Plan::CylinderWeights { .. } => Kind::CylinderWeights,
            Plan::PathLaw(_) => Kind::PathLaw,
            Plan::Identity(_) => Kind::Identity,
            Plan::Transience(_) => Kind::Transience,
            Plan::SlabRatio(_) => Kind::SlabRatio,
            Plan::ReturnTime(_) => Kind::ReturnTime,
            Plan::StartShift(_) => Kind::StartShift,
            Plan::Beta(_) => Kind::Beta,
            Plan::Reversal(_) => Kind::Reversal,
            Plan::Direction(_) => Kind::Direction,
            Plan::Oscillation(_) => Kind::Oscillation,
            Plan::Calibration(_) => Kind::Calibration,
            Plan::GamblersRuin { .. } => Kind::GamblersRuin,
        }
    }
}

/// The default model: nearest-neighbour steps on `Z²` with `α = (2, 1, 1, 1)`
/// in the order `e_1, −e_1, e_2, −e_2`.
pub fn default_model() -> WeightSystem {
    WeightSystem::new(StepSet::nearest_neighbor(2).expect("valid"), vec![int(2), int(1), int(1), int(1)])
        .expect("valid")
}

/// A plan bound to a model and direction.
#[derive(Debug, Clone)]
pub struct Job {
    pub plan: Plan,
    pub model: WeightSystem,
    pub u: Site,
}

/// A report and, for sampling experiments, the raw sample.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub samples: Option<(String, Vec<f64>)>,
}

impl Job {
    /// Cheap preconditions, checked before anything is simulated: the
    /// direction's dimension, `u·Δ > 0` where the experiment needs it and
    /// `Δ ≠ 0` for the direction experiment.
    pub fn validate(&self) -> Result<()> {
        let kind = self.plan.kind();
        let w = &self.model;
        if kind.uses_direction() && self.u.len() != w.dim() {
            return Err(dirwalk_core::Error::DimensionMismatch { expected: w.dim(), found: self.u.len() }.into());
        }
        let needs_drift = matches!(
            kind,
            Kind::Identity | Kind::Transience | Kind::SlabRatio | Kind::ReturnTime | Kind::StartShift | Kind::Beta
        );
        if needs_drift && w.drift_along(&self.u) <= int(0) {
            return Err(dirwalk_core::Error::DriftConditionViolated.into());
        }
        if kind == Kind::Direction && w.is_symmetric_drift() {
            return Err(Error::Config("the mean drift vanishes; there is no direction to compare with".into()));
        }
        Ok(())
    }

    pub fn run(&self, runner: &Runner) -> Result<Outcome> {
        self.validate()?;
        let (w, u) = (&self.model, self.u.as_slice());
        let plain = |r: Result<ExperimentReport>| r.map(|report| Outcome { report, samples: None });
        match &self.plan {
            Plan::CycleReversal(p) => plain(cycle_reversal(w, u, p)),
            Plan::CylinderWeights { n, l } => plain(cylinder_identities(w, u, *n, *l)),
            Plan::PathLaw(p) => plain(path_law(w, p, runner)),
            Plan::Identity(p) => plain(halfspace_stay(w, u, p, runner)),
            Plan::Transience(p) => plain(transience_lower_bound(w, u, p, runner)),
            Plan::SlabRatio(p) => plain(slab_ratio(w, u, p, runner)),
            Plan::ReturnTime(p) => plain(conditional_return(w, u, p, runner)),
            Plan::StartShift(p) => plain(start_shift(w, u, p, runner)),
            Plan::Beta(p) => {
                let (report, sample) = cylinder_beta(w, u, p, runner)?;
                Ok(Outcome { report, samples: Some(("stay_probability".into(), sample)) })
            }
            Plan::Reversal(p) => plain(quenched_reversal(w, u, p, runner)),
            Plan::Direction(p) => plain(asymptotic_direction(w, p, runner)),
            Plan::Oscillation(p) => plain(oscillation(w, u, p, runner)),
            Plan::Calibration(p) => plain(se_calibration(p, runner)),
            Plan::GamblersRuin { states, p_right } => plain(experiments::gamblers_ruin(*states, *p_right)),
        }
    }
}

#[derive(Serialize)]
struct Entry {
    name: &'static str,
    anchor: &'static str,
    description: &'static str,
    needs_direction: bool,
    defaults: Value,
}

fn entries() -> Vec<Entry> {
    Kind::ALL
        .into_iter()
        .map(|k| Entry {
            name: k.name(),
            anchor: k.anchor(),
            description: k.description(),
            needs_direction: k.uses_direction(),
            defaults: k.defaults(),
        })
        .collect()
}

pub fn to_json() -> String {
    serde_json::to_string_pretty(&entries()).expect("catalog serializes")
}

pub fn to_text() -> String {
    let entries = entries();
    let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!("{:<width$}  {}\n", e.name, e.anchor));
        out.push_str(&format!("{:<width$}  {}\n", "", e.description));
        out.push_str(&format!("{:<width$}  defaults: {}\n", "", e.defaults));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_use_accepted_keys() {
        for k in Kind::ALL {
            let defaults = k.defaults();
            for key in defaults.as_object().unwrap().keys() {
                assert!(k.keys().contains(&key.as_str()), "{}: {key}", k.name());
            }
        }
    }

    #[test]
    fn names_round_trip_and_are_unique() {
        for k in Kind::ALL {
            assert_eq!(Kind::from_name(k.name()), Some(k));
        }
        let mut names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), Kind::ALL.len());
        assert_eq!(Kind::from_name("verify-lemma1"), Some(Kind::CycleReversal));
        assert_eq!(Kind::from_name("nope"), None);
    }

    #[test]
    fn catalog_is_stable_and_complete() {
        assert_eq!(to_json(), to_json());
        let parsed: Vec<Value> = serde_json::from_str(&to_json()).unwrap();
        assert_eq!(parsed.len(), Kind::ALL.len());
        for anchor in [anchor::STAY, anchor::BETA, anchor::SLAB, anchor::CYCLES, anchor::QUENCHED, anchor::DIRECTION] {
            assert!(to_text().contains(anchor), "{anchor}");
        }
    }

    #[test]
    fn foreign_keys_and_bad_values_are_rejected() {
        let s = Settings { envs: Some(10), ..Settings::default() };
        assert!(Plan::build(Kind::Identity, &s).is_err());
        let s = Settings { walks: Some(0), ..Settings::default() };
        assert!(Plan::build(Kind::SlabRatio, &s).is_err());
        let s = Settings { ladder: Some(vec![5, -1]), ..Settings::default() };
        assert!(Plan::build(Kind::Transience, &s).is_err());
        assert!(Plan::build(Kind::Beta, &Settings { l: Some(30), ..Settings::default() }).is_ok());
    }

    #[test]
    fn time_ladder() {
        assert_eq!(default_time_ladder(100_000), vec![1_000, 10_000, 100_000]);
        assert_eq!(default_time_ladder(500), vec![500]);
        assert_eq!(default_time_ladder(20_000), vec![1_000, 10_000, 20_000]);
    }
}
