//! The `dirwalk` command line.
//!
//! Exit status: 0 when every verdict passes (or is informational), 1 when
//! an experiment fails or cannot produce a sample, 2 for invalid input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use dirwalk_core::cylinder::{build_cylinder, reverse_graph};
use dirwalk_core::dirichlet::Environment;
use dirwalk_core::lattice::DirectionFrame;
use dirwalk_core::model::{parse_rational_list, StepSet, WeightSystem};
use dirwalk_core::rng::{child_seed, domain, stream};
use dirwalk_core::walk::{quenched_walk, urn_walk, StoppingSpec, DEFAULT_STEP_CAP};
use dirwalk_core::Site;

use crate::catalog::{self, default_model, Job, Kind, Outcome, Plan, Settings};
use crate::config::{self, DirectionValue, Format};
use crate::export;
use crate::parallel::Runner;
use crate::report::Verdict;
use crate::{Error, Result};

/// Seed used when neither the command line nor a configuration sets one.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "dirwalk",
    version,
    about = "Oriented-edge reinforced random walks and random walks in Dirichlet environment: \
             exact oracles, Monte Carlo experiments and reports"
)]
pub struct Cli {
    /// Master seed; all randomness derives from it [default: 1].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Print JSON instead of aligned text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Directory for report files, CSV samples and other artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact comparison of annealed cycle probabilities on a cylinder and its reverse.
    #[command(alias = "verify-lemma1")]
    CycleReversal(ExperimentArgs),
    /// Cylinder closing weight and exit ratio against their closed forms.
    CylinderWeights(ExperimentArgs),
    /// Exact path probabilities from the origin against urn frequencies.
    PathLaw(ExperimentArgs),
    /// Half-space stay probability along a slab ladder.
    Identity(ExperimentArgs),
    /// Lower bound on directional transience along a slab ladder.
    Transience(ExperimentArgs),
    /// Ratio of the two slab exit probabilities.
    SlabRatio(ExperimentArgs),
    /// Conditional mean return time to the half-space complement.
    ReturnTime(ExperimentArgs),
    /// Cylinder hitting probabilities from the entry measure and from the sink.
    StartShift(ExperimentArgs),
    /// Law of the quenched stay probability on the cylinder.
    Beta(ExperimentArgs),
    /// Time reversal of Dirichlet environments on a cylinder.
    Reversal(ExperimentArgs),
    /// Angle between the walk and the mean drift.
    Direction(ExperimentArgs),
    /// Zero-drift oscillation demonstration (no verdict).
    Oscillation(ExperimentArgs),
    /// Self-test of the 3-SE acceptance band.
    Calibration(ExperimentArgs),
    /// Self-test of the absorption solver.
    GamblersRuin(ExperimentArgs),
    /// Print the lattice frame and exact constants of a direction (JSON).
    Frame(ModelArgs),
    /// Print the cylinder graph as an edge list.
    Cylinder(CylinderArgs),
    /// Simulate one walk and print it as CSV.
    Trajectory(TrajectoryArgs),
    /// List every experiment with the identity it tests and its defaults.
    List,
    /// Run the experiments of a TOML configuration file.
    Run(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Weights α_e, comma-separated; rationals allowed ("2,1,1/2,1").
    /// Default: 2,1,1,1 on nearest-neighbour steps of Z².
    #[arg(long)]
    pub alpha: Option<String>,
    /// "nn" for nearest-neighbour steps (order e1,-e1,e2,-e2,…) or explicit
    /// steps separated by semicolons ("1,0;-1,0;0,1;0,-1").
    #[arg(long = "step-set")]
    pub step_set: Option<String>,
    /// Direction u, comma-separated; rationals allowed. Default: e1.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
}

impl ModelArgs {
    pub fn model(&self) -> Result<WeightSystem> {
        let explicit = match self.step_set.as_deref().map(str::trim) {
            None | Some("nn") | Some("nearest") => None,
            Some(text) => Some(parse_steps(text)?),
        };
        let Some(alpha) = &self.alpha else {
            return match explicit {
                None => Ok(default_model()),
                Some(_) => Err(Error::Config("--alpha is required with an explicit --step-set".into())),
            };
        };
        let weights = parse_rational_list(alpha)?;
        let steps = match explicit {
            Some(steps) => {
                let dim = steps.first().map_or(0, Vec::len);
                StepSet::new(dim, steps)?
            }
            None => {
                if !weights.len().is_multiple_of(2) {
                    return Err(Error::Config(format!(
                        "nearest-neighbour steps need an even number of weights, got {}",
                        weights.len()
                    )));
                }
                StepSet::nearest_neighbor(weights.len() / 2)?
            }
        };
        Ok(WeightSystem::new(steps, weights)?)
    }

    pub fn direction(&self, dim: usize) -> Result<Site> {
        match &self.u {
            Some(u) => DirectionValue::Text(u.clone()).resolve(),
            None => Ok(config::unit(dim)),
        }
    }
}

fn parse_steps(text: &str) -> Result<Vec<Site>> {
    text.split(';')
        .map(|step| {
            step.split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| Error::Config(format!("bad step coordinate `{c}`"))))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Torus side N of the cylinder.
    #[arg(long = "n", visible_alias = "N")]
    pub n: Option<i64>,
    /// Slab width L (truncation level for return-time and Beta experiments).
    #[arg(long = "L")]
    pub l: Option<i64>,
    /// Comma-separated ladder of slab levels (or of times, for `direction`).
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<i64>>,
    /// Number of independent walks.
    #[arg(long)]
    pub walks: Option<usize>,
    /// Number of sampled environments.
    #[arg(long)]
    pub envs: Option<usize>,
    /// Per-walk step cap.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Walk length.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Acceptance threshold (radians, for `direction`).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Longest closed path compared.
    #[arg(long)]
    pub max_cycle_len: Option<usize>,
    /// Maximal number of cycles compared.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Longest closed path checked per sampled environment.
    #[arg(long)]
    pub cycle_len: Option<usize>,
    /// Environments re-solved on the doubled slab.
    #[arg(long)]
    pub doubling: Option<usize>,
    /// Path length.
    #[arg(long)]
    pub length: Option<u32>,
    /// Calibration repetitions.
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Bernoulli trials per calibration repetition.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest acceptable calibration failure rate, in percent.
    #[arg(long)]
    pub max_failure_rate_percent: Option<u32>,
    /// Number of states of the gambler's-ruin chain.
    #[arg(long)]
    pub states: Option<usize>,
    /// Probability of a step to the right in the gambler's-ruin chain.
    #[arg(long)]
    pub p_right: Option<f64>,
}

impl ExperimentArgs {
    fn settings(&self) -> Settings {
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

    fn job(&self, kind: Kind) -> Result<Job> {
        let plan = Plan::build(kind, &self.settings())?;
        let model = self.model.model()?;
        let u = self.model.direction(model.dim())?;
        Ok(Job { plan, model, u })
    }
}

#[derive(Debug, Clone, Args)]
pub struct CylinderArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Torus side N of the cylinder.
    #[arg(long = "n", visible_alias = "N", default_value_t = 1)]
    pub n: i64,
    /// Slab width L of the cylinder.
    #[arg(long = "L", default_value_t = 1)]
    pub l: i64,
    /// Print the reversed graph.
    #[arg(long)]
    pub reverse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WalkMode {
    /// Urn-reinforced walk.
    Urn,
    /// Markov walk in one Dirichlet environment drawn from the seed.
    Quenched,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = WalkMode::Urn)]
    pub mode: WalkMode,
    /// Number of steps (ignored with --slab).
    #[arg(long, default_value_t = 100)]
    pub steps: u64,
    /// Start site, comma-separated. Default: the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    /// Stop on leaving the slab LOW‖u‖² ≤ X·u ≤ HIGH‖u‖² instead ("LOW,HIGH").
    #[arg(long, allow_hyphen_values = true)]
    pub slab: Option<String>,
    /// Step cap for --slab.
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    pub cap: u64,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
}

/// Where artifacts go and how reports are printed.
struct Sink<'a> {
    stdout: &'a mut dyn Write,
    json: bool,
    dir: Option<PathBuf>,
    file_format: Format,
    csv: bool,
}

impl Sink<'_> {
    fn emit(&mut self, stem: &str, outcome: &Outcome) -> Result<()> {
        let body = if self.json { outcome.report.to_json() + "\n" } else { outcome.report.to_text() };
        self.stdout.write_all(body.as_bytes())?;
        if let Some(dir) = &self.dir {
            export::write_report(dir, stem, &outcome.report, self.file_format)?;
            if let (true, Some((column, values))) = (self.csv, &outcome.samples) {
                let file = std::fs::File::create(dir.join(format!("{stem}-samples.csv")))?;
                export::write_samples_csv(file, column, values)?;
            }
        }
        Ok(())
    }

    /// Text to stdout or to `dir/file` when an output directory is set.
    fn artifact(&mut self, file: &str, body: &[u8]) -> Result<()> {
        match &self.dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(file), body)?;
            }
            None => self.stdout.write_all(body)?,
        }
        Ok(())
    }
}

fn status(verdicts: impl IntoIterator<Item = Verdict>) -> i32 {
    if verdicts.into_iter().any(Verdict::is_failure) {
        1
    } else {
        0
    }
}

fn experiment_kind(command: &Command) -> Option<(Kind, &ExperimentArgs)> {
    Some(match command {
        Command::CycleReversal(a) => (Kind::CycleReversal, a),
        Command::CylinderWeights(a) => (Kind::CylinderWeights, a),
        Command::PathLaw(a) => (Kind::PathLaw, a),
        Command::Identity(a) => (Kind::Identity, a),
        Command::Transience(a) => (Kind::Transience, a),
        Command::SlabRatio(a) => (Kind::SlabRatio, a),
        Command::ReturnTime(a) => (Kind::ReturnTime, a),
        Command::StartShift(a) => (Kind::StartShift, a),
        Command::Beta(a) => (Kind::Beta, a),
        Command::Reversal(a) => (Kind::Reversal, a),
        Command::Direction(a) => (Kind::Direction, a),
        Command::Oscillation(a) => (Kind::Oscillation, a),
        Command::Calibration(a) => (Kind::Calibration, a),
        Command::GamblersRuin(a) => (Kind::GamblersRuin, a),
        _ => return None,
    })
}

/// Executes a parsed command line and returns the exit status.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let mut sink = Sink { stdout, json: cli.json, dir: cli.out.clone(), file_format: Format::Json, csv: true };
    if let Some((kind, args)) = experiment_kind(&cli.command) {
        let job = args.job(kind)?;
        let runner = Runner::new(cli.seed.unwrap_or(DEFAULT_SEED), cli.workers.unwrap_or(0))?;
        let outcome = job.run(&runner)?;
        sink.emit(kind.name(), &outcome)?;
        return Ok(status([outcome.report.verdict]));
    }
    match &cli.command {
        Command::Frame(model) => {
            let w = model.model()?;
            let frame = DirectionFrame::new(&model.direction(w.dim())?, w.step_set())?;
            let body = serde_json::to_string_pretty(&export::frame_summary(&frame, &w))? + "\n";
            sink.artifact("frame.json", body.as_bytes())?;
        }
        Command::Cylinder(args) => {
            let w = args.model.model()?;
            let frame = DirectionFrame::new(&args.model.direction(w.dim())?, w.step_set())?;
            let mut g = build_cylinder(&frame, &w, args.n, args.l)?;
            if args.reverse {
                g = reverse_graph(&g);
            }
            sink.artifact("cylinder.tsv", g.edge_list().as_bytes())?;
        }
        Command::Trajectory(args) => {
            let body = trajectory(args, cli.seed.unwrap_or(DEFAULT_SEED))?;
            sink.artifact("trajectory.csv", &body)?;
        }
        Command::List => {
            let body = if cli.json { catalog::to_json() + "\n" } else { catalog::to_text() };
            sink.stdout.write_all(body.as_bytes())?;
        }
        Command::Run(args) => return run_config(cli, &args.config, &mut sink),
        _ => unreachable!("experiment commands are handled above"),
    }
    Ok(0)
}

fn run_config(cli: &Cli, path: &Path, sink: &mut Sink<'_>) -> Result<i32> {
    let cfg = config::load(path)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let runner = Runner::new(seed, cli.workers.or(cfg.workers).unwrap_or(0))?;
    sink.dir = cli.out.clone().or(cfg.output.dir.clone());
    sink.file_format = cfg.output.format;
    sink.csv = cfg.output.csv;
    let mut verdicts = Vec::new();
    for (i, job) in cfg.jobs.iter().enumerate() {
        let outcome = job.run(&runner)?;
        sink.emit(&format!("{:02}-{}", i + 1, job.plan.kind().name()), &outcome)?;
        verdicts.push(outcome.report.verdict);
    }
    Ok(status(verdicts))
}

fn trajectory(args: &TrajectoryArgs, seed: u64) -> Result<Vec<u8>> {
    let w = args.model.model()?;
    let u = args.model.direction(w.dim())?;
    let start = match &args.start {
        Some(s) => s
            .split(',')
            .map(|c| c.trim().parse::<i64>().map_err(|_| Error::Config(format!("bad start coordinate `{c}`"))))
            .collect::<Result<Site>>()?,
        None => vec![0; w.dim()],
    };
    let (stop, cap) = match &args.slab {
        Some(text) => {
            let bounds: Vec<i64> = text
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| Error::Config(format!("bad slab bound `{c}`"))))
                .collect::<Result<_>>()?;
            let [low, high] = bounds[..] else {
                return Err(Error::Config("--slab takes LOW,HIGH".into()));
            };
            (StoppingSpec::ExitSlab { u: u.clone(), low, high }, args.cap)
        }
        None => (StoppingSpec::FixedSteps(args.steps), args.steps),
    };
    let mut rng = stream(seed, domain::WALK, 0);
    let traj = match args.mode {
        WalkMode::Urn => urn_walk(&w, start, &stop, cap, &mut rng)?,
        WalkMode::Quenched => {
            let env = Environment::new(&w, child_seed(seed, domain::ENVIRONMENT, 0))?;
            quenched_walk(&env, w.step_set(), start, &stop, cap, &mut rng)?
        }
    };
    let mut body = Vec::new();
    export::write_trajectory_csv(&mut body, &traj, Some(&u))?;
    Ok(body)
}

/// Parses `args`, runs, reports errors on stderr and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (Result<i32>, String) {
        let cli = Cli::try_parse_from(std::iter::once("dirwalk").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        let code = execute(&cli, &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn model_flags() {
        let m = ModelArgs { alpha: Some("3,1,1/2,1/2".into()), ..ModelArgs::default() };
        assert_eq!(m.model().unwrap().dim(), 2);
        let m = ModelArgs { alpha: Some("1,1,1".into()), step_set: Some("1;-1;2".into()), u: Some("1/2".into()) };
        assert_eq!(m.model().unwrap().step_set().len(), 3);
        assert_eq!(m.direction(1).unwrap(), vec![1]);
        assert!(ModelArgs { alpha: Some("1,1,1".into()), ..ModelArgs::default() }.model().is_err());
        assert!(ModelArgs { step_set: Some("1;-1".into()), ..ModelArgs::default() }.model().is_err());
        let u = ModelArgs { u: Some("-2,1".into()), ..ModelArgs::default() };
        assert_eq!(u.direction(2).unwrap(), vec![-2, 1]);
    }

    #[test]
    fn cycle_check_through_the_alias() {
        let (code, out) = run(&["verify-lemma1", "--u", "1,0", "--L", "1", "--max-cycle-len", "6"]);
        assert_eq!(code.unwrap(), 0);
        assert!(out.contains("PASS"), "{out}");
    }

    #[test]
    fn frame_and_cylinder_outputs() {
        let (code, out) = run(&["frame", "--u", "2,1"]);
        assert_eq!(code.unwrap(), 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["stay_probability"], "2/5");
        let (_, out) = run(&["cylinder", "--u", "1,0", "--n", "1", "--L", "2"]);
        assert!(out.starts_with("# source\ttarget\tlabel\tweight"), "{out}");
    }

    #[test]
    fn trajectory_is_reproducible() {
        let a = run(&["--seed", "4", "trajectory", "--steps", "20"]).1;
        let b = run(&["--seed", "4", "trajectory", "--steps", "20"]).1;
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 22);
        let q = run(&["trajectory", "--mode", "quenched", "--u", "1,0", "--slab", "-2,3"]).1;
        let last: i64 = q.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
        assert!(!(-2..=3).contains(&last));
    }

    #[test]
    fn validation_errors_map_to_status_two() {
        let (code, _) = run(&["identity", "--u", "-1,0", "--walks", "10"]);
        assert_eq!(code.unwrap_err().exit_code(), 2);
        let (code, _) = run(&["identity", "--envs", "10"]);
        assert_eq!(code.unwrap_err().exit_code(), 2);
    }
}
