//! Dispatch an [`ExperimentConfig`] to the estimators and persist the rows.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use fpplab::claims::{claim_replicates, run_goal_chain, BaseSampler, ChainConfig};
use fpplab::environment::{build_tau_field, random_certificate_trials, GoodSet, WeightTransform};
use fpplab::estimators::{
    confinement_probability, estimate_time_constant, good_ratio_estimate, midpoint_avoidance_probability,
    three_point_gap_samples, EstimateRecord, EstimatorError, MonteCarloConfig,
};
use fpplab::lattice::{Axis, Vertex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, Direction, Experiment, ExperimentConfig, Fixture};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("certificate violated: {0}")]
    Certificate(String),
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io { .. } | RunError::Csv(_) => 3,
            RunError::Certificate(_) => 4,
            RunError::Runtime(_) => 1,
        }
    }
}

impl From<EstimatorError> for RunError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::CertificateViolation { .. } => RunError::Certificate(e.to_string()),
            EstimatorError::InvalidConfig(msg) => {
                RunError::Config(ConfigError::Invalid { field: "config".into(), message: msg })
            }
            other => RunError::Runtime(other.to_string()),
        }
    }
}

/// One `(n, statistic)` result. `wall_ms` is the only field that varies
/// between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub param_json_ref: String,
    pub n: u32,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub wall_ms: u64,
}

impl ResultRow {
    /// Every field except `wall_ms`, bit for bit.
    pub fn same_result(&self, other: &ResultRow) -> bool {
        self.experiment == other.experiment
            && self.param_json_ref == other.param_json_ref
            && self.n == other.n
            && self.statistic == other.statistic
            && self.value.to_bits() == other.value.to_bits()
            && self.stderr.map(f64::to_bits) == other.stderr.map(f64::to_bits)
            && self.replicates == other.replicates
            && self.seed == other.seed
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    /// False when the wall-clock budget stopped the run early.
    pub complete: bool,
}

#[derive(Serialize, Deserialize)]
pub struct Sidecar {
    pub config: ExperimentConfig,
    pub complete: bool,
    pub rows: usize,
    pub generator: String,
}

/// `<out>.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

struct Stat {
    name: String,
    value: f64,
    stderr: Option<f64>,
    replicates: usize,
}

impl Stat {
    fn plain(name: &str, value: f64, replicates: usize) -> Self {
        Self { name: name.into(), value, stderr: None, replicates }
    }
}

impl From<&EstimateRecord> for Stat {
    fn from(r: &EstimateRecord) -> Self {
        Self {
            name: r.observable.clone(),
            value: r.mean,
            stderr: (r.replicates > 0).then_some(r.stderr),
            replicates: r.replicates,
        }
    }
}

fn mc_config(cfg: &ExperimentConfig, n: u32) -> Result<MonteCarloConfig<f64>, RunError> {
    Ok(MonteCarloConfig::new(cfg.distribution()?, vec![n], cfg.replicates, cfg.master_seed)
        .with_mask_factor(cfg.mask_factor))
}

fn chain_config(cfg: &ExperimentConfig, n: u32) -> Result<ChainConfig<f64>, RunError> {
    let mut c = ChainConfig::new(mc_config(cfg, n)?);
    c.rule = cfg.scale_rule;
    c.m = cfg.m;
    c.kappa = cfg.kappa;
    c.delta = cfg.delta;
    c.coupling = cfg.coupling;
    c.scale = cfg.scale;
    c.crossing_ratio = cfg.crossing_ratio;
    if let Some(d) = cfg.detect_factor {
        c.detect_factor = d;
    }
    c.base = match cfg.fixture {
        Fixture::None => BaseSampler::Iid,
        Fixture::Corridor => BaseSampler::AxisCorridor,
    };
    Ok(c)
}

fn mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let v: Vec<f64> = xs.collect();
    let r = EstimateRecord::from_samples("", 0, &v, 0);
    (r.mean, r.replicates)
}

/// Statistics for one size.
fn stats_for(cfg: &ExperimentConfig, n: u32) -> Result<Vec<Stat>, RunError> {
    let dist = cfg.distribution()?;
    let mc = mc_config(cfg, n)?;
    let stats = match cfg.experiment {
        Experiment::ThreePointGap => {
            let samples = three_point_gap_samples(&mc, n)?;
            let rec = EstimateRecord::from_samples("gap", n, &samples, cfg.master_seed);
            let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
            vec![(&rec).into(), Stat::plain("gap_min", min, samples.len())]
        }
        Experiment::TimeConstant => {
            let axis = match cfg.direction {
                Direction::Horizontal => Axis::Horizontal,
                Direction::Vertical => Axis::Vertical,
            };
            let est = estimate_time_constant(&mc, axis)?;
            est.records.iter().map(Stat::from).collect()
        }
        Experiment::Midpoint => {
            let m = cfg.m.unwrap_or_else(|| cfg.scale_rule.inner_radius(n));
            midpoint_avoidance_probability(&mc, m)?.iter().map(Stat::from).collect()
        }
        Experiment::Confinement => {
            let detect = cfg.detect_factor.unwrap_or(2.0 * cfg.mask_factor);
            confinement_probability(&mc, detect)?.iter().map(Stat::from).collect()
        }
        Experiment::GoodRatio => {
            let good = GoodSet::lower_tail(&dist, cfg.good_measure);
            let rep = good_ratio_estimate(&mc, &good)?;
            let mut out: Vec<Stat> = rep.records.iter().map(Stat::from).collect();
            out.push(Stat::plain("good_ratio_min", rep.a_hat, cfg.replicates));
            out
        }
        Experiment::Claim1 | Experiment::Claim2 => {
            let chain = chain_config(cfg, n)?;
            let setup = chain.setup(n).map_err(EstimatorError::from)?;
            let reps = claim_replicates(&chain, n)?;
            let r = reps.len();
            let mut out =
                vec![Stat::plain("delta", setup.good.delta, r), Stat::plain("good_measure", setup.good.measure, r)];
            if cfg.experiment == Experiment::Claim1 {
                let rec = |name: &str, f: &dyn Fn(&fpplab::claims::ClaimReport<f64>) -> f64| {
                    let xs: Vec<f64> = reps.iter().map(|(c1, _)| f(c1)).collect();
                    EstimateRecord::from_samples(name, n, &xs, cfg.master_seed)
                };
                out.push((&rec("lift_gap", &|c| c.lhs)).into());
                out.push((&rec("lift_bound", &|c| c.rhs)).into());
                out.push((&rec("tau_sum", &|c| c.tau_sum)).into());
                out.push((&rec("tau_positive", &|c| f64::from(u8::from(c.tau_sum > 0.0)))).into());
                out.push((&rec("lift_floor", &|c| c.floor.unwrap_or(0.0))).into());
            } else {
                let xs: Vec<f64> = reps.iter().map(|(_, c2)| f64::from(u8::from(c2.hypothesis))).collect();
                out.push((&EstimateRecord::from_samples("avoid_both", n, &xs, cfg.master_seed)).into());
                let avoiding: Vec<f64> =
                    reps.iter().filter(|(_, c2)| c2.hypothesis).map(|(_, c2)| (c2.lhs - c2.rhs).abs()).collect();
                let max_diff = avoiding.iter().copied().fold(0.0, f64::max);
                out.push(Stat::plain("max_abs_diff_when_avoiding", max_diff, avoiding.len()));
                let (hit_diff, k) = mean(reps.iter().filter(|(_, c2)| !c2.hypothesis).map(|(_, c2)| c2.lhs - c2.rhs));
                out.push(Stat::plain("mean_diff_when_hitting", hit_diff, k));
            }
            out
        }
        Experiment::GoalChain => {
            let chain = chain_config(cfg, n)?;
            let mut out = Vec::new();
            for s in run_goal_chain(&chain)? {
                out.push(Stat::plain("m", s.m as f64, cfg.replicates));
                out.push(Stat::plain("scale", s.scale as f64, cfg.replicates));
                out.push(Stat::plain("delta", s.delta, cfg.replicates));
                out.push(Stat::plain("good_measure", s.good_measure, cfg.replicates));
                out.push(Stat::plain("analytic_floor", s.analytic_floor, cfg.replicates));
                out.extend(s.records.iter().map(Stat::from));
            }
            out
        }
        Experiment::MwCertificate | Experiment::TauNorm => unreachable!("handled without sizes"),
    };
    Ok(stats)
}

fn stats_without_sizes(cfg: &ExperimentConfig) -> Result<Vec<(u32, Vec<Stat>)>, RunError> {
    match cfg.experiment {
        Experiment::MwCertificate => {
            let t = WeightTransform::with_coupling(cfg.distribution()?, cfg.coupling)
                .map_err(|e| RunError::Runtime(e.to_string()))?;
            let trials = random_certificate_trials(&t, cfg.replicates, 5, cfg.master_seed)
                .map_err(|e| RunError::Runtime(e.to_string()))?;
            if let Some(bad) = trials.iter().find(|t| !t.certificate.pass) {
                return Err(RunError::Certificate(format!(
                    "measure inequality fails: lhs {} < rhs {}",
                    bad.certificate.lhs, bad.certificate.rhs
                )));
            }
            let r = trials.len();
            let min_slack = trials.iter().map(|t| t.certificate.slack()).fold(f64::INFINITY, f64::min);
            let (mean_lhs, _) = mean(trials.iter().map(|t| t.certificate.lhs));
            Ok(vec![(
                0,
                vec![
                    Stat::plain("pass_fraction", 1.0, r),
                    Stat::plain("min_slack", min_slack, r),
                    Stat::plain("mean_lhs", mean_lhs, r),
                ],
            )])
        }
        Experiment::TauNorm => cfg
            .n_values
            .iter()
            .map(|&m| {
                let f = build_tau_field(m, cfg.kappa, Vertex::ORIGIN)
                    .map_err(|e| ConfigError::Invalid { field: "n".into(), message: e.to_string() })?;
                Ok((m, vec![Stat::plain("tau_norm_sq", f.norm_sq(), 1)]))
            })
            .collect(),
        _ => unreachable!("sized experiment"),
    }
}

/// Run the experiment; rows are produced in `n` order. Stops before the
/// next size once `max_seconds` has elapsed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let start = Instant::now();
    let param_ref = match &cfg.out {
        Some(out) => sidecar_path(out).file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        None => cfg.to_json(),
    };
    let mut rows = Vec::new();
    let mut complete = true;
    let push = |n: u32, stats: Vec<Stat>, wall_ms: u64, rows: &mut Vec<ResultRow>| {
        for s in stats {
            rows.push(ResultRow {
                experiment: cfg.experiment.name().into(),
                param_json_ref: param_ref.clone(),
                n,
                statistic: s.name,
                value: s.value,
                stderr: s.stderr,
                replicates: s.replicates,
                seed: cfg.master_seed,
                wall_ms,
            });
        }
    };
    if matches!(cfg.experiment, Experiment::MwCertificate | Experiment::TauNorm) {
        let t0 = Instant::now();
        let groups = stats_without_sizes(cfg)?;
        let ms = t0.elapsed().as_millis() as u64;
        for (n, stats) in groups {
            push(n, stats, ms, &mut rows);
        }
    } else {
        for &n in &cfg.n_values {
            if let Some(limit) = cfg.max_seconds {
                if start.elapsed().as_secs() >= limit {
                    log::warn!("wall-clock budget of {limit}s reached before n = {n}; output is partial");
                    complete = false;
                    break;
                }
            }
            let t0 = Instant::now();
            let stats = stats_for(cfg, n)?;
            push(n, stats, t0.elapsed().as_millis() as u64, &mut rows);
        }
    }
    Ok(RunOutput { rows, complete })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

pub fn write_rows<W: Write>(w: W, rows: &[ResultRow]) -> Result<(), RunError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    if rows.is_empty() {
        wr.write_record([
            "experiment",
            "param_json_ref",
            "n",
            "statistic",
            "value",
            "stderr",
            "replicates",
            "seed",
            "wall_ms",
        ])?;
    }
    wr.flush().map_err(|e| RunError::Csv(e.into()))?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>, RunError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rd = csv::Reader::from_reader(file);
    rd.deserialize().map(|r| r.map_err(RunError::from)).collect()
}

/// Run and persist: CSV at `out` plus `<out>.json`, or CSV on stdout when no
/// output path is set. The output file is created before any work starts.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let Some(out) = cfg.out.clone() else {
        let output = run_experiment(cfg)?;
        write_rows(io::stdout().lock(), &output.rows)?;
        return Ok(output);
    };
    let file = File::create(&out).map_err(io_err(&out))?;
    let side = sidecar_path(&out);
    let write_sidecar = |complete: bool, rows: usize| -> Result<(), RunError> {
        let s = Sidecar {
            config: cfg.clone(),
            complete,
            rows,
            generator: concat!("fpplab ", env!("CARGO_PKG_VERSION")).into(),
        };
        let text = serde_json::to_string_pretty(&s).expect("sidecar serializes");
        std::fs::write(&side, text + "\n").map_err(io_err(&side))
    };
    write_sidecar(false, 0)?;
    let output = run_experiment(cfg)?;
    write_rows(file, &output.rows)?;
    write_sidecar(output.complete, output.rows.len())?;
    Ok(output)
}
