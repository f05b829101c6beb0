//! Monte Carlo estimators for the three-point gap, the time constant,
//! midpoint avoidance, confinement and the positive-ratio observable.
//!
//! Replicate `r` at size `n` always uses the environment seed
//! [`replicate_seed`]`(master_seed, n, r)`, and per-replicate outputs are
//! aggregated in replicate order, so results do not depend on the number of
//! worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{Environment, EnvironmentError, GoodSet, WeightDistribution};
use crate::geodesic::{
    geodesic_hits_box, min_good_count_to_boundary, GeodesicError, PathRecord, RegionMask, ShortestPaths,
};
use crate::lattice::{Axis, BoxSpec, Vertex};
use crate::rng::replicate_seed;
use crate::scalar::{pairwise_sum, Scalar};

/// Critical probability of planar bond percolation.
pub const P_C_2D: f64 = 0.5;

/// Slack allowed when checking pathwise inequalities in floating point.
pub const PATHWISE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{observable} violated at n = {n}, replicate {replicate}: {value} < {bound}")]
    CertificateViolation { observable: String, n: u32, replicate: usize, value: f64, bound: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloConfig<F> {
    pub replicates: usize,
    pub master_seed: u64,
    pub n_values: Vec<u32>,
    pub dist: WeightDistribution<F>,
    /// `C` in `K = Λ(⌈C n⌉)`.
    pub mask_factor: F,
}

impl<F: Scalar> MonteCarloConfig<F> {
    pub fn new(dist: WeightDistribution<F>, n_values: Vec<u32>, replicates: usize, master_seed: u64) -> Self {
        Self { replicates, master_seed, n_values, dist, mask_factor: F::lit(2.0) }
    }

    pub fn with_mask_factor(mut self, c: F) -> Self {
        self.mask_factor = c;
        self
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.replicates == 0 {
            return Err(EstimatorError::InvalidConfig("replicates must be positive".into()));
        }
        if !(self.mask_factor > F::one()) {
            return Err(EstimatorError::InvalidConfig(format!(
                "mask factor C must exceed 1, got {}",
                self.mask_factor
            )));
        }
        Ok(())
    }

    pub fn seed(&self, n: u32, replicate: usize) -> u64 {
        replicate_seed(self.master_seed, n, replicate as u64)
    }

    /// `K = Λ(⌈C n⌉)`.
    pub fn mask_box(&self, n: u32) -> BoxSpec {
        scaled_box(n, self.mask_factor)
    }
}

/// `Λ(⌈factor · n⌉)`, radius at least `n + 1`.
pub fn scaled_box<F: Scalar>(n: u32, factor: F) -> BoxSpec {
    let r = (F::lit(n as f64) * factor).ceil().as_f64() as u32;
    BoxSpec::centered(r.max(n + 1))
}

/// Monte Carlo summary of one observable at one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub observable: String,
    pub n: u32,
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub replicates: usize,
    pub master_seed: u64,
}

impl EstimateRecord {
    /// Mean, `sd / √N` and the normal 95% interval. Sums are pairwise over
    /// the sorted samples.
    pub fn from_samples(observable: impl Into<String>, n: u32, samples: &[f64], master_seed: u64) -> Self {
        let count = samples.len();
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = if count == 0 { f64::NAN } else { pairwise_sum(&sorted) / count as f64 };
        let stderr = if count < 2 {
            0.0
        } else {
            let mut sq: Vec<f64> = sorted.iter().map(|x| (x - mean) * (x - mean)).collect();
            sq.sort_by(f64::total_cmp);
            (pairwise_sum(&sq) / (count - 1) as f64).sqrt() / (count as f64).sqrt()
        };
        Self {
            observable: observable.into(),
            n,
            mean,
            stderr,
            ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
            replicates: count,
            master_seed,
        }
    }
}

pub(crate) fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Run `f(seed, replicate)` for every replicate, in parallel, collecting in
/// replicate order.
pub(crate) fn run_replicates<F: Scalar, T: Send>(
    cfg: &MonteCarloConfig<F>,
    n: u32,
    f: impl Fn(u64, usize) -> Result<T, EstimatorError> + Sync + Send,
) -> Result<Vec<T>, EstimatorError> {
    (0..cfg.replicates).into_par_iter().map(|r| f(cfg.seed(n, r), r)).collect()
}

/// Geodesics `γ(−n,0)`, `γ(0,n)`, `γ(−n,n)` and the gap
/// `G_n = T(−n,0) + T(0,n) − T(−n,n)`.
///
/// Two searches: one from `(−n,0)` reaching the origin and `(n,0)`, one from
/// the origin reaching `(n,0)`. Each search starts at the lexicographically
/// smaller endpoint, matching [`crate::geodesic::passage_time`].
#[derive(Clone, Debug)]
pub struct ThreePoint<F> {
    pub left: PathRecord<F>,
    pub right: PathRecord<F>,
    pub across: PathRecord<F>,
}

impl<F: Scalar> ThreePoint<F> {
    pub fn compute(env: &Environment<F>, n: u32, mask: RegionMask) -> Result<Self, GeodesicError> {
        let a = Vertex::new(-(n as i32), 0);
        let b = Vertex::new(n as i32, 0);
        let from_left = ShortestPaths::run(env, a, mask, &[Vertex::ORIGIN, b])?;
        let from_mid = ShortestPaths::run(env, Vertex::ORIGIN, mask, &[b])?;
        Ok(Self {
            left: from_left.path(Vertex::ORIGIN).expect("target settled"),
            right: from_mid.path(b).expect("target settled"),
            across: from_left.path(b).expect("target settled"),
        })
    }

    pub fn gap(&self) -> F {
        self.left.total_time() + self.right.total_time() - self.across.total_time()
    }

    pub fn all_within(&self, b: &BoxSpec) -> bool {
        [&self.left, &self.right, &self.across].iter().all(|p| p.vertices().iter().all(|&v| b.contains(v)))
    }
}

fn check_gap(n: u32, replicate: usize, gap: f64) -> Result<(), EstimatorError> {
    if gap < -PATHWISE_TOL {
        return Err(EstimatorError::CertificateViolation {
            observable: "three-point gap".into(),
            n,
            replicate,
            value: gap,
            bound: -PATHWISE_TOL,
        });
    }
    Ok(())
}

/// Per-replicate gaps `G_n` in `K = Λ(⌈C n⌉)`; fails if any is below `−1e−9`.
pub fn three_point_gap_samples<F: Scalar>(cfg: &MonteCarloConfig<F>, n: u32) -> Result<Vec<f64>, EstimatorError> {
    cfg.validate()?;
    if n == 0 {
        return Ok(vec![0.0; cfg.replicates]);
    }
    let k = cfg.mask_box(n);
    run_replicates(cfg, n, |seed, r| {
        let env = Environment::sample(k, cfg.dist, seed)?;
        let gap = ThreePoint::compute(&env, n, RegionMask::new(k))?.gap().as_f64();
        check_gap(n, r, gap)?;
        Ok(gap)
    })
}

/// Mean three-point gap per `n` (observable `gap`).
pub fn estimate_three_point_gap<F: Scalar>(cfg: &MonteCarloConfig<F>) -> Result<Vec<EstimateRecord>, EstimatorError> {
    cfg.n_values
        .iter()
        .map(|&n| {
            let samples = three_point_gap_samples(cfg, n)?;
            Ok(EstimateRecord::from_samples("gap", n, &samples, cfg.master_seed))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConstantEstimate {
    /// Mean of `T(0, n e)/n` per `n` (observable `time_per_n`).
    pub records: Vec<EstimateRecord>,
    /// Smallest per-`n` mean.
    pub mu_hat: f64,
    pub note: &'static str,
}

pub const TIME_CONSTANT_NOTE: &str =
    "finite-n means of T(0,n)/n are biased upward; mu_hat is the smallest observed mean, an upper estimate";

pub fn estimate_time_constant<F: Scalar>(
    cfg: &MonteCarloConfig<F>,
    direction: Axis,
) -> Result<TimeConstantEstimate, EstimatorError> {
    cfg.validate()?;
    let mut records = Vec::new();
    for &n in &cfg.n_values {
        if n == 0 {
            return Err(EstimatorError::InvalidConfig("time constant needs n >= 1".into()));
        }
        let k = cfg.mask_box(n);
        let (dx, dy) = direction.unit();
        let target = Vertex::new(dx * n as i32, dy * n as i32);
        let samples = run_replicates(cfg, n, |seed, _| {
            let env = Environment::sample(k, cfg.dist, seed)?;
            let tree = ShortestPaths::run(&env, Vertex::ORIGIN, RegionMask::new(k), &[target])?;
            Ok(tree.time(target).expect("target settled").as_f64() / n as f64)
        })?;
        records.push(EstimateRecord::from_samples("time_per_n", n, &samples, cfg.master_seed));
    }
    let mu_hat = records.iter().map(|r| r.mean).fold(f64::INFINITY, f64::min);
    Ok(TimeConstantEstimate { records, mu_hat, note: TIME_CONSTANT_NOTE })
}

/// Per `n`: frequency with which `γ(−n,n)` misses `Λ(m)` (`avoid_box`) and
/// with which it visits the origin (`origin_hit`). `m = 0` is read as the
/// empty box.
pub fn midpoint_avoidance_probability<F: Scalar>(
    cfg: &MonteCarloConfig<F>,
    m: u32,
) -> Result<Vec<EstimateRecord>, EstimatorError> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &n in &cfg.n_values {
        if n == 0 {
            return Err(EstimatorError::InvalidConfig("midpoint avoidance needs n >= 1".into()));
        }
        let k = cfg.mask_box(n);
        let a = Vertex::new(-(n as i32), 0);
        let b = Vertex::new(n as i32, 0);
        let inner = BoxSpec::centered(m);
        let samples = run_replicates(cfg, n, |seed, _| {
            let env = Environment::sample(k, cfg.dist, seed)?;
            let tree = ShortestPaths::run(&env, a, RegionMask::new(k), &[b])?;
            let path = tree.path(b).expect("target settled");
            let avoid = m == 0 || !geodesic_hits_box(&path, &inner);
            let origin = path.vertices().contains(&Vertex::ORIGIN);
            Ok((indicator(avoid), indicator(origin)))
        })?;
        let (avoid, origin): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        out.push(EstimateRecord::from_samples("avoid_box", n, &avoid, cfg.master_seed));
        out.push(EstimateRecord::from_samples("origin_hit", n, &origin, cfg.master_seed));
    }
    Ok(out)
}

/// Frequency with which `γ(−n,0)`, `γ(0,n)` and `γ(−n,n)`, computed in the
/// larger box `Λ(⌈C' n⌉)`, all stay inside `K = Λ(⌈C n⌉)`.
pub fn confinement_probability<F: Scalar>(
    cfg: &MonteCarloConfig<F>,
    detect_factor: F,
) -> Result<Vec<EstimateRecord>, EstimatorError> {
    cfg.validate()?;
    if !(detect_factor > cfg.mask_factor) {
        return Err(EstimatorError::InvalidConfig(format!(
            "detection factor {detect_factor} must exceed the mask factor {}",
            cfg.mask_factor
        )));
    }
    let mut out = Vec::new();
    for &n in &cfg.n_values {
        if n == 0 {
            return Err(EstimatorError::InvalidConfig("confinement needs n >= 1".into()));
        }
        let k = cfg.mask_box(n);
        let big = scaled_box(n, detect_factor);
        let samples = run_replicates(cfg, n, |seed, r| {
            let env = Environment::sample(big, cfg.dist, seed)?;
            let geo = ThreePoint::compute(&env, n, RegionMask::new(big))?;
            check_gap(n, r, geo.gap().as_f64())?;
            Ok(indicator(geo.all_within(&k)))
        })?;
        out.push(EstimateRecord::from_samples("confined", n, &samples, cfg.master_seed));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodRatioReport {
    /// Mean of `min_good_count / n` per `n` (observable `good_ratio`).
    pub records: Vec<EstimateRecord>,
    /// Smallest per-replicate ratio per `n`.
    pub minima: Vec<(u32, f64)>,
    /// Smallest observed ratio at the largest `n`.
    pub a_hat: f64,
    /// Set when `ν(B) ≤ 1 − p_c`.
    pub warning: Option<String>,
}

/// Per-replicate `min_good_count_to_boundary / n` on `Λ(n)`.
pub fn good_ratio_samples<F: Scalar>(
    cfg: &MonteCarloConfig<F>,
    good: &GoodSet<F>,
    n: u32,
) -> Result<Vec<f64>, EstimatorError> {
    if n == 0 {
        return Err(EstimatorError::InvalidConfig("good ratio needs n >= 1".into()));
    }
    let region = BoxSpec::centered(n);
    run_replicates(cfg, n, |seed, _| {
        let env = Environment::sample(region, cfg.dist, seed)?;
        Ok(min_good_count_to_boundary(&env, good, n)? as f64 / n as f64)
    })
}

pub fn good_ratio_estimate<F: Scalar>(
    cfg: &MonteCarloConfig<F>,
    good: &GoodSet<F>,
) -> Result<GoodRatioReport, EstimatorError> {
    if cfg.replicates == 0 {
        return Err(EstimatorError::InvalidConfig("replicates must be positive".into()));
    }
    let warning = (good.measure.as_f64() <= 1.0 - P_C_2D).then(|| {
        let msg = format!(
            "nu(B) = {:.4} is not above 1 - p_c = {P_C_2D}; the good-edge ratio is expected to vanish",
            good.measure
        );
        log::warn!("{msg}");
        msg
    });
    let mut records = Vec::new();
    let mut minima = Vec::new();
    for &n in &cfg.n_values {
        let samples = good_ratio_samples(cfg, good, n)?;
        minima.push((n, samples.iter().copied().fold(f64::INFINITY, f64::min)));
        records.push(EstimateRecord::from_samples("good_ratio", n, &samples, cfg.master_seed));
    }
    let a_hat = minima.iter().max_by_key(|(n, _)| *n).map(|&(_, v)| v).unwrap_or(f64::NAN);
    Ok(GoodRatioReport { records, minima, a_hat, warning })
}

/// Inner radius and crossing width as functions of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleRule {
    /// `m = ⌈n^{1/3}⌉`, `scale = ⌈√m⌉`.
    #[default]
    DeskScale,
    /// `m = ⌈n^{1/33}⌉`, `scale = ⌈n^{1/66}⌉`; meaningful only for astronomically large `n`.
    Asymptotic,
}

/// Smallest integer `r` with `r^k ≥ n`.
pub fn ceil_root(n: u64, k: u32) -> u64 {
    let mut r = (n as f64).powf(1.0 / k as f64).floor().max(1.0) as u64;
    while (r as u128).pow(k) > n as u128 && r > 1 {
        r -= 1;
    }
    while (r as u128).pow(k) < n as u128 {
        r += 1;
    }
    r
}

impl ScaleRule {
    /// Inner radius, at least 2 so the shift field is non-empty.
    pub fn inner_radius(self, n: u32) -> u32 {
        let m = match self {
            ScaleRule::DeskScale => ceil_root(n as u64, 3),
            ScaleRule::Asymptotic => ceil_root(n as u64, 33),
        };
        (m as u32).max(2)
    }

    pub fn scale(self, n: u32, m: u32) -> u32 {
        let s = match self {
            ScaleRule::DeskScale => ceil_root(m as u64, 2),
            ScaleRule::Asymptotic => ceil_root(n as u64, 66),
        };
        (s as u32).clamp(1, m)
    }
}
