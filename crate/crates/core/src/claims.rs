//! Pathwise verification on coupled environments.
//!
//! A [`CoupledPair`] holds a base environment `ω̃` and its lift
//! `ω = T_τ(ω̃)`. Along any path, the lift adds at least `δ τ_e` on every
//! edge whose base weight lies in `B_δ`, so passage-time differences are
//! bounded below by `δ · tau_sum`. The functions here compute both sides of
//! those inequalities and fail loudly when one is violated.

use thiserror::Error;

use crate::environment::{
    apply_transform, build_tau_field, Direction, Environment, EnvironmentError, GoodSet, ScanGrid, ShiftScan, TauField,
    WeightDistribution, WeightTransform,
};
use crate::estimators::{
    indicator, run_replicates, scaled_box, EstimateRecord, EstimatorError, MonteCarloConfig, ScaleRule, ThreePoint,
    PATHWISE_TOL,
};
use crate::geodesic::{first_exit_prefix, geodesic_hits_box, GeodesicError, PathRecord, RegionMask, ShortestPaths};
use crate::lattice::{annulus_of_vertex, Axis, BoxSpec, Vertex};
use crate::numerics::{integrate, QuadratureError};
use crate::rng::EdgeStream;
use crate::scalar::{pairwise_sum, Scalar};

/// Tolerance for recovering the base weights from the lift.
pub const INVERSE_TOL: f64 = 1e-10;
/// Tolerance for equality of passage times when geodesics avoid the field.
pub const EQUALITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClaimError {
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("coupling invariant broken: {0}")]
    Coupling(String),
    #[error("field inner radius {field} differs from m = {m}")]
    RadiusMismatch { field: u32, m: u32 },
    #[error("crossing scale {scale} must lie in 1..=m ({m})")]
    BadScale { scale: u32, m: u32 },
    #[error("path does not start at the field center")]
    PathOffCenter,
}

impl From<ClaimError> for EstimatorError {
    fn from(e: ClaimError) -> Self {
        match e {
            ClaimError::Estimator(e) => e,
            ClaimError::Environment(e) => EstimatorError::Environment(e),
            ClaimError::Geodesic(e) => EstimatorError::Geodesic(e),
            other => EstimatorError::InvalidConfig(other.to_string()),
        }
    }
}

/// Base environment `ω̃` and lift `ω = T_τ(ω̃)` on the same region.
#[derive(Clone, Debug)]
pub struct CoupledPair<F> {
    pub base: Environment<F>,
    pub lifted: Environment<F>,
    pub field: TauField<F>,
    pub good: GoodSet<F>,
    pub transform: WeightTransform<F>,
}

pub fn make_coupled_pair<F: Scalar>(
    region: BoxSpec,
    dist: WeightDistribution<F>,
    seed: u64,
    field: TauField<F>,
    transform: WeightTransform<F>,
    good: GoodSet<F>,
) -> Result<CoupledPair<F>, ClaimError> {
    CoupledPair::from_base(Environment::sample(region, dist, seed)?, field, transform, good)
}

impl<F: Scalar> CoupledPair<F> {
    /// Lift `base` and certify the pair: the lift dominates edgewise, agrees
    /// bit for bit where `τ_e = 0`, and inverts back to within `1e−10`.
    pub fn from_base(
        base: Environment<F>,
        field: TauField<F>,
        transform: WeightTransform<F>,
        good: GoodSet<F>,
    ) -> Result<Self, ClaimError> {
        let lifted = apply_transform(&base, &field, &transform, Direction::Forward)?;
        let recovered = apply_transform(&lifted, &field, &transform, Direction::Inverse)?;
        for ((e, w), ((_, l), (_, r))) in base.iter().zip(lifted.iter().zip(recovered.iter())) {
            if l < w {
                return Err(ClaimError::Coupling(format!("lift lowers edge {e:?}: {w} -> {l}")));
            }
            if field.value(e) == F::zero() && l.as_f64().to_bits() != w.as_f64().to_bits() {
                return Err(ClaimError::Coupling(format!("edge {e:?} outside the field changed")));
            }
            if (r - w).abs().as_f64() > INVERSE_TOL {
                return Err(ClaimError::Coupling(format!("inverse misses edge {e:?} by {}", (r - w).abs())));
            }
        }
        Ok(Self { base, lifted, field, good, transform })
    }

    pub fn region(&self) -> BoxSpec {
        self.base.region()
    }
}

/// Crossing decomposition parameters: annuli of width `scale` and the
/// required good-edge density `ratio` (the constant `a`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingSpec<F> {
    pub scale: u32,
    pub ratio: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusSumReport<F> {
    /// `Σ τ_e 1(ω̃(e) ∈ B_δ)` along the prefix.
    pub tau_sum: F,
    /// Good base edges on each crossing from `∂Λ((j−1)s)` to `∂Λ(js)`.
    pub crossing_counts: Vec<usize>,
    /// Every crossing has at least `a · scale` good edges.
    pub crossings_ok: bool,
    /// `(a / (1/2 − κ)) [log(m)^{1/2−κ} − log(s)^{1/2−κ}]`.
    pub analytic_floor: F,
}

/// Closed form of `a ∫_s^m dy / (y log(y)^{1/2+κ})`.
pub fn analytic_floor<F: Scalar>(ratio: F, kappa: F, scale: u32, m: u32) -> F {
    let e = F::lit(0.5) - kappa;
    let lm = F::lit(m as f64).ln();
    let ls = F::lit(scale as f64).ln();
    ratio / e * (lm.powf(e) - ls.powf(e))
}

/// The same integral by adaptive quadrature; needs `scale ≥ 2`.
pub fn analytic_floor_by_quadrature<F: Scalar>(ratio: F, kappa: F, scale: u32, m: u32) -> Result<F, QuadratureError> {
    let p = F::lit(0.5) + kappa;
    let v = integrate(|y: F| (y * y.ln().powf(p)).recip(), F::lit(scale as f64), F::lit(m as f64), F::lit(1e-12))?;
    Ok(ratio * v)
}

/// Decompose the first-exit prefix of `path` from `Λ(m)` into annulus
/// crossings and sum the field over its good base edges.
pub fn annulus_sum_lower_bound<F: Scalar>(
    path: &PathRecord<F>,
    pair: &CoupledPair<F>,
    crossing: CrossingSpec<F>,
) -> Result<AnnulusSumReport<F>, ClaimError> {
    let center = pair.field.center();
    let m = pair.field.inner_radius();
    if crossing.scale == 0 || crossing.scale > m {
        return Err(ClaimError::BadScale { scale: crossing.scale, m });
    }
    if path.start() != center {
        return Err(ClaimError::PathOffCenter);
    }
    let prefix = first_exit_prefix(path, &pair.field.support_box())?;
    let edges = prefix.edges();
    let mut good = Vec::with_capacity(edges.len());
    let mut terms = Vec::new();
    for &e in &edges {
        let w = pair.base.weight(e).ok_or(GeodesicError::MissingEdge(e))?;
        let is_good = pair.good.contains(w);
        good.push(is_good);
        let t = pair.field.value(e);
        if is_good && t > F::zero() {
            terms.push(t);
        }
    }
    terms.sort_by(|a, b| a.partial_cmp(b).expect("finite amplitudes"));
    let tau_sum = pairwise_sum(&terms);

    let rings: Vec<u32> = prefix.vertices().iter().map(|&v| annulus_of_vertex(v, center)).collect();
    let s = crossing.scale;
    let mut crossing_counts = Vec::new();
    for j in 1..=m / s {
        let hit = rings.iter().position(|&k| k >= j * s).expect("prefix leaves Λ(m)");
        let start = rings[..=hit].iter().rposition(|&k| k == (j - 1) * s).expect("walk is nearest-neighbour");
        crossing_counts.push(good[start..hit].iter().filter(|&&g| g).count());
    }
    let need = crossing.ratio * F::lit(s as f64);
    let crossings_ok = crossing_counts.iter().all(|&c| F::lit(c as f64) >= need);
    Ok(AnnulusSumReport {
        tau_sum,
        crossing_counts,
        crossings_ok,
        analytic_floor: analytic_floor(crossing.ratio, pair.field.kappa(), s, m),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClaimKind {
    /// `T_K(0,n)(ω) − T_K(0,n)(ω̃) ≥ δ · tau_sum`.
    Lift,
    /// `T_K(−n,n)(ω) = T_K(−n,n)(ω̃)` when both geodesics avoid `Λ(m)`.
    Avoidance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimReport<F> {
    pub kind: ClaimKind,
    pub n: u32,
    pub m: u32,
    pub kappa: F,
    pub delta: F,
    pub lhs: F,
    pub rhs: F,
    pub tau_sum: F,
    pub crossing_counts: Vec<usize>,
    /// `δ ·` the analytic floor, when a crossing spec was supplied.
    pub floor: Option<F>,
    /// Whether the claim's hypothesis held; always true for [`ClaimKind::Lift`].
    pub hypothesis: bool,
    pub pass: bool,
}

fn check_radius<F: Scalar>(pair: &CoupledPair<F>, m: u32) -> Result<(), ClaimError> {
    let field = pair.field.inner_radius();
    if !pair.field.is_zero() && field != m {
        return Err(ClaimError::RadiusMismatch { field, m });
    }
    Ok(())
}

/// Lift inequality along `γ_K(0,n)(ω)` with `K` the pair's region.
pub fn verify_claim1<F: Scalar>(
    pair: &CoupledPair<F>,
    n: u32,
    m: u32,
    crossing: Option<CrossingSpec<F>>,
) -> Result<ClaimReport<F>, ClaimError> {
    check_radius(pair, m)?;
    let mask = RegionMask::new(pair.region());
    let target = Vertex::new(n as i32, 0);
    let lifted = ShortestPaths::run(&pair.lifted, Vertex::ORIGIN, mask, &[target])?;
    let base = ShortestPaths::run(&pair.base, Vertex::ORIGIN, mask, &[target])?;
    let path = lifted.path(target).expect("target settled");
    let lhs = path.total_time() - base.time(target).expect("target settled");
    let (tau_sum, crossing_counts, floor) = if pair.field.is_zero() {
        (F::zero(), Vec::new(), crossing.map(|_| F::zero()))
    } else {
        let spec = crossing.unwrap_or(CrossingSpec { scale: 1, ratio: F::zero() });
        let rep = annulus_sum_lower_bound(&path, pair, spec)?;
        let floor = crossing.map(|_| pair.good.delta * rep.analytic_floor);
        (rep.tau_sum, if crossing.is_some() { rep.crossing_counts } else { Vec::new() }, floor)
    };
    let rhs = pair.good.delta * tau_sum;
    Ok(ClaimReport {
        kind: ClaimKind::Lift,
        n,
        m,
        kappa: pair.field.kappa(),
        delta: pair.good.delta,
        lhs,
        rhs,
        tau_sum,
        crossing_counts,
        floor,
        hypothesis: true,
        pass: lhs.as_f64() >= rhs.as_f64() - PATHWISE_TOL,
    })
}

/// Equality of `T_K(−n,n)` under both environments when both geodesics
/// avoid `Λ(m)`; otherwise records the miss without asserting.
pub fn verify_claim2<F: Scalar>(pair: &CoupledPair<F>, n: u32, m: u32) -> Result<ClaimReport<F>, ClaimError> {
    check_radius(pair, m)?;
    let mask = RegionMask::new(pair.region());
    let a = Vertex::new(-(n as i32), 0);
    let b = Vertex::new(n as i32, 0);
    let inner = BoxSpec::new(m, pair.field.center());
    let lifted = ShortestPaths::run(&pair.lifted, a, mask, &[b])?.path(b).expect("target settled");
    let base = ShortestPaths::run(&pair.base, a, mask, &[b])?.path(b).expect("target settled");
    let hypothesis = !geodesic_hits_box(&lifted, &inner) && !geodesic_hits_box(&base, &inner);
    let (lhs, rhs) = (lifted.total_time(), base.total_time());
    Ok(ClaimReport {
        kind: ClaimKind::Avoidance,
        n,
        m,
        kappa: pair.field.kappa(),
        delta: pair.good.delta,
        lhs,
        rhs,
        tau_sum: F::zero(),
        crossing_counts: Vec::new(),
        floor: None,
        hypothesis,
        pass: !hypothesis || (lhs - rhs).abs().as_f64() <= EQUALITY_TOL,
    })
}

/// Base environment whose horizontal axis is a cheap corridor: axis edges
/// draw from the lowest decile of the law, all others from the highest.
/// Geodesics between points on the axis then run along it through the origin.
pub fn axis_corridor_environment<F: Scalar>(
    region: BoxSpec,
    dist: WeightDistribution<F>,
    seed: u64,
) -> Result<Environment<F>, EnvironmentError> {
    let mut stream = EdgeStream::new(seed);
    Environment::from_fn(region, dist, seed, |e| {
        let u = F::lit(stream.uniform(e));
        if e.axis == Axis::Horizontal && e.base.y == 0 {
            dist.quantile(F::lit(0.1) * u)
        } else {
            dist.quantile_upper(F::lit(0.1) * u)
        }
    })
}

/// How base environments are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BaseSampler {
    /// I.i.d. weights from the law.
    #[default]
    Iid,
    /// [`axis_corridor_environment`].
    AxisCorridor,
}

impl BaseSampler {
    pub fn sample<F: Scalar>(
        self,
        region: BoxSpec,
        dist: WeightDistribution<F>,
        seed: u64,
    ) -> Result<Environment<F>, EnvironmentError> {
        match self {
            BaseSampler::Iid => Environment::sample(region, dist, seed),
            BaseSampler::AxisCorridor => axis_corridor_environment(region, dist, seed),
        }
    }
}

/// Parameters of the coupled experiments; `None` fields fall back to
/// [`ScaleRule`] and the default `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig<F> {
    pub mc: MonteCarloConfig<F>,
    pub rule: ScaleRule,
    pub m: Option<u32>,
    pub kappa: F,
    pub delta: Option<F>,
    pub coupling: F,
    pub scale: Option<u32>,
    pub crossing_ratio: F,
    /// `C'` in the detection box `Λ(⌈C' n⌉)` used for confinement.
    pub detect_factor: F,
    /// Use the zero field; the chain then reduces to `G_n ≥ 0`.
    pub zero_field: bool,
    pub base: BaseSampler,
}

impl<F: Scalar> ChainConfig<F> {
    pub fn new(mc: MonteCarloConfig<F>) -> Self {
        let detect_factor = mc.mask_factor * F::lit(2.0);
        Self {
            mc,
            rule: ScaleRule::default(),
            m: None,
            kappa: F::lit(0.1),
            delta: None,
            coupling: F::one(),
            scale: None,
            crossing_ratio: F::lit(0.3),
            detect_factor,
            zero_field: false,
            base: BaseSampler::Iid,
        }
    }

    /// Field, transform and good set for size `n`.
    pub fn setup(&self, n: u32) -> Result<ChainSetup<F>, ClaimError> {
        let m = self.m.unwrap_or_else(|| self.rule.inner_radius(n));
        let scale = self.scale.unwrap_or_else(|| self.rule.scale(n, m));
        if scale == 0 || scale > m {
            return Err(ClaimError::BadScale { scale, m });
        }
        let transform = WeightTransform::with_coupling(self.mc.dist, self.coupling)?;
        let scan = ShiftScan::new(transform, ScanGrid::default());
        let delta = match self.delta {
            Some(d) => d,
            None => scan.default_delta(256).ok_or_else(|| {
                ClaimError::Estimator(EstimatorError::InvalidConfig("no grid δ gives ν(B_δ) > 1/2".into()))
            })?,
        };
        let good = scan.good_set(delta)?;
        let field = if self.zero_field {
            TauField::zero(Vertex::ORIGIN)
        } else {
            build_tau_field(m, self.kappa, Vertex::ORIGIN)?
        };
        Ok(ChainSetup { n, m, scale, field, transform, good })
    }
}

#[derive(Clone, Debug)]
pub struct ChainSetup<F> {
    pub n: u32,
    pub m: u32,
    pub scale: u32,
    pub field: TauField<F>,
    pub transform: WeightTransform<F>,
    pub good: GoodSet<F>,
}

impl<F: Scalar> ChainSetup<F> {
    pub fn pair(&self, base: Environment<F>) -> Result<CoupledPair<F>, ClaimError> {
        CoupledPair::from_base(base, self.field.clone(), self.transform, self.good.clone())
    }

    pub fn crossing(&self, ratio: F) -> CrossingSpec<F> {
        CrossingSpec { scale: self.scale, ratio }
    }
}

/// Lift and avoidance reports for one replicate.
pub type ClaimPair<F> = (ClaimReport<F>, ClaimReport<F>);

/// Lift and avoidance claims on `replicates` pairs over `K = Λ(⌈C n⌉)`.
/// Fails on the first certificate violation.
pub fn claim_replicates<F: Scalar>(cfg: &ChainConfig<F>, n: u32) -> Result<Vec<ClaimPair<F>>, EstimatorError> {
    cfg.mc.validate()?;
    let setup = cfg.setup(n)?;
    let k = cfg.mc.mask_box(n);
    run_replicates(&cfg.mc, n, |seed, r| {
        let pair = setup.pair(cfg.base.sample(k, cfg.mc.dist, seed)?)?;
        let c1 = verify_claim1(&pair, n, setup.m, Some(setup.crossing(cfg.crossing_ratio)))?;
        let c2 = verify_claim2(&pair, n, setup.m)?;
        for c in [&c1, &c2] {
            if !c.pass {
                return Err(EstimatorError::CertificateViolation {
                    observable: format!("{:?} claim", c.kind),
                    n,
                    replicate: r,
                    value: c.lhs.as_f64(),
                    bound: c.rhs.as_f64(),
                });
            }
        }
        Ok((c1, c2))
    })
}

/// One replicate of the final chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReplicate<F> {
    /// `γ(−n,n)(ω)` misses `Λ(m)`.
    pub avoid_lifted: bool,
    /// `γ(−n,n)(ω̃)` misses `Λ(m)`.
    pub avoid_base: bool,
    /// All three `ω`-geodesics stay in `K`.
    pub confined: bool,
    pub crossings_ok: bool,
    pub tau_sum: F,
    /// `G_n(ω)`.
    pub gap: F,
    pub gap_base: F,
    /// `T(0,n)(ω) − T(0,n)(ω̃)`.
    pub lift: F,
}

impl<F: Scalar> ChainReplicate<F> {
    /// Both geodesics avoid `Λ(m)`, confinement holds and `tau_sum > 0`.
    pub fn joint(&self) -> bool {
        self.avoid_lifted && self.avoid_base && self.confined && self.tau_sum > F::zero()
    }
}

/// Evaluate one pair; geodesics use the pair's whole region, confinement
/// is checked against `k`.
pub fn evaluate_chain<F: Scalar>(
    pair: &CoupledPair<F>,
    n: u32,
    k: &BoxSpec,
    crossing: CrossingSpec<F>,
) -> Result<ChainReplicate<F>, ClaimError> {
    let mask = RegionMask::new(pair.region());
    let lifted = ThreePoint::compute(&pair.lifted, n, mask)?;
    let base = ThreePoint::compute(&pair.base, n, mask)?;
    let inner = pair.field.support_box();
    let zero = pair.field.is_zero();
    let (tau_sum, crossings_ok) = if zero {
        (F::zero(), false)
    } else {
        let rep = annulus_sum_lower_bound(&lifted.right, pair, crossing)?;
        (rep.tau_sum, rep.crossings_ok)
    };
    Ok(ChainReplicate {
        avoid_lifted: zero || !geodesic_hits_box(&lifted.across, &inner),
        avoid_base: zero || !geodesic_hits_box(&base.across, &inner),
        confined: lifted.all_within(k),
        crossings_ok,
        tau_sum,
        gap: lifted.gap(),
        gap_base: base.gap(),
        lift: lifted.right.total_time() - base.right.total_time(),
    })
}

impl<F: Scalar> ChainReplicate<F> {
    /// Pathwise certificates: the lift bound always; on `A₁`, equality of
    /// the across times and `G_n(ω) ≥ δ · tau_sum`.
    fn certify(&self, delta: F, n: u32, replicate: usize, across: (F, F)) -> Result<(), EstimatorError> {
        let bound = (delta * self.tau_sum).as_f64();
        let fail = |observable: &str, value: f64, bound: f64| EstimatorError::CertificateViolation {
            observable: observable.into(),
            n,
            replicate,
            value,
            bound,
        };
        if self.lift.as_f64() < bound - PATHWISE_TOL {
            return Err(fail("lift bound", self.lift.as_f64(), bound));
        }
        if self.gap.as_f64() < -PATHWISE_TOL {
            return Err(fail("three-point gap", self.gap.as_f64(), 0.0));
        }
        if self.avoid_lifted && self.avoid_base {
            let diff = (across.0 - across.1).abs().as_f64();
            if diff > EQUALITY_TOL {
                return Err(fail("avoidance equality", diff, EQUALITY_TOL));
            }
            if self.gap.as_f64() < bound - PATHWISE_TOL {
                return Err(fail("chain", self.gap.as_f64(), bound));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSummary {
    pub n: u32,
    pub m: u32,
    pub scale: u32,
    pub delta: f64,
    pub good_measure: f64,
    pub analytic_floor: f64,
    /// Frequencies `avoid_lifted`, `avoid_base`, `confined`, `crossings_ok`,
    /// `tau_positive`, `joint_event`, then `conditional_gap` and
    /// `conditional_tau_sum` over joint replicates.
    pub records: Vec<EstimateRecord>,
    pub joint_count: usize,
}

impl ChainSummary {
    pub fn record(&self, observable: &str) -> Option<&EstimateRecord> {
        self.records.iter().find(|r| r.observable == observable)
    }
}

/// The final inequality chain per `n`: coupled pairs on `Λ(⌈C' n⌉)`, event
/// frequencies, and certificates on every replicate.
pub fn run_goal_chain<F: Scalar>(cfg: &ChainConfig<F>) -> Result<Vec<ChainSummary>, EstimatorError> {
    cfg.mc.validate()?;
    if !(cfg.detect_factor > cfg.mc.mask_factor) {
        return Err(EstimatorError::InvalidConfig("detection factor must exceed the mask factor".into()));
    }
    let mut out = Vec::new();
    for &n in &cfg.mc.n_values {
        if n == 0 {
            return Err(EstimatorError::InvalidConfig("goal chain needs n >= 1".into()));
        }
        let setup = cfg.setup(n)?;
        let k = cfg.mc.mask_box(n);
        let big = scaled_box(n, cfg.detect_factor);
        let crossing = setup.crossing(cfg.crossing_ratio);
        let reps = run_replicates(&cfg.mc, n, |seed, r| {
            let pair = setup.pair(cfg.base.sample(big, cfg.mc.dist, seed)?)?;
            let rep = evaluate_chain(&pair, n, &k, crossing)?;
            let mask = RegionMask::new(big);
            let a = Vertex::new(-(n as i32), 0);
            let b = Vertex::new(n as i32, 0);
            if rep.avoid_lifted && rep.avoid_base {
                let tl = ShortestPaths::run(&pair.lifted, a, mask, &[b])?.time(b).expect("settled");
                let tb = ShortestPaths::run(&pair.base, a, mask, &[b])?.time(b).expect("settled");
                rep.certify(setup.good.delta, n, r, (tl, tb))?;
            } else {
                rep.certify(setup.good.delta, n, r, (F::zero(), F::zero()))?;
            }
            Ok(rep)
        })?;
        out.push(summarize(cfg, &setup, &reps));
    }
    Ok(out)
}

fn summarize<F: Scalar>(cfg: &ChainConfig<F>, setup: &ChainSetup<F>, reps: &[ChainReplicate<F>]) -> ChainSummary {
    let n = setup.n;
    let seed = cfg.mc.master_seed;
    let freq = |name: &str, f: &dyn Fn(&ChainReplicate<F>) -> bool| {
        let xs: Vec<f64> = reps.iter().map(|r| indicator(f(r))).collect();
        EstimateRecord::from_samples(name, n, &xs, seed)
    };
    let mut records = vec![
        freq("avoid_lifted", &|r| r.avoid_lifted),
        freq("avoid_base", &|r| r.avoid_base),
        freq("confined", &|r| r.confined),
        freq("crossings_ok", &|r| r.crossings_ok),
        freq("tau_positive", &|r| r.tau_sum > F::zero()),
        freq("joint_event", &|r| r.joint()),
    ];
    let joint: Vec<&ChainReplicate<F>> = reps.iter().filter(|r| r.joint()).collect();
    let gaps: Vec<f64> = joint.iter().map(|r| r.gap.as_f64()).collect();
    let taus: Vec<f64> = joint.iter().map(|r| r.tau_sum.as_f64()).collect();
    records.push(EstimateRecord::from_samples("conditional_gap", n, &gaps, seed));
    records.push(EstimateRecord::from_samples("conditional_tau_sum", n, &taus, seed));
    let floor = if setup.field.is_zero() {
        0.0
    } else {
        analytic_floor(cfg.crossing_ratio, cfg.kappa, setup.scale, setup.m).as_f64()
    };
    ChainSummary {
        n,
        m: setup.m,
        scale: setup.scale,
        delta: setup.good.delta.as_f64(),
        good_measure: setup.good.measure.as_f64(),
        analytic_floor: floor,
        records,
        joint_count: joint.len(),
    }
}
