//! The coordinatewise increasing bijection `g_σ` and everything built on it.
//!
//! `g_σ(w) = Q(Φ(Φ⁻¹(F(w)) + cσ))`: move `w` to Gaussian coordinates, shift by
//! `cσ`, and map back. With `c = 1` a Gaussian shift by `h` changes the
//! measure of any set by at most the factor `e^{−|h|²}·(·)²`, which is the
//! bound certified by [`measure_inequality_certificate`].

use super::{Environment, EnvironmentError, TauField, WeightDistribution};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::numerics::{normal_cdf, normal_pdf, normal_quantile};
use crate::rng::open_unit;
use crate::scalar::{pairwise_sum, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightTransform<F> {
    dist: WeightDistribution<F>,
    coupling: F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl<F: Scalar> WeightTransform<F> {
    pub fn new(dist: WeightDistribution<F>) -> Self {
        Self { dist, coupling: F::one() }
    }

    pub fn with_coupling(dist: WeightDistribution<F>, coupling: F) -> Result<Self, EnvironmentError> {
        if !(coupling > F::zero() && coupling.is_finite()) {
            return Err(EnvironmentError::InvalidDistribution(format!(
                "coupling constant must be positive, got {coupling}"
            )));
        }
        Ok(Self { dist, coupling })
    }

    pub fn dist(&self) -> &WeightDistribution<F> {
        &self.dist
    }

    pub fn coupling(&self) -> F {
        self.coupling
    }

    /// `Φ⁻¹(F(w))`, using the survival function above the median.
    fn gauss_of(&self, w: F) -> F {
        let u = self.dist.cdf(w);
        if u <= F::lit(0.5) {
            normal_quantile(u)
        } else {
            -normal_quantile(self.dist.sf(w))
        }
    }

    fn weight_of_gauss(&self, z: F) -> F {
        if z <= F::zero() {
            self.dist.quantile(normal_cdf(z))
        } else {
            self.dist.quantile_upper(normal_cdf(-z))
        }
    }

    fn check(&self, sigma: F, w: F) -> Result<(), EnvironmentError> {
        if !self.dist.in_support(w) {
            return Err(EnvironmentError::OutsideSupport(w.as_f64()));
        }
        if !(sigma >= F::zero() && sigma <= F::one()) {
            return Err(EnvironmentError::SigmaOutOfRange(sigma.as_f64()));
        }
        Ok(())
    }

    /// `g_σ(w)`; never below `w`, and exactly `w` when `σ = 0`.
    pub fn g_sigma(&self, sigma: F, w: F) -> Result<F, EnvironmentError> {
        self.check(sigma, w)?;
        Ok(self.forward_unchecked(sigma, w))
    }

    /// `g_σ⁻¹(w)`; never above `w`, and exactly `w` when `σ = 0`.
    pub fn g_sigma_inverse(&self, sigma: F, w: F) -> Result<F, EnvironmentError> {
        self.check(sigma, w)?;
        Ok(self.inverse_unchecked(sigma, w))
    }

    #[inline]
    fn forward_unchecked(&self, sigma: F, w: F) -> F {
        if sigma == F::zero() {
            return w;
        }
        let z = self.gauss_of(w);
        if !z.is_finite() {
            return w;
        }
        self.weight_of_gauss(z + self.coupling * sigma).max(w)
    }

    #[inline]
    fn inverse_unchecked(&self, sigma: F, w: F) -> F {
        if sigma == F::zero() {
            return w;
        }
        let z = self.gauss_of(w);
        if !z.is_finite() {
            return w;
        }
        self.weight_of_gauss(z - self.coupling * sigma).min(w)
    }

    /// `lim_{σ→0⁺} (g_σ(w) − w)/σ = c φ(z) / f(w)` with `z = Φ⁻¹(F(w))`.
    pub fn shift_rate_at_zero(&self, w: F) -> F {
        let z = self.gauss_of(w);
        let f = self.dist.density(w);
        if !z.is_finite() {
            return F::zero();
        }
        if f <= F::zero() {
            return F::infinity();
        }
        self.coupling * normal_pdf(z) / f
    }
}

/// Sorted, disjoint closed intervals in weight space.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IntervalSet<F> {
    intervals: Vec<(F, F)>,
}

impl<F: Scalar> IntervalSet<F> {
    /// Intervals are sorted and overlapping ones merged.
    pub fn new(mut intervals: Vec<(F, F)>) -> Self {
        intervals.retain(|&(a, b)| a <= b);
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite endpoints"));
        let mut merged: Vec<(F, F)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { intervals: merged }
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn intervals(&self) -> &[(F, F)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, w: F) -> bool {
        let idx = self.intervals.partition_point(|&(a, _)| a <= w);
        idx > 0 && w <= self.intervals[idx - 1].1
    }

    pub fn measure(&self, dist: &WeightDistribution<F>) -> F {
        let parts: Vec<F> = self.intervals.iter().map(|&(a, b)| dist.measure(a, b)).collect();
        pairwise_sum(&parts)
    }

    pub fn measure_by_quadrature(&self, dist: &WeightDistribution<F>) -> Result<F, EnvironmentError> {
        let mut parts = Vec::with_capacity(self.intervals.len());
        for &(a, b) in &self.intervals {
            parts.push(dist.measure_by_quadrature(a, b)?);
        }
        Ok(pairwise_sum(&parts))
    }

    /// Image under the increasing map `g_σ`.
    pub fn image(&self, t: &WeightTransform<F>, sigma: F) -> Result<Self, EnvironmentError> {
        let mut out = Vec::with_capacity(self.intervals.len());
        for &(a, b) in &self.intervals {
            out.push((t.g_sigma(sigma, a)?, t.g_sigma(sigma, b)?));
        }
        Ok(Self::new(out))
    }
}

/// `B_δ`: weights whose upward shift under `g_σ` is at least `δσ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodSet<F> {
    pub delta: F,
    pub set: IntervalSet<F>,
    /// `ν(B_δ)`.
    pub measure: F,
}

impl<F: Scalar> GoodSet<F> {
    #[inline]
    pub fn contains(&self, w: F) -> bool {
        self.set.contains(w)
    }

    /// A set not tied to a shift bound, e.g. `B` in the positive-ratio lemma.
    pub fn from_intervals(dist: &WeightDistribution<F>, intervals: Vec<(F, F)>) -> Self {
        let set = IntervalSet::new(intervals);
        let measure = set.measure(dist);
        Self { delta: F::zero(), set, measure }
    }

    /// The lower tail `[lo, Q(p)]` with measure `p`.
    pub fn lower_tail(dist: &WeightDistribution<F>, p: F) -> Self {
        let (lo, _) = dist.support();
        Self::from_intervals(dist, vec![(lo, dist.quantile(p))])
    }
}

/// Resolution of the `(w, σ)` scan behind [`build_good_set`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanGrid {
    pub w_points: usize,
    pub sigma_points: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { w_points: 2048, sigma_points: 64 }
    }
}

/// Worst-case normalized shift `min_σ (g_σ(w) − w)/σ` on a quantile-spaced
/// weight grid. The minimum runs over `σ = j / sigma_points` and the
/// `σ → 0⁺` limit.
#[derive(Clone, Debug)]
pub struct ShiftScan<F> {
    transform: WeightTransform<F>,
    grid: ScanGrid,
    weights: Vec<F>,
    scores: Vec<F>,
}

impl<F: Scalar> ShiftScan<F> {
    pub fn new(transform: WeightTransform<F>, grid: ScanGrid) -> Self {
        let n = grid.w_points.max(3);
        let dist = *transform.dist();
        let weights: Vec<F> = (0..n).map(|i| dist.quantile(F::lit((i as f64 + 0.5) / n as f64))).collect();
        let scores = weights
            .iter()
            .map(|&w| {
                let limit = transform.shift_rate_at_zero(w);
                (1..=grid.sigma_points)
                    .map(|j| {
                        let sigma = F::lit(j as f64 / grid.sigma_points as f64);
                        (transform.forward_unchecked(sigma, w) - w) / sigma
                    })
                    .fold(limit, F::min)
            })
            .collect();
        Self { transform, grid, weights, scores }
    }

    pub fn grid(&self) -> ScanGrid {
        self.grid
    }

    pub fn max_score(&self) -> F {
        self.scores.iter().copied().fold(F::zero(), F::max)
    }

    /// Runs of grid points meeting the bound, shrunk by one cell on each side.
    pub fn good_set(&self, delta: F) -> Result<GoodSet<F>, EnvironmentError> {
        if !(delta > F::zero()) {
            return Err(EnvironmentError::NonPositiveDelta(delta.as_f64()));
        }
        let mut intervals = Vec::new();
        let mut i = 0;
        let n = self.weights.len();
        while i < n {
            if self.scores[i] < delta {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && self.scores[i] >= delta {
                i += 1;
            }
            let end = i - 1;
            if end >= start + 2 {
                intervals.push((self.weights[start + 1], self.weights[end - 1]));
            }
        }
        if intervals.is_empty() {
            return Err(EnvironmentError::EmptyGoodSet(delta.as_f64()));
        }
        let set = IntervalSet::new(intervals);
        let measure = set.measure(self.transform.dist());
        Ok(GoodSet { delta, set, measure })
    }

    /// Largest `δ` on the grid `j · max_score / steps` with `ν(B_δ) > 1/2`.
    pub fn default_delta(&self, steps: usize) -> Option<F> {
        let top = self.max_score();
        (1..=steps)
            .rev()
            .map(|j| top * F::lit(j as f64 / steps as f64))
            .find(|&d| self.good_set(d).map(|g| g.measure > F::lit(0.5)).unwrap_or(false))
    }
}

/// `B_δ` on the default 2048 × 64 scan grid.
pub fn build_good_set<F: Scalar>(t: &WeightTransform<F>, delta: F) -> Result<GoodSet<F>, EnvironmentError> {
    ShiftScan::new(*t, ScanGrid::default()).good_set(delta)
}

/// Apply `T_τ` (or its inverse) edge by edge. Edges with `τ_e = 0` are copied.
pub fn apply_transform<F: Scalar>(
    env: &Environment<F>,
    field: &TauField<F>,
    t: &WeightTransform<F>,
    direction: Direction,
) -> Result<Environment<F>, EnvironmentError> {
    if env.dist() != t.dist() {
        return Err(EnvironmentError::DistributionMismatch {
            transform: t.dist().to_string(),
            environment: env.dist().to_string(),
        });
    }
    if field.is_zero() {
        return Ok(env.clone());
    }
    if !env.region().contains_box(&field.support_box()) {
        return Err(EnvironmentError::FieldOutsideRegion);
    }
    let mut updates = Vec::new();
    for (e, sigma) in field.support_edges() {
        let w = env.weight_at_slot(env.slot_of(e));
        let moved = match direction {
            Direction::Forward => t.g_sigma(sigma, w)?,
            Direction::Inverse => t.g_sigma_inverse(sigma, w)?,
        };
        updates.push((e, moved));
    }
    Ok(env.with_overrides(updates))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureCertificate<F> {
    /// `ν^n(T_τ(A))`.
    pub lhs: F,
    /// `e^{−‖τ‖²} ν^n(A)²`.
    pub rhs: F,
    pub norm_sq: F,
    pub pass: bool,
}

impl<F: Scalar> MeasureCertificate<F> {
    pub fn slack(&self) -> F {
        self.lhs - self.rhs
    }
}

const CERTIFICATE_TOL: f64 = 1e-8;

/// Check `ν^n(T_τ(A)) ≥ e^{−‖τ‖²} ν^n(A)²` for a product of interval unions,
/// each factor measured by quadrature.
pub fn measure_inequality_certificate<F: Scalar>(
    t: &WeightTransform<F>,
    tau: &[F],
    sets: &[IntervalSet<F>],
) -> Result<MeasureCertificate<F>, EnvironmentError> {
    if tau.len() != sets.len() {
        return Err(EnvironmentError::DimensionMismatch(tau.len(), sets.len()));
    }
    let mut lhs = F::one();
    let mut base = F::one();
    for (i, (&sigma, set)) in tau.iter().zip(sets).enumerate() {
        let m = set.measure_by_quadrature(t.dist())?;
        if !(m > F::zero()) {
            return Err(EnvironmentError::NullSet(i));
        }
        base = base * m;
        lhs = lhs * set.image(t, sigma)?.measure_by_quadrature(t.dist())?;
    }
    let norm_sq: F = tau.iter().map(|&s| s * s).sum();
    let rhs = (-norm_sq).exp() * base * base;
    Ok(MeasureCertificate { lhs, rhs, norm_sq, pass: lhs >= rhs - F::lit(CERTIFICATE_TOL) })
}

/// One randomized instance of the measure inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateTrial<F> {
    pub tau: Vec<F>,
    pub sets: Vec<IntervalSet<F>>,
    pub certificate: MeasureCertificate<F>,
}

/// `trials` random product sets of dimension 1 to `max_dim`, each factor a
/// union of one or two intervals placed by quantile, with `τ_i` uniform on
/// `[0, 1]`.
pub fn random_certificate_trials<F: Scalar>(
    t: &WeightTransform<F>,
    trials: usize,
    max_dim: usize,
    seed: u64,
) -> Result<Vec<CertificateTrial<F>>, EnvironmentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || open_unit(rng.next_u64());
    let dist = *t.dist();
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let dim = 1 + (unit() * max_dim.max(1) as f64) as usize;
        let mut tau = Vec::with_capacity(dim);
        let mut sets = Vec::with_capacity(dim);
        for _ in 0..dim {
            tau.push(F::lit(unit()));
            let pieces = 1 + usize::from(unit() < 0.5);
            let mut cuts: Vec<f64> = (0..2 * pieces).map(|_| unit()).collect();
            cuts.sort_by(f64::total_cmp);
            let intervals =
                cuts.chunks(2).map(|c| (dist.quantile(F::lit(c[0])), dist.quantile(F::lit(c[1])))).collect();
            sets.push(IntervalSet::new(intervals));
        }
        let certificate = measure_inequality_certificate(t, &tau, &sets)?;
        out.push(CertificateTrial { tau, sets, certificate });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_tau_field, sample_environment};
    use crate::lattice::{BoxSpec, Vertex};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unif01() -> WeightDistribution<f64> {
        WeightDistribution::uniform(0.0, 1.0).unwrap()
    }

    fn unif() -> WeightDistribution<f64> {
        WeightDistribution::uniform(1.0, 1.5).unwrap()
    }

    fn laws() -> Vec<WeightDistribution<f64>> {
        vec![
            unif(),
            unif01(),
            WeightDistribution::shifted_exponential(0.5, 2.0).unwrap(),
            WeightDistribution::triangular(1.0, 1.2, 2.0).unwrap(),
        ]
    }

    #[test]
    fn g_zero_is_identity() {
        for d in laws() {
            let t = WeightTransform::new(d);
            for i in 0..100 {
                let w = d.quantile((i as f64 + 0.5) / 100.0);
                assert_eq!(t.g_sigma(0.0, w).unwrap().to_bits(), w.to_bits());
            }
        }
    }

    #[test]
    fn g_on_uniform_is_normal_cdf_shift() {
        let t = WeightTransform::new(unif01());
        assert_relative_eq!(t.g_sigma(1.0, 0.5).unwrap(), 0.841_344_746_068_542_9, epsilon = 1e-14);
        let top = t.g_sigma(1.0, 0.9999).unwrap();
        assert!(top < 1.0 && top > 0.9999);
        assert!(t.g_sigma(1.0, 1.5).is_err());
        assert!(t.g_sigma(1.5, 0.5).is_err());
    }

    #[test]
    fn inverse_undoes_forward() {
        for d in laws() {
            let t = WeightTransform::new(d);
            for i in 0..400 {
                let w = d.quantile((i as f64 + 0.5) / 400.0);
                for &s in &[0.01, 0.3, 0.62, 1.0] {
                    let up = t.g_sigma(s, w).unwrap();
                    let back = t.g_sigma_inverse(s, up).unwrap();
                    assert!((back - w).abs() <= 1e-10, "{d} w={w} s={s} back={back}");
                }
            }
        }
    }

    #[test]
    fn median_weight_strictly_increases() {
        let t = WeightTransform::new(unif());
        let median = unif().quantile(0.5);
        let up = t.g_sigma(0.5, median).unwrap();
        // Q(Φ(0.5)) − Q(0.5) = 0.5 (Φ(0.5) − 0.5)
        assert_relative_eq!(up - median, 0.5 * (0.691_462_461_274_013_1 - 0.5), epsilon = 1e-13);
    }

    #[test]
    fn good_set_shift_property_and_measure() {
        let t = WeightTransform::new(unif());
        let scan = ShiftScan::new(t, ScanGrid::default());
        let delta = scan.default_delta(256).unwrap();
        let good = scan.good_set(delta).unwrap();
        assert!(good.measure > 0.5);
        assert_relative_eq!(good.set.measure_by_quadrature(&unif()).unwrap(), good.measure, epsilon = 1e-11);
        for &(a, b) in good.set.intervals() {
            for i in 0..=400 {
                let w = a + (b - a) * i as f64 / 400.0;
                for j in 1..=64 {
                    let s = j as f64 / 64.0;
                    assert!(t.g_sigma(s, w).unwrap() - w >= delta * s, "w={w} s={s}");
                }
            }
        }
        assert!(matches!(build_good_set(&t, 10.0), Err(EnvironmentError::EmptyGoodSet(_))));
        assert!(build_good_set(&t, 0.0).is_err());
    }

    #[test]
    fn good_set_measure_tends_to_one() {
        for d in laws() {
            let t = WeightTransform::new(d);
            let scan = ShiftScan::new(t, ScanGrid::default());
            let mut prev = 0.0;
            for &delta in &[0.2, 0.1, 0.05, 0.01, 1e-3, 1e-5, 1e-9] {
                let m = scan.good_set(delta).map(|g| g.measure).unwrap_or(0.0);
                assert!(m >= prev, "{d}: not monotone at {delta}");
                prev = m;
            }
            // One grid cell of margin at each end of [Q(0.5/N), Q(1 − 0.5/N)].
            assert!(prev >= 1.0 - 3.0 / 2048.0 - 1e-12, "{d}: {prev}");
        }
    }

    #[test]
    fn transform_environment_roundtrip() {
        let env = sample_environment(BoxSpec::centered(8), unif(), 3).unwrap();
        let t = WeightTransform::new(unif());
        let field = build_tau_field(5, 0.1, Vertex::ORIGIN).unwrap();
        let up = apply_transform(&env, &field, &t, Direction::Forward).unwrap();
        let back = apply_transform(&up, &field, &t, Direction::Inverse).unwrap();
        for ((e, w0), ((_, w1), (_, w2))) in env.iter().zip(up.iter().zip(back.iter())) {
            assert!(w1 >= w0);
            assert!((w2 - w0).abs() <= 1e-10);
            if field.value(e) == 0.0 {
                assert_eq!(w1.to_bits(), w0.to_bits());
                assert_eq!(w2.to_bits(), w0.to_bits());
            }
        }
        let zero = TauField::zero(Vertex::ORIGIN);
        assert_eq!(apply_transform(&env, &zero, &t, Direction::Forward).unwrap(), env);
        let too_big = build_tau_field(9, 0.1, Vertex::ORIGIN).unwrap();
        assert!(apply_transform(&env, &too_big, &t, Direction::Forward).is_err());
        let other = WeightTransform::new(unif01());
        assert!(apply_transform(&env, &field, &other, Direction::Forward).is_err());
    }

    #[test]
    fn certificate_examples() {
        let t = WeightTransform::new(unif01());
        let half = IntervalSet::new(vec![(0.0, 0.5)]);
        let c = measure_inequality_certificate(&t, &[1.0], std::slice::from_ref(&half)).unwrap();
        assert_relative_eq!(c.lhs, 0.841_344_746_068_542_9, epsilon = 1e-10);
        assert_relative_eq!(c.rhs, (-1.0f64).exp() * 0.25, epsilon = 1e-12);
        assert!(c.pass);
        let c = measure_inequality_certificate(&t, &[0.0, 0.0], &[half.clone(), half.clone()]).unwrap();
        assert_relative_eq!(c.lhs, 0.25, epsilon = 1e-12);
        assert!(c.pass && c.lhs >= c.rhs);
        // Independent oracle: per coordinate, Φ(Φ⁻¹(0.5) + 0.5) = Φ(0.5).
        let c = measure_inequality_certificate(&t, &[0.5, 0.5], &[half.clone(), half.clone()]).unwrap();
        assert_relative_eq!(c.lhs, 0.691_462_461_274_013_1f64.powi(2), epsilon = 1e-10);
        assert_relative_eq!(c.rhs, (-0.5f64).exp() * 0.0625, epsilon = 1e-12);
        assert!(c.pass);
        assert!(measure_inequality_certificate(&t, &[0.5], &[IntervalSet::new(vec![(2.0, 3.0)])]).is_err());
        assert!(measure_inequality_certificate(&t, &[0.5, 0.1], &[half]).is_err());
    }

    #[test]
    fn interval_set_ops() {
        let s = IntervalSet::new(vec![(3.0, 4.0), (1.0, 2.0), (1.5, 2.5)]);
        assert_eq!(s.intervals(), &[(1.0, 2.5), (3.0, 4.0)]);
        assert!(s.contains(1.0) && s.contains(2.5) && s.contains(3.5));
        assert!(!s.contains(2.7) && !s.contains(0.5) && !s.contains(4.1));
        assert!(IntervalSet::<f64>::empty().is_empty());
    }

    proptest! {
        #[test]
        fn g_monotone_in_both_arguments(
            u1 in 0.0005f64..0.9995, du in 1e-4f64..0.5,
            s1 in 0.0f64..1.0, ds in 1e-4f64..1.0, which in 0usize..4,
        ) {
            let d = laws()[which];
            let t = WeightTransform::new(d);
            let u2 = (u1 + du).min(0.9999);
            let s2 = (s1 + ds).min(1.0);
            let (w1, w2) = (d.quantile(u1), d.quantile(u2));
            prop_assume!(w2 > w1);
            prop_assert!(t.g_sigma(s1, w1).unwrap() < t.g_sigma(s1, w2).unwrap());
            prop_assert!(t.g_sigma(s1, w1).unwrap() <= t.g_sigma(s2, w1).unwrap());
            prop_assert!(t.g_sigma(s2, w1).unwrap() >= w1);
            prop_assert!(d.in_support(t.g_sigma(s2, w1).unwrap()));
        }

        #[test]
        fn f32_transform_tracks_f64(u in 0.01f64..0.99, s in 0.0f64..1.0) {
            let d = unif();
            let t64 = WeightTransform::new(d);
            let t32 = WeightTransform::new(d.cast::<f32>());
            let w = d.quantile(u);
            let a = t64.g_sigma(s, w).unwrap();
            let b = t32.g_sigma(s as f32, w as f32).unwrap();
            prop_assert!((a - b as f64).abs() < 1e-5);
        }
    }

    #[test]
    fn random_trials_all_pass() {
        for d in laws() {
            let t = WeightTransform::new(d);
            let trials = random_certificate_trials(&t, 25, 5, 3).unwrap();
            assert_eq!(trials.len(), 25);
            for tr in &trials {
                assert!(tr.tau.len() <= 5 && tr.tau.len() == tr.sets.len());
                assert!(tr.certificate.pass, "{:?}", tr.certificate);
            }
        }
    }
}
