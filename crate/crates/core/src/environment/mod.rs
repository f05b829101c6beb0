//! Edge-weight environments and the weight transform acting on them.

mod distribution;
mod tau;
mod transform;

pub use distribution::WeightDistribution;
pub use tau::{build_tau_field, tau_norm_sq, tau_value, TauField};
pub use transform::{
    apply_transform, build_good_set, measure_inequality_certificate, random_certificate_trials, CertificateTrial,
    Direction, GoodSet, IntervalSet, MeasureCertificate, ScanGrid, ShiftScan, WeightTransform,
};

use thiserror::Error;

use crate::lattice::{Axis, BoxSpec, EdgeId, Vertex};
use crate::numerics::QuadratureError;
use crate::rng::EdgeStream;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvironmentError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("region radius must be at least 1, got {0}")]
    RegionTooSmall(u32),
    #[error("weight {0} lies outside the support of the distribution")]
    OutsideSupport(f64),
    #[error("shift amplitude {0} outside [0, 1]")]
    SigmaOutOfRange(f64),
    #[error("inner radius must be at least 2, got {0}")]
    InnerRadiusTooSmall(u32),
    #[error("kappa must lie in (0, 1/2), got {0}")]
    KappaOutOfRange(f64),
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("no weight satisfies the shift bound for delta = {0}")]
    EmptyGoodSet(f64),
    #[error("tau field support is not contained in the environment region")]
    FieldOutsideRegion,
    #[error("transform distribution {transform} differs from environment distribution {environment}")]
    DistributionMismatch { transform: String, environment: String },
    #[error("set {0} has zero measure")]
    NullSet(usize),
    #[error("dimension mismatch: {0} amplitudes for {1} sets")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Immutable edge-weight configuration `ω` on a box.
///
/// Weights are stored densely, two slots per vertex (horizontal then
/// vertical edge based there); slots of edges leaving the box hold `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment<F> {
    region: BoxSpec,
    dist: WeightDistribution<F>,
    seed: u64,
    weights: Vec<F>,
}

impl<F: Scalar> Environment<F> {
    /// i.i.d. weights by inverse-transform sampling from keyed per-edge streams.
    pub fn sample(region: BoxSpec, dist: WeightDistribution<F>, seed: u64) -> Result<Self, EnvironmentError> {
        if region.radius < 1 {
            return Err(EnvironmentError::RegionTooSmall(region.radius));
        }
        let side = region.side();
        let corner = region.min_corner();
        let mut weights = vec![F::infinity(); 2 * side * side];
        let mut stream = EdgeStream::new(seed);
        for col in 0..side {
            let x = corner.x + col as i32;
            let row = &mut weights[2 * col * side..2 * (col + 1) * side];
            stream.column(x, corner.y, side, |j, uh, uv| {
                if col + 1 < side {
                    row[2 * j] = dist.quantile(F::lit(uh));
                }
                if j + 1 < side {
                    row[2 * j + 1] = dist.quantile(F::lit(uv));
                }
            });
        }
        Ok(Self { region, dist, seed, weights })
    }

    /// Build from explicit per-edge weights; edges not produced by `weight`
    /// must not exist in the region.
    pub fn from_fn(
        region: BoxSpec,
        dist: WeightDistribution<F>,
        seed: u64,
        mut weight: impl FnMut(EdgeId) -> F,
    ) -> Result<Self, EnvironmentError> {
        if region.radius < 1 {
            return Err(EnvironmentError::RegionTooSmall(region.radius));
        }
        let side = region.side();
        let mut weights = vec![F::infinity(); 2 * side * side];
        for e in crate::lattice::edges_of_box(&region) {
            let w = weight(e);
            if !dist.in_support(w) {
                return Err(EnvironmentError::OutsideSupport(w.as_f64()));
            }
            weights[slot(&region, e)] = w;
        }
        Ok(Self { region, dist, seed, weights })
    }

    pub fn region(&self) -> BoxSpec {
        self.region
    }

    pub fn dist(&self) -> &WeightDistribution<F> {
        &self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weight(&self, e: EdgeId) -> Option<F> {
        if self.region.contains_edge(e) {
            Some(self.weights[slot(&self.region, e)])
        } else {
            None
        }
    }

    /// Weight of the edge between two adjacent vertices.
    pub fn weight_between(&self, a: Vertex, b: Vertex) -> Option<F> {
        EdgeId::between(a, b).ok().and_then(|e| self.weight(e))
    }

    /// Weight at a dense slot; see [`Environment::slot_of`].
    #[inline]
    pub(crate) fn weight_at_slot(&self, slot: usize) -> F {
        self.weights[slot]
    }

    #[inline]
    pub(crate) fn slot_of(&self, e: EdgeId) -> usize {
        slot(&self.region, e)
    }

    /// Edges and weights in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, F)> + '_ {
        let side = self.region.side();
        self.weights.iter().enumerate().filter_map(move |(s, &w)| {
            if !w.is_finite() {
                return None;
            }
            let v = self.region.vertex_at(s / 2);
            let axis = if s % 2 == 0 { Axis::Horizontal } else { Axis::Vertical };
            debug_assert!(s / 2 < side * side);
            Some((EdgeId::new(v, axis), w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.region.edge_count()
    }

    /// New environment with `f(edge, weight)` applied to every edge.
    pub fn map_weights(&self, mut f: impl FnMut(EdgeId, F) -> F) -> Self {
        let mut out = self.clone();
        let side = self.region.side();
        for (s, w) in out.weights.iter_mut().enumerate() {
            if w.is_finite() {
                let v = self.region.vertex_at(s / 2);
                let axis = if s % 2 == 0 { Axis::Horizontal } else { Axis::Vertical };
                debug_assert!(s / 2 < side * side);
                *w = f(EdgeId::new(v, axis), *w);
            }
        }
        out
    }

    /// Replace the weights on a subset of edges.
    pub(crate) fn with_overrides(&self, overrides: impl IntoIterator<Item = (EdgeId, F)>) -> Self {
        let mut out = self.clone();
        for (e, w) in overrides {
            let s = slot(&self.region, e);
            out.weights[s] = w;
        }
        out
    }
}

#[inline]
fn slot(region: &BoxSpec, e: EdgeId) -> usize {
    let axis = match e.axis {
        Axis::Horizontal => 0,
        Axis::Vertical => 1,
    };
    2 * region.vertex_index_unchecked(e.base) + axis
}

/// Convenience wrapper matching the free-function style of the other modules.
pub fn sample_environment<F: Scalar>(
    region: BoxSpec,
    dist: WeightDistribution<F>,
    seed: u64,
) -> Result<Environment<F>, EnvironmentError> {
    Environment::sample(region, dist, seed)
}
