use super::EnvironmentError;
use crate::lattice::{annulus_edge_count, annulus_of_edge, edges_of_box, BoxSpec, EdgeId, Vertex};
use crate::scalar::{pairwise_sum, Scalar};

/// Shift amplitude of annulus `k`: `1 / (k · log(k)^{1/2 + κ})`.
pub fn tau_value<F: Scalar>(k: u32, kappa: F) -> F {
    let k = F::lit(k as f64);
    (k * k.ln().powf(F::lit(0.5) + kappa)).recip()
}

/// Per-edge amplitudes `τ_e`, constant on each annulus `2 ≤ k ≤ m` and zero
/// elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct TauField<F> {
    center: Vertex,
    inner_radius: u32,
    kappa: F,
    /// Indexed by annulus; entries 0 and 1 are zero.
    per_annulus: Vec<F>,
}

pub fn build_tau_field<F: Scalar>(m: u32, kappa: F, center: Vertex) -> Result<TauField<F>, EnvironmentError> {
    if m < 2 {
        return Err(EnvironmentError::InnerRadiusTooSmall(m));
    }
    if !(kappa > F::zero() && kappa < F::lit(0.5)) {
        return Err(EnvironmentError::KappaOutOfRange(kappa.as_f64()));
    }
    let per_annulus = (0..=m).map(|k| if k < 2 { F::zero() } else { tau_value(k, kappa) }).collect();
    Ok(TauField { center, inner_radius: m, kappa, per_annulus })
}

impl<F: Scalar> TauField<F> {
    /// A field that is identically zero; the transform it induces is the identity.
    pub fn zero(center: Vertex) -> Self {
        TauField { center, inner_radius: 0, kappa: F::lit(0.25), per_annulus: vec![F::zero()] }
    }

    pub fn center(&self) -> Vertex {
        self.center
    }

    pub fn inner_radius(&self) -> u32 {
        self.inner_radius
    }

    pub fn kappa(&self) -> F {
        self.kappa
    }

    pub fn is_zero(&self) -> bool {
        self.inner_radius < 2
    }

    /// The box containing every edge with nonzero amplitude.
    pub fn support_box(&self) -> BoxSpec {
        BoxSpec::new(self.inner_radius, self.center)
    }

    pub fn annulus_value(&self, k: u32) -> F {
        self.per_annulus.get(k as usize).copied().unwrap_or_else(F::zero)
    }

    pub fn value(&self, e: EdgeId) -> F {
        self.annulus_value(annulus_of_edge(e, self.center))
    }

    /// Edges with nonzero amplitude, in canonical order.
    pub fn support_edges(&self) -> Vec<(EdgeId, F)> {
        if self.is_zero() {
            return Vec::new();
        }
        edges_of_box(&self.support_box())
            .into_iter()
            .map(|e| (e, self.value(e)))
            .filter(|&(_, t)| t > F::zero())
            .collect()
    }

    /// `‖τ‖² = Σ_e τ_e²`, summed annulus by annulus with exact edge counts.
    pub fn norm_sq(&self) -> F {
        let terms: Vec<F> = (2..=self.inner_radius)
            .map(|k| F::lit(annulus_edge_count(k) as f64) * self.annulus_value(k).powi(2))
            .collect();
        pairwise_sum(&terms)
    }
}

pub fn tau_norm_sq<F: Scalar>(field: &TauField<F>) -> F {
    field.norm_sq()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn tau_values_match_direct_evaluation() {
        // 0.5 · ln(2)^(−0.6) and 0.1 · ln(10)^(−0.6), evaluated independently.
        let t2: f64 = tau_value(2, 0.1);
        assert_relative_eq!(t2, 0.5 * std::f64::consts::LN_2.powf(-0.6), max_relative = 1e-15);
        assert_relative_eq!(t2, 0.622_980_894_118_839_5, max_relative = 1e-14);
        let t10: f64 = tau_value(10, 0.1);
        assert_relative_eq!(t10, 0.060_627_629_337_905_01, max_relative = 1e-14);
    }

    #[test]
    fn field_definition() {
        let f = build_tau_field(5, 0.1f64, Vertex::ORIGIN).unwrap();
        let e1 = EdgeId::new(Vertex::ORIGIN, crate::lattice::Axis::Horizontal);
        assert_eq!(f.value(e1), 0.0);
        let e2 = EdgeId::new(Vertex::new(1, 1), crate::lattice::Axis::Horizontal);
        assert_eq!(annulus_of_edge(e2, Vertex::ORIGIN), 2);
        assert_eq!(f.value(e2), tau_value(2, 0.1));
        let outside = EdgeId::new(Vertex::new(5, 0), crate::lattice::Axis::Horizontal);
        assert_eq!(f.value(outside), 0.0);
        for (_, t) in f.support_edges() {
            assert!(t > 0.0 && t <= 1.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_tau_field(1, 0.1f64, Vertex::ORIGIN).is_err());
        assert!(build_tau_field(4, 0.0f64, Vertex::ORIGIN).is_err());
        assert!(build_tau_field(4, 0.5f64, Vertex::ORIGIN).is_err());
    }

    #[test]
    fn norm_sq_matches_edge_enumeration() {
        let f = build_tau_field(2, 0.1f64, Vertex::ORIGIN).unwrap();
        let count = edges_of_box(&BoxSpec::centered(2))
            .into_iter()
            .filter(|e| annulus_of_edge(*e, Vertex::ORIGIN) == 2)
            .count();
        assert_relative_eq!(f.norm_sq(), count as f64 * tau_value::<f64>(2, 0.1).powi(2), max_relative = 1e-14);
        for m in [3u32, 7, 20] {
            let f = build_tau_field(m, 0.1f64, Vertex::new(4, -3)).unwrap();
            let brute: f64 =
                edges_of_box(&BoxSpec::new(m + 2, Vertex::new(4, -3))).into_iter().map(|e| f.value(e).powi(2)).sum();
            assert_relative_eq!(f.norm_sq(), brute, max_relative = 1e-12);
        }
    }

    #[test]
    fn norm_sq_increments_shrink() {
        let s: Vec<f64> = [10u32, 100, 1000, 10_000]
            .iter()
            .map(|&m| build_tau_field(m, 0.1f64, Vertex::ORIGIN).unwrap().norm_sq())
            .collect();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        let inc: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(inc.windows(2).all(|w| w[1] < 0.9 * w[0]), "{inc:?}");
        // Doubling m: increments shrink as log m grows.
        let d: Vec<f64> =
            (4..14).map(|j| build_tau_field(1u32 << j, 0.1f64, Vertex::ORIGIN).unwrap().norm_sq()).collect();
        let dinc: Vec<f64> = d.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(dinc.windows(2).all(|w| w[1] < w[0]), "{dinc:?}");
    }

    #[test]
    fn zero_field() {
        let z = TauField::<f64>::zero(Vertex::ORIGIN);
        assert!(z.is_zero());
        assert_eq!(z.norm_sq(), 0.0);
        assert!(z.support_edges().is_empty());
        assert_eq!(tau_norm_sq(&z), 0.0);
    }

    proptest! {
        #[test]
        fn amplitudes_in_unit_interval(k in 2u32..100_000, kappa in 0.001f64..0.499) {
            let t: f64 = tau_value(k, kappa);
            prop_assert!(t > 0.0 && t <= 1.0);
            prop_assert!(tau_value::<f64>(k + 1, kappa) < t);
        }
    }
}
