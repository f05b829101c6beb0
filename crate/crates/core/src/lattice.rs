//! Square lattice geometry: vertices, canonical edges, boxes and their annuli.
//!
//! The boundary of a box is the ℓ∞ sphere, so `Λ(n)` is the disjoint union of
//! the spheres `∂Λ(k)` for `0 ≤ k ≤ n`. An edge is assigned to the annulus of
//! its outer endpoint.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(Vertex, Vertex),
    #[error("annulus index must be positive, got {0}")]
    ZeroAnnulus(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { x: 0, y: 0 };

    #[inline]
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// ℓ∞ distance.
    #[inline]
    pub fn sup_dist(self, other: Vertex) -> u32 {
        (self.x - other.x).unsigned_abs().max((self.y - other.y).unsigned_abs())
    }

    /// ℓ1 distance.
    #[inline]
    pub fn l1_dist(self, other: Vertex) -> u32 {
        (self.x - other.x).unsigned_abs() + (self.y - other.y).unsigned_abs()
    }

    #[inline]
    pub fn offset(self, dx: i32, dy: i32) -> Vertex {
        Vertex::new(self.x + dx, self.y + dy)
    }

    /// The four lattice neighbours in lexicographic order.
    #[inline]
    pub fn neighbours(self) -> [Vertex; 4] {
        [self.offset(-1, 0), self.offset(0, -1), self.offset(0, 1), self.offset(1, 0)]
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    #[inline]
    pub fn unit(self) -> (i32, i32) {
        match self {
            Axis::Horizontal => (1, 0),
            Axis::Vertical => (0, 1),
        }
    }
}

/// Canonical edge: `base` is the lexicographically smaller endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub base: Vertex,
    pub axis: Axis,
}

impl EdgeId {
    pub const fn new(base: Vertex, axis: Axis) -> Self {
        Self { base, axis }
    }

    pub fn between(a: Vertex, b: Vertex) -> Result<Self, LatticeError> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        match (hi.x - lo.x, hi.y - lo.y) {
            (1, 0) => Ok(EdgeId::new(lo, Axis::Horizontal)),
            (0, 1) => Ok(EdgeId::new(lo, Axis::Vertical)),
            _ => Err(LatticeError::NotAdjacent(a, b)),
        }
    }

    #[inline]
    pub fn head(self) -> Vertex {
        let (dx, dy) = self.axis.unit();
        self.base.offset(dx, dy)
    }

    #[inline]
    pub fn endpoints(self) -> (Vertex, Vertex) {
        (self.base, self.head())
    }

    pub fn translate(self, dx: i32, dy: i32) -> Self {
        EdgeId::new(self.base.offset(dx, dy), self.axis)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.base, self.head())
    }
}

/// The box `Λ(radius)` around `center`: all vertices within ℓ∞ distance `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxSpec {
    pub radius: u32,
    pub center: Vertex,
}

impl BoxSpec {
    pub const fn new(radius: u32, center: Vertex) -> Self {
        Self { radius, center }
    }

    pub const fn centered(radius: u32) -> Self {
        Self::new(radius, Vertex::ORIGIN)
    }

    /// Number of vertices along one side, `2 radius + 1`.
    #[inline]
    pub fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    pub fn vertex_count(&self) -> usize {
        self.side() * self.side()
    }

    /// `2 (2n+1) 2n` edges with both endpoints inside.
    pub fn edge_count(&self) -> usize {
        2 * self.side() * (self.side() - 1)
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        v.sup_dist(self.center) <= self.radius
    }

    #[inline]
    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.contains(e.base) && self.contains(e.head())
    }

    /// True when every vertex of `other` lies in `self`.
    pub fn contains_box(&self, other: &BoxSpec) -> bool {
        other.center.sup_dist(self.center) + other.radius <= self.radius
    }

    pub fn min_corner(&self) -> Vertex {
        let r = self.radius as i32;
        self.center.offset(-r, -r)
    }

    /// Row-major (x then y) index of a vertex inside the box.
    #[inline]
    pub fn vertex_index(&self, v: Vertex) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        Some(self.vertex_index_unchecked(v))
    }

    #[inline]
    pub(crate) fn vertex_index_unchecked(&self, v: Vertex) -> usize {
        let c = self.min_corner();
        (v.x - c.x) as usize * self.side() + (v.y - c.y) as usize
    }

    #[inline]
    pub fn vertex_at(&self, index: usize) -> Vertex {
        let c = self.min_corner();
        let side = self.side();
        Vertex::new(c.x + (index / side) as i32, c.y + (index % side) as i32)
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertex_count()).map(move |i| self.vertex_at(i))
    }

    /// Vertices of the ℓ∞ sphere `∂Λ(radius)`.
    pub fn boundary(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices().filter(move |v| v.sup_dist(self.center) == self.radius)
    }
}

#[inline]
pub fn annulus_of_vertex(v: Vertex, center: Vertex) -> u32 {
    v.sup_dist(center)
}

#[inline]
pub fn annulus_of_edge(e: EdgeId, center: Vertex) -> u32 {
    annulus_of_vertex(e.base, center).max(annulus_of_vertex(e.head(), center))
}

/// All edges with both endpoints in the box, ordered by base vertex
/// (x, then y) and horizontal before vertical.
pub fn edges_of_box(b: &BoxSpec) -> Vec<EdgeId> {
    let mut out = Vec::with_capacity(b.edge_count());
    for v in b.vertices() {
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let e = EdgeId::new(v, axis);
            if b.contains(e.head()) {
                out.push(e);
            }
        }
    }
    out
}

/// Number of edges with annulus index `k`: `|E(Λ(k))| − |E(Λ(k−1))| = 16k − 4`.
///
/// The crude count `8k` used when bounding `Σ τ_e²` is smaller by a factor of
/// about two; only the linear order matters for that bound. `k = 0` has no
/// edges and returns 0.
pub fn annulus_edge_count(k: u32) -> u64 {
    if k == 0 {
        0
    } else {
        16 * k as u64 - 4
    }
}

/// Strict variant of [`annulus_edge_count`] that rejects `k = 0`.
pub fn annulus_edge_count_checked(k: u32) -> Result<u64, LatticeError> {
    if k == 0 {
        Err(LatticeError::ZeroAnnulus(k))
    } else {
        Ok(annulus_edge_count(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn annulus_of_vertex_examples() {
        assert_eq!(annulus_of_vertex(Vertex::new(0, 0), Vertex::ORIGIN), 0);
        assert_eq!(annulus_of_vertex(Vertex::new(3, -2), Vertex::ORIGIN), 3);
        assert_eq!(annulus_of_vertex(Vertex::new(5, 5), Vertex::new(2, 5)), 3);
    }

    #[test]
    fn annulus_of_edge_examples() {
        let o = Vertex::ORIGIN;
        assert_eq!(annulus_of_edge(EdgeId::new(o, Axis::Horizontal), o), 1);
        assert_eq!(annulus_of_edge(EdgeId::new(Vertex::new(2, 2), Axis::Vertical), o), 3);
        let e = EdgeId::between(Vertex::new(-1, 0), o).unwrap();
        assert_eq!(e.base, Vertex::new(-1, 0));
        assert_eq!(annulus_of_edge(e, o), 1);
    }

    #[test]
    fn edge_canonicalization() {
        let a = Vertex::new(4, 7);
        let b = Vertex::new(4, 6);
        assert_eq!(EdgeId::between(a, b).unwrap(), EdgeId::between(b, a).unwrap());
        assert_eq!(EdgeId::between(a, b).unwrap().base, b);
        assert!(EdgeId::between(a, Vertex::new(5, 6)).is_err());
        assert!(EdgeId::between(a, a).is_err());
    }

    fn brute_force_edges(n: i32) -> HashSet<(Vertex, Vertex)> {
        let mut set = HashSet::new();
        for x in -n..=n {
            for y in -n..=n {
                let v = Vertex::new(x, y);
                for w in v.neighbours() {
                    if w.x.abs() <= n && w.y.abs() <= n {
                        set.insert(if v < w { (v, w) } else { (w, v) });
                    }
                }
            }
        }
        set
    }

    #[test]
    fn edges_of_box_counts() {
        assert!(edges_of_box(&BoxSpec::centered(0)).is_empty());
        assert_eq!(edges_of_box(&BoxSpec::centered(1)).len(), 12);
        assert_eq!(edges_of_box(&BoxSpec::centered(2)).len(), 40);
        for n in 0..6 {
            let b = BoxSpec::centered(n);
            let edges = edges_of_box(&b);
            let brute = brute_force_edges(n as i32);
            assert_eq!(edges.len(), brute.len());
            assert_eq!(edges.len(), b.edge_count());
            let got: HashSet<_> = edges.iter().map(|e| e.endpoints()).collect();
            assert_eq!(got, brute);
            assert!(edges.windows(2).all(|w| w[0] < w[1]), "sorted and unique");
        }
    }

    #[test]
    fn annulus_edge_count_matches_enumeration() {
        assert_eq!(annulus_edge_count(0), 0);
        assert!(annulus_edge_count_checked(0).is_err());
        assert_eq!(annulus_edge_count(1), 12);
        let edges = edges_of_box(&BoxSpec::centered(12));
        for k in 1..=12u32 {
            let brute = edges.iter().filter(|e| annulus_of_edge(**e, Vertex::ORIGIN) == k).count() as u64;
            assert_eq!(annulus_edge_count(k), brute, "k = {k}");
        }
        assert_eq!(annulus_edge_count(2), 28);
    }

    #[test]
    fn annuli_partition_box() {
        for n in 0..8u32 {
            let b = BoxSpec::centered(n);
            let mut per_k = vec![0usize; n as usize + 1];
            for v in b.vertices() {
                let k = annulus_of_vertex(v, b.center);
                assert!(k <= n);
                per_k[k as usize] += 1;
            }
            assert_eq!(per_k.iter().sum::<usize>(), (2 * n as usize + 1).pow(2));
            assert_eq!(per_k[n as usize], b.boundary().count());
        }
    }

    #[test]
    fn vertex_index_roundtrip() {
        let b = BoxSpec::new(3, Vertex::new(-2, 5));
        for (i, v) in b.vertices().enumerate() {
            assert_eq!(b.vertex_index(v), Some(i));
        }
        assert_eq!(b.vertex_index(Vertex::new(2, 5)), None);
        assert!(BoxSpec::centered(5).contains_box(&BoxSpec::new(2, Vertex::new(3, -3))));
        assert!(!BoxSpec::centered(5).contains_box(&BoxSpec::new(3, Vertex::new(3, 0))));
    }

    proptest! {
        #[test]
        fn annulus_of_edge_translation_covariant(
            x in -50i32..50, y in -50i32..50, horiz in any::<bool>(),
            cx in -20i32..20, cy in -20i32..20, dx in -30i32..30, dy in -30i32..30,
        ) {
            let axis = if horiz { Axis::Horizontal } else { Axis::Vertical };
            let e = EdgeId::new(Vertex::new(x, y), axis);
            let c = Vertex::new(cx, cy);
            prop_assert_eq!(
                annulus_of_edge(e, c),
                annulus_of_edge(e.translate(dx, dy), c.offset(dx, dy))
            );
        }
    }
}
