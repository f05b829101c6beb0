//! Restricted passage times `T_K(a, b)` and geodesics.
//!
//! Dijkstra over the vertices of a mask box, reading weights from the
//! environment. Floating-point addition is monotone, so the search returns
//! exactly the minimum of the left-to-right path sums; ties go to the
//! lexicographically smallest predecessor.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use thiserror::Error;

use crate::environment::{Environment, GoodSet};
use crate::lattice::{BoxSpec, EdgeId, Vertex};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeodesicError {
    #[error("vertex {0} lies outside the mask")]
    EndpointOutside(Vertex),
    #[error("mask {mask:?} is not contained in the environment region {region:?}")]
    MaskOutsideEnvironment { mask: BoxSpec, region: BoxSpec },
    #[error("path never leaves the box")]
    NeverExits,
    #[error("path does not start inside the box")]
    StartsOutside,
    #[error("path is empty")]
    EmptyPath,
    #[error("consecutive path vertices {0} and {1} are not adjacent")]
    NotAdjacent(Vertex, Vertex),
    #[error("path uses edge {0} twice")]
    RepeatedEdge(EdgeId),
    #[error("edge {0} is not in the environment")]
    MissingEdge(EdgeId),
}

/// A lattice path with the left-fold arrival time at each vertex under the
/// environment it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord<F> {
    vertices: Vec<Vertex>,
    arrival: Vec<F>,
}

impl<F: Scalar> PathRecord<F> {
    /// Validate a vertex sequence and time it in `env`.
    pub fn from_vertices(env: &Environment<F>, vertices: Vec<Vertex>) -> Result<Self, GeodesicError> {
        if vertices.is_empty() {
            return Err(GeodesicError::EmptyPath);
        }
        let mut seen = std::collections::HashSet::new();
        let mut arrival = Vec::with_capacity(vertices.len());
        let mut t = F::zero();
        arrival.push(t);
        for w in vertices.windows(2) {
            let e = EdgeId::between(w[0], w[1]).map_err(|_| GeodesicError::NotAdjacent(w[0], w[1]))?;
            if !seen.insert(e) {
                return Err(GeodesicError::RepeatedEdge(e));
            }
            t = t + env.weight(e).ok_or(GeodesicError::MissingEdge(e))?;
            arrival.push(t);
        }
        Ok(Self { vertices, arrival })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn start(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().expect("nonempty path")
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_time(&self) -> F {
        *self.arrival.last().expect("nonempty path")
    }

    /// Arrival time at each vertex.
    pub fn arrival_times(&self) -> &[F] {
        &self.arrival
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        self.vertices.windows(2).map(|w| EdgeId::between(w[0], w[1]).expect("adjacent path vertices")).collect()
    }

    /// Passage time of the same vertex sequence in another environment.
    pub fn time_in(&self, env: &Environment<F>) -> Result<F, GeodesicError> {
        self.edges()
            .into_iter()
            .try_fold(F::zero(), |acc, e| Ok(acc + env.weight(e).ok_or(GeodesicError::MissingEdge(e))?))
    }

    /// The same path traversed backwards; arrival times are re-accumulated
    /// from the weights of the forward traversal.
    pub fn reversed(&self) -> Self {
        let vertices: Vec<Vertex> = self.vertices.iter().rev().copied().collect();
        let mut arrival = Vec::with_capacity(self.arrival.len());
        let mut t = F::zero();
        arrival.push(t);
        for w in self.arrival.windows(2).rev() {
            t = t + (w[1] - w[0]);
            arrival.push(t);
        }
        Self { vertices, arrival }
    }

    /// Split at vertex index `k` into `v₀..=v_k` and `v_k..`; the second
    /// part's arrival times are rebased to start at zero.
    pub fn split_at(&self, k: usize) -> (Self, Self) {
        let head = Self { vertices: self.vertices[..=k].to_vec(), arrival: self.arrival[..=k].to_vec() };
        let base = self.arrival[k];
        let tail = Self {
            vertices: self.vertices[k..].to_vec(),
            arrival: self.arrival[k..].iter().map(|&t| t - base).collect(),
        };
        (head, tail)
    }
}

/// Paths are confined to `region`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegionMask {
    pub region: BoxSpec,
}

impl RegionMask {
    pub fn new(region: BoxSpec) -> Self {
        Self { region }
    }
}

#[derive(Clone, Copy, Debug)]
struct HeapEntry<F> {
    dist: F,
    index: u32,
}

impl<F: Scalar> PartialEq for HeapEntry<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<F: Scalar> Eq for HeapEntry<F> {}

impl<F: Scalar> PartialOrd for HeapEntry<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Scalar> Ord for HeapEntry<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist.partial_cmp(&other.dist).unwrap_or(Ordering::Equal).then(self.index.cmp(&other.index))
    }
}

const NO_PRED: u32 = u32::MAX;

/// Single-source search tree inside a mask.
#[derive(Clone, Debug)]
pub struct ShortestPaths<'a, F> {
    env: &'a Environment<F>,
    mask: BoxSpec,
    source: Vertex,
    dist: Vec<F>,
    pred: Vec<u32>,
    settled: Vec<bool>,
}

impl<'a, F: Scalar> ShortestPaths<'a, F> {
    /// Run Dijkstra from `source`, stopping once every vertex in `targets` is
    /// settled (or exploring the whole mask when `targets` is empty).
    pub fn run(
        env: &'a Environment<F>,
        source: Vertex,
        mask: RegionMask,
        targets: &[Vertex],
    ) -> Result<Self, GeodesicError> {
        let mask = mask.region;
        let region = env.region();
        if !region.contains_box(&mask) {
            return Err(GeodesicError::MaskOutsideEnvironment { mask, region });
        }
        for &v in std::iter::once(&source).chain(targets) {
            if !mask.contains(v) {
                return Err(GeodesicError::EndpointOutside(v));
            }
        }
        let side = mask.side();
        let n = side * side;
        let env_side = region.side();
        let mut dist = vec![F::infinity(); n];
        let mut pred = vec![NO_PRED; n];
        let mut settled = vec![false; n];
        let mut is_target = vec![false; n];
        let mut remaining = 0usize;
        for &t in targets {
            let i = mask.vertex_index_unchecked(t);
            if !is_target[i] {
                is_target[i] = true;
                remaining += 1;
            }
        }
        let explore_all = remaining == 0;

        let s = mask.vertex_index_unchecked(source);
        dist[s] = F::zero();
        let mut heap = BinaryHeap::new();
        heap.push(Reverse(HeapEntry { dist: F::zero(), index: s as u32 }));

        while let Some(Reverse(HeapEntry { dist: d, index })) = heap.pop() {
            let u = index as usize;
            if settled[u] {
                continue;
            }
            settled[u] = true;
            if is_target[u] {
                remaining -= 1;
                if remaining == 0 && !explore_all {
                    break;
                }
            }
            let (ux, uy) = (u / side, u % side);
            let v = mask.vertex_at(u);
            let ev = region.vertex_index_unchecked(v);
            // Neighbours in lexicographic order: (x−1, y), (x, y−1), (x, y+1), (x+1, y).
            let neighbours = [
                (ux > 0, u.wrapping_sub(side), ev.wrapping_sub(env_side).wrapping_mul(2)),
                (uy > 0, u.wrapping_sub(1), ev.wrapping_sub(1).wrapping_mul(2).wrapping_add(1)),
                (uy + 1 < side, u + 1, 2 * ev + 1),
                (ux + 1 < side, u + side, 2 * ev),
            ];
            for (inside, w, slot) in neighbours {
                if !inside || settled[w] {
                    continue;
                }
                let cand = d + env.weight_at_slot(slot);
                if cand < dist[w] {
                    dist[w] = cand;
                    pred[w] = u as u32;
                    heap.push(Reverse(HeapEntry { dist: cand, index: w as u32 }));
                } else if cand == dist[w] && (u as u32) < pred[w] {
                    pred[w] = u as u32;
                }
            }
        }
        Ok(Self { env, mask, source, dist, pred, settled })
    }

    pub fn source(&self) -> Vertex {
        self.source
    }

    /// `T_K(source, v)` if `v` was settled.
    pub fn time(&self, v: Vertex) -> Option<F> {
        let i = self.mask.vertex_index(v)?;
        self.settled[i].then_some(self.dist[i])
    }

    pub fn path(&self, v: Vertex) -> Option<PathRecord<F>> {
        let mut i = self.mask.vertex_index(v)?;
        if !self.settled[i] {
            return None;
        }
        let mut rev = vec![i];
        while self.pred[i] != NO_PRED {
            i = self.pred[i] as usize;
            rev.push(i);
        }
        rev.reverse();
        let vertices = rev.iter().map(|&i| self.mask.vertex_at(i)).collect();
        let arrival = rev.iter().map(|&i| self.dist[i]).collect();
        Some(PathRecord { vertices, arrival })
    }

    pub fn environment(&self) -> &Environment<F> {
        self.env
    }
}

/// `T_K(a, b)` with its geodesic, oriented from `a` to `b`.
///
/// The search always starts at the lexicographically smaller endpoint, so
/// `T_K(a, b)` and `T_K(b, a)` are the same floating-point number.
pub fn passage_time<F: Scalar>(
    env: &Environment<F>,
    a: Vertex,
    b: Vertex,
    mask: RegionMask,
) -> Result<(F, PathRecord<F>), GeodesicError> {
    let (from, to) = if a <= b { (a, b) } else { (b, a) };
    let tree = ShortestPaths::run(env, from, mask, &[to])?;
    let path = tree.path(to).expect("target settled");
    let time = path.total_time();
    let path = if a <= b { path } else { path.reversed() };
    Ok((time, path))
}

pub fn geodesic_hits_box<F: Scalar>(path: &PathRecord<F>, b: &BoxSpec) -> bool {
    path.vertices.iter().any(|&v| b.contains(v))
}

/// Prefix up to and including the first vertex outside `b`.
pub fn first_exit_prefix<F: Scalar>(path: &PathRecord<F>, b: &BoxSpec) -> Result<PathRecord<F>, GeodesicError> {
    if !b.contains(path.start()) {
        return Err(GeodesicError::StartsOutside);
    }
    let k = path.vertices.iter().position(|&v| !b.contains(v)).ok_or(GeodesicError::NeverExits)?;
    Ok(path.split_at(k).0)
}

/// Number of path edges whose weight in `env` lies in `good`.
pub fn good_edge_count<F: Scalar>(
    path: &PathRecord<F>,
    env: &Environment<F>,
    good: &GoodSet<F>,
) -> Result<usize, GeodesicError> {
    let mut count = 0;
    for e in path.edges() {
        let w = env.weight(e).ok_or(GeodesicError::MissingEdge(e))?;
        if good.contains(w) {
            count += 1;
        }
    }
    Ok(count)
}

/// Minimum number of good edges on any path from the origin to `∂Λ(n)`,
/// by 0/1 breadth-first search inside `Λ(n)`.
pub fn min_good_count_to_boundary<F: Scalar>(
    env: &Environment<F>,
    good: &GoodSet<F>,
    n: u32,
) -> Result<u32, GeodesicError> {
    let b = BoxSpec::centered(n);
    let region = env.region();
    if !region.contains_box(&b) {
        return Err(GeodesicError::MaskOutsideEnvironment { mask: b, region });
    }
    if n == 0 {
        return Ok(0);
    }
    let side = b.side();
    let env_side = region.side();
    let mut cost = vec![u32::MAX; side * side];
    let mut done = vec![false; side * side];
    let s = b.vertex_index_unchecked(Vertex::ORIGIN);
    cost[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        if done[u] {
            continue;
        }
        done[u] = true;
        let v = b.vertex_at(u);
        if v.sup_dist(Vertex::ORIGIN) == n {
            // 0/1 BFS settles vertices in cost order; the first boundary vertex is optimal.
            return Ok(cost[u]);
        }
        let (ux, uy) = (u / side, u % side);
        let ev = region.vertex_index_unchecked(v);
        let neighbours = [
            (ux > 0, u.wrapping_sub(side), ev.wrapping_sub(env_side).wrapping_mul(2)),
            (uy > 0, u.wrapping_sub(1), ev.wrapping_sub(1).wrapping_mul(2).wrapping_add(1)),
            (uy + 1 < side, u + 1, 2 * ev + 1),
            (ux + 1 < side, u + side, 2 * ev),
        ];
        for (inside, w, slot) in neighbours {
            if !inside || done[w] {
                continue;
            }
            let step = u32::from(good.contains(env.weight_at_slot(slot)));
            let cand = cost[u] + step;
            if cand < cost[w] {
                cost[w] = cand;
                if step == 0 {
                    queue.push_front(w);
                } else {
                    queue.push_back(w);
                }
            }
        }
    }
    unreachable!("boundary of a box is reachable from its center")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_environment, WeightDistribution};

    fn unif() -> WeightDistribution<f64> {
        WeightDistribution::uniform(1.0, 1.5).unwrap()
    }

    fn constant_env(radius: u32) -> Environment<f64> {
        Environment::from_fn(BoxSpec::centered(radius), unif(), 0, |_| 1.0).unwrap()
    }

    /// Exhaustive minimum over self-avoiding paths, pruned only by an
    /// admissible bound (remaining ℓ1 distance times the minimum weight).
    fn brute_force(env: &Environment<f64>, mask: BoxSpec, a: Vertex, b: Vertex) -> f64 {
        fn dfs(
            env: &Environment<f64>,
            mask: BoxSpec,
            v: Vertex,
            b: Vertex,
            acc: f64,
            visited: &mut Vec<Vertex>,
            best: &mut f64,
        ) {
            if v == b {
                *best = best.min(acc);
                return;
            }
            if acc + v.l1_dist(b) as f64 > *best {
                return;
            }
            for w in v.neighbours() {
                if mask.contains(w) && !visited.contains(&w) {
                    visited.push(w);
                    dfs(env, mask, w, b, acc + env.weight_between(v, w).unwrap(), visited, best);
                    visited.pop();
                }
            }
        }
        let mut best = f64::INFINITY;
        dfs(env, mask, a, b, 0.0, &mut vec![a], &mut best);
        best
    }

    #[test]
    fn trivial_cases() {
        let env = constant_env(2);
        let mask = RegionMask::new(env.region());
        let (t, p) = passage_time(&env, Vertex::ORIGIN, Vertex::ORIGIN, mask).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(p.vertices(), &[Vertex::ORIGIN]);
        let (t, p) = passage_time(&env, Vertex::new(0, 0), Vertex::new(1, 1), mask).unwrap();
        assert_eq!(t, 2.0);
        assert_eq!(p.len(), 2);
        // Lexicographic tie-break: the predecessor of (1,1) is (0,1), not (1,0).
        assert_eq!(p.vertices()[1], Vertex::new(0, 1));
        assert!(passage_time(&env, Vertex::ORIGIN, Vertex::new(3, 0), mask).is_err());
        assert!(passage_time(&env, Vertex::ORIGIN, Vertex::new(1, 0), RegionMask::new(BoxSpec::centered(3))).is_err());
    }

    #[test]
    fn matches_brute_force_on_small_box() {
        let region = BoxSpec::centered(2);
        let mask = RegionMask::new(region);
        for seed in 0..5 {
            let env = sample_environment(region, unif(), seed).unwrap();
            for a in region.vertices() {
                let tree = ShortestPaths::run(&env, a, mask, &[]).unwrap();
                for b in region.vertices().filter(|&b| b >= a) {
                    let t = tree.time(b).unwrap();
                    assert_eq!(t, brute_force(&env, region, a, b), "seed {seed} {a} -> {b}");
                    assert_eq!(passage_time(&env, b, a, mask).unwrap().0, t);
                    let p = tree.path(b).unwrap();
                    assert_eq!(p.total_time(), t);
                    let re = PathRecord::from_vertices(&env, p.vertices().to_vec()).unwrap();
                    assert_eq!(re.total_time(), t);
                }
            }
        }
    }

    #[test]
    fn symmetry_and_triangle_inequality() {
        let region = BoxSpec::centered(6);
        let env = sample_environment(region, unif(), 11).unwrap();
        let mask = RegionMask::new(region);
        let pts = [Vertex::new(-6, 0), Vertex::new(0, 0), Vertex::new(3, 5), Vertex::new(6, -6), Vertex::new(-2, 4)];
        let t = |a: Vertex, b: Vertex| passage_time(&env, a, b, mask).unwrap().0;
        for &a in &pts {
            for &b in &pts {
                assert_eq!(t(a, b).to_bits(), t(b, a).to_bits());
                for &c in &pts {
                    assert!(t(a, c) <= t(a, b) + t(b, c) + 1e-9);
                }
            }
        }
        let (tab, p) = passage_time(&env, pts[3], pts[0], mask).unwrap();
        assert_eq!(p.start(), pts[3]);
        assert!((p.total_time() - tab).abs() < 1e-12);
        assert!((p.time_in(&env).unwrap() - tab).abs() < 1e-12);
    }

    #[test]
    fn mask_monotonicity() {
        let env = sample_environment(BoxSpec::centered(12), unif(), 4).unwrap();
        let a = Vertex::new(-3, 0);
        let b = Vertex::new(3, 0);
        let times: Vec<f64> =
            (3..=12).map(|r| passage_time(&env, a, b, RegionMask::new(BoxSpec::centered(r))).unwrap().0).collect();
        assert!(times.windows(2).all(|w| w[1] <= w[0]));
        // Any detour beyond ℓ∞ radius 9 costs more than 1.5 · 6, so the mask stops mattering.
        assert_eq!(times[6], times[9]);
    }

    #[test]
    fn early_stop_agrees_with_full_search() {
        let env = sample_environment(BoxSpec::centered(10), unif(), 8).unwrap();
        let mask = RegionMask::new(env.region());
        let full = ShortestPaths::run(&env, Vertex::new(-7, 1), mask, &[]).unwrap();
        let part = ShortestPaths::run(&env, Vertex::new(-7, 1), mask, &[Vertex::new(2, 2)]).unwrap();
        assert_eq!(full.time(Vertex::new(2, 2)), part.time(Vertex::new(2, 2)));
        assert_eq!(full.path(Vertex::new(2, 2)), part.path(Vertex::new(2, 2)));
    }

    fn straight_path(y: i32, x0: i32, x1: i32) -> PathRecord<f64> {
        let env = constant_env(12);
        PathRecord::from_vertices(&env, (x0..=x1).map(|x| Vertex::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn hits_box() {
        assert!(geodesic_hits_box(&straight_path(0, -5, 5), &BoxSpec::centered(1)));
        let env = Environment::from_fn(BoxSpec::centered(12), unif(), 0, |_| 1.0).unwrap();
        let high = PathRecord::from_vertices(&env, (-5..=5).map(|x| Vertex::new(x, 10)).collect()).unwrap();
        assert!(!geodesic_hits_box(&high, &BoxSpec::centered(2)));
    }

    #[test]
    fn first_exit_prefix_cases() {
        let p = straight_path(0, 0, 10);
        let pre = first_exit_prefix(&p, &BoxSpec::centered(2)).unwrap();
        assert_eq!(pre.len(), 3);
        assert_eq!(pre.end(), Vertex::new(3, 0));
        let on_boundary = straight_path(0, 2, 10);
        assert_eq!(first_exit_prefix(&on_boundary, &BoxSpec::centered(2)).unwrap().len(), 1);
        assert_eq!(first_exit_prefix(&p, &BoxSpec::centered(12)), Err(GeodesicError::NeverExits));
        assert_eq!(first_exit_prefix(&on_boundary, &BoxSpec::centered(1)), Err(GeodesicError::StartsOutside));
        let (head, tail) = p.split_at(3);
        let mut joined = head.edges();
        joined.extend(tail.edges());
        assert_eq!(joined, p.edges());
        assert!(head.edges().iter().all(|e| !tail.edges().contains(e)));
    }

    #[test]
    fn from_vertices_validation() {
        let env = constant_env(3);
        let bad = vec![Vertex::new(0, 0), Vertex::new(1, 1)];
        assert!(PathRecord::from_vertices(&env, bad).is_err());
        let back = vec![Vertex::new(0, 0), Vertex::new(1, 0), Vertex::new(0, 0)];
        assert!(matches!(PathRecord::from_vertices(&env, back), Err(GeodesicError::RepeatedEdge(_))));
        assert!(PathRecord::<f64>::from_vertices(&env, vec![]).is_err());
    }

    #[test]
    fn good_edge_count_cases() {
        let env = sample_environment(BoxSpec::centered(6), unif(), 2).unwrap();
        let (_, p) = passage_time(&env, Vertex::new(-6, -6), Vertex::new(6, 6), RegionMask::new(env.region())).unwrap();
        let all = GoodSet::from_intervals(&unif(), vec![(1.0, 1.5)]);
        let none = GoodSet::from_intervals(&unif(), vec![]);
        let half = GoodSet::from_intervals(&unif(), vec![(1.1, 1.35)]);
        assert_eq!(good_edge_count(&p, &env, &all).unwrap(), p.len());
        assert_eq!(good_edge_count(&p, &env, &none).unwrap(), 0);
        let oracle = p
            .vertices()
            .windows(2)
            .filter(|w| {
                let x = env.weight_between(w[0], w[1]).unwrap();
                (1.1..=1.35).contains(&x)
            })
            .count();
        assert_eq!(good_edge_count(&p, &env, &half).unwrap(), oracle);
    }

    fn brute_min_good(env: &Environment<f64>, good: &GoodSet<f64>, n: u32) -> u32 {
        fn dfs(
            env: &Environment<f64>,
            good: &GoodSet<f64>,
            n: u32,
            v: Vertex,
            acc: u32,
            seen: &mut Vec<Vertex>,
            best: &mut u32,
        ) {
            if acc >= *best {
                return;
            }
            if v.sup_dist(Vertex::ORIGIN) == n {
                *best = acc;
                return;
            }
            for w in v.neighbours() {
                if w.sup_dist(Vertex::ORIGIN) <= n && !seen.contains(&w) {
                    let step = u32::from(good.contains(env.weight_between(v, w).unwrap()));
                    seen.push(w);
                    dfs(env, good, n, w, acc + step, seen, best);
                    seen.pop();
                }
            }
        }
        let mut best = u32::MAX;
        dfs(env, good, n, Vertex::ORIGIN, 0, &mut vec![Vertex::ORIGIN], &mut best);
        best
    }

    #[test]
    fn min_good_count_cases() {
        let env = sample_environment(BoxSpec::centered(6), unif(), 5).unwrap();
        let all = GoodSet::from_intervals(&unif(), vec![(1.0, 1.5)]);
        let none = GoodSet::from_intervals(&unif(), vec![]);
        assert_eq!(min_good_count_to_boundary(&env, &all, 5).unwrap(), 5);
        assert_eq!(min_good_count_to_boundary(&env, &none, 5).unwrap(), 0);
        assert_eq!(min_good_count_to_boundary(&env, &all, 0).unwrap(), 0);
        assert!(min_good_count_to_boundary(&env, &all, 7).is_err());
        let b = GoodSet::lower_tail(&unif(), 0.75);
        assert!((b.measure - 0.75).abs() < 1e-12);
        for seed in 0..20 {
            let env = sample_environment(BoxSpec::centered(4), unif(), seed).unwrap();
            assert_eq!(min_good_count_to_boundary(&env, &b, 4).unwrap(), brute_min_good(&env, &b, 4), "seed {seed}");
        }
    }
}
