use std::sync::OnceLock;

use fpplab::claims::{make_coupled_pair, verify_claim1, verify_claim2};
use fpplab::environment::{self as env_mod, build_tau_field, ScanGrid, ShiftScan, TauField};
use fpplab::estimators::ThreePoint;
use fpplab::geodesic::{passage_time, RegionMask, ShortestPaths};
use fpplab::lattice::{edges_of_box, BoxSpec, Vertex};
use fpplab::{Environment, WeightDistribution, WeightTransform};
use proptest::prelude::*;

fn dist_strategy() -> impl Strategy<Value = WeightDistribution> {
    prop_oneof![
        Just(WeightDistribution::uniform(1.0, 1.5).unwrap()),
        Just(WeightDistribution::uniform(0.0, 1.0).unwrap()),
        Just(WeightDistribution::shifted_exponential(0.5, 2.0).unwrap()),
        Just(WeightDistribution::triangular(0.0, 0.25, 1.0).unwrap()),
    ]
}

fn scan() -> &'static ShiftScan<f64> {
    static SCAN: OnceLock<ShiftScan<f64>> = OnceLock::new();
    SCAN.get_or_init(|| {
        ShiftScan::new(WeightTransform::new(WeightDistribution::uniform(1.0, 1.5).unwrap()), ScanGrid::default())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn three_point_gap_nonnegative(seed in any::<u64>(), n in 1u32..12, d in dist_strategy()) {
        let env = Environment::sample(BoxSpec::centered(2 * n), d, seed).unwrap();
        let tp = ThreePoint::compute(&env, n, RegionMask::new(env.region())).unwrap();
        prop_assert!(tp.gap() >= -1e-9, "gap {}", tp.gap());
    }

    #[test]
    fn passage_time_symmetric_and_triangular(
        seed in any::<u64>(),
        pts in proptest::collection::vec((-4i32..=4, -4i32..=4), 3),
        d in dist_strategy(),
    ) {
        let env = Environment::sample(BoxSpec::centered(4), d, seed).unwrap();
        let mask = RegionMask::new(env.region());
        let [a, b, c] = [pts[0], pts[1], pts[2]].map(|(x, y)| Vertex::new(x, y));
        let t = |p, q| ShortestPaths::run(&env, p, mask, &[q]).unwrap().time(q).unwrap();
        prop_assert!((t(a, b) - t(b, a)).abs() <= 1e-12);
        prop_assert!(t(a, c) <= t(a, b) + t(b, c) + 1e-12);
        let (tab, path) = passage_time(&env, a, b, mask).unwrap();
        prop_assert!((path.time_in(&env).unwrap() - tab).abs() <= 1e-12);
    }

    #[test]
    fn weights_do_not_depend_on_region(seed in any::<u64>(), r in 1u32..6, extra in 1u32..6) {
        let d = WeightDistribution::uniform(0.0, 1.0).unwrap();
        let small = Environment::sample(BoxSpec::centered(r), d, seed).unwrap();
        let large = Environment::sample(BoxSpec::centered(r + extra), d, seed).unwrap();
        for e in edges_of_box(&small.region()) {
            prop_assert_eq!(small.weight(e).unwrap().to_bits(), large.weight(e).unwrap().to_bits());
        }
    }

    #[test]
    fn good_set_shift_property(frac in 0.05f64..1.0, u in 0.0f64..1.0, sigma in 1e-6f64..1.0) {
        let s = scan();
        let delta = frac * s.max_score();
        let good = s.good_set(delta).unwrap();
        prop_assume!(!good.set.is_empty());
        let total: f64 = good.set.intervals().iter().map(|(a, b)| b - a).sum();
        let mut left = u * total;
        let mut w = good.set.intervals()[0].0;
        for &(a, b) in good.set.intervals() {
            if left <= b - a {
                w = a + left;
                break;
            }
            left -= b - a;
        }
        let g = s_transform().g_sigma(sigma, w).unwrap();
        prop_assert!(g - w >= delta * sigma - 1e-12, "w {w} σ {sigma}: {} < {}", g - w, delta * sigma);
    }

    #[test]
    fn coupled_pair_claims_hold(seed in any::<u64>(), n in 6u32..20, m in 2u32..5) {
        let d = WeightDistribution::uniform(0.0, 1.0).unwrap();
        let field: TauField<f64> = build_tau_field(m, 0.1, Vertex::ORIGIN).unwrap();
        let good = scan_unit().good_set(0.2).unwrap();
        let pair = make_coupled_pair(BoxSpec::centered(2 * n), d, seed, field, WeightTransform::new(d), good).unwrap();
        for ((e, w), (_, l)) in pair.base.iter().zip(pair.lifted.iter()) {
            prop_assert!(l >= w);
            if pair.field.value(e) == 0.0 {
                prop_assert_eq!(l.to_bits(), w.to_bits());
            }
        }
        let c1 = verify_claim1(&pair, n, m, None).unwrap();
        prop_assert!(c1.pass && c1.lhs >= c1.rhs - 1e-9);
        let c2 = verify_claim2(&pair, n, m).unwrap();
        prop_assert!(c2.pass);
        if c2.hypothesis {
            prop_assert!((c2.lhs - c2.rhs).abs() <= 1e-10);
        }
    }

    #[test]
    fn f32_transform_tracks_f64(u in 0.01f64..0.99, sigma in 0.0f64..1.0) {
        let d = WeightDistribution::uniform(1.0, 1.5).unwrap();
        let t64 = WeightTransform::new(d);
        let t32 = env_mod::WeightTransform::<f32>::new(d.cast());
        let w = d.quantile(u);
        let a = t64.g_sigma(sigma, w).unwrap();
        let b = t32.g_sigma(sigma as f32, w as f32).unwrap();
        prop_assert!((a - b as f64).abs() <= 1e-5, "{a} vs {b}");
        prop_assert!(a >= w);
    }
}

fn s_transform() -> WeightTransform {
    WeightTransform::new(WeightDistribution::uniform(1.0, 1.5).unwrap())
}

fn scan_unit() -> &'static ShiftScan<f64> {
    static SCAN: OnceLock<ShiftScan<f64>> = OnceLock::new();
    SCAN.get_or_init(|| {
        ShiftScan::new(WeightTransform::new(WeightDistribution::uniform(0.0, 1.0).unwrap()), ScanGrid::default())
    })
}

#[test]
fn f32_and_f64_geodesics_agree_on_small_box() {
    let d = WeightDistribution::uniform(1.0, 1.5).unwrap();
    for seed in 0..20 {
        let e64 = Environment::sample(BoxSpec::centered(6), d, seed).unwrap();
        let e32 = env_mod::Environment::<f32>::sample(e64.region(), d.cast(), seed).unwrap();
        let mask = RegionMask::new(e64.region());
        let (a, b) = (Vertex::new(-5, 0), Vertex::new(5, 2));
        let (t64, _) = passage_time(&e64, a, b, mask).unwrap();
        let (t32, _) = passage_time(&e32, a, b, mask).unwrap();
        assert!((t64 - t32 as f64).abs() < 1e-4, "seed {seed}: {t64} vs {t32}");
    }
}
