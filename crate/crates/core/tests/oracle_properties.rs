mod common;

use cnrange::exec::Execution;
use cnrange::linalg::{random_rank_r, OperatorModel};
use cnrange::oracle::{
    convex_hull, hull_compare, polygon_area, rank1_probe, sample_values, sample_values_with, sampled_support,
};
use cnrange::range::{boundary, support_value};
use cnrange::rng::SplitMix64;
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_support_never_exceeds_exact(seed in any::<u64>(), n in 2usize..6, k in 2usize..4, theta in 0.0f64..std::f64::consts::TAU) {
        let mut g = SplitMix64::new(seed);
        let k = k.min(n);
        let c = random_c(&mut g, k);
        let ambient = random_ambient(&mut g, n, k);
        let a = OperatorModel::new(gaussian_matrix(&mut g, n), ambient).unwrap();
        let exact = support_value(&a, &c, theta).unwrap();
        let sampled = sampled_support(&a, &c, theta, 200, seed).unwrap();
        prop_assert!(sampled <= exact + 1e-9 * (1.0 + exact.abs()));
    }

    #[test]
    fn hull_is_convex_and_contains_points(seed in any::<u64>(), m in 3usize..60) {
        let mut g = SplitMix64::new(seed);
        let pts: Vec<_> = (0..m).map(|_| g.complex_normal()).collect();
        let hull = convex_hull(&pts);
        let area = polygon_area(&hull);
        prop_assert!(area >= 0.0);
        let mut with_extra = hull.clone();
        with_extra.extend(&pts);
        prop_assert!((polygon_area(&convex_hull(&with_extra)) - area).abs() <= 1e-12 * (1.0 + area));
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), n in 2usize..5) {
        let mut g = SplitMix64::new(seed);
        let c = random_c(&mut g, 2);
        let a = OperatorModel::finite(gaussian_matrix(&mut g, n)).unwrap();
        let s = sample_values_with(&a, &c, 64, seed, Execution::Sequential).unwrap();
        let p = sample_values_with(&a, &c, 64, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(s.points, p.points);
    }

    #[test]
    fn probe_matches_rank(seed in any::<u64>(), n in 2usize..6, r in 1usize..4) {
        let mut g = SplitMix64::new(seed);
        let r = r.min(n);
        let k = g.range_inclusive(2, n.min(4));
        let c = random_c(&mut g, k);
        let a = OperatorModel::finite(random_rank_r(n, r, g.next_u64())).unwrap();
        let out = rank1_probe(&a, &c).unwrap();
        prop_assert_eq!(out.is_rank1, r == 1);
        prop_assert_eq!(out.witness.is_some(), r > 1);
    }
}

#[test]
fn hull_report_on_interior_cloud() {
    let mut g = SplitMix64::new(4);
    let a = OperatorModel::finite(gaussian_matrix(&mut g, 3)).unwrap();
    let c = cv(&[1.0, 0.5]);
    let region = boundary(&a, &c, 360).unwrap();
    let cloud = sample_values(&a, &c, 2000, 4).unwrap();
    let rep = hull_compare(&cloud, &region).unwrap();
    assert!(rep.containment);
    assert_eq!(rep.outside, 0);
    assert!(rep.coverage > 0.5 && rep.coverage <= 1.0 + 1e-9);
}

#[test]
fn csv_has_header_and_rows() {
    let a = OperatorModel::finite(random_rank_r(3, 2, 1)).unwrap();
    let cloud = sample_values(&a, &cv(&[1.0, -1.0]), 5, 2).unwrap();
    let csv = cloud.to_csv();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "re,im");
    assert_eq!(lines.len(), 6);
}
