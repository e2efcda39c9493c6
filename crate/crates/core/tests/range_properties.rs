mod common;

use cnrange::coefficients::AmbientDim;
use cnrange::exec::Execution;
use cnrange::linalg::{random_unitary, ComplexMatrix, OperatorModel};
use cnrange::oracle::sample_values;
use cnrange::range::{
    boundary, boundary_with, contains, grid_angle, radius, regions_equal, selfadjoint_interval,
    selfadjoint_interval_infinite, selfadjoint_range, support_value,
};
use cnrange::rng::SplitMix64;
use common::*;
use proptest::prelude::*;

const GRID: usize = 180;

fn instance(seed: u64, n: usize, k: usize) -> (SplitMix64, OperatorModel, cnrange::CoefficientVector) {
    let mut g = SplitMix64::new(seed);
    let k = k.min(n);
    let c = random_c(&mut g, k);
    let ambient = random_ambient(&mut g, n, k);
    let a = OperatorModel::new(gaussian_matrix(&mut g, n), ambient).unwrap();
    (g, a, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn samples_lie_inside_region(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let (_, a, c) = instance(seed, n, k);
        let region = boundary(&a, &c, GRID).unwrap();
        let cloud = sample_values(&a, &c, 300, seed).unwrap();
        for z in &cloud.points {
            prop_assert!(contains(&region, *z, 1e-8));
        }
    }

    #[test]
    fn lower_support_is_opposite_upper(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let (_, a, c) = instance(seed, n, k);
        let region = boundary(&a, &c, GRID).unwrap();
        let h = region.support().values();
        for i in 0..GRID {
            prop_assert!(region.lower_support()[i] <= h[i] + 1e-10);
            // m(θ) = -h(θ + π)
            let j = (i + GRID / 2) % GRID;
            prop_assert!((region.lower_support()[i] + h[j]).abs() <= 1e-9 * (1.0 + h[j].abs()));
        }
    }

    #[test]
    fn unitary_similarity_leaves_region_unchanged(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let (mut g, a, c) = instance(seed, n, k);
        let u = random_unitary(n, g.next_u64()).unwrap();
        let b = a.with_block(&(&u * a.block()) * &u.adjoint()).unwrap();
        let r1 = boundary(&a, &c, GRID).unwrap();
        let r2 = boundary(&b, &c, GRID).unwrap();
        prop_assert!(regions_equal(&r1, &r2, 1e-8).unwrap());
    }

    #[test]
    fn transpose_gives_same_region(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let (_, a, c) = instance(seed, n, k);
        let t = a.with_block(a.block().transpose()).unwrap();
        let r1 = boundary(&a, &c, GRID).unwrap();
        let r2 = boundary(&t, &c, GRID).unwrap();
        prop_assert!(regions_equal(&r1, &r2, 1e-8).unwrap());
    }

    #[test]
    fn adjoint_conjugates_region(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let (_, a, c) = instance(seed, n, k);
        let adj = a.with_block(a.block().adjoint()).unwrap();
        for i in 0..16 {
            let th = grid_angle(i, 16);
            let lhs = support_value(&adj, &c, th).unwrap();
            let rhs = support_value(&a, &c, -th).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn region_is_convex(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let (_, a, c) = instance(seed, n, k);
        prop_assert!(boundary(&a, &c, GRID).unwrap().is_convex());
    }

    #[test]
    fn execution_modes_agree_exactly(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let (_, a, c) = instance(seed, n, k);
        let s = boundary_with(&a, &c, GRID, Execution::Sequential).unwrap();
        let p = boundary_with(&a, &c, GRID, Execution::Parallel).unwrap();
        prop_assert_eq!(s.support().values(), p.support().values());
        prop_assert_eq!(s.polyline(), p.polyline());
    }

    #[test]
    fn radius_bounds_every_boundary_point(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let (_, a, c) = instance(seed, n, k);
        let region = boundary(&a, &c, GRID).unwrap();
        let r = radius(&region);
        for z in region.boundary_points() {
            prop_assert!(z.norm() <= r + 1e-9 * (1.0 + r));
        }
        prop_assert!(r + 1e-9 >= region.max_abs_support());
    }

    #[test]
    fn infinite_interval_equals_padded(seed in any::<u64>(), m in 1usize..6, k in 2usize..5, extra in 0usize..3) {
        let mut g = SplitMix64::new(seed);
        let c = random_c(&mut g, k);
        let s = hermitian(&mut g, m);
        let inf = selfadjoint_interval_infinite(&OperatorModel::infinite(s.clone()).unwrap(), &c).unwrap();
        let fin = selfadjoint_interval(&OperatorModel::new(s, AmbientDim::Finite(m + k + extra)).unwrap(), &c).unwrap();
        prop_assert!((inf.lo - fin.lo).abs() <= 1e-10 && (inf.hi - fin.hi).abs() <= 1e-10);
    }

    #[test]
    fn hermitian_support_matches_interval(seed in any::<u64>(), n in 2usize..6, k in 2usize..5) {
        let mut g = SplitMix64::new(seed);
        let k = k.min(n);
        let c = random_c(&mut g, k);
        let ambient = random_ambient(&mut g, n, k);
        let s = OperatorModel::new(hermitian(&mut g, n), ambient).unwrap();
        let iv = selfadjoint_range(&s, &c).unwrap();
        let h0 = support_value(&s, &c, 0.0).unwrap();
        let hpi = support_value(&s, &c, std::f64::consts::PI).unwrap();
        prop_assert!((h0 - iv.hi).abs() <= 1e-10 * (1.0 + h0.abs()));
        prop_assert!((hpi + iv.lo).abs() <= 1e-10 * (1.0 + hpi.abs()));
    }
}

#[test]
fn scalar_operator_gives_point() {
    let a = OperatorModel::finite(ComplexMatrix::identity(3).scale(c64(1.0, 2.0))).unwrap();
    let region = boundary(&a, &cv(&[2.0, 1.0]), GRID).unwrap();
    assert!(region.is_point());
    assert!(contains(&region, c64(3.0, 6.0), 1e-9));
}

#[test]
fn finite_ambient_below_k_is_rejected() {
    let a = OperatorModel::finite(ComplexMatrix::identity(2)).unwrap();
    assert!(boundary(&a, &cv(&[3.0, 2.0, 1.0]), GRID).is_err());
}
