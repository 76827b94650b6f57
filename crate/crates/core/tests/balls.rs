use nilhom_core::algebra::{examples, LieAlgebra};
use nilhom_core::group::NilpotentGroup;
use nilhom_core::metric::{
    box_ball_certificate, build_distance, verify_a_convexity, verify_axioms, Distance, HomogeneousBall,
    HomogeneousDistance,
};
use nilhom_core::{Matrix, RealMatrix};
use proptest::prelude::*;

fn plane() -> NilpotentGroup {
    NilpotentGroup::new(LieAlgebra::abelian(2)).unwrap()
}

fn spiral() -> RealMatrix {
    Matrix::from_row_slice(2, 2, &[2.0, -1.0, 1.0, 2.0])
}

#[test]
fn box_ball_is_convex_for_the_spiral() {
    assert!(box_ball_certificate(100_000).passed);
    let r = verify_a_convexity(&HomogeneousBall::unit_box(2), &plane(), &spiral(), 20_000, 3, 1e-9).unwrap();
    assert_eq!(r.violations, 0, "{r:?}");
}

#[test]
fn box_ball_fails_for_a_weight_one_shear() {
    let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let r = verify_a_convexity(&HomogeneousBall::unit_box(2), &plane(), &a, 20_000, 3, 1e-9).unwrap();
    assert!(r.violations > 0);
    assert!(!r.examples.is_empty());
}

#[test]
fn euclidean_distance_passes_exactly() {
    let d = HomogeneousDistance::new(plane(), RealMatrix::identity(2), HomogeneousBall::euclidean(2)).unwrap();
    let r = verify_axioms(&d, Some(d.flow()), 2_000, 9, 3.0).unwrap();
    assert!(r.passes(1e-10), "{r:?}");
}

#[test]
fn corrupted_cap_breaks_the_triangle_inequality() {
    let g = NilpotentGroup::new(examples::heisenberg()).unwrap();
    let a = Matrix::diagonal(&[1.0, 1.0, 2.0]);
    let (d, built) = build_distance(&g, &a).unwrap();
    let good = verify_axioms(&d, Some(d.flow()), 2_000, 4, 1.0).unwrap();
    assert!(good.triangle <= 1e-8, "{good:?}");
    let bad = HomogeneousDistance::new(g, a, built.ball.scale_caps(1e-6)).unwrap();
    let report = verify_axioms(&bad, Some(bad.flow()), 2_000, 4, 1.0).unwrap();
    assert!(report.triangle > 1e-3, "{report:?}");
}

#[test]
fn conformal_gauge_is_a_vector_norm() {
    let a = Matrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
    let (d, _) = build_distance(&plane(), &a).unwrap();
    for (x, c) in [([0.3, -0.7], 3.5), ([2.0, 1.0], 0.2), ([-1.0, 0.0], 17.0)] {
        let n = d.gauge(&x).unwrap();
        let scaled = d.gauge(&[c * x[0], c * x[1]]).unwrap();
        assert!((scaled - c * n).abs() <= 1e-9 * c * n);
    }
}

#[test]
fn built_balls_are_compact_and_symmetric() {
    for (g, a) in [
        (examples::heisenberg(), Matrix::diagonal(&[1.0, 1.0, 2.0])),
        (examples::engel(), Matrix::diagonal(&[1.0, 1.0, 2.0, 3.0])),
    ] {
        let g = NilpotentGroup::new(g).unwrap();
        let (d, built) = build_distance(&g, &a).unwrap();
        let bbox = built.ball.bounding_box();
        assert!(bbox.iter().all(|w| w.is_finite() && *w > 0.0));
        let x: Vec<f64> = bbox.iter().map(|w| 0.3 * w).collect();
        let minus: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((d.gauge(&x).unwrap() - d.gauge(&minus).unwrap()).abs() < 1e-12);
    }
}

fn heisenberg_distance() -> HomogeneousDistance {
    let g = NilpotentGroup::new(examples::heisenberg()).unwrap();
    build_distance(&g, &Matrix::diagonal(&[1.0, 1.0, 2.0])).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn built_gauge_is_homogeneous(x in prop::array::uniform3(-3.0f64..3.0), l in 0.1f64..10.0) {
        let d = heisenberg_distance();
        prop_assume!(x.iter().any(|v| v.abs() > 1e-6));
        let n = d.gauge(&x).unwrap();
        let nl = d.gauge(&d.flow().dilate(l, &x)).unwrap();
        prop_assert!((nl - l * n).abs() <= 1e-6 * l * n);
    }

    #[test]
    fn membership_is_monotone_in_scale(x in prop::array::uniform3(-3.0f64..3.0)) {
        let d = heisenberg_distance();
        let mut inside = false;
        for i in 0..200 {
            let mu = 10f64.powf(-2.0 + 4.0 * i as f64 / 199.0);
            let now = d.ball().contains(&d.flow().dilate(1.0 / mu, &x));
            prop_assert!(!(inside && !now), "left the ball at μ = {mu}");
            inside = now;
        }
    }

    #[test]
    fn distance_is_left_invariant(p in prop::array::uniform3(-2.0f64..2.0), q in prop::array::uniform3(-2.0f64..2.0), z in prop::array::uniform3(-2.0f64..2.0)) {
        let d = heisenberg_distance();
        let g = d.group();
        let a = d.distance(&p, &q).unwrap();
        let b = d.distance(&g.product(&z, &p), &g.product(&z, &q)).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }
}
