use nilhom_core::algebra::{examples, LieAlgebra};
use nilhom_core::decompose::{decompose_automorphism, realify, rotation, ClosureKind, RealifyOptions};
use nilhom_core::grading::split_derivation;
use nilhom_core::group::NilpotentGroup;
use nilhom_core::metric::{sup_distance, Distance, HomogeneousBall, HomogeneousDistance};
use nilhom_core::spectral::{self, generalized_eigenspaces, SpectralTolerance};
use nilhom_core::{Matrix, RealMatrix};

fn plane() -> NilpotentGroup {
    NilpotentGroup::new(LieAlgebra::abelian(2)).unwrap()
}

fn quick() -> RealifyOptions {
    RealifyOptions { grid: 8, check_samples: 40, bilipschitz_samples: 400, ..RealifyOptions::default() }
}

#[test]
fn realify_euclidean_conformal() {
    let d = HomogeneousDistance::new(plane(), RealMatrix::identity(2), HomogeneousBall::euclidean(2)).unwrap();
    let delta = rotation(core::f64::consts::FRAC_PI_4).scale(&2.0);
    let r = realify(&d, &delta, 2.0, &quick()).unwrap();
    assert_eq!(r.closure, ClosureKind::Finite { order: 8 });
    assert!(r.decomposition.a.distance_to(&RealMatrix::identity(2)) < 1e-12);
    for (p, q) in [([0.1, 0.5], [-0.3, 0.2]), ([1.0, 0.0], [0.0, 1.0])] {
        let a = d.distance(&p, &q).unwrap();
        assert!((r.distance.distance(&p, &q).unwrap() - a).abs() < 1e-10);
    }
}

#[test]
fn realify_box_ball() {
    let a = Matrix::from_row_slice(2, 2, &[2.0, -1.0, 1.0, 2.0]);
    let d = HomogeneousDistance::new(plane(), a.clone(), HomogeneousBall::unit_box(2)).unwrap();
    let e = core::f64::consts::E;
    let delta = spectral::expm(&a).unwrap();
    let r = realify(&d, &delta, e, &quick()).unwrap();
    assert!(r.decomposition.a.distance_to(&Matrix::diagonal(&[2.0, 2.0])) < 1e-9);
    assert!(r.decomposition.k.distance_to(&rotation(1.0)) < 1e-9);
    assert!(r.spectrum_min >= 1.0 - 1e-8);
    assert!(r.dilation_residual <= r.grid_error.max(1e-8), "{} vs {}", r.dilation_residual, r.grid_error);
    assert!(r.bilipschitz.validated, "{:?}", r.bilipschitz);
}

#[test]
fn decompose_then_split_has_no_imaginary_part() {
    let g = examples::heisenberg();
    let r = rotation(0.7);
    let phi = Matrix::from_fn(3, 3, |i, j| match (i, j) {
        (0..=1, 0..=1) => 3.0 * r[(i, j)],
        (2, 2) => 9.0,
        _ => 0.0,
    });
    let dec = decompose_automorphism(&g, &phi, 3.0).unwrap();
    let spec = generalized_eigenspaces(&dec.a, SpectralTolerance::default()).unwrap();
    let split = split_derivation(&g, &dec.a, &spec).unwrap();
    assert!(split.imaginary.max_abs() < 1e-9);
    assert!(split.real.add(&split.nilpotent).distance_to(&dec.a) < 1e-9);
}

#[test]
fn sup_distance_is_periodic_in_scale() {
    let a = Matrix::from_row_slice(2, 2, &[2.0, -1.0, 1.0, 2.0]);
    let d = HomogeneousDistance::new(plane(), a.clone(), HomogeneousBall::unit_box(2)).unwrap();
    let s = sup_distance(d.clone(), &a, 2.0, 12).unwrap();
    for (p, q) in [([0.2, 0.1], [-0.4, 0.3]), ([1.0, -1.0], [0.5, 0.5])] {
        let direct = d.distance(&p, &q).unwrap();
        assert!((s.distance(&p, &q).unwrap() - direct).abs() < 1e-10 * direct.max(1.0));
        let dp = s.flow().dilate(2.0, &p);
        let dq = s.flow().dilate(2.0, &q);
        assert!((s.distance(&dp, &dq).unwrap() - 2.0 * direct).abs() < 1e-9 * direct.max(1.0));
    }
}
