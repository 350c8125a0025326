mod common;

use gaussmap::sphere::{parallel_transport_ode, tangent_project};
use gaussmap::structures::{
    FrameStructure, ParallelTransportStructure, QuaternionStructure, TranslationStructure, VVector,
};
use gaussmap::{SpherePoint, TangentVector};
use nalgebra::DVector;
use proptest::prelude::*;

/// Hamilton product on (w, i, j, k) arrays.
fn hamilton(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn arr(v: &DVector<f64>) -> [f64; 4] {
    [v[0], v[1], v[2], v[3]]
}

#[test]
fn quaternion_matches_hamilton_product() {
    let s = QuaternionStructure::new();
    let mut rng = common::rng(21);
    for _ in 0..50 {
        let p = common::random_point(&mut rng, 4);
        let v = common::random_tangent(&mut rng, &p, 1.0);
        let pc = arr(p.coords());
        let conj = [pc[0], -pc[1], -pc[2], -pc[3]];
        let expect = hamilton(conj, arr(v.vec()));
        assert!(expect[0].abs() < 1e-12);
        let got = s.apply(&v).unwrap();
        for k in 0..3 {
            assert!((got.coords()[k] - expect[k + 1]).abs() < 1e-12);
        }
        // invariant field at q is q·(p̄ v)
        let q = common::random_point(&mut rng, 4);
        let field = s.invariant_field(&v, &q).unwrap();
        let oracle = hamilton(arr(q.coords()), expect);
        for (k, o) in oracle.iter().enumerate() {
            assert!((field.vec()[k] - o).abs() < 1e-12);
        }
    }
}

#[test]
fn parallel_invariant_field_is_transport_through_base() {
    let mut rng = common::rng(22);
    let p0 = common::random_point(&mut rng, 5);
    let s = ParallelTransportStructure::new(p0.clone());
    for _ in 0..20 {
        let p = common::point_at_distance(&mut rng, &p0, 1.2);
        let q = common::point_at_distance(&mut rng, &p0, 0.9);
        let x = common::random_tangent(&mut rng, &p, 1.0);
        let at_base = parallel_transport_ode(&p0, &x, 400).unwrap();
        let oracle = parallel_transport_ode(&q, &at_base, 400).unwrap();
        let got = s.invariant_field(&x, &q).unwrap();
        assert!((got.vec() - oracle.vec()).amax() < 1e-9);
    }
}

#[test]
fn parallel_base_coordinates_use_an_orthonormal_basis() {
    let mut rng = common::rng(23);
    let p0 = common::random_point(&mut rng, 4);
    let s = ParallelTransportStructure::new(p0.clone());
    let b = s.basis();
    assert_eq!(b.len(), 3);
    for i in 0..3 {
        assert!(b[i].dot(p0.coords()).abs() < 1e-14);
        for j in 0..3 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((b[i].dot(&b[j]) - expect).abs() < 1e-14);
        }
    }
}

#[test]
fn frame_structure_from_parallel_agrees() {
    let mut rng = common::rng(24);
    let p0 = common::random_point(&mut rng, 4);
    let par = ParallelTransportStructure::new(p0.clone());
    let frame = FrameStructure::from_parallel(&par);
    for _ in 0..20 {
        let p = common::point_at_distance(&mut rng, &p0, 2.0);
        let v = common::random_tangent(&mut rng, &p, 1.0);
        let a = par.apply(&v).unwrap();
        let b = frame.apply(&v).unwrap();
        assert!((a.coords() - b.coords()).amax() < 1e-12);
    }
}

#[test]
fn outside_domain_is_rejected() {
    let p0 = SpherePoint::basis(3, 0);
    let par = ParallelTransportStructure::new(p0.clone());
    let v = TangentVector::zero(p0.antipode());
    assert!(par.apply(&v).is_err());
    assert!(!par.in_domain(&p0.antipode()));
}

fn structures() -> Vec<Box<dyn TranslationStructure>> {
    let p0 = SpherePoint::normalize(DVector::from_column_slice(&[0.3, -0.2, 0.9, 0.1])).unwrap();
    let par = ParallelTransportStructure::new(p0);
    vec![
        Box::new(FrameStructure::from_parallel(&par)),
        Box::new(par),
        Box::new(QuaternionStructure::new()),
    ]
}

proptest! {
    #[test]
    fn round_trip_and_isometry(seed in 0u64..10_000, which in 0usize..3) {
        let s = &structures()[which];
        let mut rng = common::rng(seed);
        let p = common::random_point(&mut rng, 4);
        prop_assume!(s.in_domain(&p) && 1.0 + p.dot(s.reference_point()) > 1e-2);
        let v = common::random_tangent(&mut rng, &p, 2.0);
        let w = common::random_tangent(&mut rng, &p, 2.0);
        let gv = s.apply(&v).unwrap();
        let gw = s.apply(&w).unwrap();
        prop_assert!((gv.dot(&gw) - v.vec().dot(w.vec())).abs() < 1e-10);
        let back = s.unapply(&p, &gv).unwrap();
        prop_assert!((back.vec() - v.vec()).amax() < 1e-10);
        let x = VVector::new(DVector::from_fn(3, |i, _| (seed as f64 + i as f64).sin()));
        let there = s.unapply(&p, &x).unwrap();
        prop_assert!(there.vec().dot(p.coords()).abs() < 1e-10);
        prop_assert!((s.apply(&there).unwrap().coords() - x.coords()).amax() < 1e-10);
    }

    #[test]
    fn invariant_field_is_consistent(seed in 0u64..10_000, which in 0usize..3) {
        let s = &structures()[which];
        let mut rng = common::rng(seed);
        let p = common::random_point(&mut rng, 4);
        let q = common::random_point(&mut rng, 4);
        prop_assume!(1.0 + p.dot(s.reference_point()) > 1e-2 && 1.0 + q.dot(s.reference_point()) > 1e-2);
        let v = tangent_project(&p, &DVector::from_fn(4, |i, _| (seed as f64 * 0.37 + i as f64).cos()));
        let field = s.invariant_field(&v, &q).unwrap();
        prop_assert!((s.apply(&field).unwrap().coords() - s.apply(&v).unwrap().coords()).amax() < 1e-10);
        prop_assert!((field.norm() - v.norm()).abs() < 1e-10);
    }
}
