//! Start instances, path tracking and the invariants monodromy relies on.

use proptest::prelude::*;
use waring_core::monodromy::{canonicalize, classify, generate_start_instance, same_decomposition};
use waring_core::polyspace::forward_map;
use waring_core::{
    run_monodromy, track_segment, Complex64, ComplexRing, DecompositionPoint, MonodromyOptions, PathStatus,
    ProblemSpec, RealityTag, TrackOptions, WaringSystem,
};

fn perfect_cases() -> Vec<(ProblemSpec, usize)> {
    vec![
        (ProblemSpec::new(2, vec![2, 2]).unwrap(), 3),
        (ProblemSpec::new(2, vec![2, 3]).unwrap(), 4),
        (ProblemSpec::new(2, vec![3, 3, 4]).unwrap(), 7),
        (ProblemSpec::new(2, vec![2, 3, 3, 3]).unwrap(), 6),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn start_instances_solve_their_system(case in 0usize..4, seed in any::<u64>()) {
        let (spec, k) = &perfect_cases()[case];
        let (point, params) = generate_start_instance(spec, *k, seed).unwrap();
        let sys = WaringSystem::new(spec.clone(), *k, params).unwrap();
        prop_assert!(sys.residual_norm(&point).unwrap() < 1e-12);
    }

    #[test]
    fn canonical_form_is_idempotent_and_order_free(
        k in 1usize..7,
        bs in 2usize..6,
        re in prop::collection::vec(-2.0..2.0f64, 36),
        im in prop::collection::vec(-1.0..1.0f64, 36),
        shuffle in any::<prop::sample::Index>(),
        real in any::<bool>(),
    ) {
        let coords: Vec<Complex64> = (0..k * bs)
            .map(|i| Complex64::new(re[i], if real { 0.0 } else { im[i] }))
            .collect();
        let p = DecompositionPoint::new(bs, coords).unwrap();
        let mut order: Vec<usize> = (0..k).collect();
        order.rotate_left(shuffle.index(k));
        order.swap(0, k - 1);
        let q = p.permuted(&order);
        let cp = canonicalize(&p, 1e-6);
        prop_assert_eq!(&canonicalize(&cp, 1e-6), &cp);
        prop_assert_eq!(&canonicalize(&q, 1e-6), &cp);
        prop_assert!(same_decomposition(&p, &q, 1e-6));
        prop_assert!(same_decomposition(&cp, &p, 1e-6));
    }

    #[test]
    fn residual_commutes_with_conjugation(case in 0usize..4, seed in any::<u64>(), twist in -1.0..1.0f64) {
        let (spec, k) = &perfect_cases()[case];
        let (point, params) = generate_start_instance(spec, *k, seed).unwrap();
        let z: Vec<Complex64> = point.coords().iter().enumerate()
            .map(|(i, c)| c + Complex64::new(0.0, twist * ((i % 5) as f64 - 2.0) * 0.1))
            .collect();
        let z = DecompositionPoint::new(spec.block_size(), z).unwrap();
        let sys = WaringSystem::new(spec.clone(), *k, params.iter().map(|c| c * Complex64::new(1.0, 0.3)).collect()).unwrap();
        let a: Vec<Complex64> = sys.residual(&z).unwrap().iter().map(|c| c.conj()).collect();
        let b = sys.conj().residual(&z.conj()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
        }
    }
}

#[test]
fn identity_homotopy_keeps_the_start_point() {
    let mut checked = 0;
    for seed in 0..5u64 {
        for (spec, k) in perfect_cases() {
            let (point, params) = generate_start_instance(&spec, k, 1000 + seed).unwrap();
            let path = track_segment(&spec, k, &params, &params, &point, &TrackOptions::default()).unwrap();
            assert_eq!(path.status, PathStatus::Success);
            let dev = path
                .endpoint
                .coords()
                .iter()
                .zip(point.coords())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-10, "{spec} seed {seed}: moved by {dev:e}");
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
}

#[test]
fn tracked_endpoints_solve_the_target_system() {
    let mut successes = 0;
    for (spec, k) in perfect_cases() {
        let (point, params) = generate_start_instance(&spec, k, 1).unwrap();
        let (_, target) = generate_start_instance(&spec, k, 2).unwrap();
        // move off the real line so the path avoids the real discriminant
        let target: Vec<Complex64> = target.iter().map(|c| c * Complex64::new(0.8, 0.6)).collect();
        let path = track_segment(&spec, k, &params, &target, &point, &TrackOptions::default()).unwrap();
        if path.is_success() {
            let sys = WaringSystem::new(spec.clone(), k, target).unwrap();
            assert!(sys.residual_norm(&path.endpoint).unwrap() < 1e-9);
            successes += 1;
        }
    }
    // a single straight path may end at infinity; most must not
    assert!(successes >= 3, "only {successes} of 4 paths reached the target");
}

#[test]
fn non_square_systems_are_rejected() {
    let spec = ProblemSpec::new(2, vec![3, 3]).unwrap();
    let pts: Vec<f64> = (0..12).map(|i| 0.1 * i as f64).collect();
    let p = DecompositionPoint::from_real(4, &pts).unwrap();
    let f = forward_map(&ComplexRing, &spec, p.coords()).unwrap();
    assert!(track_segment(&spec, 3, &f, &f, &p, &TrackOptions::default()).is_err());
    assert!(run_monodromy(&spec, 3, 0, &MonodromyOptions::default()).is_err());
}

#[test]
fn unique_cases_have_one_real_class() {
    for (spec, k) in perfect_cases().into_iter().take(2) {
        for seed in 0..5 {
            let report = run_monodromy(&spec, k, seed, &MonodromyOptions::default()).unwrap();
            assert_eq!(report.count_complex, 1, "{spec} seed {seed}");
            assert_eq!(report.count_real, 1);
            assert!(report.saturated);
            assert!(report.is_conjugation_closed(1e-6));
        }
    }
}

#[test]
fn two_decompositions_close_under_conjugation() {
    let spec = ProblemSpec::new(2, vec![2, 3, 3, 3]).unwrap();
    for seed in [0, 2] {
        let report = run_monodromy(&spec, 6, seed, &MonodromyOptions::default()).unwrap();
        assert_eq!(report.count_complex, 2);
        assert!(report.saturated);
        assert!(report.is_conjugation_closed(1e-6));
        for c in &report.classes {
            let (tag, real, pairs) = classify(&c.point, 1e-6, 1e-6);
            assert_eq!((tag, real, pairs), (c.tag, c.real_blocks, c.conjugate_block_pairs));
            if tag == RealityTag::SelfConjugate {
                assert_eq!((real, pairs), (4, 1));
            }
        }
    }
}
