mod common;

use common::norm;
use milnor_core::germ::RankTolerance;
use milnor_core::sampler::*;

fn cfg() -> SamplerConfig {
    SamplerConfig::default()
}

fn half() -> Radii {
    Radii::from_epsilon(0.5)
}

#[test]
fn linear_fiber_is_a_segment() {
    let f = common::linear_3_2();
    let c = sample_fiber(&f, 2, &[0.02, 0.01], &half(), 300, 1, &cfg()).unwrap();
    assert_eq!(c.len(), 300);
    for p in c.points() {
        assert!((p[0] - 0.02).abs() <= 1e-16 && (p[1] - 0.01).abs() <= 1e-16);
        assert!(norm(p) <= 0.5);
    }
}

#[test]
fn zw_fiber_matches_parametrisation() {
    let f = common::zw();
    let c = sample_fiber(&f, 2, &[0.01, 0.0], &half(), 2000, 3, &cfg()).unwrap();
    assert!(c.residuals.equations < 1e-10);
    let (mut lo, mut hi) = (f64::MAX, 0.0f64);
    for p in c.points() {
        // z = a + ib, w = c + id with zw = 0.01: |z||w| = 0.01, arg z = -arg w.
        let (z, w) = (p[0].hypot(p[1]), p[2].hypot(p[3]));
        assert!((z * w - 0.01).abs() < 1e-10);
        assert!((p[1].atan2(p[0]) + p[3].atan2(p[2])).sin().abs() < 1e-8);
        lo = lo.min(z);
        hi = hi.max(z);
    }
    // |z| ranges over [0.0200..., 0.4998...] on the ball of radius 0.5.
    let zmin = ((0.25 - (0.0625f64 - 4e-4).sqrt()) / 2.0).sqrt();
    assert!(lo >= zmin * (1.0 - 1e-9) && lo < 0.03, "lo {lo}");
    assert!(hi <= 0.5 && hi > 0.45, "hi {hi}");
}

#[test]
fn zero_value_is_rejected() {
    let f = common::linear_3_2();
    let e = sample_fiber(&f, 1, &[0.0], &half(), 10, 1, &cfg()).unwrap_err();
    assert!(matches!(e, SampleError::RegularValue { .. }));
    let e = sample_fiber(&f, 1, &[1.0], &half(), 10, 1, &cfg()).unwrap_err();
    assert!(matches!(e, SampleError::RegularValue { .. }));
}

#[test]
fn linear_boundary_circle_and_point_pair() {
    let f = common::linear_3_2();
    let c = sample_boundary(&f, 1, &[0.02], &half(), 200, 5, &cfg()).unwrap();
    for p in c.points() {
        assert!((p[0] - 0.02).abs() < 1e-10);
        assert!((p[1].hypot(p[2]) - (0.25f64 - 4e-4).sqrt()).abs() < 1e-9);
    }
    let c = sample_boundary(&f, 2, &[0.02, 0.01], &half(), 200, 5, &cfg()).unwrap();
    assert_eq!(c.len(), 2);
    assert!(c.stats.saturated);
    let root = (0.25f64 - 4e-4 - 1e-4).sqrt();
    let mut zs: Vec<f64> = c.points().map(|p| p[2]).collect();
    zs.sort_by(f64::total_cmp);
    assert!((zs[0] + root).abs() < 1e-9 && (zs[1] - root).abs() < 1e-9);

    let empty = sample_boundary(&f, 1, &[0.02], &half(), 0, 5, &cfg()).unwrap();
    assert!(empty.is_empty());
}

#[test]
fn links() {
    let f = common::linear_3_2();
    let c = sample_link(&f, 1, &half(), 200, 9, &cfg()).unwrap();
    assert!(c.points().all(|p| p[0].abs() < 1e-10 && (norm(p) - 0.5).abs() < 1e-10));
    assert!(c.singular.is_empty());

    let c = sample_link(&common::zw(), 2, &half(), 600, 9, &cfg()).unwrap();
    let (mut on_z, mut on_w) = (0, 0);
    for p in c.points() {
        let (z, w) = (p[0].hypot(p[1]), p[2].hypot(p[3]));
        assert!(z.min(w) < 1e-9, "{p:?}");
        if z < 1e-9 {
            on_z += 1
        } else {
            on_w += 1
        }
    }
    assert!(on_z > 100 && on_w > 100);

    let c = sample_link(&common::definite(), 1, &half(), 50, 9, &cfg()).unwrap();
    assert!(c.is_empty());
}

#[test]
fn link_flags_singular_points() {
    // V(y^2) ∩ S²: every point has dy² = 0.
    let c = sample_link(&common::nontame(), 2, &half(), 50, 2, &cfg()).unwrap_or_else(|e| panic!("{e}"));
    assert!(!c.is_empty());
    assert_eq!(c.singular.len(), c.len());
}

#[test]
fn sampling_is_deterministic_across_thread_counts() {
    let f = common::zw();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_boundary(&f, 1, &[0.025], &half(), 500, 77, &cfg()).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.to_binary(), b.to_binary());
    let c = sample_boundary(&f, 1, &[0.025], &half(), 500, 78, &cfg()).unwrap();
    assert_ne!(a.coords, c.coords);
}

#[test]
fn residual_contract_and_stage_coherence() {
    let f = common::isolated_odd();
    let y = [0.02, -0.015];
    let c = sample_fiber(&f, 2, &y, &half(), 300, 4, &cfg()).unwrap();
    for p in c.points() {
        let v = f.evaluate(p).unwrap();
        assert!((v[0] - y[0]).abs() < 1e-10 && (v[1] - y[1]).abs() < 1e-10);
        let v1 = f.stage(1).unwrap().f_i.evaluate(p).unwrap();
        assert!((v1[0] - y[0]).abs() < 1e-10);
    }
    let b = sample_boundary(&f, 1, &y[..1], &half(), 300, 4, &cfg()).unwrap();
    assert!(b.residuals.sphere < 1e-10);
    assert!(b.points().all(|p| (norm(p) - 0.5).abs() < 1e-10));
}

#[test]
fn file_round_trip_of_a_real_cloud() {
    let c = sample_boundary(&common::zw(), 1, &[0.025], &half(), 100, 1, &cfg()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for name in ["c.mpcl", "c.csv"] {
        let path = dir.path().join(name);
        c.save(&path).unwrap();
        assert_eq!(PointCloud::load(&path).unwrap(), c);
    }
}

#[test]
fn pages_of_linear_4_3() {
    let f = common::linear_4_3();
    let r = half();
    let mut prev: Option<PointCloud> = None;
    for j in 0..8 {
        let a = j as f64 * std::f64::consts::TAU / 8.0;
        let theta = [a.cos(), a.sin()];
        let page = sample_openbook_page(&f, 1, &[r.eta], &theta, &r, 200, 3, &cfg()).unwrap();
        for p in page.cloud.points() {
            assert!((p[0] - r.eta).abs() < 1e-10);
            let cross = p[1] * theta[1] - p[2] * theta[0];
            assert!(cross.abs() < 1e-10);
            assert!(p[1] * theta[0] + p[2] * theta[1] >= r.tau);
        }
        if let Some(q) = &prev {
            assert_ne!(q.coords, page.cloud.coords);
        }
        prev = Some(page.cloud);
    }
    let e = sample_openbook_page(&f, 1, &[r.eta], &[1.0, 1.0], &r, 10, 3, &cfg()).unwrap_err();
    assert!(matches!(e, SampleError::PageDirection { .. }));
    let e = sample_openbook_page(&f, 3, &[r.eta, 0.0, 0.0], &[1.0], &r, 10, 3, &cfg()).unwrap_err();
    assert!(matches!(e, SampleError::Parameter(_)));
}

#[test]
fn sign_pages_when_one_component_remains() {
    let f = common::linear_3_2();
    let r = half();
    for s in [1.0, -1.0] {
        let page = sample_openbook_page(&f, 1, &[r.eta], &[s], &r, 100, 3, &cfg()).unwrap();
        assert!(page.cloud.points().all(|p| s * p[1] >= r.tau));
    }
}

#[test]
fn radius_choice() {
    let tol = RankTolerance::Relative(1e-6);
    let rep = choose_radii(&common::linear_3_2(), 1, 1000, 1, tol).unwrap();
    assert_eq!(rep.radii.epsilon, 0.5);
    assert_eq!(rep.radii.eta, 0.025);
    // On the circle x = ±η the smallest singular value of [df; dg] is 2|z|,
    // which vanishes at z = 0; at stage 2 the two points have |z| ≈ ε.
    let z_min = rep.probes[0].min_sv / 2.0;
    assert!(z_min > 0.0 && z_min < 0.05);
    let rep = choose_radii(&common::linear_3_2(), 2, 1000, 1, tol).unwrap();
    assert_eq!(rep.radii.epsilon, 0.5);
    assert!(rep.probes[0].min_sv > 0.9, "{:?}", rep.probes[0]);

    let rep = choose_radii(&common::zw(), 2, 1000, 1, tol).unwrap();
    assert!(rep.radii.epsilon <= 0.5);

    let e = choose_radii(&common::diagonal(), 1, 1000, 1, tol).unwrap_err();
    assert!(matches!(e, SampleError::NoRadiusFound(_)), "{e}");
    assert!(choose_radii(&common::linear_3_2(), 1, 999, 1, RankTolerance::default()).is_err());
}

#[test]
fn probe_values_have_norm_eta() {
    for stage in 1..4 {
        let v = probe_values(stage, 0.025, 3);
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|y| y.len() == stage && (norm(y) - 0.025).abs() < 1e-15));
    }
}

#[test]
fn tameness() {
    let r = half();
    for f in [common::linear_3_2(), common::zw(), common::isolated_odd()] {
        let rep = tameness_evidence(&f, &r, 200, 5).unwrap();
        assert!(rep.hits.is_empty(), "{:?}", rep.hits.first());
        assert!(rep.inclusions.iter().all(|c| c.violations == 0));
    }
    let rep = tameness_evidence(&common::nontame(), &r, 200, 5).unwrap();
    assert!(rep.hits.len() > 10);
    assert!(rep.min_hit_norm.unwrap() >= 0.05);
    for h in &rep.hits {
        assert!(h.point[1].abs() < 1e-8);
    }
    assert!(rep.inclusions.iter().any(|c| c.checked > 0));
    assert!(rep.inclusions.iter().all(|c| c.violations == 0), "{:?}", rep.inclusions);
    assert!(tameness_evidence(&common::linear_3_2(), &r, 99, 5).is_err());
}
