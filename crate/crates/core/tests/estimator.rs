mod common;

use milnor_core::estimator::{
    estimate_cloud, estimate_stage, find_plateau, rips_chi, scan_scales, CloudEstimateOptions,
    Confidence, RipsOptions, ScanOptions, StageParams,
};
use milnor_core::sampler::{Radii, TargetKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// χ of the Rips complex by enumerating every vertex subset.
fn brute_chi(pts: &[Vec<f64>], r: f64) -> i64 {
    let n = pts.len();
    let r2 = r * r;
    let adj: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .filter(|&j| pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>() <= r2)
                .fold(0u32, |m, j| m | 1 << j)
        })
        .collect();
    let mut chi = 0;
    for s in 1u32..(1 << n) {
        let clique = (0..n).filter(|&i| s >> i & 1 == 1).all(|i| s & !(1 << i) & !adj[i] == 0);
        if clique {
            chi += if s.count_ones() % 2 == 1 { 1 } else { -1 };
        }
    }
    chi
}

fn flat(pts: &[Vec<f64>]) -> Vec<f64> {
    pts.iter().flatten().copied().collect()
}

#[test]
fn brute_force_oracle_500_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..500 {
        let n = rng.random_range(1..=12);
        let dim = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> =
            (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let r = rng.random_range(0.05..2.0);
        let fast = rips_chi(&flat(&pts), dim, r, &RipsOptions::default()).unwrap();
        assert_eq!(fast.chi, brute_chi(&pts, r), "trial {trial}: {pts:?} r={r}");
        let raw = RipsOptions { reduce: false, ..RipsOptions::default() };
        assert_eq!(rips_chi(&flat(&pts), dim, r, &raw).unwrap().chi, fast.chi);
    }
}

proptest! {
    #[test]
    fn reduction_preserves_chi(
        pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 1..12),
        r in 0.05f64..1.5,
    ) {
        let c = flat(&pts);
        let red = rips_chi(&c, 2, r, &RipsOptions::default()).unwrap();
        prop_assert_eq!(red.chi, brute_chi(&pts, r));
        let raw = rips_chi(&c, 2, r, &RipsOptions { reduce: false, ..RipsOptions::default() }).unwrap();
        prop_assert_eq!(raw.counts.first().copied(), Some(pts.len() as u64));
        prop_assert_eq!(raw.chi, red.chi);
    }

    #[test]
    fn edges_grow_with_scale(
        pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..30),
        a in 0.05f64..1.0,
        b in 0.05f64..1.0,
    ) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let c = flat(&pts);
        let s = rips_chi(&c, 3, lo, &RipsOptions::default()).unwrap();
        let t = rips_chi(&c, 3, hi, &RipsOptions::default()).unwrap();
        prop_assert!(s.raw_edges <= t.raw_edges);
        prop_assert!(s.components >= t.components);
    }
}

fn circle(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .flat_map(|_| {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            [t.cos(), t.sin()]
        })
        .collect()
}

fn sphere2(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(3 * n);
    while out.len() < 3 * n {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r > 0.1 && r <= 1.0 {
            out.extend(v.iter().map(|a| a / r));
        }
    }
    out
}

#[test]
fn circle_and_two_sphere() {
    let opts = CloudEstimateOptions::default();
    let c = estimate_cloud(&circle(2000, 1), 2, 1.0, &opts).unwrap();
    assert_eq!((c.chi, c.confidence), (0, Confidence::Stable), "{:?}", c.notes);
    let s = estimate_cloud(&sphere2(4000, 2), 3, 1.0, &opts).unwrap();
    assert_eq!((s.chi, s.confidence), (2, Confidence::Stable), "{:?}", s.notes);
}

#[test]
fn few_random_points_are_unstable() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
    let est = estimate_cloud(&pts, 3, 1.0, &CloudEstimateOptions::default()).unwrap();
    assert_eq!(est.confidence, Confidence::Unstable);
}

#[test]
fn empty_cloud_is_zero() {
    let est = estimate_cloud(&[], 3, 1.0, &CloudEstimateOptions::default()).unwrap();
    assert_eq!(est.chi, 0);
    assert!(!est.notes.is_empty());
}

#[test]
fn scan_stops_after_budget() {
    let pts = circle(300, 4);
    let scales: Vec<f64> = (1..=20).map(|i| 0.02 * i as f64).collect();
    let mut opts = ScanOptions::default();
    opts.rips.max_edges = 3000;
    let est = scan_scales(&pts, 2, &scales, &opts).unwrap();
    let first_bad = est.scan.iter().position(|s| !s.valid).unwrap();
    assert!(est.scan[first_bad..].iter().all(|s| !s.valid));
    assert_eq!(find_plateau(&est.scan), est.plateau);
}

#[test]
fn linear_germ_boundary_stages() {
    let f = common::linear_3_2();
    let params = StageParams::new(Radii::from_epsilon(0.5), 7);
    let b1 = estimate_stage(&f, 1, TargetKind::Boundary, &params).unwrap();
    assert_eq!((b1.estimate.chi, b1.manifold_dim), (0, 1));
    assert!(b1.estimate.is_stable());
    let b2 = estimate_stage(&f, 2, TargetKind::Boundary, &params).unwrap();
    assert_eq!((b2.estimate.chi, b2.cloud_points), (2, 2));
    assert!(b2.estimate.is_stable());
    let f1 = estimate_stage(&f, 1, TargetKind::Fiber, &params).unwrap();
    assert_eq!(f1.estimate.chi, 1);
    assert!(f1.estimate.is_stable());
}

#[test]
fn zw_link_has_two_circles() {
    let f = common::zw();
    let params = StageParams::new(Radii::from_epsilon(0.5), 7);
    let l2 = estimate_stage(&f, 2, TargetKind::Link, &params).unwrap();
    assert_eq!(l2.estimate.chi, 0);
    assert_eq!(l2.estimate.plateau_components(), Some(2));
    assert!(l2.estimate.is_stable());
}
