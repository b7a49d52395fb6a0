mod common;

use common::{blob, floyd_warshall_knn, mds_power_iteration, smooth_suite};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapefilter::embed::{
    classical_mds, default_k, distance_matrix, graph_distances, isomap_embed, isomap_from_distances,
};
use shapefilter::geometry::Vec2;
use shapefilter::ingest::{canonical_seed, resample_contour};
use shapefilter::pipeline::{filter_sequence, generate_synthetic_sequence, EllipseState};
use shapefilter::srv::{align_path, srv_transform, ShapePath};
use shapefilter::{Contour, Error, FilterConfig, Scheme};

fn euclidean(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|q| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                .collect()
        })
        .collect()
}

fn pairwise(coords: &[Vec2]) -> Vec<Vec<f64>> {
    coords.iter().map(|p| coords.iter().map(|q| (*p - *q).norm()).collect()).collect()
}

fn cloud(seed: u64, n: usize, dims: &[f64]) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| dims.iter().map(|s| s * rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn random_path(seed: u64, frames: usize) -> ShapePath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = (0..frames)
        .map(|_| {
            let h: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let c = blob(Vec2::new(0.0, 0.0), 8.0, &h, 600);
            srv_transform(&canonical_seed(&resample_contour(&c, 64).unwrap())).unwrap()
        })
        .collect();
    align_path(&ShapePath::with_unit_times(shapes).unwrap()).unwrap().0
}

#[test]
fn mds_agrees_with_power_iteration() {
    for seed in 0..10 {
        // a planar cloud with well separated principal axes
        let d = euclidean(&cloud(seed, 15, &[5.0, 2.0]));
        let fast = pairwise(&classical_mds(&d));
        let slow: Vec<Vec2> = mds_power_iteration(&d).iter().map(|p| Vec2::new(p[0], p[1])).collect();
        let slow = pairwise(&slow);
        for i in 0..15 {
            for j in 0..15 {
                assert!((fast[i][j] - slow[i][j]).abs() < 1e-6);
                assert!((fast[i][j] - d[i][j]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn complete_graph_isomap_is_classical_mds() {
    let path = random_path(3, 8);
    let d = distance_matrix(&path).unwrap();
    let e = isomap_embed(&path, 7).unwrap();
    for (a, b) in e.coords.iter().zip(classical_mds(&d)) {
        assert!((*a - b).norm() < 1e-9);
    }
}

#[test]
fn embedding_is_centred() {
    for seed in 0..5 {
        let e = isomap_embed(&random_path(seed, 12), 4).unwrap();
        let mut sum = Vec2::new(0.0, 0.0);
        for p in &e.coords {
            sum += *p;
        }
        assert!(sum.norm() / 12.0 < 1e-9);
    }
}

fn ellipse_contour(e: &EllipseState) -> Contour {
    let pts = (0..720)
        .map(|i| {
            let phi = std::f64::consts::TAU * i as f64 / 720.0;
            let local = Vec2::new(e.semi_major * phi.cos(), e.semi_minor * phi.sin());
            e.center + local.rotate(e.angle)
        })
        .collect();
    canonical_seed(&resample_contour(&Contour::new(pts), 100).unwrap())
}

#[test]
fn smooth_paths_embed_with_low_stress() {
    for spec in smooth_suite() {
        let shapes = spec.trajectory.iter().map(|e| srv_transform(&ellipse_contour(e)).unwrap()).collect();
        let (path, _) = align_path(&ShapePath::with_unit_times(shapes).unwrap()).unwrap();
        let e = isomap_embed(&path, default_k(path.len())).unwrap();
        assert!(e.stress <= 0.3, "seed {}: stress {}", spec.seed, e.stress);
    }
}

#[test]
fn filtered_pixel_paths_embed() {
    // lattice jitter survives filtering, so only a loose bound applies here
    let config = FilterConfig { scheme: Scheme::Unity, ..FilterConfig::default() };
    for spec in smooth_suite() {
        let seq = generate_synthetic_sequence(&spec).unwrap();
        let out = filter_sequence(&seq.masks, &config).unwrap();
        let shapes = out.contours.iter().map(|c| srv_transform(c).unwrap()).collect();
        let (path, _) = align_path(&ShapePath::with_unit_times(shapes).unwrap()).unwrap();
        let e = isomap_embed(&path, default_k(path.len())).unwrap();
        assert!(e.stress < 0.5, "seed {}: stress {}", spec.seed, e.stress);
    }
}

proptest! {
    #[test]
    fn graph_distances_match_floyd_warshall(seed in any::<u64>(), n in 3usize..16, k in 1usize..8) {
        let k = k.min(n - 1);
        let d = euclidean(&cloud(seed, n, &[4.0, 3.0, 1.0]));
        let oracle = floyd_warshall_knn(&d, k);
        let connected = oracle.iter().flatten().all(|v| v.is_finite());
        match graph_distances(&d, k) {
            Ok(g) => {
                prop_assert!(connected);
                for i in 0..n {
                    for j in 0..n {
                        prop_assert!((g[i][j] - oracle[i][j]).abs() <= 1e-12 * (1.0 + oracle[i][j]));
                    }
                }
            }
            Err(Error::DisconnectedGraph { .. }) => prop_assert!(!connected),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn embedding_is_deterministic(seed in any::<u64>(), n in 4usize..12) {
        let d = euclidean(&cloud(seed, n, &[4.0, 2.0, 1.0]));
        let k = default_k(n).max(2);
        prop_assume!(floyd_warshall_knn(&d, k).iter().flatten().all(|v| v.is_finite()));
        prop_assert_eq!(isomap_from_distances(&d, k).unwrap(), isomap_from_distances(&d, k).unwrap());
    }
}
