mod common;

use common::{dist2, random_matrix, rng, same_partition, sse};
use lcd_core::kmeans::kmeans_fit_matrix;
use lcd_core::oracle::{generate, SynthConfig};
use lcd_core::{assign_to_centroids, Init, KMeansConfig, Matrix};
use rand::Rng;

fn blobs(seed: u64, n: usize, d: usize, k: usize) -> Matrix {
    let mut cfg = SynthConfig::new(n, d, k, seed);
    cfg.label_skew = 0.0;
    cfg.separation = 8.0;
    generate(&cfg).unwrap().dataset.vectors().clone()
}

#[test]
fn two_pairs_closed_form() {
    let x = Matrix::from_rows(&[[0.0f32, 0.0], [0.0, 2.0], [30.0, 0.0], [31.0, 0.0]]).unwrap();
    for init in [Init::KMeansPlusPlus, Init::Random] {
        let m = kmeans_fit_matrix(&x, &KMeansConfig::new(2).with_init(init)).unwrap();
        assert!(same_partition(&m.assignment.labels, &[0, 0, 1, 1]));
        // Each point sits half the pair distance from its pair's mean.
        let want = 2.0 * (dist2(x.row(0), x.row(1)) / 4.0) + 2.0 * (dist2(x.row(2), x.row(3)) / 4.0);
        assert!((m.assignment.inertia - want).abs() < 1e-9, "{} vs {want}", m.assignment.inertia);
    }
}

#[test]
fn one_cluster_is_the_total_sse() {
    let x = random_matrix(&mut rng(4), 257, 5, 3.0);
    let d = x.cols();
    let mut mean = vec![0.0f64; d];
    for r in x.iter_rows() {
        for (m, &v) in mean.iter_mut().zip(r) {
            *m += v as f64 / 257.0;
        }
    }
    let want: f64 = x
        .iter_rows()
        .map(|r| r.iter().zip(&mean).map(|(&v, m)| (v as f64 - m).powi(2)).sum::<f64>())
        .sum();
    let m = kmeans_fit_matrix(&x, &KMeansConfig::new(1).with_restarts(2)).unwrap();
    assert_eq!(m.assignment.labels, vec![0; 257]);
    assert!((m.assignment.inertia - want).abs() < 1e-9 * want);
}

#[test]
fn planted_partition_is_recovered() {
    for seed in 0..3 {
        let data = generate(&SynthConfig::new(3000, 32, 10, seed)).unwrap();
        let a = lcd_core::kmeans_fit(&data.dataset, &KMeansConfig::new(10).with_seed(seed)).unwrap();
        assert!(same_partition(&a.labels, &data.component_of), "seed {seed}");
    }
}

#[test]
fn runs_are_monotone_and_the_best_wins() {
    for seed in 0..5 {
        let x = blobs(seed, 800, 6, 12);
        let mut cfg = KMeansConfig::new(12).with_seed(seed);
        cfg.rel_tol = 0.0;
        let m = kmeans_fit_matrix(&x, &cfg).unwrap();
        assert_eq!(m.runs.len(), 10);
        for run in &m.runs {
            assert!(run.inertia_trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
            assert!(m.assignment.inertia <= run.inertia);
        }
        let labels = &m.assignment.labels;
        assert!((m.assignment.inertia - sse(&x, labels)).abs() <= 1e-6 * m.assignment.inertia);
        // Lloyd's fixed point: every label is its nearest final centroid.
        assert_eq!(&assign_to_centroids(&x, &m.centroids).unwrap(), labels);
    }
}

#[test]
fn labels_survive_uniform_scaling() {
    for seed in 0..4 {
        let x = blobs(seed, 600, 8, 9);
        let cfg = KMeansConfig::new(9).with_seed(seed).with_restarts(3);
        let base = kmeans_fit_matrix(&x, &cfg).unwrap().assignment;
        for c in [0.5f32, 4.0] {
            let s = kmeans_fit_matrix(&x.scaled(c), &cfg).unwrap().assignment;
            assert_eq!(s.labels, base.labels, "seed {seed}, scale {c}");
            let ratio = s.inertia / base.inertia;
            assert!((ratio - (c * c) as f64).abs() < 1e-9 * ratio);
        }
        let s = kmeans_fit_matrix(&x.scaled(3.0), &cfg).unwrap().assignment;
        assert!(same_partition(&s.labels, &base.labels), "seed {seed}, scale 3");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let x = random_matrix(&mut rng(77), 3000, 16, 1.0);
    let cfg = KMeansConfig::new(40).with_seed(5).with_restarts(2);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| kmeans_fit_matrix(&x, &cfg).unwrap())
    };
    let one = run(1);
    for t in [2, 4] {
        let many = run(t);
        assert_eq!(many.assignment, one.assignment);
        assert_eq!(many.centroids, one.centroids);
    }
}

#[test]
fn nearest_centroid_ties_go_low() {
    let pts = Matrix::from_rows(&[[1.0f32], [0.0], [2.0]]).unwrap();
    let cents = Matrix::from_rows(&[[0.0f32], [2.0]]).unwrap();
    assert_eq!(assign_to_centroids(&pts, &cents).unwrap(), vec![0, 0, 1]);
}

#[test]
fn bad_configs_are_rejected() {
    let x = random_matrix(&mut rng(1), 10, 2, 1.0);
    assert!(kmeans_fit_matrix(&x, &KMeansConfig::new(0)).is_err());
    assert!(kmeans_fit_matrix(&x, &KMeansConfig::new(11)).is_err());
    assert!(kmeans_fit_matrix(&x, &KMeansConfig::new(2).with_restarts(0)).is_err());
    let mut r = rng(2);
    let k = r.random_range(1..=10);
    assert_eq!(kmeans_fit_matrix(&x, &KMeansConfig::new(k)).unwrap().assignment.k, k);
}
