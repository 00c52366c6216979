use std::path::PathBuf;

use lcd::bench::{assignment_hash, cluster_matrix, fit_exponent, records_csv, run_cell, scaling_sweep, BenchConfig, CellParams};
use lcd::formats::write_lce1;
use lcd_core::oracle::{generate, SynthConfig};
use lcd_core::Method;

fn exe() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_lcd"))
}

fn params(method: Method, k: usize) -> CellParams {
    CellParams {
        method,
        k,
        seed: 4,
        restarts: 1,
        max_iter: 50,
        rel_tol: 1e-4,
        tau: None,
        memory_budget: u64::MAX,
    }
}

#[test]
fn exponent_fit() {
    let pts: Vec<(usize, f64)> = [1000, 2000, 4000, 8000].iter().map(|&n| (n, 3e-7 * (n as f64).powf(1.5))).collect();
    assert!((fit_exponent(&pts).unwrap() - 1.5).abs() < 1e-12);
    // ln t = (0, a, 3a) over ln n = (0, a, 2a) with a = ln 2: slope 3a²/2a² by hand.
    assert!((fit_exponent(&[(1, 1.0), (2, 2.0), (4, 8.0)]).unwrap() - 1.5).abs() < 1e-12);
    // Sizes of zero and non-positive runtimes are dropped, leaving too few points.
    assert_eq!(fit_exponent(&[(0, 1.0), (2, 2.0), (4, 0.0), (8, 3.0)]), None);
    assert_eq!(fit_exponent(&[(5, 1.0), (5, 2.0), (5, 3.0)]), None);
}

#[test]
fn cells_are_measured_without_changing_results() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(&SynthConfig::new(1500, 8, 10, 2)).unwrap();
    let x = data.dataset.vectors();
    let emb = dir.path().join("x.lce");
    write_lce1(&emb, 0, x).unwrap();
    let mut cfg = BenchConfig::new(exe(), vec![], vec![]);
    cfg.dim = 8;
    for method in [Method::KMeans, Method::Agglomerative] {
        let p = params(method, 10);
        let a = run_cell(&cfg, &emb, 1500, &p).unwrap();
        let b = run_cell(&cfg, &emb, 1500, &p).unwrap();
        assert_eq!(a.status, "ok");
        assert!(a.runtime_user_sys_s > 0.0 && a.peak_mem_bytes > 0);
        assert_eq!(a.assignment_hash, b.assignment_hash);
        let (direct, _) = cluster_matrix(x, &p).unwrap();
        assert_eq!(a.assignment_hash.as_deref(), Some(assignment_hash(&direct.labels).as_str()));
    }
    let mut p = params(Method::Agglomerative, 10);
    p.memory_budget = 1000;
    let r = run_cell(&cfg, &emb, 1500, &p).unwrap();
    assert_eq!(r.status, "over_budget");
    assert_eq!(r.assignment_hash, None);
}

#[test]
fn small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = BenchConfig::new(exe(), vec![Method::KMeans, Method::Leaders, Method::Agglomerative], vec![400, 800, 1600]);
    cfg.dim = 8;
    cfg.components = 10;
    cfg.k = 10;
    cfg.restarts = 1;
    let rep = scaling_sweep(&cfg, dir.path()).unwrap();
    assert_eq!(rep.records.len(), 9);
    assert!(rep.records.iter().all(|r| r.ok()));
    for r in rep.records.iter().filter(|r| r.method == Method::Leaders) {
        let m = r.leaders.unwrap() as f64;
        let target = r.n as f64 / 4.0;
        assert!((m - target).abs() <= 0.05 * target, "{m} leaders for n = {}", r.n);
    }
    assert!(rep.exponents.values().all(Option::is_some));
    let csv = String::from_utf8(records_csv(&rep.records).unwrap()).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "method,n,dim,k,seed,runtime_user_sys_s,runtime_wall_s,peak_mem_bytes,status"
    );
    assert_eq!(csv.lines().count(), 10);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

/// Peak memory of K-Means at 100K × 64, K = 600 against 4·N·(D + K) bytes.
#[test]
fn kmeans_memory_tracks_the_linear_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let (n, d, k) = (100_000usize, 64usize, 600usize);
    let data = generate(&SynthConfig::new(n, d, k, 1)).unwrap();
    let emb = dir.path().join("x.lce");
    write_lce1(&emb, 0, data.dataset.vectors()).unwrap();
    drop(data);
    let cfg = BenchConfig::new(exe(), vec![], vec![]);
    // Memory does not depend on the number of restarts or iterations.
    let mut p = params(Method::KMeans, k);
    p.max_iter = 10;
    let r = run_cell(&cfg, &emb, n, &p).unwrap();
    let estimate = (4 * n * (d + k)) as f64;
    let ratio = r.peak_mem_bytes as f64 / estimate;
    eprintln!("kmeans peak {} bytes, {ratio:.3} of the estimate", r.peak_mem_bytes);
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "ratio {ratio}");
}

/// Ward must hold the condensed matrix: peak ≥ 4·N(N−1)/2 bytes.
#[test]
fn agglomerative_memory_is_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let n = 6000;
    let data = generate(&SynthConfig::new(n, 16, 50, 1)).unwrap();
    let emb = dir.path().join("x.lce");
    write_lce1(&emb, 0, data.dataset.vectors()).unwrap();
    let mut cfg = BenchConfig::new(exe(), vec![], vec![]);
    cfg.dim = 16;
    let r = run_cell(&cfg, &emb, n, &params(Method::Agglomerative, 50)).unwrap();
    assert!(r.peak_mem_bytes >= (4 * n * (n - 1) / 2) as u64, "{}", r.peak_mem_bytes);
}
