//! Benchmark harness. Every (method, size) cell runs in a child process
//! (`lcd bench-cell`) so that the reported peak resident set belongs to the
//! clustering alone; CPU time is the child's user + sys time as reported by
//! `wait4`. For Leaders the τ search happens in the parent and only the
//! final-τ pass plus Ward on the centroids is measured.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use lcd_core::agglomerative::{cut_tree, ward_fit_matrix};
use lcd_core::kmeans::kmeans_fit_matrix;
use lcd_core::leaders::leaders_ward;
use lcd_core::oracle::{generate, SynthConfig};
use lcd_core::{
    leaders_pass, tau_binary_search, ClusterAssignment, KMeansConfig, Matrix, Method, SearchMode,
    TauSearchConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, EXIT_BUDGET};
use crate::formats::{read_lce1, write_lce1};
use crate::manifest::sha256_hex;

/// SHA-256 over the labels as little-endian `u32`.
pub fn assignment_hash(labels: &[usize]) -> String {
    let bytes: Vec<u8> = labels.iter().flat_map(|&l| (l as u32).to_le_bytes()).collect();
    sha256_hex(&bytes)
}

/// Everything the child needs to run one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellParams {
    /// Backend.
    pub method: Method,
    /// Clusters.
    pub k: usize,
    /// K-Means and Leaders order seed.
    pub seed: u64,
    /// K-Means restarts.
    pub restarts: usize,
    /// K-Means iteration cap.
    pub max_iter: usize,
    /// K-Means relative tolerance.
    pub rel_tol: f64,
    /// Leaders radius; required for Leaders.
    pub tau: Option<f64>,
    /// Cap on the Ward distance matrix.
    pub memory_budget: u64,
}

/// What the child prints on success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutput {
    /// Hash of the labels.
    pub assignment_hash: String,
    /// Inertia of the assignment.
    pub inertia: f64,
    /// Leaders produced, for Leaders cells.
    pub leaders: Option<usize>,
}

/// Runs one clustering in this process.
pub fn cluster_matrix(x: &Matrix, p: &CellParams) -> Result<(ClusterAssignment, Option<usize>)> {
    Ok(match p.method {
        Method::KMeans => {
            let mut cfg = KMeansConfig::new(p.k).with_seed(p.seed).with_restarts(p.restarts);
            cfg.max_iter = p.max_iter;
            cfg.rel_tol = p.rel_tol;
            (kmeans_fit_matrix(x, &cfg)?.assignment, None)
        }
        Method::Agglomerative => (cut_tree(&ward_fit_matrix(x, p.memory_budget)?, p.k)?, None),
        Method::Leaders => {
            let tau = p
                .tau
                .ok_or_else(|| Error::Usage("a Leaders cell needs --tau".into()))?;
            let comp = leaders_pass(x, tau, p.seed, SearchMode::Exact)?;
            let m = comp.m();
            (leaders_ward(x, &comp, p.k.min(m), p.memory_budget)?, Some(m))
        }
    })
}

/// Body of the hidden `bench-cell` subcommand.
pub fn run_cell_child(emb: &Path, p: &CellParams) -> Result<CellOutput> {
    let x = read_lce1(emb)?.vectors;
    let (a, leaders) = cluster_matrix(&x, p)?;
    Ok(CellOutput {
        assignment_hash: assignment_hash(&a.labels),
        inertia: a.inertia,
        leaders,
    })
}

mod method_name {
    use lcd_core::Method;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Method, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(m.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Method, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    /// Backend.
    #[serde(with = "method_name")]
    pub method: Method,
    /// Points.
    pub n: usize,
    /// Dimension.
    pub dim: usize,
    /// Clusters.
    pub k: usize,
    /// Data and order seed.
    pub seed: u64,
    /// Child CPU time, user + sys, seconds.
    pub runtime_user_sys_s: f64,
    /// Child wall-clock time, seconds.
    pub runtime_wall_s: f64,
    /// Child peak resident set, bytes.
    pub peak_mem_bytes: u64,
    /// `ok`, `over_budget`, `exit N` or `signal N`.
    pub status: String,
    /// Labels hash for successful cells.
    pub assignment_hash: Option<String>,
    /// Leaders radius used.
    pub tau: Option<f64>,
    /// Leaders produced.
    pub leaders: Option<usize>,
}

impl BenchRecord {
    /// Whether the cell finished.
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    method: &'a str,
    n: usize,
    dim: usize,
    k: usize,
    seed: u64,
    runtime_user_sys_s: f64,
    runtime_wall_s: f64,
    peak_mem_bytes: u64,
    status: &'a str,
}

/// Records as CSV with the columns
/// `method,n,dim,k,seed,runtime_user_sys_s,runtime_wall_s,peak_mem_bytes,status`.
pub fn records_csv(records: &[BenchRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow {
            method: r.method.as_str(),
            n: r.n,
            dim: r.dim,
            k: r.k,
            seed: r.seed,
            runtime_user_sys_s: r.runtime_user_sys_s,
            runtime_wall_s: r.runtime_wall_s,
            peak_mem_bytes: r.peak_mem_bytes,
            status: &r.status,
        })
        .map_err(|e| Error::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Internal(e.to_string()))
}

struct ChildUsage {
    status: String,
    cpu_s: f64,
    wall_s: f64,
    max_rss_bytes: u64,
    stdout: String,
}

fn timeval_s(t: libc::timeval) -> f64 {
    t.tv_sec as f64 + t.tv_usec as f64 * 1e-6
}

/// Runs `cmd` to completion and collects its resource usage.
fn run_measured(mut cmd: Command) -> Result<ChildUsage> {
    let start = Instant::now();
    let mut child = cmd
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::Internal(format!("cannot start benchmark child: {e}")))?;
    let mut stdout = String::new();
    if let Some(mut out) = child.stdout.take() {
        out.read_to_string(&mut stdout)
            .map_err(|e| Error::Internal(format!("reading benchmark child output: {e}")))?;
    }
    let pid = child.id() as libc::pid_t;
    let mut status: libc::c_int = 0;
    // SAFETY: zeroed rusage is a valid value; `pid` is our unreaped child.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let rc = loop {
        let rc = unsafe { libc::wait4(pid, &mut status, 0, &mut usage) };
        if rc == -1 && std::io::Error::last_os_error().kind() == std::io::ErrorKind::Interrupted {
            continue;
        }
        break rc;
    };
    let wall_s = start.elapsed().as_secs_f64();
    if rc != pid {
        return Err(Error::Internal(format!(
            "wait4 failed: {}",
            std::io::Error::last_os_error()
        )));
    }
    let status = if libc::WIFEXITED(status) {
        match libc::WEXITSTATUS(status) {
            0 => "ok".to_string(),
            EXIT_BUDGET => "over_budget".to_string(),
            c => format!("exit {c}"),
        }
    } else if libc::WIFSIGNALED(status) {
        format!("signal {}", libc::WTERMSIG(status))
    } else {
        "unknown".to_string()
    };
    Ok(ChildUsage {
        status,
        cpu_s: timeval_s(usage.ru_utime) + timeval_s(usage.ru_stime),
        wall_s,
        // Linux reports kilobytes.
        max_rss_bytes: usage.ru_maxrss as u64 * 1024,
        stdout,
    })
}

/// Sweep settings shared by every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// The `lcd` executable that runs the cells.
    pub exe: PathBuf,
    /// Backends to run.
    pub methods: Vec<Method>,
    /// Dataset sizes.
    pub sizes: Vec<usize>,
    /// Dimension of the synthetic data.
    pub dim: usize,
    /// Planted components.
    pub components: usize,
    /// Clusters.
    pub k: usize,
    /// Data and order seed.
    pub seed: u64,
    /// K-Means restarts.
    pub restarts: usize,
    /// K-Means iteration cap.
    pub max_iter: usize,
    /// K-Means relative tolerance.
    pub rel_tol: f64,
    /// Leaders budget as a fraction of N.
    pub leaders_ratio: f64,
    /// Cap on the Ward distance matrix.
    pub memory_budget: u64,
    /// Worker threads for the children; `None` leaves the default.
    pub threads: Option<usize>,
}

impl BenchConfig {
    /// Defaults for everything but the executable, methods and sizes.
    pub fn new(exe: PathBuf, methods: Vec<Method>, sizes: Vec<usize>) -> Self {
        BenchConfig {
            exe,
            methods,
            sizes,
            dim: 64,
            components: lcd_core::defaults::K,
            k: lcd_core::defaults::K,
            seed: 1,
            restarts: lcd_core::defaults::RESTARTS,
            max_iter: lcd_core::defaults::MAX_ITER,
            rel_tol: lcd_core::defaults::REL_TOL,
            leaders_ratio: 0.25,
            memory_budget: lcd_core::DEFAULT_MEMORY_BUDGET,
            threads: None,
        }
    }

    fn params(&self, method: Method, tau: Option<f64>) -> CellParams {
        CellParams {
            method,
            k: self.k,
            seed: self.seed,
            restarts: self.restarts,
            max_iter: self.max_iter,
            rel_tol: self.rel_tol,
            tau,
            memory_budget: self.memory_budget,
        }
    }
}

/// Child command line for one cell.
fn cell_command(cfg: &BenchConfig, emb: &Path, p: &CellParams) -> Command {
    let mut cmd = Command::new(&cfg.exe);
    if let Some(t) = cfg.threads {
        cmd.arg("--threads").arg(t.to_string());
    }
    cmd.arg("bench-cell")
        .arg("--emb")
        .arg(emb)
        .arg("--method")
        .arg(p.method.as_str())
        .arg("--k")
        .arg(p.k.to_string())
        .arg("--seed")
        .arg(p.seed.to_string())
        .arg("--restarts")
        .arg(p.restarts.to_string())
        .arg("--max-iter")
        .arg(p.max_iter.to_string())
        .arg("--rel-tol")
        .arg(p.rel_tol.to_string())
        .arg("--memory-budget")
        .arg(p.memory_budget.to_string());
    if let Some(tau) = p.tau {
        // Round-trip formatting keeps τ bit-exact.
        cmd.arg("--tau").arg(format!("{tau:?}"));
    }
    cmd
}

/// Measures one cell on the LCE1 file `emb` holding `n × dim` vectors.
pub fn run_cell(cfg: &BenchConfig, emb: &Path, n: usize, p: &CellParams) -> Result<BenchRecord> {
    let usage = run_measured(cell_command(cfg, emb, p))?;
    let mut rec = BenchRecord {
        method: p.method,
        n,
        dim: cfg.dim,
        k: p.k,
        seed: p.seed,
        runtime_user_sys_s: usage.cpu_s,
        runtime_wall_s: usage.wall_s,
        peak_mem_bytes: usage.max_rss_bytes,
        status: usage.status,
        assignment_hash: None,
        tau: p.tau,
        leaders: None,
    };
    if rec.ok() {
        let out: CellOutput = serde_json::from_str(usage.stdout.trim())
            .map_err(|e| Error::Internal(format!("benchmark child output: {e}")))?;
        rec.assignment_hash = Some(out.assignment_hash);
        rec.leaders = out.leaders;
    }
    Ok(rec)
}

/// Least-squares slope of `ln runtime` against `ln n`; `None` with fewer
/// than three usable points or a single distinct size.
pub fn fit_exponent(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, t)| *n > 0 && *t > 0.0)
        .map(|&(n, t)| ((n as f64).ln(), t.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sweep results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// Machine description.
    pub host: String,
    /// Every cell, by size then method.
    pub records: Vec<BenchRecord>,
    /// Fitted runtime exponent per method, `null` with too few cells.
    pub exponents: BTreeMap<String, Option<f64>>,
}

/// Writes synthetic data for every size into `dir` and runs every cell.
pub fn scaling_sweep(cfg: &BenchConfig, dir: &Path) -> Result<SweepReport> {
    let mut records = Vec::new();
    for &n in &cfg.sizes {
        let synth = SynthConfig::new(n, cfg.dim, cfg.components.min(n), cfg.seed);
        let data = generate(&synth)?;
        let x = data.dataset.vectors();
        let emb = dir.join(format!("bench_{n}.lce"));
        write_lce1(&emb, 0, x)?;
        for &method in &cfg.methods {
            let tau = if method == Method::Leaders {
                let target = ((n as f64 * cfg.leaders_ratio).round() as usize).clamp(1, n);
                let search = tau_binary_search(x, &TauSearchConfig::new(target).with_seed(cfg.seed))?;
                Some(search.tau)
            } else {
                None
            };
            records.push(run_cell(cfg, &emb, n, &cfg.params(method, tau))?);
        }
        std::fs::remove_file(&emb).map_err(|e| Error::io(&emb, e))?;
    }
    let exponents = cfg
        .methods
        .iter()
        .map(|&m| {
            let pts: Vec<(usize, f64)> = records
                .iter()
                .filter(|r| r.method == m && r.ok())
                .map(|r| (r.n, r.runtime_user_sys_s))
                .collect();
            (m.as_str().to_string(), fit_exponent(&pts))
        })
        .collect();
    Ok(SweepReport {
        host: host_fingerprint(),
        records,
        exponents,
    })
}

/// `sysname release machine, N cpus`.
pub fn host_fingerprint() -> String {
    // SAFETY: uname fills a zeroed struct of C strings.
    let mut u: libc::utsname = unsafe { std::mem::zeroed() };
    let field = |f: &[libc::c_char]| {
        let bytes: Vec<u8> = f.iter().take_while(|&&c| c != 0).map(|&c| c as u8).collect();
        String::from_utf8_lossy(&bytes).into_owned()
    };
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    if unsafe { libc::uname(&mut u) } == 0 {
        format!(
            "{} {} {}, {cpus} cpus",
            field(&u.sysname),
            field(&u.release),
            field(&u.machine)
        )
    } else {
        format!("unknown, {cpus} cpus")
    }
}
