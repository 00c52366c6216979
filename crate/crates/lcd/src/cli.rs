//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lcd_core::agglomerative::{cut_tree, ward_fit_matrix};
use lcd_core::concepts::sizes_histogram;
use lcd_core::kmeans::kmeans_fit_matrix;
use lcd_core::leaders::leaders_ward;
use lcd_core::oracle::{generate, SynthConfig};
use lcd_core::{
    build_ontology, concepts_from_labels, filter_concepts, leaders_pass, phrasal_counts,
    tau_binary_search, theta_alignment, AlignmentOptions, ConceptSet, CoverageDenominator, Init,
    KMeansConfig, Matrix, Method, SearchMode, TauSearchConfig, Theta, TokenRecord,
    DEFAULT_MEMORY_BUDGET,
};
use serde::Serialize;

use crate::bench::{records_csv, run_cell_child, scaling_sweep, BenchConfig, CellParams};
use crate::error::{Error, Result};
use crate::formats::{read_lce1, read_tokens, save_dataset};
use crate::manifest::ManifestBuilder;
use crate::outputs::{
    breakdown_table, concept_listing, concepts_jsonl, dendrogram_jsonl, read_assignment,
    read_concepts, report_table, to_json_bytes, write_bytes, write_text, AssignmentFile,
    CompressionDump, ReportJson,
};

/// Environment variable overriding the Ward memory budget, in bytes.
pub const MEMORY_BUDGET_ENV: &str = "LCD_MEMORY_BUDGET";

/// Latent concept discovery over contextualized embeddings.
#[derive(Debug, Parser)]
#[command(name = "lcd", version, about)]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    /// Command to run.
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with planted concepts.
    Synth(SynthArgs),
    /// Cluster an embedding file.
    Cluster(ClusterArgs),
    /// Turn an assignment into encoded concepts.
    Concepts(ConceptsArgs),
    /// Score concepts against the labels of a token file.
    Evaluate(EvaluateArgs),
    /// Histogram of concept sizes.
    Histogram(HistogramArgs),
    /// Count phrasal members of concepts.
    Phrasal(PhrasalArgs),
    /// Measure runtime and peak memory per method and size.
    Bench(BenchArgs),
    /// Run one benchmark cell (used by `bench`).
    #[command(hide = true)]
    BenchCell(BenchCellArgs),
}

fn parse_method(s: &str) -> std::result::Result<Method, lcd_core::Error> {
    s.parse()
}

fn parse_init(s: &str) -> std::result::Result<Init, lcd_core::Error> {
    s.parse()
}

fn parse_theta(s: &str) -> std::result::Result<Theta, lcd_core::Error> {
    s.parse()
}

fn parse_denominator(s: &str) -> std::result::Result<CoverageDenominator, lcd_core::Error> {
    s.parse()
}

/// `synth` flags.
#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Points.
    #[arg(long)]
    pub n: usize,
    /// Dimension.
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Planted components, one label each.
    #[arg(long, default_value_t = 600)]
    pub components: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Centre distance over cluster standard deviation.
    #[arg(long, default_value_t = 50.0)]
    pub separation: f64,
    /// Zipf exponent of component sizes.
    #[arg(long, default_value_t = 1.0)]
    pub skew: f64,
    /// Fraction of rows that are phrasal units.
    #[arg(long, default_value_t = 0.0)]
    pub phrasal: f64,
    /// Word types per component as a fraction of its size.
    #[arg(long, default_value_t = 0.05)]
    pub vocab_ratio: f64,
    /// Output prefix; writes `<prefix>.lce` and `<prefix>.jsonl`.
    #[arg(long, default_value = "synth")]
    pub out: PathBuf,
}

/// `cluster` flags.
#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// kmeans, agglomerative (agglo, ward) or leaders.
    #[arg(long, value_parser = parse_method, default_value = "kmeans")]
    pub method: Method,
    /// Clusters.
    #[arg(long, default_value_t = lcd_core::defaults::K)]
    pub k: usize,
    /// K-Means restarts.
    #[arg(long, default_value_t = lcd_core::defaults::RESTARTS)]
    pub restarts: usize,
    /// K-Means iteration cap.
    #[arg(long, default_value_t = lcd_core::defaults::MAX_ITER)]
    pub max_iter: usize,
    /// K-Means tolerance on centroid movement, relative to the largest
    /// feature range.
    #[arg(long, default_value_t = lcd_core::defaults::REL_TOL)]
    pub rel_tol: f64,
    /// K-Means seeding: k-means++ or random.
    #[arg(long, value_parser = parse_init, default_value = "k-means++")]
    pub init: Init,
    /// K-Means seed, Leaders order seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Embedding file (LCE1).
    #[arg(long)]
    pub emb: PathBuf,
    /// Token file; validated against the embeddings when given.
    #[arg(long)]
    pub tok: Option<PathBuf>,
    /// Assignment output.
    #[arg(long)]
    pub out: PathBuf,
    /// Leaders: target number of leaders; τ is searched.
    #[arg(long, conflicts_with = "tau")]
    pub budget: Option<usize>,
    /// Leaders: fixed radius instead of a search.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Leaders: accepted relative deviation from the budget.
    #[arg(long, default_value_t = lcd_core::defaults::TAU_REL_BAND)]
    pub band: f64,
    /// Leaders: approximate leader lookup with random-projection trees.
    #[arg(long)]
    pub approximate: bool,
    /// Agglomerative: also write the merge list as JSON lines.
    #[arg(long)]
    pub dendrogram: Option<PathBuf>,
    /// Leaders: also write the compression.
    #[arg(long)]
    pub compression: Option<PathBuf>,
    /// Largest distance matrix Ward may allocate, in bytes.
    #[arg(long, env = MEMORY_BUDGET_ENV, default_value_t = DEFAULT_MEMORY_BUDGET)]
    pub memory_budget: u64,
}

/// `concepts` flags.
#[derive(Debug, Args)]
pub struct ConceptsArgs {
    /// Assignment file.
    #[arg(long)]
    pub assignment: PathBuf,
    /// Token file.
    #[arg(long)]
    pub tok: PathBuf,
    /// Concept dump output (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Keep only concepts with more than this many word types.
    #[arg(long)]
    pub min_types: Option<usize>,
    /// Also write a readable listing here.
    #[arg(long)]
    pub listing: Option<PathBuf>,
    /// Surfaces per concept in the listing.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

/// `evaluate` flags.
#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Concept dump.
    #[arg(long)]
    pub concepts: PathBuf,
    /// Token file with labels.
    #[arg(long)]
    pub tok: PathBuf,
    /// Alignment threshold, decimal or fraction.
    #[arg(long, value_parser = parse_theta, default_value = "0.95")]
    pub theta: Theta,
    /// Keep only concepts with more than this many word types.
    #[arg(long, default_value_t = lcd_core::defaults::MIN_TYPES)]
    pub min_types: usize,
    /// Divide coverage overlaps by the encoded (default) or human concept size.
    #[arg(long, value_parser = parse_denominator, default_value = "encoded")]
    pub coverage_denominator: CoverageDenominator,
    /// Add the per-label table.
    #[arg(long)]
    pub breakdown: bool,
    /// Name shown in the table's first column.
    #[arg(long)]
    pub label: Option<String>,
    /// Report output (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the text table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

/// `histogram` flags.
#[derive(Debug, Args)]
pub struct HistogramArgs {
    /// Concept dump.
    #[arg(long)]
    pub concepts: PathBuf,
    /// Token file.
    #[arg(long)]
    pub tok: PathBuf,
    /// Bin width in members.
    #[arg(long, default_value_t = 50)]
    pub bin_width: usize,
    /// Keep only concepts with more than this many word types.
    #[arg(long)]
    pub min_types: Option<usize>,
    /// Output (JSON); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `phrasal` flags.
#[derive(Debug, Args)]
pub struct PhrasalArgs {
    /// Concept dump.
    #[arg(long)]
    pub concepts: PathBuf,
    /// Token file.
    #[arg(long)]
    pub tok: PathBuf,
    /// Keep only concepts with more than this many word types.
    #[arg(long)]
    pub min_types: Option<usize>,
    /// Output (JSON); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `bench` flags.
#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated methods.
    #[arg(long, value_parser = parse_method, value_delimiter = ',', default_value = "kmeans,leaders,agglomerative")]
    pub methods: Vec<Method>,
    /// Comma-separated dataset sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Dimension.
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Planted components.
    #[arg(long, default_value_t = 600)]
    pub components: usize,
    /// Clusters.
    #[arg(long, default_value_t = lcd_core::defaults::K)]
    pub k: usize,
    /// Data and order seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// K-Means restarts.
    #[arg(long, default_value_t = lcd_core::defaults::RESTARTS)]
    pub restarts: usize,
    /// K-Means iteration cap.
    #[arg(long, default_value_t = lcd_core::defaults::MAX_ITER)]
    pub max_iter: usize,
    /// K-Means relative tolerance.
    #[arg(long, default_value_t = lcd_core::defaults::REL_TOL)]
    pub rel_tol: f64,
    /// Leaders budget as a fraction of N.
    #[arg(long, default_value_t = 0.25)]
    pub leaders_ratio: f64,
    /// Largest distance matrix Ward may allocate, in bytes.
    #[arg(long, env = MEMORY_BUDGET_ENV, default_value_t = DEFAULT_MEMORY_BUDGET)]
    pub memory_budget: u64,
    /// Directory for the temporary datasets.
    #[arg(long)]
    pub workdir: Option<PathBuf>,
    /// CSV output.
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
}

/// `bench-cell` flags.
#[derive(Debug, Args)]
pub struct BenchCellArgs {
    /// Embedding file (LCE1).
    #[arg(long)]
    pub emb: PathBuf,
    /// Backend.
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Clusters.
    #[arg(long)]
    pub k: usize,
    /// Seed.
    #[arg(long)]
    pub seed: u64,
    /// K-Means restarts.
    #[arg(long, default_value_t = lcd_core::defaults::RESTARTS)]
    pub restarts: usize,
    /// K-Means iteration cap.
    #[arg(long, default_value_t = lcd_core::defaults::MAX_ITER)]
    pub max_iter: usize,
    /// K-Means relative tolerance.
    #[arg(long, default_value_t = lcd_core::defaults::REL_TOL)]
    pub rel_tol: f64,
    /// Leaders radius.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Largest distance matrix Ward may allocate, in bytes.
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET)]
    pub memory_budget: u64,
}

/// Runs a parsed command line; `argv` (without the program name) goes into
/// manifests.
pub fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let mut mf = ManifestBuilder::new(argv);
    if let Some(t) = cli.threads {
        mf.param("threads", t);
    }
    match cli.command {
        Command::Synth(a) => synth(a, mf),
        Command::Cluster(a) => cluster(a, mf),
        Command::Concepts(a) => concepts(a, mf),
        Command::Evaluate(a) => evaluate(a, mf),
        Command::Histogram(a) => histogram(a, mf),
        Command::Phrasal(a) => phrasal(a, mf),
        Command::Bench(a) => bench(a, cli.threads, mf),
        Command::BenchCell(a) => bench_cell(a),
    }
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Records `outputs` and writes the manifest beside each of them.
fn finish(mf: &mut ManifestBuilder, outputs: &[&Path]) -> Result<()> {
    for o in outputs {
        mf.output(o)?;
    }
    for o in outputs {
        mf.write_beside(o)?;
    }
    Ok(())
}

fn synth(a: SynthArgs, mut mf: ManifestBuilder) -> Result<()> {
    let cfg = SynthConfig {
        n_points: a.n,
        dim: a.dim,
        n_components: a.components,
        separation: a.separation,
        label_skew: a.skew,
        phrasal_fraction: a.phrasal,
        vocab_ratio: a.vocab_ratio,
        seed: a.seed,
    };
    let data = generate(&cfg)?;
    let emb = with_extension(&a.out, "lce");
    let tok = with_extension(&a.out, "jsonl");
    save_dataset(&data.dataset, &emb, &tok)?;
    mf.param("n", a.n)
        .param("dim", a.dim)
        .param("components", a.components)
        .param("seed", a.seed)
        .param("separation", a.separation)
        .param("skew", a.skew)
        .param("phrasal", a.phrasal)
        .param("vocab_ratio", a.vocab_ratio);
    finish(&mut mf, &[&emb, &tok])?;
    eprintln!("wrote {} and {}", emb.display(), tok.display());
    Ok(())
}

fn load_vectors(emb: &Path, tok: Option<&Path>, mf: &mut ManifestBuilder) -> Result<Matrix> {
    mf.input(emb)?;
    let lce = read_lce1(emb)?;
    mf.param("layer_id", lce.layer_id);
    if let Some(tok) = tok {
        mf.input(tok)?;
        let ds = lcd_core::EmbeddingDataset::new(lce.layer_id, lce.vectors, read_tokens(tok)?)?;
        let unlabeled = ds.tokens().iter().filter(|t| t.label.is_none()).count();
        mf.param("unlabeled_tokens", unlabeled);
        let (_, vectors, _) = ds.into_parts();
        return Ok(vectors);
    }
    Ok(lce.vectors)
}

fn cluster(a: ClusterArgs, mut mf: ManifestBuilder) -> Result<()> {
    let x = load_vectors(&a.emb, a.tok.as_deref(), &mut mf)?;
    mf.param("method", a.method.as_str())
        .param("k", a.k)
        .param("seed", a.seed)
        .param("memory_budget", a.memory_budget);
    let mut extra: Vec<PathBuf> = Vec::new();
    let assignment = match a.method {
        Method::KMeans => {
            let mut cfg = KMeansConfig::new(a.k)
                .with_seed(a.seed)
                .with_restarts(a.restarts)
                .with_init(a.init);
            cfg.max_iter = a.max_iter;
            cfg.rel_tol = a.rel_tol;
            mf.param("restarts", a.restarts)
                .param("max_iter", a.max_iter)
                .param("rel_tol", a.rel_tol)
                .param("init", init_name(a.init));
            let model = kmeans_fit_matrix(&x, &cfg)?;
            mf.param("best_run", model.best_run)
                .param("iterations", model.assignment.iterations_run);
            model.assignment
        }
        Method::Agglomerative => {
            let dg = ward_fit_matrix(&x, a.memory_budget)?;
            if let Some(path) = &a.dendrogram {
                write_bytes(path, &dendrogram_jsonl(&dg)?)?;
                extra.push(path.clone());
            }
            cut_tree(&dg, a.k)?
        }
        Method::Leaders => {
            let mode = if a.approximate {
                SearchMode::Approximate
            } else {
                SearchMode::Exact
            };
            mf.param("search_mode", if a.approximate { "approximate" } else { "exact" });
            let comp = match (a.budget, a.tau) {
                (Some(budget), _) => {
                    let mut cfg = TauSearchConfig::new(budget).with_seed(a.seed);
                    cfg.rel_band = a.band;
                    cfg.mode = mode;
                    let search = tau_binary_search(&x, &cfg)?;
                    mf.param("budget", budget)
                        .param("band", a.band)
                        .param("probes", search.probes.len())
                        .param("accepted", search.accepted);
                    if !search.accepted {
                        eprintln!(
                            "warning: M = {} is outside the accepted band around {budget}",
                            search.compression.m()
                        );
                    }
                    search.compression
                }
                (None, Some(tau)) => leaders_pass(&x, tau, a.seed, mode)?,
                (None, None) => {
                    return Err(Error::Usage("leaders needs --budget or --tau".into()));
                }
            };
            mf.param("tau", comp.tau).param("m", comp.m());
            if let Some(path) = &a.compression {
                write_bytes(path, &to_json_bytes(&CompressionDump::from(&comp))?)?;
                extra.push(path.clone());
            }
            leaders_ward(&x, &comp, a.k, a.memory_budget)?
        }
    };
    write_bytes(&a.out, &to_json_bytes(&AssignmentFile::from(&assignment))?)?;
    let mut outs: Vec<&Path> = vec![&a.out];
    outs.extend(extra.iter().map(|p| p.as_path()));
    finish(&mut mf, &outs)?;
    eprintln!(
        "{}: {} clusters, inertia {:.6e}",
        assignment.method,
        assignment.distinct_labels(),
        assignment.inertia
    );
    Ok(())
}

fn init_name(i: Init) -> &'static str {
    match i {
        Init::KMeansPlusPlus => "k-means++",
        Init::Random => "random",
    }
}

fn concepts(a: ConceptsArgs, mut mf: ManifestBuilder) -> Result<()> {
    mf.input(&a.assignment)?.input(&a.tok)?;
    let assignment = read_assignment(&a.assignment)?;
    let tokens = read_tokens(&a.tok)?;
    let mut cs = concepts_from_labels(&assignment.labels, &tokens)?;
    if let Some(m) = a.min_types {
        cs = filter_concepts(&cs, m);
        mf.param("min_types", m);
    }
    write_bytes(&a.out, &concepts_jsonl(&cs)?)?;
    let mut outs: Vec<&Path> = vec![&a.out];
    if let Some(listing) = &a.listing {
        write_text(listing, &concept_listing(&cs, a.top))?;
        mf.param("top", a.top);
        outs.push(listing);
    }
    finish(&mut mf, &outs)?;
    eprintln!("{} concepts", cs.len());
    Ok(())
}

fn load_concepts(
    path: &Path,
    tok: &Path,
    min_types: Option<usize>,
    mf: &mut ManifestBuilder,
) -> Result<(ConceptSet, Vec<TokenRecord>)> {
    mf.input(path)?.input(tok)?;
    let tokens = read_tokens(tok)?;
    let mut cs = read_concepts(path, &tokens)?;
    if let Some(m) = min_types {
        cs = filter_concepts(&cs, m);
        mf.param("min_types", m);
    }
    Ok((cs, tokens))
}

fn evaluate(a: EvaluateArgs, mut mf: ManifestBuilder) -> Result<()> {
    let (cs, tokens) = load_concepts(&a.concepts, &a.tok, Some(a.min_types), &mut mf)?;
    let ont = build_ontology(&tokens)?;
    let opts = AlignmentOptions {
        theta: a.theta,
        coverage_denominator: a.coverage_denominator,
    };
    mf.param("theta", format!("{}/{}", a.theta.numer(), a.theta.denom()))
        .param(
            "coverage_denominator",
            match a.coverage_denominator {
                CoverageDenominator::EncodedConcept => "encoded",
                CoverageDenominator::HumanConcept => "human",
            },
        )
        .param("breakdown", a.breakdown);
    if cs.is_empty() {
        eprintln!("warning: no concept has more than {} word types", a.min_types);
    }
    let report = theta_alignment(&cs, &ont, &opts)?;
    let mut table = report_table(&report, a.label.as_deref());
    if a.breakdown {
        table.push('\n');
        table.push_str(&breakdown_table(&report));
    }
    print!("{table}");
    let mut outs: Vec<&Path> = Vec::new();
    if let Some(out) = &a.out {
        write_bytes(out, &to_json_bytes(&ReportJson::new(&report, a.breakdown))?)?;
        outs.push(out);
    }
    if let Some(t) = &a.table {
        write_text(t, &table)?;
        outs.push(t);
    }
    finish(&mut mf, &outs)
}

#[derive(Serialize)]
struct Bin {
    lo: usize,
    hi: usize,
    count: usize,
}

#[derive(Serialize)]
struct HistogramJson {
    bin_width: usize,
    n_concepts: usize,
    median: usize,
    max_size: usize,
    bins: Vec<Bin>,
}

fn emit(out: Option<&Path>, bytes: &[u8], mf: &mut ManifestBuilder) -> Result<()> {
    match out {
        Some(path) => {
            write_bytes(path, bytes)?;
            finish(mf, &[path])
        }
        None => {
            print!("{}", String::from_utf8_lossy(bytes));
            Ok(())
        }
    }
}

fn histogram(a: HistogramArgs, mut mf: ManifestBuilder) -> Result<()> {
    let (cs, _) = load_concepts(&a.concepts, &a.tok, a.min_types, &mut mf)?;
    mf.param("bin_width", a.bin_width);
    let sizes: Vec<usize> = cs.concepts.iter().map(|c| c.size()).collect();
    let h = sizes_histogram(&sizes, a.bin_width)?;
    let body = HistogramJson {
        bin_width: h.bin_width,
        n_concepts: sizes.len(),
        median: h.median,
        max_size: h.max_size,
        bins: (0..h.counts.len())
            .map(|b| {
                let (lo, hi) = h.bin_range(b);
                Bin {
                    lo,
                    hi,
                    count: h.counts[b],
                }
            })
            .collect(),
    };
    emit(a.out.as_deref(), &to_json_bytes(&body)?, &mut mf)
}

#[derive(Serialize)]
struct PhrasalJson {
    occurrences: std::collections::BTreeMap<String, usize>,
    types: std::collections::BTreeMap<String, usize>,
}

fn phrasal(a: PhrasalArgs, mut mf: ManifestBuilder) -> Result<()> {
    let (cs, tokens) = load_concepts(&a.concepts, &a.tok, a.min_types, &mut mf)?;
    let p = phrasal_counts(&cs, &tokens)?;
    let body = PhrasalJson {
        occurrences: (2..=5).map(|n| (n.to_string(), p.occurrences[n - 2])).collect(),
        types: (2..=5).map(|n| (n.to_string(), p.types[n - 2])).collect(),
    };
    emit(a.out.as_deref(), &to_json_bytes(&body)?, &mut mf)
}

fn bench(a: BenchArgs, threads: Option<usize>, mut mf: ManifestBuilder) -> Result<()> {
    if a.sizes.is_empty() || a.methods.is_empty() {
        return Err(Error::Usage("bench needs at least one method and one size".into()));
    }
    let exe = std::env::current_exe().map_err(|e| Error::Internal(e.to_string()))?;
    let mut cfg = BenchConfig::new(exe, a.methods.clone(), a.sizes.clone());
    cfg.dim = a.dim;
    cfg.components = a.components;
    cfg.k = a.k;
    cfg.seed = a.seed;
    cfg.restarts = a.restarts;
    cfg.max_iter = a.max_iter;
    cfg.rel_tol = a.rel_tol;
    cfg.leaders_ratio = a.leaders_ratio;
    cfg.memory_budget = a.memory_budget;
    cfg.threads = threads;
    let tmp = match &a.workdir {
        Some(dir) => tempfile::tempdir_in(dir),
        None => tempfile::tempdir(),
    }
    .map_err(|e| Error::Internal(format!("cannot create a work directory: {e}")))?;
    let report = scaling_sweep(&cfg, tmp.path())?;
    write_bytes(&a.out, &records_csv(&report.records)?)?;
    let summary = with_extension(&a.out, "summary.json");
    write_bytes(&summary, &to_json_bytes(&report)?)?;
    mf.param("methods", a.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>())
        .param("sizes", &a.sizes)
        .param("dim", a.dim)
        .param("components", a.components)
        .param("k", a.k)
        .param("seed", a.seed)
        .param("restarts", a.restarts)
        .param("max_iter", a.max_iter)
        .param("rel_tol", a.rel_tol)
        .param("leaders_ratio", a.leaders_ratio)
        .param("memory_budget", a.memory_budget);
    finish(&mut mf, &[&a.out, &summary])?;
    for (m, e) in &report.exponents {
        match e {
            Some(e) => eprintln!("{m}: runtime exponent {e:.3}"),
            None => eprintln!("{m}: too few successful cells for an exponent"),
        }
    }
    Ok(())
}

fn bench_cell(a: BenchCellArgs) -> Result<()> {
    let p = CellParams {
        method: a.method,
        k: a.k,
        seed: a.seed,
        restarts: a.restarts,
        max_iter: a.max_iter,
        rel_tol: a.rel_tol,
        tau: a.tau,
        memory_budget: a.memory_budget,
    };
    let out = run_cell_child(&a.emb, &p)?;
    println!(
        "{}",
        serde_json::to_string(&out).map_err(|e| Error::Internal(e.to_string()))?
    );
    Ok(())
}
