//! Batch command-line frontend.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 invalid configuration,
//! 3 optimality mismatch in `verify`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dataio::{self, Delimiter, DistanceMatrix, Mode};
use crate::decision::{self, KEstimate};
use crate::error::Error;
use crate::medoids::{self, NoiseStrategy, RunOptions};
use crate::metrics::{self, NmiNorm, Partition};
use crate::mst::{self, MinimaxMatrix, SpanningTree};
use crate::oracle;
use crate::synth::{self, Family, GenSpec};

#[derive(Debug, Parser)]
#[command(
    name = "gopc",
    version,
    about = "Globally optimal path-based clustering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a point set or a precomputed matrix.
    Cluster(ClusterArgs),
    /// Same as `cluster --estimate`.
    Estimate(ClusterArgs),
    /// Score a predicted partition against ground truth.
    Eval(EvalArgs),
    /// Write a synthetic labeled point set.
    Gen(GenArgs),
    /// Compare the clustering objective against exhaustive search.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputFormat {
    Points,
    Matrix,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Diss,
    Sim,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Diss => Mode::Dissimilarity,
            ModeArg::Sim => Mode::Similarity,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseArg {
    Separate,
    Merge,
}

impl From<NoiseArg> for NoiseStrategy {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Separate => NoiseStrategy::Separate,
            NoiseArg::Merge => NoiseStrategy::MstMerge,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NmiArg {
    Arithmetic,
    Geometric,
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "points")]
    format: InputFormat,
    #[arg(long, value_enum, default_value = "diss")]
    mode: ModeArg,
    /// Point files carry an integer class in the last column.
    #[arg(long)]
    labels: bool,
    /// Reject matrices whose (i, j) and (j, i) differ by more than 1e-9.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, conflicts_with = "estimate")]
    k: Option<usize>,
    /// Pick k from the decision graph.
    #[arg(long)]
    estimate: bool,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, value_enum, default_value = "merge")]
    noise: NoiseArg,
    /// Score every non-medoid each epoch instead of filtering by nn.
    #[arg(long)]
    no_filter: bool,
    #[arg(long, default_value_t = 0.0)]
    tie_eps: f64,
    #[arg(long)]
    out_labels: Option<PathBuf>,
    #[arg(long)]
    out_trace: Option<PathBuf>,
    #[arg(long)]
    out_summary: Option<PathBuf>,
    #[arg(long)]
    verbose: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, value_enum, default_value = "arithmetic")]
    nmi: NmiArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Blobs,
    Circles,
    Spiral,
    Unbalance,
    #[value(alias = "line_clusters")]
    LineClusters,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Blob count, ring count, arm count or line count.
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    spread: Option<f64>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    turns: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<f64>>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    gap: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::KTooSmall
            | Error::KTooLarge { .. }
            | Error::KMaxOutOfRange { .. }
            | Error::GuardExceeded { .. }
            | Error::InvalidSpec(_)
            | Error::TraceTooShort(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs one command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Cluster(a) => cmd_cluster(a, false, out, err),
        Command::Estimate(a) => cmd_cluster(a, true, out, err),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn configure_threads() {
    let threads = std::env::var("GOPC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        // fails only if a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

struct Loaded {
    dm: DistanceMatrix,
    truth: Option<Partition>,
}

fn load_input(a: &InputArgs) -> Result<Loaded, Failure> {
    match a.format {
        InputFormat::Points => {
            let ps = dataio::load_points(&a.input, Delimiter::from_path(&a.input), a.labels)?;
            let truth = ps
                .labels()
                .map(|l| Partition::new(l.to_vec()))
                .transpose()?;
            Ok(Loaded {
                dm: dataio::euclidean_matrix(&ps),
                truth,
            })
        }
        InputFormat::Matrix => Ok(Loaded {
            dm: dataio::load_matrix(&a.input, a.mode.into(), a.strict)?,
            truth: None,
        }),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn ms(since: Instant) -> f64 {
    (since.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

#[derive(Debug, Serialize)]
struct Timings {
    load: f64,
    tree: f64,
    minimax: f64,
    estimate: f64,
    cluster: f64,
    noise: f64,
    total: f64,
}

#[derive(Debug, Serialize)]
struct MetricSummary {
    ri: f64,
    ari: f64,
    nmi: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    n: usize,
    k: usize,
    medoids: Vec<usize>,
    objective: f64,
    noise_count: usize,
    noise_strategy: &'static str,
    filter: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimated_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate_degenerate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<MetricSummary>,
    elapsed_ms: Timings,
}

struct Prepared {
    tree: SpanningTree,
    mm: MinimaxMatrix,
    truth: Option<Partition>,
    load_ms: f64,
    tree_ms: f64,
    minimax_ms: f64,
}

fn prepare(a: &InputArgs) -> Result<Prepared, Failure> {
    let t = Instant::now();
    let Loaded { dm, truth } = load_input(a)?;
    let load_ms = ms(t);

    let t = Instant::now();
    let tree = mst::build_tree(&dm);
    let tree_ms = ms(t);

    let t = Instant::now();
    let mm = mst::minimax_all_pairs(&tree, &dm);
    drop(dm);
    let mm = mm.into_dissimilarity();
    let minimax_ms = ms(t);

    Ok(Prepared {
        tree,
        mm,
        truth,
        load_ms,
        tree_ms,
        minimax_ms,
    })
}

fn cmd_cluster(
    a: ClusterArgs,
    force_estimate: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let started = Instant::now();
    let estimate = force_estimate || a.estimate;
    if estimate && a.k.is_some() {
        return Err(config_error("give either --k or --estimate, not both"));
    }
    if !estimate {
        match a.k {
            None => return Err(config_error("one of --k or --estimate is required")),
            Some(0) => return Err(config_error("k must be ≥ 1")),
            Some(_) => {}
        }
    }
    if !(a.tie_eps.is_finite() && a.tie_eps >= 0.0) {
        return Err(config_error("tie-eps must be finite and ≥ 0"));
    }

    let p = prepare(&a.input)?;
    let n = p.mm.n();

    let t = Instant::now();
    let mut est: Option<KEstimate> = None;
    let mut trace = None;
    let k = if estimate {
        let tr = decision::trace(&p.mm, a.k_max)?;
        let e = decision::estimate_k(&tr, decision::DEFAULT_EPS)?;
        est = Some(e);
        trace = Some(tr);
        e.k
    } else {
        a.k.unwrap_or(1)
    };
    let estimate_ms = ms(t);

    let t = Instant::now();
    let opts = RunOptions {
        filter: !a.no_filter,
        tie_eps: a.tie_eps,
    };
    let model = medoids::run(&p.mm, k, &opts)?;
    let cluster_ms = ms(t);

    let t = Instant::now();
    let strategy: NoiseStrategy = a.noise.into();
    let model = medoids::resolve_noise(&model, strategy, &p.tree, &p.mm)?;
    let noise_ms = ms(t);

    if let Some(path) = &a.out_labels {
        dataio::write_partition(path, &model.labels, &model.noise)?;
    }
    if let Some(path) = &a.out_trace {
        let tr = trace.clone().unwrap_or(decision::DecisionTrace {
            k_max: k,
            values: model.gain_trace.clone(),
        });
        write_file(path, &tr.to_tsv())?;
    }

    let metrics = match &p.truth {
        Some(truth) if n >= 2 => {
            let s = metrics::score(&model.labels, truth, NmiNorm::Arithmetic)?;
            Some(MetricSummary {
                ri: s.ri,
                ari: s.ari,
                nmi: s.nmi,
            })
        }
        _ => None,
    };

    let summary = Summary {
        n,
        k,
        medoids: model.medoids.clone(),
        objective: model.objective,
        noise_count: model.noise_count(),
        noise_strategy: match strategy {
            NoiseStrategy::Separate => "separate",
            NoiseStrategy::MstMerge => "merge",
        },
        filter: opts.filter,
        estimated_k: est.map(|e| e.k),
        estimate_degenerate: est.map(|e| e.degenerate),
        metrics,
        elapsed_ms: Timings {
            load: p.load_ms,
            tree: p.tree_ms,
            minimax: p.minimax_ms,
            estimate: estimate_ms,
            cluster: cluster_ms,
            noise: noise_ms,
            total: ms(started),
        },
    };

    if a.verbose {
        let mut text = String::new();
        writeln!(text, "objects: {n}").unwrap();
        if let Some(e) = est {
            writeln!(
                text,
                "estimated k: {}{}",
                e.k,
                if e.degenerate { " (flat trace)" } else { "" }
            )
            .unwrap();
        }
        writeln!(text, "medoids: {:?}", model.medoids).unwrap();
        writeln!(text, "objective: {}", model.objective).unwrap();
        writeln!(text, "noise objects: {}", model.noise_count()).unwrap();
        let _ = write!(out, "{text}");
    }
    if let Some(e) = est.filter(|e| e.degenerate) {
        let _ = writeln!(
            err,
            "warning: decision trace is all zeros; reporting k = {}",
            e.k
        );
    }

    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    match &a.out_summary {
        Some(path) => write_file(path, &(json + "\n"))?,
        None => {
            let _ = writeln!(out, "{json}");
        }
    }
    Ok(0)
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> CmdResult {
    let pred = dataio::load_partition(&a.pred)?;
    let truth = dataio::load_partition(&a.truth)?;
    let norm = match a.nmi {
        NmiArg::Arithmetic => NmiNorm::Arithmetic,
        NmiArg::Geometric => NmiNorm::Geometric,
    };
    let s = metrics::score(&pred, &truth, norm)?;
    let _ = writeln!(
        out,
        "{{\"ri\": {:.6}, \"ari\": {:.6}, \"nmi\": {:.6}}}",
        s.ri, s.ari, s.nmi
    );
    Ok(0)
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let family = match a.family {
        FamilyArg::Blobs => {
            let Family::Blobs {
                spread, separation, ..
            } = Family::blobs(3)
            else {
                unreachable!()
            };
            Family::Blobs {
                clusters: a.clusters.unwrap_or(3),
                spread: a.spread.unwrap_or(spread),
                separation: a.separation.unwrap_or(separation),
            }
        }
        FamilyArg::Circles => {
            let Family::Circles { radii, noise } = Family::circles() else {
                unreachable!()
            };
            let radii = match (a.radii, a.clusters) {
                (Some(r), _) => r,
                (None, Some(c)) => (0..c).map(|i| 1.0 + 2.0 * i as f64).collect(),
                (None, None) => radii,
            };
            Family::Circles {
                radii,
                noise: a.noise_sd.unwrap_or(noise),
            }
        }
        FamilyArg::Spiral => {
            let Family::Spiral {
                arms,
                turns,
                inner,
                outer,
                noise,
            } = Family::spiral()
            else {
                unreachable!()
            };
            Family::Spiral {
                arms: a.clusters.unwrap_or(arms),
                turns: a.turns.unwrap_or(turns),
                inner,
                outer,
                noise: a.noise_sd.unwrap_or(noise),
            }
        }
        FamilyArg::Unbalance => {
            let Family::Unbalance {
                sizes,
                spread,
                separation,
            } = Family::unbalance()
            else {
                unreachable!()
            };
            Family::Unbalance {
                sizes: a.sizes.unwrap_or(sizes),
                spread: a.spread.unwrap_or(spread),
                separation: a.separation.unwrap_or(separation),
            }
        }
        FamilyArg::LineClusters => {
            let Family::LineClusters {
                lines,
                length,
                gap,
                noise,
            } = Family::line_clusters()
            else {
                unreachable!()
            };
            Family::LineClusters {
                lines: a.clusters.unwrap_or(lines),
                length: a.length.unwrap_or(length),
                gap: a.gap.unwrap_or(gap),
                noise: a.noise_sd.unwrap_or(noise),
            }
        }
    };
    let ps = synth::generate(&GenSpec {
        family,
        n: a.n,
        seed: a.seed,
    })?;
    dataio::write_points(&a.out, &ps)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    n: usize,
    k: usize,
    gopc_objective: f64,
    oracle_objective: f64,
    subsets_evaluated: u64,
    equal: bool,
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    if a.k == 0 {
        return Err(config_error("k must be ≥ 1"));
    }
    let p = prepare(&a.input)?;
    let n = p.mm.n();
    if a.k > n {
        return Err(Error::KTooLarge { k: a.k, n }.into());
    }
    if oracle::binomial(n, a.k) > oracle::SUBSET_LIMIT {
        return Err(Error::GuardExceeded {
            n,
            k: a.k,
            limit: oracle::SUBSET_LIMIT,
        }
        .into());
    }
    let model = medoids::run(&p.mm, a.k, &RunOptions::default())?;
    let best = oracle::brute_force(&p.mm, a.k)?;
    let (g, o) = (model.objective, best.best_objective);
    let equal = (g - o).abs() <= 1e-12 * g.abs().max(o.abs());
    let report = VerifyReport {
        n,
        k: a.k,
        gopc_objective: g,
        oracle_objective: o,
        subsets_evaluated: best.evaluated,
        equal,
    };
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    );
    Ok(if equal { 0 } else { 3 })
}
