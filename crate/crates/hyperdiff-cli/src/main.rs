//! Command-line driver for the hyperdiff library: dataset-in, artifacts-out.
//!
//! Every command is a thin layer over the library — it loads a manifest,
//! runs one pipeline stage, writes its artifacts, and records a replay file
//! (`<output>.replay.json`) holding the fully resolved configuration, the
//! seeds, and a content hash of the input data, so any artifact can be
//! traced back to exactly what produced it. Outputs other than timings are
//! deterministic: re-running a command reproduces its files byte for byte.
//!
//! `--json` switches the stdout summary from human-readable lines to a
//! single JSON object. Errors print one JSON object on stderr and exit 1.
//! `HYPERDIFF_THREADS` caps the worker-thread count (the default uses every
//! core; results do not depend on the choice).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use hyperdiff::classifier::{accuracy, predict, train_softmax, TrainConfig};
use hyperdiff::dataset::{
    add_self_loops, load_dataset, load_embedding, load_manifest, parse_hyperedges, parse_id_list,
    parse_weights, save_embedding, save_hyperedges, save_manifest, save_weights, shift_features,
    Dataset, DatasetManifest, FeaturesFormat,
};
use hyperdiff::diffusion::{
    linear_spreading, nonconvergence_demo, nonlinear_diffusion, DiffusionConfig,
};
use hyperdiff::hypergraph::{degree_data, BuildOptions, Hypergraph};
use hyperdiff::matrix::EmbeddingMatrix;
use hyperdiff::operators::{diffusion_map, MixingFamily};
use hyperdiff::pipeline::{
    class_count, embedding_features, grid_search, one_hot_labels, sample_train_ids, smoothed_input,
    DiffusionCache, GridSearchConfig, SplitSpec,
};

#[derive(Parser)]
#[command(
    name = "hyperdiff",
    version,
    about = "Nonlinear hypergraph diffusion for semi-supervised node classification"
)]
struct Cli {
    /// Print a machine-readable JSON summary instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the diffusion fixed-point embedding for a dataset.
    Diffuse(DiffuseArgs),
    /// Train a softmax classifier on a previously computed embedding.
    Train(TrainArgs),
    /// Cross-validate (alpha, p) over a grid with repeated half splits.
    Cv(CvArgs),
    /// Linear label spreading over the clique expansion (the linear baseline).
    Hls(HlsArgs),
    /// Trace the 3-node counterexample showing why unnormalized nonlinear
    /// updates fail: the raw sequence overflows and the norm-pinned one
    /// settles into a limit cycle instead of a fixed point.
    DemoNonconvergence(DemoArgs),
    /// Time diffusion-map applications on a dataset.
    Bench(BenchArgs),
    /// Explicit dataset repairs, each writing a new dataset directory.
    #[command(subcommand)]
    Preprocess(PreprocessCmd),
}

#[derive(Args)]
struct DiffuseArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// Mixing weight in (0, 1) between diffusion and input.
    #[arg(long)]
    alpha: f64,
    /// Power-mean exponent for hyperedge mixing.
    #[arg(long)]
    p: f64,
    /// Relative-change stopping tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Smoothing added to the label/feature input to keep it positive.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Output embedding file (binary; see FORMATS.md).
    #[arg(long)]
    out: PathBuf,
    /// Per-step residual trace CSV (default: `<out>.trace.csv`).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Embedding file written by `diffuse`.
    #[arg(long)]
    emb: PathBuf,
    /// Dataset manifest (for labels).
    #[arg(long)]
    manifest: PathBuf,
    /// Text file of training node ids, one per line.
    #[arg(long)]
    train_ids: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CvArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// `default` or a JSON file `{"alphas": [...], "exponents": [...]}`.
    #[arg(long, default_value = "default")]
    grid: String,
    /// Fraction of nodes whose labels the protocol may see.
    #[arg(long, default_value_t = 0.052)]
    labeled_frac: f64,
    /// Number of random half/half re-splits per grid cell.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full report (deterministic fields) as JSON.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the per-cell grid as flat CSV for plotting.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct HlsArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// Mixing weight in (0, 1).
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Optional output embedding file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// Number of update steps to trace.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output trajectory CSV.
    #[arg(long, default_value = "demo-nonconvergence.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    /// Number of timed diffusion-map applications.
    #[arg(long, default_value_t = 50)]
    iters: usize,
    /// Write the timing stats as JSON (timings are measurements and vary
    /// run to run; the replay file reproduces the procedure, not the times).
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PreprocessCmd {
    /// Shift all feature values so the smallest becomes zero, writing a new
    /// dataset with dense CSV features.
    ShiftFeatures(PreprocessArgs),
    /// Append a single-member hyperedge for every node no hyperedge covers,
    /// writing a new dataset flagged to accept them.
    AddSelfLoops(PreprocessArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input dataset manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// Directory for the repaired dataset (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|()| run(cli)) {
        eprintln!("{}", json!({ "error": format!("{e:#}") }));
        std::process::exit(1);
    }
}

/// Applies `HYPERDIFF_THREADS` to the global worker pool before any
/// parallel work runs. Unset means one worker per core.
fn configure_threads() -> Result<()> {
    match std::env::var("HYPERDIFF_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let threads: usize = raw.parse().ok().filter(|&n| n >= 1).with_context(|| {
                format!("HYPERDIFF_THREADS must be a positive integer, got {raw:?}")
            })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("worker pool already initialized")
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Diffuse(args) => diffuse(args, cli.json),
        Command::Train(args) => train(args, cli.json),
        Command::Cv(args) => cv(args, cli.json),
        Command::Hls(args) => hls(args, cli.json),
        Command::DemoNonconvergence(args) => demo(args, cli.json),
        Command::Bench(args) => bench(args, cli.json),
        Command::Preprocess(PreprocessCmd::ShiftFeatures(args)) => preprocess_shift(args, cli.json),
        Command::Preprocess(PreprocessCmd::AddSelfLoops(args)) => preprocess_loops(args, cli.json),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

fn load(manifest: &Path) -> Result<Dataset> {
    load_dataset(manifest).with_context(|| format!("loading dataset {}", manifest.display()))
}

/// Ids of every labeled node, ascending.
fn labeled_ids(labels: &[Option<usize>]) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|_| i))
        .collect()
}

/// The diffusion input for a whole dataset: smoothed one-hot labels of all
/// labeled nodes, with the feature block appended when present.
fn full_input(ds: &Dataset, epsilon: f64) -> Result<EmbeddingMatrix> {
    let classes = class_count(&ds.labels)?;
    let y = one_hot_labels(&ds.labels, classes, &labeled_ids(&ds.labels))?;
    Ok(smoothed_input(&y, ds.features.as_ref(), epsilon)?)
}

fn hex32(bytes: [u8; 32]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `<primary>.replay.json` recording what produced an artifact.
fn write_replay(primary: &Path, payload: serde_json::Value) -> Result<PathBuf> {
    let path = PathBuf::from(format!("{}.replay.json", primary.display()));
    fs::write(&path, serde_json::to_string_pretty(&payload)? + "\n")
        .with_context(|| format!("writing replay file {}", path.display()))?;
    Ok(path)
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn copy_into(base: &Path, rel: &str, out_dir: &Path) -> Result<()> {
    let from = base.join(rel);
    let to = out_dir.join(rel);
    if let Some(parent) = to.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::copy(&from, &to)
        .with_context(|| format!("copying {} to {}", from.display(), to.display()))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// diffuse
// ---------------------------------------------------------------------------

fn diffuse(args: DiffuseArgs, as_json: bool) -> Result<()> {
    let ds = load(&args.manifest)?;
    let deg = degree_data(&ds.hypergraph);
    let u = full_input(&ds, args.epsilon)?;
    let cfg = DiffusionConfig::new(args.alpha, MixingFamily::power_mean(args.p)?)?
        .with_tol(args.tol)?
        .with_max_iters(args.max_iters)?;

    let started = Instant::now();
    let result = nonlinear_diffusion(&ds.hypergraph, &deg, &u, &cfg)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    save_embedding(&args.out, &result.embedding)?;
    let trace_path = args
        .trace
        .unwrap_or_else(|| PathBuf::from(format!("{}.trace.csv", args.out.display())));
    let mut trace = String::from("step,residual\n");
    for (k, r) in result.residuals.iter().enumerate() {
        trace.push_str(&format!("{},{r}\n", k + 1));
    }
    write_text(&trace_path, &trace)?;

    let replay = write_replay(
        &args.out,
        json!({
            "command": "diffuse",
            "version": env!("CARGO_PKG_VERSION"),
            "manifest": args.manifest.display().to_string(),
            "dataset_hash": hex32(ds.hypergraph.content_hash()),
            "alpha": args.alpha,
            "p": args.p,
            "tol": args.tol,
            "max_iters": args.max_iters,
            "epsilon": args.epsilon,
        }),
    )?;

    let summary = json!({
        "iterations": result.iterations,
        "converged": result.converged,
        "final_residual": result.final_residual(),
        "gain": result.gain,
        "elapsed_ms": elapsed_ms,
        "embedding": args.out.display().to_string(),
        "trace": trace_path.display().to_string(),
        "replay": replay.display().to_string(),
    });
    if as_json {
        println!("{summary}");
    } else {
        println!(
            "diffused {} nodes x {} columns: {} iterations, residual {:.3e}{}",
            result.embedding.rows(),
            result.embedding.cols(),
            result.iterations,
            result.final_residual(),
            if result.converged {
                String::new()
            } else {
                format!(" (NOT converged within {})", args.max_iters)
            }
        );
        println!("embedding -> {}", args.out.display());
        println!("trace     -> {}", trace_path.display());
        println!("replay    -> {}", replay.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

fn train(args: TrainArgs, as_json: bool) -> Result<()> {
    let ds = load(&args.manifest)?;
    let emb = load_embedding(&args.emb)
        .with_context(|| format!("loading embedding {}", args.emb.display()))?;
    if emb.rows() != ds.manifest.meta.nodes {
        bail!(
            "embedding has {} rows but the dataset declares {} nodes",
            emb.rows(),
            ds.manifest.meta.nodes
        );
    }
    let text = fs::read_to_string(&args.train_ids)
        .with_context(|| format!("reading {}", args.train_ids.display()))?;
    let mut train_ids = parse_id_list(&text, &args.train_ids)?;
    train_ids.sort_unstable();
    train_ids.dedup();

    let classes = class_count(&ds.labels)?;
    let feats = embedding_features(&emb);
    let cfg = TrainConfig {
        learning_rate: args.lr,
        epochs: args.epochs,
        l2: args.l2,
        seed: args.seed,
    };
    let started = Instant::now();
    let run = train_softmax(&feats, &ds.labels, &train_ids, classes, &cfg)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    run.model.save(&args.out)?;

    let preds = predict(&run.model, &feats)?;
    let eval_ids: Vec<usize> = labeled_ids(&ds.labels)
        .into_iter()
        .filter(|i| train_ids.binary_search(i).is_err())
        .collect();
    let test_accuracy = if eval_ids.is_empty() {
        None
    } else {
        Some(accuracy(&preds, &ds.labels, &eval_ids)?)
    };

    let replay = write_replay(
        &args.out,
        json!({
            "command": "train",
            "version": env!("CARGO_PKG_VERSION"),
            "manifest": args.manifest.display().to_string(),
            "dataset_hash": hex32(ds.hypergraph.content_hash()),
            "embedding": args.emb.display().to_string(),
            "embedding_shape": [emb.rows(), emb.cols()],
            "train_ids": args.train_ids.display().to_string(),
            "lr": args.lr,
            "epochs": args.epochs,
            "l2": args.l2,
            "seed": args.seed,
        }),
    )?;

    let summary = json!({
        "train_nodes": train_ids.len(),
        "eval_nodes": eval_ids.len(),
        "final_loss": run.loss_history.last(),
        "test_accuracy": test_accuracy,
        "elapsed_ms": elapsed_ms,
        "model": args.out.display().to_string(),
        "replay": replay.display().to_string(),
    });
    if as_json {
        println!("{summary}");
    } else {
        match test_accuracy {
            Some(acc) => println!(
                "trained on {} nodes; accuracy on the {} held-out labeled nodes: {acc:.4}",
                train_ids.len(),
                eval_ids.len()
            ),
            None => println!(
                "trained on {} nodes; no labeled nodes left to evaluate",
                train_ids.len()
            ),
        }
        println!("model  -> {}", args.out.display());
        println!("replay -> {}", replay.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// cv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct GridFile {
    alphas: Vec<f64>,
    exponents: Vec<f64>,
}

fn cv(args: CvArgs, as_json: bool) -> Result<()> {
    let ds = load(&args.manifest)?;
    let deg = degree_data(&ds.hypergraph);

    let mut config = GridSearchConfig {
        repeats: args.repeats,
        seed: args.seed,
        ..GridSearchConfig::default()
    };
    if args.grid != "default" {
        let text = fs::read_to_string(&args.grid)
            .with_context(|| format!("reading grid file {}", args.grid))?;
        let grid: GridFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing grid file {}", args.grid))?;
        config.alphas = grid.alphas;
        config.exponents = grid.exponents;
    }

    let train_pool = sample_train_ids(
        &ds.labels,
        &SplitSpec {
            fraction: args.labeled_frac,
            seed: args.seed,
            balanced: true,
        },
    )?;
    let cache = DiffusionCache::new();
    let report = grid_search(
        &ds.hypergraph,
        &deg,
        &ds.labels,
        ds.features.as_ref(),
        &train_pool,
        &config,
        &cache,
    )?;

    // The written report carries only run-deterministic fields; wall time
    // goes to the console.
    let deterministic = json!({
        "cells": report.cells,
        "best_alpha": report.best_alpha,
        "best_exponent": report.best_exponent,
        "best_mean_accuracy": report.best_mean_accuracy,
        "repeats": report.repeats,
        "seed": report.seed,
        "labeled_frac": args.labeled_frac,
        "train_pool_size": train_pool.len(),
        "diffusions_run": report.diffusions_run,
        "cache_hits": report.cache_hits,
        "dataset_hash": hex32(ds.hypergraph.content_hash()),
    });
    if let Some(path) = &args.out_json {
        write_text(
            path,
            &(serde_json::to_string_pretty(&deterministic)? + "\n"),
        )?;
        write_replay(
            path,
            json!({
                "command": "cv",
                "version": env!("CARGO_PKG_VERSION"),
                "manifest": args.manifest.display().to_string(),
                "dataset_hash": hex32(ds.hypergraph.content_hash()),
                "grid": args.grid,
                "alphas": config.alphas,
                "exponents": config.exponents,
                "labeled_frac": args.labeled_frac,
                "repeats": args.repeats,
                "seed": args.seed,
            }),
        )?;
    }
    if let Some(path) = &args.out_csv {
        let mut csv = String::from("alpha,exponent,mean_accuracy,std_accuracy\n");
        for cell in &report.cells {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                cell.alpha, cell.exponent, cell.mean_accuracy, cell.std_accuracy
            ));
        }
        write_text(path, &csv)?;
    }

    if as_json {
        let mut summary = deterministic;
        summary["elapsed_ms"] = json!(report.elapsed_ms);
        println!("{summary}");
    } else {
        println!(
            "validated {} cells x {} repeats ({} diffusions run, {} cache hits) in {:.0} ms",
            report.cells.len(),
            report.repeats,
            report.diffusions_run,
            report.cache_hits,
            report.elapsed_ms
        );
        println!(
            "best cell: alpha = {}, p = {}, mean validation accuracy {:.4}",
            report.best_alpha, report.best_exponent, report.best_mean_accuracy
        );
        if let Some(path) = &args.out_json {
            println!("report -> {}", path.display());
        }
        if let Some(path) = &args.out_csv {
            println!("grid   -> {}", path.display());
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// hls
// ---------------------------------------------------------------------------

fn hls(args: HlsArgs, as_json: bool) -> Result<()> {
    let ds = load(&args.manifest)?;
    let deg = degree_data(&ds.hypergraph);
    let classes = class_count(&ds.labels)?;
    let y = one_hot_labels(&ds.labels, classes, &labeled_ids(&ds.labels))?;

    let result = linear_spreading(
        &ds.hypergraph,
        &deg,
        &y,
        args.alpha,
        args.tol,
        args.max_iters,
    )?;
    let diverged = result.final_residual().is_infinite();

    if let Some(out) = &args.out {
        save_embedding(out, &result.embedding)?;
        write_replay(
            out,
            json!({
                "command": "hls",
                "version": env!("CARGO_PKG_VERSION"),
                "manifest": args.manifest.display().to_string(),
                "dataset_hash": hex32(ds.hypergraph.content_hash()),
                "alpha": args.alpha,
                "tol": args.tol,
                "max_iters": args.max_iters,
            }),
        )?;
    }

    let summary = json!({
        "iterations": result.iterations,
        "converged": result.converged,
        "diverged": diverged,
        "final_residual": result.final_residual(),
        "embedding": args.out.as_ref().map(|p| p.display().to_string()),
    });
    if as_json {
        println!("{summary}");
    } else if diverged {
        println!(
            "linear spreading DIVERGED after {} iterations (alpha = {} is too large for this hypergraph's clique expansion); the last finite iterate was kept",
            result.iterations, args.alpha
        );
    } else {
        println!(
            "linear spreading: {} iterations, residual {:.3e}{}",
            result.iterations,
            result.final_residual(),
            if result.converged {
                ""
            } else {
                " (budget exhausted before the tolerance)"
            }
        );
        if let Some(out) = &args.out {
            println!("embedding -> {}", out.display());
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// demo-nonconvergence
// ---------------------------------------------------------------------------

fn demo(args: DemoArgs, as_json: bool) -> Result<()> {
    let demo = nonconvergence_demo(args.steps, args.seed);

    // One row per step: the normalized iterate always exists; the raw one
    // goes blank once it leaves f64 range.
    let mut csv = String::from(
        "step,normalized_1,normalized_2,normalized_3,normalized_residual,raw_1,raw_2,raw_3,raw_residual\n",
    );
    for k in 1..=args.steps {
        let x = demo.normalized_path[k];
        let r = demo.normalized_residuals[k - 1];
        let raw = demo.unnormalized_path.get(k);
        let raw_r = demo.unnormalized_residuals.get(k - 1);
        let raw_cols = match (raw, raw_r) {
            (Some(z), Some(rr)) => format!("{},{},{},{rr}", z[0], z[1], z[2]),
            _ => ",,,".to_string(),
        };
        csv.push_str(&format!("{k},{},{},{},{r},{raw_cols}\n", x[0], x[1], x[2]));
    }
    write_text(&args.out, &csv)?;
    let replay = write_replay(
        &args.out,
        json!({
            "command": "demo-nonconvergence",
            "version": env!("CARGO_PKG_VERSION"),
            "steps": args.steps,
            "seed": args.seed,
        }),
    )?;

    let summary = json!({
        "steps": args.steps,
        "min_normalized_residual": demo.min_normalized_residual,
        "cycle_period": demo.cycle_period,
        "raw_sequence_diverged_at": demo.diverged_at,
        "trajectory": args.out.display().to_string(),
        "replay": replay.display().to_string(),
    });
    if as_json {
        println!("{summary}");
    } else {
        println!(
            "normalized sequence: smallest residual over {} steps was {:.3e}{}",
            args.steps,
            demo.min_normalized_residual,
            match demo.cycle_period {
                Some(q) => format!(" (settled into a period-{q} cycle)"),
                None => String::new(),
            }
        );
        match demo.diverged_at {
            Some(step) => println!("raw sequence: left f64 range at step {step}"),
            None => println!("raw sequence: still finite after {} steps", args.steps),
        }
        println!("trajectory -> {}", args.out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn bench(args: BenchArgs, as_json: bool) -> Result<()> {
    if args.iters == 0 {
        bail!("--iters must be at least 1");
    }
    let ds = load(&args.manifest)?;
    let deg = degree_data(&ds.hypergraph);
    let u = full_input(&ds, 1e-6)?;
    let mix = MixingFamily::power_mean(args.p)?;
    DiffusionConfig::new(args.alpha, mix)?; // validate alpha up front

    for _ in 0..3 {
        diffusion_map(&ds.hypergraph, &deg, &mix, &u)?;
    }
    let mut samples = Vec::with_capacity(args.iters);
    for _ in 0..args.iters {
        let t = Instant::now();
        diffusion_map(&ds.hypergraph, &deg, &mix, &u)?;
        samples.push(t.elapsed().as_secs_f64() * 1e3);
    }
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let stats = json!({
        "nodes": ds.hypergraph.node_count(),
        "hyperedges": ds.hypergraph.edge_count(),
        "incidence_nnz": ds.hypergraph.nnz(),
        "columns": u.cols(),
        "iters": args.iters,
        "per_iteration_ms": {
            "min": sorted.first(),
            "median": sorted[sorted.len() / 2],
            "mean": samples.iter().sum::<f64>() / samples.len() as f64,
            "max": sorted.last(),
        },
    });

    if let Some(path) = &args.out_json {
        write_text(path, &(serde_json::to_string_pretty(&stats)? + "\n"))?;
        write_replay(
            path,
            json!({
                "command": "bench",
                "version": env!("CARGO_PKG_VERSION"),
                "manifest": args.manifest.display().to_string(),
                "dataset_hash": hex32(ds.hypergraph.content_hash()),
                "alpha": args.alpha,
                "p": args.p,
                "iters": args.iters,
            }),
        )?;
    }
    if as_json {
        println!("{stats}");
    } else {
        println!(
            "{} nodes, {} hyperedges, {} incidence entries, {} columns",
            ds.hypergraph.node_count(),
            ds.hypergraph.edge_count(),
            ds.hypergraph.nnz(),
            u.cols()
        );
        println!(
            "per-iteration time over {} runs: median {:.3} ms (min {:.3}, mean {:.3}, max {:.3})",
            args.iters,
            sorted[sorted.len() / 2],
            sorted.first().unwrap(),
            samples.iter().sum::<f64>() / samples.len() as f64,
            sorted.last().unwrap()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

fn preprocess_shift(args: PreprocessArgs, as_json: bool) -> Result<()> {
    let ds = load(&args.manifest)?;
    let Some(features) = &ds.features else {
        bail!("dataset has no feature matrix to shift");
    };
    let (shifted, shift) = shift_features(features);

    fs::create_dir_all(&args.out_dir)?;
    let base = args.manifest.parent().unwrap_or_else(|| Path::new("."));
    copy_into(base, &ds.manifest.hyperedges, &args.out_dir)?;
    if let Some(weights) = &ds.manifest.weights {
        copy_into(base, weights, &args.out_dir)?;
    }
    copy_into(base, &ds.manifest.labels, &args.out_dir)?;

    let mut csv = String::new();
    for i in 0..shifted.rows() {
        let row: Vec<String> = shifted.row(i).iter().map(|v| format!("{v}")).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write_text(&args.out_dir.join("features-shifted.csv"), &csv)?;

    let manifest = DatasetManifest {
        name: format!("{}-shifted", ds.manifest.name),
        features: Some("features-shifted.csv".into()),
        features_format: FeaturesFormat::DenseCsv,
        ..ds.manifest.clone()
    };
    let manifest_path = args.out_dir.join("manifest.json");
    save_manifest(&manifest_path, &manifest)?;
    load_dataset(&manifest_path).context("repaired dataset failed to load back")?;

    if as_json {
        println!(
            "{}",
            json!({ "shift": shift, "manifest": manifest_path.display().to_string() })
        );
    } else {
        println!("shifted features by {shift} (smallest value is now 0)");
        println!("dataset -> {}", manifest_path.display());
    }
    Ok(())
}

fn preprocess_loops(args: PreprocessArgs, as_json: bool) -> Result<()> {
    // Deliberately avoids the validating loader: the whole point is that the
    // input dataset has isolated nodes the strict builder would reject.
    let manifest = load_manifest(&args.manifest)?;
    let base = args.manifest.parent().unwrap_or_else(|| Path::new("."));
    let edges_path = base.join(&manifest.hyperedges);
    let text = fs::read_to_string(&edges_path)
        .with_context(|| format!("reading {}", edges_path.display()))?;
    let mut lists = parse_hyperedges(&text, &edges_path)?;
    let weights = match &manifest.weights {
        Some(rel) => {
            let path = base.join(rel);
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            Some(parse_weights(&text, &path)?)
        }
        None => None,
    };

    let repaired = add_self_loops(&mut lists, manifest.meta.nodes);
    let weights = weights.map(|mut w| {
        w.extend(std::iter::repeat_n(1.0, repaired.len()));
        w
    });
    let h = Hypergraph::from_edge_lists_with(
        manifest.meta.nodes,
        &lists,
        weights.as_deref(),
        BuildOptions {
            allow_self_loops: true,
        },
    )?;

    fs::create_dir_all(&args.out_dir)?;
    save_hyperedges(&args.out_dir.join(&manifest.hyperedges), &h)?;
    if let Some(rel) = &manifest.weights {
        save_weights(&args.out_dir.join(rel), &h)?;
    }
    copy_into(base, &manifest.labels, &args.out_dir)?;
    if let Some(rel) = &manifest.features {
        copy_into(base, rel, &args.out_dir)?;
    }

    let manifest = DatasetManifest {
        name: format!("{}-self-loops", manifest.name),
        allow_self_loops: true,
        meta: hyperdiff::dataset::DatasetMeta {
            hyperedges: h.edge_count(),
            ..manifest.meta
        },
        ..manifest
    };
    let manifest_path = args.out_dir.join("manifest.json");
    save_manifest(&manifest_path, &manifest)?;
    load_dataset(&manifest_path).context("repaired dataset failed to load back")?;

    if as_json {
        println!(
            "{}",
            json!({
                "repaired_nodes": repaired,
                "manifest": manifest_path.display().to_string(),
            })
        );
    } else {
        println!(
            "appended {} self-loop hyperedge(s) covering node(s) {repaired:?}",
            repaired.len()
        );
        println!("dataset -> {}", manifest_path.display());
    }
    Ok(())
}
