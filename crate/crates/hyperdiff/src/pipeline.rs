//! End-to-end semi-supervised classification pipeline.
//!
//! Pieces, in the order a run uses them:
//!
//! 1. [`sample_train_ids`] — seeded (optionally label-balanced) selection of
//!    the revealed training nodes.
//! 2. [`one_hot_labels`] + [`smoothed_input`] — assemble the diffusion input
//!    `U = (1 - epsilon) * [Y | X] + epsilon` so every entry is strictly
//!    positive and power-mean mixing is well defined everywhere.
//! 3. [`DiffusionCache::fetch_or_run`] — compute (or reuse) the diffusion
//!    fixed point, content-addressed by hypergraph, input, and
//!    configuration.
//! 4. [`embedding_features`] — row-normalize the embedding for the
//!    classifier: the fixed point is only defined up to the process's
//!    normalization, so per-row scale carries no class information.
//! 5. [`grid_search`] / [`evaluate`] — model selection over `(alpha, p)`
//!    with repeated balanced 50/50 validation splits, and final repeated
//!    train/test evaluation.
//!
//! Every seeded step uses its own counter-derived ChaCha stream, so whole
//! reports are bit-reproducible for a given seed and independent of thread
//! count.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::classifier::{accuracy, predict, train_softmax, TrainConfig};
use crate::diffusion::{nonlinear_diffusion, DiffusionConfig, DiffusionResult};
use crate::error::{Error, Result};
use crate::hypergraph::{DegreeData, Hypergraph};
use crate::matrix::EmbeddingMatrix;
use crate::operators::MixingFamily;

/// Default smoothing constant added to every entry of the diffusion input.
pub const DEFAULT_SMOOTHING: f64 = 1e-6;

/// Number of classes implied by a label vector: `max label + 1`. Fails if
/// nothing is labeled.
pub fn class_count(labels: &[Option<usize>]) -> Result<usize> {
    labels
        .iter()
        .flatten()
        .max()
        .map(|&m| m + 1)
        .ok_or_else(|| Error::InvalidConfig("no labeled nodes in the dataset".into()))
}

/// One-hot label matrix `Y` (`n x classes`): row `i` has a 1 in column
/// `labels[i]` for each `i` in `train_ids`, zeros elsewhere. Only the
/// revealed training labels enter the diffusion input — validation and test
/// labels must never leak into the embedding.
pub fn one_hot_labels(
    labels: &[Option<usize>],
    classes: usize,
    train_ids: &[usize],
) -> Result<EmbeddingMatrix> {
    let n = labels.len();
    let mut y = EmbeddingMatrix::zeros(n, classes).with_label_cols(classes)?;
    for &i in train_ids {
        if i >= n {
            return Err(Error::ShapeMismatch {
                expected: format!("node ids below {n}"),
                got: format!("node id {i}"),
            });
        }
        match labels[i] {
            None => return Err(Error::MissingLabel { node: i }),
            Some(label) if label >= classes => {
                return Err(Error::LabelOutOfRange {
                    node: i,
                    label,
                    classes,
                })
            }
            Some(label) => y.set(i, label, 1.0),
        }
    }
    Ok(y)
}

/// Assembles the strictly positive diffusion input
/// `U = (1 - epsilon) * [Y | X] + epsilon`.
///
/// `x` (optional feature block) must be nonnegative — shift features
/// explicitly beforehand if they are not. With the default `epsilon`,
/// one-hot entries come out exactly 1.0 and zeros become `epsilon`. The
/// label/feature block split is recorded on the result.
pub fn smoothed_input(
    y: &EmbeddingMatrix,
    x: Option<&EmbeddingMatrix>,
    epsilon: f64,
) -> Result<EmbeddingMatrix> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "smoothing epsilon must lie strictly between 0 and 1, got {epsilon}"
        )));
    }
    if let Some(&bad) = y.data().iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidConfig(format!(
            "label indicator must be nonnegative and finite, found {bad}"
        )));
    }
    let feature_cols = x.map_or(0, EmbeddingMatrix::cols);
    if let Some(x) = x {
        if x.rows() != y.rows() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} feature rows", y.rows()),
                got: format!("{} feature rows", x.rows()),
            });
        }
        let cols = x.cols();
        for (idx, &v) in x.data().iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeFeature {
                    row: idx / cols,
                    col: idx % cols,
                    value: v,
                });
            }
        }
    }

    let n = y.rows();
    let label_cols = y.cols();
    let mut u = EmbeddingMatrix::zeros(n, label_cols + feature_cols).with_label_cols(label_cols)?;
    for i in 0..n {
        let row = u.row_mut(i);
        for (j, &v) in y.row(i).iter().enumerate() {
            row[j] = (1.0 - epsilon) * v + epsilon;
        }
        if let Some(x) = x {
            for (j, &v) in x.row(i).iter().enumerate() {
                row[label_cols + j] = (1.0 - epsilon) * v + epsilon;
            }
        }
    }
    Ok(u)
}

/// How training nodes are drawn from the labeled pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSpec {
    /// Fraction of the labeled pool to reveal, strictly between 0 and 1.
    pub fraction: f64,
    /// Seed for the selection shuffle.
    pub seed: u64,
    /// When set, draw `floor(fraction * class size)` from each class
    /// (at least one), instead of sampling the pool as a whole.
    pub balanced: bool,
}

impl SplitSpec {
    fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "split fraction must lie strictly between 0 and 1, got {}",
                self.fraction
            )));
        }
        Ok(())
    }
}

fn labeled_by_class(labels: &[Option<usize>]) -> Result<Vec<Vec<usize>>> {
    let classes = class_count(labels)?;
    let mut pools = vec![Vec::new(); classes];
    for (i, label) in labels.iter().enumerate() {
        if let Some(c) = *label {
            pools[c].push(i);
        }
    }
    Ok(pools)
}

/// Draws the revealed training ids from the labeled pool per `spec`.
/// Deterministic for a given seed; the result is sorted ascending.
pub fn sample_train_ids(labels: &[Option<usize>], spec: &SplitSpec) -> Result<Vec<usize>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut picked = Vec::new();
    if spec.balanced {
        for pool in labeled_by_class(labels)? {
            if pool.is_empty() {
                continue;
            }
            let mut pool = pool;
            pool.shuffle(&mut rng);
            let take = ((spec.fraction * pool.len() as f64).floor() as usize).clamp(1, pool.len());
            picked.extend_from_slice(&pool[..take]);
        }
    } else {
        let mut pool: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|_| i))
            .collect();
        if pool.is_empty() {
            return Err(Error::InvalidConfig(
                "no labeled nodes in the dataset".into(),
            ));
        }
        pool.shuffle(&mut rng);
        let take = ((spec.fraction * pool.len() as f64).floor() as usize).clamp(1, pool.len());
        picked.extend_from_slice(&pool[..take]);
    }
    if picked.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Splits `train_ids` into two label-balanced halves (per-class counts
/// differ by at most one; the first half receives the extra element of an
/// odd class). Deterministic for a given seed.
pub fn split_halves(
    train_ids: &[usize],
    labels: &[Option<usize>],
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if train_ids.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let classes = class_count(labels)?;
    let mut pools = vec![Vec::new(); classes];
    for &i in train_ids {
        match labels.get(i).copied().flatten() {
            Some(c) => pools[c].push(i),
            None => return Err(Error::MissingLabel { node: i }),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for mut pool in pools {
        pool.shuffle(&mut rng);
        let take = pool.len().div_ceil(2);
        first.extend_from_slice(&pool[..take]);
        second.extend_from_slice(&pool[take..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// Classifier view of an embedding: each row divided by its L1 norm
/// (zero rows left untouched).
///
/// The diffusion fixed point is defined only up to the process's global
/// normalization, and rows of very different magnitude carry the same class
/// signal in their *direction* — normalizing removes the scale disparity
/// between nodes that received seed mass and nodes that did not.
pub fn embedding_features(embedding: &EmbeddingMatrix) -> EmbeddingMatrix {
    let mut out = embedding.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let norm: f64 = row.iter().map(|v| v.abs()).sum();
        if norm > 0.0 {
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }
    out
}

/// Whether a cache lookup reused an existing fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
}

/// Content-addressed store of diffusion fixed points.
///
/// The key is a SHA-256 over the hypergraph's canonical content, the input
/// matrix bits, and the configuration (`alpha`, mixing, tolerance — but not
/// `max_iters`, which bounds work without changing the fixed point). Only
/// converged results are stored, so a hit can never resurrect a truncated
/// run. Counters expose hits, misses, and total diffusion iterations
/// actually executed.
#[derive(Debug, Default)]
pub struct DiffusionCache {
    entries: Mutex<HashMap<[u8; 32], Arc<DiffusionResult>>>,
    hits: AtomicU64,
    misses: AtomicU64,
    iterations_run: AtomicU64,
}

impl DiffusionCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(h: &Hypergraph, u: &EmbeddingMatrix, cfg: &DiffusionConfig) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(h.content_hash());
        hasher.update((u.rows() as u64).to_le_bytes());
        hasher.update((u.cols() as u64).to_le_bytes());
        hasher.update((u.label_cols() as u64).to_le_bytes());
        for &v in u.data() {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher.update(cfg.cache_tag());
        hasher.finalize().into()
    }

    /// Returns the cached fixed point for `(h, u, cfg)` or runs the
    /// diffusion and (if it converged) stores it.
    pub fn fetch_or_run(
        &self,
        h: &Hypergraph,
        deg: &DegreeData,
        u: &EmbeddingMatrix,
        cfg: &DiffusionConfig,
    ) -> Result<(Arc<DiffusionResult>, CacheOutcome)> {
        let key = Self::key(h, u, cfg);
        if let Some(found) = self.entries.lock().unwrap().get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok((Arc::clone(found), CacheOutcome::Hit));
        }
        let result = Arc::new(nonlinear_diffusion(h, deg, u, cfg)?);
        self.misses.fetch_add(1, Ordering::Relaxed);
        self.iterations_run
            .fetch_add(result.iterations as u64, Ordering::Relaxed);
        if result.converged {
            self.entries
                .lock()
                .unwrap()
                .insert(key, Arc::clone(&result));
        }
        Ok((result, CacheOutcome::Miss))
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    /// Total diffusion iterations executed on behalf of this cache.
    pub fn iterations_run(&self) -> u64 {
        self.iterations_run.load(Ordering::Relaxed)
    }

    /// Number of stored fixed points.
    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Model-selection grid over `(alpha, exponent)` with repeated balanced
/// 50/50 splits of the revealed training nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchConfig {
    /// Candidate mixing weights, each strictly between 0 and 1.
    pub alphas: Vec<f64>,
    /// Candidate power-mean exponents.
    pub exponents: Vec<f64>,
    /// Number of reseeded validation splits to average per cell.
    pub repeats: usize,
    /// Base seed; repeat `r` uses `seed + r`.
    pub seed: u64,
    /// Diffusion stopping threshold.
    pub tol: f64,
    /// Diffusion iteration budget.
    pub max_iters: usize,
    /// Input smoothing constant.
    pub epsilon: f64,
    /// Classifier hyperparameters.
    pub train: TrainConfig,
}

impl Default for GridSearchConfig {
    fn default() -> Self {
        Self {
            alphas: (1..=9).map(|i| i as f64 / 10.0).collect(),
            exponents: vec![1.0, 2.0, 3.0, 5.0, 10.0],
            repeats: 5,
            seed: 0,
            tol: 1e-6,
            max_iters: 500,
            epsilon: DEFAULT_SMOOTHING,
            train: TrainConfig::default(),
        }
    }
}

/// Mean validation accuracy of one grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct GridCell {
    pub alpha: f64,
    pub exponent: f64,
    pub mean_accuracy: f64,
    /// Population standard deviation over the repeats.
    pub std_accuracy: f64,
}

/// Outcome of [`grid_search`].
#[derive(Debug, Clone, Serialize)]
pub struct GridSearchReport {
    /// All cells, in `(alpha ascending, exponent ascending)` order.
    pub cells: Vec<GridCell>,
    pub best_alpha: f64,
    pub best_exponent: f64,
    pub best_mean_accuracy: f64,
    pub repeats: usize,
    pub seed: u64,
    pub elapsed_ms: f64,
    /// Diffusions actually executed (cache misses) during the search.
    pub diffusions_run: u64,
    /// Diffusions served from the cache during the search.
    pub cache_hits: u64,
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Selects `(alpha, exponent)` by mean validation accuracy over `repeats`
/// reseeded balanced 50/50 splits of `train_ids`.
///
/// Per repeat, only the training half's labels enter the diffusion input;
/// the validation half is scored on the resulting embedding. Ties are
/// broken toward the smaller `alpha`, then the smaller exponent.
pub fn grid_search(
    h: &Hypergraph,
    deg: &DegreeData,
    labels: &[Option<usize>],
    features: Option<&EmbeddingMatrix>,
    train_ids: &[usize],
    config: &GridSearchConfig,
    cache: &DiffusionCache,
) -> Result<GridSearchReport> {
    if config.alphas.is_empty() || config.exponents.is_empty() {
        return Err(Error::InvalidConfig(
            "grid search needs at least one alpha and one exponent".into(),
        ));
    }
    if config.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let classes = class_count(labels)?;
    let started = Instant::now();
    let hits_before = cache.hits();
    let misses_before = cache.misses();

    let mut sorted_alphas = config.alphas.clone();
    sorted_alphas.sort_by(f64::total_cmp);
    let mut sorted_exponents = config.exponents.clone();
    sorted_exponents.sort_by(f64::total_cmp);

    let cells_n = sorted_alphas.len() * sorted_exponents.len();
    let mut scores: Vec<Vec<f64>> = vec![Vec::with_capacity(config.repeats); cells_n];
    for r in 0..config.repeats {
        let split_seed = config.seed.wrapping_add(r as u64);
        let (fit_half, val_half) = split_halves(train_ids, labels, split_seed)?;
        if fit_half.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if val_half.is_empty() {
            return Err(Error::EmptyEvalSet);
        }
        let y = one_hot_labels(labels, classes, &fit_half)?;
        let u = smoothed_input(&y, features, config.epsilon)?;
        for (ai, &alpha) in sorted_alphas.iter().enumerate() {
            for (pi, &exponent) in sorted_exponents.iter().enumerate() {
                let cfg = DiffusionConfig::new(alpha, MixingFamily::power_mean(exponent)?)?
                    .with_tol(config.tol)?
                    .with_max_iters(config.max_iters)?;
                let (result, _) = cache.fetch_or_run(h, deg, &u, &cfg)?;
                let feats = embedding_features(&result.embedding);
                let run = train_softmax(&feats, labels, &fit_half, classes, &config.train)?;
                let preds = predict(&run.model, &feats)?;
                let acc = accuracy(&preds, labels, &val_half)?;
                scores[ai * sorted_exponents.len() + pi].push(acc);
            }
        }
    }

    let mut cells = Vec::with_capacity(cells_n);
    let mut best: Option<usize> = None;
    for (ai, &alpha) in sorted_alphas.iter().enumerate() {
        for (pi, &exponent) in sorted_exponents.iter().enumerate() {
            let idx = ai * sorted_exponents.len() + pi;
            let (mean_accuracy, std_accuracy) = mean_and_std(&scores[idx]);
            cells.push(GridCell {
                alpha,
                exponent,
                mean_accuracy,
                std_accuracy,
            });
            // Strictly-greater comparison in (alpha asc, exponent asc) order
            // implements the tie-break: smaller alpha, then smaller exponent.
            if best.is_none_or(|b| mean_accuracy > cells[b].mean_accuracy) {
                best = Some(idx);
            }
        }
    }
    let best = best.expect("grid is nonempty");

    Ok(GridSearchReport {
        best_alpha: cells[best].alpha,
        best_exponent: cells[best].exponent,
        best_mean_accuracy: cells[best].mean_accuracy,
        cells,
        repeats: config.repeats,
        seed: config.seed,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        diffusions_run: cache.misses() - misses_before,
        cache_hits: cache.hits() - hits_before,
    })
}

/// Configuration for [`evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    pub alpha: f64,
    pub mix: MixingFamily,
    /// How the revealed training pool is drawn; resample `s` uses
    /// `split.seed + s`.
    pub split: SplitSpec,
    /// Number of reseeded train/test resamples.
    pub resamples: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub epsilon: f64,
    pub train: TrainConfig,
}

/// Outcome of [`evaluate`].
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    /// Test accuracy per resample.
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Population standard deviation over the resamples.
    pub std_accuracy: f64,
    /// Seed used by each resample.
    pub seeds: Vec<u64>,
    /// Wall-clock milliseconds spent in diffusion (cache hits cost ~0).
    pub diffusion_ms: f64,
    /// Wall-clock milliseconds spent training classifiers.
    pub training_ms: f64,
    /// Whether every diffusion involved converged.
    pub all_converged: bool,
}

/// Repeatedly resamples the revealed training pool, diffuses its labels,
/// trains on the revealed nodes, and scores on the labeled complement.
pub fn evaluate(
    h: &Hypergraph,
    deg: &DegreeData,
    labels: &[Option<usize>],
    features: Option<&EmbeddingMatrix>,
    config: &EvaluationConfig,
    cache: &DiffusionCache,
) -> Result<EvaluationReport> {
    if config.resamples == 0 {
        return Err(Error::InvalidConfig("resamples must be at least 1".into()));
    }
    let classes = class_count(labels)?;
    let mut accuracies = Vec::with_capacity(config.resamples);
    let mut seeds = Vec::with_capacity(config.resamples);
    let mut diffusion_ms = 0.0;
    let mut training_ms = 0.0;
    let mut all_converged = true;

    for s in 0..config.resamples {
        let seed = config.split.seed.wrapping_add(s as u64);
        let spec = SplitSpec {
            seed,
            ..config.split
        };
        let train_ids = sample_train_ids(labels, &spec)?;
        let eval_ids: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|_| i))
            .filter(|i| train_ids.binary_search(i).is_err())
            .collect();
        if eval_ids.is_empty() {
            return Err(Error::EmptyEvalSet);
        }

        let y = one_hot_labels(labels, classes, &train_ids)?;
        let u = smoothed_input(&y, features, config.epsilon)?;
        let cfg = DiffusionConfig::new(config.alpha, config.mix)?
            .with_tol(config.tol)?
            .with_max_iters(config.max_iters)?;
        let t0 = Instant::now();
        let (result, _) = cache.fetch_or_run(h, deg, &u, &cfg)?;
        diffusion_ms += t0.elapsed().as_secs_f64() * 1e3;
        all_converged &= result.converged;

        let feats = embedding_features(&result.embedding);
        let t1 = Instant::now();
        let run = train_softmax(&feats, labels, &train_ids, classes, &config.train)?;
        training_ms += t1.elapsed().as_secs_f64() * 1e3;
        let preds = predict(&run.model, &feats)?;
        accuracies.push(accuracy(&preds, labels, &eval_ids)?);
        seeds.push(seed);
    }

    let (mean_accuracy, std_accuracy) = mean_and_std(&accuracies);
    Ok(EvaluationReport {
        accuracies,
        mean_accuracy,
        std_accuracy,
        seeds,
        diffusion_ms,
        training_ms,
        all_converged,
    })
}
