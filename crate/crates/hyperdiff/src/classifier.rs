//! Multinomial softmax classifier trained by full-batch gradient descent.
//!
//! The classifier consumes embedding rows as inputs. Training minimizes the
//! L2-regularized mean cross-entropy over the training rows with a fixed
//! step size — the objective is convex, so with the default step the loss
//! decreases monotonically and the run is deterministic given the seed
//! (bit-identical parameters on a rerun).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

/// Hyperparameters for [`train_softmax`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Gradient-descent step size. Default `0.1`.
    pub learning_rate: f64,
    /// Number of full-batch epochs. Default `200`.
    pub epochs: usize,
    /// L2 penalty weight on all parameters (bias row included). Default `1e-4`.
    pub l2: f64,
    /// Seed for the (small, uniform) parameter initialization.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 200,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "l2 penalty must be nonnegative and finite, got {}",
                self.l2
            )));
        }
        Ok(())
    }
}

/// Trained softmax parameters: `(input_dim + 1) x classes`, row-major, the
/// last row being the bias (inputs are augmented with a constant 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    input_dim: usize,
    classes: usize,
    theta: Vec<f64>,
}

const MODEL_HEADER: &str = "hyperdiff-softmax v1";

impl SoftmaxModel {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Row-major parameters, `(input_dim + 1) x classes`.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Class scores for one input row (bias applied).
    pub fn logits(&self, row: &[f64]) -> Vec<f64> {
        debug_assert_eq!(row.len(), self.input_dim);
        let mut out = vec![0.0; self.classes];
        for (j, &x) in row.iter().enumerate() {
            let params = &self.theta[j * self.classes..(j + 1) * self.classes];
            for (slot, &t) in out.iter_mut().zip(params) {
                *slot += x * t;
            }
        }
        let bias = &self.theta[self.input_dim * self.classes..];
        for (slot, &b) in out.iter_mut().zip(bias) {
            *slot += b;
        }
        out
    }

    /// Writes the model as a small text file: a header line, the shape,
    /// then one comma-separated row of parameters per input dimension.
    /// Values round-trip bit-for-bit (shortest-representation formatting).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_HEADER}");
        let _ = writeln!(out, "input_dim {}", self.input_dim);
        let _ = writeln!(out, "classes {}", self.classes);
        for r in 0..self.input_dim + 1 {
            let row = &self.theta[r * self.classes..(r + 1) * self.classes];
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Reads a model written by [`save`](Self::save).
    pub fn load(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let text = fs::read_to_string(path)?;
        let bad = |message: String| Error::BadFileFormat {
            path: display.clone(),
            message,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(MODEL_HEADER) => {}
            other => {
                return Err(bad(format!(
                    "expected header {MODEL_HEADER:?}, found {other:?}"
                )))
            }
        }
        let field = |line: Option<&str>, name: &str| -> Result<usize> {
            let line = line.ok_or_else(|| bad(format!("missing `{name}` line")))?;
            let rest = line
                .strip_prefix(name)
                .ok_or_else(|| bad(format!("expected `{name} <count>`, found {line:?}")))?;
            rest.trim()
                .parse::<usize>()
                .map_err(|e| bad(format!("bad `{name}` value: {e}")))
        };
        let input_dim = field(lines.next(), "input_dim")?;
        let classes = field(lines.next(), "classes")?;
        if classes < 2 {
            return Err(bad(format!("classes must be at least 2, got {classes}")));
        }
        let mut theta = Vec::with_capacity((input_dim + 1) * classes);
        for r in 0..input_dim + 1 {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing parameter row {r}")))?;
            for piece in line.split(',') {
                let v: f64 = piece
                    .trim()
                    .parse()
                    .map_err(|e| bad(format!("row {r}: bad value {piece:?}: {e}")))?;
                theta.push(v);
            }
        }
        if theta.len() != (input_dim + 1) * classes {
            return Err(bad(format!(
                "expected {} parameters, found {}",
                (input_dim + 1) * classes,
                theta.len()
            )));
        }
        Ok(Self {
            input_dim,
            classes,
            theta,
        })
    }
}

/// A finished training run: the model plus the per-epoch loss trace
/// (evaluated before each update; monotonically non-increasing for the
/// supported step sizes).
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub model: SoftmaxModel,
    pub loss_history: Vec<f64>,
}

/// Numerically safe softmax of `logits` into `probs` (max-shifted).
fn softmax_into(logits: &[f64], probs: &mut [f64]) {
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut total = 0.0;
    for (p, &l) in probs.iter_mut().zip(logits) {
        *p = (l - max).exp();
        total += *p;
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
}

fn validate_ids(
    f: &EmbeddingMatrix,
    labels: &[Option<usize>],
    ids: &[usize],
    classes: usize,
) -> Result<()> {
    if labels.len() != f.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} labels (one per row)", f.rows()),
            got: format!("{} labels", labels.len()),
        });
    }
    for &i in ids {
        if i >= f.rows() {
            return Err(Error::ShapeMismatch {
                expected: format!("node ids below {}", f.rows()),
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
            Some(_) => {}
        }
    }
    Ok(())
}

/// Trains a softmax classifier on the rows of `f` indexed by `train_ids`.
///
/// `labels[i]` is the class of node `i` (`None` = unlabeled). Fails on an
/// empty training set, a selected node without a label, or a label outside
/// `0..classes`.
pub fn train_softmax(
    f: &EmbeddingMatrix,
    labels: &[Option<usize>],
    train_ids: &[usize],
    classes: usize,
    cfg: &TrainConfig,
) -> Result<TrainingRun> {
    cfg.validate()?;
    if classes < 2 {
        return Err(Error::InvalidConfig(format!(
            "at least 2 classes are required, got {classes}"
        )));
    }
    if train_ids.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    validate_ids(f, labels, train_ids, classes)?;
    if !f.all_finite() {
        return Err(Error::NonFiniteResult {
            context: "classifier input".into(),
        });
    }

    let dim = f.cols();
    let params = (dim + 1) * classes;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut theta: Vec<f64> = (0..params).map(|_| rng.random_range(-0.01..0.01)).collect();

    let batch = train_ids.len() as f64;
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut grad = vec![0.0; params];
    let mut probs = vec![0.0; classes];
    let model_view = |theta: &[f64]| SoftmaxModel {
        input_dim: dim,
        classes,
        theta: theta.to_vec(),
    };

    for _ in 0..cfg.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        let view = model_view(&theta);
        for &i in train_ids {
            let row = f.row(i);
            let logits = view.logits(row);
            softmax_into(&logits, &mut probs);
            let truth = labels[i].expect("validated above");
            loss -= probs[truth].max(f64::MIN_POSITIVE).ln();
            for (c, &p) in probs.iter().enumerate() {
                let err = (p - if c == truth { 1.0 } else { 0.0 }) / batch;
                for (j, &x) in row.iter().enumerate() {
                    grad[j * classes + c] += x * err;
                }
                grad[dim * classes + c] += err; // bias input is 1
            }
        }
        loss /= batch;
        loss += 0.5 * cfg.l2 * theta.iter().map(|t| t * t).sum::<f64>();
        loss_history.push(loss);
        for (t, &g) in theta.iter_mut().zip(&grad) {
            *t -= cfg.learning_rate * (g + cfg.l2 * *t);
        }
    }

    Ok(TrainingRun {
        model: SoftmaxModel {
            input_dim: dim,
            classes,
            theta,
        },
        loss_history,
    })
}

/// Class probabilities for every row of `f` (`n x classes`).
pub fn predict_proba(model: &SoftmaxModel, f: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    if f.cols() != model.input_dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{} columns (the model's input_dim)", model.input_dim),
            got: format!("{} columns", f.cols()),
        });
    }
    let mut out = EmbeddingMatrix::zeros(f.rows(), model.classes);
    let mut probs = vec![0.0; model.classes];
    for i in 0..f.rows() {
        let logits = model.logits(f.row(i));
        softmax_into(&logits, &mut probs);
        out.row_mut(i).copy_from_slice(&probs);
    }
    Ok(out)
}

/// Predicted class per row of `f`: the highest-probability class, ties
/// broken toward the lowest class index.
pub fn predict(model: &SoftmaxModel, f: &EmbeddingMatrix) -> Result<Vec<usize>> {
    if f.cols() != model.input_dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{} columns (the model's input_dim)", model.input_dim),
            got: format!("{} columns", f.cols()),
        });
    }
    let mut out = Vec::with_capacity(f.rows());
    for i in 0..f.rows() {
        let logits = model.logits(f.row(i));
        let mut best = 0;
        for (c, &l) in logits.iter().enumerate().skip(1) {
            if l > logits[best] {
                best = c;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Fraction of `eval_ids` whose prediction matches the label. Every
/// evaluated node must be labeled; the set must be nonempty.
pub fn accuracy(
    predictions: &[usize],
    labels: &[Option<usize>],
    eval_ids: &[usize],
) -> Result<f64> {
    if eval_ids.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let mut hits = 0usize;
    for &i in eval_ids {
        if i >= predictions.len() || i >= labels.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("node ids below {}", predictions.len().min(labels.len())),
                got: format!("node id {i}"),
            });
        }
        let truth = labels[i].ok_or(Error::MissingLabel { node: i })?;
        if predictions[i] == truth {
            hits += 1;
        }
    }
    Ok(hits as f64 / eval_ids.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Two well-separated 2-D Gaussian blobs, 10 points each.
    fn gaussian_blobs(seed: u64) -> (EmbeddingMatrix, Vec<Option<usize>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(40);
        let mut labels = Vec::with_capacity(20);
        for i in 0..20 {
            let class = i % 2;
            let (cx, cy) = if class == 0 { (-1.5, -1.0) } else { (1.5, 1.0) };
            data.push(cx + rng.random_range(-0.5..0.5));
            data.push(cy + rng.random_range(-0.5..0.5));
            labels.push(Some(class));
        }
        (EmbeddingMatrix::from_vec(20, 2, data).unwrap(), labels)
    }

    /// Independent oracle: Newton's method on binary logistic regression
    /// (parameters w1, w2, b), same objective as the softmax trainer up to
    /// the usual 2-class reparameterization. Used only to compare decision
    /// boundaries, not parameter values.
    fn newton_logistic(
        f: &EmbeddingMatrix,
        labels: &[Option<usize>],
        ids: &[usize],
        l2: f64,
    ) -> [f64; 3] {
        let mut w = [0.0f64; 3];
        for _ in 0..50 {
            let mut grad = [0.0f64; 3];
            let mut hess = [[0.0f64; 3]; 3];
            for &i in ids {
                let x = [f.get(i, 0), f.get(i, 1), 1.0];
                let y = labels[i].unwrap() as f64;
                let z: f64 = (0..3).map(|j| w[j] * x[j]).sum();
                let p = 1.0 / (1.0 + (-z).exp());
                for j in 0..3 {
                    grad[j] += (p - y) * x[j] / ids.len() as f64;
                    for l in 0..3 {
                        hess[j][l] += p * (1.0 - p) * x[j] * x[l] / ids.len() as f64;
                    }
                }
            }
            for j in 0..3 {
                grad[j] += l2 * w[j];
                hess[j][j] += l2;
            }
            // Solve hess * step = grad by Gaussian elimination.
            let mut a = hess;
            let mut b = grad;
            for col in 0..3 {
                let pivot = (col..3)
                    .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
                    .unwrap();
                a.swap(col, pivot);
                b.swap(col, pivot);
                for row in col + 1..3 {
                    let m = a[row][col] / a[col][col];
                    for c in col..3 {
                        a[row][c] -= m * a[col][c];
                    }
                    b[row] -= m * b[col];
                }
            }
            let mut step = [0.0f64; 3];
            for row in (0..3).rev() {
                let mut acc = b[row];
                for c in row + 1..3 {
                    acc -= a[row][c] * step[c];
                }
                step[row] = acc / a[row][row];
            }
            for j in 0..3 {
                w[j] -= step[j];
            }
        }
        w
    }

    #[test]
    fn separates_gaussian_blobs_like_the_convex_oracle() {
        let (f, labels) = gaussian_blobs(3);
        let ids: Vec<usize> = (0..20).collect();
        let cfg = TrainConfig {
            learning_rate: 0.5,
            epochs: 500,
            ..TrainConfig::default()
        };
        let run = train_softmax(&f, &labels, &ids, 2, &cfg).unwrap();
        let oracle = newton_logistic(&f, &labels, &ids, cfg.l2);

        // Compare decision regions on a fine grid over the data range.
        let mut agree = 0usize;
        let mut total = 0usize;
        let mut grid = EmbeddingMatrix::zeros(1, 2);
        for gx in 0..40 {
            for gy in 0..40 {
                let x = -3.0 + 6.0 * gx as f64 / 39.0;
                let y = -2.5 + 5.0 * gy as f64 / 39.0;
                grid.set(0, 0, x);
                grid.set(0, 1, y);
                let ours = predict(&run.model, &grid).unwrap()[0];
                let z = oracle[0] * x + oracle[1] * y + oracle[2];
                let theirs = usize::from(z > 0.0);
                agree += usize::from(ours == theirs);
                total += 1;
            }
        }
        let agreement = agree as f64 / total as f64;
        assert!(
            agreement >= 0.95,
            "decision boundaries disagree on {:.1}% of the grid",
            100.0 * (1.0 - agreement)
        );

        // And the training data itself is classified correctly.
        let preds = predict(&run.model, &f).unwrap();
        assert_eq!(accuracy(&preds, &labels, &ids).unwrap(), 1.0);
    }

    #[test]
    fn loss_is_monotone_nonincreasing() {
        let (f, labels) = gaussian_blobs(11);
        let ids: Vec<usize> = (0..20).collect();
        let run = train_softmax(&f, &labels, &ids, 2, &TrainConfig::default()).unwrap();
        assert_eq!(run.loss_history.len(), 200);
        for pair in run.loss_history.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-12,
                "loss increased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        // Random 5-point, 3-class problem; compare the analytic gradient at
        // the (seeded) init against central differences of an independently
        // coded loss.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f =
            EmbeddingMatrix::from_vec(5, 2, (0..10).map(|_| rng.random_range(-2.0..2.0)).collect())
                .unwrap();
        let labels: Vec<Option<usize>> = (0..5).map(|i| Some(i % 3)).collect();
        let ids: Vec<usize> = (0..5).collect();
        let l2 = 1e-3;

        let loss_at = |theta: &[f64]| -> f64 {
            // Independent re-implementation of the objective.
            let mut loss = 0.0;
            for &i in &ids {
                let x = [f.get(i, 0), f.get(i, 1), 1.0];
                let logits: Vec<f64> = (0..3)
                    .map(|c| (0..3).map(|j| theta[j * 3 + c] * x[j]).sum())
                    .collect();
                let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                let z: f64 = logits.iter().map(|l| (l - max).exp()).sum();
                let truth = labels[i].unwrap();
                loss -= logits[truth] - max - z.ln();
            }
            loss / ids.len() as f64 + 0.5 * l2 * theta.iter().map(|t| t * t).sum::<f64>()
        };

        // One epoch at a learning rate recovering the gradient: train for a
        // single epoch from a known init and back out the update.
        let cfg = TrainConfig {
            learning_rate: 1.0,
            epochs: 1,
            l2,
            seed: 77,
        };
        let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let theta0: Vec<f64> = (0..9).map(|_| init_rng.random_range(-0.01..0.01)).collect();
        let run = train_softmax(&f, &labels, &ids, 3, &cfg).unwrap();
        let analytic: Vec<f64> = theta0
            .iter()
            .zip(run.model.theta())
            .map(|(&before, &after)| before - after)
            .collect();

        let eps = 1e-6;
        for idx in 0..9 {
            let mut plus = theta0.clone();
            let mut minus = theta0.clone();
            plus[idx] += eps;
            minus[idx] -= eps;
            let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * eps);
            let denom = fd.abs().max(analytic[idx].abs()).max(1e-12);
            assert!(
                (fd - analytic[idx]).abs() / denom < 1e-6,
                "gradient mismatch at {idx}: fd {fd}, analytic {}",
                analytic[idx]
            );
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (f, labels) = gaussian_blobs(5);
        let ids: Vec<usize> = (0..20).collect();
        let cfg = TrainConfig::default();
        let a = train_softmax(&f, &labels, &ids, 2, &cfg).unwrap();
        let b = train_softmax(&f, &labels, &ids, 2, &cfg).unwrap();
        assert_eq!(a.model.theta(), b.model.theta());

        let other = TrainConfig {
            seed: 1,
            ..TrainConfig::default()
        };
        let c = train_softmax(&f, &labels, &ids, 2, &other).unwrap();
        assert_ne!(a.model.theta(), c.model.theta());
    }

    #[test]
    fn ties_break_to_the_lowest_class() {
        // Zero parameters give identical logits for every class.
        let model = SoftmaxModel {
            input_dim: 2,
            classes: 3,
            theta: vec![0.0; 9],
        };
        let f = EmbeddingMatrix::from_vec(2, 2, vec![0.3, -0.7, 1.0, 2.0]).unwrap();
        assert_eq!(predict(&model, &f).unwrap(), vec![0, 0]);
        let proba = predict_proba(&model, &f).unwrap();
        for i in 0..2 {
            for c in 0..3 {
                assert!((proba.get(i, c) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn validation_errors() {
        let (f, mut labels) = gaussian_blobs(0);
        let cfg = TrainConfig::default();
        assert!(matches!(
            train_softmax(&f, &labels, &[], 2, &cfg).unwrap_err(),
            Error::EmptyTrainingSet
        ));
        labels[3] = None;
        assert!(matches!(
            train_softmax(&f, &labels, &[3], 2, &cfg).unwrap_err(),
            Error::MissingLabel { node: 3 }
        ));
        labels[3] = Some(7);
        assert!(matches!(
            train_softmax(&f, &labels, &[3], 2, &cfg).unwrap_err(),
            Error::LabelOutOfRange {
                node: 3,
                label: 7,
                classes: 2
            }
        ));
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(train_softmax(&f, &labels, &[0], 2, &bad).is_err());

        let preds = vec![0; 20];
        assert!(matches!(
            accuracy(&preds, &labels, &[]).unwrap_err(),
            Error::EmptyEvalSet
        ));
        labels[5] = None;
        assert!(matches!(
            accuracy(&preds, &labels, &[5]).unwrap_err(),
            Error::MissingLabel { node: 5 }
        ));
    }

    #[test]
    fn model_round_trips_bit_for_bit() {
        let (f, labels) = gaussian_blobs(8);
        let ids: Vec<usize> = (0..20).collect();
        let run = train_softmax(&f, &labels, &ids, 2, &TrainConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("blobs.model");
        run.model.save(&path).unwrap();
        let loaded = SoftmaxModel::load(&path).unwrap();
        assert_eq!(run.model, loaded);
        let bits: Vec<u64> = run.model.theta().iter().map(|v| v.to_bits()).collect();
        let loaded_bits: Vec<u64> = loaded.theta().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, loaded_bits);
    }

    #[test]
    fn model_load_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.model");
        std::fs::write(&path, "not a model\n").unwrap();
        assert!(matches!(
            SoftmaxModel::load(&path).unwrap_err(),
            Error::BadFileFormat { .. }
        ));
        std::fs::write(
            &path,
            format!("{MODEL_HEADER}\ninput_dim 2\nclasses 2\n1.0,2.0\n"),
        )
        .unwrap();
        assert!(matches!(
            SoftmaxModel::load(&path).unwrap_err(),
            Error::BadFileFormat { .. }
        ));
    }

    #[test]
    fn predict_checks_input_width() {
        let model = SoftmaxModel {
            input_dim: 3,
            classes: 2,
            theta: vec![0.0; 8],
        };
        let f = EmbeddingMatrix::zeros(1, 2);
        assert!(matches!(
            predict(&model, &f).unwrap_err(),
            Error::ShapeMismatch { .. }
        ));
    }
}
