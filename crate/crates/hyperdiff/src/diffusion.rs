//! Fixed-point diffusion processes on hypergraphs.
//!
//! The central routine is [`nonlinear_diffusion`]: starting from a
//! nonnegative input matrix `U` (smoothed labels, optionally with
//! features), it iterates the *normalized* process
//!
//! ```text
//! G_k = alpha * L(F_k) + (1 - alpha) * U / phi(U)
//! F_{k+1} = G_k / phi(G_k)
//! ```
//!
//! where `L` is [`crate::operators::diffusion_map`] and `phi` is
//! [`crate::operators::normalizer`]. Because `L` is one-homogeneous and
//! order-preserving on the nonnegative cone, this converges to a unique
//! normalized fixed point from any positive start for the supported
//! configurations; dividing by `phi` every step is what tames the growth
//! that makes the unnormalized process diverge (see
//! [`nonconvergence_demo`] for a 3-node instance where it provably never
//! settles).
//!
//! The converged point satisfies the *scaled* stationarity equation
//!
//! ```text
//! gain * F = alpha * L(F) + (1 - alpha) * U / phi(U)
//! ```
//!
//! with `gain = phi(G)` at the final step, recorded in
//! [`DiffusionResult::gain`]. The gain is a genuine degree of freedom of
//! the normalized dynamics: it equals 1 only in the limit `alpha -> 0`, so
//! downstream code must not assume the unscaled equation holds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypergraph::{DegreeData, Hypergraph};
use crate::matrix::EmbeddingMatrix;
use crate::operators::{diffusion_map, normalizer, MixingFamily};

/// Hard ceiling used to declare a diverging iteration dead before it
/// reaches infinity and poisons every later iterate.
const DIVERGENCE_NORM: f64 = 1e150;

/// Configuration for [`nonlinear_diffusion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionConfig {
    /// Mixing weight in `(0, 1)`: fraction of the update taken from the
    /// diffusion map versus the input.
    pub alpha: f64,
    /// Hyperedge mixing function.
    pub mix: MixingFamily,
    /// Relative-change stopping threshold (Frobenius). Default `1e-6`.
    pub tol: f64,
    /// Iteration budget. Default `500`.
    pub max_iters: usize,
}

impl DiffusionConfig {
    /// Builds a validated configuration with the default tolerance and
    /// iteration budget.
    pub fn new(alpha: f64, mix: MixingFamily) -> Result<Self> {
        let cfg = Self {
            alpha,
            mix,
            tol: 1e-6,
            max_iters: 500,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Replaces the stopping threshold.
    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        self.tol = tol;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the iteration budget.
    pub fn with_max_iters(mut self, max_iters: usize) -> Result<Self> {
        self.max_iters = max_iters;
        self.validate()?;
        Ok(self)
    }

    /// The regularization weight `lambda = alpha / (1 - alpha)` this mixing
    /// weight corresponds to: the update is the gradient step of a
    /// `lambda`-weighted trade-off between fitting the input and smoothing
    /// over hyperedges.
    pub fn lambda(&self) -> f64 {
        self.alpha / (1.0 - self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive and finite, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if let MixingFamily::PowerMean(p) = self.mix {
            // Surface bad exponents at configuration time, not mid-run.
            MixingFamily::power_mean(p)?;
        }
        Ok(())
    }

    /// Bytes identifying this configuration for content-addressed caching.
    /// (`max_iters` is deliberately excluded: it bounds work, it does not
    /// parameterize the fixed point.)
    pub(crate) fn cache_tag(&self) -> Vec<u8> {
        let mut tag = Vec::with_capacity(25);
        tag.extend_from_slice(&self.alpha.to_bits().to_le_bytes());
        tag.extend_from_slice(&self.mix.cache_tag());
        tag.extend_from_slice(&self.tol.to_bits().to_le_bytes());
        tag
    }
}

/// Outcome of a diffusion run.
///
/// `converged == false` is a reported state, not an error: the embedding
/// holds the last iterate and `residuals` shows how the run behaved.
#[derive(Debug, Clone)]
pub struct DiffusionResult {
    /// Final iterate (for normalized runs, `phi(embedding) == 1` up to
    /// floating-point rounding).
    pub embedding: EmbeddingMatrix,
    /// Number of update steps executed.
    pub iterations: usize,
    /// Relative change `||F_{k+1} - F_k||_F / ||F_{k+1}||_F` per step.
    pub residuals: Vec<f64>,
    /// Whether the final residual dropped below the tolerance.
    pub converged: bool,
    /// `phi` of the returned embedding (normalized runs only).
    pub normalizer_value: Option<f64>,
    /// `phi(G)` at the final step (normalized runs only): the scale factor
    /// in the stationarity equation `gain * F = alpha * L(F) + (1 - alpha) * U / phi(U)`.
    pub gain: Option<f64>,
}

impl DiffusionResult {
    /// Final relative-change residual (infinity if no step ran).
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Runs the normalized nonlinear diffusion from the canonical start
/// `F_0 = U / phi(U)`.
///
/// `u` must be nonnegative (strictly positive where the mixing demands it)
/// with at least one hyperedge seeing positive mass, so that `phi(U) > 0`.
pub fn nonlinear_diffusion(
    h: &Hypergraph,
    deg: &DegreeData,
    u: &EmbeddingMatrix,
    cfg: &DiffusionConfig,
) -> Result<DiffusionResult> {
    cfg.validate()?;
    let u_hat = normalize_by_phi(h, deg, &cfg.mix, u, "diffusion input")?;
    let f0 = u_hat.clone();
    iterate(h, deg, cfg, &u_hat, f0)
}

/// Runs the normalized nonlinear diffusion from an explicit start `f0`
/// (normalized internally). Converges to the same fixed point as
/// [`nonlinear_diffusion`] from any admissible positive start; exposed so
/// callers and tests can verify that independence directly.
pub fn nonlinear_diffusion_from(
    h: &Hypergraph,
    deg: &DegreeData,
    u: &EmbeddingMatrix,
    cfg: &DiffusionConfig,
    f0: &EmbeddingMatrix,
) -> Result<DiffusionResult> {
    cfg.validate()?;
    let u_hat = normalize_by_phi(h, deg, &cfg.mix, u, "diffusion input")?;
    let start = normalize_by_phi(h, deg, &cfg.mix, f0, "diffusion start")?;
    iterate(h, deg, cfg, &u_hat, start)
}

fn normalize_by_phi(
    h: &Hypergraph,
    deg: &DegreeData,
    mix: &MixingFamily,
    f: &EmbeddingMatrix,
    what: &str,
) -> Result<EmbeddingMatrix> {
    let phi = normalizer(h, deg, mix, f)?;
    if phi <= 0.0 || !phi.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "{what} has normalizer {phi}; it needs positive mass on at least one hyperedge"
        )));
    }
    let mut out = f.clone();
    out.scale(1.0 / phi);
    Ok(out)
}

fn iterate(
    h: &Hypergraph,
    deg: &DegreeData,
    cfg: &DiffusionConfig,
    u_hat: &EmbeddingMatrix,
    mut f: EmbeddingMatrix,
) -> Result<DiffusionResult> {
    let alpha = cfg.alpha;
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut gain = f64::NAN;
    for _ in 0..cfg.max_iters {
        let mut g = diffusion_map(h, deg, &cfg.mix, &f)?;
        g.scale(alpha);
        for (slot, &v) in g.data_mut().iter_mut().zip(u_hat.data()) {
            *slot += (1.0 - alpha) * v;
        }
        let phi_g = normalizer(h, deg, &cfg.mix, &g)?;
        if phi_g <= 0.0 || !phi_g.is_finite() {
            return Err(Error::NonFiniteResult {
                context: format!("normalizer of the diffusion update ({phi_g})"),
            });
        }
        g.scale(1.0 / phi_g);
        gain = phi_g;

        let delta = g.frobenius_diff(&f)?;
        let scale = g.frobenius_norm();
        let residual = delta / scale.max(f64::MIN_POSITIVE);
        residuals.push(residual);
        f = g;
        if residual < cfg.tol {
            converged = true;
            break;
        }
    }
    let phi_f = normalizer(h, deg, &cfg.mix, &f)?;
    Ok(DiffusionResult {
        embedding: f,
        iterations: residuals.len(),
        residuals,
        converged,
        normalizer_value: Some(phi_f),
        gain: Some(gain),
    })
}

/// Linear label spreading over the normalized clique expansion:
/// `F_{k+1} = alpha * A_bar * F_k + (1 - alpha) * Y`, started at `Y`.
///
/// Unlike the normalized nonlinear process this baseline has no per-step
/// rescaling, and `A_bar` (the normalized clique-expansion adjacency,
/// zero diagonal) can have spectral radius above 1 on hypergraphs with
/// edges of three or more nodes — so for large `alpha` the iteration can
/// genuinely diverge. Divergence is reported via `converged == false`
/// (with the iterate frozen at the last finite value), not as an error.
pub fn linear_spreading(
    h: &Hypergraph,
    deg: &DegreeData,
    y: &EmbeddingMatrix,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> Result<DiffusionResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
    }
    if y.rows() != h.node_count() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} rows (one per node)", h.node_count()),
            got: format!("{} rows", y.rows()),
        });
    }
    if !y.all_finite() {
        return Err(Error::NonFiniteResult {
            context: "linear spreading input".into(),
        });
    }

    let mut f = y.clone();
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..max_iters {
        // A_bar * F = (A_bar + I) * F - F, via the sparse identity-mixing map.
        let spread = diffusion_map(h, deg, &MixingFamily::Identity, &f)?;
        let mut next = EmbeddingMatrix::zeros(f.rows(), f.cols()).inherit_blocks(&f);
        for ((slot, (&s, &cur)), &seed) in next
            .data_mut()
            .iter_mut()
            .zip(spread.data().iter().zip(f.data()))
            .zip(y.data())
        {
            *slot = alpha * (s - cur) + (1.0 - alpha) * seed;
        }
        if !next.all_finite() || next.frobenius_norm() > DIVERGENCE_NORM {
            // Diverging: keep the last finite iterate and stop.
            residuals.push(f64::INFINITY);
            break;
        }
        let delta = next.frobenius_diff(&f)?;
        let scale = next.frobenius_norm();
        let residual = if scale == 0.0 { delta } else { delta / scale };
        residuals.push(residual);
        f = next;
        if residual < tol {
            converged = true;
            break;
        }
    }
    Ok(DiffusionResult {
        embedding: f,
        iterations: residuals.len(),
        residuals,
        converged,
        normalizer_value: None,
        gain: None,
    })
}

/// Trace of the 3-node counterexample run by [`nonconvergence_demo`].
#[derive(Debug, Clone)]
pub struct NonconvergenceDemo {
    /// Sup-norm-normalized iterates, including the start (`steps + 1` rows).
    pub normalized_path: Vec<[f64; 3]>,
    /// `||x_{k+1} - x_k||_inf` per step.
    pub normalized_residuals: Vec<f64>,
    /// Smallest residual the normalized sequence ever achieved.
    pub min_normalized_residual: f64,
    /// Approximate period of the limit cycle the normalized sequence
    /// settles into, if one is detectable at the end of the run.
    pub cycle_period: Option<usize>,
    /// Unnormalized iterates up to the first non-finite value.
    pub unnormalized_path: Vec<[f64; 3]>,
    /// Sup-norm step changes of the unnormalized sequence while finite.
    pub unnormalized_residuals: Vec<f64>,
    /// Step index at which the unnormalized sequence left f64 range.
    pub diverged_at: Option<usize>,
}

/// Runs a fixed 3-node instance of the *unnormalized* update
/// `z_{k+1} = A (A z_k)^{3/2} + y` (cyclic permutation `A`, positive `y`)
/// alongside its sup-norm-normalized variant, from a seeded random positive
/// start.
///
/// This is the cautionary tale justifying the per-step normalization in
/// [`nonlinear_diffusion`]: the superhomogeneous unnormalized update blows
/// past f64 range within a few dozen steps, and even the norm-pinned
/// variant only wanders into a period-3 limit cycle — its residuals stay
/// bounded away from zero forever. Same seed, same trace, bit for bit.
pub fn nonconvergence_demo(steps: usize, seed: u64) -> NonconvergenceDemo {
    // Cyclic permutation and a fixed positive offset.
    let a = |v: [f64; 3]| [v[1], v[2], v[0]];
    let y = [0.1, 0.2, 0.3];
    let update = |v: [f64; 3]| -> [f64; 3] {
        let inner = a(v);
        let powered = [inner[0].powf(1.5), inner[1].powf(1.5), inner[2].powf(1.5)];
        let outer = a(powered);
        [outer[0] + y[0], outer[1] + y[1], outer[2] + y[2]]
    };
    let sup = |v: [f64; 3]| v[0].abs().max(v[1].abs()).max(v[2].abs());
    let diff = |u: [f64; 3], v: [f64; 3]| {
        (u[0] - v[0])
            .abs()
            .max((u[1] - v[1]).abs())
            .max((u[2] - v[2]).abs())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = [
        rng.random_range(0.5..1.5),
        rng.random_range(0.5..1.5),
        rng.random_range(0.5..1.5),
    ];

    // Normalized variant: pinned to the unit sup-norm sphere every step.
    let mut x = start;
    let mut normalized_path = vec![x];
    let mut normalized_residuals = Vec::with_capacity(steps);
    for _ in 0..steps {
        let t = update(x);
        let norm = sup(t);
        let next = [t[0] / norm, t[1] / norm, t[2] / norm];
        normalized_residuals.push(diff(next, x));
        x = next;
        normalized_path.push(x);
    }
    let min_normalized_residual = normalized_residuals
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let cycle_period = (1..=6).find(|&q| {
        normalized_path.len() > q + 3
            && (0..3).all(|back| {
                let last = normalized_path.len() - 1 - back;
                diff(normalized_path[last], normalized_path[last - q]) < 1e-6
            })
    });

    // Unnormalized variant: record until f64 gives out.
    let mut z = start;
    let mut unnormalized_path = vec![z];
    let mut unnormalized_residuals = Vec::new();
    let mut diverged_at = None;
    for step in 0..steps {
        let next = update(z);
        if !next.iter().all(|v| v.is_finite()) {
            diverged_at = Some(step + 1);
            break;
        }
        unnormalized_residuals.push(diff(next, z));
        z = next;
        unnormalized_path.push(z);
    }

    NonconvergenceDemo {
        normalized_path,
        normalized_residuals,
        min_normalized_residual,
        cycle_period,
        unnormalized_path,
        unnormalized_residuals,
        diverged_at,
    }
}
