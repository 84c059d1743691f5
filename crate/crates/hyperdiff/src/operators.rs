//! Hyperedge mixing functions and the nonlinear diffusion operator.
//!
//! Everything here works on degree-scaled node vectors: for an embedding
//! `F` (one row per node), the scaled row of node `i` is `f_i / sqrt(delta_i)`.
//! A *mixing family* maps the scaled rows of a hyperedge's members to a
//! single representative row `mu_e`. The diffusion map then spreads the
//! representatives back to the nodes:
//!
//! ```text
//! L(F)_i = (1 / sqrt(delta_i)) * sum over hyperedges e containing i of w(e) * mu_e
//! ```
//!
//! Both sweeps touch only stored incidences — cost O(nnz * k) per
//! application — and never build an `n x n` matrix. The map is positively
//! one-homogeneous (`L(c F) = c L(F)` for `c > 0`) and order-preserving on
//! the nonnegative cone, which is what makes the normalized fixed-point
//! iteration in [`crate::diffusion`] well behaved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{DegreeData, Hypergraph};
use crate::matrix::EmbeddingMatrix;

/// How a hyperedge combines its members' scaled rows into one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingFamily {
    /// Entrywise p-power mean: `mu = ((1/|e|) * sum z_i^p)^(1/p)`.
    ///
    /// Defined on the nonnegative cone; fractional or negative exponents
    /// additionally require strictly positive entries. The exponent must be
    /// finite and nonzero (build through [`MixingFamily::power_mean`]).
    PowerMean(f64),
    /// Plain sum of the members' scaled rows, `mu = sum z_i`.
    ///
    /// With this mixing the diffusion map is exactly the linear operator
    /// `D^{-1/2} K W K^T D^{-1/2}`, i.e. the normalized clique-expansion
    /// adjacency plus the identity — the reference point the nonlinear
    /// family generalizes.
    Identity,
}

impl MixingFamily {
    /// Validated power-mean constructor: rejects zero (the geometric-mean
    /// limit, not supported) and non-finite exponents.
    pub fn power_mean(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "power-mean exponent must be finite, got {p}"
            )));
        }
        if p == 0.0 {
            return Err(Error::InvalidConfig(
                "power-mean exponent 0 (the geometric-mean limit) is not supported".into(),
            ));
        }
        Ok(Self::PowerMean(p))
    }

    /// Homogeneity degree of the outer map. The inner map has degree
    /// [`rho_degree`](Self::rho_degree); the two always multiply to 1, so
    /// the composed diffusion map is one-homogeneous.
    pub fn sigma_degree(&self) -> f64 {
        match self {
            Self::PowerMean(p) => 1.0 / p,
            Self::Identity => 1.0,
        }
    }

    /// Homogeneity degree of the inner (entrywise power) map.
    pub fn rho_degree(&self) -> f64 {
        match self {
            Self::PowerMean(p) => *p,
            Self::Identity => 1.0,
        }
    }

    /// Bytes identifying this mixing for content-addressed caching.
    pub(crate) fn cache_tag(&self) -> [u8; 9] {
        let mut tag = [0u8; 9];
        match self {
            Self::PowerMean(p) => {
                tag[0] = 1;
                tag[1..].copy_from_slice(&p.to_bits().to_le_bytes());
            }
            Self::Identity => tag[0] = 2,
        }
        tag
    }

    fn validated_exponent(&self) -> Result<Option<f64>> {
        match *self {
            Self::PowerMean(p) => {
                // Defensive re-check: the variant is publicly constructible.
                Self::power_mean(p)?;
                Ok(Some(p))
            }
            Self::Identity => Ok(None),
        }
    }

    fn needs_strictly_positive(&self) -> bool {
        matches!(*self, Self::PowerMean(p) if p < 0.0 || p.fract() != 0.0)
    }
}

/// Entrywise p-power mean of `values`, stabilized by factoring out the
/// dominant element so intermediate powers stay in `[0, 1]` (for `p > 0`)
/// or `(0, 1]`-reciprocals (for `p < 0`) and never overflow.
fn power_mean(values: &[f64], p: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let pivot = if p > 0.0 {
        values.iter().fold(0.0_f64, |acc, &v| acc.max(v))
    } else {
        values.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    };
    if pivot == 0.0 {
        // All entries zero (only reachable for p > 0 on the closed cone).
        return 0.0;
    }
    let sum: f64 = values.iter().map(|&v| (v / pivot).powf(p)).sum();
    pivot * (sum / values.len() as f64).powf(1.0 / p)
}

fn check_node_shape(h: &Hypergraph, f: &EmbeddingMatrix) -> Result<()> {
    if f.rows() != h.node_count() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} rows (one per node)", h.node_count()),
            got: format!("{} rows", f.rows()),
        });
    }
    Ok(())
}

/// Validates `f` against the mixing's domain: finite everywhere; for
/// power-mean mixing also nonnegative, and strictly positive when the
/// exponent is fractional or negative.
fn check_domain(mix: &MixingFamily, f: &EmbeddingMatrix) -> Result<()> {
    let exponent = mix.validated_exponent()?;
    let strict = mix.needs_strictly_positive();
    let cols = f.cols();
    for (idx, &v) in f.data().iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteResult {
                context: format!(
                    "input validation: entry ({}, {}) is {v}",
                    idx / cols,
                    idx % cols
                ),
            });
        }
        if let Some(p) = exponent {
            if v < 0.0 || (strict && v == 0.0) {
                return Err(Error::DomainError {
                    row: idx / cols,
                    col: idx % cols,
                    value: v,
                    exponent: p,
                });
            }
        }
    }
    Ok(())
}

/// One representative row per hyperedge: `mu_e` mixed from the members'
/// degree-scaled rows `f_i / sqrt(delta_i)`. Returns an `m x k` matrix.
pub fn hyperedge_means(
    h: &Hypergraph,
    deg: &DegreeData,
    mix: &MixingFamily,
    f: &EmbeddingMatrix,
) -> Result<EmbeddingMatrix> {
    check_node_shape(h, f)?;
    check_domain(mix, f)?;
    let k = f.cols();
    let inv = deg.inv_sqrt_degrees();
    let mut out = EmbeddingMatrix::zeros(h.edge_count(), k);
    // One output row per hyperedge, written by exactly one task: results are
    // bit-identical for any thread count.
    out.data_mut()
        .par_chunks_mut(k.max(1))
        .enumerate()
        .for_each(|(e, row)| {
            let members = h.members(e);
            match *mix {
                MixingFamily::Identity => {
                    for &i in members {
                        let scale = inv[i];
                        for (slot, &v) in row.iter_mut().zip(f.row(i)) {
                            *slot += scale * v;
                        }
                    }
                }
                MixingFamily::PowerMean(p) => {
                    let mut scaled = vec![0.0; members.len()];
                    for (j, slot) in row.iter_mut().enumerate() {
                        for (z, &i) in scaled.iter_mut().zip(members) {
                            *z = f.get(i, j) * inv[i];
                        }
                        *slot = power_mean(&scaled, p);
                    }
                }
            }
        });
    if !out.all_finite() {
        return Err(Error::NonFiniteResult {
            context: "hyperedge mixing".into(),
        });
    }
    Ok(out)
}

/// Applies the nonlinear diffusion map `L` to an embedding (`n x k` in,
/// `n x k` out): mixes each hyperedge, then accumulates the weighted
/// representatives back onto each member, scaled by `1 / sqrt(delta_i)`.
pub fn diffusion_map(
    h: &Hypergraph,
    deg: &DegreeData,
    mix: &MixingFamily,
    f: &EmbeddingMatrix,
) -> Result<EmbeddingMatrix> {
    let means = hyperedge_means(h, deg, mix, f)?;
    let k = f.cols();
    let inv = deg.inv_sqrt_degrees();
    let mut out = EmbeddingMatrix::zeros(h.node_count(), k);
    out.data_mut()
        .par_chunks_mut(k.max(1))
        .enumerate()
        .for_each(|(i, row)| {
            for &e in h.incident_edges(i) {
                let w = h.weight(e);
                for (slot, &v) in row.iter_mut().zip(means.row(e)) {
                    *slot += w * v;
                }
            }
            let scale = inv[i];
            for slot in row.iter_mut() {
                *slot *= scale;
            }
        });
    if !out.all_finite() {
        return Err(Error::NonFiniteResult {
            context: "diffusion map".into(),
        });
    }
    Ok(out.inherit_blocks(f))
}

/// The normalizer `phi(F) = 2 * sqrt(sum over e of w(e) * ||mu_e||^2)`.
///
/// Like the diffusion map it is positively one-homogeneous, and it is zero
/// only when every hyperedge representative vanishes; the normalized
/// iteration divides by it every step to pin the iterate's scale.
pub fn normalizer(
    h: &Hypergraph,
    deg: &DegreeData,
    mix: &MixingFamily,
    f: &EmbeddingMatrix,
) -> Result<f64> {
    let means = hyperedge_means(h, deg, mix, f)?;
    let mut total = 0.0;
    for e in 0..h.edge_count() {
        let norm_sq: f64 = means.row(e).iter().map(|v| v * v).sum();
        total += h.weight(e) * norm_sq;
    }
    Ok(2.0 * total.sqrt())
}

/// Which centroid the variance regularizer measures spread against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanConvention {
    /// Deviations from the mixed representative `mu_e`.
    Standard,
    /// Deviations from `mu_e / 2`. This is the convention under which the
    /// regularizer's gradient relates to the diffusion map (see the
    /// gradient-identity tests): the halved centroid makes the quadratic
    /// self-term match the normalizer's scaling.
    Halved,
}

/// Hyperedge-variance regularizer
/// `sum over e of w(e) * sum over members i of ||f_i / sqrt(delta_i) - mu~_e||^2`,
/// where `mu~_e` is `mu_e` or `mu_e / 2` per [`MeanConvention`].
pub fn variance_regularizer(
    h: &Hypergraph,
    deg: &DegreeData,
    mix: &MixingFamily,
    f: &EmbeddingMatrix,
    convention: MeanConvention,
) -> Result<f64> {
    let means = hyperedge_means(h, deg, mix, f)?;
    let inv = deg.inv_sqrt_degrees();
    let shrink = match convention {
        MeanConvention::Standard => 1.0,
        MeanConvention::Halved => 0.5,
    };
    let mut total = 0.0;
    for e in 0..h.edge_count() {
        let w = h.weight(e);
        let mu = means.row(e);
        for &i in h.members(e) {
            let scale = inv[i];
            let dev_sq: f64 = f
                .row(i)
                .iter()
                .zip(mu)
                .map(|(&v, &m)| {
                    let d = scale * v - shrink * m;
                    d * d
                })
                .sum();
            total += w * dev_sq;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{clique_expansion_normalized, degree_data};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_pair() -> (Hypergraph, DegreeData) {
        let h = Hypergraph::from_edge_lists(2, &[vec![0, 1]], None).unwrap();
        let d = degree_data(&h);
        (h, d)
    }

    fn random_positive(rows: usize, cols: usize, seed: u64) -> EmbeddingMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| rng.random_range(0.05..2.0))
            .collect();
        EmbeddingMatrix::from_vec(rows, cols, data).unwrap()
    }

    /// Dense oracle for the identity-mixing diffusion map: multiply by the
    /// normalized clique expansion plus the identity.
    fn dense_identity_apply(
        h: &Hypergraph,
        deg: &DegreeData,
        f: &EmbeddingMatrix,
    ) -> EmbeddingMatrix {
        let a = clique_expansion_normalized(h, deg);
        let n = h.node_count();
        let k = f.cols();
        let mut out = EmbeddingMatrix::zeros(n, k);
        for i in 0..n {
            for j in 0..k {
                let mut acc = f.get(i, j); // the +I term
                for l in 0..n {
                    acc += a.get(i, l) * f.get(l, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn quadratic_mean_of_known_pair() {
        // Members' scaled rows are 1 and 3 (unit degrees); their quadratic
        // mean is sqrt((1 + 9) / 2) = sqrt(5).
        let (h, d) = single_pair();
        let f = EmbeddingMatrix::from_vec(2, 1, vec![1.0, 3.0]).unwrap();
        let mu = hyperedge_means(&h, &d, &MixingFamily::PowerMean(2.0), &f).unwrap();
        assert_eq!(mu.rows(), 1);
        assert!((mu.get(0, 0) - 2.23606797749979).abs() < 1e-14);
    }

    #[test]
    fn ones_are_fixed_for_every_exponent() {
        let (h, d) = single_pair();
        let f = EmbeddingMatrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        for p in [1.0, 2.0, 3.0, 5.0, 10.0, -1.0, 2.5] {
            let mix = MixingFamily::power_mean(p).unwrap();
            let out = diffusion_map(&h, &d, &mix, &f).unwrap();
            assert!((out.get(0, 0) - 1.0).abs() < 1e-14, "p = {p}");
            assert!((out.get(1, 0) - 1.0).abs() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn identity_mixing_matches_dense_clique_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lists: Vec<Vec<usize>> = vec![
            vec![0, 1, 2],
            vec![2, 3],
            vec![1, 3, 4],
            vec![0, 4],
            vec![2, 4, 5],
        ];
        let weights: Vec<f64> = (0..lists.len())
            .map(|_| rng.random_range(0.2..3.0))
            .collect();
        let h = Hypergraph::from_edge_lists(6, &lists, Some(&weights)).unwrap();
        let d = degree_data(&h);
        let f = random_positive(6, 3, 11);
        let sparse = diffusion_map(&h, &d, &MixingFamily::Identity, &f).unwrap();
        let dense = dense_identity_apply(&h, &d, &f);
        assert!(sparse.max_abs_diff(&dense).unwrap() < 1e-12);
    }

    #[test]
    fn normalizer_on_unit_pair() {
        // Unit degrees and all-ones input give mu_e = 1 per column, so
        // phi = 2 * sqrt(k).
        let (h, d) = single_pair();
        for p in [1.0, 2.0, 3.0] {
            let mix = MixingFamily::power_mean(p).unwrap();
            let f1 = EmbeddingMatrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
            assert!((normalizer(&h, &d, &mix, &f1).unwrap() - 2.0).abs() < 1e-14);
            let f4 = EmbeddingMatrix::from_vec(2, 4, vec![1.0; 8]).unwrap();
            assert!((normalizer(&h, &d, &mix, &f4).unwrap() - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn variance_regularizer_frozen_values() {
        // Scaled rows 1 and 3, arithmetic mean 2:
        //   standard: (1-2)^2 + (3-2)^2 = 2
        //   halved centroid (mu/2 = 1): (1-1)^2 + (3-1)^2 = 4
        let (h, d) = single_pair();
        let f = EmbeddingMatrix::from_vec(2, 1, vec![1.0, 3.0]).unwrap();
        let mix = MixingFamily::PowerMean(1.0);
        let std = variance_regularizer(&h, &d, &mix, &f, MeanConvention::Standard).unwrap();
        assert!((std - 2.0).abs() < 1e-14);
        let half = variance_regularizer(&h, &d, &mix, &f, MeanConvention::Halved).unwrap();
        assert!((half - 4.0).abs() < 1e-14);
    }

    #[test]
    fn power_of_two_scalings_are_exact() {
        // Scaling by 0.5 or 2 multiplies every intermediate exactly, so
        // one-homogeneity holds bit-for-bit.
        let h = Hypergraph::from_edge_lists(4, &[vec![0, 1, 2], vec![2, 3]], Some(&[1.5, 0.7]))
            .unwrap();
        let d = degree_data(&h);
        let f = random_positive(4, 2, 3);
        for p in [1.0, 2.0, 3.0, 5.0] {
            let mix = MixingFamily::power_mean(p).unwrap();
            let base = diffusion_map(&h, &d, &mix, &f).unwrap();
            for lambda in [0.5, 2.0] {
                let mut scaled_in = f.clone();
                scaled_in.scale(lambda);
                let out = diffusion_map(&h, &d, &mix, &scaled_in).unwrap();
                let mut expected = base.clone();
                expected.scale(lambda);
                assert_eq!(out.data(), expected.data(), "p = {p}, lambda = {lambda}");
            }
        }
    }

    #[test]
    fn domain_violations_are_rejected() {
        let (h, d) = single_pair();
        let neg = EmbeddingMatrix::from_vec(2, 1, vec![1.0, -0.5]).unwrap();
        for p in [2.0, 2.5, -1.0] {
            let mix = MixingFamily::power_mean(p).unwrap();
            let err = hyperedge_means(&h, &d, &mix, &neg).unwrap_err();
            assert!(
                matches!(err, Error::DomainError { row: 1, col: 0, .. }),
                "p = {p}: {err}"
            );
        }

        // Zero entries are fine for positive integer exponents but not for
        // fractional or negative ones.
        let zero = EmbeddingMatrix::from_vec(2, 1, vec![0.0, 1.0]).unwrap();
        assert!(hyperedge_means(&h, &d, &MixingFamily::PowerMean(2.0), &zero).is_ok());
        for p in [2.5, -1.0] {
            let mix = MixingFamily::power_mean(p).unwrap();
            let err = hyperedge_means(&h, &d, &mix, &zero).unwrap_err();
            assert!(
                matches!(err, Error::DomainError { row: 0, col: 0, .. }),
                "p = {p}"
            );
        }

        // The identity mixing has no sign restriction.
        assert!(hyperedge_means(&h, &d, &MixingFamily::Identity, &neg).is_ok());
    }

    #[test]
    fn invalid_exponents_are_config_errors() {
        assert!(matches!(
            MixingFamily::power_mean(0.0).unwrap_err(),
            Error::InvalidConfig(_)
        ));
        assert!(matches!(
            MixingFamily::power_mean(f64::INFINITY).unwrap_err(),
            Error::InvalidConfig(_)
        ));
        assert!(matches!(
            MixingFamily::power_mean(f64::NAN).unwrap_err(),
            Error::InvalidConfig(_)
        ));
        // A hand-constructed invalid variant is caught at use.
        let (h, d) = single_pair();
        let f = EmbeddingMatrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        let err = hyperedge_means(&h, &d, &MixingFamily::PowerMean(0.0), &f).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn overflow_is_reported_not_propagated() {
        let (h, d) = single_pair();
        let f = EmbeddingMatrix::from_vec(2, 1, vec![1e308, 1e308]).unwrap();
        let err = hyperedge_means(&h, &d, &MixingFamily::Identity, &f).unwrap_err();
        assert!(matches!(err, Error::NonFiniteResult { .. }));

        let nan = EmbeddingMatrix::from_vec(2, 1, vec![1.0, f64::NAN]).unwrap();
        let err = diffusion_map(&h, &d, &MixingFamily::Identity, &nan).unwrap_err();
        assert!(matches!(err, Error::NonFiniteResult { .. }));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let (h, d) = single_pair();
        let f = EmbeddingMatrix::zeros(3, 1);
        let err = diffusion_map(&h, &d, &MixingFamily::PowerMean(1.0), &f).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn block_metadata_survives_the_map() {
        let (h, d) = single_pair();
        let f = EmbeddingMatrix::from_vec(2, 3, vec![1.0; 6])
            .unwrap()
            .with_label_cols(2)
            .unwrap();
        let out = diffusion_map(&h, &d, &MixingFamily::PowerMean(2.0), &f).unwrap();
        assert_eq!(out.label_cols(), 2);
        assert_eq!(out.feature_cols(), 1);
    }

    #[test]
    fn homogeneity_degrees_multiply_to_one() {
        for p in [1.0, 2.0, 5.0, -1.0, 0.5] {
            let mix = MixingFamily::power_mean(p).unwrap();
            assert!((mix.sigma_degree() * mix.rho_degree() - 1.0).abs() < 1e-15);
        }
        assert_eq!(MixingFamily::Identity.sigma_degree(), 1.0);
        assert_eq!(MixingFamily::Identity.rho_degree(), 1.0);
    }

    #[test]
    fn extreme_exponents_stay_finite() {
        // Widely spread magnitudes with a large exponent would overflow a
        // naive sum of p-th powers; the pivoted form must not.
        let (h, d) = single_pair();
        let f = EmbeddingMatrix::from_vec(2, 1, vec![1e-200, 1e200]).unwrap();
        let mu = hyperedge_means(&h, &d, &MixingFamily::PowerMean(10.0), &f).unwrap();
        // The large element dominates: mean ~ 1e200 * (1/2)^(1/10).
        let expected = 1e200 * 0.5_f64.powf(0.1);
        assert!((mu.get(0, 0) - expected).abs() / expected < 1e-12);

        let mu = hyperedge_means(&h, &d, &MixingFamily::PowerMean(-2.0), &f).unwrap();
        // The small element dominates a negative-exponent mean.
        let expected = 1e-200 * (0.5_f64).powf(-0.5);
        assert!((mu.get(0, 0) - expected).abs() / expected < 1e-12);
    }

    fn arb_case() -> impl Strategy<Value = (Hypergraph, EmbeddingMatrix, f64)> {
        (
            2usize..10,
            any::<u64>(),
            prop::sample::select(vec![1.0, 2.0, 3.0, 5.0, 10.0]),
        )
            .prop_map(|(n, seed, p)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut lists: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
                for _ in 0..rng.random_range(1..6) {
                    let size = rng.random_range(2..=n.min(4));
                    let mut members: Vec<usize> =
                        (0..size).map(|_| rng.random_range(0..n)).collect();
                    members.sort_unstable();
                    members.dedup();
                    if members.len() >= 2 {
                        lists.push(members);
                    }
                }
                let weights: Vec<f64> = (0..lists.len())
                    .map(|_| rng.random_range(0.1..3.0))
                    .collect();
                let h = Hypergraph::from_edge_lists(n, &lists, Some(&weights)).unwrap();
                let k = rng.random_range(1..4);
                let data = (0..n * k).map(|_| rng.random_range(0.05..2.0)).collect();
                let f = EmbeddingMatrix::from_vec(n, k, data).unwrap();
                (h, f, p)
            })
    }

    proptest! {
        /// One-homogeneity within floating-point slack for a general factor.
        #[test]
        fn scales_linearly((h, f, p) in arb_case(), lambda in 1e-3f64..1e3) {
            let d = degree_data(&h);
            let mix = MixingFamily::power_mean(p).unwrap();
            let base = diffusion_map(&h, &d, &mix, &f).unwrap();
            let mut scaled_in = f.clone();
            scaled_in.scale(lambda);
            let out = diffusion_map(&h, &d, &mix, &scaled_in).unwrap();
            let mut expected = base;
            expected.scale(lambda);
            let denom = expected.frobenius_norm().max(1e-300);
            prop_assert!(out.frobenius_diff(&expected).unwrap() / denom < 1e-10);
        }

        /// Order preservation: a positive bump never decreases any output.
        #[test]
        fn preserves_order((h, f, p) in arb_case(), seed in any::<u64>()) {
            let d = degree_data(&h);
            let mix = MixingFamily::power_mean(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut bumped = f.clone();
            for v in bumped.data_mut() {
                *v += rng.random_range(0.01..0.5);
            }
            let lo = diffusion_map(&h, &d, &mix, &f).unwrap();
            let hi = diffusion_map(&h, &d, &mix, &bumped).unwrap();
            for (a, b) in lo.data().iter().zip(hi.data()) {
                prop_assert!(b >= a);
            }
        }
    }
}
