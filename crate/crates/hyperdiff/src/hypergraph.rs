//! Hypergraph incidence structure and degree-based normalizations.
//!
//! A hypergraph on `n` nodes is a weighted collection of `m` hyperedges,
//! each a set of at least two distinct nodes. Incidence is stored twice in
//! CSR-like form — hyperedge-to-members and node-to-incident-hyperedges — so
//! both sweep directions of the diffusion operators are cache-friendly and
//! never materialize an `n x n` matrix.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

/// Options for [`Hypergraph::from_edge_lists_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Accept single-member hyperedges (self-loops). Off by default: a
    /// hyperedge must have at least two distinct members. Self-loops exist
    /// solely as an explicit repair for otherwise-isolated nodes; the
    /// dataset preprocessing step emits them deliberately.
    pub allow_self_loops: bool,
}

/// Weighted hypergraph with dual CSR incidence.
///
/// Hyperedge member lists are stored sorted ascending with duplicates
/// removed; dropped duplicates are counted in [`duplicates_dropped`]
/// (a data-quality warning, not an error). Every node must appear in at
/// least one hyperedge — isolated nodes have zero degree, which would make
/// the degree-normalized operators undefined, so they are rejected at
/// construction.
///
/// [`duplicates_dropped`]: Hypergraph::duplicates_dropped
#[derive(Debug, Clone)]
pub struct Hypergraph {
    n: usize,
    m: usize,
    // hyperedge e's members: edge_nodes[edge_offsets[e]..edge_offsets[e+1]], sorted
    edge_offsets: Vec<usize>,
    edge_nodes: Vec<usize>,
    // node i's incident hyperedges: node_edges[node_offsets[i]..node_offsets[i+1]], sorted
    node_offsets: Vec<usize>,
    node_edges: Vec<usize>,
    weights: Vec<f64>,
    duplicates_dropped: u64,
}

impl Hypergraph {
    /// Builds a hypergraph from per-hyperedge member lists.
    ///
    /// `weights` supplies one positive finite weight per hyperedge; `None`
    /// means unit weights. Member lists may be unsorted and may contain
    /// duplicates (deduplicated silently, with a warning counter). Fails on
    /// out-of-range node ids, hyperedges with fewer than two distinct
    /// members, invalid weights, or nodes covered by no hyperedge.
    pub fn from_edge_lists(
        n: usize,
        edge_lists: &[Vec<usize>],
        weights: Option<&[f64]>,
    ) -> Result<Self> {
        Self::from_edge_lists_with(n, edge_lists, weights, BuildOptions::default())
    }

    /// As [`from_edge_lists`](Self::from_edge_lists), with explicit options.
    pub fn from_edge_lists_with(
        n: usize,
        edge_lists: &[Vec<usize>],
        weights: Option<&[f64]>,
        options: BuildOptions,
    ) -> Result<Self> {
        let m = edge_lists.len();
        let weights: Vec<f64> = match weights {
            Some(w) => {
                if w.len() != m {
                    return Err(Error::WeightCountMismatch { count: w.len(), m });
                }
                w.to_vec()
            }
            None => vec![1.0; m],
        };
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidWeight { index, weight: w });
            }
        }

        let min_members = if options.allow_self_loops { 1 } else { 2 };
        let mut duplicates_dropped = 0u64;
        let mut edge_offsets = Vec::with_capacity(m + 1);
        let mut edge_nodes = Vec::new();
        edge_offsets.push(0);
        for (index, list) in edge_lists.iter().enumerate() {
            let mut members = list.clone();
            members.sort_unstable();
            let before = members.len();
            members.dedup();
            duplicates_dropped += (before - members.len()) as u64;
            if members.len() < min_members {
                return Err(Error::EmptyHyperedge {
                    index,
                    distinct: members.len(),
                });
            }
            if let Some(&node) = members.iter().find(|&&v| v >= n) {
                return Err(Error::NodeOutOfRange { index, node, n });
            }
            edge_nodes.extend_from_slice(&members);
            edge_offsets.push(edge_nodes.len());
        }

        // Transpose hyperedge->members into node->incident-hyperedges.
        let mut counts = vec![0usize; n];
        for &node in &edge_nodes {
            counts[node] += 1;
        }
        if let Some(node) = counts.iter().position(|&c| c == 0) {
            return Err(Error::IsolatedNode { node });
        }
        let mut node_offsets = vec![0usize; n + 1];
        for i in 0..n {
            node_offsets[i + 1] = node_offsets[i] + counts[i];
        }
        let mut node_edges = vec![0usize; edge_nodes.len()];
        let mut cursor = node_offsets.clone();
        for e in 0..m {
            for &node in &edge_nodes[edge_offsets[e]..edge_offsets[e + 1]] {
                node_edges[cursor[node]] = e;
                cursor[node] += 1;
            }
        }

        Ok(Self {
            n,
            m,
            edge_offsets,
            edge_nodes,
            node_offsets,
            node_edges,
            weights,
            duplicates_dropped,
        })
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of hyperedges.
    pub fn edge_count(&self) -> usize {
        self.m
    }

    /// Number of stored (node, hyperedge) incidences.
    pub fn nnz(&self) -> usize {
        self.edge_nodes.len()
    }

    /// Members of hyperedge `e`, sorted ascending, duplicates removed.
    pub fn members(&self, e: usize) -> &[usize] {
        &self.edge_nodes[self.edge_offsets[e]..self.edge_offsets[e + 1]]
    }

    /// Hyperedges incident to node `i`, sorted ascending.
    pub fn incident_edges(&self, i: usize) -> &[usize] {
        &self.node_edges[self.node_offsets[i]..self.node_offsets[i + 1]]
    }

    /// Weight of hyperedge `e`.
    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    /// All hyperedge weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of distinct members of hyperedge `e`.
    pub fn edge_size(&self, e: usize) -> usize {
        self.edge_offsets[e + 1] - self.edge_offsets[e]
    }

    /// How many duplicate member ids were dropped during construction
    /// (data-quality warning counter).
    pub fn duplicates_dropped(&self) -> u64 {
        self.duplicates_dropped
    }

    /// Reconstructs the per-hyperedge member lists (sorted, deduplicated).
    pub fn edge_lists(&self) -> Vec<Vec<usize>> {
        (0..self.m).map(|e| self.members(e).to_vec()).collect()
    }

    /// SHA-256 over the canonical incidence and weights. Two hypergraphs
    /// hash equal iff they have identical node/hyperedge counts, identical
    /// sorted member lists, and bit-identical weights; used as a cache-key
    /// component.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        hasher.update((self.m as u64).to_le_bytes());
        for e in 0..self.m {
            hasher.update((self.edge_size(e) as u64).to_le_bytes());
            for &node in self.members(e) {
                hasher.update((node as u64).to_le_bytes());
            }
            hasher.update(self.weights[e].to_bits().to_le_bytes());
        }
        hasher.finalize().into()
    }
}

/// Node degrees and hyperedge sizes derived from a [`Hypergraph`].
///
/// The degree of node `i` is the weight sum of its incident hyperedges:
/// `delta_i = sum of w(e) over e containing i`. Construction guarantees
/// every degree is positive, so the inverse square roots are always finite.
#[derive(Debug, Clone)]
pub struct DegreeData {
    node_degrees: Vec<f64>,
    inv_sqrt_degrees: Vec<f64>,
    edge_sizes: Vec<usize>,
}

impl DegreeData {
    pub fn node_degrees(&self) -> &[f64] {
        &self.node_degrees
    }

    /// `1 / sqrt(delta_i)` per node.
    pub fn inv_sqrt_degrees(&self) -> &[f64] {
        &self.inv_sqrt_degrees
    }

    pub fn edge_sizes(&self) -> &[usize] {
        &self.edge_sizes
    }
}

/// Computes weighted node degrees and hyperedge sizes.
pub fn degree_data(h: &Hypergraph) -> DegreeData {
    let node_degrees: Vec<f64> = (0..h.node_count())
        .map(|i| h.incident_edges(i).iter().map(|&e| h.weight(e)).sum())
        .collect();
    let inv_sqrt_degrees = node_degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();
    let edge_sizes = (0..h.edge_count()).map(|e| h.edge_size(e)).collect();
    DegreeData {
        node_degrees,
        inv_sqrt_degrees,
        edge_sizes,
    }
}

/// Dense degree-normalized clique-expansion adjacency.
///
/// The clique expansion connects every pair of distinct nodes that share a
/// hyperedge with weight `A(i,j) = sum of w(e) over hyperedges e containing
/// both`; the diagonal is zero. This returns `D^{-1/2} A D^{-1/2}` as a
/// dense matrix — intended for small instances and test oracles, O(n^2)
/// memory by construction.
pub fn clique_expansion_normalized(h: &Hypergraph, deg: &DegreeData) -> EmbeddingMatrix {
    let n = h.node_count();
    let inv = deg.inv_sqrt_degrees();
    let mut out = EmbeddingMatrix::zeros(n, n);
    for e in 0..h.edge_count() {
        let members = h.members(e);
        let w = h.weight(e);
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let v = w * inv[i] * inv[j];
                out.set(i, j, out.get(i, j) + v);
                out.set(j, i, out.get(j, i) + v);
            }
        }
    }
    out
}
