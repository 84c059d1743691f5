//! Manifest-driven dataset loading and the on-disk formats.
//!
//! A dataset is a directory holding plain-text files tied together by a
//! JSON manifest (paths are resolved relative to the manifest's location):
//!
//! ```json
//! {
//!   "name": "example",
//!   "hyperedges": "hyperedges.txt",
//!   "weights": "weights.txt",
//!   "features": "features.csv",
//!   "features_format": "dense-csv",
//!   "labels": "labels.txt",
//!   "allow_self_loops": false,
//!   "meta": { "nodes": 60, "hyperedges": 44, "feature_dim": 0, "classes": 2 }
//! }
//! ```
//!
//! `weights`, `features`, and `features_format` are optional. Text formats
//! share the same conventions: `#` starts a comment, blank lines are
//! skipped, and parse errors report 1-based line numbers.
//!
//! * hyperedges — one hyperedge per line, whitespace-separated node ids
//!   (0-based). A single-id line is a self-loop, accepted only when
//!   `allow_self_loops` is set (the explicit repair for isolated nodes).
//! * weights — one positive number per line, one per hyperedge.
//! * labels — one entry per node per line: a class id in `0..classes`, or
//!   `-1` for unlabeled.
//! * features — dense CSV (one comma-separated row per node) or sparse
//!   `node column value` triples with dimensions taken from `meta`.
//!
//! Embeddings use a small binary format (see [`save_embedding`]): magic
//! `HDEM`, a format version, the shape including the label/feature column
//! split, then row-major little-endian f64 — bit-exact by construction.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{BuildOptions, Hypergraph};
use crate::matrix::EmbeddingMatrix;

/// Declared shape of a dataset, validated against the parsed files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub nodes: usize,
    pub hyperedges: usize,
    /// 0 when the dataset has no feature matrix.
    pub feature_dim: usize,
    pub classes: usize,
}

/// On-disk layout of the feature file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FeaturesFormat {
    #[default]
    #[serde(rename = "dense-csv")]
    DenseCsv,
    #[serde(rename = "sparse-triples")]
    SparseTriples,
}

/// The JSON manifest tying a dataset's files together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub hyperedges: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<String>,
    #[serde(default)]
    pub features_format: FeaturesFormat,
    pub labels: String,
    /// Accept single-member hyperedges (written by the isolated-node repair).
    #[serde(default)]
    pub allow_self_loops: bool,
    pub meta: DatasetMeta,
}

/// A fully loaded and validated dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub hypergraph: Hypergraph,
    pub features: Option<EmbeddingMatrix>,
    pub labels: Vec<Option<usize>>,
}

/// Reads just the manifest (no data files).
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Loads and cross-validates a dataset from its manifest path.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let manifest = load_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |rel: &str| -> PathBuf { base.join(rel) };
    let meta = manifest.meta;

    let edges_path = resolve(&manifest.hyperedges);
    let edge_lists = parse_hyperedges(&read(&edges_path)?, &edges_path)?;
    if edge_lists.len() != meta.hyperedges {
        return Err(Error::BadFileFormat {
            path: edges_path.display().to_string(),
            message: format!(
                "manifest declares {} hyperedges, file has {}",
                meta.hyperedges,
                edge_lists.len()
            ),
        });
    }

    let weights = match &manifest.weights {
        Some(rel) => {
            let path = resolve(rel);
            Some(parse_weights(&read(&path)?, &path)?)
        }
        None => None,
    };

    let hypergraph = Hypergraph::from_edge_lists_with(
        meta.nodes,
        &edge_lists,
        weights.as_deref(),
        BuildOptions {
            allow_self_loops: manifest.allow_self_loops,
        },
    )?;

    let labels_path = resolve(&manifest.labels);
    let labels = parse_labels(&read(&labels_path)?, &labels_path)?;
    if labels.len() != meta.nodes {
        return Err(Error::BadFileFormat {
            path: labels_path.display().to_string(),
            message: format!(
                "manifest declares {} nodes, label file has {} entries",
                meta.nodes,
                labels.len()
            ),
        });
    }
    for (node, label) in labels.iter().enumerate() {
        if let Some(label) = *label {
            if label >= meta.classes {
                return Err(Error::LabelOutOfRange {
                    node,
                    label,
                    classes: meta.classes,
                });
            }
        }
    }

    let features = match &manifest.features {
        Some(rel) => {
            let path = resolve(rel);
            let text = read(&path)?;
            let parsed = match manifest.features_format {
                FeaturesFormat::DenseCsv => parse_features_dense(&text, &path)?,
                FeaturesFormat::SparseTriples => {
                    parse_features_sparse(&text, &path, meta.nodes, meta.feature_dim)?
                }
            };
            if parsed.rows() != meta.nodes || parsed.cols() != meta.feature_dim {
                return Err(Error::BadFileFormat {
                    path: path.display().to_string(),
                    message: format!(
                        "manifest declares {}x{} features, file has {}x{}",
                        meta.nodes,
                        meta.feature_dim,
                        parsed.rows(),
                        parsed.cols()
                    ),
                });
            }
            Some(parsed)
        }
        None => None,
    };

    Ok(Dataset {
        manifest,
        hypergraph,
        features,
        labels,
    })
}

/// Writes a manifest as pretty JSON.
pub fn save_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::BadFileFormat {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Strips a trailing comment and surrounding whitespace; `None` for lines
/// with no content.
fn content(line: &str) -> Option<&str> {
    let stripped = match line.find('#') {
        Some(at) => &line[..at],
        None => line,
    }
    .trim();
    (!stripped.is_empty()).then_some(stripped)
}

/// Parses the hyperedge file: whitespace-separated node ids, one hyperedge
/// per line.
pub fn parse_hyperedges(text: &str, path: &Path) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let Some(line) = content(raw) else { continue };
        let mut members = Vec::new();
        for piece in line.split_whitespace() {
            let id: usize = piece.parse().map_err(|_| Error::ParseError {
                path: path.display().to_string(),
                line: idx + 1,
                message: format!("malformed node id {piece:?}"),
            })?;
            members.push(id);
        }
        out.push(members);
    }
    Ok(out)
}

/// Parses the weight file: one positive number per line.
pub fn parse_weights(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let Some(line) = content(raw) else { continue };
        let w: f64 = line.parse().map_err(|_| Error::ParseError {
            path: path.display().to_string(),
            line: idx + 1,
            message: format!("malformed weight {line:?}"),
        })?;
        out.push(w);
    }
    Ok(out)
}

/// Parses the label file: one entry per node, `-1` for unlabeled.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<Option<usize>>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let Some(line) = content(raw) else { continue };
        if line == "-1" {
            out.push(None);
            continue;
        }
        let label: usize = line.parse().map_err(|_| Error::ParseError {
            path: path.display().to_string(),
            line: idx + 1,
            message: format!("malformed label {line:?} (expected a class id or -1)"),
        })?;
        out.push(Some(label));
    }
    Ok(out)
}

/// Parses a dense CSV feature matrix; every row must have the same width.
pub fn parse_features_dense(text: &str, path: &Path) -> Result<EmbeddingMatrix> {
    let mut data = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let Some(line) = content(raw) else { continue };
        let mut width = 0usize;
        for piece in line.split(',') {
            let v: f64 = piece.trim().parse().map_err(|_| Error::ParseError {
                path: path.display().to_string(),
                line: idx + 1,
                message: format!("malformed feature value {piece:?}"),
            })?;
            data.push(v);
            width += 1;
        }
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::ParseError {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: format!("row has {width} values, expected {c}"),
                })
            }
            Some(_) => {}
        }
        rows += 1;
    }
    EmbeddingMatrix::from_vec(rows, cols.unwrap_or(0), data)
}

/// Parses sparse `node column value` feature triples into a dense matrix of
/// the declared shape; unmentioned entries are zero.
pub fn parse_features_sparse(
    text: &str,
    path: &Path,
    nodes: usize,
    feature_dim: usize,
) -> Result<EmbeddingMatrix> {
    let mut out = EmbeddingMatrix::zeros(nodes, feature_dim);
    for (idx, raw) in text.lines().enumerate() {
        let Some(line) = content(raw) else { continue };
        let error = |message: String| Error::ParseError {
            path: path.display().to_string(),
            line: idx + 1,
            message,
        };
        let mut pieces = line.split_whitespace();
        let (Some(i), Some(j), Some(v), None) =
            (pieces.next(), pieces.next(), pieces.next(), pieces.next())
        else {
            return Err(error(format!(
                "expected `node column value`, found {line:?}"
            )));
        };
        let i: usize = i
            .parse()
            .map_err(|_| error(format!("malformed node id {i:?}")))?;
        let j: usize = j
            .parse()
            .map_err(|_| error(format!("malformed column {j:?}")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| error(format!("malformed value {v:?}")))?;
        if i >= nodes || j >= feature_dim {
            return Err(error(format!(
                "entry ({i}, {j}) outside the declared {nodes}x{feature_dim} shape"
            )));
        }
        out.set(i, j, v);
    }
    Ok(out)
}

/// Parses a node-id list (one id per line), e.g. a fixed training split.
pub fn parse_id_list(text: &str, path: &Path) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let Some(line) = content(raw) else { continue };
        let id: usize = line.parse().map_err(|_| Error::ParseError {
            path: path.display().to_string(),
            line: idx + 1,
            message: format!("malformed node id {line:?}"),
        })?;
        out.push(id);
    }
    Ok(out)
}

/// Writes the hyperedge member lists in the text format
/// [`parse_hyperedges`] reads.
pub fn save_hyperedges(path: &Path, h: &Hypergraph) -> Result<()> {
    let mut out = String::new();
    for e in 0..h.edge_count() {
        let line: Vec<String> = h.members(e).iter().map(usize::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes hyperedge weights in the text format [`parse_weights`] reads.
/// Shortest-round-trip float formatting keeps reloads bit-identical.
pub fn save_weights(path: &Path, h: &Hypergraph) -> Result<()> {
    let mut out = String::new();
    for &w in h.weights() {
        out.push_str(&format!("{w}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

const EMBEDDING_MAGIC: &[u8; 4] = b"HDEM";
const EMBEDDING_VERSION: u32 = 1;

/// Writes an embedding in the binary format: magic `HDEM`, version (u32),
/// rows, cols, label_cols (u64 each), then row-major f64, all little-endian.
pub fn save_embedding(path: &Path, m: &EmbeddingMatrix) -> Result<()> {
    let mut bytes = Vec::with_capacity(32 + m.data().len() * 8);
    bytes.extend_from_slice(EMBEDDING_MAGIC);
    bytes.extend_from_slice(&EMBEDDING_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.label_cols() as u64).to_le_bytes());
    for &v in m.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads an embedding written by [`save_embedding`].
pub fn load_embedding(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = fs::read(path)?;
    let display = path.display().to_string();
    let bad = |message: String| Error::BadFileFormat {
        path: display.clone(),
        message,
    };
    if bytes.len() < 32 {
        return Err(bad(format!("file too short ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != EMBEDDING_MAGIC {
        return Err(bad(format!(
            "bad magic {:?}, expected {EMBEDDING_MAGIC:?}",
            &bytes[0..4]
        )));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != EMBEDDING_VERSION {
        return Err(bad(format!(
            "unsupported format version {version}, expected {EMBEDDING_VERSION}"
        )));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) as usize;
    let rows = word(8);
    let cols = word(16);
    let label_cols = word(24);
    let expected = 32
        + rows
            .checked_mul(cols)
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| bad(format!("implausible shape {rows}x{cols}")))?;
    if bytes.len() != expected {
        return Err(bad(format!(
            "expected {expected} bytes for a {rows}x{cols} embedding, found {}",
            bytes.len()
        )));
    }
    let data: Vec<f64> = bytes[32..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    EmbeddingMatrix::from_vec(rows, cols, data)?.with_label_cols(label_cols)
}

/// Shifts features so the smallest entry becomes zero. Returns the shifted
/// matrix and the shift applied (0 when everything was already nonnegative).
pub fn shift_features(x: &EmbeddingMatrix) -> (EmbeddingMatrix, f64) {
    let min = x.min_entry();
    if min >= 0.0 {
        return (x.clone(), 0.0);
    }
    let mut out = x.clone();
    for v in out.data_mut() {
        *v -= min;
    }
    (out, -min)
}

/// Appends a self-loop hyperedge for every node not covered by `edge_lists`.
/// Returns the repaired node ids. The output only builds with
/// [`BuildOptions::allow_self_loops`] set (or the manifest flag).
pub fn add_self_loops(edge_lists: &mut Vec<Vec<usize>>, nodes: usize) -> Vec<usize> {
    let mut covered = vec![false; nodes];
    for list in edge_lists.iter() {
        for &i in list {
            if i < nodes {
                covered[i] = true;
            }
        }
    }
    let repaired: Vec<usize> = (0..nodes).filter(|&i| !covered[i]).collect();
    for &i in &repaired {
        edge_lists.push(vec![i]);
    }
    repaired
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::degree_data;

    fn p(name: &str) -> PathBuf {
        PathBuf::from(name)
    }

    #[test]
    fn parses_hyperedges_with_comments() {
        let text = "# triangle\n0 1 2\n\n2 3   # bridge\n";
        let lists = parse_hyperedges(text, &p("edges.txt")).unwrap();
        assert_eq!(lists, vec![vec![0, 1, 2], vec![2, 3]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "0 1\n1 2\n2 3\n0 2\nx 3\n";
        let err = parse_hyperedges(text, &p("edges.txt")).unwrap_err();
        match err {
            Error::ParseError {
                line, ref message, ..
            } => {
                assert_eq!(line, 5);
                assert!(message.contains("\"x\""), "{message}");
            }
            other => panic!("expected ParseError, got {other:?}"),
        }

        let err = parse_weights("1.0\nheavy\n", &p("w.txt")).unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 2, .. }));

        let err = parse_labels("0\n1\ntwo\n", &p("l.txt")).unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 3, .. }));
    }

    #[test]
    fn labels_support_unlabeled_sentinel() {
        let labels = parse_labels("1\n-1\n0\n# done\n", &p("l.txt")).unwrap();
        assert_eq!(labels, vec![Some(1), None, Some(0)]);
    }

    #[test]
    fn dense_features_require_rectangles() {
        let m = parse_features_dense("1.0, 2.0\n3.5,4.5\n", &p("f.csv")).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 2);
        assert_eq!(m.get(1, 0), 3.5);
        let err = parse_features_dense("1.0,2.0\n3.0\n", &p("f.csv")).unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 2, .. }));
    }

    #[test]
    fn sparse_features_fill_a_dense_shape() {
        let m = parse_features_sparse("0 2 1.5\n3 0 2.0\n", &p("f.triples"), 4, 3).unwrap();
        assert_eq!(m.get(0, 2), 1.5);
        assert_eq!(m.get(3, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        let err = parse_features_sparse("9 0 1.0\n", &p("f.triples"), 4, 3).unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 1, .. }));
        let err = parse_features_sparse("1 2\n", &p("f.triples"), 4, 3).unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 1, .. }));
    }

    #[test]
    fn hypergraph_files_round_trip_bit_for_bit() {
        let h = Hypergraph::from_edge_lists(
            4,
            &[vec![0, 1, 2], vec![2, 3], vec![0, 3]],
            Some(&[0.1, 2.5, 1.0 / 3.0]),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("hyperedges.txt");
        let weights = dir.path().join("weights.txt");
        save_hyperedges(&edges, &h).unwrap();
        save_weights(&weights, &h).unwrap();

        let lists = parse_hyperedges(&fs::read_to_string(&edges).unwrap(), &edges).unwrap();
        let ws = parse_weights(&fs::read_to_string(&weights).unwrap(), &weights).unwrap();
        let reloaded = Hypergraph::from_edge_lists(4, &lists, Some(&ws)).unwrap();
        assert_eq!(h.content_hash(), reloaded.content_hash());
        let bits: Vec<u64> = h.weights().iter().map(|w| w.to_bits()).collect();
        let reloaded_bits: Vec<u64> = reloaded.weights().iter().map(|w| w.to_bits()).collect();
        assert_eq!(bits, reloaded_bits);
    }

    #[test]
    fn embedding_binary_round_trips() {
        let m = EmbeddingMatrix::from_vec(3, 2, vec![0.1, -2.0, 3.5e-10, 4.0, 1.0 / 3.0, 6.25])
            .unwrap()
            .with_label_cols(1)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("embedding.hdem");
        save_embedding(&path, &m).unwrap();
        let loaded = load_embedding(&path).unwrap();
        assert_eq!(m, loaded);
        assert_eq!(loaded.label_cols(), 1);
        let bits: Vec<u64> = m.data().iter().map(|v| v.to_bits()).collect();
        let loaded_bits: Vec<u64> = loaded.data().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, loaded_bits);
    }

    #[test]
    fn embedding_loader_rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.hdem");
        fs::write(&path, b"nope").unwrap();
        assert!(matches!(
            load_embedding(&path).unwrap_err(),
            Error::BadFileFormat { .. }
        ));

        let m = EmbeddingMatrix::zeros(2, 2);
        save_embedding(&path, &m).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 4);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_embedding(&path).unwrap_err(),
            Error::BadFileFormat { .. }
        ));

        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_embedding(&path).unwrap_err(),
            Error::BadFileFormat { .. }
        ));
    }

    fn write_dataset(dir: &Path) -> PathBuf {
        fs::write(dir.join("hyperedges.txt"), "0 1 2\n2 3\n1 3\n").unwrap();
        fs::write(dir.join("weights.txt"), "1.0\n2.0\n0.5\n").unwrap();
        fs::write(dir.join("labels.txt"), "0\n1\n-1\n1\n").unwrap();
        fs::write(
            dir.join("features.csv"),
            "0.0,1.0\n2.0,0.0\n1.5,1.5\n0.0,0.0\n",
        )
        .unwrap();
        let manifest = DatasetManifest {
            name: "toy".into(),
            hyperedges: "hyperedges.txt".into(),
            weights: Some("weights.txt".into()),
            features: Some("features.csv".into()),
            features_format: FeaturesFormat::DenseCsv,
            labels: "labels.txt".into(),
            allow_self_loops: false,
            meta: DatasetMeta {
                nodes: 4,
                hyperedges: 3,
                feature_dim: 2,
                classes: 2,
            },
        };
        let path = dir.join("manifest.json");
        save_manifest(&path, &manifest).unwrap();
        path
    }

    #[test]
    fn loads_a_complete_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = write_dataset(dir.path());
        let ds = load_dataset(&manifest_path).unwrap();
        assert_eq!(ds.hypergraph.node_count(), 4);
        assert_eq!(ds.hypergraph.edge_count(), 3);
        assert_eq!(ds.hypergraph.weight(1), 2.0);
        assert_eq!(ds.labels, vec![Some(0), Some(1), None, Some(1)]);
        let features = ds.features.unwrap();
        assert_eq!(features.get(1, 0), 2.0);
        let d = degree_data(&ds.hypergraph);
        assert_eq!(d.node_degrees()[3], 2.5);
    }

    #[test]
    fn meta_mismatches_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = write_dataset(dir.path());
        let mut manifest = load_manifest(&manifest_path).unwrap();
        manifest.meta.hyperedges = 7;
        save_manifest(&manifest_path, &manifest).unwrap();
        assert!(matches!(
            load_dataset(&manifest_path).unwrap_err(),
            Error::BadFileFormat { .. }
        ));

        let mut manifest = load_manifest(&manifest_path).unwrap();
        manifest.meta.hyperedges = 3;
        manifest.meta.classes = 1;
        save_manifest(&manifest_path, &manifest).unwrap();
        assert!(matches!(
            load_dataset(&manifest_path).unwrap_err(),
            Error::LabelOutOfRange { .. }
        ));
    }

    #[test]
    fn self_loop_repair_covers_isolated_nodes() {
        let mut lists = vec![vec![0, 1], vec![1, 3]];
        let repaired = add_self_loops(&mut lists, 5);
        assert_eq!(repaired, vec![2, 4]);
        assert_eq!(lists.len(), 4);
        assert_eq!(lists[2], vec![2]);

        // Strict build still refuses; the explicit option accepts.
        assert!(Hypergraph::from_edge_lists(5, &lists, None).is_err());
        let h = Hypergraph::from_edge_lists_with(
            5,
            &lists,
            None,
            BuildOptions {
                allow_self_loops: true,
            },
        )
        .unwrap();
        assert_eq!(degree_data(&h).node_degrees()[2], 1.0);
    }

    #[test]
    fn feature_shift_makes_entries_nonnegative() {
        let x = EmbeddingMatrix::from_vec(2, 2, vec![-1.5, 0.0, 2.0, -0.25]).unwrap();
        let (shifted, shift) = shift_features(&x);
        assert_eq!(shift, 1.5);
        assert_eq!(shifted.min_entry(), 0.0);
        assert_eq!(shifted.get(1, 0), 3.5);

        let ok = EmbeddingMatrix::from_vec(1, 2, vec![0.0, 3.0]).unwrap();
        let (same, shift) = shift_features(&ok);
        assert_eq!(shift, 0.0);
        assert_eq!(same, ok);
    }

    #[test]
    fn id_lists_parse() {
        let ids = parse_id_list("3\n1\n# held out\n8\n", &p("ids.txt")).unwrap();
        assert_eq!(ids, vec![3, 1, 8]);
        assert!(matches!(
            parse_id_list("1\n-2\n", &p("ids.txt")).unwrap_err(),
            Error::ParseError { line: 2, .. }
        ));
    }
}
