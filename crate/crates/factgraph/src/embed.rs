//! Precomputed text-embedding lookup and relevance scoring.
//!
//! Vectors come from an upstream frozen encoder and are persisted as a
//! line-delimited table: each record is a text key, one TAB, then the
//! components as space-separated decimal floats. The table dimension is
//! inferred from the first record (768 by default for an empty table).
//!
//! Relevance of a graph node to a claim is the cosine similarity of their
//! vectors; node feature rows are scaled by their relevance scores before
//! downstream processing. Everything here is generic over the scalar type;
//! see the `EmbeddingTable32`/`EmbeddingTable64` aliases at the crate root.

use std::fmt;
use std::io::{self, BufRead, Write};

use indexmap::IndexMap;
use num_traits::{Float, FromPrimitive};
use thiserror::Error;

/// Vector component scalar. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FromPrimitive + fmt::Display + fmt::Debug + Copy + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + fmt::Display + fmt::Debug + Copy + Send + Sync + 'static
{
}

/// Embedding vector length used when nothing else is specified.
pub const DEFAULT_DIM: usize = 768;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: non-finite component")]
    NonFiniteComponent { line: usize },
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("line {line}: malformed record ({reason})")]
    MalformedRecord { line: usize, reason: String },
    #[error("missing embedding for {0:?}")]
    MissingEmbedding(String),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("vector lengths differ: {0} vs {1}")]
    VectorLengthMismatch(usize, usize),
    #[error("{rows} feature rows vs {scores} scores")]
    ShapeMismatch { rows: usize, scores: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Cosine similarity in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceScore<S: Scalar>(S);

impl<S: Scalar> RelevanceScore<S> {
    /// Wrap an externally computed score. [`cosine`] outputs lie in
    /// `[-1, 1]`; scores from other sources only have to be finite.
    pub fn new(value: S) -> Self {
        assert!(value.is_finite(), "relevance score must be finite");
        RelevanceScore(value)
    }

    pub fn value(self) -> S {
        self.0
    }
}

/// Immutable text → vector lookup with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<S: Scalar> {
    dim: usize,
    entries: IndexMap<String, Vec<S>>,
}

impl<S: Scalar> Default for EmbeddingTable<S> {
    fn default() -> Self {
        Self::new(DEFAULT_DIM)
    }
}

impl<S: Scalar> EmbeddingTable<S> {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        EmbeddingTable {
            dim,
            entries: IndexMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, text: &str) -> Option<&[S]> {
        self.entries.get(text).map(Vec::as_slice)
    }

    pub fn insert(&mut self, text: &str, vector: Vec<S>) -> Result<(), EmbedError> {
        if vector.len() != self.dim {
            return Err(EmbedError::VectorLengthMismatch(self.dim, vector.len()));
        }
        if self.entries.contains_key(text) {
            return Err(EmbedError::DuplicateKey(text.to_string()));
        }
        self.entries.insert(text.to_string(), vector);
        Ok(())
    }

    /// Parse a table, inferring the dimension from the first record.
    pub fn load<R: BufRead>(source: R) -> Result<Self, EmbedError> {
        let mut entries: IndexMap<String, Vec<S>> = IndexMap::new();
        let mut dim: Option<usize> = None;
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let line_no = idx + 1;
            let (key, rest) = line.split_once('\t').ok_or(EmbedError::MalformedRecord {
                line: line_no,
                reason: "expected a TAB after the text key".into(),
            })?;
            let mut vector = Vec::new();
            for part in rest.split(' ').filter(|p| !p.is_empty()) {
                let value: f64 = part.parse().map_err(|_| EmbedError::MalformedRecord {
                    line: line_no,
                    reason: format!("bad float literal {part:?}"),
                })?;
                if !value.is_finite() {
                    return Err(EmbedError::NonFiniteComponent { line: line_no });
                }
                vector.push(
                    S::from_f64(value).ok_or(EmbedError::NonFiniteComponent { line: line_no })?,
                );
            }
            if vector.is_empty() {
                return Err(EmbedError::MalformedRecord {
                    line: line_no,
                    reason: "empty vector".into(),
                });
            }
            match dim {
                None => dim = Some(vector.len()),
                Some(d) if d != vector.len() => {
                    return Err(EmbedError::DimensionMismatch {
                        line: line_no,
                        expected: d,
                        found: vector.len(),
                    })
                }
                Some(_) => {}
            }
            if entries.contains_key(key) {
                return Err(EmbedError::DuplicateKey(key.to_string()));
            }
            entries.insert(key.to_string(), vector);
        }
        Ok(EmbeddingTable {
            dim: dim.unwrap_or(DEFAULT_DIM),
            entries,
        })
    }

    /// Write the table in the format read by [`load`](Self::load), keys in
    /// insertion order.
    pub fn save<W: Write>(&self, sink: &mut W) -> io::Result<()> {
        for (key, vector) in &self.entries {
            write!(sink, "{key}\t")?;
            for (i, c) in vector.iter().enumerate() {
                if i > 0 {
                    sink.write_all(b" ")?;
                }
                write!(sink, "{c}")?;
            }
            sink.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Cosine of each node text against the claim vector, in input order.
    pub fn relevance_scores<T: AsRef<str>>(
        &self,
        claim_vec: &[S],
        node_texts: &[T],
    ) -> Result<Vec<RelevanceScore<S>>, EmbedError> {
        node_texts
            .iter()
            .map(|text| {
                let vector = self
                    .get(text.as_ref())
                    .ok_or_else(|| EmbedError::MissingEmbedding(text.as_ref().to_string()))?;
                cosine(claim_vec, vector)
            })
            .collect()
    }
}

/// Cosine similarity `dot(u, v) / (‖u‖ ‖v‖)`.
pub fn cosine<S: Scalar>(u: &[S], v: &[S]) -> Result<RelevanceScore<S>, EmbedError> {
    if u.len() != v.len() {
        return Err(EmbedError::VectorLengthMismatch(u.len(), v.len()));
    }
    let mut dot = S::zero();
    let mut norm_u = S::zero();
    let mut norm_v = S::zero();
    for (&a, &b) in u.iter().zip(v) {
        dot = dot + a * b;
        norm_u = norm_u + a * a;
        norm_v = norm_v + b * b;
    }
    if norm_u.is_zero() || norm_v.is_zero() {
        return Err(EmbedError::ZeroVector);
    }
    Ok(RelevanceScore(dot / (norm_u.sqrt() * norm_v.sqrt())))
}

/// Scale feature row `i` by score `i`.
pub fn scale_node_features<S: Scalar>(
    features: &[Vec<S>],
    scores: &[RelevanceScore<S>],
) -> Result<Vec<Vec<S>>, EmbedError> {
    if features.len() != scores.len() {
        return Err(EmbedError::ShapeMismatch {
            rows: features.len(),
            scores: scores.len(),
        });
    }
    Ok(features
        .iter()
        .zip(scores)
        .map(|(row, score)| row.iter().map(|&x| x * score.0).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(value: f64) -> RelevanceScore<f64> {
        RelevanceScore::new(value)
    }

    #[test]
    fn load_infers_dim() {
        let table = EmbeddingTable::<f64>::load("a\t1 0 0 0\nb\t0 1 0 0\n".as_bytes()).unwrap();
        assert_eq!(table.dim(), 4);
        assert_eq!(table.len(), 2);
        assert_eq!(table.get("a"), Some(&[1.0, 0.0, 0.0, 0.0][..]));
        assert_eq!(table.get("missing"), None);
    }

    #[test]
    fn load_rejects_bad_tables() {
        assert!(matches!(
            EmbeddingTable::<f64>::load("a\t1 2 3 4\nb\t1 2 3 4 5\n".as_bytes()),
            Err(EmbedError::DimensionMismatch {
                line: 2,
                expected: 4,
                found: 5
            })
        ));
        assert!(matches!(
            EmbeddingTable::<f64>::load("a\t1 nan\n".as_bytes()),
            Err(EmbedError::NonFiniteComponent { line: 1 })
        ));
        assert!(matches!(
            EmbeddingTable::<f64>::load("a\t1 inf\n".as_bytes()),
            Err(EmbedError::NonFiniteComponent { line: 1 })
        ));
        assert!(matches!(
            EmbeddingTable::<f64>::load("a\t1 2\na\t3 4\n".as_bytes()),
            Err(EmbedError::DuplicateKey(k)) if k == "a"
        ));
        assert!(matches!(
            EmbeddingTable::<f64>::load("no tab here\n".as_bytes()),
            Err(EmbedError::MalformedRecord { line: 1, .. })
        ));
        assert!(matches!(
            EmbeddingTable::<f64>::load("a\t1 x 3\n".as_bytes()),
            Err(EmbedError::MalformedRecord { line: 1, .. })
        ));
    }

    #[test]
    fn wide_records_give_dim_768() {
        let components: Vec<String> = (0..768).map(|i| format!("{}", i as f64 * 0.5)).collect();
        let record = format!("claim text\t{}\n", components.join(" "));
        let table = EmbeddingTable::<f32>::load(record.as_bytes()).unwrap();
        assert_eq!(table.dim(), 768);
    }

    #[test]
    fn keys_may_contain_spaces() {
        let table = EmbeddingTable::<f64>::load("300 North LaSalle\t1 2\n".as_bytes()).unwrap();
        assert!(table.get("300 North LaSalle").is_some());
    }

    #[test]
    fn save_load_round_trip() {
        let mut table = EmbeddingTable::<f32>::new(3);
        table.insert("alpha", vec![0.25, -1.5, 3.0]).unwrap();
        table.insert("beta gamma", vec![0.1, 0.2, 0.3]).unwrap();
        let mut buf = Vec::new();
        table.save(&mut buf).unwrap();
        let reloaded = EmbeddingTable::<f32>::load(&buf[..]).unwrap();
        assert_eq!(reloaded, table);

        let mut table64 = EmbeddingTable::<f64>::new(2);
        table64
            .insert("x", vec![std::f64::consts::PI, 1e-300])
            .unwrap();
        let mut buf = Vec::new();
        table64.save(&mut buf).unwrap();
        assert_eq!(EmbeddingTable::<f64>::load(&buf[..]).unwrap(), table64);
    }

    #[test]
    fn cosine_identities() {
        let v = vec![0.3, -2.0, 5.5];
        assert!((cosine(&v, &v).unwrap().value() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap().value(), 0.0);
        let c = cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap().value();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cosine_error_cases() {
        assert!(matches!(
            cosine::<f64>(&[1.0], &[1.0, 2.0]),
            Err(EmbedError::VectorLengthMismatch(1, 2))
        ));
        assert!(matches!(
            cosine::<f64>(&[0.0, 0.0], &[1.0, 2.0]),
            Err(EmbedError::ZeroVector)
        ));
        assert!(matches!(
            cosine::<f64>(&[1.0, 2.0], &[0.0, 0.0]),
            Err(EmbedError::ZeroVector)
        ));
    }

    #[test]
    fn relevance_scores_follow_input_order() {
        let table = EmbeddingTable::<f64>::load("a\t1 0\nb\t0 1\nc\t1 1\n".as_bytes()).unwrap();
        let claim = [1.0, 0.0];
        let scores = table.relevance_scores(&claim, &["b", "c", "a"]).unwrap();
        assert_eq!(scores.len(), 3);
        assert!((scores[0].value() - 0.0).abs() < 1e-12);
        assert!((scores[1].value() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((scores[2].value() - 1.0).abs() < 1e-12);
        // identical vectors score 1
        let same = table.relevance_scores(&[0.0, 1.0], &["b"]).unwrap();
        assert!((same[0].value() - 1.0).abs() < 1e-12);
        assert!(matches!(
            table.relevance_scores(&claim, &["nope"]),
            Err(EmbedError::MissingEmbedding(k)) if k == "nope"
        ));
    }

    #[test]
    fn feature_scaling() {
        let rows = vec![vec![2.0, 4.0], vec![1.0, 1.0]];
        let scores = vec![score(0.5), score(2.0)];
        let scaled = scale_node_features(&rows, &scores).unwrap();
        assert_eq!(scaled, vec![vec![1.0, 2.0], vec![2.0, 2.0]]);

        let identity = scale_node_features(&rows, &[score(1.0), score(1.0)]).unwrap();
        assert_eq!(identity, rows);

        let zeroed = scale_node_features(&rows, &[score(0.0), score(1.0)]).unwrap();
        assert_eq!(zeroed[0], vec![0.0, 0.0]);

        // linear in the features: scaling inputs by c scales outputs by c
        let doubled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|x| x * 3.0).collect())
            .collect();
        let scaled_doubled = scale_node_features(&doubled, &scores).unwrap();
        for (a, b) in scaled_doubled.iter().flatten().zip(scaled.iter().flatten()) {
            assert!((a - b * 3.0).abs() < 1e-12);
        }

        assert!(matches!(
            scale_node_features(&rows, &[score(1.0)]),
            Err(EmbedError::ShapeMismatch { rows: 2, scores: 1 })
        ));
    }
}
