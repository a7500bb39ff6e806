//! Deterministic conversion of subgraphs to language-model input strings.
//!
//! A triple renders as `[head, relation, tail]` with names verbatim; a
//! non-empty subgraph is appended to its claim after a single `" | "`
//! separator, triples joined by single spaces. Triple order is canonical:
//! sort by the smallest entity-list index of either endpoint, then by
//! ordinal (the edge's position in the source dump). This module is the
//! single ordering authority; retrieval applies [`canonical_order`] before
//! a subgraph ever leaves it.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::ClaimRecord;
use crate::kg::Triple;
use crate::retrieval::{RetrievalStrategy, Subgraph};

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("length mismatch: {claims} claims vs {subgraphs} subgraphs")]
    LengthMismatch { claims: usize, subgraphs: usize },
    #[error("line {line}: malformed example record ({reason})")]
    MalformedRecord { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// First position of each entity in the list, for ordering lookups.
pub(crate) fn entity_positions(entities: &[String]) -> HashMap<&str, usize> {
    let mut positions = HashMap::with_capacity(entities.len());
    for (i, e) in entities.iter().enumerate() {
        positions.entry(e.as_str()).or_insert(i);
    }
    positions
}

fn sort_key(triple: &Triple, positions: &HashMap<&str, usize>) -> (usize, usize) {
    let head = positions
        .get(triple.head.as_str())
        .copied()
        .unwrap_or(usize::MAX);
    let tail = positions
        .get(triple.tail.as_str())
        .copied()
        .unwrap_or(usize::MAX);
    (head.min(tail), triple.ordinal)
}

/// Sort triples by (smallest entity-list index of an endpoint, ordinal).
/// Triples touching no listed entity sort last, by ordinal alone, which
/// also covers the empty-entity-list case.
pub fn canonical_order(mut triples: Vec<Triple>, entities: &[String]) -> Vec<Triple> {
    let positions = entity_positions(entities);
    triples.sort_by_key(|t| sort_key(t, &positions));
    triples
}

/// `[head, relation, tail]`, names verbatim.
pub fn triple_to_string(triple: &Triple) -> String {
    format!("[{}, {}, {}]", triple.head, triple.relation, triple.tail)
}

/// The claim alone when the subgraph is empty, otherwise the claim, one
/// `" | "` separator, and the bracketed triples joined by single spaces.
pub fn claim_with_subgraph(claim: &str, subgraph: &Subgraph) -> String {
    if subgraph.triples.is_empty() {
        return claim.to_string();
    }
    let rendered: Vec<String> = subgraph.triples.iter().map(triple_to_string).collect();
    format!("{claim} | {}", rendered.join(" "))
}

/// One output record: the exact LM input string plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerializedExample {
    #[serde(rename = "id")]
    pub claim_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
    pub strategy: RetrievalStrategy,
    pub fallback_applied: bool,
}

/// Write one JSON Lines record per aligned (claim, subgraph) pair.
/// Returns the number of records written.
pub fn emit_examples<W: Write>(
    claims: &[ClaimRecord],
    subgraphs: &[Subgraph],
    sink: &mut W,
) -> Result<usize, SerializeError> {
    if claims.len() != subgraphs.len() {
        return Err(SerializeError::LengthMismatch {
            claims: claims.len(),
            subgraphs: subgraphs.len(),
        });
    }
    for (claim, subgraph) in claims.iter().zip(subgraphs) {
        let example = SerializedExample {
            claim_id: claim.id.clone(),
            text: claim_with_subgraph(&claim.claim, subgraph),
            label: Some(claim.label),
            strategy: subgraph.strategy,
            fallback_applied: subgraph.fallback_applied,
        };
        serde_json::to_writer(&mut *sink, &example).map_err(io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    Ok(claims.len())
}

/// Parse records written by [`emit_examples`].
pub fn read_examples<R: BufRead>(source: R) -> Result<Vec<SerializedExample>, SerializeError> {
    let mut examples = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let example = serde_json::from_str(&line).map_err(|e| SerializeError::MalformedRecord {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        examples.push(example);
    }
    Ok(examples)
}
