//! Non-trainable subgraph retrieval strategies and batch statistics.
//!
//! Three strategies pull evidence for a claim out of the graph, keyed on
//! the claim's entity list:
//!
//! - **direct**: triples whose head *and* tail are both listed entities;
//! - **contextual**: the direct set, plus entity-incident triples whose
//!   relation name matches the claim's word stems;
//! - **single-step**: every triple incident to at least one listed entity
//!   (the one-hop neighborhood).
//!
//! The sets nest: direct ⊆ contextual ⊆ single-step. A fallback policy can
//! substitute the single-step subgraph whenever the requested strategy
//! comes back empty. All functions are pure reads over an immutable graph.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::ClaimRecord;
use crate::kg::{KnowledgeGraph, Triple};
use crate::serialize::{canonical_order, entity_positions};
use crate::textnorm::{claim_token_set, relation_matches_claim};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetrievalStrategy {
    Direct,
    Contextual,
    SingleStep,
}

impl RetrievalStrategy {
    pub const ALL: [RetrievalStrategy; 3] = [
        RetrievalStrategy::Direct,
        RetrievalStrategy::Contextual,
        RetrievalStrategy::SingleStep,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            RetrievalStrategy::Direct => "direct",
            RetrievalStrategy::Contextual => "contextual",
            RetrievalStrategy::SingleStep => "single-step",
        }
    }
}

impl fmt::Display for RetrievalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RetrievalStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|v| v.tag() == s).ok_or_else(|| {
            format!("unknown strategy {s:?} (expected direct, contextual, or single-step)")
        })
    }
}

/// What to do when the requested strategy returns no triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackPolicy {
    KeepEmpty,
    SingleStepOnEmpty,
}

impl FallbackPolicy {
    pub fn tag(self) -> &'static str {
        match self {
            FallbackPolicy::KeepEmpty => "keep-empty",
            FallbackPolicy::SingleStepOnEmpty => "single-step-on-empty",
        }
    }
}

impl fmt::Display for FallbackPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FallbackPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [FallbackPolicy::KeepEmpty, FallbackPolicy::SingleStepOnEmpty]
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| {
                format!(
                    "unknown fallback policy {s:?} (expected keep-empty or single-step-on-empty)"
                )
            })
    }
}

/// Retrieved evidence for one claim, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub triples: Vec<Triple>,
    /// The strategy that was requested, even when the fallback substituted
    /// its result.
    pub strategy: RetrievalStrategy,
    /// True iff the requested strategy produced nothing and the single-step
    /// subgraph was substituted.
    pub fallback_applied: bool,
}

impl Subgraph {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// True iff the requested strategy itself found evidence, ignoring any
    /// fallback substitution.
    pub fn primary_nonempty(&self) -> bool {
        !self.fallback_applied && !self.triples.is_empty()
    }
}

/// Batch-level counts over subgraphs. `nonempty` counts subgraphs whose
/// *primary* strategy found evidence, before any fallback substitution;
/// the size figures describe the returned (post-fallback) subgraphs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgraphStats {
    pub total: usize,
    pub nonempty: usize,
    pub nonempty_fraction: f64,
    pub size_mean: f64,
    pub size_max: usize,
}

impl SubgraphStats {
    pub fn from_subgraphs(subgraphs: &[Subgraph]) -> Self {
        let total = subgraphs.len();
        let nonempty = subgraphs.iter().filter(|s| s.primary_nonempty()).count();
        let size_max = subgraphs.iter().map(Subgraph::len).max().unwrap_or(0);
        let (nonempty_fraction, size_mean) = if total == 0 {
            (0.0, 0.0)
        } else {
            let sum: usize = subgraphs.iter().map(Subgraph::len).sum();
            (nonempty as f64 / total as f64, sum as f64 / total as f64)
        };
        SubgraphStats {
            total,
            nonempty,
            nonempty_fraction,
            size_mean,
            size_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("contextual retrieval requires a claim text")]
    MissingClaim,
}

/// Triples whose head and tail are both in the entity list.
pub fn retrieve_direct(graph: &KnowledgeGraph, entities: &[String]) -> Subgraph {
    let positions = entity_positions(entities);
    let mut ordinals = BTreeSet::new();
    for entity in positions.keys() {
        for &o in graph.out_ordinals(entity) {
            if positions.contains_key(graph.triples()[o].tail.as_str()) {
                ordinals.insert(o);
            }
        }
    }
    build_subgraph(graph, ordinals, entities, RetrievalStrategy::Direct)
}

/// The direct set plus entity-incident triples whose relation name matches
/// the claim's stem set.
pub fn retrieve_contextual(graph: &KnowledgeGraph, entities: &[String], claim: &str) -> Subgraph {
    let stems = claim_token_set(claim);
    let positions = entity_positions(entities);
    // relation names repeat heavily across a neighborhood; memoize matches
    let mut relation_cache: HashMap<&str, bool> = HashMap::new();
    let mut ordinals = BTreeSet::new();
    for entity in positions.keys() {
        for &o in graph.out_ordinals(entity) {
            let t = &graph.triples()[o];
            if positions.contains_key(t.tail.as_str())
                || *relation_cache
                    .entry(t.relation.as_str())
                    .or_insert_with(|| relation_matches_claim(&t.relation, &stems))
            {
                ordinals.insert(o);
            }
        }
        for &o in graph.in_ordinals(entity) {
            let t = &graph.triples()[o];
            if *relation_cache
                .entry(t.relation.as_str())
                .or_insert_with(|| relation_matches_claim(&t.relation, &stems))
            {
                ordinals.insert(o);
            }
        }
    }
    build_subgraph(graph, ordinals, entities, RetrievalStrategy::Contextual)
}

/// Every triple with at least one endpoint in the entity list.
pub fn retrieve_single_step(graph: &KnowledgeGraph, entities: &[String]) -> Subgraph {
    let positions = entity_positions(entities);
    let mut ordinals = BTreeSet::new();
    for entity in positions.keys() {
        ordinals.extend(graph.out_ordinals(entity).iter().copied());
        ordinals.extend(graph.in_ordinals(entity).iter().copied());
    }
    build_subgraph(graph, ordinals, entities, RetrievalStrategy::SingleStep)
}

fn build_subgraph(
    graph: &KnowledgeGraph,
    ordinals: BTreeSet<usize>,
    entities: &[String],
    strategy: RetrievalStrategy,
) -> Subgraph {
    let triples: Vec<Triple> = ordinals
        .into_iter()
        .map(|o| graph.triples()[o].clone())
        .collect();
    Subgraph {
        triples: canonical_order(triples, entities),
        strategy,
        fallback_applied: false,
    }
}

/// Dispatch to a strategy and apply the fallback policy. The claim text is
/// required only for the contextual strategy.
pub fn retrieve(
    graph: &KnowledgeGraph,
    entities: &[String],
    claim: Option<&str>,
    strategy: RetrievalStrategy,
    fallback: FallbackPolicy,
) -> Result<Subgraph, RetrievalError> {
    let primary = match strategy {
        RetrievalStrategy::Direct => retrieve_direct(graph, entities),
        RetrievalStrategy::Contextual => {
            let claim = claim.ok_or(RetrievalError::MissingClaim)?;
            retrieve_contextual(graph, entities, claim)
        }
        RetrievalStrategy::SingleStep => retrieve_single_step(graph, entities),
    };
    if primary.triples.is_empty() && fallback == FallbackPolicy::SingleStepOnEmpty {
        let mut substituted = retrieve_single_step(graph, entities);
        substituted.strategy = strategy;
        substituted.fallback_applied = true;
        return Ok(substituted);
    }
    Ok(primary)
}

/// Retrieve one subgraph per claim, in input order, plus batch statistics.
/// Work fans out across threads; the output is identical to a sequential
/// run.
pub fn batch_retrieve(
    graph: &KnowledgeGraph,
    claims: &[ClaimRecord],
    strategy: RetrievalStrategy,
    fallback: FallbackPolicy,
) -> Result<(Vec<Subgraph>, SubgraphStats), RetrievalError> {
    let subgraphs = claims
        .par_iter()
        .map(|c| retrieve(graph, &c.entities, Some(&c.claim), strategy, fallback))
        .collect::<Result<Vec<_>, _>>()?;
    let stats = SubgraphStats::from_subgraphs(&subgraphs);
    Ok((subgraphs, stats))
}
