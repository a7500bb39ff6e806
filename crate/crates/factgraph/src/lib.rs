//! Knowledge-graph evidence retrieval and evaluation toolkit for claim
//! verification.
//!
//! The pipeline: load a triple dump into an indexed [`KnowledgeGraph`],
//! pull a per-claim evidence subgraph with one of three non-trainable
//! [`retrieval`] strategies, linearize it next to the claim for a text
//! classifier ([`serialize`]), or build batched verification prompts and
//! parse the replies ([`prompt`]). [`embed`] scores node relevance against
//! a claim from a precomputed embedding table, and [`metrics`] reports
//! accuracy/precision/recall/F1 per claim reasoning type.

pub mod dataset;
pub mod embed;
pub mod kg;
pub mod metrics;
pub mod prompt;
pub mod retrieval;
pub mod serialize;
pub mod textnorm;

pub use dataset::{ClaimRecord, ClaimType, DatasetError, Split};
pub use kg::{KgError, KnowledgeGraph, Triple};
pub use metrics::{Confusion, MetricsError, MetricsReport, Rates};
pub use prompt::{LlmAnswer, PromptBundle, PromptError, PromptTemplate};
pub use retrieval::{FallbackPolicy, RetrievalError, RetrievalStrategy, Subgraph, SubgraphStats};
pub use serialize::{SerializeError, SerializedExample};
pub use textnorm::TokenStemSet;

/// Embedding table over single-precision components (the usual encoder
/// output precision).
pub type EmbeddingTable32 = embed::EmbeddingTable<f32>;
/// Embedding table over double-precision components.
pub type EmbeddingTable64 = embed::EmbeddingTable<f64>;
/// Relevance score as produced when scoring an [`EmbeddingTable32`].
pub type RelevanceScore32 = embed::RelevanceScore<f32>;
/// Relevance score as produced when scoring an [`EmbeddingTable64`].
pub type RelevanceScore64 = embed::RelevanceScore<f64>;
