//! Multi-moment benchmark construction from caption-level annotations.
//!
//! The pipeline is: per-video similarity graph over rewritten queries,
//! connected components into moment groups, representative text per group,
//! one query instance per group, then optional windowing and the
//! single/multi partition used for decoupled evaluation.

mod graph;
mod instances;
mod partition;
mod stats;

pub use graph::{
    attach_representatives, build_similarity_graph, connected_components, cosine_similarity,
    group_by_video, MomentGroup, RepresentativeTexts, SimilarityGraph,
};
pub use instances::{groups_to_instances, window_dataset};
pub use partition::{partition_single_multi, Partition, SplitLabel};
pub use stats::{dataset_stats, SimilarityDiagnostics, StatsTable, STATS_COLUMNS};

use thiserror::Error;

use crate::domain::{DomainError, TemporalSegment};

pub const DEFAULT_GROUP_THRESHOLD: f64 = 0.85;
pub const DEFAULT_WINDOW_FRAMES: u32 = 500;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("caption {0:?} has no embedding")]
    MissingEmbedding(String),
    #[error("caption {0:?} has a zero-norm embedding")]
    ZeroNorm(String),
    #[error("caption {id:?} has embedding dimension {found}, expected {expected}")]
    Dimension { id: String, expected: usize, found: usize },
    #[error("similarity graph mixes videos {0:?} and {1:?}")]
    MixedVideos(String, String),
    #[error("no representative text for multi-member groups: {}", .0.join(", "))]
    MissingRepresentative(Vec<String>),
    #[error("unknown caption {0:?}")]
    UnknownCaption(String),
    #[error("duplicate caption id {0:?}")]
    DuplicateCaption(String),
    #[error("moment {moment:?} of query {query:?} has no resolvable source caption")]
    UnresolvedProvenance { query: String, moment: String },
    #[error("caption {0:?} is the source of more than one moment")]
    ReusedProvenance(String),
    #[error("window must span a positive number of frames at a positive fps")]
    InvalidWindow,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A caption-level annotation together with its upstream rewrite.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptionRecord {
    pub caption_id: String,
    pub video_id: String,
    pub caption_text: String,
    /// Under-specified rewrite of `caption_text` used as a search query.
    pub rewritten_text: String,
    pub segment: TemporalSegment,
    /// Precomputed sentence embedding of `rewritten_text`.
    pub embedding: Option<Vec<f32>>,
    /// Video length in seconds, when the source annotation provides it.
    pub video_duration: Option<f64>,
}
