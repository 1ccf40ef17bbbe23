//! Budgeted selection of diverse, representative sequences from a pool of
//! frame embeddings, and IoU / Tversky losses for bounding boxes.
//!
//! The selection ladder is:
//!
//! * `Random`: seeded uniform draw without replacement;
//! * `Sal`: farthest-point sampling on first-frame embeddings;
//! * `Mal`: farthest-point sampling on multi-frame fused embeddings;
//! * `Kmal`: `Mal` plus nearest-neighbor validation, which rejects
//!   candidates whose nearest neighbor is already selected or whose
//!   nearest-neighbor distance exceeds the pool average.

pub mod boxloss;
pub mod distance;
mod error;
pub mod fusion;
pub mod io;
pub mod rng;
pub mod selection;
pub mod synthbench;
pub mod types;

#[cfg(feature = "cli")]
pub mod cli;

pub use boxloss::{
    combine_total_loss, decompose, iou_loss, tversky, tversky_loss, BoxDecomposition, LossValue,
};
pub use distance::{cosine_distance, distance_matrix, nn_stats, DistanceMatrix, NNStats};
pub use error::{Error, Result};
pub use fusion::{first_frame_reps, multi_frame_reps, RepresentativeMode, RepresentativeSet};
pub use rng::SeededRng;
pub use selection::{run_selection, select_fps, select_kmal, select_random};
pub use types::{
    validate_pool, AuditRecord, BBox, EmbeddingSet, LossParams, Metric, RejectionReason,
    SelectionConfig, SelectionResult, SequenceEmbedding, Strategy,
};
