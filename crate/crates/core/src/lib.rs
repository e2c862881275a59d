//! Temporal action parsing engine.
//!
//! Parses a sequence of per-frame feature vectors into labeled, contiguous,
//! non-overlapping action segments. The optimal segmentation maximizes the
//! sum of per-segment classification confidences via dynamic programming;
//! each candidate segment is scored by a two-layer max-margin classifier
//! whose second layer consumes max-pooled temporal context scores computed
//! from the rest of the sequence.

pub mod baselines;
pub mod cli_io;
pub mod context_features;
pub mod core_types;
pub mod datagen;
pub mod dp_parser;
pub mod evaluation;
pub mod linear_model;

mod error;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete aliases for the common double-precision instantiation.
pub type FrameSequence64 = core_types::FrameSequence<f64>;
pub type Parse64 = core_types::Parse<f64>;
pub type ParserConfig64 = core_types::ParserConfig<f64>;
pub type LinearModel64 = linear_model::LinearModel<f64>;
pub type TrainConfig64 = linear_model::TrainConfig<f64>;
pub type ContextCache64 = context_features::ContextCache<f64>;
pub type GenSpec64 = datagen::GenSpec<f64>;
pub type TrainingCorpus64 = cli_io::TrainingCorpus<f64>;
