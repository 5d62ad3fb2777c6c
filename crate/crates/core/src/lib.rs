//! Crossing-intent prediction from sliding windows of 2D pose landmarks.
//!
//! The crate covers the whole pipeline: landmark CSV ingestion and windowing
//! ([`dataset`]), a small dense numeric kernel ([`numeric`]), stacked LSTM /
//! GRU and 1D CNN classifiers with hand-written backward passes
//! ([`models`]), training with best-AUC checkpointing ([`training`]),
//! streaming inference and latency measurement ([`inference`]), and a
//! synthetic pedestrian generator for closed-loop testing ([`synthgen`]).

pub mod dataset;
pub mod error;
pub mod inference;
pub mod models;
pub mod numeric;
pub mod synthgen;
pub mod training;

pub use dataset::{LabeledVideo, LandmarkFrame, Split, SplitSpec, Window};
pub use error::{Error, Result};
pub use models::{Model, ModelConfig, ModelKind};
pub use numeric::{Matrix, Scalar};
