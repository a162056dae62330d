//! Core engine for object-embedding spliced-image retrieval.
//!
//! An image is represented by a small set of object-level embeddings pooled
//! from a convolutional feature map. A spliced query is matched against a
//! database of authentic images by the minimum pairwise embedding distance,
//! and the spliced region is localized by aligning the query to the retrieved
//! original and thresholding the feature residual.
//!
//! Everything in this crate is deterministic given its seeds and runs without
//! pretrained models: a procedural synthetic world supplies scenes, splices
//! with exact ground truth, a fixed filter-bank feature extractor, and a
//! detection oracle. The crate is `no_std` + `alloc`; file formats and the
//! CLI live in the companion `oesir` crate.
//!
//! Module map:
//! - [`tensor`] — feature maps, ROIAlign, pooling descriptors, PCA whitening, HoG
//! - [`synth`] — procedural scenes, splice generation, filter-bank features, detection oracle
//! - [`distill`] — student networks with multi-scale guidance, exact gradients, Adam
//! - [`index`] — per-image embedding sets, exact and product-quantized search
//! - [`localize`] — box-pair transforms, warped residuals, mask scoring
//! - [`metrics`] — recall@K and mean average precision
//! - [`pipeline`] — embedding extraction methods shared by the benchmark and CLI
//! - [`bench`] — seeded end-to-end benchmark producing deterministic reports

#![cfg_attr(not(test), no_std)]

extern crate alloc;

use alloc::string::String;

pub mod rng;
pub mod tensor;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A descriptor or projection came out with (near-)zero L2 norm.
    #[error("zero-norm descriptor")]
    ZeroNormDescriptor,
    /// A bounding box has no area, lies outside the image, or collapsed after clamping.
    #[error("degenerate box: {0}")]
    DegenerateBox(&'static str),
    /// Vector/matrix dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    /// Grid shapes disagree.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    /// NaN or infinity where a finite value is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// A parameter violates its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    /// Ran out of placement retries while generating a scene.
    #[error("unplaceable object {index} after {retries} retries")]
    UnplaceableObject { index: usize, retries: usize },
    /// Training diverged.
    #[error("non-finite loss at iteration {iteration}")]
    Diverged { iteration: usize },
    /// Index/codebook misuse.
    #[error("index error: {0}")]
    Index(&'static str),
    /// Retrieval returned nothing to localize against.
    #[error("empty retrieval result")]
    EmptyRetrieval,
    /// Malformed serialized payload (bad magic, truncation, bad dims).
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = core::result::Result<T, Error>;
