//! Subject-envelope multitype sample reconstruction.
//!
//! Each subject contributes a block of raw feature vectors. Three operators
//! rebuild that block into derived samples:
//!
//! - [`envelope`] (type A): six per-feature summary rows of the whole block.
//! - [`clustering`] (type B): k-means the block, then summarize each cluster.
//! - [`convolution`] (type C): each cluster's rows convolved with its summary.
//!
//! A base classifier is trained per derived dataset and the three verdicts are
//! fused with convex weights found by grid search ([`fusion`]). [`pipeline`]
//! runs the whole thing under leave-one-subject-out cross-validation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod classifier;
pub mod clustering;
pub mod convolution;
pub mod envelope;
pub mod error;
pub mod fusion;
pub mod loso;
pub mod metrics;
pub mod normalize;
pub mod pipeline;
pub mod seed;
pub mod segment;

pub use error::{Error, Result};
pub use segment::{group_samples, Label, RawSample, SubjectSegment, TransformedDataset};
