//! Presentation attack detection for hand biometrics from paired
//! visible-light (RGB) and thermal (TH) images.
//!
//! The crate trains compact convolutional classifiers in two modes
//! (binary authenticity on subject-disjoint splits, and identity with an
//! extra fake class on closed-set splits), fuses per-modality softmax scores
//! by averaging, and reports APCER/BPCER, rank-1 accuracy and the
//! distribution statistics behind boxplots and score histograms.

pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod models;
pub mod nn;
pub mod pipeline;
pub mod protocol;
pub mod seeding;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
