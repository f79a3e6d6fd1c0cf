//! Perceptual grouping with connectivity kernels on the roto-translation
//! group SE(2).
//!
//! The pipeline lifts an image (or a synthetic stimulus) to oriented
//! elements, estimates a connectivity kernel by Monte Carlo sampling of
//! stochastic paths, builds an affinity matrix over the elements and reads
//! perceptual units off its leading eigenvectors. A mean-field module
//! simulates the activity equation that motivates the construction.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod image;
pub mod kernel;
pub mod lifting;
pub mod mean_field;
pub mod se2;
pub mod spectral;

pub use error::{Error, Result};
pub use image::{GrayImage, RgbImage};
pub use kernel::{
    estimate_kernel, eval_omega, FpParams, GridSpec, KernelConfig, KernelEstimate, KernelGrid, NoiseScaling,
    Normalization,
};
pub use lifting::{
    generate_fhh_stimulus, lift_image, FilterBank, GaborParams, LiftOptions, StimulusConfig, StimulusSet,
};
pub use mean_field::{ForcingForm, MeanFieldParams, Trajectory};
pub use se2::{AngleMode, CorticalPoint};
pub use spectral::{build_affinity, extract_units, AffinityMatrix, DiagonalPolicy, ExtractionOptions, PerceptualUnit};
