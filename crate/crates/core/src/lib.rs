//! Vector order-statistics filtering for color images.
//!
//! Color pixels are treated as vectors in RGB space and ranked jointly
//! across channels, which preserves the correlation between channels that
//! channel-by-channel scalar filters destroy. The crate provides:
//!
//! - [`filters`]: directional, adaptive-kernel, and entropy-switching
//!   vector filters, each in an exact variant and a fast variant whose
//!   scalar kernels (arccosine, decaying exponential, entropy weight) are
//!   replaced by low-degree minimax approximations;
//! - [`minimax`]: a Remez exchange fitter that produces those
//!   approximations with certified worst-case error, plus a text format
//!   for persisting coefficient tables;
//! - [`fastmath`]: the built-in certified coefficient set and the
//!   branch-free kernel evaluators the fast filter variants use;
//! - [`noise`]: seeded, reproducible impulsive and mixed Gaussian noise
//!   for benchmarking restoration quality;
//! - [`metrics`]: MAE, MSE, and CIELAB normalized color difference;
//! - [`imagecore`]: a small RGB image container with PPM input/output and
//!   parallel sliding-window traversal.

pub mod fastmath;
pub mod filters;
pub mod imagecore;
pub mod metrics;
pub mod minimax;
pub mod noise;

pub use fastmath::KernelTable;
pub use filters::{run_filter, FilterFamily, FilterSpec, KernelMode};
pub use imagecore::RgbImage;
pub use metrics::QualityReport;
pub use noise::{corrupt, NoiseModel, NoiseSpec};
