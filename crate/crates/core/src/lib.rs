//! Label-space augmentation of SAR oil-spill segmentation masks.
//!
//! The crate covers four areas:
//!
//! * [`labelmap`] and [`mask_io`]: label grids, connected regions, PNG masks.
//! * [`geometry`]: contour tracing, Savitzky–Golay smoothing, curvature and
//!   apex detection, exact distance transforms, fan rasterization.
//! * [`engine`]: the region perturbation pipeline (placement, bulges,
//!   apex edits) and batch generation under the edit regimes.
//! * [`metrics`] and [`patches`]: IoU, class-balanced and focal-Tversky
//!   losses, and scene-to-patch preparation.
//!
//! Every stochastic operation takes an explicit seed; identical inputs give
//! identical outputs.

pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod labelmap;
pub mod mask_io;
pub mod metrics;
pub mod patches;
pub mod rng;

pub use config::MorpConfig;
pub use engine::{morp_augment, AugmentedMask, EditRecord, Regime};
pub use labelmap::{ClassId, Connectivity, LabelMap, Region};
pub use mask_io::{decode_mask, encode_mask, MaskFormat};
