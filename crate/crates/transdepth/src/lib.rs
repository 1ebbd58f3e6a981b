//! Self-supervised training-pair synthesis and evaluation for
//! transparent-object depth completion.
//!
//! Depth sensors fail on transparent material, leaving holes in otherwise
//! dense depth maps. Training a completer to fix those holes needs ground
//! truth that usually does not exist, so this crate fabricates it: it
//! takes RGB-D frames with per-instance segmentation masks, erodes the
//! non-transparent instance masks, and zeroes depth underneath them. The
//! network input then has artificial deficits at places where the true
//! depth is still known, giving free supervision. The rest of the crate
//! supports that loop end to end:
//!
//! - [`masking`]: erosion-based keep-mask composition and pair synthesis
//! - [`morphology`]: binary erosion with a rectangular element
//! - [`geometry`]: back-projection and surface normals from depth
//! - [`losses`]: region-masked depth + normal loss oracle
//! - [`metrics`]: RMSE / REL / MAE / threshold percentages, error maps
//! - [`baseline`]: harmonic-inpainting depth completer
//! - [`io`]: dataset scanning, PNG rasters, augmentation, pair bundles
//! - [`pipeline`]: deterministic batch synthesis and evaluation
//!
//! Heavy loops are data-parallel through rayon when the `rayon` feature
//! (on by default) is enabled, and plain sequential loops otherwise.
//! Results are bit-identical across both builds and any thread count.

pub mod baseline;
pub mod error;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod masking;
pub mod metrics;
pub mod morphology;
pub mod par;
pub mod pipeline;
pub mod raster;

pub use error::{Error, ErrorClass, Result};
pub use raster::{
    BinaryMask, CameraIntrinsics, DepthMap, MaskingConfig, NormalMap, RgbImage, TrainingPair,
};

pub use baseline::{complete_depth, nearest_valid_fill, CompletionOptions, CompletionResult};
pub use geometry::{backproject, normal_cosine_map, normals_from_depth, PointMap, ScalarMap};
pub use losses::{
    region_loss, region_loss_with_normals, self_supervised_loss, supervised_loss, LossBreakdown,
    LossOptions, RegionLoss,
};
pub use masking::{compose_final_mask, synthesize_pair, union, MaskComposition, MaskSet};
pub use metrics::{error_map, evaluate, MetricsAccumulator, MetricsReport};
pub use morphology::erode;
pub use par::with_jobs;
