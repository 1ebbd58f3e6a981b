//! Dataset and training-pair persistence.

pub mod augment;
pub mod camera;
pub mod dataset;
pub mod files;
pub mod pair;

pub use augment::{
    apply_augment, sample_augment, transform_intrinsics, AugmentSpec, Rotation,
    DEFAULT_NOISE_SIGMA,
};
pub use camera::{
    read_camera_config, write_camera_config, CameraConfig, CAMERA_CONFIG_FILE,
    DEFAULT_DEPTH_SCALE,
};
pub use dataset::{load_frame, scan_dataset, DatasetScan, FrameRecord};
pub use files::{load_depth, load_mask, load_rgb, save_depth, save_mask, save_rgb};
pub use pair::{read_pair, write_pair, PairMeta, PAIR_MANIFEST_FILE, PAIR_SCHEMA};
