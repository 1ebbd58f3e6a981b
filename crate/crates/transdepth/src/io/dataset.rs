//! Dataset directory scanning.
//!
//! Expected layout:
//!
//! ```text
//! root/camera.cfg
//! root/scene_*/frame_*/rgb.png
//!                      depth.png
//!                      mask_trans_*.png      (transparent instances)
//!                      mask_nontrans_*.png   (non-transparent instances)
//! ```
//!
//! Scanning is deterministic (lexicographic at every level) and collects
//! every layout problem before failing, so one pass reports all offending
//! frames instead of the first.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::camera::{read_camera_config, CameraConfig, CAMERA_CONFIG_FILE};
use crate::io::files::{load_depth, load_mask, load_rgb};
use crate::masking::MaskSet;
use crate::raster::{CameraIntrinsics, DepthMap, RgbImage};

/// One frame's file locations plus the dataset camera.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub scene_id: String,
    pub frame_id: String,
    pub dir: PathBuf,
    pub rgb_path: PathBuf,
    pub depth_path: PathBuf,
    pub trans_mask_paths: Vec<PathBuf>,
    pub non_trans_mask_paths: Vec<PathBuf>,
    pub intrinsics: CameraIntrinsics,
}

impl FrameRecord {
    /// `scene/frame`, the stable key used in manifests and reports.
    pub fn label(&self) -> String {
        format!("{}/{}", self.scene_id, self.frame_id)
    }
}

/// Scan result: ordered frames plus non-fatal observations.
#[derive(Debug, Clone)]
pub struct DatasetScan {
    pub root: PathBuf,
    /// None only when the dataset has no frames at all.
    pub camera: Option<CameraConfig>,
    pub frames: Vec<FrameRecord>,
    pub warnings: Vec<String>,
}

fn sorted_entries(dir: &Path) -> Result<Vec<(String, PathBuf, bool)>> {
    let mut out = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let is_dir = entry
            .file_type()
            .map_err(|e| Error::io(entry.path(), e))?
            .is_dir();
        out.push((name, entry.path(), is_dir));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Walks the layout above. Frames come back sorted by scene then frame id.
/// Structural problems (missing rgb/depth, missing camera.cfg when frames
/// exist) are all collected into one validation error; harmless oddities
/// (unrecognized entries, frames without transparent instances) become
/// warnings.
pub fn scan_dataset(root: &Path) -> Result<DatasetScan> {
    let mut warnings = Vec::new();
    let mut issues = Vec::new();
    let mut frames = Vec::new();

    let camera_path = root.join(CAMERA_CONFIG_FILE);
    let camera = if camera_path.is_file() {
        Some(read_camera_config(&camera_path)?)
    } else {
        None
    };

    for (scene_name, scene_path, is_dir) in sorted_entries(root)? {
        if !is_dir {
            if scene_name != CAMERA_CONFIG_FILE {
                warnings.push(format!("ignored file {}", scene_path.display()));
            }
            continue;
        }
        if !scene_name.starts_with("scene_") {
            warnings.push(format!("ignored directory {}", scene_path.display()));
            continue;
        }
        for (frame_name, frame_path, is_dir) in sorted_entries(&scene_path)? {
            if !is_dir || !frame_name.starts_with("frame_") {
                warnings.push(format!("ignored entry {}", frame_path.display()));
                continue;
            }
            let mut rgb_path = None;
            let mut depth_path = None;
            let mut trans = Vec::new();
            let mut non_trans = Vec::new();
            for (file_name, file_path, is_dir) in sorted_entries(&frame_path)? {
                if is_dir {
                    warnings.push(format!("ignored directory {}", file_path.display()));
                    continue;
                }
                let is_png = file_name.ends_with(".png");
                match file_name.as_str() {
                    "rgb.png" => rgb_path = Some(file_path),
                    "depth.png" => depth_path = Some(file_path),
                    _ if is_png && file_name.starts_with("mask_trans_") => {
                        trans.push(file_path)
                    }
                    _ if is_png && file_name.starts_with("mask_nontrans_") => {
                        non_trans.push(file_path)
                    }
                    _ => warnings.push(format!("ignored file {}", file_path.display())),
                }
            }
            let label = format!("{scene_name}/{frame_name}");
            let (rgb_path, depth_path) = match (rgb_path, depth_path) {
                (Some(r), Some(d)) => (r, d),
                (r, d) => {
                    if r.is_none() {
                        issues.push(format!("{label}: missing rgb.png"));
                    }
                    if d.is_none() {
                        issues.push(format!("{label}: missing depth.png"));
                    }
                    continue;
                }
            };
            if trans.is_empty() && non_trans.is_empty() {
                warnings.push(format!("{label}: no instance masks"));
            }
            frames.push((scene_name.clone(), frame_name, frame_path, rgb_path, depth_path, trans, non_trans));
        }
    }

    let camera = match camera {
        Some(c) => Some(c),
        None if frames.is_empty() && issues.is_empty() => {
            warnings.push(format!("no {CAMERA_CONFIG_FILE} at {}", root.display()));
            None
        }
        None => {
            issues.push(format!(
                "missing {CAMERA_CONFIG_FILE} at {}",
                root.display()
            ));
            None
        }
    };

    if !issues.is_empty() {
        return Err(Error::DatasetLayout { issues });
    }
    if frames.is_empty() {
        warnings.push(format!("no frames found under {}", root.display()));
    }

    let intrinsics = camera.map(|c| c.intrinsics);
    let frames = frames
        .into_iter()
        .map(
            |(scene_id, frame_id, dir, rgb_path, depth_path, trans_mask_paths, non_trans_mask_paths)| {
                FrameRecord {
                    scene_id,
                    frame_id,
                    dir,
                    rgb_path,
                    depth_path,
                    trans_mask_paths,
                    non_trans_mask_paths,
                    // Guarded above: frames exist only alongside a camera.
                    intrinsics: intrinsics.expect("camera checked when frames exist"),
                }
            },
        )
        .collect();

    Ok(DatasetScan {
        root: root.to_path_buf(),
        camera,
        frames,
        warnings,
    })
}

/// Loads one frame's rasters and checks that they all share the RGB
/// image's dimensions.
pub fn load_frame(
    record: &FrameRecord,
    depth_scale: f64,
) -> Result<(RgbImage, DepthMap, MaskSet)> {
    let rgb = load_rgb(&record.rgb_path)?;
    let (w, h) = rgb.dims();
    let depth = load_depth(&record.depth_path, depth_scale)?;
    if depth.dims() != (w, h) {
        return Err(Error::format(
            &record.depth_path,
            format!(
                "depth is {}x{} but rgb is {w}x{h}",
                depth.width(),
                depth.height()
            ),
        ));
    }
    let load_class = |paths: &[PathBuf]| -> Result<Vec<_>> {
        paths
            .iter()
            .map(|p| {
                let m = load_mask(p)?;
                if m.dims() != (w, h) {
                    return Err(Error::format(
                        p,
                        format!("mask is {}x{} but rgb is {w}x{h}", m.width(), m.height()),
                    ));
                }
                Ok(m)
            })
            .collect()
    };
    let trans = load_class(&record.trans_mask_paths)?;
    let non_trans = load_class(&record.non_trans_mask_paths)?;
    Ok((rgb, depth, MaskSet::new(w, h, trans, non_trans)?))
}
