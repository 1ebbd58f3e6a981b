//! Per-dataset camera configuration file.
//!
//! `camera.cfg` lives at the dataset root as `key=value` lines: `fx`,
//! `fy`, `cx`, `cy` in pixels, and optionally `depth_scale` in on-disk
//! units per meter (default 1000). `#` starts a comment.

use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::CameraIntrinsics;

/// File name expected at the dataset root.
pub const CAMERA_CONFIG_FILE: &str = "camera.cfg";

/// Default on-disk depth units per meter (millimeters).
pub const DEFAULT_DEPTH_SCALE: f64 = 1000.0;

/// Camera intrinsics plus the dataset's depth quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraConfig {
    pub intrinsics: CameraIntrinsics,
    /// On-disk depth units per meter.
    pub depth_scale: f64,
}

impl CameraConfig {
    pub fn new(intrinsics: CameraIntrinsics, depth_scale: f64) -> Result<Self> {
        if !depth_scale.is_finite() || depth_scale <= 0.0 {
            return Err(Error::Config(format!(
                "depth_scale must be positive and finite, got {depth_scale}"
            )));
        }
        Ok(Self {
            intrinsics,
            depth_scale,
        })
    }
}

pub fn read_camera_config(path: &Path) -> Result<CameraConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_camera_config(&text).map_err(|e| match e {
        Error::Config(reason) => Error::format(path, reason),
        other => other,
    })
}

pub fn write_camera_config(path: &Path, cfg: &CameraConfig) -> Result<()> {
    let k = cfg.intrinsics;
    let text = format!(
        "fx={}\nfy={}\ncx={}\ncy={}\ndepth_scale={}\n",
        k.fx, k.fy, k.cx, k.cy, cfg.depth_scale
    );
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_camera_config(text: &str) -> Result<CameraConfig> {
    let mut fx = None;
    let mut fy = None;
    let mut cx = None;
    let mut cy = None;
    let mut depth_scale = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!("line {}: bad number {:?}", lineno + 1, value.trim()))
        })?;
        let slot = match key.trim() {
            "fx" => &mut fx,
            "fy" => &mut fy,
            "cx" => &mut cx,
            "cy" => &mut cy,
            "depth_scale" => &mut depth_scale,
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key {other:?}",
                    lineno + 1
                )))
            }
        };
        if slot.replace(value).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key {:?}",
                lineno + 1,
                key.trim()
            )));
        }
    }
    match (fx, fy, cx, cy) {
        (Some(fx), Some(fy), Some(cx), Some(cy)) => CameraConfig::new(
            CameraIntrinsics::new(fx, fy, cx, cy)?,
            depth_scale.unwrap_or(DEFAULT_DEPTH_SCALE),
        ),
        _ => Err(Error::Config(
            "missing one of the required keys fx, fy, cx, cy".to_string(),
        )),
    }
}
