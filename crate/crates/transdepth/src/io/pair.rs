//! Training-pair directories.
//!
//! A pair directory holds five rasters plus a manifest:
//!
//! ```text
//! rgb_masked.png     8-bit RGB, transparent pixels blacked out
//! depth_masked.png   16-bit, keep-mask applied (the network input)
//! depth_target.png   16-bit, transparent regions zeroed (the supervision)
//! mask_trans.png     8-bit 0/255, union of transparent instances
//! mask_final.png     8-bit 0/255, keep-mask
//! pair.manifest      key=value lines: schema, provenance, config echo
//! ```
//!
//! Writes land in a sibling `<name>.partial` directory that is renamed
//! into place only after every file is on disk, so a crash never leaves a
//! half-written pair under the final name.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::augment::{AugmentSpec, Rotation};
use crate::io::files::{
    load_depth, load_mask, load_rgb, save_depth, save_mask, save_rgb,
};
use crate::raster::{CameraIntrinsics, MaskingConfig, TrainingPair};

pub const PAIR_MANIFEST_FILE: &str = "pair.manifest";
pub const PAIR_SCHEMA: &str = "transdepth.pair/1";

pub const RGB_MASKED_FILE: &str = "rgb_masked.png";
pub const DEPTH_MASKED_FILE: &str = "depth_masked.png";
pub const DEPTH_TARGET_FILE: &str = "depth_target.png";
pub const MASK_TRANS_FILE: &str = "mask_trans.png";
pub const MASK_FINAL_FILE: &str = "mask_final.png";

/// Everything recorded about a pair besides its rasters: provenance and
/// the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMeta {
    pub scene_id: String,
    pub frame_id: String,
    /// On-disk depth units per meter.
    pub depth_scale: f64,
    /// Camera the frame was captured with; consumers need it for normals.
    pub intrinsics: CameraIntrinsics,
    pub masking: MaskingConfig,
    pub augment: Option<AugmentSpec>,
}

impl PairMeta {
    pub fn validate(&self) -> Result<()> {
        if !self.depth_scale.is_finite() || self.depth_scale <= 0.0 {
            return Err(Error::Config(format!(
                "depth_scale must be positive and finite, got {}",
                self.depth_scale
            )));
        }
        for id in [&self.scene_id, &self.frame_id] {
            if id.contains(['\n', '\r', '=']) {
                return Err(Error::Config(format!(
                    "scene/frame id contains forbidden characters: {id:?}"
                )));
            }
        }
        let k = self.intrinsics;
        CameraIntrinsics::new(k.fx, k.fy, k.cx, k.cy)?;
        self.masking.validate()?;
        if let Some(a) = &self.augment {
            a.validate()?;
        }
        Ok(())
    }
}

fn format_manifest(meta: &PairMeta, dims: (usize, usize)) -> String {
    let augment = match &meta.augment {
        None => "none".to_string(),
        Some(a) => format!(
            "hflip={},rotation={},noise_sigma={},seed={}",
            a.hflip,
            a.rotation.degrees(),
            a.noise_sigma,
            a.seed
        ),
    };
    format!(
        "schema={PAIR_SCHEMA}\n\
         scene={}\n\
         frame={}\n\
         width={}\n\
         height={}\n\
         depth_scale={}\n\
         fx={}\n\
         fy={}\n\
         cx={}\n\
         cy={}\n\
         erosion_enabled={}\n\
         erosion_element={}x{}\n\
         erosion_iterations={}\n\
         erode_union={}\n\
         augment={augment}\n",
        meta.scene_id,
        meta.frame_id,
        dims.0,
        dims.1,
        meta.depth_scale,
        meta.intrinsics.fx,
        meta.intrinsics.fy,
        meta.intrinsics.cx,
        meta.intrinsics.cy,
        meta.masking.erosion_enabled,
        meta.masking.erosion_element.0,
        meta.masking.erosion_element.1,
        meta.masking.erosion_iterations,
        meta.masking.erode_union,
    )
}

fn parse_augment(value: &str) -> std::result::Result<Option<AugmentSpec>, String> {
    if value == "none" {
        return Ok(None);
    }
    let mut spec = AugmentSpec::default();
    for part in value.split(',') {
        let (key, v) = part
            .split_once('=')
            .ok_or_else(|| format!("bad augment field {part:?}"))?;
        match key {
            "hflip" => spec.hflip = v.parse().map_err(|_| format!("bad hflip {v:?}"))?,
            "rotation" => {
                let deg: u32 = v.parse().map_err(|_| format!("bad rotation {v:?}"))?;
                spec.rotation = Rotation::from_degrees(deg).map_err(|e| e.to_string())?;
            }
            "noise_sigma" => {
                spec.noise_sigma = v.parse().map_err(|_| format!("bad noise_sigma {v:?}"))?
            }
            "seed" => spec.seed = v.parse().map_err(|_| format!("bad seed {v:?}"))?,
            other => return Err(format!("unknown augment field {other:?}")),
        }
    }
    Ok(Some(spec))
}

fn parse_manifest(text: &str) -> std::result::Result<(PairMeta, (usize, usize)), String> {
    let mut meta = PairMeta {
        scene_id: String::new(),
        frame_id: String::new(),
        depth_scale: 0.0,
        intrinsics: CameraIntrinsics {
            fx: 0.0,
            fy: 0.0,
            cx: 0.0,
            cy: 0.0,
        },
        masking: MaskingConfig::default(),
        augment: None,
    };
    let mut dims = (0usize, 0usize);
    let mut schema_seen = false;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
        let bad = |what: &str| format!("line {}: bad {what} {value:?}", lineno + 1);
        match key {
            "schema" => {
                if value != PAIR_SCHEMA {
                    return Err(format!("unsupported schema {value:?}"));
                }
                schema_seen = true;
            }
            "scene" => meta.scene_id = value.to_string(),
            "frame" => meta.frame_id = value.to_string(),
            "width" => dims.0 = value.parse().map_err(|_| bad("width"))?,
            "height" => dims.1 = value.parse().map_err(|_| bad("height"))?,
            "depth_scale" => {
                meta.depth_scale = value.parse().map_err(|_| bad("depth_scale"))?
            }
            "fx" => meta.intrinsics.fx = value.parse().map_err(|_| bad("fx"))?,
            "fy" => meta.intrinsics.fy = value.parse().map_err(|_| bad("fy"))?,
            "cx" => meta.intrinsics.cx = value.parse().map_err(|_| bad("cx"))?,
            "cy" => meta.intrinsics.cy = value.parse().map_err(|_| bad("cy"))?,
            "erosion_enabled" => {
                meta.masking.erosion_enabled = value.parse().map_err(|_| bad("flag"))?
            }
            "erosion_element" => {
                let (a, b) = value
                    .split_once('x')
                    .ok_or_else(|| bad("erosion_element"))?;
                meta.masking.erosion_element = (
                    a.parse().map_err(|_| bad("erosion_element"))?,
                    b.parse().map_err(|_| bad("erosion_element"))?,
                );
            }
            "erosion_iterations" => {
                meta.masking.erosion_iterations = value.parse().map_err(|_| bad("count"))?
            }
            "erode_union" => {
                meta.masking.erode_union = value.parse().map_err(|_| bad("flag"))?
            }
            "augment" => meta.augment = parse_augment(value)?,
            other => return Err(format!("unknown manifest key {other:?}")),
        }
    }
    if !schema_seen {
        return Err("missing schema line".to_string());
    }
    if dims.0 == 0 || dims.1 == 0 {
        return Err("missing or zero width/height".to_string());
    }
    if meta.depth_scale == 0.0 {
        return Err("missing depth_scale".to_string());
    }
    if meta.intrinsics.fx <= 0.0 || meta.intrinsics.fy <= 0.0 {
        return Err("missing or non-positive fx/fy".to_string());
    }
    Ok((meta, dims))
}

/// Writes the pair atomically: everything goes into `<out_dir>.partial`,
/// which replaces `out_dir` by rename once complete. An existing pair at
/// `out_dir` is replaced.
pub fn write_pair(pair: &TrainingPair, meta: &PairMeta, out_dir: &Path) -> Result<()> {
    pair.validate()?;
    meta.validate()?;

    let name = out_dir
        .file_name()
        .ok_or_else(|| Error::Config(format!("bad pair directory {}", out_dir.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(".partial");
    let tmp = out_dir.with_file_name(tmp_name);

    if tmp.exists() {
        std::fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;

    save_rgb(&tmp.join(RGB_MASKED_FILE), &pair.masked_rgb)?;
    save_depth(&tmp.join(DEPTH_MASKED_FILE), &pair.masked_depth, meta.depth_scale)?;
    save_depth(&tmp.join(DEPTH_TARGET_FILE), &pair.target_depth, meta.depth_scale)?;
    save_mask(&tmp.join(MASK_TRANS_FILE), &pair.trans_mask)?;
    save_mask(&tmp.join(MASK_FINAL_FILE), &pair.final_mask)?;
    let manifest = format_manifest(meta, pair.masked_depth.dims());
    std::fs::write(tmp.join(PAIR_MANIFEST_FILE), manifest)
        .map_err(|e| Error::io(tmp.join(PAIR_MANIFEST_FILE), e))?;

    if out_dir.exists() {
        std::fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    }
    std::fs::rename(&tmp, out_dir).map_err(|e| Error::io(out_dir, e))
}

/// Reads a pair directory back. The rasters must match the manifest's
/// dimensions and the reassembled pair must satisfy every TrainingPair
/// invariant; quantization cannot break them because equal depths quantize
/// equally.
pub fn read_pair(dir: &Path) -> Result<(TrainingPair, PairMeta)> {
    let manifest_path = dir.join(PAIR_MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::format(&manifest_path, "missing pair manifest"));
    }
    let text =
        std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let (meta, dims) =
        parse_manifest(&text).map_err(|reason| Error::format(&manifest_path, reason))?;
    meta.validate()?;

    let masked_rgb = load_rgb(&dir.join(RGB_MASKED_FILE))?;
    let masked_depth = load_depth(&dir.join(DEPTH_MASKED_FILE), meta.depth_scale)?;
    let target_depth = load_depth(&dir.join(DEPTH_TARGET_FILE), meta.depth_scale)?;
    let trans_mask = load_mask(&dir.join(MASK_TRANS_FILE))?;
    let final_mask = load_mask(&dir.join(MASK_FINAL_FILE))?;

    for (name, actual) in [
        (RGB_MASKED_FILE, masked_rgb.dims()),
        (DEPTH_MASKED_FILE, masked_depth.dims()),
        (DEPTH_TARGET_FILE, target_depth.dims()),
        (MASK_TRANS_FILE, trans_mask.dims()),
        (MASK_FINAL_FILE, final_mask.dims()),
    ] {
        if actual != dims {
            return Err(Error::format(
                dir.join(name),
                format!(
                    "raster is {}x{} but manifest says {}x{}",
                    actual.0, actual.1, dims.0, dims.1
                ),
            ));
        }
    }

    let pair = TrainingPair {
        masked_rgb,
        masked_depth,
        target_depth,
        trans_mask,
        final_mask,
    };
    pair.validate()?;
    Ok((pair, meta))
}
