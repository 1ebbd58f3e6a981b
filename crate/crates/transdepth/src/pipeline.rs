//! Batch workflows over whole datasets.
//!
//! Frames are independent, so synthesis parallelizes at frame granularity.
//! Outputs are deterministic regardless of worker count: every per-frame
//! artifact depends only on (frame, config, seed), per-frame augmentation
//! seeds come from per-frame RNG streams rather than a shared RNG, and the
//! manifest is assembled sequentially in frame order after all workers
//! finish.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::baseline::{complete_depth, CompletionOptions, CompletionResult};
use crate::error::{Error, ErrorClass, Result};
use crate::io::augment::{apply_augment, sample_augment, transform_intrinsics};
use crate::io::dataset::{load_frame, DatasetScan};
use crate::io::files::{load_depth, save_depth};
use crate::io::pair::{
    read_pair, write_pair, PairMeta, DEPTH_MASKED_FILE, DEPTH_TARGET_FILE, MASK_FINAL_FILE,
    MASK_TRANS_FILE, PAIR_MANIFEST_FILE, RGB_MASKED_FILE,
};
use crate::masking::synthesize_pair;
use crate::metrics::{MetricsAccumulator, MetricsReport};
use crate::par;
use crate::raster::{BinaryMask, MaskingConfig};

pub const DATASET_MANIFEST_FILE: &str = "dataset.manifest";
pub const DATASET_SCHEMA: &str = "transdepth.dataset/1";
/// Output of the baseline completer, written next to a pair's rasters.
pub const DEPTH_COMPLETED_FILE: &str = "depth_completed.png";

/// Controls for one batch synthesis run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesizeOptions {
    pub masking: MaskingConfig,
    /// Draw a random flip/rotation/noise per frame.
    pub augment: bool,
    /// Noise level used when `augment` is set.
    pub noise_sigma: f64,
    /// Seed for all per-frame augmentation draws.
    pub seed: u64,
    /// Worker threads; 0 uses the global default.
    pub jobs: usize,
}

impl Default for SynthesizeOptions {
    fn default() -> Self {
        Self {
            masking: MaskingConfig::default(),
            augment: false,
            noise_sigma: crate::io::augment::DEFAULT_NOISE_SIGMA,
            seed: 0,
            jobs: 0,
        }
    }
}

/// One frame that could not be synthesized, with enough context for an
/// error table.
#[derive(Debug, Clone)]
pub struct FrameFailure {
    pub label: String,
    pub message: String,
    pub class: ErrorClass,
}

/// What a synthesis run produced.
#[derive(Debug, Clone)]
pub struct SynthesisSummary {
    pub pairs_written: usize,
    pub failures: Vec<FrameFailure>,
    pub manifest_path: PathBuf,
}

/// SHA-256 over a pair directory's files (fixed name order, each name
/// mixed in before its bytes), hex-encoded.
pub fn hash_pair_dir(dir: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    for name in [
        RGB_MASKED_FILE,
        DEPTH_MASKED_FILE,
        DEPTH_TARGET_FILE,
        MASK_TRANS_FILE,
        MASK_FINAL_FILE,
        PAIR_MANIFEST_FILE,
    ] {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        hasher.update(name.as_bytes());
        hasher.update([0u8]);
        hasher.update(&bytes);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Synthesizes one pair directory per frame under `out_root` (mirroring
/// the scene/frame hierarchy) plus a top-level manifest.
///
/// Individual frame failures do not abort the run; they are collected in
/// the summary while every healthy frame is still written. The manifest
/// lists only written pairs, in frame order, with content hashes.
pub fn synthesize_dataset(
    scan: &DatasetScan,
    out_root: &Path,
    opts: &SynthesizeOptions,
) -> Result<SynthesisSummary> {
    opts.masking.validate()?;
    if !opts.noise_sigma.is_finite() || opts.noise_sigma < 0.0 {
        return Err(Error::Config(format!(
            "noise_sigma must be finite and >= 0, got {}",
            opts.noise_sigma
        )));
    }
    std::fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;

    let outcomes: Vec<std::result::Result<(String, String), FrameFailure>> =
        par::with_jobs(opts.jobs, || {
            par::indexed_map(scan.frames.len(), |i| {
                synthesize_frame(scan, out_root, opts, i).map_err(|e| FrameFailure {
                    label: scan.frames[i].label(),
                    message: e.to_string(),
                    class: e.class(),
                })
            })
        })?;

    let mut pair_lines = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok((label, hash)) => pair_lines.push(format!("pair={label} sha256={hash}")),
            Err(f) => failures.push(f),
        }
    }

    let mut manifest = format!("schema={DATASET_SCHEMA}\n");
    if let Some(camera) = &scan.camera {
        let k = camera.intrinsics;
        manifest.push_str(&format!(
            "depth_scale={}\nfx={}\nfy={}\ncx={}\ncy={}\n",
            camera.depth_scale, k.fx, k.fy, k.cx, k.cy
        ));
    }
    manifest.push_str(&format!(
        "erosion_enabled={}\nerosion_element={}x{}\nerosion_iterations={}\nerode_union={}\n",
        opts.masking.erosion_enabled,
        opts.masking.erosion_element.0,
        opts.masking.erosion_element.1,
        opts.masking.erosion_iterations,
        opts.masking.erode_union,
    ));
    manifest.push_str(&format!("augment={}\n", opts.augment));
    if opts.augment {
        manifest.push_str(&format!("noise_sigma={}\nseed={}\n", opts.noise_sigma, opts.seed));
    }
    manifest.push_str(&format!("pairs={}\n", pair_lines.len()));
    for line in &pair_lines {
        manifest.push_str(line);
        manifest.push('\n');
    }

    let manifest_path = out_root.join(DATASET_MANIFEST_FILE);
    std::fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;

    Ok(SynthesisSummary {
        pairs_written: pair_lines.len(),
        failures,
        manifest_path,
    })
}

fn synthesize_frame(
    scan: &DatasetScan,
    out_root: &Path,
    opts: &SynthesizeOptions,
    index: usize,
) -> Result<(String, String)> {
    let record = &scan.frames[index];
    let camera = scan
        .camera
        .as_ref()
        .ok_or_else(|| Error::Internal("frames present without camera config".to_string()))?;

    let (rgb, depth, masks) = load_frame(record, camera.depth_scale)?;
    let mut pair = synthesize_pair(&rgb, &depth, &masks, &opts.masking)?;
    let mut intrinsics = record.intrinsics;
    let mut augment = None;
    if opts.augment {
        let spec = sample_augment(opts.seed, index as u64, opts.noise_sigma);
        intrinsics = transform_intrinsics(&intrinsics, pair.masked_depth.dims(), &spec);
        pair = apply_augment(&pair, &spec)?;
        augment = Some(spec);
    }

    let meta = PairMeta {
        scene_id: record.scene_id.clone(),
        frame_id: record.frame_id.clone(),
        depth_scale: camera.depth_scale,
        intrinsics,
        masking: opts.masking,
        augment,
    };
    let scene_dir = out_root.join(&record.scene_id);
    std::fs::create_dir_all(&scene_dir).map_err(|e| Error::io(&scene_dir, e))?;
    let out_dir = scene_dir.join(&record.frame_id);
    write_pair(&pair, &meta, &out_dir)?;
    Ok((record.label(), hash_pair_dir(&out_dir)?))
}

/// Aggregate and per-frame metrics over three directories of equally
/// named PNGs.
#[derive(Debug, Clone)]
pub struct DirEvaluation {
    /// Pixel-weighted metrics over all frames' evaluated pixels pooled.
    pub aggregate: MetricsReport,
    /// Per frame stem; None when that frame's evaluated set is empty.
    pub per_frame: Vec<(String, Option<MetricsReport>)>,
}

/// Evaluates predicted depth against ground truth over transparent masks,
/// matching files across the three directories by file name. Every name
/// in `pred_dir` must exist in the other two; all mismatches are reported
/// at once.
pub fn evaluate_dirs(
    pred_dir: &Path,
    gt_dir: &Path,
    mask_dir: &Path,
    depth_scale: f64,
) -> Result<DirEvaluation> {
    let mut names = Vec::new();
    let entries = std::fs::read_dir(pred_dir).map_err(|e| Error::io(pred_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(pred_dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".png") {
            names.push(name);
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(Error::DatasetLayout {
            issues: vec![format!("no .png files in {}", pred_dir.display())],
        });
    }
    let missing: Vec<String> = names
        .iter()
        .flat_map(|n| {
            [(gt_dir, n), (mask_dir, n)]
                .into_iter()
                .filter(|(dir, n)| !dir.join(n).is_file())
                .map(|(dir, n)| format!("missing {}", dir.join(n).display()))
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::DatasetLayout { issues: missing });
    }

    let mut total = MetricsAccumulator::new();
    let mut per_frame = Vec::new();
    for name in names {
        let pred = load_depth(&pred_dir.join(&name), depth_scale)?;
        let gt = load_depth(&gt_dir.join(&name), depth_scale)?;
        let mask = crate::io::files::load_mask(&mask_dir.join(&name))?;
        let mut frame = MetricsAccumulator::new();
        frame.add_frame(&pred, &gt, &mask)?;
        let report = if frame.n_pixels() > 0 {
            Some(frame.finalize()?)
        } else {
            None
        };
        let stem = name.strip_suffix(".png").unwrap_or(&name).to_string();
        per_frame.push((stem, report));
        total.merge(&frame);
    }
    Ok(DirEvaluation {
        aggregate: total.finalize()?,
        per_frame,
    })
}

/// Runs the baseline completer over a pair directory: every invalid pixel
/// of the masked input depth is filled. Writes the completed depth beside
/// the pair (or to `out_path`) and returns where it went plus convergence
/// diagnostics.
pub fn complete_pair_dir(
    pair_dir: &Path,
    out_path: Option<&Path>,
    opts: &CompletionOptions,
) -> Result<(PathBuf, CompletionResult)> {
    let (pair, meta) = read_pair(pair_dir)?;
    let (w, h) = pair.masked_depth.dims();
    let holes: Vec<u8> = pair
        .masked_depth
        .as_slice()
        .iter()
        .map(|d| (*d == 0.0) as u8)
        .collect();
    let fill = BinaryMask::from_vec(w, h, holes)?;
    let result = complete_depth(&pair.masked_depth, &fill, opts)?;
    let out = match out_path {
        Some(p) => p.to_path_buf(),
        None => pair_dir.join(DEPTH_COMPLETED_FILE),
    };
    save_depth(&out, &result.depth, meta.depth_scale)?;
    Ok((out, result))
}
