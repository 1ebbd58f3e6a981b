//! Training-pair augmentation: flip, quarter-turn rotation, depth noise.
//!
//! The geometric transform is a pure pixel relabeling applied identically
//! to every raster of the pair, so the pair's consistency invariants
//! survive untouched. Rotations are restricted to multiples of 90 degrees
//! because arbitrary angles would resample depth across hole boundaries.
//!
//! Noise is Gaussian, applied only where the masked input depth is valid,
//! and mirrored into the supervision depth at those pixels (they hold the
//! same value by construction, and must keep holding it). A sample that
//! drives a depth to or below zero invalidates the pixel in both maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, CameraIntrinsics, DepthMap, RgbImage, TrainingPair};

/// Default noise standard deviation in meters. A toolkit default on the
/// order of consumer depth-sensor noise at arm's length, not a measured
/// value.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.005;

/// Quarter-turn rotation, applied clockwise after the optional flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rotation {
    #[default]
    Deg0,
    Deg90,
    Deg180,
    Deg270,
}

impl Rotation {
    pub fn from_degrees(degrees: u32) -> Result<Self> {
        match degrees {
            0 => Ok(Self::Deg0),
            90 => Ok(Self::Deg90),
            180 => Ok(Self::Deg180),
            270 => Ok(Self::Deg270),
            other => Err(Error::Config(format!(
                "rotation must be one of 0, 90, 180, 270 degrees, got {other}"
            ))),
        }
    }

    pub fn degrees(&self) -> u32 {
        match self {
            Self::Deg0 => 0,
            Self::Deg90 => 90,
            Self::Deg180 => 180,
            Self::Deg270 => 270,
        }
    }

    pub const ALL: [Rotation; 4] = [Self::Deg0, Self::Deg90, Self::Deg180, Self::Deg270];
}

/// One deterministic augmentation: horizontal flip first, then rotation,
/// then seeded depth noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentSpec {
    pub hflip: bool,
    pub rotation: Rotation,
    /// Gaussian noise standard deviation in meters; 0 disables noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self {
            hflip: false,
            rotation: Rotation::Deg0,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::Config(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    /// Whether this spec changes anything at all.
    pub fn is_identity(&self) -> bool {
        !self.hflip && self.rotation == Rotation::Deg0 && self.noise_sigma == 0.0
    }
}

/// Destination dimensions and, per destination pixel in row-major order,
/// the source pixel index.
fn transform_indices(
    w: usize,
    h: usize,
    hflip: bool,
    rotation: Rotation,
) -> (usize, usize, Vec<usize>) {
    let src = |x: usize, y: usize| -> usize {
        let x = if hflip { w - 1 - x } else { x };
        y * w + x
    };
    let (nw, nh) = match rotation {
        Rotation::Deg0 | Rotation::Deg180 => (w, h),
        Rotation::Deg90 | Rotation::Deg270 => (h, w),
    };
    let mut map = Vec::with_capacity(w * h);
    for y in 0..nh {
        for x in 0..nw {
            map.push(match rotation {
                Rotation::Deg0 => src(x, y),
                Rotation::Deg90 => src(y, h - 1 - x),
                Rotation::Deg180 => src(w - 1 - x, h - 1 - y),
                Rotation::Deg270 => src(w - 1 - y, x),
            });
        }
    }
    (nw, nh, map)
}

fn remap_depth(d: &DepthMap, nw: usize, nh: usize, map: &[usize]) -> DepthMap {
    let src = d.as_slice();
    DepthMap::from_vec_unchecked(nw, nh, map.iter().map(|i| src[*i]).collect())
}

fn remap_mask(m: &BinaryMask, nw: usize, nh: usize, map: &[usize]) -> BinaryMask {
    let src = m.as_slice();
    BinaryMask::from_vec_unchecked(nw, nh, map.iter().map(|i| src[*i]).collect())
}

fn remap_rgb(img: &RgbImage, nw: usize, nh: usize, map: &[usize]) -> Result<RgbImage> {
    let src = img.as_slice();
    let mut out = Vec::with_capacity(map.len() * 3);
    for i in map {
        out.extend_from_slice(&src[i * 3..i * 3 + 3]);
    }
    RgbImage::from_vec(nw, nh, out)
}

/// Applies `spec` to every raster of the pair. Same spec, same output,
/// bit for bit.
pub fn apply_augment(pair: &TrainingPair, spec: &AugmentSpec) -> Result<TrainingPair> {
    spec.validate()?;
    let (w, h) = pair.masked_depth.dims();
    let (nw, nh, map) = transform_indices(w, h, spec.hflip, spec.rotation);

    let mut masked_depth = remap_depth(&pair.masked_depth, nw, nh, &map);
    let mut target_depth = remap_depth(&pair.target_depth, nw, nh, &map);

    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::Config(format!("bad noise distribution: {e}")))?;
        let mut masked = masked_depth.as_slice().to_vec();
        let mut target = target_depth.as_slice().to_vec();
        for i in 0..masked.len() {
            if masked[i] > 0.0 {
                let noisy = masked[i] + normal.sample(&mut rng);
                let value = if noisy > 0.0 { noisy } else { 0.0 };
                masked[i] = value;
                target[i] = value;
            }
        }
        masked_depth = DepthMap::from_vec_unchecked(nw, nh, masked);
        target_depth = DepthMap::from_vec_unchecked(nw, nh, target);
    }

    let out = TrainingPair {
        masked_rgb: remap_rgb(&pair.masked_rgb, nw, nh, &map)?,
        masked_depth,
        target_depth,
        trans_mask: remap_mask(&pair.trans_mask, nw, nh, &map),
        final_mask: remap_mask(&pair.final_mask, nw, nh, &map),
    };
    out.validate()?;
    Ok(out)
}

/// Carries the pinhole model through the geometric transform, so
/// back-projection of an augmented pair stays physically consistent
/// (a quarter turn of the image is a quarter turn about the optical axis;
/// a flip is a mirror). `dims` are the dimensions BEFORE augmentation.
pub fn transform_intrinsics(
    k: &CameraIntrinsics,
    dims: (usize, usize),
    spec: &AugmentSpec,
) -> CameraIntrinsics {
    let (w, h) = (dims.0 as f64, dims.1 as f64);
    let (fx, fy, cy) = (k.fx, k.fy, k.cy);
    let cx = if spec.hflip { w - 1.0 - k.cx } else { k.cx };
    let (fx, fy, cx, cy) = match spec.rotation {
        Rotation::Deg0 => (fx, fy, cx, cy),
        Rotation::Deg90 => (fy, fx, h - 1.0 - cy, cx),
        Rotation::Deg180 => (fx, fy, w - 1.0 - cx, h - 1.0 - cy),
        Rotation::Deg270 => (fy, fx, cy, w - 1.0 - cx),
    };
    CameraIntrinsics { fx, fy, cx, cy }
}

/// Draws the per-frame augmentation used by batch synthesis: flip and
/// rotation uniformly, plus a fresh noise seed. Deterministic in
/// (seed, stream).
pub fn sample_augment(seed: u64, stream: u64, noise_sigma: f64) -> AugmentSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    AugmentSpec {
        hflip: rng.gen::<bool>(),
        rotation: Rotation::ALL[rng.gen_range(0..4)],
        noise_sigma,
        seed: rng.gen::<u64>(),
    }
}
