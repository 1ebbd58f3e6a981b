//! Core raster containers and domain types.
//!
//! All types here are plain immutable value types: construct them, then
//! share them freely across threads. Depth is stored as 64-bit float
//! meters regardless of the on-disk encoding, with `0.0` meaning
//! "invalid/missing". Masks are strict `{0,1}`.

use crate::error::{check_dims, Error, Result};

fn checked_len(width: usize, height: usize) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    width
        .checked_mul(height)
        .ok_or(Error::InvalidDimensions { width, height })
}

/// Single-channel raster of metric depths in meters. `0.0` encodes a
/// missing/invalid measurement; valid values are finite and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthMap {
    /// Raster of the given size with every pixel set to `fill`.
    pub fn filled(width: usize, height: usize, fill: f64) -> Result<Self> {
        let len = checked_len(width, height)?;
        if !fill.is_finite() || fill < 0.0 {
            return Err(Error::InvalidValue(format!(
                "depth fill must be finite and >= 0, got {fill}"
            )));
        }
        Ok(Self {
            width,
            height,
            data: vec![fill; len],
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 0.0)
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let len = checked_len(width, height)?;
        if data.len() != len {
            return Err(Error::InvalidValue(format!(
                "depth data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue(format!(
                "depth values must be finite and >= 0, got {bad}"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a depth map from a generator, mapping negative or non-finite
    /// values to 0 (invalid). Handy for synthetic test fields.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let len = checked_len(width, height)?;
        let mut data = Vec::with_capacity(len);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                data.push(if v.is_finite() && v > 0.0 { v } else { 0.0 });
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub(crate) fn from_vec_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| v.is_finite() && *v >= 0.0));
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// True where the pixel carries a measurement (depth > 0).
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.get(x, y) > 0.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Single-channel raster of bits. Used for instance masks, keep-masks and
/// evaluation regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn filled(width: usize, height: usize, bit: u8) -> Result<Self> {
        let len = checked_len(width, height)?;
        if bit > 1 {
            return Err(Error::InvalidValue(format!(
                "mask fill must be 0 or 1, got {bit}"
            )));
        }
        Ok(Self {
            width,
            height,
            data: vec![bit; len],
        })
    }

    /// The all-ones mask (the J matrix of the mask algebra).
    pub fn ones(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 1)
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 0)
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        let len = checked_len(width, height)?;
        if data.len() != len {
            return Err(Error::InvalidValue(format!(
                "mask data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if data.iter().any(|v| *v > 1) {
            return Err(Error::InvalidValue(
                "mask values must be 0 or 1".to_string(),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let len = checked_len(width, height)?;
        let mut data = Vec::with_capacity(len);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y) as u8);
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub(crate) fn from_vec_unchecked(width: usize, height: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| *v <= 1));
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn is_set(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == 1
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|v| **v == 1).count()
    }

    /// Per-pixel logical NOT; this is `J - mask`.
    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| 1 - v).collect(),
        }
    }

    /// True if every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims()
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| *a == 0 || *b == 1)
    }
}

/// Three-channel 8-bit color raster, row-major interleaved RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let len = checked_len(width, height)?;
        let mut data = Vec::with_capacity(len * 3);
        for _ in 0..len {
            data.extend_from_slice(&rgb);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        let len = checked_len(width, height)?;
        if data.len() != len * 3 {
            return Err(Error::InvalidValue(format!(
                "rgb data length {} does not match {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }
}

/// Pinhole camera intrinsics in pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0) || !(fy > 0.0) || !fx.is_finite() || !fy.is_finite() {
            return Err(Error::Config(format!(
                "focal lengths must be positive and finite, got fx={fx} fy={fy}"
            )));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(Error::Config(format!(
                "principal point must be finite, got cx={cx} cy={cy}"
            )));
        }
        Ok(Self { fx, fy, cx, cy })
    }
}

/// Per-pixel unit normal vectors with a validity bit per pixel.
///
/// Valid normals are unit length (within 1e-6) and oriented toward the
/// camera (z component <= 0). Invalid pixels must be skipped by every
/// consumer; their stored vector is all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    width: usize,
    height: usize,
    normals: Vec<[f64; 3]>,
    valid: Vec<u8>,
}

impl NormalMap {
    pub fn from_parts(
        width: usize,
        height: usize,
        normals: Vec<[f64; 3]>,
        valid: Vec<u8>,
    ) -> Result<Self> {
        let len = checked_len(width, height)?;
        if normals.len() != len || valid.len() != len {
            return Err(Error::InvalidValue(format!(
                "normal map buffers ({}, {}) do not match {}x{}",
                normals.len(),
                valid.len(),
                width,
                height
            )));
        }
        for (n, v) in normals.iter().zip(valid.iter()) {
            if *v > 1 {
                return Err(Error::InvalidValue(
                    "normal validity bits must be 0 or 1".to_string(),
                ));
            }
            if *v == 1 {
                let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
                if (norm - 1.0).abs() > 1e-6 {
                    return Err(Error::InvalidValue(format!(
                        "valid normal has norm {norm}, expected 1 within 1e-6"
                    )));
                }
            }
        }
        Ok(Self {
            width,
            height,
            normals,
            valid,
        })
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        normals: Vec<[f64; 3]>,
        valid: Vec<u8>,
    ) -> Self {
        debug_assert_eq!(normals.len(), width * height);
        debug_assert_eq!(valid.len(), width * height);
        Self {
            width,
            height,
            normals,
            valid,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x] == 1
    }

    pub fn get(&self, x: usize, y: usize) -> Option<[f64; 3]> {
        let i = y * self.width + x;
        (self.valid[i] == 1).then(|| self.normals[i])
    }

    pub fn normals(&self) -> &[[f64; 3]] {
        &self.normals
    }

    pub fn validity(&self) -> &[u8] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v == 1).count()
    }
}

/// Configuration of the depth-deficit masking step.
///
/// Defaults follow the reference procedure: a 5x5 rectangular structuring
/// element applied for three erosion iterations, eroding each
/// non-transparent instance mask independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskingConfig {
    /// Structuring element (width, height); both must be odd and >= 1.
    pub erosion_element: (usize, usize),
    /// Number of erosion passes applied to each non-transparent mask.
    pub erosion_iterations: usize,
    /// When false, non-transparent masks are used as-is (the "non-erosion"
    /// ablation variant).
    pub erosion_enabled: bool,
    /// When true, erosion runs on the union of the non-transparent masks
    /// instead of per instance. Off by default; per-instance erosion
    /// preserves the corridor between adjacent objects.
    pub erode_union: bool,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        Self {
            erosion_element: (5, 5),
            erosion_iterations: 3,
            erosion_enabled: true,
            erode_union: false,
        }
    }
}

impl MaskingConfig {
    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.erosion_element;
        if w == 0 || h == 0 || w % 2 == 0 || h % 2 == 0 {
            return Err(Error::Config(format!(
                "erosion element must have odd positive dimensions, got {w}x{h}"
            )));
        }
        Ok(())
    }
}

/// The synthesized self-supervision bundle: masked RGB input, masked depth
/// input, supervision depth, and the masks that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    /// RGB with transparent objects blacked out (the I' image).
    pub masked_rgb: RgbImage,
    /// Depth with the keep-mask applied (the D' input).
    pub masked_depth: DepthMap,
    /// Depth with only transparent regions zeroed (the supervision target).
    pub target_depth: DepthMap,
    /// Union of transparent instance masks.
    pub trans_mask: BinaryMask,
    /// Keep-mask: 1 = depth retained, 0 = depth zeroed.
    pub final_mask: BinaryMask,
}

impl TrainingPair {
    /// Checks the structural invariants that every pipeline output must
    /// satisfy:
    ///
    /// - `final_mask = 0` implies `masked_depth = 0`
    /// - `trans_mask = 1` implies `target_depth = 0` and black RGB
    /// - `trans_mask = 0 && final_mask = 1` implies `masked_depth == target_depth`
    pub fn validate(&self) -> Result<()> {
        let dims = self.masked_depth.dims();
        check_dims("TrainingPair rgb", dims, self.masked_rgb.dims())?;
        check_dims("TrainingPair target", dims, self.target_depth.dims())?;
        check_dims("TrainingPair trans mask", dims, self.trans_mask.dims())?;
        check_dims("TrainingPair final mask", dims, self.final_mask.dims())?;

        let (w, h) = dims;
        for y in 0..h {
            for x in 0..w {
                let trans = self.trans_mask.is_set(x, y);
                let keep = self.final_mask.is_set(x, y);
                let d_in = self.masked_depth.get(x, y);
                let d_gt = self.target_depth.get(x, y);
                if !keep && d_in != 0.0 {
                    return Err(Error::InvalidValue(format!(
                        "masked depth {d_in} at ({x},{y}) outside the keep-mask"
                    )));
                }
                if trans {
                    if d_gt != 0.0 {
                        return Err(Error::InvalidValue(format!(
                            "target depth {d_gt} at transparent pixel ({x},{y})"
                        )));
                    }
                    if self.masked_rgb.get(x, y) != [0, 0, 0] {
                        return Err(Error::InvalidValue(format!(
                            "non-black RGB at transparent pixel ({x},{y})"
                        )));
                    }
                } else if keep && d_in != d_gt {
                    return Err(Error::InvalidValue(format!(
                        "masked depth {d_in} != target depth {d_gt} at kept pixel ({x},{y})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.masked_depth.dims()
    }
}
