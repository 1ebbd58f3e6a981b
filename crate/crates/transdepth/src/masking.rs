//! The depth-deficit masking strategy.
//!
//! Non-transparent instance masks are eroded (each on its own, by
//! default) and unioned; transparent instance masks are unioned
//! un-eroded. The keep-mask is the complement of the combined union:
//!
//! ```text
//! final = J - (eroded_non_trans_union OR trans_union)
//! ```
//!
//! Applying the keep-mask to the raw depth produces the masked input
//! depth, and zeroing only the transparent regions produces the
//! supervision depth and the masked RGB input.

use crate::error::{check_dims, Error, Result};
use crate::morphology::erode;
use crate::raster::{BinaryMask, DepthMap, MaskingConfig, RgbImage, TrainingPair};

/// Per-frame instance masks, split by class. All masks share the frame's
/// dimensions; either list may be empty.
#[derive(Debug, Clone)]
pub struct MaskSet {
    width: usize,
    height: usize,
    trans: Vec<BinaryMask>,
    non_trans: Vec<BinaryMask>,
}

impl MaskSet {
    pub fn new(
        width: usize,
        height: usize,
        trans: Vec<BinaryMask>,
        non_trans: Vec<BinaryMask>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        for m in trans.iter().chain(non_trans.iter()) {
            check_dims("MaskSet instance mask", (width, height), m.dims())?;
        }
        Ok(Self {
            width,
            height,
            trans,
            non_trans,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, Vec::new(), Vec::new())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn trans_masks(&self) -> &[BinaryMask] {
        &self.trans
    }

    pub fn non_trans_masks(&self) -> &[BinaryMask] {
        &self.non_trans
    }
}

/// Per-pixel logical OR of a nonempty list of equal-sized masks.
pub fn union(masks: &[BinaryMask]) -> Result<BinaryMask> {
    let first = masks
        .first()
        .ok_or_else(|| Error::Config("union of an empty mask list".to_string()))?;
    let (w, h) = first.dims();
    let mut out = first.as_slice().to_vec();
    for m in &masks[1..] {
        check_dims("mask union", (w, h), m.dims())?;
        for (o, v) in out.iter_mut().zip(m.as_slice()) {
            *o |= *v;
        }
    }
    Ok(BinaryMask::from_vec_unchecked(w, h, out))
}

fn union_or_zeros(width: usize, height: usize, masks: &[BinaryMask]) -> Result<BinaryMask> {
    if masks.is_empty() {
        BinaryMask::zeros(width, height)
    } else {
        let u = union(masks)?;
        check_dims("mask union", (width, height), u.dims())?;
        Ok(u)
    }
}

/// The three masks produced by [`compose_final_mask`].
#[derive(Debug, Clone)]
pub struct MaskComposition {
    /// Keep-mask for depth: 1 = retained, 0 = zeroed.
    pub final_mask: BinaryMask,
    /// Union of transparent instance masks, never eroded.
    pub trans_union: BinaryMask,
    /// Union of the (optionally eroded) non-transparent instance masks.
    pub eroded_non_trans_union: BinaryMask,
}

/// Composes the keep-mask from a frame's instance masks.
///
/// Each non-transparent mask is eroded independently per `cfg` (or the
/// union is eroded once when `cfg.erode_union` is set, or not at all when
/// erosion is disabled), then everything is unioned and complemented.
pub fn compose_final_mask(masks: &MaskSet, cfg: &MaskingConfig) -> Result<MaskComposition> {
    cfg.validate()?;
    let (w, h) = masks.dims();

    let eroded_non_trans_union = if !cfg.erosion_enabled {
        union_or_zeros(w, h, masks.non_trans_masks())?
    } else if cfg.erode_union {
        let u = union_or_zeros(w, h, masks.non_trans_masks())?;
        erode(&u, cfg.erosion_element, cfg.erosion_iterations)?
    } else {
        let eroded = masks
            .non_trans_masks()
            .iter()
            .map(|m| erode(m, cfg.erosion_element, cfg.erosion_iterations))
            .collect::<Result<Vec<_>>>()?;
        union_or_zeros(w, h, &eroded)?
    };

    let trans_union = union_or_zeros(w, h, masks.trans_masks())?;

    let removed = union(&[eroded_non_trans_union.clone(), trans_union.clone()])?;
    Ok(MaskComposition {
        final_mask: removed.complement(),
        trans_union,
        eroded_non_trans_union,
    })
}

/// Produces the full self-supervision bundle for one frame:
/// masked RGB (transparent pixels blacked out), masked input depth
/// (keep-mask applied), and the supervision depth (transparent regions
/// zeroed).
pub fn synthesize_pair(
    rgb: &RgbImage,
    depth: &DepthMap,
    masks: &MaskSet,
    cfg: &MaskingConfig,
) -> Result<TrainingPair> {
    let dims = depth.dims();
    check_dims("synthesize_pair rgb", dims, rgb.dims())?;
    check_dims("synthesize_pair masks", dims, masks.dims())?;

    let composition = compose_final_mask(masks, cfg)?;
    let (w, h) = dims;

    let mut rgb_out = rgb.as_slice().to_vec();
    for (px, t) in rgb_out.chunks_mut(3).zip(composition.trans_union.as_slice()) {
        if *t == 1 {
            px.fill(0);
        }
    }

    let masked_depth: Vec<f64> = depth
        .as_slice()
        .iter()
        .zip(composition.final_mask.as_slice())
        .map(|(d, keep)| if *keep == 1 { *d } else { 0.0 })
        .collect();

    let target_depth: Vec<f64> = depth
        .as_slice()
        .iter()
        .zip(composition.trans_union.as_slice())
        .map(|(d, t)| if *t == 0 { *d } else { 0.0 })
        .collect();

    Ok(TrainingPair {
        masked_rgb: RgbImage::from_vec(w, h, rgb_out)?,
        masked_depth: DepthMap::from_vec_unchecked(w, h, masked_depth),
        target_depth: DepthMap::from_vec_unchecked(w, h, target_depth),
        trans_mask: composition.trans_union,
        final_mask: composition.final_mask,
    })
}
