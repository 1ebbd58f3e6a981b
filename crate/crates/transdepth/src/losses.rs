//! Region-masked training losses.
//!
//! Each loss is a mean over a pixel region of a squared depth residual
//! plus a weighted surface-normal disagreement term. These functions are
//! value oracles for external trainers; they do not produce gradients.

use crate::error::{check_dims, Error, Result};
use crate::geometry::normals_from_depth;
use crate::par;
use crate::raster::{BinaryMask, CameraIntrinsics, DepthMap, NormalMap};

/// Weights and strictness for the loss oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossOptions {
    /// Weight of the normal-cosine term inside the per-pixel cost.
    pub alpha: f64,
    /// Weight of the transparent-region term in the combined loss.
    pub beta: f64,
    /// When true, pixels with gt = 0 stay in the region mean (their
    /// residual is pred² and their normal term is 0). Default excludes
    /// them: a zero gt carries no supervision signal.
    pub include_invalid_gt: bool,
}

impl Default for LossOptions {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.9,
            include_invalid_gt: false,
        }
    }
}

impl LossOptions {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Config(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !self.beta.is_finite() || !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!(
                "beta must be in [0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Mean cost over one region together with the number of contributing
/// pixels. `value` is 0 when the region is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionLoss {
    pub value: f64,
    pub count: usize,
}

/// The two region losses and their weighted combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    /// Mean cost outside the transparent mask.
    pub l1: f64,
    /// Mean cost inside the transparent mask.
    pub l2: f64,
    /// beta * l2 + (1 - beta) * l1, computed exactly that way.
    pub combined: f64,
    /// Contributing pixels outside the transparent mask.
    pub n1: usize,
    /// Contributing pixels inside the transparent mask.
    pub n2: usize,
}

/// Mean over pixels x with region[x] = 1 (and gt[x] > 0 unless
/// `include_invalid_gt`) of
///
/// ```text
/// (pred[x] - gt[x])^2 + alpha * (1 - cos(pred_normals[x], gt_normals[x]))
/// ```
///
/// The cosine term contributes 0 wherever either normal is invalid; the
/// depth residual near holes is still informative.
pub fn region_loss_with_normals(
    pred: &DepthMap,
    gt: &DepthMap,
    pred_normals: &NormalMap,
    gt_normals: &NormalMap,
    region: &BinaryMask,
    opts: &LossOptions,
) -> Result<RegionLoss> {
    opts.validate()?;
    check_dims("region_loss pred/gt", pred.dims(), gt.dims())?;
    check_dims("region_loss region", pred.dims(), region.dims())?;
    check_dims("region_loss pred normals", pred.dims(), pred_normals.dims())?;
    check_dims("region_loss gt normals", pred.dims(), gt_normals.dims())?;

    let (w, h) = pred.dims();
    let p = pred.as_slice();
    let g = gt.as_slice();
    let r = region.as_slice();
    let (pn, pv) = (pred_normals.normals(), pred_normals.validity());
    let (gn, gv) = (gt_normals.normals(), gt_normals.validity());
    let alpha = opts.alpha;
    let include_invalid = opts.include_invalid_gt;

    // Per-row partial sums folded in row order keep the result identical
    // across thread counts.
    let rows = par::indexed_map(h, |y| {
        let mut sum = 0.0f64;
        let mut count = 0usize;
        for x in 0..w {
            let i = y * w + x;
            if r[i] == 0 || (!include_invalid && g[i] <= 0.0) {
                continue;
            }
            let d = p[i] - g[i];
            let mut term = d * d;
            // Identical vectors must cost exactly 0; their dot product can
            // round to just under 1 and leave a spurious residue.
            if pv[i] == 1 && gv[i] == 1 && pn[i] != gn[i] {
                let (a, b) = (pn[i], gn[i]);
                let cos = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
                term += alpha * (1.0 - cos);
            }
            sum += term;
            count += 1;
        }
        (sum, count)
    });
    let (sum, count) = rows
        .into_iter()
        .fold((0.0f64, 0usize), |(s, c), (rs, rc)| (s + rs, c + rc));

    let value = if count == 0 { 0.0 } else { sum / count as f64 };
    Ok(RegionLoss { value, count })
}

/// [`region_loss_with_normals`] with both normal maps estimated from the
/// depth maps through `k`.
pub fn region_loss(
    pred: &DepthMap,
    gt: &DepthMap,
    region: &BinaryMask,
    k: &CameraIntrinsics,
    opts: &LossOptions,
) -> Result<RegionLoss> {
    check_dims("region_loss pred/gt", pred.dims(), gt.dims())?;
    let pn = normals_from_depth(pred, k);
    let gn = normals_from_depth(gt, k);
    region_loss_with_normals(pred, gt, &pn, &gn, region, opts)
}

/// Training loss for the synthetic-pair setting: the region mean over the
/// complement of the transparent mask, so missing transparent depth never
/// enters the objective.
pub fn self_supervised_loss(
    pred: &DepthMap,
    gt: &DepthMap,
    trans_mask: &BinaryMask,
    k: &CameraIntrinsics,
    opts: &LossOptions,
) -> Result<RegionLoss> {
    check_dims("self_supervised_loss trans mask", pred.dims(), trans_mask.dims())?;
    region_loss(pred, gt, &trans_mask.complement(), k, opts)
}

/// Loss against full ground truth, split by the transparent mask:
/// `l2` inside it, `l1` outside, combined as beta * l2 + (1 - beta) * l1.
/// Normals are estimated once per depth map and shared by both regions.
pub fn supervised_loss(
    pred: &DepthMap,
    gt_full: &DepthMap,
    trans_mask: &BinaryMask,
    k: &CameraIntrinsics,
    opts: &LossOptions,
) -> Result<LossBreakdown> {
    opts.validate()?;
    check_dims("supervised_loss pred/gt", pred.dims(), gt_full.dims())?;
    check_dims("supervised_loss trans mask", pred.dims(), trans_mask.dims())?;

    let pn = normals_from_depth(pred, k);
    let gn = normals_from_depth(gt_full, k);
    let l2 = region_loss_with_normals(pred, gt_full, &pn, &gn, trans_mask, opts)?;
    let l1 =
        region_loss_with_normals(pred, gt_full, &pn, &gn, &trans_mask.complement(), opts)?;

    Ok(LossBreakdown {
        l1: l1.value,
        l2: l2.value,
        combined: opts.beta * l2.value + (1.0 - opts.beta) * l1.value,
        n1: l1.count,
        n2: l2.count,
    })
}
