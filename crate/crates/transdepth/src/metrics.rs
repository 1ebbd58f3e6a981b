//! Depth-completion metrics over transparent-object pixels, and a
//! relative-error visualization.
//!
//! All metrics are computed over the evaluated set
//! `D_t = {x : trans_mask[x] = 1 and gt[x] > 0}`. A prediction of 0 inside
//! `D_t` is a hole where the completer owed an answer: it fails every
//! threshold and contributes its full gt magnitude to the error means.

use std::fmt;

use crate::error::{check_dims, Error, Result};
use crate::par;
use crate::raster::{BinaryMask, DepthMap, RgbImage};

/// Threshold ratios for the sigma metrics.
pub const SIGMA_THRESHOLDS: [f64; 3] = [1.05, 1.10, 1.25];

/// Error-map color at relative error 0.
pub const ERROR_MAP_BACKGROUND: [u8; 3] = [240, 240, 240];
/// Error-map color at relative error >= max_rel.
pub const ERROR_MAP_FOREGROUND: [u8; 3] = [255, 0, 0];
/// Default clamp for the error-map ramp; desk-scale scenes rarely exceed
/// 10% relative error, so this keeps the ramp's dynamic range visible.
pub const DEFAULT_MAX_REL: f64 = 0.10;

/// Aggregate metrics over an evaluated pixel set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    /// Root mean squared error, meters.
    pub rmse: f64,
    /// Mean of |d - d*| / d*, dimensionless.
    pub rel: f64,
    /// Mean absolute error, meters.
    pub mae: f64,
    /// Percentage of pixels with max(d/d*, d*/d) < 1.05.
    pub sigma_105: f64,
    /// Percentage of pixels with max(d/d*, d*/d) < 1.10.
    pub sigma_110: f64,
    /// Percentage of pixels with max(d/d*, d*/d) < 1.25.
    pub sigma_125: f64,
    /// Number of evaluated pixels.
    pub n_pixels: usize,
}

impl MetricsReport {
    /// Single-line key=value record with full-precision values, parseable
    /// by [`MetricsReport::parse_line`].
    pub fn to_line(&self) -> String {
        format!(
            "rmse={} rel={} mae={} sigma_1.05={} sigma_1.10={} sigma_1.25={} n_pixels={}",
            self.rmse,
            self.rel,
            self.mae,
            self.sigma_105,
            self.sigma_110,
            self.sigma_125,
            self.n_pixels
        )
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let mut fields = [None::<f64>; 6];
        let mut n_pixels = None::<usize>;
        for token in line.split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| {
                Error::InvalidValue(format!("metrics token without '=': {token}"))
            })?;
            let slot = match key {
                "rmse" => 0,
                "rel" => 1,
                "mae" => 2,
                "sigma_1.05" => 3,
                "sigma_1.10" => 4,
                "sigma_1.25" => 5,
                "n_pixels" => {
                    n_pixels = Some(value.parse().map_err(|_| {
                        Error::InvalidValue(format!("bad n_pixels value: {value}"))
                    })?);
                    continue;
                }
                _ => {
                    return Err(Error::InvalidValue(format!(
                        "unknown metrics key: {key}"
                    )))
                }
            };
            fields[slot] = Some(value.parse().map_err(|_| {
                Error::InvalidValue(format!("bad value for {key}: {value}"))
            })?);
        }
        let [rmse, rel, mae, s105, s110, s125] = fields;
        match (rmse, rel, mae, s105, s110, s125, n_pixels) {
            (Some(rmse), Some(rel), Some(mae), Some(s105), Some(s110), Some(s125), Some(n)) => {
                Ok(Self {
                    rmse,
                    rel,
                    mae,
                    sigma_105: s105,
                    sigma_110: s110,
                    sigma_125: s125,
                    n_pixels: n,
                })
            }
            _ => Err(Error::InvalidValue(format!(
                "incomplete metrics line: {line}"
            ))),
        }
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RMSE {:.4} m  REL {:.4}  MAE {:.4} m  \
             sigma1.05 {:.2}%  sigma1.10 {:.2}%  sigma1.25 {:.2}%  ({} px)",
            self.rmse,
            self.rel,
            self.mae,
            self.sigma_105,
            self.sigma_110,
            self.sigma_125,
            self.n_pixels
        )
    }
}

/// Running sums for pixel-weighted aggregation across frames. Finalizing
/// after several [`add_frame`](Self::add_frame) calls gives exactly the
/// metrics of the concatenated evaluated sets.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricsAccumulator {
    sum_sq: f64,
    sum_abs: f64,
    sum_rel: f64,
    pass: [usize; 3],
    n: usize,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_pixels(&self) -> usize {
        self.n
    }

    /// Adds every pixel of this frame's evaluated set. A frame with an
    /// empty evaluated set adds nothing and is not an error.
    pub fn add_frame(
        &mut self,
        pred: &DepthMap,
        gt: &DepthMap,
        trans_mask: &BinaryMask,
    ) -> Result<()> {
        check_dims("evaluate pred/gt", pred.dims(), gt.dims())?;
        check_dims("evaluate trans mask", pred.dims(), trans_mask.dims())?;

        let (w, h) = pred.dims();
        let p = pred.as_slice();
        let g = gt.as_slice();
        let m = trans_mask.as_slice();

        // Row partials folded in row order: same totals at any thread count.
        let rows = par::indexed_map(h, |y| {
            let mut acc = MetricsAccumulator::default();
            for x in 0..w {
                let i = y * w + x;
                if m[i] == 0 || g[i] <= 0.0 {
                    continue;
                }
                let (d, dstar) = (p[i], g[i]);
                let err = (d - dstar).abs();
                acc.sum_sq += err * err;
                acc.sum_abs += err;
                acc.sum_rel += err / dstar;
                if d > 0.0 {
                    let ratio = (d / dstar).max(dstar / d);
                    for (slot, t) in SIGMA_THRESHOLDS.iter().enumerate() {
                        if ratio < *t {
                            acc.pass[slot] += 1;
                        }
                    }
                }
                acc.n += 1;
            }
            acc
        });
        for row in rows {
            self.merge(&row);
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) {
        self.sum_sq += other.sum_sq;
        self.sum_abs += other.sum_abs;
        self.sum_rel += other.sum_rel;
        for (a, b) in self.pass.iter_mut().zip(other.pass.iter()) {
            *a += b;
        }
        self.n += other.n;
    }

    /// Errors if no pixel was ever evaluated: an all-zero report would be
    /// indistinguishable from a perfect one.
    pub fn finalize(&self) -> Result<MetricsReport> {
        if self.n == 0 {
            return Err(Error::EmptyEvaluation);
        }
        let n = self.n as f64;
        Ok(MetricsReport {
            rmse: (self.sum_sq / n).sqrt(),
            rel: self.sum_rel / n,
            mae: self.sum_abs / n,
            sigma_105: 100.0 * self.pass[0] as f64 / n,
            sigma_110: 100.0 * self.pass[1] as f64 / n,
            sigma_125: 100.0 * self.pass[2] as f64 / n,
            n_pixels: self.n,
        })
    }
}

/// Computes the full metric suite over `D_t`. Errors if `D_t` is empty.
pub fn evaluate(pred: &DepthMap, gt: &DepthMap, trans_mask: &BinaryMask) -> Result<MetricsReport> {
    let mut acc = MetricsAccumulator::new();
    acc.add_frame(pred, gt, trans_mask)?;
    acc.finalize()
}

/// Renders per-pixel relative error `|d - d*| / d*` as an image.
///
/// The ramp is linear per channel: with `t = clamp(rel / max_rel, 0, 1)`,
/// `channel = round(bg + (fg - bg) * t)` from [`ERROR_MAP_BACKGROUND`] to
/// [`ERROR_MAP_FOREGROUND`]. Pixels outside `eval_mask` or with `gt = 0`
/// render as background.
pub fn error_map(
    pred: &DepthMap,
    gt: &DepthMap,
    eval_mask: &BinaryMask,
    max_rel: f64,
) -> Result<RgbImage> {
    check_dims("error_map pred/gt", pred.dims(), gt.dims())?;
    check_dims("error_map eval mask", pred.dims(), eval_mask.dims())?;
    if !max_rel.is_finite() || max_rel <= 0.0 {
        return Err(Error::Config(format!(
            "max_rel must be positive and finite, got {max_rel}"
        )));
    }

    let (w, h) = pred.dims();
    let p = pred.as_slice();
    let g = gt.as_slice();
    let m = eval_mask.as_slice();

    let mut data = vec![0u8; w * h * 3];
    par::for_each_row_mut(&mut data, w * 3, |y, row| {
        for x in 0..w {
            let i = y * w + x;
            let t = if m[i] == 1 && g[i] > 0.0 {
                ((p[i] - g[i]).abs() / g[i] / max_rel).clamp(0.0, 1.0)
            } else {
                0.0
            };
            for c in 0..3 {
                let (bg, fg) = (ERROR_MAP_BACKGROUND[c] as f64, ERROR_MAP_FOREGROUND[c] as f64);
                row[x * 3 + c] = (bg + (fg - bg) * t).round() as u8;
            }
        }
    });

    RgbImage::from_vec(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction_scores_perfectly() {
        let gt = DepthMap::from_fn(16, 12, |x, y| 0.5 + 0.01 * (x + y) as f64).unwrap();
        let mask = BinaryMask::from_fn(16, 12, |x, _| x % 2 == 0).unwrap();
        let r = evaluate(&gt, &gt, &mask).unwrap();
        assert_eq!(r.rmse, 0.0);
        assert_eq!(r.rel, 0.0);
        assert_eq!(r.mae, 0.0);
        assert_eq!(r.sigma_105, 100.0);
        assert_eq!(r.sigma_110, 100.0);
        assert_eq!(r.sigma_125, 100.0);
        assert_eq!(r.n_pixels, 8 * 12);
    }

    #[test]
    fn single_pixel_threshold_boundaries() {
        let gt = DepthMap::filled(1, 1, 1.0).unwrap();
        let pred = DepthMap::filled(1, 1, 1.06).unwrap();
        let mask = BinaryMask::ones(1, 1).unwrap();
        let r = evaluate(&pred, &gt, &mask).unwrap();
        assert_eq!(r.sigma_105, 0.0);
        assert_eq!(r.sigma_110, 100.0);
        assert_eq!(r.sigma_125, 100.0);
        assert!((r.rel - 0.06).abs() < 1e-12);
        assert!((r.mae - 0.06).abs() < 1e-12);
        assert!((r.rmse - 0.06).abs() < 1e-12);
        assert_eq!(r.n_pixels, 1);
    }

    #[test]
    fn two_pixel_hand_computation() {
        let gt = DepthMap::filled(2, 1, 1.0).unwrap();
        let pred = DepthMap::from_vec(2, 1, vec![1.0, 1.2]).unwrap();
        let mask = BinaryMask::ones(2, 1).unwrap();
        let r = evaluate(&pred, &gt, &mask).unwrap();
        assert!((r.mae - 0.1).abs() < 1e-12);
        assert!((r.rmse - 0.02f64.sqrt()).abs() < 1e-12);
        assert!((r.rel - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rel_is_not_swap_symmetric() {
        // |2-1|/1 = 1.0 forward but |1-2|/2 = 0.5 reversed; the
        // denominator is always the second argument.
        let a = DepthMap::filled(1, 1, 2.0).unwrap();
        let b = DepthMap::filled(1, 1, 1.0).unwrap();
        let mask = BinaryMask::ones(1, 1).unwrap();
        let fwd = evaluate(&a, &b, &mask).unwrap();
        let rev = evaluate(&b, &a, &mask).unwrap();
        assert_eq!(fwd.rel, 1.0);
        assert_eq!(rev.rel, 0.5);
    }

    #[test]
    fn predicted_hole_fails_every_threshold() {
        let gt = DepthMap::filled(2, 1, 1.5).unwrap();
        let pred = DepthMap::from_vec(2, 1, vec![0.0, 1.5]).unwrap();
        let mask = BinaryMask::ones(2, 1).unwrap();
        let r = evaluate(&pred, &gt, &mask).unwrap();
        assert_eq!(r.sigma_105, 50.0);
        assert_eq!(r.sigma_110, 50.0);
        assert_eq!(r.sigma_125, 50.0);
        assert!((r.mae - 0.75).abs() < 1e-12);
        assert_eq!(r.n_pixels, 2);
    }

    #[test]
    fn empty_evaluated_set_is_an_error() {
        let gt = DepthMap::zeros(4, 4).unwrap();
        let pred = DepthMap::filled(4, 4, 1.0).unwrap();
        let mask = BinaryMask::ones(4, 4).unwrap();
        assert!(matches!(
            evaluate(&pred, &gt, &mask),
            Err(Error::EmptyEvaluation)
        ));
        let gt = DepthMap::filled(4, 4, 1.0).unwrap();
        let empty = BinaryMask::zeros(4, 4).unwrap();
        assert!(matches!(
            evaluate(&pred, &gt, &empty),
            Err(Error::EmptyEvaluation)
        ));
    }

    #[test]
    fn gt_holes_inside_mask_are_skipped() {
        let gt = DepthMap::from_vec(3, 1, vec![1.0, 0.0, 2.0]).unwrap();
        let pred = DepthMap::from_vec(3, 1, vec![1.1, 9.0, 2.0]).unwrap();
        let mask = BinaryMask::ones(3, 1).unwrap();
        let r = evaluate(&pred, &gt, &mask).unwrap();
        assert_eq!(r.n_pixels, 2);
        assert!((r.mae - 0.05).abs() < 1e-12);
    }

    #[test]
    fn accumulating_split_frames_matches_whole() {
        let gt = DepthMap::from_fn(20, 10, |x, y| 1.0 + 0.01 * ((x * 3 + y) % 17) as f64)
            .unwrap();
        let pred = DepthMap::from_fn(20, 10, |x, y| 1.0 + 0.012 * ((x + 5 * y) % 13) as f64)
            .unwrap();
        let mask = BinaryMask::from_fn(20, 10, |x, y| (x + y) % 4 != 0).unwrap();
        let whole = evaluate(&pred, &gt, &mask).unwrap();

        let top = |d: &DepthMap| {
            DepthMap::from_fn(20, 5, |x, y| d.get(x, y)).unwrap()
        };
        let bottom = |d: &DepthMap| {
            DepthMap::from_fn(20, 5, |x, y| d.get(x, y + 5)).unwrap()
        };
        let mask_top = BinaryMask::from_fn(20, 5, |x, y| mask.is_set(x, y)).unwrap();
        let mask_bottom = BinaryMask::from_fn(20, 5, |x, y| mask.is_set(x, y + 5)).unwrap();

        let mut acc = MetricsAccumulator::new();
        acc.add_frame(&top(&pred), &top(&gt), &mask_top).unwrap();
        let mut second = MetricsAccumulator::new();
        second
            .add_frame(&bottom(&pred), &bottom(&gt), &mask_bottom)
            .unwrap();
        acc.merge(&second);
        let merged = acc.finalize().unwrap();

        assert_eq!(merged.n_pixels, whole.n_pixels);
        assert!((merged.rmse - whole.rmse).abs() < 1e-12);
        assert!((merged.rel - whole.rel).abs() < 1e-12);
        assert!((merged.mae - whole.mae).abs() < 1e-12);
        assert_eq!(merged.sigma_105, whole.sigma_105);
    }

    #[test]
    fn line_roundtrip_preserves_report() {
        let gt = DepthMap::from_fn(8, 8, |x, y| 1.0 + 0.03 * ((x ^ y) % 7) as f64).unwrap();
        let pred = DepthMap::from_fn(8, 8, |x, y| 1.0 + 0.025 * ((x + y) % 5) as f64).unwrap();
        let mask = BinaryMask::ones(8, 8).unwrap();
        let r = evaluate(&pred, &gt, &mask).unwrap();
        let parsed = MetricsReport::parse_line(&r.to_line()).unwrap();
        assert_eq!(parsed, r);
        assert!(MetricsReport::parse_line("rmse=0.1").is_err());
        assert!(MetricsReport::parse_line("bogus").is_err());
    }

    #[test]
    fn display_rounds_percentages_to_two_decimals() {
        let r = MetricsReport {
            rmse: 0.012345,
            rel: 0.04567,
            mae: 0.01,
            sigma_105: 81.7391,
            sigma_110: 93.3333,
            sigma_125: 100.0,
            n_pixels: 42,
        };
        let s = r.to_string();
        assert!(s.contains("81.74%"), "{s}");
        assert!(s.contains("93.33%"), "{s}");
    }

    #[test]
    fn error_map_endpoints_and_midpoint() {
        let gt = DepthMap::filled(3, 1, 1.0).unwrap();
        let pred = DepthMap::from_vec(3, 1, vec![1.0, 1.05, 1.5]).unwrap();
        let mask = BinaryMask::ones(3, 1).unwrap();
        let img = error_map(&pred, &gt, &mask, 0.10).unwrap();
        assert_eq!(img.get(0, 0), ERROR_MAP_BACKGROUND);
        // t = 0.5: round(240 + 15*0.5), round(240 - 240*0.5) per channel.
        assert_eq!(img.get(1, 0), [248, 120, 120]);
        assert_eq!(img.get(2, 0), ERROR_MAP_FOREGROUND);
    }

    #[test]
    fn error_map_backgrounds_unmasked_and_invalid_pixels() {
        let gt = DepthMap::from_vec(2, 1, vec![0.0, 1.0]).unwrap();
        let pred = DepthMap::from_vec(2, 1, vec![2.0, 2.0]).unwrap();
        let masked_out = BinaryMask::from_vec(2, 1, vec![1, 0]).unwrap();
        let img = error_map(&pred, &gt, &masked_out, 0.10).unwrap();
        assert_eq!(img.get(0, 0), ERROR_MAP_BACKGROUND);
        assert_eq!(img.get(1, 0), ERROR_MAP_BACKGROUND);
        assert!(error_map(&pred, &gt, &masked_out, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn metric_invariants_hold_on_random_frames(
            seedp in proptest::collection::vec(0.0f64..3.0, 36),
            seedg in proptest::collection::vec(0.1f64..3.0, 36),
            maskbits in proptest::collection::vec(proptest::bool::ANY, 36),
        ) {
            let pred = DepthMap::from_vec(6, 6, seedp).unwrap();
            let gt = DepthMap::from_vec(6, 6, seedg).unwrap();
            let mask = BinaryMask::from_vec(
                6, 6, maskbits.iter().map(|b| *b as u8).collect()
            ).unwrap();
            if let Ok(r) = evaluate(&pred, &gt, &mask) {
                prop_assert!(r.rmse >= r.mae - 1e-12);
                prop_assert!(r.sigma_105 <= r.sigma_110 + 1e-12);
                prop_assert!(r.sigma_110 <= r.sigma_125 + 1e-12);
                prop_assert!(r.rmse >= 0.0 && r.rel >= 0.0 && r.mae >= 0.0);
                prop_assert!((0.0..=100.0).contains(&r.sigma_125));
            }
        }

        #[test]
        fn sigma_rmse_mae_are_swap_symmetric(
            a in proptest::collection::vec(0.1f64..3.0, 16),
            b in proptest::collection::vec(0.1f64..3.0, 16),
        ) {
            let pa = DepthMap::from_vec(4, 4, a).unwrap();
            let pb = DepthMap::from_vec(4, 4, b).unwrap();
            let mask = BinaryMask::ones(4, 4).unwrap();
            let fwd = evaluate(&pa, &pb, &mask).unwrap();
            let rev = evaluate(&pb, &pa, &mask).unwrap();
            prop_assert_eq!(fwd.sigma_105, rev.sigma_105);
            prop_assert_eq!(fwd.sigma_110, rev.sigma_110);
            prop_assert_eq!(fwd.sigma_125, rev.sigma_125);
            prop_assert!((fwd.rmse - rev.rmse).abs() < 1e-12);
            prop_assert!((fwd.mae - rev.mae).abs() < 1e-12);
        }
    }
}
