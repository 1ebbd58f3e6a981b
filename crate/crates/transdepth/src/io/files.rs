//! Raster file I/O.
//!
//! Depth is stored as 16-bit single-channel PNG in `depth_scale` units per
//! meter (0 = invalid). Masks are 8-bit single-channel, written as 0/255
//! and binarized at 128 on load. RGB is 8-bit three-channel.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, DepthMap, RgbImage};

fn open_image(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    })
}

fn save_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    }
}

/// Loads a 16-bit single-channel PNG as meters: `value_on_disk / scale`,
/// with 0 staying 0 (invalid). Any other pixel format is a format error.
pub fn load_depth(path: &Path, scale: f64) -> Result<DepthMap> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::Config(format!(
            "depth scale must be positive and finite, got {scale}"
        )));
    }
    match open_image(path)? {
        DynamicImage::ImageLuma16(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            let data = img.into_raw().iter().map(|v| *v as f64 / scale).collect();
            DepthMap::from_vec(w, h, data)
        }
        other => Err(Error::format(
            path,
            format!(
                "expected 16-bit single-channel depth, got {:?}",
                other.color()
            ),
        )),
    }
}

/// Writes depth as 16-bit single-channel PNG, rounding `d * scale` to the
/// nearest unit and saturating at u16::MAX. Depths below half a quantum
/// round to 0 and become invalid on disk.
pub fn save_depth(path: &Path, depth: &DepthMap, scale: f64) -> Result<()> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::Config(format!(
            "depth scale must be positive and finite, got {scale}"
        )));
    }
    let (w, h) = depth.dims();
    let data: Vec<u16> = depth
        .as_slice()
        .iter()
        .map(|d| (d * scale).round().min(u16::MAX as f64) as u16)
        .collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(w as u32, h as u32, data)
            .ok_or_else(|| Error::Internal("depth buffer size mismatch".to_string()))?;
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| save_error(path, e))
}

/// Loads an 8-bit single-channel PNG as a binary mask: values >= 128 are 1.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    match open_image(path)? {
        DynamicImage::ImageLuma8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            let data = img.into_raw().iter().map(|v| (*v >= 128) as u8).collect();
            BinaryMask::from_vec(w, h, data)
        }
        other => Err(Error::format(
            path,
            format!(
                "expected 8-bit single-channel mask, got {:?}",
                other.color()
            ),
        )),
    }
}

/// Writes a binary mask as 8-bit single-channel PNG with values 0/255.
pub fn save_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let (w, h) = mask.dims();
    let data: Vec<u8> = mask.as_slice().iter().map(|b| b * 255).collect();
    let img: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(w as u32, h as u32, data)
        .ok_or_else(|| Error::Internal("mask buffer size mismatch".to_string()))?;
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| save_error(path, e))
}

/// Loads an 8-bit three-channel PNG.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    match open_image(path)? {
        DynamicImage::ImageRgb8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            RgbImage::from_vec(w, h, img.into_raw())
        }
        other => Err(Error::format(
            path,
            format!("expected 8-bit RGB, got {:?}", other.color()),
        )),
    }
}

/// Writes an RGB image as 8-bit three-channel PNG.
pub fn save_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    let (w, h) = img.dims();
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(w as u32, h as u32, img.as_slice().to_vec())
            .ok_or_else(|| Error::Internal("rgb buffer size mismatch".to_string()))?;
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| save_error(path, e))
}
