//! Back-projection and surface normals from depth.
//!
//! Normals use the smallest stencil that stays well defined next to depth
//! holes: central differences over the 4-neighborhood of the back-projected
//! point map. A pixel's normal is valid only when the pixel and all four
//! neighbors carry depth and lie inside the image. Normals are oriented
//! toward the camera (z <= 0) so cosine comparisons between two maps with
//! the same convention are meaningful.

use crate::error::{check_dims, Result};
use crate::par;
use crate::raster::{CameraIntrinsics, DepthMap, NormalMap};

/// Per-pixel 3D points in camera coordinates with a validity bit; invalid
/// wherever the source depth is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    width: usize,
    height: usize,
    points: Vec<[f64; 3]>,
    valid: Vec<u8>,
}

impl PointMap {
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
        (self.valid[i] == 1).then(|| self.points[i])
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn validity(&self) -> &[u8] {
        &self.valid
    }
}

/// Per-pixel scalar field with validity, e.g. a cosine-similarity map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<u8>,
}

impl ScalarMap {
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

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let i = y * self.width + x;
        (self.valid[i] == 1).then(|| self.values[i])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn validity(&self) -> &[u8] {
        &self.valid
    }
}

/// Back-projects a depth map through the pinhole model: a valid pixel
/// (u, v) with depth z maps to ((u-cx)/fx*z, (v-cy)/fy*z, z).
pub fn backproject(depth: &DepthMap, k: &CameraIntrinsics) -> PointMap {
    let (w, h) = depth.dims();
    let src = depth.as_slice();
    let mut points = vec![[0.0f64; 3]; w * h];
    let mut valid = vec![0u8; w * h];

    par::for_each_row_mut(&mut points, w, |y, row| {
        for (x, p) in row.iter_mut().enumerate() {
            let z = src[y * w + x];
            if z > 0.0 {
                *p = [
                    (x as f64 - k.cx) / k.fx * z,
                    (y as f64 - k.cy) / k.fy * z,
                    z,
                ];
            }
        }
    });
    par::for_each_row_mut(&mut valid, w, |y, row| {
        for (x, v) in row.iter_mut().enumerate() {
            *v = (src[y * w + x] > 0.0) as u8;
        }
    });

    PointMap {
        width: w,
        height: h,
        points,
        valid,
    }
}

/// Estimates per-pixel surface normals from depth: the normalized cross
/// product of the central-difference tangents of the back-projected point
/// map, flipped so z <= 0. Pixels with a missing or out-of-image
/// 4-neighbor, and pixels with a degenerate (zero-norm) cross product,
/// are invalid.
pub fn normals_from_depth(depth: &DepthMap, k: &CameraIntrinsics) -> NormalMap {
    let points = backproject(depth, k);
    let (w, h) = depth.dims();
    let pts = points.points();
    let pv = points.validity();

    let mut normals = vec![[0.0f64; 3]; w * h];
    let mut valid = vec![0u8; w * h];

    par::for_each_row_mut(&mut normals, w, |y, row| {
        if y == 0 || y + 1 >= h {
            return;
        }
        for (x, n) in row.iter_mut().enumerate() {
            if x == 0 || x + 1 >= w {
                continue;
            }
            let i = y * w + x;
            let all_valid = pv[i] == 1
                && pv[i - 1] == 1
                && pv[i + 1] == 1
                && pv[i - w] == 1
                && pv[i + w] == 1;
            if !all_valid {
                continue;
            }
            let tx = sub(pts[i + 1], pts[i - 1]);
            let ty = sub(pts[i + w], pts[i - w]);
            let cr = cross(tx, ty);
            let norm = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
            if norm == 0.0 || !norm.is_finite() {
                continue;
            }
            let mut unit = [cr[0] / norm, cr[1] / norm, cr[2] / norm];
            if unit[2] > 0.0 {
                unit = [-unit[0], -unit[1], -unit[2]];
            }
            *n = unit;
        }
    });
    par::for_each_row_mut(&mut valid, w, |y, row| {
        for (x, v) in row.iter_mut().enumerate() {
            let n = normals[y * w + x];
            *v = (n != [0.0, 0.0, 0.0]) as u8;
        }
    });

    NormalMap::from_parts_unchecked(w, h, normals, valid)
}

/// Per-pixel cosine similarity (dot product of unit normals, clamped to
/// [-1, 1]); valid only where both inputs are valid.
pub fn normal_cosine_map(a: &NormalMap, b: &NormalMap) -> Result<ScalarMap> {
    check_dims("normal_cosine_map", a.dims(), b.dims())?;
    let (w, h) = a.dims();
    let (an, av) = (a.normals(), a.validity());
    let (bn, bv) = (b.normals(), b.validity());

    let mut values = vec![0.0f64; w * h];
    let mut valid = vec![0u8; w * h];
    par::for_each_row_mut(&mut values, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let i = y * w + x;
            if av[i] == 1 && bv[i] == 1 {
                let (u, v) = (an[i], bn[i]);
                *out = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
            }
        }
    });
    par::for_each_row_mut(&mut valid, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let i = y * w + x;
            *out = (av[i] == 1 && bv[i] == 1) as u8;
        }
    });

    Ok(ScalarMap {
        width: w,
        height: h,
        values,
        valid,
    })
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
