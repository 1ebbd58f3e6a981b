//! Classical depth completion by harmonic (diffusion) inpainting.
//!
//! Fill pixels are seeded by breadth-first nearest-valid propagation, then
//! relaxed by Jacobi sweeps of 4-neighbor averaging. Jacobi (rather than
//! in-place Gauss-Seidel) keeps every sweep a pure function of the previous
//! state, so row-parallel execution is bit-identical to sequential.
//!
//! Every averaged value stays inside the [min, max] of the valid depths on
//! its component's boundary, which is the property the tests pin down.

use std::collections::VecDeque;

use crate::error::{check_dims, Error, Result};
use crate::par;
use crate::raster::{BinaryMask, DepthMap};

/// Convergence controls for [`complete_depth`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletionOptions {
    /// Iteration cap; completion stops here even without convergence.
    pub iterations: usize,
    /// Stop once no fill pixel moved by more than this (meters).
    pub tol: f64,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            tol: 1e-5,
        }
    }
}

impl CompletionOptions {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iteration cap must be > 0".to_string()));
        }
        if !self.tol.is_finite() || self.tol < 0.0 {
            return Err(Error::Config(format!(
                "tol must be finite and >= 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Completed depth plus convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub depth: DepthMap,
    /// Jacobi sweeps actually executed.
    pub iterations_run: usize,
    /// Largest per-pixel change of the final sweep (0 when no sweep ran).
    pub max_update: f64,
    /// Whether the tolerance was reached before the iteration cap.
    pub converged: bool,
    /// Fill pixels left at 0 because their connected component touches no
    /// valid depth anywhere.
    pub unfilled: usize,
}

/// Seeds every reachable fill pixel with the depth of its nearest valid
/// pixel (breadth-first over the 4-neighborhood, through the fill region).
/// Returns the seeded map and the count of unreachable fill pixels.
pub fn nearest_valid_fill(
    masked: &DepthMap,
    fill_region: &BinaryMask,
) -> Result<(DepthMap, usize)> {
    let (values, _, unfilled) = seed_fill(masked, fill_region)?;
    let (w, h) = masked.dims();
    Ok((DepthMap::from_vec_unchecked(w, h, values), unfilled))
}

/// Fills `fill_region` by iterative 4-neighbor harmonic averaging seeded by
/// [`nearest_valid_fill`]. Pixels outside the region are returned
/// unchanged. Components of the region with no valid boundary pixel are
/// left at 0 and counted in [`CompletionResult::unfilled`].
pub fn complete_depth(
    masked: &DepthMap,
    fill_region: &BinaryMask,
    opts: &CompletionOptions,
) -> Result<CompletionResult> {
    opts.validate()?;
    let (mut cur, active, unfilled) = seed_fill(masked, fill_region)?;
    let (w, h) = masked.dims();

    if active.iter().all(|a| *a == 0) {
        return Ok(CompletionResult {
            depth: DepthMap::from_vec_unchecked(w, h, cur),
            iterations_run: 0,
            max_update: 0.0,
            converged: true,
            unfilled,
        });
    }

    let fixed: Vec<u8> = masked.as_slice().iter().map(|d| (*d > 0.0) as u8).collect();
    let mut next = cur.clone();
    let mut iterations_run = 0usize;
    let mut max_update = f64::INFINITY;
    let mut converged = false;

    for _ in 0..opts.iterations {
        // Sweep: each active pixel becomes the mean of its participating
        // neighbors (fixed depths and active fill pixels) from `cur`.
        {
            let cur = &cur;
            let fixed = &fixed;
            let active = &active;
            par::for_each_row_mut(&mut next, w, |y, row| {
                for (x, out) in row.iter_mut().enumerate() {
                    let i = y * w + x;
                    if active[i] == 0 {
                        continue;
                    }
                    let mut sum = 0.0f64;
                    let mut n = 0u32;
                    if x > 0 && (fixed[i - 1] | active[i - 1]) == 1 {
                        sum += cur[i - 1];
                        n += 1;
                    }
                    if x + 1 < w && (fixed[i + 1] | active[i + 1]) == 1 {
                        sum += cur[i + 1];
                        n += 1;
                    }
                    if y > 0 && (fixed[i - w] | active[i - w]) == 1 {
                        sum += cur[i - w];
                        n += 1;
                    }
                    if y + 1 < h && (fixed[i + w] | active[i + w]) == 1 {
                        sum += cur[i + w];
                        n += 1;
                    }
                    // Reachable pixels always have a participating neighbor:
                    // their BFS parent.
                    *out = sum / n as f64;
                }
            });
        }
        iterations_run += 1;

        let row_max = par::indexed_map(h, |y| {
            let mut m = 0.0f64;
            for x in 0..w {
                let i = y * w + x;
                if active[i] == 1 {
                    m = m.max((next[i] - cur[i]).abs());
                }
            }
            m
        });
        max_update = row_max.into_iter().fold(0.0f64, f64::max);

        std::mem::swap(&mut cur, &mut next);
        if max_update < opts.tol {
            converged = true;
            break;
        }
    }

    Ok(CompletionResult {
        depth: DepthMap::from_vec_unchecked(w, h, cur),
        iterations_run,
        max_update,
        converged,
        unfilled,
    })
}

/// Validates inputs and runs the seeding BFS. Returns the seeded values,
/// the active-fill bitmap (reachable fill pixels), and the unreachable
/// fill-pixel count.
fn seed_fill(
    masked: &DepthMap,
    fill_region: &BinaryMask,
) -> Result<(Vec<f64>, Vec<u8>, usize)> {
    check_dims("complete_depth fill region", masked.dims(), fill_region.dims())?;
    let (w, h) = masked.dims();
    let src = masked.as_slice();
    let fill = fill_region.as_slice();

    for i in 0..w * h {
        if fill[i] == 1 && src[i] > 0.0 {
            return Err(Error::InvalidValue(format!(
                "fill region covers a valid depth pixel at ({}, {})",
                i % w,
                i / w
            )));
        }
    }

    let mut values = src.to_vec();
    let mut active = vec![0u8; w * h];
    // Multi-source BFS from all valid pixels, expanding only into the fill
    // region. Seeding in row-major order keeps the result deterministic.
    let mut queue = VecDeque::new();
    for (i, d) in src.iter().enumerate() {
        if *d > 0.0 {
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        let v = values[i];
        let mut visit = |j: usize| {
            if fill[j] == 1 && active[j] == 0 {
                active[j] = 1;
                values[j] = v;
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < w {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - w);
        }
        if y + 1 < h {
            visit(i + w);
        }
    }

    let unfilled = (0..w * h).filter(|i| fill[*i] == 1 && active[*i] == 0).count();
    Ok((values, active, unfilled))
}
