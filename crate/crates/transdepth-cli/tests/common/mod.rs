//! Fixtures and independent oracles shared by the CLI and acceptance
//! suites.
#![allow(dead_code)] // each test target uses its own subset

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use transdepth::io::{
    save_depth, save_mask, save_rgb, write_camera_config, CameraConfig, CAMERA_CONFIG_FILE,
};
use transdepth::raster::{BinaryMask, CameraIntrinsics, DepthMap, RgbImage};

pub const BIN: &str = env!("CARGO_BIN_EXE_transdepth");

/// Depth quantization used by every fixture (units per meter).
pub const FIXTURE_DEPTH_SCALE: f64 = 4000.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs the CLI with a scrubbed environment; returns (exit code, stdout,
/// stderr).
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    run_cli_env(args, &[])
}

pub fn run_cli_env(args: &[&str], envs: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("TRANSDEPTH_JOBS");
    for (key, value) in envs {
        cmd.env(key, value);
    }
    let out = cmd.output().expect("failed to spawn the transdepth binary");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Window-minimum erosion: a pixel survives iff every pixel of the
/// centered element window is 1 and inside the image. Deliberately naive.
pub fn erode_brute(mask: &BinaryMask, element: (usize, usize)) -> BinaryMask {
    let (w, h) = mask.dims();
    let (rx, ry) = ((element.0 / 2) as isize, (element.1 / 2) as isize);
    BinaryMask::from_fn(w, h, |x, y| {
        for dy in -ry..=ry {
            for dx in -rx..=rx {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    return false;
                }
                if !mask.is_set(nx as usize, ny as usize) {
                    return false;
                }
            }
        }
        true
    })
    .unwrap()
}

pub fn erode_brute_iterated(
    mask: &BinaryMask,
    element: (usize, usize),
    iterations: usize,
) -> BinaryMask {
    let mut m = mask.clone();
    for _ in 0..iterations {
        m = erode_brute(&m, element);
    }
    m
}

/// Chebyshev distance from each pixel to the nearest zero, where
/// everything outside the image counts as zero. In-image distances come
/// from an 8-connected multi-source BFS (one diagonal-allowed step is
/// exactly one unit of the metric); the border term has a closed form.
pub fn chebyshev_to_zero(mask: &BinaryMask) -> Vec<u32> {
    let (w, h) = mask.dims();
    let mut dist = vec![u32::MAX; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.is_set(x, y) {
                dist[y * w + x] = 0;
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let next = dist[y * w + x] + 1;
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let ni = ny as usize * w + nx as usize;
                if dist[ni] > next {
                    dist[ni] = next;
                    queue.push_back((nx as usize, ny as usize));
                }
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            let border = (x + 1).min(y + 1).min(w - x).min(h - y) as u32;
            let i = y * w + x;
            dist[i] = dist[i].min(border);
        }
    }
    dist
}

/// Mask of a few random filled rectangles; can touch the border.
pub fn random_blob_mask(r: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryMask {
    let mut bits = vec![0u8; w * h];
    for _ in 0..r.gen_range(1..=3) {
        let bw = r.gen_range(2..=(w / 2).max(2));
        let bh = r.gen_range(2..=(h / 2).max(2));
        let x0 = r.gen_range(0..=w - bw);
        let y0 = r.gen_range(0..=h - bh);
        for y in y0..y0 + bh {
            bits[y * w + x0..y * w + x0 + bw].fill(1);
        }
    }
    BinaryMask::from_vec(w, h, bits).unwrap()
}

/// Independent and identically distributed bits, 1 with probability `p`.
pub fn random_bit_mask(r: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| r.gen_bool(p)).unwrap()
}

pub fn random_rgb(r: &mut ChaCha8Rng, w: usize, h: usize) -> RgbImage {
    RgbImage::from_vec(w, h, (0..w * h * 3).map(|_| r.gen()).collect()).unwrap()
}

/// Smooth curved depth field (sinusoidal dome plus a gentle slope) with a
/// sprinkling of zero-depth sensor dropouts.
pub fn curved_depth(r: &mut ChaCha8Rng, w: usize, h: usize, dropouts: usize) -> DepthMap {
    let px = r.gen_range(1.0..3.0);
    let py = r.gen_range(1.0..3.0);
    let amp = r.gen_range(0.1..0.3);
    let mut values: Vec<f64> = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            1.2 + amp * (px * PI * u).sin() * (py * PI * v).cos() + 0.2 * u
        })
        .collect();
    for _ in 0..dropouts {
        values[r.gen_range(0..w * h)] = 0.0;
    }
    DepthMap::from_vec(w, h, values).unwrap()
}

pub struct FixtureSpec {
    pub scenes: usize,
    pub frames_per_scene: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn small() -> Self {
        Self {
            scenes: 1,
            frames_per_scene: 3,
            width: 48,
            height: 40,
            seed: 11,
        }
    }
}

/// Writes a dataset tree the scanner accepts: camera.cfg at the root,
/// scene_*/frame_* directories holding rgb.png, depth.png, one
/// transparent and two non-transparent instance masks.
pub fn write_fixture_dataset(root: &Path, spec: &FixtureSpec) -> CameraConfig {
    let k = CameraIntrinsics::new(
        180.0,
        180.0,
        spec.width as f64 / 2.0,
        spec.height as f64 / 2.0,
    )
    .unwrap();
    let cfg = CameraConfig::new(k, FIXTURE_DEPTH_SCALE).unwrap();
    write_camera_config(&root.join(CAMERA_CONFIG_FILE), &cfg).unwrap();
    let mut r = rng(spec.seed);
    for s in 0..spec.scenes {
        for f in 0..spec.frames_per_scene {
            let dir = root
                .join(format!("scene_{s:03}"))
                .join(format!("frame_{f:04}"));
            std::fs::create_dir_all(&dir).unwrap();
            write_fixture_frame(&dir, spec.width, spec.height, &mut r);
        }
    }
    cfg
}

pub fn write_fixture_frame(dir: &Path, w: usize, h: usize, r: &mut ChaCha8Rng) {
    let depth = curved_depth(r, w, h, w * h / 50);
    save_rgb(&dir.join("rgb.png"), &random_rgb(r, w, h)).unwrap();
    save_depth(&dir.join("depth.png"), &depth, FIXTURE_DEPTH_SCALE).unwrap();
    save_mask(&dir.join("mask_trans_000.png"), &random_blob_mask(r, w, h)).unwrap();
    save_mask(&dir.join("mask_nontrans_000.png"), &random_blob_mask(r, w, h)).unwrap();
    save_mask(&dir.join("mask_nontrans_001.png"), &random_blob_mask(r, w, h)).unwrap();
}

/// SHA-256 over every file under `root` in sorted relative-path order,
/// each path mixed in before its bytes.
pub fn tree_digest(root: &Path) -> String {
    fn walk(dir: &Path, files: &mut Vec<PathBuf>) {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(&path, files);
            } else {
                files.push(path);
            }
        }
    }
    let mut files = Vec::new();
    walk(root, &mut files);
    files.sort();
    let mut hasher = Sha256::new();
    for path in files {
        let rel = path.strip_prefix(root).unwrap();
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update([0u8]);
        hasher.update(std::fs::read(&path).unwrap());
    }
    format!("{:x}", hasher.finalize())
}
