//! Binary morphological erosion with rectangular structuring elements.
//!
//! A pixel survives erosion iff every pixel of the element-shaped window
//! centered on it is 1; windows that extend past the image border treat
//! the out-of-bounds pixels as 0, so objects touching the frame edge lose
//! their border ring like any other object.
//!
//! Rectangular erosion is separable: a full pass is a horizontal min
//! filter followed by a vertical min filter. The horizontal filter is a
//! two-sweep nearest-zero scan (O(width) per row), the vertical filter an
//! AND across the window rows. Both run row-parallel.

use crate::error::{Error, Result};
use crate::par;
use crate::raster::BinaryMask;

/// Erodes `mask` with a `(width, height)` rectangular element, `iterations`
/// times. Element dimensions must be odd; zero iterations returns the
/// input unchanged.
pub fn erode(mask: &BinaryMask, element: (usize, usize), iterations: usize) -> Result<BinaryMask> {
    let (ew, eh) = element;
    if ew == 0 || eh == 0 || ew % 2 == 0 || eh % 2 == 0 {
        return Err(Error::Config(format!(
            "erosion element must have odd positive dimensions, got {ew}x{eh}"
        )));
    }
    if iterations == 0 {
        return Ok(mask.clone());
    }
    let (w, h) = mask.dims();
    let (rx, ry) = (ew / 2, eh / 2);
    let mut cur = mask.as_slice().to_vec();
    let mut horiz = vec![0u8; cur.len()];
    for _ in 0..iterations {
        erode_rows(&cur, &mut horiz, w, rx);
        erode_cols(&horiz, &mut cur, w, h, ry);
    }
    Ok(BinaryMask::from_vec_unchecked(w, h, cur))
}

/// Horizontal min filter: a pixel survives iff the nearest 0 in its row
/// (counting virtual zeros just outside both ends) is farther than
/// `radius`.
fn erode_rows(src: &[u8], dst: &mut [u8], width: usize, radius: usize) {
    let r = radius as isize;
    par::for_each_row_mut(dst, width, |y, out| {
        let row = &src[y * width..(y + 1) * width];
        let mut last_zero: isize = -1;
        for (x, (o, v)) in out.iter_mut().zip(row).enumerate() {
            if *v == 0 {
                last_zero = x as isize;
            }
            *o = (x as isize - last_zero > r) as u8;
        }
        let mut next_zero: isize = width as isize;
        for (x, (o, v)) in out.iter_mut().zip(row).enumerate().rev() {
            if *v == 0 {
                next_zero = x as isize;
            }
            if next_zero - x as isize <= r {
                *o = 0;
            }
        }
    });
}

/// Vertical min filter: AND of the window rows; rows whose window leaves
/// the image are zeroed outright.
fn erode_cols(src: &[u8], dst: &mut [u8], width: usize, height: usize, radius: usize) {
    par::for_each_row_mut(dst, width, |y, out| {
        if y < radius || y + radius >= height {
            out.fill(0);
            return;
        }
        let top = y - radius;
        out.copy_from_slice(&src[top * width..(top + 1) * width]);
        for wy in top + 1..=y + radius {
            let row = &src[wy * width..(wy + 1) * width];
            for (o, v) in out.iter_mut().zip(row) {
                *o &= *v;
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct window check at every pixel; quadratic, used only as the
    /// oracle for the fast implementation.
    fn brute_erode(mask: &BinaryMask, element: (usize, usize), iterations: usize) -> BinaryMask {
        let (w, h) = mask.dims();
        let (rx, ry) = (element.0 / 2, element.1 / 2);
        let mut cur = mask.clone();
        for _ in 0..iterations {
            let mut next = vec![0u8; w * h];
            for y in 0..h {
                for x in 0..w {
                    let mut all_one = true;
                    'window: for dy in -(ry as isize)..=ry as isize {
                        for dx in -(rx as isize)..=rx as isize {
                            let (nx, ny) = (x as isize + dx, y as isize + dy);
                            let inside =
                                nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h;
                            if !inside || !cur.is_set(nx as usize, ny as usize) {
                                all_one = false;
                                break 'window;
                            }
                        }
                    }
                    next[y * w + x] = all_one as u8;
                }
            }
            cur = BinaryMask::from_vec(w, h, next).unwrap();
        }
        cur
    }

    fn random_mask(w: usize, h: usize, seed: u64, p_one: f64) -> BinaryMask {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(p_one)).unwrap()
    }

    #[test]
    fn all_ones_7x7_erodes_to_central_3x3() {
        let m = BinaryMask::ones(7, 7).unwrap();
        let got = erode(&m, (5, 5), 1).unwrap();
        let expected = brute_erode(&m, (5, 5), 1);
        assert_eq!(got, expected);
        // The survivors are exactly the central 3x3 block.
        for y in 0..7 {
            for x in 0..7 {
                let inside = (2..5).contains(&x) && (2..5).contains(&y);
                assert_eq!(got.is_set(x, y), inside, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn zero_iterations_is_identity() {
        let m = random_mask(13, 9, 7, 0.6);
        assert_eq!(erode(&m, (5, 5), 0).unwrap(), m);
    }

    #[test]
    fn element_larger_than_image_erases_everything() {
        let m = BinaryMask::ones(4, 4).unwrap();
        let got = erode(&m, (5, 5), 1).unwrap();
        assert_eq!(got, BinaryMask::zeros(4, 4).unwrap());
        assert_eq!(got, brute_erode(&m, (5, 5), 1));
    }

    #[test]
    fn even_element_rejected() {
        let m = BinaryMask::ones(4, 4).unwrap();
        assert!(matches!(erode(&m, (4, 5), 1), Err(Error::Config(_))));
        assert!(matches!(erode(&m, (3, 0), 1), Err(Error::Config(_))));
    }

    #[test]
    fn unit_element_is_identity() {
        let m = random_mask(17, 11, 3, 0.5);
        assert_eq!(erode(&m, (1, 1), 4).unwrap(), m);
    }

    #[test]
    fn asymmetric_elements_match_brute_force() {
        for seed in 0..8 {
            let m = random_mask(21, 14, seed, 0.75);
            for element in [(1, 5), (7, 3), (3, 3)] {
                for iters in 1..=2 {
                    assert_eq!(
                        erode(&m, element, iters).unwrap(),
                        brute_erode(&m, element, iters),
                        "seed={seed} element={element:?} iters={iters}"
                    );
                }
            }
        }
    }

    #[test]
    fn object_touching_border_loses_its_edge_ring() {
        // 6x6 block flush with the top-left corner of a 10x10 frame.
        let m = BinaryMask::from_fn(10, 10, |x, y| x < 6 && y < 6).unwrap();
        let got = erode(&m, (3, 3), 1).unwrap();
        // Survivors shrink on all four sides, including the image border.
        for y in 0..10 {
            for x in 0..10 {
                let inside = (1..5).contains(&x) && (1..5).contains(&y);
                assert_eq!(got.is_set(x, y), inside, "pixel ({x},{y})");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_mask(max_w: usize, max_h: usize) -> impl Strategy<Value = BinaryMask> {
            (1..=max_w, 1..=max_h).prop_flat_map(|(w, h)| {
                prop::collection::vec(0u8..=1, w * h)
                    .prop_map(move |data| BinaryMask::from_vec(w, h, data).unwrap())
            })
        }

        proptest! {
            #[test]
            fn matches_brute_force(mask in arb_mask(24, 24), iters in 1usize..=2) {
                prop_assert_eq!(
                    erode(&mask, (3, 3), iters).unwrap(),
                    brute_erode(&mask, (3, 3), iters)
                );
            }

            #[test]
            fn monotone_in_the_mask(mask in arb_mask(20, 20)) {
                // Superset built by turning on one extra random-ish pixel row.
                let (w, h) = mask.dims();
                let sup = BinaryMask::from_fn(w, h, |x, y| mask.is_set(x, y) || y == h / 2).unwrap();
                let e_sub = erode(&mask, (3, 3), 1).unwrap();
                let e_sup = erode(&sup, (3, 3), 1).unwrap();
                prop_assert!(e_sub.is_subset_of(&e_sup));
            }

            #[test]
            fn output_never_grows(mask in arb_mask(20, 20), iters in 0usize..=3) {
                let eroded = erode(&mask, (5, 5), iters).unwrap();
                prop_assert!(eroded.is_subset_of(&mask));
            }
        }
    }
}
