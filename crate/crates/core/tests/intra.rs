mod common;

use av1lab::frame::BlockSize;
use av1lab::intra::palette::palette_fit;
use av1lab::intra::recursive::SETS;
use av1lab::intra::{
    predict, predict_directional, projection_step, predict_paeth, predict_recursive_filter, predict_smooth, BaseDirection,
    DirectionalMode, IntraEdges, IntraMode, RecursiveFilterSet, SmoothVariant,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::intra::recursive_oracle;

fn bs(w: usize, h: usize) -> BlockSize {
    BlockSize::new(w, h).unwrap()
}

/// Floating-point projection: follow the prediction direction from the
/// sample to the reference row or column and interpolate linearly.
/// `cot(a)` gives the horizontal run per unit rise for `a` in (0, 90).
fn directional_oracle_with(e: &IntraEdges, angle: f64, w: usize, h: usize, cot: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = w + h;
    // Index -1 is the corner.
    let above = |x: f64| -> f64 {
        let at = |k: i64| if k < 0 { e.top_left as f64 } else { e.above[(k as usize).min(n - 1)] as f64 };
        let f = x.floor();
        let t = x - f;
        at(f as i64) * (1.0 - t) + at(f as i64 + 1) * t
    };
    let left = |y: f64| -> f64 {
        let at = |k: i64| if k < 0 { e.top_left as f64 } else { e.left[(k as usize).min(n - 1)] as f64 };
        let f = y.floor();
        let t = y - f;
        at(f as i64) * (1.0 - t) + at(f as i64 + 1) * t
    };
    let mut out = Vec::new();
    for i in 0..h {
        for j in 0..w {
            let (fi, fj) = (i as f64, j as f64);
            let v = if angle < 90.0 {
                above(fj + (fi + 1.0) * cot(angle))
            } else if angle == 90.0 {
                e.above[j] as f64
            } else if angle < 180.0 {
                let x = fj - (fi + 1.0) * cot(180.0 - angle);
                if x >= -1.0 {
                    above(x)
                } else {
                    left(fi - (fj + 1.0) * cot(angle - 90.0))
                }
            } else if angle == 180.0 {
                e.left[i] as f64
            } else {
                left(fi + (fj + 1.0) * cot(270.0 - angle))
            };
            out.push(v);
        }
    }
    out
}

fn directional_oracle(e: &IntraEdges, angle: f64, w: usize, h: usize) -> Vec<f64> {
    directional_oracle_with(e, angle, w, h, |a| 1.0 / a.to_radians().tan())
}

fn ramp_edges(w: usize, h: usize) -> IntraEdges {
    let above: Vec<u16> = (0..w + h).map(|k| 40 + 9 * k as u16).collect();
    let left: Vec<u16> = (0..w + h).map(|k| 35 + 7 * k as u16).collect();
    IntraEdges::from_samples(w, h, &above, &left, 37, 8).unwrap()
}

#[test]
fn directional_48_degrees_matches_projection() {
    let e = ramp_edges(8, 8);
    let mode = DirectionalMode::new(BaseDirection::D45, 1);
    let got = predict_directional(&e, mode, bs(8, 8)).unwrap();
    let want = directional_oracle(&e, 48.0, 8, 8);
    for (g, w) in got.iter().zip(&want) {
        assert!((*g as f64 - w).abs() <= 1.0, "{g} vs {w}");
    }
}

#[test]
fn base_directions_on_4x4_match_projection() {
    let e = ramp_edges(4, 4);
    for b in BaseDirection::ALL {
        let got = predict_directional(&e, DirectionalMode::new(b, 0), bs(4, 4)).unwrap();
        let want = directional_oracle(&e, b.degrees() as f64, 4, 4);
        for (g, w) in got.iter().zip(&want) {
            assert!((*g as f64 - w).abs() <= 1.0, "{b:?}: {g} vs {w}");
        }
    }
}

#[test]
fn every_angle_tracks_projection_on_ramps() {
    let e = ramp_edges(8, 8);
    for b in BaseDirection::ALL {
        for d in -3..=3 {
            let m = DirectionalMode::new(b, d);
            let got = predict_directional(&e, m, bs(8, 8)).unwrap();
            let want = directional_oracle(&e, m.angle() as f64, 8, 8);
            for (g, w) in got.iter().zip(&want) {
                assert!((*g as f64 - w).abs() <= 1.0, "{m:?}: {g} vs {w}");
            }
        }
    }
}

#[test]
fn every_angle_matches_quantized_slope_projection() {
    // Slopes are held in 1/64 units, so on arbitrary edges the predictor
    // tracks the projection along the quantized slope, not the exact angle.
    let quantized = |a: f64| projection_step(a as i32) as f64 / 64.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let above: Vec<u16> = (0..32).map(|_| rng.gen_range(0..256)).collect();
        let left: Vec<u16> = (0..32).map(|_| rng.gen_range(0..256)).collect();
        let e = IntraEdges::from_samples(16, 16, &above, &left, rng.gen_range(0..256), 8).unwrap();
        for b in BaseDirection::ALL {
            for d in -3..=3 {
                let m = DirectionalMode::new(b, d);
                let got = predict_directional(&e, m, bs(16, 16)).unwrap();
                let want = directional_oracle_with(&e, m.angle() as f64, 16, 16, quantized);
                for (g, w) in got.iter().zip(&want) {
                    assert!((*g as f64 - w).abs() <= 1.0, "{m:?}: {g} vs {w}");
                }
            }
        }
    }
}

#[test]
fn recursive_patches_equal_per_pixel_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (w, h) = [(8, 8), (4, 4), (16, 8), (4, 16), (32, 32)][rng.gen_range(0..5)];
        let depth = [8, 10, 12][rng.gen_range(0..3)];
        let m = 1u16 << depth;
        let above: Vec<u16> = (0..w + h).map(|_| rng.gen_range(0..m)).collect();
        let left: Vec<u16> = (0..w + h).map(|_| rng.gen_range(0..m)).collect();
        let e = IntraEdges::from_samples(w, h, &above, &left, rng.gen_range(0..m), depth).unwrap();
        for (s, &base) in SETS.iter().enumerate() {
            let got = predict_recursive_filter(&e, RecursiveFilterSet::new(s as u8).unwrap(), bs(w, h)).unwrap();
            assert_eq!(got, recursive_oracle(&e, base, w, h), "set {s} {w}x{h}");
        }
    }
}

#[test]
fn smooth_h_moves_from_left_to_top_right() {
    let above = vec![64u16; 16];
    let e = IntraEdges::from_samples(8, 8, &above, &[0; 16], 0, 8).unwrap();
    let p = predict_smooth(&e, SmoothVariant::H, bs(8, 8));
    for r in 0..8 {
        let row = &p[r * 8..r * 8 + 8];
        assert!(row.windows(2).all(|x| x[0] <= x[1]));
        assert!(row[0] < 32 && row[7] > 32);
    }
}

#[test]
fn smooth_is_mean_of_h_and_v() {
    let e = ramp_edges(16, 8);
    let ph = predict_smooth(&e, SmoothVariant::H, bs(16, 8));
    let pv = predict_smooth(&e, SmoothVariant::V, bs(16, 8));
    let p = predict_smooth(&e, SmoothVariant::Both, bs(16, 8));
    for k in 0..p.len() {
        assert_eq!(p[k], (ph[k] + pv[k] + 1) >> 1);
    }
}

#[test]
fn palette_gradient_error_bounded_by_gap() {
    let block: Vec<i32> = (0..64).map(|i| i * 255 / 63).collect();
    let p = palette_fit(&block, 8).unwrap();
    let gap = p.colors.windows(2).map(|c| c[1] as i32 - c[0] as i32).max().unwrap();
    for (v, r) in block.iter().zip(p.reconstruct()) {
        assert!(2 * (v - r).abs() <= gap);
    }
    // Assignment is optimal for the final palette.
    for (v, &i) in block.iter().zip(&p.indices) {
        let best = p.colors.iter().map(|&c| (c as i32 - v).abs()).min().unwrap();
        assert_eq!((p.colors[i as usize] as i32 - v).abs(), best);
    }
}

fn edges_strategy(w: usize, h: usize) -> impl Strategy<Value = (Vec<u16>, Vec<u16>, u16)> {
    (prop::collection::vec(0u16..200, w + h), prop::collection::vec(0u16..200, w + h), 0u16..200)
}

proptest! {
    #[test]
    fn predictors_are_shift_covariant(
        (above, left, tl) in edges_strategy(8, 8),
        shift in 0u16..56,
        mode_ix in 0usize..17,
    ) {
        let size = bs(8, 8);
        let e0 = IntraEdges::from_samples(8, 8, &above, &left, tl, 8).unwrap();
        let up = |v: &Vec<u16>| v.iter().map(|x| x + shift).collect::<Vec<_>>();
        let e1 = IntraEdges::from_samples(8, 8, &up(&above), &up(&left), tl + shift, 8).unwrap();
        let mode = IntraMode::candidates(size)[mode_ix];
        let p0 = predict(&e0, mode, size).unwrap();
        let p1 = predict(&e1, mode, size).unwrap();
        // Extrapolating sets may clip at the range ends, which is not shift covariant.
        prop_assume!(p0.iter().chain(&p1).all(|&v| v > 0 && v < 255));
        for (a, b) in p0.iter().zip(&p1) {
            prop_assert_eq!(a + shift as i32, *b, "{:?}", mode);
        }
    }

    #[test]
    fn smooth_within_reference_range((above, left, tl) in edges_strategy(16, 16), v in 0usize..3) {
        let e = IntraEdges::from_samples(16, 16, &above, &left, tl, 8).unwrap();
        let variant = [SmoothVariant::V, SmoothVariant::H, SmoothVariant::Both][v];
        let refs: Vec<i32> = above[..16].iter().chain(&left[..16]).map(|&x| x as i32).collect();
        let (lo, hi) = (*refs.iter().min().unwrap(), *refs.iter().max().unwrap());
        for p in predict_smooth(&e, variant, bs(16, 16)) {
            prop_assert!(p >= lo && p <= hi);
        }
    }

    #[test]
    fn paeth_picks_a_neighbour((above, left, tl) in edges_strategy(8, 4)) {
        let e = IntraEdges::from_samples(8, 4, &above, &left, tl, 8).unwrap();
        let p = predict_paeth(&e, bs(8, 4));
        for i in 0..4 {
            for j in 0..8 {
                let v = p[i * 8 + j];
                prop_assert!(v == above[j] as i32 || v == left[i] as i32 || v == tl as i32);
            }
        }
    }

    #[test]
    fn constant_edges_give_constant_block(c in 0u16..1024, mode_ix in 0usize..17) {
        let size = bs(16, 16);
        let e = IntraEdges::constant(16, 16, c, 10);
        let mode = IntraMode::candidates(size)[mode_ix];
        prop_assert!(predict(&e, mode, size).unwrap().iter().all(|&v| v == c as i32));
    }
}
