//! Translational motion compensation and multi-hypothesis blending.

pub mod compound;
pub mod filters;
pub mod obmc;

use crate::frame::{MotionVector, Plane};
pub use compound::{blend_compound, CompoundMask};
pub use filters::FilterKind;

/// Fractional bits of filter taps.
pub const FILTER_BITS: u32 = 7;
/// Extra precision kept between the horizontal and vertical passes.
pub const INTER_EXTRA_BITS: u32 = 3;
/// Rounding shift of the horizontal pass.
pub const ROUND_H: u32 = FILTER_BITS - INTER_EXTRA_BITS;
/// Rounding shift of the vertical pass.
pub const ROUND_V: u32 = FILTER_BITS + INTER_EXTRA_BITS;

/// Independent filter choice per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct InterpFilters {
    pub h: FilterKind,
    pub v: FilterKind,
}

impl InterpFilters {
    pub fn both(k: FilterKind) -> Self {
        InterpFilters { h: k, v: k }
    }
}

/// `(x + 2^(s-1)) >> s` with an arithmetic shift.
#[inline]
pub fn round2(x: i64, s: u32) -> i64 {
    if s == 0 {
        x
    } else {
        (x + (1 << (s - 1))) >> s
    }
}

/// Top-left position of the displaced block in 1/16 samples of `plane`.
/// Vectors are 1/8 luma sample, i.e. 1/16 chroma sample under 2x subsampling.
pub fn subpel_position(plane: &Plane, x: usize, y: usize, mv: MotionVector) -> (i64, i64) {
    let px = ((x as i64) << 4) + ((mv.col as i64 * 2) >> plane.ss_x);
    let py = ((y as i64) << 4) + ((mv.row as i64 * 2) >> plane.ss_y);
    (px, py)
}

/// Separable interpolation of a `w`x`h` block whose top-left sample sits at
/// `(px, py)` in 1/16 units. The horizontal pass runs over the `h + 7` rows
/// the vertical taps need and keeps [`INTER_EXTRA_BITS`] extra bits; the
/// vertical pass rounds back to sample precision and clips. Reference
/// samples outside the plane replicate the nearest edge.
pub fn interp_q4(plane: &Plane, px: i64, py: i64, w: usize, h: usize, filters: InterpFilters) -> Vec<i32> {
    let (ix, fx) = (px >> 4, (px & 15) as usize);
    let (iy, fy) = (py >> 4, (py & 15) as usize);
    let th = filters::taps(filters.h, fx, w <= 4);
    let tv = filters::taps(filters.v, fy, h <= 4);
    let rows = h + 7;
    let mut im = vec![0i64; rows * w];
    for r in 0..rows {
        let sy = (iy + r as i64 - 3) as isize;
        for c in 0..w {
            let sx = ix + c as i64;
            im[r * w + c] = if fx == 0 {
                (plane.get_clamped(sx as isize, sy) as i64) << INTER_EXTRA_BITS
            } else {
                let s: i64 = (0..8).map(|k| th[k] as i64 * plane.get_clamped((sx + k as i64 - 3) as isize, sy) as i64).sum();
                round2(s, ROUND_H)
            };
        }
    }
    let max = plane.max_value() as i64;
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let v = if fy == 0 {
                round2(im[(r + 3) * w + c], INTER_EXTRA_BITS)
            } else {
                let s: i64 = (0..8).map(|k| tv[k] as i64 * im[(r + k) * w + c]).sum();
                round2(s, ROUND_V)
            };
            out.push(v.clamp(0, max) as i32);
        }
    }
    out
}

/// Motion-compensated prediction of the block at `(x, y)` displaced by `mv`.
pub fn interp_subpel(plane: &Plane, x: usize, y: usize, w: usize, h: usize, mv: MotionVector, filters: InterpFilters) -> Vec<i32> {
    let (px, py) = subpel_position(plane, x, y, mv);
    interp_q4(plane, px, py, w, h, filters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_phase_sums_to_128_and_mirrors() {
        for short in [false, true] {
            for k in FilterKind::ALL {
                for p in 0..16 {
                    let t = filters::taps(k, p, short);
                    assert_eq!(t.iter().sum::<i32>(), 128, "{k:?} {p} short={short}");
                    if p > 0 {
                        let mut m = *filters::taps(k, 16 - p, short);
                        m.reverse();
                        assert_eq!(&m, t);
                    }
                }
            }
        }
    }

    #[test]
    fn half_rows_are_normative() {
        assert_eq!(filters::taps(FilterKind::Regular, 8, false), &[0, 2, -14, 76, 76, -14, 2, 0]);
        assert_eq!(filters::taps(FilterKind::Smooth, 8, false), &[0, -2, 14, 52, 52, 14, -2, 0]);
        assert_eq!(filters::taps(FilterKind::Sharp, 8, false), &filters::HALF_SHARP);
        assert_eq!(filters::taps(FilterKind::Smooth, 8, true), &[0, 0, 12, 52, 52, 12, 0, 0]);
        assert_eq!(filters::taps(FilterKind::Regular, 8, true), &[0, 0, -12, 76, 76, -12, 0, 0]);
        assert_eq!(filters::taps(FilterKind::Sharp, 8, true), filters::taps(FilterKind::Regular, 8, true));
    }

    #[test]
    fn frozen_tables_match_designs() {
        use filters::*;
        let cases: [(&[[i32; 8]; 16], Design, &[i32]); 5] = [
            (&SMOOTH, DESIGN_SMOOTH, &HALF_SMOOTH),
            (&REGULAR, DESIGN_REGULAR, &HALF_REGULAR),
            (&SHARP, DESIGN_SHARP, &HALF_SHARP),
            (&SMOOTH_4, DESIGN_SMOOTH_4, &HALF_SMOOTH_4),
            (&REGULAR_4, DESIGN_REGULAR_4, &HALF_REGULAR_4),
        ];
        for (table, d, half) in cases {
            assert_eq!(table, &build_table(d, half));
        }
        // Only SHARP's normative half row departs from its design.
        assert_eq!(design_phase(DESIGN_REGULAR, 8), REGULAR[8]);
        assert_eq!(design_phase(DESIGN_SMOOTH, 8), SMOOTH[8]);
        let diff: i32 = design_phase(DESIGN_SHARP, 8).iter().zip(&SHARP[8]).map(|(a, b)| (a - b).abs()).sum();
        assert!(diff <= 8);
    }

    #[test]
    fn zero_vector_copies() {
        let p = Plane::from_vec(8, 8, 8, (0..64).map(|v| (v * 3) as u16).collect()).unwrap();
        for k in FilterKind::ALL {
            assert_eq!(interp_subpel(&p, 2, 1, 4, 4, MotionVector::ZERO, InterpFilters::both(k)), p.block(2, 1, 4, 4));
        }
    }

    #[test]
    fn constant_region_is_preserved() {
        let p = Plane::filled(16, 16, 8, 100).unwrap();
        let pred = interp_subpel(&p, 4, 4, 8, 8, MotionVector::new(0, 4), InterpFilters::both(FilterKind::Regular));
        assert!(pred.iter().all(|&v| v == 100));
    }
}
