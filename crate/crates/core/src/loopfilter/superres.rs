//! Horizontal-only resampling between a reduced coded width and the output
//! width. Output positions are tracked at 2^-14 sample, with the start
//! offset biased so the accumulated step error is centred on the row.

use crate::error::{invalid, Result};
use crate::frame::Plane;
use crate::inter::filters::SHARP;
use crate::inter::{round2, FILTER_BITS};

pub const SCALE_BITS: u32 = 14;
pub const SCALE_ONE: i64 = 1 << SCALE_BITS;
/// Phase resolution of the interpolation filter.
pub const SUBPEL_BITS: u32 = 4;
/// Numerator of the coded scale `NUMERATOR / denominator`.
pub const NUMERATOR: usize = 8;
pub const DENOMINATORS: std::ops::RangeInclusive<usize> = 9..=16;

fn round_div(num: i64, den: i64) -> i64 {
    (2 * num + den).div_euclid(2 * den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SuperresParams {
    /// Coded width `D`.
    pub downscaled: usize,
    /// Output width `W`.
    pub upscaled: usize,
}

impl SuperresParams {
    /// Accepts `D = W` or `8/16 <= D/W <= 15/16`.
    pub fn new(downscaled: usize, upscaled: usize) -> Result<Self> {
        let (d, w) = (downscaled, upscaled);
        if d == 0 || w == 0 {
            return invalid("super-resolution widths must be positive");
        }
        if d != w && !(16 * d >= 8 * w && 16 * d <= 15 * w) {
            return invalid(format!("scale {d}/{w} outside 8/16..15/16"));
        }
        Ok(SuperresParams { downscaled, upscaled })
    }

    /// Coded width for scale `8 / denom`, rounded to nearest.
    pub fn from_denominator(upscaled: usize, denom: usize) -> Result<Self> {
        if denom == NUMERATOR {
            return Self::new(upscaled, upscaled);
        }
        if !DENOMINATORS.contains(&denom) {
            return invalid(format!("super-resolution denominator {denom}"));
        }
        let d = ((NUMERATOR * upscaled + denom / 2) / denom).max(1);
        Self::new(d, upscaled)
    }

    pub fn is_identity(&self) -> bool {
        self.downscaled == self.upscaled
    }

    /// Output step in 2^-14 coded samples, rounded to nearest.
    pub fn step(&self) -> i64 {
        round_div(self.downscaled as i64 * SCALE_ONE, self.upscaled as i64)
    }

    /// `W` times the step rounding error, in 2^-14 units. Exact.
    pub fn accumulated_error(&self) -> i64 {
        self.upscaled as i64 * self.step() - self.downscaled as i64 * SCALE_ONE
    }

    /// Offset of the first output sample from the first coded sample:
    /// `(D - W) / 2W` minus half the accumulated step error, rounded once.
    pub fn initial_offset(&self) -> i64 {
        let (d, w) = (self.downscaled as i64, self.upscaled as i64);
        round_div((d - w) * SCALE_ONE - self.accumulated_error() * w, 2 * w)
    }

    /// Offset of output `m` from the first coded sample, 2^-14 units.
    pub fn offset(&self, m: usize) -> i64 {
        self.initial_offset() + m as i64 * self.step()
    }

    /// Exact offset of output `m` in 2^-14 units, as `(num, den)`.
    pub fn ideal_offset(&self, m: usize) -> (i64, i64) {
        let (d, w) = (self.downscaled as i64, self.upscaled as i64);
        ((d - w) * SCALE_ONE + 2 * m as i64 * d * SCALE_ONE, 2 * w)
    }

    /// Integer coded position and 1/16 phase of every output sample.
    pub fn positions(&self) -> Vec<(isize, usize)> {
        let drop = SCALE_BITS - SUBPEL_BITS;
        (0..self.upscaled)
            .map(|m| {
                let q = (self.offset(m) + (1 << (drop - 1))) >> drop;
                ((q >> SUBPEL_BITS) as isize, (q & ((1 << SUBPEL_BITS) - 1)) as usize)
            })
            .collect()
    }
}

/// Interpolates one row at the given positions with the sharp 8-tap
/// filter. Reads past either end replicate the edge sample.
pub fn upscale_row(row: &[i32], positions: &[(isize, usize)], max: i32) -> Vec<i32> {
    let last = row.len() as isize - 1;
    positions
        .iter()
        .map(|&(x, phase)| {
            let taps = &SHARP[phase];
            let acc: i64 = (0..8).map(|j| taps[j] as i64 * row[(x + j as isize - 3).clamp(0, last) as usize] as i64).sum();
            (round2(acc, FILTER_BITS) as i32).clamp(0, max)
        })
        .collect()
}

/// Upscales every row of `src` from `D` to `W` samples.
pub fn upscale_plane(src: &Plane, params: SuperresParams) -> Result<Plane> {
    if src.width != params.downscaled {
        return invalid(format!("plane width {} but coded width {}", src.width, params.downscaled));
    }
    let mut dst = Plane::new(params.upscaled, src.height, src.bit_depth)?.with_subsampling(src.ss_x, src.ss_y);
    let pos = params.positions();
    let max = src.max_value() as i32;
    for y in 0..src.height {
        let row: Vec<i32> = src.row(y).iter().map(|&v| v as i32).collect();
        dst.put_block(0, y, params.upscaled, 1, &upscale_row(&row, &pos, max));
    }
    Ok(dst)
}

/// Encoder-side reduction from `W` to `D` samples per row by area
/// averaging. Not normative.
pub fn downscale_plane(src: &Plane, params: SuperresParams) -> Result<Plane> {
    if src.width != params.upscaled {
        return invalid(format!("plane width {} but output width {}", src.width, params.upscaled));
    }
    let (d, w) = (params.downscaled, params.upscaled);
    let mut dst = Plane::new(d, src.height, src.bit_depth)?.with_subsampling(src.ss_x, src.ss_y);
    for y in 0..src.height {
        let row = src.row(y);
        let out: Vec<i32> = (0..d)
            .map(|k| {
                // Output k covers [k W / D, (k + 1) W / D) of the input.
                let (lo, hi) = (k as f64 * w as f64 / d as f64, (k + 1) as f64 * w as f64 / d as f64);
                let mut acc = 0.0;
                let mut i = lo.floor() as usize;
                while (i as f64) < hi && i < w {
                    let cover = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                    acc += cover * row[i] as f64;
                    i += 1;
                }
                (acc / (hi - lo)).round() as i32
            })
            .collect();
        dst.put_block(0, y, d, 1, &out);
    }
    Ok(dst)
}
