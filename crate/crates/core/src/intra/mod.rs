//! Intra predictors. Every predictor returns a row-major `w*h` block of
//! samples within the depth range.

pub mod cfl;
pub mod intrabc;
pub mod palette;
pub mod recursive;

use crate::error::{invalid, Result};
use crate::frame::{BlockSize, Plane};

pub use recursive::{predict_recursive_filter, RecursiveFilterSet};

/// Fractional bits of directional projections.
pub const ANGLE_FRAC_BITS: u32 = 6;
/// Degrees per angle-delta step.
pub const ANGLE_STEP: i32 = 3;

/// Reference samples around a block.
///
/// `above` and `left` hold `w + h` samples each; positions past what was
/// actually reconstructed are filled by replicating the last available one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntraEdges {
    pub above: Vec<u16>,
    pub left: Vec<u16>,
    pub top_left: u16,
    pub have_above: bool,
    pub have_left: bool,
    /// Reconstructed samples past the block width in the above row.
    pub above_right: usize,
    /// Reconstructed samples past the block height in the left column.
    pub bottom_left: usize,
    pub bit_depth: u32,
}

impl IntraEdges {
    /// Edges where every sample equals `v`.
    pub fn constant(w: usize, h: usize, v: u16, bit_depth: u32) -> Self {
        IntraEdges {
            above: vec![v; w + h],
            left: vec![v; w + h],
            top_left: v,
            have_above: true,
            have_left: true,
            above_right: h,
            bottom_left: w,
            bit_depth,
        }
    }

    /// Builds edges from explicit sample runs, replicating to length `w + h`.
    /// Empty runs mean the side is unavailable.
    pub fn from_samples(w: usize, h: usize, above: &[u16], left: &[u16], top_left: u16, bit_depth: u32) -> Result<Self> {
        let max = (1u32 << bit_depth) - 1;
        if above.iter().chain(left).chain([&top_left]).any(|&v| v as u32 > max) {
            return invalid("edge sample exceeds depth range");
        }
        let mid = 1u16 << (bit_depth - 1);
        let fill = |run: &[u16], other: &[u16]| -> Vec<u16> {
            let mut v: Vec<u16> = run.iter().copied().take(w + h).collect();
            let last = v.last().copied().or(other.first().copied()).unwrap_or(mid);
            v.resize(w + h, last);
            v
        };
        Ok(IntraEdges {
            above: fill(above, left),
            left: fill(left, above),
            top_left,
            have_above: !above.is_empty(),
            have_left: !left.is_empty(),
            above_right: above.len().saturating_sub(w),
            bottom_left: left.len().saturating_sub(h),
            bit_depth,
        })
    }

    /// Gathers edges for the block at `(x, y)` from reconstructed samples.
    /// `decoded(x, y)` tells whether a position is already reconstructed.
    pub fn gather(plane: &Plane, x: usize, y: usize, w: usize, h: usize, decoded: impl Fn(usize, usize) -> bool) -> Self {
        let mut above = Vec::new();
        if y > 0 {
            for k in 0..w + h {
                let px = x + k;
                if px >= plane.width || !decoded(px, y - 1) {
                    break;
                }
                above.push(plane.get(px, y - 1));
            }
        }
        let mut left = Vec::new();
        if x > 0 {
            for k in 0..w + h {
                let py = y + k;
                if py >= plane.height || !decoded(x - 1, py) {
                    break;
                }
                left.push(plane.get(x - 1, py));
            }
        }
        let mid = 1u16 << (plane.bit_depth - 1);
        let top_left = if x > 0 && y > 0 && decoded(x - 1, y - 1) {
            plane.get(x - 1, y - 1)
        } else {
            above.first().or(left.first()).copied().unwrap_or(mid)
        };
        Self::from_samples(w, h, &above, &left, top_left, plane.bit_depth)
            .expect("plane samples are within range")
    }

    fn max(&self) -> i32 {
        (1 << self.bit_depth) - 1
    }
}

/// One of the eight base prediction directions, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BaseDirection {
    D45,
    D67,
    V90,
    D113,
    D135,
    D157,
    H180,
    D203,
}

impl BaseDirection {
    pub const ALL: [BaseDirection; 8] = [
        BaseDirection::D45,
        BaseDirection::D67,
        BaseDirection::V90,
        BaseDirection::D113,
        BaseDirection::D135,
        BaseDirection::D157,
        BaseDirection::H180,
        BaseDirection::D203,
    ];

    pub fn degrees(self) -> i32 {
        match self {
            BaseDirection::D45 => 45,
            BaseDirection::D67 => 67,
            BaseDirection::V90 => 90,
            BaseDirection::D113 => 113,
            BaseDirection::D135 => 135,
            BaseDirection::D157 => 157,
            BaseDirection::H180 => 180,
            BaseDirection::D203 => 203,
        }
    }
}

/// Base direction refined by `angle_delta` steps of 3 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DirectionalMode {
    pub base: BaseDirection,
    pub angle_delta: i8,
}

impl DirectionalMode {
    pub fn new(base: BaseDirection, angle_delta: i8) -> Self {
        DirectionalMode { base, angle_delta }
    }

    pub fn angle(self) -> i32 {
        self.base.degrees() + ANGLE_STEP * self.angle_delta as i32
    }

    /// Deltas are limited to +-3 and only allowed when both sides are >= 8.
    pub fn is_legal(self, size: BlockSize) -> bool {
        self.angle_delta.abs() <= 3 && (self.angle_delta == 0 || (size.w >= 8 && size.h >= 8))
    }
}

/// Projection step `64 / tan(angle)` for angles strictly inside (0, 90).
pub fn projection_step(angle_deg: i32) -> i32 {
    debug_assert!(angle_deg > 0 && angle_deg < 90);
    let t = (angle_deg as f64).to_radians().tan();
    ((1 << ANGLE_FRAC_BITS) as f64 / t).round() as i32
}

/// Edge run with the top-left sample at index 0 and the side samples after it.
fn extended(corner: u16, side: &[u16]) -> Vec<i32> {
    std::iter::once(corner).chain(side.iter().copied()).map(i32::from).collect()
}

/// 2-tap interpolation at `pos` (1/64 units, relative to the side's first
/// sample) along an extended edge; positions past the end clamp to it.
fn interp(ext: &[i32], pos: i32) -> i32 {
    let one = 1 << ANGLE_FRAC_BITS;
    let last = ext.len() as i32 - 1;
    let base = (pos >> ANGLE_FRAC_BITS) + 1;
    if base >= last {
        return ext[last as usize];
    }
    let base = base.max(0);
    let f = pos & (one - 1);
    let f = if (pos >> ANGLE_FRAC_BITS) + 1 < 0 { 0 } else { f };
    (ext[base as usize] * (one - f) + ext[base as usize + 1] * f + (one >> 1)) >> ANGLE_FRAC_BITS
}

/// Directional prediction with 2-tap interpolation of the projected position.
pub fn predict_directional(edges: &IntraEdges, mode: DirectionalMode, size: BlockSize) -> Result<Vec<i32>> {
    if !mode.is_legal(size) {
        return invalid(format!("angle delta {} not allowed for {}x{}", mode.angle_delta, size.w, size.h));
    }
    let (w, h) = (size.w, size.h);
    if edges.above.len() < w + h || edges.left.len() < w + h {
        return invalid("edges shorter than width plus height");
    }
    let p = mode.angle();
    let above = extended(edges.top_left, &edges.above[..w + h]);
    let left = extended(edges.top_left, &edges.left[..w + h]);
    let mut out = vec![0; w * h];
    for i in 0..h {
        for j in 0..w {
            let (ii, jj) = (i as i32, j as i32);
            out[i * w + j] = match p {
                90 => above[j + 1],
                180 => left[i + 1],
                _ if p < 90 => interp(&above, (jj << 6) + (ii + 1) * projection_step(p)),
                _ if p < 180 => {
                    let x = (jj << 6) - (ii + 1) * projection_step(180 - p);
                    if x >= -(1 << 6) {
                        interp(&above, x)
                    } else {
                        interp(&left, (ii << 6) - (jj + 1) * projection_step(p - 90))
                    }
                }
                _ => interp(&left, (ii << 6) + (jj + 1) * projection_step(270 - p)),
            };
        }
    }
    Ok(out)
}

/// Which of the three distance-weighted modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SmoothVariant {
    V,
    H,
    Both,
}

/// Weight scale of the smooth tables.
pub const SMOOTH_WEIGHT_BITS: u32 = 8;

#[rustfmt::skip]
const SMOOTH_W4: [u8; 4] = [255, 149, 85, 64];
#[rustfmt::skip]
const SMOOTH_W8: [u8; 8] = [255, 197, 146, 105, 73, 50, 37, 32];
#[rustfmt::skip]
const SMOOTH_W16: [u8; 16] = [255, 225, 196, 170, 145, 123, 102, 84, 68, 54, 43, 33, 26, 20, 17, 16];
#[rustfmt::skip]
const SMOOTH_W32: [u8; 32] = [
    255, 240, 225, 210, 196, 182, 169, 157, 145, 133, 122, 111, 101, 92, 83, 74,
    66, 59, 52, 45, 39, 34, 29, 25, 21, 17, 14, 12, 10, 9, 8, 8,
];
#[rustfmt::skip]
const SMOOTH_W64: [u8; 64] = [
    255, 248, 240, 233, 225, 218, 210, 203, 196, 189, 182, 176, 169, 163, 156, 150,
    144, 138, 133, 127, 121, 116, 111, 106, 101, 96, 91, 86, 82, 77, 73, 69,
    65, 61, 57, 54, 50, 47, 44, 41, 38, 35, 32, 29, 27, 25, 22, 20,
    18, 16, 15, 13, 12, 10, 9, 8, 7, 6, 6, 5, 5, 4, 4, 4,
];

/// Weight of the near edge as a function of distance, for a side of length `n`.
/// Sides above 64 reuse the 64 table at half resolution.
pub fn smooth_weights(n: usize) -> Vec<u32> {
    let t: &[u8] = match n {
        4 => &SMOOTH_W4,
        8 => &SMOOTH_W8,
        16 => &SMOOTH_W16,
        32 => &SMOOTH_W32,
        _ => &SMOOTH_W64,
    };
    let step = n.div_ceil(64).max(1);
    (0..n).map(|k| t[(k / step).min(t.len() - 1)] as u32).collect()
}

/// Distance-weighted prediction closing the boundary with the bottom-left
/// and top-right samples. `Both` is the rounded mean of the `H` and `V` outputs.
pub fn predict_smooth(edges: &IntraEdges, variant: SmoothVariant, size: BlockSize) -> Vec<i32> {
    let (w, h) = (size.w, size.h);
    let one = 1u32 << SMOOTH_WEIGHT_BITS;
    let half = one >> 1;
    let (wx, wy) = (smooth_weights(w), smooth_weights(h));
    let tr = edges.above[w - 1] as u32;
    let bl = edges.left[h - 1] as u32;
    let ph = |i: usize, j: usize| (wx[j] * edges.left[i] as u32 + (one - wx[j]) * tr + half) >> SMOOTH_WEIGHT_BITS;
    let pv = |i: usize, j: usize| (wy[i] * edges.above[j] as u32 + (one - wy[i]) * bl + half) >> SMOOTH_WEIGHT_BITS;
    let mut out = vec![0; w * h];
    for i in 0..h {
        for j in 0..w {
            out[i * w + j] = match variant {
                SmoothVariant::H => ph(i, j),
                SmoothVariant::V => pv(i, j),
                SmoothVariant::Both => (ph(i, j) + pv(i, j) + 1) >> 1,
            } as i32;
        }
    }
    out
}

/// Picks whichever of above, left and top-left is nearest to
/// `above + left - top_left`; ties prefer above, then left.
pub fn paeth_pick(t: i32, l: i32, tl: i32) -> i32 {
    let base = t + l - tl;
    let (dt, dl, dtl) = ((base - t).abs(), (base - l).abs(), (base - tl).abs());
    if dt <= dl && dt <= dtl {
        t
    } else if dl <= dtl {
        l
    } else {
        tl
    }
}

pub fn predict_paeth(edges: &IntraEdges, size: BlockSize) -> Vec<i32> {
    let tl = edges.top_left as i32;
    let mut out = vec![0; size.w * size.h];
    for i in 0..size.h {
        for j in 0..size.w {
            out[i * size.w + j] = paeth_pick(edges.above[j] as i32, edges.left[i] as i32, tl);
        }
    }
    out
}

/// Mean of the available neighbours; mid-grey with none.
pub fn predict_dc(edges: &IntraEdges, size: BlockSize) -> Vec<i32> {
    let (w, h) = (size.w, size.h);
    let mut sum = 0u64;
    let mut n = 0u64;
    if edges.have_above {
        sum += edges.above[..w].iter().map(|&v| v as u64).sum::<u64>();
        n += w as u64;
    }
    if edges.have_left {
        sum += edges.left[..h].iter().map(|&v| v as u64).sum::<u64>();
        n += h as u64;
    }
    let dc = if n == 0 { 1 << (edges.bit_depth - 1) } else { ((sum + n / 2) / n) as i32 };
    vec![dc.min(edges.max()); w * h]
}

/// Intra modes selectable per block by the codec harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum IntraMode {
    Dc,
    Directional(DirectionalMode),
    Smooth(SmoothVariant),
    Paeth,
    Recursive(u8),
}

impl IntraMode {
    /// Modes legal for `size`, in a fixed order used as the coded symbol index.
    pub fn candidates(size: BlockSize) -> Vec<IntraMode> {
        let mut v = vec![IntraMode::Dc];
        for b in BaseDirection::ALL {
            v.push(IntraMode::Directional(DirectionalMode::new(b, 0)));
        }
        v.extend([
            IntraMode::Smooth(SmoothVariant::V),
            IntraMode::Smooth(SmoothVariant::H),
            IntraMode::Smooth(SmoothVariant::Both),
            IntraMode::Paeth,
        ]);
        if RecursiveFilterSet::supports(size) {
            v.extend((0..RecursiveFilterSet::COUNT as u8).map(IntraMode::Recursive));
        }
        v
    }
}

/// Dispatches to the predictor for `mode`.
pub fn predict(edges: &IntraEdges, mode: IntraMode, size: BlockSize) -> Result<Vec<i32>> {
    Ok(match mode {
        IntraMode::Dc => predict_dc(edges, size),
        IntraMode::Directional(m) => predict_directional(edges, m, size)?,
        IntraMode::Smooth(v) => predict_smooth(edges, v, size),
        IntraMode::Paeth => predict_paeth(edges, size),
        IntraMode::Recursive(s) => predict_recursive_filter(edges, RecursiveFilterSet::new(s)?, size)?,
    })
}
