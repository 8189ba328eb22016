//! First-order recursive intra prediction evaluated in 4x2 patches.
//!
//! The per-pixel model is `x = a*above + b*left + c*above_left` with
//! coefficients in units of 1/16. Each 4x2 patch is predicted directly from
//! its seven neighbours `p0..p6`:
//!
//! ```text
//! p0 p1 p2 p3 p4
//! p5 x0 x1 x2 x3
//! p6 x4 x5 x6 x7
//! ```
//!
//! using coefficients obtained by expanding the recursion, so the patch is
//! exactly the unrounded recursion rounded once at the end. Finished patches
//! (rounded and clipped) serve as neighbours of later patches.

use std::sync::OnceLock;

use super::IntraEdges;
use crate::error::{invalid, Result};
use crate::frame::BlockSize;

/// Fractional bits of the base coefficients.
pub const COEF_BITS: u32 = 4;
/// Longest dependency chain inside a patch (p0 to x7) is 5 multiplies.
pub const PATCH_BITS: u32 = 5 * COEF_BITS;

/// Base triples `(above, left, above_left)` in 1/16 units; each sums to 16.
pub const SETS: [(i64, i64, i64); 5] = [
    (10, 10, -4),
    (16, 0, 0),
    (0, 16, 0),
    (14, 6, -4),
    (6, 14, -4),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecursiveFilterSet(u8);

impl RecursiveFilterSet {
    pub const COUNT: usize = SETS.len();

    pub fn new(index: u8) -> Result<Self> {
        if (index as usize) < Self::COUNT {
            Ok(RecursiveFilterSet(index))
        } else {
            invalid(format!("recursive filter set {index}"))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn base(self) -> (i64, i64, i64) {
        SETS[self.index()]
    }

    /// Patch coefficients in units of `2^-PATCH_BITS`: row `k` gives `x_k`
    /// as a combination of `p0..p6`.
    pub fn patch_taps(self) -> &'static [[i64; 7]; 8] {
        static TAPS: OnceLock<Vec<[[i64; 7]; 8]>> = OnceLock::new();
        &TAPS.get_or_init(|| SETS.iter().map(|&s| expand(s)).collect())[self.index()]
    }

    /// Sizes with both sides in 4..=32.
    pub fn supports(size: BlockSize) -> bool {
        size.w <= 32 && size.h <= 32
    }
}

/// Symbolic expansion: each pixel is tracked as a vector of `p` weights at
/// scale `16^5`; every recursion step divides by 16 exactly.
fn expand((a, b, c): (i64, i64, i64)) -> [[i64; 7]; 8] {
    let unit = |k: usize| {
        let mut v = [0i64; 7];
        v[k] = 1 << PATCH_BITS;
        v
    };
    // Grid with the neighbour row and column at index 0.
    let mut g = [[[0i64; 7]; 5]; 3];
    g[0][0] = unit(0);
    for col in 1..5 {
        g[0][col] = unit(col);
    }
    g[1][0] = unit(5);
    g[2][0] = unit(6);
    for r in 1..3 {
        for col in 1..5 {
            let mut v = [0i64; 7];
            for k in 0..7 {
                let s = a * g[r - 1][col][k] + b * g[r][col - 1][k] + c * g[r - 1][col - 1][k];
                debug_assert_eq!(s % (1 << COEF_BITS), 0);
                v[k] = s >> COEF_BITS;
            }
            g[r][col] = v;
        }
    }
    let mut taps = [[0i64; 7]; 8];
    for (k, t) in taps.iter_mut().enumerate() {
        *t = g[1 + k / 4][1 + k % 4];
    }
    taps
}

/// Block prediction, patch by patch in raster order.
pub fn predict_recursive_filter(edges: &IntraEdges, set: RecursiveFilterSet, size: BlockSize) -> Result<Vec<i32>> {
    if !RecursiveFilterSet::supports(size) {
        return invalid(format!("recursive filter unsupported for {}x{}", size.w, size.h));
    }
    let (w, h) = (size.w, size.h);
    let taps = set.patch_taps();
    let max = (1i64 << edges.bit_depth) - 1;
    let stride = w + 1;
    // Working grid with the edges in row 0 and column 0.
    let mut g = vec![0i64; (h + 1) * stride];
    g[0] = edges.top_left as i64;
    for j in 0..w {
        g[j + 1] = edges.above[j] as i64;
    }
    for i in 0..h {
        g[(i + 1) * stride] = edges.left[i] as i64;
    }
    let round = 1i64 << (PATCH_BITS - 1);
    for pr in (0..h).step_by(2) {
        for pc in (0..w).step_by(4) {
            let at = |r: usize, c: usize| g[r * stride + c];
            let p = [
                at(pr, pc),
                at(pr, pc + 1),
                at(pr, pc + 2),
                at(pr, pc + 3),
                at(pr, pc + 4),
                at(pr + 1, pc),
                at(pr + 2, pc),
            ];
            let mut vals = [0i64; 8];
            for (k, t) in taps.iter().enumerate() {
                let s: i64 = t.iter().zip(&p).map(|(c, v)| c * v).sum();
                vals[k] = ((s + round) >> PATCH_BITS).clamp(0, max);
            }
            for (k, v) in vals.into_iter().enumerate() {
                g[(pr + 1 + k / 4) * stride + pc + 1 + k % 4] = v;
            }
        }
    }
    let mut out = Vec::with_capacity(w * h);
    for i in 0..h {
        out.extend(g[(i + 1) * stride + 1..(i + 2) * stride].iter().map(|&v| v as i32));
    }
    Ok(out)
}
