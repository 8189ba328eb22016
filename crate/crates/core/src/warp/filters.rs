//! 1/64-sample warp filters.
//!
//! The 8-tap SHARP design sampled at 64 phases, with the half-sample row
//! pinned to the normative taps and phase `64 - p` mirroring `p`. Phase
//! `4p` therefore equals translational SHARP phase `p`.

use crate::inter::filters::{design_at, DESIGN_SHARP, HALF_SHARP};

pub const WARP_PHASES: usize = 64;

/// Regenerates [`WARP_FILTERS`].
pub fn build_warp_table() -> [[i32; 8]; WARP_PHASES] {
    let mut t = [[0; 8]; WARP_PHASES];
    t[0][3] = 128;
    for p in 1..32 {
        t[p] = design_at(DESIGN_SHARP, p as f64 / WARP_PHASES as f64);
    }
    t[32] = HALF_SHARP;
    for p in 33..WARP_PHASES {
        let mut m = t[WARP_PHASES - p];
        m.reverse();
        t[p] = m;
    }
    t
}
#[rustfmt::skip]
pub const WARP_FILTERS: [[i32; 8]; WARP_PHASES] = [
    [0, 0, 0, 128, 0, 0, 0, 0],
    [0, 1, -2, 128, 2, -1, 0, 0],
    [-1, 2, -4, 128, 4, -2, 1, 0],
    [-1, 2, -5, 128, 6, -2, 1, -1],
    [-2, 3, -7, 128, 8, -3, 2, -1],
    [-2, 4, -9, 128, 10, -4, 2, -1],
    [-2, 4, -10, 127, 13, -5, 2, -1],
    [-2, 5, -12, 126, 15, -6, 3, -1],
    [-3, 6, -13, 126, 17, -7, 3, -1],
    [-3, 6, -14, 125, 20, -8, 4, -2],
    [-3, 7, -15, 124, 22, -9, 4, -2],
    [-4, 7, -17, 123, 25, -9, 5, -2],
    [-4, 8, -18, 122, 27, -10, 5, -2],
    [-4, 8, -19, 121, 30, -11, 5, -2],
    [-4, 9, -20, 120, 32, -12, 6, -3],
    [-4, 9, -21, 119, 35, -13, 6, -3],
    [-5, 10, -22, 117, 38, -14, 7, -3],
    [-5, 10, -22, 115, 41, -15, 7, -3],
    [-5, 10, -23, 114, 43, -16, 8, -3],
    [-5, 11, -23, 112, 46, -17, 8, -4],
    [-5, 11, -24, 110, 49, -17, 8, -4],
    [-6, 11, -24, 108, 52, -18, 9, -4],
    [-5, 11, -25, 106, 55, -19, 9, -4],
    [-5, 11, -25, 104, 58, -20, 9, -4],
    [-6, 12, -25, 102, 60, -20, 10, -5],
    [-6, 12, -25, 100, 63, -21, 10, -5],
    [-6, 12, -25, 98, 66, -22, 10, -5],
    [-6, 12, -25, 95, 69, -22, 10, -5],
    [-6, 12, -25, 93, 71, -23, 11, -5],
    [-6, 12, -25, 90, 74, -23, 11, -5],
    [-6, 12, -25, 88, 77, -24, 11, -5],
    [-6, 12, -25, 85, 80, -24, 11, -5],
    [-4, 12, -24, 80, 80, -24, 12, -4],
    [-5, 11, -24, 80, 85, -25, 12, -6],
    [-5, 11, -24, 77, 88, -25, 12, -6],
    [-5, 11, -23, 74, 90, -25, 12, -6],
    [-5, 11, -23, 71, 93, -25, 12, -6],
    [-5, 10, -22, 69, 95, -25, 12, -6],
    [-5, 10, -22, 66, 98, -25, 12, -6],
    [-5, 10, -21, 63, 100, -25, 12, -6],
    [-5, 10, -20, 60, 102, -25, 12, -6],
    [-4, 9, -20, 58, 104, -25, 11, -5],
    [-4, 9, -19, 55, 106, -25, 11, -5],
    [-4, 9, -18, 52, 108, -24, 11, -6],
    [-4, 8, -17, 49, 110, -24, 11, -5],
    [-4, 8, -17, 46, 112, -23, 11, -5],
    [-3, 8, -16, 43, 114, -23, 10, -5],
    [-3, 7, -15, 41, 115, -22, 10, -5],
    [-3, 7, -14, 38, 117, -22, 10, -5],
    [-3, 6, -13, 35, 119, -21, 9, -4],
    [-3, 6, -12, 32, 120, -20, 9, -4],
    [-2, 5, -11, 30, 121, -19, 8, -4],
    [-2, 5, -10, 27, 122, -18, 8, -4],
    [-2, 5, -9, 25, 123, -17, 7, -4],
    [-2, 4, -9, 22, 124, -15, 7, -3],
    [-2, 4, -8, 20, 125, -14, 6, -3],
    [-1, 3, -7, 17, 126, -13, 6, -3],
    [-1, 3, -6, 15, 126, -12, 5, -2],
    [-1, 2, -5, 13, 127, -10, 4, -2],
    [-1, 2, -4, 10, 128, -9, 4, -2],
    [-1, 2, -3, 8, 128, -7, 3, -2],
    [-1, 1, -2, 6, 128, -5, 2, -1],
    [0, 1, -2, 4, 128, -4, 2, -1],
    [0, 0, -1, 2, 128, -2, 1, 0],
];
