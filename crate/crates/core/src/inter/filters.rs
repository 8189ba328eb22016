//! Sub-sample interpolation filter tables.
//!
//! Each table has 16 phases (1/16 sample) of 8 taps that sum to 128. Taps
//! `k = 0..8` multiply the reference at offset `k - 3` from the integer
//! position; 6- and 4-tap designs leave the outer entries zero. Rows come
//! from a Kaiser-windowed sinc ([`design_phase`]) except the half-sample
//! row, which is pinned to the normative taps. Phase `16 - p` mirrors `p`.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FilterKind {
    Smooth,
    Regular,
    Sharp,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [FilterKind::Smooth, FilterKind::Regular, FilterKind::Sharp];
}

/// Normative half-sample rows.
pub const HALF_SMOOTH: [i32; 6] = [-2, 14, 52, 52, 14, -2];
pub const HALF_REGULAR: [i32; 6] = [2, -14, 76, 76, -14, 2];
pub const HALF_SHARP: [i32; 8] = [-4, 12, -24, 80, 80, -24, 12, -4];
pub const HALF_SMOOTH_4: [i32; 4] = [12, 52, 52, 12];
pub const HALF_REGULAR_4: [i32; 4] = [-12, 76, 76, -12];

/// Windowed-sinc design of one filter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    pub taps: usize,
    /// Cutoff as a fraction of the Nyquist rate.
    pub cutoff: f64,
    pub kaiser_beta: f64,
    /// Window half-length in units of `taps / 2`.
    pub window_scale: f64,
}

pub const DESIGN_SMOOTH: Design = Design { taps: 6, cutoff: 0.455, kaiser_beta: 7.0, window_scale: 1.25 };
pub const DESIGN_REGULAR: Design = Design { taps: 6, cutoff: 1.0, kaiser_beta: 4.0, window_scale: 0.85 };
pub const DESIGN_SHARP: Design = Design { taps: 8, cutoff: 1.0, kaiser_beta: 2.75, window_scale: 1.1 };
pub const DESIGN_SMOOTH_4: Design = Design { taps: 4, cutoff: 0.3, kaiser_beta: 4.5, window_scale: 1.0 };
pub const DESIGN_REGULAR_4: Design = Design { taps: 4, cutoff: 1.0, kaiser_beta: 3.25, window_scale: 1.0 };

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..50 {
        term *= (x / (2.0 * k as f64)).powi(2);
        sum += term;
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Integer taps for `phase` (1/16 sample) of a design, normalised to 128.
pub fn design_phase(d: Design, phase: usize) -> [i32; 8] {
    design_at(d, phase as f64 / 16.0)
}

/// Integer taps interpolating at fractional offset `f` in `[0, 1)`,
/// normalised to 128. Rounding residue goes to the taps whose fractional
/// parts were closest to rounding the other way, lowest index first.
pub fn design_at(d: Design, f: f64) -> [i32; 8] {
    let n = d.taps as i64;
    let half_len = d.taps as f64 / 2.0 * d.window_scale;
    let ks: Vec<i64> = (-n / 2 + 1..=n / 2).collect();
    let raw: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let t = k as f64 - f;
            let x = (t / half_len).clamp(-1.0, 1.0);
            let w = bessel_i0(d.kaiser_beta * (1.0 - x * x).sqrt()) / bessel_i0(d.kaiser_beta);
            d.cutoff * sinc(d.cutoff * t) * w
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let scaled: Vec<f64> = raw.iter().map(|v| v / total * 128.0).collect();
    let mut r: Vec<i32> = scaled.iter().map(|v| v.round() as i32).collect();
    let mut residue = 128 - r.iter().sum::<i32>();
    let mut order: Vec<usize> = (0..r.len()).collect();
    // Candidates sorted by how far rounding moved them against the residue.
    order.sort_by(|&a, &b| {
        let ea = (scaled[a] - r[a] as f64) * residue.signum() as f64;
        let eb = (scaled[b] - r[b] as f64) * residue.signum() as f64;
        eb.partial_cmp(&ea).unwrap().then(a.cmp(&b))
    });
    let mut i = 0;
    while residue != 0 {
        let j = order[i % order.len()];
        r[j] += residue.signum();
        residue -= residue.signum();
        i += 1;
    }
    let mut out = [0i32; 8];
    let off = (8 - d.taps) / 2;
    out[off..off + d.taps].copy_from_slice(&r);
    out
}

fn place(half: &[i32]) -> [i32; 8] {
    let mut out = [0; 8];
    let off = (8 - half.len()) / 2;
    out[off..off + half.len()].copy_from_slice(half);
    out
}

/// Full 16-phase table for a design: phases 1..=7 designed, 8 pinned, the
/// rest mirrored.
pub fn build_table(d: Design, half: &[i32]) -> [[i32; 8]; 16] {
    let mut t = [[0; 8]; 16];
    t[0][3] = 128;
    for p in 1..8 {
        t[p] = design_phase(d, p);
    }
    t[8] = place(half);
    for p in 9..16 {
        // Offset o of phase 16-p equals offset 1-o of phase p: index 7-k.
        let mut m = t[16 - p];
        m.reverse();
        t[p] = m;
    }
    t
}

#[rustfmt::skip]
pub const SMOOTH: [[i32; 8]; 16] = [
    [0, 0, 0, 128, 0, 0, 0, 0],
    [0, 1, 30, 60, 35, 3, -1, 0],
    [0, 1, 27, 59, 38, 4, -1, 0],
    [0, 0, 25, 59, 40, 5, -1, 0],
    [0, 0, 22, 57, 43, 7, -1, 0],
    [0, -1, 20, 57, 45, 8, -1, 0],
    [0, -1, 18, 55, 48, 10, -2, 0],
    [0, -1, 16, 53, 50, 12, -2, 0],
    [0, -2, 14, 52, 52, 14, -2, 0],
    [0, -2, 12, 50, 53, 16, -1, 0],
    [0, -2, 10, 48, 55, 18, -1, 0],
    [0, -1, 8, 45, 57, 20, -1, 0],
    [0, -1, 7, 43, 57, 22, 0, 0],
    [0, -1, 5, 40, 59, 25, 0, 0],
    [0, -1, 4, 38, 59, 27, 1, 0],
    [0, -1, 3, 35, 60, 30, 1, 0],
];
#[rustfmt::skip]
pub const REGULAR: [[i32; 8]; 16] = [
    [0, 0, 0, 128, 0, 0, 0, 0],
    [0, 1, -6, 127, 7, -1, 0, 0],
    [0, 2, -10, 124, 14, -3, 1, 0],
    [0, 2, -13, 119, 23, -4, 1, 0],
    [0, 2, -15, 113, 33, -6, 1, 0],
    [0, 3, -16, 106, 43, -9, 1, 0],
    [0, 2, -16, 97, 55, -11, 1, 0],
    [0, 2, -15, 87, 66, -13, 1, 0],
    [0, 2, -14, 76, 76, -14, 2, 0],
    [0, 1, -13, 66, 87, -15, 2, 0],
    [0, 1, -11, 55, 97, -16, 2, 0],
    [0, 1, -9, 43, 106, -16, 3, 0],
    [0, 1, -6, 33, 113, -15, 2, 0],
    [0, 1, -4, 23, 119, -13, 2, 0],
    [0, 1, -3, 14, 124, -10, 2, 0],
    [0, 0, -1, 7, 127, -6, 1, 0],
];
#[rustfmt::skip]
pub const SHARP: [[i32; 8]; 16] = [
    [0, 0, 0, 128, 0, 0, 0, 0],
    [-2, 3, -7, 128, 8, -3, 2, -1],
    [-3, 6, -13, 126, 17, -7, 3, -1],
    [-4, 8, -18, 122, 27, -10, 5, -2],
    [-5, 10, -22, 117, 38, -14, 7, -3],
    [-5, 11, -24, 110, 49, -17, 8, -4],
    [-6, 12, -25, 102, 60, -20, 10, -5],
    [-6, 12, -25, 93, 71, -23, 11, -5],
    [-4, 12, -24, 80, 80, -24, 12, -4],
    [-5, 11, -23, 71, 93, -25, 12, -6],
    [-5, 10, -20, 60, 102, -25, 12, -6],
    [-4, 8, -17, 49, 110, -24, 11, -5],
    [-3, 7, -14, 38, 117, -22, 10, -5],
    [-2, 5, -10, 27, 122, -18, 8, -4],
    [-1, 3, -7, 17, 126, -13, 6, -3],
    [-1, 2, -3, 8, 128, -7, 3, -2],
];
#[rustfmt::skip]
pub const SMOOTH_4: [[i32; 8]; 16] = [
    [0, 0, 0, 128, 0, 0, 0, 0],
    [0, 0, 29, 62, 34, 3, 0, 0],
    [0, 0, 26, 62, 37, 3, 0, 0],
    [0, 0, 23, 61, 40, 4, 0, 0],
    [0, 0, 21, 59, 43, 5, 0, 0],
    [0, 0, 18, 58, 45, 7, 0, 0],
    [0, 0, 16, 56, 48, 8, 0, 0],
    [0, 0, 14, 54, 50, 10, 0, 0],
    [0, 0, 12, 52, 52, 12, 0, 0],
    [0, 0, 10, 50, 54, 14, 0, 0],
    [0, 0, 8, 48, 56, 16, 0, 0],
    [0, 0, 7, 45, 58, 18, 0, 0],
    [0, 0, 5, 43, 59, 21, 0, 0],
    [0, 0, 4, 40, 61, 23, 0, 0],
    [0, 0, 3, 37, 62, 26, 0, 0],
    [0, 0, 3, 34, 62, 29, 0, 0],
];
#[rustfmt::skip]
pub const REGULAR_4: [[i32; 8]; 16] = [
    [0, 0, 0, 128, 0, 0, 0, 0],
    [0, 0, -5, 128, 6, -1, 0, 0],
    [0, 0, -9, 125, 14, -2, 0, 0],
    [0, 0, -11, 120, 22, -3, 0, 0],
    [0, 0, -13, 114, 32, -5, 0, 0],
    [0, 0, -14, 106, 42, -6, 0, 0],
    [0, 0, -14, 97, 53, -8, 0, 0],
    [0, 0, -13, 87, 64, -10, 0, 0],
    [0, 0, -12, 76, 76, -12, 0, 0],
    [0, 0, -10, 64, 87, -13, 0, 0],
    [0, 0, -8, 53, 97, -14, 0, 0],
    [0, 0, -6, 42, 106, -14, 0, 0],
    [0, 0, -5, 32, 114, -13, 0, 0],
    [0, 0, -3, 22, 120, -11, 0, 0],
    [0, 0, -2, 14, 125, -9, 0, 0],
    [0, 0, -1, 6, 128, -5, 0, 0],
];

/// Taps for `kind` at `phase`. Blocks with the filtered dimension at most
/// 4 use the 4-tap families; SHARP has none and falls back to REGULAR.
pub fn taps(kind: FilterKind, phase: usize, short: bool) -> &'static [i32; 8] {
    let t = match (kind, short) {
        (FilterKind::Smooth, false) => &SMOOTH,
        (FilterKind::Regular, false) => &REGULAR,
        (FilterKind::Sharp, false) => &SHARP,
        (FilterKind::Smooth, true) => &SMOOTH_4,
        (_, true) => &REGULAR_4,
    };
    &t[phase & 15]
}
