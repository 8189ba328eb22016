//! Separable symmetric 7-tap restoration filter. Three outer taps are
//! coded per direction; the centre tap completes a gain of 128.

use crate::error::{invalid, Result};
use crate::frame::Plane;
use crate::inter::round2;

pub const TAPS: usize = 7;
pub const GAIN_BITS: u32 = 7;
/// Fractional bits dropped after the horizontal pass. The remaining
/// `GAIN_BITS - ROUND_H` bits are kept for the vertical pass.
pub const ROUND_H: u32 = 3;
pub const ROUND_V: u32 = 2 * GAIN_BITS - ROUND_H;
/// Coded range of taps 0 (outermost) to 2, spanning 4, 5 and 6 bits.
pub const TAP_MIN: [i32; 3] = [-5, -23, -17];
pub const TAP_MAX: [i32; 3] = [10, 8, 46];
pub const TAP_BITS: [u32; 3] = [4, 5, 6];

/// The three coded taps of one direction, outermost first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct WienerTaps(pub [i32; 3]);

impl WienerTaps {
    pub const IDENTITY: WienerTaps = WienerTaps([0, 0, 0]);

    pub fn new(t: [i32; 3]) -> Result<Self> {
        for i in 0..3 {
            if t[i] < TAP_MIN[i] || t[i] > TAP_MAX[i] {
                return invalid(format!("wiener tap {i} = {} outside [{}, {}]", t[i], TAP_MIN[i], TAP_MAX[i]));
            }
        }
        Ok(WienerTaps(t))
    }

    /// All seven taps, summing to 128.
    pub fn full(&self) -> [i32; TAPS] {
        let [a, b, c] = self.0;
        [a, b, c, (1 << GAIN_BITS) - 2 * (a + b + c), c, b, a]
    }

    /// Offsets from the coded range minimum; each fits `TAP_BITS`.
    pub fn coded(&self) -> [u32; 3] {
        std::array::from_fn(|i| (self.0[i] - TAP_MIN[i]) as u32)
    }

    pub fn from_coded(c: [u32; 3]) -> Result<Self> {
        Self::new(std::array::from_fn(|i| c[i] as i32 + TAP_MIN[i]))
    }
}

/// Filters the `w`×`h` region at `(x, y)` of `src`. Neighbours come from
/// the whole plane with edge replication. Returns row-major output.
pub fn wiener_region(src: &Plane, x: usize, y: usize, w: usize, h: usize, vt: WienerTaps, ht: WienerTaps) -> Vec<i32> {
    let (fv, fh) = (vt.full(), ht.full());
    let half = (TAPS / 2) as isize;
    let rows = h + TAPS - 1;
    let mut mid = vec![0i64; rows * w];
    for r in 0..rows {
        let sy = y as isize + r as isize - half;
        for c in 0..w {
            let sx = x as isize + c as isize - half;
            let acc: i64 = (0..TAPS).map(|t| fh[t] as i64 * src.get_clamped(sx + t as isize, sy) as i64).sum();
            mid[r * w + c] = round2(acc, ROUND_H);
        }
    }
    let max = src.max_value() as i64;
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let acc: i64 = (0..TAPS).map(|t| fv[t] as i64 * mid[(r + t) * w + c]).sum();
            out.push(round2(acc, ROUND_V).clamp(0, max) as i32);
        }
    }
    out
}

/// Filters a whole plane treated as one unit.
pub fn wiener_apply(src: &Plane, vt: WienerTaps, ht: WienerTaps) -> Plane {
    let mut dst = src.clone();
    let out = wiener_region(src, 0, 0, src.width, src.height, vt, ht);
    dst.put_block(0, 0, src.width, src.height, &out);
    dst
}
