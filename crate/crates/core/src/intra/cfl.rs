//! Chroma predicted as its DC plus a scaled, zero-mean luma pattern.

use crate::error::{invalid, Result};

/// Fractional bits of the scaling factor.
pub const ALPHA_BITS: u32 = 3;
/// Largest magnitude of the scaling factor, in 1/8 units (2.0).
pub const ALPHA_MAX: i32 = 16;

/// Averages luma down to chroma resolution, returning values in 1/8 units.
pub fn subsample_q3(luma: &[i32], lw: usize, lh: usize, ss_x: u32, ss_y: u32) -> Result<Vec<i32>> {
    if luma.len() != lw * lh || lw % (1 << ss_x) != 0 || lh % (1 << ss_y) != 0 {
        return invalid("luma block does not tile the chroma grid");
    }
    let (cw, ch) = (lw >> ss_x, lh >> ss_y);
    let n = 1 << (ss_x + ss_y);
    let mut out = Vec::with_capacity(cw * ch);
    for r in 0..ch {
        for c in 0..cw {
            let mut s = 0;
            for dy in 0..1 << ss_y {
                for dx in 0..1 << ss_x {
                    s += luma[((r << ss_y) + dy) * lw + (c << ss_x) + dx];
                }
            }
            out.push(s * (1 << ALPHA_BITS) / n);
        }
    }
    Ok(out)
}

/// Zero-mean part of a subsampled luma block (1/8 units); the mean is rounded.
pub fn ac_contribution(sub_q3: &[i32]) -> Vec<i32> {
    let n = sub_q3.len() as i64;
    let sum: i64 = sub_q3.iter().map(|&v| v as i64).sum();
    let avg = ((sum + n / 2) / n) as i32;
    sub_q3.iter().map(|&v| v - avg).collect()
}

fn round_shift_signed(v: i64, s: u32) -> i64 {
    let m = (v.abs() + (1 << (s - 1))) >> s;
    if v < 0 {
        -m
    } else {
        m
    }
}

/// `dc + alpha * ac`, clipped. `alpha_q3` is in 1/8 units, `ac_q3` as
/// returned by [`ac_contribution`].
pub fn predict_cfl(ac_q3: &[i32], dc: &[i32], alpha_q3: i32, bit_depth: u32) -> Result<Vec<i32>> {
    if alpha_q3.abs() > ALPHA_MAX {
        return invalid(format!("scaling {alpha_q3}/8 out of range"));
    }
    if ac_q3.len() != dc.len() {
        return invalid("AC and DC blocks differ in size");
    }
    let max = (1 << bit_depth) - 1;
    Ok(ac_q3
        .iter()
        .zip(dc)
        .map(|(&a, &d)| (d as i64 + round_shift_signed(alpha_q3 as i64 * a as i64, 2 * ALPHA_BITS)).clamp(0, max) as i32)
        .collect())
}
