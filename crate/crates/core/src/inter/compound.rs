//! Two-reference blending with 6-bit weights.

use crate::error::{invalid, Error, Result};
use crate::frame::BlockSize;

/// Weight scale: `m` weights the first reference, `64 - m` the second.
pub const MASK_ONE: u8 = 64;
pub const WEDGE_COUNT: usize = 16;

/// Per-sample weights in `[0, 64]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundMask {
    pub w: usize,
    pub h: usize,
    m: Vec<u8>,
}

impl CompoundMask {
    pub fn new(w: usize, h: usize, m: Vec<u8>) -> Result<Self> {
        if m.len() != w * h {
            return Err(Error::DimensionMismatch(format!("{} weights for {w}x{h}", m.len())));
        }
        if m.iter().any(|&v| v > MASK_ONE) {
            return invalid("mask weight above 64");
        }
        Ok(CompoundMask { w, h, m })
    }

    pub fn uniform(w: usize, h: usize, m: u8) -> Result<Self> {
        Self::new(w, h, vec![m; w * h])
    }

    pub fn weights(&self) -> &[u8] {
        &self.m
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.m[y * self.w + x]
    }

    /// `64 - m` everywhere.
    pub fn complement(&self) -> Self {
        CompoundMask { w: self.w, h: self.h, m: self.m.iter().map(|&v| MASK_ONE - v).collect() }
    }
}

/// Weight of the first reference from the two temporal distances: the nearer
/// reference gets more weight as the distances diverge.
pub fn distance_weight(d1: u32, d2: u32) -> Result<u8> {
    if d1 == 0 || d2 == 0 {
        return invalid("temporal distances must be positive");
    }
    if d1 > d2 {
        return Ok(MASK_ONE - distance_weight(d2, d1)?);
    }
    // Thresholds 1.5, 2.5, 3.5 in half units.
    let (a, b) = (2 * d2, d1);
    Ok(if a < 3 * b {
        36
    } else if a < 5 * b {
        44
    } else if a < 7 * b {
        48
    } else {
        52
    })
}

/// Equal weighting.
pub const AVERAGE_WEIGHT: u8 = 32;

/// Per-sample weight from the reference difference: close samples blend,
/// distant ones favour the reference chosen by `sign`.
pub fn difference_mask(r1: &[i32], r2: &[i32], w: usize, h: usize, sign: bool) -> Result<CompoundMask> {
    if r1.len() != w * h || r2.len() != w * h {
        return Err(Error::DimensionMismatch("difference mask inputs".into()));
    }
    let m = r1
        .iter()
        .zip(r2)
        .map(|(&a, &b)| {
            let v = (38 + (a - b).abs() / 16).clamp(0, 64);
            (if sign { 64 - v } else { v }) as u8
        })
        .collect();
    CompoundMask::new(w, h, m)
}

/// Weighted sum before the final shift: `m*r1 + (64-m)*r2`.
pub fn blend_sum(r1: &[i32], r2: &[i32], mask: &CompoundMask) -> Result<Vec<i32>> {
    if r1.len() != mask.m.len() || r2.len() != mask.m.len() {
        return Err(Error::DimensionMismatch("blend inputs".into()));
    }
    Ok(r1
        .iter()
        .zip(r2)
        .zip(&mask.m)
        .map(|((&a, &b), &m)| m as i32 * a + (64 - m as i32) * b)
        .collect())
}

/// `(m*r1 + (64-m)*r2 + 32) >> 6`.
pub fn blend_compound(r1: &[i32], r2: &[i32], mask: &CompoundMask) -> Result<Vec<i32>> {
    Ok(blend_sum(r1, r2, mask)?.into_iter().map(|s| (s + 32) >> 6).collect())
}

/// Edge directions of the wedge family as integer vectors `(dx, dy)`.
const WEDGE_DIRS: [(i32, i32); 8] = [(0, 1), (1, 0), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)];

pub fn wedge_eligible(size: BlockSize) -> bool {
    [8, 16, 32].contains(&size.w) && [8, 16, 32].contains(&size.h)
}

/// The 16 wedge masks of a size: eight edge directions through the block
/// centre, each in both polarities (`2k` and `2k + 1` are complements).
/// Weights ramp linearly with signed distance `d` from the edge,
/// `m = clamp(32 + 32 d, 0, 64)`, so samples on the edge get 32.
pub fn wedge_masks(size: BlockSize) -> Result<Vec<CompoundMask>> {
    if !wedge_eligible(size) {
        return invalid(format!("no wedges for {}x{}", size.w, size.h));
    }
    let (w, h) = (size.w, size.h);
    let (cx, cy) = ((w / 2) as i32, (h / 2) as i32);
    let mut out = Vec::with_capacity(WEDGE_COUNT);
    for (dx, dy) in WEDGE_DIRS {
        let len = ((dx * dx + dy * dy) as f64).sqrt();
        let mut m = Vec::with_capacity(w * h);
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                // Positive on the left of the edge direction (x right, y down).
                let d = (dx * (y - cy) - dy * (x - cx)) as f64 / len;
                m.push((32.0 + 32.0 * d).round().clamp(0.0, 64.0) as u8);
            }
        }
        let mask = CompoundMask::new(w, h, m)?;
        let flipped = mask.complement();
        out.push(mask);
        out.push(flipped);
    }
    Ok(out)
}
