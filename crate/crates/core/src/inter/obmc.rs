//! Overlapped block motion compensation and inter-intra blending.

use super::compound::{blend_compound, wedge_masks, CompoundMask};
use super::{interp_subpel, InterpFilters};
use crate::error::{invalid, Result};
use crate::frame::{BlockSize, MotionVector, Plane};

/// Most neighbours used along each side.
pub const MAX_OBMC_NEIGHBOURS: usize = 4;

/// Raised-cosine weights of the current prediction over the first `n / 2`
/// rows (or columns) of a side of length `n`:
/// `round_half_up(64 * (sin(pi (k + 1/2) / n) / 2 + 1/2))`.
pub fn obmc_weights(n: usize) -> Vec<u8> {
    (0..n / 2)
        .map(|k| {
            let s = (std::f64::consts::PI / n as f64 * (k as f64 + 0.5)).sin();
            (64.0 * (0.5 * s + 0.5) + 0.5).floor() as u8
        })
        .collect()
}

/// A neighbour's prediction covering `extent` samples along the block edge,
/// starting at `offset`, and half the block deep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapPred {
    pub offset: usize,
    pub extent: usize,
    pub samples: Vec<i32>,
}

/// Blends the above neighbours into the top half, then the left neighbours
/// into the left half of the intermediate result.
pub fn obmc_apply(pred: &[i32], w: usize, h: usize, above: &[OverlapPred], left: &[OverlapPred]) -> Result<Vec<i32>> {
    if above.len() > MAX_OBMC_NEIGHBOURS || left.len() > MAX_OBMC_NEIGHBOURS {
        return invalid("too many overlapped neighbours");
    }
    let mut out = pred.to_vec();
    let wy = obmc_weights(h);
    for nb in above {
        if nb.offset + nb.extent > w || nb.samples.len() != nb.extent * (h / 2) {
            return invalid("above neighbour does not fit the block");
        }
        for (y, &m) in wy.iter().enumerate() {
            for k in 0..nb.extent {
                let i = y * w + nb.offset + k;
                let m = m as i32;
                out[i] = (m * out[i] + (64 - m) * nb.samples[y * nb.extent + k] + 32) >> 6;
            }
        }
    }
    let wx = obmc_weights(w);
    for nb in left {
        if nb.offset + nb.extent > h || nb.samples.len() != nb.extent * (w / 2) {
            return invalid("left neighbour does not fit the block");
        }
        for k in 0..nb.extent {
            for (x, &m) in wx.iter().enumerate() {
                let i = (nb.offset + k) * w + x;
                let m = m as i32;
                out[i] = (m * out[i] + (64 - m) * nb.samples[k * (w / 2) + x] + 32) >> 6;
            }
        }
    }
    Ok(out)
}

/// A neighbouring block's vector and the span it shares with the current block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObmcNeighbour {
    pub mv: MotionVector,
    pub offset: usize,
    pub extent: usize,
}

/// Builds each neighbour's overlapped prediction from `reference` and blends.
#[allow(clippy::too_many_arguments)]
pub fn obmc_blend(
    reference: &Plane,
    x: usize,
    y: usize,
    size: BlockSize,
    pred: &[i32],
    filters: InterpFilters,
    above: &[ObmcNeighbour],
    left: &[ObmcNeighbour],
) -> Result<Vec<i32>> {
    let (w, h) = (size.w, size.h);
    let a: Vec<OverlapPred> = above
        .iter()
        .map(|n| OverlapPred {
            offset: n.offset,
            extent: n.extent,
            samples: interp_subpel(reference, x + n.offset, y, n.extent, h / 2, n.mv, filters),
        })
        .collect();
    let l: Vec<OverlapPred> = left
        .iter()
        .map(|n| OverlapPred {
            offset: n.offset,
            extent: n.extent,
            samples: interp_subpel(reference, x, y + n.offset, w / 2, n.extent, n.mv, filters),
        })
        .collect();
    obmc_apply(pred, w, h, &a, &l)
}

/// Intra modes allowed inside an inter-intra block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum InterIntraMode {
    Dc,
    V,
    H,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterIntraKind {
    Mode(InterIntraMode),
    Wedge(usize),
}

/// Uniform intra weight of the DC mode.
pub const INTERINTRA_DC_WEIGHT: u8 = 32;

/// Intra weight at normalised distance `t` from the predicting edge:
/// `round(60 * 2^(-4t))`, halving every quarter block.
fn decay(t: f64) -> u8 {
    (60.0 * (-4.0 * t).exp2()).round() as u8
}

/// Intra-weight mask decaying away from the edge the mode predicts from.
pub fn interintra_mask(mode: InterIntraMode, size: BlockSize) -> CompoundMask {
    let (w, h) = (size.w, size.h);
    let mut m = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (ty, tx) = (y as f64 / h as f64, x as f64 / w as f64);
            m.push(match mode {
                InterIntraMode::Dc => INTERINTRA_DC_WEIGHT,
                InterIntraMode::V => decay(ty),
                InterIntraMode::H => decay(tx),
                InterIntraMode::Smooth => decay(tx.min(ty)),
            });
        }
    }
    CompoundMask::new(w, h, m).expect("weights are at most 60")
}

/// Combines an intra and an inter prediction; the mask weights intra.
pub fn interintra_blend(inter: &[i32], intra: &[i32], size: BlockSize, kind: InterIntraKind) -> Result<Vec<i32>> {
    let mask = match kind {
        InterIntraKind::Mode(m) => interintra_mask(m, size),
        InterIntraKind::Wedge(i) => {
            let all = wedge_masks(size)?;
            match all.into_iter().nth(i) {
                Some(m) => m,
                None => return invalid(format!("wedge index {i}")),
            }
        }
    };
    blend_compound(intra, inter, &mask)
}
