//! Edge-adaptive low-pass filtering across transform block boundaries.
//!
//! A line of samples across an edge is held in spatial order as
//! `[p6 .. p0, q0 .. q6]`, so the edge lies between indices 6 and 7.

use crate::error::{invalid, Result};
use crate::frame::Plane;

/// Samples on each side of an edge that any filter may read.
pub const SIDE: usize = 7;
pub const LINE: usize = 2 * SIDE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PlaneKind {
    Luma,
    Chroma,
}

/// Edge-activity thresholds for one plane and direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct DeblockParams {
    pub t0: u32,
    pub t1: u32,
}

impl DeblockParams {
    pub fn new(t0: u32, t1: u32) -> Self {
        DeblockParams { t0, t1 }
    }

    /// Disables every edge.
    pub const OFF: DeblockParams = DeblockParams { t0: 0, t1: 0 };

    pub fn is_off(&self) -> bool {
        self.t0 == 0 && self.t1 == 0
    }
}

/// Largest filter a boundary admits, from the transform extents across it.
/// 0 means there is no transform on one side.
pub fn filter_length(side1: usize, side2: usize, kind: PlaneKind) -> usize {
    let m = side1.min(side2);
    match (kind, m) {
        (_, 0) => 0,
        (PlaneKind::Luma, m) if m >= 16 => 14,
        (PlaneKind::Luma, m) if m >= 8 => 8,
        (PlaneKind::Chroma, m) if m >= 8 => 6,
        _ => 4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeDecision {
    Skip,
    /// Filter with this length, at most the length requested.
    Filter(usize),
}

/// Flatness tolerance for a depth: 1 at 8 bits, scaled with the range.
pub fn flat_threshold(bit_depth: u32) -> i32 {
    1 << (bit_depth - 8)
}

fn p(line: &[i32; LINE], k: usize) -> i32 {
    line[SIDE - 1 - k]
}

fn q(line: &[i32; LINE], k: usize) -> i32 {
    line[SIDE + k]
}

fn flat(line: &[i32; LINE], reach: usize, tol: i32) -> bool {
    (1..=reach).all(|k| (p(line, k) - p(line, 0)).abs() <= tol && (q(line, k) - q(line, 0)).abs() <= tol)
}

/// Chooses between skipping, the requested filter and shorter fallbacks.
/// Thresholds and flatness tolerance are in sample units of `bit_depth`.
pub fn edge_decision(line: &[i32; LINE], params: DeblockParams, length: usize, bit_depth: u32) -> EdgeDecision {
    if length == 0 {
        return EdgeDecision::Skip;
    }
    let (t0, t1) = (params.t0 as i32, params.t1 as i32);
    let d = |a: i32, b: i32| (a - b).abs();
    if d(p(line, 1), p(line, 0)) > t0
        || d(q(line, 1), q(line, 0)) > t0
        || 2 * d(p(line, 0), q(line, 0)) + d(p(line, 1), q(line, 1)) / 2 > t1
    {
        return EdgeDecision::Skip;
    }
    if length >= 8 && (d(p(line, 3), p(line, 2)) > t0 || d(q(line, 3), q(line, 2)) > t0) {
        return EdgeDecision::Skip;
    }
    let tol = flat_threshold(bit_depth);
    let len = match length {
        14 if flat(line, 6, tol) => 14,
        14 | 8 if flat(line, 3, tol) => 8,
        6 if flat(line, 2, tol) => 6,
        _ => 4,
    };
    EdgeDecision::Filter(len)
}

/// A symmetric kernel with unit DC gain, slid across the edge. Samples past
/// `reach` on either side are replaced by the last sample read.
struct Kernel {
    reach: usize,
    modify: usize,
    weights: &'static [i32],
    shift: u32,
}

const K4: Kernel = Kernel { reach: 2, modify: 1, weights: &[1, 2, 1], shift: 2 };
const K6: Kernel = Kernel { reach: 3, modify: 2, weights: &[1, 2, 2, 2, 1], shift: 3 };
const K8: Kernel = Kernel { reach: 4, modify: 3, weights: &[1, 1, 1, 2, 1, 1, 1], shift: 3 };
const K14: Kernel = Kernel { reach: 7, modify: 6, weights: &[1, 1, 1, 1, 1, 2, 2, 2, 1, 1, 1, 1, 1], shift: 4 };

fn kernel(length: usize) -> Option<&'static Kernel> {
    match length {
        4 => Some(&K4),
        6 => Some(&K6),
        8 => Some(&K8),
        14 => Some(&K14),
        _ => None,
    }
}

/// Taps of the filter of `length` in use, for inspection.
pub fn kernel_weights(length: usize) -> Option<(&'static [i32], u32)> {
    kernel(length).map(|k| (k.weights, k.shift))
}

/// Filters one line. Samples beyond the filter's modify range keep their
/// values; unknown lengths return the line unchanged.
pub fn apply(line: &[i32; LINE], length: usize) -> [i32; LINE] {
    let Some(k) = kernel(length) else { return *line };
    let lo = SIDE - k.reach;
    let hi = SIDE + k.reach - 1;
    let half = k.weights.len() / 2;
    let mut out = *line;
    for i in SIDE - k.modify..SIDE + k.modify {
        let mut acc = 0;
        for (t, &w) in k.weights.iter().enumerate() {
            let j = (i + t).saturating_sub(half).clamp(lo, hi);
            acc += w * line[j];
        }
        out[i] = (acc + (1 << (k.shift - 1))) >> k.shift;
    }
    out
}

/// Transform layout of a plane in 4x4 units: each unit records the
/// transform extents covering it and whether it starts a transform
/// horizontally or vertically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxGrid {
    pub w4: usize,
    pub h4: usize,
    tx: Vec<(u16, u16)>,
    starts: Vec<(bool, bool)>,
}

impl TxGrid {
    /// Covers a `width`×`height` plane with `tw`×`th` transforms.
    pub fn uniform(width: usize, height: usize, tw: usize, th: usize) -> Result<Self> {
        let (w4, h4) = (width.div_ceil(4), height.div_ceil(4));
        let mut g = TxGrid { w4, h4, tx: vec![(0, 0); w4 * h4], starts: vec![(false, false); w4 * h4] };
        g.set_block(0, 0, g.w4 * 4, g.h4 * 4, tw, th)?;
        Ok(g)
    }

    /// Tiles the region at `(x, y)` of extent `w`×`h` with `tw`×`th`
    /// transforms. Coordinates are in samples and multiples of 4.
    pub fn set_block(&mut self, x: usize, y: usize, w: usize, h: usize, tw: usize, th: usize) -> Result<()> {
        if ![4, 8, 16, 32, 64].contains(&tw) || ![4, 8, 16, 32, 64].contains(&th) {
            return invalid(format!("transform {tw}x{th}"));
        }
        if x % 4 != 0 || y % 4 != 0 || w % 4 != 0 || h % 4 != 0 {
            return invalid("transform region must be 4-aligned");
        }
        for r in y / 4..((y + h) / 4).min(self.h4) {
            for c in x / 4..((x + w) / 4).min(self.w4) {
                let i = r * self.w4 + c;
                self.tx[i] = (tw as u16, th as u16);
                self.starts[i] = (((c * 4 - x) % tw) == 0, ((r * 4 - y) % th) == 0);
            }
        }
        Ok(())
    }

    pub fn tx_at(&self, c4: usize, r4: usize) -> (usize, usize) {
        let (w, h) = self.tx[r4 * self.w4 + c4];
        (w as usize, h as usize)
    }

    pub fn starts_at(&self, c4: usize, r4: usize) -> (bool, bool) {
        self.starts[r4 * self.w4 + c4]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeDir {
    /// Edges between horizontally adjacent transforms.
    Vertical,
    Horizontal,
}

/// Counts of the decisions taken while filtering a plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct DeblockStats {
    pub skipped: usize,
    pub filtered: [usize; 4],
}

impl DeblockStats {
    fn record(&mut self, d: EdgeDecision) {
        match d {
            EdgeDecision::Skip => self.skipped += 1,
            EdgeDecision::Filter(l) => {
                let slot = match l {
                    4 => 0,
                    6 => 1,
                    8 => 2,
                    _ => 3,
                };
                self.filtered[slot] += 1;
            }
        }
    }
}

/// Filters every interior transform edge of one direction in place.
/// Decisions are made per sample line across the edge.
pub fn filter_edges(plane: &mut Plane, grid: &TxGrid, dir: EdgeDir, params: DeblockParams, kind: PlaneKind) -> DeblockStats {
    let mut stats = DeblockStats::default();
    if params.is_off() {
        return stats;
    }
    let (w, h) = (plane.width as isize, plane.height as isize);
    let depth = plane.bit_depth;
    for r4 in 0..grid.h4 {
        for c4 in 0..grid.w4 {
            let (sx, sy) = grid.starts_at(c4, r4);
            let length = match dir {
                EdgeDir::Vertical if sx && c4 > 0 => filter_length(grid.tx_at(c4 - 1, r4).0, grid.tx_at(c4, r4).0, kind),
                EdgeDir::Horizontal if sy && r4 > 0 => filter_length(grid.tx_at(c4, r4 - 1).1, grid.tx_at(c4, r4).1, kind),
                _ => 0,
            };
            if length == 0 {
                continue;
            }
            for k in 0..4isize {
                // Position of q0 and the unit step away from the edge.
                let (qx, qy, dx, dy) = match dir {
                    EdgeDir::Vertical => (c4 as isize * 4, r4 as isize * 4 + k, 1, 0),
                    EdgeDir::Horizontal => (c4 as isize * 4 + k, r4 as isize * 4, 0, 1),
                };
                if qx >= w || qy >= h {
                    continue;
                }
                let at = |i: usize| (qx + (i as isize - SIDE as isize) * dx, qy + (i as isize - SIDE as isize) * dy);
                let mut line = [0i32; LINE];
                for (i, s) in line.iter_mut().enumerate() {
                    let (x, y) = at(i);
                    *s = plane.get_clamped(x, y) as i32;
                }
                let d = edge_decision(&line, params, length, depth);
                stats.record(d);
                if let EdgeDecision::Filter(l) = d {
                    let out = apply(&line, l);
                    for (i, &v) in out.iter().enumerate() {
                        let (x, y) = at(i);
                        if v != line[i] && x >= 0 && y >= 0 && x < w && y < h {
                            plane.set(x as usize, y as usize, v);
                        }
                    }
                }
            }
        }
    }
    stats
}

/// Vertical edges of the whole plane, then horizontal edges.
pub fn deblock_plane(plane: &mut Plane, grid: &TxGrid, vertical: DeblockParams, horizontal: DeblockParams, kind: PlaneKind) -> DeblockStats {
    let a = filter_edges(plane, grid, EdgeDir::Vertical, vertical, kind);
    let b = filter_edges(plane, grid, EdgeDir::Horizontal, horizontal, kind);
    DeblockStats {
        skipped: a.skipped + b.skipped,
        filtered: std::array::from_fn(|i| a.filtered[i] + b.filtered[i]),
    }
}
