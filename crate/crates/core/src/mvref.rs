//! Motion vector referencing: the spatial neighbour scan, motion-field
//! projection under the 64x64 locality window, compact vector storage and
//! the ranked candidate list.

use crate::error::{invalid, Result};
use crate::frame::MotionVector;

/// Largest stored vector component magnitude; larger vectors are dropped.
pub const MV_STORE_LIMIT: i32 = 1 << 12;
/// Reference frames whose motion may feed the motion field.
pub const MAX_STORED_REFS: u8 = 4;
pub const MAX_SPATIAL_CANDIDATES: usize = 8;
pub const MAX_REF_LIST: usize = 4;

/// Motion of one 4x4 unit: one or two references and their vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MotionInfo {
    pub refs: [u8; 2],
    pub mvs: [MotionVector; 2],
    pub compound: bool,
}

impl MotionInfo {
    pub fn single(r: u8, mv: MotionVector) -> Self {
        MotionInfo { refs: [r, r], mvs: [mv, MotionVector::ZERO], compound: false }
    }

    pub fn pair(r0: u8, r1: u8, mv0: MotionVector, mv1: MotionVector) -> Self {
        MotionInfo { refs: [r0, r1], mvs: [mv0, mv1], compound: true }
    }
}

/// Reference choice of the block being predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefSelector {
    Single(u8),
    Pair(u8, u8),
}

/// Vector or vector pair a neighbour offers for `sel`. Single-reference
/// blocks take either half of a compound neighbour that uses their
/// reference; compound blocks need the same ordered pair.
fn offer(info: &MotionInfo, sel: RefSelector) -> Option<[MotionVector; 2]> {
    match sel {
        RefSelector::Single(r) => {
            if info.refs[0] == r {
                Some([info.mvs[0], MotionVector::ZERO])
            } else if info.compound && info.refs[1] == r {
                Some([info.mvs[1], MotionVector::ZERO])
            } else {
                None
            }
        }
        RefSelector::Pair(a, b) => (info.compound && info.refs == [a, b]).then_some(info.mvs),
    }
}

/// Decoded motion at 4x4 granularity; `None` marks intra or unavailable units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionGrid {
    pub w4: usize,
    pub h4: usize,
    cells: Vec<Option<MotionInfo>>,
}

impl MotionGrid {
    pub fn new(w4: usize, h4: usize) -> Self {
        MotionGrid { w4, h4, cells: vec![None; w4 * h4] }
    }

    pub fn get(&self, x4: isize, y4: isize) -> Option<&MotionInfo> {
        if x4 < 0 || y4 < 0 || x4 as usize >= self.w4 || y4 as usize >= self.h4 {
            return None;
        }
        self.cells[y4 as usize * self.w4 + x4 as usize].as_ref()
    }

    pub fn set(&mut self, x4: usize, y4: usize, info: Option<MotionInfo>) {
        self.cells[y4 * self.w4 + x4] = info;
    }

    /// Fills a rectangle of 4x4 units.
    pub fn fill(&mut self, x4: usize, y4: usize, w4: usize, h4: usize, info: Option<MotionInfo>) {
        for y in y4..(y4 + h4).min(self.h4) {
            for x in x4..(x4 + w4).min(self.w4) {
                self.set(x, y, info);
            }
        }
    }
}

/// Block position and size in 4x4 units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockGeometry {
    pub x4: usize,
    pub y4: usize,
    pub w4: usize,
    pub h4: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MvCandidate {
    /// Second vector is zero for single-reference candidates.
    pub mvs: [MotionVector; 2],
    /// Units the vector was seen in; at least 1.
    pub weight: u32,
    /// Seen in the nearest row, the nearest column or the top-right unit.
    pub from_nearest: bool,
}

/// One visited unit of the spatial scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanStep {
    pub x4: isize,
    pub y4: isize,
    pub nearest: bool,
}

/// Units visited for a block, in order: the nearest row and column at 4x4
/// granularity, the top-right and top-left units, then the second and
/// third 8x8 rows and columns interleaved (row 2, column 2, row 3,
/// column 3). An 8x8 unit is represented by its bottom-right 4x4 unit.
pub fn spatial_scan_order(b: BlockGeometry) -> Vec<ScanStep> {
    let (x4, y4) = (b.x4 as isize, b.y4 as isize);
    let (w4, h4) = (b.w4 as isize, b.h4 as isize);
    let mut s = Vec::new();
    s.extend((x4..x4 + w4).map(|x| ScanStep { x4: x, y4: y4 - 1, nearest: true }));
    s.extend((y4..y4 + h4).map(|y| ScanStep { x4: x4 - 1, y4: y, nearest: true }));
    s.push(ScanStep { x4: x4 + w4, y4: y4 - 1, nearest: true });
    s.push(ScanStep { x4: x4 - 1, y4: y4 - 1, nearest: false });
    // 8x8 row and column holding the nearest 4x4 row and column.
    let (r1, c1) = ((y4 - 1).div_euclid(2), (x4 - 1).div_euclid(2));
    let cols8 = x4.div_euclid(2)..=(x4 + w4 - 1).div_euclid(2);
    let rows8 = y4.div_euclid(2)..=(y4 + h4 - 1).div_euclid(2);
    for d in 1..=2 {
        s.extend(cols8.clone().map(|c| ScanStep { x4: 2 * c + 1, y4: 2 * (r1 - d) + 1, nearest: false }));
        s.extend(rows8.clone().map(|r| ScanStep { x4: 2 * (c1 - d) + 1, y4: 2 * r + 1, nearest: false }));
    }
    s
}

/// Distinct neighbour vectors for `sel` in scan order, at most eight,
/// with their counts. Vectors past the eighth distinct one are ignored.
pub fn scan_spatial_refs(grid: &MotionGrid, b: BlockGeometry, sel: RefSelector) -> Vec<MvCandidate> {
    let mut out: Vec<MvCandidate> = Vec::new();
    for step in spatial_scan_order(b) {
        let Some(mvs) = grid.get(step.x4, step.y4).and_then(|i| offer(i, sel)) else {
            continue;
        };
        if let Some(c) = out.iter_mut().find(|c| c.mvs == mvs) {
            c.weight += 1;
            c.from_nearest |= step.nearest;
        } else if out.len() < MAX_SPATIAL_CANDIDATES {
            out.push(MvCandidate { mvs, weight: 1, from_nearest: step.nearest });
        }
    }
    out
}

/// A stored vector and 2-bit reference index in one 32-bit word: row in
/// bits 0..15, column in bits 15..30 (15-bit two's complement each), the
/// index in bits 30..32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompactMvRecord(pub u32);

const FIELD_BITS: u32 = 15;
const FIELD_MASK: u32 = (1 << FIELD_BITS) - 1;

/// `None` when a component exceeds 2^12 in magnitude or the index needs
/// more than 2 bits.
pub fn pack_mv(mv: MotionVector, ref_idx: u8) -> Option<CompactMvRecord> {
    if mv.row.abs() > MV_STORE_LIMIT || mv.col.abs() > MV_STORE_LIMIT || ref_idx >= MAX_STORED_REFS {
        return None;
    }
    let r = mv.row as u32 & FIELD_MASK;
    let c = mv.col as u32 & FIELD_MASK;
    Some(CompactMvRecord(r | (c << FIELD_BITS) | ((ref_idx as u32) << (2 * FIELD_BITS))))
}

pub fn unpack_mv(rec: CompactMvRecord) -> (MotionVector, u8) {
    let sext = |v: u32| ((v << (32 - FIELD_BITS)) as i32) >> (32 - FIELD_BITS);
    let row = sext(rec.0 & FIELD_MASK);
    let col = sext((rec.0 >> FIELD_BITS) & FIELD_MASK);
    (MotionVector::new(row, col), (rec.0 >> (2 * FIELD_BITS)) as u8)
}

/// Saved motion of a coded frame, one record per 8x8 block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredMotion {
    pub w8: usize,
    pub h8: usize,
    pub records: Vec<Option<CompactMvRecord>>,
}

impl StoredMotion {
    pub fn new(w8: usize, h8: usize) -> Self {
        StoredMotion { w8, h8, records: vec![None; w8 * h8] }
    }

    /// Stores the first vector of each 8x8 block's bottom-right 4x4 unit.
    /// Compound blocks keep only their first vector; references map to
    /// stored indices through `ref_slot`, and unmapped ones are dropped.
    pub fn from_grid(grid: &MotionGrid, ref_slot: impl Fn(u8) -> Option<u8>) -> Self {
        let (w8, h8) = (grid.w4.div_ceil(2), grid.h4.div_ceil(2));
        let mut s = StoredMotion::new(w8, h8);
        for r in 0..h8 {
            for c in 0..w8 {
                let x4 = (2 * c + 1).min(grid.w4 - 1) as isize;
                let y4 = (2 * r + 1).min(grid.h4 - 1) as isize;
                s.records[r * w8 + c] = grid.get(x4, y4).and_then(|i| pack_mv(i.mvs[0], ref_slot(i.refs[0])?));
            }
        }
        s
    }

    pub fn get(&self, row: usize, col: usize) -> Option<CompactMvRecord> {
        self.records[row * self.w8 + col]
    }
}

/// Signed display-order distances of one projection. A stored vector at
/// block `B` of source frame `S` with index `i` spans `d1 = t(ref_i) - t(S)`;
/// `d3 = t(current) - t(S)` and `d2 = t(target) - t(current)`. The
/// trajectory meets the current frame at `B + mv * d3 / d1` and continues
/// to the target with `mf = mv * d2 / d1`. The current frame lying between
/// `S` and `ref_i` is interpolation, anything else extrapolation; the signs
/// of the distances carry the same-side relationships.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionSetup {
    /// `d1` per stored reference index; zero marks an unusable index.
    pub ref_spans: [i32; MAX_STORED_REFS as usize],
    pub d3: i32,
    pub d2: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Origin {
    Interpolated,
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldEntry {
    pub mv: MotionVector,
    pub origin: Origin,
}

/// Projected vectors of the current frame toward one reference, per 8x8.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionField {
    pub w8: usize,
    pub h8: usize,
    entries: Vec<Option<FieldEntry>>,
}

/// One accepted projection: source block and landing block (row, col).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldWrite {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub origin: Origin,
    /// Whether the entry was stored (an earlier entry can take precedence).
    pub stored: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProjectionReport {
    pub writes: Vec<FieldWrite>,
    pub outside_window: usize,
    pub outside_frame: usize,
}

/// `v * n / d` rounded half away from zero.
fn scale(v: i32, n: i32, d: i32) -> i32 {
    let (p, d) = (v as i64 * n as i64, d as i64);
    let q = (2 * p.abs() + d.abs()) / (2 * d.abs());
    (if (p < 0) != (d < 0) { -q } else { q }) as i32
}

/// Whether a landing block lies in the window of its source block, in 8x8
/// units: the rows of the source's 64x64 block, and columns from one 64x64
/// block left of it to one block right of it.
pub fn in_projection_window(from: (usize, usize), to: (isize, isize)) -> bool {
    let base_row = ((from.0 >> 3) << 3) as isize;
    let base_col = ((from.1 >> 3) << 3) as isize;
    (base_row..base_row + 8).contains(&to.0) && (base_col - 8..base_col + 16).contains(&to.1)
}

impl MotionField {
    pub fn new(w8: usize, h8: usize) -> Self {
        MotionField { w8, h8, entries: vec![None; w8 * h8] }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<FieldEntry> {
        self.entries[row * self.w8 + col]
    }

    /// Stores `e` unless the block already holds an interpolated entry or
    /// an entry of the same origin; the first entry of a kind is kept.
    fn offer(&mut self, row: usize, col: usize, e: FieldEntry) -> bool {
        let slot = &mut self.entries[row * self.w8 + col];
        let take = match slot {
            None => true,
            Some(old) => old.origin == Origin::Extrapolated && e.origin == Origin::Interpolated,
        };
        if take {
            *slot = Some(e);
        }
        take
    }

    /// Projects every stored vector of a source frame into this field.
    /// Landing blocks outside the window or the frame are discarded.
    pub fn project(&mut self, stored: &StoredMotion, setup: &ProjectionSetup) -> ProjectionReport {
        let mut rep = ProjectionReport::default();
        for row in 0..stored.h8 {
            for col in 0..stored.w8 {
                let Some(rec) = stored.get(row, col) else { continue };
                let (mv, idx) = unpack_mv(rec);
                let d1 = setup.ref_spans[idx as usize];
                if d1 == 0 {
                    continue;
                }
                let origin = if setup.d3.signum() == d1.signum() && setup.d3.abs() < d1.abs() {
                    Origin::Interpolated
                } else {
                    Origin::Extrapolated
                };
                // Block centre in 1/8 sample, moved along the trajectory.
                let cy = (row as i32 * 8 + 4) * 8 + scale(mv.row, setup.d3, d1);
                let cx = (col as i32 * 8 + 4) * 8 + scale(mv.col, setup.d3, d1);
                let to = (cy.div_euclid(64) as isize, cx.div_euclid(64) as isize);
                if !in_projection_window((row, col), to) {
                    rep.outside_window += 1;
                    continue;
                }
                if to.0 < 0 || to.1 < 0 || to.0 as usize >= self.h8 || to.1 as usize >= self.w8 {
                    rep.outside_frame += 1;
                    continue;
                }
                let to = (to.0 as usize, to.1 as usize);
                let e = FieldEntry { mv: MotionVector::new(scale(mv.row, setup.d2, d1), scale(mv.col, setup.d2, d1)), origin };
                let stored_now = self.offer(to.0, to.1, e);
                rep.writes.push(FieldWrite { from: (row, col), to, origin, stored: stored_now });
            }
        }
        rep
    }
}

pub fn project_motion_field(stored: &StoredMotion, setup: &ProjectionSetup) -> Result<(MotionField, ProjectionReport)> {
    if setup.d2 == 0 {
        return invalid("target reference coincides with the current frame");
    }
    let mut f = MotionField::new(stored.w8, stored.h8);
    let rep = f.project(stored, setup);
    Ok((f, rep))
}

/// Distinct field vectors over the 8x8 blocks a block covers, with counts.
pub fn temporal_candidates(field: &MotionField, b: BlockGeometry) -> Vec<MvCandidate> {
    let mut out: Vec<MvCandidate> = Vec::new();
    for r in b.y4 / 2..(b.y4 + b.h4).div_ceil(2).min(field.h8) {
        for c in b.x4 / 2..(b.x4 + b.w4).div_ceil(2).min(field.w8) {
            let Some(e) = field.get(r, c) else { continue };
            let mvs = [e.mv, MotionVector::ZERO];
            match out.iter_mut().find(|k| k.mvs == mvs) {
                Some(k) => k.weight += 1,
                None => out.push(MvCandidate { mvs, weight: 1, from_nearest: false }),
            }
        }
    }
    out
}

/// Ranked predictor list and the context of the zero-difference flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefList {
    pub candidates: Vec<MvCandidate>,
    /// `2 * neighbours_have_nonzero_difference + (candidates.len() >= 2)`.
    pub zero_diff_ctx: u8,
}

/// Merges spatial and temporal candidates (equal vectors add their
/// counts), ranks nearest-neighbour candidates first and each group by
/// descending count with earlier input first on ties, and keeps four.
pub fn build_ref_list(spatial: &[MvCandidate], temporal: &[MvCandidate], neighbour_nonzero_diff: bool) -> RefList {
    let mut all: Vec<MvCandidate> = Vec::new();
    for c in spatial.iter().chain(temporal) {
        match all.iter_mut().find(|k| k.mvs == c.mvs) {
            Some(k) => {
                k.weight += c.weight;
                k.from_nearest |= c.from_nearest;
            }
            None => all.push(*c),
        }
    }
    all.sort_by(|a, b| b.from_nearest.cmp(&a.from_nearest).then(b.weight.cmp(&a.weight)));
    all.truncate(MAX_REF_LIST);
    let ctx = 2 * neighbour_nonzero_diff as u8 + (all.len() >= 2) as u8;
    RefList { candidates: all, zero_diff_ctx: ctx }
}
