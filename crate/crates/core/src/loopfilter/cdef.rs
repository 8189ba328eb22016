//! Directional deringing over 8x8 units: a line-variance direction search
//! followed by constrained primary taps along the direction and secondary
//! taps 45 degrees off it.

use crate::error::{invalid, Result};
use crate::frame::Plane;

pub const UNIT: usize = 8;
/// Side of the area sharing one strength group.
pub const GROUP_BLOCK: usize = 64;
pub const MAX_GROUPS: usize = 8;
pub const DAMPING_RANGE: std::ops::RangeInclusive<u32> = 3..=8;
/// Common denominator of line-length reciprocals 1..8.
pub const COST_SCALE: i64 = 840;

/// Line index of pixel `(i, j)` (row, column) under direction `d`.
/// Direction 0 runs at 45 degrees up-right, 2 is horizontal, 4 is 135
/// degrees and 6 is vertical; odd directions are the 22.5 degree steps.
pub fn line_index(d: usize, i: usize, j: usize) -> usize {
    match d {
        0 => i + j,
        1 => i + j / 2,
        2 => i,
        3 => 3 + i - j / 2,
        4 => 7 + i - j,
        5 => 3 - i / 2 + j,
        6 => j,
        7 => i / 2 + j,
        _ => panic!("direction {d}"),
    }
}

/// Lines per direction.
pub const LINES: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionSearch {
    pub dir: usize,
    /// `COST_SCALE` times the within-line squared error of each direction.
    pub costs: [i64; 8],
}

/// Picks the direction whose lines have the least total squared deviation
/// from their means. Ties go to the lowest index. Costs are exact.
pub fn find_direction(block: &[i32]) -> DirectionSearch {
    assert_eq!(block.len(), UNIT * UNIT);
    let total_sq: i64 = block.iter().map(|&v| v as i64 * v as i64).sum();
    let mut costs = [0i64; 8];
    for (d, cost) in costs.iter_mut().enumerate() {
        let mut sums = [0i64; LINES];
        let mut counts = [0i64; LINES];
        for i in 0..UNIT {
            for j in 0..UNIT {
                let k = line_index(d, i, j);
                sums[k] += block[i * UNIT + j] as i64;
                counts[k] += 1;
            }
        }
        let explained: i64 = (0..LINES).filter(|&k| counts[k] > 0).map(|k| sums[k] * sums[k] * (COST_SCALE / counts[k])).sum();
        *cost = total_sq * COST_SCALE - explained;
    }
    let dir = (0..8).min_by_key(|&d| (costs[d], d)).unwrap();
    DirectionSearch { dir, costs }
}

/// Tap offsets `(row, col)` at distance 1 and 2 along each direction.
pub const DIRECTIONS: [[(isize, isize); 2]; 8] = [
    [(-1, 1), (-2, 2)],
    [(0, 1), (-1, 2)],
    [(0, 1), (0, 2)],
    [(0, 1), (1, 2)],
    [(1, 1), (2, 2)],
    [(1, 0), (2, 1)],
    [(1, 0), (2, 0)],
    [(1, 0), (2, -1)],
];

/// Primary weights in 1/16 by strength parity.
pub const PRIMARY_TAPS: [[i32; 2]; 2] = [[4, 2], [3, 3]];
pub const SECONDARY_TAPS: [i32; 2] = [2, 1];

fn floor_log2(s: u32) -> u32 {
    31 - s.leading_zeros()
}

/// Limits a neighbour difference: full weight for small differences,
/// tapering to zero as `|diff|` grows past the strength. Odd in `diff`.
pub fn constrain(diff: i32, s: u32, damping: u32) -> i32 {
    if s == 0 {
        return 0;
    }
    let shift = damping.saturating_sub(floor_log2(s));
    let mag = diff.unsigned_abs();
    let limited = mag.min((s as i64 - (mag >> shift) as i64).max(0) as u32) as i32;
    if diff < 0 {
        -limited
    } else {
        limited
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct CdefStrength {
    pub primary: u32,
    pub secondary: u32,
}

/// Strength presets and their assignment to 64x64 areas.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CdefParams {
    /// `(luma, chroma)` strengths per preset.
    pub groups: Vec<(CdefStrength, CdefStrength)>,
    pub damping: u32,
    /// Preset index per 64x64 luma area in raster order; an empty map
    /// selects preset 0 everywhere.
    pub selection: Vec<u8>,
}

impl CdefParams {
    pub fn uniform(luma: CdefStrength, chroma: CdefStrength, damping: u32) -> Result<Self> {
        let p = CdefParams { groups: vec![(luma, chroma)], damping, selection: Vec::new() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() || self.groups.len() > MAX_GROUPS {
            return invalid(format!("{} strength presets", self.groups.len()));
        }
        if !DAMPING_RANGE.contains(&self.damping) {
            return invalid(format!("damping {}", self.damping));
        }
        if self.selection.iter().any(|&g| g as usize >= self.groups.len()) {
            return invalid("preset selection out of range");
        }
        Ok(())
    }

    /// Preset covering luma position `(x, y)` in a frame `width` wide.
    pub fn group_at(&self, x: usize, y: usize, width: usize) -> usize {
        if self.selection.is_empty() {
            return 0;
        }
        let cols = width.div_ceil(GROUP_BLOCK);
        let i = (y / GROUP_BLOCK) * cols + x / GROUP_BLOCK;
        self.selection.get(i).copied().unwrap_or(0) as usize
    }
}

/// Filters the 8x8 unit at `(x, y)` of `src` with direction `d`. Taps
/// outside the plane do not contribute. Returns row-major output.
pub fn filter_unit(src: &Plane, x: usize, y: usize, d: usize, s: CdefStrength, damping: u32) -> Vec<i32> {
    let pri = PRIMARY_TAPS[(s.primary & 1) as usize];
    let sec_dirs = [(d + 2) % 8, (d + 6) % 8];
    let (w, h) = (src.width as isize, src.height as isize);
    let fetch = |r: isize, c: isize| -> Option<i32> {
        (r >= 0 && c >= 0 && r < h && c < w).then(|| src.get(c as usize, r as usize) as i32)
    };
    let mut out = Vec::with_capacity(UNIT * UNIT);
    for i in 0..UNIT as isize {
        for j in 0..UNIT as isize {
            let (r, c) = (y as isize + i, x as isize + j);
            let Some(v) = fetch(r, c) else {
                out.push(0);
                continue;
            };
            let mut sum = 0;
            for k in 0..2 {
                let (dr, dc) = DIRECTIONS[d][k];
                for sign in [1, -1] {
                    if let Some(t) = fetch(r + sign * dr, c + sign * dc) {
                        sum += pri[k] * constrain(t - v, s.primary, damping);
                    }
                }
                for &sd in &sec_dirs {
                    let (dr, dc) = DIRECTIONS[sd][k];
                    for sign in [1, -1] {
                        if let Some(t) = fetch(r + sign * dr, c + sign * dc) {
                            sum += SECONDARY_TAPS[k] * constrain(t - v, s.secondary, damping);
                        }
                    }
                }
            }
            // Round half away from zero in 1/16.
            let delta = (sum + 8 - (sum < 0) as i32) >> 4;
            out.push((v + delta).clamp(0, src.max_value() as i32));
        }
    }
    out
}

/// Largest change a unit can see: the weighted strengths in 1/16,
/// rounded up.
pub fn perturbation_bound(s: CdefStrength) -> i32 {
    let pri = PRIMARY_TAPS[(s.primary & 1) as usize];
    let total = 2 * (pri[0] + pri[1]) * s.primary as i32 + 4 * (SECONDARY_TAPS[0] + SECONDARY_TAPS[1]) * s.secondary as i32;
    (total + 15) / 16
}

/// Filters a plane. Every unit reads the unfiltered input. `strength`
/// maps a unit's top-left sample position to its strengths. Returns the
/// filtered plane and the chosen direction per unit.
pub fn cdef_plane(src: &Plane, damping: u32, strength: impl Fn(usize, usize) -> CdefStrength) -> (Plane, Vec<usize>) {
    let mut dst = src.clone();
    let mut dirs = Vec::new();
    for y in (0..src.height).step_by(UNIT) {
        for x in (0..src.width).step_by(UNIT) {
            let d = find_direction(&src.block(x as isize, y as isize, UNIT, UNIT)).dir;
            dirs.push(d);
            let s = strength(x, y);
            if s.primary == 0 && s.secondary == 0 {
                continue;
            }
            let out = filter_unit(src, x, y, d, s, damping);
            dst.put_block(x, y, UNIT, UNIT, &out);
        }
    }
    (dst, dirs)
}
