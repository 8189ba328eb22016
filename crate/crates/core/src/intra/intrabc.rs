//! Block copy from already reconstructed parts of the current frame.

use crate::error::{invalid, Result};
use crate::frame::{MotionVector, Plane};

/// Reconstructed region at the time a block is coded, in luma samples:
/// every superblock row above the current one plus the superblocks to the
/// left in the current row. The current superblock itself is excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodedArea {
    pub sb_size: usize,
    pub cur_x: usize,
    pub cur_y: usize,
}

impl CodedArea {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let (sr, cr) = (y / self.sb_size, self.cur_y / self.sb_size);
        sr < cr || (sr == cr && x / self.sb_size < self.cur_x / self.sb_size)
    }

    fn contains_rect(&self, x: isize, y: isize, w: usize, h: usize) -> bool {
        if x < 0 || y < 0 {
            return false;
        }
        let (x, y) = (x as usize, y as usize);
        (y..y + h).all(|r| (x..x + w).all(|c| self.contains(c, r)))
    }
}

fn full_pel(mv: MotionVector) -> Result<(isize, isize)> {
    if mv.row % 8 != 0 || mv.col % 8 != 0 {
        return invalid("block copy vectors must be whole samples");
    }
    Ok(((mv.row / 8) as isize, (mv.col / 8) as isize))
}

/// Exact copy of the luma block displaced by a whole-sample `mv`.
pub fn intrabc_copy(plane: &Plane, x: usize, y: usize, w: usize, h: usize, mv: MotionVector, area: CodedArea) -> Result<Vec<i32>> {
    let (dr, dc) = full_pel(mv)?;
    let (sx, sy) = (x as isize + dc, y as isize + dr);
    if sx + w as isize > plane.width as isize || sy + h as isize > plane.height as isize || !area.contains_rect(sx, sy, w, h) {
        return invalid("block copy source is not fully reconstructed");
    }
    Ok(plane.block(sx, sy, w, h))
}

/// Chroma counterpart: the luma displacement halves under subsampling, so an
/// odd luma vector lands between chroma samples and is bilinearly averaged.
pub fn intrabc_copy_chroma(
    plane: &Plane,
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    mv: MotionVector,
    area: CodedArea,
) -> Result<Vec<i32>> {
    let (dr, dc) = full_pel(mv)?;
    let (ss_x, ss_y) = (plane.ss_x, plane.ss_y);
    let (ix, fx) = (dc.div_euclid(1 << ss_x), dc.rem_euclid(1 << ss_x) as usize);
    let (iy, fy) = (dr.div_euclid(1 << ss_y), dr.rem_euclid(1 << ss_y) as usize);
    let (sx, sy) = (x as isize + ix, y as isize + iy);
    let (rw, rh) = (w + fx, h + fy);
    if sx + rw as isize > plane.width as isize || sy + rh as isize > plane.height as isize {
        return invalid("block copy source outside the plane");
    }
    let luma_ok = sx >= 0
        && sy >= 0
        && area.contains_rect(sx << ss_x, sy << ss_y, rw << ss_x, rh << ss_y);
    if !luma_ok {
        return invalid("block copy source is not fully reconstructed");
    }
    let src = plane.block(sx, sy, rw, rh);
    let at = |r: usize, c: usize| src[r * rw + c];
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            out.push(match (fx, fy) {
                (0, 0) => at(r, c),
                (1, 0) => (at(r, c) + at(r, c + 1) + 1) >> 1,
                (0, 1) => (at(r, c) + at(r + 1, c) + 1) >> 1,
                _ => (at(r, c) + at(r, c + 1) + at(r + 1, c) + at(r + 1, c + 1) + 2) >> 2,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Plane {
        Plane::from_vec(w, h, 8, (0..w * h).map(|i| (i % 251) as u16).collect()).unwrap()
    }

    #[test]
    fn copies_left_neighbour() {
        let p = ramp(32, 16);
        let area = CodedArea { sb_size: 8, cur_x: 8, cur_y: 0 };
        let b = intrabc_copy(&p, 8, 0, 8, 8, MotionVector::new(0, -64), area).unwrap();
        assert_eq!(b, p.block(0, 0, 8, 8));
    }

    #[test]
    fn rejects_uncoded_and_subpel() {
        let p = ramp(32, 16);
        let area = CodedArea { sb_size: 8, cur_x: 8, cur_y: 0 };
        assert!(intrabc_copy(&p, 8, 0, 8, 8, MotionVector::new(0, 0), area).is_err());
        assert!(intrabc_copy(&p, 8, 0, 8, 8, MotionVector::new(0, 64), area).is_err());
        assert!(intrabc_copy(&p, 8, 0, 8, 8, MotionVector::new(0, -60), area).is_err());
    }

    #[test]
    fn odd_luma_vector_averages_chroma() {
        let c = Plane::from_vec(8, 4, 8, (0..32).map(|i| (i * 7 % 256) as u16).collect()).unwrap().with_subsampling(1, 1);
        let area = CodedArea { sb_size: 8, cur_x: 8, cur_y: 0 };
        // Luma vector of -5 columns: chroma -2.5.
        let b = intrabc_copy_chroma(&c, 4, 0, 2, 2, MotionVector::new(0, -40), area).unwrap();
        let want = |r: usize, col: usize| (c.get(col, r) as i32 + c.get(col + 1, r) as i32 + 1) >> 1;
        assert_eq!(b, vec![want(0, 1), want(0, 2), want(1, 1), want(1, 2)]);
    }
}
