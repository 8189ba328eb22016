//! Restoration unit tiling and per-unit dispatch to the Wiener or
//! self-guided filter.

use crate::error::{invalid, Error, Result};
use crate::frame::Plane;

use super::sgr::{sgr_denoise, sgr_restore, sgr_solve, SgrParams, SgrProjection};
use super::wiener::{wiener_region, WienerTaps};

pub const UNIT_SIZES: [usize; 3] = [64, 128, 256];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub enum RestorationMode {
    #[default]
    Bypass,
    Wiener { v: WienerTaps, h: WienerTaps },
    SelfGuided { params: SgrParams, proj: SgrProjection },
}

/// Unit grid of one plane. Units are `size` square except the last row
/// and column, which absorb any remainder below `1.5 * size`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RestorationPlan {
    pub size: usize,
    pub cols: usize,
    pub rows: usize,
    pub width: usize,
    pub height: usize,
    pub units: Vec<RestorationMode>,
}

/// Units along a dimension: the nearest whole count, at least one.
pub fn unit_count(extent: usize, size: usize) -> usize {
    ((extent + size / 2) / size).max(1)
}

impl RestorationPlan {
    pub fn new(width: usize, height: usize, size: usize) -> Result<Self> {
        if !UNIT_SIZES.contains(&size) {
            return invalid(format!("restoration unit size {size}"));
        }
        let (cols, rows) = (unit_count(width, size), unit_count(height, size));
        Ok(RestorationPlan { size, cols, rows, width, height, units: vec![RestorationMode::Bypass; cols * rows] })
    }

    /// Sample rectangle `(x, y, w, h)` of unit `(col, row)`.
    pub fn rect(&self, col: usize, row: usize) -> (usize, usize, usize, usize) {
        let span = |i: usize, n: usize, extent: usize| {
            let start = i * self.size;
            let end = if i + 1 == n { extent } else { start + self.size };
            (start, end - start)
        };
        let (x, w) = span(col, self.cols, self.width);
        let (y, h) = span(row, self.rows, self.height);
        (x, y, w, h)
    }

    pub fn set(&mut self, col: usize, row: usize, mode: RestorationMode) {
        self.units[row * self.cols + col] = mode;
    }

    pub fn get(&self, col: usize, row: usize) -> RestorationMode {
        self.units[row * self.cols + col]
    }
}

/// Output of one unit. Reads only `src`, so units are independent.
pub fn restore_unit(src: &Plane, rect: (usize, usize, usize, usize), mode: RestorationMode) -> Result<Vec<i32>> {
    let (x, y, w, h) = rect;
    Ok(match mode {
        RestorationMode::Bypass => src.block(x as isize, y as isize, w, h),
        RestorationMode::Wiener { v, h: ht } => wiener_region(src, x, y, w, h, v, ht),
        RestorationMode::SelfGuided { params, proj } => {
            let base = src.block(x as isize, y as isize, w, h);
            let x1 = sgr_denoise(src, x, y, w, h, params.r1, params.e1)?;
            let x2 = sgr_denoise(src, x, y, w, h, params.r2, params.e2)?;
            sgr_restore(&base, &x1, &x2, proj, src.max_value() as i32)
        }
    })
}

/// Applies every unit of `plan` to `src`.
pub fn restore_plane(src: &Plane, plan: &RestorationPlan) -> Result<Plane> {
    if plan.width != src.width || plan.height != src.height {
        return Err(Error::DimensionMismatch(format!(
            "plan {}x{} for plane {}x{}",
            plan.width, plan.height, src.width, src.height
        )));
    }
    let mut dst = src.clone();
    for row in 0..plan.rows {
        for col in 0..plan.cols {
            let rect = plan.rect(col, row);
            let out = restore_unit(src, rect, plan.get(col, row))?;
            dst.put_block(rect.0, rect.1, rect.2, rect.3, &out);
        }
    }
    Ok(dst)
}

/// Encoder choice for one unit: the self-guided projection against
/// `source` when it lowers the squared error, else bypass.
pub fn choose_self_guided(recon: &Plane, source: &Plane, rect: (usize, usize, usize, usize), params: SgrParams) -> Result<RestorationMode> {
    params.validate()?;
    let (x, y, w, h) = rect;
    let base = recon.block(x as isize, y as isize, w, h);
    let target = source.block(x as isize, y as isize, w, h);
    let x1 = sgr_denoise(recon, x, y, w, h, params.r1, params.e1)?;
    let x2 = sgr_denoise(recon, x, y, w, h, params.r2, params.e2)?;
    let proj = sgr_solve(&base, &x1, &x2, &target, recon.max_value() as i32);
    Ok(if proj == SgrProjection::default() { RestorationMode::Bypass } else { RestorationMode::SelfGuided { params, proj } })
}
