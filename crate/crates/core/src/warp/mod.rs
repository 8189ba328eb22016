//! Affine motion: local model estimation from neighbouring vectors, shear
//! factorisation with its validity bounds, and the two-stage 1/64-sample
//! warp over 8x8 units.

pub mod filters;

use crate::error::{invalid, Result};
use crate::frame::{BlockSize, MotionVector, Plane};
use crate::inter::{round2, ROUND_H, ROUND_V};
use filters::WARP_FILTERS;

/// Fractional bits of the non-translational parameters.
pub const MODEL_BITS: u32 = 12;
pub const MODEL_ONE: i32 = 1 << MODEL_BITS;
/// Fractional bits of warp sample positions.
pub const POS_BITS: u32 = 6;
/// Largest usable neighbour vector difference per component, 1/8 sample.
pub const MAX_MV_DIFF: i32 = 64;
pub const MAX_NEIGHBOURS: usize = 8;
/// Side of a warp unit.
pub const UNIT: usize = 8;
/// Side of the reference window of one unit.
pub const WINDOW: usize = 15;
/// Multiplies per unit: `15 * 8 * 8` horizontal plus `8 * 8 * 8` vertical.
pub const UNIT_MULTIPLIES: u64 = 1472;

/// Six-parameter model. A sample at `p` in a block centred at `c` projects
/// to `M (p - c) + c + t`, with `M = [h11 h12; h21 h22]` in units of
/// 2^-12 and `t = (h13, h23)` the block's vector in 1/8 luma sample
/// (`h13` horizontal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct AffineModel {
    pub h11: i32,
    pub h12: i32,
    pub h21: i32,
    pub h22: i32,
    pub h13: i32,
    pub h23: i32,
}

impl AffineModel {
    pub fn translation(mv: MotionVector) -> Self {
        AffineModel { h11: MODEL_ONE, h12: 0, h21: 0, h22: MODEL_ONE, h13: mv.col, h23: mv.row }
    }

    /// Rounds a real matrix to the fixed-point grid.
    pub fn from_matrix(m: [[f64; 2]; 2], mv: MotionVector) -> Self {
        let q = |v: f64| (v * MODEL_ONE as f64).round() as i32;
        AffineModel { h11: q(m[0][0]), h12: q(m[0][1]), h21: q(m[1][0]), h22: q(m[1][1]), h13: mv.col, h23: mv.row }
    }

    pub fn mv(&self) -> MotionVector {
        MotionVector::new(self.h23, self.h13)
    }

    /// Projection of sample `p` of `plane` for a block centred at `c`, in
    /// units of 2^-12 sample. Exact.
    pub fn project(&self, plane: &Plane, c: (i64, i64), p: (i64, i64)) -> (i64, i64) {
        let (u, v) = (p.0 - c.0, p.1 - c.1);
        let tx = ((self.h13 as i64) << (MODEL_BITS - 3)) >> plane.ss_x;
        let ty = ((self.h23 as i64) << (MODEL_BITS - 3)) >> plane.ss_y;
        (
            self.h11 as i64 * u + self.h12 as i64 * v + (c.0 << MODEL_BITS) + tx,
            self.h21 as i64 * u + self.h22 as i64 * v + (c.1 << MODEL_BITS) + ty,
        )
    }
}

/// Shear factors of `M = [1 0; gamma 1+delta] [1+alpha beta; 0 1]`, in
/// units of 2^-12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ShearParams {
    pub alpha: i32,
    pub beta: i32,
    pub gamma: i32,
    pub delta: i32,
}

impl ShearParams {
    /// Both passes stay within one sample of the unsheared offset:
    /// `4|alpha| + 7|beta| < 1` and `4|gamma| + 4|delta| < 1`.
    pub fn is_valid(&self) -> bool {
        4 * self.alpha.abs() + 7 * self.beta.abs() < MODEL_ONE && 4 * self.gamma.abs() + 4 * self.delta.abs() < MODEL_ONE
    }

    /// Multiplies the factors back out, rounding to the model grid.
    pub fn recompose(&self) -> [i32; 4] {
        let h11 = MODEL_ONE + self.alpha;
        let h21 = div_round(self.gamma as i64 * h11 as i64, MODEL_ONE as i64);
        let h22 = MODEL_ONE as i64 + self.delta as i64 + div_round(self.gamma as i64 * self.beta as i64, MODEL_ONE as i64);
        [h11, self.beta, h21 as i32, h22 as i32]
    }
}

/// `n / d` rounded half away from zero.
pub fn div_round(n: i64, d: i64) -> i64 {
    let q = (2 * n.unsigned_abs() as i128 + d.unsigned_abs() as i128) / (2 * d.unsigned_abs() as i128);
    let q = q as i64;
    if (n < 0) != (d < 0) {
        -q
    } else {
        q
    }
}

/// Fractional bits of the reciprocal.
pub const RECIP_BITS: u32 = 30;

/// `x / d` through a 16-bit reciprocal: `|d| ~ dn * 2^e` with `dn` in
/// `[2^15, 2^16)` (rounded half up), `r = round(2^30 / dn)` (at most 2^15),
/// result `round(|x| r / 2^(30 + e))` with the sign of `x / d`.
pub fn div_recip(x: i64, d: i64) -> i64 {
    assert!(d != 0, "division by zero");
    let ad = d.unsigned_abs();
    let mut e = 64 - ad.leading_zeros() as i32 - 16;
    let mut dn = if e > 0 { (ad + (1 << (e - 1))) >> e } else { ad << -e };
    if dn == 1 << 16 {
        dn >>= 1;
        e += 1;
    }
    let r = ((1u64 << RECIP_BITS) + dn / 2) / dn;
    let shift = (RECIP_BITS as i32 + e) as u32;
    let q = ((x.unsigned_abs() as u128 * r as u128 + (1u128 << (shift - 1))) >> shift) as i64;
    if (x < 0) != (d < 0) {
        -q
    } else {
        q
    }
}

/// Shear factors without the validity check. Fails only for `h11 = 0`.
pub fn shear_params(m: &AffineModel) -> Result<ShearParams> {
    if m.h11 == 0 {
        return invalid("h11 is zero");
    }
    let h11 = m.h11 as i64;
    Ok(ShearParams {
        alpha: m.h11 - MODEL_ONE,
        beta: m.h12,
        gamma: div_recip((m.h21 as i64) << MODEL_BITS, h11) as i32,
        delta: (m.h22 as i64 - MODEL_ONE as i64 - div_recip(m.h21 as i64 * m.h12 as i64, h11)) as i32,
    })
}

/// Shear factors of a model usable for warping.
pub fn shear_decompose(m: &AffineModel) -> Result<ShearParams> {
    let s = shear_params(m)?;
    if !s.is_valid() {
        return invalid("model exceeds the warp shear bounds");
    }
    Ok(s)
}

/// A block's centre in whole samples and its vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotionSample {
    pub center: (i32, i32),
    pub mv: MotionVector,
}

/// Least-squares fit of the linear part from neighbours that share the
/// current block's reference. Source points are neighbour centres relative
/// to the current centre; destinations add the vector difference.
/// Neighbours beyond the first eight, or with a difference component above
/// 8 samples, are ignored. `None` with fewer than two usable neighbours or
/// a singular system.
pub fn estimate_local_affine(current: MotionSample, neighbours: &[MotionSample]) -> Option<AffineModel> {
    let (mut a2, mut ab, mut b2) = (0i128, 0i128, 0i128);
    let (mut aq, mut bq, mut ar, mut br) = (0i128, 0i128, 0i128, 0i128);
    let mut used = 0;
    for n in neighbours.iter().take(MAX_NEIGHBOURS) {
        let (dc, dr) = (n.mv.col - current.mv.col, n.mv.row - current.mv.row);
        if dc.abs() > MAX_MV_DIFF || dr.abs() > MAX_MV_DIFF {
            continue;
        }
        // 1/8 sample units throughout.
        let a = 8 * (n.center.0 - current.center.0) as i128;
        let b = 8 * (n.center.1 - current.center.1) as i128;
        let (q, r) = (a + dc as i128, b + dr as i128);
        a2 += a * a;
        ab += a * b;
        b2 += b * b;
        aq += a * q;
        bq += b * q;
        ar += a * r;
        br += b * r;
        used += 1;
    }
    if used < 2 {
        return None;
    }
    let det = a2 * b2 - ab * ab;
    if det == 0 {
        return None;
    }
    let solve = |n: i128| -> i32 {
        let n = n << MODEL_BITS;
        let q = (2 * n.abs() + det.abs()) / (2 * det.abs());
        (if (n < 0) != (det < 0) { -q } else { q }) as i32
    };
    Some(AffineModel {
        h11: solve(b2 * aq - ab * bq),
        h12: solve(a2 * bq - ab * aq),
        h21: solve(b2 * ar - ab * br),
        h22: solve(a2 * br - ab * ar),
        h13: current.mv.col,
        h23: current.mv.row,
    })
}

/// Work counters of a warp.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WarpTrace {
    pub units: u64,
    pub multiplies: u64,
    /// Filter taps landing one sample outside the window, replaced by the
    /// window's edge sample.
    pub edge_taps: u64,
    /// Taps landing further outside; zero for valid models.
    pub stray_taps: u64,
}

/// Window index of tap `t` around integer offset `i` from the unit's
/// projected centre, clamped into the window.
fn window_index(i: i64, t: usize, trace: &mut WarpTrace) -> usize {
    let half = (WINDOW / 2) as i64;
    let j = i + t as i64 - 3 + half;
    if j < -1 || j > WINDOW as i64 {
        trace.stray_taps += 1;
    } else if j < 0 || j >= WINDOW as i64 {
        trace.edge_taps += 1;
    }
    j.clamp(0, WINDOW as i64 - 1) as usize
}

/// Integer offset and 1/64 phase of a position in units of 2^-12.
fn split_pos(pos: i64) -> (i64, usize) {
    let p = round2(pos, MODEL_BITS - POS_BITS);
    (p >> POS_BITS, (p & 63) as usize)
}

/// One 8x8 unit whose centre projects to `centre` (units of 2^-12).
fn warp_unit(plane: &Plane, s: &ShearParams, centre: (i64, i64), out: &mut [i32; UNIT * UNIT], trace: &mut WarpTrace) {
    let shift = MODEL_BITS - POS_BITS;
    let (cx, cy) = (round2(centre.0, shift), round2(centre.1, shift));
    let (ix, iy) = (cx >> POS_BITS, cy >> POS_BITS);
    let fx = (cx & 63) << shift;
    let fy = (cy & 63) << shift;
    let half = (WINDOW / 2) as i64;
    let mut win = [[0i64; WINDOW]; WINDOW];
    for (r, row) in win.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = plane.get_clamped((ix + c as i64 - half) as isize, (iy + r as i64 - half) as isize) as i64;
        }
    }
    let (one, alpha, beta) = (MODEL_ONE as i64, s.alpha as i64, s.beta as i64);
    let (gamma, delta) = (s.gamma as i64, s.delta as i64);
    let mut tmp = [[0i64; UNIT]; WINDOW];
    for (r, row) in tmp.iter_mut().enumerate() {
        let k = r as i64 - half;
        for (c, v) in row.iter_mut().enumerate() {
            let l = c as i64 - 4;
            let (xi, ph) = split_pos(fx + (one + alpha) * l + beta * k);
            let taps = &WARP_FILTERS[ph];
            let mut sum = 0i64;
            for (t, &f) in taps.iter().enumerate() {
                sum += f as i64 * win[r][window_index(xi, t, trace)];
            }
            trace.multiplies += 8;
            *v = round2(sum, ROUND_H);
        }
    }
    let max = plane.max_value() as i64;
    for m in 0..UNIT {
        let mm = m as i64 - 4;
        for c in 0..UNIT {
            let l = c as i64 - 4;
            let (yi, ph) = split_pos(fy + gamma * l + (one + delta) * mm);
            let taps = &WARP_FILTERS[ph];
            let mut sum = 0i64;
            for (t, &f) in taps.iter().enumerate() {
                sum += f as i64 * tmp[window_index(yi, t, trace)][c];
            }
            trace.multiplies += 8;
            out[m * UNIT + c] = round2(sum, ROUND_V).clamp(0, max) as i32;
        }
    }
    trace.units += 1;
}

/// Affine prediction of the block at `(x, y)`, built from 8x8 units whose
/// centres (sample 4 of each axis) follow the model exactly and are then
/// rounded to 1/64 sample. The centre of the block is `(x + w/2, y + h/2)`.
pub fn warp_block_traced(plane: &Plane, model: &AffineModel, x: usize, y: usize, size: BlockSize) -> Result<(Vec<i32>, WarpTrace)> {
    if size.w < UNIT || size.h < UNIT {
        return invalid(format!("warp needs at least 8x8, got {}x{}", size.w, size.h));
    }
    let s = shear_decompose(model)?;
    let c = ((x + size.w / 2) as i64, (y + size.h / 2) as i64);
    let mut out = vec![0; size.area()];
    let mut unit = [0i32; UNIT * UNIT];
    let mut trace = WarpTrace::default();
    for uy in (0..size.h).step_by(UNIT) {
        for ux in (0..size.w).step_by(UNIT) {
            let p = ((x + ux + 4) as i64, (y + uy + 4) as i64);
            warp_unit(plane, &s, model.project(plane, c, p), &mut unit, &mut trace);
            for r in 0..UNIT {
                out[(uy + r) * size.w + ux..(uy + r) * size.w + ux + UNIT].copy_from_slice(&unit[r * UNIT..r * UNIT + UNIT]);
            }
        }
    }
    Ok((out, trace))
}

pub fn warp_block(plane: &Plane, model: &AffineModel, x: usize, y: usize, size: BlockSize) -> Result<Vec<i32>> {
    warp_block_traced(plane, model, x, y, size).map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inter::filters::{FilterKind, SHARP};
    use crate::inter::{interp_subpel, InterpFilters};

    #[test]
    fn table_is_frozen_and_shares_translational_phases() {
        assert_eq!(WARP_FILTERS, filters::build_warp_table());
        for p in 0..16 {
            assert_eq!(WARP_FILTERS[4 * p], SHARP[p]);
        }
        assert!(WARP_FILTERS.iter().all(|r| r.iter().sum::<i32>() == 128));
    }

    #[test]
    fn reciprocal_division_tracks_exact() {
        for d in [1i64, 3, 4096, 4301, -3900, 5000, 70000, -123457] {
            for x in [0i64, 1, -7, 4096 << 12, -(3000 << 12), 99_999_999] {
                let exact = x as f64 / d as f64;
                let got = div_recip(x, d) as f64;
                assert!((got - exact).abs() <= 0.5 + exact.abs() * 2f64.powi(-14), "{x}/{d}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn identity_and_boundary_models() {
        let id = AffineModel::translation(MotionVector::ZERO);
        assert_eq!(shear_decompose(&id).unwrap(), ShearParams { alpha: 0, beta: 0, gamma: 0, delta: 0 });
        let scale = AffineModel::from_matrix([[1.25, 0.0], [0.0, 1.25]], MotionVector::ZERO);
        let s = shear_params(&scale).unwrap();
        assert_eq!((s.alpha, s.delta), (1024, 1024));
        assert!(!s.is_valid() && shear_decompose(&scale).is_err());
        let z = AffineModel { h11: 0, ..id };
        assert!(shear_params(&z).is_err());
    }

    #[test]
    fn translation_equals_sharp_interpolation() {
        let data: Vec<u16> = (0..32 * 32).map(|i| ((i * 37 + (i / 32) * 11) % 256) as u16).collect();
        let p = Plane::from_vec(32, 32, 8, data).unwrap();
        let size = BlockSize::new(16, 8).unwrap();
        for mv in [MotionVector::new(0, 0), MotionVector::new(3, -5), MotionVector::new(-12, 7), MotionVector::new(4, 4)] {
            let (got, trace) = warp_block_traced(&p, &AffineModel::translation(mv), 8, 8, size).unwrap();
            assert_eq!(got, interp_subpel(&p, 8, 8, 16, 8, mv, InterpFilters::both(FilterKind::Sharp)));
            assert_eq!(trace.multiplies, 2 * UNIT_MULTIPLIES);
            assert_eq!(trace.edge_taps + trace.stray_taps, 0);
        }
    }
}
