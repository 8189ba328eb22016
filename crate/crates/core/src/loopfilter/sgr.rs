//! Self-guided restoration: two edge-preserving local-statistics denoisers
//! whose differences from the input span a subspace, and a projection of
//! the source residual onto that subspace.

use crate::error::{invalid, Result};
use crate::frame::Plane;
use crate::inter::round2;

pub const RADIUS_RANGE: std::ops::RangeInclusive<usize> = 1..=3;
/// Fractional bits of the projection weights.
pub const PROJ_BITS: u32 = 7;
pub const PROJ_ONE: i32 = 1 << PROJ_BITS;
/// Coded weights lie in `[-PROJ_LIMIT, PROJ_LIMIT]`.
pub const PROJ_LIMIT: i32 = 4 * PROJ_ONE;

/// Radii and noise variances of the two denoisers. `e` is in squared
/// sample units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SgrParams {
    pub r1: usize,
    pub e1: u32,
    pub r2: usize,
    pub e2: u32,
}

impl SgrParams {
    pub fn validate(&self) -> Result<()> {
        if !RADIUS_RANGE.contains(&self.r1) || !RADIUS_RANGE.contains(&self.r2) {
            return invalid(format!("radii {} and {}", self.r1, self.r2));
        }
        Ok(())
    }
}

/// Projection weights in units of 2^-7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct SgrProjection {
    pub alpha: i32,
    pub beta: i32,
}

/// Summed-area table over a region grown by `pad` on every side, with
/// neighbours outside the plane replicated from its edges.
struct Integral {
    stride: usize,
    sum: Vec<i64>,
    sq: Vec<i64>,
}

impl Integral {
    fn new(src: &Plane, x: usize, y: usize, w: usize, h: usize, pad: usize) -> Self {
        let (pw, ph) = (w + 2 * pad, h + 2 * pad);
        let stride = pw + 1;
        let mut sum = vec![0i64; stride * (ph + 1)];
        let mut sq = vec![0i64; stride * (ph + 1)];
        for r in 0..ph {
            let (mut rs, mut rq) = (0i64, 0i64);
            for c in 0..pw {
                let v = src.get_clamped(x as isize + c as isize - pad as isize, y as isize + r as isize - pad as isize) as i64;
                rs += v;
                rq += v * v;
                sum[(r + 1) * stride + c + 1] = sum[r * stride + c + 1] + rs;
                sq[(r + 1) * stride + c + 1] = sq[r * stride + c + 1] + rq;
            }
        }
        Integral { stride, sum, sq }
    }

    /// Sum and sum of squares of the `side`×`side` square at padded `(c, r)`.
    fn window(&self, c: usize, r: usize, side: usize) -> (i64, i64) {
        let s = self.stride;
        let at = |t: &Vec<i64>| t[(r + side) * s + c + side] - t[r * s + c + side] - t[(r + side) * s + c] + t[r * s + c];
        (at(&self.sum), at(&self.sq))
    }
}

/// Blends each sample with its `(2r+1)`² window mean by the ratio of the
/// window variance to the variance plus `e`. Computed exactly in integers
/// and rounded half up. Returns the `w`×`h` region at `(x, y)`.
pub fn sgr_denoise(src: &Plane, x: usize, y: usize, w: usize, h: usize, r: usize, e: u32) -> Result<Vec<i32>> {
    if !RADIUS_RANGE.contains(&r) {
        return invalid(format!("radius {r}"));
    }
    let side = 2 * r + 1;
    let n = (side * side) as i64;
    let table = Integral::new(src, x, y, w, h, r);
    let e = e as i64;
    let mut out = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let (s, q) = table.window(col, row, side);
            let v = src.get(x + col, y + row) as i64;
            // n^2 times the window variance.
            let var = n * q - s * s;
            let den = var + e * n * n;
            if den == 0 {
                out.push(v as i32);
                continue;
            }
            let num = var * v + e * n * s;
            out.push(((num + den / 2) / den) as i32);
        }
    }
    Ok(out)
}

/// Least-squares weights of `x1 - x` and `x2 - x` that best explain
/// `xs - x`. `None` when the normal matrix is singular.
pub fn sgr_solve_exact(x: &[i32], x1: &[i32], x2: &[i32], xs: &[i32]) -> Option<(f64, f64)> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0f64, 0f64, 0f64, 0f64, 0f64);
    for i in 0..x.len() {
        let (u, v, t) = ((x1[i] - x[i]) as f64, (x2[i] - x[i]) as f64, (xs[i] - x[i]) as f64);
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u * t;
        b2 += v * t;
    }
    let det = a11 * a22 - a12 * a12;
    if a11 == 0.0 || a22 == 0.0 || det <= 1e-9 * a11 * a22 {
        return None;
    }
    Some(((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det))
}

/// `x + alpha (x1 - x) + beta (x2 - x)` with the weights in 2^-7 units,
/// clipped to `[0, max]`.
pub fn sgr_restore(x: &[i32], x1: &[i32], x2: &[i32], p: SgrProjection, max: i32) -> Vec<i32> {
    (0..x.len())
        .map(|i| {
            let corr = p.alpha as i64 * (x1[i] - x[i]) as i64 + p.beta as i64 * (x2[i] - x[i]) as i64;
            (x[i] + round2(corr, PROJ_BITS) as i32).clamp(0, max)
        })
        .collect()
}

pub fn squared_error(a: &[i32], b: &[i32]) -> i64 {
    a.iter().zip(b).map(|(&p, &q)| (p - q) as i64 * (p - q) as i64).sum()
}

/// Quantised least-squares weights. The encoder keeps them only when the
/// quantised restoration is no worse than leaving `x` alone, so the
/// result never increases the error against `xs`.
pub fn sgr_solve(x: &[i32], x1: &[i32], x2: &[i32], xs: &[i32], max: i32) -> SgrProjection {
    let Some((a, b)) = sgr_solve_exact(x, x1, x2, xs) else {
        return SgrProjection::default();
    };
    let q = |v: f64| ((v * PROJ_ONE as f64).round() as i64).clamp(-PROJ_LIMIT as i64, PROJ_LIMIT as i64) as i32;
    let p = SgrProjection { alpha: q(a), beta: q(b) };
    let restored = sgr_restore(x, x1, x2, p, max);
    if squared_error(xs, &restored) <= squared_error(xs, x) {
        p
    } else {
        SgrProjection::default()
    }
}
