//! Film grain synthesis: an auto-regressive grain template per plane,
//! pseudo-random 32x32 patches from it, and intensity-dependent scaling
//! onto the output picture. Nothing here feeds back into prediction.

pub mod gaussian;

use crate::error::{invalid, Result};
use crate::frame::{Frame, Plane};
use gaussian::{GAUSSIAN, GAUSSIAN_BITS};

/// Fractional bits of grain samples.
pub const GRAIN_BITS: u32 = 6;
pub const GRAIN_ONE: i32 = 1 << GRAIN_BITS;
/// Grain samples are clamped to this many samples either side of zero.
pub const GRAIN_LIMIT: i32 = 32 * GRAIN_ONE;
/// Fractional bits of AR coefficients.
pub const AR_BITS: u32 = 7;
pub const AR_RANGE: std::ops::RangeInclusive<i32> = -128..=127;
pub const MAX_LAG: usize = 3;
pub const TEMPLATE: usize = 64;
pub const PATCH: usize = 32;
/// Fractional bits of chroma mixing weights.
pub const MIX_BITS: u32 = 6;
pub const SCALING_SHIFT_RANGE: std::ops::RangeInclusive<u32> = 8..=11;
/// Per-plane seed perturbations.
pub const PLANE_SEEDS: [u16; 3] = [0, 0xb524, 0x49d8];

/// Reference samples of a lag-`l` model.
pub fn ar_count(lag: usize) -> usize {
    2 * lag * (lag + 1)
}

/// Offsets `(dx, dy)` of the reference samples in coefficient order:
/// the rows above from the farthest, left to right, then the current row.
pub fn ar_offsets(lag: usize) -> Vec<(isize, isize)> {
    let l = lag as isize;
    let mut v = Vec::with_capacity(ar_count(lag));
    for dy in -l..0 {
        for dx in -l..=l {
            v.push((dx, dy));
        }
    }
    for dx in -l..0 {
        v.push((dx, 0));
    }
    v
}

/// 16-bit Fibonacci LFSR with taps 0, 1, 3 and 12. The all-zero state is
/// replaced by 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lfsr(u16);

impl Lfsr {
    pub fn new(seed: u16) -> Self {
        Lfsr(if seed == 0 { 1 } else { seed })
    }

    /// Advances `bits` steps and returns the top `bits` bits of the state,
    /// so successive draws share no bits.
    pub fn next(&mut self, bits: u32) -> u32 {
        for _ in 0..bits {
            let r = self.0;
            let bit = (r ^ (r >> 1) ^ (r >> 3) ^ (r >> 12)) & 1;
            self.0 = (r >> 1) | (bit << 15);
        }
        (self.0 as u32 >> (16 - bits)) & ((1 << bits) - 1)
    }

    /// A unit-variance Gaussian sample in units of 2^-6.
    pub fn gaussian(&mut self) -> i32 {
        GAUSSIAN[self.next(GAUSSIAN_BITS) as usize] as i32
    }
}

/// Knot of a piece-wise linear scaling function: intensity in the sample
/// range of the plane, scale in units of 2^-scaling_shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ScalingPoint {
    pub value: u32,
    pub scale: i32,
}

/// Linear interpolation between the knots around `v`, rounded half away
/// from zero; flat beyond the outer knots. Knots must strictly increase.
pub fn scaling_eval(points: &[ScalingPoint], v: u32) -> Result<i32> {
    validate_points(points)?;
    let first = points[0];
    let last = points[points.len() - 1];
    if v <= first.value {
        return Ok(first.scale);
    }
    if v >= last.value {
        return Ok(last.scale);
    }
    let i = points.partition_point(|p| p.value <= v);
    let (a, b) = (points[i - 1], points[i]);
    let num = (v - a.value) as i64 * (b.scale - a.scale) as i64;
    let den = (b.value - a.value) as i64;
    let q = (2 * num.abs() + den) / (2 * den);
    Ok(a.scale + (num.signum() * q) as i32)
}

fn validate_points(points: &[ScalingPoint]) -> Result<()> {
    if points.len() < 2 {
        return invalid("scaling function needs at least two points");
    }
    if points.windows(2).any(|w| w[0].value >= w[1].value) {
        return invalid("scaling points must increase in intensity");
    }
    Ok(())
}

/// Grain model of one chroma plane.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ChromaGrain {
    /// `2L(L+1)` neighbour coefficients followed by the luma weight.
    pub ar: Vec<i32>,
    pub points: Vec<ScalingPoint>,
    /// Weight of the chroma sample in the scaling input, 2^-6 units.
    pub b: i32,
    /// Weight of the collocated luma mean, 2^-6 units.
    pub d: i32,
    /// Offset of the scaling input in samples.
    pub h: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GrainParams {
    pub lag: usize,
    pub luma_ar: Vec<i32>,
    pub luma_points: Vec<ScalingPoint>,
    pub chroma: [Option<ChromaGrain>; 2],
    pub scaling_shift: u32,
    pub seed: u16,
}

impl GrainParams {
    /// Luma-only model with a flat scaling function.
    pub fn luma_only(lag: usize, luma_ar: Vec<i32>, scale: i32, seed: u16) -> Result<Self> {
        let p = GrainParams {
            lag,
            luma_ar,
            luma_points: vec![ScalingPoint { value: 0, scale }, ScalingPoint { value: 4095, scale }],
            chroma: [None, None],
            scaling_shift: 8,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag > MAX_LAG {
            return invalid(format!("lag {}", self.lag));
        }
        let n = ar_count(self.lag);
        if self.luma_ar.len() != n {
            return invalid(format!("lag {} needs {n} luma coefficients, got {}", self.lag, self.luma_ar.len()));
        }
        if !SCALING_SHIFT_RANGE.contains(&self.scaling_shift) {
            return invalid(format!("scaling shift {}", self.scaling_shift));
        }
        validate_points(&self.luma_points)?;
        let mut all = self.luma_ar.clone();
        for c in self.chroma.iter().flatten() {
            if c.ar.len() != n + 1 {
                return invalid(format!("lag {} needs {} chroma coefficients, got {}", self.lag, n + 1, c.ar.len()));
            }
            validate_points(&c.points)?;
            all.extend(&c.ar);
        }
        if all.iter().any(|a| !AR_RANGE.contains(a)) {
            return invalid("AR coefficient outside 8-bit range");
        }
        Ok(())
    }
}

/// Grain samples of one plane's template, row-major, 2^-6 units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrainPlane {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<i32>,
}

impl GrainPlane {
    pub fn get(&self, x: usize, y: usize) -> i32 {
        self.samples[y * self.width + x]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrainTemplate {
    pub luma: GrainPlane,
    pub chroma: [Option<GrainPlane>; 2],
    pub ss_x: u32,
    pub ss_y: u32,
}

/// Runs the AR recursion over a `w`×`h` template. A border of `lag`
/// samples above and on both sides holds pure noise and is dropped.
/// `luma_term` supplies the extra input for chroma templates.
fn synthesize(w: usize, h: usize, lag: usize, ar: &[i32], rng: &mut Lfsr, luma_term: Option<(&GrainPlane, u32, u32, i32)>) -> GrainPlane {
    let (bw, bh) = (w + 2 * lag, h + lag);
    let mut g = vec![0i32; bw * bh];
    for s in g.iter_mut() {
        *s = rng.gaussian();
    }
    let offsets = ar_offsets(lag);
    for y in lag..bh {
        for x in lag..lag + w {
            let mut acc: i64 = 0;
            for (&(dx, dy), &a) in offsets.iter().zip(ar) {
                let (sx, sy) = ((x as isize + dx) as usize, (y as isize + dy) as usize);
                acc += a as i64 * g[sy * bw + sx] as i64;
            }
            if let Some((luma, ss_x, ss_y, weight)) = luma_term {
                let (cx, cy) = (x - lag, y - lag);
                let mut sum = 0i64;
                for j in 0..1 << ss_y {
                    for i in 0..1 << ss_x {
                        sum += luma.get((cx << ss_x) + i, (cy << ss_y) + j) as i64;
                    }
                }
                let mean = crate::inter::round2(sum, ss_x + ss_y);
                acc += weight as i64 * mean;
            }
            let z = g[y * bw + x] as i64;
            g[y * bw + x] = (crate::inter::round2(acc, AR_BITS) + z).clamp(-GRAIN_LIMIT as i64, GRAIN_LIMIT as i64) as i32;
        }
    }
    let mut samples = Vec::with_capacity(w * h);
    for y in lag..bh {
        samples.extend_from_slice(&g[y * bw + lag..y * bw + lag + w]);
    }
    GrainPlane { width: w, height: h, samples }
}

/// Deterministic templates for every plane the model covers.
pub fn generate_template(params: &GrainParams, ss_x: u32, ss_y: u32) -> Result<GrainTemplate> {
    params.validate()?;
    let mut rng = Lfsr::new(params.seed ^ PLANE_SEEDS[0]);
    let luma = synthesize(TEMPLATE, TEMPLATE, params.lag, &params.luma_ar, &mut rng, None);
    let (cw, ch) = (TEMPLATE >> ss_x, TEMPLATE >> ss_y);
    let n = ar_count(params.lag);
    let chroma = std::array::from_fn(|i| {
        params.chroma[i].as_ref().map(|c| {
            let mut rng = Lfsr::new(params.seed ^ PLANE_SEEDS[i + 1]);
            synthesize(cw, ch, params.lag, &c.ar[..n], &mut rng, Some((&luma, ss_x, ss_y, c.ar[n])))
        })
    });
    Ok(GrainTemplate { luma, chroma, ss_x, ss_y })
}

/// Template origin of each 32x32 luma patch, raster order over the
/// patch grid, drawn from the frame seed.
pub fn patch_origins(seed: u16, cols: usize, rows: usize) -> Vec<(usize, usize)> {
    let mut rng = Lfsr::new(seed.rotate_left(8) ^ 0x5a5a);
    (0..cols * rows).map(|_| (rng.next(5) as usize, rng.next(5) as usize)).collect()
}

fn scaled(p: i32, f: i32, g: i32, shift: u32, max: i32) -> i32 {
    let noise = crate::inter::round2(f as i64 * g as i64, shift + GRAIN_BITS);
    (p + noise as i32).clamp(0, max)
}

/// Adds grain to a copy of `frame`. Each 32x32 luma cell (and its
/// collocated chroma cell) reads the template at that cell's origin.
pub fn apply_grain(frame: &Frame, template: &GrainTemplate, params: &GrainParams) -> Result<Frame> {
    params.validate()?;
    let mut out = frame.clone();
    let luma = frame.plane(0).expect("frame has luma");
    let (cols, rows) = (luma.width.div_ceil(PATCH), luma.height.div_ceil(PATCH));
    let origins = patch_origins(params.seed, cols, rows);
    let max = luma.max_value() as i32;
    let shift = params.scaling_shift;
    {
        let dst = out.plane_mut(0).expect("frame has luma");
        for y in 0..luma.height {
            for x in 0..luma.width {
                let (ox, oy) = origins[(y / PATCH) * cols + x / PATCH];
                let g = template.luma.get(ox + x % PATCH, oy + y % PATCH);
                let p = luma.get(x, y) as i32;
                let f = scaling_eval(&params.luma_points, p as u32)?;
                dst.set(x, y, scaled(p, f, g, shift, max));
            }
        }
    }
    for (ci, cp) in params.chroma.iter().enumerate() {
        let (Some(c), Some(tpl), Some(src)) = (cp, &template.chroma[ci], frame.plane(ci + 1)) else { continue };
        let (sx, sy) = (src.ss_x, src.ss_y);
        let (pw, ph) = (PATCH >> sx, PATCH >> sy);
        let mut dst: Plane = src.clone();
        for y in 0..src.height {
            for x in 0..src.width {
                let (lx, ly) = (x << sx, y << sy);
                let (ox, oy) = origins[((ly / PATCH).min(rows - 1)) * cols + (lx / PATCH).min(cols - 1)];
                let g = tpl.get((ox >> sx) + x % pw, (oy >> sy) + y % ph);
                let mut sum = 0i64;
                for j in 0..1 << sy {
                    for i in 0..1 << sx {
                        sum += luma.get_clamped((lx + i) as isize, (ly + j) as isize) as i64;
                    }
                }
                let mean = crate::inter::round2(sum, sx + sy) as i32;
                let p = src.get(x, y) as i32;
                let t = (crate::inter::round2(c.b as i64 * p as i64 + c.d as i64 * mean as i64, MIX_BITS) as i32 + c.h).clamp(0, max);
                let f = scaling_eval(&c.points, t as u32)?;
                dst.set(x, y, scaled(p, f, g, shift, max));
            }
        }
        *out.plane_mut(ci + 1).expect("chroma plane") = dst;
    }
    Ok(out)
}

/// Template generation and application in one step.
pub fn synthesize_grain(frame: &Frame, params: &GrainParams) -> Result<Frame> {
    let (ss_x, ss_y) = frame.plane(1).map(|p| (p.ss_x, p.ss_y)).unwrap_or((1, 1));
    let template = generate_template(params, ss_x, ss_y)?;
    apply_grain(frame, &template, params)
}
