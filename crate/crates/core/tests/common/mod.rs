//! Test pictures and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod filters;
pub mod grain;
pub mod intra;
pub mod mvref;
pub mod txfm;
pub mod warp;

use av1lab::frame::{ChromaFormat, Frame, Plane};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn plane(w: usize, h: usize, depth: u32, f: impl Fn(usize, usize) -> i32) -> Plane {
    let max = (1i32 << depth) - 1;
    let data = (0..w * h).map(|i| f(i % w, i / w).clamp(0, max) as u16).collect();
    Plane::from_vec(w, h, depth, data).unwrap()
}

/// A 4:2:0 frame with each plane drawn from its sampling function.
pub fn frame420(w: usize, h: usize, depth: u32, planes: [&dyn Fn(usize, usize) -> i32; 3]) -> Frame {
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    Frame::from_planes(plane(w, h, depth, planes[0]), Some(plane(cw, ch, depth, planes[1])), Some(plane(cw, ch, depth, planes[2])), ChromaFormat::Yuv420).unwrap()
}

pub fn gradient(w: usize, h: usize) -> Frame {
    frame420(w, h, 8, [&|x, y| (x * 3 + y * 2) as i32, &|x, _| 64 + 2 * x as i32, &|_, y| 192 - 2 * y as i32])
}

pub fn noise(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Vec<i32>> = (0..3).map(|_| (0..w * h).map(|_| rng.gen_range(0..256)).collect()).collect();
    frame420(w, h, 8, [&|x, y| v[0][y * w + x], &|x, y| v[1][y * w + x], &|x, y| v[2][y * w + x]])
}

/// Dark strokes on a light page, in the manner of rendered text.
pub fn text(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ink = vec![false; w * h];
    let (cell_w, cell_h) = (6, 10);
    for row in 0..h / cell_h {
        for col in 0..w / cell_w {
            // A glyph is a few strokes inside its cell.
            for _ in 0..rng.gen_range(1..4) {
                let vertical = rng.gen_bool(0.5);
                let (x0, y0) = (col * cell_w + rng.gen_range(0..4), row * cell_h + rng.gen_range(0..7));
                let len = rng.gen_range(2..if vertical { 8 } else { 5 });
                for k in 0..len {
                    let (x, y) = if vertical { (x0, y0 + k) } else { (x0 + k, y0) };
                    if x < w && y < h {
                        ink[y * w + x] = true;
                    }
                }
            }
        }
    }
    frame420(w, h, 8, [&|x, y| if ink[y * w + x] { 20 } else { 235 }, &|_, _| 128, &|_, _| 128])
}

/// Smooth multi-scale texture with a 1/f spectrum and a few hard edges,
/// standing in for camera content.
pub fn natural(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lum = vec![0.0f64; w * h];
    let mut octave = 32usize;
    let mut amp = 48.0;
    while octave >= 1 {
        let (gw, gh) = (w / octave + 2, h / octave + 2);
        let grid: Vec<f64> = (0..gw * gh).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for y in 0..h {
            for x in 0..w {
                let (fx, fy) = (x as f64 / octave as f64, y as f64 / octave as f64);
                let (ix, iy) = (fx as usize, fy as usize);
                let (tx, ty) = (fx - ix as f64, fy - iy as f64);
                let g = |a: usize, b: usize| grid[b * gw + a];
                let top = g(ix, iy) * (1.0 - tx) + g(ix + 1, iy) * tx;
                let bot = g(ix, iy + 1) * (1.0 - tx) + g(ix + 1, iy + 1) * tx;
                lum[y * w + x] += amp * (top * (1.0 - ty) + bot * ty);
            }
        }
        octave /= 2;
        amp /= 2.0;
    }
    // An occluding object with a sharp boundary.
    let (cx, cy, r) = (w as f64 * 0.6, h as f64 * 0.4, w.min(h) as f64 * 0.25);
    let at = |x: usize, y: usize| {
        let inside = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt() < r;
        (128.0 + lum[y * w + x] + if inside { 40.0 } else { 0.0 }).round() as i32
    };
    frame420(w, h, 8, [&at, &|x, y| 110 + at(2 * x.min(w / 2 - 1), 2 * y.min(h / 2 - 1)) / 8, &|x, y| 150 - at(2 * x.min(w / 2 - 1), 2 * y.min(h / 2 - 1)) / 10])
}

pub fn ramp10(w: usize, h: usize) -> Frame {
    frame420(w, h, 10, [&|x, y| ((x * 1023) / (w - 1)) as i32 ^ (y as i32 & 3), &|_, y| (y * 1023 / (h / 2)) as i32, &|x, _| 512 + x as i32])
}

pub fn gray(w: usize, h: usize, v: i32) -> Frame {
    frame420(w, h, 8, [&|_, _| v, &|_, _| 128, &|_, _| 128])
}
