//! Demonstrations of individual tools on synthetic fixtures, each reduced to
//! a few numbers in the JSON report.

use anyhow::Result;
use av1lab::entropy::{CdfModel, Encoder};
use av1lab::frame::{BlockSize, MotionVector, Plane};
use av1lab::inter::filters::FilterKind;
use av1lab::inter::{interp_subpel, InterpFilters};
use av1lab::loopfilter::cdef::{find_direction, line_index, LINES};
use av1lab::warp::{shear_decompose, warp_block, AffineModel};
use serde_json::{json, Value};

const RAMP: (f64, f64, f64) = (4.0, 3.0, 100.0);

/// 10-bit plane holding the plane `a x + b y + c`, which every
/// interpolation filter with unit gain reproduces up to rounding.
fn ramp(w: usize, h: usize) -> Result<Plane> {
    let (a, b, c) = RAMP;
    let data = (0..w * h).map(|i| (a * (i % w) as f64 + b * (i / w) as f64 + c) as u16).collect();
    Ok(Plane::from_vec(w, h, 10, data)?)
}

fn ramp_at(x: f64, y: f64) -> f64 {
    RAMP.0 * x + RAMP.1 * y + RAMP.2
}

/// Max and mean absolute deviation.
fn deviation(got: &[i32], want: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = got.iter().zip(want).map(|(&g, &w)| (g as f64 - w).abs()).collect();
    (d.iter().cloned().fold(0.0, f64::max), d.iter().sum::<f64>() / d.len() as f64)
}

/// Warps 16x16 blocks of a ramp under a spread of affine models and
/// compares against the ramp sampled at each exactly projected position.
pub fn warp_check() -> Result<Value> {
    let plane = ramp(96, 96)?;
    let size = BlockSize::new(16, 16)?;
    let (x, y) = (40, 40);
    let mut rows = Vec::new();
    let (mut worst, mut total, mut count) = (0.0f64, 0.0, 0);
    for (k, &(a, b, c, d)) in [(0.0, 0.0, 0.0, 0.0), (0.05, 0.0, 0.0, 0.05), (0.0, 0.08, -0.08, 0.0), (-0.1, 0.03, 0.06, 0.12), (0.15, -0.05, 0.02, -0.1)]
        .iter()
        .enumerate()
    {
        let model = AffineModel::from_matrix([[1.0 + a, b], [c, 1.0 + d]], MotionVector::new(13 - 7 * k as i32, 5 + 11 * k as i32));
        let shear = shear_decompose(&model)?;
        let got = warp_block(&plane, &model, x, y, size)?;
        let centre = ((x + 8) as i64, (y + 8) as i64);
        let want: Vec<f64> = (0..256)
            .map(|i| {
                let (px, py) = model.project(&plane, centre, ((x + i % 16) as i64, (y + i / 16) as i64));
                ramp_at(px as f64 / 4096.0, py as f64 / 4096.0)
            })
            .collect();
        let (max, mean) = deviation(&got, &want);
        worst = worst.max(max);
        total += mean;
        count += 1;
        rows.push(json!({ "model": model, "shear": shear, "max_abs_error": max, "mean_abs_error": mean }));
    }
    Ok(json!({ "block": "16x16", "models": rows, "max_abs_error": worst, "mean_abs_error": total / count as f64 }))
}

/// Sub-sample motion compensation of a ramp against its exact values for
/// every filter family and a sweep of fractional vectors.
pub fn interp_check() -> Result<Value> {
    let plane = ramp(64, 64)?;
    let mut out = serde_json::Map::new();
    for kind in FilterKind::ALL {
        let mut worst = 0.0f64;
        for r in 0..8 {
            for c in 0..8 {
                let mv = MotionVector::new(r * 3 - 9, c * 5 - 17);
                let got = interp_subpel(&plane, 24, 24, 8, 8, mv, InterpFilters::both(kind));
                let want: Vec<f64> = (0..64).map(|i| ramp_at(24.0 + (i % 8) as f64 + mv.col as f64 / 8.0, 24.0 + (i / 8) as f64 + mv.row as f64 / 8.0)).collect();
                worst = worst.max(deviation(&got, &want).0);
            }
        }
        out.insert(format!("{kind:?}"), json!({ "max_abs_error": worst }));
    }
    Ok(Value::Object(out))
}

/// Directions found on a 64x64 picture whose 8x8 blocks are stripes along
/// a known direction each.
pub fn cdef_direction_map() -> Result<Value> {
    let mut map = Vec::new();
    let mut hits = 0;
    for by in 0..8 {
        let mut row = String::new();
        for bx in 0..8 {
            let d = (bx + 3 * by) % 8;
            let block: Vec<i32> = (0..64).map(|i| (line_index(d, i / 8, i % 8) * 37 % LINES) as i32 * 9 + 20).collect();
            let found = find_direction(&block).dir;
            hits += (found == d) as usize;
            row.push(char::from(b'0' + found as u8));
        }
        map.push(row);
    }
    Ok(json!({ "map": map, "correct": hits, "blocks": 64 }))
}

/// Adaptive coding of geometric distributions over 8 symbols against their
/// entropy.
pub fn entropy_efficiency() -> Result<Value> {
    let mut rows = Vec::new();
    for ratio in [0.9f64, 0.6, 0.3, 0.1] {
        let norm: f64 = (0..8).map(|k| ratio.powi(k)).sum();
        let probs: Vec<f64> = (0..8).map(|k| ratio.powi(k) / norm).collect();
        let entropy: f64 = -probs.iter().map(|p| p * p.log2()).sum::<f64>();
        // Symbols drawn by inverting the distribution along a
        // low-discrepancy sequence, so counts match the probabilities.
        let n = 100_000;
        let mut model = CdfModel::uniform(8);
        let mut enc = Encoder::new();
        let golden = 0.618_033_988_749_895f64;
        for i in 0..n {
            let u = (i as f64 * golden).fract();
            let mut acc = 0.0;
            let s = probs.iter().position(|&p| {
                acc += p;
                u < acc
            });
            enc.encode_adaptive(s.unwrap_or(7), &mut model);
        }
        let bits = enc.finish().len() as f64 * 8.0 / n as f64;
        rows.push(json!({ "ratio": ratio, "entropy_bits": entropy, "coded_bits": bits, "overhead": bits / entropy - 1.0 }));
    }
    Ok(json!(rows))
}
