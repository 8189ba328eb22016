use av1lab::frame::Plane;
use av1lab::loopfilter::cdef::line_index;
use av1lab::loopfilter::sgr::sgr_denoise;
use av1lab::loopfilter::superres::SuperresParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Stripes constant along direction `d`, each line a distinct level.
pub fn stripes(d: usize, rng: &mut ChaCha8Rng) -> Vec<i32> {
    let levels: Vec<i32> = (0..15).map(|k| 8 * k + rng.gen_range(0..8)).collect();
    let mut b = vec![0; 64];
    for i in 0..8 {
        for j in 0..8 {
            b[i * 8 + j] = levels[line_index(d, i, j)] as i32;
        }
    }
    b
}

/// Exact normal-equation solution in rationals.
pub fn lsq_oracle(x: &[i32], x1: &[i32], x2: &[i32], xs: &[i32]) -> Option<(f64, f64)> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for i in 0..x.len() {
        let (u, v, t) = ((x1[i] - x[i]) as i128, (x2[i] - x[i]) as i128, (xs[i] - x[i]) as i128);
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u * t;
        b2 += v * t;
    }
    let det = a11 * a22 - a12 * a12;
    (det != 0).then(|| ((a22 * b1 - a12 * b2) as f64 / det as f64, (a11 * b2 - a12 * b1) as f64 / det as f64))
}

pub fn sgr_fixture(rng: &mut ChaCha8Rng) -> (Vec<i32>, Vec<i32>, Vec<i32>, Vec<i32>) {
    let (w, h) = (16, 16);
    let source = Plane::from_vec(w, h, 8, (0..w * h).map(|i| ((i % w) * 12 + (i / w) * 3) as u16 + rng.gen_range(0..20)).collect()).unwrap();
    let noisy = Plane::from_vec(w, h, 8, source.data().iter().map(|&v| (v as i32 + rng.gen_range(-12..=12)).clamp(0, 255) as u16).collect()).unwrap();
    let x = noisy.block(0, 0, w, h);
    let x1 = sgr_denoise(&noisy, 0, 0, w, h, 2, rng.gen_range(10..400)).unwrap();
    let x2 = sgr_denoise(&noisy, 0, 0, w, h, 1, rng.gen_range(10..400)).unwrap();
    (x, x1, x2, source.block(0, 0, w, h))
}

/// Step error of output `m` in units of 2^-14 / 2W. Exact.
pub fn offset_error(p: &SuperresParams, m: usize) -> i64 {
    let (num, den) = p.ideal_offset(m);
    p.offset(m) * den - num
}
