use av1lab::frame::{BlockSize, MotionVector, Plane};
use av1lab::warp::filters::WARP_FILTERS;
use av1lab::warp::{shear_decompose, AffineModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn floor_div(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

/// Round half up from units of 2^-12 to 1/64.
pub fn to_q6(v: i128) -> i128 {
    floor_div(v + 32, 64)
}

/// Per-pixel evaluation of the shear-factorised warp: every output sample
/// is computed on its own from the model, with no shared intermediate. The
/// unit centre follows the affine projection; each of the eight source rows
/// under the vertical taps is filtered at its own horizontal offset. Taps
/// leaving the 15x15 unit window repeat its edge.
pub fn per_pixel_oracle(p: &Plane, m: &AffineModel, x: usize, y: usize, size: BlockSize) -> Vec<i32> {
    let s = shear_decompose(m).unwrap();
    let (bcx, bcy) = ((x + size.w / 2) as i128, (y + size.h / 2) as i128);
    let mut out = Vec::new();
    for yy in 0..size.h {
        for xx in 0..size.w {
            let (ucx, ucy) = ((x + xx / 8 * 8 + 4) as i128, (y + yy / 8 * 8 + 4) as i128);
            let cx = m.h11 as i128 * (ucx - bcx) + m.h12 as i128 * (ucy - bcy) + bcx * 4096 + m.h13 as i128 * 512;
            let cy = m.h21 as i128 * (ucx - bcx) + m.h22 as i128 * (ucy - bcy) + bcy * 4096 + m.h23 as i128 * 512;
            let (cx, cy) = (to_q6(cx), to_q6(cy));
            let (ix, fx, iy, fy) = (floor_div(cx, 64), cx.rem_euclid(64), floor_div(cy, 64), cy.rem_euclid(64));
            let (l, mm) = ((xx % 8) as i128 - 4, (yy % 8) as i128 - 4);
            let vpos = to_q6(fy * 64 + s.gamma as i128 * l + (4096 + s.delta as i128) * mm);
            let (yi, vph) = (floor_div(vpos, 64), vpos.rem_euclid(64) as usize);
            let mut acc = 0i128;
            for t in 0..8 {
                let k = (yi + t as i128 - 3).clamp(-7, 7);
                let hpos = to_q6(fx * 64 + (4096 + s.alpha as i128) * l + s.beta as i128 * k);
                let (xi, hph) = (floor_div(hpos, 64), hpos.rem_euclid(64) as usize);
                let mut row = 0i128;
                for j in 0..8 {
                    let c = (xi + j as i128 - 3).clamp(-7, 7);
                    row += WARP_FILTERS[hph][j] as i128 * p.get_clamped((ix + c) as isize, (iy + k) as isize) as i128;
                }
                acc += WARP_FILTERS[vph][t] as i128 * floor_div(row + 8, 16);
            }
            out.push(floor_div(acc + 512, 1024).clamp(0, p.max_value() as i128) as i32);
        }
    }
    out
}

/// Separable 8x8 interpolation at one point given in units of 2^-12.
pub fn point_sample(p: &Plane, x: i128, y: i128) -> i32 {
    let (x6, y6) = (to_q6(x), to_q6(y));
    let (ix, fx, iy, fy) = (floor_div(x6, 64), x6.rem_euclid(64) as usize, floor_div(y6, 64), y6.rem_euclid(64) as usize);
    let mut acc = 0i128;
    for i in 0..8 {
        let mut row = 0i128;
        for j in 0..8 {
            row += WARP_FILTERS[fx][j] as i128 * p.get_clamped((ix + j as i128 - 3) as isize, (iy + i as i128 - 3) as isize) as i128;
        }
        acc += WARP_FILTERS[fy][i] as i128 * floor_div(row + 8, 16);
    }
    floor_div(acc + 512, 1024).clamp(0, p.max_value() as i128) as i32
}

pub fn noise_plane(rng: &mut ChaCha8Rng, w: usize, h: usize, depth: u32) -> Plane {
    Plane::from_vec(w, h, depth, (0..w * h).map(|_| rng.gen_range(0..1u16 << depth)).collect()).unwrap()
}

pub fn random_valid_model(rng: &mut ChaCha8Rng, spread: f64) -> AffineModel {
    loop {
        let mut r = || rng.gen_range(-spread..spread);
        let m = [[1.0 + r(), r()], [r(), 1.0 + r()]];
        let mv = MotionVector::new(rng.gen_range(-80..80), rng.gen_range(-80..80));
        let model = AffineModel::from_matrix(m, mv);
        if shear_decompose(&model).is_ok() {
            return model;
        }
    }
}
