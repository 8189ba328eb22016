//! Fixed-point 1-D kernels built from rotations and add/sub butterflies.
//!
//! All kernels here are unnormalized:
//! - `dct2`: `X[k] = sum x[n] cos(pi (2n+1) k / 2N)`
//! - `dct3`: its transpose
//! - `dct4`: `Y[k] = sum x[n] cos(pi (2n+1)(2k+1) / 4N)`, a symmetric matrix
//!
//! Every multiply is by a `COS_BITS`-bit constant followed by a rounding
//! shift. Sizes are powers of two from 1 to 64.

use std::sync::OnceLock;

/// Fractional bits of the rotation constants.
pub const COS_BITS: u32 = 16;

/// Running multiply counter threaded through the kernels.
#[derive(Debug, Default, Clone, Copy)]
pub struct MulCount(pub u64);

#[inline]
fn mul(x: i64, c: i64, count: &mut MulCount) -> i64 {
    count.0 += 1;
    (x * c + (1 << (COS_BITS - 1))) >> COS_BITS
}

fn cst(v: f64) -> i64 {
    (v * (1i64 << COS_BITS) as f64).round() as i64
}

/// (cos, sin) of `pi (2n+1) / 4M` for each `n < M/2`, indexed by log2(M).
fn rot_table(log2m: usize) -> &'static [(i64, i64)] {
    static TABLES: OnceLock<Vec<Vec<(i64, i64)>>> = OnceLock::new();
    let t = TABLES.get_or_init(|| {
        (0..=6)
            .map(|l| {
                let m = 1usize << l;
                (0..m / 2)
                    .map(|n| {
                        let th = std::f64::consts::PI * (2 * n + 1) as f64 / (4 * m) as f64;
                        (cst(th.cos()), cst(th.sin()))
                    })
                    .collect()
            })
            .collect()
    });
    &t[log2m]
}

fn inv_sqrt2() -> i64 {
    cst(std::f64::consts::FRAC_1_SQRT_2)
}

/// Unnormalized DCT-II, in place.
pub fn dct2(x: &mut [i64], count: &mut MulCount) {
    let n = x.len();
    match n {
        1 => {}
        2 => {
            let (a, b) = (x[0], x[1]);
            x[0] = a + b;
            x[1] = mul(a - b, inv_sqrt2(), count);
        }
        _ => {
            let h = n / 2;
            let mut u: Vec<i64> = (0..h).map(|i| x[i] + x[n - 1 - i]).collect();
            let mut v: Vec<i64> = (0..h).map(|i| x[i] - x[n - 1 - i]).collect();
            dct2(&mut u, count);
            dct4(&mut v, count);
            for k in 0..h {
                x[2 * k] = u[k];
                x[2 * k + 1] = v[k];
            }
        }
    }
}

/// Unnormalized DCT-III (transpose of [`dct2`]), in place.
pub fn dct3(x: &mut [i64], count: &mut MulCount) {
    let n = x.len();
    match n {
        1 => {}
        2 => {
            let (a, b) = (x[0], mul(x[1], inv_sqrt2(), count));
            x[0] = a + b;
            x[1] = a - b;
        }
        _ => {
            let h = n / 2;
            let mut e: Vec<i64> = (0..h).map(|k| x[2 * k]).collect();
            let mut o: Vec<i64> = (0..h).map(|k| x[2 * k + 1]).collect();
            dct3(&mut e, count);
            dct4(&mut o, count);
            for i in 0..h {
                x[i] = e[i] + o[i];
                x[n - 1 - i] = e[i] - o[i];
            }
        }
    }
}

/// Unnormalized DCT-IV, in place: one rotation stage, two half-size DCT-II
/// passes and a final add/sub stage.
pub fn dct4(x: &mut [i64], count: &mut MulCount) {
    let m = x.len();
    if m == 1 {
        // cos(pi/4)
        x[0] = mul(x[0], inv_sqrt2(), count);
        return;
    }
    let h = m / 2;
    let rot = rot_table(m.trailing_zeros() as usize);
    let mut a = vec![0i64; h];
    let mut b = vec![0i64; h];
    for n in 0..h {
        let (c, s) = rot[n];
        let (p, q) = (x[n], x[m - 1 - n]);
        a[n] = mul(p, c, count) + mul(q, s, count);
        let bn = mul(q, c, count) - mul(p, s, count);
        b[n] = if n % 2 == 0 { bn } else { -bn };
    }
    dct2(&mut a, count);
    dct2(&mut b, count);
    // With S[j] = b_dct[h - j] for j in 1..=h, S[0] = 0 and a_dct[h] = 0:
    // Y[2j] = a_dct[j] + S[j], Y[2j+1] = a_dct[j+1] - S[j+1].
    let s = |j: usize| if j == 0 { 0 } else { b[h - j] };
    let c = |j: usize| if j == h { 0 } else { a[j] };
    for j in 0..h {
        x[2 * j] = c(j) + s(j);
        x[2 * j + 1] = c(j + 1) - s(j + 1);
    }
}

/// Unnormalized DST-IV via `DST4(x)[k] = (-1)^k DCT4(rev x)[k]`.
pub fn dst4(x: &mut [i64], count: &mut MulCount) {
    x.reverse();
    dct4(x, count);
    for (k, v) in x.iter_mut().enumerate() {
        if k % 2 == 1 {
            *v = -*v;
        }
    }
}

/// 4-point sine kernel `sin(pi (n+1)(2k+1) / 9)`, scaled by 2/3 (orthonormal).
fn adst4_matrix() -> &'static [[i64; 4]; 4] {
    static M: OnceLock<[[i64; 4]; 4]> = OnceLock::new();
    M.get_or_init(|| {
        let mut m = [[0i64; 4]; 4];
        for (k, row) in m.iter_mut().enumerate() {
            for (n, v) in row.iter_mut().enumerate() {
                let a = std::f64::consts::PI * ((n + 1) * (2 * k + 1)) as f64 / 9.0;
                *v = cst(2.0 / 3.0 * a.sin());
            }
        }
        m
    })
}

/// Orthonormal 4-point ADST; `inverse` applies the transpose.
pub fn adst4(x: &mut [i64], inverse: bool, count: &mut MulCount) {
    let m = adst4_matrix();
    let src = [x[0], x[1], x[2], x[3]];
    for (k, out) in x.iter_mut().enumerate() {
        *out = (0..4).map(|n| mul(src[n], if inverse { m[n][k] } else { m[k][n] }, count)).sum();
    }
}

/// Multiplies by `2^(-half_steps/2)`, using a shift plus at most one
/// `1/sqrt(2)` multiply.
pub fn scale_sqrt2_pow(x: i64, half_steps: u32, count: &mut MulCount) -> i64 {
    let sh = half_steps / 2;
    let v = if half_steps % 2 == 1 { mul(x, inv_sqrt2(), count) } else { x };
    if sh == 0 {
        v
    } else {
        (v + (1 << (sh - 1))) >> sh
    }
}
