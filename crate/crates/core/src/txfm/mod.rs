//! Separable 2-D transforms over DCT, ADST, FLIPADST and identity kernels,
//! transform partitioning and quantization.
//!
//! Coefficient scale: the integer forward transform returns the orthonormal
//! 2-D transform of the residual multiplied by [`COEFF_SCALE`], for every
//! block shape. Rectangular blocks need no extra gain correction because
//! each 1-D kernel is orthonormal on its own axis.

pub mod butterfly;
pub mod partition;
pub mod quant;

use crate::error::{Error, Result};
use butterfly::{adst4, dct2, dct3, dst4, scale_sqrt2_pow, MulCount};
use std::f64::consts::PI;

/// Output gain of the forward transform relative to orthonormal.
pub const COEFF_SCALE: i64 = 8;
const COEFF_SCALE_BITS: u32 = 3;
/// Extra fractional bits carried between the two passes.
const INTERNAL_BITS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum TxType {
    Dct,
    Adst,
    FlipAdst,
    Idtx,
}

impl TxType {
    pub const ALL: [TxType; 4] = [TxType::Dct, TxType::Adst, TxType::FlipAdst, TxType::Idtx];

    /// Whether the kernel exists at length `n`.
    pub fn allowed(self, n: usize) -> bool {
        matches!(n, 4 | 8 | 16 | 32 | 64) && (n < 32 || matches!(self, TxType::Dct | TxType::Idtx))
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<TxType> {
        Self::ALL.get(i).copied()
    }
}

/// All legal (vertical, horizontal) kernel pairs for a `w`×`h` transform.
pub fn legal_pairs(w: usize, h: usize) -> Vec<(TxType, TxType)> {
    let mut v = Vec::new();
    for a in TxType::ALL {
        for b in TxType::ALL {
            if a.allowed(h) && b.allowed(w) {
                v.push((a, b));
            }
        }
    }
    v
}

/// Floating-point orthonormal basis, row `k` holding basis function `k`.
///
/// DCT: `cos((2n+1) k pi / 2N)`. ADST: at `N = 4` the sine kernel
/// `sin((n+1)(2k+1) pi / (2N+1))`; from `N = 8` the butterfly-friendly form
/// `sin((2n+1)(2k+1) pi / 4N)`. FLIPADST reverses each ADST row.
pub fn kernel_basis(kind: TxType, n: usize) -> Result<Vec<Vec<f64>>> {
    if !kind.allowed(n) {
        return Err(Error::InvalidArgument(format!("{kind:?} at length {n}")));
    }
    let nf = n as f64;
    let row = |k: usize| -> Vec<f64> {
        (0..n)
            .map(|i| match kind {
                TxType::Dct => {
                    let s = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                    s * (PI * ((2 * i + 1) * k) as f64 / (2.0 * nf)).cos()
                }
                TxType::Adst | TxType::FlipAdst => {
                    let j = if kind == TxType::FlipAdst { n - 1 - i } else { i };
                    if n == 4 {
                        2.0 / (2.0 * nf + 1.0).sqrt() * (PI * ((j + 1) * (2 * k + 1)) as f64 / (2.0 * nf + 1.0)).sin()
                    } else {
                        (2.0 / nf).sqrt() * (PI * ((2 * j + 1) * (2 * k + 1)) as f64 / (4.0 * nf)).sin()
                    }
                }
                TxType::Idtx => (i == k) as u8 as f64,
            })
            .collect()
    };
    Ok((0..n).map(row).collect())
}

fn log2(n: usize) -> u32 {
    n.trailing_zeros()
}

/// Orthonormal integer forward kernel on a high-precision vector.
pub fn fwd_1d(kind: TxType, x: &mut [i64], count: &mut MulCount) {
    let n = x.len();
    let l = log2(n);
    match kind {
        TxType::Idtx => {}
        TxType::Dct => {
            dct2(x, count);
            x[0] = scale_sqrt2_pow(x[0], l, count);
            for v in x.iter_mut().skip(1) {
                *v = scale_sqrt2_pow(*v, l - 1, count);
            }
        }
        TxType::Adst | TxType::FlipAdst => {
            if kind == TxType::FlipAdst {
                x.reverse();
            }
            if n == 4 {
                adst4(x, false, count);
            } else {
                dst4(x, count);
                for v in x.iter_mut() {
                    *v = scale_sqrt2_pow(*v, l - 1, count);
                }
            }
        }
    }
}

/// Inverse of [`fwd_1d`].
pub fn inv_1d(kind: TxType, x: &mut [i64], count: &mut MulCount) {
    let n = x.len();
    let l = log2(n);
    match kind {
        TxType::Idtx => {}
        TxType::Dct => {
            x[0] = scale_sqrt2_pow(x[0], l, count);
            for v in x.iter_mut().skip(1) {
                *v = scale_sqrt2_pow(*v, l - 1, count);
            }
            dct3(x, count);
        }
        TxType::Adst | TxType::FlipAdst => {
            if n == 4 {
                adst4(x, true, count);
            } else {
                for v in x.iter_mut() {
                    *v = scale_sqrt2_pow(*v, l - 1, count);
                }
                dst4(x, count);
            }
            if kind == TxType::FlipAdst {
                x.reverse();
            }
        }
    }
}

fn check_shape(len: usize, w: usize, h: usize, v: TxType, hk: TxType) -> Result<()> {
    if len != w * h {
        return Err(Error::DimensionMismatch(format!("{len} samples for {w}x{h}")));
    }
    if !v.allowed(h) || !hk.allowed(w) {
        return Err(Error::InvalidArgument(format!("kernel pair {v:?}/{hk:?} at {w}x{h}")));
    }
    let (a, b) = (w.max(h), w.min(h));
    if a / b > 4 {
        return Err(Error::InvalidArgument(format!("aspect ratio of {w}x{h}")));
    }
    Ok(())
}

#[inline]
fn round_shift(x: i64, s: u32) -> i64 {
    if s == 0 {
        x
    } else {
        (x + (1 << (s - 1))) >> s
    }
}

fn separable(buf: &mut [i64], w: usize, h: usize, col: impl Fn(&mut [i64]), row: impl Fn(&mut [i64]), cols_first: bool) {
    let mut tmp = vec![0i64; h];
    let mut do_cols = |buf: &mut [i64]| {
        for c in 0..w {
            for r in 0..h {
                tmp[r] = buf[r * w + c];
            }
            col(&mut tmp);
            for r in 0..h {
                buf[r * w + c] = tmp[r];
            }
        }
    };
    if cols_first {
        do_cols(buf);
        buf.chunks_mut(w).for_each(&row);
    } else {
        buf.chunks_mut(w).for_each(&row);
        do_cols(buf);
    }
}

/// Forward 2-D transform of a row-major `w`×`h` residual block: vertical
/// kernel `v` down the columns, then horizontal kernel `hk` along the rows.
pub fn tx_forward(block: &[i32], w: usize, h: usize, v: TxType, hk: TxType) -> Result<Vec<i32>> {
    tx_forward_counted(block, w, h, v, hk).map(|(c, _)| c)
}

/// [`tx_forward`] plus the number of constant multiplies performed.
pub fn tx_forward_counted(block: &[i32], w: usize, h: usize, v: TxType, hk: TxType) -> Result<(Vec<i32>, u64)> {
    check_shape(block.len(), w, h, v, hk)?;
    let mut buf: Vec<i64> = block.iter().map(|&x| (x as i64) << (COEFF_SCALE_BITS + INTERNAL_BITS)).collect();
    let count = std::cell::Cell::new(0u64);
    let run = |kind: TxType| {
        let count = &count;
        move |x: &mut [i64]| {
            let mut c = MulCount::default();
            fwd_1d(kind, x, &mut c);
            count.set(count.get() + c.0);
        }
    };
    separable(&mut buf, w, h, run(v), run(hk), true);
    let out = buf.iter().map(|&x| round_shift(x, INTERNAL_BITS) as i32).collect();
    Ok((out, count.get()))
}

/// Inverse of [`tx_forward`]: rows first, then columns.
pub fn tx_inverse(coeffs: &[i32], w: usize, h: usize, v: TxType, hk: TxType) -> Result<Vec<i32>> {
    check_shape(coeffs.len(), w, h, v, hk)?;
    let mut buf: Vec<i64> = coeffs.iter().map(|&x| (x as i64) << INTERNAL_BITS).collect();
    let run = |kind: TxType| {
        move |x: &mut [i64]| {
            let mut c = MulCount::default();
            inv_1d(kind, x, &mut c);
        }
    };
    separable(&mut buf, w, h, run(v), run(hk), false);
    Ok(buf.iter().map(|&x| round_shift(x, COEFF_SCALE_BITS + INTERNAL_BITS) as i32).collect())
}

/// Floating-point forward transform at the integer coefficient scale; the
/// oracle for [`tx_forward`].
pub fn tx_forward_float(block: &[f64], w: usize, h: usize, v: TxType, hk: TxType) -> Result<Vec<f64>> {
    check_shape(block.len(), w, h, v, hk)?;
    let bv = kernel_basis(v, h)?;
    let bh = kernel_basis(hk, w)?;
    let mut tmp = vec![0.0; w * h];
    for k in 0..h {
        for c in 0..w {
            tmp[k * w + c] = (0..h).map(|r| bv[k][r] * block[r * w + c]).sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for r in 0..h {
        for k in 0..w {
            out[r * w + k] = COEFF_SCALE as f64 * (0..w).map(|c| bh[k][c] * tmp[r * w + c]).sum::<f64>();
        }
    }
    Ok(out)
}

/// Multiplies used by one forward 1-D DCT of length `n`.
pub fn dct_mul_count(n: usize) -> u64 {
    let mut x = vec![0i64; n];
    let mut c = MulCount::default();
    fwd_1d(TxType::Dct, &mut x, &mut c);
    c.0
}
