use av1lab::txfm::{TxType, COEFF_SCALE};
use std::f64::consts::PI;

/// Transform shapes: power-of-two sides 4..64, aspect at most 4.
pub fn tx_shapes() -> Vec<(usize, usize)> {
    let sides = [4, 8, 16, 32, 64];
    let mut v = Vec::new();
    for w in sides {
        for h in sides {
            if w.max(h) / w.min(h) <= 4 {
                v.push((w, h));
            }
        }
    }
    v
}

/// Basis function `k` at sample `i`, written from the closed forms.
fn basis(kind: TxType, n: usize, k: usize, i: usize) -> f64 {
    let nf = n as f64;
    match kind {
        TxType::Dct => {
            let a = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            a * ((2 * i + 1) as f64 * k as f64 * PI / (2.0 * nf)).cos()
        }
        TxType::Adst | TxType::FlipAdst => {
            let i = if kind == TxType::FlipAdst { n - 1 - i } else { i };
            if n == 4 {
                // Length-4 sine kernel over 2N+1.
                2.0 / 3.0 * ((i + 1) as f64 * (2 * k + 1) as f64 * PI / 9.0).sin()
            } else {
                (2.0 / nf).sqrt() * ((2 * i + 1) as f64 * (2 * k + 1) as f64 * PI / (4.0 * nf)).sin()
            }
        }
        TxType::Idtx => (i == k) as u32 as f64,
    }
}

pub fn basis_matrix(kind: TxType, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|k| (0..n).map(|i| basis(kind, n, k, i)).collect()).collect()
}

/// Largest deviation of `B B^T` from the identity.
pub fn orthogonality_error(b: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (r, a) in b.iter().enumerate() {
        for (s, c) in b.iter().enumerate() {
            let dot: f64 = a.iter().zip(c).map(|(x, y)| x * y).sum();
            worst = worst.max((dot - (r == s) as u32 as f64).abs());
        }
    }
    worst
}

/// Direct 2-D forward transform at the integer coefficient scale:
/// `COEFF_SCALE * Bv X Bh^T` for a row-major `w`x`h` block.
pub fn forward_2d(block: &[i32], w: usize, h: usize, v: TxType, hk: TxType) -> Vec<f64> {
    let (bv, bh) = (basis_matrix(v, h), basis_matrix(hk, w));
    let mut out = vec![0.0; w * h];
    for kr in 0..h {
        for kc in 0..w {
            let mut acc = 0.0;
            for r in 0..h {
                let row: f64 = (0..w).map(|c| bh[kc][c] * block[r * w + c] as f64).sum();
                acc += bv[kr][r] * row;
            }
            out[kr * w + kc] = COEFF_SCALE as f64 * acc;
        }
    }
    out
}
