//! Palette mode: a few base colours plus a per-sample index map.

use crate::error::{invalid, Result};

pub const MIN_COLORS: usize = 2;
pub const MAX_COLORS: usize = 8;
const LLOYD_ITERS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    /// Sorted base colours, `2..=8` of them.
    pub colors: Vec<u16>,
    /// One index per sample, each `< colors.len()`.
    pub indices: Vec<u8>,
}

impl Palette {
    pub fn new(colors: Vec<u16>, indices: Vec<u8>) -> Result<Self> {
        if !(MIN_COLORS..=MAX_COLORS).contains(&colors.len()) {
            return invalid(format!("{} palette colours", colors.len()));
        }
        if indices.iter().any(|&i| i as usize >= colors.len()) {
            return invalid("palette index out of range");
        }
        Ok(Palette { colors, indices })
    }

    /// Maps indices to colours.
    pub fn reconstruct(&self) -> Vec<i32> {
        self.indices.iter().map(|&i| self.colors[i as usize] as i32).collect()
    }
}

/// Index of the nearest colour; ties go to the lower index.
pub fn nearest(colors: &[u16], v: i32) -> u8 {
    let mut best = 0;
    for (k, &c) in colors.iter().enumerate() {
        if (c as i32 - v).abs() < (colors[best] as i32 - v).abs() {
            best = k;
        }
    }
    best as u8
}

/// Lloyd iterations from evenly spaced quantile seeds, then a final
/// nearest-colour assignment.
pub fn palette_fit(block: &[i32], k: usize) -> Result<Palette> {
    if !(MIN_COLORS..=MAX_COLORS).contains(&k) {
        return invalid(format!("{k} palette colours"));
    }
    if block.is_empty() {
        return invalid("empty block");
    }
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mut centers: Vec<i64> = (0..k).map(|i| sorted[(2 * i + 1) * n / (2 * k)] as i64).collect();
    for _ in 0..LLOYD_ITERS {
        let cols: Vec<u16> = centers.iter().map(|&c| c as u16).collect();
        let mut sum = vec![0i64; k];
        let mut cnt = vec![0i64; k];
        for &v in block {
            let i = nearest(&cols, v) as usize;
            sum[i] += v as i64;
            cnt[i] += 1;
        }
        let next: Vec<i64> =
            (0..k).map(|i| if cnt[i] == 0 { centers[i] } else { (sum[i] + cnt[i] / 2) / cnt[i] }).collect();
        if next == centers {
            break;
        }
        centers = next;
    }
    centers.sort_unstable();
    let colors: Vec<u16> = centers.iter().map(|&c| c as u16).collect();
    let indices = block.iter().map(|&v| nearest(&colors, v)).collect();
    Palette::new(colors, indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_colour_block_is_exact() {
        let b: Vec<i32> = (0..64).map(|i| if (i / 3) % 2 == 0 { 20 } else { 200 }).collect();
        let p = palette_fit(&b, 2).unwrap();
        assert_eq!(p.reconstruct(), b);
    }

    #[test]
    fn flat_block_uses_its_value() {
        let p = palette_fit(&[42; 16], 5).unwrap();
        assert!(p.indices.iter().all(|&i| p.colors[i as usize] == 42));
    }

    #[test]
    fn colour_count_checked() {
        assert!(palette_fit(&[1, 2], 1).is_err());
        assert!(palette_fit(&[1, 2], 9).is_err());
        assert!(Palette::new(vec![1, 2], vec![2]).is_err());
    }
}
