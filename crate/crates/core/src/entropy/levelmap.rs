//! Level-map coding of quantized transform coefficients.
//!
//! Block layout: the end-of-block position (one past the last nonzero
//! coefficient in scan order) is coded first as a size class plus raw
//! offset bits. Magnitudes follow in reverse scan order as a BR symbol and
//! up to four LR symbols, which reach 14 together; anything larger carries
//! an HR remainder. After the magnitude pass come the DC sign (modelled),
//! the AC signs as raw bits in scan order, and then the HR remainders as
//! order-0 Exp-Golomb codes in scan order.

use super::{CdfModel, Decoder, Encoder};
use crate::error::{Error, Result};
use crate::txfm::TxType;

/// Number of BR context buckets.
pub const BR_CONTEXTS: usize = 6;
/// Number of LR context buckets.
pub const LR_CONTEXTS: usize = 4;
/// Magnitudes at or below this value need no HR remainder.
pub const LR_LIMIT: u32 = 14;
const MAX_LR: usize = 4;
/// Largest representable magnitude.
pub const MAX_LEVEL: u32 = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    ZigZag,
    Column,
    Row,
}

/// Scan family for a (vertical, horizontal) kernel pair. A 1-D vertical
/// transform (identity horizontally) is read column by column; the mirrored
/// case is read row by row.
pub fn scan_kind(v: TxType, h: TxType) -> ScanKind {
    match (v == TxType::Idtx, h == TxType::Idtx) {
        (false, true) => ScanKind::Column,
        (true, false) => ScanKind::Row,
        _ => ScanKind::ZigZag,
    }
}

/// Scan order as raster indices into a `w`×`h` block.
pub fn scan_order(v: TxType, h: TxType, w: usize, ht: usize) -> Vec<usize> {
    match scan_kind(v, h) {
        ScanKind::Row => (0..w * ht).collect(),
        ScanKind::Column => (0..w).flat_map(|c| (0..ht).map(move |r| r * w + c)).collect(),
        ScanKind::ZigZag => zigzag(w, ht),
    }
}

/// Anti-diagonal scan alternating direction per diagonal, starting at the
/// origin and moving right first.
fn zigzag(w: usize, h: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(w * h);
    for d in 0..(w + h - 1) {
        let r_lo = d.saturating_sub(w - 1);
        let r_hi = d.min(h - 1);
        if d % 2 == 1 {
            for r in r_lo..=r_hi {
                out.push(r * w + (d - r));
            }
        } else {
            for r in (r_lo..=r_hi).rev() {
                out.push(r * w + (d - r));
            }
        }
    }
    out
}

const BR_2D: [(usize, usize); 5] = [(0, 1), (1, 0), (1, 1), (0, 2), (2, 0)];
const LR_2D: [(usize, usize); 3] = [(0, 1), (1, 0), (1, 1)];
const ALONG_COL: [(usize, usize); 3] = [(1, 0), (2, 0), (3, 0)];
const ALONG_ROW: [(usize, usize); 3] = [(0, 1), (0, 2), (0, 3)];

fn neighbor_sum(mags: &[u32], w: usize, h: usize, pos: usize, offs: &[(usize, usize)]) -> u32 {
    let (r, c) = (pos / w, pos % w);
    offs.iter()
        .filter(|(dr, dc)| r + dr < h && c + dc < w)
        .map(|(dr, dc)| mags[(r + dr) * w + c + dc])
        .sum()
}

/// BR context: sum of already-coded magnitudes over the kernel-dependent
/// neighbourhood, clamped to `BR_CONTEXTS` buckets.
pub fn br_context(mags: &[u32], w: usize, h: usize, pos: usize, kind: ScanKind) -> usize {
    let offs: &[(usize, usize)] = match kind {
        ScanKind::ZigZag => &BR_2D,
        ScanKind::Column => &ALONG_COL,
        ScanKind::Row => &ALONG_ROW,
    };
    (neighbor_sum(mags, w, h, pos, offs) as usize).min(BR_CONTEXTS - 1)
}

/// LR context: 3-neighbour sum, halved with rounding, clamped to
/// `LR_CONTEXTS` buckets.
pub fn lr_context(mags: &[u32], w: usize, h: usize, pos: usize, kind: ScanKind) -> usize {
    let offs: &[(usize, usize)] = match kind {
        ScanKind::ZigZag => &LR_2D,
        ScanKind::Column => &ALONG_COL,
        ScanKind::Row => &ALONG_ROW,
    };
    (((neighbor_sum(mags, w, h, pos, offs) + 1) >> 1) as usize).min(LR_CONTEXTS - 1)
}

/// Symbol decomposition of one magnitude.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSymbols {
    /// 0..=3, 3 meaning "more than 2".
    pub br: u8,
    /// Each 0..=3, 3 meaning "more than 2"; only the last may be below 3.
    pub lr: Vec<u8>,
    /// `|V| - 14`, present iff `|V| > 14`.
    pub hr: Option<u32>,
}

impl LevelSymbols {
    pub fn decompose(abs: u32) -> Self {
        if abs <= 2 {
            return LevelSymbols { br: abs as u8, lr: Vec::new(), hr: None };
        }
        let mut lr = Vec::new();
        let mut rest = abs - 3;
        while lr.len() < MAX_LR {
            if rest < 3 {
                lr.push(rest as u8);
                return LevelSymbols { br: 3, lr, hr: None };
            }
            lr.push(3);
            rest -= 3;
        }
        LevelSymbols { br: 3, lr, hr: Some(abs - LR_LIMIT) }
    }

    pub fn compose(&self) -> u32 {
        if self.br < 3 {
            return self.br as u32;
        }
        if let Some(hr) = self.hr {
            return LR_LIMIT + hr;
        }
        3 + self.lr.iter().map(|&x| x as u32).sum::<u32>()
    }
}

/// Adaptive models for one plane type.
#[derive(Debug, Clone)]
pub struct CoeffModels {
    skip: Vec<CdfModel>,
    eob: Vec<CdfModel>,
    br: Vec<CdfModel>,
    br_last: Vec<CdfModel>,
    lr: Vec<CdfModel>,
    dc_sign: Vec<CdfModel>,
}

impl Default for CoeffModels {
    fn default() -> Self {
        Self::new()
    }
}

impl CoeffModels {
    pub fn new() -> Self {
        CoeffModels {
            skip: (0..3).map(|_| CdfModel::uniform(2)).collect(),
            // log2(area) in 4..=12 gives an alphabet of log2(area)+1 classes.
            eob: (4..=12).map(|l| CdfModel::uniform(l + 1)).collect(),
            br: (0..BR_CONTEXTS).map(|_| CdfModel::uniform(4)).collect(),
            br_last: (0..2).map(|_| CdfModel::uniform(3)).collect(),
            lr: (0..LR_CONTEXTS).map(|_| CdfModel::uniform(4)).collect(),
            dc_sign: (0..3).map(|_| CdfModel::uniform(2)).collect(),
        }
    }
}

/// Neighbour-derived context for one transform block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BlockCtx {
    /// 0..=2, from neighbouring blocks' skip flags.
    pub skip_ctx: usize,
    /// 0..=2, from the DC signs of the above and left blocks.
    pub dc_sign_ctx: usize,
}

/// DC-sign context from neighbour DC signs (each -1, 0 or +1).
pub fn dc_sign_context(above: i8, left: i8) -> usize {
    match (above as i32 + left as i32).signum() {
        0 => 0,
        -1 => 1,
        _ => 2,
    }
}

fn log2_area(w: usize, h: usize) -> Result<usize> {
    let n = w * h;
    if !n.is_power_of_two() || !(16..=4096).contains(&n) {
        return Err(Error::InvalidArgument(format!("transform area {n}")));
    }
    Ok(n.trailing_zeros() as usize)
}

fn bit_len(x: u32) -> u32 {
    32 - x.leading_zeros()
}

/// Writes one transform block. Returns the end-of-block position (0 for an
/// all-zero block).
pub fn coeff_encode(
    enc: &mut Encoder,
    models: &mut CoeffModels,
    levels: &[i32],
    w: usize,
    h: usize,
    tx: (TxType, TxType),
    ctx: BlockCtx,
) -> Result<usize> {
    let l2 = log2_area(w, h)?;
    if levels.len() != w * h {
        return Err(Error::DimensionMismatch(format!("{} levels for {w}x{h}", levels.len())));
    }
    if let Some(bad) = levels.iter().find(|&&v| !(-(MAX_LEVEL as i32)..MAX_LEVEL as i32).contains(&v)) {
        return Err(Error::InvalidArgument(format!("level {bad} out of range")));
    }
    let kind = scan_kind(tx.0, tx.1);
    let scan = scan_order(tx.0, tx.1, w, h);
    let eob = scan.iter().rposition(|&p| levels[p] != 0).map_or(0, |i| i + 1);
    enc.encode_adaptive((eob == 0) as usize, &mut models.skip[ctx.skip_ctx]);
    if eob == 0 {
        return Ok(0);
    }
    let class = bit_len(eob as u32);
    enc.encode_adaptive(class as usize - 1, &mut models.eob[l2 - 4]);
    enc.literal(class - 1, eob as u32 - (1 << (class - 1)));

    let mut mags = vec![0u32; w * h];
    for i in (0..eob).rev() {
        let pos = scan[i];
        let sym = LevelSymbols::decompose(levels[pos].unsigned_abs());
        if i == eob - 1 {
            enc.encode_adaptive(sym.br as usize - 1, &mut models.br_last[(i == 0) as usize]);
        } else {
            let c = br_context(&mags, w, h, pos, kind);
            enc.encode_adaptive(sym.br as usize, &mut models.br[c]);
        }
        if !sym.lr.is_empty() {
            let c = lr_context(&mags, w, h, pos, kind);
            for &l in &sym.lr {
                enc.encode_adaptive(l as usize, &mut models.lr[c]);
            }
        }
        mags[pos] = levels[pos].unsigned_abs().min(LR_LIMIT + 1);
    }
    for (i, &pos) in scan.iter().enumerate().take(eob) {
        let v = levels[pos];
        if v == 0 {
            continue;
        }
        if i == 0 {
            enc.encode_adaptive((v < 0) as usize, &mut models.dc_sign[ctx.dc_sign_ctx]);
        } else {
            enc.bit(v < 0);
        }
    }
    for &pos in scan.iter().take(eob) {
        let a = levels[pos].unsigned_abs();
        if a > LR_LIMIT {
            enc.golomb(a - LR_LIMIT);
        }
    }
    Ok(eob)
}

/// Reads one transform block written by [`coeff_encode`].
pub fn coeff_decode(
    dec: &mut Decoder,
    models: &mut CoeffModels,
    w: usize,
    h: usize,
    tx: (TxType, TxType),
    ctx: BlockCtx,
) -> Result<Vec<i32>> {
    let l2 = log2_area(w, h)?;
    let kind = scan_kind(tx.0, tx.1);
    let scan = scan_order(tx.0, tx.1, w, h);
    let mut levels = vec![0i32; w * h];
    if dec.decode_adaptive(&mut models.skip[ctx.skip_ctx])? == 1 {
        return Ok(levels);
    }
    let class = dec.decode_adaptive(&mut models.eob[l2 - 4])? as u32 + 1;
    let eob = ((1u32 << (class - 1)) + dec.literal(class - 1)?) as usize;
    if eob > w * h {
        return Err(Error::Malformed(format!("end of block {eob} beyond {}", w * h)));
    }
    let mut mags = vec![0u32; w * h];
    let mut needs_hr = vec![false; w * h];
    for i in (0..eob).rev() {
        let pos = scan[i];
        let br = if i == eob - 1 {
            dec.decode_adaptive(&mut models.br_last[(i == 0) as usize])? as u32 + 1
        } else {
            let c = br_context(&mags, w, h, pos, kind);
            dec.decode_adaptive(&mut models.br[c])? as u32
        };
        let mut mag = br;
        if br == 3 {
            let c = lr_context(&mags, w, h, pos, kind);
            for _ in 0..MAX_LR {
                let l = dec.decode_adaptive(&mut models.lr[c])? as u32;
                mag += l;
                if l < 3 {
                    break;
                }
            }
            if mag > LR_LIMIT {
                needs_hr[pos] = true;
            }
        }
        mags[pos] = mag;
    }
    let mut neg = vec![false; w * h];
    for (i, &pos) in scan.iter().enumerate().take(eob) {
        if mags[pos] == 0 {
            continue;
        }
        neg[pos] = if i == 0 { dec.decode_adaptive(&mut models.dc_sign[ctx.dc_sign_ctx])? == 1 } else { dec.bit()? };
    }
    for &pos in scan.iter().take(eob) {
        let mut a = mags[pos];
        if needs_hr[pos] {
            let hr = dec.golomb()?;
            a = LR_LIMIT
                .checked_add(hr)
                .filter(|&x| x <= MAX_LEVEL)
                .ok_or_else(|| Error::Malformed("coefficient magnitude overflow".into()))?;
        }
        let v = a as i64;
        let v = if neg[pos] { -v } else { v };
        if v >= MAX_LEVEL as i64 {
            return Err(Error::Malformed("coefficient out of range".into()));
        }
        levels[pos] = v as i32;
    }
    Ok(levels)
}

/// Approximate cost in bits of coding `levels` with the current (unadapted)
/// models; used for rate-distortion decisions.
pub fn coeff_cost(models: &CoeffModels, levels: &[i32], w: usize, h: usize, tx: (TxType, TxType), ctx: BlockCtx) -> f64 {
    let bits = |m: &CdfModel, s: usize| -m.prob(s).max(1e-9).log2();
    let Ok(l2) = log2_area(w, h) else { return f64::INFINITY };
    let kind = scan_kind(tx.0, tx.1);
    let scan = scan_order(tx.0, tx.1, w, h);
    let eob = scan.iter().rposition(|&p| levels[p] != 0).map_or(0, |i| i + 1);
    let mut total = bits(&models.skip[ctx.skip_ctx], (eob == 0) as usize);
    if eob == 0 {
        return total;
    }
    let class = bit_len(eob as u32);
    total += bits(&models.eob[l2 - 4], class as usize - 1) + (class - 1) as f64;
    let mut mags = vec![0u32; w * h];
    for i in (0..eob).rev() {
        let pos = scan[i];
        let a = levels[pos].unsigned_abs();
        let sym = LevelSymbols::decompose(a);
        total += if i == eob - 1 {
            bits(&models.br_last[(i == 0) as usize], sym.br as usize - 1)
        } else {
            bits(&models.br[br_context(&mags, w, h, pos, kind)], sym.br as usize)
        };
        if !sym.lr.is_empty() {
            let m = &models.lr[lr_context(&mags, w, h, pos, kind)];
            total += sym.lr.iter().map(|&l| bits(m, l as usize)).sum::<f64>();
        }
        if let Some(hr) = sym.hr {
            total += (2 * bit_len(hr + 1) - 1) as f64;
        }
        if a != 0 {
            total += 1.0;
        }
        mags[pos] = a.min(LR_LIMIT + 1);
    }
    total
}
