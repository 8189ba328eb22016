//! Multi-symbol arithmetic coding with adaptive 15-bit CDFs.
//!
//! Wire format: the encoder emits the binary expansion of the final interval
//! base, most significant bit first, packed into bytes. The interval length
//! `R` is kept in `[2^15, 2^16)`; each symbol narrows it using only the top
//! 9 bits of the inverse CDF and `R >> 8`, so every product has an 8-bit and
//! a 9-bit operand. A minimum width of [`MIN_WIDTH`] per symbol keeps every
//! symbol decodable regardless of how skewed the model is.

pub mod levelmap;

use crate::error::{Error, Result};

/// CDF scale: probabilities are stored as 15-bit integers.
pub const CDF_ONE: u16 = 1 << 15;
/// Smallest per-symbol width kept in the CDF after adaptation.
pub const CDF_FLOOR: u16 = 4;
/// Smallest per-symbol width inside the coder interval.
/// Largest alphabet a single model codes.
pub const MAX_ALPHABET: usize = 14;

pub const MIN_WIDTH: u32 = 4;
const PROB_SHIFT: u32 = 6;
const COUNT_CAP: u8 = 64;

/// Adaptive cumulative distribution over `M` symbols.
///
/// `cdf[i]` is the scaled probability that the symbol index is `<= i`;
/// `cdf[M-1]` is always `CDF_ONE`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdfModel {
    cdf: Vec<u16>,
    count: u8,
}

impl CdfModel {
    /// Uniform model over `m` symbols.
    pub fn uniform(m: usize) -> Self {
        assert!((2..=MAX_ALPHABET).contains(&m), "alphabet size {m} outside [2,{MAX_ALPHABET}]");
        let cdf = (1..=m).map(|i| ((i as u32 * CDF_ONE as u32) / m as u32) as u16).collect();
        CdfModel { cdf, count: 0 }
    }

    /// Model from explicit cumulative values; the last one must be `CDF_ONE`.
    pub fn from_cdf(cdf: &[u16]) -> Result<Self> {
        if !(2..=MAX_ALPHABET).contains(&cdf.len()) {
            return Err(Error::InvalidArgument(format!("alphabet size {}", cdf.len())));
        }
        if *cdf.last().unwrap() != CDF_ONE {
            return Err(Error::InvalidArgument("last cdf entry must be 32768".into()));
        }
        let mut prev = 0u16;
        for &c in cdf {
            if c < prev + CDF_FLOOR {
                return Err(Error::InvalidArgument("cdf symbol width below floor".into()));
            }
            prev = c;
        }
        Ok(CdfModel { cdf: cdf.to_vec(), count: 0 })
    }

    /// Binary model where symbol 0 has probability `p0` (clamped to the floor).
    pub fn binary(p0: f64) -> Self {
        let c = (p0 * CDF_ONE as f64).round() as i64;
        let c = c.clamp(CDF_FLOOR as i64, (CDF_ONE - CDF_FLOOR) as i64) as u16;
        CdfModel { cdf: vec![c, CDF_ONE], count: 0 }
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cdf(&self) -> &[u16] {
        &self.cdf
    }

    pub fn count(&self) -> u8 {
        self.count
    }

    /// Probability of symbol `s` implied by the 15-bit table.
    pub fn prob(&self, s: usize) -> f64 {
        let lo = if s == 0 { 0 } else { self.cdf[s - 1] };
        (self.cdf[s] - lo) as f64 / CDF_ONE as f64
    }

    /// Adapts towards symbol `s` (0-based). Entries below `s` shrink towards
    /// 0, entries at or above it grow towards `CDF_ONE`.
    pub fn update(&mut self, s: usize) {
        let m = self.cdf.len();
        assert!(s < m);
        let shift = rate_shift(self.count as u32, m);
        for (i, c) in self.cdf.iter_mut().enumerate().take(m - 1) {
            if i < s {
                *c -= *c >> shift;
            } else {
                *c += (CDF_ONE - *c) >> shift;
            }
        }
        self.repair_floor();
        if self.count < COUNT_CAP {
            self.count += 1;
        }
    }

    /// Restores the per-symbol floor after integer shrinkage.
    fn repair_floor(&mut self) {
        let m = self.cdf.len();
        let mut prev = 0u16;
        for c in self.cdf.iter_mut().take(m - 1) {
            if *c < prev + CDF_FLOOR {
                *c = prev + CDF_FLOOR;
            }
            prev = *c;
        }
        let mut next = CDF_ONE;
        for c in self.cdf.iter_mut().take(m - 1).rev() {
            if *c > next - CDF_FLOOR {
                *c = next - CDF_FLOOR;
            }
            next = *c;
        }
    }

    /// Clears the appearance counter, e.g. at a frame boundary.
    pub fn reset_count(&mut self) {
        self.count = 0;
    }
}

/// Adaptation shift `s`, the update rate being `2^-s`.
pub fn rate_shift(count: u32, m: usize) -> u32 {
    let log2m = usize::BITS - 1 - m.leading_zeros();
    3 + (count > 15) as u32 + (count > 32) as u32 + log2m.min(2)
}

/// Interval boundary below symbol `s`: symbol `s` owns `[v(s), v(s-1))`
/// with `v(-1) = R` and `v(M-1) = 0`.
#[inline]
fn boundary(r: u32, cdf: &[u16], s: usize, stats: &mut MulStats) -> u32 {
    let m = cdf.len();
    if s + 1 == m {
        return 0;
    }
    let a = r >> 8;
    let f = ((CDF_ONE - cdf[s]) >> PROB_SHIFT) as u32;
    stats.observe(a, f);
    ((a * f) >> 1) + MIN_WIDTH * (m - 1 - s) as u32
}

/// Widest multiplication operands seen by a coder, for hardware-budget checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MulStats {
    pub max_r_operand: u32,
    pub max_f_operand: u32,
    pub max_product: u32,
    pub multiplies: u64,
}

impl MulStats {
    #[inline]
    fn observe(&mut self, a: u32, f: u32) {
        self.max_r_operand = self.max_r_operand.max(a);
        self.max_f_operand = self.max_f_operand.max(f);
        self.max_product = self.max_product.max(a * f);
        self.multiplies += 1;
    }
}

/// Range encoder.
#[derive(Debug, Clone)]
pub struct Encoder {
    low: u64,
    rng: u32,
    /// Bits held in `low` above the 16-bit interval window.
    cnt: u32,
    cache: Option<u8>,
    pending_ff: usize,
    out: Vec<u8>,
    stats: MulStats,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Encoder { low: 0, rng: 0x8000, cnt: 0, cache: None, pending_ff: 0, out: Vec::new(), stats: MulStats::default() }
    }

    /// Codes `s` under a static model.
    pub fn encode(&mut self, s: usize, model: &CdfModel) {
        let cdf = &model.cdf;
        let u = if s == 0 { self.rng } else { boundary(self.rng, cdf, s - 1, &mut self.stats) };
        let v = boundary(self.rng, cdf, s, &mut self.stats);
        debug_assert!(u > v);
        self.low += v as u64;
        self.rng = u - v;
        self.normalize();
    }

    /// Codes `s` and adapts the model.
    pub fn encode_adaptive(&mut self, s: usize, model: &mut CdfModel) {
        self.encode(s, model);
        model.update(s);
    }

    /// Equiprobable raw bit.
    pub fn bit(&mut self, b: bool) {
        let half = self.rng >> 1;
        if b {
            self.rng -= half;
        } else {
            self.low += (self.rng - half) as u64;
            self.rng = half;
        }
        self.normalize();
    }

    /// `n` raw bits of `v`, most significant first.
    pub fn literal(&mut self, n: u32, v: u32) {
        for i in (0..n).rev() {
            self.bit((v >> i) & 1 == 1);
        }
    }

    /// Order-0 Exp-Golomb: `nbits-1` zeros, then `v+1` in `nbits` bits,
    /// where `nbits` is the bit length of `v+1`.
    pub fn golomb(&mut self, v: u32) {
        let x = v as u64 + 1;
        let nbits = 64 - x.leading_zeros();
        for _ in 1..nbits {
            self.bit(false);
        }
        for i in (0..nbits).rev() {
            self.bit((x >> i) & 1 == 1);
        }
    }

    fn normalize(&mut self) {
        let d = self.rng.leading_zeros() - 16;
        self.rng <<= d;
        self.low <<= d;
        self.cnt += d;
        while self.cnt >= 8 {
            let sh = 16 + self.cnt - 8;
            let v = (self.low >> sh) as u32;
            self.low &= (1u64 << sh) - 1;
            self.cnt -= 8;
            self.push(v);
        }
    }

    /// Byte output with carry resolution; `v` may carry into bit 8.
    fn push(&mut self, v: u32) {
        let carry = (v >> 8) as u8;
        let b = (v & 0xFF) as u8;
        if carry == 0 && b == 0xFF {
            self.pending_ff += 1;
            return;
        }
        if let Some(c) = self.cache {
            self.out.push(c.wrapping_add(carry));
        }
        for _ in 0..self.pending_ff {
            self.out.push(0xFFu8.wrapping_add(carry));
        }
        self.pending_ff = 0;
        self.cache = Some(b);
    }

    /// Bits emitted so far, including buffered ones.
    pub fn tell_bits(&self) -> u64 {
        (self.out.len() as u64 + self.cache.is_some() as u64 + self.pending_ff as u64) * 8 + self.cnt as u64
    }

    pub fn stats(&self) -> MulStats {
        self.stats
    }

    /// Flushes the interval base and returns the byte stream.
    pub fn finish(mut self) -> Vec<u8> {
        let mut total = 16 + self.cnt;
        let pad = (8 - total % 8) % 8;
        self.low <<= pad;
        total += pad;
        for k in 0..total / 8 {
            let sh = total - 8 * (k + 1);
            let v = self.low >> sh;
            // Only the leading byte can still hold a carry bit.
            let v = if k == 0 { v } else { v & 0xFF };
            self.push(v as u32);
        }
        // A final non-0xFF byte releases the cache; it is never emitted itself.
        self.push(0);
        self.out
    }
}

/// Range decoder over a byte slice.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    data: &'a [u8],
    bitpos: usize,
    /// Code value relative to the interval base, in `[0, rng)`.
    val: u32,
    rng: u32,
    stats: MulStats,
}

impl<'a> Decoder<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self> {
        let mut d = Decoder { data, bitpos: 0, val: 0, rng: 0x8000, stats: MulStats::default() };
        d.val = d.read_bits(16)?;
        Ok(d)
    }

    fn read_bits(&mut self, n: u32) -> Result<u32> {
        let mut v = 0u32;
        for _ in 0..n {
            let byte = self.bitpos / 8;
            let b = match self.data.get(byte) {
                Some(x) => (x >> (7 - self.bitpos % 8)) & 1,
                None => return Err(Error::Exhausted),
            };
            v = (v << 1) | b as u32;
            self.bitpos += 1;
        }
        Ok(v)
    }

    /// Decodes one symbol under a static model.
    pub fn decode(&mut self, model: &CdfModel) -> Result<usize> {
        let cdf = &model.cdf;
        let mut up = self.rng;
        let mut s = 0;
        let mut low = boundary(self.rng, cdf, 0, &mut self.stats);
        while self.val < low {
            s += 1;
            up = low;
            low = boundary(self.rng, cdf, s, &mut self.stats);
        }
        self.val -= low;
        self.rng = up - low;
        self.normalize()?;
        Ok(s)
    }

    pub fn decode_adaptive(&mut self, model: &mut CdfModel) -> Result<usize> {
        let s = self.decode(model)?;
        model.update(s);
        Ok(s)
    }

    pub fn bit(&mut self) -> Result<bool> {
        let half = self.rng >> 1;
        let split = self.rng - half;
        // `true` owns the lower part of the interval.
        let b = if self.val < split {
            self.rng = split;
            true
        } else {
            self.val -= split;
            self.rng = half;
            false
        };
        self.normalize()?;
        Ok(b)
    }

    pub fn literal(&mut self, n: u32) -> Result<u32> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()? as u32;
        }
        Ok(v)
    }

    pub fn golomb(&mut self) -> Result<u32> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
            if zeros > 32 {
                return Err(Error::Malformed("exp-golomb prefix too long".into()));
            }
        }
        let mut x: u64 = 1;
        for _ in 0..zeros {
            x = (x << 1) | self.bit()? as u64;
        }
        u32::try_from(x - 1).map_err(|_| Error::Malformed("exp-golomb value overflow".into()))
    }

    fn normalize(&mut self) -> Result<()> {
        let d = self.rng.leading_zeros() - 16;
        if d > 0 {
            self.rng <<= d;
            self.val = (self.val << d) | self.read_bits(d)?;
        }
        Ok(())
    }

    pub fn stats(&self) -> MulStats {
        self.stats
    }

    /// Bits consumed so far.
    pub fn tell_bits(&self) -> usize {
        self.bitpos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_shift_examples() {
        assert_eq!(rate_shift(0, 2), 4);
        assert_eq!(rate_shift(40, 8), 7);
        assert_eq!(rate_shift(16, 14), 6);
    }

    #[test]
    fn binary_update_example() {
        // Shift 5 corresponds to M=2 with count in (15, 32].
        let mut m = CdfModel::from_cdf(&[16384, 32768]).unwrap();
        m.count = 16;
        m.update(0);
        assert_eq!(m.cdf(), &[16896, 32768]);
    }

    #[test]
    fn repeated_symbol_converges() {
        let mut m = CdfModel::uniform(4);
        let mut prev = m.cdf()[1];
        for _ in 0..2000 {
            m.update(2);
            assert!(m.cdf()[1] <= prev);
            prev = m.cdf()[1];
            assert_eq!(m.cdf()[3], CDF_ONE);
        }
        assert!(m.prob(2) > 0.95);
        assert!(m.cdf()[0] >= CDF_FLOOR);
    }

    #[test]
    fn alternating_binary_round_trip() {
        let model = CdfModel::uniform(2);
        let mut enc = Encoder::new();
        for i in 0..1000 {
            enc.encode(i % 2, &model);
        }
        let bytes = enc.finish();
        let mut dec = Decoder::new(&bytes).unwrap();
        for i in 0..1000 {
            assert_eq!(dec.decode(&model).unwrap(), i % 2);
        }
    }

    #[test]
    fn raw_bits_and_golomb() {
        let mut enc = Encoder::new();
        enc.literal(5, 0b10110);
        for v in [0u32, 1, 2, 7, 100, 32753, 65535] {
            enc.golomb(v);
        }
        let bytes = enc.finish();
        let mut dec = Decoder::new(&bytes).unwrap();
        assert_eq!(dec.literal(5).unwrap(), 0b10110);
        for v in [0u32, 1, 2, 7, 100, 32753, 65535] {
            assert_eq!(dec.golomb().unwrap(), v);
        }
    }

    #[test]
    fn empty_stream_is_exhausted() {
        assert_eq!(Decoder::new(&[0x12]).unwrap_err(), Error::Exhausted);
    }
}
