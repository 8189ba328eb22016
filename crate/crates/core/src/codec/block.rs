//! Per-plane reconstruction state and the block procedure shared by the
//! encoder and decoder. Both sides run [`run_block`]; they differ only in
//! where the quantized levels of each transform block come from.

use std::collections::BTreeMap;

use crate::entropy::levelmap::{dc_sign_context, BlockCtx, CoeffModels, MAX_LEVEL};
use crate::entropy::{CdfModel, Decoder, Encoder, MAX_ALPHABET};
use crate::error::{Error, Result};
use crate::frame::{BlockSize, Plane};
use crate::intra::{predict, IntraEdges, IntraMode};
use crate::loopfilter::deblock::TxGrid;
use crate::txfm::partition::{tx_partition_options, uniform_layout, PredKind, TxOptions, TxSize};
use crate::txfm::quant::{dequantize, effective_qp, quantize, Band, PlaneKind, QuantParams};
use crate::txfm::{legal_pairs, tx_forward, tx_inverse, TxType};

/// Kernel pairs the harness searches, as (vertical, horizontal).
const TX_TYPES: [(TxType, TxType); 5] = [
    (TxType::Dct, TxType::Dct),
    (TxType::Adst, TxType::Adst),
    (TxType::Adst, TxType::Dct),
    (TxType::Dct, TxType::Adst),
    (TxType::Idtx, TxType::Idtx),
];

/// Transform kernels selectable for a `tx` block. Lossless blocks code the
/// residual itself and use the identity scan only.
pub(crate) fn tx_types(tx: TxSize, lossless: bool) -> Vec<(TxType, TxType)> {
    if lossless {
        return vec![(TxType::Idtx, TxType::Idtx)];
    }
    let legal = legal_pairs(tx.w, tx.h);
    TX_TYPES.into_iter().filter(|p| legal.contains(p)).collect()
}

/// Intra transform sizes for a plane block.
pub(crate) fn tx_sizes(size: BlockSize, chroma: bool) -> Vec<TxSize> {
    match tx_partition_options(size, PredKind::Intra, chroma) {
        TxOptions::Uniform(v) => v,
        TxOptions::Inter { initial, .. } => vec![initial],
    }
}

/// Half-open sample rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn scaled(&self, ss_x: u32, ss_y: u32) -> Rect {
        Rect { x0: self.x0 >> ss_x, y0: self.y0 >> ss_y, x1: self.x1 >> ss_x, y1: self.y1 >> ss_y }
    }
}

/// Quantizer indices of one plane.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quant {
    pub dc: u8,
    pub ac: u8,
    pub bit_depth: u32,
}

impl Quant {
    pub fn new(base_qp: u8, plane: usize, bit_depth: u32) -> Result<Self> {
        let p = QuantParams::new(base_qp);
        let kind = [PlaneKind::Y, PlaneKind::U, PlaneKind::V][plane];
        Ok(Quant { dc: effective_qp(&p, kind, Band::Dc)?, ac: effective_qp(&p, kind, Band::Ac)?, bit_depth })
    }

    pub fn lossless(&self) -> bool {
        self.dc == 0 && self.ac == 0
    }

    fn band(&self, i: usize) -> (u8, Band) {
        if i == 0 {
            (self.dc, Band::Dc)
        } else {
            (self.ac, Band::Ac)
        }
    }

    /// Levels for a residual block. Quantized levels saturate at the
    /// largest codable magnitude.
    pub fn levels(&self, residual: &[i32], tx: TxSize, kind: (TxType, TxType)) -> Result<Vec<i32>> {
        if self.lossless() {
            return Ok(residual.to_vec());
        }
        let lim = MAX_LEVEL as i32 - 1;
        let coeffs = tx_forward(residual, tx.w, tx.h, kind.0, kind.1)?;
        Ok(coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let (q, b) = self.band(i);
                quantize(c, q, b, self.bit_depth).clamp(-lim, lim)
            })
            .collect())
    }

    /// Residual implied by decoded levels.
    pub fn residual(&self, levels: &[i32], tx: TxSize, kind: (TxType, TxType)) -> Result<Vec<i32>> {
        if self.lossless() {
            return Ok(levels.to_vec());
        }
        let coeffs: Vec<i32> = levels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let (q, b) = self.band(i);
                dequantize(l, q, b, self.bit_depth)
            })
            .collect();
        tx_inverse(&coeffs, tx.w, tx.h, kind.0, kind.1)
    }
}

/// Reconstruction and context state of one plane.
#[derive(Debug, Clone)]
pub(crate) struct PlaneState {
    pub recon: Plane,
    pub ss_x: u32,
    pub ss_y: u32,
    done: Vec<bool>,
    /// Per 4x4 unit: whether its transform block had nonzero levels.
    nonzero: Vec<bool>,
    /// Per 4x4 unit: sign of its transform block's first level.
    dc_sign: Vec<i8>,
    pub grid: TxGrid,
}

impl PlaneState {
    pub fn new(width: usize, height: usize, bit_depth: u32, ss_x: u32, ss_y: u32) -> Result<Self> {
        let (w4, h4) = (width / 4, height / 4);
        Ok(PlaneState {
            recon: Plane::new(width, height, bit_depth)?.with_subsampling(ss_x, ss_y),
            ss_x,
            ss_y,
            done: vec![false; width * height],
            nonzero: vec![false; w4 * h4],
            dc_sign: vec![0; w4 * h4],
            grid: TxGrid::uniform(width, height, 4, 4)?,
        })
    }

    fn w4(&self) -> usize {
        self.recon.width / 4
    }

    /// Forgets everything reconstructed inside `r`.
    pub fn clear(&mut self, r: Rect) {
        let w = self.recon.width;
        let r = Rect { x1: r.x1.min(w), y1: r.y1.min(self.recon.height), ..r };
        for y in r.y0..r.y1 {
            self.done[y * w + r.x0..y * w + r.x1].fill(false);
        }
        let w4 = self.w4();
        for y in r.y0 / 4..r.y1 / 4 {
            self.nonzero[y * w4 + r.x0 / 4..y * w4 + r.x1 / 4].fill(false);
            self.dc_sign[y * w4 + r.x0 / 4..y * w4 + r.x1 / 4].fill(0);
        }
    }

    /// Coefficient context from the above and left transform blocks that
    /// lie inside the tile.
    fn block_ctx(&self, x: usize, y: usize, w: usize, h: usize, tile: Rect) -> BlockCtx {
        let w4 = self.w4();
        let (mut nz, mut above, mut left) = (0, 0i32, 0i32);
        if y > tile.y0 {
            let r = y / 4 - 1;
            let units = (x / 4..(x + w) / 4).map(|c| r * w4 + c);
            nz += units.clone().any(|i| self.nonzero[i]) as usize;
            above = units.map(|i| self.dc_sign[i] as i32).sum::<i32>().signum();
        }
        if x > tile.x0 {
            let c = x / 4 - 1;
            let units = (y / 4..(y + h) / 4).map(|r| r * w4 + c);
            nz += units.clone().any(|i| self.nonzero[i]) as usize;
            left = units.map(|i| self.dc_sign[i] as i32).sum::<i32>().signum();
        }
        BlockCtx { skip_ctx: nz, dc_sign_ctx: dc_sign_context(above as i8, left as i8) }
    }

    fn record(&mut self, x: usize, y: usize, tx: TxSize, levels: &[i32], pixels: &[i32]) {
        self.recon.put_block(x, y, tx.w, tx.h, pixels);
        let w = self.recon.width;
        for r in y..y + tx.h {
            self.done[r * w + x..r * w + x + tx.w].fill(true);
        }
        let w4 = self.w4();
        let nz = levels.iter().any(|&v| v != 0);
        let sign = levels[0].signum() as i8;
        for r in y / 4..(y + tx.h) / 4 {
            self.nonzero[r * w4 + x / 4..r * w4 + (x + tx.w) / 4].fill(nz);
            self.dc_sign[r * w4 + x / 4..r * w4 + (x + tx.w) / 4].fill(sign);
        }
    }
}

/// Everything chosen for one plane of one coding block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PlaneChoice {
    pub mode: usize,
    pub tx: usize,
    pub kind: usize,
}

/// Geometry of one plane block.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PlaneBlock {
    pub x: usize,
    pub y: usize,
    pub size: BlockSize,
    pub chroma: bool,
}

/// Source of the levels of each transform block: given the prediction,
/// position, size and context, produce the levels.
pub(crate) type LevelSource<'a> = dyn FnMut(&[i32], usize, usize, TxSize, (TxType, TxType), BlockCtx) -> Result<Vec<i32>> + 'a;

/// Predicts, obtains levels for, and reconstructs every transform block of
/// a plane block in raster order.
pub(crate) fn run_block(ps: &mut PlaneState, tile: Rect, b: PlaneBlock, choice: PlaneChoice, q: Quant, levels_for: &mut LevelSource) -> Result<()> {
    let modes = IntraMode::candidates(b.size);
    let sizes = tx_sizes(b.size, b.chroma);
    let bad = |what: &str| Error::Malformed(format!("{what} index out of range"));
    let mode = *modes.get(choice.mode).ok_or_else(|| bad("mode"))?;
    let tx = *sizes.get(choice.tx).ok_or_else(|| bad("transform size"))?;
    let kind = *tx_types(tx, q.lossless()).get(choice.kind).ok_or_else(|| bad("transform type"))?;
    let tx_block = BlockSize::new(tx.w, tx.h)?;
    ps.grid.set_block(b.x, b.y, b.size.w, b.size.h, tx.w, tx.h)?;
    for (dx, dy, _) in uniform_layout(b.size.w, b.size.h, tx) {
        let (x, y) = (b.x + dx, b.y + dy);
        let edges = {
            let (done, w) = (&ps.done, ps.recon.width);
            IntraEdges::gather(&ps.recon, x, y, tx.w, tx.h, |px, py| tile.contains(px, py) && done[py * w + px])
        };
        let pred = predict(&edges, mode, tx_block)?;
        let ctx = ps.block_ctx(x, y, tx.w, tx.h, tile);
        let levels = levels_for(&pred, x, y, tx, kind, ctx)?;
        let res = q.residual(&levels, tx, kind)?;
        let pixels: Vec<i32> = pred.iter().zip(&res).map(|(p, r)| p + r).collect();
        ps.record(x, y, tx, &levels, &pixels);
    }
    Ok(())
}

/// Symbol classes with their own adaptive models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Sym {
    Split,
    LumaMode,
    ChromaMode,
    TxSize,
    LumaTxType,
    ChromaTxType,
}

/// Entropy models of one tile. Created fresh at each tile start.
#[derive(Debug, Clone)]
pub(crate) struct TileModels {
    pub coeffs: [CoeffModels; 2],
    symbols: BTreeMap<(Sym, usize, usize), CdfModel>,
}

impl TileModels {
    pub fn new() -> Self {
        TileModels { coeffs: [CoeffModels::new(), CoeffModels::new()], symbols: BTreeMap::new() }
    }

    /// Model for `class` with alphabet `n` in context `ctx`.
    fn model(&mut self, class: Sym, ctx: usize, n: usize) -> &mut CdfModel {
        self.symbols.entry((class, ctx, n)).or_insert_with(|| CdfModel::uniform(n))
    }

    /// Estimated cost in bits of `s` without adapting.
    pub fn cost(&self, class: Sym, ctx: usize, n: usize, s: usize) -> f64 {
        if n <= 1 {
            return 0.0;
        }
        let (head, rest) = split_alphabet(n, s);
        let bits = match self.symbols.get(&(class, ctx, n.min(MAX_ALPHABET))) {
            Some(m) => -m.prob(head).log2(),
            None => (n.min(MAX_ALPHABET) as f64).log2(),
        };
        bits + rest.map_or(0.0, |(n2, s2)| self.cost(class, ctx, n2, s2))
    }

    /// Writes `s`; alphabets of one symbol cost nothing.
    pub fn put(&mut self, enc: &mut Encoder, class: Sym, ctx: usize, n: usize, s: usize) {
        if n <= 1 {
            return;
        }
        let (head, rest) = split_alphabet(n, s);
        enc.encode_adaptive(head, self.model(class, ctx, n.min(MAX_ALPHABET)));
        if let Some((n2, s2)) = rest {
            self.put(enc, class, ctx, n2, s2);
        }
    }

    pub fn get(&mut self, dec: &mut Decoder, class: Sym, ctx: usize, n: usize) -> Result<usize> {
        if n <= 1 {
            return Ok(0);
        }
        let head = dec.decode_adaptive(self.model(class, ctx, n.min(MAX_ALPHABET)))?;
        if n > MAX_ALPHABET && head == MAX_ALPHABET - 1 {
            Ok(head + self.get(dec, class, ctx, n - head)?)
        } else {
            Ok(head)
        }
    }
}

/// Alphabets wider than one model use its last symbol as an escape to a
/// second alphabet holding the remaining `n - (MAX_ALPHABET - 1)` symbols.
/// Returns the first symbol and, after an escape, the remaining
/// (alphabet, symbol).
fn split_alphabet(n: usize, s: usize) -> (usize, Option<(usize, usize)>) {
    let esc = MAX_ALPHABET - 1;
    if n > MAX_ALPHABET && s >= esc {
        (esc, Some((n - esc, s - esc)))
    } else {
        (s, None)
    }
}

/// Alphabet sizes of the three per-plane symbols for a plane block.
pub(crate) fn alphabets(b: PlaneBlock, choice_tx: usize, lossless: bool) -> (usize, usize, usize) {
    let sizes = tx_sizes(b.size, b.chroma);
    let kinds = sizes.get(choice_tx).map_or(0, |&t| tx_types(t, lossless).len());
    (IntraMode::candidates(b.size).len(), sizes.len(), kinds)
}

pub(crate) fn mode_class(chroma: bool) -> Sym {
    if chroma {
        Sym::ChromaMode
    } else {
        Sym::LumaMode
    }
}

pub(crate) fn type_class(chroma: bool) -> Sym {
    if chroma {
        Sym::ChromaTxType
    } else {
        Sym::LumaTxType
    }
}
