//! Stream parsing, tile reconstruction and the decoder's in-loop filtering.

use crate::entropy::levelmap::coeff_decode;
use crate::entropy::Decoder;
use crate::error::{Error, Result};
use crate::frame::{BlockSize, ChromaFormat, Frame, Plane};
use crate::grain::synthesize_grain;
use crate::loopfilter::deblock::TxGrid;
use crate::loopfilter::superres::SuperresParams;

use super::block::{alphabets, mode_class, run_block, type_class, PlaneBlock, PlaneChoice, PlaneState, Quant, Rect, Sym, TileModels};
use super::container::{obu_parse, ObuType};
use super::filters::apply_in_loop;
use super::{round_up, FrameHeader, SequenceHeader, BLOCK_SIZES};

/// What the quadtree does at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NodeKind {
    /// Entirely past the padded frame; nothing is coded.
    Outside,
    /// Split without signalling.
    ForcedSplit,
    /// A coded flag chooses between a leaf and a split.
    Choice,
    Leaf,
}

/// Frame geometry shared by the encoder and decoder.
#[derive(Debug, Clone)]
pub(crate) struct Geometry {
    pub coded_width: usize,
    pub height: usize,
    /// Luma extent padded to a whole number of minimum blocks.
    pub padded: (usize, usize),
    pub min: usize,
    pub max: usize,
    pub sb: usize,
    pub bit_depth: u32,
    pub format: ChromaFormat,
    pub subsampling: Vec<(u32, u32)>,
    pub tiles: super::TileLayout,
    pub base_qp: u8,
}

impl Geometry {
    pub fn new(seq: &SequenceHeader, fh: &FrameHeader) -> Result<Self> {
        let bad = |m: String| Err(Error::Malformed(m));
        let (min, max, sb) = (fh.min_block as usize, fh.max_block as usize, seq.sb_size as usize);
        if sb != 64 && sb != 128 {
            return bad(format!("superblock size {sb}"));
        }
        if !BLOCK_SIZES.contains(&min) || !BLOCK_SIZES.contains(&max) || min > max {
            return bad(format!("block sizes {min}..{max}"));
        }
        if ![8, 10, 12].contains(&seq.bit_depth) || seq.width == 0 || seq.height == 0 {
            return bad("sequence header".into());
        }
        let (width, coded_width, height) = (seq.width as usize, fh.coded_width as usize, seq.height as usize);
        match fh.superres {
            None if coded_width != width => return bad("coded width differs without super-resolution".into()),
            Some(p) if p != SuperresParams::new(coded_width, width)? => return bad("super-resolution widths".into()),
            _ => {}
        }
        fh.tiles.validate().map_err(|e| Error::Malformed(e.to_string()))?;
        if fh.tiles.sb_size != sb
            || *fh.tiles.col_starts.last().unwrap() != coded_width.div_ceil(sb)
            || *fh.tiles.row_starts.last().unwrap() != height.div_ceil(sb)
        {
            return bad("tile layout does not cover the frame".into());
        }
        let format = seq.format;
        let nplanes = if format == ChromaFormat::Monochrome { 1 } else { 3 };
        let (sx, sy) = format.subsampling();
        let subsampling = (0..nplanes).map(|i| if i == 0 { (0, 0) } else { (sx, sy) }).collect();
        for (n, what) in [(fh.deblock.len(), "deblocking"), (fh.restoration.len(), "restoration")] {
            if n != 0 && n != nplanes {
                return bad(format!("{n} {what} entries for {nplanes} planes"));
            }
        }
        Ok(Geometry {
            coded_width,
            height,
            padded: (round_up(coded_width, min), round_up(height, min)),
            min,
            max,
            sb,
            bit_depth: seq.bit_depth as u32,
            format,
            subsampling,
            tiles: fh.tiles.clone(),
            base_qp: fh.base_qp,
        })
    }

    pub fn planes(&self) -> usize {
        self.subsampling.len()
    }

    pub fn new_states(&self) -> Result<Vec<PlaneState>> {
        self.subsampling
            .iter()
            .map(|&(sx, sy)| PlaneState::new(self.padded.0 >> sx, self.padded.1 >> sy, self.bit_depth, sx, sy))
            .collect()
    }

    pub fn quants(&self) -> Result<Vec<Quant>> {
        (0..self.planes()).map(|i| Quant::new(self.base_qp, i, self.bit_depth)).collect()
    }

    /// Luma rectangle of tile `index` in padded coordinates.
    pub fn tile_rect(&self, index: usize) -> Rect {
        let (x0, y0, x1, y1) = self.tiles.rect(index, self.padded.0, self.padded.1);
        Rect { x0, y0, x1, y1 }
    }

    pub fn node(&self, x: usize, y: usize, s: usize) -> NodeKind {
        let (pw, ph) = self.padded;
        if x >= pw || y >= ph {
            NodeKind::Outside
        } else if s > self.max || x + s > pw || y + s > ph {
            NodeKind::ForcedSplit
        } else if s > self.min {
            NodeKind::Choice
        } else {
            NodeKind::Leaf
        }
    }

    pub fn plane_blocks(&self, x: usize, y: usize, s: usize) -> Result<Vec<PlaneBlock>> {
        self.subsampling
            .iter()
            .enumerate()
            .map(|(i, &(sx, sy))| Ok(PlaneBlock { x: x >> sx, y: y >> sy, size: BlockSize::new(s >> sx, s >> sy)?, chroma: i > 0 }))
            .collect()
    }

    /// Superblock origins of a tile in raster order.
    pub fn superblocks(&self, tile: Rect) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for y in (tile.y0..tile.y1).step_by(self.sb) {
            for x in (tile.x0..tile.x1).step_by(self.sb) {
                v.push((x, y));
            }
        }
        v
    }

    /// The coded-size picture held by `states`.
    pub fn crop(&self, states: &[PlaneState]) -> Result<Frame> {
        let mut frame = Frame::new(self.coded_width, self.height, self.bit_depth, self.format)?;
        for (dst, st) in frame.planes_mut().into_iter().zip(states) {
            let px = st.recon.block(0, 0, dst.width, dst.height);
            *dst = Plane::from_vec(dst.width, dst.height, self.bit_depth, px.iter().map(|&v| v as u16).collect())?.with_subsampling(st.ss_x, st.ss_y);
        }
        Ok(frame)
    }
}

/// Split-flag context: the block side.
pub(crate) fn split_ctx(s: usize) -> usize {
    s.trailing_zeros() as usize
}

/// Transform-kind context: log2 of the transform area.
pub(crate) fn kind_ctx(tx: crate::txfm::partition::TxSize) -> usize {
    tx.area().trailing_zeros() as usize
}

struct TileDecoder<'a, 'b> {
    geom: &'a Geometry,
    quants: &'a [Quant],
    tile: Rect,
    dec: Decoder<'b>,
    models: TileModels,
}

impl TileDecoder<'_, '_> {
    fn node(&mut self, states: &mut [PlaneState], x: usize, y: usize, s: usize) -> Result<()> {
        let split = match self.geom.node(x, y, s) {
            NodeKind::Outside => return Ok(()),
            NodeKind::ForcedSplit => true,
            NodeKind::Choice => self.models.get(&mut self.dec, Sym::Split, split_ctx(s), 2)? == 1,
            NodeKind::Leaf => false,
        };
        if split {
            let h = s / 2;
            for (dx, dy) in [(0, 0), (h, 0), (0, h), (h, h)] {
                self.node(states, x + dx, y + dy, h)?;
            }
            return Ok(());
        }
        for (i, pb) in self.geom.plane_blocks(x, y, s)?.into_iter().enumerate() {
            let q = self.quants[i];
            let (nm, nt, _) = alphabets(pb, 0, q.lossless());
            let mode = self.models.get(&mut self.dec, mode_class(pb.chroma), 0, nm)?;
            let tx = self.models.get(&mut self.dec, Sym::TxSize, 0, nt)?;
            let sizes = super::block::tx_sizes(pb.size, pb.chroma);
            let size = *sizes.get(tx).ok_or_else(|| Error::Malformed("transform size".into()))?;
            let (_, _, nk) = alphabets(pb, tx, q.lossless());
            let kind = self.models.get(&mut self.dec, type_class(pb.chroma), kind_ctx(size), nk)?;
            let (sx, sy) = self.geom.subsampling[i];
            let tile = self.tile.scaled(sx, sy);
            let (dec, models) = (&mut self.dec, &mut self.models);
            let c = pb.chroma as usize;
            run_block(&mut states[i], tile, pb, PlaneChoice { mode, tx, kind }, q, &mut |_, _, _, tx, kind, ctx| {
                coeff_decode(dec, &mut models.coeffs[c], tx.w, tx.h, kind, ctx)
            })?;
        }
        Ok(())
    }
}

/// Reconstructs one tile from its coded bytes into `states`.
pub(crate) fn decode_tile(geom: &Geometry, states: &mut [PlaneState], index: usize, data: &[u8]) -> Result<()> {
    let quants = geom.quants()?;
    let tile = geom.tile_rect(index);
    let mut td = TileDecoder { geom, quants: &quants, tile, dec: Decoder::new(data)?, models: TileModels::new() };
    for (x, y) in geom.superblocks(tile) {
        td.node(states, x, y, geom.sb)?;
    }
    Ok(())
}

pub(crate) fn tx_grids(states: &[PlaneState]) -> Vec<TxGrid> {
    states.iter().map(|s| s.grid.clone()).collect()
}

/// One frame's header and per-tile payloads, indexed by tile.
pub(crate) struct CodedFrame {
    pub header: FrameHeader,
    pub tiles: Vec<Vec<u8>>,
}

pub(crate) fn parse_stream(bytes: &[u8]) -> Result<(SequenceHeader, Vec<CodedFrame>)> {
    let records = obu_parse(bytes)?;
    let de = |what: &str, e: bincode::Error| Error::Malformed(format!("{what}: {e}"));
    let seq: SequenceHeader = bincode::deserialize(&records[0].payload).map_err(|e| de("sequence header", e))?;
    let mut frames: Vec<CodedFrame> = Vec::new();
    let mut pending: Vec<Option<Vec<u8>>> = Vec::new();
    let close = |frames: &mut Vec<CodedFrame>, pending: &mut Vec<Option<Vec<u8>>>| -> Result<()> {
        if let Some(f) = frames.last_mut() {
            if f.tiles.is_empty() {
                f.tiles = std::mem::take(pending).into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| Error::Malformed("missing tile".into()))?;
            }
        }
        Ok(())
    };
    let mut in_unit = false;
    for r in &records[1..] {
        match r.kind {
            ObuType::SequenceHeader => {
                if bincode::deserialize::<SequenceHeader>(&r.payload).map_err(|e| de("sequence header", e))? != seq {
                    return Err(Error::Unsupported("sequence header change mid-stream".into()));
                }
            }
            ObuType::TemporalDelimiter => {
                close(&mut frames, &mut pending)?;
                in_unit = true;
            }
            ObuType::FrameHeader => {
                if !in_unit {
                    return Err(Error::Malformed("frame header outside a temporal unit".into()));
                }
                in_unit = false;
                let header: FrameHeader = bincode::deserialize(&r.payload).map_err(|e| de("frame header", e))?;
                pending = vec![None; header.tiles.count()];
                frames.push(CodedFrame { header, tiles: Vec::new() });
            }
            ObuType::TileGroup => {
                let mut cur = &r.payload[..];
                let index = leb128::read::unsigned(&mut cur).map_err(|e| Error::Malformed(format!("tile index: {e}")))? as usize;
                match pending.get_mut(index) {
                    Some(slot @ None) => *slot = Some(cur.to_vec()),
                    Some(Some(_)) => return Err(Error::Malformed(format!("tile {index} repeated"))),
                    None => return Err(Error::Malformed(format!("tile {index} out of range"))),
                }
            }
            ObuType::Metadata => {}
            ObuType::Frame => return Err(Error::Unsupported("combined frame records".into())),
        }
    }
    close(&mut frames, &mut pending)?;
    Ok((seq, frames))
}

/// Pre-filter reconstruction of one frame with its tiles decoded in
/// `order`, which must list every tile once.
pub(crate) fn reconstruct(seq: &SequenceHeader, f: &CodedFrame, order: &[usize]) -> Result<(Geometry, Vec<PlaneState>)> {
    let geom = Geometry::new(seq, &f.header)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..f.tiles.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument("tile order must list every tile once".into()));
    }
    let mut states = geom.new_states()?;
    for &i in order {
        decode_tile(&geom, &mut states, i, &f.tiles[i])?;
    }
    Ok((geom, states))
}

/// A decoded picture: the filtered reconstruction, and what is shown,
/// which adds synthesized grain when the frame asks for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedFrame {
    pub reference: Frame,
    pub display: Frame,
}

fn finish(seq: &SequenceHeader, f: &CodedFrame, order: &[usize]) -> Result<DecodedFrame> {
    let (geom, states) = reconstruct(seq, f, order)?;
    let pre = geom.crop(&states)?;
    let reference = apply_in_loop(pre, &tx_grids(&states), &f.header)?;
    if (reference.width(), reference.height()) != (seq.width as usize, seq.height as usize) {
        return Err(Error::Malformed("filtered frame does not match the sequence size".into()));
    }
    let display = match &f.header.grain {
        Some(g) => synthesize_grain(&reference, g)?,
        None => reference.clone(),
    };
    Ok(DecodedFrame { reference, display })
}

pub fn decode_sequence(bytes: &[u8]) -> Result<Vec<DecodedFrame>> {
    let (seq, frames) = parse_stream(bytes)?;
    frames.iter().map(|f| finish(&seq, f, &(0..f.tiles.len()).collect::<Vec<_>>())).collect()
}

/// Displayed picture of the first frame.
pub fn decode_intra(bytes: &[u8]) -> Result<Frame> {
    decode_sequence(bytes)?.into_iter().next().map(|d| d.display).ok_or_else(|| Error::Malformed("stream holds no frame".into()))
}

/// Coded-size reconstruction of the first frame before any in-loop
/// filter, decoding tiles in `order`.
pub fn decode_tiles_prefilter(bytes: &[u8], order: &[usize]) -> Result<Frame> {
    let (seq, frames) = parse_stream(bytes)?;
    let f = frames.first().ok_or_else(|| Error::Malformed("stream holds no frame".into()))?;
    let (geom, states) = reconstruct(&seq, f, order)?;
    geom.crop(&states)
}
