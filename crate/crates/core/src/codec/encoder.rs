//! Rate-distortion driven intra encoder. It keeps the decoder's state as it
//! goes and checks its reconstruction against a decode of its own output.

use crate::entropy::levelmap::{coeff_cost, coeff_encode};
use crate::entropy::Encoder;
use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};
use crate::intra::IntraMode;
use crate::loopfilter::superres::{SuperresParams, NUMERATOR};
use crate::loopfilter::Stage;

use super::block::{alphabets, mode_class, run_block, tx_sizes, type_class, PlaneBlock, PlaneChoice, PlaneState, Quant, Rect, Sym, TileModels};
use super::container::{obu_pack, ObuRecord, ObuType};
use super::decoder::{decode_tile, kind_ctx, split_ctx, tx_grids, Geometry, NodeKind};
use super::filters::{apply_in_loop, cdef_frame, choose_cdef, choose_deblock, choose_restoration, deblock_frame, downscale_frame, superres_frame};
use super::tiles::TileLayout;
use super::{lambda, EncodeConfig, FrameHeader, SequenceHeader};

/// Per-frame outcome of an encode.
#[derive(Debug, Clone)]
pub struct FrameReport {
    pub header: FrameHeader,
    /// The decoder's filtered reconstruction of this frame.
    pub reference: Frame,
    pub tile_bytes: Vec<usize>,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone)]
pub struct EncodeReport {
    pub bytes: Vec<u8>,
    pub frames: Vec<FrameReport>,
}

/// Coding decisions of one quadtree node.
enum Node {
    Outside,
    Leaf(Vec<PlaneChoice>),
    Split(Vec<Node>),
}

fn node_rect(x: usize, y: usize, s: usize, sx: u32, sy: u32) -> Rect {
    Rect { x0: x >> sx, y0: y >> sy, x1: (x + s) >> sx, y1: (y + s) >> sy }
}

fn block_sse(recon: &Plane, src: &Plane, b: PlaneBlock) -> u64 {
    let mut e = 0u64;
    for y in b.y..b.y + b.size.h {
        for x in b.x..b.x + b.size.w {
            e += (recon.get(x, y) as i64 - src.get(x, y) as i64).pow(2) as u64;
        }
    }
    e
}

struct TileSearch<'a> {
    geom: &'a Geometry,
    src: &'a [Plane],
    quants: &'a [Quant],
    lambda: f64,
    tile: Rect,
}

impl TileSearch<'_> {
    fn clear(&self, states: &mut [PlaneState], x: usize, y: usize, s: usize) {
        for (st, &(sx, sy)) in states.iter_mut().zip(&self.geom.subsampling) {
            st.clear(node_rect(x, y, s, sx, sy));
        }
    }

    /// Reconstructs one plane block with `choice`, taking levels from the
    /// source. Returns the estimated cost in bits.
    fn trial(&self, ps: &mut PlaneState, models: &TileModels, i: usize, pb: PlaneBlock, choice: PlaneChoice) -> Result<f64> {
        let q = self.quants[i];
        let (nm, nt, nk) = alphabets(pb, choice.tx, q.lossless());
        let size = tx_sizes(pb.size, pb.chroma)[choice.tx];
        let mut bits = models.cost(mode_class(pb.chroma), 0, nm, choice.mode)
            + models.cost(Sym::TxSize, 0, nt, choice.tx)
            + models.cost(type_class(pb.chroma), kind_ctx(size), nk, choice.kind);
        let (sx, sy) = self.geom.subsampling[i];
        ps.clear(node_rect(pb.x << sx, pb.y << sy, pb.size.w << sx, sx, sy));
        let src = &self.src[i];
        let c = pb.chroma as usize;
        run_block(ps, self.tile.scaled(sx, sy), pb, choice, q, &mut |pred, x, y, tx, kind, ctx| {
            let target = src.block(x as isize, y as isize, tx.w, tx.h);
            let residual: Vec<i32> = target.iter().zip(pred).map(|(s, p)| s - p).collect();
            let levels = q.levels(&residual, tx, kind)?;
            bits += coeff_cost(&models.coeffs[c], &levels, tx.w, tx.h, kind, ctx);
            Ok(levels)
        })?;
        Ok(bits)
    }

    /// Best mode, transform size and kernel for one plane block, left
    /// reconstructed in `ps`. Modes are ranked at the largest transform
    /// with the first kernel, then sizes and kernels are searched for the
    /// winning mode.
    fn choose_plane(&self, ps: &mut PlaneState, models: &TileModels, i: usize, pb: PlaneBlock) -> Result<(f64, PlaneChoice)> {
        let q = self.quants[i];
        let eval = |ps: &mut PlaneState, choice: PlaneChoice| -> Result<f64> {
            let bits = self.trial(ps, models, i, pb, choice)?;
            Ok(block_sse(&ps.recon, &self.src[i], pb) as f64 + self.lambda * bits)
        };
        let mut best = (f64::INFINITY, PlaneChoice { mode: 0, tx: 0, kind: 0 });
        for mode in 0..IntraMode::candidates(pb.size).len() {
            let c = PlaneChoice { mode, tx: 0, kind: 0 };
            let cost = eval(ps, c)?;
            if cost < best.0 {
                best = (cost, c);
            }
        }
        let sizes = tx_sizes(pb.size, pb.chroma);
        for tx in 0..sizes.len() {
            let (_, _, nk) = alphabets(pb, tx, q.lossless());
            for kind in 0..nk {
                let c = PlaneChoice { mode: best.1.mode, tx, kind };
                if c == (PlaneChoice { mode: best.1.mode, tx: 0, kind: 0 }) {
                    continue;
                }
                let cost = eval(ps, c)?;
                if cost < best.0 {
                    best = (cost, c);
                }
            }
        }
        self.trial(ps, models, i, pb, best.1)?;
        Ok(best)
    }

    fn leaf(&self, states: &mut [PlaneState], models: &TileModels, x: usize, y: usize, s: usize) -> Result<(f64, Vec<PlaneChoice>)> {
        let mut total = 0.0;
        let mut choices = Vec::new();
        for (i, pb) in self.geom.plane_blocks(x, y, s)?.into_iter().enumerate() {
            let (cost, c) = self.choose_plane(&mut states[i], models, i, pb)?;
            total += cost;
            choices.push(c);
        }
        Ok((total, choices))
    }

    fn recommit(&self, states: &mut [PlaneState], models: &TileModels, x: usize, y: usize, s: usize, choices: &[PlaneChoice]) -> Result<()> {
        for (i, pb) in self.geom.plane_blocks(x, y, s)?.into_iter().enumerate() {
            self.trial(&mut states[i], models, i, pb, choices[i])?;
        }
        Ok(())
    }

    fn children(&self, states: &mut [PlaneState], models: &TileModels, x: usize, y: usize, s: usize) -> Result<(f64, Node)> {
        let h = s / 2;
        let mut total = 0.0;
        let mut nodes = Vec::new();
        for (dx, dy) in [(0, 0), (h, 0), (0, h), (h, h)] {
            let (c, n) = self.decide(states, models, x + dx, y + dy, h)?;
            total += c;
            nodes.push(n);
        }
        Ok((total, Node::Split(nodes)))
    }

    /// Chooses the partition below `(x, y, s)`, leaving it reconstructed.
    fn decide(&self, states: &mut [PlaneState], models: &TileModels, x: usize, y: usize, s: usize) -> Result<(f64, Node)> {
        match self.geom.node(x, y, s) {
            NodeKind::Outside => Ok((0.0, Node::Outside)),
            NodeKind::ForcedSplit => self.children(states, models, x, y, s),
            NodeKind::Leaf => self.leaf(states, models, x, y, s).map(|(c, v)| (c, Node::Leaf(v))),
            NodeKind::Choice => {
                let flag = |b: usize| self.lambda * models.cost(Sym::Split, split_ctx(s), 2, b);
                let (leaf_cost, choices) = self.leaf(states, models, x, y, s)?;
                let leaf_cost = leaf_cost + flag(0);
                self.clear(states, x, y, s);
                let (split_cost, split) = self.children(states, models, x, y, s)?;
                let split_cost = split_cost + flag(1);
                if leaf_cost <= split_cost {
                    self.clear(states, x, y, s);
                    self.recommit(states, models, x, y, s, &choices)?;
                    Ok((leaf_cost, Node::Leaf(choices)))
                } else {
                    Ok((split_cost, split))
                }
            }
        }
    }

    /// Writes the decisions of `node`, reconstructing as the decoder will.
    fn emit(&self, states: &mut [PlaneState], models: &mut TileModels, enc: &mut Encoder, node: &Node, x: usize, y: usize, s: usize) -> Result<()> {
        let kind = self.geom.node(x, y, s);
        match node {
            Node::Outside => Ok(()),
            Node::Split(children) => {
                if kind == NodeKind::Choice {
                    models.put(enc, Sym::Split, split_ctx(s), 2, 1);
                }
                let h = s / 2;
                for (n, (dx, dy)) in children.iter().zip([(0, 0), (h, 0), (0, h), (h, h)]) {
                    self.emit(states, models, enc, n, x + dx, y + dy, h)?;
                }
                Ok(())
            }
            Node::Leaf(choices) => {
                if kind == NodeKind::Choice {
                    models.put(enc, Sym::Split, split_ctx(s), 2, 0);
                }
                for (i, pb) in self.geom.plane_blocks(x, y, s)?.into_iter().enumerate() {
                    let (q, c) = (self.quants[i], choices[i]);
                    let (nm, nt, nk) = alphabets(pb, c.tx, q.lossless());
                    let size = tx_sizes(pb.size, pb.chroma)[c.tx];
                    models.put(enc, mode_class(pb.chroma), 0, nm, c.mode);
                    models.put(enc, Sym::TxSize, 0, nt, c.tx);
                    models.put(enc, type_class(pb.chroma), kind_ctx(size), nk, c.kind);
                    let (sx, sy) = self.geom.subsampling[i];
                    let src = &self.src[i];
                    let ch = pb.chroma as usize;
                    run_block(&mut states[i], self.tile.scaled(sx, sy), pb, c, q, &mut |pred, x, y, tx, kind, ctx| {
                        let target = src.block(x as isize, y as isize, tx.w, tx.h);
                        let residual: Vec<i32> = target.iter().zip(pred).map(|(s, p)| s - p).collect();
                        let levels = q.levels(&residual, tx, kind)?;
                        coeff_encode(enc, &mut models.coeffs[ch], &levels, tx.w, tx.h, kind, ctx)?;
                        Ok(levels)
                    })?;
                }
                Ok(())
            }
        }
    }
}

/// Source planes extended by edge replication to the padded extent.
fn padded_source(src: &Frame, states: &[PlaneState]) -> Result<Vec<Plane>> {
    src.planes()
        .into_iter()
        .zip(states)
        .map(|(p, st)| {
            let (w, h) = (st.recon.width, st.recon.height);
            let px = p.block(0, 0, w, h).into_iter().map(|v| v as u16).collect();
            Ok(Plane::from_vec(w, h, p.bit_depth, px)?.with_subsampling(p.ss_x, p.ss_y))
        })
        .collect()
}

fn sequence_header(frame: &Frame, cfg: &EncodeConfig) -> SequenceHeader {
    SequenceHeader {
        width: frame.width() as u32,
        height: frame.height() as u32,
        bit_depth: frame.bit_depth() as u8,
        format: frame.format,
        sb_size: cfg.sb_size as u16,
    }
}

fn encode_frame(frame: &Frame, cfg: &EncodeConfig, seq: &SequenceHeader) -> Result<(FrameHeader, Vec<Vec<u8>>, Frame)> {
    let superres = match cfg.superres_denom {
        NUMERATOR => None,
        d => Some(SuperresParams::from_denominator(frame.width(), d)?).filter(|p| !p.is_identity()),
    };
    let coded_src = match superres {
        Some(p) => downscale_frame(frame, p)?,
        None => frame.clone(),
    };
    let (min, max) = cfg.partition.bounds();
    let mut fh = FrameHeader {
        base_qp: cfg.base_qp,
        coded_width: coded_src.width() as u32,
        min_block: min as u16,
        max_block: max as u16,
        tiles: TileLayout::new(&cfg.tiles, coded_src.width(), coded_src.height(), cfg.sb_size)?,
        deblock: Vec::new(),
        cdef: None,
        superres,
        restoration: Vec::new(),
        grain: cfg.grain.clone(),
    };
    let geom = Geometry::new(seq, &fh)?;
    let mut states = geom.new_states()?;
    let src = padded_source(&coded_src, &states)?;
    let quants = geom.quants()?;
    let lambda = lambda(cfg.base_qp, geom.bit_depth);
    let mut tiles = Vec::new();
    for index in 0..fh.tiles.count() {
        let tile = geom.tile_rect(index);
        let search = TileSearch { geom: &geom, src: &src, quants: &quants, lambda, tile };
        let mut models = TileModels::new();
        let mut enc = Encoder::new();
        for (x, y) in geom.superblocks(tile) {
            let (_, node) = search.decide(&mut states, &models, x, y, geom.sb)?;
            search.clear(&mut states, x, y, geom.sb);
            search.emit(&mut states, &mut models, &mut enc, &node, x, y, geom.sb)?;
        }
        tiles.push(enc.finish());
    }

    // The decoder must land on exactly the encoder's reconstruction.
    let mut check = geom.new_states()?;
    for (i, data) in tiles.iter().enumerate() {
        decode_tile(&geom, &mut check, i, data)?;
    }
    if check.iter().zip(&states).any(|(a, b)| a.recon != b.recon) {
        return Err(Error::Malformed("decoder reconstruction diverged from the encoder".into()));
    }

    let grids = tx_grids(&states);
    let pre = geom.crop(&states)?;
    if cfg.base_qp > 0 {
        let mut f = pre.clone();
        if cfg.deblock {
            fh.deblock = choose_deblock(&f, &coded_src, &grids, cfg.base_qp);
            deblock_frame(&mut f, &grids, &fh.deblock);
        }
        if cfg.cdef {
            fh.cdef = choose_cdef(&f, &coded_src)?;
            if let Some(p) = &fh.cdef {
                f = cdef_frame(&f, p)?;
            }
        }
        if let Some(p) = superres {
            f = superres_frame(&f, p)?;
        }
        if cfg.restoration {
            fh.restoration = choose_restoration(&f, frame, cfg.base_qp)?;
        }
    }
    let reference = apply_in_loop(pre, &grids, &fh)?;
    Ok((fh, tiles, reference))
}

fn ser<T: serde::Serialize>(v: &T) -> Result<Vec<u8>> {
    bincode::serialize(v).map_err(|e| Error::InvalidArgument(format!("header serialization: {e}")))
}

/// Encodes `frames` as one stream and reports what was produced.
pub fn encode_sequence_report(frames: &[Frame], cfg: &EncodeConfig) -> Result<EncodeReport> {
    cfg.validate()?;
    let first = frames.first().ok_or_else(|| Error::InvalidArgument("no frames to encode".into()))?;
    let seq = sequence_header(first, cfg);
    let mut records = vec![ObuRecord::new(ObuType::SequenceHeader, ser(&seq)?)];
    let mut reports = Vec::new();
    for f in frames {
        if sequence_header(f, cfg) != seq {
            return Err(Error::DimensionMismatch("frames differ in geometry".into()));
        }
        let (fh, tiles, reference) = encode_frame(f, cfg, &seq)?;
        records.push(ObuRecord::new(ObuType::TemporalDelimiter, Vec::new()));
        records.push(ObuRecord::new(ObuType::FrameHeader, ser(&fh)?));
        for (i, t) in tiles.iter().enumerate() {
            let mut payload = Vec::new();
            leb128::write::unsigned(&mut payload, i as u64)?;
            payload.extend_from_slice(t);
            records.push(ObuRecord::new(ObuType::TileGroup, payload));
        }
        reports.push(FrameReport { stages: fh.stages(), tile_bytes: tiles.iter().map(Vec::len).collect(), header: fh, reference });
    }
    Ok(EncodeReport { bytes: obu_pack(&records)?, frames: reports })
}

pub fn encode_intra_report(frame: &Frame, cfg: &EncodeConfig) -> Result<EncodeReport> {
    encode_sequence_report(std::slice::from_ref(frame), cfg)
}

pub fn encode_sequence(frames: &[Frame], cfg: &EncodeConfig) -> Result<Vec<u8>> {
    encode_sequence_report(frames, cfg).map(|r| r.bytes)
}

pub fn encode_intra(frame: &Frame, cfg: &EncodeConfig) -> Result<Vec<u8>> {
    encode_intra_report(frame, cfg).map(|r| r.bytes)
}
