//! Intra-only round-trip codec wiring the coding tools together, with its
//! container, frame I/O and quality metrics.
//!
//! A stream holds one sequence header followed, per frame, by a temporal
//! delimiter, a frame header and one tile group record per tile. Tiles are
//! coded independently; the in-loop filters run on the whole frame once
//! every tile is reconstructed.

mod block;
pub mod container;
mod decoder;
mod encoder;
mod filters;
pub mod io;
pub mod metrics;
pub mod tiles;

use crate::error::{invalid, Result};
use crate::frame::ChromaFormat;
use crate::grain::GrainParams;
use crate::loopfilter::cdef::CdefParams;
use crate::loopfilter::deblock::DeblockParams;
use crate::loopfilter::restoration::RestorationPlan;
use crate::loopfilter::superres::{SuperresParams, DENOMINATORS, NUMERATOR};
use crate::loopfilter::Stage;

pub use decoder::{decode_intra, decode_sequence, decode_tiles_prefilter, DecodedFrame};
pub use encoder::{encode_intra, encode_intra_report, encode_sequence, encode_sequence_report, EncodeReport, FrameReport};
pub use tiles::{TileLayout, TileSpec};

/// Coding block sizes the harness can use.
pub const BLOCK_SIZES: [usize; 4] = [8, 16, 32, 64];

/// How frames are divided into coding blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Partition {
    /// Every block has this size.
    Fixed(usize),
    /// Quadtree between these sizes, chosen by rate-distortion cost.
    Search { min: usize, max: usize },
}

impl Partition {
    pub fn bounds(self) -> (usize, usize) {
        match self {
            Partition::Fixed(s) => (s, s),
            Partition::Search { min, max } => (min, max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EncodeConfig {
    /// 0 selects lossless coding.
    pub base_qp: u8,
    pub sb_size: usize,
    pub tiles: TileSpec,
    pub partition: Partition,
    pub deblock: bool,
    pub cdef: bool,
    pub restoration: bool,
    /// Horizontal scaling denominator over 8; 8 codes at full width.
    pub superres_denom: usize,
    pub grain: Option<GrainParams>,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        EncodeConfig {
            base_qp: 100,
            sb_size: 64,
            tiles: TileSpec::default(),
            partition: Partition::Fixed(16),
            deblock: true,
            cdef: true,
            restoration: true,
            superres_denom: NUMERATOR,
            grain: None,
        }
    }
}

impl EncodeConfig {
    pub fn with_qp(base_qp: u8) -> Self {
        EncodeConfig { base_qp, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sb_size != 64 && self.sb_size != 128 {
            return invalid(format!("superblock size {}", self.sb_size));
        }
        let (min, max) = self.partition.bounds();
        if !BLOCK_SIZES.contains(&min) || !BLOCK_SIZES.contains(&max) || min > max {
            return invalid(format!("partition sizes {min}..{max}"));
        }
        if self.superres_denom != NUMERATOR && !DENOMINATORS.contains(&self.superres_denom) {
            return invalid(format!("super-resolution denominator {}", self.superres_denom));
        }
        if let Some(g) = &self.grain {
            g.validate()?;
        }
        Ok(())
    }
}

/// Stream-wide parameters.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SequenceHeader {
    pub width: u32,
    pub height: u32,
    pub bit_depth: u8,
    pub format: ChromaFormat,
    pub sb_size: u16,
}

/// Per-frame parameters, including every in-loop filter decision.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrameHeader {
    pub base_qp: u8,
    /// Luma width of the coded picture; narrower than the output when
    /// super-resolution is on.
    pub coded_width: u32,
    pub min_block: u16,
    pub max_block: u16,
    pub tiles: TileLayout,
    /// Thresholds per plane, used for both edge directions.
    pub deblock: Vec<DeblockParams>,
    pub cdef: Option<CdefParams>,
    pub superres: Option<SuperresParams>,
    /// Restoration plan per plane; `None` leaves the plane alone.
    pub restoration: Vec<Option<RestorationPlan>>,
    pub grain: Option<GrainParams>,
}

impl FrameHeader {
    /// In-loop stages this frame runs, in execution order.
    pub fn stages(&self) -> Vec<Stage> {
        let mut v = Vec::new();
        if self.deblock.iter().any(|p| !p.is_off()) {
            v.push(Stage::Deblock);
        }
        if self.cdef.is_some() {
            v.push(Stage::Cdef);
        }
        if self.superres.is_some() {
            v.push(Stage::Superres);
        }
        if self.restoration.iter().any(Option::is_some) {
            v.push(Stage::Restoration);
        }
        v
    }
}

/// Multiplier of squared error per bit in mode decisions:
/// `lambda = ln2 / 6 * step^2`, the slope of the high-rate
/// distortion-rate curve of a uniform quantizer with step `step` in sample
/// units.
pub fn lambda(base_qp: u8, bit_depth: u32) -> f64 {
    use crate::txfm::quant::{step_size, Band};
    use crate::txfm::COEFF_SCALE;
    let step = step_size(base_qp, Band::Ac, bit_depth) as f64 / COEFF_SCALE as f64;
    std::f64::consts::LN_2 / 6.0 * step.max(1.0).powi(2)
}

fn round_up(v: usize, m: usize) -> usize {
    v.div_ceil(m) * m
}
