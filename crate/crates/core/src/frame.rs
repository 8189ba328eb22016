//! Planar pixel storage, block geometry and the recursive partition tree.

use crate::error::{invalid, Error, Result};

/// One colour plane. Samples are stored one per `u16` regardless of depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u32,
    pub ss_x: u32,
    pub ss_y: u32,
    data: Vec<u16>,
}

impl Plane {
    pub fn new(width: usize, height: usize, bit_depth: u32) -> Result<Self> {
        Self::filled(width, height, bit_depth, 0)
    }

    pub fn filled(width: usize, height: usize, bit_depth: u32, value: u16) -> Result<Self> {
        if width == 0 || height == 0 {
            return invalid("plane dimensions must be positive");
        }
        if ![8, 10, 12].contains(&bit_depth) {
            return invalid(format!("bit depth {bit_depth}"));
        }
        if value as u32 >= 1 << bit_depth {
            return invalid(format!("fill value {value} exceeds {bit_depth}-bit range"));
        }
        Ok(Plane { width, height, bit_depth, ss_x: 0, ss_y: 0, data: vec![value; width * height] })
    }

    /// Builds a plane from row-major samples, checking the depth bound.
    pub fn from_vec(width: usize, height: usize, bit_depth: u32, data: Vec<u16>) -> Result<Self> {
        let mut p = Self::new(width, height, bit_depth)?;
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!("{} samples for {width}x{height}", data.len())));
        }
        if let Some(bad) = data.iter().find(|&&v| v as u32 > p.max_value()) {
            return invalid(format!("sample {bad} exceeds {bit_depth}-bit range"));
        }
        p.data = data;
        Ok(p)
    }

    pub fn with_subsampling(mut self, ss_x: u32, ss_y: u32) -> Self {
        self.ss_x = ss_x;
        self.ss_y = ss_y;
        self
    }

    pub fn max_value(&self) -> u32 {
        (1 << self.bit_depth) - 1
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    /// Sample with coordinates clamped into the plane (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u16 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Stores `v` clipped to the depth range.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: i32) {
        let m = self.max_value() as i32;
        self.data[y * self.width + x] = v.clamp(0, m) as u16;
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u16] {
        &mut self.data
    }

    pub fn row(&self, y: usize) -> &[u16] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Copies out a `w`×`h` region as `i32`, replicating edges.
    pub fn block(&self, x: isize, y: isize, w: usize, h: usize) -> Vec<i32> {
        let mut out = Vec::with_capacity(w * h);
        for r in 0..h as isize {
            for c in 0..w as isize {
                out.push(self.get_clamped(x + c, y + r) as i32);
            }
        }
        out
    }

    /// Writes a block, clipping to the plane and to the sample range.
    pub fn put_block(&mut self, x: usize, y: usize, w: usize, h: usize, src: &[i32]) {
        for r in 0..h {
            for c in 0..w {
                if x + c < self.width && y + r < self.height {
                    self.set(x + c, y + r, src[r * w + c]);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ChromaFormat {
    Monochrome,
    Yuv420,
    Yuv422,
    Yuv444,
}

impl ChromaFormat {
    /// Horizontal and vertical subsampling shifts.
    pub fn subsampling(self) -> (u32, u32) {
        match self {
            ChromaFormat::Monochrome | ChromaFormat::Yuv444 => (0, 0),
            ChromaFormat::Yuv420 => (1, 1),
            ChromaFormat::Yuv422 => (1, 0),
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        [ChromaFormat::Monochrome, ChromaFormat::Yuv420, ChromaFormat::Yuv422, ChromaFormat::Yuv444]
            .get(c as usize)
            .copied()
    }
}

/// A picture: luma plus optional chroma planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub y: Plane,
    pub u: Option<Plane>,
    pub v: Option<Plane>,
    pub format: ChromaFormat,
}

impl Frame {
    /// Zero-filled frame with chroma sized from the format.
    pub fn new(width: usize, height: usize, bit_depth: u32, format: ChromaFormat) -> Result<Self> {
        let y = Plane::new(width, height, bit_depth)?;
        let (sx, sy) = format.subsampling();
        let chroma = || -> Result<Option<Plane>> {
            if format == ChromaFormat::Monochrome {
                return Ok(None);
            }
            let cw = (width + (1 << sx) - 1) >> sx;
            let ch = (height + (1 << sy) - 1) >> sy;
            Ok(Some(Plane::new(cw, ch, bit_depth)?.with_subsampling(sx, sy)))
        };
        Ok(Frame { y, u: chroma()?, v: chroma()?, format })
    }

    /// Assembles a frame, checking chroma dimensions against the format.
    pub fn from_planes(y: Plane, u: Option<Plane>, v: Option<Plane>, format: ChromaFormat) -> Result<Self> {
        let mut f = Frame::new(y.width, y.height, y.bit_depth, format)?;
        for (dst, src) in [(&mut f.u, u), (&mut f.v, v)] {
            match (dst.as_mut(), src) {
                (None, None) => {}
                (Some(d), Some(s)) => {
                    if (s.width, s.height, s.bit_depth) != (d.width, d.height, d.bit_depth) {
                        return Err(Error::DimensionMismatch("chroma plane does not match format".into()));
                    }
                    let (sx, sy) = (d.ss_x, d.ss_y);
                    *d = s.with_subsampling(sx, sy);
                }
                _ => return Err(Error::DimensionMismatch("chroma presence does not match format".into())),
            }
        }
        f.y = y;
        Ok(f)
    }

    pub fn width(&self) -> usize {
        self.y.width
    }

    pub fn height(&self) -> usize {
        self.y.height
    }

    pub fn bit_depth(&self) -> u32 {
        self.y.bit_depth
    }

    pub fn planes(&self) -> Vec<&Plane> {
        std::iter::once(&self.y).chain(self.u.iter()).chain(self.v.iter()).collect()
    }

    pub fn planes_mut(&mut self) -> Vec<&mut Plane> {
        std::iter::once(&mut self.y).chain(self.u.iter_mut()).chain(self.v.iter_mut()).collect()
    }

    pub fn plane(&self, i: usize) -> Option<&Plane> {
        match i {
            0 => Some(&self.y),
            1 => self.u.as_ref(),
            2 => self.v.as_ref(),
            _ => None,
        }
    }

    pub fn plane_mut(&mut self, i: usize) -> Option<&mut Plane> {
        match i {
            0 => Some(&mut self.y),
            1 => self.u.as_mut(),
            2 => self.v.as_mut(),
            _ => None,
        }
    }
}

/// Coding block dimensions in luma samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockSize {
    pub w: usize,
    pub h: usize,
}

impl BlockSize {
    pub fn new(w: usize, h: usize) -> Result<Self> {
        if Self::is_valid(w, h) {
            Ok(BlockSize { w, h })
        } else {
            invalid(format!("block size {w}x{h}"))
        }
    }

    /// Power-of-two sides in 4..=128 with aspect ratio at most 4:1.
    pub fn is_valid(w: usize, h: usize) -> bool {
        let side = |v: usize| v.is_power_of_two() && (4..=128).contains(&v);
        side(w) && side(h) && w.max(h) / w.min(h) <= 4
    }

    pub fn area(self) -> usize {
        self.w * self.h
    }
}

/// The ten ways a square block can be divided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionKind {
    None,
    Horz,
    Vert,
    Split,
    /// Top half split into two squares, bottom half whole.
    HorzA,
    /// Top half whole, bottom half split into two squares.
    HorzB,
    /// Left half split into two squares, right half whole.
    VertA,
    /// Left half whole, right half split into two squares.
    VertB,
    /// Four horizontal strips.
    Horz4,
    /// Four vertical strips.
    Vert4,
}

impl PartitionKind {
    pub const ALL: [PartitionKind; 10] = [
        PartitionKind::None,
        PartitionKind::Horz,
        PartitionKind::Vert,
        PartitionKind::Split,
        PartitionKind::HorzA,
        PartitionKind::HorzB,
        PartitionKind::VertA,
        PartitionKind::VertB,
        PartitionKind::Horz4,
        PartitionKind::Vert4,
    ];

    /// Sub-rectangles `(x, y, w, h)` of an `s`×`s` block. For `Split` these
    /// are the four quadrants that recurse.
    pub fn regions(self, s: usize) -> Vec<(usize, usize, usize, usize)> {
        let h = s / 2;
        let q = s / 4;
        match self {
            PartitionKind::None => vec![(0, 0, s, s)],
            PartitionKind::Horz => vec![(0, 0, s, h), (0, h, s, h)],
            PartitionKind::Vert => vec![(0, 0, h, s), (h, 0, h, s)],
            PartitionKind::Split => vec![(0, 0, h, h), (h, 0, h, h), (0, h, h, h), (h, h, h, h)],
            PartitionKind::HorzA => vec![(0, 0, h, h), (h, 0, h, h), (0, h, s, h)],
            PartitionKind::HorzB => vec![(0, 0, s, h), (0, h, h, h), (h, h, h, h)],
            PartitionKind::VertA => vec![(0, 0, h, h), (0, h, h, h), (h, 0, h, s)],
            PartitionKind::VertB => vec![(0, 0, h, s), (h, 0, h, h), (h, h, h, h)],
            PartitionKind::Horz4 => (0..4).map(|i| (0, i * q, s, q)).collect(),
            PartitionKind::Vert4 => (0..4).map(|i| (i * q, 0, q, s)).collect(),
        }
    }
}

/// Recursive partition of a square block. Only `Split` nodes have children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTree {
    pub kind: PartitionKind,
    pub children: Vec<PartitionTree>,
}

impl PartitionTree {
    pub fn leaf(kind: PartitionKind) -> Self {
        PartitionTree { kind, children: Vec::new() }
    }

    pub fn split(children: [PartitionTree; 4]) -> Self {
        PartitionTree { kind: PartitionKind::Split, children: children.into() }
    }

    /// Uniform quad-tree of `levels` split levels.
    pub fn uniform_split(levels: usize) -> Self {
        if levels == 0 {
            Self::leaf(PartitionKind::None)
        } else {
            let c = Self::uniform_split(levels - 1);
            Self::split([c.clone(), c.clone(), c.clone(), c])
        }
    }

    /// Leaf blocks `(x, y, size)` of a valid tree rooted at an `s`×`s` block.
    pub fn leaves(&self, s: usize) -> Result<Vec<(usize, usize, BlockSize)>> {
        let mut out = Vec::new();
        self.collect(0, 0, s, &mut out)?;
        Ok(out)
    }

    fn collect(&self, x: usize, y: usize, s: usize, out: &mut Vec<(usize, usize, BlockSize)>) -> Result<()> {
        let regions = self.kind.regions(s);
        if self.kind == PartitionKind::Split {
            if self.children.len() != 4 {
                return invalid("split node needs four children");
            }
            if s / 2 < 4 {
                return invalid("split below the minimum block size");
            }
            for (c, &(rx, ry, rs, _)) in self.children.iter().zip(&regions) {
                c.collect(x + rx, y + ry, rs, out)?;
            }
            return Ok(());
        }
        if !self.children.is_empty() {
            return invalid("only split nodes recurse");
        }
        for (rx, ry, rw, rh) in regions {
            out.push((x + rx, y + ry, BlockSize::new(rw, rh)?));
        }
        Ok(())
    }
}

/// Whether `tree` is a legal partition of a superblock of `sb_size`.
pub fn validate_partition_tree(tree: &PartitionTree, sb_size: usize) -> bool {
    matches!(sb_size, 64 | 128) && tree.leaves(sb_size).is_ok()
}

/// 1/8-sample motion vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct MotionVector {
    pub row: i32,
    pub col: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { row: 0, col: 0 };

    pub fn new(row: i32, col: i32) -> Self {
        MotionVector { row, col }
    }

    /// Components strictly inside the 16-bit 1/8-sample range.
    pub fn is_valid(self) -> bool {
        self.row.abs() < 1 << 15 && self.col.abs() < 1 << 15
    }
}

/// Coding mode of one 4×4 luma block inside an 8×8 area.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LumaMode<M> {
    Inter(MotionVector),
    Intra(M),
}

/// Chroma coding for an 8×8 luma area made of 4×4 blocks (4:2:0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChromaPlan<M> {
    /// Four 2×2 chroma units, each predicted with its luma block's motion.
    Inter2x2([MotionVector; 4]),
    /// One 4×4 chroma unit using the bottom-right luma block's mode.
    Intra4x4(M),
}

/// Chroma plan for four raster-ordered 4×4 luma blocks (TL, TR, BL, BR).
pub fn chroma_coding_units_4x4<M: Copy>(luma: &[LumaMode<M>], format: ChromaFormat) -> Result<ChromaPlan<M>> {
    if format != ChromaFormat::Yuv420 {
        return invalid("4x4 chroma constraint applies to 4:2:0 only");
    }
    let luma: &[LumaMode<M>; 4] = luma.try_into().map_err(|_| Error::InvalidArgument("need four luma blocks covering 8x8".into()))?;
    let mvs: Vec<MotionVector> = luma
        .iter()
        .filter_map(|m| match m {
            LumaMode::Inter(mv) => Some(*mv),
            LumaMode::Intra(_) => None,
        })
        .collect();
    if mvs.len() == 4 {
        return Ok(ChromaPlan::Inter2x2([mvs[0], mvs[1], mvs[2], mvs[3]]));
    }
    match luma[3] {
        LumaMode::Intra(m) => Ok(ChromaPlan::Intra4x4(m)),
        // The bottom-right block is inter while another is intra; its
        // motion cannot drive an intra chroma unit.
        LumaMode::Inter(_) => {
            let m = luma.iter().rev().find_map(|m| match m {
                LumaMode::Intra(m) => Some(*m),
                LumaMode::Inter(_) => None,
            });
            Ok(ChromaPlan::Intra4x4(m.expect("some block is intra")))
        }
    }
}
