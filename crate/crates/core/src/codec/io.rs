//! Raw planar and Y4M frame input and output. Samples deeper than 8 bits
//! are stored as little-endian 16-bit words.

use std::cell::Cell;
use std::io::{Read, Write};
use std::rc::Rc;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{ChromaFormat, Frame, Plane};

fn chroma_dims(width: usize, height: usize, format: ChromaFormat) -> (usize, usize) {
    let (sx, sy) = format.subsampling();
    ((width + (1 << sx) - 1) >> sx, (height + (1 << sy) - 1) >> sy)
}

/// Bytes of one frame in planar layout.
pub fn frame_bytes(width: usize, height: usize, format: ChromaFormat, bit_depth: u32) -> usize {
    let bps = if bit_depth > 8 { 2 } else { 1 };
    let (cw, ch) = chroma_dims(width, height, format);
    let chroma = if format == ChromaFormat::Monochrome { 0 } else { 2 * cw * ch };
    (width * height + chroma) * bps
}

fn read_plane(bytes: &[u8], width: usize, height: usize, bit_depth: u32) -> Result<Plane> {
    let data = if bit_depth > 8 {
        bytes.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect()
    } else {
        bytes.iter().map(|&b| b as u16).collect()
    };
    Plane::from_vec(width, height, bit_depth, data)
}

fn plane_bytes(p: &Plane, out: &mut Vec<u8>) {
    if p.bit_depth > 8 {
        out.extend(p.data().iter().flat_map(|v| v.to_le_bytes()));
    } else {
        out.extend(p.data().iter().map(|&v| v as u8));
    }
}

fn frame_from_bytes(bytes: &[u8], width: usize, height: usize, format: ChromaFormat, bit_depth: u32) -> Result<Frame> {
    let bps = if bit_depth > 8 { 2 } else { 1 };
    let (cw, ch) = chroma_dims(width, height, format);
    let luma = width * height * bps;
    let y = read_plane(&bytes[..luma], width, height, bit_depth)?;
    if format == ChromaFormat::Monochrome {
        return Frame::from_planes(y, None, None, format);
    }
    let c = cw * ch * bps;
    let u = read_plane(&bytes[luma..luma + c], cw, ch, bit_depth)?;
    let v = read_plane(&bytes[luma + c..luma + 2 * c], cw, ch, bit_depth)?;
    Frame::from_planes(y, Some(u), Some(v), format)
}

/// Concatenated planar frames with the given geometry.
pub fn parse_raw(bytes: &[u8], width: usize, height: usize, format: ChromaFormat, bit_depth: u32) -> Result<Vec<Frame>> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument("raw dimensions must be positive".into()));
    }
    let n = frame_bytes(width, height, format, bit_depth);
    if bytes.is_empty() || bytes.len() % n != 0 {
        return Err(Error::Malformed(format!("{} bytes is not a whole number of {n}-byte frames", bytes.len())));
    }
    bytes.chunks_exact(n).map(|c| frame_from_bytes(c, width, height, format, bit_depth)).collect()
}

pub fn load_raw(path: impl AsRef<Path>, width: usize, height: usize, format: ChromaFormat, bit_depth: u32) -> Result<Vec<Frame>> {
    parse_raw(&std::fs::read(path)?, width, height, format, bit_depth)
}

pub fn raw_bytes(frames: &[Frame]) -> Vec<u8> {
    let mut out = Vec::new();
    for f in frames {
        for p in f.planes() {
            plane_bytes(p, &mut out);
        }
    }
    out
}

pub fn write_raw(path: impl AsRef<Path>, frames: &[Frame]) -> Result<()> {
    Ok(std::fs::write(path, raw_bytes(frames))?)
}

fn from_colorspace(c: y4m::Colorspace) -> Result<(ChromaFormat, u32)> {
    use y4m::Colorspace as C;
    Ok(match c {
        C::Cmono => (ChromaFormat::Monochrome, 8),
        C::Cmono12 => (ChromaFormat::Monochrome, 12),
        C::C420 | C::C420jpeg | C::C420paldv | C::C420mpeg2 => (ChromaFormat::Yuv420, 8),
        C::C420p10 => (ChromaFormat::Yuv420, 10),
        C::C420p12 => (ChromaFormat::Yuv420, 12),
        C::C422 => (ChromaFormat::Yuv422, 8),
        C::C422p10 => (ChromaFormat::Yuv422, 10),
        C::C422p12 => (ChromaFormat::Yuv422, 12),
        C::C444 => (ChromaFormat::Yuv444, 8),
        C::C444p10 => (ChromaFormat::Yuv444, 10),
        C::C444p12 => (ChromaFormat::Yuv444, 12),
        other => return Err(Error::Unsupported(format!("colorspace {other:?}"))),
    })
}

fn to_colorspace(format: ChromaFormat, bit_depth: u32) -> Result<y4m::Colorspace> {
    use y4m::Colorspace as C;
    Ok(match (format, bit_depth) {
        (ChromaFormat::Monochrome, 8) => C::Cmono,
        (ChromaFormat::Monochrome, 12) => C::Cmono12,
        (ChromaFormat::Yuv420, 8) => C::C420jpeg,
        (ChromaFormat::Yuv420, 10) => C::C420p10,
        (ChromaFormat::Yuv420, 12) => C::C420p12,
        (ChromaFormat::Yuv422, 8) => C::C422,
        (ChromaFormat::Yuv422, 10) => C::C422p10,
        (ChromaFormat::Yuv422, 12) => C::C422p12,
        (ChromaFormat::Yuv444, 8) => C::C444,
        (ChromaFormat::Yuv444, 10) => C::C444p10,
        (ChromaFormat::Yuv444, 12) => C::C444p12,
        (f, d) => return Err(Error::Unsupported(format!("{d}-bit {f:?} in y4m"))),
    })
}

fn y4m_error(e: y4m::Error) -> Error {
    match e {
        y4m::Error::IoError(io) => Error::Io(io.to_string()),
        other => Error::Malformed(format!("y4m: {other}")),
    }
}

/// Reader that reports how many bytes it has handed out.
struct Counted<'a> {
    inner: &'a [u8],
    consumed: Rc<Cell<usize>>,
}

impl Read for Counted<'_> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.consumed.set(self.consumed.get() + n);
        Ok(n)
    }
}

/// Frames of an in-memory Y4M stream. A stream that ends inside a frame
/// is an error.
pub fn parse_y4m(bytes: &[u8]) -> Result<Vec<Frame>> {
    let consumed = Rc::new(Cell::new(0));
    let mut dec = y4m::decode(Counted { inner: bytes, consumed: consumed.clone() }).map_err(y4m_error)?;
    let (w, h) = (dec.get_width(), dec.get_height());
    let (format, depth) = from_colorspace(dec.get_colorspace())?;
    let mut frames = Vec::new();
    loop {
        let start = consumed.get();
        match dec.read_frame() {
            Ok(f) => {
                let mut buf = f.get_y_plane().to_vec();
                if format != ChromaFormat::Monochrome {
                    buf.extend_from_slice(f.get_u_plane());
                    buf.extend_from_slice(f.get_v_plane());
                }
                frames.push(frame_from_bytes(&buf, w, h, format, depth)?);
            }
            // A clean end is one that arrives between frames.
            Err(y4m::Error::EOF) if start == bytes.len() => break,
            Err(y4m::Error::EOF) => return Err(Error::Malformed("y4m stream ends inside a frame".into())),
            Err(e) => return Err(y4m_error(e)),
        }
    }
    Ok(frames)
}

pub fn load_y4m(path: impl AsRef<Path>) -> Result<Vec<Frame>> {
    parse_y4m(&std::fs::read(path)?)
}

/// Y4M bytes for `frames`, which must share geometry.
pub fn y4m_bytes(frames: &[Frame]) -> Result<Vec<u8>> {
    let first = frames.first().ok_or_else(|| Error::InvalidArgument("no frames to write".into()))?;
    let cs = to_colorspace(first.format, first.bit_depth())?;
    let mut out = Vec::new();
    {
        let mut enc = y4m::encode(first.width(), first.height(), y4m::Ratio::new(30, 1))
            .with_colorspace(cs)
            .write_header(&mut out)
            .map_err(y4m_error)?;
        for f in frames {
            if (f.width(), f.height(), f.format, f.bit_depth()) != (first.width(), first.height(), first.format, first.bit_depth()) {
                return Err(Error::DimensionMismatch("frames differ in geometry".into()));
            }
            let mut planes: Vec<Vec<u8>> = Vec::new();
            for p in f.planes() {
                let mut b = Vec::new();
                plane_bytes(p, &mut b);
                planes.push(b);
            }
            planes.resize(3, Vec::new());
            enc.write_frame(&y4m::Frame::new([&planes[0], &planes[1], &planes[2]], None)).map_err(y4m_error)?;
        }
    }
    Ok(out)
}

pub fn write_y4m(path: impl AsRef<Path>, frames: &[Frame]) -> Result<()> {
    let bytes = y4m_bytes(frames)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}
