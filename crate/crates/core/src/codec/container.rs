//! Length-prefixed record framing for coded streams.
//!
//! A stream is `MAGIC` followed by records. Each record is one header byte
//! `(type << 3) | HAS_SIZE`, a LEB128 payload size and the payload. The
//! layout follows the general shape of the format's open bitstream units
//! but is not conformant; the magic prefix keeps the two apart.

use crate::error::{Error, Result};

/// Stream signature.
pub const MAGIC: [u8; 8] = *b"AV1LAB\x00\x01";

/// Header bit announcing an explicit payload size. Always set here.
const HAS_SIZE: u8 = 0b010;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObuType {
    SequenceHeader,
    TemporalDelimiter,
    FrameHeader,
    TileGroup,
    Metadata,
    Frame,
}

impl ObuType {
    pub const ALL: [ObuType; 6] = [
        ObuType::SequenceHeader,
        ObuType::TemporalDelimiter,
        ObuType::FrameHeader,
        ObuType::TileGroup,
        ObuType::Metadata,
        ObuType::Frame,
    ];

    pub fn code(self) -> u8 {
        match self {
            ObuType::SequenceHeader => 1,
            ObuType::TemporalDelimiter => 2,
            ObuType::FrameHeader => 3,
            ObuType::TileGroup => 4,
            ObuType::Metadata => 5,
            ObuType::Frame => 6,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.code() == c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObuRecord {
    pub kind: ObuType,
    pub payload: Vec<u8>,
}

impl ObuRecord {
    pub fn new(kind: ObuType, payload: Vec<u8>) -> Self {
        ObuRecord { kind, payload }
    }
}

/// Serializes `records`, which must begin with a sequence header.
pub fn obu_pack(records: &[ObuRecord]) -> Result<Vec<u8>> {
    match records.first() {
        Some(r) if r.kind == ObuType::SequenceHeader => {}
        _ => return Err(Error::InvalidArgument("stream must begin with a sequence header".into())),
    }
    let mut out = MAGIC.to_vec();
    for r in records {
        out.push((r.kind.code() << 3) | HAS_SIZE);
        leb128::write::unsigned(&mut out, r.payload.len() as u64)?;
        out.extend_from_slice(&r.payload);
    }
    Ok(out)
}

/// Inverse of [`obu_pack`].
pub fn obu_parse(bytes: &[u8]) -> Result<Vec<ObuRecord>> {
    let mut rest = bytes.strip_prefix(&MAGIC[..]).ok_or_else(|| Error::Malformed("missing stream signature".into()))?;
    let mut records = Vec::new();
    while let Some((&header, tail)) = rest.split_first() {
        if header & 0x80 != 0 || header & 0b111 != HAS_SIZE {
            return Err(Error::Malformed(format!("record header {header:#04x}")));
        }
        let kind = ObuType::from_code((header >> 3) & 0x0f).ok_or_else(|| Error::Malformed(format!("record type {}", (header >> 3) & 0x0f)))?;
        let mut cursor = tail;
        let size = leb128::read::unsigned(&mut cursor).map_err(|e| Error::Malformed(format!("record size: {e}")))?;
        if size > cursor.len() as u64 {
            return Err(Error::Malformed(format!("record size {size} exceeds the {} bytes left", cursor.len())));
        }
        let (payload, next) = cursor.split_at(size as usize);
        records.push(ObuRecord::new(kind, payload.to_vec()));
        rest = next;
    }
    if records.first().map(|r| r.kind) != Some(ObuType::SequenceHeader) {
        return Err(Error::Malformed("stream must begin with a sequence header".into()));
    }
    Ok(records)
}
