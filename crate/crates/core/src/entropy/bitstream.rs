//! Container layout. All multi-byte fields are little-endian.
//!
//! ```text
//! "PCAC" | version u8 | flags u8 | point_count u32 | slice_count u16
//! per slice: depth u8 | Q f32 | delta f32 | tau f32 | map_len u32 | map
//! header CRC32 u32
//! per slice: segment_len u32 | arithmetic-coded payload | payload CRC32 u32
//! ```
//!
//! `segment_len` counts the payload and its trailing CRC.

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"PCAC";
pub const VERSION: u8 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitstreamError {
    #[error("not a pcac bitstream (bad magic)")]
    BadMagic,
    #[error("unsupported bitstream version {0}")]
    UnsupportedVersion(u8),
    #[error("header checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    HeaderCrc { stored: u32, computed: u32 },
    #[error("slice {slice} checksum mismatch")]
    SegmentCrc { slice: usize },
    #[error("bitstream truncated while reading {0}")]
    Truncated(&'static str),
    #[error("corrupt bitstream: {0}")]
    Corrupt(String),
}

/// Coding tools enabled for the frame; selects which record fields exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToolFlags {
    pub slices: bool,
    pub intra: bool,
    pub adaptive_transform: bool,
    pub scan_select: bool,
}

impl Default for ToolFlags {
    fn default() -> Self {
        ToolFlags { slices: true, intra: true, adaptive_transform: true, scan_select: true }
    }
}

impl ToolFlags {
    pub const NONE: ToolFlags =
        ToolFlags { slices: false, intra: false, adaptive_transform: false, scan_select: false };

    pub fn to_byte(self) -> u8 {
        self.slices as u8
            | (self.intra as u8) << 1
            | (self.adaptive_transform as u8) << 2
            | (self.scan_select as u8) << 3
    }

    pub fn from_byte(b: u8) -> Result<ToolFlags, BitstreamError> {
        if b & !0x0F != 0 {
            return Err(BitstreamError::Corrupt(format!("unknown flag bits {b:#04x}")));
        }
        Ok(ToolFlags {
            slices: b & 1 != 0,
            intra: b & 2 != 0,
            adaptive_transform: b & 4 != 0,
            scan_select: b & 8 != 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceHeader {
    pub depth: u8,
    pub q: f32,
    /// Graph kernel width; 0 selects the per-block default.
    pub delta: f32,
    /// Squared-distance edge threshold; 0 selects the per-block default.
    pub tau: f32,
    /// Slice membership side information; empty for a single-slice frame.
    pub index_map: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameHeader {
    pub flags: ToolFlags,
    pub point_count: u32,
    pub slices: Vec<SliceHeader>,
}

/// A parsed container: header plus one arithmetic-coded payload per slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Bitstream {
    pub header: FrameHeader,
    pub segments: Vec<Vec<u8>>,
}

impl FrameHeader {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.flags.to_byte());
        out.extend_from_slice(&self.point_count.to_le_bytes());
        out.extend_from_slice(&(self.slices.len() as u16).to_le_bytes());
        for s in &self.slices {
            out.push(s.depth);
            out.extend_from_slice(&s.q.to_le_bytes());
            out.extend_from_slice(&s.delta.to_le_bytes());
            out.extend_from_slice(&s.tau.to_le_bytes());
            out.extend_from_slice(&(s.index_map.len() as u32).to_le_bytes());
            out.extend_from_slice(&s.index_map);
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }
}

impl Bitstream {
    pub fn to_bytes(&self) -> Vec<u8> {
        assert_eq!(self.header.slices.len(), self.segments.len());
        let mut out = self.header.to_bytes();
        for seg in &self.segments {
            out.extend_from_slice(&(seg.len() as u32 + 4).to_le_bytes());
            out.extend_from_slice(seg);
            out.extend_from_slice(&crc32fast::hash(seg).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Bitstream, BitstreamError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(BitstreamError::BadMagic);
        }
        let version = r.u8("version")?;
        if version != VERSION {
            return Err(BitstreamError::UnsupportedVersion(version));
        }
        let flag_byte = r.u8("flags")?;
        let point_count = r.u32("point count")?;
        let slice_count = r.u16("slice count")? as usize;
        let mut slices = Vec::with_capacity(slice_count.min(16));
        for _ in 0..slice_count {
            let depth = r.u8("slice depth")?;
            let q = r.f32("slice Q")?;
            let delta = r.f32("slice delta")?;
            let tau = r.f32("slice tau")?;
            let map_len = r.u32("index map length")? as usize;
            let index_map = r.take(map_len, "index map")?.to_vec();
            slices.push(SliceHeader { depth, q, delta, tau, index_map });
        }
        let computed = crc32fast::hash(&bytes[..r.pos]);
        let stored = r.u32("header checksum")?;
        if stored != computed {
            return Err(BitstreamError::HeaderCrc { stored, computed });
        }
        let flags = ToolFlags::from_byte(flag_byte)?;
        for s in &slices {
            if !(s.q.is_finite() && s.q > 0.0) {
                return Err(BitstreamError::Corrupt(format!("invalid quantization step {}", s.q)));
            }
        }

        let mut segments = Vec::with_capacity(slice_count);
        for slice in 0..slice_count {
            let len = r.u32("segment length")? as usize;
            if len < 4 {
                return Err(BitstreamError::Corrupt(format!("slice {slice} segment too short")));
            }
            let seg = r.take(len, "segment")?;
            let (payload, crc) = seg.split_at(len - 4);
            if crc32fast::hash(payload).to_le_bytes() != crc {
                return Err(BitstreamError::SegmentCrc { slice });
            }
            segments.push(payload.to_vec());
        }
        if r.pos != bytes.len() {
            return Err(BitstreamError::Corrupt("trailing bytes after last segment".into()));
        }
        Ok(Bitstream { header: FrameHeader { flags, point_count, slices }, segments })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], BitstreamError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(BitstreamError::Truncated(what))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, BitstreamError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16, BitstreamError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, BitstreamError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f32(&mut self, what: &'static str) -> Result<f32, BitstreamError> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

/// Packs slice membership: probe depth, then one bit per probe block
/// (least significant bit first) set when the block belongs to the slice.
pub fn pack_index_map(probe_depth: u32, members: &[bool]) -> Vec<u8> {
    let mut out = vec![probe_depth as u8];
    out.resize(1 + members.len().div_ceil(8), 0);
    for (i, &m) in members.iter().enumerate() {
        if m {
            out[1 + i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub fn unpack_index_map(map: &[u8]) -> Result<(u32, Vec<bool>), BitstreamError> {
    let (&depth, bits) =
        map.split_first().ok_or_else(|| BitstreamError::Corrupt("empty index map".into()))?;
    if depth > 24 {
        return Err(BitstreamError::Corrupt(format!("probe depth {depth} out of range")));
    }
    let blocks = 1usize << depth;
    if bits.len() != blocks.div_ceil(8) {
        return Err(BitstreamError::Corrupt("index map length does not match probe depth".into()));
    }
    Ok((depth as u32, (0..blocks).map(|i| bits[i / 8] >> (i % 8) & 1 == 1).collect()))
}
