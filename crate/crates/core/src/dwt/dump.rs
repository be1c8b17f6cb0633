//! Flat little-endian coefficient dump for inspecting pyramids.
//!
//! ```text
//! "WPYR" | u8 version=1 | u8 basis id | u8 levels L | u8 channels C
//! u32 original width | u32 original height
//! L x u8 pad flags, level 1 first (bit 0 = right column, bit 1 = bottom row)
//! (1 + 3L) x (u32 width, u32 height) band dims in payload order
//! payload: per channel, per band: f32 samples, row-major
//! ```
//!
//! Payload band order is LL_L, then LH_k, HL_k, HH_k for k = L down to 1.

use super::pyramid::{DetailBands, Pad, Pyramid};
use super::WaveletBasis;
use crate::error::{Error, Result};
use crate::frame::Plane;

pub const MAGIC: &[u8; 4] = b"WPYR";
const VERSION: u8 = 1;

/// Serialize the per-channel pyramids of one frame. All pyramids must share
/// basis, level count and original size.
pub fn write_pyramids(pyramids: &[Pyramid]) -> Result<Vec<u8>> {
    let first = pyramids.first().ok_or_else(|| Error::CorruptPyramid("nothing to dump".into()))?;
    let levels = first.levels();
    if pyramids.len() > u8::MAX as usize || levels > u8::MAX as usize {
        return Err(Error::CorruptPyramid("too many channels or levels for the dump header".into()));
    }
    for p in pyramids {
        if p.basis != first.basis || p.levels() != levels || p.original_size != first.original_size || p.pad_log != first.pad_log
        {
            return Err(Error::CorruptPyramid("channel pyramids disagree in shape".into()));
        }
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, first.basis.id(), levels as u8, pyramids.len() as u8]);
    out.extend_from_slice(&(first.original_size.0 as u32).to_le_bytes());
    out.extend_from_slice(&(first.original_size.1 as u32).to_le_bytes());
    for pad in &first.pad_log {
        out.push(pad.right as u8 | (pad.bottom as u8) << 1);
    }
    for (_, _, band) in first.subbands() {
        out.extend_from_slice(&(band.width() as u32).to_le_bytes());
        out.extend_from_slice(&(band.height() as u32).to_le_bytes());
    }
    for p in pyramids {
        for (_, _, band) in p.subbands() {
            for &v in band.data() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(Error::TruncatedPayload { expected: self.pos.saturating_add(n), got: self.buf.len() })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }
}

/// Parse a dump back into pyramids (coefficients come back at f32 precision).
pub fn read_pyramids(bytes: &[u8]) -> Result<Vec<Pyramid>> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    if c.take(4).map_err(|_| Error::BadMagic)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = c.u8()?;
    if version != VERSION {
        return Err(Error::MalformedHeader(format!("unsupported dump version {version}")));
    }
    let basis_id = c.u8()?;
    let basis = WaveletBasis::from_id(basis_id).ok_or_else(|| Error::MalformedHeader(format!("unknown basis id {basis_id}")))?;
    let levels = c.u8()? as usize;
    let channels = c.u8()? as usize;
    if levels == 0 || channels == 0 {
        return Err(Error::MalformedHeader("zero levels or channels".into()));
    }
    let original_size = (c.u32()?, c.u32()?);
    let mut pad_log = Vec::with_capacity(levels);
    for _ in 0..levels {
        let flags = c.u8()?;
        if flags > 3 {
            return Err(Error::MalformedHeader(format!("bad pad flags {flags}")));
        }
        pad_log.push(Pad { right: flags & 1 != 0, bottom: flags & 2 != 0 });
    }
    let expected = Pyramid::expected_dims(original_size, levels);
    let mut band_dims = Vec::with_capacity(1 + 3 * levels);
    for _ in 0..1 + 3 * levels {
        band_dims.push((c.u32()?, c.u32()?));
    }
    // LL_L then three bands per level from coarse to fine
    let consistent = band_dims.iter().enumerate().all(|(i, &d)| {
        let level = if i == 0 { levels } else { levels - (i - 1) / 3 };
        d == expected[level]
    });
    if !consistent {
        return Err(Error::MalformedHeader("band dims disagree with the original size".into()));
    }
    let samples: usize = band_dims.iter().map(|&(w, h)| w * h).sum();
    let needed = samples.checked_mul(4 * channels).ok_or_else(|| Error::MalformedHeader("payload size overflows".into()))?;
    if bytes.len() - c.pos < needed {
        return Err(Error::TruncatedPayload { expected: c.pos + needed, got: bytes.len() });
    }

    let read_plane = |c: &mut Cursor<'_>, (w, h): (usize, usize)| -> Result<Plane> {
        let raw = c.take(w * h * 4)?;
        let data = raw.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64).collect();
        Plane::from_vec(w, h, data)
    };

    let mut out = Vec::with_capacity(channels);
    for _ in 0..channels {
        let approx = read_plane(&mut c, band_dims[0])?;
        let mut details = Vec::with_capacity(levels);
        for level in (1..=levels).rev() {
            let d = expected[level];
            let lh = read_plane(&mut c, d)?;
            let hl = read_plane(&mut c, d)?;
            let hh = read_plane(&mut c, d)?;
            details.push(DetailBands { lh, hl, hh });
        }
        details.reverse();
        out.push(Pyramid { basis, approx, details, original_size, pad_log: pad_log.clone() });
    }
    if c.pos != bytes.len() {
        return Err(Error::MalformedHeader(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Ok(out)
}
