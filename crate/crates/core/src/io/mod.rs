//! Frame codecs: binary PPM stills and YUV4MPEG2 streams.

mod ppm;
mod y4m;

use std::io::Read;

pub use ppm::{read_ppm, read_ppm_from, read_ppm_stream, write_ppm, write_ppm_to};
pub use y4m::{read_y4m, write_y4m, Chroma, Y4mHeader, Y4mReader, Y4mWriter};

use crate::error::{Error, Result};

/// Largest accepted side length and pixel count for decoded images.
pub const MAX_DIM: u64 = 1 << 15;
pub const MAX_PIXELS: u64 = 1 << 26;

pub(crate) fn check_dims(width: u64, height: u64) -> Result<(usize, usize)> {
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if width > MAX_DIM || height > MAX_DIM || width * height > MAX_PIXELS {
        return Err(Error::DimensionsTooLarge { width: width as usize, height: height as usize });
    }
    Ok((width as usize, height as usize))
}

/// Round half up to a byte, clamping to `0..=255` first.
#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 255.0) + 0.5).floor() as u8
}

/// Read up to `len` bytes; a shorter result means the input ended early.
/// The buffer grows with the data actually present, never with `len` alone.
pub(crate) fn read_exact_or_short(r: &mut impl Read, len: usize) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(len.min(1 << 20));
    r.take(len as u64).read_to_end(&mut buf)?;
    Ok(buf)
}
