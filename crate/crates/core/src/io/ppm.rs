//! Binary PPM (P6, maxval 255). Samples are full range: `byte / 255`.

use std::io::{BufRead, Read, Write};

use super::{check_dims, quantize, read_exact_or_short};
use crate::error::{Error, Result};
use crate::frame::{ycbcr_to_rgb, ColorSpace, Frame, Plane};

/// Longest header token we accept; anything longer is not a sane number.
const MAX_TOKEN: usize = 20;

fn peek(r: &mut impl BufRead) -> Result<Option<u8>> {
    Ok(r.fill_buf()?.first().copied())
}

/// Skip whitespace and `#` comments (which run to end of line).
fn skip_separators(r: &mut impl BufRead) -> Result<()> {
    while let Some(b) = peek(r)? {
        if b == b'#' {
            let mut sink = Vec::new();
            r.by_ref().take(4096).read_until(b'\n', &mut sink)?;
            if sink.last() != Some(&b'\n') && peek(r)?.is_some() {
                return Err(Error::MalformedHeader("comment line too long".into()));
            }
        } else if b.is_ascii_whitespace() {
            r.consume(1);
        } else {
            break;
        }
    }
    Ok(())
}

fn read_number(r: &mut impl BufRead, what: &str) -> Result<u64> {
    skip_separators(r)?;
    let mut digits = String::new();
    while let Some(b) = peek(r)? {
        if !b.is_ascii_digit() {
            break;
        }
        if digits.len() == MAX_TOKEN {
            return Err(Error::MalformedHeader(format!("{what} is too long")));
        }
        digits.push(b as char);
        r.consume(1);
    }
    if digits.is_empty() {
        return Err(Error::MalformedHeader(format!("expected {what}")));
    }
    digits.parse().map_err(|_| Error::MalformedHeader(format!("{what} out of range")))
}

/// Read one P6 image from `r`. Returns `Ok(None)` if the reader is at end of
/// input (trailing whitespace allowed), which lets callers walk a stream of
/// concatenated images.
pub fn read_ppm_from(r: &mut impl BufRead) -> Result<Option<Frame>> {
    while let Some(b) = peek(r)? {
        if !b.is_ascii_whitespace() {
            break;
        }
        r.consume(1);
    }
    if peek(r)?.is_none() {
        return Ok(None);
    }
    let mut magic = [0u8; 2];
    if r.read_exact(&mut magic).is_err() || &magic != b"P6" {
        return Err(Error::BadMagic);
    }
    match peek(r)? {
        Some(b) if b.is_ascii_whitespace() || b == b'#' => {}
        _ => return Err(Error::BadMagic),
    }
    let width = read_number(r, "width")?;
    let height = read_number(r, "height")?;
    let maxval = read_number(r, "maxval")?;
    let (w, h) = check_dims(width, height)?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(u32::try_from(maxval).unwrap_or(u32::MAX)));
    }
    // exactly one whitespace byte separates the header from the payload
    match peek(r)? {
        Some(b) if b.is_ascii_whitespace() => r.consume(1),
        Some(_) => return Err(Error::MalformedHeader("missing whitespace after maxval".into())),
        None => return Err(Error::TruncatedPayload { expected: w * h * 3, got: 0 }),
    }
    let expected = w * h * 3;
    let payload = read_exact_or_short(r, expected)?;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload { expected, got: payload.len() });
    }
    let mut planes = [Plane::new(w, h), Plane::new(w, h), Plane::new(w, h)];
    for (i, px) in payload.chunks_exact(3).enumerate() {
        for (c, plane) in planes.iter_mut().enumerate() {
            plane.data_mut()[i] = px[c] as f64 / 255.0;
        }
    }
    Frame::from_planes(ColorSpace::Rgb, planes.into()).map(Some)
}

/// Decode a single P6 image. Bytes after the payload are ignored.
pub fn read_ppm(bytes: &[u8]) -> Result<Frame> {
    let mut cursor = bytes;
    read_ppm_from(&mut cursor)?.ok_or(Error::BadMagic)
}

/// Decode every image in a concatenated P6 stream.
pub fn read_ppm_stream(bytes: &[u8]) -> Result<Vec<Frame>> {
    let mut cursor = bytes;
    let mut frames = Vec::new();
    while let Some(f) = read_ppm_from(&mut cursor)? {
        frames.push(f);
    }
    Ok(frames)
}

/// Encode with the canonical header `P6\n<w> <h>\n255\n`. Gray frames are
/// replicated into all three channels; YCbCr frames are converted to RGB.
pub fn write_ppm_to(w: &mut impl Write, f: &Frame) -> Result<()> {
    let rgb;
    let f = match f.colorspace() {
        ColorSpace::YCbCr => {
            rgb = ycbcr_to_rgb(f)?;
            &rgb
        }
        _ => f,
    };
    let (width, height) = f.dims();
    let chans: Vec<&[f64]> = (0..3).map(|c| f.channel(c.min(f.channels().len() - 1)).data()).collect();
    let mut out = Vec::with_capacity(width * height * 3 + 32);
    write!(out, "P6\n{width} {height}\n255\n")?;
    for i in 0..width * height {
        out.extend(chans.iter().map(|c| quantize(c[i] * 255.0)));
    }
    w.write_all(&out)?;
    Ok(())
}

pub fn write_ppm(f: &Frame) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_ppm_to(&mut out, f)?;
    Ok(out)
}
