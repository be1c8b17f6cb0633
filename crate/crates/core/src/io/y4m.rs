//! YUV4MPEG2 streams with 8-bit studio-range samples.
//!
//! Luma maps `16..=235` onto `[0, 1]` and chroma maps `16..=240` onto
//! `[0, 1]` centred at 0.5. The writer only clamps to the byte range, so
//! out-of-range bytes survive a read/write round trip unchanged.

use std::fmt;
use std::io::{BufRead, Read, Write};

use super::{check_dims, quantize, read_exact_or_short};
use crate::error::{Error, Result, Y4mParam};
use crate::frame::{rgb_to_ycbcr, ColorSpace, Frame, Plane};

const SIGNATURE: &[u8] = b"YUV4MPEG2 ";
const MAX_LINE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Chroma {
    /// 2x2 subsampled chroma; the format default.
    #[default]
    C420,
    C444,
}

impl Chroma {
    fn parse(tag: &str) -> Result<Self> {
        match tag {
            // the 420 siting variants only differ in where samples sit, not in layout
            "420" | "420jpeg" | "420paldv" | "420mpeg2" => Ok(Chroma::C420),
            "444" => Ok(Chroma::C444),
            other => Err(Error::UnsupportedChroma(other.to_string())),
        }
    }
}

impl fmt::Display for Chroma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chroma::C420 => "420",
            Chroma::C444 => "444",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub fps: (u32, u32),
    pub chroma: Chroma,
    /// `I` token (with its letter), kept verbatim.
    pub interlace: Option<String>,
    /// `A` token (with its letter), kept verbatim.
    pub aspect: Option<String>,
    /// Any other tokens (`X...` and unknown letters), kept verbatim in order.
    pub extra: Vec<String>,
}

impl Y4mHeader {
    pub fn new(width: usize, height: usize, fps: (u32, u32), chroma: Chroma) -> Result<Self> {
        let h = Self { width, height, fps, chroma, interlace: None, aspect: None, extra: Vec::new() };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        check_dims(self.width as u64, self.height as u64)?;
        if self.fps.0 == 0 || self.fps.1 == 0 {
            return Err(Error::MalformedHeader(format!("frame rate {}:{} must be positive", self.fps.0, self.fps.1)));
        }
        if self.chroma == Chroma::C420 && (!self.width.is_multiple_of(2) || !self.height.is_multiple_of(2)) {
            return Err(Error::MalformedHeader(format!("C420 needs even dimensions, got {}x{}", self.width, self.height)));
        }
        Ok(())
    }

    fn chroma_dims(&self) -> (usize, usize) {
        match self.chroma {
            Chroma::C420 => (self.width / 2, self.height / 2),
            Chroma::C444 => (self.width, self.height),
        }
    }

    /// Payload bytes per frame (excluding the `FRAME` line).
    pub fn frame_len(&self) -> usize {
        let (cw, ch) = self.chroma_dims();
        self.width * self.height + 2 * cw * ch
    }

    fn parse(line: &str) -> Result<Self> {
        let (mut width, mut height, mut fps) = (None, None, None);
        let mut chroma = Chroma::default();
        let (mut interlace, mut aspect, mut extra) = (None, None, Vec::new());
        for tok in line.split(' ') {
            let Some(key) = tok.chars().next() else {
                return Err(Error::MalformedHeader("empty header parameter".into()));
            };
            let val = &tok[key.len_utf8()..];
            match key {
                'W' => width = Some(parse_num(val, "W")?),
                'H' => height = Some(parse_num(val, "H")?),
                'F' => {
                    let (n, d) =
                        val.split_once(':').ok_or_else(|| Error::MalformedHeader(format!("frame rate {val:?} is not n:d")))?;
                    fps = Some((parse_num(n, "F")?, parse_num(d, "F")?));
                }
                'C' => chroma = Chroma::parse(val)?,
                'I' => interlace = Some(tok.to_string()),
                'A' => aspect = Some(tok.to_string()),
                _ => extra.push(tok.to_string()),
            }
        }
        let width = width.ok_or(Error::HeaderParamMissing(Y4mParam::Width))?;
        let height = height.ok_or(Error::HeaderParamMissing(Y4mParam::Height))?;
        let fps = fps.ok_or(Error::HeaderParamMissing(Y4mParam::FrameRate))?;
        let h = Self { width: width as usize, height: height as usize, fps, chroma, interlace, aspect, extra };
        h.validate()?;
        Ok(h)
    }

    fn to_line(&self) -> String {
        let mut s = format!("YUV4MPEG2 W{} H{} F{}:{}", self.width, self.height, self.fps.0, self.fps.1);
        for tok in self.interlace.iter().chain(&self.aspect) {
            s.push(' ');
            s.push_str(tok);
        }
        s.push_str(&format!(" C{}", self.chroma));
        for tok in &self.extra {
            s.push(' ');
            s.push_str(tok);
        }
        s.push('\n');
        s
    }
}

fn parse_num(s: &str, what: &str) -> Result<u32> {
    if s.is_empty() || s.len() > 10 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::MalformedHeader(format!("bad {what} value {s:?}")));
    }
    s.parse().map_err(|_| Error::MalformedHeader(format!("{what} value {s} out of range")))
}

/// Read a `\n`-terminated line of at most `MAX_LINE` bytes. `Ok(None)` at
/// clean end of input.
fn read_line(r: &mut impl BufRead) -> Result<Option<Vec<u8>>> {
    let mut line = Vec::new();
    r.by_ref().take(MAX_LINE as u64).read_until(b'\n', &mut line)?;
    if line.is_empty() {
        return Ok(None);
    }
    Ok(Some(line))
}

#[inline]
fn luma_from_byte(v: u8) -> f64 {
    (v as f64 - 16.0) / 219.0
}

#[inline]
fn chroma_from_byte(v: u8) -> f64 {
    (v as f64 - 128.0) / 224.0 + 0.5
}

#[inline]
fn luma_to_byte(y: f64) -> u8 {
    quantize(16.0 + 219.0 * y)
}

#[inline]
fn chroma_to_byte(c: f64) -> u8 {
    quantize(128.0 + 224.0 * (c - 0.5))
}

/// Pull-based frame source over a Y4M stream.
pub struct Y4mReader<R> {
    inner: R,
    header: Y4mHeader,
    index: usize,
    done: bool,
}

impl<R: BufRead> Y4mReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let line = read_line(&mut inner)?.unwrap_or_default();
        if !line.starts_with(SIGNATURE) {
            return Err(Error::BadSignature);
        }
        if line.last() != Some(&b'\n') {
            return Err(Error::MalformedHeader("header line is unterminated or too long".into()));
        }
        let text = std::str::from_utf8(&line[SIGNATURE.len()..line.len() - 1])
            .map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
        let header = Y4mHeader::parse(text)?;
        Ok(Self { inner, header, index: 0, done: false })
    }

    pub fn header(&self) -> &Y4mHeader {
        &self.header
    }

    /// Next frame as YCbCr, or `None` at end of stream.
    pub fn next_frame(&mut self) -> Result<Option<Frame>> {
        if self.done {
            return Ok(None);
        }
        let index = self.index;
        let Some(line) = read_line(&mut self.inner)? else {
            self.done = true;
            return Ok(None);
        };
        let marker_ok =
            line.starts_with(b"FRAME") && matches!(line.get(5), Some(b'\n') | Some(b' ')) && line.last() == Some(&b'\n');
        if !marker_ok {
            self.done = true;
            return Err(Error::FrameMarkerMissing { index });
        }
        let expected = self.header.frame_len();
        let payload = read_exact_or_short(&mut self.inner, expected)?;
        if payload.len() < expected {
            self.done = true;
            return Err(Error::ShortFrame { index, expected, got: payload.len() });
        }
        self.index += 1;
        Ok(Some(self.decode(&payload)?))
    }

    fn decode(&self, payload: &[u8]) -> Result<Frame> {
        let (w, h) = (self.header.width, self.header.height);
        let (cw, ch) = self.header.chroma_dims();
        let (y, rest) = payload.split_at(w * h);
        let (cb, cr) = rest.split_at(cw * ch);
        let luma = Plane::from_vec(w, h, y.iter().map(|&v| luma_from_byte(v)).collect())?;
        let chroma_plane = |src: &[u8]| match self.header.chroma {
            Chroma::C444 => Plane::from_vec(w, h, src.iter().map(|&v| chroma_from_byte(v)).collect()),
            Chroma::C420 => Ok(Plane::from_fn(w, h, |x, y| chroma_from_byte(src[(y / 2) * cw + x / 2]))),
        };
        Frame::from_planes(ColorSpace::YCbCr, vec![luma, chroma_plane(cb)?, chroma_plane(cr)?])
    }
}

impl<R: BufRead> Iterator for Y4mReader<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_frame().transpose()
    }
}

/// Ordered frame sink producing a Y4M stream.
pub struct Y4mWriter<W: Write> {
    inner: W,
    header: Y4mHeader,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(mut inner: W, header: Y4mHeader) -> Result<Self> {
        header.validate()?;
        inner.write_all(header.to_line().as_bytes())?;
        Ok(Self { inner, header })
    }

    pub fn header(&self) -> &Y4mHeader {
        &self.header
    }

    /// Append one frame. RGB frames are converted to YCbCr, gray frames get
    /// neutral chroma.
    pub fn write_frame(&mut self, f: &Frame) -> Result<()> {
        if f.dims() != (self.header.width, self.header.height) {
            return Err(Error::DimMismatch(format!(
                "frame is {}x{} but the stream is {}x{}",
                f.width(),
                f.height(),
                self.header.width,
                self.header.height
            )));
        }
        let converted;
        let f = match f.colorspace() {
            ColorSpace::Rgb => {
                converted = rgb_to_ycbcr(f)?;
                &converted
            }
            ColorSpace::Gray => {
                let (w, h) = f.dims();
                converted = Frame::from_planes(
                    ColorSpace::YCbCr,
                    vec![f.channel(0).clone(), Plane::filled(w, h, 0.5), Plane::filled(w, h, 0.5)],
                )?;
                &converted
            }
            ColorSpace::YCbCr => f,
        };
        let mut out = Vec::with_capacity(self.header.frame_len() + 6);
        out.extend_from_slice(b"FRAME\n");
        out.extend(f.channel(0).data().iter().map(|&v| luma_to_byte(v)));
        for c in 1..3 {
            match self.header.chroma {
                Chroma::C444 => out.extend(f.channel(c).data().iter().map(|&v| chroma_to_byte(v))),
                Chroma::C420 => out.extend(f.channel(c).box_downsample2()?.data().iter().map(|&v| chroma_to_byte(v))),
            }
        }
        self.inner.write_all(&out)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Decode a whole in-memory stream.
pub fn read_y4m(bytes: &[u8]) -> Result<(Y4mHeader, Vec<Frame>)> {
    let reader = Y4mReader::new(bytes)?;
    let header = reader.header().clone();
    let frames = reader.collect::<Result<Vec<_>>>()?;
    Ok((header, frames))
}

pub fn write_y4m(header: &Y4mHeader, frames: &[Frame]) -> Result<Vec<u8>> {
    let mut w = Y4mWriter::new(Vec::new(), header.clone())?;
    for f in frames {
        w.write_frame(f)?;
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stream(header: &str, frames: &[&[u8]]) -> Vec<u8> {
        let mut s = header.as_bytes().to_vec();
        for f in frames {
            s.extend_from_slice(b"FRAME\n");
            s.extend_from_slice(f);
        }
        s
    }

    #[test]
    fn tiny_420_stream() {
        let bytes = stream("YUV4MPEG2 W2 H2 F25:1 C420\n", &[&[16, 235, 16, 235, 128, 240]]);
        let (h, frames) = read_y4m(&bytes).unwrap();
        assert_eq!((h.width, h.height, h.fps, h.chroma), (2, 2, (25, 1), Chroma::C420));
        assert_eq!(frames.len(), 1);
        let f = &frames[0];
        assert_eq!(f.colorspace(), ColorSpace::YCbCr);
        assert_eq!(f.channel(0).data(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(f.channel(1).data(), &[0.5; 4]);
        assert!(f.channel(2).data().iter().all(|&v| (v - (0.5 + 112.0 / 224.0)).abs() < 1e-12));
        assert_eq!(write_y4m(&h, &frames).unwrap(), bytes);
    }

    #[test]
    fn default_chroma_and_retained_tokens() {
        let bytes = stream("YUV4MPEG2 W2 H2 F30000:1001 Ip A1:1 C420jpeg XYSCSS=420JPEG\n", &[&[0; 6]]);
        let (h, _) = read_y4m(&bytes).unwrap();
        assert_eq!(h.chroma, Chroma::C420);
        assert_eq!(h.interlace.as_deref(), Some("Ip"));
        assert_eq!(h.aspect.as_deref(), Some("A1:1"));
        assert_eq!(h.extra, vec!["XYSCSS=420JPEG".to_string()]);
        let (h2, _) = read_y4m(&stream("YUV4MPEG2 W2 H2 F1:1\n", &[])).unwrap();
        assert_eq!(h2.chroma, Chroma::C420);
    }

    #[test]
    fn c444_round_trip_is_byte_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let header = Y4mHeader::new(7, 5, (25, 1), Chroma::C444).unwrap();
        let payloads: Vec<Vec<u8>> = (0..3).map(|_| (0..header.frame_len()).map(|_| rng.gen()).collect()).collect();
        let refs: Vec<&[u8]> = payloads.iter().map(|p| p.as_slice()).collect();
        let bytes = stream("YUV4MPEG2 W7 H5 F25:1 C444\n", &refs);
        let (h, frames) = read_y4m(&bytes).unwrap();
        assert_eq!(h, header);
        assert_eq!(write_y4m(&h, &frames).unwrap(), bytes);
    }

    #[test]
    fn c420_second_pass_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let header = Y4mHeader::new(8, 6, (25, 1), Chroma::C420).unwrap();
        let frames: Vec<Frame> = (0..2)
            .map(|_| {
                Frame::from_planes(ColorSpace::Rgb, (0..3).map(|_| Plane::from_fn(8, 6, |_, _| rng.gen())).collect()).unwrap()
            })
            .collect();
        let first = write_y4m(&header, &frames).unwrap();
        let second = write_y4m(&header, &read_y4m(&first).unwrap().1).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn frame_params_are_accepted() {
        let bytes = b"YUV4MPEG2 W2 H2 F25:1 C444\nFRAME Ixyz\n\x10\x10\x10\x10\x80\x80\x80\x80\x80\x80\x80\x80";
        assert_eq!(read_y4m(bytes).unwrap().1.len(), 1);
    }

    #[test]
    fn typed_errors() {
        assert!(matches!(read_y4m(b"YUV4MPEG W2 H2 F25:1\n"), Err(Error::BadSignature)));
        assert!(matches!(read_y4m(b""), Err(Error::BadSignature)));
        assert!(matches!(read_y4m(b"YUV4MPEG2 H2 F25:1\n"), Err(Error::HeaderParamMissing(Y4mParam::Width))));
        assert!(matches!(read_y4m(b"YUV4MPEG2 W2 F25:1\n"), Err(Error::HeaderParamMissing(Y4mParam::Height))));
        assert!(matches!(read_y4m(b"YUV4MPEG2 W2 H2\n"), Err(Error::HeaderParamMissing(Y4mParam::FrameRate))));
        assert!(matches!(read_y4m(b"YUV4MPEG2 W2 H2 F25:1 C422\n"), Err(Error::UnsupportedChroma(_))));
        assert!(matches!(read_y4m(b"YUV4MPEG2 W3 H2 F25:1 C420\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(read_y4m(b"YUV4MPEG2 W2 H2 F25:0\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(read_y4m(b"YUV4MPEG2 W2 H2  F25:1\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(read_y4m(b"YUV4MPEG2 W2 H2 F25:1"), Err(Error::MalformedHeader(_))));

        let ok = stream("YUV4MPEG2 W2 H2 F25:1 C420\n", &[&[0; 6]]);
        let mut bad = ok.clone();
        bad.extend_from_slice(b"FRAMX\n\0\0\0\0\0\0");
        assert!(matches!(read_y4m(&bad), Err(Error::FrameMarkerMissing { index: 1 })));
        let mut short = ok.clone();
        short.extend_from_slice(b"FRAME\n\0\0\0");
        assert!(matches!(read_y4m(&short), Err(Error::ShortFrame { index: 1, expected: 6, got: 3 })));
    }

    #[test]
    fn writer_rejects_wrong_dims() {
        let header = Y4mHeader::new(4, 4, (25, 1), Chroma::C444).unwrap();
        let mut w = Y4mWriter::new(Vec::new(), header).unwrap();
        assert!(matches!(w.write_frame(&Frame::filled(2, 4, ColorSpace::YCbCr, 0.5).unwrap()), Err(Error::DimMismatch(_))));
    }
}
