//! Planar frames, color conversion and rectangular regions.
//!
//! Samples are `f64` on a nominal unit scale. Nothing here clamps except
//! [`ycbcr_to_rgb`]; wavelet coefficients and intermediate results are
//! free to leave `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single row-major channel of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimMismatch(format!("{} samples cannot fill a {width}x{height} plane", data.len())));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    #[inline]
    pub fn row_mut(&mut self, y: usize) -> &mut [f64] {
        &mut self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Plane {
        Plane { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&mut self, gain: f64) {
        self.data.iter_mut().for_each(|v| *v *= gain);
    }

    pub fn clamp_unit(&mut self) {
        self.data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn crop(&self, r: Region) -> Result<Plane> {
        r.check_within(self.width, self.height)?;
        let mut data = Vec::with_capacity(r.w * r.h);
        for y in r.y..r.y + r.h {
            data.extend_from_slice(&self.row(y)[r.x..r.x + r.w]);
        }
        Ok(Plane { width: r.w, height: r.h, data })
    }

    /// Mean of the samples inside `r`.
    pub fn region_mean(&self, r: Region) -> Result<f64> {
        r.check_within(self.width, self.height)?;
        let mut sum = 0.0;
        for y in r.y..r.y + r.h {
            sum += self.row(y)[r.x..r.x + r.w].iter().sum::<f64>();
        }
        Ok(sum / r.area() as f64)
    }

    /// 2x2 block-mean downsampling. Both dimensions must be even.
    pub fn box_downsample2(&self) -> Result<Plane> {
        if !self.width.is_multiple_of(2) || !self.height.is_multiple_of(2) || self.is_empty() {
            return Err(Error::DimMismatch(format!("2x2 box downsampling needs even dims, got {}x{}", self.width, self.height)));
        }
        Ok(Plane::from_fn(self.width / 2, self.height / 2, |x, y| {
            (self.get(2 * x, 2 * y) + self.get(2 * x + 1, 2 * y) + self.get(2 * x, 2 * y + 1) + self.get(2 * x + 1, 2 * y + 1))
                / 4.0
        }))
    }

    /// Mirror the plane left-right.
    pub fn flip_horizontal(&self) -> Plane {
        Plane::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    Gray,
    Rgb,
    YCbCr,
}

impl ColorSpace {
    pub fn channel_count(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            ColorSpace::Rgb | ColorSpace::YCbCr => 3,
        }
    }
}

/// A multi-channel image with planar storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    colorspace: ColorSpace,
    channels: Vec<Plane>,
}

impl Frame {
    /// Zero-filled frame.
    pub fn new(width: usize, height: usize, colorspace: ColorSpace) -> Result<Self> {
        let channels = (0..colorspace.channel_count()).map(|_| Plane::new(width, height)).collect();
        Self::from_planes(colorspace, channels)
    }

    pub fn from_planes(colorspace: ColorSpace, channels: Vec<Plane>) -> Result<Self> {
        if channels.len() != colorspace.channel_count() {
            return Err(Error::InvalidFrame(format!(
                "{colorspace:?} needs {} channels, got {}",
                colorspace.channel_count(),
                channels.len()
            )));
        }
        let (width, height) = channels[0].dims();
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame("frame dimensions must be at least 1x1".into()));
        }
        if channels.iter().any(|p| p.dims() != (width, height)) {
            return Err(Error::InvalidFrame("channel planes differ in size".into()));
        }
        Ok(Self { width, height, colorspace, channels })
    }

    pub fn gray(plane: Plane) -> Result<Self> {
        Self::from_planes(ColorSpace::Gray, vec![plane])
    }

    /// Every channel set to `value`.
    pub fn filled(width: usize, height: usize, colorspace: ColorSpace, value: f64) -> Result<Self> {
        let channels = (0..colorspace.channel_count()).map(|_| Plane::filled(width, height, value)).collect();
        Self::from_planes(colorspace, channels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn channels(&self) -> &[Plane] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &Plane {
        &self.channels[i]
    }

    pub fn channel_mut(&mut self, i: usize) -> &mut Plane {
        &mut self.channels[i]
    }

    pub fn into_channels(self) -> Vec<Plane> {
        self.channels
    }

    /// Apply `f` to every channel, keeping the colorspace.
    pub fn map_planes(&self, mut f: impl FnMut(&Plane) -> Result<Plane>) -> Result<Frame> {
        let channels = self.channels.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Frame::from_planes(self.colorspace, channels)
    }

    /// Luma plane: the gray channel, Y of YCbCr, or BT.601 luma of RGB.
    pub fn luma(&self) -> Plane {
        match self.colorspace {
            ColorSpace::Gray | ColorSpace::YCbCr => self.channels[0].clone(),
            ColorSpace::Rgb => {
                let [r, g, b] = [&self.channels[0], &self.channels[1], &self.channels[2]];
                let data = r.data.iter().zip(&g.data).zip(&b.data).map(|((&r, &g), &b)| luma_601(r, g, b)).collect();
                Plane { width: self.width, height: self.height, data }
            }
        }
    }

    pub fn clamp_unit(&mut self) {
        self.channels.iter_mut().for_each(Plane::clamp_unit);
    }

    pub fn flip_horizontal(&self) -> Frame {
        Frame {
            width: self.width,
            height: self.height,
            colorspace: self.colorspace,
            channels: self.channels.iter().map(Plane::flip_horizontal).collect(),
        }
    }

    pub fn box_downsample2(&self) -> Result<Frame> {
        self.map_planes(Plane::box_downsample2)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.channels
            .iter()
            .flat_map(|p| p.data.iter().copied())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Largest per-sample difference across all channels.
    pub fn max_abs_diff(&self, other: &Frame) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.channels.iter().zip(&other.channels).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    pub(crate) fn check_same_shape(&self, other: &Frame) -> Result<()> {
        if self.dims() != other.dims() || self.channels.len() != other.channels.len() {
            return Err(Error::DimMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.width,
                self.height,
                self.channels.len(),
                other.width,
                other.height,
                other.channels.len()
            )));
        }
        Ok(())
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Region {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub const fn full(width: usize, height: usize) -> Self {
        Self { x: 0, y: 0, w: width, h: height }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn check_within(&self, width: usize, height: usize) -> Result<()> {
        let fits = self.w > 0
            && self.h > 0
            && self.x.checked_add(self.w).is_some_and(|e| e <= width)
            && self.y.checked_add(self.h).is_some_and(|e| e <= height);
        if fits {
            Ok(())
        } else {
            Err(Error::RegionOutOfBounds { x: self.x, y: self.y, w: self.w, h: self.h, width, height })
        }
    }

    /// `inner` is relative to `self`; the result is relative to `self`'s parent.
    pub fn compose(&self, inner: Region) -> Region {
        Region { x: self.x + inner.x, y: self.y + inner.y, w: inner.w, h: inner.h }
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.x < other.x + other.w && other.x < self.x + self.w && self.y < other.y + other.h && other.y < self.y + self.h
    }

    /// Grow by `margin` on every side, clipped to the frame.
    pub fn dilate(&self, margin: usize, width: usize, height: usize) -> Region {
        let x0 = self.x.saturating_sub(margin);
        let y0 = self.y.saturating_sub(margin);
        let x1 = (self.x + self.w + margin).min(width);
        let y1 = (self.y + self.h + margin).min(height);
        Region { x: x0, y: y0, w: x1 - x0, h: y1 - y0 }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

#[inline]
pub(crate) fn luma_601(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

const CB_SCALE: f64 = 0.564;
const CR_SCALE: f64 = 0.713;

/// BT.601 full-range RGB to YCbCr with chroma centered on 0.5.
pub fn rgb_to_ycbcr(f: &Frame) -> Result<Frame> {
    if f.colorspace != ColorSpace::Rgb {
        return Err(Error::InvalidColorspace { expected: ColorSpace::Rgb, found: f.colorspace });
    }
    let n = f.pixel_count();
    let (mut y, mut cb, mut cr) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (r, g, b) = (f.channels[0].data[i], f.channels[1].data[i], f.channels[2].data[i]);
        let luma = luma_601(r, g, b);
        y.push(luma);
        cb.push(0.5 + (b - luma) * CB_SCALE);
        cr.push(0.5 + (r - luma) * CR_SCALE);
    }
    let (w, h) = f.dims();
    Frame::from_planes(
        ColorSpace::YCbCr,
        vec![
            Plane { width: w, height: h, data: y },
            Plane { width: w, height: h, data: cb },
            Plane { width: w, height: h, data: cr },
        ],
    )
}

/// Inverse of [`rgb_to_ycbcr`]; the RGB output is clamped to `[0, 1]`.
pub fn ycbcr_to_rgb(f: &Frame) -> Result<Frame> {
    if f.colorspace != ColorSpace::YCbCr {
        return Err(Error::InvalidColorspace { expected: ColorSpace::YCbCr, found: f.colorspace });
    }
    let n = f.pixel_count();
    let (mut rs, mut gs, mut bs) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let y = f.channels[0].data[i];
        let cb = f.channels[1].data[i] - 0.5;
        let cr = f.channels[2].data[i] - 0.5;
        let r = y + cr / CR_SCALE;
        let b = y + cb / CB_SCALE;
        let g = (y - 0.299 * r - 0.114 * b) / 0.587;
        rs.push(r.clamp(0.0, 1.0));
        gs.push(g.clamp(0.0, 1.0));
        bs.push(b.clamp(0.0, 1.0));
    }
    let (w, h) = f.dims();
    Frame::from_planes(
        ColorSpace::Rgb,
        vec![
            Plane { width: w, height: h, data: rs },
            Plane { width: w, height: h, data: gs },
            Plane { width: w, height: h, data: bs },
        ],
    )
}

pub fn crop(f: &Frame, r: Region) -> Result<Frame> {
    r.check_within(f.width, f.height)?;
    f.map_planes(|p| p.crop(r))
}
