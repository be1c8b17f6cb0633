//! Separable 2D transform and multi-level pyramids.

use serde::{Deserialize, Serialize};

use super::columns::{forward_columns, inverse_columns};
use super::scratch;
use super::transform1d::{forward_into, inverse_into};
use super::WaveletBasis;
use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};

/// Subband labels in (row filter, column filter) order: `LH` is lowpass
/// along rows and highpass along columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BandKind {
    LL,
    LH,
    HL,
    HH,
}

impl BandKind {
    pub const DETAILS: [BandKind; 3] = [BandKind::LH, BandKind::HL, BandKind::HH];
}

/// Replicated row/column appended before a level to make its input even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pad {
    pub right: bool,
    pub bottom: bool,
}

impl Pad {
    fn for_dims(width: usize, height: usize) -> Self {
        Pad { right: width % 2 == 1, bottom: height % 2 == 1 }
    }
}

/// Output of one 2D analysis level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelBands {
    pub ll: Plane,
    pub lh: Plane,
    pub hl: Plane,
    pub hh: Plane,
    pub pad: Pad,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    pub lh: Plane,
    pub hl: Plane,
    pub hh: Plane,
}

impl DetailBands {
    pub fn band(&self, kind: BandKind) -> Option<&Plane> {
        match kind {
            BandKind::LH => Some(&self.lh),
            BandKind::HL => Some(&self.hl),
            BandKind::HH => Some(&self.hh),
            BandKind::LL => None,
        }
    }

    pub fn band_mut(&mut self, kind: BandKind) -> Option<&mut Plane> {
        match kind {
            BandKind::LH => Some(&mut self.lh),
            BandKind::HL => Some(&mut self.hl),
            BandKind::HH => Some(&mut self.hh),
            BandKind::LL => None,
        }
    }

    fn dims(&self) -> (usize, usize) {
        self.lh.dims()
    }
}

/// A single-channel multi-level decomposition.
///
/// `details[0]` is level 1 (finest); `approx` is the LL band at level
/// `levels()`. `pad_log[k]` records the padding applied to the input of
/// level `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub basis: WaveletBasis,
    pub approx: Plane,
    pub details: Vec<DetailBands>,
    pub original_size: (usize, usize),
    pub pad_log: Vec<Pad>,
}

impl Pyramid {
    /// Hand every band's buffer to the transform scratch pool so the next
    /// decomposition on this thread can reuse it.
    pub(crate) fn recycle(self) {
        scratch::recycle(self.approx);
        for d in self.details {
            scratch::recycle(d.lh);
            scratch::recycle(d.hl);
            scratch::recycle(d.hh);
        }
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Detail bands at `level` (1-based).
    pub fn detail(&self, level: usize) -> &DetailBands {
        &self.details[level - 1]
    }

    pub fn detail_mut(&mut self, level: usize) -> &mut DetailBands {
        &mut self.details[level - 1]
    }

    /// Every band as `(level, kind, plane)`, coarsest approximation first.
    pub fn subbands(&self) -> impl Iterator<Item = (usize, BandKind, &Plane)> {
        let l = self.levels();
        std::iter::once((l, BandKind::LL, &self.approx)).chain(
            self.details
                .iter()
                .enumerate()
                .rev()
                .flat_map(|(k, d)| [(k + 1, BandKind::LH, &d.lh), (k + 1, BandKind::HL, &d.hl), (k + 1, BandKind::HH, &d.hh)]),
        )
    }

    /// Sum of squared coefficients over all bands.
    pub fn energy(&self) -> f64 {
        self.subbands().map(|(_, _, p)| p.data().iter().map(|v| v * v).sum::<f64>()).sum()
    }

    /// Dimensions of the input to each level, level 1 first, followed by the
    /// approximation dims. Derived from `original_size` alone.
    pub(crate) fn expected_dims(original: (usize, usize), levels: usize) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(levels + 1);
        let (mut w, mut h) = original;
        dims.push((w, h));
        for _ in 0..levels {
            w = w.div_ceil(2);
            h = h.div_ceil(2);
            dims.push((w, h));
        }
        dims
    }

    fn validate(&self) -> Result<()> {
        let l = self.levels();
        if l == 0 {
            return Err(Error::CorruptPyramid("pyramid has no levels".into()));
        }
        if self.pad_log.len() != l {
            return Err(Error::CorruptPyramid(format!("{} pad entries for {l} levels", self.pad_log.len())));
        }
        let dims = Self::expected_dims(self.original_size, l);
        for (k, d) in self.details.iter().enumerate() {
            let want = dims[k + 1];
            if d.lh.dims() != want || d.hl.dims() != want || d.hh.dims() != want {
                return Err(Error::CorruptPyramid(format!("level {} detail bands are not {}x{}", k + 1, want.0, want.1)));
            }
            if self.pad_log[k] != Pad::for_dims(dims[k].0, dims[k].1) {
                return Err(Error::CorruptPyramid(format!("level {} pad log disagrees with its input size", k + 1)));
            }
        }
        if self.approx.dims() != dims[l] {
            return Err(Error::CorruptPyramid(format!("approximation band is not {}x{}", dims[l].0, dims[l].1)));
        }
        Ok(())
    }
}

/// Largest level count `decompose` accepts for a `width x height` input:
/// every level's input must be at least 2 samples along both axes.
pub fn max_levels(width: usize, height: usize) -> usize {
    let mut m = width.min(height);
    let mut levels = 0;
    while m >= 2 {
        levels += 1;
        m = m.div_ceil(2);
    }
    levels
}

/// One separable analysis level: rows first, then columns.
pub fn dwt2d_level(p: &Plane, basis: WaveletBasis) -> Result<LevelBands> {
    if p.is_empty() {
        return Err(Error::EmptyPlane);
    }
    let (w, h) = p.dims();
    let pad = Pad::for_dims(w, h);
    let (pw, ph) = (w + pad.right as usize, h + pad.bottom as usize);
    let (hw, hh) = (pw / 2, ph / 2);

    // row pass into lo/hi halves, each hw x ph
    let mut lo = scratch::plane(hw, ph);
    let mut hi = scratch::plane(hw, ph);
    let mut line = vec![0.0; pw];
    for y in 0..ph {
        let src = p.row(y.min(h - 1));
        line[..w].copy_from_slice(src);
        if pad.right {
            line[w] = src[w - 1];
        }
        forward_into(&line[..pw], lo.row_mut(y), hi.row_mut(y), basis);
    }

    let [mut ll, mut lh, mut hl, mut hh_band] = std::array::from_fn(|_| scratch::plane(hw, hh));
    forward_columns(&lo, &mut ll, &mut lh, basis);
    forward_columns(&hi, &mut hl, &mut hh_band, basis);
    scratch::recycle(lo);
    scratch::recycle(hi);
    Ok(LevelBands { ll, lh, hl, hh: hh_band, pad })
}

/// Inverse of [`dwt2d_level`], cropping any recorded padding.
pub fn idwt2d_level(bands: &LevelBands, basis: WaveletBasis) -> Result<Plane> {
    let details = [&bands.lh, &bands.hl, &bands.hh];
    synthesize(&bands.ll, details, bands.pad, basis)
}

fn synthesize(ll: &Plane, [lh, hl, hh_band]: [&Plane; 3], pad: Pad, basis: WaveletBasis) -> Result<Plane> {
    let (hw, hh) = ll.dims();
    if hw == 0 || hh == 0 {
        return Err(Error::EmptyPlane);
    }
    for b in [lh, hl, hh_band] {
        if b.dims() != (hw, hh) {
            return Err(Error::CorruptPyramid(format!("band {}x{} next to LL {hw}x{hh}", b.width(), b.height())));
        }
    }
    let (pw, ph) = (hw * 2, hh * 2);
    let mut lo = scratch::plane(hw, ph);
    let mut hi = scratch::plane(hw, ph);
    inverse_columns(ll, lh, &mut lo, basis);
    inverse_columns(hl, hh_band, &mut hi, basis);
    let mut line = vec![0.0; pw];
    let w = pw - pad.right as usize;
    let h = ph - pad.bottom as usize;
    let mut out = Plane::new(w, h);
    for y in 0..h {
        inverse_into(lo.row(y), hi.row(y), &mut line[..pw], basis);
        out.row_mut(y).copy_from_slice(&line[..w]);
    }
    scratch::recycle(lo);
    scratch::recycle(hi);
    Ok(out)
}

/// Multi-level decomposition of one plane; each level re-transforms the
/// previous LL band.
pub fn decompose_plane(p: &Plane, basis: WaveletBasis, levels: usize) -> Result<Pyramid> {
    if p.is_empty() {
        return Err(Error::EmptyPlane);
    }
    let max_allowed = max_levels(p.width(), p.height());
    if levels == 0 || levels > max_allowed {
        return Err(Error::TooManyLevels { requested: levels, max_allowed });
    }
    let mut details = Vec::with_capacity(levels);
    let mut pad_log = Vec::with_capacity(levels);
    let mut current = dwt2d_level(p, basis)?;
    loop {
        let LevelBands { ll, lh, hl, hh, pad } = current;
        details.push(DetailBands { lh, hl, hh });
        pad_log.push(pad);
        if details.len() == levels {
            return Ok(Pyramid { basis, approx: ll, details, original_size: p.dims(), pad_log });
        }
        current = dwt2d_level(&ll, basis)?;
        scratch::recycle(ll);
    }
}

/// Decompose every channel of `f`.
pub fn decompose(f: &Frame, basis: WaveletBasis, levels: usize) -> Result<Vec<Pyramid>> {
    f.channels().iter().map(|p| decompose_plane(p, basis, levels)).collect()
}

/// Inverse of [`decompose_plane`]; the output has the pyramid's original size.
pub fn reconstruct(p: &Pyramid) -> Result<Plane> {
    p.validate()?;
    let mut ll = p.approx.clone();
    for k in (0..p.levels()).rev() {
        let d = &p.details[k];
        debug_assert_eq!(d.dims(), ll.dims());
        let next = synthesize(&ll, [&d.lh, &d.hl, &d.hh], p.pad_log[k], p.basis)?;
        scratch::recycle(std::mem::replace(&mut ll, next));
    }
    Ok(ll)
}
