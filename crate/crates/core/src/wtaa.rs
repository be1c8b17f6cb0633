//! Wavelet coefficient destruction.
//!
//! A frame is decomposed per channel, every detail band is multiplied by a
//! per-(level, band) gain, and the result is reconstructed. Gain 0 destroys a
//! band, gain 1 keeps it. Destroying the finest levels removes texture while
//! the coarse bands carry shape and color through untouched, and because each
//! level is tied to a fixed spatial scale the same policy treats a small
//! (distant) object the way it treats the coarse structure of a near one.

use serde::{Deserialize, Serialize};

use crate::dwt::{decompose_plane, reconstruct, BandKind, Pyramid, WaveletBasis};
use crate::error::{Error, Result};
use crate::frame::{rgb_to_ycbcr, ycbcr_to_rgb, ColorSpace, Frame, Plane};

/// Per-level `[LH, HL, HH]` gains plus a gain for the final LL band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DestructionPolicy {
    /// `gains[k]` applies to level `k + 1`.
    gains: Vec<[f64; 3]>,
    #[serde(default = "unit")]
    approx_gain: f64,
}

fn unit() -> f64 {
    1.0
}

fn check_gain(g: f64) -> Result<f64> {
    if g.is_finite() && (0.0..=1.0).contains(&g) {
        Ok(g)
    } else {
        Err(Error::InvalidGain(g))
    }
}

impl DestructionPolicy {
    pub fn new(gains: Vec<[f64; 3]>, approx_gain: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidDepth { depth: 0, levels: 0 });
        }
        for g in gains.iter().flatten() {
            check_gain(*g)?;
        }
        check_gain(approx_gain)?;
        Ok(Self { gains, approx_gain })
    }

    pub fn identity(levels: usize) -> Result<Self> {
        Self::new(vec![[1.0; 3]; levels], 1.0)
    }

    /// Re-run the range checks, e.g. after deserializing.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.gains, self.approx_gain)
    }

    pub fn levels(&self) -> usize {
        self.gains.len()
    }

    pub fn approx_gain(&self) -> f64 {
        self.approx_gain
    }

    pub fn gains(&self) -> &[[f64; 3]] {
        &self.gains
    }

    /// Gain for a band at `level` (1-based). `BandKind::LL` returns the approximation gain.
    pub fn gain(&self, level: usize, kind: BandKind) -> f64 {
        match kind {
            BandKind::LL => self.approx_gain,
            BandKind::LH => self.gains[level - 1][0],
            BandKind::HL => self.gains[level - 1][1],
            BandKind::HH => self.gains[level - 1][2],
        }
    }

    pub fn set_gain(&mut self, level: usize, kind: BandKind, gain: f64) -> Result<()> {
        let gain = check_gain(gain)?;
        if level == 0 || level > self.levels() {
            return Err(Error::PolicyLevelMismatch { policy: self.levels(), pyramid: level });
        }
        match kind {
            BandKind::LL => self.approx_gain = gain,
            BandKind::LH => self.gains[level - 1][0] = gain,
            BandKind::HL => self.gains[level - 1][1] = gain,
            BandKind::HH => self.gains[level - 1][2] = gain,
        }
        Ok(())
    }

    /// The same policy one octave coarser: level `k + 1` becomes level `k` and
    /// the finest level is dropped. `None` for single-level policies.
    pub fn shifted_coarser(&self) -> Option<Self> {
        (self.levels() > 1).then(|| Self { gains: self.gains[1..].to_vec(), approx_gain: self.approx_gain })
    }

    pub fn is_identity(&self) -> bool {
        self.approx_gain == 1.0 && self.gains.iter().flatten().all(|&g| g == 1.0)
    }
}

/// Destroy every detail band at levels `1..=destroy_finest`, keep the rest.
pub fn default_policy(levels: usize, destroy_finest: usize) -> Result<DestructionPolicy> {
    if levels == 0 || destroy_finest > levels {
        return Err(Error::InvalidDepth { depth: destroy_finest, levels });
    }
    let gains = (1..=levels).map(|k| if k <= destroy_finest { [0.0; 3] } else { [1.0; 3] }).collect();
    DestructionPolicy::new(gains, 1.0)
}

/// Fractional destruction depth: levels `1..=floor(strength)` are destroyed
/// and the next level is attenuated by `1 - fract(strength)`. Integral
/// strengths match [`default_policy`]. Used to sweep a continuous operating point.
pub fn graded_policy(levels: usize, strength: f64) -> Result<DestructionPolicy> {
    if !(strength.is_finite() && strength >= 0.0 && strength <= levels as f64) || levels == 0 {
        return Err(Error::InvalidDepth { depth: strength.max(0.0).ceil() as usize, levels });
    }
    let whole = strength.floor() as usize;
    let frac = strength - whole as f64;
    let gains = (1..=levels)
        .map(|k| {
            if k <= whole {
                [0.0; 3]
            } else if k == whole + 1 {
                [1.0 - frac; 3]
            } else {
                [1.0; 3]
            }
        })
        .collect();
    DestructionPolicy::new(gains, 1.0)
}

/// Scale every band of `p` by its gain. Shape and padding bookkeeping are untouched.
pub fn apply_policy(p: &Pyramid, policy: &DestructionPolicy) -> Result<Pyramid> {
    if policy.levels() != p.levels() {
        return Err(Error::PolicyLevelMismatch { policy: policy.levels(), pyramid: p.levels() });
    }
    let mut out = p.clone();
    scale_in_place(&mut out, policy);
    Ok(out)
}

fn scale_in_place(p: &mut Pyramid, policy: &DestructionPolicy) {
    let scale = |plane: &mut Plane, g: f64| {
        if g != 1.0 {
            plane.scale(g);
        }
    };
    scale(&mut p.approx, policy.approx_gain);
    for (k, d) in p.details.iter_mut().enumerate() {
        let [lh, hl, hh] = policy.gains[k];
        scale(&mut d.lh, lh);
        scale(&mut d.hl, hl);
        scale(&mut d.hh, hh);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorMode {
    /// Every stored channel (R, G, B or Y, Cb, Cr) gets the main policy.
    #[default]
    PerChannel,
    /// RGB input is converted to YCbCr; luma gets the main policy and
    /// chroma gets `chroma_policy`.
    LumaChroma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WtaaConfig {
    pub basis: WaveletBasis,
    pub policy: DestructionPolicy,
    pub chroma_policy: Option<DestructionPolicy>,
    pub color_mode: ColorMode,
}

impl WtaaConfig {
    pub fn new(basis: WaveletBasis, policy: DestructionPolicy) -> Self {
        Self { basis, policy, chroma_policy: None, color_mode: ColorMode::PerChannel }
    }

    /// Destroy the finest `destroy_finest` levels. In luma/chroma mode chroma
    /// loses one level fewer than luma.
    pub fn with_depth(basis: WaveletBasis, levels: usize, destroy_finest: usize, color_mode: ColorMode) -> Result<Self> {
        let policy = default_policy(levels, destroy_finest)?;
        let chroma_policy = match color_mode {
            ColorMode::LumaChroma => Some(default_policy(levels, destroy_finest.saturating_sub(1))?),
            ColorMode::PerChannel => None,
        };
        Ok(Self { basis, policy, chroma_policy, color_mode })
    }

    /// Like [`WtaaConfig::with_depth`] with a fractional depth (see [`graded_policy`]).
    pub fn graded(basis: WaveletBasis, levels: usize, strength: f64, color_mode: ColorMode) -> Result<Self> {
        let policy = graded_policy(levels, strength)?;
        let chroma_policy = match color_mode {
            ColorMode::LumaChroma => Some(graded_policy(levels, (strength - 1.0).max(0.0))?),
            ColorMode::PerChannel => None,
        };
        Ok(Self { basis, policy, chroma_policy, color_mode })
    }

    pub fn levels(&self) -> usize {
        self.policy.levels()
    }
}

/// Decompose, apply `policy`, reconstruct a single plane (no clamping).
pub fn anonymize_plane(p: &Plane, basis: WaveletBasis, policy: &DestructionPolicy) -> Result<Plane> {
    let mut pyr = decompose_plane(p, basis, policy.levels())?;
    scale_in_place(&mut pyr, policy);
    let out = reconstruct(&pyr);
    pyr.recycle();
    out
}

/// Anonymize a frame; the output is clamped to `[0, 1]` and keeps the input colorspace.
pub fn anonymize_wtaa(f: &Frame, cfg: &WtaaConfig) -> Result<Frame> {
    let chroma = cfg.chroma_policy.as_ref().unwrap_or(&cfg.policy);
    if let Some(c) = &cfg.chroma_policy {
        if c.levels() == 0 {
            return Err(Error::InvalidDepth { depth: 0, levels: 0 });
        }
    }
    match (cfg.color_mode, f.colorspace()) {
        (ColorMode::PerChannel, _) => {
            let mut out = f.map_planes(|p| anonymize_plane(p, cfg.basis, &cfg.policy))?;
            out.clamp_unit();
            Ok(out)
        }
        (ColorMode::LumaChroma, ColorSpace::Gray) => {
            Err(Error::InvalidColorspace { expected: ColorSpace::Rgb, found: ColorSpace::Gray })
        }
        (ColorMode::LumaChroma, ColorSpace::YCbCr) => {
            let mut out = luma_chroma(f, cfg.basis, &cfg.policy, chroma)?;
            out.clamp_unit();
            Ok(out)
        }
        (ColorMode::LumaChroma, ColorSpace::Rgb) => {
            let ycc = rgb_to_ycbcr(f)?;
            ycbcr_to_rgb(&luma_chroma(&ycc, cfg.basis, &cfg.policy, chroma)?)
        }
    }
}

fn luma_chroma(f: &Frame, basis: WaveletBasis, luma: &DestructionPolicy, chroma: &DestructionPolicy) -> Result<Frame> {
    let planes = f
        .channels()
        .iter()
        .enumerate()
        .map(|(i, p)| anonymize_plane(p, basis, if i == 0 { luma } else { chroma }))
        .collect::<Result<Vec<_>>>()?;
    Frame::from_planes(f.colorspace(), planes)
}

/// Upper bound, in pixels, on how far a change to one input pixel can travel
/// through an `levels`-deep decompose/attenuate/reconstruct pass, away from
/// the frame border. Db4 uses periodic extension, so near the border the
/// distance must be measured around the wrap.
pub fn influence_radius(basis: WaveletBasis, levels: usize) -> usize {
    let (lo, hi) = basis.tap_span();
    let scale = 1usize << levels;
    (scale - 1) * (hi - lo) as usize + scale
}
