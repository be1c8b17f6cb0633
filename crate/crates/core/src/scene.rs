//! Deterministic synthetic test scene: a large "near" figure and a small
//! "far" figure on a mid-gray background, both carrying fine stripe texture.
//!
//! The figures are tinted along a direction with zero BT.601 luma, so the
//! luma contrast against the background is exactly `stripe mean - 0.5`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{ColorSpace, Frame, Plane, Region};
use crate::metrics::BACKGROUND_REGION;

pub const NEAR_REGION: &str = "near_figure";
pub const FAR_REGION: &str = "far_figure";

pub const BACKGROUND_LEVEL: f64 = 0.5;
/// Luma of the two alternating stripe colors.
pub const STRIPE_LUMA: [f64; 2] = [0.7, 0.9];
/// Stripe width in pixels.
pub const STRIPE_WIDTH: usize = 2;
/// Figure tint, scaled along `(0.587, -0.299, 0)` which adds no luma.
pub const TINT: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneParams {
    pub width: usize,
    pub height: usize,
    pub near: Region,
    pub far: Region,
    pub background: Region,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            near: Region::new(32, 80, 64, 96),
            far: Region::new(200, 120, 8, 12),
            background: Region::new(176, 176, 48, 48),
        }
    }
}

impl SceneParams {
    /// Default layout rescaled to a `width x height` canvas.
    pub fn scaled(width: usize, height: usize) -> Self {
        let d = Self::default();
        let sx = |v: usize| v * width / d.width;
        let sy = |v: usize| v * height / d.height;
        let scale = |r: Region| Region::new(sx(r.x), sy(r.y), sx(r.w).max(1), sy(r.h).max(1));
        Self { width, height, near: scale(d.near), far: scale(d.far), background: scale(d.background) }
    }

    pub fn regions(&self) -> BTreeMap<String, Region> {
        BTreeMap::from([
            (NEAR_REGION.to_string(), self.near),
            (FAR_REGION.to_string(), self.far),
            (BACKGROUND_REGION.to_string(), self.background),
        ])
    }

    fn validate(&self) -> Result<()> {
        if self.width < 128 || self.height < 128 || !self.width.is_multiple_of(2) || !self.height.is_multiple_of(2) {
            return Err(Error::SceneTooSmall { width: self.width, height: self.height });
        }
        for r in [self.near, self.far, self.background] {
            r.check_within(self.width, self.height)?;
        }
        if self.background.intersects(&self.near) || self.background.intersects(&self.far) {
            return Err(Error::RegionsOverlap);
        }
        Ok(())
    }
}

/// Render the scene as an RGB frame.
pub fn near_far_scene(p: &SceneParams) -> Result<Frame> {
    p.validate()?;
    let luma = |x: usize, y: usize| -> Option<f64> {
        [p.near, p.far].iter().find(|r| r.contains(x, y)).map(|r| STRIPE_LUMA[((x - r.x) / STRIPE_WIDTH) % 2])
    };
    let channel = |tint: f64| Plane::from_fn(p.width, p.height, |x, y| luma(x, y).map_or(BACKGROUND_LEVEL, |l| l + TINT * tint));
    Frame::from_planes(ColorSpace::Rgb, vec![channel(0.587), channel(-0.299), channel(0.0)])
}
