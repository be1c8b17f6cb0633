use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DownsampleParams {
    factor: usize,
}

impl DownsampleParams {
    pub fn new(factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::InvalidFactor { factor, width: 0, height: 0 });
        }
        Ok(Self { factor })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }
}

/// Mean of `values` computed relative to the first sample, so a constant
/// block averages back to exactly its value.
pub(crate) fn anchored_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut first = None;
    let (mut acc, mut n) = (0.0, 0usize);
    for v in values {
        let base = *first.get_or_insert(v);
        acc += v - base;
        n += 1;
    }
    first.map_or(0.0, |b| b + acc / n as f64)
}

fn pixelate(p: &Plane, factor: usize) -> Plane {
    let (w, h) = p.dims();
    let mut out = Plane::new(w, h);
    for by in (0..h).step_by(factor) {
        let y1 = (by + factor).min(h);
        for bx in (0..w).step_by(factor) {
            let x1 = (bx + factor).min(w);
            let mean = anchored_mean((by..y1).flat_map(|y| p.row(y)[bx..x1].iter().copied()));
            for y in by..y1 {
                out.row_mut(y)[bx..x1].fill(mean);
            }
        }
    }
    out
}

/// Box-downsample by `factor` and upsample back with nearest neighbour:
/// every pixel takes the mean of its `factor x factor` cell (edge cells may
/// be smaller).
pub fn downsample_anonymize(f: &Frame, p: &DownsampleParams) -> Result<Frame> {
    if p.factor > f.width().min(f.height()) {
        return Err(Error::InvalidFactor { factor: p.factor, width: f.width(), height: f.height() });
    }
    f.map_planes(|plane| Ok(pixelate(plane, p.factor)))
}
