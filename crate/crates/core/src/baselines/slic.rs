//! SLIC superpixels over the frame's native channels.
//!
//! Colors are compared directly in the stored unit-range channels rather
//! than CIELAB; the compactness weight absorbs the scale difference.
//! Everything runs sequentially in row-major order with ties going to the
//! lowest label, so a given input always yields the same partition.

use std::collections::VecDeque;

use super::downsample::anchored_mean;
use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicParams {
    pub segments: usize,
    pub compactness: f64,
    pub iterations: usize,
}

impl SlicParams {
    pub const DEFAULT_COMPACTNESS: f64 = 0.3;
    pub const DEFAULT_ITERATIONS: usize = 10;

    pub fn new(segments: usize, compactness: f64) -> Result<Self> {
        let p = Self { segments, compactness, iterations: Self::DEFAULT_ITERATIONS };
        p.check()?;
        Ok(p)
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    fn check(&self) -> Result<()> {
        if self.segments < 2 {
            return Err(Error::InvalidSlicParams(format!("need at least 2 segments, got {}", self.segments)));
        }
        if !(self.compactness.is_finite() && self.compactness > 0.0) {
            return Err(Error::InvalidSlicParams(format!("compactness must be positive, got {}", self.compactness)));
        }
        Ok(())
    }
}

/// Label map produced by [`slic_segment`]; labels are `0..count`, numbered
/// in row-major order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub count: usize,
}

impl Segmentation {
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
}

struct Center {
    color: Vec<f64>,
    x: f64,
    y: f64,
}

fn pixel_color(f: &Frame, i: usize, out: &mut [f64]) {
    for (c, p) in f.channels().iter().enumerate() {
        out[c] = p.data()[i];
    }
}

fn gradient(f: &Frame, x: usize, y: usize) -> f64 {
    let (w, h) = f.dims();
    let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
    let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
    f.channels()
        .iter()
        .map(|p| {
            let dx = p.get(xr, y) - p.get(xl, y);
            let dy = p.get(x, yd) - p.get(x, yu);
            dx * dx + dy * dy
        })
        .sum()
}

fn initial_centers(f: &Frame, step: f64) -> (Vec<Center>, usize, usize) {
    let (w, h) = f.dims();
    let nx = ((w as f64 / step).round() as usize).clamp(1, w);
    let ny = ((h as f64 / step).round() as usize).clamp(1, h);
    let mut centers = Vec::with_capacity(nx * ny);
    let mut color = vec![0.0; f.channels().len()];
    for j in 0..ny {
        for i in 0..nx {
            let gx = (((i as f64 + 0.5) * w as f64 / nx as f64) as usize).min(w - 1);
            let gy = (((j as f64 + 0.5) * h as f64 / ny as f64) as usize).min(h - 1);
            // move to the lowest-gradient pixel of the 3x3 neighbourhood; keep the grid point on ties
            let (mut bx, mut by, mut best) = (gx, gy, gradient(f, gx, gy));
            for y in gy.saturating_sub(1)..=(gy + 1).min(h - 1) {
                for x in gx.saturating_sub(1)..=(gx + 1).min(w - 1) {
                    let g = gradient(f, x, y);
                    if g < best {
                        (bx, by, best) = (x, y, g);
                    }
                }
            }
            pixel_color(f, by * w + bx, &mut color);
            centers.push(Center { color: color.clone(), x: bx as f64, y: by as f64 });
        }
    }
    (centers, nx, ny)
}

/// Run SLIC and enforce 4-connectivity of every label.
pub fn slic_segment(f: &Frame, p: &SlicParams) -> Result<Segmentation> {
    p.check()?;
    let (w, h) = f.dims();
    let n = w * h;
    if p.segments > n {
        return Err(Error::TooManySegments { segments: p.segments, pixels: n });
    }
    let step = (n as f64 / p.segments as f64).sqrt();
    let (mut centers, nx, ny) = initial_centers(f, step);
    let spatial_weight = (p.compactness / step).powi(2);
    let reach = step.ceil() as isize;
    let channels = f.channels().len();

    // until a window covers it, a pixel belongs to its grid cell
    let mut labels: Vec<usize> = (0..n).map(|i| ((i / w) * ny / h) * nx + ((i % w) * nx / w)).collect();
    let mut dist = vec![f64::INFINITY; n];
    let mut color = vec![0.0; channels];

    for _ in 0..p.iterations {
        dist.fill(f64::INFINITY);
        for (k, c) in centers.iter().enumerate() {
            let (cx, cy) = (c.x.round() as isize, c.y.round() as isize);
            let x0 = (cx - reach).max(0) as usize;
            let x1 = ((cx + reach).min(w as isize - 1)) as usize;
            let y0 = (cy - reach).max(0) as usize;
            let y1 = ((cy + reach).min(h as isize - 1)) as usize;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let i = y * w + x;
                    pixel_color(f, i, &mut color);
                    let dc: f64 = color.iter().zip(&c.color).map(|(a, b)| (a - b) * (a - b)).sum();
                    let (dx, dy) = (x as f64 - c.x, y as f64 - c.y);
                    let d = dc + (dx * dx + dy * dy) * spatial_weight;
                    if d < dist[i] {
                        dist[i] = d;
                        labels[i] = k;
                    }
                }
            }
        }
        // center update
        let mut sums = vec![(vec![0.0; channels], 0.0, 0.0, 0usize); centers.len()];
        for (i, &k) in labels.iter().enumerate() {
            let s = &mut sums[k];
            for (c, p) in f.channels().iter().enumerate() {
                s.0[c] += p.data()[i];
            }
            s.1 += (i % w) as f64;
            s.2 += (i / w) as f64;
            s.3 += 1;
        }
        for (c, (col, sx, sy, cnt)) in centers.iter_mut().zip(sums) {
            if cnt > 0 {
                let inv = 1.0 / cnt as f64;
                c.color = col.iter().map(|v| v * inv).collect();
                c.x = sx * inv;
                c.y = sy * inv;
            }
        }
    }

    // as in the reference SLIC, fragments under a quarter of the nominal superpixel are absorbed
    let min_size = (n / (4 * p.segments)).max(1);
    enforce_connectivity(&mut labels, w, h, min_size);
    Ok(compact_labels(&labels, w, h))
}

/// Flood-fill 4-connected components of equal label. Returns per-pixel
/// component ids (numbered in row-major order of first pixel) and the pixel
/// list of each component.
fn components(labels: &[usize], w: usize, h: usize) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut comp = vec![usize::MAX; labels.len()];
    let mut members = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..labels.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut pixels = Vec::new();
        comp[start] = id;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            pixels.push(i);
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if comp[j] == usize::MAX && labels[j] == labels[i] {
                    comp[j] = id;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        members.push(pixels);
    }
    (comp, members)
}

fn neighbours(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (i % w, i / w);
    [(x > 0).then(|| i - 1), (x + 1 < w).then(|| i + 1), (y > 0).then(|| i - w), (y + 1 < h).then(|| i + w)].into_iter().flatten()
}

/// Keep each label's largest component if it has at least `min_size` pixels;
/// fold every other component into the adjacent label with the most pixels
/// (lowest label on ties). Repeats until every label is a single 4-connected
/// component of at least `min_size` pixels (or the only one left).
fn enforce_connectivity(labels: &mut [usize], w: usize, h: usize, min_size: usize) {
    let label_count = labels.iter().copied().max().map_or(0, |m| m + 1);
    for _ in 0..labels.len() {
        let (_, members) = components(labels, w, h);
        let mut keeper: Vec<Option<usize>> = vec![None; label_count];
        for (id, px) in members.iter().enumerate() {
            let l = labels[px[0]];
            if keeper[l].is_none_or(|k| members[k].len() < px.len()) {
                keeper[l] = Some(id);
            }
        }
        let orphans: Vec<usize> =
            (0..members.len()).filter(|&id| keeper[labels[members[id][0]]] != Some(id) || members[id].len() < min_size).collect();
        if orphans.is_empty() {
            return;
        }
        let mut sizes = vec![0usize; label_count];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        for id in orphans {
            let own = labels[members[id][0]];
            let target = members[id]
                .iter()
                .flat_map(|&i| neighbours(i, w, h))
                .map(|j| labels[j])
                .filter(|&l| l != own)
                .min_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
            if let Some(t) = target {
                for &i in &members[id] {
                    labels[i] = t;
                }
                sizes[own] -= members[id].len();
                sizes[t] += members[id].len();
            }
        }
    }
}

fn compact_labels(labels: &[usize], w: usize, h: usize) -> Segmentation {
    let mut remap = vec![u32::MAX; labels.iter().copied().max().map_or(0, |m| m + 1)];
    let mut next = 0u32;
    let out = labels
        .iter()
        .map(|&l| {
            if remap[l] == u32::MAX {
                remap[l] = next;
                next += 1;
            }
            remap[l]
        })
        .collect();
    Segmentation { width: w, height: h, labels: out, count: next as usize }
}

/// Fill every superpixel with its mean color.
pub fn fill_segments(f: &Frame, seg: &Segmentation) -> Result<Frame> {
    if (seg.width, seg.height) != f.dims() {
        return Err(Error::DimMismatch("segmentation does not match the frame".into()));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); seg.count];
    for (i, &l) in seg.labels.iter().enumerate() {
        members[l as usize].push(i);
    }
    f.map_planes(|p| {
        let means: Vec<f64> = members.iter().map(|m| anchored_mean(m.iter().map(|&i| p.data()[i]))).collect();
        Plane::from_vec(p.width(), p.height(), seg.labels.iter().map(|&l| means[l as usize]).collect())
    })
}

pub fn superpixel_anonymize(f: &Frame, p: &SlicParams) -> Result<Frame> {
    let seg = slic_segment(f, p)?;
    fill_segments(f, &seg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::ColorSpace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn halves(cs: ColorSpace) -> Frame {
        let planes = (0..cs.channel_count()).map(|_| Plane::from_fn(32, 16, |x, _| if x < 16 { 0.2 } else { 0.8 })).collect();
        Frame::from_planes(cs, planes).unwrap()
    }

    #[test]
    fn two_flat_halves_split_exactly() {
        for cs in [ColorSpace::Gray, ColorSpace::Rgb] {
            for m in [0.01, 0.3, 1.0, 10.0] {
                let f = halves(cs);
                let seg = slic_segment(&f, &SlicParams::new(2, m).unwrap()).unwrap();
                // brute-force check: label is a function of the half
                for y in 0..16 {
                    for x in 0..32 {
                        assert_eq!(seg.label(x, y), seg.label(if x < 16 { 0 } else { 31 }, 0));
                    }
                }
                assert_eq!(seg.count, 2);
                let out = fill_segments(&f, &seg).unwrap();
                assert_eq!(out, f, "m={m}");
            }
        }
    }

    #[test]
    fn constant_frame_unchanged() {
        let f = Frame::filled(20, 20, ColorSpace::Rgb, 0.37).unwrap();
        for k in [2, 7, 50] {
            assert_eq!(superpixel_anonymize(&f, &SlicParams::new(k, 0.3).unwrap()).unwrap(), f);
        }
    }

    fn assert_four_connected(seg: &Segmentation) {
        let labels: Vec<usize> = seg.labels.iter().map(|&l| l as usize).collect();
        let (_, members) = components(&labels, seg.width, seg.height);
        assert_eq!(members.len(), seg.count, "some label is split into several components");
    }

    #[test]
    fn random_frames_partition_connected_and_mean_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (w, h, k) in [(40, 30, 12), (17, 23, 5), (64, 64, 100), (9, 9, 81)] {
            let f =
                Frame::from_planes(ColorSpace::Rgb, (0..3).map(|_| Plane::from_fn(w, h, |_, _| rng.gen())).collect()).unwrap();
            let p = SlicParams::new(k, 0.2).unwrap();
            let seg = slic_segment(&f, &p).unwrap();
            assert_eq!(seg.labels.len(), w * h);
            assert!(seg.labels.iter().all(|&l| (l as usize) < seg.count));
            assert_four_connected(&seg);
            assert_eq!(slic_segment(&f, &p).unwrap(), seg);

            let out = fill_segments(&f, &seg).unwrap();
            let (lo, hi) = f.min_max();
            let (olo, ohi) = out.min_max();
            assert!(olo >= lo && ohi <= hi);
            for c in 0..3 {
                assert!((out.channel(c).mean() - f.channel(c).mean()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn orphans_are_absorbed() {
        // label 0 split into two pieces by label 1; the small piece must merge
        let (w, h) = (6, 3);
        let mut labels = vec![0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1];
        enforce_connectivity(&mut labels, w, h, 1);
        let seg = compact_labels(&labels, w, h);
        assert_four_connected(&seg);
        assert_eq!(&labels[4..6], &[1, 1]);
    }

    #[test]
    fn undersized_segments_are_absorbed() {
        // a 2x2 island of label 2 inside label 0, next to a larger label 1
        let (w, h) = (6, 4);
        #[rustfmt::skip]
        let mut labels = vec![
            0, 0, 0, 1, 1, 1,
            0, 2, 2, 1, 1, 1,
            0, 2, 2, 1, 1, 1,
            0, 0, 0, 1, 1, 1,
        ];
        let mut kept = labels.clone();
        enforce_connectivity(&mut kept, w, h, 4);
        assert_eq!(kept, labels, "island of exactly min_size survives");
        enforce_connectivity(&mut labels, w, h, 5);
        // label 2 touches 0 (8 px) and 1 (12 px): it joins 1, then 0 (8 px) stays
        assert_eq!(labels.iter().filter(|&&l| l == 2).count(), 0);
        assert_eq!(labels[7], 1);
        assert_four_connected(&compact_labels(&labels, w, h));
    }

    #[test]
    fn small_isolated_object_merges_into_background() {
        // 3x3 bright square in a 48x48 frame, 16 segments: nominal size 144, minimum 36
        let f =
            Frame::gray(Plane::from_fn(48, 48, |x, y| if (20..23).contains(&x) && (20..23).contains(&y) { 1.0 } else { 0.0 }))
                .unwrap();
        let seg = slic_segment(&f, &SlicParams::new(16, 0.3).unwrap()).unwrap();
        let inside = seg.label(21, 21);
        assert!((20..23).all(|y| (20..23).all(|x| seg.label(x, y) == inside)));
        let border = [(19, 21), (23, 21), (21, 19), (21, 23)];
        assert!(border.iter().any(|&(x, y)| seg.label(x, y) == inside), "square kept as its own segment");
    }

    #[test]
    fn parameter_errors() {
        let f = Frame::filled(4, 4, ColorSpace::Gray, 0.5).unwrap();
        assert!(matches!(
            superpixel_anonymize(&f, &SlicParams { segments: 17, compactness: 1.0, iterations: 10 }),
            Err(Error::TooManySegments { segments: 17, pixels: 16 })
        ));
        assert!(SlicParams::new(1, 1.0).is_err());
        assert!(SlicParams::new(4, 0.0).is_err());
        assert!(SlicParams::new(4, f64::NAN).is_err());
    }
}
