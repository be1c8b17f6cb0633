use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    sigma: f64,
    radius: usize,
}

impl GaussianParams {
    /// Kernel radius is `ceil(3 sigma)`.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidSigma(sigma));
        }
        Ok(Self { sigma, radius: (3.0 * sigma).ceil() as usize })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Normalized 1D kernel of length `2 * radius + 1`.
    pub fn kernel(&self) -> Vec<f64> {
        let r = self.radius as isize;
        let mut k: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / (2.0 * self.sigma * self.sigma)).exp()).collect();
        let sum: f64 = k.iter().sum();
        k.iter_mut().for_each(|v| *v /= sum);
        k
    }
}

/// Mirror index with edge repetition (`-1 -> 0`, `n -> n - 1`), valid for any offset.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn blur_plane(p: &Plane, kernel: &[f64]) -> Plane {
    let (w, h) = p.dims();
    let r = (kernel.len() / 2) as isize;
    let mut tmp = Plane::new(w, h);
    let mut line = vec![0.0; w.max(h) + 2 * r as usize];
    for y in 0..h {
        let row = p.row(y);
        for (j, v) in line[..w + 2 * r as usize].iter_mut().enumerate() {
            *v = row[reflect(j as isize - r, w)];
        }
        for (x, out) in tmp.row_mut(y).iter_mut().enumerate() {
            *out = kernel.iter().zip(&line[x..x + kernel.len()]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = Plane::new(w, h);
    for x in 0..w {
        for (j, v) in line[..h + 2 * r as usize].iter_mut().enumerate() {
            *v = tmp.get(x, reflect(j as isize - r, h));
        }
        for y in 0..h {
            out.set(x, y, kernel.iter().zip(&line[y..y + kernel.len()]).map(|(k, v)| k * v).sum());
        }
    }
    out
}

/// Separable Gaussian blur, horizontal pass then vertical.
pub fn gaussian_blur(f: &Frame, p: &GaussianParams) -> Result<Frame> {
    let kernel = p.kernel();
    f.map_planes(|plane| Ok(blur_plane(plane, &kernel)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::ColorSpace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense 2D convolution with the unnormalized 2D Gaussian, renormalized
    /// over the full (2r+1)^2 footprint.
    fn dense_blur(p: &Plane, sigma: f64) -> Plane {
        let r = (3.0 * sigma).ceil() as isize;
        let mut norm = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                norm += (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
            }
        }
        let (w, h) = p.dims();
        Plane::from_fn(w, h, |x, y| {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let k = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp() / norm;
                    acc += k * p.get(reflect(x as isize + dx, w), reflect(y as isize + dy, h));
                }
            }
            acc
        })
    }

    #[test]
    fn kernel_normalized() {
        for sigma in [0.3, 1.0, 2.5, 7.0] {
            let p = GaussianParams::new(sigma).unwrap();
            assert_eq!(p.kernel().len(), 2 * p.radius() + 1);
            assert!((p.kernel().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(GaussianParams::new(1.5).unwrap().radius(), 5);
    }

    #[test]
    fn invalid_sigma() {
        for s in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(GaussianParams::new(s), Err(Error::InvalidSigma(_))));
        }
    }

    #[test]
    fn reflect_indices() {
        assert_eq!((-3..8).map(|i| reflect(i, 4)).collect::<Vec<_>>(), vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
        assert_eq!(reflect(-5, 1), 0);
    }

    #[test]
    fn constant_frame_unchanged() {
        let f = Frame::filled(13, 9, ColorSpace::Rgb, 0.7).unwrap();
        let out = gaussian_blur(&f, &GaussianParams::new(2.0).unwrap()).unwrap();
        assert!(out.max_abs_diff(&f) < 1e-6);
    }

    #[test]
    fn impulse_response_is_outer_product() {
        let mut p = Plane::new(33, 33);
        p.set(16, 16, 1.0);
        let params = GaussianParams::new(2.0).unwrap();
        let out = gaussian_blur(&Frame::gray(p).unwrap(), &params).unwrap();
        let k = params.kernel();
        let r = params.radius() as isize;
        for y in 0..33 {
            for x in 0..33 {
                let (dx, dy) = (x as isize - 16, y as isize - 16);
                let want = if dx.abs() <= r && dy.abs() <= r { k[(dx + r) as usize] * k[(dy + r) as usize] } else { 0.0 };
                assert!((out.channel(0).get(x, y) - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn separable_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Plane::from_fn(16, 16, |_, _| rng.gen());
        for sigma in [0.8, 1.5, 3.0] {
            let fast = gaussian_blur(&Frame::gray(p.clone()).unwrap(), &GaussianParams::new(sigma).unwrap()).unwrap();
            assert!(fast.channel(0).max_abs_diff(&dense_blur(&p, sigma)) < 1e-5, "sigma {sigma}");
        }
    }

    #[test]
    fn linear_and_shift_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Plane::from_fn(24, 24, |_, _| rng.gen());
        let b = Plane::from_fn(24, 24, |_, _| rng.gen());
        let params = GaussianParams::new(1.2).unwrap();
        let blur = |p: &Plane| gaussian_blur(&Frame::gray(p.clone()).unwrap(), &params).unwrap().into_channels().remove(0);
        let mix = Plane::from_fn(24, 24, |x, y| 0.3 * a.get(x, y) - 2.0 * b.get(x, y));
        let (ba, bb, bm) = (blur(&a), blur(&b), blur(&mix));
        for y in 0..24 {
            for x in 0..24 {
                assert!((bm.get(x, y) - (0.3 * ba.get(x, y) - 2.0 * bb.get(x, y))).abs() < 1e-12);
            }
        }
        // shift by 3 columns; compare interior pixels away from both borders
        let shifted = Plane::from_fn(24, 24, |x, y| a.get((x + 3).min(23), y));
        let bs = blur(&shifted);
        let r = params.radius();
        for y in r..24 - r {
            for x in r..24 - r - 3 {
                assert!((bs.get(x, y) - ba.get(x + 3, y)).abs() < 1e-12);
            }
        }
    }
}
