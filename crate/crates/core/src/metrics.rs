//! Fidelity metrics used as anonymity/usability proxies.
//!
//! Low PSNR, SSIM and edge retention inside an object region mean its
//! identifying detail is gone; high edge and contrast retention mean its
//! outline and color still stand out from the background.

use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::frame::{Frame, Plane, Region};

/// Reported PSNR for identical inputs.
pub const PSNR_CAP_DB: f64 = 99.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Region name that [`metrics_report`] uses as the background for contrast retention.
pub const BACKGROUND_REGION: &str = "background";

/// Peak signal-to-noise ratio over all channels, unit peak.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    a.check_same_shape(b)?;
    let (mut sum, mut n) = (0.0, 0usize);
    for (pa, pb) in a.channels().iter().zip(b.channels()) {
        for (x, y) in pa.data().iter().zip(pb.data()) {
            sum += (x - y) * (x - y);
        }
        n += pa.len();
    }
    Ok(psnr_from_mse(sum / n as f64))
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP_DB
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB)
    }
}

fn region_psnr(a: &Frame, b: &Frame, r: Region) -> Result<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (pa, pb) in a.channels().iter().zip(b.channels()) {
        for y in r.y..r.y + r.h {
            for (x, y2) in pa.row(y)[r.x..r.x + r.w].iter().zip(&pb.row(y)[r.x..r.x + r.w]) {
                sum += (x - y2) * (x - y2);
            }
        }
        n += r.area();
    }
    Ok(psnr_from_mse(sum / n as f64))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// 'valid'-mode separable filtering with the SSIM window.
fn filter_valid(p: &Plane, win: &[f64; SSIM_WINDOW]) -> Plane {
    let (w, h) = p.dims();
    let (ow, oh) = (w + 1 - SSIM_WINDOW, h + 1 - SSIM_WINDOW);
    let mut tmp = Plane::new(ow, h);
    for y in 0..h {
        let row = p.row(y);
        let out = tmp.row_mut(y);
        for (x, o) in out.iter_mut().enumerate() {
            *o = win.iter().zip(&row[x..x + SSIM_WINDOW]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = Plane::new(ow, oh);
    for y in 0..oh {
        let acc = out.row_mut(y);
        for (k, wk) in win.iter().enumerate() {
            for (o, v) in acc.iter_mut().zip(tmp.row(y + k)) {
                *o += wk * v;
            }
        }
    }
    out
}

/// Per-position SSIM values for one channel; entry (x, y) is the window
/// centered at (x + 5, y + 5).
fn ssim_map(a: &Plane, b: &Plane) -> Plane {
    let win = gaussian_window();
    let mu_a = filter_valid(a, &win);
    let mu_b = filter_valid(b, &win);
    let prod = |p: &Plane, q: &Plane| {
        Plane::from_vec(p.width(), p.height(), p.data().iter().zip(q.data()).map(|(x, y)| x * y).collect()).unwrap()
    };
    let e_aa = filter_valid(&prod(a, a), &win);
    let e_bb = filter_valid(&prod(b, b), &win);
    let e_ab = filter_valid(&prod(a, b), &win);
    let (w, h) = mu_a.dims();
    Plane::from_fn(w, h, |x, y| {
        let (ma, mb) = (mu_a.get(x, y), mu_b.get(x, y));
        let var_a = e_aa.get(x, y) - ma * ma;
        let var_b = e_bb.get(x, y) - mb * mb;
        let cov = e_ab.get(x, y) - ma * mb;
        ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2)) / ((ma * ma + mb * mb + SSIM_C1) * (var_a + var_b + SSIM_C2))
    })
}

fn check_ssim_size(f: &Frame) -> Result<()> {
    if f.width() < SSIM_WINDOW || f.height() < SSIM_WINDOW {
        return Err(Error::FrameTooSmall { width: f.width(), height: f.height(), window: SSIM_WINDOW });
    }
    Ok(())
}

/// Mean SSIM (11x11 Gaussian window, sigma 1.5, unit range), averaged over channels.
pub fn ssim(a: &Frame, b: &Frame) -> Result<f64> {
    a.check_same_shape(b)?;
    check_ssim_size(a)?;
    let maps = ssim_maps(a, b);
    Ok(maps.iter().map(Plane::mean).sum::<f64>() / maps.len() as f64)
}

fn ssim_maps(a: &Frame, b: &Frame) -> Vec<Plane> {
    a.channels().iter().zip(b.channels()).map(|(pa, pb)| ssim_map(pa, pb)).collect()
}

/// SSIM averaged over windows centered inside `r`, from precomputed maps.
fn region_ssim(maps: &[Plane], r: Region) -> Result<f64> {
    let half = SSIM_WINDOW / 2;
    let mut total = 0.0;
    for map in maps {
        let (mut sum, mut n) = (0.0, 0usize);
        for y in r.y..r.y + r.h {
            for x in r.x..r.x + r.w {
                if x >= half && y >= half && x - half < map.width() && y - half < map.height() {
                    sum += map.get(x - half, y - half);
                    n += 1;
                }
            }
        }
        if n == 0 {
            return Err(Error::FrameTooSmall { width: r.w, height: r.h, window: SSIM_WINDOW });
        }
        total += sum / n as f64;
    }
    Ok(total / maps.len() as f64)
}

/// Sobel gradient magnitude with replicated borders.
pub fn sobel_magnitude(p: &Plane) -> Plane {
    let (w, h) = p.dims();
    let at = |x: isize, y: isize| p.get(x.clamp(0, w as isize - 1) as usize, y.clamp(0, h as isize - 1) as usize);
    Plane::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
        let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        (gx * gx + gy * gy).sqrt()
    })
}

const ZERO_VARIANCE: f64 = 1e-12;

/// Pearson correlation of luma Sobel magnitudes over `region` (whole frame
/// by default), clamped to `[0, 1]`.
pub fn edge_retention(orig: &Frame, anon: &Frame, region: Option<Region>) -> Result<f64> {
    orig.check_same_shape(anon)?;
    let r = region.unwrap_or(Region::full(orig.width(), orig.height()));
    r.check_within(orig.width(), orig.height())?;
    Ok(gradient_correlation(&sobel_magnitude(&orig.luma()), &sobel_magnitude(&anon.luma()), r))
}

fn gradient_correlation(go: &Plane, ga: &Plane, r: Region) -> f64 {
    let n = r.area() as f64;
    let (mut so, mut sa) = (0.0, 0.0);
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            so += go.get(x, y);
            sa += ga.get(x, y);
        }
    }
    let (mo, ma) = (so / n, sa / n);
    let (mut voo, mut vaa, mut voa) = (0.0, 0.0, 0.0);
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            let (a, b) = (go.get(x, y) - mo, ga.get(x, y) - ma);
            voo += a * a;
            vaa += b * b;
            voa += a * b;
        }
    }
    let (voo, vaa) = (voo / n, vaa / n);
    if voo <= ZERO_VARIANCE {
        return if vaa <= ZERO_VARIANCE { 1.0 } else { 0.0 };
    }
    if vaa <= ZERO_VARIANCE {
        return 0.0;
    }
    (voa / n / (voo * vaa).sqrt()).clamp(0.0, 1.0)
}

/// How much of the luma contrast between an object and its background survives.
pub fn contrast_retention(orig: &Frame, anon: &Frame, object: Region, background: Region) -> Result<f64> {
    orig.check_same_shape(anon)?;
    if object.intersects(&background) {
        return Err(Error::RegionsOverlap);
    }
    let (lo, la) = (orig.luma(), anon.luma());
    let before = (lo.region_mean(object)? - lo.region_mean(background)?).abs();
    if before < 1e-6 {
        return Err(Error::DegenerateContrast);
    }
    let after = (la.region_mean(object)? - la.region_mean(background)?).abs();
    Ok(after / before)
}

/// Fixed six-decimal JSON number.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Fixed6(pub f64);

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = if self.0.is_finite() { self.0 } else { 0.0 };
        let text = format!("{v:.6}");
        let text = if text == "-0.000000" { "0.000000".to_string() } else { text };
        RawValue::from_string(text).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalMetrics {
    pub psnr_db: f64,
    pub ssim: f64,
    pub edge_retention: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMetrics {
    pub psnr_db: f64,
    pub ssim: f64,
    pub edge_retention: f64,
    /// `None` for the background region itself or when the original contrast is degenerate.
    pub contrast_retention: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub global: GlobalMetrics,
    pub regions: BTreeMap<String, RegionMetrics>,
}

impl MetricsReport {
    pub fn region(&self, name: &str) -> Option<&RegionMetrics> {
        self.regions.get(name)
    }

    /// Element-wise mean of several reports sharing the same region names.
    pub fn mean(reports: &[MetricsReport]) -> Option<MetricsReport> {
        let first = reports.first()?;
        let n = reports.len() as f64;
        let avg = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let global = GlobalMetrics {
            psnr_db: avg(&|r| r.global.psnr_db),
            ssim: avg(&|r| r.global.ssim),
            edge_retention: avg(&|r| r.global.edge_retention),
        };
        let regions = first
            .regions
            .iter()
            .map(|(name, m0)| {
                let get = |r: &MetricsReport| r.regions[name];
                let contrast = m0.contrast_retention.and_then(|_| {
                    let vals: Option<Vec<f64>> = reports.iter().map(|r| get(r).contrast_retention).collect();
                    vals.map(|v| v.iter().sum::<f64>() / n)
                });
                (
                    name.clone(),
                    RegionMetrics {
                        psnr_db: avg(&|r| get(r).psnr_db),
                        ssim: avg(&|r| get(r).ssim),
                        edge_retention: avg(&|r| get(r).edge_retention),
                        contrast_retention: contrast,
                    },
                )
            })
            .collect();
        Some(MetricsReport { global, regions })
    }
}

impl Serialize for GlobalMetrics {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("psnr_db", &Fixed6(self.psnr_db))?;
        m.serialize_entry("ssim", &Fixed6(self.ssim))?;
        m.serialize_entry("edge_retention", &Fixed6(self.edge_retention))?;
        m.end()
    }
}

impl Serialize for RegionMetrics {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("psnr_db", &Fixed6(self.psnr_db))?;
        m.serialize_entry("ssim", &Fixed6(self.ssim))?;
        m.serialize_entry("edge_retention", &Fixed6(self.edge_retention))?;
        m.serialize_entry("contrast_retention", &self.contrast_retention.map(Fixed6))?;
        m.end()
    }
}

impl Serialize for MetricsReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("global", &self.global)?;
        m.serialize_entry("regions", &self.regions)?;
        m.end()
    }
}

/// Global metrics plus per-region metrics for every named region. Contrast
/// retention is measured against the region named [`BACKGROUND_REGION`] when present.
pub fn metrics_report(orig: &Frame, anon: &Frame, regions: &BTreeMap<String, Region>) -> Result<MetricsReport> {
    orig.check_same_shape(anon)?;
    for r in regions.values() {
        r.check_within(orig.width(), orig.height())?;
    }
    check_ssim_size(orig)?;
    let maps = ssim_maps(orig, anon);
    let (go, ga) = (sobel_magnitude(&orig.luma()), sobel_magnitude(&anon.luma()));
    let global = GlobalMetrics {
        psnr_db: psnr(orig, anon)?,
        ssim: maps.iter().map(Plane::mean).sum::<f64>() / maps.len() as f64,
        edge_retention: gradient_correlation(&go, &ga, Region::full(orig.width(), orig.height())),
    };
    let background = regions.get(BACKGROUND_REGION).copied();
    let mut per_region = BTreeMap::new();
    for (name, &r) in regions {
        let contrast = match background {
            Some(bg) if name != BACKGROUND_REGION && !r.intersects(&bg) => match contrast_retention(orig, anon, r, bg) {
                Ok(v) => Some(v),
                Err(Error::DegenerateContrast) => None,
                Err(e) => return Err(e),
            },
            _ => None,
        };
        per_region.insert(
            name.clone(),
            RegionMetrics {
                psnr_db: region_psnr(orig, anon, r)?,
                ssim: region_ssim(&maps, r)?,
                edge_retention: gradient_correlation(&go, &ga, r),
                contrast_retention: contrast,
            },
        );
    }
    Ok(MetricsReport { global, regions: per_region })
}
