//! Method registry and the matched-anonymity comparison.
//!
//! Every method is swept over a list of parameter points. For each point the
//! anonymized frames are scored against the originals, and per method the
//! point whose PSNR over the match region is closest to the target is marked
//! as its operating point. Comparing the operating points then answers "at
//! equal anonymity of the near figure, how much of the far figure is left?".

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::baselines::{downsample_anonymize, gaussian_blur, superpixel_anonymize, DownsampleParams, GaussianParams, SlicParams};
use crate::dwt::WaveletBasis;
use crate::error::{Error, Result};
use crate::frame::{Frame, Region};
use crate::metrics::{metrics_report, Fixed6, MetricsReport};
use crate::wtaa::{anonymize_wtaa, ColorMode, WtaaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wtaa,
    Gaussian,
    Downsample,
    Superpixel,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Wtaa, Method::Gaussian, Method::Downsample, Method::Superpixel];

    pub fn name(self) -> &'static str {
        match self {
            Method::Wtaa => "wtaa",
            Method::Gaussian => "gaussian",
            Method::Downsample => "downsample",
            Method::Superpixel => "superpixel",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?} (expected wtaa, gaussian, downsample or superpixel)")))
    }
}

/// WTAA parameters as exposed to users. `destroy_finest` may be fractional,
/// in which case the next level is partially attenuated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WtaaParams {
    pub basis: WaveletBasis,
    pub levels: usize,
    pub destroy_finest: f64,
    pub color_mode: ColorMode,
}

impl WtaaParams {
    pub fn config(&self) -> Result<WtaaConfig> {
        WtaaConfig::graded(self.basis, self.levels, self.destroy_finest, self.color_mode)
    }
}

/// One fully specified anonymizer.
#[derive(Debug, Clone, PartialEq)]
pub enum Anonymizer {
    Wtaa { params: WtaaParams, config: WtaaConfig },
    Gaussian(GaussianParams),
    Downsample(DownsampleParams),
    Superpixel(SlicParams),
}

impl Anonymizer {
    pub fn wtaa(params: WtaaParams) -> Result<Self> {
        Ok(Anonymizer::Wtaa { config: params.config()?, params })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Ok(Anonymizer::Gaussian(GaussianParams::new(sigma)?))
    }

    pub fn downsample(factor: usize) -> Result<Self> {
        Ok(Anonymizer::Downsample(DownsampleParams::new(factor)?))
    }

    pub fn superpixel(segments: usize, compactness: f64) -> Result<Self> {
        Ok(Anonymizer::Superpixel(SlicParams::new(segments, compactness)?))
    }

    pub fn method(&self) -> Method {
        match self {
            Anonymizer::Wtaa { .. } => Method::Wtaa,
            Anonymizer::Gaussian(_) => Method::Gaussian,
            Anonymizer::Downsample(_) => Method::Downsample,
            Anonymizer::Superpixel(_) => Method::Superpixel,
        }
    }

    pub fn apply(&self, f: &Frame) -> Result<Frame> {
        match self {
            Anonymizer::Wtaa { config, .. } => anonymize_wtaa(f, config),
            Anonymizer::Gaussian(p) => gaussian_blur(f, p),
            Anonymizer::Downsample(p) => downsample_anonymize(f, p),
            Anonymizer::Superpixel(p) => superpixel_anonymize(f, p),
        }
    }
}

impl Serialize for Anonymizer {
    /// The parameter point, e.g. `{"sigma":2.0}`.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match self {
            Anonymizer::Wtaa { params, .. } => {
                m.serialize_entry("basis", &params.basis)?;
                m.serialize_entry("levels", &params.levels)?;
                m.serialize_entry("destroy_finest", &params.destroy_finest)?;
                m.serialize_entry("color_mode", &params.color_mode)?;
            }
            Anonymizer::Gaussian(p) => m.serialize_entry("sigma", &p.sigma())?,
            Anonymizer::Downsample(p) => m.serialize_entry("factor", &p.factor())?,
            Anonymizer::Superpixel(p) => {
                m.serialize_entry("segments", &p.segments)?;
                m.serialize_entry("compactness", &p.compactness)?;
            }
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub params: Anonymizer,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSweep {
    pub method: Method,
    pub points: Vec<SweepPoint>,
    /// Index into `points` of the matched operating point.
    pub matched: Option<usize>,
}

impl MethodSweep {
    pub fn matched_point(&self) -> Option<&SweepPoint> {
        self.matched.map(|i| &self.points[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub target_psnr_db: f64,
    pub match_region: String,
    pub methods: Vec<MethodSweep>,
}

impl Comparison {
    pub fn sweep(&self, method: Method) -> Option<&MethodSweep> {
        self.methods.iter().find(|m| m.method == method)
    }
}

impl Serialize for Comparison {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("target_psnr_db", &Fixed6(self.target_psnr_db))?;
        m.serialize_entry("match_region", &self.match_region)?;
        m.serialize_entry("methods", &self.methods)?;
        m.end()
    }
}

/// Index of the point whose PSNR over `region` is closest to `target`
/// (first one on ties).
pub fn closest_to_target(points: &[SweepPoint], region: &str, target: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let Some(r) = p.metrics.region(region) else { continue };
        let gap = (r.psnr_db - target).abs();
        if best.is_none_or(|(_, g)| gap < g) {
            best = Some((i, gap));
        }
    }
    best.map(|(i, _)| i)
}

/// Score one anonymizer over a frame set; the report is the per-frame mean.
pub fn evaluate(frames: &[Frame], regions: &BTreeMap<String, Region>, a: &Anonymizer) -> Result<MetricsReport> {
    let reports = frames.iter().map(|f| metrics_report(f, &a.apply(f)?, regions)).collect::<Result<Vec<_>>>()?;
    MetricsReport::mean(&reports).ok_or_else(|| Error::InvalidFrame("no frames to compare".into()))
}

/// Run `jobs` on up to `threads` scoped workers, returning results in job order.
pub(crate) fn parallel_map<T: Sync, U: Send>(jobs: &[T], threads: usize, f: impl Fn(&T) -> Result<U> + Sync) -> Result<Vec<U>> {
    let threads = threads.clamp(1, jobs.len().max(1));
    if threads == 1 {
        return jobs.iter().map(&f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<U>>> = (0..jobs.len()).map(|_| None).collect();
    let collected = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let r = f(&jobs[i]);
                collected.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Sweep every method's parameter points and mark the matched operating points.
pub fn compare(
    frames: &[Frame],
    regions: &BTreeMap<String, Region>,
    sweeps: &[Vec<Anonymizer>],
    match_region: &str,
    target_psnr_db: f64,
    threads: usize,
) -> Result<Comparison> {
    if !regions.contains_key(match_region) {
        return Err(Error::Config(format!("match region {match_region:?} is not among the named regions")));
    }
    let jobs: Vec<&Anonymizer> = sweeps.iter().flatten().collect();
    let mut reports = parallel_map(&jobs, threads, |a| evaluate(frames, regions, a))?.into_iter();
    let mut methods = Vec::with_capacity(sweeps.len());
    for sweep in sweeps {
        let Some(first) = sweep.first() else { continue };
        let points: Vec<SweepPoint> = sweep
            .iter()
            .map(|a| SweepPoint { params: a.clone(), metrics: reports.next().expect("one report per job") })
            .collect();
        let matched = closest_to_target(&points, match_region, target_psnr_db);
        methods.push(MethodSweep { method: first.method(), points, matched });
    }
    Ok(Comparison { target_psnr_db, match_region: match_region.to_string(), methods })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{near_far_scene, SceneParams, FAR_REGION, NEAR_REGION};

    fn scene() -> (Vec<Frame>, BTreeMap<String, Region>) {
        let p = SceneParams::scaled(128, 128);
        (vec![near_far_scene(&p).unwrap()], p.regions())
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("median".parse::<Method>().is_err());
    }

    #[test]
    fn method_against_itself_gives_identical_blocks() {
        let (frames, regions) = scene();
        let sweep = vec![Anonymizer::gaussian(2.0).unwrap()];
        let c = compare(&frames, &regions, &[sweep.clone(), sweep], NEAR_REGION, 20.0, 2).unwrap();
        assert_eq!(c.methods[0], c.methods[1]);
    }

    #[test]
    fn gaussian_sweep_is_monotone_in_sigma() {
        let (frames, regions) = scene();
        let sweep: Vec<_> = [2.0, 4.0, 8.0].iter().map(|&s| Anonymizer::gaussian(s).unwrap()).collect();
        let c = compare(&frames, &regions, &[sweep], NEAR_REGION, 20.0, 3).unwrap();
        let near: Vec<f64> = c.methods[0].points.iter().map(|p| p.metrics.region(NEAR_REGION).unwrap().psnr_db).collect();
        assert!(near[0] > near[1] && near[1] > near[2], "{near:?}");
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let (frames, regions) = scene();
        let sweeps = vec![
            (1..=4)
                .map(|d| {
                    Anonymizer::wtaa(WtaaParams {
                        basis: WaveletBasis::Haar,
                        levels: 4,
                        destroy_finest: d as f64,
                        color_mode: ColorMode::PerChannel,
                    })
                    .unwrap()
                })
                .collect(),
            vec![Anonymizer::superpixel(64, 0.3).unwrap(), Anonymizer::downsample(4).unwrap()],
        ];
        let one = compare(&frames, &regions, &sweeps, FAR_REGION, 20.0, 1).unwrap();
        let many = compare(&frames, &regions, &sweeps, FAR_REGION, 20.0, 5).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn closest_point_wins_first_on_ties() {
        let (frames, regions) = scene();
        let sweep =
            vec![Anonymizer::gaussian(3.0).unwrap(), Anonymizer::gaussian(3.0).unwrap(), Anonymizer::gaussian(0.5).unwrap()];
        let c = compare(&frames, &regions, &[sweep], NEAR_REGION, 0.0, 1).unwrap();
        assert_eq!(c.methods[0].matched, Some(0));
    }

    #[test]
    fn unknown_match_region() {
        let (frames, regions) = scene();
        assert!(matches!(compare(&frames, &regions, &[], "face", 20.0, 1), Err(Error::Config(_))));
    }

    #[test]
    fn params_serialize_per_method() {
        let j = |a: Anonymizer| serde_json::to_string(&a).unwrap();
        assert_eq!(j(Anonymizer::gaussian(2.5).unwrap()), r#"{"sigma":2.5}"#);
        assert_eq!(j(Anonymizer::downsample(8).unwrap()), r#"{"factor":8}"#);
        assert_eq!(j(Anonymizer::superpixel(100, 0.3).unwrap()), r#"{"segments":100,"compactness":0.3}"#);
        let w = WtaaParams { basis: WaveletBasis::Haar, levels: 4, destroy_finest: 2.0, color_mode: ColorMode::PerChannel };
        assert_eq!(
            j(Anonymizer::wtaa(w).unwrap()),
            r#"{"basis":"haar","levels":4,"destroy_finest":2.0,"color_mode":"per-channel"}"#
        );
    }
}
