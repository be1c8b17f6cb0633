use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{self, pick, pick_text, FileConfig, MethodParams, SINGLE_DEFAULTS, SWEEP_DEFAULTS};
use super::media::{is_parse_error, open_input, FrameSink, InputFormat, OutputKind};
use super::pipeline::{run_ordered, PipelineError};
use super::{AnonymizeArgs, BenchArgs, CliError, Command, CompareArgs, MethodArgs, SynthArgs};
use crate::compare::{compare, Anonymizer, Method};
use crate::error::Error;
use crate::frame::{Frame, Region};
use crate::metrics::{metrics_report, Fixed6, MetricsReport};
use crate::scene::{near_far_scene, SceneParams, NEAR_REGION};

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Anonymize(a) => anonymize(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Synth(a) => synth(a),
        Command::Bench(a) => bench(a),
    }
}

fn method_params(flags: MethodArgs, cfg: &mut FileConfig) -> MethodParams {
    MethodParams {
        basis: pick_text(flags.basis, cfg.basis.take()),
        levels: pick_text(flags.levels, cfg.levels.take()),
        destroy_finest: pick_text(flags.destroy_finest, cfg.destroy_finest.take()),
        color_mode: pick_text(flags.color_mode, cfg.color_mode.take()),
        sigma: pick_text(flags.sigma, cfg.sigma.take()),
        factor: pick_text(flags.factor, cfg.factor.take()),
        segments: pick_text(flags.segments, cfg.segments.take()),
        compactness: pick_text(flags.compactness, cfg.compactness.take()),
    }
}

fn threads_or_default(t: Option<usize>) -> Result<usize, CliError> {
    match t {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn regions_from(
    flag: Option<String>,
    cfg: Option<BTreeMap<String, Region>>,
) -> Result<Option<BTreeMap<String, Region>>, CliError> {
    match flag {
        Some(arg) => config::load_regions(&arg).map(Some),
        None => Ok(cfg),
    }
}

/// Map a pipeline failure to an exit code: unreadable input is 2, everything else 3.
fn pipeline_failure(e: PipelineError) -> CliError {
    match e {
        PipelineError::Source(e) if is_parse_error(&e) || matches!(e, Error::Io(_)) => CliError::input(format!("input: {e}")),
        PipelineError::Source(e) => CliError::processing(format!("input: {e}")),
        PipelineError::Work { index, error } => CliError::processing(format!("frame {index}: {error}")),
        PipelineError::Sink(e) => CliError::processing(format!("output: {e}")),
    }
}

fn write_json(path: Option<&str>, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::processing(format!("report: {e}")))?;
    text.push('\n');
    let result = match path {
        None | Some("-") => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|()| out.flush())
        }
        Some(p) => std::fs::write(p, text),
    };
    result.map_err(|e| CliError::processing(format!("cannot write report {}: {e}", path.unwrap_or("-"))))
}

#[derive(Serialize)]
struct AnonymizeReport<'a> {
    command: &'static str,
    method: Method,
    params: &'a Anonymizer,
    frames: usize,
    width: usize,
    height: usize,
    metrics: Option<MetricsReport>,
}

fn anonymize(args: AnonymizeArgs) -> Result<(), CliError> {
    let mut cfg = config::load(args.config.as_deref(), "anonymize")?;
    let input = pick(args.input, cfg.input.take()).ok_or_else(|| CliError::usage("--input is required"))?;
    let output = pick(args.output, cfg.output.take()).ok_or_else(|| CliError::usage("--output is required"))?;
    let format = InputFormat::parse(pick(args.format, cfg.format.take()).as_deref().unwrap_or("auto"))?;
    let method_text = pick_text(args.method, cfg.method.take()).unwrap_or_else(|| "wtaa".into());
    let method: Method = method_text.parse().map_err(|e: Error| CliError::usage(e.to_string()))?;
    let params = method_params(args.params, &mut cfg);
    params.check_applies(&[method])?;
    let anonymizer = params.single(method, &SINGLE_DEFAULTS)?;
    let regions = regions_from(args.regions, cfg.regions.take())?.unwrap_or_default();
    let report_path = pick(args.report, cfg.report.take());
    let threads = threads_or_default(pick(args.threads, cfg.threads))?;
    if output == "-" && report_path.as_deref() == Some("-") {
        return Err(CliError::usage("--output and --report cannot both be stdout"));
    }

    let source = open_input(&input, format)?;
    let kind = OutputKind::for_path(&output, source.y4m_header.is_some());
    let mut sink = FrameSink::new(&output, kind, source.y4m_header.clone());
    let want_metrics = report_path.is_some();
    let mut reports = Vec::new();
    let mut dims = (0, 0);
    let count = run_ordered(
        source.frames,
        threads,
        |_, frame| {
            let out = anonymizer.apply(&frame)?;
            let metrics = if want_metrics { Some(metrics_report(&frame, &out, &regions)?) } else { None };
            Ok((out, metrics))
        },
        |(out, metrics)| {
            dims = out.dims();
            sink.write(&out)?;
            reports.extend(metrics);
            Ok(())
        },
    )
    .map_err(pipeline_failure)?;
    if count == 0 {
        return Err(CliError::input(format!("{input}: no frames")));
    }
    sink.finish().map_err(|e| CliError::processing(format!("output: {e}")))?;

    if let Some(path) = report_path {
        let report = AnonymizeReport {
            command: "anonymize",
            method,
            params: &anonymizer,
            frames: count,
            width: dims.0,
            height: dims.1,
            metrics: MetricsReport::mean(&reports),
        };
        write_json(Some(&path), &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareReport<'a> {
    command: &'static str,
    frames: usize,
    width: usize,
    height: usize,
    #[serde(flatten)]
    comparison: &'a crate::compare::Comparison,
}

fn compare_cmd(args: CompareArgs) -> Result<(), CliError> {
    let mut cfg = config::load(args.config.as_deref(), "compare")?;
    let methods = match pick_text(args.method, cfg.method.take()) {
        Some(text) => config::parse_methods(&text)?,
        None => Method::ALL.to_vec(),
    };
    let params = method_params(args.params, &mut cfg);
    params.check_applies(&methods)?;
    let sweeps = methods.iter().map(|&m| params.points(m, &SWEEP_DEFAULTS)).collect::<Result<Vec<_>, _>>()?;
    let threads = threads_or_default(pick(args.threads, cfg.threads))?;
    let target = pick(args.target_psnr, cfg.target_psnr).unwrap_or(20.0);
    if !target.is_finite() {
        return Err(CliError::usage("--target-psnr must be finite"));
    }
    let match_region = pick(args.match_region, cfg.match_region.take()).unwrap_or_else(|| NEAR_REGION.to_string());
    let regions = regions_from(args.regions, cfg.regions.take())?;

    let (frames, regions) = match pick(args.input, cfg.input.take()) {
        Some(input) => {
            if cfg.scene.is_some() {
                return Err(CliError::usage("a scene config cannot be combined with --input"));
            }
            let regions = regions.ok_or_else(|| CliError::usage("--regions is required with --input"))?;
            let format = InputFormat::parse(pick(args.format, cfg.format.take()).as_deref().unwrap_or("auto"))?;
            let frames = open_input(&input, format)?
                .frames
                .collect::<crate::Result<Vec<_>>>()
                .map_err(|e| pipeline_failure(PipelineError::Source(e)))?;
            if frames.is_empty() {
                return Err(CliError::input(format!("{input}: no frames")));
            }
            (frames, regions)
        }
        None => {
            let scene = cfg.scene.take().unwrap_or_default();
            let frame = near_far_scene(&scene).map_err(|e| CliError::usage(format!("scene: {e}")))?;
            (vec![frame], regions.unwrap_or_else(|| scene.regions()))
        }
    };
    if !regions.contains_key(&match_region) {
        return Err(CliError::usage(format!("match region {match_region:?} is not among the named regions")));
    }
    let comparison =
        compare(&frames, &regions, &sweeps, &match_region, target, threads).map_err(|e| CliError::processing(e.to_string()))?;

    if let Some(dir) = pick(args.output, cfg.output.take()) {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::processing(format!("cannot create {dir}: {e}")))?;
        for sweep in &comparison.methods {
            let Some(point) = sweep.matched_point() else { continue };
            let path = std::path::Path::new(&dir).join(format!("{}.ppm", sweep.method));
            let mut sink = FrameSink::new(&path.to_string_lossy(), OutputKind::PpmStream, None);
            for f in &frames {
                let out = point.params.apply(f).map_err(|e| CliError::processing(e.to_string()))?;
                sink.write(&out).map_err(|e| CliError::processing(format!("output: {e}")))?;
            }
            sink.finish().map_err(|e| CliError::processing(format!("output: {e}")))?;
        }
    }

    let (width, height) = frames[0].dims();
    let report = CompareReport { command: "compare", frames: frames.len(), width, height, comparison: &comparison };
    write_json(pick(args.report, cfg.report.take()).as_deref(), &report)
}

/// Scene frame `index`, with optional uniform noise drawn from a per-frame stream.
fn synth_frame(base: &Frame, seed: u64, index: usize, noise: f64) -> Frame {
    if noise == 0.0 {
        return base.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let planes = base.channels().iter().map(|p| p.map(|v| (v + rng.gen_range(-noise..=noise)).clamp(0.0, 1.0))).collect();
    Frame::from_planes(base.colorspace(), planes).expect("same shape as the base frame")
}

fn synth(args: SynthArgs) -> Result<(), CliError> {
    let mut cfg = config::load(args.config.as_deref(), "synth")?;
    let output = pick(args.output, cfg.output.take()).ok_or_else(|| CliError::usage("--output is required"))?;
    let width = pick(args.width, cfg.width);
    let height = pick(args.height, cfg.height);
    let scene = match cfg.scene.take() {
        Some(s) if width.is_none() && height.is_none() => s,
        Some(_) => return Err(CliError::usage("give either a scene config or --width/--height, not both")),
        None => {
            let (w, h) = (width.unwrap_or(256), height.unwrap_or(256));
            if (w, h) == (256, 256) {
                SceneParams::default()
            } else {
                SceneParams::scaled(w, h)
            }
        }
    };
    let frames = pick(args.frames, cfg.frames).unwrap_or(1);
    let seed = pick(args.seed, cfg.seed).unwrap_or(0);
    let noise = pick(args.noise, cfg.noise).unwrap_or(0.0);
    if !(0.0..=1.0).contains(&noise) {
        return Err(CliError::usage("--noise must be within [0, 1]"));
    }
    if frames == 0 {
        return Err(CliError::usage("--frames must be at least 1"));
    }
    let threads = threads_or_default(pick(args.threads, cfg.threads))?;
    let kind = match pick(args.format, cfg.format.take()).as_deref() {
        None | Some("auto") => OutputKind::for_path(&output, false),
        Some("y4m") => OutputKind::Y4m,
        Some("ppm-seq") | Some("ppm") => {
            if OutputKind::for_path(&output, false) == OutputKind::PpmDir {
                OutputKind::PpmDir
            } else {
                OutputKind::PpmStream
            }
        }
        Some(other) => return Err(CliError::usage(format!("unknown format {other:?} (expected auto, ppm-seq or y4m)"))),
    };
    let regions_path = args.regions;
    if output == "-" && regions_path.is_none() {
        return Err(CliError::usage("--regions is required when frames go to stdout"));
    }

    let base = near_far_scene(&scene).map_err(|e| CliError::usage(format!("scene: {e}")))?;
    let mut sink = FrameSink::new(&output, kind, None);
    run_ordered((0..frames).map(|_| Ok(base.clone())), threads, |i, f| Ok(synth_frame(&f, seed, i, noise)), |f| sink.write(&f))
        .map_err(pipeline_failure)?;
    sink.finish().map_err(|e| CliError::processing(format!("output: {e}")))?;
    write_json(regions_path.as_deref(), &scene.regions())
}

#[derive(Serialize)]
struct BenchResult {
    method: Method,
    params: Anonymizer,
    width: usize,
    height: usize,
    samples_ms: Vec<Fixed6>,
    median_ms: Fixed6,
    p95_ms: Fixed6,
}

#[derive(Serialize)]
struct BenchReport {
    command: &'static str,
    runs: usize,
    frames: usize,
    threads: usize,
    results: Vec<BenchResult>,
}

fn parse_size(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::usage(format!("invalid size {s:?} (expected N or WxH)"));
    let (w, h) = match s.split_once(['x', 'X']) {
        Some((w, h)) => (w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    Ok((w, h))
}

/// Nearest-rank percentile of sorted samples.
pub(crate) fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub(crate) fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let mut cfg = config::load(args.config.as_deref(), "bench")?;
    let methods = match pick_text(args.method, cfg.method.take()) {
        Some(text) => config::parse_methods(&text)?,
        None => Method::ALL.to_vec(),
    };
    let params = method_params(args.params, &mut cfg);
    params.check_applies(&methods)?;
    let anonymizers = methods.iter().map(|&m| params.single(m, &SINGLE_DEFAULTS)).collect::<Result<Vec<_>, _>>()?;
    let sizes = pick_text(args.sizes, cfg.sizes.take())
        .unwrap_or_else(|| "128,256,512".into())
        .split(',')
        .map(parse_size)
        .collect::<Result<Vec<_>, _>>()?;
    let runs = pick(args.runs, cfg.runs).unwrap_or(5);
    let frame_count = pick(args.frames, cfg.frames).unwrap_or(4);
    if runs == 0 || frame_count == 0 {
        return Err(CliError::usage("--runs and --frames must be at least 1"));
    }
    let threads = pick(args.threads, cfg.threads).unwrap_or(1);
    if threads == 0 {
        return Err(CliError::usage("--threads must be at least 1"));
    }

    let mut results = Vec::new();
    for &(w, h) in &sizes {
        let scene = SceneParams::scaled(w, h);
        let base = near_far_scene(&scene).map_err(|e| CliError::usage(format!("size {w}x{h}: {e}")))?;
        let frames: Vec<Frame> = (0..frame_count).map(|i| synth_frame(&base, 0, i, 0.02)).collect();
        for a in &anonymizers {
            let mut samples = Vec::with_capacity(runs);
            for _ in 0..runs {
                let start = Instant::now();
                run_ordered(frames.iter().cloned().map(Ok), threads, |_, f| a.apply(&f), |_| Ok(())).map_err(pipeline_failure)?;
                samples.push(start.elapsed().as_secs_f64() * 1e3 / frame_count as f64);
            }
            let mut sorted = samples.clone();
            sorted.sort_by(f64::total_cmp);
            results.push(BenchResult {
                method: a.method(),
                params: a.clone(),
                width: w,
                height: h,
                samples_ms: samples.into_iter().map(Fixed6).collect(),
                median_ms: Fixed6(median(&sorted)),
                p95_ms: Fixed6(percentile(&sorted, 95.0)),
            });
        }
    }
    let report = BenchReport { command: "bench", runs, frames: frame_count, threads, results };
    write_json(pick(args.report, cfg.report.take()).as_deref(), &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(median(&s), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
        assert_eq!(percentile(&s, 95.0), 4.0);
        assert_eq!(percentile(&s, 50.0), 2.0);
        assert_eq!(percentile(&[5.0], 95.0), 5.0);
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_size("128").unwrap(), (128, 128));
        assert_eq!(parse_size("256x192").unwrap(), (256, 192));
        assert!(parse_size("big").is_err());
    }

    #[test]
    fn noise_is_per_frame_and_reproducible() {
        let base = near_far_scene(&SceneParams::scaled(128, 128)).unwrap();
        assert_eq!(synth_frame(&base, 7, 3, 0.05), synth_frame(&base, 7, 3, 0.05));
        assert_ne!(synth_frame(&base, 7, 3, 0.05), synth_frame(&base, 7, 4, 0.05));
        assert_eq!(synth_frame(&base, 7, 3, 0.0), base);
    }
}
