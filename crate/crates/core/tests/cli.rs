//! End-to-end runs of the `wavescrub` binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wavescrub::io::{read_ppm, read_ppm_stream, write_ppm};
use wavescrub::metrics::metrics_report;
use wavescrub::scene::{near_far_scene, SceneParams};
use wavescrub::{ColorSpace, Frame, Plane, Region};

fn wavescrub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavescrub")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("invalid JSON ({e}): {}", String::from_utf8_lossy(bytes)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn noise_frame(w: usize, h: usize, seed: u64) -> Frame {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 33) % 256) as f64 / 255.0
    };
    let planes = (0..3).map(|_| Plane::from_fn(w, h, |_, _| next())).collect();
    Frame::from_planes(ColorSpace::Rgb, planes).unwrap()
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ppm");
    std::fs::write(&input, write_ppm(&noise_frame(16, 16, 1)).unwrap()).unwrap();
    let out = dir.path().join("out.ppm");
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["frobnicate"],
        vec!["anonymize", "--bogus"],
        vec!["anonymize", "--output", p(&out)],
        vec!["anonymize", "--input", p(&input), "--output", p(&out), "--method", "median"],
        vec!["anonymize", "--input", p(&input), "--output", p(&out), "--sigma", "2"],
        vec!["anonymize", "--input", p(&input), "--output", p(&out), "--threads", "0"],
        vec!["anonymize", "--input", p(&input), "--output", p(&out), "--config", r#"{"sigmaa": 1}"#],
        vec!["anonymize", "--input", p(&input), "--output", p(&out), "--config", "{not json"],
        vec!["anonymize", "--input", p(&input), "--output", p(&out), "--levels", "2,3"],
        vec!["compare", "--method", "wtaa,wtaa"],
        vec!["compare", "--input", p(&input)],
        vec!["synth", "--width", "100", "--output", p(&out)],
        vec!["bench", "--sizes", "abc"],
    ];
    for args in cases {
        let o = wavescrub(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty(), "{args:?} printed no diagnostic");
    }
    assert_eq!(code(&wavescrub(&["--help"])), 0);
    assert_eq!(code(&wavescrub(&["--version"])), 0);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.ppm");
    let missing = dir.path().join("missing.ppm");
    let truncated = dir.path().join("truncated.ppm");
    std::fs::write(&truncated, b"P6\n4 4\n255\n\x01\x02").unwrap();
    let garbage = dir.path().join("garbage.y4m");
    std::fs::write(&garbage, b"YUV4MPEG2 W-3 H2\n").unwrap();
    let empty = dir.path().join("empty.ppm");
    std::fs::write(&empty, b"").unwrap();
    for input in [&missing, &truncated, &garbage, &empty] {
        let o = wavescrub(&["anonymize", "--input", p(input), "--output", p(&out)]);
        assert_eq!(code(&o), 2, "{}: {}", input.display(), String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn processing_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tiny.ppm");
    std::fs::write(&input, write_ppm(&noise_frame(8, 8, 2)).unwrap()).unwrap();
    let out = dir.path().join("out.ppm");
    let o = wavescrub(&["anonymize", "--input", p(&input), "--output", p(&out), "--levels", "4"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let o = wavescrub(&["anonymize", "--input", p(&input), "--output", p(&out), "--method", "downsample", "--factor", "16"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn destroying_nothing_reproduces_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let frames: Vec<Frame> = (0..3).map(|i| noise_frame(40, 24, i)).collect();
    let mut bytes = Vec::new();
    for f in &frames {
        bytes.extend(write_ppm(f).unwrap());
    }
    let input = dir.path().join("in.ppm");
    std::fs::write(&input, &bytes).unwrap();
    for basis in ["haar", "db4", "cdf97"] {
        let out = dir.path().join(format!("{basis}.ppm"));
        let o = wavescrub(&[
            "anonymize",
            "--input",
            p(&input),
            "--output",
            p(&out),
            "--basis",
            basis,
            "--levels",
            "3",
            "--destroy-finest",
            "0",
            "--threads",
            "2",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let got = read_ppm_stream(&std::fs::read(&out).unwrap()).unwrap();
        assert_eq!(got.len(), frames.len());
        for (a, b) in got.iter().zip(&frames) {
            for (pa, pb) in a.channels().iter().zip(b.channels()) {
                assert!(pa.max_abs_diff(pb) <= 1e-4, "{basis}");
            }
        }
    }
}

#[test]
fn directory_output_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.y4m");
    let regions = dir.path().join("regions.json");
    let o = wavescrub(&[
        "synth",
        "--width",
        "128",
        "--height",
        "128",
        "--frames",
        "3",
        "--output",
        p(&scene),
        "--regions",
        p(&regions),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out_dir = dir.path().join("frames");
    let report = dir.path().join("report.json");
    let o = wavescrub(&[
        "anonymize",
        "--input",
        p(&scene),
        "--output",
        p(&out_dir),
        "--method",
        "gaussian",
        "--sigma",
        "2",
        "--regions",
        p(&regions),
        "--report",
        p(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<_> = {
        let mut v: Vec<_> = std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        v.sort();
        v
    };
    assert_eq!(names, ["frame_000000.ppm", "frame_000001.ppm", "frame_000002.ppm"]);
    let r = json(&std::fs::read(&report).unwrap());
    assert_eq!(r["command"], "anonymize");
    assert_eq!(r["method"], "gaussian");
    assert_eq!(r["params"]["sigma"], 2.0);
    assert_eq!((r["frames"].as_u64(), r["width"].as_u64(), r["height"].as_u64()), (Some(3), Some(128), Some(128)));
    let m = &r["metrics"];
    for key in ["psnr_db", "ssim", "edge_retention"] {
        assert!(m["global"][key].is_f64(), "{key}");
    }
    for region in ["near_figure", "far_figure", "background"] {
        assert!(m["regions"][region]["psnr_db"].is_f64(), "{region}");
    }
    assert!(m["regions"]["background"]["contrast_retention"].is_null());
    assert!(m["regions"]["near_figure"]["contrast_retention"].is_f64());

    // the directory is readable back as an input
    let again = dir.path().join("again.y4m");
    let o = wavescrub(&["anonymize", "--input", p(&out_dir), "--output", p(&again), "--destroy-finest", "0", "--levels", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ppm");
    std::fs::write(&input, write_ppm(&noise_frame(32, 32, 5)).unwrap()).unwrap();
    let config = dir.path().join("config.json");
    let out = dir.path().join("out.ppm");
    std::fs::write(
        &config,
        format!(r#"{{"input": "{}", "output": "{}", "method": "downsample", "factor": 4, "report": "-"}}"#, p(&input), p(&out)),
    )
    .unwrap();
    let o = wavescrub(&["anonymize", "--config", p(&config)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o.stdout)["params"]["factor"], 4);
    let o = wavescrub(&["anonymize", "--config", p(&config), "--factor", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o.stdout)["params"]["factor"], 8);
}

#[test]
fn synth_is_deterministic_per_seed() {
    let run = |seed: &str| {
        let o = wavescrub(&[
            "synth",
            "--frames",
            "2",
            "--noise",
            "0.05",
            "--seed",
            seed,
            "--output",
            "-",
            "--format",
            "y4m",
            "--regions",
            "/dev/null",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let a = run("7");
    assert!(a.starts_with(b"YUV4MPEG2 W256 H256"));
    assert_eq!(a, run("7"));
    assert_ne!(a, run("8"));

    let o = wavescrub(&["synth", "--output", "-"]);
    assert_eq!(code(&o), 1, "stdout output needs a --regions path");
}

#[test]
fn synth_matches_the_library_scene() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scene.ppm");
    let o = wavescrub(&["synth", "--output", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let regions: BTreeMap<String, Region> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(regions, SceneParams::default().regions());
    let got = read_ppm(&std::fs::read(&out).unwrap()).unwrap();
    let want = near_far_scene(&SceneParams::default()).unwrap();
    for (a, b) in got.channels().iter().zip(want.channels()) {
        assert!(a.max_abs_diff(b) <= 0.5 / 255.0 + 1e-12);
    }
}

#[test]
fn bench_reports_one_sample_per_run() {
    let o = wavescrub(&["bench", "--method", "wtaa,downsample", "--sizes", "128,160x128", "--runs", "1", "--frames", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o.stdout);
    assert_eq!(r["command"], "bench");
    assert_eq!((r["runs"].as_u64(), r["frames"].as_u64(), r["threads"].as_u64()), (Some(1), Some(1), Some(1)));
    let results = r["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    for res in results {
        let samples = res["samples_ms"].as_array().unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(res["median_ms"], samples[0]);
        assert_eq!(res["p95_ms"], samples[0]);
        assert!(samples[0].as_f64().unwrap() >= 0.0);
    }
    // grouped by size, then method
    let keys: Vec<_> = results.iter().map(|r| (r["width"].as_u64().unwrap(), r["method"].as_str().unwrap())).collect();
    assert_eq!(keys, [(128, "wtaa"), (128, "downsample"), (160, "wtaa"), (160, "downsample")]);
}

fn compare_report(args: &[&str]) -> Value {
    let o = wavescrub(args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    json(&o.stdout)
}

#[test]
fn compare_is_reproducible_and_well_formed() {
    let args = ["compare", "--method", "wtaa,downsample", "--basis", "haar", "--destroy-finest", "0:3:1", "--factor", "2,4,8"];
    let a = wavescrub(&args);
    let b = wavescrub(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a.stdout);
    assert_eq!(r["command"], "compare");
    assert_eq!(r["match_region"], "near_figure");
    assert_eq!(r["target_psnr_db"], 20.0);
    let methods = r["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 2);
    assert_eq!(methods[0]["points"].as_array().unwrap().len(), 4);
    assert_eq!(methods[1]["points"].as_array().unwrap().len(), 3);
    for m in methods {
        assert!(m["matched"].is_u64(), "{m}");
    }
    // destroying nothing is lossless; destroying the finest three Haar levels
    // equals 8x8 block averaging
    let wtaa = &methods[0]["points"];
    let down = &methods[1]["points"];
    assert_eq!(wtaa[0]["metrics"]["global"]["psnr_db"], 99.0);
    assert_eq!(wtaa[3]["metrics"], down[2]["metrics"]);
}

#[test]
fn compare_agrees_with_anonymize_output() {
    // Anonymize to 8-bit PPM, score that file with the library, and check the
    // figures against the compare sweep at the same operating point.
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.ppm");
    let regions_path = dir.path().join("regions.json");
    assert_eq!(code(&wavescrub(&["synth", "--output", p(&scene), "--regions", p(&regions_path)])), 0);
    let cases = [
        ("wtaa", vec!["--basis", "haar", "--destroy-finest", "2"]),
        ("gaussian", vec!["--sigma", "1.75"]),
        ("superpixel", vec!["--segments", "100"]),
    ];
    let regions: BTreeMap<String, Region> = serde_json::from_slice(&std::fs::read(&regions_path).unwrap()).unwrap();
    let orig = read_ppm(&std::fs::read(&scene).unwrap()).unwrap();
    for (method, params) in cases {
        let out = dir.path().join(format!("{method}.ppm"));
        let mut args = vec!["anonymize", "--input", p(&scene), "--output", p(&out), "--method", method];
        args.extend(&params);
        assert_eq!(code(&wavescrub(&args)), 0);
        let anon = read_ppm(&std::fs::read(&out).unwrap()).unwrap();
        let ours = metrics_report(&orig, &anon, &regions).unwrap();

        let mut args = vec!["compare", "--input", p(&scene), "--regions", p(&regions_path), "--method", method];
        args.extend(&params);
        let r = compare_report(&args);
        let theirs = &r["methods"][0]["points"][0]["metrics"];
        let near = ours.region("near_figure").unwrap();
        let far = ours.region("far_figure").unwrap();
        let close = |a: f64, b: &Value, tol: f64| (a - b.as_f64().unwrap()).abs() <= tol;
        assert!(close(ours.global.psnr_db, &theirs["global"]["psnr_db"], 0.5), "{method}");
        assert!(close(ours.global.ssim, &theirs["global"]["ssim"], 0.02), "{method}");
        assert!(close(near.psnr_db, &theirs["regions"]["near_figure"]["psnr_db"], 0.5), "{method}");
        assert!(close(near.ssim, &theirs["regions"]["near_figure"]["ssim"], 0.02), "{method}");
        assert!(close(far.psnr_db, &theirs["regions"]["far_figure"]["psnr_db"], 0.5), "{method}");
        assert!(close(far.ssim, &theirs["regions"]["far_figure"]["ssim"], 0.02), "{method}");
    }
}

#[test]
fn compare_writes_matched_frames() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("matched");
    let report = dir.path().join("report.json");
    let o = wavescrub(&[
        "compare",
        "--method",
        "downsample,gaussian",
        "--factor",
        "2,4,8",
        "--sigma",
        "1,2",
        "--output",
        p(&out),
        "--report",
        p(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let r = json(&std::fs::read(&report).unwrap());
    let frames = read_ppm_stream(&std::fs::read(out.join("downsample.ppm")).unwrap()).unwrap();
    assert_eq!(frames.len(), 1);
    assert_eq!(frames[0].dims(), (256, 256));
    assert!(out.join("gaussian.ppm").is_file());
    let m = r["methods"][0]["matched"].as_u64().unwrap() as usize;
    assert_eq!(r["methods"][0]["points"][m]["params"]["factor"], 4);
}
