//! Run configuration: JSON config files merged with command-line flags.
//!
//! A config file is a flat JSON object. Each subcommand accepts its own set of
//! keys and rejects everything else, so a typo never silently falls back to a
//! default. Flags given on the command line override config values.
//!
//! Method parameters are kept as text until the method is known. A single
//! value (`4`), a comma list (`2,4,8`) and an inclusive range (`0.5:4:0.5`)
//! all use the same syntax on the command line; in JSON they may be written
//! as a number, an array or one of those strings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

use super::CliError;
use crate::compare::{Anonymizer, Method, WtaaParams};
use crate::dwt::WaveletBasis;
use crate::frame::Region;
use crate::scene::SceneParams;
use crate::wtaa::ColorMode;

/// Keys every subcommand understands.
const COMMON_KEYS: &[&str] = &["threads"];
const METHOD_KEYS: &[&str] =
    &["method", "basis", "levels", "destroy_finest", "color_mode", "sigma", "factor", "segments", "compactness"];

pub fn allowed_keys(command: &str) -> Vec<&'static str> {
    let own: &[&str] = match command {
        "anonymize" => &["input", "output", "format", "regions", "report"],
        "compare" => &["input", "output", "format", "regions", "report", "match_region", "target_psnr", "scene"],
        "synth" => &["output", "format", "width", "height", "frames", "seed", "noise", "scene"],
        "bench" => &["report", "sizes", "runs", "frames"],
        _ => &[],
    };
    let methods: &[&str] = if command == "synth" { &[] } else { METHOD_KEYS };
    COMMON_KEYS.iter().chain(own).chain(methods).copied().collect()
}

/// Values from a config file. Every field is optional; [`load`] has already
/// checked that only keys valid for the subcommand are present.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<String>,
    pub output: Option<String>,
    pub format: Option<String>,
    pub regions: Option<BTreeMap<String, Region>>,
    pub report: Option<String>,
    pub threads: Option<usize>,
    pub match_region: Option<String>,
    pub target_psnr: Option<f64>,
    pub scene: Option<SceneParams>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub frames: Option<usize>,
    pub seed: Option<u64>,
    pub noise: Option<f64>,
    pub runs: Option<usize>,
    pub sizes: Option<ParamText>,
    pub method: Option<ParamText>,
    pub basis: Option<ParamText>,
    pub levels: Option<ParamText>,
    pub destroy_finest: Option<ParamText>,
    pub color_mode: Option<ParamText>,
    pub sigma: Option<ParamText>,
    pub factor: Option<ParamText>,
    pub segments: Option<ParamText>,
    pub compactness: Option<ParamText>,
}

/// A parameter value in its textual form (`"4"`, `"2,4,8"`, `"0.5:4:0.5"`).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamText(pub String);

impl<'de> Deserialize<'de> for ParamText {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        fn scalar(v: &Value) -> Option<String> {
            match v {
                Value::Number(n) => Some(n.to_string()),
                Value::String(s) => Some(s.clone()),
                _ => None,
            }
        }
        let v = Value::deserialize(d)?;
        let text = match &v {
            Value::Array(items) => items.iter().map(scalar).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
            other => scalar(other),
        };
        text.map(ParamText).ok_or_else(|| serde::de::Error::custom(format!("expected a number, string or array, got {v}")))
    }
}

/// Inline JSON (starting with `{`) or a path to a JSON file.
fn json_text(arg: &str, what: &str) -> Result<String, CliError> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| CliError::usage(format!("cannot read {what} {arg:?}: {e}")))
}

/// Parse a `--config` argument for `command`, rejecting keys the command does not use.
pub fn load(arg: Option<&str>, command: &str) -> Result<FileConfig, CliError> {
    let Some(arg) = arg else { return Ok(FileConfig::default()) };
    let text = json_text(arg, "config")?;
    let map: Map<String, Value> =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config is not a JSON object: {e}")))?;
    let allowed = allowed_keys(command);
    if let Some(bad) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::usage(format!("unknown config key {bad:?} for {command} (allowed: {})", allowed.join(", "))));
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::usage(format!("invalid config: {e}")))
}

/// Parse a `--regions` argument: a JSON object mapping names to `{x, y, w, h}`.
pub fn load_regions(arg: &str) -> Result<BTreeMap<String, Region>, CliError> {
    let text = json_text(arg, "regions")?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid regions JSON: {e}")))
}

/// Comma-separated values, where each item may also be an inclusive `start:stop:step` range.
pub fn parse_numbers(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let bad = |detail: String| CliError::usage(format!("invalid value for {what}: {detail}"));
    let num =
        |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(format!("{s:?} is not a number")));
    let mut out = Vec::new();
    for item in text.split(',') {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step <= 0.0 || stop < start {
                    return Err(bad(format!("range {item:?} needs start <= stop and a positive step")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                if n >= 100_000 {
                    return Err(bad(format!("range {item:?} has too many points")));
                }
                // rebuild each point from the start so steps do not accumulate rounding
                out.extend((0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9));
            }
            _ => return Err(bad(format!("{item:?} is neither a number nor start:stop:step"))),
        }
    }
    Ok(out)
}

pub fn parse_counts(text: &str, what: &str) -> Result<Vec<usize>, CliError> {
    parse_numbers(text, what)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(CliError::usage(format!("invalid value for {what}: {v} is not a whole number")))
            }
        })
        .collect()
}

fn parse_words<T>(text: &str, parse: impl Fn(&str) -> crate::Result<T>) -> Result<Vec<T>, CliError> {
    text.split(',').map(|s| parse(s.trim()).map_err(|e| CliError::usage(e.to_string()))).collect()
}

pub fn parse_methods(text: &str) -> Result<Vec<Method>, CliError> {
    let methods = parse_words(text, |s| s.parse::<Method>())?;
    for (i, m) in methods.iter().enumerate() {
        if methods[..i].contains(m) {
            return Err(CliError::usage(format!("method {m} is listed twice")));
        }
    }
    Ok(methods)
}

fn parse_color_mode(s: &str) -> crate::Result<ColorMode> {
    match s {
        "per-channel" => Ok(ColorMode::PerChannel),
        "luma-chroma" => Ok(ColorMode::LumaChroma),
        _ => Err(crate::Error::Config(format!("unknown color mode {s:?} (expected per-channel or luma-chroma)"))),
    }
}

/// Method parameters after merging flags over config, still textual.
#[derive(Debug, Clone, Default)]
pub struct MethodParams {
    pub basis: Option<String>,
    pub levels: Option<String>,
    pub destroy_finest: Option<String>,
    pub color_mode: Option<String>,
    pub sigma: Option<String>,
    pub factor: Option<String>,
    pub segments: Option<String>,
    pub compactness: Option<String>,
}

/// Default parameter values for one method, as text.
pub struct Defaults {
    pub basis: &'static str,
    pub levels: &'static str,
    pub destroy_finest: &'static str,
    pub color_mode: &'static str,
    pub sigma: &'static str,
    pub factor: &'static str,
    pub segments: &'static str,
    pub compactness: &'static str,
}

/// Defaults for a single anonymization run.
pub const SINGLE_DEFAULTS: Defaults = Defaults {
    basis: "cdf97",
    levels: "4",
    destroy_finest: "2",
    color_mode: "per-channel",
    sigma: "4",
    factor: "8",
    segments: "200",
    compactness: "0.3",
};

/// Default sweep grids for `compare`.
pub const SWEEP_DEFAULTS: Defaults = Defaults {
    basis: "cdf97",
    levels: "4",
    destroy_finest: "0:4:0.125",
    color_mode: "per-channel",
    sigma: "0.5:10:0.25",
    factor: "2,3,4,5,6,8,10,12,16",
    segments: "25,50,75,100,150,200,300,400,600,800,1200,1600",
    compactness: "0.3",
};

impl MethodParams {
    fn given(&self) -> [(&'static str, Method, bool); 8] {
        [
            ("--basis", Method::Wtaa, self.basis.is_some()),
            ("--levels", Method::Wtaa, self.levels.is_some()),
            ("--destroy-finest", Method::Wtaa, self.destroy_finest.is_some()),
            ("--color-mode", Method::Wtaa, self.color_mode.is_some()),
            ("--sigma", Method::Gaussian, self.sigma.is_some()),
            ("--factor", Method::Downsample, self.factor.is_some()),
            ("--segments", Method::Superpixel, self.segments.is_some()),
            ("--compactness", Method::Superpixel, self.compactness.is_some()),
        ]
    }

    /// Every given parameter must belong to one of `methods`.
    pub fn check_applies(&self, methods: &[Method]) -> Result<(), CliError> {
        match self.given().into_iter().find(|(_, m, set)| *set && !methods.contains(m)) {
            Some((flag, m, _)) => Err(CliError::usage(format!(
                "{flag} is a {m} parameter but the selected method(s) are {}",
                methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
            ))),
            None => Ok(()),
        }
    }

    /// Every parameter point for `method`: the cartesian product of its value lists.
    pub fn points(&self, method: Method, d: &Defaults) -> Result<Vec<Anonymizer>, CliError> {
        let get = |v: &Option<String>, default: &'static str| v.clone().unwrap_or_else(|| default.to_string());
        let build = |r: crate::Result<Anonymizer>| r.map_err(|e| CliError::usage(e.to_string()));
        let mut out = Vec::new();
        match method {
            Method::Wtaa => {
                let bases = parse_words(&get(&self.basis, d.basis), |s| s.parse::<WaveletBasis>())?;
                let levels = parse_counts(&get(&self.levels, d.levels), "--levels")?;
                let depths = parse_numbers(&get(&self.destroy_finest, d.destroy_finest), "--destroy-finest")?;
                let modes = parse_words(&get(&self.color_mode, d.color_mode), parse_color_mode)?;
                for &basis in &bases {
                    for &levels in &levels {
                        for &color_mode in &modes {
                            for &destroy_finest in &depths {
                                out.push(build(Anonymizer::wtaa(WtaaParams { basis, levels, destroy_finest, color_mode }))?);
                            }
                        }
                    }
                }
            }
            Method::Gaussian => {
                for sigma in parse_numbers(&get(&self.sigma, d.sigma), "--sigma")? {
                    out.push(build(Anonymizer::gaussian(sigma))?);
                }
            }
            Method::Downsample => {
                for factor in parse_counts(&get(&self.factor, d.factor), "--factor")? {
                    out.push(build(Anonymizer::downsample(factor))?);
                }
            }
            Method::Superpixel => {
                let segments = parse_counts(&get(&self.segments, d.segments), "--segments")?;
                let compactness = parse_numbers(&get(&self.compactness, d.compactness), "--compactness")?;
                for &m in &compactness {
                    for &k in &segments {
                        out.push(build(Anonymizer::superpixel(k, m))?);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Exactly one parameter point for `method`.
    pub fn single(&self, method: Method, d: &Defaults) -> Result<Anonymizer, CliError> {
        let mut points = self.points(method, d)?;
        if points.len() != 1 {
            return Err(CliError::usage(format!(
                "{method} needs a single value per parameter here, got {} combinations",
                points.len()
            )));
        }
        Ok(points.remove(0))
    }
}

/// Merge a flag over a config value.
pub fn pick<T>(flag: Option<T>, config: Option<T>) -> Option<T> {
    flag.or(config)
}

pub fn pick_text(flag: Option<String>, config: Option<ParamText>) -> Option<String> {
    flag.or(config.map(|t| t.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_lists_and_ranges() {
        assert_eq!(parse_numbers("4", "x").unwrap(), vec![4.0]);
        assert_eq!(parse_numbers("2, 4,8", "x").unwrap(), vec![2.0, 4.0, 8.0]);
        assert_eq!(parse_numbers("0.5:2:0.5", "x").unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_numbers("0:1:0.1", "x").unwrap().len(), 11);
        assert_eq!(parse_numbers("1,3:4:1", "x").unwrap(), vec![1.0, 3.0, 4.0]);
        for bad in ["", "a", "1:2", "2:1:1", "0:1:0", "1:2:3:4", "nan", "0:1e9:1e-9"] {
            assert!(parse_numbers(bad, "x").is_err(), "{bad:?}");
        }
        assert_eq!(parse_counts("2:8:2", "x").unwrap(), vec![2, 4, 6, 8]);
        assert!(parse_counts("2.5", "x").is_err());
        assert!(parse_counts("-1", "x").is_err());
    }

    #[test]
    fn config_keys_are_checked_per_command() {
        let c = load(Some(r#"{"method":"gaussian","sigma":3,"threads":2}"#), "anonymize").unwrap();
        assert_eq!(c.sigma, Some(ParamText("3".into())));
        assert_eq!(c.threads, Some(2));
        let e = load(Some(r#"{"sigma":3,"runs":4}"#), "anonymize").unwrap_err();
        assert_eq!(e.code, 1);
        assert!(e.message.contains("runs"), "{}", e.message);
        assert!(load(Some(r#"{"sigma":3}"#), "synth").is_err());
        assert!(load(Some(r#"{"threads":"many"}"#), "bench").is_err());
        assert!(load(Some("[1, 2]"), "bench").is_err());
        let c = load(Some(r#"{"sigma":[2,4,8],"segments":"100,200"}"#), "compare").unwrap();
        assert_eq!(c.sigma, Some(ParamText("2,4,8".into())));
        assert_eq!(c.segments, Some(ParamText("100,200".into())));
    }

    #[test]
    fn scene_config_rejects_unknown_fields() {
        assert!(load(Some(r#"{"scene":{"width":256,"height":256}}"#), "compare").is_ok());
        assert!(load(Some(r#"{"scene":{"widht":256}}"#), "compare").is_err());
    }

    #[test]
    fn parameters_must_match_the_method() {
        let p = MethodParams { sigma: Some("2".into()), ..Default::default() };
        assert!(p.check_applies(&[Method::Gaussian]).is_ok());
        assert_eq!(p.check_applies(&[Method::Wtaa]).unwrap_err().code, 1);
        let p = MethodParams { levels: Some("3".into()), ..Default::default() };
        assert!(p.check_applies(&[Method::Gaussian, Method::Wtaa]).is_ok());
    }

    #[test]
    fn sweep_points_are_a_product() {
        let p = MethodParams { basis: Some("haar,cdf97".into()), destroy_finest: Some("1:3:1".into()), ..Default::default() };
        assert_eq!(p.points(Method::Wtaa, &SINGLE_DEFAULTS).unwrap().len(), 6);
        assert_eq!(p.points(Method::Superpixel, &SWEEP_DEFAULTS).unwrap().len(), 12);
        assert!(p.single(Method::Wtaa, &SINGLE_DEFAULTS).is_err());
        let one = MethodParams::default().single(Method::Gaussian, &SINGLE_DEFAULTS).unwrap();
        assert_eq!(serde_json::to_string(&one).unwrap(), r#"{"sigma":4.0}"#);
    }

    #[test]
    fn invalid_parameter_values_are_usage_errors() {
        for p in [
            MethodParams { sigma: Some("0".into()), ..Default::default() },
            MethodParams { factor: Some("1".into()), ..Default::default() },
            MethodParams { segments: Some("1".into()), ..Default::default() },
            MethodParams { basis: Some("sym8".into()), ..Default::default() },
            MethodParams { destroy_finest: Some("5".into()), ..Default::default() },
            MethodParams { color_mode: Some("lab".into()), ..Default::default() },
        ] {
            let errs: Vec<_> = Method::ALL.iter().filter_map(|&m| p.single(m, &SINGLE_DEFAULTS).err()).collect();
            assert_eq!(errs.len(), 1, "{p:?}");
            assert_eq!(errs[0].code, 1);
        }
    }

    #[test]
    fn regions_inline_or_file() {
        let r = load_regions(r#"{"face":{"x":1,"y":2,"w":3,"h":4}}"#).unwrap();
        assert_eq!(r["face"], Region::new(1, 2, 3, 4));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        std::fs::write(&path, r#"{"a":{"x":0,"y":0,"w":1,"h":1}}"#).unwrap();
        assert_eq!(load_regions(path.to_str().unwrap()).unwrap().len(), 1);
        assert!(load_regions(r#"{"a":{"x":0,"y":0,"w":1}}"#).is_err());
        assert!(load_regions("/no/such/file.json").is_err());
    }
}
