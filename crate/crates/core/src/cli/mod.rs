//! The `wavescrub` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 unreadable or
//! malformed input, 3 processing or output failure.

mod commands;
pub mod config;
pub mod media;
pub mod pipeline;

use std::ffi::OsString;
use std::fmt;

use clap::{Args, Parser, Subcommand};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PROCESSING: u8 = 3;

/// A failure carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    pub fn processing(message: impl Into<String>) -> Self {
        Self { code: EXIT_PROCESSING, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(name = "wavescrub", version, about = "Scale-aware video anonymization by wavelet coefficient destruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Anonymize every frame of a PPM or Y4M input
    Anonymize(AnonymizeArgs),
    /// Sweep methods over parameter ranges and match them on anonymity
    Compare(CompareArgs),
    /// Render the synthetic near/far test scene
    Synth(SynthArgs),
    /// Time methods on generated frames
    Bench(BenchArgs),
}

/// Method parameters. In `compare` each accepts a comma list or an
/// inclusive `start:stop:step` range, and the bracketed sweep grid replaces
/// the single-run default.
#[derive(Debug, Clone, Default, Args)]
pub struct MethodArgs {
    /// Wavelet basis: haar, db4 or cdf97 [default: cdf97]
    #[arg(long)]
    pub basis: Option<String>,
    /// Decomposition depth [default: 4]
    #[arg(long)]
    pub levels: Option<String>,
    /// Number of finest levels to destroy; fractions attenuate the next level [default: 2; sweep 0:4:0.125]
    #[arg(long)]
    pub destroy_finest: Option<String>,
    /// per-channel or luma-chroma [default: per-channel]
    #[arg(long)]
    pub color_mode: Option<String>,
    /// Gaussian blur sigma in pixels [default: 4; sweep 0.5:10:0.25]
    #[arg(long)]
    pub sigma: Option<String>,
    /// Downsample cell size [default: 8; sweep 2,3,4,5,6,8,10,12,16]
    #[arg(long)]
    pub factor: Option<String>,
    /// Superpixel count [default: 200; sweep 25,50,...,1600]
    #[arg(long)]
    pub segments: Option<String>,
    /// Superpixel compactness [default: 0.3]
    #[arg(long)]
    pub compactness: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AnonymizeArgs {
    /// Input Y4M or PPM stream, directory of PPM files, or - for stdin
    #[arg(long)]
    pub input: Option<String>,
    /// Output: *.y4m, *.ppm (concatenated), a directory, or - for stdout
    #[arg(long)]
    pub output: Option<String>,
    /// Input format: auto, ppm-seq or y4m [default: auto]
    #[arg(long)]
    pub format: Option<String>,
    /// wtaa, gaussian, downsample or superpixel [default: wtaa]
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub params: MethodArgs,
    /// Named regions as inline JSON or a JSON file, scored in the report
    #[arg(long)]
    pub regions: Option<String>,
    /// Write a JSON metrics report to this path (- for stdout)
    #[arg(long)]
    pub report: Option<String>,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON config (inline or path); flags override it
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CompareArgs {
    /// Input frames [default: the synthetic near/far scene]
    #[arg(long)]
    pub input: Option<String>,
    /// Directory receiving each method's frames at its matched point
    #[arg(long)]
    pub output: Option<String>,
    /// Input format: auto, ppm-seq or y4m [default: auto]
    #[arg(long)]
    pub format: Option<String>,
    /// Comma list of methods [default: all four]
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub params: MethodArgs,
    /// Named regions (required with --input)
    #[arg(long)]
    pub regions: Option<String>,
    /// Region whose PSNR selects each method's operating point [default: near_figure]
    #[arg(long)]
    pub match_region: Option<String>,
    /// PSNR target in dB for the matched operating point [default: 20]
    #[arg(long)]
    pub target_psnr: Option<f64>,
    /// Write the JSON comparison report here instead of stdout
    #[arg(long)]
    pub report: Option<String>,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON config (inline or path); flags override it
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    /// Output: *.y4m, *.ppm (concatenated), a directory, or - for stdout
    #[arg(long)]
    pub output: Option<String>,
    /// Force the output container: ppm-seq or y4m
    #[arg(long)]
    pub format: Option<String>,
    /// Even width >= 128 [default: 256]
    #[arg(long)]
    pub width: Option<usize>,
    /// Even height >= 128 [default: 256]
    #[arg(long)]
    pub height: Option<usize>,
    /// Number of frames [default: 1]
    #[arg(long)]
    pub frames: Option<usize>,
    /// Noise seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Amplitude of uniform per-sample noise added to each frame [default: 0]
    #[arg(long)]
    pub noise: Option<f64>,
    /// Write the regions JSON here [default: stdout]
    #[arg(long)]
    pub regions: Option<String>,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON config (inline or path); flags override it
    #[arg(long)]
    pub config: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    /// Comma list of methods [default: all four]
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub params: MethodArgs,
    /// Frame sizes, e.g. 128,256 or 256x192 [default: 128,256,512]
    #[arg(long)]
    pub sizes: Option<String>,
    /// Timed runs per method and size [default: 5]
    #[arg(long)]
    pub runs: Option<usize>,
    /// Frames per run [default: 4]
    #[arg(long)]
    pub frames: Option<usize>,
    /// Write the JSON timing report here instead of stdout
    #[arg(long)]
    pub report: Option<String>,
    /// Worker threads [default: 1]
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON config (inline or path); flags override it
    #[arg(long)]
    pub config: Option<String>,
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("wavescrub: {e}");
            e.code
        }
    }
}
