//! Frame sources and sinks for the command-line tool.
//!
//! Inputs are a Y4M stream, a concatenated PPM stream, or a directory of
//! `*.ppm` files read in file-name order; `-` is standard input. Outputs are
//! chosen by path: `*.y4m` writes Y4M, `*.ppm` a concatenated PPM stream,
//! `-` standard output (in the input's container), and anything else a
//! directory of numbered PPM files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::CliError;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::io::{read_ppm, read_ppm_from, write_ppm_to, Chroma, Y4mHeader, Y4mReader, Y4mWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Auto,
    PpmSeq,
    Y4m,
}

impl InputFormat {
    pub fn parse(s: &str) -> std::result::Result<Self, CliError> {
        match s {
            "auto" => Ok(InputFormat::Auto),
            "ppm-seq" | "ppm" => Ok(InputFormat::PpmSeq),
            "y4m" => Ok(InputFormat::Y4m),
            _ => Err(CliError::usage(format!("unknown format {s:?} (expected auto, ppm-seq or y4m)"))),
        }
    }
}

/// An open input: a lazy frame iterator plus the Y4M header when there is one.
pub struct Input {
    pub frames: Box<dyn Iterator<Item = Result<Frame>>>,
    pub y4m_header: Option<Y4mHeader>,
}

struct PpmStream<R> {
    inner: R,
    done: bool,
}

impl<R: BufRead> Iterator for PpmStream<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let r = read_ppm_from(&mut self.inner).transpose();
        if !matches!(r, Some(Ok(_))) {
            self.done = true;
        }
        r
    }
}

fn ppm_dir_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm")))
        .collect();
    files.sort();
    Ok(files)
}

pub fn open_input(path: &str, format: InputFormat) -> std::result::Result<Input, CliError> {
    let p = Path::new(path);
    if path != "-" && p.is_dir() {
        if format == InputFormat::Y4m {
            return Err(CliError::usage(format!("{path} is a directory, but --format y4m expects a stream")));
        }
        let files = ppm_dir_files(p).map_err(|e| CliError::input(format!("cannot list {path}: {e}")))?;
        let frames = files.into_iter().map(|f| {
            let bytes = std::fs::read(&f)?;
            read_ppm(&bytes)
        });
        return Ok(Input { frames: Box::new(frames), y4m_header: None });
    }
    let mut reader: Box<dyn BufRead> = if path == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        let file = File::open(p).map_err(|e| CliError::input(format!("cannot open {path}: {e}")))?;
        Box::new(BufReader::with_capacity(1 << 20, file))
    };
    let format = match format {
        InputFormat::Auto => {
            let head = reader.fill_buf().map_err(|e| CliError::input(format!("cannot read {path}: {e}")))?;
            if head.first() == Some(&b'Y') {
                InputFormat::Y4m
            } else {
                InputFormat::PpmSeq
            }
        }
        f => f,
    };
    match format {
        InputFormat::Y4m => {
            let y4m = Y4mReader::new(reader).map_err(|e| CliError::input(format!("{path}: {e}")))?;
            let header = y4m.header().clone();
            Ok(Input { frames: Box::new(y4m), y4m_header: Some(header) })
        }
        _ => Ok(Input { frames: Box::new(PpmStream { inner: reader, done: false }), y4m_header: None }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Y4m,
    PpmStream,
    PpmDir,
}

impl OutputKind {
    /// Pick the container from the output path; `-` follows the input.
    pub fn for_path(path: &str, input_is_y4m: bool) -> Self {
        let lower = path.to_ascii_lowercase();
        if path == "-" {
            if input_is_y4m {
                OutputKind::Y4m
            } else {
                OutputKind::PpmStream
            }
        } else if lower.ends_with(".y4m") {
            OutputKind::Y4m
        } else if lower.ends_with(".ppm") {
            OutputKind::PpmStream
        } else {
            OutputKind::PpmDir
        }
    }
}

enum SinkState {
    Pending,
    Y4m(Y4mWriter<Box<dyn Write>>),
    Stream(Box<dyn Write>),
    Dir(PathBuf),
}

/// Ordered frame writer. Files are created when the first frame arrives.
pub struct FrameSink {
    path: String,
    kind: OutputKind,
    y4m_template: Option<Y4mHeader>,
    state: SinkState,
    written: usize,
}

/// Frame rate used when a Y4M output has no Y4M input to copy it from.
pub const DEFAULT_FPS: (u32, u32) = (25, 1);

impl FrameSink {
    pub fn new(path: &str, kind: OutputKind, y4m_template: Option<Y4mHeader>) -> Self {
        Self { path: path.to_string(), kind, y4m_template, state: SinkState::Pending, written: 0 }
    }

    fn open_stream(&self) -> Result<Box<dyn Write>> {
        Ok(if self.path == "-" {
            Box::new(BufWriter::new(io::stdout()))
        } else {
            Box::new(BufWriter::new(File::create(&self.path)?))
        })
    }

    fn open(&mut self, first: &Frame) -> Result<()> {
        self.state = match self.kind {
            OutputKind::Y4m => {
                let (w, h) = first.dims();
                let header = match &self.y4m_template {
                    Some(t) if (t.width, t.height) == (w, h) => t.clone(),
                    _ => Y4mHeader::new(w, h, DEFAULT_FPS, Chroma::C444)?,
                };
                SinkState::Y4m(Y4mWriter::new(self.open_stream()?, header)?)
            }
            OutputKind::PpmStream => SinkState::Stream(self.open_stream()?),
            OutputKind::PpmDir => {
                std::fs::create_dir_all(&self.path)?;
                SinkState::Dir(PathBuf::from(&self.path))
            }
        };
        Ok(())
    }

    pub fn write(&mut self, f: &Frame) -> Result<()> {
        if matches!(self.state, SinkState::Pending) {
            self.open(f)?;
        }
        match &mut self.state {
            SinkState::Y4m(w) => w.write_frame(f)?,
            SinkState::Stream(w) => write_ppm_to(w, f)?,
            SinkState::Dir(dir) => {
                let mut out = BufWriter::new(File::create(dir.join(frame_file_name(self.written)))?);
                write_ppm_to(&mut out, f)?;
                out.flush()?;
            }
            SinkState::Pending => unreachable!("opened above"),
        }
        self.written += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<usize> {
        match self.state {
            SinkState::Y4m(w) => {
                w.finish()?;
            }
            SinkState::Stream(mut w) => w.flush()?,
            SinkState::Dir(_) | SinkState::Pending => {}
        }
        Ok(self.written)
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.ppm")
}

/// Whether a codec error came from malformed input (as opposed to a failed write).
pub fn is_parse_error(e: &Error) -> bool {
    matches!(
        e,
        Error::BadMagic
            | Error::MalformedHeader(_)
            | Error::TruncatedPayload { .. }
            | Error::UnsupportedMaxval(_)
            | Error::DimensionsTooLarge { .. }
            | Error::BadSignature
            | Error::HeaderParamMissing(_)
            | Error::FrameMarkerMissing { .. }
            | Error::ShortFrame { .. }
            | Error::UnsupportedChroma(_)
    )
}
