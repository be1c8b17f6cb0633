use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(wavescrub::cli::run(std::env::args_os()))
}
