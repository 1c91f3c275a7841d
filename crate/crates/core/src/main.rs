use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(moment_eval::cli::run(std::env::args_os()))
}
