use std::process::ExitCode;

fn main() -> ExitCode {
    fmatch::cli::main_with_args(std::env::args_os())
}
