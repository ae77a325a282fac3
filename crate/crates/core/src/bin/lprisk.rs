use std::process::ExitCode;

fn main() -> ExitCode {
    lprisk::cli::main_with_args(std::env::args_os())
}
