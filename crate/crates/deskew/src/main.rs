use std::process::ExitCode;

fn main() -> ExitCode {
    deskew::cli::main_with_args(std::env::args_os())
}
