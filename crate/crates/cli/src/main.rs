use std::process::ExitCode;

fn main() -> ExitCode {
    rankdiff_cli::run_cli(std::env::args_os())
}
