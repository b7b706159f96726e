use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(g2p::cli::run(std::env::args_os()))
}
