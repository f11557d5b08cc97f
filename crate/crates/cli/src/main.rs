use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(misobench::run(std::env::args_os()))
}
