use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::init();
    let code = fcnf_failure::cli::run(std::env::args_os());
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
