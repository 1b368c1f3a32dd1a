use std::process::ExitCode;

fn main() -> ExitCode {
    contextuality::cli::main_from_env()
}
