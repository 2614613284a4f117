use std::process::ExitCode;

fn main() -> ExitCode {
    pdc_cli::main_from_env()
}
