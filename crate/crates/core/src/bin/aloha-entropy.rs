use std::process::ExitCode;

use aloha_entropy::experiment::{fail, run_cli, workers_from_env};

fn main() -> ExitCode {
    let code = match workers_from_env() {
        Ok(workers) => run_cli(std::env::args_os(), workers),
        Err(e) => fail(&e),
    };
    ExitCode::from(code as u8)
}
