use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match nlqc_cli::Cli::try_parse() {
        Ok(cli) => nlqc_cli::run(cli),
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            ExitCode::from(code as u8)
        }
    }
}
