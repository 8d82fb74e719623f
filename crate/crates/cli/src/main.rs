use std::io::Write;
use std::process::ExitCode;

use alphaconc_cli::{execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let code = match execute(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    let _ = std::io::stdout().write_all(out.as_bytes());
    ExitCode::from(code as u8)
}
