use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use pcore::cli::{error_code, run, Cli, Output};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match run(&cli, &argv) {
        Ok(out) => {
            let code = out.code();
            let text = match out {
                Output::Report(r, _) => r.to_json(),
                Output::Text(t, _) => t,
            };
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    };
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
