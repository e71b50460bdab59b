use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use horoconv::cli::{run, Cli};

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    let to_stdout = cli.out.is_none();
    let outcome = run(cli);
    if to_stdout {
        if let Some(report) = &outcome.report {
            let _ = std::io::stdout().write_all(report.as_bytes());
        }
    }
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(outcome.code as u8)
}
