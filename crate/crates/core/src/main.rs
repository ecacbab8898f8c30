use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use grpcrypt::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut buf = Vec::new();
    let result = run(cli, &mut buf);
    // a closed pipe (e.g. `| head`) is not an error
    let _ = io::stdout().lock().write_all(&buf);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
