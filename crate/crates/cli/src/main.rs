use std::io::Write;

use clap::Parser;
use gpn_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.report.stdout.as_bytes());
            for path in &outcome.written {
                eprintln!("wrote {}", path.display());
            }
        }
        Err(e) => {
            eprintln!("gpn: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
