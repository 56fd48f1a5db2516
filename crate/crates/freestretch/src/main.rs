use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use freestretch::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match freestretch::run(&cli) {
        Ok((text, code)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
