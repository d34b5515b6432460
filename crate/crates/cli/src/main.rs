use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use nldist::commands::{self, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Renders help/version at exit 0 and usage errors at exit 2.
        Err(e) => e.exit(),
    };
    let result = commands::configure_threads().and_then(|()| {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        execute_flushed(cli, &mut out)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // Downstream closing the pipe (`nldist ... | head`) is not an error.
        Err(nldist::CliError::Pipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nldist: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn execute_flushed(cli: Cli, out: &mut dyn Write) -> Result<(), nldist::CliError> {
    commands::execute(cli, out)?;
    out.flush()?;
    Ok(())
}
