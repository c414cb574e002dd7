use std::process::ExitCode;

use clap::Parser;
use dicke_lab::{run, Cli, CliError, RunConfig};

/// Sizes the global rayon pool from DICKE_LAB_THREADS.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DICKE_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DICKE_LAB_THREADS must be a positive integer, got `{raw}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| RunConfig::load(cli.command, &cli.flags)).and_then(|cfg| run(&cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dicke-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
