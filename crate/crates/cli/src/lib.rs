//! Command-line front end for `mdsts-core`: ingestion, configuration files,
//! synthetic corpora and report/plot emission.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 analysis error.
//! Failures print a one-line JSON record on stderr.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

use clap::Parser;

pub use commands::{run, Cli};
pub use error::CliError;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim_end().to_owned());
            eprintln!("{}", err.record());
            return err.exit_code();
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().format_timestamp(None).try_init();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}
