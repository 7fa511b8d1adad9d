//! Command-line front end of `normflow`.
//!
//! Every run is described by a [`CommandConfig`] that is echoed into the
//! [`ReportDocument`]; feeding the echo back through `--config` repeats the run.

pub mod config;
pub mod report;
pub mod run;

pub use config::{Cli, Command, CommandConfig, Format, ScenarioKind};
pub use report::{ReportDocument, Table};
pub use run::{execute, CliError, Outcome};

use clap::Parser;
use std::ffi::OsString;
use std::time::Instant;

pub const TOOL: &str = "normflow";

/// Runs `config` and returns the finished report with its CSV view.
pub fn run(config: &CommandConfig) -> Result<(ReportDocument, Table, String), CliError> {
    let start = Instant::now();
    let outcome = execute(config)?;
    let doc = ReportDocument {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        results: outcome.results,
        duration_s: start.elapsed().as_secs_f64(),
    };
    Ok((doc, outcome.table, outcome.summary))
}

/// Merges `--config` with explicit command-line options; flags win.
pub fn resolve(cli: Cli) -> Result<CommandConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            // a whole report is accepted as well as a bare config
            let value = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value::<CommandConfig>(value)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        }
        None => CommandConfig {
            command: cli.command.clone().ok_or_else(|| CliError::input("no subcommand given (see --help)"))?,
            format: Format::Json,
            out: None,
            seed: 0,
        },
    };
    if cli.config.is_some() {
        if let Some(c) = cli.command {
            config.command = c;
        }
    }
    if let Some(f) = cli.format {
        config.format = f;
    }
    if let Some(o) = cli.out {
        config.out = Some(o);
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    Ok(config)
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(cli).and_then(|config| {
        let (doc, table, summary) = run(&config)?;
        report::emit(&config, &doc, &table)?;
        eprintln!("{summary}");
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("normflow: {e}");
            e.exit_code()
        }
    }
}
