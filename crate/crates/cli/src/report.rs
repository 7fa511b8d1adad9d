use crate::config::{CommandConfig, Format};
use crate::run::CliError;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub config: CommandConfig,
    pub results: Value,
    /// Wall-clock seconds spent in the command.
    pub duration_s: f64,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        normflow::io::to_json_string(self).expect("report serializes")
    }
}

/// Rows of a CSV view of the results.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(header: I) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

pub(crate) fn emit(config: &CommandConfig, doc: &ReportDocument, table: &Table) -> Result<(), CliError> {
    let text = match config.format {
        Format::Json => doc.to_json() + "\n",
        Format::Csv => table.to_csv(),
    };
    match &config.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::input(format!("cannot write to stdout: {e}")))
        }
    }
}
