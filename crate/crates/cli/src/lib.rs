//! Command-line front end: TOML run configs in, manifest and CSV files out.

pub mod commands;
pub mod config;

use serde::Serialize;

/// Error record printed to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub kind: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn from_error(e: &anyhow::Error) -> Self {
        let kind = e
            .chain()
            .find_map(|c| c.downcast_ref::<rdr_core::Error>())
            .map_or_else(|| if e.to_string().starts_with("config") { "config" } else { "error" }.to_string(), |c| {
                c.kind().to_string()
            });
        let message = e.chain().map(|c| c.to_string()).collect::<Vec<_>>().join(": ");
        ErrorRecord { status: "error", kind, message }
    }
}
