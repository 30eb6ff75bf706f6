use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Provenance header written into every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub argv: Vec<String>,
    /// Every option of the subcommand, defaults included.
    pub flags: Value,
    pub seeds: Vec<u64>,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new<T: Serialize>(subcommand: &str, flags: &T, seeds: Vec<u64>) -> Self {
        RunManifest {
            tool: "haar-averager",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            argv: std::env::args().skip(1).collect(),
            flags: serde_json::to_value(flags).unwrap_or(Value::Null),
            seeds,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    /// `# manifest: {...}` line placed above a CSV header row.
    pub fn csv_comment(&self) -> String {
        format!(
            "# manifest: {}\n",
            serde_json::to_string(self).expect("manifest serializes")
        )
    }
}
