//! CSV/JSON emission with embedded provenance.
//!
//! Every output file carries the fully resolved configuration and master
//! seed: the JSON document is itself a valid `--config` input, and the CSV
//! repeats the same JSON on a `#` comment line, so any result can be
//! regenerated bit-for-bit.

use crate::config::{ConfigError, OutputFormat, ProvenanceDoc};
use splitnvd::sim::{CurvePoint, SimConfig};
use std::io::Write;
use std::path::PathBuf;

pub fn curve_csv(config: &SimConfig, points: &[CurvePoint]) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(config).expect("config serializes")
    ));
    s.push_str("snr_db,trials,errors,estimate,ci_low,ci_high,flag\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.snr_db,
            p.trials,
            p.errors,
            p.estimate,
            p.ci_low,
            p.ci_high,
            if p.flagged { "low-errors" } else { "" }
        ));
    }
    s
}

pub fn curve_json(config: &SimConfig, points: &[CurvePoint]) -> String {
    let doc = ProvenanceDoc {
        config: config.clone(),
        results: points.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

/// Writes `<stem>.csv` / `<stem>.json` per the requested format and returns
/// the paths written.
pub fn write_curve(
    stem: &str,
    format: OutputFormat,
    config: &SimConfig,
    points: &[CurvePoint],
) -> Result<Vec<PathBuf>, ConfigError> {
    let mut written = Vec::new();
    if let Some(parent) = PathBuf::from(stem).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| ConfigError(format!("cannot create `{}`: {e}", parent.display())))?;
        }
    }
    let mut emit = |ext: &str, text: String| -> Result<(), ConfigError> {
        let path = PathBuf::from(format!("{stem}.{ext}"));
        let mut f = std::fs::File::create(&path)
            .map_err(|e| ConfigError(format!("cannot write `{}`: {e}", path.display())))?;
        f.write_all(text.as_bytes())
            .map_err(|e| ConfigError(format!("cannot write `{}`: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        emit("csv", curve_csv(config, points))?;
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        emit("json", curve_json(config, points))?;
    }
    Ok(written)
}

/// Serializes an arbitrary report (analysis output) to `<stem>.json`.
pub fn write_report<T: serde::Serialize>(stem: &str, report: &T) -> Result<PathBuf, ConfigError> {
    let path = PathBuf::from(format!("{stem}.json"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| ConfigError(format!("cannot create `{}`: {e}", parent.display())))?;
        }
    }
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(&path, text)
        .map_err(|e| ConfigError(format!("cannot write `{}`: {e}", path.display())))?;
    Ok(path)
}
