//! CSV emission and parsing for benchmark runs.
//!
//! Format: one `# key=value ...` header line (config echo plus code
//! version), one column-name row, then data rows. Floats are serialized
//! with 17 significant digits so parsing reproduces the in-memory record
//! exactly. LF line endings, UTF-8.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::experiment::{RunOutput, RunRow};
use crate::CliError;

pub const COLUMNS: &str = "t,fidelity,prob_s2_plus,prob_ideal,I_t";

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the whole CSV document.
pub fn render_csv(run: &RunOutput) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# {} version={}\n",
        run.config.echo(),
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(COLUMNS);
    out.push('\n');
    for row in &run.rows {
        out.push_str(&fmt_f64(row.t));
        for v in [row.fidelity, row.prob_s2_plus, row.prob_ideal, row.i_t] {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

/// Atomic write (temp file + rename).
pub fn emit_csv(path: &Path, run: &RunOutput) -> Result<(), CliError> {
    write_atomic(path, render_csv(run).as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Parses an emitted CSV document back into a run record. The header's
/// config echo is applied over defaults, so the result is sufficient to
/// rerun the experiment.
pub fn parse_csv(text: &str) -> Result<RunOutput, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Validation("empty csv".into()))?;
    let header = header
        .strip_prefix("# ")
        .ok_or_else(|| CliError::Validation("missing '# ' header line".into()))?;
    let mut config = ExperimentConfig::default();
    for pair in header.split(' ') {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("bad header entry '{pair}'")))?;
        config.apply_pair(k, v)?;
    }
    let columns = lines
        .next()
        .ok_or_else(|| CliError::Validation("missing column row".into()))?;
    if columns != COLUMNS {
        return Err(CliError::Validation(format!(
            "unexpected columns '{columns}', want '{COLUMNS}'"
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::Validation(format!(
                "row {}: expected 5 fields, got {}",
                i + 3,
                fields.len()
            )));
        }
        let mut vals = [0.0f64; 5];
        for (slot, field) in vals.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|_| CliError::Validation(format!("row {}: bad float '{field}'", i + 3)))?;
        }
        rows.push(RunRow {
            t: vals[0],
            fidelity: vals[1],
            prob_s2_plus: vals[2],
            prob_ideal: vals[3],
            i_t: vals[4],
        });
    }
    Ok(RunOutput { config, rows })
}
