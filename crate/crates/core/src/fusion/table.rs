//! Fused score table: `document_id,sequence_id,label,strategy,value`.

use std::fmt::Write as _;
use std::path::Path;

use super::VmadScore;
use crate::error::{Error, Result};
use crate::fsutil::{content_lines, read_to_string, split_fields, write_atomic};
use crate::model::{fmt_f64, label_str, parse_optional_label, Attempt};

pub const FUSED_HEADER: &str = "document_id,sequence_id,label,strategy,value";

pub fn write_fused_table(scores: &[VmadScore]) -> String {
    let mut out = String::from(FUSED_HEADER);
    out.push('\n');
    for s in scores {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.attempt.document,
            s.attempt.sequence,
            label_str(s.attempt.label),
            s.strategy,
            fmt_f64(s.value)
        );
    }
    out
}

pub fn save_fused_table(scores: &[VmadScore], path: &Path) -> Result<()> {
    write_atomic(path, write_fused_table(scores).as_bytes())
}

pub fn parse_fused_table(text: &str) -> Result<Vec<VmadScore>> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, l)) if split_fields(l).join(",") == FUSED_HEADER => {}
        Some((n, _)) => return Err(Error::parse(n, "header", format!("expected `{FUSED_HEADER}`"))),
        None => return Err(Error::parse(1, "header", "empty fused table")),
    }
    lines
        .map(|(n, line)| {
            let f = split_fields(line);
            if f.len() != 5 {
                return Err(Error::parse(n, "row", format!("expected 5 fields, found {}", f.len())));
            }
            let label = parse_optional_label(f[2]).map_err(|m| Error::parse(n, "label", m))?;
            let value: f64 = f[4].parse().map_err(|e| Error::parse(n, "value", format!("{e}")))?;
            if !value.is_finite() {
                return Err(Error::parse(n, "value", "score must be finite"));
            }
            Ok(VmadScore {
                attempt: Attempt {
                    document: f[0].to_string(),
                    sequence: f[1].to_string(),
                    label,
                },
                strategy: f[3].to_string(),
                value,
            })
        })
        .collect()
}

pub fn load_fused_table(path: &Path) -> Result<Vec<VmadScore>> {
    parse_fused_table(&read_to_string(path)?)
}
