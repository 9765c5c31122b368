//! Score tables.
//!
//! The basic form is `sequence_id,frame_id,track_name,value`. MAD scores
//! that depend on the document the frame was compared against use the
//! extended form `document_id,sequence_id,frame_id,track_name,value`, where
//! an empty `document_id` marks a document-independent row. Track names are
//! `mad:<detector>` (range-checked to `[0, 1]`) or `q:<quality>` (raw).

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::{fmt_f64, Dataset, Track};
use crate::error::{Error, Result};
use crate::fsutil::{content_lines, read_to_string, split_fields, write_atomic};

pub const SCORE_HEADER: &str = "sequence_id,frame_id,track_name,value";
pub const DOCUMENT_SCORE_HEADER: &str = "document_id,sequence_id,frame_id,track_name,value";

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    /// Set for MAD scores specific to one document.
    pub document: Option<String>,
    pub sequence: String,
    pub frame: String,
    pub track: Track,
    pub value: f64,
}

pub fn parse_score_table(text: &str) -> Result<Vec<ScoreRow>> {
    let mut lines = content_lines(text);
    let with_document = match lines.next() {
        Some((_, l)) if split_fields(l).join(",") == SCORE_HEADER => false,
        Some((_, l)) if split_fields(l).join(",") == DOCUMENT_SCORE_HEADER => true,
        Some((n, _)) => {
            return Err(Error::parse(
                n,
                "header",
                format!("expected `{SCORE_HEADER}` or `{DOCUMENT_SCORE_HEADER}`"),
            ))
        }
        None => return Err(Error::parse(1, "header", "empty score table")),
    };
    let width = if with_document { 5 } else { 4 };
    lines
        .map(|(n, line)| {
            let all = split_fields(line);
            if all.len() != width {
                return Err(Error::parse(
                    n,
                    "row",
                    format!("expected {width} fields, found {}", all.len()),
                ));
            }
            let (document, f) = if with_document {
                ((!all[0].is_empty()).then(|| all[0].to_string()), &all[1..])
            } else {
                (None, &all[..])
            };
            let track: Track = f[2].parse().map_err(|m: String| Error::parse(n, "track_name", m))?;
            if document.is_some() && !track.is_mad() {
                return Err(Error::parse(
                    n,
                    "document_id",
                    "quality scores are document-independent",
                ));
            }
            let value: f64 = f[3].parse().map_err(|e| Error::parse(n, "value", format!("{e}")))?;
            if !value.is_finite() {
                return Err(Error::parse(n, "value", "score must be finite"));
            }
            Ok(ScoreRow {
                document,
                sequence: f[0].to_string(),
                frame: f[1].to_string(),
                track,
                value,
            })
        })
        .collect()
}

/// Attaches score rows to their frames.
///
/// MAD values must lie in `[0, 1]`; tracks listed in `flipped_tracks` are
/// stored as `1 - value`. A (frame, track) pair may be assigned only once,
/// including across tables.
pub fn attach_scores(mut ds: Dataset, rows: &[ScoreRow]) -> Result<Dataset> {
    let mut index: HashMap<(&str, &str), (usize, usize)> = HashMap::new();
    for (si, s) in ds.sequences.iter().enumerate() {
        for (fi, f) in s.frames.iter().enumerate() {
            index.insert((s.id.as_str(), f.id.as_str()), (si, fi));
        }
    }
    let mut seen = HashSet::new();
    let mut updates = Vec::with_capacity(rows.len());
    for row in rows {
        let &(si, fi) = index
            .get(&(row.sequence.as_str(), row.frame.as_str()))
            .ok_or_else(|| Error::UnknownFrame {
                sequence: row.sequence.clone(),
                frame: row.frame.clone(),
            })?;
        let duplicate = || Error::DuplicateEntry {
            sequence: row.sequence.clone(),
            frame: row.frame.clone(),
            track: row.track.to_string(),
        };
        if let Some(doc) = &row.document {
            let subject = &ds.sequences[si].subject;
            if !ds.document(doc).is_some_and(|d| d.involves(subject)) {
                return Err(Error::ReferentialIntegrity {
                    id: format!("{doc}/{}/{}", row.sequence, row.frame),
                    reason: "score against a document that does not pair with this sequence".into(),
                });
            }
        }
        if !seen.insert((si, fi, row.document.as_deref(), &row.track)) {
            return Err(duplicate());
        }
        let frame = &ds.sequences[si].frames[fi];
        let exists = match &row.document {
            Some(d) => frame
                .document_mad_scores
                .get(d)
                .is_some_and(|m| m.contains_key(row.track.name())),
            None => frame.score(&row.track).is_some(),
        };
        if exists {
            return Err(duplicate());
        }
        let mut value = row.value;
        if let Track::Mad(name) = &row.track {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ScoreOutOfRange {
                    sequence: row.sequence.clone(),
                    frame: row.frame.clone(),
                    value,
                });
            }
            if ds.flipped_tracks.contains(name) {
                value = 1.0 - value;
            }
        }
        updates.push((si, fi, row.document.as_deref(), &row.track, value));
    }
    drop(index);
    for (si, fi, doc, track, value) in updates {
        ds.sequences[si].frames[fi]
            .slot_mut(doc, track)
            .insert(track.name().to_string(), value);
    }
    Ok(ds)
}

pub fn load_score_table(path: &Path, ds: Dataset) -> Result<Dataset> {
    let rows = parse_score_table(&read_to_string(path)?)?;
    attach_scores(ds, &rows)
}

/// Serializes every score track in sequence, frame and track order, using
/// the extended form only when document-specific scores exist. Flipped MAD
/// tracks are written back in their original polarity.
pub fn write_score_table(ds: &Dataset) -> String {
    let extended = ds
        .sequences
        .iter()
        .flat_map(|s| &s.frames)
        .any(|f| !f.document_mad_scores.is_empty());
    let mut out = String::from(if extended { DOCUMENT_SCORE_HEADER } else { SCORE_HEADER });
    out.push('\n');
    let lead = if extended { "," } else { "" };
    let mad = |name: &str, v: f64| {
        let v = if ds.flipped_tracks.contains(name) { 1.0 - v } else { v };
        fmt_f64(v)
    };
    for s in &ds.sequences {
        for f in &s.frames {
            for (name, &v) in &f.mad_scores {
                let _ = writeln!(out, "{lead}{},{},mad:{name},{}", s.id, f.id, mad(name, v));
            }
            for (doc, scores) in &f.document_mad_scores {
                for (name, &v) in scores {
                    let _ = writeln!(out, "{doc},{},{},mad:{name},{}", s.id, f.id, mad(name, v));
                }
            }
            for (name, &v) in &f.quality_scores {
                let _ = writeln!(out, "{lead}{},{},q:{name},{}", s.id, f.id, fmt_f64(v));
            }
        }
    }
    out
}

pub fn save_score_table(ds: &Dataset, path: &Path) -> Result<()> {
    write_atomic(path, write_score_table(ds).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DocumentRecord, FrameRecord, SequenceRecord};

    fn base() -> Dataset {
        Dataset {
            subjects: vec!["A".into()],
            documents: vec![DocumentRecord::bona_fide("d1", "A")],
            sequences: vec![SequenceRecord {
                id: "s1".into(),
                subject: "A".into(),
                frames: vec![FrameRecord::new("f1"), FrameRecord::new("f2")],
            }],
            ..Default::default()
        }
        .with_pairing()
    }

    fn table(rows: &str) -> Vec<ScoreRow> {
        parse_score_table(&format!("{SCORE_HEADER}\n{rows}")).unwrap()
    }

    #[test]
    fn assigns_mad_score() {
        let ds = attach_scores(base(), &table("s1,f1,mad:dfr,0.7\n")).unwrap();
        assert_eq!(ds.sequences[0].frames[0].mad_scores["dfr"], 0.7);
        assert!(ds.sequences[0].frames[1].mad_scores.is_empty());
    }

    #[test]
    fn mad_out_of_range() {
        let err = attach_scores(base(), &table("s1,f1,mad:dfr,1.5\n")).unwrap_err();
        assert!(matches!(err, Error::ScoreOutOfRange { value, .. } if value == 1.5));
    }

    #[test]
    fn quality_range_is_unchecked() {
        let ds = attach_scores(base(), &table("s1,f1,q:magface,31.2\n")).unwrap();
        assert_eq!(ds.sequences[0].frames[0].quality_scores["magface"], 31.2);
    }

    #[test]
    fn duplicate_rows() {
        let err = attach_scores(base(), &table("s1,f1,mad:dfr,0.7\ns1,f1,mad:dfr,0.6\n")).unwrap_err();
        assert!(matches!(err, Error::DuplicateEntry { .. }));
    }

    #[test]
    fn duplicate_across_tables() {
        let ds = attach_scores(base(), &table("s1,f1,mad:dfr,0.7\n")).unwrap();
        let err = attach_scores(ds, &table("s1,f1,mad:dfr,0.7\n")).unwrap_err();
        assert!(matches!(err, Error::DuplicateEntry { .. }));
    }

    #[test]
    fn unknown_frame() {
        let err = attach_scores(base(), &table("s1,f9,mad:dfr,0.7\n")).unwrap_err();
        assert!(matches!(err, Error::UnknownFrame { .. }));
    }

    #[test]
    fn flipped_track_is_inverted() {
        let mut ds = base();
        ds.flipped_tracks.insert("siamese".into());
        let ds = attach_scores(ds, &table("s1,f1,mad:siamese,0.25\n")).unwrap();
        assert_eq!(ds.sequences[0].frames[0].mad_scores["siamese"], 0.75);
        assert!(write_score_table(&ds).contains("s1,f1,mad:siamese,0.25"));
    }

    #[test]
    fn document_specific_scores() {
        let text = format!("{DOCUMENT_SCORE_HEADER}\nd1,s1,f1,mad:dfr,0.9\n,s1,f1,mad:dfr,0.2\n,s1,f1,q:illum,40\n");
        let ds = attach_scores(base(), &parse_score_table(&text).unwrap()).unwrap();
        let f = &ds.sequences[0].frames[0];
        assert_eq!(f.score_for("d1", &Track::mad("dfr")), Some(0.9));
        assert_eq!(f.score_for("other", &Track::mad("dfr")), Some(0.2));
        assert_eq!(f.score_for("d1", &Track::quality("illum")), Some(40.0));
        let again = attach_scores(
            Dataset {
                sequences: base().sequences,
                ..ds.clone()
            },
            &parse_score_table(&write_score_table(&ds)).unwrap(),
        )
        .unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn document_score_must_pair() {
        let mut ds = base();
        ds.documents.push(crate::model::DocumentRecord::bona_fide("d2", "Z"));
        let rows = parse_score_table(&format!("{DOCUMENT_SCORE_HEADER}\nd2,s1,f1,mad:dfr,0.9\n")).unwrap();
        assert!(matches!(
            attach_scores(ds, &rows),
            Err(Error::ReferentialIntegrity { .. })
        ));
        let q = parse_score_table(&format!("{DOCUMENT_SCORE_HEADER}\nd1,s1,f1,q:x,0.9\n"));
        assert!(q.is_err());
    }

    #[test]
    fn bad_header_and_value() {
        assert!(parse_score_table("seq,frame,track,value\n").is_err());
        assert!(matches!(
            parse_score_table(&format!("{SCORE_HEADER}\ns1,f1,mad:dfr,abc\n")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_score_table(&format!("{SCORE_HEADER}\ns1,f1,dfr,0.1\n")).is_err());
    }
}
