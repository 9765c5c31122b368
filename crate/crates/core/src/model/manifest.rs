//! Manifest text format.
//!
//! ```text
//! vmad-manifest 1
//! [subjects]
//! subject_id
//! [documents]
//! document_id,label,subject_a,subject_b
//! [sequences]
//! sequence_id,subject_id
//! [frames]
//! sequence_id,frame_id,image_path,image_width,image_height,box_x,box_y,box_w,box_h
//! [flip]
//! track_name
//! ```
//!
//! Sections appear in this order; `[flip]` is optional. Each section starts
//! with its column header line. Optional fields are left empty. Frame rows
//! keep their file order as acquisition order.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{
    pair_attempts, parse_optional_label, validate_dataset, Dataset, DocumentRecord, FrameRecord, Label, Rect,
    SequenceRecord, Track,
};
use crate::error::{Error, Result};
use crate::fsutil::{content_lines, read_to_string, split_fields, write_atomic};

const MAGIC: &str = "vmad-manifest 1";

const SECTIONS: [(&str, &str); 5] = [
    ("subjects", "subject_id"),
    ("documents", "document_id,label,subject_a,subject_b"),
    ("sequences", "sequence_id,subject_id"),
    (
        "frames",
        "sequence_id,frame_id,image_path,image_width,image_height,box_x,box_y,box_w,box_h",
    ),
    ("flip", "track_name"),
];

pub fn load_manifest(path: &Path) -> Result<Dataset> {
    parse_manifest(&read_to_string(path)?)
}

/// Parses a manifest, pairs attempts and validates every dataset invariant.
pub fn parse_manifest(text: &str) -> Result<Dataset> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((n, other)) => return Err(Error::parse(n, "header", format!("expected `{MAGIC}`, got `{other}`"))),
        None => return Err(Error::parse(1, "header", "empty manifest")),
    }

    let mut ds = Dataset::default();
    let mut seq_index: HashMap<String, usize> = HashMap::new();
    let mut section: Option<usize> = None;
    let mut expect_header = false;

    for (n, line) in lines {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let idx = SECTIONS
                .iter()
                .position(|(s, _)| *s == name)
                .ok_or_else(|| Error::parse(n, "section", format!("unknown section `{name}`")))?;
            if section.is_some_and(|cur| idx <= cur) {
                return Err(Error::parse(n, "section", format!("section `{name}` out of order")));
            }
            if idx < 4 && section.map_or(0, |c| c + 1) != idx {
                return Err(Error::parse(n, "section", format!("section before `{name}` missing")));
            }
            section = Some(idx);
            expect_header = true;
            continue;
        }
        let Some(idx) = section else {
            return Err(Error::parse(n, "section", "record outside of a section"));
        };
        if expect_header {
            let header = SECTIONS[idx].1;
            if split_fields(line).join(",") != header {
                return Err(Error::parse(n, "header", format!("expected `{header}`")));
            }
            expect_header = false;
            continue;
        }
        let fields = split_fields(line);
        let width = SECTIONS[idx].1.split(',').count();
        if fields.len() != width {
            return Err(Error::parse(
                n,
                SECTIONS[idx].0,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        require_nonempty(n, &fields, &[0])?;
        match idx {
            0 => ds.subjects.push(fields[0].to_string()),
            1 => {
                require_nonempty(n, &fields, &[2])?;
                let label = parse_optional_label(fields[1]).map_err(|m| Error::parse(n, "label", m))?;
                let subject_b = (!fields[3].is_empty()).then(|| fields[3].to_string());
                ds.documents.push(DocumentRecord {
                    id: fields[0].to_string(),
                    label,
                    subject_a: fields[2].to_string(),
                    subject_b,
                });
            }
            2 => {
                require_nonempty(n, &fields, &[1])?;
                seq_index.insert(fields[0].to_string(), ds.sequences.len());
                ds.sequences.push(SequenceRecord {
                    id: fields[0].to_string(),
                    subject: fields[1].to_string(),
                    frames: Vec::new(),
                });
            }
            3 => {
                require_nonempty(n, &fields, &[1])?;
                let si = *seq_index.get(fields[0]).ok_or_else(|| Error::ReferentialIntegrity {
                    id: format!("{}/{}", fields[0], fields[1]),
                    reason: format!("frame references unknown sequence `{}`", fields[0]),
                })?;
                let frame = parse_frame(n, &fields)?;
                ds.sequences[si].frames.push(frame);
            }
            _ => {
                let track: Track = fields[0]
                    .parse()
                    .map_err(|m: String| Error::parse(n, "track_name", m))?;
                match track {
                    Track::Mad(name) => {
                        ds.flipped_tracks.insert(name);
                    }
                    Track::Quality(_) => return Err(Error::parse(n, "track_name", "only MAD tracks can be flipped")),
                }
            }
        }
    }
    if section.is_none_or(|s| s < 3) {
        return Err(Error::parse(0, "section", "manifest is missing required sections"));
    }
    if expect_header {
        return Err(Error::parse(0, "header", "section without column header"));
    }

    ds.attempts = pair_attempts(&ds);
    validate_dataset(&ds).into_result()?;
    Ok(ds)
}

fn require_nonempty(line: usize, fields: &[&str], idx: &[usize]) -> Result<()> {
    for &i in idx {
        if fields[i].is_empty() {
            return Err(Error::parse(line, format!("#{}", i + 1), "required field is empty"));
        }
    }
    Ok(())
}

fn opt_u32(line: usize, name: &str, s: &str) -> Result<Option<u32>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|e| Error::parse(line, name, format!("{e}")))
}

fn parse_frame(n: usize, f: &[&str]) -> Result<FrameRecord> {
    let image_path = (!f[2].is_empty()).then(|| PathBuf::from(f[2]));
    let w = opt_u32(n, "image_width", f[3])?;
    let h = opt_u32(n, "image_height", f[4])?;
    let image_size = match (w, h) {
        (Some(w), Some(h)) => Some((w, h)),
        (None, None) => None,
        _ => return Err(Error::parse(n, "image_width", "width and height go together")),
    };
    let bx = [
        opt_u32(n, "box_x", f[5])?,
        opt_u32(n, "box_y", f[6])?,
        opt_u32(n, "box_w", f[7])?,
        opt_u32(n, "box_h", f[8])?,
    ];
    let face_box = match bx {
        [Some(x), Some(y), Some(w), Some(h)] => Some(Rect::new(x, y, w, h)),
        [None, None, None, None] => None,
        _ => return Err(Error::parse(n, "box_x", "face box needs all four fields")),
    };
    Ok(FrameRecord {
        id: f[1].to_string(),
        image_path,
        image_size,
        face_box,
        ..Default::default()
    })
}

/// Serializes the dataset structure. Scores go to a separate score table.
pub fn write_manifest(ds: &Dataset) -> String {
    let mut out = String::new();
    let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
    out.push_str(MAGIC);
    out.push('\n');

    let _ = writeln!(out, "[{}]\n{}", SECTIONS[0].0, SECTIONS[0].1);
    for s in &ds.subjects {
        let _ = writeln!(out, "{s}");
    }
    let _ = writeln!(out, "[{}]\n{}", SECTIONS[1].0, SECTIONS[1].1);
    for d in &ds.documents {
        let label = match d.label {
            Some(Label::BonaFide) => "bonafide",
            Some(Label::Morphed) => "morph",
            None => "unknown",
        };
        let b = d.subject_b.as_deref().unwrap_or("");
        let _ = writeln!(out, "{},{label},{},{b}", d.id, d.subject_a);
    }
    let _ = writeln!(out, "[{}]\n{}", SECTIONS[2].0, SECTIONS[2].1);
    for s in &ds.sequences {
        let _ = writeln!(out, "{},{}", s.id, s.subject);
    }
    let _ = writeln!(out, "[{}]\n{}", SECTIONS[3].0, SECTIONS[3].1);
    for s in &ds.sequences {
        for f in &s.frames {
            let path = f
                .image_path
                .as_ref()
                .map(|p| p.to_string_lossy().into_owned())
                .unwrap_or_default();
            let (w, h) = f.image_size.unzip();
            let r = f.face_box;
            let _ = writeln!(
                out,
                "{},{},{path},{},{},{},{},{},{}",
                s.id,
                f.id,
                opt(w),
                opt(h),
                opt(r.map(|r| r.x)),
                opt(r.map(|r| r.y)),
                opt(r.map(|r| r.width)),
                opt(r.map(|r| r.height)),
            );
        }
    }
    if !ds.flipped_tracks.is_empty() {
        let _ = writeln!(out, "[{}]\n{}", SECTIONS[4].0, SECTIONS[4].1);
        for t in &ds.flipped_tracks {
            let _ = writeln!(out, "mad:{t}");
        }
    }
    out
}

pub fn save_manifest(ds: &Dataset, path: &Path) -> Result<()> {
    write_atomic(path, write_manifest(ds).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
vmad-manifest 1
# one subject, one document, one sequence
[subjects]
subject_id
A
[documents]
document_id,label,subject_a,subject_b
d1,bonafide,A,
[sequences]
sequence_id,subject_id
s1,A
[frames]
sequence_id,frame_id,image_path,image_width,image_height,box_x,box_y,box_w,box_h
s1,f1,img/f1.png,640,480,100,50,200,300
s1,f2,,,,,,,
s1,f3,,,,,,,
";

    #[test]
    fn minimal_manifest_yields_one_attempt() {
        let ds = parse_manifest(MINIMAL).unwrap();
        assert_eq!(ds.subjects, ["A"]);
        assert_eq!(ds.sequences[0].frames.len(), 3);
        assert_eq!(ds.attempts.len(), 1);
        let f1 = &ds.sequences[0].frames[0];
        assert_eq!(f1.face_box, Some(Rect::new(100, 50, 200, 300)));
        assert_eq!(f1.image_size, Some((640, 480)));
        let ids: Vec<_> = ds.sequences[0].frames.iter().map(|f| f.id.as_str()).collect();
        assert_eq!(ids, ["f1", "f2", "f3"]);
    }

    #[test]
    fn self_morph_is_referential_error() {
        let text = MINIMAL.replace("d1,bonafide,A,", "d1,morph,A,A");
        assert!(matches!(parse_manifest(&text), Err(Error::ReferentialIntegrity { .. })));
    }

    #[test]
    fn wrong_column_header_is_parse_error() {
        let text = MINIMAL.replace("sequence_id,subject_id", "subject_id,sequence_id");
        assert!(matches!(parse_manifest(&text), Err(Error::Parse { line: 10, .. })));
    }

    #[test]
    fn frame_for_unknown_sequence_is_referential_error() {
        let text = MINIMAL.replace("s1,f3", "s9,f3");
        assert!(matches!(parse_manifest(&text), Err(Error::ReferentialIntegrity { .. })));
    }

    #[test]
    fn missing_file() {
        let err = load_manifest(Path::new("/nonexistent/manifest.csv")).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }

    #[test]
    fn write_then_parse_is_identity() {
        let mut ds = parse_manifest(MINIMAL).unwrap();
        ds.flipped_tracks.insert("siamese".into());
        let again = parse_manifest(&write_manifest(&ds)).unwrap();
        assert_eq!(ds, again);
    }
}
