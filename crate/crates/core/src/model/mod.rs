//! Dataset types, manifest and score-table ingestion, and attempt pairing.
//!
//! Scores are oriented so that a higher value means a higher probability
//! that the document image is morphed. Detectors with the opposite polarity
//! are listed in the manifest's `[flip]` section and inverted on ingestion.

mod manifest;
mod scores;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use manifest::{load_manifest, parse_manifest, save_manifest, write_manifest};
pub use scores::{attach_scores, load_score_table, parse_score_table, save_score_table, write_score_table, ScoreRow};

pub type SubjectId = String;
pub type DocumentId = String;
pub type SequenceId = String;
pub type FrameId = String;

/// Ground-truth class of a document image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    BonaFide,
    Morphed,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::BonaFide => "bonafide",
            Label::Morphed => "morph",
        }
    }

    /// Regression target used by the learned fusion.
    pub fn target(self) -> f64 {
        match self {
            Label::BonaFide => 0.0,
            Label::Morphed => 1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bonafide" | "bona_fide" | "bona-fide" => Ok(Label::BonaFide),
            "morph" | "morphed" => Ok(Label::Morphed),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// Writes `bonafide`, `morph` or `unknown`.
pub fn label_str(label: Option<Label>) -> &'static str {
    label.map_or("unknown", Label::as_str)
}

pub fn parse_optional_label(s: &str) -> Result<Option<Label>, String> {
    match s {
        "unknown" | "" => Ok(None),
        other => other.parse().map(Some),
    }
}

/// A named per-frame score track: `mad:<detector>` or `q:<quality>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Track {
    Mad(String),
    Quality(String),
}

impl Track {
    pub fn mad(name: impl Into<String>) -> Self {
        Track::Mad(name.into())
    }

    pub fn quality(name: impl Into<String>) -> Self {
        Track::Quality(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Track::Mad(n) | Track::Quality(n) => n,
        }
    }

    pub fn is_mad(&self) -> bool {
        matches!(self, Track::Mad(_))
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Track::Mad(n) => write!(f, "mad:{n}"),
            Track::Quality(n) => write!(f, "q:{n}"),
        }
    }
}

impl FromStr for Track {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, name) = s
            .split_once(':')
            .ok_or_else(|| format!("track `{s}` lacks a `mad:` or `q:` prefix"))?;
        if name.is_empty() || name.contains(',') {
            return Err(format!("invalid track name `{s}`"));
        }
        match kind {
            "mad" => Ok(Track::Mad(name.to_string())),
            "q" => Ok(Track::Quality(name.to_string())),
            _ => Err(format!("track `{s}` lacks a `mad:` or `q:` prefix")),
        }
    }
}

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        Rect { x, y, width, height }
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        u64::from(self.x) + u64::from(self.width) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.height) <= u64::from(height)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{} {}x{})", self.x, self.y, self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentRecord {
    pub id: DocumentId,
    /// `None` for operational data without ground truth.
    pub label: Option<Label>,
    pub subject_a: SubjectId,
    /// Second contributing subject; present iff the document is morphed.
    pub subject_b: Option<SubjectId>,
}

impl DocumentRecord {
    pub fn bona_fide(id: impl Into<String>, subject: impl Into<String>) -> Self {
        DocumentRecord {
            id: id.into(),
            label: Some(Label::BonaFide),
            subject_a: subject.into(),
            subject_b: None,
        }
    }

    pub fn morphed(id: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Self {
        DocumentRecord {
            id: id.into(),
            label: Some(Label::Morphed),
            subject_a: a.into(),
            subject_b: Some(b.into()),
        }
    }

    /// Whether `subject` contributed to this document image.
    pub fn involves(&self, subject: &str) -> bool {
        self.subject_a == subject || self.subject_b.as_deref() == Some(subject)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameRecord {
    pub id: FrameId,
    pub image_path: Option<PathBuf>,
    /// Image dimensions, when known, used to bound-check `face_box`.
    pub image_size: Option<(u32, u32)>,
    pub face_box: Option<Rect>,
    /// Document-independent MAD scores by detector.
    pub mad_scores: BTreeMap<String, f64>,
    /// MAD scores against one specific document: document -> detector -> score.
    pub document_mad_scores: BTreeMap<DocumentId, BTreeMap<String, f64>>,
    pub quality_scores: BTreeMap<String, f64>,
}

impl FrameRecord {
    pub fn new(id: impl Into<String>) -> Self {
        FrameRecord {
            id: id.into(),
            ..Default::default()
        }
    }

    pub fn score(&self, track: &Track) -> Option<f64> {
        match track {
            Track::Mad(n) => self.mad_scores.get(n).copied(),
            Track::Quality(n) => self.quality_scores.get(n).copied(),
        }
    }

    /// Score of `track` when compared against `document`; document-specific
    /// MAD scores win over document-independent ones.
    pub fn score_for(&self, document: &str, track: &Track) -> Option<f64> {
        if let Track::Mad(n) = track {
            if let Some(v) = self.document_mad_scores.get(document).and_then(|m| m.get(n)) {
                return Some(*v);
            }
        }
        self.score(track)
    }

    pub(crate) fn slot_mut(&mut self, document: Option<&str>, track: &Track) -> &mut BTreeMap<String, f64> {
        match (track, document) {
            (Track::Mad(_), Some(d)) => self.document_mad_scores.entry(d.to_string()).or_default(),
            (Track::Mad(_), None) => &mut self.mad_scores,
            (Track::Quality(_), _) => &mut self.quality_scores,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRecord {
    pub id: SequenceId,
    pub subject: SubjectId,
    /// Frames in acquisition order.
    pub frames: Vec<FrameRecord>,
}

/// One document-versus-sequence comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attempt {
    pub document: DocumentId,
    pub sequence: SequenceId,
    pub label: Option<Label>,
}

impl Attempt {
    pub fn id(&self) -> String {
        format!("{}/{}", self.document, self.sequence)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub subjects: Vec<SubjectId>,
    pub documents: Vec<DocumentRecord>,
    pub sequences: Vec<SequenceRecord>,
    pub attempts: Vec<Attempt>,
    /// MAD tracks whose polarity is inverted (`1 - value`) on ingestion.
    pub flipped_tracks: BTreeSet<String>,
}

impl Dataset {
    pub fn document(&self, id: &str) -> Option<&DocumentRecord> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn sequence(&self, id: &str) -> Option<&SequenceRecord> {
        self.sequences.iter().find(|s| s.id == id)
    }

    /// Per-frame values of `track` for the attempt's sequence, in frame order.
    pub fn track_values(&self, attempt: &Attempt, track: &Track) -> Result<Vec<f64>> {
        let seq = self
            .sequence(&attempt.sequence)
            .ok_or_else(|| Error::ReferentialIntegrity {
                id: attempt.id(),
                reason: format!("unknown sequence `{}`", attempt.sequence),
            })?;
        if seq.frames.is_empty() {
            return Err(Error::EmptySequence);
        }
        seq.frames
            .iter()
            .map(|f| {
                f.score_for(&attempt.document, track)
                    .ok_or_else(|| Error::MissingTrack {
                        attempt: attempt.id(),
                        track: track.to_string(),
                    })
            })
            .collect()
    }

    /// Every value of `track` over all frames of all sequences.
    pub fn all_track_values(&self, track: &Track) -> Vec<f64> {
        self.sequences
            .iter()
            .flat_map(|s| s.frames.iter())
            .filter_map(|f| f.score(track))
            .collect()
    }

    /// Recomputes `attempts` from the documents and sequences.
    pub fn with_pairing(mut self) -> Self {
        self.attempts = pair_attempts(&self);
        self
    }
}

/// Pairs every document with every sequence of a contributing subject,
/// ordered by document id then sequence id.
pub fn pair_attempts(dataset: &Dataset) -> Vec<Attempt> {
    let mut docs: Vec<&DocumentRecord> = dataset.documents.iter().collect();
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    let mut seqs: Vec<&SequenceRecord> = dataset.sequences.iter().collect();
    seqs.sort_by(|a, b| a.id.cmp(&b.id));

    let mut attempts = Vec::new();
    for doc in docs {
        for seq in &seqs {
            let eligible = match doc.label {
                Some(Label::BonaFide) => seq.subject == doc.subject_a,
                Some(Label::Morphed) | None => doc.involves(&seq.subject),
            };
            if eligible {
                attempts.push(Attempt {
                    document: doc.id.clone(),
                    sequence: seq.id.clone(),
                    label: doc.label,
                });
            }
        }
    }
    attempts
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub id: String,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Documents that pair with no sequence. Informational only.
    pub unpaired_documents: Vec<DocumentId>,
}

impl ValidationReport {
    /// True when every dataset invariant holds.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, id: impl Into<String>, reason: impl Into<String>) {
        self.violations.push(Violation {
            id: id.into(),
            reason: reason.into(),
        });
    }

    pub(crate) fn into_result(self) -> Result<()> {
        match self.violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::ReferentialIntegrity {
                id: v.id,
                reason: v.reason,
            }),
        }
    }
}

pub fn validate_dataset(dataset: &Dataset) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut subjects = HashSet::new();
    for s in &dataset.subjects {
        if !subjects.insert(s.as_str()) {
            report.push(s, "duplicate subject id");
        }
    }

    let mut doc_ids = HashSet::new();
    for doc in &dataset.documents {
        if !doc_ids.insert(doc.id.as_str()) {
            report.push(&doc.id, "duplicate document id");
        }
        if !subjects.contains(doc.subject_a.as_str()) {
            report.push(&doc.id, format!("unknown subject `{}`", doc.subject_a));
        }
        if let Some(b) = &doc.subject_b {
            if !subjects.contains(b.as_str()) {
                report.push(&doc.id, format!("unknown subject `{b}`"));
            }
            if *b == doc.subject_a {
                report.push(&doc.id, "morph contributors must be distinct subjects");
            }
        }
        match (doc.label, &doc.subject_b) {
            (Some(Label::Morphed), None) => report.push(&doc.id, "morphed document lacks subject_b"),
            (Some(Label::BonaFide), Some(_)) => report.push(&doc.id, "bona fide document lists a second subject"),
            _ => {}
        }
    }

    let mut seq_ids = HashSet::new();
    for seq in &dataset.sequences {
        if !seq_ids.insert(seq.id.as_str()) {
            report.push(&seq.id, "duplicate sequence id");
        }
        if !subjects.contains(seq.subject.as_str()) {
            report.push(&seq.id, format!("unknown subject `{}`", seq.subject));
        }
        if seq.frames.is_empty() {
            report.push(&seq.id, "sequence has no frames");
        }
        let mut frame_ids = HashSet::new();
        for frame in &seq.frames {
            let fid = format!("{}/{}", seq.id, frame.id);
            if !frame_ids.insert(frame.id.as_str()) {
                report.push(&fid, "duplicate frame id");
            }
            let doc_scores = frame
                .document_mad_scores
                .iter()
                .flat_map(|(d, m)| m.iter().map(move |(n, v)| (Some(d.as_str()), n, v)));
            for (doc, name, v) in frame.mad_scores.iter().map(|(n, v)| (None, n, v)).chain(doc_scores) {
                if !(0.0..=1.0).contains(v) {
                    report.push(&fid, format!("MAD score mad:{name}={v} outside [0, 1]"));
                }
                if let Some(d) = doc {
                    let paired = dataset.document(d).is_some_and(|doc| doc.involves(&seq.subject));
                    if !paired {
                        report.push(&fid, format!("MAD score against unrelated document `{d}`"));
                    }
                }
            }
            for (name, v) in &frame.quality_scores {
                if !v.is_finite() {
                    report.push(&fid, format!("quality score q:{name} is not finite"));
                }
            }
            if let (Some(b), Some((w, h))) = (frame.face_box, frame.image_size) {
                if !b.fits_within(w, h) {
                    report.push(&fid, format!("face box {b} outside {w}x{h} image"));
                }
            }
        }
    }

    let mut paired = HashSet::new();
    for att in &dataset.attempts {
        let doc = dataset.document(&att.document);
        let seq = dataset.sequence(&att.sequence);
        match (doc, seq) {
            (Some(doc), Some(seq)) => {
                paired.insert(doc.id.as_str());
                if att.label != doc.label {
                    report.push(att.id(), "attempt label differs from document label");
                }
                let ok = match doc.label {
                    Some(Label::BonaFide) => seq.subject == doc.subject_a,
                    _ => doc.involves(&seq.subject),
                };
                if !ok {
                    report.push(att.id(), "sequence subject did not contribute to document");
                }
            }
            (None, _) => report.push(att.id(), format!("unknown document `{}`", att.document)),
            (_, None) => report.push(att.id(), format!("unknown sequence `{}`", att.sequence)),
        }
    }
    report.unpaired_documents = dataset
        .documents
        .iter()
        .filter(|d| !paired.contains(d.id.as_str()))
        .map(|d| d.id.clone())
        .collect();

    report
}

/// Shortest round-trip decimal representation.
pub(crate) fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}
