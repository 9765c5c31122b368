use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Attempt, Dataset, Track};
use crate::quality::{normalize_quality, QualityNormalization};

/// Fixed-length feature layout: per track, the first `max_frames` values in
/// frame order, padded with `pad_value`, tracks concatenated in order.
#[derive(Debug, Clone)]
pub struct FeatureLayout {
    pub max_frames: usize,
    /// First entry is a MAD track.
    pub tracks: Vec<Track>,
    pub pad_value: f64,
    /// Normalization for quality tracks; missing entries mean `Identity`.
    pub normalizations: BTreeMap<Track, QualityNormalization>,
}

pub const DEFAULT_MAX_FRAMES: usize = 50;

impl FeatureLayout {
    pub fn new(tracks: Vec<Track>) -> Result<Self> {
        let layout = FeatureLayout {
            max_frames: DEFAULT_MAX_FRAMES,
            tracks,
            pad_value: 0.0,
            normalizations: BTreeMap::new(),
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn with_normalization(mut self, track: Track, norm: QualityNormalization) -> Self {
        self.normalizations.insert(track, norm);
        self
    }

    pub fn with_max_frames(mut self, max_frames: usize) -> Self {
        self.max_frames = max_frames;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("feature layout: {m}")));
        match self.tracks.first() {
            Some(t) if t.is_mad() => {}
            Some(_) => return bad("first track must be a MAD track"),
            None => return bad("no tracks"),
        }
        if self.max_frames == 0 {
            return bad("max_frames must be positive");
        }
        if !(0.0..=1.0).contains(&self.pad_value) {
            return bad("pad_value must lie in [0, 1]");
        }
        let unique: BTreeSet<_> = self.tracks.iter().collect();
        if unique.len() != self.tracks.len() {
            return bad("duplicate track");
        }
        if let Some(t) = self
            .normalizations
            .keys()
            .find(|t| t.is_mad() || !self.tracks.contains(t))
        {
            return bad(&format!("normalization for `{t}` does not match a quality track"));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.max_frames * self.tracks.len()
    }

    pub fn normalization(&self, track: &Track) -> QualityNormalization {
        self.normalizations
            .get(track)
            .copied()
            .unwrap_or(QualityNormalization::Identity)
    }

    /// Computes pending dataset medians over the frames of the given
    /// attempts' sequences (each sequence counted once).
    pub fn resolve(&mut self, ds: &Dataset, attempts: &[Attempt]) -> Result<()> {
        let seqs: BTreeSet<&str> = attempts.iter().map(|a| a.sequence.as_str()).collect();
        for (track, norm) in self.normalizations.iter_mut() {
            if *norm != QualityNormalization::DivideByDatasetMedian(None) {
                continue;
            }
            let values: Vec<f64> = seqs
                .iter()
                .filter_map(|id| ds.sequence(id))
                .flat_map(|s| s.frames.iter().filter_map(|f| f.score(track)))
                .collect();
            *norm = norm.resolved(&values)?;
        }
        Ok(())
    }

    /// Same tracks, length and padding; a pending median matches any median.
    pub fn is_compatible(&self, other: &FeatureLayout) -> bool {
        self.max_frames == other.max_frames
            && self.tracks == other.tracks
            && self.pad_value == other.pad_value
            && self
                .tracks
                .iter()
                .all(|t| match (self.normalization(t), other.normalization(t)) {
                    (
                        QualityNormalization::DivideByDatasetMedian(a),
                        QualityNormalization::DivideByDatasetMedian(b),
                    ) => a.is_none() || b.is_none() || a == b,
                    (a, b) => a == b,
                })
    }

    /// Parses `mad:dfr,q:magface/median,q:illum/100`.
    pub fn parse_tracks(spec: &str) -> Result<Self> {
        let mut tracks = Vec::new();
        let mut norms = BTreeMap::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, norm) = match item.split_once('/') {
                Some((n, m)) => (n, Some(m)),
                None => (item, None),
            };
            let track: Track = name.parse().map_err(Error::InvalidConfig)?;
            if let Some(m) = norm {
                norms.insert(track.clone(), m.parse().map_err(Error::InvalidConfig)?);
            }
            tracks.push(track);
        }
        let mut layout = FeatureLayout::new(tracks)?;
        layout.normalizations = norms;
        layout.validate()?;
        Ok(layout)
    }
}

/// Equal when every track resolves to the same normalization, so an absent
/// entry equals an explicit `Identity`.
impl PartialEq for FeatureLayout {
    fn eq(&self, other: &Self) -> bool {
        self.max_frames == other.max_frames
            && self.tracks == other.tracks
            && self.pad_value == other.pad_value
            && self
                .tracks
                .iter()
                .all(|t| self.normalization(t) == other.normalization(t))
    }
}

impl fmt::Display for FeatureLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tracks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
            if !t.is_mad() {
                write!(f, "/{}", self.normalization(t))?;
            }
        }
        Ok(())
    }
}

pub fn assemble_features(ds: &Dataset, attempt: &Attempt, layout: &FeatureLayout) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(layout.dimension());
    for track in &layout.tracks {
        let values = ds.track_values(attempt, track)?;
        let norm = (!track.is_mad()).then(|| layout.normalization(track));
        for i in 0..layout.max_frames {
            let v = match (values.get(i), norm) {
                (None, _) => layout.pad_value,
                (Some(&v), None) => v,
                (Some(&v), Some(n)) => normalize_quality(v, n)?,
            };
            out.push(v);
        }
    }
    Ok(out)
}
