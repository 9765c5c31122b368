//! Synthetic scenario generator.
//!
//! Each frame gets a quality `q` drawn from the configured distribution.
//! Its MAD score against a document is the label mean plus Gaussian noise
//! whose standard deviation grows as quality drops:
//! `sd(q) = base_noise_sd * (1 + coupling * (1 - q))`, clamped to `[0, 1]`.
//! Scores are emitted as document-specific `mad:synth` rows, qualities as
//! `q:synth`.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{pair_attempts, Dataset, DocumentRecord, FrameRecord, Label, SequenceRecord};

pub const SYNTH_TRACK: &str = "synth";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QualityDistribution {
    Uniform { lo: f64, hi: f64 },
    Beta { a: f64, b: f64 },
}

impl std::fmt::Display for QualityDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QualityDistribution::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            QualityDistribution::Beta { a, b } => write!(f, "beta:{a}:{b}"),
        }
    }
}

impl FromStr for QualityDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |v: &str| v.parse::<f64>().map_err(|e| format!("bad number `{v}`: {e}"));
        match parts.as_slice() {
            ["uniform", lo, hi] => Ok(QualityDistribution::Uniform {
                lo: num(lo)?,
                hi: num(hi)?,
            }),
            ["beta", a, b] => Ok(QualityDistribution::Beta { a: num(a)?, b: num(b)? }),
            _ => Err(format!("expected `uniform:<lo>:<hi>` or `beta:<a>:<b>`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_subjects: usize,
    /// How many subjects own gate sequences; `None` means all of them.
    pub subjects_with_sequences: Option<usize>,
    pub sequences_per_subject: usize,
    pub n_bonafide_docs: usize,
    pub n_morph_docs: usize,
    /// Inclusive range of frames per sequence.
    pub frames_per_sequence: (usize, usize),
    pub bonafide_score_mean: f64,
    pub morph_score_mean: f64,
    pub base_noise_sd: f64,
    /// Noise multiplier applied at quality 0.
    pub quality_noise_coupling: f64,
    pub quality_distribution: QualityDistribution,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_subjects: 20,
            subjects_with_sequences: None,
            sequences_per_subject: 1,
            n_bonafide_docs: 40,
            n_morph_docs: 60,
            frames_per_sequence: (30, 70),
            bonafide_score_mean: 0.4,
            morph_score_mean: 0.6,
            base_noise_sd: 0.2,
            quality_noise_coupling: 1.0,
            quality_distribution: QualityDistribution::Uniform { lo: 0.0, hi: 1.0 },
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// 60 subjects, 205 bona fide and 1142 morphed documents, half of the
    /// subjects with one gate sequence each: roughly 1250 attempts.
    pub fn large_scale() -> Self {
        ScenarioConfig {
            n_subjects: 60,
            subjects_with_sequences: Some(30),
            n_bonafide_docs: 205,
            n_morph_docs: 1142,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_subjects == 0 {
            return bad("n_subjects must be positive".into());
        }
        if self.n_morph_docs > 0 && self.n_subjects < 2 {
            return bad("morphs need at least two subjects".into());
        }
        if self.subjects_with_sequences.is_some_and(|k| k > self.n_subjects) {
            return bad("subjects_with_sequences exceeds n_subjects".into());
        }
        if self.sequences_per_subject == 0 {
            return bad("sequences_per_subject must be positive".into());
        }
        let (lo, hi) = self.frames_per_sequence;
        if lo == 0 || hi < lo {
            return bad(format!("invalid frames_per_sequence {lo}..={hi}"));
        }
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.bonafide_score_mean) || !in_unit(self.morph_score_mean) {
            return bad("score means must lie in [0, 1]".into());
        }
        if self.bonafide_score_mean >= self.morph_score_mean {
            return bad("bonafide_score_mean must be below morph_score_mean".into());
        }
        if !(self.base_noise_sd.is_finite() && self.base_noise_sd >= 0.0) {
            return bad("base_noise_sd must be nonnegative".into());
        }
        if !(self.quality_noise_coupling.is_finite() && self.quality_noise_coupling >= 0.0) {
            return bad("quality_noise_coupling must be nonnegative".into());
        }
        match self.quality_distribution {
            QualityDistribution::Uniform { lo, hi } if in_unit(lo) && in_unit(hi) && lo <= hi => {}
            QualityDistribution::Beta { a, b } if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => {}
            d => return bad(format!("invalid quality distribution {d}")),
        }
        Ok(())
    }
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.max(1).to_string().len().max(3);
    (1..=n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

pub fn generate_scenario(config: &ScenarioConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let subjects = ids("S", config.n_subjects);
    let mut owners: Vec<usize> = (0..config.n_subjects).collect();
    if let Some(k) = config.subjects_with_sequences {
        owners.shuffle(&mut rng);
        owners.truncate(k);
        owners.sort_unstable();
    }

    let quality = |rng: &mut ChaCha8Rng| -> f64 {
        match config.quality_distribution {
            QualityDistribution::Uniform { lo, hi } if lo == hi => lo,
            QualityDistribution::Uniform { lo, hi } => rng.random_range(lo..=hi),
            QualityDistribution::Beta { a, b } => Beta::new(a, b).expect("validated").sample(rng),
        }
    };

    let (fmin, fmax) = config.frames_per_sequence;
    let mut sequences = Vec::new();
    for &s in &owners {
        for k in 1..=config.sequences_per_subject {
            let n_frames = rng.random_range(fmin..=fmax);
            let frames = ids("f", n_frames)
                .into_iter()
                .map(|id| {
                    let mut f = FrameRecord::new(id);
                    f.quality_scores.insert(SYNTH_TRACK.into(), quality(&mut rng));
                    f
                })
                .collect();
            sequences.push(SequenceRecord {
                id: format!("Q{}_{k}", subjects[s]),
                subject: subjects[s].clone(),
                frames,
            });
        }
    }

    let mut documents: Vec<DocumentRecord> = ids("B", config.n_bonafide_docs)
        .into_iter()
        .enumerate()
        .map(|(i, id)| DocumentRecord::bona_fide(id, subjects[i % config.n_subjects].clone()))
        .collect();
    for id in ids("M", config.n_morph_docs) {
        let a = rng.random_range(0..config.n_subjects);
        let mut b = rng.random_range(0..config.n_subjects - 1);
        if b >= a {
            b += 1;
        }
        documents.push(DocumentRecord::morphed(id, subjects[a].clone(), subjects[b].clone()));
    }

    let mut ds = Dataset {
        subjects,
        documents,
        sequences,
        ..Default::default()
    };
    ds.attempts = pair_attempts(&ds);

    let seq_index: BTreeMap<String, usize> = ds
        .sequences
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.clone(), i))
        .collect();
    for att in &ds.attempts {
        let mean = match att.label {
            Some(Label::BonaFide) => config.bonafide_score_mean,
            _ => config.morph_score_mean,
        };
        let seq = &mut ds.sequences[seq_index[&att.sequence]];
        for frame in &mut seq.frames {
            let q = frame.quality_scores[SYNTH_TRACK];
            let sd = config.base_noise_sd * (1.0 + config.quality_noise_coupling * (1.0 - q));
            let noise = if sd > 0.0 {
                Normal::new(0.0, sd).expect("finite sd").sample(&mut rng)
            } else {
                0.0
            };
            frame
                .document_mad_scores
                .entry(att.document.clone())
                .or_default()
                .insert(SYNTH_TRACK.into(), (mean + noise).clamp(0.0, 1.0));
        }
    }
    Ok(ds)
}

/// One dataset per seed, all from the same configuration.
pub fn scenario_suite(config: &ScenarioConfig, seeds: &[u64]) -> Result<Vec<Dataset>> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("empty seed list".into()));
    }
    seeds
        .iter()
        .map(|&s| generate_scenario(&config.clone().with_seed(s)))
        .collect()
}
