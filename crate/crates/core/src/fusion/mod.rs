//! Fusion functions that condense a sequence of per-frame MAD scores into a
//! single per-attempt score, plus the random-frame and oracle baselines.

mod table;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Attempt, Dataset, Label, Track};
use crate::quality::{normalize_quality, QualityNormalization};
use crate::stats;

pub use table::{load_fused_table, parse_fused_table, save_fused_table, write_fused_table, FUSED_HEADER};

fn nonempty(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        Err(Error::EmptySequence)
    } else {
        Ok(())
    }
}

fn same_len(scores: &[f64], other: &[f64]) -> Result<()> {
    nonempty(scores)?;
    if scores.len() != other.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: other.len(),
        });
    }
    Ok(())
}

pub fn fuse_avg(scores: &[f64]) -> Result<f64> {
    stats::mean(scores).ok_or(Error::EmptySequence)
}

pub fn fuse_med(scores: &[f64]) -> Result<f64> {
    stats::median(scores).ok_or(Error::EmptySequence)
}

/// Fraction of frames whose score is strictly above `thr`.
pub fn fuse_vote(scores: &[f64], thr: f64) -> Result<f64> {
    nonempty(scores)?;
    if !(0.0..=1.0).contains(&thr) {
        return Err(Error::ThresholdOutOfRange(thr));
    }
    let votes = scores.iter().filter(|&&s| s > thr).count();
    Ok(votes as f64 / scores.len() as f64)
}

fn check_weights(weights: &[f64]) -> Result<f64> {
    if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeight(w));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Ok(total)
}

/// Quality-weighted mean `sum(s * q) / sum(q)`.
pub fn fuse_wavg(scores: &[f64], weights: &[f64]) -> Result<f64> {
    same_len(scores, weights)?;
    let total = check_weights(weights)?;
    let num: f64 = scores.iter().zip(weights).map(|(s, w)| s * w).sum();
    Ok(num / total)
}

/// Unnormalized weighted sum `sum(s * q)`. Not bounded to `[0, 1]`.
pub fn fuse_wsum(scores: &[f64], weights: &[f64]) -> Result<f64> {
    same_len(scores, weights)?;
    check_weights(weights)?;
    Ok(scores.iter().zip(weights).map(|(s, w)| s * w).sum())
}

/// Score of the highest-quality frame; ties go to the earliest frame.
pub fn fuse_best_quality(scores: &[f64], qualities: &[f64]) -> Result<f64> {
    same_len(scores, qualities)?;
    let mut best = 0;
    for (i, q) in qualities.iter().enumerate().skip(1) {
        if *q > qualities[best] {
            best = i;
        }
    }
    Ok(scores[best])
}

/// Index drawn uniformly from `0..n` by a generator keyed on `(seed, stream)`.
pub fn rnd_index(n: usize, seed: u64, stream: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.random_range(0..n)
}

/// Score of one uniformly chosen frame.
pub fn baseline_rnd(scores: &[f64], seed: u64) -> Result<f64> {
    nonempty(scores)?;
    Ok(scores[rnd_index(scores.len(), seed, 0)])
}

/// Label-aware oracle: minimum for bona fide, maximum for morphed attempts.
pub fn baseline_mxd(scores: &[f64], label: Label) -> Result<f64> {
    nonempty(scores)?;
    let it = scores.iter().copied();
    Ok(match label {
        Label::BonaFide => it.fold(f64::INFINITY, f64::min),
        Label::Morphed => it.fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum FusionKind {
    Avg,
    Med,
    Vote {
        thr: f64,
    },
    WAvg {
        quality: String,
        normalization: QualityNormalization,
        /// Use the literal weighted sum instead of the weighted mean.
        unnormalized: bool,
    },
    BestQuality {
        quality: String,
    },
    Rnd {
        seed: u64,
    },
    Mxd,
}

/// A fusion function bound to one MAD detector track.
///
/// Textual form: `<kind>[:<arg>][/<norm>]@<detector>`, e.g. `avg@dfr`,
/// `vote:0.5@dfr`, `wavg:magface/median@dfr`, `bq:illum@dfr`, `rnd:7@dfr`.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionStrategy {
    pub kind: FusionKind,
    pub mad_track: String,
}

impl FusionStrategy {
    pub fn new(kind: FusionKind, mad_track: impl Into<String>) -> Self {
        FusionStrategy {
            kind,
            mad_track: mad_track.into(),
        }
    }

    pub fn quality_track(&self) -> Option<Track> {
        match &self.kind {
            FusionKind::WAvg { quality, .. } | FusionKind::BestQuality { quality } => {
                Some(Track::quality(quality.clone()))
            }
            _ => None,
        }
    }

    pub fn needs_labels(&self) -> bool {
        self.kind == FusionKind::Mxd
    }

    /// Fuses one attempt's track values. `index` keys the `Rnd` generator.
    pub fn fuse(&self, scores: &[f64], qualities: Option<&[f64]>, label: Option<Label>, index: u64) -> Result<f64> {
        let q = || qualities.ok_or(Error::EmptySequence);
        match &self.kind {
            FusionKind::Avg => fuse_avg(scores),
            FusionKind::Med => fuse_med(scores),
            FusionKind::Vote { thr } => fuse_vote(scores, *thr),
            FusionKind::WAvg {
                normalization,
                unnormalized,
                ..
            } => {
                let weights = q()?
                    .iter()
                    .map(|&raw| normalize_quality(raw, *normalization))
                    .collect::<Result<Vec<_>>>()?;
                if *unnormalized {
                    fuse_wsum(scores, &weights)
                } else {
                    fuse_wavg(scores, &weights)
                }
            }
            FusionKind::BestQuality { .. } => fuse_best_quality(scores, q()?),
            FusionKind::Rnd { seed } => {
                nonempty(scores)?;
                Ok(scores[rnd_index(scores.len(), *seed, index)])
            }
            FusionKind::Mxd => baseline_mxd(scores, label.ok_or(Error::MissingLabel(String::new()))?),
        }
    }
}

impl fmt::Display for FusionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FusionKind::Avg => f.write_str("avg")?,
            FusionKind::Med => f.write_str("med")?,
            FusionKind::Vote { thr } => write!(f, "vote:{thr}")?,
            FusionKind::WAvg {
                quality,
                normalization,
                unnormalized,
            } => {
                let name = if *unnormalized { "wsum" } else { "wavg" };
                write!(f, "{name}:{quality}/{normalization}")?
            }
            FusionKind::BestQuality { quality } => write!(f, "bq:{quality}")?,
            FusionKind::Rnd { seed } => write!(f, "rnd:{seed}")?,
            FusionKind::Mxd => f.write_str("mxd")?,
        }
        write!(f, "@{}", self.mad_track)
    }
}

impl FromStr for FusionStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (body, mad) = s
            .rsplit_once('@')
            .ok_or_else(|| format!("strategy `{s}` lacks `@<detector>`"))?;
        if mad.is_empty() {
            return Err(format!("strategy `{s}` has an empty detector name"));
        }
        let (head, norm) = match body.split_once('/') {
            Some((h, n)) => (h, Some(n)),
            None => (body, None),
        };
        let (name, arg) = match head.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (head, None),
        };
        let need_arg = || arg.ok_or_else(|| format!("strategy `{name}` needs an argument"));
        let no_norm = |kind: FusionKind| match norm {
            None => Ok(kind),
            Some(_) => Err(format!("strategy `{name}` takes no normalization")),
        };
        let kind = match name {
            "avg" => no_norm(FusionKind::Avg)?,
            "med" => no_norm(FusionKind::Med)?,
            "vote" => {
                let thr = match arg {
                    Some(a) => a.parse().map_err(|e| format!("bad vote threshold `{a}`: {e}"))?,
                    None => 0.5,
                };
                if !(0.0..=1.0).contains(&thr) {
                    return Err(format!("vote threshold {thr} outside [0, 1]"));
                }
                no_norm(FusionKind::Vote { thr })?
            }
            "wavg" | "wsum" => FusionKind::WAvg {
                quality: need_arg()?.to_string(),
                normalization: norm.map_or(Ok(QualityNormalization::Identity), str::parse)?,
                unnormalized: name == "wsum",
            },
            "bq" | "best-quality" => no_norm(FusionKind::BestQuality {
                quality: need_arg()?.to_string(),
            })?,
            "rnd" => {
                let a = need_arg()?;
                no_norm(FusionKind::Rnd {
                    seed: a.parse().map_err(|e| format!("bad rnd seed `{a}`: {e}"))?,
                })?
            }
            "mxd" => no_norm(FusionKind::Mxd)?,
            other => return Err(format!("unknown strategy `{other}`")),
        };
        Ok(FusionStrategy::new(kind, mad))
    }
}

/// One fused score per attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct VmadScore {
    pub attempt: Attempt,
    pub strategy: String,
    pub value: f64,
}

/// Applies `strategy` to every attempt, in order.
///
/// A `DivideByDatasetMedian` normalization without a statistic is resolved
/// over every frame of the dataset. `Rnd` draws are keyed by the attempt's
/// position in `attempts`.
pub fn apply_strategy(ds: &Dataset, attempts: &[Attempt], strategy: &FusionStrategy) -> Result<Vec<VmadScore>> {
    let mut strategy = strategy.clone();
    if let FusionKind::WAvg {
        quality, normalization, ..
    } = &mut strategy.kind
    {
        *normalization = normalization.resolved(&ds.all_track_values(&Track::quality(quality.clone())))?;
    }
    let mad = Track::mad(strategy.mad_track.clone());
    let qtrack = strategy.quality_track();
    let name = strategy.to_string();

    attempts
        .iter()
        .enumerate()
        .map(|(i, att)| {
            let scores = ds.track_values(att, &mad)?;
            let qualities = qtrack.as_ref().map(|t| ds.track_values(att, t)).transpose()?;
            if strategy.needs_labels() && att.label.is_none() {
                return Err(Error::MissingLabel(att.id()));
            }
            let value = strategy.fuse(&scores, qualities.as_deref(), att.label, i as u64)?;
            Ok(VmadScore {
                attempt: att.clone(),
                strategy: name.clone(),
                value,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avg_examples() {
        assert!((fuse_avg(&[0.2, 0.4, 0.6]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(fuse_avg(&[0.3; 7]).unwrap(), 0.3);
        assert!(matches!(fuse_avg(&[]), Err(Error::EmptySequence)));
    }

    #[test]
    fn med_examples() {
        assert_eq!(fuse_med(&[0.1, 0.9, 0.5]).unwrap(), 0.5);
        assert_eq!(fuse_med(&[0.2, 0.8]).unwrap(), 0.5);
        assert!(fuse_med(&[]).is_err());
    }

    #[test]
    fn vote_examples() {
        assert_eq!(fuse_vote(&[0.2, 0.6, 0.9], 0.5).unwrap(), 2.0 / 3.0);
        assert_eq!(fuse_vote(&[0.2, 1.0, 0.9], 1.0).unwrap(), 0.0);
        assert_eq!(fuse_vote(&[0.5, 0.5], 0.5).unwrap(), 0.0);
        assert!(matches!(fuse_vote(&[0.5], 1.5), Err(Error::ThresholdOutOfRange(_))));
        assert!(matches!(fuse_vote(&[], 0.5), Err(Error::EmptySequence)));
    }

    #[test]
    fn wavg_examples() {
        assert_eq!(fuse_wavg(&[0.2, 0.8], &[1.0, 1.0]).unwrap(), 0.5);
        assert_eq!(fuse_wavg(&[0.2, 0.8], &[1.0, 0.0]).unwrap(), 0.2);
        let v = fuse_wavg(&[0.1, 0.5, 0.9], &[0.2, 0.3, 0.5]).unwrap();
        assert!((v - (0.02 + 0.15 + 0.45) / 1.0).abs() < 1e-12);
        assert!(matches!(
            fuse_wavg(&[0.1, 0.2], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            fuse_wavg(&[0.1, 0.2], &[0.0, 0.0]),
            Err(Error::AllZeroWeights)
        ));
        assert!(matches!(fuse_wavg(&[0.1], &[-1.0]), Err(Error::InvalidWeight(_))));
        assert!((fuse_wsum(&[0.1, 0.5, 0.9], &[0.2, 0.3, 0.5]).unwrap() - 0.62).abs() < 1e-12);
    }

    #[test]
    fn best_quality_examples() {
        assert_eq!(fuse_best_quality(&[0.3, 0.7], &[0.9, 0.1]).unwrap(), 0.3);
        assert_eq!(fuse_best_quality(&[0.4, 0.7, 0.1], &[0.5; 3]).unwrap(), 0.4);
        assert!(fuse_best_quality(&[0.3], &[]).is_err());
    }

    #[test]
    fn rnd_examples() {
        assert_eq!(baseline_rnd(&[0.4], 9).unwrap(), 0.4);
        let s = [0.1, 0.2, 0.3, 0.4, 0.5];
        assert_eq!(baseline_rnd(&s, 17).unwrap(), baseline_rnd(&s, 17).unwrap());
        assert!(baseline_rnd(&[], 1).is_err());
    }

    #[test]
    fn rnd_selection_is_uniform() {
        let picks = (0..10_000u64)
            .filter(|&seed| baseline_rnd(&[0.1, 0.9], seed).unwrap() == 0.1)
            .count();
        let freq = picks as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "freq {freq}");
        let per_stream = (0..10_000u64).filter(|&i| rnd_index(2, 3, i) == 0).count();
        assert!((per_stream as f64 / 10_000.0 - 0.5).abs() <= 0.02);
    }

    #[test]
    fn mxd_examples() {
        assert_eq!(baseline_mxd(&[0.2, 0.8], Label::BonaFide).unwrap(), 0.2);
        assert_eq!(baseline_mxd(&[0.2, 0.8], Label::Morphed).unwrap(), 0.8);
        assert_eq!(baseline_mxd(&[0.6; 4], Label::Morphed).unwrap(), 0.6);
        assert_eq!(baseline_mxd(&[0.6; 4], Label::BonaFide).unwrap(), 0.6);
    }

    #[test]
    fn strategy_text_roundtrip() {
        for s in [
            "avg@dfr",
            "med@dfr",
            "vote:0.3@siamese",
            "wavg:magface/median@dfr",
            "wavg:illum/100@dfr",
            "wsum:synth/id@synth",
            "wavg:magface/median=25.77@dfr",
            "bq:illum@demorphing",
            "rnd:42@dfr",
            "mxd@dfr",
        ] {
            let parsed: FusionStrategy = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        assert_eq!("vote@x".parse::<FusionStrategy>().unwrap().to_string(), "vote:0.5@x");
        assert_eq!("wavg:q@x".parse::<FusionStrategy>().unwrap().to_string(), "wavg:q/id@x");
        for bad in ["avg", "foo@x", "vote:2@x", "rnd@x", "bq@x", "avg/100@x", "avg@"] {
            assert!(bad.parse::<FusionStrategy>().is_err(), "{bad}");
        }
    }
}
