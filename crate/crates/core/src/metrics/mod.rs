//! APCER, BPCER, DET curves, EER and BPCER at fixed APCER.
//!
//! Higher scores mean "more likely morphed". An attempt is classified as a
//! morph when its score is strictly greater than the threshold, so
//! `APCER(t) = #{morph <= t} / M` and `BPCER(t) = #{bona fide > t} / B`.

mod export;

use crate::error::{Error, Result};
use crate::fusion::VmadScore;
use crate::model::Label;

pub use export::{det_svg, write_det_table, write_summary_table, DET_HEADER, SUMMARY_HEADER};

/// APCER ceilings behind BPCER10, BPCER20 and BPCER100.
pub const OPERATING_POINTS: [f64; 3] = [0.10, 0.05, 0.01];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledScoreSet {
    pub bonafide: Vec<f64>,
    pub morph: Vec<f64>,
}

impl LabeledScoreSet {
    pub fn new(bonafide: Vec<f64>, morph: Vec<f64>) -> Self {
        LabeledScoreSet { bonafide, morph }
    }

    /// Splits fused scores by label; unlabeled attempts are ignored.
    pub fn from_scores<'a>(scores: impl IntoIterator<Item = &'a VmadScore>) -> Self {
        let mut set = LabeledScoreSet::default();
        for s in scores {
            match s.attempt.label {
                Some(Label::BonaFide) => set.bonafide.push(s.value),
                Some(Label::Morphed) => set.morph.push(s.value),
                None => {}
            }
        }
        set
    }

    fn check(&self) -> Result<()> {
        if self.bonafide.is_empty() {
            return Err(Error::EmptySet("bona fide scores"));
        }
        if self.morph.is_empty() {
            return Err(Error::EmptySet("morph scores"));
        }
        if let Some(&v) = self.bonafide.iter().chain(&self.morph).find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteScore(v));
        }
        Ok(())
    }
}

/// Groups fused scores by strategy name, in order of first appearance.
pub fn group_by_strategy(scores: &[VmadScore]) -> Vec<(String, LabeledScoreSet)> {
    let mut groups: Vec<(String, LabeledScoreSet)> = Vec::new();
    for s in scores {
        let idx = match groups.iter().position(|(name, _)| *name == s.strategy) {
            Some(i) => i,
            None => {
                groups.push((s.strategy.clone(), LabeledScoreSet::default()));
                groups.len() - 1
            }
        };
        let set = &mut groups[idx].1;
        match s.attempt.label {
            Some(Label::BonaFide) => set.bonafide.push(s.value),
            Some(Label::Morphed) => set.morph.push(s.value),
            None => {}
        }
    }
    groups
}

pub fn apcer(morph_scores: &[f64], thr: f64) -> Result<f64> {
    if morph_scores.is_empty() {
        return Err(Error::EmptySet("morph scores"));
    }
    let missed = morph_scores.iter().filter(|&&s| s <= thr).count();
    Ok(missed as f64 / morph_scores.len() as f64)
}

pub fn bpcer(bonafide_scores: &[f64], thr: f64) -> Result<f64> {
    if bonafide_scores.is_empty() {
        return Err(Error::EmptySet("bona fide scores"));
    }
    let rejected = bonafide_scores.iter().filter(|&&s| s > thr).count();
    Ok(rejected as f64 / bonafide_scores.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    pub apcer: f64,
    pub bpcer: f64,
}

/// Operating points ordered by strictly increasing threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCurve {
    pub points: Vec<DetPoint>,
}

/// One point per distinct score, bracketed by sentinel thresholds just
/// below the minimum and just above the maximum score.
pub fn det_curve(set: &LabeledScoreSet) -> Result<DetCurve> {
    set.check()?;
    let mut bona = set.bonafide.clone();
    let mut morph = set.morph.clone();
    bona.sort_by(f64::total_cmp);
    morph.sort_by(f64::total_cmp);
    let (nb, nm) = (bona.len(), morph.len());

    let mut thresholds: Vec<f64> = bona.iter().chain(&morph).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let lo = thresholds[0].next_down();
    let hi = thresholds[thresholds.len() - 1].next_up();

    let mut points = Vec::with_capacity(thresholds.len() + 2);
    points.push(DetPoint {
        threshold: lo,
        apcer: 0.0,
        bpcer: 1.0,
    });
    // Two pointers over the sorted populations: counts of scores <= t.
    let (mut ib, mut im) = (0, 0);
    for &t in &thresholds {
        while ib < nb && bona[ib] <= t {
            ib += 1;
        }
        while im < nm && morph[im] <= t {
            im += 1;
        }
        points.push(DetPoint {
            threshold: t,
            apcer: im as f64 / nm as f64,
            bpcer: (nb - ib) as f64 / nb as f64,
        });
    }
    points.push(DetPoint {
        threshold: hi,
        apcer: 1.0,
        bpcer: 0.0,
    });
    Ok(DetCurve { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EerMethod {
    /// Linear interpolation between the two points straddling APCER = BPCER.
    #[default]
    Interpolated,
    /// Mean of APCER and BPCER at whichever straddling point is closer to
    /// equality.
    Midpoint,
}

impl std::str::FromStr for EerMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interpolated" => Ok(EerMethod::Interpolated),
            "midpoint" => Ok(EerMethod::Midpoint),
            _ => Err(format!("expected `interpolated` or `midpoint`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eer {
    pub rate: f64,
    pub threshold: f64,
}

pub fn eer(curve: &DetCurve) -> Result<Eer> {
    eer_with(curve, EerMethod::Interpolated)
}

pub fn eer_with(curve: &DetCurve, method: EerMethod) -> Result<Eer> {
    let pts = &curve.points;
    let diff = |p: &DetPoint| p.apcer - p.bpcer;
    let k = pts.iter().position(|p| diff(p) >= 0.0).ok_or(Error::DegenerateCurve)?;
    let cur = pts[k];
    if diff(&cur) == 0.0 {
        return Ok(Eer {
            rate: cur.apcer,
            threshold: cur.threshold,
        });
    }
    if k == 0 {
        return Err(Error::DegenerateCurve);
    }
    let prev = pts[k - 1];
    match method {
        EerMethod::Interpolated => {
            let (d0, d1) = (diff(&prev), diff(&cur));
            let s = -d0 / (d1 - d0);
            Ok(Eer {
                rate: prev.apcer + s * (cur.apcer - prev.apcer),
                threshold: prev.threshold + s * (cur.threshold - prev.threshold),
            })
        }
        EerMethod::Midpoint => {
            let p = if diff(&prev).abs() <= diff(&cur).abs() {
                prev
            } else {
                cur
            };
            Ok(Eer {
                rate: (p.apcer + p.bpcer) / 2.0,
                threshold: p.threshold,
            })
        }
    }
}

/// Lowest BPCER over operating points with APCER at most `alpha`; 1.0 if none.
pub fn bpcer_at_apcer(curve: &DetCurve, alpha: f64) -> f64 {
    curve
        .points
        .iter()
        .filter(|p| p.apcer <= alpha)
        .map(|p| p.bpcer)
        .fold(1.0, f64::min)
}

/// The `eer, bpcer10, bpcer20, bpcer100` row for one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub strategy: String,
    pub eer: f64,
    pub bpcer10: f64,
    pub bpcer20: f64,
    pub bpcer100: f64,
}

impl Summary {
    pub fn from_curve(strategy: impl Into<String>, curve: &DetCurve, method: EerMethod) -> Result<Self> {
        let [b10, b20, b100] = OPERATING_POINTS.map(|a| bpcer_at_apcer(curve, a));
        Ok(Summary {
            strategy: strategy.into(),
            eer: eer_with(curve, method)?.rate,
            bpcer10: b10,
            bpcer20: b20,
            bpcer100: b100,
        })
    }
}

pub fn summarize(strategy: impl Into<String>, set: &LabeledScoreSet, method: EerMethod) -> Result<Summary> {
    Summary::from_curve(strategy, &det_curve(set)?, method)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(b: &[f64], m: &[f64]) -> LabeledScoreSet {
        LabeledScoreSet::new(b.to_vec(), m.to_vec())
    }

    #[test]
    fn apcer_examples() {
        assert_eq!(apcer(&[0.8, 0.9], 0.5).unwrap(), 0.0);
        assert_eq!(apcer(&[0.2, 0.8], 0.5).unwrap(), 0.5);
        assert_eq!(apcer(&[0.2, 0.8], 0.8).unwrap(), 1.0);
        assert!(apcer(&[], 0.5).is_err());
    }

    #[test]
    fn bpcer_examples() {
        assert_eq!(bpcer(&[0.1, 0.2], 0.5).unwrap(), 0.0);
        assert_eq!(bpcer(&[0.1, 0.9], 0.5).unwrap(), 0.5);
        assert_eq!(bpcer(&[0.1, 0.9], 0.05).unwrap(), 1.0);
        assert!(bpcer(&[], 0.5).is_err());
    }

    #[test]
    fn perfect_separation() {
        let curve = det_curve(&set(&[0.1], &[0.9])).unwrap();
        assert!(curve.points.iter().any(|p| p.apcer == 0.0 && p.bpcer == 0.0));
        assert_eq!(eer(&curve).unwrap().rate, 0.0);
        for a in OPERATING_POINTS {
            assert_eq!(bpcer_at_apcer(&curve, a), 0.0);
        }
    }

    #[test]
    fn identical_populations() {
        let s = [0.1, 0.3, 0.5, 0.7];
        let curve = det_curve(&set(&s, &s)).unwrap();
        for p in &curve.points {
            assert!((p.apcer + p.bpcer - 1.0).abs() < 1e-15);
        }
        assert_eq!(eer(&curve).unwrap().rate, 0.5);
    }

    #[test]
    fn two_by_two_eer() {
        // Any threshold in [0.3, 0.4) misclassifies one attempt of each class.
        let curve = det_curve(&set(&[0.1, 0.4], &[0.3, 0.8])).unwrap();
        let e = eer(&curve).unwrap();
        assert_eq!(e.rate, 0.5);
        assert!((0.3..0.4).contains(&e.threshold));
    }

    #[test]
    fn curve_shape() {
        let curve = det_curve(&set(&[0.2, 0.2, 0.5], &[0.4, 0.9])).unwrap();
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!((first.apcer, first.bpcer), (0.0, 1.0));
        assert_eq!((last.apcer, last.bpcer), (1.0, 0.0));
        assert_eq!(curve.points.len(), 4 + 2);
        assert!(curve.points.windows(2).all(|w| w[0].threshold < w[1].threshold));
    }

    #[test]
    fn eer_interpolates() {
        // Points (0,1) (0,.5) (.5,.5)... gives equality directly; build a
        // curve whose crossing falls between points instead.
        let curve = DetCurve {
            points: vec![
                DetPoint {
                    threshold: 0.0,
                    apcer: 0.0,
                    bpcer: 1.0,
                },
                DetPoint {
                    threshold: 1.0,
                    apcer: 0.2,
                    bpcer: 0.4,
                },
                DetPoint {
                    threshold: 2.0,
                    apcer: 0.6,
                    bpcer: 0.2,
                },
                DetPoint {
                    threshold: 3.0,
                    apcer: 1.0,
                    bpcer: 0.0,
                },
            ],
        };
        // diff goes -0.2 -> 0.4, so s = 1/3.
        let e = eer(&curve).unwrap();
        assert!((e.rate - (0.2 + 0.4 / 3.0)).abs() < 1e-12);
        assert!((e.threshold - (1.0 + 1.0 / 3.0)).abs() < 1e-12);
        let m = eer_with(&curve, EerMethod::Midpoint).unwrap();
        assert!((m.rate - 0.3).abs() < 1e-12);
        assert_eq!(m.threshold, 1.0);
    }

    #[test]
    fn degenerate_curve() {
        let curve = DetCurve {
            points: vec![DetPoint {
                threshold: 0.0,
                apcer: 0.0,
                bpcer: 1.0,
            }],
        };
        assert!(matches!(eer(&curve), Err(Error::DegenerateCurve)));
    }

    #[test]
    fn empty_and_non_finite() {
        assert!(matches!(det_curve(&set(&[], &[0.1])), Err(Error::EmptySet(_))));
        assert!(matches!(det_curve(&set(&[0.1], &[])), Err(Error::EmptySet(_))));
        assert!(matches!(
            det_curve(&set(&[f64::NAN], &[0.1])),
            Err(Error::NonFiniteScore(_))
        ));
    }

    #[test]
    fn summary_columns() {
        let s = summarize("avg@x", &set(&[0.1, 0.2], &[0.8, 0.9]), EerMethod::default()).unwrap();
        assert_eq!((s.eer, s.bpcer10, s.bpcer20, s.bpcer100), (0.0, 0.0, 0.0, 0.0));
    }
}
