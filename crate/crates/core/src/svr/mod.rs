//! Learned fusion: epsilon-SVR with an RBF kernel over fixed-length vectors
//! of per-frame MAD and quality scores.

mod features;
mod kernel;
mod persist;
mod smo;
mod split;

use crate::error::{Error, Result};
use crate::fusion::VmadScore;
use crate::metrics::{det_curve, eer, LabeledScoreSet};
use crate::model::{Attempt, Dataset, Label};

pub use features::{assemble_features, FeatureLayout, DEFAULT_MAX_FRAMES};
pub use kernel::rbf_kernel;
pub use persist::{load_model, parse_model, save_model, write_model, MODEL_MAGIC};
pub use smo::TrainParams;
pub use split::split_dataset;

/// A trained epsilon-SVR.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha - alpha*` per support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub epsilon: f64,
    pub dimension: usize,
    pub layout: Option<FeatureLayout>,
}

/// Solver statistics from one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    pub iterations: usize,
    pub dual_objective: f64,
    pub support_vectors: usize,
    pub bounded_support_vectors: usize,
    /// `alpha - alpha*` for every training sample, in input order.
    pub coefficients: Vec<f64>,
}

impl SvrModel {
    /// Raw regression output, not clamped.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.len(),
            });
        }
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, a)| a * kernel::rbf(sv, x, self.gamma))
            .sum();
        Ok(sum + self.bias)
    }
}

/// Regression output clamped to `[0, 1]`.
pub fn predict(model: &SvrModel, features: &[f64]) -> Result<f64> {
    Ok(model.decision_value(features)?.clamp(0.0, 1.0))
}

/// Trains an epsilon-SVR; targets are 0 for bona fide and 1 for morphs.
pub fn train_svr(features: &[Vec<f64>], targets: &[f64], params: &TrainParams) -> Result<(SvrModel, TrainStats)> {
    params.validate()?;
    if features.len() != targets.len() {
        return Err(Error::DegenerateInput(format!(
            "{} feature vectors but {} targets",
            features.len(),
            targets.len()
        )));
    }
    if features.len() < 2 {
        return Err(Error::DegenerateInput("need at least two samples".into()));
    }
    let dimension = features[0].len();
    if dimension == 0 {
        return Err(Error::DegenerateInput("empty feature vectors".into()));
    }
    if let Some(bad) = features.iter().find(|f| f.len() != dimension) {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            actual: bad.len(),
        });
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite feature value".into()));
    }
    if let Some(t) = targets.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::DegenerateInput(format!("target {t} outside [0, 1]")));
    }

    let sol = smo::solve(features, targets, params)?;
    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    let mut bounded = 0;
    for (x, &a) in features.iter().zip(&sol.coefficients) {
        if a != 0.0 {
            if a.abs() >= params.c {
                bounded += 1;
            }
            support_vectors.push(x.clone());
            dual_coefficients.push(a);
        }
    }
    let stats = TrainStats {
        iterations: sol.iterations,
        dual_objective: sol.objective,
        support_vectors: support_vectors.len(),
        bounded_support_vectors: bounded,
        coefficients: sol.coefficients,
    };
    let model = SvrModel {
        support_vectors,
        dual_coefficients,
        bias: sol.bias,
        gamma: params.gamma,
        c: params.c,
        epsilon: params.epsilon,
        dimension,
        layout: None,
    };
    Ok((model, stats))
}

/// Feature matrix and regression targets for labeled attempts.
pub fn design_matrix(ds: &Dataset, attempts: &[Attempt], layout: &FeatureLayout) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut xs = Vec::with_capacity(attempts.len());
    let mut ys = Vec::with_capacity(attempts.len());
    for a in attempts {
        let label = a.label.ok_or_else(|| Error::MissingLabel(a.id()))?;
        xs.push(assemble_features(ds, a, layout)?);
        ys.push(label.target());
    }
    Ok((xs, ys))
}

/// Resolves the layout's normalization statistics on `train`, then trains.
pub fn train_fusion(
    ds: &Dataset,
    train: &[Attempt],
    layout: &FeatureLayout,
    params: &TrainParams,
) -> Result<(SvrModel, TrainStats)> {
    layout.validate()?;
    let mut layout = layout.clone();
    layout.resolve(ds, train)?;
    let (xs, ys) = design_matrix(ds, train, &layout)?;
    let (mut model, stats) = train_svr(&xs, &ys, params)?;
    model.layout = Some(layout);
    Ok((model, stats))
}

/// Name written to the strategy column for SVR predictions.
pub fn strategy_name(layout: &FeatureLayout) -> String {
    let tracks: Vec<String> = layout.tracks.iter().map(ToString::to_string).collect();
    format!("svr[{}]", tracks.join("+"))
}

/// Fused scores from a model that carries its layout.
pub fn predict_attempts(ds: &Dataset, attempts: &[Attempt], model: &SvrModel) -> Result<Vec<VmadScore>> {
    let layout = model
        .layout
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("model has no feature layout".into()))?;
    let name = strategy_name(layout);
    attempts
        .iter()
        .map(|a| {
            let x = assemble_features(ds, a, layout)?;
            Ok(VmadScore {
                attempt: a.clone(),
                strategy: name.clone(),
                value: predict(model, &x)?,
            })
        })
        .collect()
}

/// Interpolated EER of fused scores; `None` when a class is missing.
pub fn scores_eer(scores: &[VmadScore]) -> Option<f64> {
    let set = LabeledScoreSet::from_scores(scores);
    det_curve(&set).and_then(|c| eer(&c)).map(|e| e.rate).ok()
}

/// Counts per label.
pub fn label_counts(attempts: &[Attempt]) -> (usize, usize) {
    let bona = attempts.iter().filter(|a| a.label == Some(Label::BonaFide)).count();
    let morph = attempts.iter().filter(|a| a.label == Some(Label::Morphed)).count();
    (bona, morph)
}
