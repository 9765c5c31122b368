use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};

use super::config::Resolver;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::fusion::{apply_strategy, load_fused_table, save_fused_table, FusionKind, FusionStrategy, VmadScore};
use crate::metrics::{
    det_curve, det_svg, group_by_strategy, write_det_table, write_summary_table, DetCurve, EerMethod, LabeledScoreSet,
    Summary,
};
use crate::model::{
    attach_scores, fmt_f64, load_manifest, load_score_table, save_manifest, save_score_table, Attempt, Dataset,
    ScoreRow, Track,
};
use crate::quality::{defocus, illumination_uniformity, load_gray_image};
use crate::svr::{
    label_counts, load_model, predict_attempts, save_model, scores_eer, split_dataset, strategy_name, train_fusion,
    FeatureLayout, TrainParams,
};
use crate::synth::{generate_scenario, QualityDistribution, ScenarioConfig};

/// `<dir>/<stem>.<suffix>` next to an output file.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn save_record(r: &Resolver, path: &Path) -> Result<()> {
    write_atomic(path, r.render().as_bytes())
}

fn load_dataset(r: &mut Resolver) -> Result<Dataset> {
    let manifest = r.path("manifest")?;
    let mut ds = load_manifest(&manifest)?;
    for p in r.list("scores") {
        ds = load_score_table(Path::new(&p), ds)?;
    }
    Ok(ds)
}

fn labeled(ds: &Dataset) -> Vec<Attempt> {
    ds.attempts.iter().filter(|a| a.label.is_some()).cloned().collect()
}

fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<(T, T)> {
    let bad = || Error::InvalidConfig(format!("{what}: expected `<a>:<b>`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn quality(r: &mut Resolver) -> Result<()> {
    let manifest = r.path("manifest")?;
    let default_root = manifest
        .parent()
        .map(|p| p.to_string_lossy().into_owned())
        .unwrap_or_default();
    let root: PathBuf = r.with_default("image_root", &default_root)?;
    let out = r.path("out")?;
    let ds = load_manifest(&manifest)?;

    let mut rows = Vec::new();
    for seq in &ds.sequences {
        for frame in &seq.frames {
            let Some(rel) = &frame.image_path else {
                warn!("frame {}/{} has no image; skipped", seq.id, frame.id);
                continue;
            };
            let path = root.join(rel);
            let values = load_gray_image(&path).and_then(|img| {
                let rect = frame.face_box.unwrap_or_else(|| img.full_rect());
                Ok([
                    ("illum", illumination_uniformity(&img, rect)?),
                    ("defocus", defocus(&img, rect)?),
                ])
            });
            let values = values.map_err(|e| Error::Frame {
                sequence: seq.id.clone(),
                frame: frame.id.clone(),
                source: Box::new(e),
            })?;
            for (name, value) in values {
                rows.push(ScoreRow {
                    document: None,
                    sequence: seq.id.clone(),
                    frame: frame.id.clone(),
                    track: Track::quality(name),
                    value,
                });
            }
        }
    }
    info!("computed quality for {} frames", rows.len() / 2);
    let ds = attach_scores(ds, &rows)?;
    save_score_table(&ds, &out)?;
    save_record(r, &sibling(&out, "config.txt"))
}

/// Inclusive `start:end:step` grid, rounded to 1e-9 so that decimal steps
/// print cleanly.
pub(crate) fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::InvalidConfig(format!("vote grid `{s}`: {m}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("expected `<start>:<end>:<step>`"))?;
    let [start, end, step] = parts[..] else {
        return Err(bad("expected `<start>:<end>:<step>`"));
    };
    let unit = 0.0..=1.0;
    if step.is_nan() || step <= 0.0 || start.is_nan() || start > end || !unit.contains(&start) || !unit.contains(&end) {
        return Err(bad("need 0 <= start <= end <= 1 and step > 0"));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Expands `vote@d` over the threshold grid and binds `rnd@d` to the seed.
pub(crate) fn expand_strategies(
    items: &[String],
    grid: Option<&[f64]>,
    seed: Option<u64>,
) -> Result<Vec<FusionStrategy>> {
    let mut out = Vec::new();
    for item in items {
        if let (Some(det), Some(g)) = (item.strip_prefix("vote@"), grid) {
            out.extend(g.iter().map(|&thr| FusionStrategy::new(FusionKind::Vote { thr }, det)));
            continue;
        }
        let item = match item.strip_prefix("rnd@") {
            Some(det) => {
                let seed = seed.ok_or_else(|| Error::InvalidConfig("`rnd` strategies need `--seed`".into()))?;
                format!("rnd:{seed}@{det}")
            }
            None => item.clone(),
        };
        out.push(item.parse().map_err(Error::InvalidConfig)?);
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("no strategies given".into()));
    }
    Ok(out)
}

pub fn fuse(r: &mut Resolver) -> Result<()> {
    let ds = load_dataset(r)?;
    let items = r.list("strategies");
    let grid = r
        .optional::<String>("vote_grid", None)?
        .map(|g| parse_grid(&g))
        .transpose()?;
    let seed = r.optional::<u64>("seed", None)?;
    let out = r.path("out")?;
    let strategies = expand_strategies(&items, grid.as_deref(), seed)?;

    let mut scores = Vec::with_capacity(strategies.len() * ds.attempts.len());
    for s in &strategies {
        scores.extend(apply_strategy(&ds, &ds.attempts, s)?);
    }
    info!(
        "fused {} attempts with {} strategies",
        ds.attempts.len(),
        strategies.len()
    );
    save_fused_table(&scores, &out)?;
    save_record(r, &sibling(&out, "config.txt"))
}

fn load_fused(r: &mut Resolver) -> Result<Vec<VmadScore>> {
    let paths = r.list("fused");
    if paths.is_empty() {
        return Err(Error::InvalidConfig("`--fused` is required".into()));
    }
    let mut scores = Vec::new();
    for p in paths {
        scores.extend(load_fused_table(Path::new(&p))?);
    }
    Ok(scores)
}

fn curve_for(name: &str, set: &LabeledScoreSet) -> Result<DetCurve> {
    det_curve(set).inspect_err(|e| log::error!("strategy {name}: {e}"))
}

/// File-name-safe form of a strategy name.
pub(crate) fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn eval(r: &mut Resolver) -> Result<()> {
    let scores = load_fused(r)?;
    let out = r.path("out")?;
    let method: EerMethod = r.with_default("eer_method", "interpolated")?;
    let svg = r.flag("svg")?;

    let groups = group_by_strategy(&scores);
    let mut summaries = Vec::new();
    let mut curves = Vec::new();
    for (name, set) in &groups {
        let curve = curve_for(name, set)?;
        summaries.push(Summary::from_curve(name.clone(), &curve, method)?);
        curves.push((name.as_str(), curve));
    }

    let mut used = std::collections::BTreeSet::new();
    let mut files = Vec::new();
    for (name, curve) in &curves {
        let base = sanitize(name);
        let mut file = format!("det_{base}.csv");
        let mut k = 2;
        while !used.insert(file.clone()) {
            file = format!("det_{base}_{k}.csv");
            k += 1;
        }
        files.push((out.join(file), write_det_table(curve)));
    }
    files.push((out.join("summary.csv"), write_summary_table(&summaries)));
    if svg {
        let refs: Vec<(&str, &DetCurve)> = curves.iter().map(|(n, c)| (*n, c)).collect();
        files.push((out.join("det.svg"), det_svg(&refs)));
    }
    for (path, text) in files {
        write_atomic(&path, text.as_bytes())?;
    }
    save_record(r, &out.join("run_config.txt"))
}

pub fn det_export(r: &mut Resolver) -> Result<()> {
    let scores = load_fused(r)?;
    let wanted = r.optional::<String>("strategy", None)?;
    let out = r.path("out")?;
    let default_format = match out.extension().and_then(|e| e.to_str()) {
        Some("svg") => "svg",
        _ => "csv",
    };
    let format: String = r.with_default("format", default_format)?;

    let groups = group_by_strategy(&scores);
    let names = || groups.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(", ");
    let (name, set) = match &wanted {
        Some(w) => groups
            .iter()
            .find(|(n, _)| n == w)
            .ok_or_else(|| Error::InvalidConfig(format!("strategy `{w}` not found; available: {}", names())))?,
        None if groups.len() == 1 => &groups[0],
        None => {
            return Err(Error::InvalidConfig(format!(
                "several strategies present, choose one with `--strategy`: {}",
                names()
            )))
        }
    };
    let curve = curve_for(name, set)?;
    let text = match format.as_str() {
        "csv" => write_det_table(&curve),
        "svg" => det_svg(&[(name.as_str(), &curve)]),
        other => return Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
    };
    write_atomic(&out, text.as_bytes())?;
    save_record(r, &sibling(&out, "config.txt"))
}

fn split_params(r: &mut Resolver, seed_required: bool) -> Result<(f64, Option<u64>)> {
    let fraction = r.with_default("split_fraction", "0.5")?;
    let seed = if seed_required {
        Some(r.required("seed")?)
    } else {
        r.optional("seed", None)?
    };
    Ok((fraction, seed))
}

fn eer_field(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), fmt_f64)
}

pub fn train(r: &mut Resolver) -> Result<()> {
    let ds = load_dataset(r)?;
    let mut layout = FeatureLayout::parse_tracks(&r.required::<String>("layout")?)?;
    layout.max_frames = r.with_default("max_frames", "50")?;
    layout.pad_value = r.with_default("pad", "0")?;
    layout.validate()?;
    let defaults = TrainParams::default();
    let params = TrainParams {
        c: r.with_default("c", &defaults.c.to_string())?,
        gamma: r.with_default("gamma", &defaults.gamma.to_string())?,
        epsilon: r.with_default("epsilon", &defaults.epsilon.to_string())?,
        tol: r.with_default("tol", &defaults.tol.to_string())?,
        max_iterations: r.with_default("max_iterations", &defaults.max_iterations.to_string())?,
        ..defaults
    };
    let (fraction, seed) = split_params(r, true)?;
    let out = r.path("out")?;

    let (train, test) = split_dataset(&labeled(&ds), fraction, seed.expect("required"))?;
    let (model, stats) = train_fusion(&ds, &train, &layout, &params)?;
    let train_eer = scores_eer(&predict_attempts(&ds, &train, &model)?);
    let test_eer = scores_eer(&predict_attempts(&ds, &test, &model)?);
    let resolved = model.layout.as_ref().expect("set by train_fusion");
    info!(
        "trained {} in {} iterations; test EER {}",
        strategy_name(resolved),
        stats.iterations,
        eer_field(test_eer)
    );

    let mut report = String::from("# vmad train report\n");
    let (tb, tm) = label_counts(&train);
    let (eb, em) = label_counts(&test);
    let _ = writeln!(report, "strategy={}", strategy_name(resolved));
    let _ = writeln!(report, "layout={resolved}");
    let _ = writeln!(report, "dimension={}", model.dimension);
    let _ = writeln!(report, "train_bonafide={tb}");
    let _ = writeln!(report, "train_morph={tm}");
    let _ = writeln!(report, "test_bonafide={eb}");
    let _ = writeln!(report, "test_morph={em}");
    let _ = writeln!(report, "iterations={}", stats.iterations);
    let _ = writeln!(report, "dual_objective={}", fmt_f64(stats.dual_objective));
    let _ = writeln!(report, "support_vectors={}", stats.support_vectors);
    let _ = writeln!(report, "bounded_support_vectors={}", stats.bounded_support_vectors);
    let _ = writeln!(report, "bias={}", fmt_f64(model.bias));
    let _ = writeln!(report, "train_eer={}", eer_field(train_eer));
    let _ = writeln!(report, "test_eer={}", eer_field(test_eer));

    save_model(&model, &out)?;
    write_atomic(&sibling(&out, "report.txt"), report.as_bytes())?;
    save_record(r, &sibling(&out, "config.txt"))
}

pub fn predict(r: &mut Resolver) -> Result<()> {
    let ds = load_dataset(r)?;
    let model = load_model(&r.path("model")?)?;
    let expected = r.optional::<String>("layout", None)?;
    let split: String = r.with_default("split", "all")?;
    let (fraction, seed) = split_params(r, split != "all")?;
    let out = r.path("out")?;

    let model_layout = model
        .layout
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("model has no feature layout".into()))?;
    if let Some(spec) = expected {
        let mut layout = FeatureLayout::parse_tracks(&spec)?;
        layout.max_frames = model_layout.max_frames;
        layout.pad_value = model_layout.pad_value;
        if layout.dimension() != model.dimension {
            return Err(Error::DimensionMismatch {
                expected: model.dimension,
                actual: layout.dimension(),
            });
        }
        if !layout.is_compatible(model_layout) {
            return Err(Error::LayoutMismatch {
                expected: model_layout.to_string(),
                actual: layout.to_string(),
            });
        }
    }

    let attempts = match split.as_str() {
        "all" => ds.attempts.clone(),
        "train" | "test" => {
            let (train, test) = split_dataset(&labeled(&ds), fraction, seed.expect("required"))?;
            if split == "train" {
                train
            } else {
                test
            }
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "split must be all, train or test, got `{other}`"
            )))
        }
    };
    let scores = predict_attempts(&ds, &attempts, &model)?;
    save_fused_table(&scores, &out)?;
    save_record(r, &sibling(&out, "config.txt"))
}

pub fn simulate(r: &mut Resolver) -> Result<()> {
    let preset: String = r.with_default("preset", "default")?;
    let base = match preset.as_str() {
        "default" => ScenarioConfig::default(),
        "large" => ScenarioConfig::large_scale(),
        other => return Err(Error::InvalidConfig(format!("unknown preset `{other}`"))),
    };
    let with_seq = base
        .subjects_with_sequences
        .map_or("all".to_string(), |k| k.to_string());
    let with_seq: String = r.with_default("subjects_with_sequences", &with_seq)?;
    let (fmin, fmax) = base.frames_per_sequence;
    let frames: String = r.with_default("frames", &format!("{fmin}:{fmax}"))?;
    let config = ScenarioConfig {
        seed: r.required("seed")?,
        n_subjects: r.with_default("subjects", &base.n_subjects.to_string())?,
        subjects_with_sequences: match with_seq.as_str() {
            "all" => None,
            k => Some(
                k.parse()
                    .map_err(|_| Error::InvalidConfig(format!("`subjects-with-sequences`: bad value `{k}`")))?,
            ),
        },
        sequences_per_subject: r.with_default("sequences_per_subject", &base.sequences_per_subject.to_string())?,
        n_bonafide_docs: r.with_default("bonafide_docs", &base.n_bonafide_docs.to_string())?,
        n_morph_docs: r.with_default("morph_docs", &base.n_morph_docs.to_string())?,
        frames_per_sequence: parse_pair(&frames, "frames")?,
        bonafide_score_mean: r.with_default("bonafide_mean", &base.bonafide_score_mean.to_string())?,
        morph_score_mean: r.with_default("morph_mean", &base.morph_score_mean.to_string())?,
        base_noise_sd: r.with_default("noise_sd", &base.base_noise_sd.to_string())?,
        quality_noise_coupling: r.with_default("coupling", &base.quality_noise_coupling.to_string())?,
        quality_distribution: r
            .with_default::<QualityDistribution>("quality_dist", &base.quality_distribution.to_string())?,
    };
    let out = r.path("out")?;

    let ds = generate_scenario(&config)?;
    info!(
        "generated {} attempts over {} sequences",
        ds.attempts.len(),
        ds.sequences.len()
    );
    save_manifest(&ds, &out.join("manifest.csv"))?;
    save_score_table(&ds, &out.join("scores.csv"))?;
    save_record(r, &out.join("run_config.txt"))
}
