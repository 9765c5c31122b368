mod common;

use vmad::model::*;
use vmad::synth::*;

use common::spearman;

/// (quality, |score - label mean|) for every attempt frame.
fn deviations(cfg: &ScenarioConfig) -> Vec<(f64, f64)> {
    let ds = generate_scenario(cfg).unwrap();
    let mad = Track::mad(SYNTH_TRACK);
    let q = Track::quality(SYNTH_TRACK);
    let mut out = Vec::new();
    for a in &ds.attempts {
        let mean = match a.label.unwrap() {
            Label::BonaFide => cfg.bonafide_score_mean,
            Label::Morphed => cfg.morph_score_mean,
        };
        let s = ds.track_values(a, &mad).unwrap();
        let qs = ds.track_values(a, &q).unwrap();
        out.extend(qs.into_iter().zip(s).map(|(q, s)| (q, (s - mean).abs())));
    }
    out
}

fn config(coupling: f64) -> ScenarioConfig {
    ScenarioConfig {
        bonafide_score_mean: 0.45,
        morph_score_mean: 0.55,
        base_noise_sd: 0.1,
        quality_noise_coupling: coupling,
        n_bonafide_docs: 80,
        n_morph_docs: 120,
        seed: 17,
        ..Default::default()
    }
}

#[test]
fn no_coupling_means_flat_noise() {
    let mut d = deviations(&config(0.0));
    assert!(d.len() >= 10_000, "{}", d.len());
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = d.len() / 4;
    let rms = |part: &[(f64, f64)]| (part.iter().map(|p| p.1 * p.1).sum::<f64>() / part.len() as f64).sqrt();
    let sds: Vec<f64> = (0..4).map(|i| rms(&d[i * k..(i + 1) * k])).collect();
    let max = sds.iter().copied().fold(f64::MIN, f64::max);
    let min = sds.iter().copied().fold(f64::MAX, f64::min);
    assert!(max / min <= 1.1 && min / max >= 0.9, "{sds:?}");
}

#[test]
fn coupling_makes_good_frames_more_reliable() {
    for coupling in [0.5, 1.0, 2.0] {
        let d = deviations(&config(coupling));
        assert!(d.len() >= 10_000);
        let (q, e): (Vec<f64>, Vec<f64>) = d.into_iter().unzip();
        let rho = spearman(&q, &e);
        // One-sided test at p < 0.01: z = rho * sqrt(n - 1) < -2.326.
        let z = rho * ((q.len() - 1) as f64).sqrt();
        assert!(z < -2.326, "coupling {coupling}: rho {rho}");
    }
}

#[test]
fn deterministic_under_seed() {
    let cfg = ScenarioConfig::default().with_seed(5);
    let a = generate_scenario(&cfg).unwrap();
    let b = generate_scenario(&cfg).unwrap();
    assert_eq!(write_manifest(&a), write_manifest(&b));
    assert_eq!(write_score_table(&a), write_score_table(&b));
    let c = generate_scenario(&cfg.clone().with_seed(6)).unwrap();
    assert_ne!(write_score_table(&a), write_score_table(&c));
}

#[test]
fn labels_follow_pairing_rules() {
    let ds = generate_scenario(&ScenarioConfig::default().with_seed(2)).unwrap();
    assert_eq!(ds.attempts, pair_attempts(&ds));
    assert!(validate_dataset(&ds).is_clean());
}

#[test]
fn suite_has_one_dataset_per_seed() {
    let seeds: Vec<u64> = (0..20).collect();
    let suite = scenario_suite(&ScenarioConfig::default(), &seeds).unwrap();
    assert_eq!(suite.len(), 20);
    assert_ne!(suite[0], suite[1]);
    let again = scenario_suite(&ScenarioConfig::default(), &[3, 3]).unwrap();
    assert_eq!(again[0], again[1]);
}

#[test]
fn large_scale_counts() {
    let ds = generate_scenario(&ScenarioConfig::large_scale()).unwrap();
    let n = ds.attempts.len();
    assert!((1000..=1600).contains(&n), "{n}");
    assert_eq!(ds.documents.len(), 205 + 1142);
}

#[test]
fn zero_noise_is_exact() {
    let cfg = ScenarioConfig {
        base_noise_sd: 0.0,
        ..Default::default()
    };
    let ds = generate_scenario(&cfg).unwrap();
    let mad = Track::mad(SYNTH_TRACK);
    for a in &ds.attempts {
        let want = match a.label.unwrap() {
            Label::BonaFide => cfg.bonafide_score_mean,
            Label::Morphed => cfg.morph_score_mean,
        };
        assert!(ds.track_values(a, &mad).unwrap().iter().all(|&s| s == want));
    }
}
