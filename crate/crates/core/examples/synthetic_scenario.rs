//! Generate a synthetic dataset and show how quality drives score noise.

use vmad::model::{write_manifest, Label, Track};
use vmad::synth::*;

fn main() -> vmad::Result<()> {
    for coupling in [0.0, 1.0, 2.0] {
        let config = ScenarioConfig {
            quality_noise_coupling: coupling,
            seed: 1,
            ..Default::default()
        };
        let ds = generate_scenario(&config)?;
        let (mut low, mut high) = (Vec::new(), Vec::new());
        for a in &ds.attempts {
            let mean = match a.label {
                Some(Label::BonaFide) => config.bonafide_score_mean,
                _ => config.morph_score_mean,
            };
            let s = ds.track_values(a, &Track::mad(SYNTH_TRACK))?;
            let q = ds.track_values(a, &Track::quality(SYNTH_TRACK))?;
            for (s, q) in s.into_iter().zip(q) {
                let bucket = if q < 0.5 { &mut low } else { &mut high };
                bucket.push((s - mean).abs());
            }
        }
        let mad = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "coupling {coupling}: {} attempts, mean |noise| at quality < 0.5: {:.3}, >= 0.5: {:.3}",
            ds.attempts.len(),
            mad(&low),
            mad(&high)
        );
    }

    let large = generate_scenario(&ScenarioConfig::large_scale())?;
    println!("large-scale preset: {} attempts", large.attempts.len());

    let tiny = ScenarioConfig {
        n_subjects: 3,
        n_bonafide_docs: 2,
        n_morph_docs: 1,
        frames_per_sequence: (2, 2),
        ..Default::default()
    };
    print!("\n{}", write_manifest(&generate_scenario(&tiny)?));
    Ok(())
}
