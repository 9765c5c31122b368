//! Train an epsilon-SVR on fixed-length MAD + quality vectors and compare it
//! with average fusion on a held-out split.

use vmad::fusion::{apply_strategy, FusionStrategy};
use vmad::svr::*;
use vmad::synth::{generate_scenario, ScenarioConfig};

fn main() -> vmad::Result<()> {
    let ds = generate_scenario(&ScenarioConfig {
        n_subjects: 30,
        n_bonafide_docs: 60,
        n_morph_docs: 120,
        seed: 3,
        ..Default::default()
    })?;
    let (train, test) = split_dataset(&ds.attempts, 0.5, 3)?;
    println!(
        "train {:?}, test {:?} (bona fide, morph)",
        label_counts(&train),
        label_counts(&test)
    );

    let layout = FeatureLayout::parse_tracks("mad:synth,q:synth")?;
    println!("layout {layout}: {} features", layout.dimension());
    let (model, stats) = train_fusion(&ds, &train, &layout, &TrainParams::default())?;
    println!(
        "{} iterations, dual objective {:.4}, {} support vectors ({} at the bound)",
        stats.iterations, stats.dual_objective, stats.support_vectors, stats.bounded_support_vectors
    );

    let svr = predict_attempts(&ds, &test, &model)?;
    let avg: FusionStrategy = "avg@synth".parse().map_err(vmad::Error::InvalidConfig)?;
    let avg = apply_strategy(&ds, &test, &avg)?;
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |e| format!("{e:.4}"));
    println!(
        "test EER: {} {}, avg {}",
        strategy_name(&layout),
        show(scores_eer(&svr)),
        show(scores_eer(&avg))
    );

    let text = write_model(&model);
    let back = parse_model(&text)?;
    assert_eq!(back, model);
    println!("model file: {} lines", text.lines().count());
    Ok(())
}
