//! APCER, BPCER, DET curve, EER and BPCER at fixed APCER for two detectors.

use vmad::metrics::*;

fn main() -> vmad::Result<()> {
    let weak = LabeledScoreSet::new(
        vec![0.10, 0.22, 0.35, 0.41, 0.48, 0.52, 0.30, 0.15],
        vec![0.38, 0.55, 0.61, 0.72, 0.45, 0.83, 0.90, 0.66],
    );
    let strong = LabeledScoreSet::new(
        vec![0.05, 0.12, 0.21, 0.18, 0.33, 0.09, 0.27, 0.14],
        vec![0.58, 0.71, 0.64, 0.88, 0.92, 0.35, 0.77, 0.81],
    );

    println!("APCER at 0.5: {}", apcer(&weak.morph, 0.5)?);
    println!("BPCER at 0.5: {}", bpcer(&weak.bonafide, 0.5)?);

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for (name, set) in [("weak", &weak), ("strong", &strong)] {
        let curve = det_curve(set)?;
        let e = eer(&curve)?;
        println!("{name}: EER {:.4} at threshold {:.4}", e.rate, e.threshold);
        rows.push(Summary::from_curve(name, &curve, EerMethod::Interpolated)?);
        curves.push((name, curve));
    }
    print!("\n{}", write_summary_table(&rows));
    print!("\n{}", write_det_table(&curves[0].1));

    let refs: Vec<(&str, &DetCurve)> = curves.iter().map(|(n, c)| (*n, c)).collect();
    let path = std::env::temp_dir().join("vmad_det_example.svg");
    vmad::fsutil::write_atomic(&path, det_svg(&refs).as_bytes())?;
    println!("\nDET plot written to {}", path.display());
    Ok(())
}
