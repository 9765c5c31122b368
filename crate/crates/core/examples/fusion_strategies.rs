//! Condense one sequence of per-frame MAD scores with every fusion function.

use vmad::fusion::*;
use vmad::model::Label;

fn main() -> vmad::Result<()> {
    let scores = [0.62, 0.55, 0.91, 0.40, 0.58, 0.71];
    let quality = [0.80, 0.35, 0.10, 0.90, 0.75, 0.60];

    println!("avg           {:.4}", fuse_avg(&scores)?);
    println!("med           {:.4}", fuse_med(&scores)?);
    println!("vote(0.5)     {:.4}", fuse_vote(&scores, 0.5)?);
    println!("wavg          {:.4}", fuse_wavg(&scores, &quality)?);
    println!("best quality  {:.4}", fuse_best_quality(&scores, &quality)?);
    println!("rnd(seed 7)   {:.4}", baseline_rnd(&scores, 7)?);
    println!("mxd bona fide {:.4}", baseline_mxd(&scores, Label::BonaFide)?);
    println!("mxd morph     {:.4}", baseline_mxd(&scores, Label::Morphed)?);

    // Strategies also have a textual form used by the CLI and fused tables.
    for text in [
        "avg@dfr",
        "vote:0.3@dfr",
        "wavg:magface/median=25.77@dfr",
        "bq:illum@dfr",
    ] {
        let s: FusionStrategy = text.parse().map_err(vmad::Error::InvalidConfig)?;
        let q = s.quality_track().map(|_| &quality[..]);
        let q = match &s.kind {
            FusionKind::WAvg { .. } => q.map(|q| q.iter().map(|v| v * 25.77).collect::<Vec<_>>()),
            _ => q.map(<[f64]>::to_vec),
        };
        println!("{s:<32} {:.4}", s.fuse(&scores, q.as_deref(), None, 0)?);
    }
    Ok(())
}
