//! The full command-line pipeline in a temporary directory:
//! simulate, fuse, eval, train, predict.

use vmad::cli;

fn run(args: &[&str]) -> vmad::Result<()> {
    println!("$ vmad {}", args.join(" "));
    cli::run(std::iter::once("vmad").chain(args.iter().copied()))
}

fn main() -> vmad::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| vmad::Error::InvalidConfig(e.to_string()))?;
    let d = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    run(&["simulate", "--seed", "11", "--coupling", "2", "--out", &d("sim")])?;
    let (manifest, scores) = (d("sim/manifest.csv"), d("sim/scores.csv"));
    run(&[
        "fuse",
        "--manifest",
        &manifest,
        "--scores",
        &scores,
        "--strategies",
        "avg@synth,med@synth,vote@synth,wavg:synth@synth,rnd@synth,mxd@synth",
        "--seed",
        "11",
        "--out",
        &d("fused.csv"),
    ])?;
    run(&["eval", "--fused", &d("fused.csv"), "--out", &d("eval")])?;
    print!("{}", std::fs::read_to_string(d("eval/summary.csv")).unwrap_or_default());

    run(&[
        "train",
        "--manifest",
        &manifest,
        "--scores",
        &scores,
        "--layout",
        "mad:synth,q:synth",
        "--seed",
        "11",
        "--out",
        &d("model.txt"),
    ])?;
    print!("{}", std::fs::read_to_string(d("model.report.txt")).unwrap_or_default());
    run(&[
        "predict",
        "--manifest",
        &manifest,
        "--scores",
        &scores,
        "--model",
        &d("model.txt"),
        "--split",
        "test",
        "--seed",
        "11",
        "--out",
        &d("svr.csv"),
    ])?;
    run(&["eval", "--fused", &d("svr.csv"), "--out", &d("eval_svr")])?;
    print!(
        "{}",
        std::fs::read_to_string(d("eval_svr/summary.csv")).unwrap_or_default()
    );
    Ok(())
}
