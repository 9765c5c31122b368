//! The `vmad` command-line front end.
//!
//! Every option can be given as a flag, as a `VMAD_<OPTION>` environment
//! variable, or as a `key = value` line in the file named by `--config`, in
//! that order of precedence. Each command records its resolved options next
//! to its outputs.

mod commands;
mod config;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgAction, Command};

use crate::error::{Error, Result};

pub use config::{load_config_file, parse_config_file, Resolver, Source};

#[derive(Clone, Copy)]
enum Kind {
    Value,
    List,
    Switch,
}

struct Opt {
    key: &'static str,
    value_name: &'static str,
    help: &'static str,
    kind: Kind,
}

const fn value(key: &'static str, value_name: &'static str, help: &'static str) -> Opt {
    Opt {
        key,
        value_name,
        help,
        kind: Kind::Value,
    }
}

const fn list(key: &'static str, value_name: &'static str, help: &'static str) -> Opt {
    Opt {
        key,
        value_name,
        help,
        kind: Kind::List,
    }
}

const fn switch(key: &'static str, help: &'static str) -> Opt {
    Opt {
        key,
        value_name: "",
        help,
        kind: Kind::Switch,
    }
}

const MANIFEST: Opt = value("manifest", "PATH", "Dataset manifest");
const SCORES: Opt = list(
    "scores",
    "PATH",
    "Score tables to attach (repeatable or comma-separated)",
);
const FUSED: Opt = list("fused", "PATH", "Fused score tables (repeatable or comma-separated)");
const SEED: Opt = value("seed", "N", "Random seed");
const SPLIT_FRACTION: Opt = value(
    "split_fraction",
    "F",
    "Share of attempts used for training [default: 0.5]",
);

struct Spec {
    name: &'static str,
    about: &'static str,
    opts: &'static [Opt],
}

const COMMANDS: &[Spec] = &[
    Spec {
        name: "quality",
        about: "Compute illumination uniformity and defocus tracks from frame images",
        opts: &[
            MANIFEST,
            value(
                "image_root",
                "DIR",
                "Base directory for relative image paths [default: manifest directory]",
            ),
            value("out", "PATH", "Output score table"),
        ],
    },
    Spec {
        name: "fuse",
        about: "Fuse per-frame scores into one score per attempt",
        opts: &[
            MANIFEST,
            SCORES,
            list(
                "strategies",
                "SPEC",
                "Strategies such as avg@dfr, vote@dfr, wavg:magface/median@dfr, bq:illum@dfr, rnd@dfr, mxd@dfr",
            ),
            value(
                "vote_grid",
                "START:END:STEP",
                "Threshold grid applied to every `vote@<detector>` without a threshold",
            ),
            value("seed", "N", "Seed for `rnd@<detector>` strategies"),
            value("out", "PATH", "Output fused score table"),
        ],
    },
    Spec {
        name: "eval",
        about: "Summarize fused scores: EER, BPCER10, BPCER20, BPCER100 and DET curves",
        opts: &[
            FUSED,
            value("out", "DIR", "Output directory"),
            value(
                "eer_method",
                "METHOD",
                "interpolated or midpoint [default: interpolated]",
            ),
            switch("svg", "Also write det.svg"),
        ],
    },
    Spec {
        name: "det-export",
        about: "Export the DET curve of one strategy",
        opts: &[
            FUSED,
            value(
                "strategy",
                "NAME",
                "Strategy to export (optional when the table holds one)",
            ),
            value("format", "FORMAT", "csv or svg [default: from the output extension]"),
            value("out", "PATH", "Output file"),
        ],
    },
    Spec {
        name: "train",
        about: "Train an SVR fusion model on a label-stratified split",
        opts: &[
            MANIFEST,
            SCORES,
            value(
                "layout",
                "TRACKS",
                "Feature tracks, e.g. mad:dfr,q:magface/median,q:illum/100",
            ),
            value("max_frames", "N", "Frames per track [default: 50]"),
            value("pad", "V", "Padding value for short sequences [default: 0]"),
            value("c", "C", "Box constraint [default: 1]"),
            value("gamma", "G", "RBF kernel width [default: 0.001]"),
            value("epsilon", "E", "Insensitive tube half-width [default: 0.1]"),
            value("tol", "T", "Stopping tolerance [default: 0.001]"),
            value("max_iterations", "N", "Iteration cap [default: 1000000]"),
            SPLIT_FRACTION,
            SEED,
            value("out", "PATH", "Output model file"),
        ],
    },
    Spec {
        name: "predict",
        about: "Score attempts with a trained SVR model",
        opts: &[
            MANIFEST,
            SCORES,
            value("model", "PATH", "Model file"),
            value("layout", "TRACKS", "Expected layout; checked against the model"),
            value("split", "PART", "all, train or test [default: all]"),
            SPLIT_FRACTION,
            value("seed", "N", "Split seed (required for train or test)"),
            value("out", "PATH", "Output fused score table"),
        ],
    },
    Spec {
        name: "simulate",
        about: "Generate a synthetic dataset: manifest and score table",
        opts: &[
            value("preset", "NAME", "default or large [default: default]"),
            SEED,
            value("subjects", "N", "Number of subjects"),
            value(
                "subjects_with_sequences",
                "N",
                "Subjects that own gate sequences [default: all]",
            ),
            value("sequences_per_subject", "N", "Gate sequences per subject"),
            value("bonafide_docs", "N", "Bona fide documents"),
            value("morph_docs", "N", "Morphed documents"),
            value("frames", "MIN:MAX", "Frames per sequence"),
            value("bonafide_mean", "V", "Mean bona fide MAD score"),
            value("morph_mean", "V", "Mean morph MAD score"),
            value("noise_sd", "V", "Score noise at quality 1"),
            value("coupling", "V", "Extra relative noise at quality 0"),
            value("quality_dist", "DIST", "uniform:<lo>:<hi> or beta:<a>:<b>"),
            value("out", "DIR", "Output directory"),
        ],
    },
];

const ENV_HELP: &str = "Options may also be set with VMAD_<OPTION> environment variables \
(e.g. VMAD_SEED, VMAD_SPLIT_FRACTION) or `option = value` lines in the --config file \
(VMAD_CONFIG). Precedence: flag, environment, config file, default.";

fn env_name(key: &str) -> String {
    format!("VMAD_{}", key.to_uppercase())
}

fn build_arg(o: &Opt) -> Arg {
    let arg = Arg::new(o.key)
        .long(o.key.replace('_', "-"))
        .help(o.help)
        .env(env_name(o.key));
    match o.kind {
        Kind::Value => arg.value_name(o.value_name).action(ArgAction::Set),
        Kind::List => arg
            .value_name(o.value_name)
            .action(ArgAction::Append)
            .value_delimiter(','),
        Kind::Switch => arg.action(ArgAction::SetTrue),
    }
}

/// The clap command tree.
pub fn command() -> Command {
    let mut cmd = Command::new("vmad")
        .about("Score fusion and evaluation for video-based morphing attack detection")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help(ENV_HELP)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .help("Flat `key = value` configuration file")
                .env("VMAD_CONFIG")
                .global(true),
        );
    for spec in COMMANDS {
        let mut sub = Command::new(spec.name).about(spec.about).after_help(ENV_HELP);
        for o in spec.opts {
            sub = sub.arg(build_arg(o));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn known_keys() -> BTreeSet<String> {
    COMMANDS
        .iter()
        .flat_map(|s| s.opts.iter().map(|o| o.key.to_string()))
        .collect()
}

/// Parses `args` (including the program name) and runs the subcommand.
/// `--help` and `--version` print and return `Ok`.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Error::InvalidConfig(e.render().to_string().trim_end().to_string())),
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let file = match sub.get_one::<String>("config") {
        Some(p) => load_config_file(&PathBuf::from(p))?,
        None => Default::default(),
    };
    let mut r = Resolver::new(name, sub, file, &known_keys())?;
    match name {
        "quality" => commands::quality(&mut r),
        "fuse" => commands::fuse(&mut r),
        "eval" => commands::eval(&mut r),
        "det-export" => commands::det_export(&mut r),
        "train" => commands::train(&mut r),
        "predict" => commands::predict(&mut r),
        "simulate" => commands::simulate(&mut r),
        other => unreachable!("unhandled subcommand {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_tree_is_consistent() {
        command().debug_assert();
    }

    #[test]
    fn every_subcommand_exists() {
        let cmd = command();
        for name in ["quality", "fuse", "eval", "train", "predict", "simulate", "det-export"] {
            assert!(cmd.find_subcommand(name).is_some(), "{name}");
        }
    }
}
