//! Versioned plain-text model file.
//!
//! ```text
//! vmad-svr-model 1
//! c=1
//! gamma=0.001
//! epsilon=0.1
//! bias=0.4321
//! dimension=100
//! layout=mad:synth,q:synth/id      (or `layout=none`)
//! max_frames=50
//! pad_value=0
//! support_vectors=2
//! <coefficient>,<x_1>,...,<x_dimension>
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{FeatureLayout, SvrModel};
use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic};
use crate::model::fmt_f64;

pub const MODEL_MAGIC: &str = "vmad-svr-model 1";

pub fn write_model(model: &SvrModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC}");
    let _ = writeln!(out, "c={}", fmt_f64(model.c));
    let _ = writeln!(out, "gamma={}", fmt_f64(model.gamma));
    let _ = writeln!(out, "epsilon={}", fmt_f64(model.epsilon));
    let _ = writeln!(out, "bias={}", fmt_f64(model.bias));
    let _ = writeln!(out, "dimension={}", model.dimension);
    match &model.layout {
        Some(l) => {
            let _ = writeln!(out, "layout={l}");
            let _ = writeln!(out, "max_frames={}", l.max_frames);
            let _ = writeln!(out, "pad_value={}", fmt_f64(l.pad_value));
        }
        None => {
            let _ = writeln!(out, "layout=none");
        }
    }
    let _ = writeln!(out, "support_vectors={}", model.support_vectors.len());
    for (sv, a) in model.support_vectors.iter().zip(&model.dual_coefficients) {
        out.push_str(&fmt_f64(*a));
        for v in sv {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn save_model(model: &SvrModel, path: &Path) -> Result<()> {
    write_atomic(path, write_model(model).as_bytes())
}

pub fn load_model(path: &Path) -> Result<SvrModel> {
    parse_model(&read_to_string(path)?)
}

pub fn parse_model(text: &str) -> Result<SvrModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |key: &str| -> Result<(usize, String)> {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(0, key, "unexpected end of model file"))?;
        if key.is_empty() {
            return Ok((n, line.to_string()));
        }
        let value = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| Error::parse(n, key, format!("expected `{key}=`")))?;
        Ok((n, value.to_string()))
    };
    let (n, magic) = next("")?;
    if magic != MODEL_MAGIC {
        return Err(Error::parse(n, "header", format!("expected `{MODEL_MAGIC}`")));
    }
    fn num<T: std::str::FromStr>(key: &str, (n, v): (usize, String)) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        v.parse().map_err(|e| Error::parse(n, key, format!("{e}")))
    }
    let c: f64 = num("c", next("c")?)?;
    let gamma: f64 = num("gamma", next("gamma")?)?;
    let epsilon: f64 = num("epsilon", next("epsilon")?)?;
    let bias: f64 = num("bias", next("bias")?)?;
    let dimension: usize = num("dimension", next("dimension")?)?;
    let (ln, layout_spec) = next("layout")?;
    let layout = if layout_spec == "none" {
        None
    } else {
        let mut l = FeatureLayout::parse_tracks(&layout_spec).map_err(|e| Error::parse(ln, "layout", e.to_string()))?;
        l.max_frames = num("max_frames", next("max_frames")?)?;
        l.pad_value = num("pad_value", next("pad_value")?)?;
        l.validate().map_err(|e| Error::parse(ln, "layout", e.to_string()))?;
        if l.dimension() != dimension {
            return Err(Error::parse(ln, "layout", "layout does not match dimension"));
        }
        Some(l)
    };
    let count: usize = num("support_vectors", next("support_vectors")?)?;
    let mut support_vectors = Vec::with_capacity(count);
    let mut dual_coefficients = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, row) = next("")?;
        let values = row
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(n, "support_vector", format!("{e}")))?;
        if values.len() != dimension + 1 {
            return Err(Error::parse(
                n,
                "support_vector",
                format!("expected {} values, found {}", dimension + 1, values.len()),
            ));
        }
        dual_coefficients.push(values[0]);
        support_vectors.push(values[1..].to_vec());
    }
    Ok(SvrModel {
        support_vectors,
        dual_coefficients,
        bias,
        gamma,
        c,
        epsilon,
        dimension,
        layout,
    })
}
