//! Option resolution: command-line flag, then `VMAD_*` environment variable,
//! then `--config` file, then default.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::ArgMatches;

use crate::error::{Error, Result};
use crate::fsutil::{content_lines, read_to_string};

/// Parses a flat `key = value` file. Keys are normalized to `snake_case`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (line, l) in content_lines(text) {
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| Error::parse(line, "config", "expected `key = value`"))?;
        let key = normalize_key(k.trim());
        if key.is_empty() {
            return Err(Error::parse(line, "config", "empty key"));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::parse(line, key, "duplicate key"));
        }
    }
    Ok(out)
}

pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config_file(&read_to_string(path)?)
}

fn normalize_key(k: &str) -> String {
    k.replace('-', "_")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    Env,
    File,
    Default,
}

impl Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::Flag => "flag",
            Source::Env => "env",
            Source::File => "file",
            Source::Default => "default",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    source: Source,
    /// File value that a flag or environment variable replaced.
    overridden: Option<String>,
}

/// Resolves a subcommand's options and records where each value came from.
pub struct Resolver<'a> {
    command: &'a str,
    matches: &'a ArgMatches,
    file: BTreeMap<String, String>,
    entries: BTreeMap<String, Entry>,
}

impl<'a> Resolver<'a> {
    /// `file` keys that no subcommand knows are rejected; keys belonging to
    /// other subcommands are ignored.
    pub fn new(
        command: &'a str,
        matches: &'a ArgMatches,
        file: BTreeMap<String, String>,
        known: &BTreeSet<String>,
    ) -> Result<Self> {
        if let Some(k) = file.keys().find(|k| !known.contains(*k)) {
            return Err(Error::InvalidConfig(format!("unknown config key `{k}`")));
        }
        Ok(Resolver {
            command,
            matches,
            file,
            entries: BTreeMap::new(),
        })
    }

    fn raw(&self, key: &str) -> Option<(String, Source)> {
        let source = match self.matches.value_source(key) {
            Some(ValueSource::CommandLine) => Source::Flag,
            Some(ValueSource::EnvVariable) => Source::Env,
            _ => return None,
        };
        let values: Vec<String> = self
            .matches
            .get_raw(key)?
            .map(|v| v.to_string_lossy().into_owned())
            .collect();
        Some((values.join(","), source))
    }

    /// Raw string for `key` with its source, or `default`.
    pub fn string(&mut self, key: &str, default: Option<&str>) -> Option<String> {
        let file = self.file.get(key).cloned();
        let entry = match self.raw(key) {
            Some((value, source)) => Entry {
                value,
                source,
                overridden: file,
            },
            None => match (file, default) {
                (Some(value), _) => Entry {
                    value,
                    source: Source::File,
                    overridden: None,
                },
                (None, Some(d)) => Entry {
                    value: d.to_string(),
                    source: Source::Default,
                    overridden: None,
                },
                (None, None) => return None,
            },
        };
        let value = entry.value.clone();
        self.entries.insert(key.to_string(), entry);
        Some(value)
    }

    pub fn optional<T: FromStr>(&mut self, key: &str, default: Option<&str>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.string(key, default)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| Error::InvalidConfig(format!("`--{}`: bad value `{s}`: {e}", option_name(key))))
            })
            .transpose()
    }

    pub fn required<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.optional(key, None)?
            .ok_or_else(|| Error::InvalidConfig(format!("`--{}` is required for `{}`", option_name(key), self.command)))
    }

    pub fn with_default<T: FromStr>(&mut self, key: &str, default: &str) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.optional(key, Some(default))?.expect("default supplied"))
    }

    pub fn path(&mut self, key: &str) -> Result<PathBuf> {
        self.required(key)
    }

    /// Comma-separated list; empty when unset.
    pub fn list(&mut self, key: &str) -> Vec<String> {
        self.string(key, None)
            .map(|s| {
                s.split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn flag(&mut self, key: &str) -> Result<bool> {
        self.with_default(key, "false")
    }

    /// Deterministic `key=value` record that is itself a valid config file,
    /// followed by comments naming each value's source.
    pub fn render(&self) -> String {
        let mut out = format!("# vmad {}\n", self.command);
        for (k, e) in &self.entries {
            let _ = writeln!(out, "{}={}", option_name(k), e.value);
        }
        out.push_str("# sources\n");
        for (k, e) in &self.entries {
            let _ = write!(out, "# {}: {}", option_name(k), e.source);
            if let Some(f) = &e.overridden {
                let _ = write!(out, " (file value `{f}`)");
            }
            out.push('\n');
        }
        out
    }
}

fn option_name(key: &str) -> String {
    key.replace('_', "-")
}
