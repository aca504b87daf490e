//! Settings files, flag/file merging, and run manifests.
//!
//! A run is configured by command-line flags plus an optional flat
//! `key=value` file; flags win on conflict. Every resolved setting is
//! recorded under its key, and the recorded pairs become both the
//! `manifest.txt` in the output directory and the `config` object embedded
//! in every JSON artifact. Because the echo is produced by the same call
//! that hands the value to the pipeline, what ran and what is reported
//! cannot drift apart.
//!
//! The worker-pool size and the output directory are deliberately never
//! recorded: neither influences a single output byte, and keeping them out
//! of the manifest makes "same manifest, same bytes" hold across machines
//! and pool sizes.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use textpart_core::{Error, Label, LabelMap, Representation, Result};

/// Parsed `key=value` file. Blank lines and `#` comments are skipped; keys
/// and values are trimmed at the ends.
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> FileConfig {
        FileConfig {
            map: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)?;
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    i + 1
                )));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { map })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }
}

/// The effective settings of one run, accumulated as they are resolved.
pub struct Ctx {
    command: &'static str,
    file: FileConfig,
    echo: Vec<(String, String)>,
}

impl Ctx {
    /// Loads the optional settings file. A file written for a different
    /// subcommand is refused rather than silently misread.
    pub fn new(command: &'static str, config_path: Option<&str>) -> Result<Ctx> {
        let file = match config_path {
            Some(p) => FileConfig::load(Path::new(p))?,
            None => FileConfig::empty(),
        };
        if let Some(declared) = file.raw("command") {
            if declared != command {
                return Err(Error::Config(format!(
                    "config file was written for `{declared}`, not `{command}`"
                )));
            }
        }
        Ok(Ctx {
            command,
            file,
            echo: vec![("command".to_string(), command.to_string())],
        })
    }

    pub fn command(&self) -> &'static str {
        self.command
    }

    fn record(&mut self, key: &str, value: String) {
        self.echo.push((key.to_string(), value));
    }

    /// Reads a key from the file without recording it. Only for settings
    /// that must stay out of the manifest.
    pub fn peek<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.file_value(key)
    }

    fn file_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.file.raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Config(format!("config {key}={raw:?}: {e}"))),
        }
    }

    /// Flag, else file, else default; the winner is recorded.
    pub fn resolve<T>(&mut self, cli: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match cli {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.record(key, value.to_string());
        Ok(value)
    }

    /// Like `resolve` but with no default; recorded only when present.
    pub fn resolve_opt<T>(&mut self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match cli {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        if let Some(v) = &value {
            let s = v.to_string();
            self.record(key, s);
        }
        Ok(value)
    }

    /// A setting that must come from the flag or the file.
    pub fn require(&mut self, cli: Option<String>, key: &str) -> Result<String> {
        match self.resolve_opt(cli, key)? {
            Some(v) => Ok(v),
            None => Err(Error::Config(format!(
                "`--{}` is required (flag or config key `{key}`)",
                key.replace('_', "-")
            ))),
        }
    }

    /// Boolean switch: present on the command line wins, otherwise the file.
    pub fn resolve_flag(&mut self, cli: bool, key: &str) -> Result<bool> {
        let value = if cli {
            true
        } else {
            match self.file.raw(key) {
                None => false,
                Some(raw) => parse_bool(raw).ok_or_else(|| {
                    Error::Config(format!("config {key}={raw:?}: expected true or false"))
                })?,
            }
        };
        self.record(key, value.to_string());
        Ok(value)
    }

    /// Class names given as "A,B"; echoed canonically.
    pub fn resolve_labels(&mut self, cli: Option<String>) -> Result<LabelMap> {
        let raw = match cli {
            Some(v) => Some(v),
            None => self.file.raw("labels").map(str::to_string),
        };
        let map = match raw {
            None => LabelMap::default(),
            Some(raw) => {
                let (a, b) = raw.split_once(',').ok_or_else(|| {
                    Error::Config(format!(
                        "labels {raw:?}: expected two comma-separated class names"
                    ))
                })?;
                LabelMap::new(a.trim(), b.trim())?
            }
        };
        self.record(
            "labels",
            format!("{},{}", map.name(Label::A), map.name(Label::B)),
        );
        Ok(map)
    }

    /// Comma-separated stream names, deduplicated in the order given.
    pub fn resolve_reps(&mut self, cli: Option<String>) -> Result<Vec<Representation>> {
        let raw = match cli {
            Some(v) => v,
            None => self
                .file
                .raw("rep")
                .map(str::to_string)
                .unwrap_or_else(|| "lexeme".to_string()),
        };
        let reps = parse_reps(&raw)?;
        self.record("rep", join_reps(&reps));
        Ok(reps)
    }

    /// Stream names, but nothing is assumed when absent.
    pub fn resolve_reps_opt(&mut self, cli: Option<String>) -> Result<Option<Vec<Representation>>> {
        let raw = match cli {
            Some(v) => Some(v),
            None => self.file.raw("rep").map(str::to_string),
        };
        match raw {
            None => Ok(None),
            Some(raw) => {
                let reps = parse_reps(&raw)?;
                self.record("rep", join_reps(&reps));
                Ok(Some(reps))
            }
        }
    }

    /// A list of positive sizes with span syntax: "1,2,5..8" means
    /// {1,2,5,6,7,8}. Sorted and deduplicated; echoed expanded.
    pub fn resolve_list(
        &mut self,
        cli: Option<String>,
        key: &str,
        default: &[usize],
    ) -> Result<Vec<usize>> {
        let raw = match cli {
            Some(v) => Some(v),
            None => self.file.raw(key).map(str::to_string),
        };
        let list = match raw {
            None => default.to_vec(),
            Some(raw) => parse_spans(&raw)
                .map_err(|msg| Error::Config(format!("{key} {raw:?}: {msg}")))?,
        };
        self.record(key, join_usizes(&list));
        Ok(list)
    }

    /// Block-removal experiments: comma-separated groups of `+`-joined
    /// 1-based length ranks, e.g. "1,2,3,1+2".
    pub fn resolve_removals(&mut self, cli: Option<String>) -> Result<Vec<Vec<usize>>> {
        let raw = match cli {
            Some(v) => v,
            None => self
                .file
                .raw("removals")
                .map(str::to_string)
                .unwrap_or_else(|| "1".to_string()),
        };
        let mut groups = Vec::new();
        for part in raw.split(',') {
            let mut group = Vec::new();
            for rank in part.split('+') {
                let rank = rank.trim();
                let rank: usize = rank.parse().map_err(|_| {
                    Error::Config(format!("removals {raw:?}: bad rank {rank:?}"))
                })?;
                group.push(rank);
            }
            groups.push(group);
        }
        let echo: Vec<String> = groups.iter().map(|g| join_plus(g)).collect();
        self.record("removals", echo.join(","));
        Ok(groups)
    }

    /// The recorded settings as `manifest.txt` content.
    pub fn manifest_text(&self) -> String {
        let mut s = format!(
            "# re-run: textpart {} --config manifest.txt --out <dir>\n",
            self.command
        );
        for (k, v) in &self.echo {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    /// The recorded settings as the `config` object of a JSON artifact.
    pub fn echo_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.echo {
            map.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        serde_json::Value::Object(map)
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn parse_reps(raw: &str) -> Result<Vec<Representation>> {
    let mut reps: Vec<Representation> = Vec::new();
    for part in raw.split(',') {
        let rep: Representation = part.trim().parse()?;
        if !reps.contains(&rep) {
            reps.push(rep);
        }
    }
    Ok(reps)
}

fn join_reps(reps: &[Representation]) -> String {
    let names: Vec<&str> = reps.iter().map(|r| r.as_str()).collect();
    names.join(",")
}

fn parse_spans(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad span start {lo:?}"))?;
            let hi: usize = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad span end {hi:?}"))?;
            if lo > hi {
                return Err(format!("empty span {part:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| format!("bad number {part:?}"))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn join_usizes(list: &[usize]) -> String {
    let parts: Vec<String> = list.iter().map(|v| v.to_string()).collect();
    parts.join(",")
}

fn join_plus(group: &[usize]) -> String {
    let parts: Vec<String> = group.iter().map(|v| v.to_string()).collect();
    parts.join("+")
}
