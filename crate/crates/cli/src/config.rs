//! Flat `key = value` experiment configuration.
//!
//! Sources are applied in order (defaults, config file, `--set`, then the
//! `--out` and `--seed` flags) and the later value wins.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Known keys with their defaults. An empty default means "unset".
pub const DEFAULTS: &[(&str, &str)] = &[
    ("domain", "rectangle"),
    ("width", "1"),
    ("height", "1"),
    ("resolution", "16"),
    ("lumping", "lumped"),
    ("beta", "0"),
    ("beta_im", ""),
    ("omega0", ""),
    ("lambda", "1"),
    ("f", "0"),
    ("f_im", "0"),
    ("g", "0"),
    ("g_im", "0"),
    ("exact", ""),
    ("exact_im", "0"),
    ("refinements", "0"),
    ("scheme", "implicit-euler"),
    ("dt", "0.01"),
    ("t_final", "1"),
    ("shifted", "false"),
    ("initial", "random"),
    ("initial_im", "0"),
    ("initial_file", ""),
    ("snapshot_every", "10"),
    ("suite", "all"),
    ("samples", "20"),
    ("p", "4"),
    ("q", "4"),
    ("trace_s", "4"),
    ("seed", "0"),
    ("out", "out"),
];

pub const ARC_PREFIX: &str = "beta.arc";

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn check_key(key: &str) -> CliResult<()> {
    if DEFAULTS.iter().any(|(k, _)| *k == key) {
        return Ok(());
    }
    if let Some(label) = key.strip_prefix(ARC_PREFIX) {
        if label.parse::<u32>().is_ok() {
            return Ok(());
        }
    }
    Err(CliError::usage(format!("unknown config key '{key}'")))
}

fn split_assignment(text: &str) -> Option<(String, String)> {
    let (k, v) = text.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

impl Default for Config {
    fn default() -> Self {
        Config { values: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }
}

impl Config {
    /// Lines `key = value`; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, source: &str) -> CliResult<()> {
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_assignment(line)
                .ok_or_else(|| CliError::usage(format!("{source}:{}: expected `key = value`, found `{line}`", ln + 1)))?;
            check_key(&k).map_err(|e| CliError::usage(format!("{source}:{}: {e}", ln + 1)))?;
            self.values.insert(k, v);
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// One `--set key=value` override.
    pub fn set(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) =
            split_assignment(assignment).ok_or_else(|| CliError::usage(format!("--set expects key=value, got '{assignment}'")))?;
        check_key(&k)?;
        self.values.insert(k, v);
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) -> CliResult<()> {
        check_key(key)?;
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn resolve(file: Option<&Path>, sets: &[String], out: Option<&Path>, seed: Option<u64>) -> CliResult<Self> {
        let mut cfg = Config::default();
        if let Some(path) = file {
            cfg.apply_file(path)?;
        }
        for s in sets {
            cfg.set(s)?;
        }
        if let Some(dir) = out {
            cfg.insert("out", dir.display())?;
        }
        if let Some(seed) = seed {
            cfg.insert("seed", seed)?;
        }
        Ok(cfg)
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.str(key).is_empty()
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.str(key);
        raw.parse::<T>().map_err(|e| CliError::usage(format!("config key '{key}': cannot parse '{raw}': {e}")))
    }

    pub fn f64(&self, key: &str) -> CliResult<f64> {
        let v: f64 = self.parse(key)?;
        if !v.is_finite() {
            return Err(CliError::usage(format!("config key '{key}' must be finite")));
        }
        Ok(v)
    }

    pub fn opt_f64(&self, key: &str) -> CliResult<Option<f64>> {
        if self.is_set(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn usize(&self, key: &str) -> CliResult<usize> {
        self.parse(key)
    }

    pub fn bool(&self, key: &str) -> CliResult<bool> {
        self.parse(key)
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.str("out"))
    }

    /// `beta.arc<N>` entries as `(N, literal)`.
    pub fn arc_overrides(&self) -> Vec<(u32, &str)> {
        self.values
            .iter()
            .filter_map(|(k, v)| Some((k.strip_prefix(ARC_PREFIX)?.parse().ok()?, v.as_str())))
            .collect()
    }

    /// Header embedded at the top of every output file.
    pub fn header(&self, command: &str) -> Vec<String> {
        let mut out = vec![format!("wentzell {} {command}", env!("CARGO_PKG_VERSION"))];
        out.extend(self.values.iter().map(|(k, v)| format!("{k} = {v}")));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_value_wins() {
        let mut c = Config::default();
        c.apply_text("resolution = 4\n# comment\nresolution = 8  # trailing\n", "t").unwrap();
        assert_eq!(c.usize("resolution").unwrap(), 8);
        c.set("resolution=12").unwrap();
        assert_eq!(c.usize("resolution").unwrap(), 12);
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(matches!(Config::default().set("resolutoin=3"), Err(CliError::Usage(_))));
        let err = Config::default().apply_text("a b c\n", "cfg").unwrap_err();
        assert!(err.to_string().contains("cfg:1"));
    }

    #[test]
    fn arc_keys() {
        let mut c = Config::default();
        c.set("beta.arc2 = 1+2i").unwrap();
        assert_eq!(c.arc_overrides(), vec![(2, "1+2i")]);
        assert!(c.set("beta.arcx=1").is_err());
    }

    #[test]
    fn header_lists_every_key_sorted() {
        let c = Config::resolve(None, &["dt=0.5".into()], Some(Path::new("/tmp/x")), Some(7)).unwrap();
        let h = c.header("solve");
        assert!(h[0].ends_with(" solve"));
        assert_eq!(h.len(), 1 + DEFAULTS.len());
        assert!(h.contains(&"dt = 0.5".to_string()));
        assert!(h.contains(&"out = /tmp/x".to_string()));
        assert!(h.contains(&"seed = 7".to_string()));
        let keys: Vec<&String> = h[1..].iter().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
