//! Line-oriented `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Parsed configuration: an optional subcommand and flag values keyed by long flag name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub values: BTreeMap<String, String>,
}

impl RunConfig {
    /// `#` starts a comment; blank lines are skipped; keys may use `_` or `-`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!(
                    "config line {}: expected key = value, got {raw:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim().replace('_', "-");
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Format(format!(
                    "config line {}: empty key",
                    lineno + 1
                )));
            }
            if key == "subcommand" || key == "command" {
                config.subcommand = Some(value);
            } else if config.values.insert(key.clone(), value).is_some() {
                return Err(Error::Format(format!(
                    "config line {}: duplicate key {key}",
                    lineno + 1
                )));
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Command line with the configured flags appended. Flags already present in `args` win;
    /// the configured subcommand is used when `args` names none of `subcommands`.
    pub fn merge(&self, args: &[String], subcommands: &[&str]) -> Vec<String> {
        let program = args.first().cloned().unwrap_or_else(|| "morrey-lab".into());
        let mut rest: Vec<String> = args.iter().skip(1).cloned().collect();
        if !rest.iter().any(|a| subcommands.contains(&a.as_str())) {
            match &self.subcommand {
                Some(sub) => rest.insert(0, sub.clone()),
                None => return args.to_vec(),
            }
        }
        let given = |key: &str| {
            rest.iter()
                .any(|a| a == &format!("--{key}") || a.starts_with(&format!("--{key}=")))
        };
        let extra: Vec<String> = self
            .values
            .iter()
            .filter(|(k, _)| !given(k))
            .map(|(k, v)| format!("--{k}={v}"))
            .collect();
        let mut out = vec![program];
        out.extend(rest);
        out.extend(extra);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_merges() {
        let c = RunConfig::parse("# run\nsubcommand = solve\nrho = 3\nmax_iter = 40 # cap\n\n")
            .unwrap();
        assert_eq!(c.subcommand.as_deref(), Some("solve"));
        assert_eq!(c.values["max-iter"], "40");
        let args: Vec<String> = ["morrey-lab", "--rho", "4"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let merged = c.merge(&args, &["solve", "norm"]);
        assert_eq!(
            merged,
            ["morrey-lab", "solve", "--rho", "4", "--max-iter=40"]
        );
        let explicit: Vec<String> = ["morrey-lab", "norm"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(c.merge(&explicit, &["solve", "norm"])[1], "norm");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(RunConfig::parse("rho 3").is_err());
        assert!(RunConfig::parse("rho = 3\nrho = 4").is_err());
        assert!(RunConfig::parse(" = 4").is_err());
    }
}
