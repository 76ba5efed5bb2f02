use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const ENV_PREFIX: &str = "TRACELIFT_";

/// Settings shared by the subcommands. Command-line flags override the
/// config file, which overrides `TRACELIFT_*` environment variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub time_limit_secs: f64,
    pub seed: u64,
    pub param_budget_extra: usize,
    pub workers: usize,
    pub strict_types: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            time_limit_secs: 60.0,
            seed: 0,
            param_budget_extra: 3,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            strict_types: false,
        }
    }
}

/// Values given explicitly on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub time_limit_secs: Option<f64>,
    pub seed: Option<u64>,
    pub param_budget_extra: Option<usize>,
    pub workers: Option<usize>,
    pub strict_types: Option<bool>,
}

const KEYS: [&str; 5] = [
    "time_limit_secs",
    "seed",
    "param_budget_extra",
    "workers",
    "strict_types",
];

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str, source: &str) -> Result<T> {
    raw.trim()
        .parse()
        .ok()
        .with_context(|| format!("{source}: invalid value `{raw}` for {key}"))
}

impl RunConfig {
    pub fn resolve<I>(flags: &Overrides, file: Option<&Path>, env: I) -> Result<RunConfig>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut raw: BTreeMap<String, (String, String)> = BTreeMap::new();
        for (k, v) in env {
            if let Some(key) = k.strip_prefix(ENV_PREFIX) {
                let key = key.to_ascii_lowercase();
                if KEYS.contains(&key.as_str()) {
                    raw.insert(key, (v, format!("environment variable {k}")));
                }
            }
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            let table: toml::Table = text
                .parse()
                .with_context(|| format!("{}: invalid config file", path.display()))?;
            for (k, v) in table {
                if !KEYS.contains(&k.as_str()) {
                    bail!("{}: unknown key `{k}`", path.display());
                }
                let v = match v {
                    toml::Value::String(s) => s,
                    other => other.to_string(),
                };
                raw.insert(k, (v, path.display().to_string()));
            }
        }
        let mut cfg = RunConfig::default();
        for (k, (v, src)) in &raw {
            match k.as_str() {
                "time_limit_secs" => cfg.time_limit_secs = parse_value(k, v, src)?,
                "seed" => cfg.seed = parse_value(k, v, src)?,
                "param_budget_extra" => cfg.param_budget_extra = parse_value(k, v, src)?,
                "workers" => cfg.workers = parse_value(k, v, src)?,
                "strict_types" => cfg.strict_types = parse_value(k, v, src)?,
                _ => unreachable!("filtered above"),
            }
        }
        if let Some(v) = flags.time_limit_secs {
            cfg.time_limit_secs = v;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = flags.param_budget_extra {
            cfg.param_budget_extra = v;
        }
        if let Some(v) = flags.workers {
            cfg.workers = v;
        }
        if let Some(v) = flags.strict_types {
            cfg.strict_types = v;
        }
        if !(cfg.time_limit_secs > 0.0 && cfg.time_limit_secs.is_finite()) {
            bail!("time limit must be positive, got {}", cfg.time_limit_secs);
        }
        if cfg.workers == 0 {
            bail!("workers must be at least 1");
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn flags_beat_file_beat_env() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "seed = 5\nworkers = 2").unwrap();
        let e = env(&[
            ("TRACELIFT_SEED", "9"),
            ("TRACELIFT_WORKERS", "7"),
            ("TRACELIFT_TIME_LIMIT_SECS", "12"),
        ]);
        let flags = Overrides {
            workers: Some(3),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(&flags, Some(f.path()), e).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.workers, 3);
        assert_eq!(cfg.time_limit_secs, 12.0);
        assert_eq!(cfg.param_budget_extra, 3);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let bad_env = env(&[("TRACELIFT_SEED", "x")]);
        assert!(RunConfig::resolve(&Overrides::default(), None, bad_env).is_err());
        let flags = Overrides {
            time_limit_secs: Some(0.0),
            ..Overrides::default()
        };
        assert!(RunConfig::resolve(&flags, None, env(&[])).is_err());
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "colour = 1").unwrap();
        assert!(RunConfig::resolve(&Overrides::default(), Some(f.path()), env(&[])).is_err());
        // unrelated variables are ignored
        assert!(RunConfig::resolve(
            &Overrides::default(),
            None,
            env(&[("TRACELIFT_OTHER", "1")])
        )
        .is_ok());
    }
}
