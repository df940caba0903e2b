//! Experiment configuration files.
//!
//! Configs are flat TOML key/value files. Every key is optional and falls
//! back to the standard parameter set; unknown keys are rejected. The
//! master seed resolves as: command-line flag, then the `master_seed` key,
//! then the `SSML_SEED` environment variable, then the built-in default.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Environment variable consulted for the master seed.
pub const SEED_ENV: &str = "SSML_SEED";

/// Values shared by every dataset that may be overridden from the command
/// line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub master_seed: Option<u64>,
    pub trials: Option<u64>,
}

/// Parse a seed as accepted on the command line or in `SSML_SEED`.
pub fn parse_seed(raw: &str) -> Result<u64> {
    let raw = raw.trim();
    let seed = match raw.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => raw.parse(),
    }
    .with_context(|| format!("invalid seed `{raw}`"))?;
    if seed > i64::MAX as u64 {
        bail!("seed {seed} does not fit the config format (must be < 2^63)");
    }
    Ok(seed)
}

/// Build a config from an optional TOML file plus overrides.
pub fn resolve<C>(path: Option<&Path>, overrides: &Overrides, env_seed: Option<&str>) -> Result<C>
where
    C: DeserializeOwned,
{
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            text.parse::<toml::Table>()
                .with_context(|| format!("parsing config {}", p.display()))?
        }
        None => toml::Table::new(),
    };
    let seed = match overrides.master_seed {
        Some(s) => Some(s),
        None if table.contains_key("master_seed") => None,
        None => env_seed.map(parse_seed).transpose()?,
    };
    if let Some(s) = seed {
        table.insert("master_seed".into(), toml::Value::Integer(s as i64));
    }
    if let Some(t) = overrides.trials {
        if t > i64::MAX as u64 {
            bail!("trial count {t} is too large");
        }
        table.insert("trials".into(), toml::Value::Integer(t as i64));
    }
    let config: C = table.try_into().context("invalid configuration")?;
    Ok(config)
}

pub fn to_toml<C: Serialize>(config: &C) -> Result<String> {
    toml::to_string(config).context("serializing configuration")
}

pub fn from_toml<C: DeserializeOwned>(text: &str) -> Result<C> {
    toml::from_str(text).context("parsing configuration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ssml_core::experiments::{LocalConfig, MultiscaleConfig, DEFAULT_SEED};

    #[test]
    fn defaults_without_file() {
        let c: LocalConfig = resolve(None, &Overrides::default(), None).unwrap();
        assert_eq!(c, LocalConfig::default());
        assert_eq!(c.master_seed, DEFAULT_SEED);
    }

    #[test]
    fn seed_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let with_seed = dir.path().join("a.toml");
        std::fs::write(&with_seed, "master_seed = 5\ntrials = 10\n").unwrap();
        let no_seed = dir.path().join("b.toml");
        std::fs::write(&no_seed, "trials = 10\n").unwrap();

        let flag = Overrides {
            master_seed: Some(9),
            trials: None,
        };
        let c: LocalConfig = resolve(Some(&with_seed), &flag, Some("7")).unwrap();
        assert_eq!(c.master_seed, 9);
        let c: LocalConfig = resolve(Some(&with_seed), &Overrides::default(), Some("7")).unwrap();
        assert_eq!(c.master_seed, 5);
        let c: LocalConfig = resolve(Some(&no_seed), &Overrides::default(), Some("0x10")).unwrap();
        assert_eq!(c.master_seed, 16);
        assert_eq!(c.trials, 10);
    }

    #[test]
    fn clip_accepts_none() {
        let c: MultiscaleConfig = from_toml("clip_halfwidth = \"none\"\nmax_stage = 3\n").unwrap();
        assert_eq!(c.clip_halfwidth, None);
        assert_eq!(c.max_stage, 3);
        let text = to_toml(&c).unwrap();
        assert!(text.contains("clip_halfwidth = \"none\""));
        assert_eq!(from_toml::<MultiscaleConfig>(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_bad_seeds_fail() {
        assert!(from_toml::<LocalConfig>("depth = 3\n").is_err());
        assert!(parse_seed("abc").is_err());
        assert!(parse_seed(&u64::MAX.to_string()).is_err());
    }
}
