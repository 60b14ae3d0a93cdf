//! Run configuration: command-line flags over a JSON config file over
//! built-in defaults.

use std::path::{Path, PathBuf};

use resonance_core::{ConstructionParams, Error};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct DeskCaps {
    #[serde(rename = "maxT")]
    pub max_t: f64,
    pub max_set_size: u64,
    pub max_sieve: u64,
}

impl Default for DeskCaps {
    fn default() -> Self {
        Self {
            max_t: 1e5,
            max_set_size: 100_000,
            max_sieve: 10_000_000,
        }
    }
}

impl DeskCaps {
    fn validate(&self) -> Result<(), Error> {
        if !(self.max_t > 0.0) || self.max_set_size == 0 || self.max_sieve == 0 {
            return Err(Error::Parameter(format!("desk caps must be positive, got {self:?}")));
        }
        Ok(())
    }

    pub fn check_t(&self, t: f64) -> Result<(), Error> {
        cap("T", t, self.max_t)
    }

    pub fn check_set_size(&self, n: u64) -> Result<(), Error> {
        cap("set size", n as f64, self.max_set_size as f64)
    }

    pub fn check_sieve(&self, limit: f64) -> Result<(), Error> {
        cap("sieve limit", limit, self.max_sieve as f64)
    }
}

fn cap(what: &str, value: f64, cap: f64) -> Result<(), Error> {
    if value > cap {
        return Err(Error::DeskCap {
            what: what.to_string(),
            value,
            cap,
        });
    }
    Ok(())
}

/// Every setting a config file may supply. Unset fields fall through to the
/// subcommand defaults; flags given on the command line win.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub output_path: Option<PathBuf>,
    pub run_log: Option<PathBuf>,
    pub desk_caps: Option<DeskCaps>,
    pub kind: Option<String>,
    pub x: Option<f64>,
    pub ell: Option<u32>,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub sigma: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub budget: Option<usize>,
    pub alpha: Option<f64>,
    pub a: Option<f64>,
    pub k_limit: Option<f64>,
    pub scan_budget: Option<usize>,
    pub mollifier: Option<String>,
    pub tolerance: Option<f64>,
    pub max_levels: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let cfg: FileConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Parameter(format!("config {}: {e}", path.display())))?;
        if let Some(c) = &cfg.desk_caps {
            c.validate()?;
        }
        Ok(cfg)
    }
}

/// The resolved settings of one invocation, recorded in run logs.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ConstructionParams>,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub desk_caps: DeskCaps,
}

/// `flag`, else `file`, else `default`.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None::<i32>, None, 3), 3);
    }

    #[test]
    fn config_parses_camel_case() {
        let c: FileConfig =
            serde_json::from_str(r#"{"seed": 7, "N": 100, "T": 1e4, "deskCaps": {"maxT": 2e4}}"#).unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.n, Some(100));
        let caps = c.desk_caps.unwrap();
        assert_eq!(caps.max_t, 2e4);
        assert_eq!(caps.max_set_size, DeskCaps::default().max_set_size);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"sede": 7}"#).is_err());
    }

    #[test]
    fn caps_refuse_over_budget() {
        let caps = DeskCaps::default();
        assert!(caps.check_t(1e5).is_ok());
        let e = caps.check_t(2e5).unwrap_err();
        assert!(e.to_string().contains("desk cap"));
    }
}
