//! Service configuration, read from a TOML file or assembled from flags.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! bank = "bank"
//! log = "data/attempts.jsonl"
//!
//! [backend]
//! kind = "mock"
//! fixture = "fixtures/mock.toml"
//!
//! [limits]
//! run_timeout_ms = 1000
//! ```
//!
//! Relative paths in a file are resolved against the file's directory.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use eipe_core::ResourceLimits;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendConfig {
    Mock {
        fixture: PathBuf,
    },
    Http {
        url: String,
        model: String,
        #[serde(default)]
        max_in_flight: Option<usize>,
        #[serde(default)]
        timeout_ms: Option<u64>,
    },
}

/// Partial overrides of the harness defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitOverrides {
    pub compile_timeout_ms: Option<u64>,
    pub run_timeout_ms: Option<u64>,
    pub max_output_bytes: Option<usize>,
    pub memory_bytes: Option<u64>,
}

impl LimitOverrides {
    pub fn apply(&self, base: ResourceLimits) -> ResourceLimits {
        ResourceLimits {
            compile_timeout: self.compile_timeout_ms.map_or(base.compile_timeout, Duration::from_millis),
            run_timeout_per_case: self.run_timeout_ms.map_or(base.run_timeout_per_case, Duration::from_millis),
            max_output_bytes_per_case: self.max_output_bytes.unwrap_or(base.max_output_bytes_per_case),
            memory_bytes: self.memory_bytes.unwrap_or(base.memory_bytes),
        }
    }
}

fn default_listen() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiConfig {
    #[serde(default = "default_listen")]
    pub listen: SocketAddr,
    pub bank: PathBuf,
    pub backend: BackendConfig,
    #[serde(default)]
    pub limits: LimitOverrides,
    /// Attempt log; `None` keeps attempts in memory only.
    #[serde(default)]
    pub log: Option<PathBuf>,
    /// Hide expected/actual observations until the problem is solved.
    #[serde(default = "yes")]
    pub redact_observations: bool,
}

impl ApiConfig {
    pub fn new(bank: impl Into<PathBuf>, backend: BackendConfig) -> Self {
        Self {
            listen: default_listen(),
            bank: bank.into(),
            backend,
            limits: LimitOverrides::default(),
            log: None,
            redact_observations: true,
        }
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ApiConfig = toml::from_str(text)?;
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        rebase(&mut cfg.bank);
        if let Some(log) = cfg.log.as_mut() {
            rebase(log);
        }
        if let BackendConfig::Mock { fixture } = &mut cfg.backend {
            rebase(fixture);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("parsing {}", path.display()))
    }

    /// Paths that must exist before the service starts.
    pub fn check(&self) -> Result<()> {
        if !self.bank.is_dir() {
            bail!("problem bank {} is not a directory", self.bank.display());
        }
        if let BackendConfig::Mock { fixture } = &self.backend {
            if !fixture.is_file() {
                bail!("mock fixture {} does not exist", fixture.display());
            }
        }
        if let Some(dir) = self.log.as_ref().and_then(|l| l.parent()) {
            if !dir.as_os_str().is_empty() && !dir.is_dir() {
                bail!("log directory {} does not exist", dir.display());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rebases() {
        let cfg = ApiConfig::parse(
            "listen = \"0.0.0.0:9000\"\nbank = \"bank\"\nlog = \"/var/log/a.jsonl\"\n\
             [backend]\nkind = \"mock\"\nfixture = \"f.toml\"\n[limits]\nrun_timeout_ms = 500\n",
            Path::new("/srv/eipe"),
        )
        .unwrap();
        assert_eq!(cfg.listen.port(), 9000);
        assert_eq!(cfg.bank, Path::new("/srv/eipe/bank"));
        assert_eq!(cfg.log.as_deref(), Some(Path::new("/var/log/a.jsonl")));
        assert_eq!(cfg.backend, BackendConfig::Mock { fixture: "/srv/eipe/f.toml".into() });
        assert!(cfg.redact_observations);
        let l = cfg.limits.apply(ResourceLimits::default());
        assert_eq!(l.run_timeout_per_case, Duration::from_millis(500));
        assert_eq!(l.compile_timeout, Duration::from_secs(10));
    }

    #[test]
    fn http_backend_needs_a_model() {
        let text = "bank = \"b\"\n[backend]\nkind = \"http\"\nurl = \"http://x\"\n";
        assert!(ApiConfig::parse(text, Path::new(".")).is_err());
    }

    #[test]
    fn bad_listen_address_is_rejected() {
        let text = "listen = \"nowhere\"\nbank = \"b\"\n[backend]\nkind = \"mock\"\nfixture = \"f\"\n";
        assert!(ApiConfig::parse(text, Path::new(".")).is_err());
    }
}
