//! Turns configuration into a ready engine.

use std::sync::Arc;

use anyhow::{bail, Context, Result};

use eipe_core::bank::{validate_problem, ProblemSet};
use eipe_core::engine::EngineConfig;
use eipe_core::gateway::{HttpBackend, MockBackend, MockFixture, DEFAULT_IN_FLIGHT};
use eipe_core::harness::HarnessConfig;
use eipe_core::{load_bank, Backend, Gateway, GradingEngine, Harness};

use crate::config::{ApiConfig, BackendConfig, LimitOverrides};

pub fn build_gateway(cfg: &BackendConfig) -> Result<(Arc<Gateway>, EngineConfig)> {
    let mut engine_cfg = EngineConfig::default();
    let (backend, cap): (Arc<dyn Backend>, usize) = match cfg {
        BackendConfig::Mock { fixture } => {
            let f = MockFixture::load(fixture).map_err(anyhow::Error::msg)?;
            (Arc::new(MockBackend::new(f)), DEFAULT_IN_FLIGHT)
        }
        BackendConfig::Http { url, model, max_in_flight, timeout_ms } => {
            engine_cfg.model = model.clone();
            if let Some(ms) = timeout_ms {
                engine_cfg.generation_timeout = std::time::Duration::from_millis(*ms);
            }
            (Arc::new(HttpBackend::from_env(url.clone())), max_in_flight.unwrap_or(DEFAULT_IN_FLIGHT))
        }
    };
    Ok((Arc::new(Gateway::with_cap(backend, cap)), engine_cfg))
}

pub fn build_harness(limits: &LimitOverrides) -> Result<Arc<Harness>> {
    let config = HarnessConfig {
        limits: limits.apply(Default::default()),
        ..HarnessConfig::default()
    };
    Ok(Arc::new(Harness::new(config)?))
}

/// Loads the bank and refuses it unless every file parsed and every
/// problem validates. The error names each failing problem.
pub fn load_validated_bank(path: &std::path::Path, harness: &Harness) -> Result<ProblemSet> {
    let bank = load_bank(path).with_context(|| format!("loading bank {}", path.display()))?;
    let mut problems = Vec::new();
    for d in &bank.diagnostics {
        problems.push(format!("{}: {}", d.path.display(), d.message));
    }
    for p in bank.iter() {
        let report = validate_problem(p, harness);
        if !report.ok() {
            problems.push(report.to_string().trim_end().to_string());
        }
    }
    if !problems.is_empty() {
        bail!("problem bank failed validation:\n{}", problems.join("\n"));
    }
    Ok(bank)
}

pub fn build_engine(cfg: &ApiConfig) -> Result<GradingEngine> {
    cfg.check()?;
    let harness = build_harness(&cfg.limits)?;
    let bank = load_validated_bank(&cfg.bank, &harness)?;
    let (gateway, engine_cfg) = build_gateway(&cfg.backend)?;
    Ok(match &cfg.log {
        Some(path) => GradingEngine::open(bank, gateway, harness, engine_cfg, path)
            .with_context(|| format!("opening attempt log {}", path.display()))?,
        None => GradingEngine::in_memory(bank, gateway, harness, engine_cfg),
    })
}
