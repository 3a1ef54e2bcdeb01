//! Runs scenarios and writes their artifacts.

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::ScenarioConfig;
use crate::error::RunError;
use crate::output::{write_json, Outcome};
use crate::scenarios::{self, Context, Scenario};

/// Per-scenario result of a run.
#[derive(Debug)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub passed: bool,
    pub failed_checks: Vec<String>,
    pub dir: PathBuf,
}

#[derive(Debug)]
pub struct RunSummary {
    pub results: Vec<ScenarioResult>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ScenarioResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

/// Runs one scenario (or all of them) and writes everything under `out`.
///
/// Result files depend only on the configuration; the wall-clock timestamp
/// goes into `manifest.json` alone.
pub fn execute(
    scenario: Scenario,
    cfg: ScenarioConfig,
    out: &Path,
    mut on_done: impl FnMut(&Outcome),
) -> Result<RunSummary, RunError> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    write_manifest(scenario, &cfg, out)?;
    let seed = cfg.run.seed;
    let ctx = Context::new(cfg)?;
    let mut results = Vec::new();
    for s in scenario.expand() {
        let outcome = scenarios::run(s, &ctx)?;
        let dir = out.join(s.name());
        outcome.write(&dir, seed)?;
        on_done(&outcome);
        results.push(ScenarioResult {
            scenario: s,
            passed: outcome.passed(),
            failed_checks: outcome.failed_checks().map(|c| c.name.clone()).collect(),
            dir,
        });
    }
    let summary = RunSummary { results };
    let list: Vec<_> = summary
        .results
        .iter()
        .map(|r| json!({ "scenario": r.scenario.name(), "passed": r.passed }))
        .collect();
    write_json(
        &out.join("summary.json"),
        &json!({ "passed": summary.passed(), "scenarios": list }),
    )?;
    Ok(summary)
}

fn write_manifest(scenario: Scenario, cfg: &ScenarioConfig, out: &Path) -> Result<(), RunError> {
    let config = serde_json::to_value(cfg).map_err(|e| RunError::Config(e.to_string()))?;
    let manifest = json!({
        "tool": "csoc",
        "version": csoc_core::VERSION,
        "scenario": scenario.name(),
        "seed": cfg.run.seed,
        "rng_algorithm": csoc_core::wiener::RNG_ALGORITHM,
        "config": config,
        "created": chrono::Utc::now().to_rfc3339(),
    });
    write_json(&out.join("manifest.json"), &manifest)
}
