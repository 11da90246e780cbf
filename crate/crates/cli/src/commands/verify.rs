//! `verify`: run the whole acceptance suite, one pass/fail line per
//! criterion.

use crate::artifacts::write_json;
use crate::checks;
use crate::config::RunConfig;
use anyhow::Result;
use serde::Serialize;

#[derive(Serialize)]
struct VerifyReport {
    results: Vec<checks::CheckResult>,
    passed: usize,
    failed: usize,
}

pub fn run_verify(cfg: &RunConfig) -> Result<bool> {
    let results = checks::run_all(cfg.seed);
    for r in &results {
        println!(
            "{} {} ({} ms) — {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.runtime_ms,
            r.details
        );
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let failed = results.len() - passed;
    let report = VerifyReport { results, passed, failed };
    write_json(&cfg.out, "verify.json", cfg, "verify", &report)?;
    println!("{passed} passed, {failed} failed");
    if cfg.json {
        println!("{}", serde_json::to_string(&report)?);
    }
    Ok(failed == 0)
}
