//! Artifact writers: every file carries a header block with the config hash
//! and module versions, so identical configs produce bit-identical output.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub fn core_version() -> &'static str {
    // The workspace versions move together.
    env!("CARGO_PKG_VERSION")
}

fn header_block(cfg: &RunConfig, command: &str) -> String {
    format!(
        "# generator: solitonlab {command}\n# version: {}\n# config-hash: {}\n",
        core_version(),
        cfg.hash()
    )
}

pub fn write_csv(dir: &Path, name: &str, cfg: &RunConfig, command: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = header_block(cfg, command);
    text.push_str(body);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[derive(Serialize)]
struct JsonEnvelope<'a, T: Serialize> {
    meta: Meta<'a>,
    #[serde(flatten)]
    payload: &'a T,
}

#[derive(Serialize)]
struct Meta<'a> {
    generator: String,
    version: &'a str,
    config_hash: String,
}

pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    cfg: &RunConfig,
    command: &str,
    payload: &T,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let envelope = JsonEnvelope {
        meta: Meta {
            generator: format!("solitonlab {command}"),
            version: core_version(),
            config_hash: cfg.hash(),
        },
        payload,
    };
    let text = serde_json::to_string_pretty(&envelope)?;
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
