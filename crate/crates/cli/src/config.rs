//! Run configuration: plain-text key=value files, mirrored CLI flags and a
//! stable hash stamped into every artifact.

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use solitonlab_core::perturb::InitialShape;
use solitonlab_core::soliton::SolitonCase;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Every recognized configuration key with its default, as strings (the
/// canonical form used for hashing).
pub const KEYS: &[(&str, &str, &str)] = &[
    ("n", "4", "sphere dimension (manifold dimension n+1)"),
    ("lambda", "0", "soliton constant: 0 steady, <0 shrinking, >0 expanding"),
    ("case", "HC", "HC (half-complete) or G (general local soliton)"),
    ("alpha", "3", "weight exponent"),
    ("sigma", "10", "time-weight strength"),
    ("x0", "1", "weight crossover point"),
    ("grid.n", "2000", "spatial nodes"),
    ("grid.xmax", "20", "spatial truncation radius"),
    ("dt", "1e-4", "time step"),
    ("T", "0.05", "final time"),
    ("init.shape", "bump", "zero | bump | sine-packet"),
    ("init.amplitude", "1e-3", "initial data amplitude"),
    ("init.support", "0.5,1.5", "support interval lo,hi"),
    ("picard.max_iter", "50", "Picard iteration cap"),
    ("picard.tol", "1e-10", "difference-energy stopping tolerance"),
    ("soliton.eps", "1e-4", "phase-space distance from the source"),
    ("soliton.tol", "1e-12", "trajectory integrator tolerance"),
    ("soliton.a", "1", "target profile amplitude (explicit family scale at n=4)"),
    ("flow.tol", "1e-11", "diffeomorphism-flow integrator tolerance"),
    ("monitor.bound_factor", "2", "energy bound factor against the calibrated baseline"),
    ("mask.x", "0.3", "skip residual checks below this x"),
    ("seed", "7", "seed for randomized spot checks"),
    ("sweep.n", "", "comma list of n values to sweep"),
    ("sweep.alpha", "", "comma list of alpha values"),
    ("sweep.sigma", "", "comma list of sigma values"),
    ("sweep.amplitude", "", "comma list of amplitudes"),
    ("sweep.grid.n", "", "comma list of spatial resolutions"),
];

/// Parsed, validated configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub n: u32,
    pub lambda: f64,
    pub case: SolitonCase,
    pub alpha: u32,
    pub sigma: f64,
    pub x0: f64,
    pub grid_n: usize,
    pub grid_xmax: f64,
    pub dt: f64,
    pub t_end: f64,
    pub init_shape: InitialShape,
    pub init_amplitude: f64,
    pub init_support: (f64, f64),
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    pub soliton_eps: f64,
    pub soliton_tol: f64,
    pub soliton_a: f64,
    pub flow_tol: f64,
    pub bound_factor: f64,
    pub mask_x: f64,
    pub seed: u64,
    pub sweep_n: Vec<u32>,
    pub sweep_alpha: Vec<u32>,
    pub sweep_sigma: Vec<f64>,
    pub sweep_amplitude: Vec<f64>,
    pub sweep_grid_n: Vec<usize>,
    #[serde(skip)]
    pub out: PathBuf,
    pub json: bool,
    pub check_explicit: bool,
    /// Canonical key=value map the config was built from.
    #[serde(skip)]
    raw: BTreeMap<String, String>,
}

fn parse_list<T: std::str::FromStr>(s: &str, key: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| anyhow!("{key}: bad entry `{p}`: {e}")))
        .collect()
}

impl RunConfig {
    /// Assemble from defaults, an optional config file and CLI overrides
    /// (highest precedence last).
    pub fn assemble(
        config_file: Option<&Path>,
        overrides: &BTreeMap<String, String>,
        out: PathBuf,
        json: bool,
        check_explicit: bool,
    ) -> Result<Self> {
        let mut raw: BTreeMap<String, String> =
            KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), lineno + 1))?;
                let k = k.trim();
                if !raw.contains_key(k) {
                    bail!("{}:{}: unknown key `{k}`", path.display(), lineno + 1);
                }
                raw.insert(k.to_string(), v.trim().to_string());
            }
        }
        for (k, v) in overrides {
            if !raw.contains_key(k.as_str()) {
                bail!("unknown configuration key `{k}`");
            }
            raw.insert(k.clone(), v.clone());
        }
        Self::from_raw(raw, out, json, check_explicit)
    }

    fn from_raw(
        raw: BTreeMap<String, String>,
        out: PathBuf,
        json: bool,
        check_explicit: bool,
    ) -> Result<Self> {
        let get = |k: &str| raw.get(k).expect("key present").as_str();
        let f = |k: &str| -> Result<f64> {
            get(k).parse::<f64>().map_err(|e| anyhow!("{k}: {e}"))
        };
        let case = match get("case") {
            "HC" => SolitonCase::HalfComplete,
            "G" => SolitonCase::General,
            other => bail!("case: expected HC or G, got `{other}`"),
        };
        let support_text = get("init.support");
        let parts: Vec<&str> = support_text.split(',').collect();
        if parts.len() != 2 {
            bail!("init.support: expected `lo,hi`, got `{support_text}`");
        }
        let support = (
            parts[0].trim().parse::<f64>().map_err(|e| anyhow!("init.support lo: {e}"))?,
            parts[1].trim().parse::<f64>().map_err(|e| anyhow!("init.support hi: {e}"))?,
        );
        let cfg = Self {
            n: get("n").parse().map_err(|e| anyhow!("n: {e}"))?,
            lambda: f("lambda")?,
            case,
            alpha: get("alpha").parse().map_err(|e| anyhow!("alpha: {e}"))?,
            sigma: f("sigma")?,
            x0: f("x0")?,
            grid_n: get("grid.n").parse().map_err(|e| anyhow!("grid.n: {e}"))?,
            grid_xmax: f("grid.xmax")?,
            dt: f("dt")?,
            t_end: f("T")?,
            init_shape: get("init.shape").parse().map_err(|e| anyhow!("{e}"))?,
            init_amplitude: f("init.amplitude")?,
            init_support: support,
            picard_max_iter: get("picard.max_iter").parse().map_err(|e| anyhow!("picard.max_iter: {e}"))?,
            picard_tol: f("picard.tol")?,
            soliton_eps: f("soliton.eps")?,
            soliton_tol: f("soliton.tol")?,
            soliton_a: f("soliton.a")?,
            flow_tol: f("flow.tol")?,
            bound_factor: f("monitor.bound_factor")?,
            mask_x: f("mask.x")?,
            seed: get("seed").parse().map_err(|e| anyhow!("seed: {e}"))?,
            sweep_n: parse_list(get("sweep.n"), "sweep.n")?,
            sweep_alpha: parse_list(get("sweep.alpha"), "sweep.alpha")?,
            sweep_sigma: parse_list(get("sweep.sigma"), "sweep.sigma")?,
            sweep_amplitude: parse_list(get("sweep.amplitude"), "sweep.amplitude")?,
            sweep_grid_n: parse_list(get("sweep.grid.n"), "sweep.grid.n")?,
            out,
            json,
            check_explicit,
            raw,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every module precondition that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            bail!("n must be >= 2 (singular solitons need n > 1)");
        }
        if self.case == SolitonCase::HalfComplete && self.lambda != 0.0 {
            bail!("half-complete solitons are steady: set lambda = 0 or case = G");
        }
        if self.alpha < 1 {
            bail!("alpha must be >= 1");
        }
        if !(self.sigma > 0.0) || !(self.x0 > 0.0) {
            bail!("sigma and x0 must be positive");
        }
        if self.grid_n < 16 {
            bail!("grid.n must be at least 16");
        }
        if !(self.grid_xmax > 0.0) {
            bail!("grid.xmax must be positive");
        }
        if !(self.dt > 0.0) || !(self.t_end >= self.dt) {
            bail!("need 0 < dt <= T");
        }
        if self.lambda < 0.0 && 1.0 + 2.0 * self.lambda * self.t_end <= 0.5 {
            bail!(
                "T = {} leaves the admissible window: 1 + 2 lambda T must stay above 1/2",
                self.t_end
            );
        }
        if self.init_amplitude < 0.0 {
            bail!("init.amplitude must be non-negative");
        }
        if !(self.init_support.0 < self.init_support.1) {
            bail!("init.support must satisfy lo < hi");
        }
        if ![self.picard_tol, self.soliton_tol, self.flow_tol].iter().all(|t| *t > 0.0) {
            bail!("tolerances must be positive");
        }
        if self.picard_max_iter == 0 {
            bail!("picard.max_iter must be at least 1");
        }
        Ok(())
    }

    /// Canonical sorted key=value text (the hashing input).
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.raw {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Number of time slices (uniform grid 0..T inclusive).
    pub fn nt(&self) -> usize {
        (self.t_end / self.dt).round() as usize + 1
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let nt = self.nt();
        (0..nt).map(|k| k as f64 * self.t_end / (nt - 1) as f64).collect()
    }

    pub fn x_grid(&self) -> Vec<f64> {
        let n = self.grid_n;
        (1..=n).map(|i| i as f64 * self.grid_xmax / n as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> RunConfig {
        RunConfig::assemble(None, &BTreeMap::new(), PathBuf::from("out"), false, false).unwrap()
    }

    #[test]
    fn defaults_are_valid_and_hash_is_stable() {
        let cfg = defaults();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.grid_n, 2000);
        assert_eq!(cfg.hash(), defaults().hash());
        assert_eq!(cfg.nt(), 501);
        assert_eq!(cfg.x_grid().len(), 2000);
        assert!((cfg.x_grid()[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn overrides_and_validation() {
        let mut ov = BTreeMap::new();
        ov.insert("n".to_string(), "1".to_string());
        let err =
            RunConfig::assemble(None, &ov, PathBuf::from("out"), false, false).unwrap_err();
        assert!(err.to_string().contains("n must be >= 2"));

        let mut ov = BTreeMap::new();
        ov.insert("lambda".to_string(), "-1".to_string());
        ov.insert("case".to_string(), "G".to_string());
        ov.insert("T".to_string(), "0.3".to_string());
        let err =
            RunConfig::assemble(None, &ov, PathBuf::from("out"), false, false).unwrap_err();
        assert!(err.to_string().contains("admissible window"));

        let mut ov = BTreeMap::new();
        ov.insert("bogus.key".to_string(), "1".to_string());
        assert!(RunConfig::assemble(None, &ov, PathBuf::from("out"), false, false).is_err());
    }

    #[test]
    fn hash_tracks_values() {
        let mut ov = BTreeMap::new();
        ov.insert("sigma".to_string(), "12".to_string());
        let changed =
            RunConfig::assemble(None, &ov, PathBuf::from("out"), false, false).unwrap();
        assert_ne!(changed.hash(), defaults().hash());
    }
}
