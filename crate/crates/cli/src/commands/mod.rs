//! Subcommand drivers tying the library stages into reproducible runs.

mod evolve;
mod perturb;
mod soliton;
mod sweep;
mod verify;

pub use evolve::run_evolve;
pub use perturb::run_perturb;
pub use soliton::run_soliton;
pub use sweep::run_sweep;
pub use verify::run_verify;

use crate::config::RunConfig;
use anyhow::{anyhow, Result};
use solitonlab_core::soliton::{
    integrate_trajectory, reconstruct_profile, SolitonCase, SolitonParams, SolitonProfile,
    Trajectory,
};

/// Build the background soliton for the configured case. Half-complete runs
/// extend the trajectory until the profile covers `x_target`; general runs
/// stop at the phase-box exit that defines the domain scale.
pub fn build_background(cfg: &RunConfig, x_target: f64) -> Result<(Trajectory, SolitonProfile)> {
    match cfg.case {
        SolitonCase::HalfComplete => {
            let params = if cfg.n == 4 {
                SolitonParams::on_explicit_curve(cfg.soliton_a, cfg.soliton_eps)
            } else {
                SolitonParams::half_complete(cfg.n, cfg.soliton_eps, cfg.soliton_a)
            };
            let mut y_hi = 40.0;
            loop {
                let traj = integrate_trajectory(&params, -2.0, y_hi, cfg.soliton_tol)?;
                let profile = reconstruct_profile(&traj)?;
                if *profile.xs.last().unwrap() >= x_target {
                    return Ok((traj, profile));
                }
                y_hi *= 2.0;
                if y_hi > 6000.0 {
                    return Err(anyhow!(
                        "trajectory did not reach radius {x_target} by y = {y_hi}"
                    ));
                }
            }
        }
        SolitonCase::General => {
            let params =
                SolitonParams::near_source(cfg.n, cfg.lambda, cfg.soliton_eps, SolitonCase::General);
            let traj = integrate_trajectory(&params, -6.0, 60.0, cfg.soliton_tol)?;
            let profile = reconstruct_profile(&traj)?;
            Ok((traj, profile))
        }
    }
}

/// One named check row in a machine-readable report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl NamedCheck {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

pub fn all_passed(checks: &[NamedCheck]) -> bool {
    checks.iter().all(|c| c.passed)
}
