//! `soliton`: integrate, reconstruct, fit and verify the background soliton.

use super::{all_passed, build_background, NamedCheck};
use crate::artifacts::{write_csv, write_json};
use crate::config::RunConfig;
use anyhow::Result;
use serde::Serialize;
use solitonlab_core::soliton::{
    explicit_profile_n4, find_x_crit, fit_asymptotics, gradient_identities, jacobian_eigenvalues,
    profile_to_csv, soliton_residual, trajectory_to_csv, AsymptoticsReport,
    GradientIdentityReport, SolitonCase, SolitonProfile, TrajectoryState,
};

#[derive(Serialize)]
struct SolitonReport {
    n: u32,
    lambda: f64,
    case: String,
    asymptotics: AsymptoticsReport,
    source_eigenvalues: [f64; 3],
    residual_sup: (f64, f64),
    identities: GradientIdentityReport,
    x_crit: Option<f64>,
    explicit_check: Option<(f64, f64)>,
    checks: Vec<NamedCheck>,
}

fn restrict(profile: &SolitonProfile, x_lo: f64) -> SolitonProfile {
    let keep: Vec<usize> = (0..profile.len()).filter(|&i| profile.xs[i] >= x_lo).collect();
    SolitonProfile {
        xs: keep.iter().map(|&i| profile.xs[i]).collect(),
        psi: keep.iter().map(|&i| profile.psi[i]).collect(),
        psi1: keep.iter().map(|&i| profile.psi1[i]).collect(),
        psi2: keep.iter().map(|&i| profile.psi2[i]).collect(),
        omega: keep.iter().map(|&i| profile.omega[i]).collect(),
        omega1: keep.iter().map(|&i| profile.omega1[i]).collect(),
        ..profile.clone()
    }
}

pub fn run_soliton(cfg: &RunConfig) -> Result<bool> {
    let x_target = if cfg.case == SolitonCase::HalfComplete { 55.0f64.max(cfg.grid_xmax) } else { 0.0 };
    let (traj, profile) = build_background(cfg, x_target)?;
    let mut checks = Vec::new();

    let asym = fit_asymptotics(&profile)?;
    let sq = (cfg.n as f64).sqrt();
    checks.push(NamedCheck::new(
        "psi-exponent",
        (asym.slope_psi - 1.0 / sq).abs() < 0.01,
        format!("{:.5} vs 1/sqrt(n) = {:.5}", asym.slope_psi, 1.0 / sq),
    ));
    checks.push(NamedCheck::new(
        "omega-asymptote",
        (asym.val_x_omega - (sq - 1.0)).abs() < 0.01,
        format!("x*omega -> {:.5} vs {:.5}", asym.val_x_omega, sq - 1.0),
    ));

    let residual = soliton_residual(&profile)?;
    checks.push(NamedCheck::new(
        "soliton-residual",
        residual.0 <= 1e-6 && residual.1 <= 1e-6,
        format!("sup residuals ({:.2e}, {:.2e})", residual.0, residual.1),
    ));

    let mut eig =
        jacobian_eigenvalues(&TrajectoryState::new(0.0, 1.0, 0.0), cfg.n, cfg.lambda, 1e-6)?;
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut expect = [1.0, 2.0, 1.0 - 1.0 / sq];
    expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gap = eig.iter().zip(&expect).map(|(g, e)| (g - e).abs()).fold(0.0f64, f64::max);
    checks.push(NamedCheck::new(
        "source-eigenvalues",
        gap < 1e-6,
        format!("{eig:?} vs {expect:?}"),
    ));

    // Identity evaluation amplifies error by 1/x^2; use the grid away from
    // the extreme tail.
    let identities = gradient_identities(&restrict(&profile, 1e-2))?;
    if cfg.case == SolitonCase::HalfComplete {
        checks.push(NamedCheck::new(
            "hamilton-identity-c0",
            identities.c0_positive,
            format!("C0 = {:.6}", identities.c0),
        ));
    }

    let x_crit = if cfg.case == SolitonCase::HalfComplete {
        Some(find_x_crit(&profile)?)
    } else {
        None
    };

    let explicit_check = if cfg.check_explicit {
        if cfg.n != 4 {
            anyhow::bail!("--check-explicit requires n = 4");
        }
        let grid: Vec<f64> =
            (0..4000).map(|i| 1e-3 * (1e4f64).powf(i as f64 / 3999.0)).collect();
        let explicit = explicit_profile_n4(cfg.soliton_a, &grid)?;
        let res = soliton_residual(&explicit)?;
        checks.push(NamedCheck::new(
            "explicit-closed-form",
            res.0 < 1e-9 && res.1 < 1e-9,
            format!("analytic residuals ({:.2e}, {:.2e})", res.0, res.1),
        ));
        Some(res)
    } else {
        None
    };

    let report = SolitonReport {
        n: cfg.n,
        lambda: cfg.lambda,
        case: cfg.case.to_string(),
        asymptotics: asym,
        source_eigenvalues: eig,
        residual_sup: residual,
        identities,
        x_crit,
        explicit_check,
        checks: checks.clone(),
    };
    write_csv(&cfg.out, "trajectory.csv", cfg, "soliton", &trajectory_to_csv(&traj))?;
    write_csv(&cfg.out, "profile.csv", cfg, "soliton", &profile_to_csv(&profile))?;
    write_json(&cfg.out, "asymptotics.json", cfg, "soliton", &report)?;
    let passed = all_passed(&checks);
    for c in &checks {
        println!("{} {} — {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if cfg.json {
        println!("{}", serde_json::to_string(&report)?);
    }
    Ok(passed)
}
