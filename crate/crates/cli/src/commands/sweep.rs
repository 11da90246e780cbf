//! `sweep`: parameter sweeps with per-cell isolation and an aggregated
//! convergence table.

use crate::artifacts::{write_csv, write_json};
use crate::config::RunConfig;
use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;
use solitonlab_core::flow::evolve_flow;
use solitonlab_core::perturb::{
    fitted_order, make_initial_data, mms_spatial_study, picard_solve, MmsPoint, SolverContext,
};
use solitonlab_core::soliton::{jacobian_eigenvalues, SolitonCase, TrajectoryState};
use solitonlab_core::soliton::explicit_profile_n4;
use solitonlab_core::weights::WeightConfig;

#[derive(Debug, Clone, Serialize)]
struct SweepCell {
    n: u32,
    alpha: u32,
    sigma: f64,
    amplitude: f64,
    grid_n: usize,
    eig_gap: f64,
    mms_err: Option<f64>,
    energy_ratio: Option<f64>,
    kappa_max: Option<f64>,
    converged: Option<bool>,
    failed: Option<String>,
}

#[derive(Serialize)]
struct SweepReport {
    cells: Vec<SweepCell>,
    spatial_order: Option<f64>,
    failures: usize,
}

fn one_or<T: Copy>(list: &[T], default: T) -> Vec<T> {
    if list.is_empty() {
        vec![default]
    } else {
        list.to_vec()
    }
}

fn run_cell(
    cfg: &RunConfig,
    n: u32,
    alpha: u32,
    sigma: f64,
    amplitude: f64,
    grid_n: usize,
    spatial_only: bool,
) -> Result<SweepCell> {
    let mut eig = jacobian_eigenvalues(&TrajectoryState::new(0.0, 1.0, 0.0), n, cfg.lambda, 1e-6)?;
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut expect = [1.0, 2.0, 1.0 - 1.0 / (n as f64).sqrt()];
    expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let eig_gap = eig.iter().zip(&expect).map(|(g, e)| (g - e).abs()).fold(0.0f64, f64::max);

    let mms_err = if spatial_only || !cfg.sweep_grid_n.is_empty() {
        Some(mms_spatial_study(&[grid_n])[0].err)
    } else {
        None
    };

    let (energy_ratio, kappa_max, converged) = if !spatial_only && n == 4 && cfg.lambda == 0.0 {
        // Scaled-down stability run per cell.
        let grid: Vec<f64> = (0..600).map(|i| 1e-5 * (4e6f64).powf(i as f64 / 599.0)).collect();
        let profile = explicit_profile_n4(1.0, &grid)?;
        let nx = 500usize;
        let x_grid: Vec<f64> = (1..=nx).map(|i| i as f64 * 20.0 / nx as f64).collect();
        let t_grid: Vec<f64> = (0..11).map(|k| k as f64 * 0.01 / 10.0).collect();
        let flow = evolve_flow(&profile, &x_grid, &t_grid, 1e-10)?;
        let wcfg = WeightConfig { alpha, sigma, x0: cfg.x0, case: SolitonCase::HalfComplete };
        let ctx = SolverContext::new(flow, wcfg)?;
        let initial = make_initial_data(cfg.init_shape, amplitude, cfg.init_support, &ctx.flow)?;
        let (_, report) = picard_solve(&ctx, &initial, cfg.picard_max_iter, cfg.picard_tol)?;
        let ratio = if report.final_energy.e0 > 0.0 {
            report.final_energy.total() / report.final_energy.e0
        } else {
            0.0
        };
        (Some(ratio), Some(report.kappa_max), Some(report.converged))
    } else {
        (None, None, None)
    };
    Ok(SweepCell {
        n,
        alpha,
        sigma,
        amplitude,
        grid_n,
        eig_gap,
        mms_err,
        energy_ratio,
        kappa_max,
        converged,
        failed: None,
    })
}

pub fn run_sweep(cfg: &RunConfig) -> Result<bool> {
    let any_range = !cfg.sweep_n.is_empty()
        || !cfg.sweep_alpha.is_empty()
        || !cfg.sweep_sigma.is_empty()
        || !cfg.sweep_amplitude.is_empty()
        || !cfg.sweep_grid_n.is_empty();
    if !any_range {
        bail!("empty sweep range: set at least one of sweep.n / sweep.alpha / sweep.sigma / sweep.amplitude / sweep.grid.n");
    }
    let ns = one_or(&cfg.sweep_n, cfg.n);
    let alphas = one_or(&cfg.sweep_alpha, cfg.alpha);
    let sigmas = one_or(&cfg.sweep_sigma, cfg.sigma);
    let amplitudes = one_or(&cfg.sweep_amplitude, cfg.init_amplitude);
    let grids = one_or(&cfg.sweep_grid_n, cfg.grid_n);
    let spatial_only = !cfg.sweep_grid_n.is_empty()
        && cfg.sweep_amplitude.is_empty()
        && cfg.sweep_alpha.is_empty()
        && cfg.sweep_sigma.is_empty();

    let mut specs = Vec::new();
    for &n in &ns {
        for &alpha in &alphas {
            for &sigma in &sigmas {
                for &amplitude in &amplitudes {
                    for &grid_n in &grids {
                        specs.push((n, alpha, sigma, amplitude, grid_n));
                    }
                }
            }
        }
    }
    // Cells run in parallel; results keep the deterministic cell order.
    let cells: Vec<SweepCell> = specs
        .par_iter()
        .map(|&(n, alpha, sigma, amplitude, grid_n)| {
            run_cell(cfg, n, alpha, sigma, amplitude, grid_n, spatial_only).unwrap_or_else(|e| {
                SweepCell {
                    n,
                    alpha,
                    sigma,
                    amplitude,
                    grid_n,
                    eig_gap: f64::NAN,
                    mms_err: None,
                    energy_ratio: None,
                    kappa_max: None,
                    converged: None,
                    failed: Some(e.to_string()),
                }
            })
        })
        .collect();

    let spatial_order = if grids.len() >= 2 {
        let pts: Vec<MmsPoint> = cells
            .iter()
            .filter_map(|c| {
                c.mms_err.map(|err| MmsPoint { h: 2.0 / (c.grid_n as f64 - 1.0), err })
            })
            .collect();
        if pts.len() >= 2 {
            Some(fitted_order(&pts))
        } else {
            None
        }
    } else {
        None
    };

    let failures = cells.iter().filter(|c| c.failed.is_some()).count();
    let mut csv = String::from(
        "n,alpha,sigma,amplitude,grid_n,eig_gap,mms_err,energy_ratio,kappa_max,converged,failed\n",
    );
    for c in &cells {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.n,
            c.alpha,
            c.sigma,
            c.amplitude,
            c.grid_n,
            c.eig_gap,
            c.mms_err.map_or(String::new(), |v| v.to_string()),
            c.energy_ratio.map_or(String::new(), |v| v.to_string()),
            c.kappa_max.map_or(String::new(), |v| v.to_string()),
            c.converged.map_or(String::new(), |v| v.to_string()),
            c.failed.clone().unwrap_or_default(),
        ));
    }
    let report = SweepReport { cells, spatial_order, failures };
    write_csv(&cfg.out, "sweep.csv", cfg, "sweep", &csv)?;
    write_json(&cfg.out, "sweep.json", cfg, "sweep", &report)?;
    if let Some(order) = report.spatial_order {
        println!("spatial order across grid sweep: {order:.3}");
    }
    println!(
        "{} cells, {} failed",
        report.cells.len(),
        report.failures
    );
    if cfg.json {
        println!("{}", serde_json::to_string(&report)?);
    }
    Ok(report.failures == 0)
}
