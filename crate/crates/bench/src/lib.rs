//! Benchmark crate: shared fixtures for the criterion targets.

use solitonlab_core::flow::{evolve_flow, FlowField};
use solitonlab_core::soliton::explicit_profile_n4;

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Small half-complete flow on the closed-form background.
pub fn bench_flow(nx: usize, nt: usize) -> FlowField {
    let profile = explicit_profile_n4(1.0, &log_grid(1e-5, 40.0, 400)).unwrap();
    let x_grid: Vec<f64> = (1..=nx).map(|i| i as f64 * 20.0 / nx as f64).collect();
    let t_grid: Vec<f64> = (0..nt).map(|k| k as f64 * 0.01 / (nt - 1) as f64).collect();
    evolve_flow(&profile, &x_grid, &t_grid, 1e-10).unwrap()
}
