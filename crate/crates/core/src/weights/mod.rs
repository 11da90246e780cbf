//! Singular background coefficients, the space-time weight and the weighted
//! Sobolev energy machinery.
//!
//! All fields live on the flow's fixed (x, t) grid; s-derivatives go through
//! the chain rule ds = chi dx and integrals use the trapezoid rule with the
//! exact evolving measure. Near the singular corner the weight is
//! `ell^2 = s^2 + sigma t`; in the half-complete case it is interpolated to 1
//! across [x0, x0 + 1) by a cubic Hermite blend with zero end slopes.

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::num::fd::{deriv2_s_uniform_x, deriv_s_uniform_x};
use crate::num::quad::{cumtrapz, trapz, trapz_weighted_uniform};
use crate::num::Grid2;
use crate::soliton::{SolitonCase, SolitonProfile};
use serde::{Deserialize, Serialize};

/// Weight exponent, time-weight strength and crossover point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightConfig {
    pub alpha: u32,
    pub sigma: f64,
    /// Crossover x0 (delta in the general case, 1 for half-complete).
    pub x0: f64,
    pub case: SolitonCase,
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 1 {
            return Err(Error::Configuration("alpha must be >= 1".into()));
        }
        if !(self.sigma > 0.0) || !(self.x0 > 0.0) {
            return Err(Error::Configuration("sigma and x0 must be positive".into()));
        }
        Ok(())
    }
}

/// Precomputed squared weight on the grid.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub ell2: Grid2,
}

fn smoothstep(theta: f64) -> f64 {
    let t = theta.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn ell2_value(cfg: &WeightConfig, x: f64, s: f64, t: f64, ell2_left: f64) -> f64 {
    match cfg.case {
        SolitonCase::General => s * s + cfg.sigma * t,
        SolitonCase::HalfComplete => {
            if x < cfg.x0 {
                s * s + cfg.sigma * t
            } else if x < cfg.x0 + 1.0 {
                ell2_left + (1.0 - ell2_left) * smoothstep(x - cfg.x0)
            } else {
                1.0
            }
        }
    }
}

/// Build the weight over the flow grid.
pub fn build_weight_table(cfg: &WeightConfig, flow: &FlowField) -> Result<WeightTable> {
    cfg.validate()?;
    let mut ell2 = Grid2::zeros(flow.nt(), flow.nx());
    for k in 0..flow.nt() {
        let t = flow.t_grid[k];
        let s0 = flow.s_at_x(cfg.x0, k);
        let left = s0 * s0 + cfg.sigma * t;
        for i in 0..flow.nx() {
            ell2.set(k, i, ell2_value(cfg, flow.x_grid[i], flow.s.at(k, i), t, left));
        }
    }
    Ok(WeightTable { ell2 })
}

/// Weight at an arbitrary arc-length value and grid time. The time must
/// coincide with a stored slice; the branch is resolved by inverting s -> x.
pub fn weight_ell(s_val: f64, t: f64, cfg: &WeightConfig, flow: &FlowField) -> Result<f64> {
    cfg.validate()?;
    let k = flow
        .t_grid
        .iter()
        .position(|tk| (tk - t).abs() <= 1e-12 * tk.abs().max(1.0))
        .ok_or_else(|| Error::InvalidInput(format!("t = {t} is not a stored slice")))?;
    let x = flow.x_of_s(s_val, k);
    let s0 = flow.s_at_x(cfg.x0, k);
    let left = s0 * s0 + cfg.sigma * t;
    Ok(ell2_value(cfg, x, s_val, t, left).sqrt())
}

/// Weighted Sobolev norm squared
/// `int u^2/ell^(2a) + ... + (d_s^k u)^2 / ell^(2a-2k) ds` at one time slice.
pub fn weighted_norm_sq(
    u: &[f64],
    k_order: usize,
    alpha: u32,
    t_index: usize,
    table: &WeightTable,
    flow: &FlowField,
) -> Result<f64> {
    if k_order > 2 {
        return Err(Error::InvalidInput("derivative order k must be <= 2".into()));
    }
    if u.len() != flow.nx() {
        return Err(Error::InvalidInput("grid function length mismatch".into()));
    }
    if t_index >= flow.nt() {
        return Err(Error::OutOfRange { index: t_index, len: flow.nt() });
    }
    if u.len() < 3 && k_order >= 1 {
        return Err(Error::InsufficientData("need at least 3 points for derivatives".into()));
    }
    let dx = flow.x_grid[1] - flow.x_grid[0];
    if flow.x_grid.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * dx) {
        return Err(Error::InvalidInput("weighted norms expect a uniform x grid".into()));
    }
    let chi = flow.chi.row(t_index);
    let d1;
    let d2;
    let mut integrand = vec![0.0; u.len()];
    let ell2_row = table.ell2.row(t_index);
    for (i, v) in u.iter().enumerate() {
        integrand[i] = v * v / ell2_row[i].powi(alpha as i32);
    }
    if k_order >= 1 {
        d1 = deriv_s_uniform_x(u, chi, dx);
        for (i, d) in d1.iter().enumerate() {
            integrand[i] += d * d / ell2_row[i].powi(alpha as i32 - 1);
        }
    }
    if k_order >= 2 {
        d2 = deriv2_s_uniform_x(u, chi, dx);
        for (i, d) in d2.iter().enumerate() {
            integrand[i] += d * d / ell2_row[i].powi(alpha as i32 - 2);
        }
    }
    Ok(trapz_weighted_uniform(&integrand, chi, dx))
}

/// Per-slice norms entering the energy functional.
#[derive(Debug, Clone, Serialize)]
pub struct SliceNorms {
    pub t: f64,
    pub h1_alpha_eta: f64,
    pub h1_alpha1_eta: f64,
    pub h1_alpha_xi: f64,
    pub h2_alpha1_xi: f64,
}

/// The four components of the energy functional plus the initial energy.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub linf_h1_eta: f64,
    pub l2_h1p1_eta: f64,
    pub linf_h1_xi: f64,
    pub l2_h2p1_xi: f64,
    pub e0: f64,
    pub per_slice: Vec<SliceNorms>,
}

impl EnergyReport {
    pub fn total(&self) -> f64 {
        self.linf_h1_eta + self.l2_h1p1_eta + self.linf_h1_xi + self.l2_h2p1_xi
    }
}

/// Energy of a solution series:
/// `E = |eta|^2_{Linf H^1_a} + |eta|^2_{L2 H^1_(a+1)} + |xi|^2_{Linf H^1_a}
///    + |xi|^2_{L2 H^2_(a+1)}`.
pub fn energy_functional(
    eta_series: &[Vec<f64>],
    xi_series: &[Vec<f64>],
    cfg: &WeightConfig,
    flow: &FlowField,
) -> Result<EnergyReport> {
    if eta_series.len() != flow.nt() || xi_series.len() != flow.nt() {
        return Err(Error::InvalidInput("series not aligned with the flow time grid".into()));
    }
    let table = build_weight_table(cfg, flow)?;
    let mut per_slice = Vec::with_capacity(flow.nt());
    for k in 0..flow.nt() {
        per_slice.push(SliceNorms {
            t: flow.t_grid[k],
            h1_alpha_eta: weighted_norm_sq(&eta_series[k], 1, cfg.alpha, k, &table, flow)?,
            h1_alpha1_eta: weighted_norm_sq(&eta_series[k], 1, cfg.alpha + 1, k, &table, flow)?,
            h1_alpha_xi: weighted_norm_sq(&xi_series[k], 1, cfg.alpha, k, &table, flow)?,
            h2_alpha1_xi: weighted_norm_sq(&xi_series[k], 2, cfg.alpha + 1, k, &table, flow)?,
        });
    }
    let linf_h1_eta = per_slice.iter().map(|s| s.h1_alpha_eta).fold(0.0, f64::max);
    let linf_h1_xi = per_slice.iter().map(|s| s.h1_alpha_xi).fold(0.0, f64::max);
    let h1a1: Vec<f64> = per_slice.iter().map(|s| s.h1_alpha1_eta).collect();
    let h2a1: Vec<f64> = per_slice.iter().map(|s| s.h2_alpha1_xi).collect();
    let l2_h1p1_eta = trapz(&flow.t_grid, &h1a1);
    let l2_h2p1_xi = trapz(&flow.t_grid, &h2a1);
    let e0 = per_slice[0].h1_alpha_eta + per_slice[0].h1_alpha_xi;
    Ok(EnergyReport { linf_h1_eta, l2_h1p1_eta, linf_h1_xi, l2_h2p1_xi, e0, per_slice })
}

/// The singular coefficient fields of the perturbation system on the grid.
#[derive(Debug, Clone)]
pub struct BackgroundCoefficients {
    /// 1/psi^2.
    pub c_inv_psi2: Grid2,
    /// psi_s / psi.
    pub c_ratio: Grid2,
    /// (psi_s / psi)^2.
    pub c_ratio2: Grid2,
    /// psi_ss/psi + (n-1) (psi_s/psi)^2.
    pub c_combo: Grid2,
    /// A(s, t) = s / psi^2.
    pub a_field: Grid2,
    /// A(t) = sup_s A(s, t) per slice.
    pub a_sup: Vec<f64>,
    /// Cumulative integral of A^2 from 0 to t_k.
    pub int_a2: Vec<f64>,
}

/// Exact chain-rule evaluation of the background fields at rho_t(x):
/// `psi_s/psi = psi'(rho)/psi(rho)/sqrt(eps)`, `psi_ss/psi = psi''/psi / eps`,
/// `1/psi^2 = 1/(eps psi^2(rho))`.
pub fn background_coefficients(
    flow: &FlowField,
    profile: &SolitonProfile,
) -> Result<BackgroundCoefficients> {
    if profile.params.n != flow.n || profile.params.lambda != flow.lambda {
        return Err(Error::InvalidInput("flow and profile parameters disagree".into()));
    }
    background_from_flow(flow)
}

/// Same evaluation through the profile evaluator the flow already carries.
pub fn background_from_flow(flow: &FlowField) -> Result<BackgroundCoefficients> {
    let nf = flow.n as f64;
    let nt = flow.nt();
    let nx = flow.nx();
    let mut c_inv_psi2 = Grid2::zeros(nt, nx);
    let mut c_ratio = Grid2::zeros(nt, nx);
    let mut c_ratio2 = Grid2::zeros(nt, nx);
    let mut c_combo = Grid2::zeros(nt, nx);
    let mut a_field = Grid2::zeros(nt, nx);
    let mut a_sup = Vec::with_capacity(nt);
    let x_cap = flow.eval.x_max();
    for k in 0..nt {
        let eps = flow.eps[k];
        let sq_eps = eps.sqrt();
        let mut sup = 0.0f64;
        for i in 0..nx {
            let r = flow.rho.at(k, i);
            if r > x_cap {
                return Err(Error::DomainExit { t: flow.t_grid[k], x: flow.x_grid[i] });
            }
            let psi_r = flow.eval.psi(r);
            let ratio = flow.eval.ratio(r) / sq_eps;
            let inv_psi2 = 1.0 / (eps * psi_r * psi_r);
            let combo = flow.eval.psidd_over_psi(r) / eps + (nf - 1.0) * ratio * ratio;
            let a = flow.s.at(k, i) * inv_psi2;
            c_inv_psi2.set(k, i, inv_psi2);
            c_ratio.set(k, i, ratio);
            c_ratio2.set(k, i, ratio * ratio);
            c_combo.set(k, i, combo);
            a_field.set(k, i, a);
            sup = sup.max(a);
        }
        a_sup.push(sup);
    }
    let a2: Vec<f64> = a_sup.iter().map(|a| a * a).collect();
    let int_a2 = cumtrapz(&flow.t_grid, &a2, 0.0);
    Ok(BackgroundCoefficients { c_inv_psi2, c_ratio, c_ratio2, c_combo, a_field, a_sup, int_a2 })
}

/// Grid checks of the weight/coefficient comparison estimates.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// Empirical range of ell^2/s^2 on the region x < x0.
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// The asserted upper bound 1 + 2 sigma / (sqrt n - 1).
    pub ratio_bound: f64,
    /// Cumulative integral of A(t)^2 per slice (shrinks to 0 as t -> 0).
    pub int_a2: Vec<f64>,
    /// Worst margin of int_0^t 1/s dtau <= 2 sqrt(t/(sqrt n - 1)) (steady).
    pub inv_s_margin: Option<f64>,
    /// Cumulative integral of 1/s^2 at the three smallest x, largest t
    /// (diverges as x -> 0).
    pub inv_s2_trend: Vec<f64>,
    pub inv_s2_monotone_in_x: bool,
}

pub fn comparison_and_a_check(
    coeffs: &BackgroundCoefficients,
    cfg: &WeightConfig,
    flow: &FlowField,
) -> Result<ComparisonReport> {
    cfg.validate()?;
    let table = build_weight_table(cfg, flow)?;
    let sq = (flow.n as f64).sqrt();
    let bound = 1.0 + 2.0 * cfg.sigma / (sq - 1.0);
    let mut rmin = f64::INFINITY;
    let mut rmax = 0.0f64;
    for k in 0..flow.nt() {
        for i in 0..flow.nx() {
            if cfg.case == SolitonCase::HalfComplete && flow.x_grid[i] >= cfg.x0 {
                break;
            }
            let s2 = flow.s.at(k, i) * flow.s.at(k, i);
            let ratio = table.ell2.at(k, i) / s2;
            rmin = rmin.min(ratio);
            rmax = rmax.max(ratio);
        }
    }
    if rmax > bound * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "ell^2/s^2 reached {rmax}, above the bound {bound}; check sigma/x0"
        )));
    }
    // Steady case: int_0^t 1/s dtau <= 2 sqrt(t / (sqrt n - 1)).
    let inv_s_margin = if flow.lambda == 0.0 {
        let mut margin = f64::INFINITY;
        for i in 0..flow.nx() {
            let col: Vec<f64> = (0..flow.nt()).map(|k| 1.0 / flow.s.at(k, i)).collect();
            let cums = cumtrapz(&flow.t_grid, &col, 0.0);
            for (k, val) in cums.iter().enumerate().skip(1) {
                margin = margin.min(2.0 * (flow.t_grid[k] / (sq - 1.0)).sqrt() - val);
            }
        }
        Some(margin)
    } else {
        None
    };
    let mut inv_s2_trend = Vec::new();
    for i in (0..3.min(flow.nx())).rev() {
        let col: Vec<f64> = (0..flow.nt()).map(|k| 1.0 / (flow.s.at(k, i) * flow.s.at(k, i))).collect();
        inv_s2_trend.push(trapz(&flow.t_grid, &col));
    }
    let inv_s2_monotone_in_x = inv_s2_trend.windows(2).all(|w| w[1] >= w[0]);
    Ok(ComparisonReport {
        ratio_min: rmin,
        ratio_max: rmax,
        ratio_bound: bound,
        int_a2: coeffs.int_a2.clone(),
        inv_s_margin,
        inv_s2_trend,
        inv_s2_monotone_in_x,
    })
}
