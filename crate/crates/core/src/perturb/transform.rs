//! The eta substitution and the pointwise right-hand sides of the two
//! equivalent perturbation systems.
//!
//! The raw variables are `zeta = chi~/chi - 1` and `xi = psi~/psi - 1`. The
//! zeta equation carries a `xi_ss` term that blocks energy estimates, so zeta
//! is replaced by
//!
//! ```text
//! eta = (zeta + 1)^2 / (xi + 1)^(2n) - 1,
//! ```
//!
//! after which the eta evolution contains no second derivatives: a pointwise
//! ODE in eta coupled to a heat equation in xi.

use crate::error::{Error, Result};
use crate::num::fd::{deriv2_s_uniform_x, deriv_s_uniform_x};
use crate::weights::BackgroundCoefficients;
use crate::flow::FlowField;
use crate::perturb::PerturbationState;

/// eta from (zeta, xi).
pub fn eta_transform(zeta: f64, xi: f64, n: u32) -> Result<f64> {
    if !(zeta + 1.0 > 0.0) || !(xi + 1.0 > 0.0) {
        return Err(Error::DegenerateState("need zeta + 1 > 0 and xi + 1 > 0".into()));
    }
    let z1 = zeta + 1.0;
    Ok(z1 * z1 / (xi + 1.0).powi(2 * n as i32) - 1.0)
}

/// zeta from (eta, xi), taking the positive square root.
pub fn eta_inverse(eta: f64, xi: f64, n: u32) -> Result<f64> {
    if !(eta + 1.0 > 0.0) || !(xi + 1.0 > 0.0) {
        return Err(Error::DegenerateState("need eta + 1 > 0 and xi + 1 > 0".into()));
    }
    Ok((eta + 1.0).sqrt() * (xi + 1.0).powi(n as i32) - 1.0)
}

/// Background coefficient values at a single point.
#[derive(Debug, Clone, Copy)]
pub struct CoeffPoint {
    /// psi_s / psi.
    pub ratio: f64,
    /// psi_ss/psi + (n-1)(psi_s/psi)^2.
    pub combo: f64,
    /// 1 / psi^2.
    pub inv_psi2: f64,
}

impl CoeffPoint {
    pub fn psidd_over_psi(&self, n: u32) -> f64 {
        self.combo - (n as f64 - 1.0) * self.ratio * self.ratio
    }
}

/// Right-hand sides of the transformed system at one point.
///
/// ```text
/// eta_t = -2n(n-1) [ p2 ((xi+1)^(-2n) - 1) + 2p xi_s (xi+1)^(-2n-1)
///                    + q (1 - (xi+1)^(-2)) + xi_s^2 (xi+1)^(-2n-2) ]
///         - 2n(n-1) q (1 - (xi+1)^(-2)) eta + 2n(n-1) p2 eta
/// xi_t  = combo [ ((eta+1)(xi+1)^(2n-1))^(-1) - (xi+1) ]
///         + (n-1) q (xi + 1 - (xi+1)^(-1))
///         + n p xi_s / ((eta+1)(xi+1)^(2n)) + xi_ss / ((eta+1)(xi+1)^(2n))
///         - xi_s^2 / ((eta+1)(xi+1)^(2n+1))
///         - p eta_s / (2 (eta+1)^2 (xi+1)^(2n-1))
///         - eta_s xi_s / (2 (eta+1)^2 (xi+1)^(2n))
/// ```
#[allow(clippy::too_many_arguments)]
pub fn pde_rhs_point(
    eta: f64,
    xi: f64,
    eta_s: f64,
    xi_s: f64,
    xi_ss: f64,
    cp: &CoeffPoint,
    n: u32,
) -> (f64, f64) {
    let nf = n as f64;
    let k = 2.0 * nf * (nf - 1.0);
    let p = cp.ratio;
    let p2 = p * p;
    let q = cp.inv_psi2;
    let x1 = xi + 1.0;
    let e1 = eta + 1.0;
    let x1_2n = x1.powi(2 * n as i32);
    let pot = q * (1.0 - 1.0 / (x1 * x1));
    let eta_t = -k
        * (p2 * (1.0 / x1_2n - 1.0)
            + 2.0 * p * xi_s / (x1_2n * x1)
            + pot
            + xi_s * xi_s / (x1_2n * x1 * x1))
        - k * pot * eta
        + k * p2 * eta;
    let den = e1 * x1_2n;
    let xi_t = cp.combo * (x1 / den - x1)
        + (nf - 1.0) * q * (x1 - 1.0 / x1)
        + nf * p * xi_s / den
        + xi_ss / den
        - xi_s * xi_s / (den * x1)
        - 0.5 * p * eta_s * x1 / (e1 * den)
        - 0.5 * eta_s * xi_s / (e1 * den);
    (eta_t, xi_t)
}

/// Right-hand sides of the raw (zeta, xi) system at one point.
#[allow(clippy::too_many_arguments)]
pub fn raw_rhs_point(
    zeta: f64,
    xi: f64,
    zeta_s: f64,
    xi_s: f64,
    xi_ss: f64,
    cp: &CoeffPoint,
    n: u32,
) -> (f64, f64) {
    let nf = n as f64;
    let p = cp.ratio;
    let q = cp.inv_psi2;
    let pdd = cp.psidd_over_psi(n);
    let z1 = zeta + 1.0;
    let x1 = xi + 1.0;
    let zeta_t = nf * pdd * (1.0 / z1 - z1)
        + 2.0 * nf * p * xi_s / (z1 * x1)
        + nf * xi_ss / (z1 * x1)
        - nf * p * zeta_s / (z1 * z1)
        - nf * zeta_s * xi_s / (z1 * z1 * x1);
    let xi_t = cp.combo * (x1 / (z1 * z1) - x1)
        + (nf - 1.0) * q * (x1 - 1.0 / x1)
        + 2.0 * nf * p * xi_s / (z1 * z1)
        + xi_ss / (z1 * z1)
        + (nf - 1.0) * xi_s * xi_s / (z1 * z1 * x1)
        - p * zeta_s * x1 / (z1 * z1 * z1)
        - zeta_s * xi_s / (z1 * z1 * z1);
    (zeta_t, xi_t)
}

/// Evaluate both right-hand sides of the transformed system over a grid
/// slice, with s-derivatives by the chain rule through that slice's measure.
pub fn pde_rhs(
    state: &PerturbationState,
    coeffs: &BackgroundCoefficients,
    flow: &FlowField,
    t_index: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nx = flow.nx();
    if state.eta.len() != nx || state.xi.len() != nx {
        return Err(Error::InvalidInput("state length mismatch".into()));
    }
    if t_index >= flow.nt() {
        return Err(Error::OutOfRange { index: t_index, len: flow.nt() });
    }
    if state.eta.iter().any(|e| !(*e + 1.0 > 0.0)) || state.xi.iter().any(|x| !(*x + 1.0 > 0.0)) {
        return Err(Error::DegenerateState("eta + 1 and xi + 1 must stay positive".into()));
    }
    let dx = flow.x_grid[1] - flow.x_grid[0];
    let chi = flow.chi.row(t_index);
    let eta_s = deriv_s_uniform_x(&state.eta, chi, dx);
    let xi_s = deriv_s_uniform_x(&state.xi, chi, dx);
    let xi_ss = deriv2_s_uniform_x(&state.xi, chi, dx);
    let mut eta_t = vec![0.0; nx];
    let mut xi_t = vec![0.0; nx];
    for i in 0..nx {
        let cp = CoeffPoint {
            ratio: coeffs.c_ratio.at(t_index, i),
            combo: coeffs.c_combo.at(t_index, i),
            inv_psi2: coeffs.c_inv_psi2.at(t_index, i),
        };
        let (et, xt) = pde_rhs_point(
            state.eta[i],
            state.xi[i],
            eta_s[i],
            xi_s[i],
            xi_ss[i],
            &cp,
            flow.n,
        );
        eta_t[i] = et;
        xi_t[i] = xt;
    }
    Ok((eta_t, xi_t))
}
