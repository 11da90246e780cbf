//! One implicit step of the linearized iteration.
//!
//! The unknown (m+1)-iterate appears in every term with a singular
//! coefficient: the xi equation is advanced by backward Euler with a
//! tridiagonal solve (diffusion, first-order transport and the singular
//! zeroth-order term all implicit; the eta coupling time-lagged), then the
//! eta equation — a pointwise linear ODE once xi is known — is advanced by
//! an exact integrating factor using the freshly updated xi. Coefficients
//! and forcing are evaluated at the new time level, so the first step never
//! touches the non-integrable t = 0 corner values.

use super::{PerturbationState, PrevIterate};
use crate::error::{Error, Result};
use crate::num::fd::deriv_s_uniform_x;
use crate::num::tridiag::solve_tridiag;
use crate::weights::BackgroundCoefficients;
use crate::flow::FlowField;

/// Binomial sum over j = 2..=2n of C(2n, j) xi^j (the quadratic-and-higher
/// part of (xi+1)^(2n) - 1), evaluated with signed powers so the iteration's
/// fixed point is the transformed system itself.
pub fn binom_tail(xi: f64, n: u32) -> f64 {
    let m = 2 * n as u64;
    let mut coeff = 1.0f64;
    // C(m, 2) after the loop below starts at j = 2.
    let mut acc = 0.0;
    let mut pow = xi * xi;
    coeff = coeff * m as f64 * (m as f64 - 1.0) / 2.0;
    for j in 2..=m {
        acc += coeff * pow;
        pow *= xi;
        coeff = coeff * (m - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Coefficient fields and forcing of one linear step, all at the new time.
#[derive(Debug, Clone)]
pub struct LinearStepProblem {
    pub dt: f64,
    pub t_new: f64,
    pub n: u32,
    /// Diffusion coefficient 1/((eta^m+1)(xi^m+1)^(2n)); parabolicity
    /// requires it to stay above g_min.
    pub g: Vec<f64>,
    pub c_eta_xi: Vec<f64>,
    pub c_eta_xis: Vec<f64>,
    pub c_eta_eta: Vec<f64>,
    pub f1: Vec<f64>,
    pub c_xi_eta: Vec<f64>,
    pub c_xi_xi: Vec<f64>,
    pub c_xi_xis: Vec<f64>,
    pub c_xi_etas: Vec<f64>,
    pub f2: Vec<f64>,
    /// Measure row chi(., t_new) for the s-stencils.
    pub chi: Vec<f64>,
    pub dx: f64,
}

/// Floor for the diffusion coefficient before a step is rejected.
pub const G_MIN_DEFAULT: f64 = 1e-3;

/// Assemble the linear problem for the step onto `t_new = t_grid[k_new]`,
/// freezing the previous iterate's fields at that slice.
pub fn assemble_linear_step(
    prev: &PrevIterate<'_>,
    coeffs: &BackgroundCoefficients,
    flow: &FlowField,
    k_new: usize,
    dt: f64,
    g_min: f64,
) -> Result<LinearStepProblem> {
    let nx = flow.nx();
    if k_new == 0 || k_new >= flow.nt() {
        return Err(Error::OutOfRange { index: k_new, len: flow.nt() });
    }
    if prev.eta.len() != nx || prev.xi.len() != nx {
        return Err(Error::InvalidInput("previous iterate length mismatch".into()));
    }
    let nf = flow.n as f64;
    let kfac = 2.0 * nf * (nf - 1.0);
    let two_n = 2 * flow.n as i32;
    let dx = flow.x_grid[1] - flow.x_grid[0];
    let chi: Vec<f64> = flow.chi.row(k_new).to_vec();
    let xi_s_prev = deriv_s_uniform_x(prev.xi, &chi, dx);
    let eta_s_prev = deriv_s_uniform_x(prev.eta, &chi, dx);

    let mut p = LinearStepProblem {
        dt,
        t_new: flow.t_grid[k_new],
        n: flow.n,
        g: vec![0.0; nx],
        c_eta_xi: vec![0.0; nx],
        c_eta_xis: vec![0.0; nx],
        c_eta_eta: vec![0.0; nx],
        f1: vec![0.0; nx],
        c_xi_eta: vec![0.0; nx],
        c_xi_xi: vec![0.0; nx],
        c_xi_xis: vec![0.0; nx],
        c_xi_etas: vec![0.0; nx],
        f2: vec![0.0; nx],
        chi,
        dx,
    };
    for i in 0..nx {
        let b = prev.xi[i];
        let e = prev.eta[i];
        let b1 = b + 1.0;
        let e1 = e + 1.0;
        if !(b1 > 0.0) || !(e1 > 0.0) {
            return Err(Error::DegenerateState(format!(
                "previous iterate leaves the admissible region at node {i}"
            )));
        }
        let b1_2n = b1.powi(two_n);
        let g = 1.0 / (e1 * b1_2n);
        if g < g_min {
            return Err(Error::StepRejection(format!(
                "diffusion coefficient {g:e} below {g_min:e} at node {i}"
            )));
        }
        let ratio = coeffs.c_ratio.at(k_new, i);
        let ratio2 = coeffs.c_ratio2.at(k_new, i);
        let combo = coeffs.c_combo.at(k_new, i);
        let q = coeffs.c_inv_psi2.at(k_new, i);
        let s_tail = binom_tail(b, flow.n);
        let pot = q * b * (b + 2.0) / (b1 * b1);
        let bs = xi_s_prev[i];
        p.g[i] = g;
        p.c_eta_xi[i] = kfac * ratio2 * (2.0 * nf) / b1_2n;
        p.c_eta_xis[i] = -kfac * 2.0 * ratio / (b1_2n * b1);
        p.c_eta_eta[i] = kfac * (ratio2 - pot);
        p.f1[i] = kfac * (ratio2 * s_tail / b1_2n - pot - bs * bs / (b1_2n * b1 * b1));
        p.c_xi_eta[i] = -combo * b1 * g;
        p.c_xi_xi[i] = -2.0 * nf * combo * b1 / b1_2n;
        p.c_xi_xis[i] = nf * ratio * g;
        p.c_xi_etas[i] = -0.5 * ratio * b1 * g / e1;
        p.f2[i] = -combo * s_tail * b1 / b1_2n + (nf - 1.0) * q * b * (b + 2.0) / b1
            - bs * bs * g / b1
            - 0.5 * eta_s_prev[i] * bs * g / e1;
    }
    Ok(p)
}

/// Advance one backward-Euler step: tridiagonal solve for xi with Dirichlet
/// ends, then the exact integrating-factor update for eta using the new xi.
pub fn linear_step(problem: &LinearStepProblem, state: &PerturbationState) -> Result<PerturbationState> {
    let nx = problem.chi.len();
    if state.eta.len() != nx || state.xi.len() != nx {
        return Err(Error::InvalidInput("state length mismatch".into()));
    }
    let dt = problem.dt;
    let dx = problem.dx;
    let chi = &problem.chi;
    let eta_s_old = deriv_s_uniform_x(&state.eta, chi, dx);

    let mut sub = vec![0.0; nx];
    let mut diag = vec![1.0; nx];
    let mut sup = vec![0.0; nx];
    let mut rhs = vec![0.0; nx];
    // Dirichlet rows at both ends: xi = 0 exactly.
    for i in 1..nx - 1 {
        let cm = 0.5 * (chi[i] + chi[i - 1]);
        let cp = 0.5 * (chi[i] + chi[i + 1]);
        let ai = 1.0 / (dx * dx * chi[i] * cm);
        let ci = 1.0 / (dx * dx * chi[i] * cp);
        let d1 = 1.0 / (2.0 * dx * chi[i]);
        let g = problem.g[i];
        sub[i] = -dt * (g * ai - problem.c_xi_xis[i] * d1);
        diag[i] = 1.0 - dt * (-g * (ai + ci) + problem.c_xi_xi[i]);
        sup[i] = -dt * (g * ci + problem.c_xi_xis[i] * d1);
        rhs[i] = state.xi[i]
            + dt * (problem.c_xi_eta[i] * state.eta[i]
                + problem.c_xi_etas[i] * eta_s_old[i]
                + problem.f2[i]);
    }
    let xi_new = solve_tridiag(&sub, &diag, &sup, &rhs)?;
    let xi_s_new = deriv_s_uniform_x(&xi_new, chi, dx);

    let mut eta_new = vec![0.0; nx];
    for i in 0..nx {
        let c = problem.c_eta_eta[i];
        let r = problem.c_eta_xi[i] * xi_new[i]
            + problem.c_eta_xis[i] * xi_s_new[i]
            + problem.f1[i];
        let z = c * dt;
        // exp(z) eta + (exp(z) - 1)/c * r, with the c -> 0 limit dt * r.
        let phi = if z.abs() > 1e-14 { z.exp_m1() / c } else { dt };
        eta_new[i] = (1.0 + z.exp_m1()) * state.eta[i] + phi * r;
    }
    if eta_new.iter().chain(&xi_new).any(|v| !v.is_finite()) {
        return Err(Error::NumericalBlowup(format!(
            "non-finite state after the step onto t = {}",
            problem.t_new
        )));
    }
    Ok(PerturbationState { t: problem.t_new, eta: eta_new, xi: xi_new })
}
