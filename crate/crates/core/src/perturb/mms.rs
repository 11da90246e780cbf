//! Manufactured-solution studies for the linear step.
//!
//! The step machinery is exercised on synthetic smooth coefficient fields
//! with exact solutions inserted through analytic forcing. Two designs keep
//! the error sources separated:
//!
//! * the spatial study refines dt alongside ds^2, so the measured total
//!   error scales like ds^2;
//! * the temporal study uses solutions quadratic in s, for which every
//!   spatial stencil in the step is exact, leaving the pure O(dt) error of
//!   the backward-Euler/Gauss-Seidel splitting.

use super::linear::{linear_step, LinearStepProblem};
use super::PerturbationState;
use crate::num::fit::linear_fit;
use serde::Serialize;

/// One (resolution, error) sample of a refinement study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MmsPoint {
    pub h: f64,
    pub err: f64,
}

/// Log-log regression slope of err against h.
pub fn fitted_order(points: &[MmsPoint]) -> f64 {
    let lx: Vec<f64> = points.iter().map(|p| p.h.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.err.ln()).collect();
    linear_fit(&lx, &ly).1
}

const S_LEN: f64 = 2.0;

struct Coeffs;

impl Coeffs {
    fn g(s: f64) -> f64 {
        1.0 + 0.3 * (std::f64::consts::PI * s / S_LEN).sin()
    }
    fn c_eta_xi(s: f64) -> f64 {
        2.0 + s.sin()
    }
    fn c_eta_xis(s: f64) -> f64 {
        0.5 * s.cos()
    }
    fn c_eta_eta(s: f64) -> f64 {
        -1.0 - 0.5 * s.sin()
    }
    fn c_xi_eta(s: f64) -> f64 {
        -1.0 + 0.3 * s.cos()
    }
    fn c_xi_xi(s: f64) -> f64 {
        -2.0 - s.sin()
    }
    fn c_xi_xis(s: f64) -> f64 {
        0.4 * s.sin()
    }
    fn c_xi_etas(s: f64) -> f64 {
        0.3 * s.cos()
    }
}

/// Exact solution pair with analytic derivatives.
trait Exact {
    fn eta(&self, s: f64, t: f64) -> f64;
    fn eta_s(&self, s: f64, t: f64) -> f64;
    fn eta_t(&self, s: f64, t: f64) -> f64;
    fn xi(&self, s: f64, t: f64) -> f64;
    fn xi_s(&self, s: f64, t: f64) -> f64;
    fn xi_ss(&self, s: f64, t: f64) -> f64;
    fn xi_t(&self, s: f64, t: f64) -> f64;
}

/// Generic smooth fields, linear in t (used for the spatial study).
struct SineExact;

impl Exact for SineExact {
    fn eta(&self, s: f64, t: f64) -> f64 {
        (0.7 * s + 0.3).sin() * (1.0 + 0.5 * t)
    }
    fn eta_s(&self, s: f64, t: f64) -> f64 {
        0.7 * (0.7 * s + 0.3).cos() * (1.0 + 0.5 * t)
    }
    fn eta_t(&self, s: f64, _t: f64) -> f64 {
        0.5 * (0.7 * s + 0.3).sin()
    }
    fn xi(&self, s: f64, t: f64) -> f64 {
        (std::f64::consts::PI * s / S_LEN).sin() * (1.0 + 0.5 * t)
    }
    fn xi_s(&self, s: f64, t: f64) -> f64 {
        let k = std::f64::consts::PI / S_LEN;
        k * (k * s).cos() * (1.0 + 0.5 * t)
    }
    fn xi_ss(&self, s: f64, t: f64) -> f64 {
        let k = std::f64::consts::PI / S_LEN;
        -k * k * (k * s).sin() * (1.0 + 0.5 * t)
    }
    fn xi_t(&self, s: f64, _t: f64) -> f64 {
        0.5 * (std::f64::consts::PI * s / S_LEN).sin()
    }
}

/// Quadratic in s, exponential in t (used for the temporal study): all
/// spatial stencils in the step are exact on it.
struct QuadraticExact;

impl Exact for QuadraticExact {
    fn eta(&self, s: f64, t: f64) -> f64 {
        (0.5 + 0.3 * s - 0.1 * s * s) * t.exp()
    }
    fn eta_s(&self, s: f64, t: f64) -> f64 {
        (0.3 - 0.2 * s) * t.exp()
    }
    fn eta_t(&self, s: f64, t: f64) -> f64 {
        self.eta(s, t)
    }
    fn xi(&self, s: f64, t: f64) -> f64 {
        0.1 * s * (S_LEN - s) * t.exp()
    }
    fn xi_s(&self, s: f64, t: f64) -> f64 {
        0.1 * (S_LEN - 2.0 * s) * t.exp()
    }
    fn xi_ss(&self, _s: f64, t: f64) -> f64 {
        -0.2 * t.exp()
    }
    fn xi_t(&self, s: f64, t: f64) -> f64 {
        self.xi(s, t)
    }
}

fn run_mms(exact: &dyn Exact, nx: usize, dt: f64, t_end: f64) -> f64 {
    let dx = S_LEN / (nx - 1) as f64;
    let s_grid: Vec<f64> = (0..nx).map(|i| i as f64 * dx).collect();
    let n_steps = (t_end / dt).round() as usize;
    let mut state = PerturbationState {
        t: 0.0,
        eta: s_grid.iter().map(|s| exact.eta(*s, 0.0)).collect(),
        xi: s_grid.iter().map(|s| exact.xi(*s, 0.0)).collect(),
    };
    for k in 1..=n_steps {
        let t_new = k as f64 * dt;
        let mut p = LinearStepProblem {
            dt,
            t_new,
            n: 4,
            g: Vec::with_capacity(nx),
            c_eta_xi: Vec::with_capacity(nx),
            c_eta_xis: Vec::with_capacity(nx),
            c_eta_eta: Vec::with_capacity(nx),
            f1: Vec::with_capacity(nx),
            c_xi_eta: Vec::with_capacity(nx),
            c_xi_xi: Vec::with_capacity(nx),
            c_xi_xis: Vec::with_capacity(nx),
            c_xi_etas: Vec::with_capacity(nx),
            f2: Vec::with_capacity(nx),
            chi: vec![1.0; nx],
            dx,
        };
        for s in &s_grid {
            let s = *s;
            p.g.push(Coeffs::g(s));
            p.c_eta_xi.push(Coeffs::c_eta_xi(s));
            p.c_eta_xis.push(Coeffs::c_eta_xis(s));
            p.c_eta_eta.push(Coeffs::c_eta_eta(s));
            p.c_xi_eta.push(Coeffs::c_xi_eta(s));
            p.c_xi_xi.push(Coeffs::c_xi_xi(s));
            p.c_xi_xis.push(Coeffs::c_xi_xis(s));
            p.c_xi_etas.push(Coeffs::c_xi_etas(s));
            p.f1.push(
                exact.eta_t(s, t_new)
                    - (Coeffs::c_eta_xi(s) * exact.xi(s, t_new)
                        + Coeffs::c_eta_xis(s) * exact.xi_s(s, t_new)
                        + Coeffs::c_eta_eta(s) * exact.eta(s, t_new)),
            );
            p.f2.push(
                exact.xi_t(s, t_new)
                    - (Coeffs::c_xi_eta(s) * exact.eta(s, t_new)
                        + Coeffs::c_xi_xi(s) * exact.xi(s, t_new)
                        + Coeffs::c_xi_xis(s) * exact.xi_s(s, t_new)
                        + Coeffs::g(s) * exact.xi_ss(s, t_new)
                        + Coeffs::c_xi_etas(s) * exact.eta_s(s, t_new)),
            );
        }
        state = linear_step(&p, &state).expect("mms step");
    }
    let t = state.t;
    let mut err = 0.0f64;
    for (i, s) in s_grid.iter().enumerate() {
        err = err.max((state.eta[i] - exact.eta(*s, t)).abs());
        err = err.max((state.xi[i] - exact.xi(*s, t)).abs());
    }
    err
}

/// Spatial refinement study: dt is tied to ds^2 so the total error scales at
/// the spatial order.
pub fn mms_spatial_study(resolutions: &[usize]) -> Vec<MmsPoint> {
    let t_end = 0.02;
    resolutions
        .iter()
        .map(|&nx| {
            let dx = S_LEN / (nx - 1) as f64;
            let dt_raw = 0.5 * dx * dx;
            let n_steps = (t_end / dt_raw).ceil() as usize;
            let dt = t_end / n_steps as f64;
            MmsPoint { h: dx, err: run_mms(&SineExact, nx, dt, t_end) }
        })
        .collect()
}

/// Temporal refinement study on a fixed grid with spatially exact solutions.
pub fn mms_temporal_study(dts: &[f64], nx: usize) -> Vec<MmsPoint> {
    let t_end = 0.02;
    dts.iter()
        .map(|&dt_raw| {
            let n_steps = (t_end / dt_raw).ceil() as usize;
            let dt = t_end / n_steps as f64;
            MmsPoint { h: dt, err: run_mms(&QuadraticExact, nx, dt, t_end) }
        })
        .collect()
}

/// One step of size dt versus two of dt/2 from the same data: the gap
/// shrinks at second order in dt (first-order scheme, local probe).
pub fn local_step_order_probe(dt: f64, nx: usize) -> (f64, f64) {
    let gap = |h: f64| -> f64 {
        let one = run_mms(&QuadraticExact, nx, h, h);
        let two = run_mms(&QuadraticExact, nx, h / 2.0, h);
        (one - two).abs()
    };
    (gap(dt), gap(dt / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spatial_order_is_two() {
        let pts = mms_spatial_study(&[126, 251, 501]);
        let order = fitted_order(&pts);
        assert!((order - 2.0).abs() <= 0.3, "spatial order {order}, points {pts:?}");
    }

    #[test]
    fn temporal_order_is_one() {
        let pts = mms_temporal_study(&[2e-3, 1e-3, 5e-4], 201);
        let order = fitted_order(&pts);
        assert!((order - 1.0).abs() <= 0.2, "temporal order {order}, points {pts:?}");
    }

    #[test]
    fn step_halving_gap_is_second_order() {
        let (g1, g2) = local_step_order_probe(2e-3, 161);
        let ratio = g1 / g2;
        assert!((2.8..=5.2).contains(&ratio), "local probe ratio {ratio}");
    }
}
