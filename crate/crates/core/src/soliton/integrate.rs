//! Trajectory construction from the source equilibrium.

use super::dynamics::{ode_rhs, ode_rhs_raw};
use super::{SolitonCase, SolitonParams, Trajectory, TrajectoryState};
use crate::error::{Error, Result};
use crate::num::fd::deriv_nonuniform;
use crate::num::rk45::{integrate_adaptive, integrate_at, Guard, Rk45Options};
use serde::Serialize;

/// Any phase component beyond this magnitude counts as blow-up.
pub const ESCAPE_CAP: f64 = 1e6;

/// Box whose exit defines the domain scale delta in the general case.
#[derive(Debug, Clone, Copy)]
pub struct PhaseBox {
    pub w_max: f64,
    pub x_abs_max: f64,
    pub y_max: f64,
}

impl Default for PhaseBox {
    fn default() -> Self {
        Self { w_max: 3.0, x_abs_max: 3.0, y_max: 3.0 }
    }
}

impl PhaseBox {
    fn contains(&self, s: &TrajectoryState) -> bool {
        s.w <= self.w_max && s.x.abs() <= self.x_abs_max && s.y <= self.y_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stop {
    None,
    Escape(f64),
    YSign(f64),
    BoxExit(f64),
}

fn run_segment(
    params: &SolitonParams,
    start: TrajectoryState,
    y_from: f64,
    y_to: f64,
    tol: f64,
    box_guard: Option<PhaseBox>,
) -> Result<(Vec<f64>, Vec<TrajectoryState>, Option<f64>)> {
    let nf = params.n as f64;
    let lambda = params.lambda;
    let mut stop = Stop::None;
    let run = integrate_adaptive(
        |_, y: &[f64; 3]| {
            let d = ode_rhs_raw(&TrajectoryState::new(y[0], y[1], y[2]), nf, lambda);
            [d.w, d.x, d.y]
        },
        y_from,
        [start.w, start.x, start.y],
        y_to,
        Rk45Options::with_tol(tol),
        |y, st| {
            if st.iter().any(|v| v.abs() > ESCAPE_CAP) {
                stop = Stop::Escape(y);
                return Guard::Stop;
            }
            if st[2] <= 0.0 {
                stop = Stop::YSign(y);
                return Guard::Stop;
            }
            if let Some(b) = box_guard {
                if !b.contains(&TrajectoryState::new(st[0], st[1], st[2])) {
                    stop = Stop::BoxExit(y);
                    return Guard::Stop;
                }
            }
            Guard::Continue
        },
    )?;
    match stop {
        Stop::Escape(y) => Err(Error::TrajectoryEscape {
            exit_y: y,
            detail: format!("component exceeded cap {ESCAPE_CAP:e}"),
        }),
        Stop::YSign(y) => {
            Err(Error::InvalidTrajectory(format!("Y reached zero at y = {y}")))
        }
        Stop::BoxExit(y) => {
            let states = run
                .ys
                .iter()
                .map(|v| TrajectoryState::new(v[0], v[1], v[2]))
                .collect();
            Ok((run.ts, states, Some(y)))
        }
        Stop::None => {
            let states = run
                .ys
                .iter()
                .map(|v| TrajectoryState::new(v[0], v[1], v[2]))
                .collect();
            Ok((run.ts, states, None))
        }
    }
}

/// Integrate the phase-space system over `[y_min, y_max]` starting from the
/// configured point at y = 0. The general case stops early when the default
/// phase box is left (its exit is recorded, implicitly defining delta); both
/// cases abort on blow-up or a Y sign change.
pub fn integrate_trajectory(
    params: &SolitonParams,
    y_min: f64,
    y_max: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    if y_min > 0.0 || y_max < 0.0 || y_min >= y_max {
        return Err(Error::InvalidInput("need y_min <= 0 <= y_max, y_min < y_max".into()));
    }
    let start = TrajectoryState::new(params.w0, params.x0v, params.y0);
    // Exact equilibria yield constant trajectories.
    let rhs0 = ode_rhs(&start, params.n, params.lambda)?;
    if rhs0.norm() == 0.0 {
        let ys: Vec<f64> = (0..=16).map(|i| y_min + (y_max - y_min) * i as f64 / 16.0).collect();
        let states = vec![start; ys.len()];
        let traj = Trajectory { ys, states, params: *params, exit_y: None };
        traj.validate()?;
        return Ok(traj);
    }
    params.validate()?;

    let box_guard = match params.case {
        SolitonCase::General => Some(PhaseBox::default()),
        SolitonCase::HalfComplete => None,
    };
    let mut ys = Vec::new();
    let mut states = Vec::new();
    if y_min < 0.0 {
        let (ts, sts, _) = run_segment(params, start, 0.0, y_min, tol, None)?;
        // Backward samples arrive in decreasing y.
        for (t, s) in ts.iter().rev().zip(sts.iter().rev()) {
            ys.push(*t);
            states.push(*s);
        }
    } else {
        ys.push(0.0);
        states.push(start);
    }
    let mut exit_y = None;
    if y_max > 0.0 {
        let (ts, sts, exit) = run_segment(params, start, 0.0, y_max, tol, box_guard)?;
        exit_y = exit;
        for (t, s) in ts.iter().zip(sts.iter()).skip(1) {
            ys.push(*t);
            states.push(*s);
        }
    }
    let traj = Trajectory { ys, states, params: *params, exit_y };
    traj.validate()?;
    Ok(traj)
}

/// Steady-case trajectory sampled on a uniform y-grid (for finite-difference
/// refinement studies).
pub fn sample_steady_uniform(
    params: &SolitonParams,
    y_end: f64,
    h: f64,
    tol: f64,
) -> Result<Trajectory> {
    if params.lambda != 0.0 {
        return Err(Error::InvalidInput("uniform steady sampling requires lambda = 0".into()));
    }
    if !(h > 0.0) || !(y_end > 0.0) {
        return Err(Error::InvalidInput("need positive h and y_end".into()));
    }
    let n_steps = (y_end / h).round() as usize;
    let outputs: Vec<f64> = (0..=n_steps).map(|i| i as f64 * h).collect();
    let nf = params.n as f64;
    let samples = integrate_at(
        |_, y: &[f64; 3]| {
            let d = ode_rhs_raw(&TrajectoryState::new(y[0], y[1], y[2]), nf, 0.0);
            [d.w, d.x, d.y]
        },
        [params.w0, params.x0v, params.y0],
        &outputs,
        Rk45Options::with_tol(tol),
    )?;
    let states: Vec<TrajectoryState> =
        samples.iter().map(|v| TrajectoryState::new(v[0], v[1], v[2])).collect();
    let traj = Trajectory { ys: outputs, states, params: *params, exit_y: None };
    traj.validate()?;
    Ok(traj)
}

/// Residual statistics of the Lyapunov identity for L = X^2 + Y^2 along a
/// steady trajectory. Differentiating L through the reduced system gives
/// L' = 2 X^2 (L - 1); the sign conclusion (L non-increasing inside the unit
/// disk) is the same either way.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovReport {
    /// max over interior samples of |dL/dy (finite difference) - 2X^2(L-1)|.
    pub max_residual: f64,
    /// Whether L was non-increasing; only meaningful when it started < 1.
    pub monotone_nonincreasing: Option<bool>,
    pub l_start: f64,
    pub l_end: f64,
}

pub fn lyapunov_check(traj: &Trajectory) -> Result<LyapunovReport> {
    if traj.params.lambda != 0.0 {
        return Err(Error::InvalidInput("Lyapunov identity requires steady dynamics".into()));
    }
    if traj.ys.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 samples".into()));
    }
    let l: Vec<f64> = traj.states.iter().map(|s| s.x * s.x + s.y * s.y).collect();
    let dl = deriv_nonuniform(&traj.ys, &l);
    let mut max_residual = 0.0f64;
    for i in 1..l.len() - 1 {
        let x2 = traj.states[i].x * traj.states[i].x;
        max_residual = max_residual.max((dl[i] - 2.0 * x2 * (l[i] - 1.0)).abs());
    }
    let monotone = if l[0] < 1.0 {
        Some(l.windows(2).all(|w| w[1] <= w[0] + 1e-12))
    } else {
        None
    };
    Ok(LyapunovReport {
        max_residual,
        monotone_nonincreasing: monotone,
        l_start: l[0],
        l_end: *l.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::fit::linear_fit;
    use approx::assert_relative_eq;

    #[test]
    fn equilibrium_start_stays_constant() {
        let params = SolitonParams {
            n: 4,
            lambda: -1.0,
            w0: 0.0,
            x0v: 1.0,
            y0: 0.0,
            eps_init: 0.0,
            case: SolitonCase::General,
        };
        let traj = integrate_trajectory(&params, -2.0, 2.0, 1e-10).unwrap();
        assert!(traj.states.iter().all(|s| s.w == 0.0 && s.x == 1.0 && s.y == 0.0));
    }

    #[test]
    fn backward_decay_rates_match_source_eigenvalues() {
        let params = SolitonParams {
            n: 4,
            lambda: 0.0,
            w0: 1e-4,
            x0v: 1.0 + 1e-4,
            y0: 1e-4,
            eps_init: 1e-4,
            case: SolitonCase::HalfComplete,
        };
        let traj = integrate_trajectory(&params, -8.0, 0.0, 1e-12).unwrap();
        let ys = &traj.ys;
        let lw: Vec<f64> = traj.states.iter().map(|s| s.w.ln()).collect();
        let ly: Vec<f64> = traj.states.iter().map(|s| s.y.ln()).collect();
        let (_, rate_w) = linear_fit(ys, &lw);
        let (_, rate_y) = linear_fit(ys, &ly);
        assert_relative_eq!(rate_w, 1.0, epsilon = 1e-3);
        assert_relative_eq!(rate_y, 0.5, epsilon = 1e-3);
        // X - 1 picks up a second-order e^y component sourced by Y^2, which
        // pollutes the deep end of the window; fit its rate where the
        // homogeneous e^(2y) mode dominates.
        let idx: Vec<usize> = (0..ys.len()).filter(|&i| ys[i] >= -3.0).collect();
        let yx: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
        let lx: Vec<f64> = idx.iter().map(|&i| (traj.states[i].x - 1.0).ln()).collect();
        let (_, rate_x) = linear_fit(&yx, &lx);
        assert_relative_eq!(rate_x, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn half_complete_trajectory_approaches_origin() {
        let params = SolitonParams::on_explicit_curve(1.0, 1e-3);
        let traj = integrate_trajectory(&params, 0.0, 200.0, 1e-10).unwrap();
        // Center-manifold approach is algebraic: L ~ n/(2y) = 2/y for n = 4.
        let last = traj.states.last().unwrap();
        let l = last.x * last.x + last.y * last.y;
        assert!(l < 0.02, "expected approach to the origin, L = {l}");
        assert_relative_eq!(l, 2.0 / 200.0, max_relative = 0.25);
        assert!(traj.states.iter().all(|s| s.y > 0.0));
    }

    #[test]
    fn general_case_records_box_exit() {
        // Shrinking soliton: W' = W(X^2 + |lambda| W^2) forces W through the
        // box wall in finite y.
        let params = SolitonParams::near_source(4, -1.0, 1e-2, SolitonCase::General);
        let traj = integrate_trajectory(&params, 0.0, 60.0, 1e-10).unwrap();
        assert!(traj.exit_y.is_some(), "expected a phase-box exit");
        assert!(traj.states.iter().all(|s| s.y > 0.0));
    }

    #[test]
    fn blowup_cap_reports_escape() {
        // The reflected trajectory on Y < 0 is rejected before any escape.
        let bad = SolitonParams {
            n: 4,
            lambda: 0.0,
            w0: 0.1,
            x0v: 1.5,
            y0: -0.1,
            eps_init: 0.5,
            case: SolitonCase::HalfComplete,
        };
        assert!(matches!(
            integrate_trajectory(&bad, 0.0, 50.0, 1e-8),
            Err(Error::InvalidInput(_))
        ));
        // X(0) > 1 outside the disk: X blows up forward in y.
        let escaping = SolitonParams {
            n: 4,
            lambda: 0.0,
            w0: 0.1,
            x0v: 1.5,
            y0: 0.1,
            eps_init: 0.5,
            case: SolitonCase::HalfComplete,
        };
        assert!(matches!(
            integrate_trajectory(&escaping, 0.0, 50.0, 1e-8),
            Err(Error::TrajectoryEscape { .. })
        ));
    }

    #[test]
    fn lyapunov_constant_trajectory_is_exact() {
        let params = SolitonParams {
            n: 4,
            lambda: 0.0,
            w0: 0.0,
            x0v: 1.0,
            y0: 0.0,
            eps_init: 0.0,
            case: SolitonCase::HalfComplete,
        };
        let traj = integrate_trajectory(&params, -1.0, 1.0, 1e-10).unwrap();
        let rep = lyapunov_check(&traj).unwrap();
        assert_eq!(rep.max_residual, 0.0);
        assert_eq!(rep.l_start, 1.0);
    }

    #[test]
    fn lyapunov_identity_residual_shrinks_at_second_order() {
        let params = SolitonParams::on_explicit_curve(1.0, 1e-2);
        let coarse = sample_steady_uniform(&params, 12.0, 0.04, 1e-12).unwrap();
        let fine = sample_steady_uniform(&params, 12.0, 0.02, 1e-12).unwrap();
        let rc = lyapunov_check(&coarse).unwrap();
        let rf = lyapunov_check(&fine).unwrap();
        let ratio = rc.max_residual / rf.max_residual;
        assert!((ratio - 4.0).abs() <= 0.8, "halving ratio {ratio}");
        assert_eq!(rc.monotone_nonincreasing, Some(true));
    }

    #[test]
    fn lyapunov_needs_three_samples() {
        let params = SolitonParams::on_explicit_curve(1.0, 1e-2);
        let traj = Trajectory {
            ys: vec![0.0, 1.0],
            states: vec![
                TrajectoryState::new(0.1, 0.9, 0.1),
                TrajectoryState::new(0.1, 0.9, 0.1),
            ],
            params,
            exit_y: None,
        };
        assert!(matches!(lyapunov_check(&traj), Err(Error::InsufficientData(_))));
    }
}
