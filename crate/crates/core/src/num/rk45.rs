//! Embedded Dormand–Prince 5(4) integrator with adaptive step control.
//!
//! Coefficients from Dormand & Prince (1980). The driver supports forward and
//! backward integration, per-step inspection callbacks (used for blow-up caps,
//! sign guards and phase-box exits) and integration to prescribed output
//! points.

use crate::error::{Error, Result};

/// Step-size and tolerance settings.
#[derive(Debug, Clone, Copy)]
pub struct Rk45Options {
    pub rtol: f64,
    pub atol: f64,
    /// Magnitude cap on the step size (0 = unrestricted).
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Rk45Options {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_max: 0.0, max_steps: 1_000_000 }
    }
}

impl Rk45Options {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol * 1e-2, ..Self::default() }
    }
}

/// Verdict returned by the per-step guard callback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    Continue,
    /// Accept the current sample, then stop.
    Stop,
}

/// Accepted samples of an adaptive run.
#[derive(Debug, Clone)]
pub struct AdaptiveRun<const N: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    /// Set when the guard requested an early stop.
    pub stopped_early: bool,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 4th-order weights (with the FSAL 7th stage).
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (k, c) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// One Dormand–Prince step; returns (y5, scaled error norm).
fn dp_step<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    h: f64,
    k1: &[f64; N],
    opts: &Rk45Options,
) -> ([f64; N], [f64; N], f64) {
    let k2 = f(t + C2 * h, &axpy(y, h, &[(k1, A21)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(k1, A31), (&k2, A32)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(k1, A41), (&k2, A42), (&k3, A43)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]));
    let k6 = f(
        t + h,
        &axpy(y, h, &[(k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]),
    );
    let y5 = axpy(y, h, &[(k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)]);
    let k7 = f(t + h, &y5);
    let mut err = 0.0f64;
    for i in 0..N {
        let y4_i = y[i]
            + h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
        let e = (y5[i] - y4_i) / sc;
        err += e * e;
    }
    (y5, k7, (err / N as f64).sqrt())
}

/// Integrate from `t0` to `t1` (either direction), recording every accepted
/// step. The guard sees each accepted sample and may stop the run.
pub fn integrate_adaptive<const N: usize, F, G>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: Rk45Options,
    mut guard: G,
) -> Result<AdaptiveRun<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]) -> Guard,
{
    if !y0.iter().all(|v| v.is_finite()) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInput("non-finite integration data".into()));
    }
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut ts = vec![t0];
    let mut ys = vec![y0];
    if span == 0.0 {
        return Ok(AdaptiveRun { ts, ys, stopped_early: false });
    }
    let mut h = dir * (span / 100.0).min(if opts.h_max > 0.0 { opts.h_max } else { f64::INFINITY });
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut stopped_early = false;
    for _ in 0..opts.max_steps {
        if (t - t1) * dir >= 0.0 {
            return Ok(AdaptiveRun { ts, ys, stopped_early });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let (y_new, k7, err) = dp_step(&mut f, t, &y, h, &k1, &opts);
        if err <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
            t += h;
            y = y_new;
            k1 = k7;
            ts.push(t);
            ys.push(y);
            if guard(t, &y) == Guard::Stop {
                stopped_early = true;
                return Ok(AdaptiveRun { ts, ys, stopped_early });
            }
        } else if !y_new.iter().all(|v| v.is_finite()) {
            h *= 0.25;
            if h.abs() < 1e-300 {
                return Err(Error::NumericalBlowup(format!("step underflow at t = {t}")));
            }
            continue;
        }
        let fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= fac.clamp(0.2, 5.0);
        if opts.h_max > 0.0 {
            h = h.clamp(-opts.h_max, opts.h_max);
        }
        if h.abs() < 1e-300 {
            return Err(Error::NumericalBlowup(format!("step underflow at t = {t}")));
        }
    }
    Err(Error::NumericalBlowup(format!(
        "max step count {} exceeded at t = {t}",
        opts.max_steps
    )))
}

/// Integrate and sample the solution exactly at the given output points.
/// `outputs` must be monotone starting at the initial time.
pub fn integrate_at<const N: usize, F>(
    mut f: F,
    y0: [f64; N],
    outputs: &[f64],
    opts: Rk45Options,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if outputs.is_empty() {
        return Ok(Vec::new());
    }
    let mut result = Vec::with_capacity(outputs.len());
    result.push(y0);
    let mut y = y0;
    for w in outputs.windows(2) {
        let run = integrate_adaptive(&mut f, w[0], y, w[1], opts, |_, _| Guard::Continue)?;
        y = *run.ys.last().expect("nonempty run");
        result.push(y);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let run = integrate_adaptive(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            5.0,
            Rk45Options::with_tol(1e-12),
            |_, _| Guard::Continue,
        )
        .unwrap();
        let y_end = run.ys.last().unwrap()[0];
        assert_relative_eq!(y_end, (-5.0f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn harmonic_oscillator_energy_preserved_backward() {
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let run = integrate_adaptive(f, 0.0, [1.0, 0.0], -7.0, Rk45Options::with_tol(1e-11), |_, _| {
            Guard::Continue
        })
        .unwrap();
        let last = run.ys.last().unwrap();
        let e = last[0] * last[0] + last[1] * last[1];
        assert_relative_eq!(e, 1.0, max_relative = 1e-9);
        assert_relative_eq!(last[0], (-7.0f64).cos(), max_relative = 1e-8);
    }

    #[test]
    fn guard_stops_run() {
        let run = integrate_adaptive(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            20.0,
            Rk45Options::default(),
            |_, y| if y[0] > 100.0 { Guard::Stop } else { Guard::Continue },
        )
        .unwrap();
        assert!(run.stopped_early);
        assert!(run.ys.last().unwrap()[0] > 100.0);
        assert!(*run.ts.last().unwrap() < 10.0);
    }

    #[test]
    fn integrate_at_hits_output_points() {
        let outs = [0.0, 0.5, 1.0, 1.5];
        let samples =
            integrate_at(|_, y: &[f64; 1]| [-2.0 * y[0]], [3.0], &outs, Rk45Options::with_tol(1e-12))
                .unwrap();
        for (t, s) in outs.iter().zip(&samples) {
            assert_relative_eq!(s[0], 3.0 * (-2.0 * t).exp(), max_relative = 1e-10);
        }
    }
}
