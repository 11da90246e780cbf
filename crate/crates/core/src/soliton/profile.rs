//! Metric reconstruction from phase trajectories and the quantitative checks
//! on the reconstructed profile.

use super::{CurvatureSample, SolitonParams, SolitonProfile, Trajectory};
use crate::error::{Error, Result};
use crate::num::fit::{linear_fit, power_law_fit};
use crate::num::quad::cumtrapz;
use serde::Serialize;

/// Least-squares fit of `ln v = ln c + rate * y` with the rate prescribed.
fn fit_amplitude(ys: &[f64], vs: &[f64], rate: f64) -> f64 {
    let m = ys
        .iter()
        .zip(vs)
        .map(|(y, v)| v.ln() - rate * y)
        .sum::<f64>()
        / ys.len() as f64;
    m.exp()
}

/// Rebuild the metric profile (psi, omega and derivatives against x) from a
/// phase trajectory. x is obtained by quadrature of W with the analytic tail
/// `C1 e^y` closing the integral below the stored range; second derivatives
/// come from the soliton system algebraically rather than from differencing.
pub fn reconstruct_profile(traj: &Trajectory) -> Result<SolitonProfile> {
    traj.validate()?;
    if traj.ys.len() < 8 {
        return Err(Error::InsufficientData("trajectory too short to reconstruct".into()));
    }
    if traj.states.iter().any(|s| s.w <= 0.0 || s.y <= 0.0) {
        return Err(Error::DegenerateTrajectory("need W > 0 and Y > 0 throughout".into()));
    }
    let p = &traj.params;
    let nf = p.n as f64;
    let sq = p.sqrt_n();

    // Tail amplitudes over the earliest decade of samples.
    let y_min = traj.ys[0];
    let fit_hi = y_min + std::f64::consts::LN_10;
    let mut tail_y = Vec::new();
    let mut tail_w = Vec::new();
    let mut tail_yy = Vec::new();
    for (y, s) in traj.ys.iter().zip(&traj.states) {
        if *y <= fit_hi {
            tail_y.push(*y);
            tail_w.push(s.w);
            tail_yy.push(s.y);
        }
    }
    if tail_y.len() < 3 {
        tail_y = traj.ys[..3].to_vec();
        tail_w = traj.states[..3].iter().map(|s| s.w).collect();
        tail_yy = traj.states[..3].iter().map(|s| s.y).collect();
    }
    let c1 = fit_amplitude(&tail_y, &tail_w, 1.0);
    let c2 = fit_amplitude(&tail_y, &tail_yy, 1.0 - 1.0 / sq);

    let ws: Vec<f64> = traj.states.iter().map(|s| s.w).collect();
    let xs_raw = cumtrapz(&traj.ys, &ws, c1 * y_min.exp());

    let mut xs = Vec::with_capacity(xs_raw.len());
    let mut psi = Vec::with_capacity(xs_raw.len());
    let mut psi1 = Vec::with_capacity(xs_raw.len());
    let mut psi2 = Vec::with_capacity(xs_raw.len());
    let mut omega = Vec::with_capacity(xs_raw.len());
    let mut omega1 = Vec::with_capacity(xs_raw.len());
    let mut last_x = 0.0;
    for (i, st) in traj.states.iter().enumerate() {
        let x = xs_raw[i];
        if x <= last_x {
            continue; // drop samples collapsed by quadrature round-off
        }
        last_x = x;
        let ps = (nf * (nf - 1.0)).sqrt() * st.w / st.y;
        let ratio = st.x / (sq * st.w); // psi'/psi
        let om = (sq * st.x - 1.0) / st.w;
        let pdd_over_p = p.lambda + (nf - 1.0) * (1.0 - (ps * ratio) * (ps * ratio)) / (ps * ps)
            + ratio * om;
        xs.push(x);
        psi.push(ps);
        psi1.push(ps * ratio);
        psi2.push(ps * pdd_over_p);
        omega.push(om);
        omega1.push(nf * pdd_over_p - p.lambda);
    }

    let mut profile = SolitonProfile {
        xs,
        psi,
        psi1,
        psi2,
        omega,
        omega1,
        params: *p,
        a_fit: None,
        c1_fit: Some(c1),
        c2_fit: Some(c2),
        mu_fit: None,
        explicit_a: None,
    };
    profile.validate()?;
    if let Ok(report) = fit_asymptotics(&profile) {
        profile.a_fit = Some(report.a_fit);
        profile.mu_fit = report.mu_fit;
    }
    Ok(profile)
}

/// Closed-form n = 4 steady profile psi = a sqrt(x), omega = 1/x - 6/a^2 with
/// analytic derivative tables.
pub fn explicit_profile_n4(a: f64, xs: &[f64]) -> Result<SolitonProfile> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput("scale a must be positive".into()));
    }
    if xs.is_empty() || xs[0] <= 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("x grid must be strictly increasing, > 0".into()));
    }
    let profile = SolitonProfile {
        xs: xs.to_vec(),
        psi: xs.iter().map(|x| a * x.sqrt()).collect(),
        psi1: xs.iter().map(|x| 0.5 * a / x.sqrt()).collect(),
        psi2: xs.iter().map(|x| -0.25 * a * x.powf(-1.5)).collect(),
        omega: xs.iter().map(|x| 1.0 / x - 6.0 / (a * a)).collect(),
        omega1: xs.iter().map(|x| -1.0 / (x * x)).collect(),
        params: SolitonParams::on_explicit_curve(a, 1e-4),
        a_fit: Some(a),
        c1_fit: None,
        c2_fit: None,
        mu_fit: None,
        explicit_a: Some(a),
    };
    profile.validate()?;
    Ok(profile)
}

/// Fitted small-x exponents and amplitudes over the smallest resolved decade.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub n: u32,
    /// Fitted amplitude of psi = a x^slope.
    pub a_fit: f64,
    pub slope_psi: f64,
    pub slope_omega: f64,
    pub slope_psi2_over_psi: f64,
    pub slope_omega1: f64,
    /// Mean of x * omega over the window (target sqrt(n) - 1).
    pub val_x_omega: f64,
    /// Mean of x^2 psi''/psi (target -(sqrt(n)-1)/n).
    pub val_x2_psi2_over_psi: f64,
    /// Mean of x^2 omega' (target -(sqrt(n)-1)).
    pub val_x2_omega1: f64,
    /// Empirical remainder exponent of x*omega - (sqrt(n)-1).
    pub mu_fit: Option<f64>,
    /// a from the trajectory amplitudes sqrt(n(n-1)) C1^(1-1/sqrt(n)) / C2.
    pub a_from_amplitudes: Option<f64>,
    /// (name, fitted, target) rows for the slope table.
    pub slope_table: Vec<(String, f64, f64)>,
}

pub fn fit_asymptotics(profile: &SolitonProfile) -> Result<AsymptoticsReport> {
    profile.validate()?;
    let x_min = profile.xs[0];
    if x_min * 100.0 > 0.1 {
        return Err(Error::InsufficientData(format!(
            "tail must reach two decades below 1e-1; smallest x is {x_min:e}"
        )));
    }
    let hi = 10.0 * x_min;
    let idx: Vec<usize> =
        (0..profile.xs.len()).filter(|&i| profile.xs[i] <= hi).collect();
    if idx.len() < 8 {
        return Err(Error::InsufficientData("fewer than 8 samples in the smallest decade".into()));
    }
    let take = |col: &[f64]| -> Vec<f64> { idx.iter().map(|&i| col[i]).collect() };
    let xs = take(&profile.xs);
    let psi = take(&profile.psi);
    let omega = take(&profile.omega);
    let pdd: Vec<f64> =
        idx.iter().map(|&i| profile.psi2[i] / profile.psi[i]).collect();
    let om1 = take(&profile.omega1);

    let nf = profile.params.n as f64;
    let sq = profile.params.sqrt_n();
    let (a_fit, slope_psi) = power_law_fit(&xs, &psi);
    let (_, slope_omega) = power_law_fit(&xs, &omega.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let (_, slope_pdd) = power_law_fit(&xs, &pdd.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let (_, slope_om1) = power_law_fit(&xs, &om1.iter().map(|v| v.abs()).collect::<Vec<_>>());

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let val_x_omega = mean(&xs.iter().zip(&omega).map(|(x, o)| x * o).collect::<Vec<_>>());
    let val_x2_pdd = mean(&xs.iter().zip(&pdd).map(|(x, p)| x * x * p).collect::<Vec<_>>());
    let val_x2_om1 = mean(&xs.iter().zip(&om1).map(|(x, o)| x * x * o).collect::<Vec<_>>());

    let target = sq - 1.0;
    let rem: Vec<(f64, f64)> = xs
        .iter()
        .zip(&omega)
        .map(|(x, o)| (*x, (x * o - target).abs()))
        .filter(|(_, r)| *r > 1e-13 * target.max(1.0))
        .collect();
    let mu_fit = if rem.len() >= 4 {
        let lx: Vec<f64> = rem.iter().map(|(x, _)| x.ln()).collect();
        let lr: Vec<f64> = rem.iter().map(|(_, r)| r.ln()).collect();
        Some(linear_fit(&lx, &lr).1)
    } else {
        None
    };
    let a_from_amplitudes = match (profile.c1_fit, profile.c2_fit) {
        (Some(c1), Some(c2)) => Some((nf * (nf - 1.0)).sqrt() * c1.powf(1.0 - 1.0 / sq) / c2),
        _ => None,
    };
    let slope_table = vec![
        ("psi".to_string(), slope_psi, 1.0 / sq),
        ("omega".to_string(), slope_omega, -1.0),
        ("psi2_over_psi".to_string(), slope_pdd, -2.0),
        ("omega1".to_string(), slope_om1, -2.0),
    ];
    Ok(AsymptoticsReport {
        n: profile.params.n,
        a_fit,
        slope_psi,
        slope_omega,
        slope_psi2_over_psi: slope_pdd,
        slope_omega1: slope_om1,
        val_x_omega,
        val_x2_psi2_over_psi: val_x2_pdd,
        val_x2_omega1: val_x2_om1,
        mu_fit,
        a_from_amplitudes,
        slope_table,
    })
}

/// Sup-norm residuals of the two soliton equations over the stored tables:
///
/// ```text
/// n psi'' - psi omega'               = lambda psi
/// psi psi'' + (n-1) psi'^2 - (n-1) - psi psi' omega = lambda psi^2
/// ```
pub fn soliton_residual(profile: &SolitonProfile) -> Result<(f64, f64)> {
    profile.validate()?;
    let nf = profile.params.n as f64;
    let lambda = profile.params.lambda;
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    for i in 0..profile.len() {
        let (ps, p1, p2) = (profile.psi[i], profile.psi1[i], profile.psi2[i]);
        let (om, om1) = (profile.omega[i], profile.omega1[i]);
        r1 = r1.max((nf * p2 - ps * om1 - lambda * ps).abs());
        r2 = r2
            .max((ps * p2 + (nf - 1.0) * p1 * p1 - (nf - 1.0) - ps * p1 * om - lambda * ps * ps).abs());
    }
    Ok((r1, r2))
}

/// Ricci tensor components and scalar curvature at a grid point.
pub fn curvature(profile: &SolitonProfile, index: usize) -> Result<CurvatureSample> {
    if index >= profile.len() {
        return Err(Error::OutOfRange { index, len: profile.len() });
    }
    let nf = profile.params.n as f64;
    let (ps, p1, p2) = (profile.psi[index], profile.psi1[index], profile.psi2[index]);
    let ric_radial = -nf * p2 / ps;
    let ric_sphere = nf - 1.0 - ps * p2 - (nf - 1.0) * p1 * p1;
    Ok(CurvatureSample { ric_radial, ric_sphere, scalar: ric_radial + nf * ric_sphere / (ps * ps) })
}

/// Spread statistics of one conserved quantity across the grid.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityStats {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub drift_abs: f64,
    pub drift_rel: f64,
}

fn stats(values: &[f64], scale: f64) -> IdentityStats {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min = sorted[0];
    let max = *sorted.last().unwrap();
    let median = sorted[sorted.len() / 2];
    IdentityStats { min, max, median, drift_abs: max - min, drift_rel: (max - min) / scale }
}

/// Grid-wise evaluation of the two soliton identities
/// `R + lap(phi) + (n+1) lambda = 0` and `R + omega^2 + 2 lambda phi = C0`.
#[derive(Debug, Clone, Serialize)]
pub struct GradientIdentityReport {
    pub traced: IdentityStats,
    pub hamilton: IdentityStats,
    pub c0: f64,
    pub c0_positive: bool,
}

/// The potential is fixed by phi = 0 at the grid midpoint; only its gradient
/// is geometric, but the second identity needs a convention when lambda != 0.
pub fn gradient_identities(profile: &SolitonProfile) -> Result<GradientIdentityReport> {
    profile.validate()?;
    if profile.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 grid points".into()));
    }
    let nf = profile.params.n as f64;
    let lambda = profile.params.lambda;
    let mut phi = cumtrapz(&profile.xs, &profile.omega, 0.0);
    let mid = phi[profile.len() / 2];
    for v in &mut phi {
        *v -= mid;
    }
    let mut traced = Vec::with_capacity(profile.len());
    let mut hamilton = Vec::with_capacity(profile.len());
    let mut scale = 0.0f64;
    for i in 0..profile.len() {
        let r = curvature(profile, i)?.scalar;
        let lap_phi = profile.omega1[i] + nf * profile.psi1[i] * profile.omega[i] / profile.psi[i];
        traced.push(r + lap_phi + (nf + 1.0) * lambda);
        hamilton.push(r + profile.omega[i] * profile.omega[i] + 2.0 * lambda * phi[i]);
        scale = scale.max(r.abs()).max(lap_phi.abs());
    }
    let hstats = stats(&hamilton, 1.0);
    let c0 = hstats.median;
    let hamilton_stats = IdentityStats {
        drift_rel: hstats.drift_abs / c0.abs().max(f64::MIN_POSITIVE),
        ..hstats
    };
    Ok(GradientIdentityReport {
        traced: stats(&traced, scale.max(1.0)),
        hamilton: hamilton_stats,
        c0,
        c0_positive: c0 > 0.0,
    })
}

/// Unique zero of omega on a half-complete profile, located on the cubic
/// Hermite interpolant (omega and omega' are both tabulated) by bisection to
/// 1e-10 relative tolerance. The sign pattern omega > 0 before, < 0 after is
/// verified over the whole grid.
pub fn find_x_crit(profile: &SolitonProfile) -> Result<f64> {
    profile.validate()?;
    let om = &profile.omega;
    let mut brackets = Vec::new();
    for i in 0..om.len() - 1 {
        if om[i] == 0.0 || om[i] * om[i + 1] < 0.0 {
            brackets.push(i);
        }
    }
    if *om.last().unwrap() == 0.0 {
        brackets.push(om.len() - 1);
    }
    if brackets.is_empty() {
        return Err(Error::NoCriticalPoint("omega does not change sign on the grid".into()));
    }
    if brackets.len() > 1 {
        return Err(Error::DataInconsistency(format!(
            "omega changes sign {} times; expected a single critical slice",
            brackets.len()
        )));
    }
    let i = brackets[0];
    if om[..=i].iter().any(|v| *v < 0.0) || om[i + 1..].iter().any(|v| *v > 0.0) {
        return Err(Error::DataInconsistency("omega sign pattern is not (+ .. -)".into()));
    }
    let (xl, xr) = (profile.xs[i], profile.xs[i + 1]);
    let h = xr - xl;
    let hermite = |x: f64| -> f64 {
        let t = (x - xl) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        om[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * profile.omega1[i] * (t3 - 2.0 * t2 + t)
            + om[i + 1] * (-2.0 * t3 + 3.0 * t2)
            + h * profile.omega1[i + 1] * (t3 - t2)
    };
    let (mut lo, mut hi) = (xl, xr);
    // Guard against an interpolant wiggle flipping the bracket endpoints.
    let (flo, fhi) = (hermite(lo), hermite(hi));
    if flo < 0.0 || fhi > 0.0 {
        return Err(Error::DataInconsistency("interpolant lost the bracket".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hermite(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-10 * hi.abs() {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// CSV with mandatory header row: y, W, X, Y.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("y,W,X,Y\n");
    for (y, s) in traj.ys.iter().zip(&traj.states) {
        out.push_str(&format!("{},{},{},{}\n", y, s.w, s.x, s.y));
    }
    out
}

/// CSV with mandatory header row: x, psi, psi1, psi2, omega, omega1.
pub fn profile_to_csv(profile: &SolitonProfile) -> String {
    let mut out = String::from("x,psi,psi1,psi2,omega,omega1\n");
    for i in 0..profile.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            profile.xs[i],
            profile.psi[i],
            profile.psi1[i],
            profile.psi2[i],
            profile.omega[i],
            profile.omega1[i]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soliton::integrate::integrate_trajectory;
    use approx::assert_relative_eq;

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    fn standard_trajectory(n: u32) -> Trajectory {
        let params = SolitonParams::half_complete(n, 1e-4, 1.0);
        integrate_trajectory(&params, -2.0, 30.0, 1e-12).unwrap()
    }

    #[test]
    fn explicit_profile_solves_system_to_roundoff() {
        let profile = explicit_profile_n4(1.3, &log_grid(1e-3, 10.0, 4000)).unwrap();
        let (r1, r2) = soliton_residual(&profile).unwrap();
        assert!(r1 < 1e-9, "r1 = {r1:e}");
        assert!(r2 < 1e-9, "r2 = {r2:e}");
    }

    #[test]
    fn flat_template_is_steady_soliton() {
        let xs = log_grid(0.1, 5.0, 50);
        let profile = SolitonProfile {
            psi: xs.clone(),
            psi1: vec![1.0; xs.len()],
            psi2: vec![0.0; xs.len()],
            omega: vec![0.0; xs.len()],
            omega1: vec![0.0; xs.len()],
            xs,
            params: SolitonParams::on_explicit_curve(1.0, 1e-4),
            a_fit: None,
            c1_fit: None,
            c2_fit: None,
            mu_fit: None,
            explicit_a: None,
        };
        let (r1, r2) = soliton_residual(&profile).unwrap();
        assert_eq!((r1, r2), (0.0, 0.0));
        let c = curvature(&profile, 10).unwrap();
        assert_eq!((c.ric_radial, c.ric_sphere, c.scalar), (0.0, 0.0, 0.0));
        let rep = gradient_identities(&profile).unwrap();
        assert_eq!(rep.c0, 0.0);
        assert!(rep.traced.max.abs() < 1e-15);
    }

    #[test]
    fn round_sphere_curvature() {
        // psi = sin x on S^5 (n = 4): Ric = n g, R = n(n+1) = 20.
        let xs: Vec<f64> = (1..100).map(|i| i as f64 * 0.03).collect();
        let profile = SolitonProfile {
            psi: xs.iter().map(|x| x.sin()).collect(),
            psi1: xs.iter().map(|x| x.cos()).collect(),
            psi2: xs.iter().map(|x| -x.sin()).collect(),
            omega: vec![0.0; xs.len()],
            omega1: vec![0.0; xs.len()],
            xs: xs.clone(),
            params: SolitonParams::on_explicit_curve(1.0, 1e-4),
            a_fit: None,
            c1_fit: None,
            c2_fit: None,
            mu_fit: None,
            explicit_a: None,
        };
        for i in [0usize, 20, 70] {
            let c = curvature(&profile, i).unwrap();
            assert_relative_eq!(c.ric_radial, 4.0, epsilon = 1e-12);
            assert_relative_eq!(c.ric_sphere, 4.0 * xs[i].sin() * xs[i].sin(), epsilon = 1e-12);
            assert_relative_eq!(c.scalar, 20.0, epsilon = 1e-10);
        }
        assert!(matches!(
            curvature(&profile, 1000),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn exact_power_law_template_fit() {
        let xs = log_grid(1e-4, 0.5, 400);
        let profile = explicit_profile_n4(2.0, &xs).unwrap();
        let rep = fit_asymptotics(&profile).unwrap();
        assert_relative_eq!(rep.a_fit, 2.0, epsilon = 1e-10);
        assert_relative_eq!(rep.slope_psi, 0.5, epsilon = 1e-10);
        // omega = 1/x - 3/2: remainder of x*omega is exactly linear in x.
        assert_relative_eq!(rep.val_x_omega, 1.0, epsilon = 1e-2);
        let mu = rep.mu_fit.unwrap();
        assert_relative_eq!(mu, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn reconstructed_n4_profile_matches_singular_asymptotics() {
        let profile = reconstruct_profile(&standard_trajectory(4)).unwrap();
        let rep = fit_asymptotics(&profile).unwrap();
        assert!((rep.slope_psi - 0.5).abs() < 0.01, "psi slope {}", rep.slope_psi);
        assert!((rep.val_x_omega - 1.0).abs() < 0.01, "x omega {}", rep.val_x_omega);
        assert!(
            (rep.val_x2_psi2_over_psi + 0.25).abs() < 0.02,
            "x^2 psi''/psi {}",
            rep.val_x2_psi2_over_psi
        );
        assert!((rep.val_x2_omega1 + 1.0).abs() < 0.05, "x^2 omega' {}", rep.val_x2_omega1);
        // Amplitude consistency a = sqrt(n(n-1)) C1^(1-1/sqrt n) / C2.
        let a_amp = rep.a_from_amplitudes.unwrap();
        assert_relative_eq!(rep.a_fit, a_amp, max_relative = 1e-2);
    }

    #[test]
    fn reconstructed_residuals_are_tiny() {
        let profile = reconstruct_profile(&standard_trajectory(4)).unwrap();
        let (r1, r2) = soliton_residual(&profile).unwrap();
        assert!(r1 <= 1e-6, "r1 = {r1:e}");
        assert!(r2 <= 1e-6, "r2 = {r2:e}");
    }

    #[test]
    fn scalar_curvature_blows_down_at_the_singularity() {
        // R x^2 -> 2(sqrt n - 1) - (n - 1) = -(sqrt n - 1)^2 modulo the
        // subdominant n(n-1)/(a^2 x^(2/sqrt n)) term.
        let profile = reconstruct_profile(&standard_trajectory(4)).unwrap();
        let a = profile.a_fit.unwrap();
        let i = 3;
        let x = profile.xs[i];
        let c = curvature(&profile, i).unwrap();
        assert!(c.scalar < 0.0, "R should head to -infinity, got {}", c.scalar);
        let subdominant = 12.0 * x / (a * a);
        assert_relative_eq!(c.scalar * x * x - subdominant, -1.0, epsilon = 2e-2);
    }

    #[test]
    fn gradient_identities_on_explicit_profile() {
        let profile = explicit_profile_n4(1.7, &log_grid(1e-2, 20.0, 3000)).unwrap();
        let rep = gradient_identities(&profile).unwrap();
        // Identity (i) holds to round-off with analytic inputs.
        assert!(rep.traced.drift_rel < 1e-12, "traced drift {:e}", rep.traced.drift_rel);
        // C0 = 36/a^4 for the explicit family.
        let a = 1.7f64;
        assert_relative_eq!(rep.c0, 36.0 / a.powi(4), max_relative = 1e-10);
        assert!(rep.c0_positive);
    }

    #[test]
    fn gradient_identities_on_numeric_profile() {
        let params = SolitonParams::on_explicit_curve(1.0, 1e-4);
        let traj = integrate_trajectory(&params, 0.0, 60.0, 1e-12).unwrap();
        let full = reconstruct_profile(&traj).unwrap();
        // Identity evaluation amplifies trajectory error by 1/x^2; check on
        // the subgrid x >= 1e-2 where f64 leaves the target reachable.
        let keep: Vec<usize> = (0..full.len()).filter(|&i| full.xs[i] >= 1e-2).collect();
        let sub = SolitonProfile {
            xs: keep.iter().map(|&i| full.xs[i]).collect(),
            psi: keep.iter().map(|&i| full.psi[i]).collect(),
            psi1: keep.iter().map(|&i| full.psi1[i]).collect(),
            psi2: keep.iter().map(|&i| full.psi2[i]).collect(),
            omega: keep.iter().map(|&i| full.omega[i]).collect(),
            omega1: keep.iter().map(|&i| full.omega1[i]).collect(),
            ..full.clone()
        };
        let rep = gradient_identities(&sub).unwrap();
        assert!(rep.hamilton.drift_rel < 1e-5, "drift {:e}", rep.hamilton.drift_rel);
        assert!(rep.c0_positive);
        assert_relative_eq!(rep.c0, 36.0, max_relative = 1e-2);
    }

    #[test]
    fn x_crit_of_explicit_family() {
        let profile = explicit_profile_n4(1.0, &log_grid(1e-3, 10.0, 5000)).unwrap();
        assert_relative_eq!(find_x_crit(&profile).unwrap(), 1.0 / 6.0, max_relative = 1e-9);
        let profile = explicit_profile_n4(6f64.sqrt(), &log_grid(1e-3, 10.0, 5000)).unwrap();
        assert_relative_eq!(find_x_crit(&profile).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn x_crit_of_numeric_profile_matches_explicit_root() {
        let params = SolitonParams::on_explicit_curve(1.0, 1e-4);
        let traj = integrate_trajectory(&params, 0.0, 40.0, 1e-12).unwrap();
        let profile = reconstruct_profile(&traj).unwrap();
        let x_crit = find_x_crit(&profile).unwrap();
        assert!((x_crit - 1.0 / 6.0).abs() < 1e-6, "x_crit = {x_crit}");
    }

    #[test]
    fn x_crit_errors() {
        // No sign change: small general-case window.
        let xs = log_grid(1e-3, 1e-2, 64);
        let profile = explicit_profile_n4(1.0, &xs).unwrap();
        assert!(matches!(find_x_crit(&profile), Err(Error::NoCriticalPoint(_))));
        // Multiple sign changes contradict the critical-slice structure.
        let xs: Vec<f64> = (1..60).map(|i| i as f64 * 0.1).collect();
        let mut wavy = explicit_profile_n4(1.0, &xs).unwrap();
        wavy.omega = xs.iter().map(|x| (x * 2.0).sin()).collect();
        wavy.omega1 = xs.iter().map(|x| 2.0 * (x * 2.0).cos()).collect();
        assert!(matches!(find_x_crit(&wavy), Err(Error::DataInconsistency(_))));
    }

    #[test]
    fn degenerate_trajectory_is_rejected() {
        let mut traj = standard_trajectory(4);
        let k = traj.states.len() / 2;
        traj.states[k].w = -1.0;
        assert!(matches!(
            reconstruct_profile(&traj),
            Err(Error::DegenerateTrajectory(_))
        ));
    }

    #[test]
    fn fit_requires_deep_tail() {
        let profile = explicit_profile_n4(1.0, &log_grid(0.05, 10.0, 200)).unwrap();
        assert!(matches!(fit_asymptotics(&profile), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn n9_profile_omega1_asymptote() {
        let profile = reconstruct_profile(&standard_trajectory(9)).unwrap();
        let rep = fit_asymptotics(&profile).unwrap();
        assert!((rep.val_x2_omega1 + 2.0).abs() < 0.05, "x^2 omega' {}", rep.val_x2_omega1);
    }

    #[test]
    fn far_field_slope_matches_bryant_profile() {
        let params = SolitonParams::on_explicit_curve(1.0, 1e-3);
        let traj = integrate_trajectory(&params, 0.0, 320.0, 1e-10).unwrap();
        let profile = reconstruct_profile(&traj).unwrap();
        assert!(*profile.xs.last().unwrap() > 50.0, "x reached {}", profile.xs.last().unwrap());
        let idx: Vec<usize> =
            (0..profile.len()).filter(|&i| profile.xs[i] >= 20.0 && profile.xs[i] <= 50.0).collect();
        let xs: Vec<f64> = idx.iter().map(|&i| profile.xs[i]).collect();
        let ps: Vec<f64> = idx.iter().map(|&i| profile.psi[i]).collect();
        let (_, slope) = power_law_fit(&xs, &ps);
        assert!((slope - 0.5).abs() < 0.05, "far-field slope {slope}");
    }

    #[test]
    fn csv_headers_present() {
        let traj = standard_trajectory(4);
        assert!(trajectory_to_csv(&traj).starts_with("y,W,X,Y\n"));
        let profile = reconstruct_profile(&traj).unwrap();
        assert!(profile_to_csv(&profile).starts_with("x,psi,psi1,psi2,omega,omega1\n"));
    }
}
