//! The verification suite: every quantitative target the artifact promises,
//! pinned at its stated tolerance, one pass/fail line each.

use serde::Serialize;
use solitonlab_core::flow::{
    evolve_flow, find_m_of_t, flow_bounds_check, BoundsWindow, ResidualMask,
};
use solitonlab_core::perturb::{
    assemble_linear_step, eta_transform, fitted_order, linear_step, make_initial_data,
    mms_spatial_study, mms_temporal_study, pde_rhs_point, picard_solve, raw_rhs_point,
    reconstruct_and_residual, CoeffPoint, InitialShape, PerturbationState, PrevIterate,
    SolverContext, G_MIN_DEFAULT,
};
use solitonlab_core::soliton::{
    explicit_profile_n4, fit_asymptotics, gradient_identities, integrate_trajectory,
    jacobian_eigenvalues, lyapunov_check, reconstruct_profile, sample_steady_uniform,
    soliton_residual, SolitonCase, SolitonParams, SolitonProfile, TrajectoryState,
};
use solitonlab_core::weights::{
    background_from_flow, comparison_and_a_check, WeightConfig,
};
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub details: String,
    pub runtime_ms: u128,
}

struct Gate {
    passed: bool,
    notes: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Self { passed: true, notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, note: String) {
        if !ok {
            self.passed = false;
        }
        self.notes.push(format!("{}{}", if ok { "" } else { "FAIL: " }, note));
    }

    fn note(&mut self, note: String) {
        self.notes.push(note);
    }

    fn finish(self, name: &str, start: Instant) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            passed: self.passed,
            details: self.notes.join("; "),
            runtime_ms: start.elapsed().as_millis(),
        }
    }
}

fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn restrict_profile(profile: &SolitonProfile, x_lo: f64) -> SolitonProfile {
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

/// 1. Closed-form profile solves the soliton system to 1e-9 with analytic
///    derivative tables on x in [1e-3, 10].
pub fn check_explicit_soliton() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    for a in [1.0, 2.0] {
        let profile = explicit_profile_n4(a, &log_grid(1e-3, 10.0, 4000)).unwrap();
        match soliton_residual(&profile) {
            Ok((r1, r2)) => {
                gate.require(r1 < 1e-9, format!("a={a}: res1 = {r1:.2e} < 1e-9"));
                gate.require(r2 < 1e-9, format!("a={a}: res2 = {r2:.2e} < 1e-9"));
            }
            Err(e) => gate.require(false, format!("a={a}: {e}")),
        }
    }
    gate.finish("explicit-soliton-residual", start)
}

/// 2. Numerical Jacobian at the source has eigenvalues (1, 2, 1-1/sqrt n)
///    within 1e-6 for n in {2, 4, 9}.
pub fn check_linearization() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    for n in [2u32, 4, 9] {
        let source = TrajectoryState::new(0.0, 1.0, 0.0);
        match jacobian_eigenvalues(&source, n, 0.0, 1e-6) {
            Ok(mut eig) => {
                eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut expect = [1.0, 2.0, 1.0 - 1.0 / (n as f64).sqrt()];
                expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let worst = eig
                    .iter()
                    .zip(&expect)
                    .map(|(g, e)| (g - e).abs())
                    .fold(0.0f64, f64::max);
                gate.require(worst < 1e-6, format!("n={n}: max eigenvalue gap {worst:.2e}"));
            }
            Err(e) => gate.require(false, format!("n={n}: {e}")),
        }
    }
    gate.finish("source-linearization", start)
}

fn hc_profile(n: u32, eps: f64, tol: f64, y_hi: f64) -> SolitonProfile {
    let params = SolitonParams::half_complete(n, eps, 1.0);
    let traj = integrate_trajectory(&params, -2.0, y_hi, tol).unwrap();
    reconstruct_profile(&traj).unwrap()
}

/// 3. Singular asymptotics over the smallest resolved decade for
///    n in {2, 4, 9}.
pub fn check_singular_asymptotics() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    for n in [2u32, 4, 9] {
        let sq = (n as f64).sqrt();
        let profile = hc_profile(n, 1e-4, 1e-12, 30.0);
        match fit_asymptotics(&profile) {
            Ok(rep) => {
                gate.require(
                    (rep.slope_psi - 1.0 / sq).abs() < 0.01,
                    format!("n={n}: psi slope {:.4} vs {:.4}", rep.slope_psi, 1.0 / sq),
                );
                gate.require(
                    (rep.val_x_omega - (sq - 1.0)).abs() < 0.01,
                    format!("n={n}: x*omega {:.4} vs {:.4}", rep.val_x_omega, sq - 1.0),
                );
                let target = -(sq - 1.0) / n as f64;
                gate.require(
                    (rep.val_x2_psi2_over_psi - target).abs() < 0.02,
                    format!(
                        "n={n}: x^2 psi''/psi {:.4} vs {:.4}",
                        rep.val_x2_psi2_over_psi, target
                    ),
                );
            }
            Err(e) => gate.require(false, format!("n={n}: {e}")),
        }
    }
    gate.finish("singular-asymptotics", start)
}

/// 4. Half-complete far field matches the smooth-soliton profile:
///    psi slope 0.5 +- 0.05 over x in [20, 50].
pub fn check_far_field() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    let params = SolitonParams::on_explicit_curve(1.0, 1e-3);
    let traj = integrate_trajectory(&params, 0.0, 340.0, 1e-10).unwrap();
    let profile = reconstruct_profile(&traj).unwrap();
    let idx: Vec<usize> =
        (0..profile.len()).filter(|&i| (20.0..=50.0).contains(&profile.xs[i])).collect();
    if idx.len() < 16 {
        gate.require(false, "far field window underresolved".into());
    } else {
        let xs: Vec<f64> = idx.iter().map(|&i| profile.xs[i].ln()).collect();
        let ps: Vec<f64> = idx.iter().map(|&i| profile.psi[i].ln()).collect();
        let slope = {
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ps.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ps).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            sxy / sxx
        };
        gate.require((slope - 0.5).abs() < 0.05, format!("far-field psi slope {slope:.4}"));
    }
    gate.finish("far-field-profile", start)
}

/// 5. Lyapunov residual drops 4x +- 20% under step halving; L monotone
///    non-increasing inside the unit disk.
pub fn check_lyapunov() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    let params = SolitonParams::on_explicit_curve(1.0, 1e-2);
    let coarse = sample_steady_uniform(&params, 12.0, 0.04, 1e-12).unwrap();
    let fine = sample_steady_uniform(&params, 12.0, 0.02, 1e-12).unwrap();
    let rc = lyapunov_check(&coarse).unwrap();
    let rf = lyapunov_check(&fine).unwrap();
    let ratio = rc.max_residual / rf.max_residual;
    gate.require(
        (3.2..=4.8).contains(&ratio),
        format!("halving ratio {ratio:.3} in [3.2, 4.8]"),
    );
    gate.require(
        rc.monotone_nonincreasing == Some(true),
        format!("L monotone non-increasing from L(0) = {:.6}", rc.l_start),
    );
    gate.finish("lyapunov-identity", start)
}

/// 6. Opening-up bounds on the sampling box, m(t) monotone, and the
///    long-horizon limit m(t) -> x_crit within 1e-3.
pub fn check_flow_bounds() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    // a = 3 keeps omega within its asymptote band over the whole box.
    let profile = explicit_profile_n4(3.0, &log_grid(1e-4, 20.0, 500)).unwrap();
    let flow = evolve_flow(
        &profile,
        &lin_grid(0.004, 0.1, 25),
        &lin_grid(0.0, 0.05, 11),
        1e-11,
    )
    .unwrap();
    match flow_bounds_check(&flow, BoundsWindow { x_max: 0.1, t_max: 0.05, slack: 1e-6, gate_to_band: true }) {
        Ok(rep) => gate.note(format!(
            "bounds hold at {} points; worst rho margins ({:.2e}, {:.2e})",
            rep.points_checked, rep.rho_lower_margin, rep.rho_upper_margin
        )),
        Err(e) => gate.require(false, format!("{e}")),
    }
    match find_m_of_t(&flow) {
        Ok(rep) => gate.require(rep.nondecreasing, "m(t) non-decreasing".into()),
        Err(e) => gate.require(false, format!("{e}")),
    }
    // Long horizon toward the critical slice.
    let long = evolve_flow(
        &profile,
        &lin_grid(0.05, 3.0, 24),
        &lin_grid(0.0, 20.0, 21),
        1e-11,
    )
    .unwrap();
    let rep = find_m_of_t(&long).unwrap();
    match rep.x_crit_gap {
        Some(gap) => gate.require(gap < 1e-3, format!("|m(T) - x_crit| = {gap:.2e} < 1e-3")),
        None => gate.require(false, "no critical slice found".into()),
    }
    gate.finish("flow-opening-bounds", start)
}

/// 7. Gradient soliton identities: relative drift of R + omega^2 below 1e-5
///    under refinement, inferred C0 positive.
pub fn check_gradient_identities() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    let run = |tol: f64| -> (f64, f64, bool) {
        let params = SolitonParams::on_explicit_curve(1.0, 1e-4);
        let traj = integrate_trajectory(&params, 0.0, 60.0, tol).unwrap();
        let profile = restrict_profile(&reconstruct_profile(&traj).unwrap(), 1e-2);
        let rep = gradient_identities(&profile).unwrap();
        (rep.hamilton.drift_rel, rep.c0, rep.c0_positive)
    };
    let (drift_coarse, _, _) = run(1e-9);
    let (drift_fine, c0, c0_pos) = run(1e-12);
    gate.require(drift_fine < 1e-5, format!("drift {drift_fine:.2e} < 1e-5"));
    gate.require(
        drift_fine <= drift_coarse,
        format!("drift shrinks under refinement: {drift_coarse:.2e} -> {drift_fine:.2e}"),
    );
    gate.require(c0_pos, format!("C0 = {c0:.6} > 0"));
    gate.finish("gradient-identities", start)
}

fn stability_context(grid_n: usize, dt: f64, t_end: f64) -> SolverContext {
    let profile = explicit_profile_n4(1.0, &log_grid(1e-5, 40.0, 600)).unwrap();
    let x_grid: Vec<f64> =
        (1..=grid_n).map(|i| i as f64 * 20.0 / grid_n as f64).collect();
    let nt = (t_end / dt).round() as usize + 1;
    let t_grid: Vec<f64> = (0..nt).map(|k| k as f64 * t_end / (nt - 1) as f64).collect();
    let flow = evolve_flow(&profile, &x_grid, &t_grid, 1e-11).unwrap();
    let cfg = WeightConfig { alpha: 3, sigma: 10.0, x0: 1.0, case: SolitonCase::HalfComplete };
    SolverContext::new(flow, cfg).unwrap()
}

/// 8. Zero data propagate to zero through 100 linear steps, sup <= 1e-12.
pub fn check_zero_fixed_point() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    let ctx = stability_context(2000, 5e-4, 0.05);
    let nx = ctx.flow.nx();
    let zero = vec![0.0; nx];
    let mut state = PerturbationState::zeros(0.0, nx);
    for k in 1..=100 {
        let prev = PrevIterate { eta: &zero, xi: &zero };
        let problem =
            assemble_linear_step(&prev, &ctx.coeffs, &ctx.flow, k, 5e-4, G_MIN_DEFAULT).unwrap();
        state = linear_step(&problem, &state).unwrap();
    }
    let sup = state.sup_norm();
    gate.require(sup <= 1e-12, format!("sup after 100 steps = {sup:.2e} <= 1e-12"));
    gate.finish("zero-fixed-point", start)
}

/// 9. The transformed and raw systems agree through the chain rule at 50
///    random admissible points to 1e-10 with analytic derivatives.
pub fn check_system_equivalence(seed: u64) -> CheckResult {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let mut gate = Gate::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n: u32 = [2, 3, 4, 9][trial % 4];
        let nf = n as f64;
        let zeta = rng.gen_range(-0.3..0.3);
        let xi = rng.gen_range(-0.3..0.3);
        let zeta_s = rng.gen_range(-1.0..1.0);
        let xi_s = rng.gen_range(-1.0..1.0);
        let xi_ss = rng.gen_range(-2.0..2.0);
        let cp = CoeffPoint {
            ratio: rng.gen_range(0.1..3.0),
            combo: rng.gen_range(-5.0..5.0),
            inv_psi2: rng.gen_range(0.1..4.0),
        };
        let z1 = zeta + 1.0;
        let x1: f64 = xi + 1.0;
        let eta = eta_transform(zeta, xi, n).unwrap();
        let eta_s = 2.0 * z1 * zeta_s / x1.powi(2 * n as i32)
            - 2.0 * nf * z1 * z1 * xi_s / x1.powi(2 * n as i32 + 1);
        let (zeta_t, xi_t_raw) = raw_rhs_point(zeta, xi, zeta_s, xi_s, xi_ss, &cp, n);
        let eta_t_chain = 2.0 * z1 * zeta_t / x1.powi(2 * n as i32)
            - 2.0 * nf * z1 * z1 * xi_t_raw / x1.powi(2 * n as i32 + 1);
        let (eta_t, xi_t) = pde_rhs_point(eta, xi, eta_s, xi_s, xi_ss, &cp, n);
        worst = worst.max((eta_t - eta_t_chain).abs() / eta_t.abs().max(1.0));
        worst = worst.max((xi_t - xi_t_raw).abs() / xi_t.abs().max(1.0));
    }
    gate.require(worst <= 1e-10, format!("worst chain-rule gap {worst:.2e} <= 1e-10"));
    gate.finish("system-equivalence", start)
}

/// 10. Manufactured solutions: temporal order 1 +- 0.2, spatial order
///     2 +- 0.3 across the {500, 1000, 2000}-node refinement.
pub fn check_manufactured_orders() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    let spatial = mms_spatial_study(&[500, 1000, 2000]);
    let sp_order = fitted_order(&spatial);
    gate.require((sp_order - 2.0).abs() <= 0.3, format!("spatial order {sp_order:.3}"));
    let temporal = mms_temporal_study(&[2e-3, 1e-3, 5e-4], 201);
    let t_order = fitted_order(&temporal);
    gate.require((t_order - 1.0).abs() <= 0.2, format!("temporal order {t_order:.3}"));
    gate.finish("manufactured-orders", start)
}

/// 11. Stability run in the well-posedness regime: Picard converges, every
///     contraction estimate below 1, energy within twice the calibrated
///     baseline, reconstructed Ricci-flow residual decreasing under
///     refinement.
pub fn check_stability_run() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    let ctx = stability_context(2000, 1e-4, 0.05);
    // Calibration baseline in the linear regime.
    let tiny =
        make_initial_data(InitialShape::Bump, 1e-6, (0.5, 1.5), &ctx.flow).unwrap();
    let (_, base_report) = picard_solve(&ctx, &tiny, 50, 1e-22).unwrap();
    let c_tilde = base_report.final_energy.total() / base_report.final_energy.e0;
    gate.note(format!("calibrated C~ = {c_tilde:.4}"));

    let initial =
        make_initial_data(InitialShape::Bump, 1e-3, (0.5, 1.5), &ctx.flow).unwrap();
    let (series, report) = picard_solve(&ctx, &initial, 50, 1e-10).unwrap();
    gate.require(report.converged, format!("Picard converged in {} iterations", report.iterations));
    gate.require(
        report.kappa_max < 1.0,
        format!("kappa estimates all below 1 (max {:.4})", report.kappa_max),
    );
    gate.note(format!(
        "two-term kappa < 1/4: {} (estimates {:?})",
        report.kappa_below_quarter,
        report
            .kappa_two_term
            .iter()
            .map(|k| format!("{k:.3}"))
            .collect::<Vec<_>>()
    ));
    let e_total = report.final_energy.total();
    let e0 = report.final_energy.e0;
    gate.require(
        e_total <= 2.0 * c_tilde * e0,
        format!("E = {e_total:.3e} <= 2 C~ E0 = {:.3e}", 2.0 * c_tilde * e0),
    );
    let mask = ResidualMask { skip_x_below: 0.3 };
    let coarse = reconstruct_and_residual(&series, &ctx, mask).unwrap();
    // Refine upward: grids coarser than the default leave the admissible
    // region at the singular corner (the transient there is violent), so the
    // default run is the coarse member of the pair.
    let ctx_fine = stability_context(4000, 5e-5, 0.05);
    let initial_f =
        make_initial_data(InitialShape::Bump, 1e-3, (0.5, 1.5), &ctx_fine.flow).unwrap();
    let (series_f, rep_f) = picard_solve(&ctx_fine, &initial_f, 50, 1e-10).unwrap();
    gate.require(rep_f.converged, "fine comparison run converged".into());
    let fine = reconstruct_and_residual(&series_f, &ctx_fine, mask).unwrap();
    let (rc, rf) = (
        coarse.residual.res_psi.max(coarse.residual.res_chi),
        fine.residual.res_psi.max(fine.residual.res_chi),
    );
    gate.require(
        rf < rc && rc / rf > 1.5,
        format!("reconstructed residual {rc:.3e} -> {rf:.3e} under refinement (ratio {:.2})", rc / rf),
    );
    gate.finish("stability-run", start)
}

/// 12. Weight and coefficient sanity: the ell^2/s^2 window, the corner
///     asymptote of s psi_s/psi, and the vanishing time integral of A^2.
pub fn check_weight_coefficients() -> CheckResult {
    let start = Instant::now();
    let mut gate = Gate::new();
    // Background scale a = 3 keeps the critical slice (a^2/6 = 1.5) beyond
    // the weight crossover x0 = 1, so the small-time comparison estimates
    // apply on all of (0, x0) up to T; at a = 1 the flow stalls at
    // x_crit = 1/6 inside the window and the s^2 lower bound ends early.
    let profile = explicit_profile_n4(3.0, &log_grid(1e-5, 40.0, 600)).unwrap();
    let x_grid: Vec<f64> = (1..=800).map(|i| i as f64 * 20.0 / 800.0).collect();
    let t_grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05 / 20.0).collect();
    let flow = evolve_flow(&profile, &x_grid, &t_grid, 1e-11).unwrap();
    let cfg = WeightConfig { alpha: 3, sigma: 10.0, x0: 1.0, case: SolitonCase::HalfComplete };
    let ctx = SolverContext::new(flow, cfg).unwrap();
    let coeffs = background_from_flow(&ctx.flow).unwrap();
    match comparison_and_a_check(&coeffs, &ctx.cfg, &ctx.flow) {
        Ok(rep) => {
            gate.require(
                rep.ratio_max <= rep.ratio_bound && rep.ratio_min > 0.0,
                format!(
                    "ell^2/s^2 in [{:.4}, {:.4}] within bound {:.1}",
                    rep.ratio_min, rep.ratio_max, rep.ratio_bound
                ),
            );
            let int_a2 = &rep.int_a2;
            let monotone = int_a2.windows(2).all(|w| w[1] >= w[0]);
            gate.require(
                monotone && int_a2[0] == 0.0,
                format!("int A^2 climbs from 0 to {:.3e}", int_a2.last().unwrap()),
            );
        }
        Err(e) => gate.require(false, format!("{e}")),
    }
    // Corner asymptote s psi_s/psi -> 1/sqrt(n).
    let mut worst = 0.0f64;
    for k in 0..ctx.flow.nt().min(6) {
        for i in 0..5 {
            let s = ctx.flow.s.at(k, i);
            let val = s * coeffs.c_ratio.at(k, i);
            worst = worst.max((val - 0.5).abs());
        }
    }
    gate.require(worst < 0.01, format!("corner |s psi_s/psi - 1/2| = {worst:.2e} < 0.01"));
    gate.finish("weight-coefficient-sanity", start)
}

/// The whole acceptance suite in criterion order.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        check_explicit_soliton(),
        check_linearization(),
        check_singular_asymptotics(),
        check_far_field(),
        check_lyapunov(),
        check_flow_bounds(),
        check_gradient_identities(),
        check_zero_fixed_point(),
        check_system_equivalence(seed),
        check_manufactured_orders(),
        check_stability_run(),
        check_weight_coefficients(),
    ]
}
