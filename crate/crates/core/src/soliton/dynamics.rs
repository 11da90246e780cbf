//! Right-hand sides, equilibria and linearization of the phase-space systems.

use super::TrajectoryState;
use crate::error::{Error, Result};
use crate::num::fit::eigenvalues_3x3;

/// Full first-order system:
///
/// ```text
/// W' = W (X^2 - lambda W^2)
/// X' = X^3 - X + Y^2/sqrt(n) + lambda (sqrt(n) - X) W^2
/// Y' = Y (X^2 - X/sqrt(n) - lambda W^2)
/// ```
pub fn ode_rhs(state: &TrajectoryState, n: u32, lambda: f64) -> Result<TrajectoryState> {
    if n < 1 {
        return Err(Error::InvalidInput("n must be >= 1".into()));
    }
    if !state.is_finite() || !lambda.is_finite() {
        return Err(Error::InvalidInput("non-finite phase state".into()));
    }
    Ok(ode_rhs_raw(state, n as f64, lambda))
}

#[inline]
pub(crate) fn ode_rhs_raw(state: &TrajectoryState, nf: f64, lambda: f64) -> TrajectoryState {
    let sq = nf.sqrt();
    let (w, x, y) = (state.w, state.x, state.y);
    let w2 = w * w;
    TrajectoryState {
        w: w * (x * x - lambda * w2),
        x: x * x * x - x + y * y / sq + lambda * (sq - x) * w2,
        y: y * (x * x - x / sq - lambda * w2),
    }
}

/// Reduced steady-case system in (X, Y); the W equation is redundant there.
pub fn steady_rhs(x: f64, y: f64, n: u32) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::InvalidInput("n must be >= 1".into()));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidInput("non-finite phase state".into()));
    }
    let sq = (n as f64).sqrt();
    Ok((x * x * x - x + y * y / sq, y * (x * x - x / sq)))
}

/// Eigenvalues of the linearization at the source (0, 1, 0).
pub fn source_eigenvalues(n: u32) -> [f64; 3] {
    [1.0, 2.0, 1.0 - 1.0 / (n as f64).sqrt()]
}

/// All equilibria of the system, with the eigenvalue triple attached at the
/// source (0, 1, 0) where the linearization is diagonal.
pub fn equilibria_and_linearization(
    n: u32,
    lambda: f64,
) -> Result<Vec<(TrajectoryState, Option<[f64; 3]>)>> {
    if n < 2 {
        return Err(Error::InvalidInput("n must be >= 2".into()));
    }
    let nf = n as f64;
    let sq = nf.sqrt();
    let y_eq = (1.0 - 1.0 / nf).sqrt();
    let mut out = vec![
        (TrajectoryState::new(0.0, 0.0, 0.0), None),
        (TrajectoryState::new(0.0, 1.0, 0.0), Some(source_eigenvalues(n))),
        (TrajectoryState::new(0.0, -1.0, 0.0), None),
        (TrajectoryState::new(0.0, 1.0 / sq, y_eq), None),
        (TrajectoryState::new(0.0, 1.0 / sq, -y_eq), None),
    ];
    if lambda > 0.0 {
        let w_eq = 1.0 / (lambda * nf).sqrt();
        out.push((TrajectoryState::new(w_eq, 1.0 / sq, 0.0), None));
        out.push((TrajectoryState::new(-w_eq, 1.0 / sq, 0.0), None));
    }
    Ok(out)
}

/// Central-difference Jacobian of `ode_rhs` at a point.
pub fn numerical_jacobian(
    point: &TrajectoryState,
    n: u32,
    lambda: f64,
    step: f64,
) -> Result<[[f64; 3]; 3]> {
    let nf = n as f64;
    let as_arr = |s: &TrajectoryState| [s.w, s.x, s.y];
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut plus = *point;
        let mut minus = *point;
        match j {
            0 => {
                plus.w += step;
                minus.w -= step;
            }
            1 => {
                plus.x += step;
                minus.x -= step;
            }
            _ => {
                plus.y += step;
                minus.y -= step;
            }
        }
        let fp = as_arr(&ode_rhs_raw(&plus, nf, lambda));
        let fm = as_arr(&ode_rhs_raw(&minus, nf, lambda));
        for i in 0..3 {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    if jac.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite Jacobian".into()));
    }
    Ok(jac)
}

/// Sorted eigenvalues of the numerical Jacobian at a point.
pub fn jacobian_eigenvalues(
    point: &TrajectoryState,
    n: u32,
    lambda: f64,
    step: f64,
) -> Result<[f64; 3]> {
    Ok(eigenvalues_3x3(&numerical_jacobian(point, n, lambda, step)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equilibrium_rhs_is_zero() {
        let rhs = ode_rhs(&TrajectoryState::new(0.0, 1.0, 0.0), 4, -1.0).unwrap();
        assert_eq!((rhs.w, rhs.x, rhs.y), (0.0, 0.0, 0.0));
    }

    #[test]
    fn sphere_cone_equilibrium_rhs_is_zero() {
        // (0, 1/sqrt(n), sqrt(1-1/n)) annihilates the field for any lambda.
        let st = TrajectoryState::new(0.0, 0.5, 3f64.sqrt() / 2.0);
        for lambda in [-1.0, 0.0, 2.5] {
            let rhs = ode_rhs(&st, 4, lambda).unwrap();
            assert!(rhs.norm() < 1e-15, "lambda={lambda}: {rhs:?}");
        }
    }

    #[test]
    fn hand_evaluated_point_n4_steady() {
        // W' = 0.1*0.81, X' = 0.729 - 0.9 + 0.005, Y' = 0.1*(0.81 - 0.45).
        let rhs = ode_rhs(&TrajectoryState::new(0.1, 0.9, 0.1), 4, 0.0).unwrap();
        assert_relative_eq!(rhs.w, 0.081, epsilon = 1e-15);
        assert_relative_eq!(rhs.x, -0.166, epsilon = 1e-15);
        assert_relative_eq!(rhs.y, 0.036, epsilon = 1e-15);
    }

    #[test]
    fn hand_evaluated_point_with_lambda() {
        // Independent evaluation of the full formulas at a generic point.
        let (w, x, y, lambda) = (0.2, 0.7, 0.3, -1.5);
        let n = 9u32;
        let sq = 3.0;
        let rhs = ode_rhs(&TrajectoryState::new(w, x, y), n, lambda).unwrap();
        assert_relative_eq!(rhs.w, w * (x * x - lambda * w * w), epsilon = 1e-15);
        assert_relative_eq!(
            rhs.x,
            x * x * x - x + y * y / sq + lambda * (sq - x) * w * w,
            epsilon = 1e-15
        );
        assert_relative_eq!(rhs.y, y * (x * x - x / sq - lambda * w * w), epsilon = 1e-15);
    }

    #[test]
    fn steady_rhs_matches_full_system_at_w0() {
        let (dx, dy) = steady_rhs(0.9, 0.1, 4).unwrap();
        assert_relative_eq!(dx, -0.166, epsilon = 1e-15);
        assert_relative_eq!(dy, 0.036, epsilon = 1e-15);
        let (dx, dy) = steady_rhs(1.0, 0.0, 7).unwrap();
        assert_eq!((dx, dy), (0.0, 0.0));
    }

    #[test]
    fn bryant_equilibrium_is_steady_fixed_point() {
        let n = 9u32;
        let (dx, dy) = steady_rhs(1.0 / 3.0, (1.0f64 - 1.0 / 9.0).sqrt(), n).unwrap();
        assert!(dx.abs() < 1e-15 && dy.abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_input() {
        assert!(ode_rhs(&TrajectoryState::new(f64::NAN, 1.0, 0.0), 4, 0.0).is_err());
        assert!(steady_rhs(f64::INFINITY, 0.0, 4).is_err());
    }

    #[test]
    fn equilibria_all_annihilate_rhs_exactly() {
        for (n, lambda) in [(2u32, 0.0), (4, 1.0), (9, -0.7)] {
            for (eq, _) in equilibria_and_linearization(n, lambda).unwrap() {
                let rhs = ode_rhs(&eq, n, lambda).unwrap();
                assert!(
                    rhs.norm() < 1e-15,
                    "n={n} lambda={lambda} eq={eq:?} rhs={rhs:?}"
                );
            }
        }
    }

    #[test]
    fn expanding_case_gains_two_equilibria() {
        let eqs = equilibria_and_linearization(4, 1.0).unwrap();
        assert_eq!(eqs.len(), 7);
        assert!(eqs.iter().any(|(e, _)| (e.w - 0.5).abs() < 1e-15 && (e.x - 0.5).abs() < 1e-15));
        assert_eq!(equilibria_and_linearization(4, 0.0).unwrap().len(), 5);
    }

    #[test]
    fn source_linearization_eigenvalues() {
        for n in [2u32, 4, 9] {
            let eqs = equilibria_and_linearization(n, 0.0).unwrap();
            let (_, eig) = eqs.iter().find(|(e, _)| e.x == 1.0).unwrap();
            let eig = eig.unwrap();
            assert_eq!(eig[0], 1.0);
            assert_eq!(eig[1], 2.0);
            assert_relative_eq!(eig[2], 1.0 - 1.0 / (n as f64).sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn numerical_jacobian_eigenvalues_match_linearization() {
        for n in [2u32, 4, 9] {
            for lambda in [0.0, -1.0, 0.5] {
                let mut got =
                    jacobian_eigenvalues(&TrajectoryState::new(0.0, 1.0, 0.0), n, lambda, 1e-6)
                        .unwrap();
                got.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut expect = source_eigenvalues(n);
                expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for (g, e) in got.iter().zip(&expect) {
                    assert!((g - e).abs() < 1e-6, "n={n} lambda={lambda}: {got:?} vs {expect:?}");
                }
            }
        }
    }
}
