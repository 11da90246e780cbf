//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solve `A x = d` for tridiagonal `A` given by sub-, main- and
/// super-diagonals (`sub[0]` and `sup[n-1]` are ignored).
pub fn solve_tridiag(sub: &[f64], diag: &[f64], sup: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 || sub.len() != n || diag.len() != n || sup.len() != n {
        return Err(Error::InvalidInput("tridiagonal system size mismatch".into()));
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(Error::SingularSystem("zero leading pivot".into()));
    }
    c_prime[0] = sup[0] / diag[0];
    d_prime[0] = d[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c_prime[i - 1];
        if den == 0.0 || !den.is_finite() {
            return Err(Error::SingularSystem(format!("pivot failure at row {i}")));
        }
        if i + 1 < n {
            c_prime[i] = sup[i] / den;
        }
        d_prime[i] = (d[i] - sub[i] * d_prime[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_system() {
        let n = 6;
        let x = solve_tridiag(&vec![0.0; n], &vec![1.0; n], &vec![0.0; n], &[1., 2., 3., 4., 5., 6.])
            .unwrap();
        assert_eq!(x, vec![1., 2., 3., 4., 5., 6.]);
    }

    #[test]
    fn known_laplacian_solve() {
        // -u'' = 1 on (0,1), u(0)=u(1)=0, 3 interior nodes, h=1/4.
        let h2 = 0.0625;
        let sub = [0.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0];
        let sup = [-1.0, -1.0, 0.0];
        let d = [h2, h2, h2];
        let x = solve_tridiag(&sub, &diag, &sup, &d).unwrap();
        let exact = |t: f64| 0.5 * t * (1.0 - t);
        for (i, xi) in x.iter().enumerate() {
            let t = 0.25 * (i + 1) as f64;
            assert!((xi - exact(t)).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn residual_vanishes_on_diagonally_dominant_systems(
            vals in proptest::collection::vec(-1.0f64..1.0, 3..40),
        ) {
            let n = vals.len();
            let sub: Vec<f64> = vals.iter().map(|v| 0.3 * v).collect();
            let sup: Vec<f64> = vals.iter().map(|v| 0.3 * (1.0 - v)).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.0 + vals[i].abs()).collect();
            let d: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
            let x = solve_tridiag(&sub, &diag, &sup, &d).unwrap();
            for i in 0..n {
                let mut r = diag[i] * x[i] - d[i];
                if i > 0 { r += sub[i] * x[i - 1]; }
                if i + 1 < n { r += sup[i] * x[i + 1]; }
                prop_assert!(r.abs() < 1e-10);
            }
        }
    }
}
